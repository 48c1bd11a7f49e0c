//! CSV export and import.
//!
//! Floats are written as `{:.16e}`, seventeen significant digits, which
//! Rust parses back to the same `f64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::propagate::{AxisAngle, PropagatorPath, Trajectory};
use crate::pulsegen::{ControlPulse, PulseFamily, PulseMeta};
use crate::robustness::RobustnessMap;

pub const PULSE_HEADER: [&str; 4] = ["t", "omega1", "omega2", "omega3"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "M1", "M2", "M3"];
pub const MAP_HEADER: [&str; 4] = ["alpha", "delta", "J", "flag"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn check_time_scale(time_scale: f64) -> Result<()> {
    if time_scale > 0.0 && time_scale.is_finite() {
        Ok(())
    } else {
        Err(Error::Usage(format!("time scale must be positive, got {time_scale}")))
    }
}

/// Pulse samples; the time column is multiplied by `time_scale`.
pub fn write_pulse_csv<W: Write>(w: W, pulse: &ControlPulse, time_scale: f64) -> Result<()> {
    check_time_scale(time_scale)?;
    let mut out = writer(w);
    out.write_record(PULSE_HEADER)?;
    for i in 0..pulse.len() {
        out.write_record([
            fmt_f64(pulse.times()[i] * time_scale),
            fmt_f64(pulse.omega1()[i]),
            fmt_f64(pulse.omega2()[i]),
            fmt_f64(pulse.omega3()[i]),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn parse(field: &str, line: usize) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Format(format!("line {line}: cannot parse {field:?} as a number")))
}

/// Read a pulse written by [`write_pulse_csv`]. Times are divided by
/// `time_scale`; segments are recovered from repeated times.
pub fn read_pulse_csv<R: Read>(r: R, time_scale: f64, meta: Option<PulseMeta>) -> Result<ControlPulse> {
    check_time_scale(time_scale)?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().map(str::trim).ne(PULSE_HEADER) {
        return Err(Error::Format(format!("expected header {}", PULSE_HEADER.join(","))));
    }
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Format(format!("line {}: expected 4 columns", row + 2)));
        }
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(parse(&rec[c], row + 2)?);
        }
    }
    let [t, o1, o2, o3] = cols;
    let t = if time_scale == 1.0 { t } else { t.into_iter().map(|x| x / time_scale).collect() };
    let meta = meta.unwrap_or(PulseMeta {
        family: PulseFamily::Imported,
        k: None,
        eps: None,
        t0: None,
        duration: 0.0,
        n: 0,
        segments: Vec::new(),
    });
    ControlPulse::from_samples(t, o1, o2, o3, meta)
}

pub fn write_trajectory_csv<W: Write>(w: W, traj: &Trajectory, time_scale: f64) -> Result<()> {
    check_time_scale(time_scale)?;
    let mut out = writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for (t, m) in traj.times.iter().zip(&traj.states) {
        out.write_record([fmt_f64(t * time_scale), fmt_f64(m.x), fmt_f64(m.y), fmt_f64(m.z)])?;
    }
    out.flush()?;
    Ok(())
}

/// `t`, `R11..R33` row-major, then `re/im` of `U00, U01, U10, U11`.
pub fn write_propagator_csv<W: Write>(w: W, path: &PropagatorPath, time_scale: f64) -> Result<()> {
    check_time_scale(time_scale)?;
    let mut out = writer(w);
    let mut header = vec!["t".to_string()];
    for i in 1..=3 {
        for j in 1..=3 {
            header.push(format!("R{i}{j}"));
        }
    }
    for i in 0..2 {
        for j in 0..2 {
            header.push(format!("U{i}{j}_re"));
            header.push(format!("U{i}{j}_im"));
        }
    }
    out.write_record(&header)?;
    for (idx, t) in path.times.iter().enumerate() {
        let mut rec = vec![fmt_f64(t * time_scale)];
        let r = &path.rotations[idx];
        for i in 0..3 {
            for j in 0..3 {
                rec.push(fmt_f64(r[(i, j)]));
            }
        }
        let u = &path.unitaries[idx];
        for i in 0..2 {
            for j in 0..2 {
                rec.push(fmt_f64(u[(i, j)].re));
                rec.push(fmt_f64(u[(i, j)].im));
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// `t,n1,n2,n3,angle,defined`.
pub fn write_axis_angle_csv<W: Write>(w: W, times: &[f64], axes: &[AxisAngle], time_scale: f64) -> Result<()> {
    check_time_scale(time_scale)?;
    if times.len() != axes.len() {
        return Err(Error::Usage("axis-angle rows do not match the time grid".into()));
    }
    let mut out = writer(w);
    out.write_record(["t", "n1", "n2", "n3", "angle", "defined"])?;
    for (t, a) in times.iter().zip(axes) {
        out.write_record([
            fmt_f64(t * time_scale),
            fmt_f64(a.axis[0]),
            fmt_f64(a.axis[1]),
            fmt_f64(a.axis[2]),
            fmt_f64(a.angle),
            (a.defined as u8).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Row-major over `alpha`, then `delta`. Failed cells carry `NaN` and flag 1.
pub fn write_map_csv<W: Write>(w: W, map: &RobustnessMap) -> Result<()> {
    let mut out = writer(w);
    out.write_record(MAP_HEADER)?;
    let nd = map.delta_grid.len();
    for (ia, a) in map.alpha_grid.iter().enumerate() {
        for (id, d) in map.delta_grid.iter().enumerate() {
            let c = ia * nd + id;
            let v = if map.flags[c] { "NaN".to_string() } else { fmt_f64(map.values[c]) };
            out.write_record([fmt_f64(*a), fmt_f64(*d), v, (map.flags[c] as u8).to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Rows of a map CSV as `(alpha, delta, J, flag)`.
pub fn read_map_csv<R: Read>(r: R) -> Result<Vec<(f64, f64, f64, bool)>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    if rdr.headers()?.iter().map(str::trim).ne(MAP_HEADER) {
        return Err(Error::Format(format!("expected header {}", MAP_HEADER.join(","))));
    }
    rdr.records()
        .enumerate()
        .map(|(row, rec)| {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::Format(format!("line {}: expected 4 columns", row + 2)));
            }
            let flag = match rec[3].trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::Format(format!("line {}: bad flag {other:?}", row + 2))),
            };
            Ok((parse(&rec[0], row + 2)?, parse(&rec[1], row + 2)?, parse(&rec[2], row + 2)?, flag))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulsegen::{concat, rect_pi_pulse, zero_pulse};

    #[test]
    fn pulse_round_trip_keeps_segments() {
        let p = concat(&[rect_pi_pulse(1.3, 17).unwrap(), zero_pulse(0.7, 5).unwrap()]).unwrap();
        let mut buf = Vec::new();
        write_pulse_csv(&mut buf, &p, 1.0).unwrap();
        let q = read_pulse_csv(buf.as_slice(), 1.0, Some(p.meta().clone())).unwrap();
        assert_eq!(p, q);
        let mut again = Vec::new();
        write_pulse_csv(&mut again, &q, 1.0).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn header_is_checked() {
        let bad = "t,a,b,c\n0,0,0,0\n";
        assert!(matches!(read_pulse_csv(bad.as_bytes(), 1.0, None), Err(Error::Format(_))));
        let bad = "t,omega1,omega2,omega3\n0,x,0,0\n";
        assert!(matches!(read_pulse_csv(bad.as_bytes(), 1.0, None), Err(Error::Format(_))));
    }

    #[test]
    fn time_scale_only_touches_time() {
        let p = rect_pi_pulse(2.0, 9).unwrap();
        let mut buf = Vec::new();
        write_pulse_csv(&mut buf, &p, 1e-3).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let last = text.lines().last().unwrap();
        let t: f64 = last.split(',').next().unwrap().parse().unwrap();
        assert!((t - p.duration() * 1e-3).abs() < 1e-18);
        let q = read_pulse_csv(buf.as_slice(), 1e-3, None).unwrap();
        assert_eq!(q.omega1(), p.omega1());
        assert!(write_pulse_csv(Vec::new(), &p, 0.0).is_err());
    }
}
