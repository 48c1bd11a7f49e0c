//! Sampled control fields built from top trajectories.
//!
//! A pulse is a time grid with one field sample `(Ω₁, Ω₂, Ω₃)` per grid
//! point. Pulses may consist of several segments; the field is allowed to
//! jump between segments, and consecutive segments share their boundary
//! time, so the grid repeats one time value at every internal boundary.
//! Within a segment times increase strictly.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topdyn::{Family, TopOrbit, TopParameters, Vec3};

/// Default number of samples per generated pulse.
pub const DEFAULT_SAMPLES: usize = 2048;
/// Default Allen–Eberly truncation, `|t + t0| ≤ 12`.
pub const DEFAULT_HALF_WIDTH: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseFamily {
    Zero,
    AllenEberly,
    TreRotating,
    TreOscillating,
    Rect,
    Rotation,
    Loop,
    Concat,
    Imported,
}

impl PulseFamily {
    pub fn tre(family: Family) -> Self {
        match family {
            Family::Rotating => Self::TreRotating,
            Family::Oscillating => Self::TreOscillating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentMeta {
    pub label: String,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseMeta {
    pub family: PulseFamily,
    pub k: Option<f64>,
    pub eps: Option<f64>,
    pub t0: Option<f64>,
    pub duration: f64,
    pub n: usize,
    pub segments: Vec<SegmentMeta>,
}

/// Branch of the Allen–Eberly field, multiplying both components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPulse {
    times: Vec<f64>,
    omega1: Vec<f64>,
    omega2: Vec<f64>,
    omega3: Vec<f64>,
    segment_starts: Vec<usize>,
    meta: PulseMeta,
}

impl ControlPulse {
    /// Validate and assemble a pulse.
    ///
    /// `segment_starts` lists the first sample index of every segment and
    /// must begin with 0. `meta.duration`, `meta.n`, and the segment times
    /// are overwritten from the grid.
    pub fn new(
        times: Vec<f64>,
        omega1: Vec<f64>,
        omega2: Vec<f64>,
        omega3: Vec<f64>,
        segment_starts: Vec<usize>,
        mut meta: PulseMeta,
    ) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::Usage("pulse has no samples".into()));
        }
        if omega1.len() != n || omega2.len() != n || omega3.len() != n {
            return Err(Error::Usage("field arrays do not match the time grid".into()));
        }
        if times[0] != 0.0 {
            return Err(Error::Usage("pulse grid must start at t = 0".into()));
        }
        if segment_starts.first() != Some(&0) || segment_starts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Usage("segment starts must be increasing from 0".into()));
        }
        if segment_starts.iter().any(|&s| s >= n) {
            return Err(Error::Usage("segment start beyond the grid".into()));
        }
        for i in 1..n {
            let boundary = segment_starts.binary_search(&i).is_ok();
            let ok = if boundary { times[i] == times[i - 1] } else { times[i] > times[i - 1] };
            if !ok || !times[i].is_finite() {
                return Err(Error::Usage(format!("time grid invalid at sample {i}")));
            }
        }
        if [&omega1, &omega2, &omega3].iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::Usage("non-finite field sample".into()));
        }
        meta.duration = times[n - 1];
        meta.n = n;
        let labels: Vec<String> = meta.segments.iter().map(|s| s.label.clone()).collect();
        meta.segments = segment_starts
            .iter()
            .enumerate()
            .map(|(j, &s)| {
                let end_idx = segment_starts.get(j + 1).map_or(n - 1, |&e| e - 1);
                SegmentMeta {
                    label: labels.get(j).cloned().unwrap_or_else(|| format!("segment-{j}")),
                    start: times[s],
                    end: times[end_idx],
                }
            })
            .collect();
        Ok(Self { times, omega1, omega2, omega3, segment_starts, meta })
    }

    /// Single-segment pulse from a grid and per-sample field vectors.
    pub fn from_fields(times: Vec<f64>, fields: &[Vec3], meta: PulseMeta) -> Result<Self> {
        let o1 = fields.iter().map(|f| f.x).collect();
        let o2 = fields.iter().map(|f| f.y).collect();
        let o3 = fields.iter().map(|f| f.z).collect();
        Self::new(times, o1, o2, o3, vec![0], meta)
    }

    /// Infer segments from repeated time values, as written by the CSV export.
    pub fn from_samples(times: Vec<f64>, omega1: Vec<f64>, omega2: Vec<f64>, omega3: Vec<f64>, meta: PulseMeta) -> Result<Self> {
        let mut starts = vec![0];
        starts.extend((1..times.len()).filter(|&i| times[i] == times[i - 1]));
        Self::new(times, omega1, omega2, omega3, starts, meta)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }
    pub fn omega1(&self) -> &[f64] {
        &self.omega1
    }
    pub fn omega2(&self) -> &[f64] {
        &self.omega2
    }
    pub fn omega3(&self) -> &[f64] {
        &self.omega3
    }
    pub fn meta(&self) -> &PulseMeta {
        &self.meta
    }
    pub fn segment_starts(&self) -> &[usize] {
        &self.segment_starts
    }
    pub fn len(&self) -> usize {
        self.times.len()
    }
    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
    pub fn duration(&self) -> f64 {
        self.meta.duration
    }

    pub fn field(&self, i: usize) -> Vec3 {
        Vec3::new(self.omega1[i], self.omega2[i], self.omega3[i])
    }

    /// True when samples `i` and `i + 1` lie in the same segment.
    pub fn is_step(&self, i: usize) -> bool {
        self.segment_starts.binary_search(&(i + 1)).is_err()
    }

    /// Replace the meta record; grid-derived fields are kept and segment
    /// labels are taken from `meta` when the segment counts agree.
    pub fn with_meta(mut self, meta: PulseMeta) -> Self {
        let (duration, n) = (self.meta.duration, self.meta.n);
        let mut segments = std::mem::take(&mut self.meta.segments);
        if meta.segments.len() == segments.len() {
            for (s, m) in segments.iter_mut().zip(&meta.segments) {
                s.label = m.label.clone();
            }
        }
        self.meta = PulseMeta { duration, n, segments, ..meta };
        self
    }

    /// Relabel every segment with `label`.
    pub fn labelled(mut self, label: &str) -> Self {
        for s in &mut self.meta.segments {
            s.label = label.to_string();
        }
        self
    }

    fn map_fields<F: Fn(Vec3) -> Vec3>(&self, f: F) -> Self {
        let mut out = self.clone();
        for i in 0..self.len() {
            let v = f(self.field(i));
            out.omega1[i] = v.x;
            out.omega2[i] = v.y;
            out.omega3[i] = v.z;
        }
        out
    }

    /// Rotate the transverse field `(Ω₁, Ω₂)` by `phase` about `e₃`.
    ///
    /// The propagator becomes `Rz(phase)·X·Rz(−phase)`.
    pub fn phase_shifted(&self, phase: f64) -> Self {
        let (s, c) = phase.sin_cos();
        self.map_fields(|v| Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z))
    }

    /// Apply a fixed frame rotation to every field sample.
    ///
    /// The propagator becomes `Q·X·Qᵀ`.
    pub fn rotated(&self, q: &Matrix3<f64>) -> Self {
        self.map_fields(|v| q * v)
    }

    /// Field negated on the reversed grid; its propagator is the inverse.
    pub fn inverse(&self) -> Self {
        let n = self.len();
        let t_end = self.duration();
        let rev = |v: &[f64], sign: f64| v.iter().rev().map(|x| sign * x).collect::<Vec<_>>();
        let times: Vec<f64> = self.times.iter().rev().map(|t| t_end - t).collect();
        // Sample j of the reverse starts a segment when j−1 ended one forward.
        let mut starts = vec![0];
        starts.extend(self.segment_starts.iter().rev().filter(|&&s| s > 0).map(|&s| n - s));
        let mut meta = self.meta.clone();
        meta.segments.reverse();
        Self::new(times, rev(&self.omega1, -1.0), rev(&self.omega2, -1.0), rev(&self.omega3, -1.0), starts, meta)
            .expect("reversal of a valid pulse is valid")
    }
}

fn uniform_grid(duration: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { duration } else { duration * i as f64 / (n - 1) as f64 })
        .collect()
}

fn check_samples(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Usage(format!("need at least 2 samples, got {n}")));
    }
    Ok(())
}

fn meta(family: PulseFamily, k: Option<f64>, eps: Option<f64>, t0: Option<f64>, label: &str) -> PulseMeta {
    PulseMeta {
        family,
        k,
        eps,
        t0,
        duration: 0.0,
        n: 0,
        segments: vec![SegmentMeta { label: label.to_string(), start: 0.0, end: 0.0 }],
    }
}

/// Allen–Eberly field `±(sech(τ)/√(1−k²), 0, k·tanh(τ)/√(1−k²))`, `τ = t + t0`,
/// sampled for `t ∈ [−half_width, half_width]` and shifted to start at 0.
pub fn allen_eberly_pulse(p: &TopParameters, t0: f64, half_width: f64, n: usize, branch: Branch) -> Result<ControlPulse> {
    check_samples(n)?;
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Domain(format!("half width {half_width} must be positive")));
    }
    let k = p.k();
    let scale = branch.sign() / (1.0 - k * k).sqrt();
    let times = uniform_grid(2.0 * half_width, n);
    let fields: Vec<Vec3> = times
        .iter()
        .map(|t| {
            let tau = t - half_width + t0;
            Vec3::new(scale / tau.cosh(), 0.0, scale * k * tau.tanh())
        })
        .collect();
    ControlPulse::from_fields(times, &fields, meta(PulseFamily::AllenEberly, Some(k), None, Some(t0), "allen-eberly"))
}

/// Field along the near-separatrix orbit for one pole-to-pole transfer.
pub fn tre_pulse(p: &TopParameters, eps: f64, family: Family, n: usize) -> Result<ControlPulse> {
    check_samples(n)?;
    let orbit = TopOrbit::new(p, eps, family)?;
    let duration = orbit.transfer_time();
    let pulse = orbit_pulse(&orbit, 0.0, duration, Direction::Forward, n)?;
    Ok(pulse.with_meta(meta(PulseFamily::tre(family), Some(p.k()), Some(eps), None, "tre")))
}

/// Traversal sense along an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reversed,
}

/// Field that drives a state along `orbit` starting from `orbit.state(start)`.
///
/// `Forward` samples `Ω(start + t)`. `Reversed` samples `−Ω(start − t)`,
/// which walks the same curve backwards.
pub fn orbit_pulse(orbit: &TopOrbit, start: f64, duration: f64, direction: Direction, n: usize) -> Result<ControlPulse> {
    check_samples(n)?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::Domain(format!("duration {duration} must be positive")));
    }
    let times = uniform_grid(duration, n);
    let fields: Vec<Vec3> = times
        .iter()
        .map(|&t| match direction {
            Direction::Forward => orbit.field(start + t),
            Direction::Reversed => -orbit.field(start - t),
        })
        .collect();
    let m = meta(PulseFamily::Loop, Some(orbit.params().k()), Some(orbit.eps()), Some(start), "loop");
    ControlPulse::from_fields(times, &fields, m)
}

/// Constant `Ω₁ = amplitude` for duration `π/amplitude`.
pub fn rect_pi_pulse(amplitude: f64, n: usize) -> Result<ControlPulse> {
    rect_rotation(std::f64::consts::PI, 0.0, amplitude, n).map(|p| {
        let m = meta(PulseFamily::Rect, None, None, None, "rect");
        p.with_meta(m)
    })
}

/// Constant transverse field of the given amplitude at azimuth `phase`,
/// long enough to rotate by `angle > 0`.
pub fn rect_rotation(angle: f64, phase: f64, amplitude: f64, n: usize) -> Result<ControlPulse> {
    check_samples(n)?;
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::Domain(format!("amplitude {amplitude} must be positive")));
    }
    if !(angle > 0.0 && angle.is_finite()) {
        return Err(Error::Domain(format!("rotation angle {angle} must be positive")));
    }
    let field = amplitude * Vec3::new(phase.cos(), phase.sin(), 0.0);
    let times = uniform_grid(angle / amplitude, n);
    let fields = vec![field; n];
    ControlPulse::from_fields(times, &fields, meta(PulseFamily::Rotation, None, None, None, "rotation"))
}

/// Field identically zero over `duration ≥ 0`.
pub fn zero_pulse(duration: f64, n: usize) -> Result<ControlPulse> {
    let n = if duration == 0.0 { 1 } else { n };
    if duration > 0.0 {
        check_samples(n)?;
    } else if duration != 0.0 || !duration.is_finite() {
        return Err(Error::Domain(format!("duration {duration} must be non-negative")));
    }
    let times = if n == 1 { vec![0.0] } else { uniform_grid(duration, n) };
    let fields = vec![Vec3::zeros(); n];
    ControlPulse::from_fields(times, &fields, meta(PulseFamily::Zero, None, None, None, "zero"))
}

/// Join pulses end to end; each input segment stays a segment.
pub fn concat(pulses: &[ControlPulse]) -> Result<ControlPulse> {
    let first = pulses.first().ok_or_else(|| Error::Usage("concat of an empty list".into()))?;
    if pulses.len() == 1 {
        return Ok(first.clone());
    }
    let total: usize = pulses.iter().map(|p| p.len()).sum();
    let (mut t, mut o1, mut o2, mut o3) =
        (Vec::with_capacity(total), Vec::with_capacity(total), Vec::with_capacity(total), Vec::with_capacity(total));
    let mut starts = Vec::new();
    let mut segments = Vec::new();
    let mut offset = 0.0;
    for p in pulses {
        let base = t.len();
        starts.extend(p.segment_starts.iter().map(|s| s + base));
        segments.extend(p.meta.segments.iter().cloned());
        t.extend(p.times.iter().map(|x| x + offset));
        o1.extend_from_slice(&p.omega1);
        o2.extend_from_slice(&p.omega2);
        o3.extend_from_slice(&p.omega3);
        offset += p.duration();
    }
    let m = PulseMeta {
        family: PulseFamily::Concat,
        k: None,
        eps: None,
        t0: None,
        duration: 0.0,
        n: 0,
        segments,
    };
    ControlPulse::new(t, o1, o2, o3, starts, m)
}

/// Frame rotation taking `e₃` to `e₂`: `(x, y, z) ↦ (x, z, −y)`.
///
/// A pulse designed to invert `e₃` inverts `e₂` after this rotation.
pub fn pole_to_e2() -> Matrix3<f64> {
    Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0)
}
