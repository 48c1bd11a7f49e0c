//! Phase budget of a closed loop of `L`.
//!
//! After one period the frame has turned about `L(0)` by `total`, which
//! splits as `total ≡ dynamical − geometric (mod 2π)` with
//! `dynamical = ∫ Ω·L dt` and `geometric = −S`, `S` being the solid angle
//! on the left of the oriented loop. Both terms flip sign when the loop is
//! walked backwards.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagate::{bloch_propagate, final_rotation, signed_rotation_angle, ErrorParams};
use crate::pulsegen::{orbit_pulse, ControlPulse, Direction};
use crate::topdyn::{BodyState, Family, TopOrbit, TopParameters, Vec3};

/// Default largest time step when a loop is sampled for propagation.
pub const LOOP_MAX_STEP: f64 = 2e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseBudget {
    /// Rotation angle of the frame about `L(0)`, in `(−π, π]`.
    pub total: f64,
    pub dynamical: f64,
    pub geometric: f64,
}

impl PhaseBudget {
    /// `|total − (dynamical − geometric)|` reduced mod 2π.
    pub fn mismatch(&self) -> f64 {
        wrap_pi(self.total - (self.dynamical - self.geometric)).abs()
    }
}

/// Reduce to `(−π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Reduce a solid angle to `(−2π, 2π]`.
pub fn wrap_solid(x: f64) -> f64 {
    let y = x.rem_euclid(4.0 * PI);
    if y > 2.0 * PI {
        y - 4.0 * PI
    } else {
        y
    }
}

/// Solid angle on the left of a closed polygon of unit vectors, joined by
/// great-circle arcs, in `(−2π, 2π]`.
///
/// The last point is joined back to the first.
pub fn polygon_solid_angle(points: &[Vec3]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Usage("a loop needs at least 3 points".into()));
    }
    let n = points.len();
    let normal: Vec3 = (0..n).map(|i| points[i].cross(&points[(i + 1) % n])).sum();
    let apex = if normal.norm() > 1e-12 {
        normal.normalize()
    } else {
        points.iter().sum::<Vec3>().normalize()
    };
    let mut total = 0.0;
    for i in 0..n {
        let p = points[i];
        let q = points[(i + 1) % n];
        let num = apex.dot(&p.cross(&q));
        let den = 1.0 + apex.dot(&p) + p.dot(&q) + q.dot(&apex);
        total += 2.0 * num.atan2(den);
    }
    Ok(wrap_solid(total))
}

/// Budget of one period of the orbit through `tre_initial(p, eps, family)`.
pub fn montgomery_phase(p: &TopParameters, eps: f64, family: Family) -> Result<PhaseBudget> {
    let orbit = TopOrbit::new(p, eps, family)?;
    orbit_budget(&orbit, 0.0, Direction::Forward, LOOP_MAX_STEP)
}

/// Budget of one period of `orbit` from `orbit.state(start)`.
///
/// `total` comes from propagating the sampled field; `dynamical` and
/// `geometric` are evaluated in closed form on the orbit.
pub fn orbit_budget(orbit: &TopOrbit, start: f64, direction: Direction, max_step: f64) -> Result<PhaseBudget> {
    let period = orbit.period();
    let l0 = orbit.state(start);
    let end = match direction {
        Direction::Forward => orbit.state(start + period),
        Direction::Reversed => orbit.state(start - period),
    };
    if (end - l0).norm() > 1e-9 {
        return Err(Error::Usage("trajectory does not close after one period".into()));
    }
    let pulse = orbit_pulse(orbit, start, period, direction, samples_for(period, max_step))?;
    let r = final_rotation(&pulse, &ErrorParams::default())?;
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Reversed => -1.0,
    };
    Ok(PhaseBudget {
        total: signed_rotation_angle(&r, &l0),
        dynamical: sign * orbit.dynamical_phase(),
        geometric: wrap_solid(-sign * orbit.solid_angle()),
    })
}

/// Budget of an arbitrary pulse that carries `m0` around a closed loop.
///
/// `dynamical` is the trapezoid sum of `Ω·M` and `geometric` the polygon
/// solid angle of the sampled path, so both carry the grid's error.
pub fn loop_budget(pulse: &ControlPulse, m0: &BodyState, closure_tol: f64) -> Result<PhaseBudget> {
    let err = ErrorParams::default();
    let traj = bloch_propagate(pulse, m0, &err)?;
    let last = traj.final_state().expect("non-empty trajectory");
    if (last - m0.vector()).norm() > closure_tol {
        return Err(Error::Usage(format!("loop not closed: end misses start by {:.3e}", (last - m0.vector()).norm())));
    }
    let r = final_rotation(pulse, &err)?;
    let t = pulse.times();
    let mut dynamical = 0.0;
    for i in 0..pulse.len() - 1 {
        if pulse.is_step(i) {
            let a = pulse.field(i).dot(&traj.states[i]);
            let b = pulse.field(i + 1).dot(&traj.states[i + 1]);
            dynamical += 0.5 * (a + b) * (t[i + 1] - t[i]);
        }
    }
    let mut pts = traj.states.clone();
    pts.pop();
    pts.dedup();
    Ok(PhaseBudget {
        total: signed_rotation_angle(&r, &m0.vector()),
        dynamical,
        geometric: wrap_solid(-polygon_solid_angle(&pts)?),
    })
}

/// Samples so that no step exceeds `max_step`.
pub fn samples_for(duration: f64, max_step: f64) -> usize {
    ((duration / max_step).ceil() as usize).max(1) + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps() {
        assert!((wrap_pi(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_pi(-0.5) + 0.5).abs() < 1e-15);
        assert!((wrap_solid(-2.0 * PI) - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn octant_triangle() {
        let s = polygon_solid_angle(&[Vec3::x(), Vec3::y(), Vec3::z()]).unwrap();
        assert!((s - PI / 2.0).abs() < 1e-14);
        let r = polygon_solid_angle(&[Vec3::z(), Vec3::y(), Vec3::x()]).unwrap();
        assert!((r + PI / 2.0).abs() < 1e-14);
    }
}
