//! NOT gate from one pole-to-pole transfer.
//!
//! After the transfer time the frame is `F·Rot_{L(0)}(φ)` with `F` the
//! half-turn about the orbit's center axis. The twist `φ` depends on the
//! orbit; tuning a knob until `φ = 0` leaves exactly the half-turn, i.e.
//! `−iσ₁` for the rotating family.
//!
//! A stretch of free evolution is not offered as a knob: with the field
//! switched off the propagator does not change.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::montgomery::samples_for;
use crate::error::{Error, Result};
use crate::propagate::{
    adjoint_map, final_rotation, final_unitary, gate_fidelity, pauli, signed_rotation_angle, ErrorParams, Mat2, Mat3,
};
use crate::pulsegen::{tre_pulse, ControlPulse};
use crate::roots::{linear_grid, log_grid, scan_brackets, solve_with_values, Bracket, RootOptions};
use crate::topdyn::{tre_initial, Family, TopParameters};

/// Parameter varied while tuning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NotKnob {
    /// Distance to the separatrix, at fixed `k`.
    Eps,
    /// Shape parameter, at fixed `eps`.
    K,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NotSearch {
    pub knob: NotKnob,
    /// Bracket for the knob.
    pub range: (f64, f64),
    /// Value of the parameter that is held fixed (`eps` for the `K` knob).
    pub fixed_eps: f64,
    pub family: Family,
    /// Step bound of the scan.
    pub scan_step: f64,
    pub scan_points: usize,
    /// Step bound of the final pulse and of the root polish.
    pub max_step: f64,
    pub residual_tol: f64,
}

impl NotSearch {
    pub fn eps(range: (f64, f64)) -> Self {
        Self {
            knob: NotKnob::Eps,
            range,
            fixed_eps: 0.01,
            family: Family::Rotating,
            scan_step: 4e-3,
            scan_points: 64,
            max_step: 5e-4,
            residual_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotReport {
    pub knob: NotKnob,
    pub family: Family,
    pub k: f64,
    pub eps: f64,
    pub duration: f64,
    pub samples: usize,
    /// `‖R(T) − F‖_F`.
    pub residual: f64,
    /// `|tr(U†·(−iσ))|/2` against the half-turn target.
    pub fidelity: f64,
    /// Twist angle left after the half-turn.
    pub twist: f64,
    pub converged: bool,
    pub iterations: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct TunedNot {
    pub pulse: ControlPulse,
    pub report: NotReport,
}

/// Half-turn that one transfer of `family` approximates, with its spin form.
pub fn flip_target(family: Family) -> (Mat3, Mat2) {
    let i = num_complex::Complex64::new(0.0, 1.0);
    match family {
        Family::Rotating => (Mat3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0)), pauli()[0] * (-i)),
        Family::Oscillating => (Mat3::from_diagonal(&Vector3::new(-1.0, 1.0, -1.0)), pauli()[1] * (-i)),
    }
}

fn pulse_for(k: f64, eps: f64, family: Family, max_step: f64) -> Result<ControlPulse> {
    let p = TopParameters::new(k)?;
    let t = crate::topdyn::transfer_period(&p, eps, family)?;
    tre_pulse(&p, eps, family, samples_for(t, max_step))
}

fn twist(k: f64, eps: f64, family: Family, max_step: f64) -> Result<f64> {
    let pulse = pulse_for(k, eps, family, max_step)?;
    let r = final_rotation(&pulse, &ErrorParams::default())?;
    let (f, _) = flip_target(family);
    let l0 = tre_initial(&TopParameters::new(k)?, eps, family)?.vector();
    Ok(signed_rotation_angle(&(f * r), &l0))
}

type Knob = Box<dyn Fn(f64) -> f64>;

/// Tune `eps` in `eps_range` at fixed `k`.
pub fn tune_not_gate(p: &TopParameters, eps_range: (f64, f64)) -> Result<TunedNot> {
    tune_not_gate_with(p, &NotSearch::eps(eps_range))
}

/// Tune the knob selected in `search`; `p` supplies `k` for the `Eps` knob.
///
/// The twist is scanned on a coarse grid, sign changes that are not angle
/// wraps are polished at the fine step, and the root with the shortest
/// pulse is kept. Without a sign change the best scanned point is returned
/// with `converged = false`.
pub fn tune_not_gate_with(p: &TopParameters, search: &NotSearch) -> Result<TunedNot> {
    let (lo, hi) = search.range;
    if !(lo < hi) {
        return Err(Error::Usage(format!("empty bracket [{lo}, {hi}]")));
    }
    let family = search.family;
    let (k_of, eps_of): (Knob, Knob) = match search.knob {
        NotKnob::Eps => {
            if !(lo > 0.0 && hi < 1.0) {
                return Err(Error::Domain(format!("eps bracket [{lo}, {hi}] outside (0, 1)")));
            }
            let k = p.k();
            (Box::new(move |_| k), Box::new(|x| x))
        }
        NotKnob::K => {
            if !(lo > 0.0 && hi < 1.0) {
                return Err(Error::Domain(format!("k bracket [{lo}, {hi}] outside (0, 1)")));
            }
            let e = search.fixed_eps;
            (Box::new(|x| x), Box::new(move |_| e))
        }
    };
    let objective = |x: f64, step: f64| twist(k_of(x), eps_of(x), family, step);

    let grid = match search.knob {
        NotKnob::Eps => log_grid(lo, hi, search.scan_points.max(2)),
        NotKnob::K => linear_grid(lo, hi, search.scan_points.max(2)),
    };
    let coarse: Vec<f64> = grid.iter().map(|&x| objective(x, search.scan_step)).collect::<Result<_>>()?;
    let mut brackets = scan_brackets(&grid, &coarse, Some(std::f64::consts::FRAC_PI_2));
    // Shortest pulse first: largest eps, or smallest k.
    match search.knob {
        NotKnob::Eps => brackets.reverse(),
        NotKnob::K => {}
    }

    let mut best: Option<(f64, f64, usize, bool)> = None;
    for Bracket { lo: (a, _), hi: (b, _) } in brackets {
        let fa = objective(a, search.max_step)?;
        let fb = objective(b, search.max_step)?;
        if fa.signum() == fb.signum() || fa.abs() >= std::f64::consts::FRAC_PI_2 || fb.abs() >= std::f64::consts::FRAC_PI_2 {
            continue;
        }
        let mut failure = None;
        let root = solve_with_values(
            |x| match objective(x, search.max_step) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    f64::NAN
                }
            },
            (a, fa),
            (b, fb),
            RootOptions::default(),
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let root = root?;
        best = Some((root.x, root.fx, root.iterations, root.converged));
        break;
    }

    let (x, tw, iterations, solved, message) = match best {
        Some((x, f, it, ok)) => (x, f, it, ok, String::from("root bracketed and polished")),
        None => {
            let (i, _) = coarse
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .expect("non-empty grid");
            let f = objective(grid[i], search.max_step)?;
            (grid[i], f, 0, false, String::from("no sign change of the twist in the bracket"))
        }
    };

    let (k, eps) = (k_of(x), eps_of(x));
    let pulse = pulse_for(k, eps, family, search.max_step)?;
    let r = final_rotation(&pulse, &ErrorParams::default())?;
    let u = final_unitary(&pulse, &ErrorParams::default())?;
    let (f, target) = flip_target(family);
    let residual = (r - f).norm();
    let converged = solved && residual <= search.residual_tol;
    let message = if solved && !converged {
        format!("twist root found but residual {residual:.3e} exceeds {:.1e}", search.residual_tol)
    } else {
        message
    };
    debug_assert!(adjoint_map(&u).is_ok());
    let report = NotReport {
        knob: search.knob,
        family,
        k,
        eps,
        duration: pulse.duration(),
        samples: pulse.len(),
        residual,
        fidelity: gate_fidelity(&u, &target),
        twist: tw,
        converged,
        iterations,
        message,
    };
    Ok(TunedNot { pulse, report })
}
