//! Figures of merit and sweeps over the field errors `(α, δ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagate::{final_state, final_unitary, gate_fidelity, ErrorParams, Mat2, Trajectory};
use crate::pulsegen::{ControlPulse, PulseMeta};
use crate::topdyn::{transfer_period, BodyState, Family, TopParameters};

/// `J₃ = −M₃(t_f)`.
pub fn merit_j3(traj: &Trajectory) -> Result<f64> {
    traj.final_state().map(|m| -m.z).ok_or_else(|| Error::Usage("empty trajectory".into()))
}

/// `J₂ = −M₂(t_f)`.
pub fn merit_j2(traj: &Trajectory) -> Result<f64> {
    traj.final_state().map(|m| -m.y).ok_or_else(|| Error::Usage("empty trajectory".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Merit {
    J2,
    J3,
    /// Gate fidelity of the final propagator against a target.
    Fidelity(Mat2),
}

impl Merit {
    pub fn tag(&self) -> &'static str {
        match self {
            Merit::J2 => "J2",
            Merit::J3 => "J3",
            Merit::Fidelity(_) => "fidelity",
        }
    }
}

/// Merit of one cell; `None` when the propagation fails or is not finite.
pub fn evaluate_cell(pulse: &ControlPulse, m0: &BodyState, err: &ErrorParams, merit: &Merit) -> Option<f64> {
    let v = match merit {
        Merit::J2 => final_state(pulse, m0, err).ok().map(|m| -m.y),
        Merit::J3 => final_state(pulse, m0, err).ok().map(|m| -m.z),
        Merit::Fidelity(target) => final_unitary(pulse, err).ok().map(|u| gate_fidelity(&u, target)),
    }?;
    v.is_finite().then_some(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub pulse: PulseMeta,
    pub merit: String,
    pub m0: [f64; 3],
}

/// Merit on the grid `alpha_grid × delta_grid`, row-major over `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessMap {
    pub alpha_grid: Vec<f64>,
    pub delta_grid: Vec<f64>,
    /// `NaN` where `flags` is set.
    pub values: Vec<f64>,
    /// True for cells whose propagation failed.
    pub flags: Vec<bool>,
    pub meta: MapMeta,
}

impl RobustnessMap {
    pub fn value(&self, i_alpha: usize, i_delta: usize) -> f64 {
        self.values[i_alpha * self.delta_grid.len() + i_delta]
    }
}

/// One propagation per cell, spread over `workers` threads (0 picks the
/// default). Results are gathered in grid order, so the map does not
/// depend on scheduling.
pub fn sweep(
    pulse: &ControlPulse,
    m0: &BodyState,
    alpha_grid: &[f64],
    delta_grid: &[f64],
    merit: &Merit,
    workers: usize,
) -> Result<RobustnessMap> {
    if alpha_grid.is_empty() || delta_grid.is_empty() {
        return Err(Error::Usage("sweep grids must be non-empty".into()));
    }
    let nd = delta_grid.len();
    let cells = alpha_grid.len() * nd;
    let run = || -> Vec<Option<f64>> {
        (0..cells)
            .into_par_iter()
            .map(|c| evaluate_cell(pulse, m0, &ErrorParams::new(alpha_grid[c / nd], delta_grid[c % nd]), merit))
            .collect()
    };
    let raw = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("worker pool: {e}")))?
        .install(run);
    Ok(RobustnessMap {
        alpha_grid: alpha_grid.to_vec(),
        delta_grid: delta_grid.to_vec(),
        values: raw.iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
        flags: raw.iter().map(Option::is_none).collect(),
        meta: MapMeta { pulse: pulse.meta().clone(), merit: merit.tag().into(), m0: m0.vector().into() },
    })
}

/// Least-squares fit `T = a·ln(1/ε) + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub a: f64,
    pub b: f64,
    pub r_squared: f64,
}

/// Fit `values = a·ln(1/eps) + b`; needs ≥ 3 samples over ≥ 2 decades.
pub fn fit_log(eps: &[f64], values: &[f64]) -> Result<LogFit> {
    if eps.len() != values.len() {
        return Err(Error::Usage("sample arrays differ in length".into()));
    }
    if eps.len() < 3 {
        return Err(Error::Usage("need at least 3 samples".into()));
    }
    if eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Domain("eps samples must be positive".into()));
    }
    let (lo, hi) = eps.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &e| (l.min(e), h.max(e)));
    if hi / lo < 100.0 * (1.0 - 1e-12) {
        return Err(Error::Usage("eps samples span less than two decades".into()));
    }
    let x: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(values).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = values.iter().map(|v| (v - my).powi(2)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss_res: f64 = x.iter().zip(values).map(|(xv, yv)| (yv - (a * xv + b)).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LogFit { a, b, r_squared })
}

/// Fit of the transfer time against `ln(1/ε)`.
pub fn fit_log_period(p: &TopParameters, eps_samples: &[f64], family: Family) -> Result<LogFit> {
    let t: Vec<f64> = eps_samples.iter().map(|&e| transfer_period(p, e, family)).collect::<Result<_>>()?;
    fit_log(eps_samples, &t)
}
