//! Robust NOT from three phase-shifted copies of one transfer pulse.
//!
//! Shifting the transverse field of a pulse by `ψ` conjugates its
//! propagator, `X ↦ G(ψ)·X·G(ψ)†` with `G(ψ) = exp(−iψσ₃/2)`. The composite
//! uses the palindrome `(ψ₁, ψ₂, ψ₁)`; both phases are solved so that the
//! product is `σ₁` up to a global phase. Because only conjugations of one
//! propagator are involved, the search needs a single propagation per
//! field error.
//!
//! Two-segment patterns built from sign flips and time reversal cannot
//! reach a NOT: every such pair multiplies two transfers with opposite flip
//! parity, so this is the shortest phase pattern that does.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::montgomery::samples_for;
use crate::error::Result;
use crate::propagate::{final_unitary, gate_fidelity, pauli, ErrorParams, Mat2};
use crate::pulsegen::{concat, tre_pulse, ControlPulse};
use crate::roots::linear_grid;
use crate::topdyn::{transfer_period, Family, TopParameters};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSearch {
    /// Step bound of the transfer pulse.
    pub max_step: f64,
    /// Phase grid size per axis for the initial scan.
    pub grid: usize,
    /// Field-amplitude errors on which candidate solutions are ranked.
    pub alpha_grid: Vec<f64>,
    /// Fidelity level defining the robustness width.
    pub threshold: f64,
}

impl Default for CompositeSearch {
    fn default() -> Self {
        Self { max_step: 2e-3, grid: 48, alpha_grid: linear_grid(-0.5, 0.5, 101), threshold: 0.99 }
    }
}

#[derive(Debug, Clone)]
pub struct CompositeNot {
    pub pulse: ControlPulse,
    /// `(ψ₁, ψ₂, ψ₁)`.
    pub phases: [f64; 3],
    /// Against `σ₁` with no field error.
    pub fidelity: f64,
    /// Width of the `α` interval around 0 with fidelity above the threshold.
    pub alpha_width: f64,
    pub converged: bool,
}

fn shift(u: &Mat2, psi: f64) -> Mat2 {
    let g = Mat2::new(
        Complex64::from_polar(1.0, -0.5 * psi),
        Complex64::from(0.0),
        Complex64::from(0.0),
        Complex64::from_polar(1.0, 0.5 * psi),
    );
    g * u * g.adjoint()
}

/// Propagator of the palindrome built from one segment propagator `x`.
pub fn palindrome(x: &Mat2, psi1: f64, psi2: f64) -> Mat2 {
    let a = shift(x, psi1);
    a * shift(x, psi2) * a
}

fn infidelity(x: &Mat2, v: [f64; 2]) -> f64 {
    1.0 - gate_fidelity(&palindrome(x, v[0], v[1]), &pauli()[0])
}

/// Nelder–Mead on a 2-D objective from `start` with initial size `step`.
fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: F, start: [f64; 2], step: f64, iters: usize) -> ([f64; 2], f64) {
    let mut s = [start, [start[0] + step, start[1]], [start[0], start[1] + step]];
    let mut fs = s.map(&f);
    for _ in 0..iters {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| fs[i].total_cmp(&fs[j]));
        s = idx.map(|i| s[i]);
        fs = idx.map(|i| fs[i]);
        let spread = (s[2][0] - s[0][0]).abs().max((s[2][1] - s[0][1]).abs());
        if fs[2] - fs[0] <= 1e-16 && spread < 1e-10 {
            break;
        }
        let c = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
        let at = |t: f64| [c[0] + t * (s[2][0] - c[0]), c[1] + t * (s[2][1] - c[1])];
        let r = at(-1.0);
        let fr = f(r);
        if fr < fs[0] {
            let e = at(-2.0);
            let fe = f(e);
            if fe < fr {
                s[2] = e;
                fs[2] = fe;
            } else {
                s[2] = r;
                fs[2] = fr;
            }
        } else if fr < fs[1] {
            s[2] = r;
            fs[2] = fr;
        } else {
            let k = if fr < fs[2] { at(-0.5) } else { at(0.5) };
            let fk = f(k);
            if fk < fs[2].min(fr) {
                s[2] = k;
                fs[2] = fk;
            } else {
                for i in 1..3 {
                    s[i] = [(s[0][0] + s[i][0]) / 2.0, (s[0][1] + s[i][1]) / 2.0];
                    fs[i] = f(s[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| fs[i].total_cmp(&fs[j])).unwrap();
    (s[best], fs[best])
}

/// Widest contiguous interval around `α = 0` on `alphas` where `values ≥ threshold`.
pub fn width_around_zero(alphas: &[f64], values: &[f64], threshold: f64) -> f64 {
    let Some(center) = (0..alphas.len()).min_by(|&i, &j| alphas[i].abs().total_cmp(&alphas[j].abs())) else {
        return 0.0;
    };
    if values[center] < threshold {
        return 0.0;
    }
    let mut lo = center;
    while lo > 0 && values[lo - 1] >= threshold {
        lo -= 1;
    }
    let mut hi = center;
    while hi + 1 < alphas.len() && values[hi + 1] >= threshold {
        hi += 1;
    }
    alphas[hi] - alphas[lo]
}

/// Composite NOT for the rotating transfer of shape `p` at distance `eps`.
pub fn composite_bir_not(p: &TopParameters, eps: f64) -> Result<CompositeNot> {
    composite_bir_not_with(p, eps, &CompositeSearch::default())
}

pub fn composite_bir_not_with(p: &TopParameters, eps: f64, search: &CompositeSearch) -> Result<CompositeNot> {
    let t = transfer_period(p, eps, Family::Rotating)?;
    let base = tre_pulse(p, eps, Family::Rotating, samples_for(t, search.max_step))?;
    let x = final_unitary(&base, &ErrorParams::default())?;
    let per_alpha: Vec<Mat2> = search
        .alpha_grid
        .par_iter()
        .map(|&a| final_unitary(&base, &ErrorParams::new(a, 0.0)))
        .collect::<Result<_>>()?;

    // Coarse scan, then polish every local minimum of the grid.
    let n = search.grid.max(4);
    let h = 2.0 * PI / n as f64;
    let vals: Vec<f64> = (0..n * n).map(|i| infidelity(&x, [(i / n) as f64 * h, (i % n) as f64 * h])).collect();
    let at = |i: usize, j: usize| vals[(i % n) * n + (j % n)];
    let mut starts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = at(i, j);
            let is_min = [(n - 1, 0), (1, 0), (0, n - 1), (0, 1)].iter().all(|&(di, dj)| v <= at(i + di, j + dj));
            if is_min && v < 0.5 {
                starts.push([i as f64 * h, j as f64 * h]);
            }
        }
    }
    let mut found: Vec<([f64; 2], f64)> = Vec::new();
    for s in starts {
        let (v, f) = nelder_mead(|v| infidelity(&x, v), s, 0.5 * h, 2000);
        let v = [v[0].rem_euclid(2.0 * PI), v[1].rem_euclid(2.0 * PI)];
        let dup = found.iter().any(|(w, _)| {
            let d = |a: f64, b: f64| (a - b + PI).rem_euclid(2.0 * PI) - PI;
            d(w[0], v[0]).abs() < 1e-6 && d(w[1], v[1]).abs() < 1e-6
        });
        if !dup {
            found.push((v, f));
        }
    }

    let width_of = |v: [f64; 2]| {
        let fid: Vec<f64> = per_alpha.iter().map(|xa| gate_fidelity(&palindrome(xa, v[0], v[1]), &pauli()[0])).collect();
        width_around_zero(&search.alpha_grid, &fid, search.threshold)
    };
    // Exact solutions ranked by robustness, then lexicographically by phase.
    let mut ranked: Vec<([f64; 2], f64, f64)> = found.iter().map(|&(v, f)| (v, f, width_of(v))).collect();
    ranked.sort_by(|a, b| {
        let a_ok = a.1 <= 1e-10;
        let b_ok = b.1 <= 1e-10;
        b_ok.cmp(&a_ok)
            .then(if a_ok && b_ok { b.2.total_cmp(&a.2) } else { a.1.total_cmp(&b.1) })
            .then(a.0[0].total_cmp(&b.0[0]))
            .then(a.0[1].total_cmp(&b.0[1]))
    });
    let (v, _, alpha_width) = ranked.first().copied().unwrap_or(([0.0, 0.0], 1.0, 0.0));

    let pulse = concat(&[
        base.phase_shifted(v[0]).labelled("tre-1"),
        base.phase_shifted(v[1]).labelled("tre-2"),
        base.phase_shifted(v[0]).labelled("tre-3"),
    ])?;
    let u = final_unitary(&pulse, &ErrorParams::default())?;
    let fidelity = gate_fidelity(&u, &pauli()[0]);
    Ok(CompositeNot { pulse, phases: [v[0], v[1], v[0]], fidelity, alpha_width, converged: fidelity >= 1.0 - 1e-4 })
}
