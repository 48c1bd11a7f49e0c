//! Geometric phase gate from two closed loops through one base point.
//!
//! Loop `a` is a rotating orbit of shape `k_a`. The base point `P` sits on
//! it; loop `b` is the orbit of shape `k_b` through the same `P`. Driving
//! one loop forwards and the other backwards (field `−Ω` on the reversed
//! path) closes the path at `P` with
//!
//! ```text
//! dynamical = ±(D_a − D_b),   geometric = ±(G_a − G_b)
//! ```
//!
//! where `D = 2E·T` and `G = −S`. The position of `P` along loop `a` is
//! chosen so that `D_b = D_a`, and `k_b` so that the geometric difference
//! hits the target. The propagator is then a pure rotation about `P`,
//! diagonal in the basis aligned with `P`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::montgomery::{orbit_budget, samples_for, wrap_pi, PhaseBudget};
use crate::error::{Error, Result};
use crate::propagate::{adjoint_map, final_rotation, final_unitary, gate_fidelity, signed_rotation_angle, ErrorParams, Mat2};
use crate::pulsegen::{concat, orbit_pulse, ControlPulse, Direction};
use crate::roots::{linear_grid, scan_brackets, solve_with_values, RootOptions};
use crate::topdyn::{Family, TopOrbit, TopParameters, Vec3};

/// Which of the two loops is walked backwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReversedLoop {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSearch {
    /// Distance of loop `a` to the separatrix.
    pub eps_a: f64,
    pub kb_range: (f64, f64),
    pub kb_points: usize,
    /// Scan resolution of the base point over a quarter of loop `a`.
    pub base_points: usize,
    /// Step bound of the final pulse.
    pub max_step: f64,
}

impl Default for PhaseSearch {
    fn default() -> Self {
        Self { eps_a: 1e-3, kb_range: (0.02, 0.98), kb_points: 49, base_points: 48, max_step: 2e-4 }
    }
}

/// Full description of a two-loop path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopPairSpec {
    pub k_a: f64,
    pub eps_a: f64,
    /// Time on loop `a` at which it passes the base point.
    pub start_a: f64,
    pub k_b: f64,
    pub eps_b: f64,
    pub family_b: Family,
    /// Time on loop `b` at which it passes the base point.
    pub start_b: f64,
    pub reversed: ReversedLoop,
    pub base_point: [f64; 3],
}

impl LoopPairSpec {
    /// Place the base point at time `start_a` on the rotating orbit
    /// `(k_a, eps_a)` and find loop `b` of shape `k_b` through it.
    pub fn new(k_a: f64, eps_a: f64, start_a: f64, k_b: f64, reversed: ReversedLoop) -> Result<Self> {
        let a = TopOrbit::new(&TopParameters::new(k_a)?, eps_a, Family::Rotating)?;
        let p = a.state(start_a);
        let (b, start_b) = TopOrbit::through(&TopParameters::new(k_b)?, &p)?;
        Ok(Self {
            k_a,
            eps_a,
            start_a,
            k_b,
            eps_b: b.eps(),
            family_b: b.family(),
            start_b,
            reversed,
            base_point: p.into(),
        })
    }

    pub fn orbits(&self) -> Result<(TopOrbit, TopOrbit)> {
        let a = TopOrbit::new(&TopParameters::new(self.k_a)?, self.eps_a, Family::Rotating)?;
        let b = TopOrbit::containing(&TopParameters::new(self.k_b)?, &Vec3::from(self.base_point))?;
        Ok((a, b))
    }

    fn directions(&self) -> (Direction, Direction) {
        match self.reversed {
            ReversedLoop::A => (Direction::Reversed, Direction::Forward),
            ReversedLoop::B => (Direction::Forward, Direction::Reversed),
        }
    }

    /// Closed-form dynamical and geometric sums; `total` is their difference.
    /// The geometric sum is reduced to `[0, 2π)`.
    pub fn analytic_budget(&self) -> Result<PhaseBudget> {
        let (a, b) = self.orbits()?;
        let s = match self.reversed {
            ReversedLoop::A => -1.0,
            ReversedLoop::B => 1.0,
        };
        let dynamical = s * (a.dynamical_phase() - b.dynamical_phase());
        let geometric = (s * (b.solid_angle() - a.solid_angle())).rem_euclid(2.0 * PI);
        Ok(PhaseBudget { total: wrap_pi(dynamical - geometric), dynamical, geometric })
    }

    pub fn duration(&self) -> Result<f64> {
        let (a, b) = self.orbits()?;
        Ok(a.period() + b.period())
    }

    /// Both loops sampled with steps no longer than `max_step`.
    pub fn pulse(&self, max_step: f64) -> Result<ControlPulse> {
        let (a, b) = self.orbits()?;
        let (da, db) = self.directions();
        let pa = orbit_pulse(&a, self.start_a, a.period(), da, samples_for(a.period(), max_step))?.labelled("loop-a");
        let pb = orbit_pulse(&b, self.start_b, b.period(), db, samples_for(b.period(), max_step))?.labelled("loop-b");
        concat(&[pa, pb])
    }
}

#[derive(Debug, Clone)]
pub struct PhaseGateDesign {
    pub target: f64,
    pub spec: LoopPairSpec,
    pub pulse: ControlPulse,
    /// Net budget: propagated `total`, closed-form `dynamical` and `geometric`.
    pub budget: PhaseBudget,
    /// Per-loop budgets in traversal order.
    pub segments: [PhaseBudget; 2],
    pub report: PhaseGateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGateReport {
    /// `arg U'₀₀ − arg U'₁₁` in the basis aligned with the base point, in `[0, 2π)`.
    pub relative_phase: f64,
    /// `|U'₀₁|`.
    pub off_diagonal: f64,
    pub fidelity: f64,
    /// `‖R − Rot_P(−target)‖_F`.
    pub rotation_residual: f64,
    pub feasible: bool,
    pub message: String,
}

/// Unitary whose first column is the spin state along `p` and second along `−p`.
pub fn aligned_basis(p: &Vec3) -> Mat2 {
    let theta = p.z.clamp(-1.0, 1.0).acos();
    let phi = p.y.atan2(p.x);
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let e = Complex64::from_polar(1.0, phi);
    Mat2::new(Complex64::from(c), -e.conj() * s, e * s, Complex64::from(c))
}

/// Ideal gate: relative phase `phase` between the states along `±p`.
pub fn phase_gate_target(p: &Vec3, phase: f64) -> Mat2 {
    let w = aligned_basis(p);
    let d = Mat2::new(
        Complex64::from_polar(1.0, 0.5 * phase),
        Complex64::from(0.0),
        Complex64::from(0.0),
        Complex64::from_polar(1.0, -0.5 * phase),
    );
    w * d * w.adjoint()
}

/// Loop `b` shape and base-point time that balance the dynamical phases.
fn balance_base_point(a: &TopOrbit, k_b: f64, base_points: usize) -> Option<f64> {
    let pb = TopParameters::new(k_b).ok()?;
    let target = a.dynamical_phase();
    let d_b = |t: f64| -> Option<(f64, Family)> {
        let o = TopOrbit::containing(&pb, &a.state(t)).ok()?;
        Some((o.dynamical_phase() - target, o.family()))
    };
    let grid = linear_grid(0.0, 0.25 * a.period(), base_points.max(2));
    let vals: Vec<Option<(f64, Family)>> = grid.iter().map(|&t| d_b(t)).collect();
    for i in 0..grid.len() - 1 {
        let (Some((fa, fam_a)), Some((fb, fam_b))) = (vals[i], vals[i + 1]) else { continue };
        if fam_a != fam_b || fa.signum() == fb.signum() {
            continue;
        }
        let opts = RootOptions { x_tol: 1e-13, ..RootOptions::default() };
        let root = solve_with_values(|t| d_b(t).map_or(f64::NAN, |v| v.0), (grid[i], fa), (grid[i + 1], fb), opts).ok()?;
        if root.converged {
            return Some(root.x);
        }
    }
    None
}

fn candidate(a: &TopOrbit, k_b: f64, reversed: ReversedLoop, search: &PhaseSearch) -> Option<LoopPairSpec> {
    let t = balance_base_point(a, k_b, search.base_points)?;
    LoopPairSpec::new(a.params().k(), a.eps(), t, k_b, reversed).ok()
}

/// Search a two-loop path with net geometric phase `target_phase`.
///
/// Infeasible targets are not an error: the closest candidate found is
/// returned with `report.feasible = false`.
pub fn design_phase_gate(target_phase: f64, k_a: &TopParameters, search: &PhaseSearch) -> Result<PhaseGateDesign> {
    if !(target_phase > 0.0 && target_phase < 2.0 * PI) {
        return Err(Error::Domain(format!("target phase {target_phase} outside (0, 2π)")));
    }
    let a = TopOrbit::new(k_a, search.eps_a, Family::Rotating)?;
    let (lo, hi) = search.kb_range;
    if !(lo > 0.0 && hi < 1.0 && lo < hi) {
        return Err(Error::Domain(format!("k_b range [{lo}, {hi}] invalid")));
    }
    let mismatch = |s: &LoopPairSpec| s.analytic_budget().map(|b| wrap_pi(b.geometric - target_phase)).unwrap_or(f64::NAN);
    let grid: Vec<f64> = linear_grid(lo, hi, search.kb_points.max(2))
        .into_iter()
        .filter(|kb| (kb - k_a.k()).abs() > 1e-9)
        .collect();

    let mut solutions: Vec<(f64, LoopPairSpec)> = Vec::new();
    let mut closest: Option<(f64, LoopPairSpec)> = None;
    for reversed in [ReversedLoop::B, ReversedLoop::A] {
        let specs: Vec<Option<LoopPairSpec>> = grid.iter().map(|&kb| candidate(&a, kb, reversed, search)).collect();
        let vals: Vec<f64> = specs.iter().map(|s| s.as_ref().map_or(f64::NAN, mismatch)).collect();
        for (s, v) in specs.iter().zip(&vals) {
            if let Some(s) = s {
                if closest.as_ref().map_or(true, |c| v.abs() < c.0.abs()) {
                    closest = Some((*v, *s));
                }
            }
        }
        for br in scan_brackets(&grid, &vals, Some(FRAC_PI_2)) {
            let f = |kb: f64| candidate(&a, kb, reversed, search).map_or(f64::NAN, |s| mismatch(&s));
            let Ok(root) = solve_with_values(f, br.lo, br.hi, RootOptions { x_tol: 1e-12, ..RootOptions::default() }) else {
                continue;
            };
            if let Some(spec) = candidate(&a, root.x, reversed, search) {
                let residual = mismatch(&spec);
                if root.converged && residual.abs() <= 1e-6 {
                    if let Ok(d) = spec.duration() {
                        solutions.push((d, spec));
                    }
                }
            }
        }
    }
    // Shortest path wins; ties fall back to the smaller k_b.
    solutions.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.k_b.total_cmp(&y.1.k_b)));
    let (spec, feasible) = match solutions.first() {
        Some((_, s)) => (*s, true),
        None => match closest {
            Some((_, s)) => (s, false),
            None => return Err(Error::Numeric("no base point balances the dynamical phases".into())),
        },
    };
    let mut design = evaluate_loop_pair(&spec, target_phase, search.max_step)?;
    if !feasible {
        design.report.feasible = false;
        design.report.message = format!(
            "target outside the reach of the two-loop ansatz; closest geometric phase {:.6}",
            design.budget.geometric
        );
    }
    Ok(design)
}

/// Build and propagate the pulse of `spec` and score it against `target`.
pub fn evaluate_loop_pair(spec: &LoopPairSpec, target: f64, max_step: f64) -> Result<PhaseGateDesign> {
    let (a, b) = spec.orbits()?;
    let (da, db) = spec.directions();
    let pulse = spec.pulse(max_step)?;
    let err = ErrorParams::default();
    let r = final_rotation(&pulse, &err)?;
    let u = final_unitary(&pulse, &err)?;
    let p = Vec3::from(spec.base_point);
    let analytic = spec.analytic_budget()?;
    let budget = PhaseBudget { total: signed_rotation_angle(&r, &p), ..analytic };
    let segments = [orbit_budget(&a, spec.start_a, da, max_step)?, orbit_budget(&b, spec.start_b, db, max_step)?];

    let w = aligned_basis(&p);
    let ua = w.adjoint() * u * w;
    let relative_phase = (ua[(0, 0)].arg() - ua[(1, 1)].arg()).rem_euclid(2.0 * PI);
    let goal = phase_gate_target(&p, target);
    let rotation_residual = (r - adjoint_map(&goal)?).norm();
    let feasible = analytic.dynamical.abs() <= 1e-4 && wrap_pi(analytic.geometric - target).abs() <= 1e-4;
    let report = PhaseGateReport {
        relative_phase,
        off_diagonal: ua[(0, 1)].norm(),
        fidelity: gate_fidelity(&u, &goal),
        rotation_residual,
        feasible,
        message: if feasible { "dynamical phases balanced, geometric phase on target".into() } else { "budget off target".into() },
    };
    Ok(PhaseGateDesign { target, spec: *spec, pulse, budget, segments, report })
}
