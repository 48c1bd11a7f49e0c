//! Subcommand bodies.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use racket_core::gates::{
    composite_bir_not, design_phase_gate, hadamard, montgomery_phase, realize, synthesize_one_qubit, tune_not_gate_with,
    NotKnob, NotSearch, PhaseSearch, Primitives, TunedNot,
};
use racket_core::io::{write_axis_angle_csv, write_map_csv, write_propagator_csv, write_pulse_csv, write_trajectory_csv};
use racket_core::propagate::{
    axis_angle_path, bloch_propagate, final_unitary, gate_fidelity, pauli, propagate_both, ErrorParams, Mat2,
};
use racket_core::pulsegen::{
    allen_eberly_pulse, pole_to_e2, rect_pi_pulse, tre_pulse, zero_pulse, Branch, ControlPulse, DEFAULT_HALF_WIDTH,
    DEFAULT_SAMPLES,
};
use racket_core::robustness::{fit_log_period, sweep, Merit, RobustnessMap};
use racket_core::topdyn::{transfer_period, BodyState, Family, TopOrbit, TopParameters};

use crate::config::RunConfig;
use crate::output::OutDir;
use crate::CliError;

pub struct Outcome {
    pub converged: bool,
    pub message: String,
}

impl Outcome {
    fn ok() -> Self {
        Self { converged: true, message: String::new() }
    }

    fn check(converged: bool, message: impl Into<String>) -> Self {
        Self { converged, message: message.into() }
    }
}

const FIG3_K: [f64; 4] = [0.2, 0.6, 0.9, 0.99];
const DEFAULT_EPS_SAMPLES: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
const DEFAULT_NOT_EPS_RANGE: (f64, f64) = (1e-3, 0.2);
const DEFAULT_NOT_K_RANGE: (f64, f64) = (0.3, 0.9);

pub fn run(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    let mut dir = OutDir::new(out, cfg)?;
    match cfg.command.as_deref() {
        Some("pulse") => cmd_pulse(cfg, &mut dir),
        Some("simulate") => cmd_simulate(cfg, &mut dir),
        Some("sweep") => cmd_sweep(cfg, &mut dir),
        Some("gate") => cmd_gate(cfg, &mut dir),
        Some("montgomery") => cmd_montgomery(cfg, &mut dir),
        Some("fit-period") => cmd_fit_period(cfg, &mut dir),
        other => Err(CliError::Usage(format!("unknown command {other:?}"))),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<T: Copy>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| usage(format!("--{name} is required")))
}

fn top(cfg: &RunConfig) -> Result<TopParameters, CliError> {
    Ok(TopParameters::new(required(cfg.k, "k")?)?)
}

fn orbit_family(cfg: &RunConfig) -> Result<Family, CliError> {
    match cfg.orbit.as_deref().unwrap_or("rotating") {
        "rotating" => Ok(Family::Rotating),
        "oscillating" => Ok(Family::Oscillating),
        o => Err(usage(format!("unknown orbit {o:?}; expected rotating or oscillating"))),
    }
}

fn time_scale(cfg: &RunConfig) -> Result<f64, CliError> {
    let s = cfg.time_scale.unwrap_or(1.0);
    if s > 0.0 && s.is_finite() {
        Ok(s)
    } else {
        Err(usage(format!("time scale {s} must be positive")))
    }
}

fn state(v: &Option<Vec<f64>>, default: [f64; 3]) -> Result<BodyState, CliError> {
    let v = v.clone().unwrap_or_else(|| default.to_vec());
    if v.len() != 3 {
        return Err(usage(format!("m0 needs three components, got {}", v.len())));
    }
    Ok(BodyState::normalized(v[0], v[1], v[2])?)
}

fn grid(range: &Option<Vec<f64>>, steps: Option<usize>, default: (f64, f64, usize), name: &str) -> Result<Vec<f64>, CliError> {
    let (lo, hi) = match range.as_deref() {
        None => (default.0, default.1),
        Some([lo, hi]) => (*lo, *hi),
        Some(_) => return Err(usage(format!("--{name}-range takes lo,hi"))),
    };
    let n = steps.unwrap_or(default.2);
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || (n > 1 && lo >= hi) {
        return Err(usage(format!("bad {name} grid [{lo}, {hi}] with {n} steps")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn not_search(cfg: &RunConfig) -> Result<NotSearch, CliError> {
    let knob = match cfg.knob.as_deref().unwrap_or("eps") {
        "eps" => NotKnob::Eps,
        "k" => NotKnob::K,
        k => return Err(usage(format!("unknown knob {k:?}; expected eps or k"))),
    };
    let range = match (cfg.range.as_deref(), knob) {
        (Some([lo, hi]), _) => (*lo, *hi),
        (Some(_), _) => return Err(usage("--range takes lo,hi")),
        (None, NotKnob::Eps) => DEFAULT_NOT_EPS_RANGE,
        (None, NotKnob::K) => DEFAULT_NOT_K_RANGE,
    };
    let mut search = NotSearch::eps(range);
    search.knob = knob;
    search.family = orbit_family(cfg)?;
    if let Some(e) = cfg.eps {
        search.fixed_eps = e;
    }
    Ok(search)
}

fn tuned_not(cfg: &RunConfig) -> Result<TunedNot, CliError> {
    let search = not_search(cfg)?;
    let p = match search.knob {
        NotKnob::Eps => top(cfg)?,
        // k is the unknown; any valid value will do here.
        NotKnob::K => TopParameters::new(cfg.k.unwrap_or(0.5))?,
    };
    Ok(tune_not_gate_with(&p, &search)?)
}

/// The pulse described by `cfg`, details for the sidecar, and whether any
/// tuning behind it converged.
fn build_pulse(cfg: &RunConfig) -> Result<(ControlPulse, Value, Outcome), CliError> {
    let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
    let mut details = json!({});
    let mut outcome = Outcome::ok();
    let pulse = if let Some(input) = &cfg.input {
        let file = std::fs::File::open(input).map_err(|e| usage(format!("cannot read {input}: {e}")))?;
        racket_core::io::read_pulse_csv(file, time_scale(cfg)?, None)?
    } else {
        match cfg.family.as_deref().unwrap_or("tre") {
            "tre" => tre_pulse(&top(cfg)?, required(cfg.eps, "eps")?, orbit_family(cfg)?, n)?,
            "allen-eberly" => {
                let branch = match cfg.branch.as_deref().unwrap_or("plus") {
                    "plus" => Branch::Plus,
                    "minus" => Branch::Minus,
                    b => return Err(usage(format!("unknown branch {b:?}; expected plus or minus"))),
                };
                let hw = cfg.half_width.unwrap_or(DEFAULT_HALF_WIDTH);
                allen_eberly_pulse(&top(cfg)?, cfg.t0.unwrap_or(0.0), hw, n, branch)?
            }
            "rect" => rect_pi_pulse(cfg.amplitude.unwrap_or(1.0), n)?,
            "zero" => zero_pulse(required(cfg.duration, "duration")?, n)?,
            "not" => {
                let t = tuned_not(cfg)?;
                outcome = Outcome::check(t.report.converged, t.report.message.clone());
                details = json!({ "not": t.report });
                t.pulse
            }
            "composite-not" => {
                let c = composite_bir_not(&top(cfg)?, cfg.eps.unwrap_or(0.01))?;
                outcome = Outcome::check(c.converged, "composite phase search did not converge");
                details = json!({ "composite": composite_details(&c) });
                c.pulse
            }
            f => return Err(usage(format!("unknown pulse family {f:?}"))),
        }
    };
    let pulse = match cfg.frame.as_deref().unwrap_or("body") {
        "body" => pulse,
        "experiment" => pulse.rotated(&pole_to_e2()),
        f => return Err(usage(format!("unknown frame {f:?}; expected body or experiment"))),
    };
    if let Value::Object(m) = &mut details {
        m.insert("pulse".into(), serde_json::to_value(pulse.meta()).expect("meta serializes"));
    }
    Ok((pulse, details, outcome))
}

fn composite_details(c: &racket_core::gates::CompositeNot) -> Value {
    json!({ "phases": c.phases, "fidelity": c.fidelity, "alpha_width": c.alpha_width, "converged": c.converged })
}

fn pulse_bytes(pulse: &ControlPulse, scale: f64) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_pulse_csv(&mut buf, pulse, scale)?;
    Ok(buf)
}

fn cmd_pulse(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome, CliError> {
    let (pulse, details, outcome) = build_pulse(cfg)?;
    dir.emit("pulse.csv", &pulse_bytes(&pulse, time_scale(cfg)?)?, details)?;
    Ok(outcome)
}

fn cmd_simulate(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome, CliError> {
    let scale = time_scale(cfg)?;
    let (pulse, mut details, outcome) = build_pulse(cfg)?;
    let m0 = state(&cfg.m0, [0.0, 0.0, 1.0])?;
    let err = ErrorParams::new(cfg.alpha.unwrap_or(0.0), cfg.delta.unwrap_or(0.0));
    let emit = cfg.emit.clone().unwrap_or_default();
    if let Some(e) = emit.iter().find(|e| !matches!(e.as_str(), "axis-angle" | "propagator")) {
        return Err(usage(format!("unknown output {e:?}; expected axis-angle or propagator")));
    }

    let traj = bloch_propagate(&pulse, &m0, &err)?;
    let last = traj.final_state().expect("pulse has samples");
    if let Value::Object(m) = &mut details {
        m.insert("final_state".into(), json!([last.x, last.y, last.z]));
        m.insert("J2".into(), json!(-last.y));
        m.insert("J3".into(), json!(-last.z));
        m.insert("errors".into(), json!(err));
    }
    let mut buf = Vec::new();
    write_trajectory_csv(&mut buf, &traj, scale)?;
    dir.emit("trajectory.csv", &buf, details.clone())?;

    if !emit.is_empty() {
        let path = propagate_both(&pulse, &err)?;
        if emit.iter().any(|e| e == "axis-angle") {
            let mut buf = Vec::new();
            write_axis_angle_csv(&mut buf, &path.times, &axis_angle_path(&path), scale)?;
            dir.emit("axis_angle.csv", &buf, details.clone())?;
        }
        if emit.iter().any(|e| e == "propagator") {
            let mut buf = Vec::new();
            write_propagator_csv(&mut buf, &path, scale)?;
            dir.emit("propagator.csv", &buf, details.clone())?;
        }
    }
    Ok(outcome)
}

fn merit(cfg: &RunConfig, default: &str) -> Result<Merit, CliError> {
    match cfg.merit.as_deref().unwrap_or(default) {
        "j3" => Ok(Merit::J3),
        "j2" => Ok(Merit::J2),
        "fidelity" => Ok(Merit::Fidelity(pauli()[0])),
        m => Err(usage(format!("unknown merit {m:?}; expected j2, j3, or fidelity"))),
    }
}

fn peak_transverse(pulse: &ControlPulse) -> f64 {
    pulse.omega1().iter().zip(pulse.omega2()).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max)
}

/// Detuning grid in absolute units, and the factor applied.
fn delta_grid(cfg: &RunConfig, pulse: &ControlPulse, default: (f64, f64, usize)) -> Result<(Vec<f64>, f64), CliError> {
    let g = grid(&cfg.delta_range, cfg.delta_steps, default, "delta")?;
    let scale = match cfg.delta_unit.as_deref().unwrap_or("peak") {
        "absolute" => 1.0,
        "peak" => {
            let p = peak_transverse(pulse);
            if !(p > 0.0) {
                return Err(usage("pulse has no transverse field; use --delta-unit absolute"));
            }
            p
        }
        u => return Err(usage(format!("unknown delta unit {u:?}; expected peak or absolute"))),
    };
    Ok((g.iter().map(|d| d * scale).collect(), scale))
}

fn emit_map(dir: &mut OutDir, name: &str, map: &RobustnessMap, delta_scale: f64) -> Result<(), CliError> {
    let mut buf = Vec::new();
    write_map_csv(&mut buf, map)?;
    let failed = map.flags.iter().filter(|f| **f).count();
    let details = json!({
        "alpha_grid": map.alpha_grid,
        "delta_grid": map.delta_grid,
        "delta_scale": delta_scale,
        "failed_cells": failed,
        "meta": map.meta,
    });
    dir.emit(name, &buf, details)
}

fn cmd_sweep(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome, CliError> {
    let workers = cfg.workers.unwrap_or(0);
    let alpha_default = (-0.5, 0.5, 21);
    let delta_default = (-1.0, 1.0, 21);
    match cfg.preset.as_deref() {
        None => {
            let (pulse, _, outcome) = build_pulse(cfg)?;
            let m0 = state(&cfg.m0, [0.0, 0.0, 1.0])?;
            let alphas = grid(&cfg.alpha_range, cfg.alpha_steps, alpha_default, "alpha")?;
            let (deltas, scale) = delta_grid(cfg, &pulse, delta_default)?;
            let map = sweep(&pulse, &m0, &alphas, &deltas, &merit(cfg, "j3")?, workers)?;
            emit_map(dir, "map.csv", &map, scale)?;
            Ok(outcome)
        }
        Some("experiment") => {
            // Transfer e2 → −e2 with the TRE pulse and with a rectangular π pulse.
            let p = TopParameters::new(cfg.k.unwrap_or(0.5))?;
            let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
            let tre = tre_pulse(&p, cfg.eps.unwrap_or(0.01), orbit_family(cfg)?, n)?.rotated(&pole_to_e2());
            let rect = rect_pi_pulse(cfg.amplitude.unwrap_or(1.0), n)?;
            let m0 = state(&None, [0.0, 1.0, 0.0])?;
            let alphas = grid(&cfg.alpha_range, cfg.alpha_steps, (-0.5, 0.5, 11), "alpha")?;
            for (name, pulse) in [("experiment_tre.csv", &tre), ("experiment_rect.csv", &rect)] {
                let map = sweep(pulse, &m0, &alphas, &[0.0], &Merit::J2, workers)?;
                emit_map(dir, name, &map, 1.0)?;
            }
            Ok(Outcome::ok())
        }
        Some("fig3") => {
            let eps = cfg.eps.unwrap_or(0.01);
            let family = orbit_family(cfg)?;
            let n = cfg.samples.unwrap_or(DEFAULT_SAMPLES);
            let m0 = state(&None, [0.0, 0.0, 1.0])?;
            let alphas = grid(&cfg.alpha_range, cfg.alpha_steps, alpha_default, "alpha")?;
            for k in FIG3_K {
                let pulse = tre_pulse(&TopParameters::new(k)?, eps, family, n)?;
                let (deltas, scale) = delta_grid(cfg, &pulse, delta_default)?;
                let map = sweep(&pulse, &m0, &alphas, &deltas, &Merit::J3, workers)?;
                emit_map(dir, &format!("fig3_k{k}.csv"), &map, scale)?;
            }
            Ok(Outcome::ok())
        }
        Some(p) => Err(usage(format!("unknown preset {p:?}; expected experiment or fig3"))),
    }
}

fn unitary_json(u: &Mat2) -> Value {
    let c: Vec<[f64; 2]> = u.iter().map(|z| [z.re, z.im]).collect();
    // Column-major: u00, u10, u01, u11.
    json!(c)
}

/// Haar-random SU(2) element from three uniforms.
fn random_unitary(seed: u64) -> Mat2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (u1, u2, u3): (f64, f64, f64) = (rng.gen(), rng.gen(), rng.gen());
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (p, q) = (2.0 * PI * u2, 2.0 * PI * u3);
    let x = Complex64::from_polar(a, p);
    let y = Complex64::from_polar(b, q);
    Mat2::new(x, -y.conj(), y, x.conj())
}

fn cmd_gate(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome, CliError> {
    let scale = time_scale(cfg)?;
    let name = cfg.gate.as_deref().ok_or_else(|| usage("gate name required: not, phase, hadamard, or random"))?;
    match name {
        "not" if cfg.composite.unwrap_or(false) => {
            let c = composite_bir_not(&top(cfg)?, cfg.eps.unwrap_or(0.01))?;
            println!("composite NOT: fidelity {:.12}, alpha width {:.4}", c.fidelity, c.alpha_width);
            let details = json!({ "composite": composite_details(&c), "pulse": c.pulse.meta() });
            dir.emit("gate_not_composite.csv", &pulse_bytes(&c.pulse, scale)?, details)?;
            Ok(Outcome::check(c.converged, "composite phase search did not converge"))
        }
        "not" => {
            let t = tuned_not(cfg)?;
            println!("NOT: k {} eps {:.10} fidelity {:.12} converged {}", t.report.k, t.report.eps, t.report.fidelity, t.report.converged);
            let details = json!({ "not": t.report, "pulse": t.pulse.meta() });
            dir.emit("gate_not.csv", &pulse_bytes(&t.pulse, scale)?, details)?;
            Ok(Outcome::check(t.report.converged, t.report.message.clone()))
        }
        "phase" => {
            let target = required(cfg.target, "target")?;
            let p = TopParameters::new(cfg.k.unwrap_or(0.5))?;
            let mut search = PhaseSearch::default();
            if let Some(e) = cfg.eps {
                search.eps_a = e;
            }
            let d = design_phase_gate(target, &p, &search)?;
            println!(
                "phase gate: relative phase {:.10} geometric {:.10} dynamical {:.3e} feasible {}",
                d.report.relative_phase, d.budget.geometric, d.budget.dynamical, d.report.feasible
            );
            let details = json!({
                "target": d.target,
                "loops": d.spec,
                "budget": d.budget,
                "segments": d.segments,
                "report": d.report,
                "pulse": d.pulse.meta(),
            });
            dir.emit("gate_phase.csv", &pulse_bytes(&d.pulse, scale)?, details)?;
            Ok(Outcome::check(d.report.feasible, d.report.message.clone()))
        }
        "hadamard" | "random" => {
            let target = if name == "hadamard" { hadamard() } else { random_unitary(cfg.seed.unwrap_or(0)) };
            // The synthesis assumes a NOT about e1, which the rotating family gives.
            let not_cfg = RunConfig { k: Some(cfg.k.unwrap_or(0.5)), orbit: None, knob: None, range: None, ..cfg.clone() };
            let t = tuned_not(&not_cfg)?;
            let primitives = Primitives { not: t.pulse, amplitude: cfg.amplitude.unwrap_or(1.0), samples: cfg.samples.unwrap_or(512) };
            let program = synthesize_one_qubit(&target)?;
            let pulse = realize(&program, &primitives)?;
            let u = final_unitary(&pulse, &ErrorParams::default())?;
            let fidelity = gate_fidelity(&u, &target);
            println!("{name}: {} primitives, fidelity {fidelity:.12}", program.ops.len());
            let details = json!({
                "target": unitary_json(&target),
                "program": program,
                "fidelity": fidelity,
                "not": t.report,
                "pulse": pulse.meta(),
            });
            dir.emit(&format!("gate_{name}.csv"), &pulse_bytes(&pulse, scale)?, details)?;
            Ok(Outcome::check(t.report.converged, t.report.message))
        }
        g => Err(usage(format!("unknown gate {g:?}; expected not, phase, hadamard, or random"))),
    }
}

fn cmd_montgomery(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome, CliError> {
    let p = top(cfg)?;
    let eps = required(cfg.eps, "eps")?;
    let family = orbit_family(cfg)?;
    let orbit = TopOrbit::new(&p, eps, family)?;
    let b = montgomery_phase(&p, eps, family)?;
    let f = racket_core::io::fmt_f64;
    let mut text = String::from("k,eps,family,period,total,dynamical,geometric,mismatch\n");
    let fam = serde_json::to_value(family).expect("family serializes");
    text.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        f(p.k()),
        f(eps),
        fam.as_str().unwrap_or_default(),
        f(orbit.period()),
        f(b.total),
        f(b.dynamical),
        f(b.geometric),
        f(b.mismatch())
    ));
    println!("total {:.10} dynamical {:.10} geometric {:.10}", b.total, b.dynamical, b.geometric);
    dir.emit("montgomery.csv", text.as_bytes(), json!({ "budget": b, "period": orbit.period() }))?;
    Ok(Outcome::ok())
}

fn cmd_fit_period(cfg: &RunConfig, dir: &mut OutDir) -> Result<Outcome, CliError> {
    let p = top(cfg)?;
    let family = orbit_family(cfg)?;
    let eps = cfg.eps_samples.clone().unwrap_or_else(|| DEFAULT_EPS_SAMPLES.to_vec());
    let fit = fit_log_period(&p, &eps, family)?;
    let f = racket_core::io::fmt_f64;
    let mut text = String::from("eps,transfer_time\n");
    for &e in &eps {
        text.push_str(&format!("{},{}\n", f(e), f(transfer_period(&p, e, family)?)));
    }
    println!("T = {:.10}·ln(1/eps) + {:.10}, r² = {:.8}", fit.a, fit.b, fit.r_squared);
    dir.emit("fit_period.csv", text.as_bytes(), json!({ "fit": fit }))?;
    Ok(Outcome::ok())
}
