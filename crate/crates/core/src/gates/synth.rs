//! One-qubit synthesis from transverse rotations and tuned NOTs.
//!
//! A target is written as `Rz(a)·Ry(b)·Rz(c)` up to global phase and then
//! regrouped as `Rz(a + c)·R_β(b)`, where `R_β` rotates about the
//! transverse axis at azimuth `β = π/2 − c`. The transverse rotation is a
//! constant phase-shifted field, or the NOT primitive when `b = π`. The
//! remaining `Rz(θ)` is two NOTs at azimuths `0` and `θ/2`, since two
//! half-turns about transverse axes compose to a turn about `e₃` by twice
//! the angle between them.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::montgomery::wrap_pi;
use crate::error::{Error, Result};
use crate::propagate::{su2_exp, unitarity_defect, Mat2};
use crate::pulsegen::{concat, rect_rotation, ControlPulse};
use crate::topdyn::Vec3;

const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum GateOp {
    /// NOT primitive with its transverse field turned to azimuth `phase`.
    Not { phase: f64 },
    /// Rotation by `angle` about the transverse axis at azimuth `phase`.
    Rotation { angle: f64, phase: f64 },
}

/// Operations in the order they are applied.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub ops: Vec<GateOp>,
}

fn transverse(angle: f64, phase: f64) -> Mat2 {
    su2_exp(&(Vec3::new(phase.cos(), phase.sin(), 0.0) * angle))
}

impl Program {
    /// Propagator with ideal primitives.
    pub fn ideal_unitary(&self) -> Mat2 {
        self.ops.iter().fold(Mat2::identity(), |acc, op| {
            let u = match *op {
                GateOp::Not { phase } => transverse(PI, phase),
                GateOp::Rotation { angle, phase } => transverse(angle, phase),
            };
            u * acc
        })
    }
}

/// Decompose `u` into primitives; the global phase is ignored.
pub fn synthesize_one_qubit(u: &Mat2) -> Result<Program> {
    let defect = unitarity_defect(u);
    if !(defect <= 1e-8) {
        return Err(Error::Numeric(format!("target is not unitary (defect {defect:.3e})")));
    }
    let v = u / u.determinant().sqrt();
    // v = [[e^{−i(a+c)/2} cos(b/2), ·], [e^{i(a−c)/2} sin(b/2), e^{i(a+c)/2} cos(b/2)]]
    let (c00, s10) = (v[(1, 1)].norm(), v[(1, 0)].norm());
    let b = 2.0 * s10.atan2(c00);
    let sum = if c00 > ANGLE_TOL { 2.0 * v[(1, 1)].arg() } else { 0.0 };
    let diff = if s10 > ANGLE_TOL { 2.0 * v[(1, 0)].arg() } else { -sum };
    let c = 0.5 * (sum - diff);
    let mut ops = Vec::new();
    if b > ANGLE_TOL {
        let phase = wrap_pi(0.5 * PI - c);
        if (b - PI).abs() <= ANGLE_TOL {
            ops.push(GateOp::Not { phase });
        } else {
            ops.push(GateOp::Rotation { angle: b, phase });
        }
    }
    let z = wrap_pi(sum);
    if z.abs() > ANGLE_TOL {
        ops.push(GateOp::Not { phase: 0.0 });
        ops.push(GateOp::Not { phase: 0.5 * z });
    }
    Ok(Program { ops })
}

/// Pulses used to realize a [`Program`].
#[derive(Debug, Clone)]
pub struct Primitives {
    /// A NOT pulse with its field in the `e₁`–`e₃` plane.
    pub not: ControlPulse,
    /// Field strength of transverse rotations.
    pub amplitude: f64,
    pub samples: usize,
}

pub fn realize(program: &Program, primitives: &Primitives) -> Result<ControlPulse> {
    if program.ops.is_empty() {
        return crate::pulsegen::zero_pulse(0.0, 1);
    }
    let parts: Vec<ControlPulse> = program
        .ops
        .iter()
        .map(|op| match *op {
            GateOp::Not { phase } => Ok(primitives.not.phase_shifted(phase).labelled("not")),
            GateOp::Rotation { angle, phase } => {
                rect_rotation(angle, phase, primitives.amplitude, primitives.samples).map(|p| p.labelled("rotation"))
            }
        })
        .collect::<Result<_>>()?;
    concat(&parts)
}

/// `(X + Z)/√2`.
pub fn hadamard() -> Mat2 {
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    Mat2::new(h, h, h, -h)
}
