//! Propagation of the Bloch vector, the SO(3) frame, and the SU(2)
//! propagator under a sampled pulse.
//!
//! Every step between two samples of a segment rotates by the exact
//! exponential of the averaged field `Ω̄ = (Ω_i + Ω_{i+1})/2` over the step
//! length, so each step is exactly orthogonal (unitary) up to rounding.
//! The spin generator is `ℋ = ½(Ω₁σ₁ + Ω₂σ₂ + Ω₃σ₃)`, whose adjoint action
//! is the same rotation as `Ṙ = [Ω]ₓR`.
//!
//! Field errors enter as `((1+α)Ω₁, (1+α)Ω₂, Ω₃ + δ)`.

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulsegen::ControlPulse;
use crate::topdyn::{BodyState, Vec3};

pub type Mat3 = Matrix3<f64>;
pub type Mat2 = Matrix2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Amplitude scaling `alpha` on `Ω₁, Ω₂` and detuning `delta` added to `Ω₃`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorParams {
    pub alpha: f64,
    pub delta: f64,
}

impl ErrorParams {
    pub fn new(alpha: f64, delta: f64) -> Self {
        Self { alpha, delta }
    }

    pub fn apply(&self, field: Vec3) -> Vec3 {
        Vec3::new((1.0 + self.alpha) * field.x, (1.0 + self.alpha) * field.y, field.z + self.delta)
    }
}

/// States on the pulse grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec3>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<Vec3> {
        self.states.last().copied()
    }
}

/// Frame rotations and/or spin propagators on the pulse grid.
///
/// Either list may be empty when only the other was requested.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorPath {
    pub times: Vec<f64>,
    pub rotations: Vec<Mat3>,
    pub unitaries: Vec<Mat2>,
}

/// Pauli matrices `[σ₁, σ₂, σ₃]`.
pub fn pauli() -> [Mat2; 3] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    [Mat2::new(z, o, o, z), Mat2::new(z, -I, I, z), Mat2::new(o, z, z, -o)]
}

/// `ℋ = ½ Ω·σ`.
pub fn hamiltonian(field: &Vec3) -> Mat2 {
    let [s1, s2, s3] = pauli();
    (s1 * Complex64::from(field.x) + s2 * Complex64::from(field.y) + s3 * Complex64::from(field.z)) * Complex64::from(0.5)
}

/// Rotation by `|w|` about `w/|w|` (Rodrigues).
pub fn rotation_matrix(w: &Vec3) -> Mat3 {
    let theta = w.norm();
    let k = w.cross_matrix();
    let (a, b) = if theta < 1e-4 {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0 + t2 * t2 / 120.0, 0.5 - t2 / 24.0 + t2 * t2 / 720.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    };
    Mat3::identity() + k * a + k * k * b
}

/// `exp(−i w·σ/2)`.
pub fn su2_exp(w: &Vec3) -> Mat2 {
    let theta = w.norm();
    let c = (0.5 * theta).cos();
    // sin(θ/2)/θ, finite at θ = 0.
    let s = if theta < 1e-4 { 0.5 - theta * theta / 48.0 } else { (0.5 * theta).sin() / theta };
    let (x, y, z) = (s * w.x, s * w.y, s * w.z);
    Mat2::new(Complex64::new(c, -z), Complex64::new(-y, -x), Complex64::new(y, -x), Complex64::new(c, z))
}

fn rotate_vector(w: &Vec3, v: &Vec3) -> Vec3 {
    let theta = w.norm();
    if theta == 0.0 {
        return *v;
    }
    let n = w / theta;
    let (s, c) = theta.sin_cos();
    v * c + n.cross(v) * s + n * (n.dot(v) * (1.0 - c))
}

fn check(pulse: &ControlPulse) -> Result<()> {
    if pulse.is_empty() {
        return Err(Error::Usage("pulse has no samples".into()));
    }
    Ok(())
}

/// Rotation vector `Ω̄·h` for step `i → i+1`, `None` across a segment boundary.
fn step(pulse: &ControlPulse, err: &ErrorParams, i: usize) -> Option<Vec3> {
    if !pulse.is_step(i) {
        return None;
    }
    let h = pulse.times()[i + 1] - pulse.times()[i];
    let mid = 0.5 * (err.apply(pulse.field(i)) + err.apply(pulse.field(i + 1)));
    Some(mid * h)
}

/// Bloch vector on the pulse grid starting from `m0`.
pub fn bloch_propagate(pulse: &ControlPulse, m0: &BodyState, err: &ErrorParams) -> Result<Trajectory> {
    check(pulse)?;
    let mut m = m0.vector();
    let mut states = Vec::with_capacity(pulse.len());
    states.push(m);
    for i in 0..pulse.len() - 1 {
        if let Some(w) = step(pulse, err, i) {
            m = rotate_vector(&w, &m);
        }
        states.push(m);
    }
    Ok(Trajectory { times: pulse.times().to_vec(), states })
}

/// Final Bloch vector only.
pub fn final_state(pulse: &ControlPulse, m0: &BodyState, err: &ErrorParams) -> Result<Vec3> {
    check(pulse)?;
    let mut m = m0.vector();
    for i in 0..pulse.len() - 1 {
        if let Some(w) = step(pulse, err, i) {
            m = rotate_vector(&w, &m);
        }
    }
    Ok(m)
}

/// Frame rotation `R(t)` with `R(0) = 1`.
pub fn so3_propagate(pulse: &ControlPulse, err: &ErrorParams) -> Result<PropagatorPath> {
    check(pulse)?;
    let mut r = Mat3::identity();
    let mut rotations = Vec::with_capacity(pulse.len());
    rotations.push(r);
    for i in 0..pulse.len() - 1 {
        if let Some(w) = step(pulse, err, i) {
            r = rotation_matrix(&w) * r;
        }
        rotations.push(r);
    }
    Ok(PropagatorPath { times: pulse.times().to_vec(), rotations, unitaries: Vec::new() })
}

/// Spin propagator `U(t)` with `U(0) = 1`.
pub fn su2_propagate(pulse: &ControlPulse, err: &ErrorParams) -> Result<PropagatorPath> {
    check(pulse)?;
    let mut u = Mat2::identity();
    let mut unitaries = Vec::with_capacity(pulse.len());
    unitaries.push(u);
    for i in 0..pulse.len() - 1 {
        if let Some(w) = step(pulse, err, i) {
            u = su2_exp(&w) * u;
        }
        unitaries.push(u);
    }
    Ok(PropagatorPath { times: pulse.times().to_vec(), rotations: Vec::new(), unitaries })
}

/// Both `R(t)` and `U(t)`.
pub fn propagate_both(pulse: &ControlPulse, err: &ErrorParams) -> Result<PropagatorPath> {
    let r = so3_propagate(pulse, err)?;
    let u = su2_propagate(pulse, err)?;
    Ok(PropagatorPath { times: r.times, rotations: r.rotations, unitaries: u.unitaries })
}

/// `R(T)` without storing the path.
pub fn final_rotation(pulse: &ControlPulse, err: &ErrorParams) -> Result<Mat3> {
    check(pulse)?;
    let mut r = Mat3::identity();
    for i in 0..pulse.len() - 1 {
        if let Some(w) = step(pulse, err, i) {
            r = rotation_matrix(&w) * r;
        }
    }
    Ok(r)
}

/// `U(T)` without storing the path.
pub fn final_unitary(pulse: &ControlPulse, err: &ErrorParams) -> Result<Mat2> {
    check(pulse)?;
    let mut u = Mat2::identity();
    for i in 0..pulse.len() - 1 {
        if let Some(w) = step(pulse, err, i) {
            u = su2_exp(&w) * u;
        }
    }
    Ok(u)
}

/// `‖U†U − 1‖_F`.
pub fn unitarity_defect(u: &Mat2) -> f64 {
    (u.adjoint() * u - Mat2::identity()).norm()
}

/// `R_ij = ½ tr(σᵢ U σⱼ U†)`.
///
/// Any unitary is accepted; a global phase, including the sign of the
/// double cover, drops out.
pub fn adjoint_map(u: &Mat2) -> Result<Mat3> {
    let defect = unitarity_defect(u);
    if !(defect <= 1e-8) {
        return Err(Error::Numeric(format!("matrix is not unitary (defect {defect:.3e})")));
    }
    let s = pauli();
    let ud = u.adjoint();
    Ok(Mat3::from_fn(|i, j| 0.5 * (s[i] * u * s[j] * ud).trace().re))
}

/// `|tr(U†V)|/2`.
pub fn gate_fidelity(u: &Mat2, v: &Mat2) -> f64 {
    ((u.adjoint() * v).trace().norm() * 0.5).min(1.0)
}

/// Axis and angle of `U = exp(−i θ n·σ/2)` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    pub axis: [f64; 3],
    pub angle: f64,
    /// False when the angle is a multiple of 2π and the axis is carried over.
    pub defined: bool,
}

/// Axis-angle form of every `U(t)` on the path.
///
/// The angle lives in `[0, 4π)`. Between the equivalent forms `(n, θ)` and
/// `(−n, 4π − θ)` the one whose axis is closer to the previous axis wins.
pub fn axis_angle_path(path: &PropagatorPath) -> Vec<AxisAngle> {
    let s = pauli();
    let mut prev: Option<Vec3> = None;
    path.unitaries
        .iter()
        .map(|u| {
            let c = 0.5 * u.trace().re;
            let v = Vec3::from_fn(|k, _| -0.5 * (u * s[k]).trace().im);
            let sn = v.norm();
            let theta = 2.0 * sn.atan2(c);
            if sn < 1e-9 {
                let axis = prev.unwrap_or_else(Vec3::z);
                return AxisAngle { axis: axis.into(), angle: theta, defined: false };
            }
            let mut n = v / sn;
            let mut angle = theta;
            if let Some(p) = prev {
                if n.dot(&p) < 0.0 {
                    n = -n;
                    angle = 4.0 * std::f64::consts::PI - theta;
                }
            }
            prev = Some(n);
            AxisAngle { axis: n.into(), angle, defined: true }
        })
        .collect()
}

/// Angle `φ` with `R ≈ Rot_axis(φ)`, read from the image of a vector
/// orthogonal to `axis`; in `(−π, π]`.
pub fn signed_rotation_angle(r: &Mat3, axis: &Vec3) -> f64 {
    let a = axis.normalize();
    let helper = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = (helper - a * a.dot(&helper)).normalize();
    let w = r * u;
    a.dot(&u.cross(&w)).atan2(u.dot(&w))
}
