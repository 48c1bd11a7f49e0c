//! Free asymmetric top with inertia triple `(1, ∞, 1/k²)`.
//!
//! Sign convention used everywhere in the crate: the state obeys
//! `L̇ = Ω × L` with `Ω = (L₁, 0, k²L₃)`, so
//!
//! ```text
//! L̇ = (−k²L₂L₃, (k²−1)L₁L₃, L₁L₂)
//! E = (L₁² + k²L₃²)/2,   separatrix at E = k²/2
//! ```
//!
//! `±e₁` (E = 1/2) and `±e₂` (E = 0) are stable centers and `±e₃` are the
//! saddles joined by the separatrix. The same equation drives a Bloch vector
//! when `Ω` is read as a control field.
//!
//! Near-separatrix orbits start at distance `ε` from `+e₃`, displaced along
//! `e₁` (rotating family, energy above the separatrix) or `e₂` (oscillating
//! family, below it).

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::elliptic::{complete_k, EllipticModulus, Jacobi};
use crate::error::{Error, Result};
use crate::roots::{solve_bracketed, RootOptions};

pub type Vec3 = Vector3<f64>;

/// Default tolerance for [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-12;

/// Shape parameter `k ∈ (0, 1)` of the top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopParameters {
    k: f64,
}

impl TopParameters {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::Domain(format!("shape parameter k = {k} outside (0, 1)")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `(I₁, I₂, I₃) = (1, ∞, 1/k²)`.
    pub fn inertia(&self) -> [f64; 3] {
        [1.0, f64::INFINITY, 1.0 / (self.k * self.k)]
    }

    /// `Ω = (L₁, 0, k²L₃)`.
    pub fn angular_velocity(&self, l: &Vec3) -> Vec3 {
        Vec3::new(l.x, 0.0, self.k * self.k * l.z)
    }
}

/// How [`BodyState::new`] treats a vector that is not of unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strictness {
    Normalize,
    Reject { tol: f64 },
}

/// Unit vector: body-frame angular momentum or Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct BodyState(Vec3);

impl BodyState {
    pub fn new(v: Vec3, strictness: Strictness) -> Result<Self> {
        let n = v.norm();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::Domain(format!("state {v:?} has no direction")));
        }
        match strictness {
            Strictness::Normalize => Ok(Self(v / n)),
            Strictness::Reject { tol } if (n - 1.0).abs() <= tol => Ok(Self(v)),
            Strictness::Reject { .. } => Err(Error::Domain(format!("|L| = {n} is not 1"))),
        }
    }

    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vec3::new(x, y, z), Strictness::Normalize)
    }

    pub(crate) fn from_unit(v: Vec3) -> Self {
        Self(v)
    }

    pub fn vector(&self) -> Vec3 {
        self.0
    }
}

impl TryFrom<[f64; 3]> for BodyState {
    type Error = Error;
    fn try_from(a: [f64; 3]) -> Result<Self> {
        Self::new(Vec3::from(a), Strictness::Reject { tol: 1e-9 })
    }
}

impl From<BodyState> for [f64; 3] {
    fn from(s: BodyState) -> Self {
        s.0.into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rotating,
    Oscillating,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrajectoryClass {
    Rotating,
    Oscillating,
    Separatrix,
    StableFixedPoint,
    UnstableFixedPoint,
}

/// `Ω × L` for the top, `(−k²L₂L₃, (k²−1)L₁L₃, L₁L₂)`.
pub fn euler_rhs(l: &Vec3, p: &TopParameters) -> Vec3 {
    let k2 = p.k * p.k;
    Vec3::new(-k2 * l.y * l.z, (k2 - 1.0) * l.x * l.z, l.x * l.y)
}

/// `(L₁² + k²L₃²)/2`.
pub fn energy(l: &Vec3, p: &TopParameters) -> f64 {
    0.5 * (l.x * l.x + p.k * p.k * l.z * l.z)
}

/// Orbit type of the trajectory through `l0`.
pub fn classify(l0: &BodyState, p: &TopParameters, tol: f64) -> TrajectoryClass {
    let l = l0.vector();
    let near = |axis: Vec3| (l - axis).norm() <= tol || (l + axis).norm() <= tol;
    if near(Vec3::z()) {
        return TrajectoryClass::UnstableFixedPoint;
    }
    if near(Vec3::x()) || near(Vec3::y()) {
        return TrajectoryClass::StableFixedPoint;
    }
    let gap = energy(&l, p) - 0.5 * p.k * p.k;
    if gap.abs() <= tol {
        TrajectoryClass::Separatrix
    } else if gap > 0.0 {
        TrajectoryClass::Rotating
    } else {
        TrajectoryClass::Oscillating
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps = {eps} outside (0, 1)")));
    }
    Ok(())
}

/// Start point at distance `eps` from `+e₃`.
///
/// Rotating: `(ε, 0, √(1−ε²))`; oscillating: `(0, ε, √(1−ε²))`.
pub fn tre_initial(p: &TopParameters, eps: f64, family: Family) -> Result<BodyState> {
    let _ = p;
    check_eps(eps)?;
    let c = (1.0 - eps * eps).sqrt();
    Ok(BodyState::from_unit(match family {
        Family::Rotating => Vec3::new(eps, 0.0, c),
        Family::Oscillating => Vec3::new(0.0, eps, c),
    }))
}

/// Closed-form state at time `t` on the orbit through [`tre_initial`].
pub fn analytic_trajectory(p: &TopParameters, eps: f64, family: Family, t: f64) -> Result<BodyState> {
    Ok(BodyState::from_unit(TopOrbit::new(p, eps, family)?.state(t)))
}

/// Pole-to-pole transfer time `2K(m)/ω`.
pub fn transfer_period(p: &TopParameters, eps: f64, family: Family) -> Result<f64> {
    Ok(TopOrbit::new(p, eps, family)?.transfer_time())
}

/// Separatrix point at rescaled time `s`, in the quadrant `L₁, L₂ > 0`:
/// `(k sech s, √(1−k²) sech s, tanh s)`.
///
/// It solves [`euler_rhs`] with `s = k√(1−k²)·t`.
pub fn separatrix_state(p: &TopParameters, s: f64) -> Vec3 {
    let sech = 1.0 / s.cosh();
    Vec3::new(p.k * sech, (1.0 - p.k * p.k).sqrt() * sech, s.tanh())
}

/// Integrate the top with the implicit midpoint rule.
///
/// The rule conserves every quadratic invariant of the flow, so `|L|` and
/// `E` drift only by rounding. Returns `steps + 1` states.
pub fn integrate_top(p: &TopParameters, l0: &BodyState, h: f64, steps: usize) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut l = l0.vector();
    out.push(l);
    for _ in 0..steps {
        let mut next = l + h * euler_rhs(&l, p);
        for _ in 0..100 {
            let mid = 0.5 * (l + next);
            let cand = l + h * euler_rhs(&mid, p);
            let change = (cand - next).amax();
            next = cand;
            if change <= f64::EPSILON {
                break;
            }
        }
        l = next;
        out.push(l);
    }
    out
}

/// A closed orbit of the top in closed form.
///
/// With `u = ωt` the canonical orbits read
///
/// ```text
/// rotating:    L = ( ε/dn, −(Bε/A)·sn/dn, C·cn/dn ),  m = k²C²/A²
/// oscillating: L = ( −(kCε/b)·sn/dn, ε/dn, C·cn/dn ),  m = (1−k²)C²/b²
///
/// C = √(1−ε²),  A = √(k² + ε²(1−k²)),  B = C√(1−k²),  ω = A√(1−k²)
/// b = √(1 − k²C²),  ω = k·b
/// ```
///
/// Orbits around `−e₁` or `−e₂` are the images under a half-turn about `e₃`.
#[derive(Debug, Clone)]
pub struct TopOrbit {
    params: TopParameters,
    family: Family,
    eps: f64,
    c: f64,
    omega: f64,
    transverse: f64,
    jacobi: Jacobi,
    quarter: f64,
    flipped: bool,
}

impl TopOrbit {
    pub fn new(p: &TopParameters, eps: f64, family: Family) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self::build(p, eps, family, false))
    }

    fn build(p: &TopParameters, eps: f64, family: Family, flipped: bool) -> Self {
        let k = p.k;
        let k2 = k * k;
        let c = (1.0 - eps * eps).sqrt();
        let (omega, transverse, m, m1) = match family {
            Family::Rotating => {
                let a2 = k2 + eps * eps * (1.0 - k2);
                let a = a2.sqrt();
                let b = c * (1.0 - k2).sqrt();
                (a * (1.0 - k2).sqrt(), b * eps / a, k2 * c * c / a2, eps * eps / a2)
            }
            Family::Oscillating => {
                let b2 = 1.0 - k2 * c * c;
                let b = b2.sqrt();
                (k * b, k * c * eps / b, (1.0 - k2) * c * c / b2, eps * eps / b2)
            }
        };
        // The pair is consistent to rounding by construction.
        let modulus = EllipticModulus::from_parts(m.min(1.0), m1).expect("orbit parameter in range");
        let quarter = complete_k(modulus).expect("eps > 0 keeps m below 1");
        Self { params: *p, family, eps, c, omega, transverse, jacobi: Jacobi::new(modulus), quarter, flipped }
    }

    /// The orbit containing `point` and a time `τ` with `state(τ) = point`.
    pub fn through(p: &TopParameters, point: &Vec3) -> Result<(Self, f64)> {
        let orbit = Self::containing(p, point)?;
        let tau = orbit.locate(point);
        Ok((orbit, tau))
    }

    /// The orbit containing `point`, without locating the point on it.
    pub fn containing(p: &TopParameters, point: &Vec3) -> Result<Self> {
        let k2 = p.k * p.k;
        let two_e = point.x * point.x + k2 * point.z * point.z;
        let (family, eps2, flipped) = if two_e > k2 {
            (Family::Rotating, (two_e - k2) / (1.0 - k2), point.x < 0.0)
        } else if two_e < k2 {
            (Family::Oscillating, 1.0 - two_e / k2, point.y < 0.0)
        } else {
            return Err(Error::Domain("point lies on the separatrix".into()));
        };
        let eps = eps2.sqrt();
        check_eps(eps)?;
        Ok(Self::build(p, eps, family, flipped))
    }

    /// Time in `[0, period)` at which the orbit passes closest to `point`.
    fn locate(&self, point: &Vec3) -> f64 {
        let q = if self.flipped { Vec3::new(-point.x, -point.y, point.z) } else { *point };
        let lateral = match self.family {
            Family::Rotating => q.y,
            Family::Oscillating => q.x,
        };
        let kk = self.quarter;
        // sn ≥ 0 on [0, 2K] where cn/dn falls from 1 to −1; it rises on [2K, 4K].
        let target = (q.z / self.c).clamp(-1.0, 1.0);
        let cd = |u: f64| {
            let j = self.jacobi.eval(u);
            j.cn / j.dn
        };
        let (lo, hi, sign) = if lateral <= 0.0 { (0.0, 2.0 * kk, -1.0) } else { (2.0 * kk, 4.0 * kk, 1.0) };
        let opts = RootOptions { x_tol: 1e-15 * kk, ..RootOptions::default() };
        let mut u = match solve_bracketed(|u| sign * (cd(u) - target), lo, hi, opts) {
            Ok(r) => r.x,
            Err(_) => if (cd(lo) - target).abs() < (cd(hi) - target).abs() { lo } else { hi },
        };
        // Newton on the full vector removes the flatness of cn/dn near the poles.
        for _ in 0..3 {
            let t = u / self.omega;
            let diff = self.state(t) - point;
            let vel = self.velocity(t) / self.omega;
            let v2 = vel.norm_squared();
            if v2 == 0.0 {
                break;
            }
            u -= diff.dot(&vel) / v2;
        }
        (u / self.omega).rem_euclid(self.period())
    }

    pub fn params(&self) -> &TopParameters {
        &self.params
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Angular frequency of the elliptic argument, `u = ωt`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn modulus(&self) -> EllipticModulus {
        self.jacobi.modulus()
    }

    /// True for the half-turn image around `−e₁` or `−e₂`.
    pub fn is_flipped(&self) -> bool {
        self.flipped
    }

    pub fn state(&self, t: f64) -> Vec3 {
        let j = self.jacobi.eval(self.omega * t);
        let along = self.eps / j.dn;
        let side = -self.transverse * j.sn / j.dn;
        let polar = self.c * j.cn / j.dn;
        let v = match self.family {
            Family::Rotating => Vec3::new(along, side, polar),
            Family::Oscillating => Vec3::new(side, along, polar),
        };
        if self.flipped {
            Vec3::new(-v.x, -v.y, v.z)
        } else {
            v
        }
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        euler_rhs(&self.state(t), &self.params)
    }

    /// Control field `(L₁, 0, k²L₃)` along the orbit.
    pub fn field(&self, t: f64) -> Vec3 {
        self.params.angular_velocity(&self.state(t))
    }

    pub fn energy(&self) -> f64 {
        let k2 = self.params.k * self.params.k;
        match self.family {
            Family::Rotating => 0.5 * (k2 + self.eps * self.eps * (1.0 - k2)),
            Family::Oscillating => 0.5 * k2 * self.c * self.c,
        }
    }

    /// Half period, the time between the passes near `+e₃` and `−e₃`.
    pub fn transfer_time(&self) -> f64 {
        2.0 * self.quarter / self.omega
    }

    /// Full period `4K/ω`.
    pub fn period(&self) -> f64 {
        4.0 * self.quarter / self.omega
    }

    /// Stable axis the orbit winds around.
    pub fn center(&self) -> Vec3 {
        let s = if self.flipped { -1.0 } else { 1.0 };
        match self.family {
            Family::Rotating => Vec3::new(s, 0.0, 0.0),
            Family::Oscillating => Vec3::new(0.0, s, 0.0),
        }
    }

    /// `∫ Ω·L dt = 2E·T` over one period.
    pub fn dynamical_phase(&self) -> f64 {
        2.0 * self.energy() * self.period()
    }

    /// Solid angle enclosed by one period, measured from [`Self::center`],
    /// positive when the orbit turns counterclockwise about it.
    ///
    /// Evaluates `∮ (1 − cos θ) dφ` as a time integral of a smooth periodic
    /// integrand, where the trapezoid rule converges geometrically.
    pub fn solid_angle(&self) -> f64 {
        let period = self.period();
        self.solid_angle_with(|s| (s * period, period))
    }

    /// [`Self::solid_angle`] evaluated on the reparametrized loop
    /// `s ∈ [0, 1) ↦ t(s)`; `time_of` returns `(t(s), dt/ds)` and must map
    /// `[0, 1)` onto one period.
    pub fn solid_angle_with<F: Fn(f64) -> (f64, f64)>(&self, time_of: F) -> f64 {
        let axis = self.center();
        let (e_u, e_v) = transverse_frame(&axis);
        let integrand = |s: f64| {
            let (t, dt) = time_of(s);
            let l = self.state(t);
            let v = euler_rhs(&l, &self.params) * dt;
            let (x, y, z) = (l.dot(&e_u), l.dot(&e_v), l.dot(&axis));
            let (vx, vy) = (v.dot(&e_u), v.dot(&e_v));
            (x * vy - y * vx) / (1.0 + z)
        };
        let mut n = 256usize;
        let mut prev = trapezoid_periodic(&integrand, n);
        loop {
            n *= 2;
            let cur = trapezoid_periodic(&integrand, n);
            if (cur - prev).abs() <= 1e-14 * cur.abs().max(1.0) || n >= 1 << 22 {
                return cur;
            }
            prev = cur;
        }
    }
}

fn trapezoid_periodic<F: Fn(f64) -> f64>(f: &F, n: usize) -> f64 {
    let h = 1.0 / n as f64;
    (0..n).map(|i| f(i as f64 * h)).sum::<f64>() * h
}

/// Right-handed pair `(u, v)` with `u × v = axis` for a coordinate axis.
pub(crate) fn transverse_frame(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = helper.cross(axis).normalize();
    let v = axis.cross(&u);
    (u, v)
}
