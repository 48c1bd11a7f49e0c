//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Every public entry point takes the *parameter* `m` (the modulus squared),
//! never the modulus itself. Near `m = 1` the complement `m1 = 1 - m` cannot
//! be recovered from `m` without cancellation, so [`EllipticModulus`] carries
//! both and the algorithms only ever consume `m1` where it matters.
//!
//! ```text
//! K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)
//! E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ
//! ```

use crate::error::{Error, Result};

const MAX_CHAIN: usize = 64;

/// Elliptic parameter `m ∈ [0, 1]` (modulus squared) with its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    m: f64,
    m1: f64,
}

impl EllipticModulus {
    /// Build from the parameter `m` (modulus squared).
    pub fn new(m: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) {
            return Err(Error::Domain(format!("elliptic parameter m = {m} outside [0, 1]")));
        }
        Ok(Self { m, m1: 1.0 - m })
    }

    /// Build from the complementary parameter `m1 = 1 - m`.
    ///
    /// Use this when `m` is within a few ulps of one; `m1` keeps full
    /// relative precision.
    pub fn from_complement(m1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m1) {
            return Err(Error::Domain(format!("complementary parameter {m1} outside [0, 1]")));
        }
        Ok(Self { m: 1.0 - m1, m1 })
    }

    /// Build from a parameter and complement computed independently.
    ///
    /// The pair must satisfy `m + m1 = 1` to rounding.
    pub fn from_parts(m: f64, m1: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&m) || !(0.0..=1.0).contains(&m1) || (m + m1 - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("inconsistent elliptic parameter pair ({m}, {m1})")));
        }
        Ok(Self { m, m1 })
    }

    /// Parameter `m` (modulus squared).
    pub fn m(&self) -> f64 {
        self.m
    }

    /// Complement `1 - m`, exact as supplied.
    pub fn complement(&self) -> f64 {
        self.m1
    }
}

/// Complete integral of the first kind `K(m)`; `m` is the parameter.
///
/// Computed as `π / (2·agm(1, √(1 − m)))`.
pub fn complete_k(m: EllipticModulus) -> Result<f64> {
    if m.m1 <= 0.0 {
        return Err(Error::Divergence("K(m) diverges at m = 1".into()));
    }
    Ok(std::f64::consts::FRAC_PI_2 / agm(1.0, m.m1.sqrt()))
}

/// Complete integral of the second kind `E(m)`; `m` is the parameter.
pub fn complete_e(m: EllipticModulus) -> f64 {
    if m.m1 == 0.0 {
        return 1.0;
    }
    // Gauss: E/K = 1 − Σ 2^{n−1} c_n², with c_0² = m.
    let mut a = 1.0;
    let mut b = m.m1.sqrt();
    let mut sum = 0.5 * m.m;
    let mut pow = 0.5;
    for _ in 0..MAX_CHAIN {
        let c = 0.5 * (a - b);
        pow *= 2.0;
        sum += pow * c * c;
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    std::f64::consts::FRAC_PI_2 / a * (1.0 - sum)
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..MAX_CHAIN {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// The triple `(sn, cn, dn)` at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Precomputed descending AGM chain for repeated evaluation at one `m`.
///
/// Evaluating a long pulse at a fixed parameter reuses the chain instead of
/// rebuilding it per sample.
#[derive(Debug, Clone)]
pub struct Jacobi {
    modulus: EllipticModulus,
    a: [f64; MAX_CHAIN],
    c: [f64; MAX_CHAIN],
    len: usize,
}

impl Jacobi {
    pub fn new(modulus: EllipticModulus) -> Self {
        let mut a = [0.0; MAX_CHAIN];
        let mut c = [0.0; MAX_CHAIN];
        let mut len = 0;
        if modulus.m1 > 0.0 {
            let mut an = 1.0;
            let mut bn = modulus.m1.sqrt();
            a[0] = an;
            c[0] = modulus.m.sqrt();
            len = 1;
            while len < MAX_CHAIN && c[len - 1].abs() > f64::EPSILON * an {
                let cn = 0.5 * (an - bn);
                let next = 0.5 * (an + bn);
                bn = (an * bn).sqrt();
                an = next;
                a[len] = an;
                c[len] = cn;
                len += 1;
            }
        }
        Self { modulus, a, c, len }
    }

    pub fn modulus(&self) -> EllipticModulus {
        self.modulus
    }

    /// `(sn, cn, dn)(u | m)`.
    pub fn eval(&self, u: f64) -> JacobiTriple {
        let m = self.modulus.m;
        let m1 = self.modulus.m1;
        if m1 == 0.0 {
            let sech = 1.0 / u.cosh();
            return JacobiTriple { sn: u.tanh(), cn: sech, dn: sech };
        }
        let n = self.len - 1;
        let mut phi = (2.0f64).powi(n as i32) * self.a[n] * u;
        for i in (1..=n).rev() {
            let s = (self.c[i] / self.a[i] * phi.sin()).clamp(-1.0, 1.0);
            phi = 0.5 * (phi + s.asin());
        }
        let (sn, cn) = phi.sin_cos();
        // dn from the complement keeps absolute accuracy when dn ~ √m1.
        let dn = (m1 + m * cn * cn).sqrt();
        JacobiTriple { sn, cn, dn }
    }
}

/// `(sn, cn, dn)(u | m)` with `m` the parameter.
pub fn jacobi_sn_cn_dn(u: f64, m: EllipticModulus) -> JacobiTriple {
    Jacobi::new(m).eval(u)
}
