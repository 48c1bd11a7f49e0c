#![allow(clippy::excessive_precision)]
//! Independent numerical references used by the tests.
//!
//! Nothing here shares code with `racket-core`; the routines are plain
//! textbook methods run at tight tolerances.

/// Classic fourth-order Runge–Kutta step.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let add = |a: &[f64; N], b: &[f64; N], s: f64| {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * b[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(t + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// RK4 from `t0` to `t1` with steps of at most `h`; returns every grid point.
pub fn rk4_path<const N: usize, F>(f: F, y0: [f64; N], t0: f64, t1: f64, h: f64) -> Vec<(f64, [f64; N])>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let steps = ((t1 - t0).abs() / h).ceil().max(1.0) as usize;
    let dt = (t1 - t0) / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut y = y0;
    out.push((t0, y));
    for i in 0..steps {
        let t = t0 + i as f64 * dt;
        y = rk4_step(&f, t, &y, dt);
        out.push((t0 + (i + 1) as f64 * dt, y));
    }
    out
}

/// Adaptive Dormand–Prince 5(4) to `t1`, mixed tolerance `tol·(1 + |y|)`.
pub fn dopri5<const N: usize, F>(f: F, y0: [f64; N], t0: f64, t1: f64, tol: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] =
        [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = dir * ((t1 - t0).abs() * 1e-3).max(1e-6);
    while (t1 - t) * dir > 0.0 {
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += h * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for i in 0..N {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += h * d5;
            err = err.max((h * (d5 - d4)).abs() / (tol * (1.0 + y[i].abs())));
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    y
}

/// Times in `(t0, t1)` where `g(y(t))` changes sign along an RK4 path with
/// step `h`. Each crossing is refined by bisection on the length of one
/// RK4 step taken from the left end of its bracket.
pub fn rk4_events<const N: usize, F, G>(f: F, g: G, y0: [f64; N], t0: f64, t1: f64, h: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> f64,
{
    let path = rk4_path(&f, y0, t0, t1, h);
    let mut events = Vec::new();
    for w in path.windows(2) {
        let (ta, ya) = w[0];
        let (tb, yb) = w[1];
        let (ga, gb) = (g(&ya), g(&yb));
        if ga == 0.0 || ga.signum() == gb.signum() {
            continue;
        }
        let (mut lo, mut hi) = (0.0, tb - ta);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let gm = g(&rk4_step(&f, ta, &ya, mid));
            if gm.signum() == ga.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        events.push(ta + 0.5 * (lo + hi));
    }
    events
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    const XK: [f64; 8] = [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ];
    const WK: [f64; 8] = [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ];
    const WG: [f64; 4] = [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ];
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let v = f(c - r * XK[i]) + f(c + r * XK[i]);
        kron += WK[i] * v;
        if i % 2 == 1 {
            gauss += WG[i / 2] * v;
        }
    }
    (kron * r, ((kron - gauss) * r).abs())
}

/// Adaptive Gauss–Kronrod (7, 15) quadrature to absolute tolerance `tol`.
/// Subdivision stops once the local error estimate reaches round-off of the
/// whole integral.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, floor: f64, depth: u32) -> f64 {
        let (v, e) = gauss_kronrod_15(f, a, b);
        if e <= tol.max(floor) || depth == 0 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, floor, depth - 1) + rec(f, m, b, 0.5 * tol, floor, depth - 1)
    }
    let (whole, _) = gauss_kronrod_15(&f, a, b);
    rec(&f, a, b, tol, 8.0 * f64::EPSILON * whole.abs(), 30)
}

/// `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)` by quadrature.
pub fn elliptic_k(m: f64) -> f64 {
    integrate(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-15)
}

/// `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ` by quadrature.
pub fn elliptic_e(m: f64) -> f64 {
    integrate(|t| (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-15)
}

/// `(sn, cn, dn)` from the amplitude `φ` solving `F(φ | m) = u`, found by
/// Newton iteration on the quadrature of the incomplete integral.
/// Valid for `0 ≤ m < 1`.
pub fn jacobi_by_inversion(u: f64, m: f64) -> (f64, f64, f64) {
    let kk = elliptic_k(m);
    let half = (u / (2.0 * kk)).round();
    let rest = u - 2.0 * half * kk;
    let incomplete = |phi: f64| integrate(|t| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-15);
    let mut phi = rest;
    for _ in 0..60 {
        let step = (incomplete(phi) - rest) * (1.0 - m * phi.sin().powi(2)).sqrt();
        phi -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    let phi = phi + half * std::f64::consts::PI;
    let sn = phi.sin();
    (sn, phi.cos(), (1.0 - m * sn * sn).sqrt())
}

/// Ordinary least squares `y ≈ slope·x + intercept` by normal equations
/// on centred data; returns `(slope, intercept, r²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let det = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let mean = sy / n;
    let tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    (slope, intercept, 1.0 - res / tot)
}

/// Second-order central difference.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Fourth-order central difference.
pub fn central_diff4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Small deterministic generator (SplitMix64) for oracle inputs.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rk4_exponential() {
        let path = rk4_path(|_, y: &[f64; 1]| [y[0]], [1.0], 0.0, 1.0, 1e-3);
        assert!((path.last().unwrap().1[0] - 1f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn dopri_harmonic() {
        let y = dopri5(|_, y: &[f64; 2]| [y[1], -y[0]], [0.0, 1.0], 0.0, 10.0, 1e-13);
        assert!((y[0] - 10f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn events_of_sine() {
        let ev = rk4_events(|_, y: &[f64; 2]| [y[1], -y[0]], |y| y[0], [0.5, 1.0], 0.0, 7.0, 1e-2);
        let phase = 0.5f64.atan2(1.0);
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - (std::f64::consts::PI - phase)).abs() < 1e-9);
    }

    #[test]
    fn quadrature_known() {
        assert!((integrate(|x| x.exp(), 0.0, 1.0, 1e-14) - (1f64.exp() - 1.0)).abs() < 1e-14);
        assert!((elliptic_k(0.0) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn k_by_quadrature() {
        for m in [0.1, 0.5, 0.9, 0.99] {
            let k = elliptic_k(m);
            assert!(k.is_finite() && k > 1.5, "{m} {k}");
        }
    }

    #[test]
    fn inversion_trig_limit() {
        let (s, c, d) = jacobi_by_inversion(2.3, 0.0);
        assert!((s - 2.3f64.sin()).abs() < 1e-13 && (c - 2.3f64.cos()).abs() < 1e-13 && d == 1.0);
    }

    #[test]
    fn fit_line() {
        let (a, b, r2) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((a - 2.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }
}
