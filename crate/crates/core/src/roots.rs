//! Bracketed scalar root finding: bisection to shrink the bracket, then
//! secant steps that are only accepted while they stay inside it.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Absolute tolerance on the bracket width.
    pub x_tol: f64,
    /// Stop early once `|f(x)|` falls below this.
    pub f_tol: f64,
    pub max_iter: usize,
    /// Bisection steps taken before secant polishing starts.
    pub bisect_steps: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { x_tol: 1e-10, f_tol: 0.0, max_iter: 200, bisect_steps: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Root of `f` in `[a, b]`; `f(a)` and `f(b)` must differ in sign.
pub fn solve_bracketed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: RootOptions) -> Result<Root> {
    let fa = f(a);
    let fb = f(b);
    solve_with_values(f, (a, fa), (b, fb), opts)
}

/// As [`solve_bracketed`] with the endpoint values already known.
pub fn solve_with_values<F: FnMut(f64) -> f64>(
    mut f: F,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    opts: RootOptions,
) -> Result<Root> {
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::Numeric("objective not finite at bracket ends".into()));
    }
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, iterations: 0, converged: true });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, iterations: 0, converged: true });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Usage(format!("no sign change on [{a}, {b}]")));
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    let mut force_bisect = false;
    for it in 1..=opts.max_iter {
        let mid = 0.5 * (a + b);
        let width = (b - a).abs();
        let x = if it > opts.bisect_steps && !force_bisect {
            let s = b - fb * (b - a) / (fb - fa);
            // Keep secant steps strictly inside and away from the ends.
            let guard = 0.05 * (b - a).abs();
            if s.is_finite() && s > a.min(b) + guard && s < a.max(b) - guard {
                s
            } else {
                mid
            }
        } else {
            mid
        };
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Numeric(format!("objective not finite at {x}")));
        }
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx == 0.0 || fx.abs() <= opts.f_tol {
            return Ok(Root { x, fx, iterations: it, converged: true });
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // A secant step that failed to halve the bracket is followed by bisection.
        force_bisect = !force_bisect && (b - a).abs() > 0.5 * width;
        if (b - a).abs() <= opts.x_tol {
            let (x, fx) = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
            return Ok(Root { x, fx, iterations: it, converged: true });
        }
    }
    Ok(Root { x: best.0, fx: best.1, iterations: opts.max_iter, converged: false })
}

/// A grid interval over which the objective changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: (f64, f64),
    pub hi: (f64, f64),
}

/// Sign changes of sampled values on `grid`.
///
/// With `jump_guard = Some(g)` an interval is kept only when both ends
/// satisfy `|f| < g`; this drops sign flips caused by angle wrapping.
pub fn scan_brackets(grid: &[f64], values: &[f64], jump_guard: Option<f64>) -> Vec<Bracket> {
    grid.windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0].is_finite() && v[1].is_finite())
        .filter(|(_, v)| v[0] == 0.0 || v[0].signum() != v[1].signum())
        .filter(|(_, v)| jump_guard.map_or(true, |g| v[0].abs() < g && v[1].abs() < g))
        .map(|(x, v)| Bracket { lo: (x[0], v[0]), hi: (x[1], v[1]) })
        .collect()
}

/// `n ≥ 2` points evenly spaced in `ln x` on `[lo, hi]`, both positive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// `n ≥ 2` evenly spaced points on `[lo, hi]`, ends exact.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| (lo * (n - 1 - i) as f64 + hi * i as f64) / (n - 1) as f64)
        .collect()
}
