#![allow(dead_code)]

use levy_scale::levy_model::{HyperExponential, SnLevyModel};
use levy_scale::models::{exp1_jumps, pareto_fit_jumps, weibull_fit_jumps};

/// 16-point Gauss-Legendre nodes and weights on `[-1, 1]`, by Newton's method.
fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: std::sync::OnceLock<Vec<(f64, f64)>> = std::sync::OnceLock::new();
    RULE.get_or_init(|| {
        let n = 16;
        (0..n)
            .map(|i| {
                let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                let mut dp = 0.0;
                for _ in 0..100 {
                    let (mut p0, mut p1) = (1.0, x);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                    let dx = p1 / dp;
                    x -= dx;
                    if dx.abs() < 1e-16 {
                        break;
                    }
                }
                (x, 2.0 / ((1.0 - x * x) * dp * dp))
            })
            .collect()
    })
}

fn panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * gauss_legendre().iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>()
}

/// Adaptive Gauss-Legendre quadrature on `[a, b]` to absolute tolerance `tol`
/// (or relative rounding level, whichever is larger).
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (panel(f, a, m), panel(f, m, b));
        let err = (l + r - whole).abs();
        if depth == 0 || err <= tol.max(1e-13 * (l + r).abs()) {
            return l + r;
        }
        rec(f, a, m, l, 0.5 * tol, depth - 1) + rec(f, m, b, r, 0.5 * tol, depth - 1)
    }
    rec(f, a, b, panel(f, a, b), tol, 14)
}

/// Sum of [`integrate`] over consecutive breakpoints.
pub fn integrate_pieces(f: &dyn Fn(f64) -> f64, points: &[f64], tol: f64) -> f64 {
    points.windows(2).map(|w| integrate(f, w[0], w[1], tol)).sum()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

pub fn named_jumps() -> Vec<(&'static str, HyperExponential<f64>)> {
    vec![("exp1", exp1_jumps()), ("weibull-fit", weibull_fit_jumps()), ("pareto-fit", pareto_fit_jumps())]
}

pub fn model(mu: f64, sigma: f64, lambda: f64, jumps: HyperExponential<f64>) -> SnLevyModel<f64> {
    SnLevyModel::hyperexponential(mu, sigma, lambda, jumps).unwrap()
}
