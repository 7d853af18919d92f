//! Real special functions needed by the beta-family exponent: log-gamma with
//! sign (valid for negative non-integer arguments), digamma and the beta
//! function. Evaluated in double precision.

use std::f64::consts::PI;

/// `(ln |Gamma(x)|, sign Gamma(x))`. Poles (non-positive integers) give
/// `(inf, 1)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    let (v, s) = libm::lgamma_r(x);
    (v, if s < 0 { -1.0 } else { 1.0 })
}

/// `Gamma(x)`, possibly infinite at poles.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Digamma `psi_0(x)` for real non-pole `x`.
pub fn digamma(mut x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    let mut acc = 0.0;
    if x < 0.5 {
        // psi(x) = psi(1 - x) - pi / tan(pi x)
        acc -= PI / (PI * x).tan();
        x = 1.0 - x;
    }
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // asymptotic series with Bernoulli numbers B_2 .. B_12
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    acc + x.ln() - 0.5 * inv - series
}

/// `B(x, y) = Gamma(x) Gamma(y) / Gamma(x + y)` for real arguments, through
/// signed log-gamma so that negative non-integer arguments are handled.
/// Returns infinity (with sign) at poles of `Gamma(x)` or `Gamma(y)`, and
/// zero at poles of `Gamma(x + y)` alone.
pub fn beta(x: f64, y: f64) -> f64 {
    let (lx, sx) = ln_gamma_signed(x);
    let (ly, sy) = ln_gamma_signed(y);
    let (lxy, sxy) = ln_gamma_signed(x + y);
    sx * sy * sxy * (lx + ly - lxy).exp()
}
