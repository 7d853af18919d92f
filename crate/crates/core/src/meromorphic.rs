//! Beta-family meromorphic Lévy processes: Laplace exponent, interlaced
//! root/pole system, truncated scale-function bounds and the CGMY limit.
//!
//! The jump part has Lévy density `c e^{alpha beta x} / (1 - e^{beta x})^lam`
//! on `x < 0`, and
//! `psi(s) = mu_hat s + sigma^2 s^2 / 2 + (c/beta)[B(alpha + s/beta, 1 - lam) - B(alpha, 1 - lam)]`.
//! Special functions are evaluated in double precision.

use crate::error::{Error, Result};
use crate::roots::bisect;
use crate::scalar::Real;
use crate::special;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaFamilyParams<T> {
    pub mu_hat: T,
    pub sigma: T,
    pub alpha_b: T,
    pub beta_b: T,
    pub c: T,
    /// Stability index in `(0, 3)`; unrelated to a Poisson intensity.
    pub lam: T,
}

fn f64_of<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl<T: Real> BetaFamilyParams<T> {
    pub fn new(mu_hat: T, sigma: T, alpha_b: T, beta_b: T, c: T, lam: T) -> Result<Self> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(sigma >= T::zero()) {
            return bad("sigma must be non-negative");
        }
        if !(alpha_b > T::zero()) || !(beta_b > T::zero()) {
            return bad("alpha and beta must be positive");
        }
        if !(c >= T::zero()) {
            return bad("c must be non-negative");
        }
        if !(lam > T::zero() && lam < T::lit(3.0)) {
            return bad("lam must lie in (0, 3)");
        }
        if c > T::zero() && (lam == T::one() || lam == T::lit(2.0)) {
            // B(., 1 - lam) is undefined when 1 - lam is a non-positive integer
            return bad("lam = 1 and lam = 2 are not supported");
        }
        if !mu_hat.is_finite() {
            return bad("mu_hat must be finite");
        }
        Ok(Self { mu_hat, sigma, alpha_b, beta_b, c, lam })
    }

    /// Reference example: `sigma = 0.2`, `mu_hat = 0.1`,
    /// `lam = 1.5`, `alpha = 3`, `beta = 1`, `c = 0.1`.
    pub fn reference_example() -> Self {
        Self::new(T::lit(0.1), T::lit(0.2), T::lit(3.0), T::one(), T::lit(0.1), T::lit(1.5)).expect("valid")
    }

    /// Parameters converging to CGMY as `beta -> 0`: `c = c~ beta^lam`,
    /// `alpha = alpha~ / beta`.
    pub fn cgmy_rescaled(&self, tilde_alpha: T, tilde_c: T, beta: T) -> Result<Self> {
        Self::new(self.mu_hat, self.sigma, tilde_alpha / beta, beta, tilde_c * beta.powf(self.lam), self.lam)
    }

    /// Lévy density at `x < 0`.
    pub fn levy_density(&self, x: T) -> T {
        if !(x < T::zero()) {
            return T::zero();
        }
        self.c * (self.alpha_b * self.beta_b * x).exp() / (-(self.beta_b * x).exp_m1()).powf(self.lam)
    }

    /// Total jump intensity, finite only for `lam < 1`.
    pub fn jump_mass(&self) -> T {
        if self.c == T::zero() {
            return T::zero();
        }
        if self.lam >= T::one() {
            return T::infinity();
        }
        let b = special::beta(f64_of(self.alpha_b), 1.0 - f64_of(self.lam));
        self.c / self.beta_b * T::lit(b)
    }

    /// Unbounded variation: `sigma > 0` or `lam >= 2` with jumps present.
    pub fn unbounded_variation(&self) -> bool {
        self.sigma > T::zero() || (self.c > T::zero() && self.lam >= T::lit(2.0))
    }
}

fn beta_term<T: Real>(p: &BetaFamilyParams<T>, s: T) -> Result<(f64, f64, f64)> {
    let a = f64_of(p.alpha_b) + f64_of(s) / f64_of(p.beta_b);
    let y = 1.0 - f64_of(p.lam);
    if a <= 0.0 && (a - a.round()).abs() < 1e-13 * (1.0 + a.abs()) {
        return Err(Error::PoleEvaluation { pole: f64_of(s) });
    }
    Ok((a, y, special::beta(a, y)))
}

/// Laplace exponent `psi(s)` of the beta-family process.
pub fn beta_psi<T: Real>(p: &BetaFamilyParams<T>, s: T) -> Result<T> {
    let diffusive = p.mu_hat * s + p.sigma * p.sigma * s * s / T::lit(2.0);
    if p.c == T::zero() {
        return Ok(diffusive);
    }
    let (_, y, b) = beta_term(p, s)?;
    let b0 = special::beta(f64_of(p.alpha_b), y);
    Ok(diffusive + p.c / p.beta_b * T::lit(b - b0))
}

/// `psi'(s)` via the digamma derivative of the beta function, with a
/// central-difference fallback when that is not finite.
pub fn beta_psi_derivative<T: Real>(p: &BetaFamilyParams<T>, s: T) -> Result<T> {
    let lin = p.mu_hat + p.sigma * p.sigma * s;
    if p.c == T::zero() {
        return Ok(lin);
    }
    let (a, y, b) = beta_term(p, s)?;
    let d = b * (special::digamma(a) - special::digamma(a + y)) / f64_of(p.beta_b);
    if d.is_finite() {
        return Ok(lin + p.c / p.beta_b * T::lit(d));
    }
    let h = T::lit(1e-6) * (T::one() + s.abs());
    Ok((beta_psi(p, s + h)? - beta_psi(p, s - h)?) / (h + h))
}

/// Magnitude of the `k`-th pole, `eta_k = beta (alpha + k - 1)`, `k >= 1`.
pub fn beta_poles<T: Real>(p: &BetaFamilyParams<T>, k: usize) -> T {
    p.beta_b * (p.alpha_b + T::from_usize_lossy(k.max(1) - 1))
}

/// `zeta_q` and the first `m + 1` negative roots `xi_k in (eta_{k-1}, eta_k)`.
pub fn mero_roots<T: Real>(p: &BetaFamilyParams<T>, q: T, m: usize) -> Result<(T, Vec<T>)> {
    if !(q > T::zero()) {
        return Err(Error::DomainError(format!("q = {q} must be positive")));
    }
    if m == 0 {
        return Err(Error::DomainError("truncation order m must be at least 1".into()));
    }
    let f = |s: T| beta_psi(p, s).map(|v| v - q).unwrap_or(T::nan());
    let mut hi = T::one();
    let mut tries = 0;
    while !(f(hi) > T::zero()) {
        hi = hi * T::lit(2.0);
        tries += 1;
        if tries > 200 {
            return Err(Error::BracketingFailure("no positive root of psi(s) = q".into()));
        }
    }
    let zeta = bisect(T::zero(), hi, T::epsilon(), f);

    let g = |s: T| beta_psi(p, -s).map(|v| v - q).unwrap_or(T::nan());
    let mut xi = Vec::with_capacity(m + 1);
    let mut lo = T::zero();
    for k in 1..=m + 1 {
        let up = beta_poles(p, k);
        let probe = (up - lo) * T::lit(1e-9);
        let (g_lo, g_hi) = (g(lo + probe), g(up - probe));
        let root = if g_lo < T::zero() && g_hi > T::zero() {
            bisect(lo, up, T::epsilon(), g)
        } else if g_lo > T::zero() && g_hi < T::zero() {
            bisect(lo, up, T::epsilon(), |s| -g(s))
        } else {
            return Err(Error::BracketingFailure(format!("no sign change of psi(-s) - q on ({lo}, {up})")));
        };
        xi.push(root);
        lo = up;
    }
    Ok((zeta, xi))
}

/// Truncated root/coefficient system of order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedMero<T> {
    pub params: BetaFamilyParams<T>,
    pub q: T,
    pub m: usize,
    pub zeta: T,
    /// `xi_1 .. xi_{m+1}`.
    pub xi: Vec<T>,
    /// `eta_1 .. eta_m`.
    pub eta: Vec<T>,
    pub a_trunc: Vec<T>,
    pub c_trunc: Vec<T>,
    pub psi_prime_zeta: T,
    /// `1/psi'(zeta) - W_zeta(0)`.
    pub gamma: T,
    /// `gamma - sum C^{(m)}`.
    pub delta: T,
    /// `W'(0+) - zeta W(0)`, infinite for bounded variation with infinite activity.
    pub theta: T,
    /// `theta - (zeta/q) sum xi_i A^{(m)}_i`, when `theta` is finite.
    pub epsilon: Option<T>,
    /// `W_zeta(0)`.
    pub w0: T,
}

/// Builds the order-`m` truncation.
pub fn truncated_coefficients<T: Real>(p: &BetaFamilyParams<T>, q: T, m: usize) -> Result<TruncatedMero<T>> {
    let w0 = if p.sigma > T::zero() {
        T::zero()
    } else if p.c > T::zero() && p.lam >= T::lit(2.0) {
        return Err(Error::UnsupportedRegime(
            "sigma = 0 with lam >= 2 has unbounded variation without a diffusion; W(0) is not available".into(),
        ));
    } else if p.mu_hat > T::zero() {
        p.mu_hat.recip()
    } else {
        return Err(Error::NegativeSubordinator { mu: f64_of(p.mu_hat) });
    };
    let (zeta, xi) = mero_roots(p, q, m)?;
    let eta: Vec<T> = (1..=m).map(|k| beta_poles(p, k)).collect();
    let mut a_trunc = Vec::with_capacity(m);
    for i in 0..m {
        let mut a = (eta[i] - xi[i]) / eta[i];
        for j in 0..m {
            if j != i {
                a *= (eta[j] - xi[i]) / eta[j] * xi[j] / (xi[j] - xi[i]);
            }
        }
        a_trunc.push(a);
    }
    let ratio = zeta / q;
    let c_trunc: Vec<T> = a_trunc.iter().zip(&xi).map(|(&a, &x)| ratio * x * a / (zeta + x)).collect();
    let psi_prime_zeta = beta_psi_derivative(p, zeta)?;
    let gamma = psi_prime_zeta.recip() - w0;
    let delta = gamma - c_trunc.iter().copied().sum::<T>();
    let theta = if p.sigma > T::zero() {
        T::lit(2.0) / (p.sigma * p.sigma)
    } else {
        let mass = p.jump_mass();
        -zeta / p.mu_hat + (q + mass) / (p.mu_hat * p.mu_hat)
    };
    let epsilon = theta.is_finite().then(|| theta - ratio * a_trunc.iter().zip(&xi).map(|(&a, &x)| a * x).sum::<T>());
    Ok(TruncatedMero {
        params: *p,
        q,
        m,
        zeta,
        xi,
        eta,
        a_trunc,
        c_trunc,
        psi_prime_zeta,
        gamma,
        delta,
        theta,
        epsilon,
        w0,
    })
}

impl<T: Real> TruncatedMero<T> {
    fn xi_next(&self) -> T {
        self.xi[self.m]
    }

    /// Bounds on `W_zeta(x)`.
    pub fn w_tilted_bounds(&self, x: T) -> (T, T) {
        let mut upper = self.psi_prime_zeta.recip();
        for (&c, &xi) in self.c_trunc.iter().zip(&self.xi) {
            upper -= c * (-(self.zeta + xi) * x).exp();
        }
        let lower = upper - self.delta * ((-self.zeta * x).exp() + (-(self.zeta + self.xi_next()) * x).exp());
        (lower, upper)
    }

    /// `(lower, upper)` bounds on `W^{(q)}(x)`, `x >= 0`.
    pub fn w_bounds(&self, x: T) -> (T, T) {
        let tilt = (self.zeta * x).exp();
        let mut upper = tilt * self.psi_prime_zeta.recip();
        for (&c, &xi) in self.c_trunc.iter().zip(&self.xi) {
            upper -= c * (-xi * x).exp();
        }
        (upper - self.bound_gap(x), upper)
    }

    /// `upper - lower = delta_m (1 + e^{-xi_{m+1} x})`.
    pub fn bound_gap(&self, x: T) -> T {
        self.delta * (T::one() + (-self.xi_next() * x).exp())
    }

    /// `(lower, upper)` bounds on `Z^{(q)}(x)`.
    pub fn z_bounds(&self, x: T) -> (T, T) {
        if x <= T::zero() {
            return (T::one(), T::one());
        }
        let mut integral = (self.zeta * x).exp_m1() / (self.zeta * self.psi_prime_zeta);
        for (&c, &xi) in self.c_trunc.iter().zip(&self.xi) {
            integral += c * (-xi * x).exp_m1() / xi;
        }
        let upper = T::one() + self.q * integral;
        (upper - self.z_gap(x), upper)
    }

    /// `q delta_m [x + (1 - e^{-xi_{m+1} x}) / xi_{m+1}]`.
    pub fn z_gap(&self, x: T) -> T {
        let xn = self.xi_next();
        self.q * self.delta * (x - (-xn * x).exp_m1() / xn)
    }

    /// `max_{k >= m+1} xi_k e^{-xi_k x}` bounded using only `xi_{m+1}`:
    /// `1/(e x)` when `xi_{m+1} <= 1/x`, else `xi_{m+1} e^{-xi_{m+1} x}`.
    pub fn tail_peak(&self, x: T) -> T {
        let xn = self.xi_next();
        if xn * x <= T::one() {
            (T::E() * x).recip()
        } else {
            xn * (-xn * x).exp()
        }
    }

    /// `(lower, upper)` bounds on `W^{(q)'}(x)` for `x > 0`.
    pub fn w_prime_bounds(&self, x: T) -> Result<(T, T)> {
        if !(x > T::zero()) {
            return Err(Error::DomainError(format!("derivative bounds need x > 0; got {x}")));
        }
        let mut lower = self.zeta * (self.zeta * x).exp() / self.psi_prime_zeta;
        let mut head_peak = T::zero();
        for (&c, &xi) in self.c_trunc.iter().zip(&self.xi) {
            let v = xi * (-xi * x).exp();
            lower += c * v;
            head_peak = head_peak.max(v);
        }
        let mut upper = lower + (head_peak + self.tail_peak(x)) * self.delta;
        if let Some(eps) = self.epsilon {
            upper = upper.min(lower + head_peak * self.delta + (-self.xi_next() * x).exp() * eps);
        }
        Ok((lower, upper))
    }

    /// `|zeta/q - theta / sum_{i<=m} xi_i A^{(m)}_i|`.
    pub fn zeta_theta_gap(&self) -> T {
        let s: T = self.a_trunc.iter().zip(&self.xi).map(|(&a, &x)| a * x).sum();
        (self.zeta / self.q - self.theta / s).abs()
    }

    /// Interlacing `xi_1 < eta_1 < xi_2 < ... < eta_m < xi_{m+1}`.
    pub fn is_interlaced(&self) -> bool {
        let mut prev = T::zero();
        for k in 0..self.m {
            if !(prev < self.xi[k] && self.xi[k] < self.eta[k]) {
                return false;
            }
            prev = self.eta[k];
        }
        prev < self.xi[self.m]
    }
}

/// Free-function form of [`TruncatedMero::w_bounds`].
pub fn w_bounds<T: Real>(tm: &TruncatedMero<T>, x: T) -> (T, T) {
    tm.w_bounds(x)
}

/// Free-function form of [`TruncatedMero::z_bounds`].
pub fn z_bounds<T: Real>(tm: &TruncatedMero<T>, x: T) -> (T, T) {
    tm.z_bounds(x)
}

/// Free-function form of [`TruncatedMero::w_prime_bounds`].
pub fn w_prime_bounds<T: Real>(tm: &TruncatedMero<T>, x: T) -> Result<(T, T)> {
    tm.w_prime_bounds(x)
}

/// Bounds on a grid for one value of `beta` in the CGMY study.
#[derive(Debug, Clone, PartialEq)]
pub struct CgmyCurve<T> {
    pub beta: T,
    pub params: BetaFamilyParams<T>,
    pub delta: T,
    pub lower: Vec<T>,
    pub upper: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgmyStudy<T> {
    pub grid: Vec<T>,
    pub curves: Vec<CgmyCurve<T>>,
    /// Sup-norm difference between upper-bound curves of successive betas.
    pub successive_sup_diffs: Vec<T>,
}

/// Scale-function bounds along `beta -> 0` with `c = c~ beta^lam`,
/// `alpha = alpha~ / beta`.
pub fn cgmy_limit_study<T: Real>(
    base: &BetaFamilyParams<T>,
    tilde_alpha: T,
    tilde_c: T,
    betas: &[T],
    q: T,
    m: usize,
    grid: &[T],
) -> Result<CgmyStudy<T>> {
    if betas.iter().any(|&b| !(b > T::zero())) || betas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::DomainError("betas must be positive and strictly decreasing".into()));
    }
    let mut curves = Vec::with_capacity(betas.len());
    for &beta in betas {
        let params = base.cgmy_rescaled(tilde_alpha, tilde_c, beta)?;
        let tm = truncated_coefficients(&params, q, m)?;
        let (lower, upper) = grid.iter().map(|&x| tm.w_bounds(x)).unzip();
        curves.push(CgmyCurve { beta, params, delta: tm.delta, lower, upper });
    }
    let successive_sup_diffs = curves
        .windows(2)
        .map(|w| w[0].upper.iter().zip(&w[1].upper).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max))
        .collect();
    Ok(CgmyStudy { grid: grid.to_vec(), curves, successive_sup_diffs })
}

/// CGMY Lévy density `c~ e^{alpha~ x} / |x|^lam` at `x < 0`.
pub fn cgmy_levy_density<T: Real>(tilde_c: T, tilde_alpha: T, lam: T, x: T) -> T {
    if !(x < T::zero()) {
        return T::zero();
    }
    tilde_c * (tilde_alpha * x).exp() / (-x).powf(lam)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_basics() {
        let p = BetaFamilyParams::<f64>::reference_example();
        assert_eq!(beta_psi(&p, 0.0).unwrap(), 0.0);
        let bm = BetaFamilyParams::<f64>::new(0.1, 0.2, 3.0, 1.0, 0.0, 1.5).unwrap();
        assert!((beta_psi(&bm, 2.0).unwrap() - (0.2 + 0.02 * 4.0)).abs() < 1e-15);
        assert!(matches!(beta_psi(&p, -3.0), Err(Error::PoleEvaluation { .. })));
        assert_eq!(beta_poles(&p, 1), 3.0);
        assert_eq!(beta_poles(&p, 3), 5.0);
        let half = BetaFamilyParams::<f64>::new(0.1, 0.2, 3.0, 0.5, 0.1, 1.5).unwrap();
        assert_eq!(beta_poles(&half, 1), 1.5);
    }

    #[test]
    fn derivative_matches_difference() {
        let p = BetaFamilyParams::<f64>::reference_example();
        for s in [-2.5, -0.5, 0.3, 1.7, -3.4] {
            let h = 1e-6;
            let fd = (beta_psi(&p, s + h).unwrap() - beta_psi(&p, s - h).unwrap()) / (2.0 * h);
            let d = beta_psi_derivative(&p, s).unwrap();
            assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "s={s}: {fd} vs {d}");
        }
    }

    #[test]
    fn unsupported_regimes() {
        let p = BetaFamilyParams::<f64>::new(0.1, 0.0, 3.0, 1.0, 0.1, 2.5).unwrap();
        assert!(matches!(truncated_coefficients(&p, 0.03, 5), Err(Error::UnsupportedRegime(_))));
        assert!(BetaFamilyParams::<f64>::new(0.1, 0.2, 3.0, 1.0, 0.1, 1.0).is_err());
        assert!(BetaFamilyParams::<f64>::new(0.1, 0.2, 3.0, 1.0, 0.1, 3.0).is_err());
    }

    #[test]
    fn tail_peak_is_continuous_at_switch() {
        let tm = truncated_coefficients(&BetaFamilyParams::<f64>::reference_example(), 0.03, 10).unwrap();
        let x = 1.0 / tm.xi[10];
        let left = (std::f64::consts::E * x).recip();
        let right = tm.xi[10] * (-tm.xi[10] * x).exp();
        assert!((left - right).abs() < 1e-14 * left);
        assert!((tm.tail_peak(x * (1.0 - 1e-9)) - tm.tail_peak(x * (1.0 + 1e-9))).abs() < 1e-6 * left);
    }
}
