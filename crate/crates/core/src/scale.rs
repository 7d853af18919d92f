//! Closed-form scale functions `W^{(q)}`, `W^{(q)'}`, `W_{zeta}` and `Z^{(q)}`.
//!
//! The scale function is stored as a sum of polynomial-times-exponential
//! terms, so derivatives, integrals and Laplace transforms are exact
//! coefficient manipulations:
//!
//! `W_zeta(x) = w0 + sum_t weight_t [1 - e^{-(zeta+xi_t) x} sum_{j<k_t} ((zeta+xi_t) x)^j / j!]`
//!
//! with `W(x) = e^{zeta x} W_zeta(x)`.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::levy_model::{Regime, SnLevyModel};
use crate::roots::{decompose, RootDecomposition};
use crate::scalar::{re, Cplx, Real};
use crate::wiener_hopf::{partial_fraction_coefficients, WhCoefficients};

/// Exponent above which `e^{zeta x}` is kept in log form.
const LOG_SPACE_THRESHOLD: f64 = 700.0;

/// One term of the exponential-sum representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleTerm<T> {
    pub xi: Cplx<T>,
    pub k: usize,
    /// `(zeta/q) A^{(k)} (xi / (zeta + xi))^k`.
    pub weight: Cplx<T>,
}

/// A positive number stored as `mantissa * e^{log_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled<T> {
    pub log_scale: T,
    pub mantissa: T,
}

impl<T: Real> Scaled<T> {
    pub fn value(&self) -> T {
        self.mantissa * self.log_scale.exp()
    }

    /// `self / other`, computed without forming either value.
    pub fn ratio(&self, other: &Self) -> T {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaleCoefficients<T> {
    pub q: T,
    pub zeta: T,
    /// `1 / psi'(zeta)`.
    pub leading: T,
    pub terms: Vec<ScaleTerm<T>>,
    /// Distinct-root coefficients `C_i`; `None` when some root is repeated.
    pub c: Option<Vec<(Cplx<T>, Cplx<T>)>>,
    /// `W(0)`.
    pub w0: T,
    /// `W'(0+)`.
    pub wp0: T,
    /// `-zeta W(0) + W'(0+)`.
    pub theta: T,
    pub regime: Regime,
}

/// Relative errors of the boundary identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityReport<T> {
    /// `|zeta/q - theta/varrho| / (zeta/q)`.
    pub zeta_theta_rel_err: T,
    /// Relative residual of `sum C = 1/psi'(zeta) - W(0)`.
    pub coefficient_sum_rel_err: T,
}

/// Full pipeline: roots, partial fractions, scale coefficients.
pub fn build_scale<T: Real>(model: &SnLevyModel<T>, q: T) -> Result<ScaleCoefficients<T>> {
    let decomp = decompose(model, q)?;
    let wh = partial_fraction_coefficients(&decomp)?;
    ScaleCoefficients::from_parts(model, &decomp, &wh)
}

/// Like [`build_scale`] but also returns the intermediate objects.
pub fn build_all<T: Real>(
    model: &SnLevyModel<T>,
    q: T,
) -> Result<(RootDecomposition<T>, WhCoefficients<T>, ScaleCoefficients<T>)> {
    let decomp = decompose(model, q)?;
    let wh = partial_fraction_coefficients(&decomp)?;
    let sc = ScaleCoefficients::from_parts(model, &decomp, &wh)?;
    Ok((decomp, wh, sc))
}

/// `P(k, u) = 1 - e^{-u} sum_{j<k} u^j/j!`, accurate for small `|u|`.
fn lower_reg<T: Real>(k: usize, u: Cplx<T>) -> Cplx<T> {
    if u.norm() < T::lit(0.5) {
        // e^{-u} sum_{j>=k} u^j / j!
        let mut term = Cplx::<T>::one();
        for j in 1..=k {
            term = term * u / T::from_usize_lossy(j);
        }
        let mut sum = Cplx::<T>::zero();
        let mut j = k;
        while term.norm() > T::epsilon() * sum.norm() * T::lit(1e-3) || sum.is_zero() {
            sum += term;
            j += 1;
            term = term * u / T::from_usize_lossy(j);
            if j > k + 60 || term.is_zero() {
                break;
            }
        }
        sum * (-u).exp()
    } else {
        Cplx::<T>::one() - upper_reg(k, u)
    }
}

/// `Q(k, u) = e^{-u} sum_{j<k} u^j/j!` by Horner evaluation.
fn upper_reg<T: Real>(k: usize, u: Cplx<T>) -> Cplx<T> {
    let mut acc = Cplx::<T>::zero();
    for j in (0..k).rev() {
        // acc = 1 + u/(j+1) * acc
        acc = Cplx::<T>::one() + u * acc / T::from_usize_lossy(j + 1);
    }
    acc * (-u).exp()
}

/// `u^{n} / n!`.
fn power_over_factorial<T: Real>(u: Cplx<T>, n: usize) -> Cplx<T> {
    let mut v = Cplx::<T>::one();
    for j in 1..=n {
        v = v * u / T::from_usize_lossy(j);
    }
    v
}

impl<T: Real> ScaleCoefficients<T> {
    /// Assembles coefficients from the root decomposition and the partial
    /// fractions of the same `(model, q)`.
    pub fn from_parts(model: &SnLevyModel<T>, decomp: &RootDecomposition<T>, wh: &WhCoefficients<T>) -> Result<Self> {
        let q = decomp.q;
        let zeta = decomp.zeta;
        let psi_prime = model.laplace_exponent_derivative(zeta)?;
        if !(psi_prime > T::zero()) {
            return Err(Error::DomainError(format!("psi'(zeta) = {psi_prime} is not positive")));
        }
        let ratio = zeta / q;
        let terms: Vec<ScaleTerm<T>> = wh
            .terms
            .iter()
            .map(|t| ScaleTerm { xi: t.xi, k: t.k, weight: t.a * ratio * (t.xi / (t.xi + zeta)).powi(t.k as i32) })
            .collect();
        let c = if decomp.all_simple() { Some(terms.iter().map(|t| (t.xi, t.weight)).collect()) } else { None };
        let (w0, wp0) = match decomp.regime {
            Regime::Diffusive => (T::zero(), T::lit(2.0) / model.sigma().powi(2)),
            Regime::CompoundPoisson => {
                let mu = model.mu();
                (mu.recip(), (q + model.jump_intensity()) / (mu * mu))
            }
        };
        Ok(Self {
            q,
            zeta,
            leading: psi_prime.recip(),
            terms,
            c,
            w0,
            wp0,
            theta: wp0 - zeta * w0,
            regime: decomp.regime,
        })
    }

    fn tilted_complex(&self, x: T) -> Cplx<T> {
        let mut total = re(self.w0);
        for t in &self.terms {
            let u = (t.xi + self.zeta) * x;
            total += t.weight * lower_reg(t.k, u);
        }
        total
    }

    /// `W_zeta(x) = e^{-zeta x} W(x)`; zero for `x < 0`.
    pub fn eval_w_tilted(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        self.tilted_complex(x).re
    }

    /// Imaginary residue of `W_zeta(x)`, which vanishes when conjugate
    /// roots are paired correctly.
    pub fn tilted_imaginary_residue(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        self.tilted_complex(x).im
    }

    /// `W(x)` as `W_zeta(x) * e^{zeta x}` in log-scaled form.
    pub fn eval_w_scaled(&self, x: T) -> Scaled<T> {
        if x < T::zero() {
            return Scaled { log_scale: T::zero(), mantissa: T::zero() };
        }
        Scaled { log_scale: self.zeta * x, mantissa: self.eval_w_tilted(x) }
    }

    /// `W^{(q)}(x)`; zero on the negative half-line.
    pub fn eval_w(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        let s = self.eval_w_scaled(x);
        if s.log_scale > T::lit(LOG_SPACE_THRESHOLD) {
            // combine in log space so that a small mantissa can offset the growth
            (s.log_scale + s.mantissa.ln()).exp()
        } else {
            s.value()
        }
    }

    /// Derivative of `W_zeta` for `x > 0`.
    pub fn eval_w_tilted_prime(&self, x: T) -> T {
        let mut total = Cplx::<T>::zero();
        for t in &self.terms {
            let c = t.xi + self.zeta;
            let u = c * x;
            total += t.weight * c * power_over_factorial(u, t.k - 1) * (-u).exp();
        }
        total.re
    }

    /// `W^{(q)'}(x)` for `x > 0`; the right limit at zero is [`Self::wp0`].
    pub fn eval_w_prime(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        let tilt = (self.zeta * x).exp();
        tilt * (self.zeta * self.eval_w_tilted(x) + self.eval_w_tilted_prime(x))
    }

    /// `W'(0+)` obtained as the limit of the closed-form sum rather than from
    /// the model parameters.
    pub fn w_prime_at_zero_from_terms(&self) -> T {
        let tail: Cplx<T> = self.terms.iter().filter(|t| t.k == 1).map(|t| t.weight * (t.xi + self.zeta)).sum();
        self.zeta * self.w0 + tail.re
    }

    /// `int_0^x W(y) dy` in closed form.
    fn integral_w(&self, x: T) -> T {
        let zeta = self.zeta;
        let growth = (zeta * x).exp_m1() / zeta;
        let mut total = re(self.w0 * growth);
        for t in &self.terms {
            let c = t.xi + zeta;
            let mut inner = Cplx::<T>::zero();
            let mut ratio_pow = Cplx::<T>::one();
            for j in 0..t.k {
                inner += ratio_pow / t.xi * lower_reg(j + 1, t.xi * x);
                ratio_pow = ratio_pow * c / t.xi;
            }
            total += t.weight * (re(growth) - inner);
        }
        total.re
    }

    /// `Z^{(q)}(x) = 1 + q int_0^x W(y) dy`; one for `x <= 0`.
    pub fn eval_z(&self, x: T) -> T {
        if x <= T::zero() {
            return T::one();
        }
        T::one() + self.q * self.integral_w(x)
    }

    /// `Z(x) - (q/zeta) W(x)`, the discounted probability of ever going
    /// below zero. The exponentially growing parts of `Z` and `W` cancel
    /// exactly, so this is evaluated term by term without forming them.
    pub fn z_minus_scaled_w(&self, x: T) -> T {
        let (q, zeta) = (self.q, self.zeta);
        if x < T::zero() {
            return T::one();
        }
        let mut total = re(T::one() - q / zeta * self.leading);
        for t in &self.terms {
            let c = t.xi + zeta;
            // (q/zeta) e^{zeta x} Q(k, (zeta+xi) x) = (q/zeta) e^{-xi x} sum_{j<k} ((zeta+xi)x)^j/j!
            let mut poly_term = Cplx::<T>::zero();
            for j in (0..t.k).rev() {
                poly_term = Cplx::<T>::one() + c * x * poly_term / T::from_usize_lossy(j + 1);
            }
            let mut integral = Cplx::<T>::zero();
            let mut ratio_pow = Cplx::<T>::one();
            for j in 0..t.k {
                integral += ratio_pow / t.xi * lower_reg(j + 1, t.xi * x);
                ratio_pow = ratio_pow * c / t.xi;
            }
            total += t.weight * (poly_term * (-t.xi * x).exp() * (q / zeta) - integral * q);
        }
        total.re
    }

    /// Laplace transform of the representation at `Re(s) > zeta`.
    pub fn laplace_transform(&self, s: Cplx<T>) -> Cplx<T> {
        let pole = (s - self.zeta).inv();
        let mut total = pole * self.w0;
        for t in &self.terms {
            let c = t.xi + self.zeta;
            let mut tail = Cplx::<T>::zero();
            let mut c_pow = Cplx::<T>::one();
            let base = (s + t.xi).inv();
            let mut base_pow = base;
            for _ in 0..t.k {
                tail += c_pow * base_pow;
                c_pow *= c;
                base_pow *= base;
            }
            total += t.weight * (pole - tail);
        }
        total
    }

    /// Weights of `W_zeta'` as a mixture of `e^{-(zeta + xi_i) x}`
    /// (simple roots only).
    pub fn tilted_derivative_mixture_weights(&self) -> Option<Vec<Cplx<T>>> {
        self.c.as_ref().map(|c| c.iter().map(|&(xi, ci)| ci * (xi + self.zeta)).collect())
    }

    /// `sum_{i,k} weight`, which equals `1/psi'(zeta) - W(0)`.
    pub fn weight_sum(&self) -> Cplx<T> {
        self.terms.iter().map(|t| t.weight).sum()
    }
}

/// Checks `zeta/q = theta/varrho` and the coefficient-sum identity.
pub fn boundary_identities<T: Real>(sc: &ScaleCoefficients<T>, wh: &WhCoefficients<T>) -> IdentityReport<T> {
    let lhs = sc.zeta / sc.q;
    let rhs = sc.theta / wh.varrho;
    let target = sc.leading - sc.w0;
    let sum = sc.weight_sum().re;
    let denom = if target.abs() > T::zero() { target.abs() } else { T::one() };
    IdentityReport {
        zeta_theta_rel_err: ((lhs - rhs) / lhs).abs(),
        coefficient_sum_rel_err: (sum - target).abs() / denom,
    }
}
