//! Two-sided exit identities and the joint law of overshoot and undershoot
//! at the first down-crossing of zero, for hyperexponential jumps.

use crate::error::{Error, Result};
use crate::levy_model::{HyperExponential, SnLevyModel};
use crate::scalar::Real;
use crate::scale::ScaleCoefficients;

/// Relative threshold on `|eta_j - K|` below which an exponent is treated as
/// sitting on a pole.
const POLE_GUARD: f64 = 1e-10;

/// Overshoot window `A = (-a_hi, -a_lo)` and undershoot window
/// `B = (b_lo, b_hi)`. Infinite endpoints are `T::infinity()`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalPair<T> {
    pub a_lo: T,
    pub a_hi: T,
    pub b_lo: T,
    pub b_hi: T,
}

impl<T: Real> IntervalPair<T> {
    pub fn new(a_lo: T, a_hi: T, b_lo: T, b_hi: T) -> Result<Self> {
        let ok = |lo: T, hi: T| lo >= T::zero() && lo <= hi && !lo.is_nan() && !hi.is_nan();
        if !ok(a_lo, a_hi) || !ok(b_lo, b_hi) {
            return Err(Error::DomainError(format!(
                "windows need 0 <= lower <= upper; got a = [{a_lo}, {a_hi}], b = [{b_lo}, {b_hi}]"
            )));
        }
        Ok(Self { a_lo, a_hi, b_lo, b_hi })
    }

    /// `A = (-inf, 0)`, `B = (0, inf)`: every down-crossing by a jump.
    pub fn everything() -> Self {
        Self { a_lo: T::zero(), a_hi: T::infinity(), b_lo: T::zero(), b_hi: T::infinity() }
    }
}

/// `e^{-c lo} - e^{-c hi}` for `lo <= hi`, with `e^{-c inf} = 0` when `c > 0`.
fn exp_window<T: Real>(c: T, lo: T, hi: T) -> T {
    exp_window_shifted(T::zero(), c, lo, hi)
}

/// `e^{base - c lo} - e^{base - c hi}` for `lo <= hi`, evaluated without
/// forming `e^{base}` and `e^{-c lo}` separately.
fn exp_window_shifted<T: Real>(base: T, c: T, lo: T, hi: T) -> T {
    if lo == hi {
        return T::zero();
    }
    if hi.is_infinite() {
        if lo.is_infinite() {
            return T::zero();
        }
        if c > T::zero() {
            return (base - c * lo).exp();
        }
        return if c == T::zero() { T::zero() } else { T::neg_infinity() };
    }
    exp_diff(base - c * lo, base - c * hi)
}

/// `e^a - e^b` with cancellation-free evaluation.
fn exp_diff<T: Real>(a: T, b: T) -> T {
    if a >= b {
        -a.exp() * (b - a).exp_m1()
    } else {
        b.exp() * (a - b).exp_m1()
    }
}

/// `W(x) / W(b)`: discounted probability of reaching `b` before going below
/// zero, starting from `x`.
pub fn up_exit<T: Real>(sc: &ScaleCoefficients<T>, x: T, b: T) -> Result<T> {
    check_levels(x, b)?;
    let wx = sc.eval_w_scaled(x);
    let wb = sc.eval_w_scaled(b);
    if wx.mantissa == T::zero() {
        return Ok(T::zero());
    }
    Ok(wx.ratio(&wb))
}

/// `Z(x) - Z(b) W(x) / W(b)`: discounted probability of going below zero
/// before reaching `b`.
pub fn down_exit<T: Real>(sc: &ScaleCoefficients<T>, x: T, b: T) -> Result<T> {
    let up = up_exit(sc, x, b)?;
    // Z(x) - Z(b) W(x)/W(b) regrouped so that the exponential growth cancels
    Ok(sc.z_minus_scaled_w(x) - up * sc.z_minus_scaled_w(b))
}

/// `lim_{b -> inf}` of [`down_exit`]: `Z(x) - (q/zeta) W(x)`.
pub fn down_exit_one_sided<T: Real>(sc: &ScaleCoefficients<T>, x: T) -> T {
    sc.z_minus_scaled_w(x)
}

fn check_levels<T: Real>(x: T, b: T) -> Result<()> {
    if !(b > T::zero()) || !(x >= T::zero()) || x > b {
        return Err(Error::DomainError(format!("need 0 <= x <= b and b > 0; got x = {x}, b = {b}")));
    }
    Ok(())
}

fn pole_guard<T: Real>(eta: T, k: T) -> Result<T> {
    let d = eta - k;
    if d.abs() < T::lit(POLE_GUARD) * eta.abs().max(k.abs()) {
        return Err(Error::ExponentAtPole { exponent: k.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(d)
}

/// `rho(K; A, B) = sum_j lambda p_j / (eta_j - K) (e^{-eta_j a_lo} - e^{-eta_j a_hi})
/// (e^{-(eta_j - K) b_lo} - e^{-(eta_j - K) b_hi})`.
pub fn rho<T: Real>(k: T, pair: &IntervalPair<T>, jumps: &HyperExponential<T>, lambda: T) -> Result<T> {
    let mut total = T::zero();
    for (&p, &eta) in jumps.weights().iter().zip(jumps.rates()) {
        let d = pole_guard(eta, k)?;
        let a_part = exp_window(eta, pair.a_lo, pair.a_hi);
        if a_part == T::zero() {
            continue;
        }
        total += lambda * p / d * a_part * exp_window(d, pair.b_lo, pair.b_hi);
    }
    Ok(total)
}

/// Closed-form overshoot/undershoot identities for one `(model, q)`.
#[derive(Debug, Clone)]
pub struct Fluctuation<'a, T> {
    sc: &'a ScaleCoefficients<T>,
    jumps: &'a HyperExponential<T>,
    lambda: T,
    /// Real distinct-root coefficients `(xi_i, C_i)`.
    c: Vec<(T, T)>,
}

impl<'a, T: Real> Fluctuation<'a, T> {
    /// Requires hyperexponential jumps and simple real roots.
    pub fn new(model: &'a SnLevyModel<T>, sc: &'a ScaleCoefficients<T>) -> Result<Self> {
        let jumps = model.jumps().as_hyperexponential().ok_or_else(|| {
            Error::UnsupportedRegime("overshoot/undershoot identities need hyperexponential jumps".into())
        })?;
        let c =
            sc.c.as_ref()
                .ok_or_else(|| Error::UnsupportedRegime("overshoot/undershoot identities need simple roots".into()))?
                .iter()
                .map(|&(xi, ci)| (xi.re, ci.re))
                .collect();
        Ok(Self { sc, jumps, lambda: model.lambda(), c })
    }

    /// `kappa_j(x; B)` for jump class `j`.
    pub fn kappa(&self, j: usize, x: T, b_lo: T, b_hi: T) -> Result<T> {
        let eta = self.jumps.rates()[j];
        let zeta = self.sc.zeta;
        let above = exp_window_shifted(zeta * x, eta + zeta, b_lo.max(x), b_hi.max(x));
        let mut value = self.sc.leading * above / (eta + zeta);
        let (lo_min, hi_min) = (b_lo.min(x), b_hi.min(x));
        for &(xi, ci) in &self.c {
            let d = pole_guard(eta, xi)?;
            let below = exp_window_shifted(-xi * x, d, lo_min, hi_min) / d;
            let tail = exp_window_shifted(-xi * x, eta + zeta, b_lo, b_hi) / (eta + zeta);
            value += ci * (below - tail);
        }
        Ok(value)
    }

    /// `h_q(x; A, B)`: discounted probability that the first down-crossing
    /// happens by a jump with undershoot in `B` and overshoot in `-A`.
    pub fn joint(&self, x: T, pair: &IntervalPair<T>) -> Result<T> {
        if !(x > T::zero()) {
            return Err(Error::DomainError(format!("starting level x = {x} must be positive")));
        }
        let mut total = T::zero();
        for (j, (&p, &eta)) in self.jumps.weights().iter().zip(self.jumps.rates()).enumerate() {
            let a_part = exp_window(eta, pair.a_lo, pair.a_hi);
            if a_part == T::zero() {
                continue;
            }
            total += self.lambda * p * a_part * self.kappa(j, x, pair.b_lo, pair.b_hi)?;
        }
        Ok(total)
    }

    /// Density in `a > 0` of the overshoot `-X_{tau_0^-}`, on the event of
    /// a down-crossing by a jump, discounted.
    pub fn overshoot_density(&self, x: T, a: T) -> Result<T> {
        if !(x > T::zero()) || !(a > T::zero()) {
            return Err(Error::DomainError(format!("need x > 0 and a > 0; got x = {x}, a = {a}")));
        }
        let mut total = T::zero();
        for (j, (&p, &eta)) in self.jumps.weights().iter().zip(self.jumps.rates()).enumerate() {
            total += self.lambda * p * eta * (-eta * a).exp() * self.kappa(j, x, T::zero(), T::infinity())?;
        }
        Ok(total)
    }

    /// Density in `b > 0` of the undershoot `X_{tau_0^- -}`, discounted.
    pub fn undershoot_density(&self, x: T, b: T) -> Result<T> {
        self.undershoot_density_in(x, b, T::zero(), T::infinity())
    }

    /// Undershoot density restricted to overshoots in `(a_lo, a_hi)`.
    pub fn undershoot_density_in(&self, x: T, b: T, a_lo: T, a_hi: T) -> Result<T> {
        if !(x > T::zero()) || !(b > T::zero()) {
            return Err(Error::DomainError(format!("need x > 0 and b > 0; got x = {x}, b = {b}")));
        }
        let zeta = self.sc.zeta;
        let mut total = T::zero();
        for (&p, &eta) in self.jumps.weights().iter().zip(self.jumps.rates()) {
            let a_part = exp_window(eta, a_lo, a_hi);
            if a_part == T::zero() {
                continue;
            }
            let inner = if b < x {
                let mut s = T::zero();
                for &(xi, ci) in &self.c {
                    s += ci * exp_diff(-xi * (x - b) - eta * b, -xi * x - (eta + zeta) * b);
                }
                s
            } else {
                let mut s = self.sc.leading * (zeta * x - (eta + zeta) * b).exp();
                for &(xi, ci) in &self.c {
                    s -= ci * (-(xi * x + (eta + zeta) * b)).exp();
                }
                s
            };
            total += self.lambda * p * a_part * inner;
        }
        Ok(total)
    }

    /// Left and right limits of the undershoot density at `b = x`.
    pub fn undershoot_limits_at_start(&self, x: T) -> Result<(T, T)> {
        let zeta = self.sc.zeta;
        let (mut left, mut right) = (T::zero(), T::zero());
        for (&p, &eta) in self.jumps.weights().iter().zip(self.jumps.rates()) {
            let mut l = T::zero();
            let mut r = self.sc.leading;
            for &(xi, ci) in &self.c {
                let e = (-(xi + zeta) * x).exp();
                l += ci * (T::one() - e);
                r -= ci * e;
            }
            let scale = self.lambda * p * (-eta * x).exp();
            left += scale * l;
            right += scale * r;
        }
        Ok((left, right))
    }

    /// `|1/(psi'(zeta)(eta_j + zeta)) - sum_i C_i/(eta_j - xi_i)|` for each
    /// jump class; small values are consistent with the conjectured identity.
    pub fn conjecture_residuals(&self) -> Vec<T> {
        let zeta = self.sc.zeta;
        self.jumps
            .rates()
            .iter()
            .map(|&eta| {
                let s: T = self.c.iter().map(|&(xi, ci)| ci / (eta - xi)).sum();
                (self.sc.leading / (eta + zeta) - s).abs()
            })
            .collect()
    }
}
