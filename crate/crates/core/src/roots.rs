//! Roots of the Cramér–Lundberg equation `psi(s) = q`: the positive root
//! `zeta_q` and the negative roots `-xi_{i,q}`, together with the poles of
//! `psi` they interlace with.

use crate::error::{Error, Result};
use crate::levy_model::{HyperExponential, JumpDistribution, PhaseType, Regime, SnLevyModel};
use crate::linalg::{self, Matrix};
use crate::poly;
use crate::scalar::{re, Cplx, Real};

/// Required accuracy of the root bisections. They run to relative machine
/// precision, which is tighter.
pub const BISECTION_TOL: f64 = 1e-10;
/// Imaginary parts below `SNAP_TOL (1 + |re|)` are treated as zero.
pub const SNAP_TOL: f64 = 1e-8;
/// Two roots closer than `CLUSTER_TOL (1 + |r|)` count as repeated.
pub const CLUSTER_TOL: f64 = 1e-8;

const MAX_DOUBLINGS: usize = 2000;
const NEWTON_STEPS: usize = 3;

/// A negative root `-xi` of `psi(s) = q`, stored as `xi` (positive real part).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeRoot<T> {
    pub xi: Cplx<T>,
    pub multiplicity: usize,
}

impl<T: Real> NegativeRoot<T> {
    pub fn simple(xi: Cplx<T>) -> Self {
        Self { xi, multiplicity: 1 }
    }
}

/// Output of the root finders: `zeta_q`, negative roots and poles.
#[derive(Debug, Clone, PartialEq)]
pub struct RootDecomposition<T> {
    pub q: T,
    pub zeta: T,
    pub neg_roots: Vec<NegativeRoot<T>>,
    /// Pole magnitudes `eta_j` (poles of `psi` sit at `-eta_j`).
    pub poles: Vec<Cplx<T>>,
    pub regime: Regime,
    pub warnings: Vec<String>,
}

impl<T: Real> RootDecomposition<T> {
    /// Assembles a decomposition from caller-supplied roots (with
    /// multiplicities) and poles, checking the root-count rule.
    pub fn from_parts(
        q: T,
        zeta: T,
        neg_roots: Vec<NegativeRoot<T>>,
        poles: Vec<Cplx<T>>,
        regime: Regime,
    ) -> Result<Self> {
        if !(q > T::zero()) {
            return Err(Error::DomainError(format!("q = {q} must be positive")));
        }
        if !(zeta > T::zero()) {
            return Err(Error::DomainError(format!("zeta = {zeta} must be positive")));
        }
        if neg_roots.iter().any(|r| r.multiplicity == 0 || !(r.xi.re > T::zero())) {
            return Err(Error::DomainError("roots need positive real part and multiplicity >= 1".into()));
        }
        let d = Self { q, zeta, neg_roots, poles, regime, warnings: Vec::new() };
        d.check_count()?;
        Ok(d)
    }

    /// Number of negative roots counted with multiplicity.
    pub fn root_count(&self) -> usize {
        self.neg_roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn all_simple(&self) -> bool {
        self.neg_roots.iter().all(|r| r.multiplicity == 1)
    }

    pub fn all_real(&self) -> bool {
        self.neg_roots.iter().all(|r| r.xi.im == T::zero()) && self.poles.iter().all(|p| p.im == T::zero())
    }

    fn check_count(&self) -> Result<()> {
        let expected = match self.regime {
            Regime::Diffusive => self.poles.len() + 1,
            Regime::CompoundPoisson => self.poles.len(),
        };
        if self.root_count() != expected {
            return Err(Error::BracketingFailure(format!(
                "found {} negative roots for {} poles; expected {}",
                self.root_count(),
                self.poles.len(),
                expected
            )));
        }
        Ok(())
    }

    /// Strict interlacing `xi_1 < eta_1 < xi_2 < ...` for real roots and poles.
    pub fn is_interlaced(&self) -> bool {
        if !self.all_real() || !self.all_simple() {
            return false;
        }
        let mut seq = Vec::with_capacity(self.neg_roots.len() + self.poles.len());
        for (i, r) in self.neg_roots.iter().enumerate() {
            seq.push(r.xi.re);
            if let Some(p) = self.poles.get(i) {
                seq.push(p.re);
            }
        }
        seq.first().is_some_and(|&x| x > T::zero()) && seq.windows(2).all(|w| w[0] < w[1])
    }
}

/// Bisection on `(lo, hi)` where `f(lo) < 0 < f(hi)` is known. Endpoints are
/// never evaluated, so they may be poles. Runs until the bracket width drops
/// below `tol` relative to the magnitude of the root, or cannot shrink.
pub(crate) fn bisect<T: Real>(mut lo: T, mut hi: T, tol: T, f: impl Fn(T) -> T) -> T {
    let two = T::lit(2.0);
    for _ in 0..4000 {
        let mid = lo + (hi - lo) / two;
        if !(mid > lo && mid < hi) {
            break;
        }
        let v = f(mid);
        if v.is_nan() {
            break;
        }
        if v > T::zero() {
            hi = mid;
        } else if v < T::zero() {
            lo = mid;
        } else {
            return mid;
        }
        if hi - lo <= tol * hi.abs() {
            break;
        }
    }
    lo + (hi - lo) / two
}

fn polish_real<T: Real>(mut x: T, lo: T, hi: T, f: impl Fn(T) -> Result<T>, df: impl Fn(T) -> Result<T>) -> T {
    let mut best = match f(x) {
        Ok(v) => v.abs(),
        Err(_) => return x,
    };
    for _ in 0..NEWTON_STEPS {
        let (Ok(v), Ok(d)) = (f(x), df(x)) else { break };
        if d == T::zero() || !d.is_finite() {
            break;
        }
        let cand = x - v / d;
        if !(cand > lo && cand < hi) {
            break;
        }
        match f(cand) {
            Ok(r) if r.abs() < best => {
                best = r.abs();
                x = cand;
            }
            _ => break,
        }
    }
    x
}

/// The positive root `zeta_q = sup{s >= 0 : psi(s) = q}`.
pub fn find_zeta<T: Real>(model: &SnLevyModel<T>, q: T) -> Result<T> {
    if !(q > T::zero()) {
        return Err(Error::DomainError(format!("q = {q} must be positive")));
    }
    let g = |s: T| model.laplace_exponent(s).map(|v| v - q);
    let mut hi = T::one();
    let mut found = false;
    for _ in 0..MAX_DOUBLINGS {
        let v = g(hi)?;
        if v > T::zero() {
            found = true;
            break;
        }
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            break;
        }
    }
    if !found {
        return Err(Error::BracketingFailure("psi(s) never exceeds q on the positive axis".into()));
    }
    // psi is convex with psi(0) = 0 < q, so the sign change on (0, hi) is unique.
    let root = bisect(T::zero(), hi, T::epsilon(), |s| g(s).unwrap_or_else(|_| T::nan()));
    let root = polish_real(root, T::zero(), hi, g, |s| model.laplace_exponent_derivative(s));
    Ok(root)
}

/// `psi(-s) - q` for hyperexponential jumps, without the pole guard so the
/// bisection can approach poles arbitrarily closely.
fn hyper_negative_side<T: Real>(model: &SnLevyModel<T>, h: &HyperExponential<T>, q: T, s: T) -> T {
    let half = T::lit(0.5);
    let mut v = -model.mu() * s + half * model.sigma() * model.sigma() * s * s - q;
    if model.lambda().is_zero() {
        return v;
    }
    for (&p, &eta) in h.weights().iter().zip(h.rates()) {
        v += model.lambda() * p * s / (eta - s);
    }
    v
}

fn hyper_negative_side_derivative<T: Real>(model: &SnLevyModel<T>, h: &HyperExponential<T>, s: T) -> T {
    let mut v = -model.mu() + model.sigma() * model.sigma() * s;
    if model.lambda().is_zero() {
        return v;
    }
    for (&p, &eta) in h.weights().iter().zip(h.rates()) {
        let d = eta - s;
        v += model.lambda() * p * eta / (d * d);
    }
    v
}

/// Negative roots for hyperexponential jumps by one bisection per
/// interlacing bracket.
pub fn find_negative_roots_hyperexp<T: Real>(model: &SnLevyModel<T>, q: T) -> Result<RootDecomposition<T>> {
    let h = model
        .jumps()
        .as_hyperexponential()
        .ok_or_else(|| Error::InvalidParameter("hyperexponential jumps required".into()))?
        .clone();
    let zeta = find_zeta(model, q)?;
    let f = |s: T| hyper_negative_side(model, &h, q, s);
    let df = |s: T| hyper_negative_side_derivative(model, &h, s);
    let mut brackets: Vec<(T, T)> = Vec::with_capacity(h.len() + 1);
    let mut left = T::zero();
    if model.lambda() > T::zero() {
        for &eta in h.rates() {
            brackets.push((left, eta));
            left = eta;
        }
    }
    if model.regime() == Regime::Diffusive {
        let mut right = if left > T::zero() { left * T::lit(2.0) } else { T::one() };
        let mut ok = false;
        for _ in 0..MAX_DOUBLINGS {
            if f(right) > T::zero() {
                ok = true;
                break;
            }
            right = right * T::lit(2.0);
            if !right.is_finite() {
                break;
            }
        }
        if !ok {
            return Err(Error::BracketingFailure("no sign change beyond the largest pole".into()));
        }
        brackets.push((left, right));
    }
    let mut neg_roots = Vec::with_capacity(brackets.len());
    for (lo, hi) in brackets {
        let x = bisect(lo, hi, T::epsilon(), f);
        let x = polish_real(x, lo, hi, |s| Ok(f(s)), |s| Ok(df(s)));
        neg_roots.push(NegativeRoot::simple(re(x)));
    }
    let poles = if model.lambda() > T::zero() { h.rates().iter().map(|&e| re(e)).collect() } else { Vec::new() };
    let d = RootDecomposition { q, zeta, neg_roots, poles, regime: model.regime(), warnings: Vec::new() };
    d.check_count()?;
    Ok(d)
}

/// Coefficients (ascending) of `P(s) = (mu s + sigma^2 s^2 / 2 - lambda - q) det(sI - T)
/// + lambda alpha adj(sI - T) t`, whose zeros are exactly the solutions of
/// `psi(s) = q` for phase-type jumps.
pub fn cramer_lundberg_polynomial<T: Real>(model: &SnLevyModel<T>, q: T) -> Result<Vec<T>> {
    let ph = match model.jumps() {
        JumpDistribution::PhaseType(ph) => ph.clone(),
        JumpDistribution::HyperExponential(h) => h.to_phase_type()?,
    };
    Ok(cl_polynomial_parts(model, &ph, q).0)
}

/// Returns `(P, det(sI - T))`.
fn cl_polynomial_parts<T: Real>(model: &SnLevyModel<T>, ph: &PhaseType<T>, q: T) -> (Vec<T>, Vec<T>) {
    let m = ph.phases();
    let gen = ph.generator();
    let det = linalg::characteristic_polynomial(gen);
    // alpha adj(sI - T) t = det(sI - T + t alpha) - det(sI - T)
    let mut rank_one = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            rank_one[(i, j)] = gen[(i, j)] - ph.exit_rates()[i] * ph.alpha()[j];
        }
    }
    let det_shift = linalg::characteristic_polynomial(&rank_one);
    let numer: Vec<T> = poly::add(&det_shift, &poly::scale(&det, -T::one()));
    let half = T::lit(0.5);
    let lam = model.lambda();
    let quad = [-lam - q, model.mu(), half * model.sigma() * model.sigma()];
    let p = poly::add(&poly::mul(&quad, &det), &poly::scale(&numer, lam));
    (poly::trim(&p), det)
}

fn polish_complex<T: Real>(model: &SnLevyModel<T>, q: T, mut z: Cplx<T>) -> Cplx<T> {
    let resid = |z: Cplx<T>| model.laplace_exponent_complex(z).map(|v| v - q);
    let Ok(r0) = resid(z) else { return z };
    let mut best = r0.norm();
    for _ in 0..NEWTON_STEPS {
        let (Ok(v), Ok(d)) = (resid(z), model.laplace_exponent_derivative_complex(z)) else { break };
        if d.norm() == T::zero() {
            break;
        }
        let cand = z - v / d;
        match resid(cand) {
            Ok(r) if r.norm() < best => {
                best = r.norm();
                z = cand;
            }
            _ => break,
        }
    }
    z
}

/// Negative roots for general phase-type jumps from the eigenvalues of the
/// companion matrix of the Cramér–Lundberg polynomial.
pub fn find_negative_roots_ph<T: Real>(model: &SnLevyModel<T>, q: T) -> Result<RootDecomposition<T>> {
    if !(q > T::zero()) {
        return Err(Error::DomainError(format!("q = {q} must be positive")));
    }
    let ph = match model.jumps() {
        JumpDistribution::PhaseType(ph) => ph.clone(),
        JumpDistribution::HyperExponential(h) => h.to_phase_type()?,
    };
    let pm = if model.lambda() > T::zero() {
        SnLevyModel::phase_type(model.mu(), model.sigma(), model.lambda(), ph.clone())?
    } else {
        model.clone()
    };
    let zeta = find_zeta(model, q)?;
    let mut warnings = Vec::new();
    let mut poles: Vec<Cplx<T>> =
        if model.lambda() > T::zero() { ph.eigenvalues().iter().map(|&e| -e).collect() } else { Vec::new() };
    let candidates = if model.lambda() > T::zero() {
        let (p, det) = cl_polynomial_parts(model, &ph, q);
        let raw =
            poly::roots(&p).ok_or_else(|| Error::BracketingFailure("companion eigenvalues did not converge".into()))?;
        let det_scale = det.iter().fold(T::zero(), |a, c| a.max(c.abs()));
        let mut kept = Vec::with_capacity(raw.len());
        for r in raw {
            // shared zero of P and det(sI - T): a cancelled pole, not a root
            let dv = poly::eval_complex(&det, r).norm();
            let shared = dv <= T::lit(1e-10) * det_scale * (T::one() + r.norm()).powi(det.len() as i32);
            if shared {
                if let Some(pos) = poles.iter().position(|&p| (p + r).norm() <= T::lit(1e-6) * (T::one() + r.norm())) {
                    poles.remove(pos);
                    warnings.push(format!("representation is not minimal: pole at {} cancels against a root", r.re));
                    continue;
                }
            }
            kept.push(r);
        }
        kept
    } else {
        // pure Brownian motion with drift: sigma^2 s^2 / 2 + mu s - q
        poly::roots(&[-q, model.mu(), T::lit(0.5) * model.sigma() * model.sigma()])
            .ok_or_else(|| Error::BracketingFailure("quadratic roots".into()))?
    };
    let mut neg = Vec::new();
    for r in candidates {
        if r.re >= T::zero() {
            continue;
        }
        let mut z = polish_complex(&pm, q, r);
        if z.im.abs() < T::lit(SNAP_TOL) * (T::one() + z.re.abs()) {
            z.im = T::zero();
        }
        neg.push(-z);
    }
    neg.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    for i in 0..neg.len() {
        for j in (i + 1)..neg.len() {
            if (neg[i] - neg[j]).norm() < T::lit(CLUSTER_TOL) * (T::one() + neg[i].norm()) {
                return Err(Error::RepeatedRootsDetected { location: -neg[i].re.to_f64().unwrap_or(f64::NAN) });
            }
        }
    }
    poles.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal));
    let d = RootDecomposition {
        q,
        zeta,
        neg_roots: neg.into_iter().map(NegativeRoot::simple).collect(),
        poles,
        regime: model.regime(),
        warnings,
    };
    d.check_count()?;
    Ok(d)
}

/// Dispatches to the interlacing bisection for hyperexponential jumps and to
/// the polynomial route otherwise.
pub fn decompose<T: Real>(model: &SnLevyModel<T>, q: T) -> Result<RootDecomposition<T>> {
    match model.jumps() {
        JumpDistribution::HyperExponential(_) => find_negative_roots_hyperexp(model, q),
        JumpDistribution::PhaseType(_) => find_negative_roots_ph(model, q),
    }
}

/// `max |psi(r) - q|` over `zeta` and every `-xi`.
pub fn max_residual<T: Real>(model: &SnLevyModel<T>, d: &RootDecomposition<T>) -> Result<T> {
    let mut worst = (model.laplace_exponent(d.zeta)? - d.q).abs();
    for r in &d.neg_roots {
        let v = (model.laplace_exponent_complex(-r.xi)? - d.q).norm();
        worst = worst.max(v);
    }
    if worst.is_zero() {
        return Ok(T::zero());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyper(mu: f64, sigma: f64, lambda: f64, p: &[f64], eta: &[f64]) -> SnLevyModel<f64> {
        SnLevyModel::hyperexponential(mu, sigma, lambda, HyperExponential::new(p.to_vec(), eta.to_vec()).unwrap())
            .unwrap()
    }

    #[test]
    fn zeta_of_pure_drift() {
        let m = hyper(1.0, 0.0, 0.0, &[1.0], &[1.0]);
        assert!((find_zeta(&m, 0.05).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn zeta_of_hand_model() {
        let m = hyper(5.0, 0.0, 5.0, &[1.0], &[1.0]);
        assert!((find_zeta(&m, 2.5).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zeta_residual_for_exp_model() {
        let m = hyper(5.0, 1.0, 5.0, &[1.0], &[1.0]);
        let z = find_zeta(&m, 0.05).unwrap();
        assert!((m.laplace_exponent(z).unwrap() - 0.05).abs() < 1e-10);
    }

    #[test]
    fn q_must_be_positive() {
        let m = hyper(5.0, 1.0, 5.0, &[1.0], &[1.0]);
        assert!(matches!(find_zeta(&m, 0.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn root_counts_follow_regime() {
        let cp = find_negative_roots_hyperexp(&hyper(5.0, 0.0, 5.0, &[1.0], &[1.0]), 0.05).unwrap();
        assert_eq!(cp.neg_roots.len(), 1);
        assert!(cp.neg_roots[0].xi.re < 1.0);
        let diff = find_negative_roots_hyperexp(&hyper(5.0, 1.0, 5.0, &[1.0], &[1.0]), 0.05).unwrap();
        assert_eq!(diff.neg_roots.len(), 2);
        assert!(diff.is_interlaced());
    }

    #[test]
    fn compound_poisson_root_matches_quadratic() {
        // (5s - q)(s + 1) + 5s... : psi(-x) = q  <=>  -5x + 5x/(1-x) = q
        // 5x^2 + q x - q = 0 after clearing (1 - x)
        let q = 0.05;
        let m = hyper(5.0, 0.0, 5.0, &[1.0], &[1.0]);
        let d = find_negative_roots_hyperexp(&m, q).unwrap();
        let x = (-q + (q * q + 20.0 * q).sqrt()) / 10.0;
        assert!((d.neg_roots[0].xi.re - x).abs() < 1e-14);
        let dp = find_negative_roots_ph(&m.to_phase_type().unwrap(), q).unwrap();
        assert!((dp.neg_roots[0].xi.re - x).abs() < 1e-13);
    }

    #[test]
    fn polynomial_for_single_exponential() {
        // m = 1, diagonal T: P(s) = (mu s + s^2/2 - lambda - q)(s + eta) + lambda eta
        let m = hyper(2.0, 1.0, 3.0, &[1.0], &[1.5]);
        let q = 0.2;
        let p = cramer_lundberg_polynomial(&m, q).unwrap();
        let expect = poly::add(&poly::mul(&[-3.2, 2.0, 0.5], &[1.5, 1.0]), &[4.5]);
        for (a, b) in p.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12, "{p:?} vs {expect:?}");
        }
        let z = find_zeta(&m, q).unwrap();
        assert!(poly::eval(&p, z).abs() < 1e-8 * poly::eval(&p.iter().map(|c| c.abs()).collect::<Vec<_>>(), z));
        assert!((p[0] + q * 1.5).abs() < 1e-12);
    }

    #[test]
    fn repeated_roots_are_reported() {
        let d = RootDecomposition::from_parts(
            0.1,
            0.5,
            vec![NegativeRoot { xi: re(2.0), multiplicity: 2 }],
            vec![re(3.0)],
            Regime::Diffusive,
        )
        .unwrap();
        assert_eq!(d.root_count(), 2);
        assert!(!d.all_simple());
        assert!(RootDecomposition::from_parts(
            0.1,
            0.5,
            vec![NegativeRoot::simple(re(2.0))],
            vec![re(3.0)],
            Regime::Diffusive
        )
        .is_err());
    }
}
