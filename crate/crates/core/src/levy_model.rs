//! Spectrally negative Lévy processes `X_t = X_0 + mu t + sigma B_t - sum Z_n`
//! with phase-type or hyperexponential jump sizes.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::{re, Cplx, Real};

const SIMPLEX_TOL: f64 = 1e-5;
const POLE_TOL: f64 = 1e-12;
const HYPER_POLE_REL_TOL: f64 = 1e-14;

/// Phase-type distribution with representation `(m, alpha, T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseType<T> {
    alpha: Vec<T>,
    generator: Matrix<T>,
    exit: Vec<T>,
    /// Eigenvalues of the generator; the Laplace exponent is singular there.
    eigenvalues: Vec<Cplx<T>>,
}

impl<T: Real> PhaseType<T> {
    pub fn new(alpha: Vec<T>, generator: Matrix<T>) -> Result<Self> {
        let m = alpha.len();
        if m == 0 || !generator.is_square() || generator.rows() != m {
            return Err(Error::SingularGenerator(format!(
                "alpha has {} entries but generator is {}x{}",
                m,
                generator.rows(),
                generator.cols()
            )));
        }
        check_simplex(&alpha)?;
        let mut exit = Vec::with_capacity(m);
        for i in 0..m {
            let scale = generator.row(i).iter().fold(T::zero(), |a, v| a.max(v.abs()));
            for j in 0..m {
                let v = generator[(i, j)];
                if i == j && !(v < T::zero()) {
                    return Err(Error::SingularGenerator(format!("diagonal entry T[{i}][{i}] = {v} is not negative")));
                }
                if i != j && v < T::zero() {
                    return Err(Error::SingularGenerator(format!("off-diagonal entry T[{i}][{j}] = {v} is negative")));
                }
            }
            let row_sum: T = generator.row(i).iter().copied().sum();
            let t_i = -row_sum;
            if t_i < -scale * T::lit(1e-12) {
                return Err(Error::SingularGenerator(format!("row {i} has positive sum {row_sum}")));
            }
            exit.push(t_i.max(T::zero()));
        }
        if linalg::lu(&generator).is_singular() {
            return Err(Error::SingularGenerator("generator is singular".into()));
        }
        let eigenvalues = linalg::eigenvalues(&generator)
            .ok_or_else(|| Error::SingularGenerator("eigenvalue iteration did not converge".into()))?;
        Ok(Self { alpha, generator, exit, eigenvalues })
    }

    pub fn phases(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    pub fn generator(&self) -> &Matrix<T> {
        &self.generator
    }

    /// Exit-rate vector `t = -T 1`.
    pub fn exit_rates(&self) -> &[T] {
        &self.exit
    }

    pub fn eigenvalues(&self) -> &[Cplx<T>] {
        &self.eigenvalues
    }

    /// `alpha (sI - T)^{-1} t`, the transform `E[exp(-s Z)]`.
    pub fn transform(&self, s: Cplx<T>) -> Result<Cplx<T>> {
        let x = self.resolvent_exit(s)?;
        Ok(self.alpha.iter().zip(&x).map(|(&a, &v)| v * a).sum())
    }

    fn shifted(&self, s: Cplx<T>) -> Matrix<Cplx<T>> {
        let m = self.phases();
        let mut a = self.generator.map(|v| re(-v));
        for i in 0..m {
            a[(i, i)] += s;
        }
        a
    }

    fn guard(&self, s: Cplx<T>) -> Result<()> {
        let tol = T::lit(POLE_TOL) * (T::one() + s.norm());
        for &ev in &self.eigenvalues {
            if (s - ev).norm() < tol {
                return Err(Error::PoleEvaluation { pole: ev.re.to_f64().unwrap_or(f64::NAN) });
            }
        }
        Ok(())
    }

    /// `(sI - T)^{-1} t` by an LU solve.
    fn resolvent_exit(&self, s: Cplx<T>) -> Result<Vec<Cplx<T>>> {
        self.guard(s)?;
        let t: Vec<Cplx<T>> = self.exit.iter().map(|&v| re(v)).collect();
        linalg::lu(&self.shifted(s)).solve(&t).ok_or(Error::PoleEvaluation { pole: s.re.to_f64().unwrap_or(f64::NAN) })
    }

    /// `d/ds alpha (sI - T)^{-1} t = -alpha (sI - T)^{-2} t`.
    pub fn transform_derivative(&self, s: Cplx<T>) -> Result<Cplx<T>> {
        let x = self.resolvent_exit(s)?;
        let lu = linalg::lu(&self.shifted(s));
        let y = lu.solve(&x).ok_or(Error::PoleEvaluation { pole: s.re.to_f64().unwrap_or(f64::NAN) })?;
        Ok(-self.alpha.iter().zip(&y).map(|(&a, &v)| v * a).sum::<Cplx<T>>())
    }

    /// Density `alpha exp(T z) t`.
    pub fn density(&self, z: T) -> T {
        if z < T::zero() {
            return T::zero();
        }
        let e = linalg::expm(&self.generator.scale(z));
        let row = e.vec_mul(&self.alpha);
        row.iter().zip(&self.exit).map(|(&a, &b)| a * b).sum::<T>().max(T::zero())
    }

    /// Mean `alpha (-T)^{-1} 1`.
    pub fn mean(&self) -> T {
        let neg = self.generator.scale(-T::one());
        let ones = vec![T::one(); self.phases()];
        let x = linalg::lu(&neg).solve(&ones).expect("validated nonsingular");
        self.alpha.iter().zip(&x).map(|(&a, &v)| a * v).sum()
    }
}

/// Mixture of exponentials with weights `p_j` and rates `eta_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperExponential<T> {
    weights: Vec<T>,
    rates: Vec<T>,
}

impl<T: Real> HyperExponential<T> {
    /// Rates must already be strictly increasing.
    pub fn new(weights: Vec<T>, rates: Vec<T>) -> Result<Self> {
        if weights.len() != rates.len() || weights.is_empty() {
            return Err(Error::SimplexViolation(format!("{} weights for {} rates", weights.len(), rates.len())));
        }
        if let Some(p) = weights.iter().find(|&&p| !(p > T::zero())) {
            return Err(Error::SimplexViolation(format!("weight {p} is not positive")));
        }
        check_simplex(&weights)?;
        if !(rates[0] > T::zero()) {
            return Err(Error::NonIncreasingRates(format!("first rate {} is not positive", rates[0])));
        }
        if let Some(w) = rates.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::NonIncreasingRates(format!("{} followed by {}", w[0], w[1])));
        }
        Ok(Self { weights, rates })
    }

    /// Accepts `(weight, rate)` pairs in any order and sorts them by rate.
    pub fn from_unsorted(pairs: &[(T, T)]) -> Result<Self> {
        let mut pairs = pairs.to_vec();
        pairs.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let (w, r) = pairs.into_iter().unzip();
        Self::new(w, r)
    }

    pub fn exponential(rate: T) -> Result<Self> {
        Self::new(vec![T::one()], vec![rate])
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn density(&self, z: T) -> T {
        if z < T::zero() {
            return T::zero();
        }
        self.weights.iter().zip(&self.rates).map(|(&p, &eta)| p * eta * (-eta * z).exp()).sum()
    }

    pub fn mean(&self) -> T {
        self.weights.iter().zip(&self.rates).map(|(&p, &eta)| p / eta).sum()
    }

    /// The same law as a phase-type distribution with diagonal generator.
    pub fn to_phase_type(&self) -> Result<PhaseType<T>> {
        let diag: Vec<T> = self.rates.iter().map(|&r| -r).collect();
        PhaseType::new(self.weights.clone(), Matrix::diagonal(&diag))
    }
}

fn check_simplex<T: Real>(p: &[T]) -> Result<()> {
    if let Some(v) = p.iter().find(|&&v| !(v >= T::zero())) {
        return Err(Error::SimplexViolation(format!("entry {v} is negative")));
    }
    let total: T = p.iter().copied().sum();
    if (total - T::one()).abs() > T::lit(SIMPLEX_TOL) {
        return Err(Error::SimplexViolation(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Jump-size law of the compound Poisson component.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpDistribution<T> {
    PhaseType(PhaseType<T>),
    HyperExponential(HyperExponential<T>),
}

impl<T: Real> JumpDistribution<T> {
    pub fn density(&self, z: T) -> T {
        match self {
            Self::PhaseType(ph) => ph.density(z),
            Self::HyperExponential(h) => h.density(z),
        }
    }

    pub fn mean(&self) -> T {
        match self {
            Self::PhaseType(ph) => ph.mean(),
            Self::HyperExponential(h) => h.mean(),
        }
    }

    pub fn as_hyperexponential(&self) -> Option<&HyperExponential<T>> {
        match self {
            Self::HyperExponential(h) => Some(h),
            Self::PhaseType(_) => None,
        }
    }

    /// Number of poles of the Laplace exponent (phases, counted with
    /// multiplicity).
    pub fn order(&self) -> usize {
        match self {
            Self::PhaseType(ph) => ph.phases(),
            Self::HyperExponential(h) => h.len(),
        }
    }

    /// Poles `-eta_j` of the Laplace exponent, reported as `eta_j` (positive
    /// real part).
    pub fn pole_magnitudes(&self) -> Vec<Cplx<T>> {
        match self {
            Self::PhaseType(ph) => ph.eigenvalues.iter().map(|&e| -e).collect(),
            Self::HyperExponential(h) => h.rates.iter().map(|&r| re(r)).collect(),
        }
    }
}

/// Path regime of the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `sigma > 0`: unbounded variation, creeping possible.
    Diffusive,
    /// `sigma = 0`, `mu > 0`: compound Poisson with positive drift.
    CompoundPoisson,
}

/// Validated spectrally negative Lévy model.
#[derive(Debug, Clone, PartialEq)]
pub struct SnLevyModel<T> {
    mu: T,
    sigma: T,
    lambda: T,
    jumps: JumpDistribution<T>,
    regime: Regime,
}

impl<T: Real> SnLevyModel<T> {
    pub fn new(mu: T, sigma: T, lambda: T, jumps: JumpDistribution<T>) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || !lambda.is_finite() {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if sigma < T::zero() {
            return Err(Error::InvalidParameter(format!("sigma = {sigma} is negative")));
        }
        if lambda < T::zero() {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} is negative")));
        }
        let regime = if sigma > T::zero() {
            Regime::Diffusive
        } else if mu > T::zero() {
            Regime::CompoundPoisson
        } else {
            return Err(Error::NegativeSubordinator { mu: mu.to_f64().unwrap_or(f64::NAN) });
        };
        Ok(Self { mu, sigma, lambda, jumps, regime })
    }

    pub fn hyperexponential(mu: T, sigma: T, lambda: T, jumps: HyperExponential<T>) -> Result<Self> {
        Self::new(mu, sigma, lambda, JumpDistribution::HyperExponential(jumps))
    }

    pub fn phase_type(mu: T, sigma: T, lambda: T, jumps: PhaseType<T>) -> Result<Self> {
        Self::new(mu, sigma, lambda, JumpDistribution::PhaseType(jumps))
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn jumps(&self) -> &JumpDistribution<T> {
        &self.jumps
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Copy of the model with a different Gaussian coefficient.
    pub fn with_sigma(&self, sigma: T) -> Result<Self> {
        Self::new(self.mu, sigma, self.lambda, self.jumps.clone())
    }

    /// Copy with the hyperexponential jumps re-expressed as a diagonal
    /// phase-type law.
    pub fn to_phase_type(&self) -> Result<Self> {
        match &self.jumps {
            JumpDistribution::HyperExponential(h) => {
                Self::phase_type(self.mu, self.sigma, self.lambda, h.to_phase_type()?)
            }
            JumpDistribution::PhaseType(_) => Ok(self.clone()),
        }
    }

    /// Total mass of the Lévy measure.
    pub fn jump_intensity(&self) -> T {
        match &self.jumps {
            JumpDistribution::HyperExponential(h) => self.lambda * h.weights.iter().copied().sum::<T>(),
            JumpDistribution::PhaseType(_) => self.lambda,
        }
    }

    pub fn jump_density(&self, z: T) -> T {
        self.jumps.density(z)
    }

    fn guard_hyper(h: &HyperExponential<T>, s: Cplx<T>) -> Result<()> {
        // poles are known exactly here, so the guard is relative to each pole
        for &eta in &h.rates {
            if (s + eta).norm() <= T::lit(HYPER_POLE_REL_TOL) * eta {
                return Err(Error::PoleEvaluation { pole: -eta.to_f64().unwrap_or(f64::NAN) });
            }
        }
        Ok(())
    }

    /// Laplace exponent `psi(s) = log E[exp(s X_1)]`.
    pub fn laplace_exponent_complex(&self, s: Cplx<T>) -> Result<Cplx<T>> {
        let half = T::lit(0.5);
        let gauss = s * self.mu + s * s * (half * self.sigma * self.sigma);
        let jump = match &self.jumps {
            JumpDistribution::HyperExponential(_) if self.lambda.is_zero() => Cplx::zero(),
            JumpDistribution::HyperExponential(h) => {
                Self::guard_hyper(h, s)?;
                -h.weights.iter().zip(&h.rates).map(|(&p, &eta)| s * p / (s + eta)).sum::<Cplx<T>>() * self.lambda
            }
            JumpDistribution::PhaseType(ph) => {
                if self.lambda.is_zero() {
                    Cplx::zero()
                } else {
                    (ph.transform(s)? - T::one()) * self.lambda
                }
            }
        };
        Ok(gauss + jump)
    }

    pub fn laplace_exponent(&self, s: T) -> Result<T> {
        self.laplace_exponent_complex(re(s)).map(|z| z.re)
    }

    pub fn laplace_exponent_derivative_complex(&self, s: Cplx<T>) -> Result<Cplx<T>> {
        let gauss = s * (self.sigma * self.sigma) + self.mu;
        let jump = match &self.jumps {
            JumpDistribution::HyperExponential(_) if self.lambda.is_zero() => Cplx::zero(),
            JumpDistribution::HyperExponential(h) => {
                Self::guard_hyper(h, s)?;
                -h.weights
                    .iter()
                    .zip(&h.rates)
                    .map(|(&p, &eta)| {
                        let d = s + eta;
                        d.inv() * d.inv() * (p * eta)
                    })
                    .sum::<Cplx<T>>()
                    * self.lambda
            }
            JumpDistribution::PhaseType(ph) => {
                if self.lambda.is_zero() {
                    Cplx::zero()
                } else {
                    ph.transform_derivative(s)? * self.lambda
                }
            }
        };
        Ok(gauss + jump)
    }

    pub fn laplace_exponent_derivative(&self, s: T) -> Result<T> {
        self.laplace_exponent_derivative_complex(re(s)).map(|z| z.re)
    }
}
