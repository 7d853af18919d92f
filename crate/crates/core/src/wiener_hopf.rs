//! Negative Wiener–Hopf factor, its partial-fraction coefficients and the law
//! of the running minimum at an independent exponential time.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::levy_model::Regime;
use crate::poly;
use crate::roots::{RootDecomposition, CLUSTER_TOL};
use crate::scalar::{re, Cplx, Real};

/// One partial-fraction term `A^{(k)}_i` attached to root `xi_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhTerm<T> {
    pub xi: Cplx<T>,
    /// Power `k` of `xi / (s + xi)`, `1 <= k <= multiplicity`.
    pub k: usize,
    pub a: Cplx<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WhCoefficients<T> {
    pub terms: Vec<WhTerm<T>>,
    /// `sum_i A^{(1)}_i xi_i`.
    pub varrho: T,
    /// `P(min = 0)`: zero for a diffusive process.
    pub atom_mass: T,
    pub regime: Regime,
}

/// `E[exp(s * min_{t <= e_q} X_t)]` as the product over poles and roots.
pub fn wh_factor_minus<T: Real>(decomp: &RootDecomposition<T>, s: Cplx<T>) -> Result<Cplx<T>> {
    let mut value = Cplx::<T>::one();
    for r in &decomp.neg_roots {
        let d = s + r.xi;
        if d.norm() < T::lit(1e-12) * (T::one() + r.xi.norm()) {
            return Err(Error::PoleEvaluation { pole: -r.xi.re.to_f64().unwrap_or(f64::NAN) });
        }
    }
    // interleave numerator and denominator factors to keep partial products O(1)
    let n = decomp.neg_roots.len().max(decomp.poles.len());
    for i in 0..n {
        if let Some(&eta) = decomp.poles.get(i) {
            value *= (s + eta) / eta;
        }
        if let Some(r) = decomp.neg_roots.get(i) {
            value *= (r.xi / (s + r.xi)).powi(r.multiplicity as i32);
        }
    }
    Ok(value)
}

/// Partial-fraction coefficients `A^{(k)}_i`.
///
/// Each coefficient is the Taylor coefficient of
/// `phi(s) (s + xi_i)^{m_i} / xi_i^k` at `s = -xi_i`, expanded exactly from
/// the product form (a single product for simple roots).
pub fn partial_fraction_coefficients<T: Real>(decomp: &RootDecomposition<T>) -> Result<WhCoefficients<T>> {
    let roots = &decomp.neg_roots;
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            if (roots[i].xi - roots[j].xi).norm() < T::lit(CLUSTER_TOL) * (T::one() + roots[i].xi.norm()) {
                return Err(Error::RepeatedRootsDetected { location: -roots[i].xi.re.to_f64().unwrap_or(f64::NAN) });
            }
        }
    }
    let mut terms = Vec::new();
    for (i, ri) in roots.iter().enumerate() {
        let order = ri.multiplicity;
        let mut series = vec![Cplx::<T>::one()];
        series.resize(order, Cplx::zero());
        let mut constant = ri.xi.powi(ri.multiplicity as i32);
        for &eta in &decomp.poles {
            // (s + eta) / eta around s = -xi_i
            let f = [(eta - ri.xi) / eta, eta.inv()];
            series = poly::series_mul(&series, &f, order);
        }
        for (l, rl) in roots.iter().enumerate() {
            if l == i {
                continue;
            }
            constant *= rl.xi.powi(rl.multiplicity as i32);
            let f = poly::binomial_series(rl.xi - ri.xi, -(rl.multiplicity as i32), order);
            series = poly::series_mul(&series, &f, order);
        }
        for k in 1..=order {
            let a = series[order - k] * constant / ri.xi.powi(k as i32);
            terms.push(WhTerm { xi: ri.xi, k, a });
        }
    }
    let varrho = terms.iter().filter(|t| t.k == 1).map(|t| t.a * t.xi).sum::<Cplx<T>>().re;
    let atom_mass = match decomp.regime {
        Regime::Diffusive => T::zero(),
        Regime::CompoundPoisson => {
            let mut v = Cplx::<T>::one();
            let n = roots.len().max(decomp.poles.len());
            for i in 0..n {
                if let Some(r) = roots.get(i) {
                    v *= r.xi.powi(r.multiplicity as i32);
                }
                if let Some(&eta) = decomp.poles.get(i) {
                    v /= eta;
                }
            }
            v.re
        }
    };
    Ok(WhCoefficients { terms, varrho, atom_mass, regime: decomp.regime })
}

impl<T: Real> WhCoefficients<T> {
    /// Transform of the partial-fraction expansion:
    /// `atom + sum A^{(k)} (xi / (s + xi))^k`.
    pub fn laplace_from_partial_fractions(&self, s: Cplx<T>) -> Cplx<T> {
        self.terms.iter().map(|t| t.a * (t.xi / (s + t.xi)).powi(t.k as i32)).sum::<Cplx<T>>() + re(self.atom_mass)
    }

    /// `sum_{i,k} A^{(k)}_i`: mass of the absolutely continuous part.
    pub fn total_coefficient(&self) -> Cplx<T> {
        self.terms.iter().map(|t| t.a).sum()
    }

    /// Density of `-min_{t <= e_q} X_t` at `x > 0`.
    pub fn running_min_density(&self, x: T) -> T {
        if !(x > T::zero()) {
            return T::zero();
        }
        let mut total = Cplx::<T>::zero();
        for t in &self.terms {
            let u = t.xi * x;
            let mut poly_term = Cplx::<T>::one();
            for j in 1..t.k {
                poly_term = poly_term * u / T::from_usize_lossy(j);
            }
            total += t.a * t.xi * poly_term * (-u).exp();
        }
        total.re
    }

    /// Imaginary residue of the density, for checking that conjugate root
    /// pairs combine to a real value.
    pub fn running_min_density_imag(&self, x: T) -> T {
        let mut total = Cplx::<T>::zero();
        for t in &self.terms {
            let u = t.xi * x;
            let mut poly_term = Cplx::<T>::one();
            for j in 1..t.k {
                poly_term = poly_term * u / T::from_usize_lossy(j);
            }
            total += t.a * t.xi * poly_term * (-u).exp();
        }
        total.im
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::{HyperExponential, SnLevyModel};
    use crate::roots::{decompose, NegativeRoot};

    fn exp_model(sigma: f64) -> SnLevyModel<f64> {
        SnLevyModel::hyperexponential(5.0, sigma, 5.0, HyperExponential::exponential(1.0).unwrap()).unwrap()
    }

    #[test]
    fn factor_is_one_at_origin() {
        let d = decompose(&exp_model(1.0), 0.05).unwrap();
        assert!((wh_factor_minus(&d, re(0.0)).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn single_factor_by_hand() {
        let d = decompose(&exp_model(0.0), 0.05).unwrap();
        let xi = d.neg_roots[0].xi.re;
        let want = (1.0 + 1.0) * xi / (1.0 * (1.0 + xi));
        assert!((wh_factor_minus(&d, re(1.0)).unwrap().re - want).abs() < 1e-15);
        // A = residue of phi(s)/xi at -xi = (eta - xi)/eta
        let wh = partial_fraction_coefficients(&d).unwrap();
        assert!((wh.terms[0].a.re - (1.0 - xi)).abs() < 1e-15);
        // atom = xi / eta, and coefficients plus atom sum to one
        assert!((wh.atom_mass - xi).abs() < 1e-15);
        assert!((wh.total_coefficient().re + wh.atom_mass - 1.0).abs() < 1e-14);
        // large-s limit is the atom
        let far = wh_factor_minus(&d, re(1e8)).unwrap().re;
        assert!((far - wh.atom_mass).abs() < 1e-7);
    }

    #[test]
    fn diffusive_coefficients_sum_to_one() {
        let d = decompose(&exp_model(1.0), 0.05).unwrap();
        let wh = partial_fraction_coefficients(&d).unwrap();
        assert_eq!(wh.atom_mass, 0.0);
        assert!((wh.total_coefficient().re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn double_root_expansion_matches_direct_derivative() {
        // phi(s) = (s+3)/3 * (2/(s+2))^2: A^{(2)} = phi (s+2)^2/4 at -2, A^{(1)} = d/ds[...]/2
        let d = RootDecomposition::from_parts(
            0.1,
            0.4,
            vec![NegativeRoot { xi: re(2.0), multiplicity: 2 }],
            vec![re(3.0)],
            Regime::Diffusive,
        )
        .unwrap();
        let wh = partial_fraction_coefficients(&d).unwrap();
        let g = |s: f64| (s + 3.0) / 3.0 * 4.0;
        let a2 = g(-2.0) / 4.0;
        let a1 = (4.0 / 3.0) / 2.0;
        let by_k = |k| wh.terms.iter().find(|t| t.k == k).unwrap().a.re;
        assert!((by_k(2) - a2).abs() < 1e-15);
        assert!((by_k(1) - a1).abs() < 1e-15);
        for s in [0.0, 0.5, 7.0] {
            let direct = wh_factor_minus(&d, re(s)).unwrap();
            assert!((wh.laplace_from_partial_fractions(re(s)) - direct).norm() < 1e-14);
        }
    }
}
