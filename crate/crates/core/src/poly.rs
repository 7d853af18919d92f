//! Dense polynomials (ascending coefficients) and truncated power series.

use num_traits::{One, Zero};

use crate::linalg::{self, Matrix};
use crate::scalar::{Cplx, Real};

/// Horner evaluation at a real point.
pub fn eval<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// Horner evaluation at a complex point.
pub fn eval_complex<T: Real>(coeffs: &[T], z: Cplx<T>) -> Cplx<T> {
    coeffs.iter().rev().fold(Cplx::zero(), |acc, &c| acc * z + c)
}

pub fn derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * T::from_usize_lossy(k)).collect()
}

pub fn mul<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n).map(|k| a.get(k).copied().unwrap_or_else(T::zero) + b.get(k).copied().unwrap_or_else(T::zero)).collect()
}

pub fn scale<T: Real>(a: &[T], k: T) -> Vec<T> {
    a.iter().map(|&c| c * k).collect()
}

/// Drops trailing (highest-degree) coefficients that are exactly zero or
/// negligible relative to the largest coefficient.
pub fn trim<T: Real>(coeffs: &[T]) -> Vec<T> {
    let big = coeffs.iter().fold(T::zero(), |m, c| m.max(c.abs()));
    let cut = big * T::epsilon() * T::lit(16.0);
    let mut end = coeffs.len();
    while end > 0 && coeffs[end - 1].abs() <= cut {
        end -= 1;
    }
    coeffs[..end].to_vec()
}

/// All complex roots of a real polynomial via eigenvalues of its balanced
/// companion matrix.
pub fn roots<T: Real>(coeffs: &[T]) -> Option<Vec<Cplx<T>>> {
    let c = trim(coeffs);
    if c.len() <= 1 {
        return Some(Vec::new());
    }
    let deg = c.len() - 1;
    let lead = c[deg];
    let mut comp = Matrix::zeros(deg, deg);
    for j in 0..deg {
        comp[(0, j)] = -c[deg - 1 - j] / lead;
    }
    for i in 1..deg {
        comp[(i, i - 1)] = T::one();
    }
    linalg::balance(&mut comp);
    linalg::hessenberg_eigenvalues(&comp)
}

/// Product of two truncated power series, keeping `order` terms.
pub fn series_mul<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>], order: usize) -> Vec<Cplx<T>> {
    let mut out = vec![Cplx::zero(); order];
    for (i, &x) in a.iter().enumerate().take(order) {
        for (j, &y) in b.iter().enumerate().take(order - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Series of `(a + h)^power` in `h` for integer `power` (negative allowed),
/// truncated to `order` terms.
pub fn binomial_series<T: Real>(a: Cplx<T>, power: i32, order: usize) -> Vec<Cplx<T>> {
    let mut out = Vec::with_capacity(order);
    let mut coef = Cplx::<T>::one();
    let lead = a.powi(power);
    let inv_a = a.inv();
    for k in 0..order {
        out.push(coef * lead * inv_a.powi(k as i32));
        // binom(power, k+1) = binom(power, k) * (power - k) / (k + 1)
        let num = T::from_i32(power - k as i32).expect("small integer");
        coef = coef * num / T::from_usize_lossy(k + 1);
    }
    out
}
