//! Small dense linear algebra: LU solves, matrix exponential, Hessenberg
//! reduction, characteristic polynomials and real Hessenberg eigenvalues.
//!
//! Phase-type generators are expected to be modest (tens of phases), so
//! everything here is a straightforward row-major dense implementation.

use std::ops::{Index, IndexMut, Neg};

use num_traits::Num;

use crate::scalar::{Cplx, Real};

/// Scalars an LU factorisation can pivot on.
pub trait Pivot<T: Real>: Copy + Num + Neg<Output = Self> {
    fn modulus(&self) -> T;
}

impl<T: Real> Pivot<T> for T {
    #[inline]
    fn modulus(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Pivot<T> for Cplx<T> {
    #[inline]
    fn modulus(&self) -> T {
        self.norm()
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Copy + Num> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() }
    }

    pub fn diagonal(d: &[F]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn map<G: Copy + Num>(&self, f: impl Fn(F) -> G) -> Matrix<G> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == F::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| self.row(i).iter().zip(v).fold(F::zero(), |acc, (&a, &b)| acc + a * b)).collect()
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[F]) -> Vec<F> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![F::zero(); self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o = *o + vi * self[(i, j)];
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, k: F) -> Self {
        self.map(|v| v * k)
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.cols + j]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Matrix<T> {
    /// Maximum absolute column sum.
    pub fn norm1(&self) -> T {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<T>()).fold(T::zero(), T::max)
    }
}

/// LU factorisation with partial pivoting.
#[derive(Debug, Clone)]
pub struct Lu<F> {
    lu: Matrix<F>,
    perm: Vec<usize>,
    singular: bool,
}

impl<F> Lu<F> {
    pub fn is_singular(&self) -> bool {
        self.singular
    }
}

pub fn lu<T: Real, F: Pivot<T>>(a: &Matrix<F>) -> Lu<F> {
    assert!(a.is_square(), "LU needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut singular = false;
    let scale = a.data.iter().map(|v| v.modulus()).fold(T::zero(), T::max);
    let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1));
    for k in 0..n {
        let (p, pmax) =
            (k..n)
                .map(|i| (i, m[(i, k)].modulus()))
                .fold((k, T::zero()), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pmax <= tiny || pmax == T::zero() {
            singular = true;
            continue;
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let pivot = m[(k, k)];
        for i in (k + 1)..n {
            let f = m[(i, k)] / pivot;
            m[(i, k)] = f;
            if f == F::zero() {
                continue;
            }
            for j in (k + 1)..n {
                let v = m[(k, j)];
                m[(i, j)] = m[(i, j)] - f * v;
            }
        }
    }
    Lu { lu: m, perm, singular }
}

impl<F: Copy + Num> Lu<F> {
    /// Solves `A x = b`. Returns `None` for a singular factorisation.
    pub fn solve(&self, b: &[F]) -> Option<Vec<F>> {
        if self.singular {
            return None;
        }
        let n = self.lu.rows;
        let mut x: Vec<F> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc = acc - self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        Some(x)
    }

    pub fn solve_matrix(&self, b: &Matrix<F>) -> Option<Matrix<F>> {
        let mut out = Matrix::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let col: Vec<F> = (0..b.rows).map(|i| b[(i, j)]).collect();
            let x = self.solve(&col)?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Some(out)
    }
}

/// Matrix exponential by scaling and squaring with a degree-6 diagonal Padé
/// approximant.
pub fn expm<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    assert!(a.is_square());
    let n = a.rows;
    let norm = a.norm1();
    let half = T::lit(0.5);
    let mut squarings = 0i32;
    if norm > half {
        squarings = (norm / half).log2().ceil().to_i32().unwrap_or(0).max(0);
    }
    let scaled = a.scale(T::lit(2.0).powi(-squarings));
    const Q: usize = 6;
    let mut c = T::one();
    let mut num = Matrix::identity(n);
    let mut den = Matrix::identity(n);
    let mut power = Matrix::identity(n);
    for k in 1..=Q {
        c = c * T::from_usize_lossy(Q - k + 1) / T::from_usize_lossy(k * (2 * Q - k + 1));
        power = power.matmul(&scaled);
        num = num.add(&power.scale(c));
        let sign = if k % 2 == 0 { c } else { -c };
        den = den.add(&power.scale(sign));
    }
    let mut x = lu(&den).solve_matrix(&num).expect("Padé denominator is nonsingular");
    for _ in 0..squarings {
        x = x.matmul(&x);
    }
    x
}

/// Orthogonal (Householder) reduction to upper Hessenberg form.
pub fn hessenberg<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    assert!(a.is_square());
    let n = a.rows;
    let mut h = a.clone();
    if n < 3 {
        return h;
    }
    for k in 0..(n - 2) {
        let mut v: Vec<T> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if v[0] >= T::zero() { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        let two = T::lit(2.0);
        // H <- P H, P = I - 2 v v^T acting on rows k+1..n
        for j in 0..n {
            let dot: T = v.iter().enumerate().map(|(r, &vr)| vr * h[(k + 1 + r, j)]).sum();
            for (r, &vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= two * vr * dot;
            }
        }
        // H <- H P on columns k+1..n
        for i in 0..n {
            let dot: T = v.iter().enumerate().map(|(c, &vc)| h[(i, k + 1 + c)] * vc).sum();
            for (c, &vc) in v.iter().enumerate() {
                h[(i, k + 1 + c)] -= two * vc * dot;
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = T::zero();
        }
    }
    h
}

/// Coefficients (ascending powers) of `det(sI - A)`.
pub fn characteristic_polynomial<T: Real>(a: &Matrix<T>) -> Vec<T> {
    let h = hessenberg(a);
    let n = h.rows;
    let mut polys: Vec<Vec<T>> = Vec::with_capacity(n + 1);
    polys.push(vec![T::one()]);
    for k in 1..=n {
        // (s - h_kk) p_{k-1}
        let prev = &polys[k - 1];
        let mut p = vec![T::zero(); k + 1];
        for (d, &c) in prev.iter().enumerate() {
            p[d + 1] += c;
            p[d] -= h[(k - 1, k - 1)] * c;
        }
        let mut sub = T::one();
        for i in (1..k).rev() {
            sub *= h[(i, i - 1)];
            let coef = h[(i - 1, k - 1)] * sub;
            if coef == T::zero() {
                continue;
            }
            for (d, &c) in polys[i - 1].iter().enumerate() {
                p[d] -= coef * c;
            }
        }
        polys.push(p);
    }
    polys.pop().unwrap_or_else(|| vec![T::one()])
}

/// Diagonal similarity balancing (radix 2), preserving Hessenberg structure.
pub fn balance<T: Real>(a: &mut Matrix<T>) {
    let n = a.rows;
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = T::zero();
            let mut c = T::zero();
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let mut g = r / radix;
            let mut f = T::one();
            let s = c + r;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                done = false;
                let ginv = T::one() / f;
                for j in 0..n {
                    a[(i, j)] *= ginv;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of a real upper Hessenberg matrix by the Francis double-shift
/// QR iteration. Returns `None` if an eigenvalue fails to converge.
pub fn hessenberg_eigenvalues<T: Real>(h: &Matrix<T>) -> Option<Vec<Cplx<T>>> {
    let n = h.rows;
    let mut a = h.clone();
    let mut wr = vec![T::zero(); n];
    let mut wi = vec![T::zero(); n];
    let eps = T::epsilon();
    let mut anorm = T::zero();
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let sign = |x: T, y: T| if y >= T::zero() { x.abs() } else { -x.abs() };
    let mut nn = n as isize - 1;
    let mut t = T::zero();
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == T::zero() {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() <= eps * s {
                    a[(l, l - 1)] = T::zero();
                    break;
                }
                l -= 1;
            }
            let mut x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = T::zero();
                nn -= 1;
                break;
            }
            let mut y = a[(nu - 1, nu - 1)];
            let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nu - 1 {
                let p = T::lit(0.5) * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= T::zero() {
                    z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != T::zero() {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = T::zero();
                    wi[nu] = T::zero();
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return None;
            }
            if its == 10 || its == 20 {
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = T::lit(0.75) * s;
                y = x;
                w = T::lit(-0.4375) * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                r = x - z;
                let s0 = y - z;
                p = (r * s0 - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - r - s0;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nu {
                a[(i, i - 2)] = T::zero();
                if i != m + 2 {
                    a[(i, i - 3)] = T::zero();
                }
            }
            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = T::zero();
                    if k + 1 != nu {
                        r = a[(k + 2, k - 1)];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != T::zero() {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != T::zero() {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != nu {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * z;
                        }
                        a[(k + 1, j)] -= pp * y;
                        a[(k, j)] -= pp * x;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != nu {
                            pp += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Some(wr.into_iter().zip(wi).map(|(r, i)| Cplx::new(r, i)).collect())
}

/// Eigenvalues of a general real square matrix.
pub fn eigenvalues<T: Real>(a: &Matrix<T>) -> Option<Vec<Cplx<T>>> {
    let mut h = hessenberg(a);
    balance(&mut h);
    hessenberg_eigenvalues(&h)
}
