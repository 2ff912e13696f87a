//! Dense complex matrix kernel: norms, inner products, submatrices,
//! orderings, Kronecker products and the power-iteration operator norm.
//!
//! All matrices here are square with finite entries; the wire format is
//! `{"n": ..., "entries": [[re, im], ...]}` with entries row-major.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Numeric policy threaded through every operation.
///
/// A value `x` counts as zero iff `|x| <= zero_tol * scale` where `scale`
/// is `max(1, norm of the context matrix)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative magnitude below which a value is treated as zero.
    pub zero_tol: f64,
    /// Relative threshold for scalar and matrix equality.
    pub eq_tol: f64,
    /// Threshold for lexicographic ties.
    pub lex_tol: f64,
}

impl Tolerances {
    pub fn new(zero_tol: f64, eq_tol: f64, lex_tol: f64) -> Result<Self> {
        if !(zero_tol > 0.0 && eq_tol > 0.0 && lex_tol > 0.0) {
            return Err(Error::InvalidTolerances(
                "all tolerances must be strictly positive".into(),
            ));
        }
        if zero_tol > eq_tol {
            return Err(Error::InvalidTolerances(
                "zero_tol must not exceed eq_tol".into(),
            ));
        }
        Ok(Self {
            zero_tol,
            eq_tol,
            lex_tol,
        })
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            zero_tol: 1e-9,
            eq_tol: 1e-8,
            lex_tol: 1e-9,
        }
    }
}

/// Lexicographic order on complex scalars with a tie band of `lex_tol`:
/// `z` precedes `w` when `Re z < Re w - lex_tol`, or the real parts tie
/// within `lex_tol` and `Im z <= Im w + lex_tol`.
pub fn lex_leq(z: Complex64, w: Complex64, tol: &Tolerances) -> bool {
    if z.re < w.re - tol.lex_tol {
        return true;
    }
    if (z.re - w.re).abs() <= tol.lex_tol {
        return z.im <= w.im + tol.lex_tol;
    }
    false
}

/// Iteration cap for the power iteration inside [`Matrix::operator_norm`].
pub const OPERATOR_NORM_ITERATION_CAP: usize = 10_000;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    /// Builds an `n x n` matrix from row-major entries, rejecting wrong
    /// lengths and non-finite values.
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        for (idx, z) in data.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / n,
                    col: idx % n,
                });
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from complex rows; panics on ragged or non-finite input.
    /// Intended for literals in tests and generators.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix rows must form a square");
            data.extend_from_slice(row);
        }
        Self::new(n, data).expect("finite entries")
    }

    /// Builds from real rows; panics on ragged input.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let complex: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&complex)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    /// Matrix product; both operands must have the same size.
    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "matrix product requires equal sizes");
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a_ik = self.data[i * n + k];
                if a_ik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a_ik * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a + b)
            .collect();
        Matrix { n: self.n, data }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n);
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Matrix { n: self.n, data }
    }

    pub fn scale(&self, c: Complex64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self.get(i, j);
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm `sqrt(sum |a_ij|^2)`.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius inner product `(X, Y) = sum x_ij * conj(y_ij)`.
    pub fn frobenius_inner(&self, rhs: &Matrix) -> Result<Complex64> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: rhs.n,
            });
        }
        Ok(self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(x, y)| x * y.conj())
            .sum())
    }

    /// Leading `k x k` block, `1 <= k <= n`.
    pub fn principal_submatrix(&self, k: usize) -> Result<Matrix> {
        if k == 0 || k > self.n {
            return Err(Error::IndexOutOfRange {
                index: k,
                limit: self.n,
            });
        }
        let mut out = Matrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                out[(i, j)] = self.get(i, j);
            }
        }
        Ok(out)
    }

    /// Transpose with respect to the secondary diagonal: `Z A^T Z` with `Z`
    /// the reversal permutation. An involution.
    pub fn secondary_transpose(&self) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.get(n - 1 - j, n - 1 - i);
            }
        }
        out
    }

    /// Kronecker product; the result has size `self.n * rhs.n`.
    pub fn kron(&self, rhs: &Matrix) -> Matrix {
        let (p, q) = (self.n, rhs.n);
        let n = p * q;
        let mut out = Matrix::zeros(n);
        for i in 0..p {
            for j in 0..p {
                let a_ij = self.get(i, j);
                if a_ij == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..q {
                    for l in 0..q {
                        out[(i * q + k, j * q + l)] = a_ij * rhs.get(k, l);
                    }
                }
            }
        }
        out
    }

    /// `|a_ij| <= tol * max(1, ||A||)` for all `i > j`.
    pub fn is_upper_triangular(&self, tol: f64) -> bool {
        let scale = self.frobenius_norm().max(1.0);
        for i in 0..self.n {
            for j in 0..i {
                if self.get(i, j).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    /// Largest singular value via power iteration on `M* M`.
    ///
    /// Deterministic start vector `(1, ..., 1)/sqrt(n)`; converged when the
    /// Rayleigh residual drops below `eq_tol` relative to the current
    /// eigenvalue estimate. Errors after 10,000 iterations.
    pub fn operator_norm(&self, tol: &Tolerances) -> Result<f64> {
        let n = self.n;
        if n == 0 {
            return Ok(0.0);
        }
        // Gram matrix M* M is Hermitian PSD; its top eigenvalue is sigma^2.
        let gram = self.adjoint().mul(self);
        let gram_scale = gram.frobenius_norm();
        if gram_scale == 0.0 {
            return Ok(0.0);
        }

        let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
        for _ in 0..OPERATOR_NORM_ITERATION_CAP {
            let w = gram.apply(&v);
            let w_norm = vec_norm(&w);
            if w_norm <= f64::MIN_POSITIVE {
                // v is (numerically) in the kernel; the component along the
                // top eigenspace was zero, so the norm estimate is 0.
                return Ok(0.0);
            }
            let v_next: Vec<Complex64> = w.iter().map(|z| z / w_norm).collect();
            let gv = gram.apply(&v_next);
            let lambda: f64 = v_next
                .iter()
                .zip(&gv)
                .map(|(x, y)| (x.conj() * y).re)
                .sum::<f64>();
            let residual = vec_norm(
                &gv.iter()
                    .zip(&v_next)
                    .map(|(g, x)| g - x * Complex64::new(lambda, 0.0))
                    .collect::<Vec<_>>(),
            );
            v = v_next;
            if residual <= tol.eq_tol * lambda.max(f64::MIN_POSITIVE) {
                return Ok(lambda.max(0.0).sqrt());
            }
        }
        Err(Error::NonConvergence {
            iterations: OPERATOR_NORM_ITERATION_CAP,
        })
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += self.data[i * n + j] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Largest absolute entry difference against `rhs`.
    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        assert_eq!(self.n, rhs.n);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Solves `self * x = b` by Gaussian elimination with partial pivoting.
    pub(crate) fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut a = self.data.clone();
        let mut x: Vec<Complex64> = b.to_vec();
        let pivot_floor = f64::MIN_POSITIVE.max(1e-300);
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_mag = a[k * n + k].norm();
            for i in (k + 1)..n {
                let mag = a[i * n + k].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = i;
                }
            }
            if pivot_mag <= pivot_floor {
                return Err(Error::MalformedBlock("singular linear system".into()));
            }
            if pivot_row != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot_row * n + j);
                }
                x.swap(k, pivot_row);
            }
            let pivot = a[k * n + k];
            for i in (k + 1)..n {
                let factor = a[i * n + k] / pivot;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= factor * akj;
                }
                x[i] = x[i] - factor * x[k];
            }
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= a[i * n + j] * x[j];
            }
            x[i] = acc / a[i * n + i];
        }
        Ok(x)
    }
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                let z = self.get(i, j);
                write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

// Wire format: {"n": n, "entries": [[re, im], ...]} row-major, n^2 pairs.
impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            n: usize,
            entries: Vec<[f64; 2]>,
        }
        Wire {
            n: self.n,
            entries: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            n: usize,
            entries: Vec<[f64; 2]>,
        }
        let wire = Wire::deserialize(deserializer)?;
        if wire.entries.len() != wire.n * wire.n {
            return Err(D::Error::custom(format!(
                "entries length {}, expected {}",
                wire.entries.len(),
                wire.n * wire.n
            )));
        }
        for (idx, pair) in wire.entries.iter().enumerate() {
            if !pair[0].is_finite() || !pair[1].is_finite() {
                return Err(D::Error::custom(format!(
                    "non-finite entry at ({}, {})",
                    idx / wire.n,
                    idx % wire.n
                )));
            }
        }
        let data = wire
            .entries
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        Ok(Matrix { n: wire.n, data })
    }
}

/// Serde adapter storing a `Complex64` as `[re, im]`.
pub(crate) mod serde_complex {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        z: &Complex64,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serde adapter storing a `Vec<Complex64>` as a list of `[re, im]` pairs.
pub(crate) mod serde_complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        v: &[Complex64],
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect())
    }
}
