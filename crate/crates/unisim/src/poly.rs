//! Complex polynomials in one variable, with matrix functional calculus.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Polynomial with coefficients in ascending degree: `h = h0 + h1 x + ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    #[serde(with = "crate::matrix::serde_complex_vec")]
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self {
            coeffs: coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self {
            coeffs: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// Monic product `(x - r_1)(x - r_2)...` over the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &ck) in coeffs.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            coeffs = next;
        }
        Self { coeffs }
    }

    /// Drops trailing coefficients with `|c| <= zero_tol * max(1, max |c|)`.
    pub fn trimmed(mut self, zero_tol: f64) -> Self {
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
            .max(1.0);
        while let Some(last) = self.coeffs.last() {
            if last.norm() <= zero_tol * scale {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the stored coefficient list (0 for constants and zero).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs
            .get(k)
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval_scalar(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// `h(M) = h0 I + h1 M + ... + hd M^d` by the Horner recurrence.
    pub fn eval_matrix(&self, m: &Matrix) -> Matrix {
        let n = m.n();
        if self.coeffs.is_empty() {
            return Matrix::zeros(n);
        }
        let mut acc = Matrix::identity(n).scale(*self.coeffs.last().unwrap());
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(m).add(&Matrix::identity(n).scale(c));
        }
        acc
    }

    pub fn mul(&self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs =
            vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }
    }

    /// Long division: returns `(q, r)` with `self = q * d + r`, `deg r < deg d`.
    /// The divisor's leading coefficient must be nonzero.
    pub fn div_rem(&self, d: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if d.is_zero() {
            return Err(Error::InvalidParameter("division by zero polynomial".into()));
        }
        let lead = *d.coeffs.last().unwrap();
        if lead.norm() == 0.0 {
            return Err(Error::InvalidParameter(
                "divisor has zero leading coefficient".into(),
            ));
        }
        let dn = d.coeffs.len();
        if self.coeffs.len() < dn {
            return Ok((Polynomial::zero(), self.clone()));
        }
        let mut rem = self.coeffs.clone();
        let qlen = rem.len() - dn + 1;
        let mut q = vec![Complex64::new(0.0, 0.0); qlen];
        for k in (0..qlen).rev() {
            let factor = rem[k + dn - 1] / lead;
            q[k] = factor;
            for (j, &dj) in d.coeffs.iter().enumerate() {
                rem[k + j] -= factor * dj;
            }
        }
        rem.truncate(dn - 1);
        Ok((Polynomial { coeffs: q }, Polynomial { coeffs: rem }))
    }
}
