//! Finite encodings and comparisons of the invariant families: Gram
//! matrices of powers of the principal submatrices (which encode the
//! Frobenius norms of all polynomial images), Specht word traces and
//! Arveson pencil norms as refutation-only fallbacks.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Tolerances};
use crate::poly::Polynomial;
use crate::sampling::gaussian_matrix;

/// Gram matrix of the powers `A_k^0 .. A_k^k` of the leading `k x k`
/// block: `g[i][j] = (A_k^i, A_k^j)` under the Frobenius inner product.
///
/// This `(k+1) x (k+1)` Hermitian PSD matrix is a finite encoding of the
/// whole family `{ ||h(A_k)|| : h complex polynomial }`: the squared norm
/// is a quadratic form in the coefficients of `h`, and powers above `k`
/// reduce by the minimal polynomial, itself recoverable from the block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramBlock {
    pub k: usize,
    #[serde(with = "crate::matrix::serde_complex_vec")]
    g: Vec<Complex64>,
}

impl GramBlock {
    pub(crate) fn from_entries(k: usize, g: Vec<Complex64>) -> Self {
        assert_eq!(g.len(), (k + 1) * (k + 1));
        Self { k, g }
    }

    /// Side length, `k + 1`.
    pub fn dim(&self) -> usize {
        self.k + 1
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.g[i * (self.k + 1) + j]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.g.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// The Gram blocks for every `k = 1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramFamily {
    pub n: usize,
    pub blocks: Vec<GramBlock>,
}

impl GramFamily {
    /// Block for submatrix size `k`, `1 <= k <= n`.
    pub fn block(&self, k: usize) -> Result<&GramBlock> {
        if k == 0 || k > self.n {
            return Err(Error::IndexOutOfRange {
                index: k,
                limit: self.n,
            });
        }
        Ok(&self.blocks[k - 1])
    }

    /// Family restricted to the leading `m` blocks.
    pub fn truncated(&self, m: usize) -> Result<GramFamily> {
        if m == 0 || m > self.n {
            return Err(Error::IndexOutOfRange {
                index: m,
                limit: self.n,
            });
        }
        Ok(GramFamily {
            n: m,
            blocks: self.blocks[..m].to_vec(),
        })
    }
}

/// Builds the Gram family from exact powers of each principal submatrix.
pub fn gram_family(a: &Matrix) -> GramFamily {
    let n = a.n();
    let mut blocks = Vec::with_capacity(n);
    for k in 1..=n {
        let sub = a.principal_submatrix(k).expect("k <= n");
        let mut powers = Vec::with_capacity(k + 1);
        powers.push(Matrix::identity(k));
        for _ in 0..k {
            let next = powers.last().unwrap().mul(&sub);
            powers.push(next);
        }
        let dim = k + 1;
        let mut g = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..=i {
                let val = powers[i].frobenius_inner(&powers[j]).expect("same size");
                g[i * dim + j] = val;
                g[j * dim + i] = val.conj();
            }
        }
        blocks.push(GramBlock::from_entries(k, g));
    }
    GramFamily { n, blocks }
}

/// `||h(A_k)||` recovered from the Gram block alone. Coefficients above
/// degree `k` are first reduced modulo the minimal polynomial extracted
/// from the block. Tiny negative values of the quadratic form clamp to 0.
pub fn norm_of_poly(
    family: &GramFamily,
    k: usize,
    h: &Polynomial,
    tol: &Tolerances,
) -> Result<f64> {
    let block = family.block(k)?;
    let reduced;
    let h_eff = if h.degree() > k && !h.is_zero() {
        let mu = crate::reconstruct::minimal_polynomial(block, tol)?;
        let (_, r) = h.div_rem(&mu)?;
        reduced = r;
        &reduced
    } else {
        h
    };
    Ok(quadratic_form_norm(block, h_eff))
}

/// `sqrt(sum_ij h_i conj(h_j) g[i][j])`, clamped at zero.
pub(crate) fn quadratic_form_norm(block: &GramBlock, h: &Polynomial) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let dim = block.dim();
    for i in 0..dim {
        let hi = h.coeff(i);
        if hi == Complex64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..dim {
            let hj = h.coeff(j);
            if hj == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += hi * hj.conj() * block.get(i, j);
        }
    }
    acc.re.max(0.0).sqrt()
}

/// Entrywise comparison of two families; on failure returns the first
/// differing `(k, i, j)` in block-then-row-major order.
pub fn families_equal(
    fa: &GramFamily,
    fb: &GramFamily,
    tol: &Tolerances,
) -> Result<(bool, Option<(usize, usize, usize)>)> {
    if fa.n != fb.n {
        return Err(Error::DimensionMismatch {
            expected: fa.n,
            got: fb.n,
        });
    }
    for k in 1..=fa.n {
        let ba = fa.block(k)?;
        let bb = fb.block(k)?;
        let scale = 1.0 + ba.frobenius_norm().max(bb.frobenius_norm());
        for i in 0..ba.dim() {
            for j in 0..ba.dim() {
                if (ba.get(i, j) - bb.get(i, j)).norm() > tol.eq_tol * scale {
                    return Ok((false, Some((k, i, j))));
                }
            }
        }
    }
    Ok((true, None))
}

/// Word over the alphabet `{a, b}` with `a` read as the matrix and `b` as
/// its adjoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(String);

impl Word {
    pub fn new(letters: &str) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidParameter("word must be nonempty".into()));
        }
        if !letters.chars().all(|c| c == 'a' || c == 'b') {
            return Err(Error::InvalidParameter(
                "word letters must be 'a' or 'b'".into(),
            ));
        }
        Ok(Self(letters.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Trace of the word evaluated with `a -> M`, `b -> M*`.
pub fn specht_trace(m: &Matrix, w: &Word) -> Complex64 {
    let star = m.adjoint();
    let mut acc = Matrix::identity(m.n());
    for ch in w.as_str().chars() {
        acc = match ch {
            'a' => acc.mul(m),
            _ => acc.mul(&star),
        };
    }
    acc.trace()
}

/// First word in length-then-lexicographic order whose traces on `a` and
/// `b` differ beyond `eq_tol * (1 + ||a||)^len`, searching up to `max_len`.
pub fn specht_distinguisher(
    a: &Matrix,
    b: &Matrix,
    max_len: usize,
    tol: &Tolerances,
) -> Result<Option<Word>> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let n = a.n();
    let a_star = a.adjoint();
    let b_star = b.adjoint();
    let base = 1.0 + a.frobenius_norm();
    // breadth-first by length; extending in ('a', 'b') order keeps each
    // level lexicographically sorted
    let mut level: Vec<(String, Matrix, Matrix)> =
        vec![(String::new(), Matrix::identity(n), Matrix::identity(n))];
    for len in 1..=max_len {
        let threshold = tol.eq_tol * base.powi(len as i32);
        let mut next = Vec::with_capacity(level.len() * 2);
        for (word, pa, pb) in &level {
            for (ch, fa, fb) in [('a', a, b), ('b', &a_star, &b_star)] {
                let qa = pa.mul(fa);
                let qb = pb.mul(fb);
                if (qa.trace() - qb.trace()).norm() > threshold {
                    let mut w = word.clone();
                    w.push(ch);
                    return Ok(Some(Word(w)));
                }
                let mut w = word.clone();
                w.push(ch);
                next.push((w, qa, qb));
            }
        }
        level = next;
    }
    Ok(None)
}

/// Operator norm of the pencil `H0 (x) I + H1 (x) A`.
pub fn pencil_norm(h0: &Matrix, h1: &Matrix, a: &Matrix, tol: &Tolerances) -> Result<f64> {
    if h0.n() != h1.n() {
        return Err(Error::DimensionMismatch {
            expected: h0.n(),
            got: h1.n(),
        });
    }
    let eye = Matrix::identity(a.n());
    let pencil = h0.kron(&eye).add(&h1.kron(a));
    pencil.operator_norm(tol)
}

/// Randomized search for a pencil `(H0, H1)` whose operator norms on `a`
/// and `b` differ; a found pair certifies non-similarity, absence proves
/// nothing. Samples with independent standard complex Gaussian entries
/// from the given seed. Trials where the power iteration does not
/// converge on either side are skipped.
pub fn arveson_compare(
    a: &Matrix,
    b: &Matrix,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<(bool, Option<(Matrix, Matrix)>)> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let threshold = tol.eq_tol * (1.0 + a.frobenius_norm() + b.frobenius_norm());
    for _ in 0..trials {
        let h0 = gaussian_matrix(n, &mut rng);
        let h1 = gaussian_matrix(n, &mut rng);
        let pa = pencil_norm(&h0, &h1, a, tol);
        let pb = pencil_norm(&h0, &h1, b, tol);
        if let (Ok(pa), Ok(pb)) = (pa, pb) {
            if (pa - pb).abs() > threshold {
                return Ok((false, Some((h0, h1))));
            }
        }
    }
    Ok((true, None))
}
