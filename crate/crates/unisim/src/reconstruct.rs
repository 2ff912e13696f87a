//! The inverse problem: rebuild the unique positive-superdiagonal matrix
//! from its Gram family.
//!
//! Two constructive algorithms are implemented, one for single-eigenvalue
//! (indecomposable) matrices and one for general-position matrices with
//! distinct eigenvalues. Both walk column by column: norms and inner
//! products of polynomial images are read off the Gram blocks as quadratic
//! and bilinear forms in the polynomial coefficients, and each unknown
//! entry is isolated in a single linear equation whose pivot is nonzero
//! exactly when the generating matrix was in class.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::{gram_family, GramBlock, GramFamily};
use crate::matrix::{Matrix, Tolerances};
use crate::poly::Polynomial;

/// Which step of the reconstruction recovered an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepTag {
    Diagonal,
    Superdiagonal,
    LastColumn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredEntry {
    /// Zero-based row and column.
    pub row: usize,
    pub col: usize,
    #[serde(with = "crate::matrix::serde_complex")]
    pub value: Complex64,
    pub step: StepTag,
}

/// Audit trail of a reconstruction, in the order the steps ran: the
/// diagonal, then per size the superdiagonal entry followed by the
/// remaining last-column entries from the bottom up. `residuals` holds
/// one relative Gram-family mismatch per completed size.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReconstructionTrace {
    #[serde(with = "crate::matrix::serde_complex_vec")]
    pub recovered_diagonal: Vec<Complex64>,
    pub recovered_entries: Vec<RecoveredEntry>,
    pub residuals: Vec<f64>,
}

/// `(f(A), g(A))` read off the Gram block, together with the absolute
/// term sum that bounds its rounding noise.
fn bilinear(block: &GramBlock, f: &Polynomial, g: &Polynomial) -> (Complex64, f64) {
    let dim = block.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut termsum = 0.0;
    for p in 0..dim {
        let fp = f.coeff(p);
        if fp == Complex64::new(0.0, 0.0) {
            continue;
        }
        for q in 0..dim {
            let gq = g.coeff(q);
            if gq == Complex64::new(0.0, 0.0) {
                continue;
            }
            let term = fp * gq.conj() * block.get(p, q);
            acc += term;
            termsum += fp.norm() * gq.norm() * block.get(p, q).norm();
        }
    }
    (acc, termsum)
}

/// Square root of a quadratic-form value: tiny negatives (relative to the
/// term sum) clamp to zero, larger negatives mean the block is not a Gram
/// family.
fn sqrt_clamped(value: f64, termsum: f64, tol: &Tolerances) -> Result<f64> {
    if value < -tol.eq_tol * (1.0 + termsum) {
        return Err(Error::MalformedBlock(format!(
            "negative squared norm {value:.3e}"
        )));
    }
    Ok(value.max(0.0).sqrt())
}

/// Monic polynomial of least degree annihilating the block, found as the
/// lowest-degree near-null vector of the leading principal sections of
/// the Gram matrix.
///
/// The search runs on data rescaled by the matrix norm so that the
/// least-squares sections stay as well conditioned as the encoding
/// allows.
pub fn minimal_polynomial(block: &GramBlock, tol: &Tolerances) -> Result<Polynomial> {
    let k = block.k;
    for d in 1..=k {
        if let Some(p) = monic_annihilator(block, d, tol)? {
            return Ok(p);
        }
    }
    Err(Error::MalformedBlock(format!(
        "no annihilator up to degree {k}"
    )))
}

/// Least-squares monic annihilator of exact degree `d`, or `None` when
/// the best candidate leaves a residual above tolerance.
fn monic_annihilator(
    block: &GramBlock,
    d: usize,
    tol: &Tolerances,
) -> Result<Option<Polynomial>> {
    // rescale by ||A|| = sqrt(G[1][1]) to tame the powers
    let s = block.get(1, 1).re.max(0.0).sqrt().max(1.0);
    let mut spow = vec![1.0f64; 2 * block.dim()];
    for i in 1..spow.len() {
        spow[i] = spow[i - 1] * s;
    }
    let scaled = |i: usize, j: usize| block.get(i, j) / spow[i + j];

    // minimize |x^d + sum_{i<d} c_i x^i|^2 over the block's form:
    // for each j < d: sum_i c_i G[i][j] = -G[d][j]
    let mut sys = Matrix::zeros(d);
    let mut rhs = vec![Complex64::new(0.0, 0.0); d];
    for j in 0..d {
        for i in 0..d {
            sys[(j, i)] = scaled(i, j);
        }
        rhs[j] = -scaled(d, j);
    }
    let coeffs = match sys.solve(&rhs) {
        Ok(c) => c,
        Err(_) => return Ok(None),
    };
    let mut full: Vec<Complex64> = coeffs;
    full.push(Complex64::new(1.0, 0.0));

    let mut value = Complex64::new(0.0, 0.0);
    let mut termscale = 0.0;
    for (i, ci) in full.iter().enumerate() {
        termscale += ci.norm_sqr() * scaled(i, i).re.abs();
        for (j, cj) in full.iter().enumerate() {
            value += ci * cj.conj() * scaled(i, j);
        }
    }
    if value.re.abs() > tol.eq_tol * (termscale + f64::MIN_POSITIVE) {
        return Ok(None);
    }
    // undo the rescaling: c_i <- c_i * s^(d - i)
    let unscaled: Vec<Complex64> = full
        .iter()
        .enumerate()
        .map(|(i, ci)| ci * spow[d - i])
        .collect();
    Ok(Some(Polynomial::new(unscaled)))
}

/// Relative annihilation residual of `h` on the block: the quadratic-form
/// value of `||h(A)||^2` divided by its term sum.
fn annihilation_residual(block: &GramBlock, h: &Polynomial) -> f64 {
    let (value, termsum) = bilinear(block, h, h);
    value.re.abs() / (termsum + f64::MIN_POSITIVE)
}

fn shifted_block(a: &Matrix, lambda: Complex64) -> Matrix {
    let n = a.n();
    a.sub(&Matrix::identity(n).scale(lambda))
}

/// Relative entrywise mismatch between the family of the reconstructed
/// leading block and the input family, over all sizes up to `m`.
fn family_residual(a: &Matrix, m: usize, f: &GramFamily) -> f64 {
    let sub = a.principal_submatrix(m).expect("m <= n");
    let rebuilt = gram_family(&sub);
    let mut worst = 0.0f64;
    for k in 1..=m {
        let ba = rebuilt.block(k).expect("k <= m");
        let bb = f.block(k).expect("k <= m");
        let scale = 1.0 + bb.frobenius_norm();
        for i in 0..ba.dim() {
            for j in 0..ba.dim() {
                worst = worst.max((ba.get(i, j) - bb.get(i, j)).norm() / scale);
            }
        }
    }
    worst
}

/// Rebuilds the unique matrix with a single eigenvalue and positive real
/// superdiagonal whose Gram family matches `f`.
pub fn reconstruct_indecomposable(
    f: &GramFamily,
    tol: &Tolerances,
) -> Result<(Matrix, ReconstructionTrace)> {
    let n = f.n;
    if n == 0 {
        return Err(Error::InvalidParameter("empty family".into()));
    }
    let lambda = f.block(n)?.get(1, 0) / n as f64;

    // class detection: (x - lambda)^k annihilates every block
    let mut worst_annihilation = 0.0f64;
    for k in 1..=n {
        let h = Polynomial::from_roots(&vec![lambda; k]);
        let r = annihilation_residual(f.block(k)?, &h);
        worst_annihilation = worst_annihilation.max(r);
        if r > tol.eq_tol {
            return Err(Error::NotInClass(format!(
                "(x - {lambda})^{k} does not annihilate block {k} (residual {r:.3e})"
            )));
        }
    }

    let mut trace = ReconstructionTrace {
        recovered_diagonal: vec![lambda; n],
        ..Default::default()
    };
    trace.residuals.push(worst_annihilation);

    let mut a = Matrix::identity(n).scale(lambda);
    // prods[j]: product of the first j recovered superdiagonal entries
    let mut prods = vec![1.0f64; n];
    for m in 2..=n {
        let blk = f.block(m)?;
        let w_top = Polynomial::from_roots(&vec![lambda; m - 1]);
        let (c_sq, c_scale) = bilinear(blk, &w_top, &w_top);
        let c_prod = sqrt_clamped(c_sq.re, c_scale, tol)?;
        let pivot = prods[m - 2];
        if pivot <= tol.zero_tol {
            return Err(Error::DegenerateStep(format!(
                "superdiagonal product through column {} vanishes",
                m - 1
            )));
        }
        let sup = c_prod / pivot;
        a[(m - 2, m - 1)] = Complex64::new(sup, 0.0);
        trace.recovered_entries.push(RecoveredEntry {
            row: m - 2,
            col: m - 1,
            value: a[(m - 2, m - 1)],
            step: StepTag::Superdiagonal,
        });
        prods[m - 1] = prods[m - 2] * sup;

        if c_prod <= tol.zero_tol {
            return Err(Error::DegenerateStep(format!(
                "norm of the top power of block {m} vanishes"
            )));
        }
        for r in (1..=m.saturating_sub(2)).rev() {
            // (B^r)_(1,m) = (B^r, B^(m-1)) / ||B^(m-1)||
            let w_r = Polynomial::from_roots(&vec![lambda; r]);
            let (ip, _) = bilinear(blk, &w_r, &w_top);
            let b_top_entry = ip / c_prod;
            // paths that avoid the unknown entry, from what is known so far
            let sub = a.principal_submatrix(m)?;
            let shifted = shifted_block(&sub, lambda);
            let mut pow = Matrix::identity(m);
            for _ in 0..r {
                pow = pow.mul(&shifted);
            }
            let known = pow.get(0, m - 1);
            let coeff = prods[r - 1];
            if coeff <= tol.zero_tol {
                return Err(Error::DegenerateStep(format!(
                    "pivot product for entry ({}, {}) vanishes",
                    r - 1,
                    m - 1
                )));
            }
            let value = (b_top_entry - known) / coeff;
            a[(r - 1, m - 1)] = value;
            trace.recovered_entries.push(RecoveredEntry {
                row: r - 1,
                col: m - 1,
                value,
                step: StepTag::LastColumn,
            });
        }
        trace.residuals.push(family_residual(&a, m, f));
    }
    Ok((a, trace))
}

/// Degree-`k` monic annihilator of block `k`; with distinct eigenvalues
/// this is both the minimal and the characteristic polynomial.
fn characteristic_from_block(
    block: &GramBlock,
    tol: &Tolerances,
) -> Result<Polynomial> {
    match monic_annihilator(block, block.k, tol)? {
        Some(p) => Ok(p),
        None => Err(Error::NotInClass(format!(
            "block {} has no degree-{} annihilator",
            block.k, block.k
        ))),
    }
}

/// Rebuilds the unique general-position matrix with positive real
/// superdiagonal whose Gram family matches `f`.
pub fn reconstruct_general_position(
    f: &GramFamily,
    tol: &Tolerances,
) -> Result<(Matrix, ReconstructionTrace)> {
    let n = f.n;
    if n == 0 {
        return Err(Error::InvalidParameter("empty family".into()));
    }

    // eigenvalues from minimal-polynomial ratios: mu_k / mu_{k-1} = x - lambda_k
    let mut mus = Vec::with_capacity(n + 1);
    mus.push(Polynomial::one());
    for k in 1..=n {
        mus.push(characteristic_from_block(f.block(k)?, tol)?);
    }
    let mut lambdas = Vec::with_capacity(n);
    let mut trace = ReconstructionTrace::default();
    for k in 1..=n {
        let (q, rem) = mus[k].div_rem(&mus[k - 1])?;
        if q.degree() != 1 {
            return Err(Error::MalformedBlock(format!(
                "minimal polynomial ratio at size {k} is not linear"
            )));
        }
        let lam = -q.coeff(0) / q.coeff(1);
        let rem_norm: f64 = rem.coeffs().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        trace.residuals.push(rem_norm);
        lambdas.push(lam);
    }
    let lscale = 1.0 + lambdas.iter().map(|l| l.norm()).fold(0.0, f64::max);
    for i in 0..n {
        for j in i + 1..n {
            if (lambdas[i] - lambdas[j]).norm() <= tol.lex_tol * lscale {
                return Err(Error::NotInClass(format!(
                    "eigenvalues {i} and {j} coincide"
                )));
            }
        }
    }
    trace.recovered_diagonal = lambdas.clone();

    let mut a = Matrix::zeros(n);
    for i in 0..n {
        a[(i, i)] = lambdas[i];
    }
    if n == 1 {
        trace.residuals.push(family_residual(&a, 1, f));
        return Ok((a, trace));
    }

    // a_12 from ||A_2||^2 = |l_1|^2 + |l_2|^2 + a_12^2
    let b2 = f.block(2)?;
    let rad = b2.get(1, 1).re - lambdas[0].norm_sqr() - lambdas[1].norm_sqr();
    let a12 = sqrt_clamped(rad, b2.get(1, 1).re.abs(), tol)?;
    if a12 <= tol.zero_tol {
        return Err(Error::NotInClass("superdiagonal entry (0, 1) vanishes".into()));
    }
    a[(0, 1)] = Complex64::new(a12, 0.0);
    trace.recovered_entries.push(RecoveredEntry {
        row: 0,
        col: 1,
        value: a[(0, 1)],
        step: StepTag::Superdiagonal,
    });
    trace.residuals.push(family_residual(&a, 2, f));

    for m in 3..=n {
        recover_column_general_position(&mut a, f, &lambdas, m, tol, &mut trace)?;
        trace.residuals.push(family_residual(&a, m, f));
    }
    Ok((a, trace))
}

/// Product of shifted copies of the known leading block:
/// `prod_{t in indices} (A_known - lambda_t I)` on size `dim`.
fn shifted_product(a: &Matrix, lambdas: &[Complex64], indices: &[usize], dim: usize) -> Matrix {
    let sub = a.principal_submatrix(dim).expect("dim <= n");
    let mut acc = Matrix::identity(dim);
    for &t in indices {
        acc = acc.mul(&shifted_block(&sub, lambdas[t]));
    }
    acc
}

/// Recovers column `m` (1-based) of a general-position matrix whose
/// leading `(m-1)`-block is already known.
fn recover_column_general_position(
    a: &mut Matrix,
    f: &GramFamily,
    lambdas: &[Complex64],
    m: usize,
    tol: &Tolerances,
    trace: &mut ReconstructionTrace,
) -> Result<()> {
    let blk = f.block(m)?;
    let col = m - 1; // zero-based column being recovered
    let km1 = m - 1; // size of the known leading block

    // v: last column of G^(m, m-1) restricted to the known block
    let g_top = shifted_product(a, lambdas, &(0..m - 2).collect::<Vec<_>>(), km1);
    let v: Vec<Complex64> = (0..km1).map(|i| g_top.get(i, km1 - 1)).collect();
    let v_norm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if v_norm_sq.sqrt() <= tol.zero_tol {
        return Err(Error::NotInClass(format!(
            "pivot column of G^({m},{}) vanishes",
            m - 1
        )));
    }

    // a_{m-1,m} from ||B^(m-1)||^2 = ||leading block||^2 + ||v||^2 a^2
    let mut top_roots: Vec<Complex64> = (0..m - 2).map(|t| lambdas[t]).collect();
    top_roots.push(lambdas[m - 1]);
    let poly_b_top = Polynomial::from_roots(&top_roots);
    let (fam_sq, fam_scale) = bilinear(blk, &poly_b_top, &poly_b_top);
    let mut lead_idx: Vec<usize> = (0..m - 2).collect();
    lead_idx.push(m - 1);
    let b_top_lead = shifted_product(a, lambdas, &lead_idx, km1);
    let direct_sq = b_top_lead.frobenius_norm().powi(2);
    let rad = fam_sq.re - direct_sq;
    let sup = sqrt_clamped(rad, fam_scale + direct_sq, tol)? / v_norm_sq.sqrt();
    if sup <= tol.zero_tol {
        return Err(Error::NotInClass(format!(
            "superdiagonal entry ({}, {}) vanishes",
            m - 2,
            col
        )));
    }
    a[(m - 2, col)] = Complex64::new(sup, 0.0);
    trace.recovered_entries.push(RecoveredEntry {
        row: m - 2,
        col,
        value: a[(m - 2, col)],
        step: StepTag::Superdiagonal,
    });

    // C = G^(m,1): first row (c_1 .. c_{m-1}) from the known block
    let c_eval = shifted_product(a, lambdas, &(1..m).collect::<Vec<_>>(), km1);
    let mut c_row: Vec<Complex64> = (0..km1).map(|j| c_eval.get(0, j)).collect();

    // c_m from (B^(m-1), C)
    let poly_c = Polynomial::from_roots(&(1..m).map(|t| lambdas[t]).collect::<Vec<_>>());
    let (ip_top, _) = bilinear(blk, &poly_b_top, &poly_c);
    let b_top_last = v[0] * sup; // B^(m-1)_(1,m) = v_1 a_{m-1,m}
    if b_top_last.norm() <= tol.zero_tol {
        return Err(Error::NotInClass(format!(
            "pivot g^({km1},{km1})_(1,{km1}) vanishes"
        )));
    }
    let mut acc = ip_top;
    for j in 0..km1 {
        acc -= b_top_lead.get(0, j) * c_row[j].conj();
    }
    let c_m = (acc / b_top_last).conj();
    c_row.push(c_m);

    // entries a_{rm} for r = m-2 .. 2 (1-based)
    for r in (2..=m - 2).rev() {
        let mut roots: Vec<Complex64> = (0..r - 1).map(|t| lambdas[t]).collect();
        roots.push(lambdas[m - 1]);
        let poly_b_r = Polynomial::from_roots(&roots);
        let (ip_r, _) = bilinear(blk, &poly_b_r, &poly_c);
        if c_m.norm() <= tol.zero_tol {
            return Err(Error::NotInClass(format!(
                "pivot g^({m},1)_(1,{m}) vanishes"
            )));
        }
        let mut idx: Vec<usize> = (0..r - 1).collect();
        idx.push(m - 1);
        let b_r_lead = shifted_product(a, lambdas, &idx, km1);
        let mut rem = ip_r;
        for j in 0..km1 {
            rem -= b_r_lead.get(0, j) * c_row[j].conj();
        }
        // the remainder is b^(r)_(1,m) * conj(c_m)
        let b_r_last = rem / c_m.conj();
        // b^(r)_(1,m) = sum_{l=r..m-1} g^(m,r)_(1,l) a_{lm}
        let g_eval = shifted_product(a, lambdas, &(0..r - 1).collect::<Vec<_>>(), km1);
        let mut known = Complex64::new(0.0, 0.0);
        for l in r + 1..=km1 {
            known += g_eval.get(0, l - 1) * a.get(l - 1, col);
        }
        let pivot = g_eval.get(0, r - 1);
        if pivot.norm() <= tol.zero_tol {
            return Err(Error::NotInClass(format!(
                "pivot g^({r},{r})_(1,{r}) vanishes"
            )));
        }
        let value = (b_r_last - known) / pivot;
        a[(r - 1, col)] = value;
        trace.recovered_entries.push(RecoveredEntry {
            row: r - 1,
            col,
            value,
            step: StepTag::LastColumn,
        });
    }

    // r = 1: c_m = sum_l d_{1l} a_{lm} with D = (A-l_2)...(A-l_{m-1})
    let d_eval = shifted_product(a, lambdas, &(1..m - 1).collect::<Vec<_>>(), km1);
    let mut known = Complex64::new(0.0, 0.0);
    for l in 2..=km1 {
        known += d_eval.get(0, l - 1) * a.get(l - 1, col);
    }
    let d11 = d_eval.get(0, 0);
    if d11.norm() <= tol.zero_tol {
        return Err(Error::NotInClass(
            "pivot product of eigenvalue gaps vanishes".into(),
        ));
    }
    let value = (c_m - known) / d11;
    a[(0, col)] = value;
    trace.recovered_entries.push(RecoveredEntry {
        row: 0,
        col,
        value,
        step: StepTag::LastColumn,
    });
    Ok(())
}
