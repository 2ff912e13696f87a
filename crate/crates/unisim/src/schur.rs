//! Unitary triangularization with a prescribed diagonal order, plus the
//! positive-superdiagonal canonical normalization.
//!
//! The triangularization runs Householder reduction to Hessenberg form
//! followed by Wilkinson-shifted QR, then sorts the diagonal into the
//! lexicographic order of [`lex_leq`] with unitary adjacent swaps.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{lex_leq, Matrix, Tolerances};

/// A matrix carrying the unitarity contract `||U* U - I|| <= eq_tol * n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix(Matrix);

impl UnitaryMatrix {
    /// Wraps `u` after checking the unitarity residual.
    pub fn new(u: Matrix, tol: &Tolerances) -> Result<Self> {
        let n = u.n();
        let residual = u.adjoint().mul(&u).sub(&Matrix::identity(n)).frobenius_norm();
        if residual > tol.eq_tol * n as f64 {
            return Err(Error::NotInClass(format!(
                "unitarity residual {residual:.3e} exceeds bound"
            )));
        }
        Ok(Self(u))
    }

    pub(crate) fn new_unchecked(u: Matrix) -> Self {
        Self(u)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn unitarity_residual(&self) -> f64 {
        let n = self.0.n();
        self.0
            .adjoint()
            .mul(&self.0)
            .sub(&Matrix::identity(n))
            .frobenius_norm()
    }
}

/// Result of a unitary triangularization: `U* A U = T`.
#[derive(Debug, Clone)]
pub struct SchurForm {
    pub u: UnitaryMatrix,
    pub t: Matrix,
    /// `||A||` of the producing matrix, kept for relative checks.
    pub source_norm: f64,
}

/// Iteration cap per eigenvalue in the QR loop, times `n`.
const QR_ITERATIONS_PER_EIGENVALUE: usize = 100;

/// Complex Givens rotation `[c s; -conj(s) c]` with real `c >= 0` mapping
/// `(f, g)` to `(r, 0)`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    if g == zero {
        return (1.0, zero);
    }
    if f == zero {
        return (0.0, g.conj() / g.norm());
    }
    let d = (f.norm_sqr() + g.norm_sqr()).sqrt();
    let c = f.norm() / d;
    let phase = f / f.norm();
    let s = phase * g.conj() / d;
    (c, s)
}

/// Householder reduction to upper Hessenberg form; returns the accumulated
/// unitary with `U* A U = H` stored in `(u, h)`.
fn hessenberg(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.n();
    let mut h = a.clone();
    let mut u = Matrix::identity(n);
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut x: Vec<Complex64> = (0..m).map(|i| h.get(k + 1 + i, k)).collect();
        let norm_x = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x <= f64::MIN_POSITIVE {
            continue;
        }
        let phase = if x[0] == zero {
            Complex64::new(1.0, 0.0)
        } else {
            x[0] / x[0].norm()
        };
        let alpha = -phase * norm_x;
        x[0] -= alpha;
        let vnorm_sq = x.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if vnorm_sq <= f64::MIN_POSITIVE {
            continue;
        }
        let tau = 2.0 / vnorm_sq;
        let v = x;

        // Left: rows k+1..n, columns k..n.
        for j in k..n {
            let dot: Complex64 = (0..m).map(|i| v[i].conj() * h.get(k + 1 + i, j)).sum();
            let f = dot * tau;
            for i in 0..m {
                let val = h.get(k + 1 + i, j) - f * v[i];
                h[(k + 1 + i, j)] = val;
            }
        }
        // Right: columns k+1..n, all rows.
        for i in 0..n {
            let dot: Complex64 = (0..m).map(|j| h.get(i, k + 1 + j) * v[j]).sum();
            let f = dot * tau;
            for j in 0..m {
                let val = h.get(i, k + 1 + j) - f * v[j].conj();
                h[(i, k + 1 + j)] = val;
            }
        }
        // Accumulate U <- U P.
        for i in 0..n {
            let dot: Complex64 = (0..m).map(|j| u.get(i, k + 1 + j) * v[j]).sum();
            let f = dot * tau;
            for j in 0..m {
                let val = u.get(i, k + 1 + j) - f * v[j].conj();
                u[(i, k + 1 + j)] = val;
            }
        }
        // The reflector annihilates these by construction.
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = zero;
        }
    }
    (u, h)
}

/// Eigenvalue of the trailing 2x2 block closest to its bottom-right entry.
fn wilkinson_shift(h: &Matrix, hi: usize) -> Complex64 {
    let a = h.get(hi - 1, hi - 1);
    let b = h.get(hi - 1, hi);
    let c = h.get(hi, hi - 1);
    let d = h.get(hi, hi);
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR sweep on the active window `[lo, hi]`.
fn qr_step(h: &mut Matrix, u: &mut Matrix, lo: usize, hi: usize, shift: Complex64) {
    let n = h.n();
    for k in lo..=hi {
        let val = h.get(k, k) - shift;
        h[(k, k)] = val;
    }
    let mut rotations = Vec::with_capacity(hi - lo);
    for k in lo..hi {
        let (c, s) = givens(h.get(k, k), h.get(k + 1, k));
        rotations.push((c, s));
        for j in k..n {
            let top = h.get(k, j);
            let bot = h.get(k + 1, j);
            h[(k, j)] = top * c + bot * s;
            h[(k + 1, j)] = -top * s.conj() + bot * c;
        }
        h[(k + 1, k)] = Complex64::new(0.0, 0.0);
    }
    for (idx, &(c, s)) in rotations.iter().enumerate() {
        let k = lo + idx;
        // Right-multiply by the rotation's adjoint on columns (k, k+1).
        for i in 0..=(k + 1).min(hi) {
            let left = h.get(i, k);
            let right = h.get(i, k + 1);
            h[(i, k)] = left * c + right * s.conj();
            h[(i, k + 1)] = -left * s + right * c;
        }
        for i in 0..lo {
            let left = h.get(i, k);
            let right = h.get(i, k + 1);
            h[(i, k)] = left * c + right * s.conj();
            h[(i, k + 1)] = -left * s + right * c;
        }
        for i in 0..n {
            let left = u.get(i, k);
            let right = u.get(i, k + 1);
            u[(i, k)] = left * c + right * s.conj();
            u[(i, k + 1)] = -left * s + right * c;
        }
    }
    for k in lo..=hi {
        let val = h.get(k, k) + shift;
        h[(k, k)] = val;
    }
}

/// Unitary triangularization with the diagonal sorted per [`lex_leq`].
pub fn triangularize_lex(a: &Matrix, tol: &Tolerances) -> Result<SchurForm> {
    let n = a.n();
    let source_norm = a.frobenius_norm();
    if n <= 1 {
        return Ok(SchurForm {
            u: UnitaryMatrix::new_unchecked(Matrix::identity(n)),
            t: a.clone(),
            source_norm,
        });
    }
    let (mut u, mut h) = hessenberg(a);
    // Floor keeps deflation alive when both neighboring diagonal entries
    // are themselves near zero (nilpotent blocks).
    let floor = f64::EPSILON * source_norm.max(1.0);
    let subdiag_negligible = |h: &Matrix, m: usize| -> bool {
        let local = h.get(m - 1, m - 1).norm() + h.get(m, m).norm();
        let thresh = (tol.zero_tol * local).max(floor);
        h.get(m, m - 1).norm() <= thresh
    };

    let mut hi = n - 1;
    let mut iters_this_eig = 0usize;
    let cap = QR_ITERATIONS_PER_EIGENVALUE * n;
    loop {
        if hi == 0 {
            break;
        }
        if subdiag_negligible(&h, hi) {
            h[(hi, hi - 1)] = Complex64::new(0.0, 0.0);
            hi -= 1;
            iters_this_eig = 0;
            continue;
        }
        let mut lo = hi;
        while lo > 0 && !subdiag_negligible(&h, lo) {
            lo -= 1;
        }
        if lo > 0 {
            h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
        }
        if iters_this_eig >= cap {
            return Err(Error::NonConvergence { iterations: cap });
        }
        let shift = wilkinson_shift(&h, hi);
        qr_step(&mut h, &mut u, lo, hi, shift);
        iters_this_eig += 1;
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    let form = SchurForm {
        u: UnitaryMatrix::new_unchecked(u),
        t: h,
        source_norm,
    };
    Ok(reorder_diagonal(form, tol))
}

/// Sorts `diag(T)` into lexicographic order by unitary adjacent swaps,
/// updating `U` so that `U* A U = T` keeps holding. Entries that tie
/// within `lex_tol` are left in place.
pub fn reorder_diagonal(f: SchurForm, tol: &Tolerances) -> SchurForm {
    let mut t = f.t;
    let mut u = f.u.into_matrix();
    let n = t.n();
    for _pass in 0..n + 1 {
        let mut swapped = false;
        for i in 0..n.saturating_sub(1) {
            if lex_leq(t.get(i, i), t.get(i + 1, i + 1), tol) {
                continue;
            }
            swap_adjacent(&mut t, &mut u, i);
            swapped = true;
        }
        if !swapped {
            break;
        }
    }
    SchurForm {
        u: UnitaryMatrix::new_unchecked(u),
        t,
        source_norm: f.source_norm,
    }
}

/// Unitary swap of diagonal entries `i` and `i+1` of the triangular `t`.
fn swap_adjacent(t: &mut Matrix, u: &mut Matrix, i: usize) {
    let n = t.n();
    let x = t.get(i, i + 1);
    let delta = t.get(i + 1, i + 1) - t.get(i, i);
    // (x, delta) spans the eigenvector of the trailing diagonal entry.
    let nv = (x.norm_sqr() + delta.norm_sqr()).sqrt();
    if nv <= f64::MIN_POSITIVE {
        return;
    }
    let g00 = x / nv;
    let g10 = delta / nv;
    // G = [[g00, -conj(g10)], [g10, conj(g00)]], first column the eigenvector.
    for j in 0..n {
        let top = t.get(i, j);
        let bot = t.get(i + 1, j);
        t[(i, j)] = g00.conj() * top + g10.conj() * bot;
        t[(i + 1, j)] = -g10 * top + g00 * bot;
    }
    for r in 0..=i + 1 {
        let left = t.get(r, i);
        let right = t.get(r, i + 1);
        t[(r, i)] = left * g00 + right * g10;
        t[(r, i + 1)] = -left * g10.conj() + right * g00.conj();
    }
    for r in 0..n {
        let left = u.get(r, i);
        let right = u.get(r, i + 1);
        u[(r, i)] = left * g00 + right * g10;
        u[(r, i + 1)] = -left * g10.conj() + right * g00.conj();
    }
    t[(i + 1, i)] = Complex64::new(0.0, 0.0);
}

/// Conjugates a triangular `T` by a diagonal unitary so that every first
/// superdiagonal entry becomes positive real. Errors with `NotInClass` when
/// a superdiagonal entry vanishes.
pub fn positive_superdiagonal_normalize(
    t: &Matrix,
    tol: &Tolerances,
) -> Result<(UnitaryMatrix, Matrix)> {
    let n = t.n();
    let scale = t.frobenius_norm().max(1.0);
    let mut d = vec![Complex64::new(1.0, 0.0); n];
    for i in 0..n.saturating_sub(1) {
        let s = t.get(i, i + 1);
        if s.norm() <= tol.zero_tol * scale {
            return Err(Error::NotInClass(format!(
                "superdiagonal entry ({}, {}) vanishes",
                i,
                i + 1
            )));
        }
        let phase = s / s.norm();
        d[i + 1] = d[i] * phase.conj();
    }
    let mut out = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            out[(i, j)] = d[i].conj() * t.get(i, j) * d[j];
        }
    }
    for i in 0..n.saturating_sub(1) {
        // exact by construction; kill phase rounding
        out[(i, i + 1)] = Complex64::new(t.get(i, i + 1).norm(), 0.0);
    }
    let mut dm = Matrix::zeros(n);
    for i in 0..n {
        dm[(i, i)] = d[i];
    }
    Ok((UnitaryMatrix::new_unchecked(dm), out))
}

/// Relative diagonal-spread radius below which a computed triangular form
/// is treated as having a single eigenvalue. Defective eigenvalues blur
/// like `eps^(1/k)` under any backward-stable triangularization, so this
/// radius is far coarser than `lex_tol`.
pub const EIGENVALUE_CLUSTER_SPREAD: f64 = 0.05;

fn diag_single_cluster(t: &Matrix) -> bool {
    let diag = t.diagonal();
    let scale = 1.0 + diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            if (diag[i] - diag[j]).norm() > EIGENVALUE_CLUSTER_SPREAD * scale {
                return false;
            }
        }
    }
    true
}

/// Triangularization of a single-eigenvalue matrix through its invariant
/// flag `range(N^(n-1)) < range(N^(n-2)) < ...` with `N = A - lambda I`.
///
/// This avoids the QR route entirely: the eigenvalue comes from the trace
/// (perfectly conditioned) and the flag is stable whenever the matrix is
/// indecomposable, whereas QR-computed eigenvalues of a Jordan-type
/// spectrum carry `eps^(1/k)` blur that would poison the canonical form.
fn flag_canonicalize(
    a: &Matrix,
    lambda: Complex64,
    tol: &Tolerances,
) -> Result<(UnitaryMatrix, Matrix)> {
    let n = a.n();
    let shift = a.sub(&Matrix::identity(n).scale(lambda));
    let mut powers = vec![Matrix::identity(n)];
    for j in 1..n {
        let next = powers[j - 1].mul(&shift);
        powers.push(next);
    }
    let mut q_cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for j in (0..n).rev() {
        let p = &powers[j];
        let p_scale = p.frobenius_norm();
        for col in 0..n {
            if q_cols.len() == n {
                break;
            }
            let mut v: Vec<Complex64> = (0..n).map(|i| p.get(i, col)).collect();
            let v0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if v0 <= 1e-13 * (1.0 + p_scale) {
                continue;
            }
            // Two Gram-Schmidt passes keep orthogonality near machine level.
            for _ in 0..2 {
                for q in &q_cols {
                    let d: Complex64 = q.iter().zip(&v).map(|(qi, vi)| qi.conj() * vi).sum();
                    for (vi, qi) in v.iter_mut().zip(q) {
                        *vi -= d * qi;
                    }
                }
            }
            let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if vn > 1e-6 * v0 {
                q_cols.push(v.into_iter().map(|z| z / vn).collect());
            }
        }
    }
    if q_cols.len() != n {
        return Err(Error::NotInClass("invariant flag is incomplete".into()));
    }
    let mut q = Matrix::zeros(n);
    for (j, col) in q_cols.iter().enumerate() {
        for i in 0..n {
            q[(i, j)] = col[i];
        }
    }
    let mut t = q.adjoint().mul(a).mul(&q);
    let scale = a.frobenius_norm().max(1.0);
    for i in 0..n {
        for j in 0..i {
            if t.get(i, j).norm() > 1e-6 * scale {
                return Err(Error::NotInClass(
                    "flag conjugation did not triangularize".into(),
                ));
            }
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
        if (t.get(i, i) - lambda).norm() > EIGENVALUE_CLUSTER_SPREAD * scale {
            return Err(Error::NotInClass("diagonal strays from the cluster".into()));
        }
        t[(i, i)] = lambda;
    }
    let (d, canon) = positive_superdiagonal_normalize(&t, tol)?;
    let v = q.mul(d.matrix());
    Ok((UnitaryMatrix::new_unchecked(v), canon))
}

/// Canonical representative of the unitary similarity class: lex-ordered
/// diagonal and positive real superdiagonal. Also returns the unitary `V`
/// with `V* A V` equal to the canonical form.
pub fn canonicalize_with_unitary(
    a: &Matrix,
    tol: &Tolerances,
) -> Result<(UnitaryMatrix, Matrix)> {
    let form = triangularize_lex(a, tol)?;
    if a.n() > 0 && diag_single_cluster(&form.t) {
        let lambda = a.trace() / a.n() as f64;
        match flag_canonicalize(a, lambda, tol) {
            Ok(out) => return Ok(out),
            // fall back to the QR-derived form below
            Err(Error::NotInClass(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let (d, canon) = positive_superdiagonal_normalize(&form.t, tol)?;
    let v = form.u.matrix().mul(d.matrix());
    Ok((UnitaryMatrix::new_unchecked(v), canon))
}

/// Canonical form alone; `NotInClass` when a superdiagonal entry of the
/// triangularization vanishes.
pub fn littlewood_canonical(a: &Matrix, tol: &Tolerances) -> Result<Matrix> {
    canonicalize_with_unitary(a, tol).map(|(_, c)| c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_dense(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let data = (0..n * n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Matrix::new(n, data).unwrap()
    }

    fn check_form(a: &Matrix, f: &SchurForm, tol: &Tolerances) {
        let n = a.n();
        assert!(f.u.unitarity_residual() <= 1e-10 * n as f64, "U not unitary");
        let recon = f.u.matrix().adjoint().mul(a).mul(f.u.matrix());
        assert!(
            recon.max_abs_diff(&f.t) <= 1e-8 * a.frobenius_norm().max(1.0),
            "U*AU != T"
        );
        assert!(f.t.is_upper_triangular(1e-8));
        for i in 0..n.saturating_sub(1) {
            assert!(
                lex_leq(f.t.get(i, i), f.t.get(i + 1, i + 1), tol),
                "diagonal not lex ordered: {} then {}",
                f.t.get(i, i),
                f.t.get(i + 1, i + 1)
            );
        }
    }

    #[test]
    fn triangular_ordered_input_passes_through() {
        let a = Matrix::from_real_rows(&[
            vec![0.0, 1.0, 0.5],
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.0, 3.0],
        ]);
        let tol = Tolerances::default();
        let f = triangularize_lex(&a, &tol).unwrap();
        assert_eq!(f.u.matrix(), &Matrix::identity(3));
        assert_eq!(f.t, a);
    }

    #[test]
    fn diagonal_gets_sorted() {
        let a = Matrix::from_real_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]);
        let tol = Tolerances::default();
        let f = triangularize_lex(&a, &tol).unwrap();
        check_form(&a, &f, &tol);
        assert!((f.t.get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((f.t.get(1, 1) - c(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rank_one_projector_like_matrix() {
        let a = Matrix::from_real_rows(&[vec![1.0, 1.0], vec![0.0, 0.0]]);
        let tol = Tolerances::default();
        let f = triangularize_lex(&a, &tol).unwrap();
        check_form(&a, &f, &tol);
        assert!(f.t.get(0, 0).norm() < 1e-12);
        assert!((f.t.get(1, 1) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((f.t.get(0, 1).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reorder_two_by_two() {
        let t = Matrix::from_real_rows(&[vec![2.0, 5.0], vec![0.0, 1.0]]);
        let tol = Tolerances::default();
        let f = SchurForm {
            u: UnitaryMatrix::new_unchecked(Matrix::identity(2)),
            t: t.clone(),
            source_norm: t.frobenius_norm(),
        };
        let g = reorder_diagonal(f, &tol);
        assert!((g.t.get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
        assert!((g.t.get(1, 1) - c(2.0, 0.0)).norm() < 1e-12);
        assert!((g.t.get(0, 1).norm() - 5.0).abs() < 1e-10);
        // conjugation still consistent
        let recon = g.u.matrix().adjoint().mul(&t).mul(g.u.matrix());
        assert!(recon.max_abs_diff(&g.t) < 1e-10);
    }

    #[test]
    fn reorder_imaginary_before_zero() {
        let t = Matrix::from_rows(&[
            vec![c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let tol = Tolerances::default();
        let f = SchurForm {
            u: UnitaryMatrix::new_unchecked(Matrix::identity(2)),
            t,
            source_norm: 1.0,
        };
        let g = reorder_diagonal(f, &tol);
        assert!((g.t.get(0, 0)).norm() < 1e-12);
        assert!((g.t.get(1, 1) - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn reorder_ordered_input_is_identity() {
        let t = Matrix::from_real_rows(&[vec![1.0, 7.0], vec![0.0, 2.0]]);
        let tol = Tolerances::default();
        let f = SchurForm {
            u: UnitaryMatrix::new_unchecked(Matrix::identity(2)),
            t: t.clone(),
            source_norm: t.frobenius_norm(),
        };
        let g = reorder_diagonal(f, &tol);
        assert_eq!(g.t, t);
    }

    #[test]
    fn normalize_phase_superdiagonal() {
        let t = Matrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ]);
        let tol = Tolerances::default();
        let (_, out) = positive_superdiagonal_normalize(&t, &tol).unwrap();
        assert!((out.get(0, 1) - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn normalize_positive_input_is_identity() {
        let t = Matrix::from_real_rows(&[vec![1.0, 2.0], vec![0.0, 3.0]]);
        let tol = Tolerances::default();
        let (d, out) = positive_superdiagonal_normalize(&t, &tol).unwrap();
        assert_eq!(d.matrix(), &Matrix::identity(2));
        assert_eq!(out, t);
    }

    #[test]
    fn normalize_three_by_three() {
        let t = Matrix::from_rows(&[
            vec![c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 3.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        let tol = Tolerances::default();
        let (d, out) = positive_superdiagonal_normalize(&t, &tol).unwrap();
        assert!((out.get(0, 1) - c(2.0, 0.0)).norm() < 1e-15);
        assert!((out.get(1, 2) - c(3.0, 0.0)).norm() < 1e-15);
        // diagonal unchanged, conjugation consistent
        assert_eq!(out.diagonal(), t.diagonal());
        let recon = d.matrix().adjoint().mul(&t).mul(d.matrix());
        assert!(recon.max_abs_diff(&out) < 1e-14);
    }

    #[test]
    fn normalize_rejects_zero_superdiagonal() {
        let t = Matrix::from_real_rows(&[
            vec![1.0, 0.0, 5.0],
            vec![0.0, 1.0, 2.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let tol = Tolerances::default();
        assert!(matches!(
            positive_superdiagonal_normalize(&t, &tol),
            Err(Error::NotInClass(_))
        ));
    }

    #[test]
    fn entry_moduli_preserved_by_normalize() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tol = Tolerances::default();
        for _ in 0..20 {
            let n = rng.gen_range(2..6);
            let mut t = Matrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    t[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                }
            }
            for i in 0..n - 1 {
                t[(i, i + 1)] += c(2.0, 0.0); // keep superdiagonal away from zero
            }
            let (_, out) = positive_superdiagonal_normalize(&t, &tol).unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert!((out.get(i, j).norm() - t.get(i, j).norm()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn canonical_of_superdiagonal_pair_is_itself() {
        let a = Matrix::from_real_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let tol = Tolerances::default();
        let canon = littlewood_canonical(&a, &tol).unwrap();
        assert!(canon.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn canonical_idempotent_and_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = Tolerances::default();
        // an in-class matrix: ordered distinct diagonal, positive superdiagonal
        let a = Matrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.5, 0.0), c(0.3, -0.2)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(0.7, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)],
        ]);
        let canon = littlewood_canonical(&a, &tol).unwrap();
        assert!(canon.max_abs_diff(&a) < 1e-10);
        let twice = littlewood_canonical(&canon, &tol).unwrap();
        assert!(twice.max_abs_diff(&canon) < 1e-10);

        // conjugate by a random unitary (QR of a random dense matrix)
        for seed in 0..5 {
            let _ = seed;
            let g = random_dense(3, &mut rng);
            let f = triangularize_lex(&g, &tol).unwrap();
            let q = f.u.matrix();
            let conj = q.adjoint().mul(&a).mul(q);
            let canon2 = littlewood_canonical(&conj, &tol).unwrap();
            assert!(
                canon2.max_abs_diff(&canon) < 1e-8,
                "canonical form not unitary-invariant: diff {}",
                canon2.max_abs_diff(&canon)
            );
        }
    }

    #[test]
    fn schur_contract_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tol = Tolerances::default();
        for _ in 0..30 {
            let n = rng.gen_range(2..9);
            let a = random_dense(n, &mut rng);
            let f = triangularize_lex(&a, &tol).unwrap();
            check_form(&a, &f, &tol);
            // Frobenius norm preserved
            assert!((f.t.frobenius_norm() - a.frobenius_norm()).abs() < 1e-9 * a.frobenius_norm());
        }
    }

    #[test]
    fn schur_handles_nilpotent_conjugates() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tol = Tolerances::default();
        for n in 2..7 {
            let mut j = Matrix::zeros(n);
            for i in 0..n - 1 {
                j[(i, i + 1)] = c(1.0 + i as f64 * 0.5, 0.0);
            }
            let g = random_dense(n, &mut rng);
            let q = triangularize_lex(&g, &tol).unwrap().u.into_matrix();
            let a = q.adjoint().mul(&j).mul(&q);
            let f = triangularize_lex(&a, &tol).unwrap();
            check_form(&a, &f, &tol);
            // A zero eigenvalue of a size-n Jordan block is only determined
            // to ~eps^(1/k) by any backward-stable method.
            for i in 0..n {
                assert!(
                    f.t.get(i, i).norm() < EIGENVALUE_CLUSTER_SPREAD,
                    "nilpotent diagonal entry too large: {}",
                    f.t.get(i, i).norm()
                );
            }
        }
    }

    #[test]
    fn flag_canonicalization_is_stable_for_single_eigenvalue_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let tol = Tolerances::default();
        for n in 2..=8usize {
            let lam = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            let mut a = Matrix::zeros(n);
            for i in 0..n {
                a[(i, i)] = lam;
            }
            for i in 0..n - 1 {
                a[(i, i + 1)] = c(rng.gen_range(0.1..2.0), 0.0);
            }
            for i in 0..n {
                for j in i + 2..n {
                    a[(i, j)] = c(
                        0.35 * rng.gen_range(-1.0..1.0),
                        0.35 * rng.gen_range(-1.0..1.0),
                    );
                }
            }
            // already canonical: recovered as itself
            let canon = littlewood_canonical(&a, &tol).unwrap();
            assert!(
                canon.max_abs_diff(&a) < 1e-9,
                "n={n}: canonical of canonical input drifted by {}",
                canon.max_abs_diff(&a)
            );
            // and stable under dense unitary conjugation
            let g = random_dense(n, &mut rng);
            let q = triangularize_lex(&g, &tol).unwrap().u.into_matrix();
            let b = q.adjoint().mul(&a).mul(&q);
            let (vb, canon_b) = canonicalize_with_unitary(&b, &tol).unwrap();
            assert!(
                canon_b.max_abs_diff(&a) < 1e-8 * (1.0 + a.frobenius_norm()),
                "n={n}: conjugated canonical drifted by {}",
                canon_b.max_abs_diff(&a)
            );
            let recon = vb.matrix().adjoint().mul(&b).mul(vb.matrix());
            assert!(recon.max_abs_diff(&canon_b) < 1e-9 * (1.0 + b.frobenius_norm()));
        }
    }
}
