//! General-position machinery for upper triangular matrices: the factor
//! products `G^{(n,r)}`, the polynomial `phi_n`, membership reports for the
//! class cut out by `f_n`, and class labeling.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Tolerances};

/// Class of an upper triangular matrix, strongest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassLabel {
    /// Single eigenvalue and every first-superdiagonal entry nonzero.
    Indecomposable,
    /// Member of the general-position class (all `f_n` factors nonzero).
    GeneralPosition,
    /// Every first-superdiagonal entry nonzero, but not general position.
    SuperdiagonalNonzero,
    Other,
}

/// One factor of `f_n`: the `(1, r')` entry of `G^{(n', r')}` evaluated on
/// the leading `n' x n'` block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GFactor {
    pub n: usize,
    pub r: usize,
    #[serde(with = "crate::matrix::serde_complex")]
    pub value: Complex64,
    /// Degree-aware threshold the factor is compared against.
    pub threshold: f64,
}

/// Evaluation of every factor of `f_n` on a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenPosReport {
    #[serde(with = "crate::matrix::serde_complex")]
    pub phi_value: Complex64,
    /// Whether every irreducible factor of `phi_n` (each superdiagonal
    /// entry and each pairwise diagonal difference, all degree one) clears
    /// its zero threshold. Judging the atoms instead of the aggregate
    /// product keeps the predicate scale-sane at every size.
    pub phi_factors_nonzero: bool,
    pub g_factor_values: Vec<GFactor>,
    /// Product of all factors. Informational; membership is judged factor
    /// by factor to avoid mixing scales.
    #[serde(with = "crate::matrix::serde_complex")]
    pub f_value: Complex64,
    pub in_position: bool,
}

fn shifted(a: &Matrix, scalar: Complex64) -> Matrix {
    let n = a.n();
    let mut out = a.clone();
    for i in 0..n {
        out[(i, i)] -= scalar;
    }
    out
}

fn g_matrix_unchecked(a: &Matrix, r: usize) -> Matrix {
    let n = a.n();
    let mut acc = Matrix::identity(n);
    if r == 1 {
        for i in 1..n {
            acc = acc.mul(&shifted(a, a.get(i, i)));
        }
    } else {
        for i in 0..r - 1 {
            acc = acc.mul(&shifted(a, a.get(i, i)));
        }
    }
    acc
}

/// The product `G^{(n,r)}` evaluated at an upper triangular `a`, using the
/// diagonal entries of `a` itself as the shifts: for `r = 1` the factors
/// run over the second through last diagonal entries, for `r > 1` over the
/// first `r - 1`.
pub fn g_matrix(a: &Matrix, r: usize) -> Result<Matrix> {
    let n = a.n();
    if r == 0 || r > n {
        return Err(Error::IndexOutOfRange { index: r, limit: n });
    }
    if !a.is_upper_triangular(1e-12) {
        return Err(Error::NotUpperTriangular);
    }
    Ok(g_matrix_unchecked(a, r))
}

/// The product of every first-superdiagonal entry with all pairwise
/// diagonal differences.
pub fn phi(a: &Matrix) -> Complex64 {
    let n = a.n();
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..n.saturating_sub(1) {
        acc *= a.get(i, i + 1);
    }
    for i in 0..n {
        for j in i + 1..n {
            acc *= a.get(i, i) - a.get(j, j);
        }
    }
    acc
}

fn factor_threshold(block: &Matrix, degree: usize, tol: &Tolerances) -> f64 {
    tol.zero_tol * (1.0 + block.frobenius_norm()).powi(degree as i32)
}

fn phi_factors_nonzero(a: &Matrix, tol: &Tolerances) -> bool {
    let n = a.n();
    let scale = 1.0 + a.frobenius_norm();
    for i in 0..n.saturating_sub(1) {
        if a.get(i, i + 1).norm() <= tol.zero_tol * scale {
            return false;
        }
    }
    let diag = a.diagonal();
    let dscale = 1.0 + diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
    for i in 0..n {
        for j in i + 1..n {
            if (diag[i] - diag[j]).norm() <= tol.zero_tol * dscale {
                return false;
            }
        }
    }
    true
}

/// Evaluates `phi_n` and every factor of `f_n` on an upper triangular `a`,
/// each on its own leading block with a degree-aware threshold.
pub fn f_report(a: &Matrix, tol: &Tolerances) -> GenPosReport {
    let n = a.n();
    let phi_value = phi(a);
    let phi_ok = phi_factors_nonzero(a, tol);
    let mut in_position = phi_ok;
    let mut g_factor_values = Vec::new();
    let mut f_value = phi_value;
    if n >= 4 {
        // factors g_{1m}^{(m,1)} for m = 4..n
        for m in 4..=n {
            let block = a.principal_submatrix(m).expect("m <= n");
            let g = g_matrix_unchecked(&block, 1);
            let value = g.get(0, m - 1);
            let threshold = factor_threshold(&block, m - 1, tol);
            in_position = in_position && value.norm() > threshold;
            f_value *= value;
            g_factor_values.push(GFactor {
                n: m,
                r: 1,
                value,
                threshold,
            });
        }
        // factors g_{1m}^{(m,m)} for m = 3..n-1
        for m in 3..n {
            let block = a.principal_submatrix(m).expect("m < n");
            let g = g_matrix_unchecked(&block, m);
            let value = g.get(0, m - 1);
            let threshold = factor_threshold(&block, m - 1, tol);
            in_position = in_position && value.norm() > threshold;
            f_value *= value;
            g_factor_values.push(GFactor {
                n: m,
                r: m,
                value,
                threshold,
            });
        }
    }
    GenPosReport {
        phi_value,
        phi_factors_nonzero: phi_ok,
        g_factor_values,
        f_value,
        in_position,
    }
}

fn superdiagonal_nonzero(a: &Matrix, tol: &Tolerances) -> bool {
    let n = a.n();
    let scale = a.frobenius_norm().max(1.0);
    (0..n.saturating_sub(1)).all(|i| a.get(i, i + 1).norm() > tol.zero_tol * scale)
}

fn diagonal_coincides(a: &Matrix, cluster_tol: f64) -> bool {
    let diag = a.diagonal();
    let scale = 1.0 + diag.iter().map(|d| d.norm()).fold(0.0, f64::max);
    for i in 0..diag.len() {
        for j in i + 1..diag.len() {
            if (diag[i] - diag[j]).norm() > cluster_tol * scale {
                return false;
            }
        }
    }
    true
}

/// Labels an upper triangular matrix, using `cluster_tol` to judge whether
/// all diagonal entries coincide. Triangularizations of dense inputs carry
/// eigenvalue blur that grows like a fractional power of the rounding
/// error for defective spectra, so callers working with computed forms
/// pass a coarser radius than `lex_tol`.
pub fn classify_with_cluster_tol(a: &Matrix, tol: &Tolerances, cluster_tol: f64) -> ClassLabel {
    if a.n() <= 1 {
        return ClassLabel::Indecomposable;
    }
    let superdiag_ok = superdiagonal_nonzero(a, tol);
    if diagonal_coincides(a, cluster_tol) && superdiag_ok {
        return ClassLabel::Indecomposable;
    }
    if f_report(a, tol).in_position {
        return ClassLabel::GeneralPosition;
    }
    if superdiag_ok {
        return ClassLabel::SuperdiagonalNonzero;
    }
    ClassLabel::Other
}

/// Labels with the default tie radius `lex_tol`; appropriate for exact
/// upper triangular inputs.
pub fn classify(a: &Matrix, tol: &Tolerances) -> ClassLabel {
    classify_with_cluster_tol(a, tol, tol.lex_tol)
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

    fn usp_a() -> Matrix {
        Matrix::from_real_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 2.0],
            vec![0.0, 0.0, 0.0],
        ])
    }

    fn mc(cval: Complex64) -> Matrix {
        Matrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), cval],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
        ])
    }

    fn random_upper(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut a = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                a[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        a
    }

    #[test]
    fn g_matrix_two_by_two_r2_is_shift() {
        let a = Matrix::from_rows(&[
            vec![c(1.0, 0.5), c(2.0, -1.0)],
            vec![c(0.0, 0.0), c(3.0, 0.0)],
        ]);
        let g = g_matrix(&a, 2).unwrap();
        assert!((g.get(0, 1) - a.get(0, 1)).norm() < 1e-15);
    }

    #[test]
    fn g_matrix_first_row_only_for_r1() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in 2..8 {
            let a = random_upper(n, &mut rng);
            let g = g_matrix(&a, 1).unwrap();
            let scale = g.frobenius_norm().max(1.0);
            for i in 1..n {
                for j in 0..n {
                    assert!(
                        g.get(i, j).norm() <= 1e-10 * scale,
                        "row {i} of G^(n,1) not zero"
                    );
                }
            }
        }
    }

    #[test]
    fn g_matrix_leading_zero_block_for_mid_r() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for n in 3..8 {
            let a = random_upper(n, &mut rng);
            for r in 2..=n {
                let g = g_matrix(&a, r).unwrap();
                let scale = g.frobenius_norm().max(1.0);
                for i in 0..r - 1 {
                    for j in 0..r - 1 {
                        assert!(g.get(i, j).norm() <= 1e-10 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn g_matrix_principal_block_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for n in 3..8 {
            let a = random_upper(n, &mut rng);
            for r in 2..n {
                let big = g_matrix(&a, r).unwrap().principal_submatrix(r).unwrap();
                let small = g_matrix(&a.principal_submatrix(r).unwrap(), r).unwrap();
                let scale = big.frobenius_norm().max(1.0);
                assert!(big.max_abs_diff(&small) <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn g_matrix_mc_third_block_vanishing_entry() {
        let m3 = mc(c(1.0, 0.0)).principal_submatrix(3).unwrap();
        let g = g_matrix(&m3, 3).unwrap();
        assert!(g.get(0, 2).norm() < 1e-14);
    }

    #[test]
    fn g_matrix_rejects_non_triangular() {
        let a = Matrix::from_real_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(matches!(g_matrix(&a, 1), Err(Error::NotUpperTriangular)));
    }

    #[test]
    fn phi_of_nilpotent_pair_vanishes() {
        assert_eq!(phi(&usp_a()), c(0.0, 0.0));
    }

    #[test]
    fn phi_of_mc_is_twelve() {
        assert!((phi(&mc(c(1.0, 0.0))) - c(12.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn phi_zero_superdiagonal_factor() {
        let a = Matrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert_eq!(phi(&a), c(0.0, 0.0));
    }

    #[test]
    fn small_sizes_judged_by_phi_alone() {
        let tol = Tolerances::default();
        let a = Matrix::from_real_rows(&[
            vec![0.0, 1.0, 5.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 2.0],
        ]);
        let rep = f_report(&a, &tol);
        assert!(rep.g_factor_values.is_empty());
        assert!(rep.in_position);
        // phi_3 = 1 * 1 * (0-1)(0-2)(1-2) = -2
        assert!((rep.phi_value - c(-2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mc_fails_at_the_3_3_factor() {
        let tol = Tolerances::default();
        let rep = f_report(&mc(c(1.0, 0.0)), &tol);
        assert!(!rep.in_position);
        let failing: Vec<_> = rep
            .g_factor_values
            .iter()
            .filter(|f| f.value.norm() <= f.threshold)
            .collect();
        assert_eq!(failing.len(), 1);
        assert_eq!((failing[0].n, failing[0].r), (3, 3));
    }

    #[test]
    fn random_separated_instances_are_in_position() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let n = 5;
        let mut hits = 0;
        for _ in 0..50 {
            let mut a = random_upper(n, &mut rng);
            for i in 0..n {
                a[(i, i)] = c(i as f64 * 0.7, rng.gen_range(-0.2..0.2));
            }
            for i in 0..n - 1 {
                a[(i, i + 1)] = c(rng.gen_range(0.1..2.0), 0.0);
            }
            if f_report(&a, &tol).in_position {
                hits += 1;
            }
        }
        assert!(hits >= 49, "only {hits}/50 in position");
    }

    #[test]
    fn classify_examples() {
        let tol = Tolerances::default();
        assert_eq!(classify(&usp_a(), &tol), ClassLabel::Indecomposable);
        assert_eq!(
            classify(&mc(c(1.0, 0.0)), &tol),
            ClassLabel::SuperdiagonalNonzero
        );
        let gp = Matrix::from_real_rows(&[
            vec![0.0, 1.0, 5.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, 0.0, 2.0],
        ]);
        assert_eq!(classify(&gp, &tol), ClassLabel::GeneralPosition);
        let single = Matrix::from_real_rows(&[vec![7.0]]);
        assert_eq!(classify(&single, &tol), ClassLabel::Indecomposable);
        let other = Matrix::from_real_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        assert_eq!(classify(&other, &tol), ClassLabel::Other);
    }

    #[test]
    fn diagonal_conjugation_scales_factors_predictably() {
        let tol = Tolerances::default();
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let n = 6;
        let mut a = random_upper(n, &mut rng);
        for i in 0..n {
            a[(i, i)] = c(i as f64 * 0.8 - 2.0, 0.1 * i as f64);
        }
        for i in 0..n - 1 {
            a[(i, i + 1)] = c(rng.gen_range(0.3..1.5), 0.0);
        }
        let rep = f_report(&a, &tol);
        assert!(rep.in_position);

        for _ in 0..10 {
            let s: Vec<Complex64> = (0..n)
                .map(|_| {
                    let mag = rng.gen_range(0.5..2.0);
                    let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                    c(mag * ang.cos(), mag * ang.sin())
                })
                .collect();
            let mut conj = Matrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    conj[(i, j)] = a.get(i, j) * s[j] / s[i];
                }
            }
            let rep2 = f_report(&conj, &tol);
            assert!(rep2.in_position, "closure under diagonal similarity failed");
            // each factor scales by s_m / s_1
            for (f1, f2) in rep.g_factor_values.iter().zip(&rep2.g_factor_values) {
                let predicted = f1.value * s[f1.n - 1] / s[0];
                assert!(
                    (predicted - f2.value).norm() <= 1e-10 * (1.0 + predicted.norm()),
                    "factor ({}, {}) did not scale as s_m/s_1",
                    f1.n,
                    f1.r
                );
            }
            let phi_predicted = rep.phi_value * s[n - 1] / s[0];
            assert!((phi_predicted - rep2.phi_value).norm() <= 1e-10 * (1.0 + phi_predicted.norm()));
        }
    }
}
