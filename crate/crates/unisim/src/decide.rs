//! Top-level decision procedure: assembles the criteria into a verdict
//! with certificates and, for similar pairs, a verifying unitary.

use serde::{Deserialize, Serialize};

use crate::criteria::{CriterionRegistry, PairContext};
use crate::error::{Error, Result};
use crate::genpos::{classify_with_cluster_tol, ClassLabel};
use crate::invariants::Word;
use crate::matrix::{Matrix, Tolerances};
use crate::schur::{
    canonicalize_with_unitary, triangularize_lex, EIGENVALUE_CLUSTER_SPREAD,
};

/// Number of pencil samples the Arveson fallback draws.
pub const ARVESON_TRIALS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Similar,
    NotSimilar,
    Inconclusive,
}

/// Which criterion produced the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    NormFamilyIndecomposable,
    NormFamilyGeneralPosition,
    CanonicalCompare,
    SpechtRefutation,
    ArvesonRefutation,
}

/// Certificate attached to a `NotSimilar` verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum Witness {
    /// Gram families differ at block `k`, entry `(i, j)`.
    GramEntry { k: usize, i: usize, j: usize },
    /// A word whose traces differ.
    Word { word: Word },
    /// A pencil pair with differing operator norms.
    Pencil { h0: Matrix, h1: Matrix },
    /// Canonical forms (or their diagonals) differ at this zero-based
    /// entry.
    CanonicalEntry { row: usize, col: usize },
}

/// Residuals certifying a `Similar` verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityResiduals {
    /// `||U* U - I||`
    pub unitarity: f64,
    /// `||U* A U - B||`
    pub conjugation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionReport {
    pub verdict: Verdict,
    pub method: Option<Method>,
    pub witness: Option<Witness>,
    pub unitary: Option<Matrix>,
    pub class_a: ClassLabel,
    pub class_b: ClassLabel,
    pub residuals: Option<SimilarityResiduals>,
}

/// Decides whether `a` and `b` are unitarily similar.
///
/// Both are triangularized with a lex-ordered diagonal and classified;
/// the registered criteria then run in priority order: the norm-family
/// theorems when both matrices land in the same covered class, canonical
/// comparison when both canonicalize, and the Specht/Arveson refutation
/// searches as fallbacks. `Similar` always carries a unitary whose
/// conjugation residual was verified; absence of a fallback witness is
/// reported as `Inconclusive`, never upgraded.
pub fn decide(
    a: &Matrix,
    b: &Matrix,
    tol: &Tolerances,
    fallback_word_len: usize,
    seed: u64,
) -> Result<DecisionReport> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            expected: a.n(),
            got: b.n(),
        });
    }
    let ta = triangularize_lex(a, tol)?;
    let tb = triangularize_lex(b, tol)?;
    let class_a = classify_with_cluster_tol(&ta.t, tol, EIGENVALUE_CLUSTER_SPREAD);
    let class_b = classify_with_cluster_tol(&tb.t, tol, EIGENVALUE_CLUSTER_SPREAD);
    let cx = PairContext::new(
        a,
        b,
        ta,
        tb,
        class_a,
        class_b,
        *tol,
        fallback_word_len,
        seed,
    )?;
    CriterionRegistry::standard().run(&cx)
}

/// Independent oracle: canonical-form equality, defined exactly when both
/// lex-ordered triangularizations have all superdiagonal entries nonzero.
pub fn brute_oracle(a: &Matrix, b: &Matrix, tol: &Tolerances) -> Option<bool> {
    if a.n() != b.n() {
        return None;
    }
    let ca = canonicalize_with_unitary(a, tol).ok()?.1;
    let cb = canonicalize_with_unitary(b, tol).ok()?.1;
    let scale = 1.0 + a.frobenius_norm().max(b.frobenius_norm());
    Some(ca.max_abs_diff(&cb) <= tol.eq_tol * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{
        mc, random_general_position, random_indecomposable, random_unitary, usp_pair, Seed,
    };
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn check_similar_certificate(a: &Matrix, b: &Matrix, rep: &DecisionReport) {
        let u = rep.unitary.as_ref().expect("Similar carries a unitary");
        let n = a.n();
        let unit = u
            .adjoint()
            .mul(u)
            .sub(&Matrix::identity(n))
            .frobenius_norm();
        assert!(unit <= 1e-8 * n as f64, "unitarity residual {unit}");
        let conj = u.adjoint().mul(a).mul(u).sub(b).frobenius_norm();
        let bound = 1e-6 * (a.frobenius_norm() + b.frobenius_norm());
        assert!(conj <= bound, "conjugation residual {conj} over {bound}");
    }

    #[test]
    fn usp_pair_is_refuted_by_the_norm_family() {
        let (a, b) = usp_pair();
        let tol = Tolerances::default();
        let rep = decide(&a, &b, &tol, 6, 0).unwrap();
        assert_eq!(rep.verdict, Verdict::NotSimilar);
        assert_eq!(rep.method, Some(Method::NormFamilyIndecomposable));
        match rep.witness {
            Some(Witness::GramEntry { k, .. }) => assert_eq!(k, 2),
            other => panic!("expected a Gram witness, got {other:?}"),
        }
        assert_eq!(rep.class_a, ClassLabel::Indecomposable);
        assert_eq!(rep.class_b, ClassLabel::Indecomposable);
    }

    #[test]
    fn mc_family_members_reach_canonical_compare() {
        let tol = Tolerances::default();
        let a = mc(c(1.0, 0.0)).unwrap();
        let b = mc(c(0.0, 1.0)).unwrap();
        let rep = decide(&a, &b, &tol, 6, 0).unwrap();
        assert_eq!(rep.verdict, Verdict::NotSimilar);
        assert_eq!(rep.method, Some(Method::CanonicalCompare));
        assert_eq!(rep.class_a, ClassLabel::SuperdiagonalNonzero);
        match rep.witness {
            Some(Witness::CanonicalEntry { row, col }) => {
                assert_eq!((row, col), (0, 3));
            }
            other => panic!("expected a canonical witness, got {other:?}"),
        }
    }

    #[test]
    fn constructed_similar_pairs_get_verified_unitaries() {
        let tol = Tolerances::default();
        for seed in 0..5u64 {
            let a = random_general_position(4, Seed(seed)).unwrap();
            let u = random_unitary(4, Seed(seed + 100));
            let b = u.adjoint().mul(&a).mul(&u);
            let rep = decide(&a, &b, &tol, 6, 0).unwrap();
            assert_eq!(rep.verdict, Verdict::Similar, "seed {seed}");
            assert_eq!(rep.method, Some(Method::NormFamilyGeneralPosition));
            check_similar_certificate(&a, &b, &rep);

            let ai = random_indecomposable(5, Seed(seed)).unwrap();
            let ui = random_unitary(5, Seed(seed + 200));
            let bi = ui.adjoint().mul(&ai).mul(&ui);
            let rep = decide(&ai, &bi, &tol, 6, 0).unwrap();
            assert_eq!(rep.verdict, Verdict::Similar, "seed {seed}");
            assert_eq!(rep.method, Some(Method::NormFamilyIndecomposable));
            check_similar_certificate(&ai, &bi, &rep);
        }
    }

    #[test]
    fn identical_inputs_are_similar_with_identity_like_unitary() {
        let tol = Tolerances::default();
        let (a, _) = usp_pair();
        let rep = decide(&a, &a, &tol, 6, 0).unwrap();
        assert_eq!(rep.verdict, Verdict::Similar);
        let u = rep.unitary.unwrap();
        // unique up to a global phase; compare against the phase-aligned identity
        let phase = u.get(0, 0) / u.get(0, 0).norm();
        let aligned = Matrix::identity(3).scale(phase);
        assert!(u.max_abs_diff(&aligned) < 1e-8);
    }

    #[test]
    fn general_position_diagonal_mismatch_is_refuted_immediately() {
        let tol = Tolerances::default();
        let a = random_general_position(4, Seed(3)).unwrap();
        let b = random_general_position(4, Seed(4)).unwrap();
        let rep = decide(&a, &b, &tol, 6, 0).unwrap();
        assert_eq!(rep.verdict, Verdict::NotSimilar);
        assert_eq!(rep.method, Some(Method::NormFamilyGeneralPosition));
    }

    #[test]
    fn uncovered_pairs_stay_inconclusive() {
        let tol = Tolerances::default();
        // zero superdiagonal everywhere: outside every covered class
        let a = Matrix::from_real_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let rep = decide(&a, &a, &tol, 4, 0).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert_eq!(rep.class_a, ClassLabel::Other);
    }

    #[test]
    fn specht_fallback_refutes_scaled_copies() {
        let tol = Tolerances::default();
        // same class structure is unavailable (zero superdiagonals), but a
        // trace of "ab" already separates these
        let a = Matrix::from_real_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        let b = a.scale(c(2.0, 0.0));
        let rep = decide(&a, &b, &tol, 6, 0).unwrap();
        assert_eq!(rep.verdict, Verdict::NotSimilar);
        assert_eq!(rep.method, Some(Method::SpechtRefutation));
        match rep.witness {
            Some(Witness::Word { .. }) => {}
            other => panic!("expected a word witness, got {other:?}"),
        }
    }

    #[test]
    fn oracle_matches_decide_on_the_counterexample_pairs() {
        let tol = Tolerances::default();
        let (a, b) = usp_pair();
        assert_eq!(brute_oracle(&a, &b, &tol), Some(false));
        assert_eq!(brute_oracle(&a, &a, &tol), Some(true));
        // outside the oracle class
        let z = Matrix::from_real_rows(&[
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0],
        ]);
        assert_eq!(brute_oracle(&z, &z, &tol), None);
    }

    #[test]
    fn report_serializes_with_stable_field_names() {
        let tol = Tolerances::default();
        let (a, b) = usp_pair();
        let rep = decide(&a, &b, &tol, 6, 0).unwrap();
        let json = serde_json::to_value(&rep).unwrap();
        for field in ["verdict", "method", "witness", "class_a", "class_b", "residuals"] {
            assert!(json.get(field).is_some(), "missing field {field}");
        }
        assert_eq!(json["verdict"], "NotSimilar");
        let back: DecisionReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, rep);
    }
}
