//! The decision criteria behind [`crate::decide::decide`], each one an
//! interchangeable strategy behind a common trait, registered by name and
//! tried in priority order.

use crate::decide::{
    DecisionReport, Method, SimilarityResiduals, Verdict, Witness, ARVESON_TRIALS,
};
use crate::error::{Error, Result};
use crate::genpos::ClassLabel;
use crate::invariants::{arveson_compare, families_equal, gram_family, specht_distinguisher};
use crate::matrix::{Matrix, Tolerances};
use crate::schur::{canonicalize_with_unitary, SchurForm, UnitaryMatrix};

/// Everything a criterion may look at: the original pair, both lex-ordered
/// triangularizations, their canonical forms when they exist, the class
/// labels and the search parameters.
pub struct PairContext<'a> {
    pub a: &'a Matrix,
    pub b: &'a Matrix,
    pub ta: SchurForm,
    pub tb: SchurForm,
    /// `(V, C)` with `V* A V = C` canonical; `None` outside the class.
    ///
    /// The norm-family criteria compare the Gram families of these forms
    /// rather than of the raw triangularizations: conjugating into the
    /// positive-superdiagonal representative first is how the underlying
    /// theorems are proved, and for single-eigenvalue spectra it is also
    /// what keeps the computed families accurate (QR-derived diagonals of
    /// defective spectra carry eps^(1/k) blur that lands directly in the
    /// small Gram blocks).
    pub canon_a: Option<(UnitaryMatrix, Matrix)>,
    pub canon_b: Option<(UnitaryMatrix, Matrix)>,
    pub class_a: ClassLabel,
    pub class_b: ClassLabel,
    pub tol: Tolerances,
    pub word_len: usize,
    pub seed: u64,
}

impl<'a> PairContext<'a> {
    pub fn new(
        a: &'a Matrix,
        b: &'a Matrix,
        ta: SchurForm,
        tb: SchurForm,
        class_a: ClassLabel,
        class_b: ClassLabel,
        tol: Tolerances,
        word_len: usize,
        seed: u64,
    ) -> Result<Self> {
        let canon_a = match canonicalize_with_unitary(a, &tol) {
            Ok(v) => Some(v),
            Err(Error::NotInClass(_)) => None,
            Err(e) => return Err(e),
        };
        let canon_b = match canonicalize_with_unitary(b, &tol) {
            Ok(v) => Some(v),
            Err(Error::NotInClass(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(Self {
            a,
            b,
            ta,
            tb,
            canon_a,
            canon_b,
            class_a,
            class_b,
            tol,
            word_len,
            seed,
        })
    }
}

/// One decision strategy. `evaluate` returns `Ok(None)` to pass the pair
/// on to the next criterion in the registry.
pub trait Criterion {
    fn name(&self) -> &'static str;
    fn applies(&self, cx: &PairContext) -> bool;
    fn evaluate(&self, cx: &PairContext) -> Result<Option<DecisionReport>>;
}

fn report(cx: &PairContext, verdict: Verdict, method: Method) -> DecisionReport {
    DecisionReport {
        verdict,
        method: Some(method),
        witness: None,
        unitary: None,
        class_a: cx.class_a,
        class_b: cx.class_b,
        residuals: None,
    }
}

/// Builds the `Similar` report with a composed and verified unitary:
/// `U = V_A V_B*` maps through the shared canonical form. Returns `None`
/// when the certificate cannot be produced at tolerance, so the caller
/// falls through instead of claiming an unverified similarity.
fn certified_similar(cx: &PairContext, method: Method) -> Result<Option<DecisionReport>> {
    let (va, vb) = match (&cx.canon_a, &cx.canon_b) {
        (Some((va, _)), Some((vb, _))) => (va, vb),
        _ => return Ok(None),
    };
    let u = va.matrix().mul(&vb.matrix().adjoint());
    let n = u.n();
    let unitarity = u
        .adjoint()
        .mul(&u)
        .sub(&Matrix::identity(n))
        .frobenius_norm();
    let conjugation = u.adjoint().mul(cx.a).mul(&u).sub(cx.b).frobenius_norm();
    let bound = cx.tol.eq_tol * (cx.a.frobenius_norm() + cx.b.frobenius_norm()).max(1.0);
    if unitarity > cx.tol.eq_tol * n as f64 || conjugation > bound {
        return Ok(None);
    }
    let mut rep = report(cx, Verdict::Similar, method);
    rep.unitary = Some(u);
    rep.residuals = Some(SimilarityResiduals {
        unitarity,
        conjugation,
    });
    Ok(Some(rep))
}

/// Gram-family comparison of the canonical forms (falling back to the
/// raw triangularizations when a side does not canonicalize); a differing
/// entry is a complete refutation, agreement proves similarity on the
/// covered classes.
fn norm_family_verdict(cx: &PairContext, method: Method) -> Result<Option<DecisionReport>> {
    let repr_a = cx.canon_a.as_ref().map(|(_, c)| c).unwrap_or(&cx.ta.t);
    let repr_b = cx.canon_b.as_ref().map(|(_, c)| c).unwrap_or(&cx.tb.t);
    let fa = gram_family(repr_a);
    let fb = gram_family(repr_b);
    let (equal, witness) = families_equal(&fa, &fb, &cx.tol)?;
    if equal {
        certified_similar(cx, method)
    } else {
        let (k, i, j) = witness.expect("witness accompanies inequality");
        let mut rep = report(cx, Verdict::NotSimilar, method);
        rep.witness = Some(Witness::GramEntry { k, i, j });
        Ok(Some(rep))
    }
}

/// Both indecomposable: the family criterion is conclusive both ways.
struct NormFamilyIndecomposable;

impl Criterion for NormFamilyIndecomposable {
    fn name(&self) -> &'static str {
        "norm-family-indecomposable"
    }
    fn applies(&self, cx: &PairContext) -> bool {
        cx.class_a == ClassLabel::Indecomposable && cx.class_b == ClassLabel::Indecomposable
    }
    fn evaluate(&self, cx: &PairContext) -> Result<Option<DecisionReport>> {
        norm_family_verdict(cx, Method::NormFamilyIndecomposable)
    }
}

/// Both in general position: equal lex-ordered diagonals are required
/// first, then the family criterion is conclusive.
struct NormFamilyGeneralPosition;

impl Criterion for NormFamilyGeneralPosition {
    fn name(&self) -> &'static str {
        "norm-family-general-position"
    }
    fn applies(&self, cx: &PairContext) -> bool {
        cx.class_a == ClassLabel::GeneralPosition && cx.class_b == ClassLabel::GeneralPosition
    }
    fn evaluate(&self, cx: &PairContext) -> Result<Option<DecisionReport>> {
        let da = cx.ta.t.diagonal();
        let db = cx.tb.t.diagonal();
        let scale = 1.0
            + da.iter()
                .chain(db.iter())
                .map(|z| z.norm())
                .fold(0.0, f64::max);
        for i in 0..da.len() {
            if (da[i] - db[i]).norm() > cx.tol.eq_tol * scale {
                let mut rep = report(cx, Verdict::NotSimilar, Method::NormFamilyGeneralPosition);
                rep.witness = Some(Witness::CanonicalEntry { row: i, col: i });
                return Ok(Some(rep));
            }
        }
        norm_family_verdict(cx, Method::NormFamilyGeneralPosition)
    }
}

/// Canonical-form comparison: conclusive whenever both matrices
/// canonicalize (all superdiagonal entries of their triangularizations
/// nonzero), which covers the remaining same-class and mixed-class pairs.
struct CanonicalCompare;

impl Criterion for CanonicalCompare {
    fn name(&self) -> &'static str {
        "canonical-compare"
    }
    fn applies(&self, cx: &PairContext) -> bool {
        cx.class_a != ClassLabel::Other && cx.class_b != ClassLabel::Other
    }
    fn evaluate(&self, cx: &PairContext) -> Result<Option<DecisionReport>> {
        let ((va, ca), (vb, cb)) = match (&cx.canon_a, &cx.canon_b) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(None),
        };
        let scale = 1.0 + cx.a.frobenius_norm().max(cx.b.frobenius_norm());
        let n = ca.n();
        for i in 0..n {
            for j in 0..n {
                if (ca.get(i, j) - cb.get(i, j)).norm() > cx.tol.eq_tol * scale {
                    let mut rep = report(cx, Verdict::NotSimilar, Method::CanonicalCompare);
                    rep.witness = Some(Witness::CanonicalEntry { row: i, col: j });
                    return Ok(Some(rep));
                }
            }
        }
        let u = va.matrix().mul(&vb.matrix().adjoint());
        let unitarity = u
            .adjoint()
            .mul(&u)
            .sub(&Matrix::identity(n))
            .frobenius_norm();
        let conjugation = u.adjoint().mul(cx.a).mul(&u).sub(cx.b).frobenius_norm();
        let bound = cx.tol.eq_tol * (cx.a.frobenius_norm() + cx.b.frobenius_norm()).max(1.0);
        if unitarity > cx.tol.eq_tol * n as f64 || conjugation > bound {
            return Ok(None);
        }
        let mut rep = report(cx, Verdict::Similar, Method::CanonicalCompare);
        rep.unitary = Some(u);
        rep.residuals = Some(SimilarityResiduals {
            unitarity,
            conjugation,
        });
        Ok(Some(rep))
    }
}

/// Specht word search: a differing trace refutes, absence proves nothing.
struct SpechtRefutation;

impl Criterion for SpechtRefutation {
    fn name(&self) -> &'static str {
        "specht-refutation"
    }
    fn applies(&self, _cx: &PairContext) -> bool {
        true
    }
    fn evaluate(&self, cx: &PairContext) -> Result<Option<DecisionReport>> {
        match specht_distinguisher(cx.a, cx.b, cx.word_len, &cx.tol)? {
            Some(word) => {
                let mut rep = report(cx, Verdict::NotSimilar, Method::SpechtRefutation);
                rep.witness = Some(Witness::Word { word });
                Ok(Some(rep))
            }
            None => Ok(None),
        }
    }
}

/// Randomized Arveson pencil search: a norm-separating pencil refutes.
struct ArvesonRefutation;

impl Criterion for ArvesonRefutation {
    fn name(&self) -> &'static str {
        "arveson-refutation"
    }
    fn applies(&self, _cx: &PairContext) -> bool {
        true
    }
    fn evaluate(&self, cx: &PairContext) -> Result<Option<DecisionReport>> {
        let (no_witness, witness) =
            arveson_compare(cx.a, cx.b, ARVESON_TRIALS, cx.seed, &cx.tol)?;
        if no_witness {
            return Ok(None);
        }
        let (h0, h1) = witness.expect("witness accompanies refutation");
        let mut rep = report(cx, Verdict::NotSimilar, Method::ArvesonRefutation);
        rep.witness = Some(Witness::Pencil { h0, h1 });
        Ok(Some(rep))
    }
}

/// Priority-ordered collection of criteria.
pub struct CriterionRegistry {
    items: Vec<Box<dyn Criterion>>,
}

impl CriterionRegistry {
    /// The standard pipeline: strongest theorem first, refutation-only
    /// searches last.
    pub fn standard() -> Self {
        Self {
            items: vec![
                Box::new(NormFamilyIndecomposable),
                Box::new(NormFamilyGeneralPosition),
                Box::new(CanonicalCompare),
                Box::new(SpechtRefutation),
                Box::new(ArvesonRefutation),
            ],
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.items.iter().map(|c| c.name()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&dyn Criterion> {
        self.items
            .iter()
            .find(|c| c.name() == name)
            .map(|b| b.as_ref())
    }

    /// Walks the registry; the first applicable criterion that reaches a
    /// verdict wins, otherwise the pair is honestly inconclusive.
    pub fn run(&self, cx: &PairContext) -> Result<DecisionReport> {
        for criterion in &self.items {
            if !criterion.applies(cx) {
                continue;
            }
            if let Some(rep) = criterion.evaluate(cx)? {
                return Ok(rep);
            }
        }
        Ok(DecisionReport {
            verdict: Verdict::Inconclusive,
            method: None,
            witness: None,
            unitary: None,
            class_a: cx.class_a,
            class_b: cx.class_b,
            residuals: None,
        })
    }
}
