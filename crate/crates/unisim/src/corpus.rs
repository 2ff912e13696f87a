//! Generators for the counterexample families and random in-class
//! instances. Every generator is a deterministic function of its seed and
//! parameters, and each one is registered by name for the command line.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::genpos::f_report;
use crate::matrix::{Matrix, Tolerances};
use crate::sampling::standard_complex;
use crate::schur::triangularize_lex;

/// Seed for the deterministic generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Seed {
    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The exact 3x3 nilpotent pair with superdiagonals (1, 2) and (2, 1);
/// the second is the secondary transpose of the first.
pub fn usp_pair() -> (Matrix, Matrix) {
    let a = Matrix::from_real_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 2.0],
        vec![0.0, 0.0, 0.0],
    ]);
    let b = a.secondary_transpose();
    (a, b)
}

/// The 4x4 family with diagonal (0, 1, 2, 3), fixed upper entries and a
/// unit-modulus parameter in the corner: all members share one Gram
/// family yet are pairwise unitarily dissimilar.
pub fn mc(c_param: Complex64) -> Result<Matrix> {
    let tol = Tolerances::default();
    if (c_param.norm() - 1.0).abs() > tol.eq_tol {
        return Err(Error::InvalidParameter(format!(
            "corner parameter must have unit modulus, got |c| = {}",
            c_param.norm()
        )));
    }
    Ok(Matrix::from_rows(&[
        vec![c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c_param],
        vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)],
    ]))
}

/// Random matrix with palindromic diagonal, positive superdiagonal and
/// strictly-upper noise, paired with its secondary transpose. The pair
/// shares all full-size polynomial norms but is never unitarily similar.
pub fn krd_pair(n: usize, seed: Seed) -> Result<(Matrix, Matrix)> {
    if n < 3 {
        return Err(Error::InvalidParameter(
            "palindromic pairs need size at least 3".into(),
        ));
    }
    let mut rng = seed.rng();
    loop {
        // palindromic diagonal from well-separated values
        let half = n.div_ceil(2);
        let mut values: Vec<Complex64> = Vec::with_capacity(half);
        while values.len() < half {
            let cand = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if values.iter().all(|v| (v - cand).norm() >= 0.4) {
                values.push(cand);
            }
        }
        let mut a = Matrix::zeros(n);
        for i in 0..n {
            let v = values[i.min(n - 1 - i)];
            a[(i, i)] = v;
        }
        for i in 0..n - 1 {
            a[(i, i + 1)] = c(rng.gen_range(0.5..2.0), 0.0);
        }
        for i in 0..n {
            for j in i + 2..n {
                a[(i, j)] = standard_complex(&mut rng) * 0.5;
            }
        }
        let b = a.secondary_transpose();
        if a.max_abs_diff(&b) > 1e-3 {
            return Ok((a, b));
        }
    }
}

/// Random single-eigenvalue matrix with positive superdiagonal entries in
/// `[0.1, 2]` and complex Gaussian strictly-upper noise.
///
/// The eigenvalue stays in a small disk and the superdiagonal prefix
/// products are kept away from zero: reconstruction divides by those
/// products, and the invariant encoding determines the last column only
/// up to noise amplified by their inverses. Range choices here are what
/// keeps round-trip conditioning benign rather than a property of the
/// algorithms.
pub fn random_indecomposable(n: usize, seed: Seed) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("size must be positive".into()));
    }
    let mut rng = seed.rng();
    let lambda = loop {
        let cand = c(rng.gen_range(-0.35..0.35), rng.gen_range(-0.35..0.35));
        if cand.norm() <= 0.35 {
            break cand;
        }
    };
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        a[(i, i)] = lambda;
    }
    let sups = superdiagonal_with_prefix_floor(n, &mut rng);
    for (i, &s) in sups.iter().enumerate() {
        a[(i, i + 1)] = c(s, 0.0);
    }
    for i in 0..n {
        for j in i + 2..n {
            a[(i, j)] = standard_complex(&mut rng) * 0.3;
        }
    }
    Ok(a)
}

/// Draws superdiagonal entries uniform in `[0.1, 2]`, resampling until
/// every prefix product stays above a conditioning floor.
fn superdiagonal_with_prefix_floor(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let sups: Vec<f64> = (0..n.saturating_sub(1))
            .map(|_| rng.gen_range(0.1..2.0))
            .collect();
        let mut prefix = 1.0f64;
        let mut ok = true;
        for &s in &sups {
            prefix *= s;
            if prefix < 0.05 {
                ok = false;
                break;
            }
        }
        if ok {
            return sups;
        }
    }
}

/// Resample cap for the general-position rejection loop.
pub const GENERAL_POSITION_RESAMPLE_CAP: usize = 1000;

/// Random general-position matrix: distinct diagonal separated by at
/// least 0.3, positive superdiagonal in `[0.1, 2]`, Gaussian upper
/// entries, rejection-resampled until every factor clears its threshold.
pub fn random_general_position(n: usize, seed: Seed) -> Result<Matrix> {
    if n < 2 {
        return Err(Error::InvalidParameter("size must be at least 2".into()));
    }
    let tol = Tolerances::default();
    let mut rng = seed.rng();
    for _ in 0..GENERAL_POSITION_RESAMPLE_CAP {
        let mut lambdas: Vec<Complex64> = Vec::with_capacity(n);
        while lambdas.len() < n {
            let cand = c(rng.gen_range(-1.2..1.2), rng.gen_range(-1.2..1.2));
            if lambdas.iter().all(|l| (l - cand).norm() >= 0.3) {
                lambdas.push(cand);
            }
        }
        let mut a = Matrix::zeros(n);
        for i in 0..n {
            a[(i, i)] = lambdas[i];
        }
        let sups = superdiagonal_with_prefix_floor(n, &mut rng);
        for (i, &s) in sups.iter().enumerate() {
            a[(i, i + 1)] = c(s, 0.0);
        }
        for i in 0..n {
            for j in i + 2..n {
                a[(i, j)] = standard_complex(&mut rng) * 0.3;
            }
        }
        if f_report(&a, &tol).in_position {
            return Ok(a);
        }
    }
    Err(Error::ResampleCapExceeded {
        cap: GENERAL_POSITION_RESAMPLE_CAP,
    })
}

/// Haar-like random unitary: the Schur transform of a complex Gaussian
/// matrix. Deterministic in the seed.
pub fn random_unitary(n: usize, seed: Seed) -> Matrix {
    let mut rng = seed.rng();
    let data = (0..n * n).map(|_| standard_complex(&mut rng)).collect();
    let g = Matrix::new(n, data).expect("finite samples");
    triangularize_lex(&g, &Tolerances::default())
        .expect("random Gaussian matrices triangularize")
        .u
        .into_matrix()
}

/// Output of a named generator.
#[derive(Debug, Clone)]
pub enum CorpusItem {
    Single(Matrix),
    Pair(Matrix, Matrix),
}

/// Parameters a generator may consume; unused fields are ignored.
#[derive(Debug, Clone, Copy)]
pub struct GenRequest {
    pub n: Option<usize>,
    pub seed: Seed,
    pub c: Option<Complex64>,
}

impl Default for GenRequest {
    fn default() -> Self {
        Self {
            n: None,
            seed: Seed(0),
            c: None,
        }
    }
}

/// A named matrix generator, selectable at runtime.
pub trait Generator {
    fn name(&self) -> &'static str;
    fn generate(&self, req: &GenRequest) -> Result<CorpusItem>;
}

struct UspGenerator;
struct McGenerator;
struct KrdGenerator;
struct IndecGenerator;
struct GenposGenerator;

impl Generator for UspGenerator {
    fn name(&self) -> &'static str {
        "usp"
    }
    fn generate(&self, _req: &GenRequest) -> Result<CorpusItem> {
        let (a, b) = usp_pair();
        Ok(CorpusItem::Pair(a, b))
    }
}

impl Generator for McGenerator {
    fn name(&self) -> &'static str {
        "mc"
    }
    fn generate(&self, req: &GenRequest) -> Result<CorpusItem> {
        let param = req.c.unwrap_or_else(|| c(1.0, 0.0));
        Ok(CorpusItem::Single(mc(param)?))
    }
}

impl Generator for KrdGenerator {
    fn name(&self) -> &'static str {
        "krd"
    }
    fn generate(&self, req: &GenRequest) -> Result<CorpusItem> {
        let n = req.n.unwrap_or(4);
        let (a, b) = krd_pair(n, req.seed)?;
        Ok(CorpusItem::Pair(a, b))
    }
}

impl Generator for IndecGenerator {
    fn name(&self) -> &'static str {
        "indec"
    }
    fn generate(&self, req: &GenRequest) -> Result<CorpusItem> {
        Ok(CorpusItem::Single(random_indecomposable(
            req.n.unwrap_or(4),
            req.seed,
        )?))
    }
}

impl Generator for GenposGenerator {
    fn name(&self) -> &'static str {
        "genpos"
    }
    fn generate(&self, req: &GenRequest) -> Result<CorpusItem> {
        Ok(CorpusItem::Single(random_general_position(
            req.n.unwrap_or(4),
            req.seed,
        )?))
    }
}

/// All generators in a fixed order.
pub fn registry() -> Vec<Box<dyn Generator>> {
    vec![
        Box::new(UspGenerator),
        Box::new(McGenerator),
        Box::new(KrdGenerator),
        Box::new(IndecGenerator),
        Box::new(GenposGenerator),
    ]
}

/// Looks a generator up by its registered name.
pub fn lookup(name: &str) -> Option<Box<dyn Generator>> {
    registry().into_iter().find(|g| g.name() == name)
}
