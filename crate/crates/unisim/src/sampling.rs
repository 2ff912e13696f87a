//! Deterministic complex Gaussian sampling shared by the randomized
//! criteria and the corpus generators.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::Matrix;

/// Standard complex Gaussian: `E|z|^2 = 1`, real and imaginary parts
/// independent `N(0, 1/2)`.
pub(crate) fn standard_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-u1.ln()).sqrt();
    let ang = std::f64::consts::TAU * u2;
    Complex64::new(r * ang.cos(), r * ang.sin())
}

pub(crate) fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..n * n).map(|_| standard_complex(rng)).collect();
    Matrix::new(n, data).expect("finite samples")
}
