use rand::Rng;

use super::Matrix;

/// Entries uniform in `[-1, 1]`.
pub fn random_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0))
}

/// Like [`random_matrix`] with `n` added to each diagonal entry, signs
/// random. Every leading minor is then safely away from zero.
pub fn dominant_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let mut m = random_matrix(n, rng);
    for i in 0..n {
        let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        m[(i, i)] += s * n as f64;
    }
    m
}
