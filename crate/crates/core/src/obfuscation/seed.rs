use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::flops::OpCount;
use crate::matrix::Matrix;

pub const PSI_MIN: f64 = 2.0;
pub const PSI_MAX: f64 = 1_048_576.0; // 2^20

/// Seed material derived on the client from the plaintext and `lambda1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedBundle {
    pub lambda1: Vec<u8>,
    pub psi: f64,
    pub mu: f64,
    pub m_max: f64,
}

/// Hash of `(lambda1, mu, m_max)` mapped onto `[2, 2^20]`.
///
/// Encoding: `len(lambda1)` as u64 LE, the bytes of `lambda1`, then `mu` and
/// `m_max` as little-endian IEEE-754 doubles. The first 8 bytes of the
/// SHA-256 digest, read big-endian, give `u`; `psi = 2 + (u / 2^64)(2^20 - 2)`.
pub fn hash_to_psi(lambda1: &[u8], mu: f64, m_max: f64) -> f64 {
    let mut h = Sha256::new();
    h.update((lambda1.len() as u64).to_le_bytes());
    h.update(lambda1);
    h.update(mu.to_le_bytes());
    h.update(m_max.to_le_bytes());
    let digest = h.finalize();
    let mut top = [0u8; 8];
    top.copy_from_slice(&digest[..8]);
    let u = u64::from_be_bytes(top);
    let unit = u as f64 / 18_446_744_073_709_551_616.0;
    (PSI_MIN + unit * (PSI_MAX - PSI_MIN)).clamp(PSI_MIN, PSI_MAX)
}

/// Computes the matrix mean and maximum and derives `psi` from them.
///
/// `ops` receives the measured arithmetic cost: `n^2 - 1` additions and one
/// division for the mean.
pub fn seed_gen(lambda1: &[u8], m: &Matrix, ops: &mut OpCount) -> Result<SeedBundle> {
    m.side()?;
    let entries = m.as_slice();
    let sum: f64 = entries.iter().sum();
    let mu = sum / entries.len() as f64;
    ops.add(entries.len() as u64);
    let m_max = entries.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SeedBundle {
        lambda1: lambda1.to_vec(),
        psi: hash_to_psi(lambda1, mu, m_max),
        mu,
        m_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistics_of_small_matrix() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let s = seed_gen(b"0123456789abcdef", &m, &mut OpCount::new()).unwrap();
        assert_eq!(s.mu, 2.5);
        assert_eq!(s.m_max, 4.0);
        assert!((PSI_MIN..=PSI_MAX).contains(&s.psi));
    }

    #[test]
    fn deterministic_and_lambda_sensitive() {
        let m = Matrix::from_fn(3, 3, |i, j| (i as f64) - (j as f64) * 0.5);
        let a = seed_gen(b"lambda-one", &m, &mut OpCount::new()).unwrap();
        let b = seed_gen(b"lambda-one", &m, &mut OpCount::new()).unwrap();
        let c = seed_gen(b"lambda-two", &m, &mut OpCount::new()).unwrap();
        assert_eq!(a.psi.to_bits(), b.psi.to_bits());
        assert_ne!(a.psi, c.psi);
    }

    #[test]
    fn non_square_rejected() {
        assert!(seed_gen(b"x", &Matrix::zeros(2, 3), &mut OpCount::new()).is_err());
    }
}
