use std::fmt;
use std::str::FromStr;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Result, SpdcError};
use crate::flops::OpCount;
use crate::matrix::Matrix;

/// Scale factor of the acceptance threshold.
pub const TAU0: f64 = 1.0 / (1u64 << 40) as f64;

/// Largest entry of the random test vector.
pub const R_MAX: u32 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// `max |L (U r) - X r|`
    Q1,
    /// `|(L^T r)^T (U r) - r^T X r|`
    Q2,
    /// `|sum_i sum_{j<=i} l_ij u_ji - x_ii|`
    Q3,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Q1, Method::Q2, Method::Q3];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Q1 => "Q1",
            Method::Q2 => "Q2",
            Method::Q3 => "Q3",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "Q1" => Ok(Method::Q1),
            "Q2" => Ok(Method::Q2),
            "Q3" => Ok(Method::Q3),
            _ => Err(format!("unknown method {s:?} (expected Q1, Q2 or Q3)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthReport {
    pub method: Method,
    pub value: f64,
    pub epsilon: f64,
    pub verdict: bool,
    /// Hex digest of the random vector, empty for Q3.
    pub r_digest: String,
}

/// `tau0 * servers * n * scale`.
pub fn threshold(servers: usize, n: usize, scale: f64) -> f64 {
    TAU0 * servers as f64 * n as f64 * scale
}

/// Magnitude the threshold is proportional to, taken from the rounding
/// error bound of each check: `1 + max_i (|L| |U| |r|)_i` for Q1,
/// `1 + (|L|^T |r|) . (|U| |r|)` for Q2 and
/// `1 + sum_i sum_{j<=i} |l_ij u_ji|` for Q3.
pub fn error_scale(l: &Matrix, u: &Matrix, method: Method, r: &[f64]) -> Result<f64> {
    match method {
        Method::Q3 => {
            let n = l.side()?;
            Ok(1.0
                + (0..n)
                    .map(|i| (0..=i).map(|j| (l[(i, j)] * u[(j, i)]).abs()).sum::<f64>())
                    .sum::<f64>())
        }
        Method::Q1 => {
            let r_abs: Vec<f64> = r.iter().map(|v| v.abs()).collect();
            let lur = abs_matrix(l).mul_vec(&abs_matrix(u).mul_vec(&r_abs)?)?;
            Ok(1.0 + lur.into_iter().fold(0.0, f64::max))
        }
        Method::Q2 => {
            let r_abs: Vec<f64> = r.iter().map(|v| v.abs()).collect();
            let lt = abs_matrix(l).tr_mul_vec(&r_abs)?;
            let ur = abs_matrix(u).mul_vec(&r_abs)?;
            Ok(1.0 + dot(&lt, &ur))
        }
    }
}

fn abs_matrix(m: &Matrix) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].abs())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| f64::from(rng.random_range(1..=R_MAX))).collect()
}

fn digest(r: &[f64]) -> String {
    let mut h = Sha256::new();
    for v in r {
        h.update(v.to_le_bytes());
    }
    hex::encode(&h.finalize()[..16])
}

/// Counted product `M v`, `2 * rows * cols - rows` operations.
fn mul_vec_counted(m: &Matrix, v: &[f64], ops: &mut OpCount) -> Result<Vec<f64>> {
    let out = m.mul_vec(v)?;
    ops.add((2 * m.rows() * m.cols()).saturating_sub(m.rows()) as u64);
    Ok(out)
}

fn tr_mul_vec_counted(m: &Matrix, v: &[f64], ops: &mut OpCount) -> Result<Vec<f64>> {
    let out = m.tr_mul_vec(v)?;
    ops.add((2 * m.rows() * m.cols()).saturating_sub(m.cols()) as u64);
    Ok(out)
}

/// Checks a returned factorisation against the matrix that was sent out.
/// Only Q1 and Q2 draw from `rng`.
pub fn authenticate<R: Rng + ?Sized>(
    l: &Matrix,
    u: &Matrix,
    x: &Matrix,
    method: Method,
    rng: &mut R,
    servers: usize,
    ops: &mut OpCount,
) -> Result<AuthReport> {
    let n = x.side()?;
    if l.side()? != n || u.side()? != n {
        return Err(SpdcError::DimensionMismatch(format!(
            "L {}x{}, U {}x{}, X {n}x{n}",
            l.rows(),
            l.cols(),
            u.rows(),
            u.cols()
        )));
    }
    let (value, scale, r_digest) = match method {
        Method::Q3 => {
            let (mut total, mut scale) = (0.0, 1.0);
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..=i {
                    let p = l[(i, j)] * u[(j, i)];
                    s += p;
                    scale += p.abs();
                }
                total += s - x[(i, i)];
            }
            ops.add((n * n + 2 * n + n * (n + 1) / 2) as u64);
            (total.abs(), scale, String::new())
        }
        Method::Q1 => {
            let r = random_vector(n, rng);
            let ur = mul_vec_counted(u, &r, ops)?;
            let lur = mul_vec_counted(l, &ur, ops)?;
            let xr = mul_vec_counted(x, &r, ops)?;
            ops.add(2 * n as u64);
            let v = lur.iter().zip(&xr).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            (v, error_scale(l, u, method, &r)?, digest(&r))
        }
        Method::Q2 => {
            let r = random_vector(n, rng);
            let ltr = tr_mul_vec_counted(l, &r, ops)?;
            let ur = mul_vec_counted(u, &r, ops)?;
            let xr = mul_vec_counted(x, &r, ops)?;
            let rxr = dot(&r, &xr);
            ops.add((4 * n) as u64);
            ((dot(&ltr, &ur) - rxr).abs(), error_scale(l, u, method, &r)?, digest(&r))
        }
    };
    let epsilon = threshold(servers, n, scale);
    Ok(AuthReport {
        method,
        value,
        epsilon,
        verdict: value <= epsilon,
        r_digest,
    })
}
