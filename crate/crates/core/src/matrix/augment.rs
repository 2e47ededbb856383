use rand::Rng;

use super::Matrix;
use crate::error::Result;

/// Which half of each new border is forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BorderFill {
    /// New row is zero left of the diagonal; new column is random.
    ZeroRow,
    /// New column is zero above the diagonal; new row is random.
    ZeroCol,
}

/// Grows a square matrix by `p` one-at-a-time borders with a unit corner.
///
/// Each bordering produces a block-triangular matrix with a `1` in the new
/// diagonal slot, so the determinant is unchanged whatever the random fill.
/// Random entries are drawn uniformly from `[-s, s]` where `s` is the largest
/// magnitude in `m` (or 1 for the zero matrix).
pub fn augment<R: Rng + ?Sized>(m: &Matrix, p: usize, fill: BorderFill, rng: &mut R) -> Result<Matrix> {
    let n = m.side()?;
    if p == 0 {
        return Ok(m.clone());
    }
    let scale = match m.max_abs() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let mut cur = m.clone();
    for step in 0..p {
        let k = n + step;
        let mut next = Matrix::zeros(k + 1, k + 1);
        next.set_submatrix(0, 0, &cur);
        for t in 0..k {
            let r = rng.random_range(-scale..=scale);
            match fill {
                BorderFill::ZeroCol => next[(k, t)] = r,
                BorderFill::ZeroRow => next[(t, k)] = r,
            }
        }
        next[(k, k)] = 1.0;
        cur = next;
    }
    Ok(cur)
}
