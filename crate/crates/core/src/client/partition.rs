use crate::error::{Result, SpdcError};
use crate::flops::OpCount;
use crate::matrix::{DetValue, Matrix};
use crate::netsim::ServerResult;
use crate::server::{result_labels, BlockKind};

/// How an `n x n` ciphertext is padded and cut into `servers x servers`
/// blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionPlan {
    pub n: usize,
    pub servers: usize,
    pub pad: usize,
    pub block_size: usize,
}

impl PartitionPlan {
    pub fn padded_side(&self) -> usize {
        self.n + self.pad
    }
}

/// Smallest `p >= 0` such that `servers` divides `n + p` and each block is
/// at least 2x2.
pub fn plan_partition(n: usize, servers: usize) -> PartitionPlan {
    assert!(servers >= 1, "at least one server");
    let block_size = n.div_ceil(servers).max(2);
    PartitionPlan {
        n,
        servers,
        pad: block_size * servers - n,
        block_size,
    }
}

/// Puts `res_1..res_N` back together as full `L` and `U`. Blocks outside the
/// triangular pattern are exact zeros.
pub fn assemble(servers: usize, block_size: usize, results: &[ServerResult]) -> Result<(Matrix, Matrix)> {
    let mut by_server: Vec<Option<&ServerResult>> = vec![None; servers];
    for r in results {
        if r.server == 0 || r.server > servers {
            return Err(SpdcError::InvalidMatrix(format!(
                "result from unknown server S{}",
                r.server
            )));
        }
        by_server[r.server - 1] = Some(r);
    }
    let missing: Vec<usize> = (1..=servers).filter(|i| by_server[i - 1].is_none()).collect();
    if !missing.is_empty() {
        return Err(SpdcError::IncompleteResults { missing });
    }

    let side = servers * block_size;
    let mut l = Matrix::zeros(side, side);
    let mut u = Matrix::zeros(side, side);
    for (i, r) in by_server.into_iter().flatten().enumerate() {
        let want = result_labels(i + 1, servers);
        let got: Vec<_> = r.blocks.iter().map(|(label, _)| *label).collect();
        if got != want {
            return Err(SpdcError::InvalidMatrix(format!(
                "res_{} has unexpected block set",
                i + 1
            )));
        }
        for (label, block) in &r.blocks {
            if block.rows() != block_size || block.cols() != block_size {
                return Err(SpdcError::DimensionMismatch(format!(
                    "{label} is {}x{}, expected {block_size}x{block_size}",
                    block.rows(),
                    block.cols()
                )));
            }
            let (r0, c0) = ((label.row - 1) * block_size, (label.col - 1) * block_size);
            match label.kind {
                BlockKind::L => l.set_submatrix(r0, c0, block),
                _ => u.set_submatrix(r0, c0, block),
            }
        }
    }
    Ok((l, u))
}

/// `prod_{i < count} l_ii * u_ii`. Costs `count` pair products plus
/// `count - 1` accumulations.
pub fn det_from_diagonals(l: &Matrix, u: &Matrix, count: usize, ops: &mut OpCount) -> Result<DetValue> {
    let side = l.side()?;
    if u.side()? != side || count > side {
        return Err(SpdcError::DimensionMismatch(format!(
            "L is {side}x{side}, U is {}x{}, asked for {count} diagonal entries",
            u.rows(),
            u.cols()
        )));
    }
    let mut det = DetValue::ONE;
    for i in 0..count {
        let pair = DetValue::from_f64(l[(i, i)]) * DetValue::from_f64(u[(i, i)]);
        det = if i == 0 { pair } else { det * pair };
    }
    ops.add((2 * count).saturating_sub(1) as u64);
    Ok(det)
}

/// Determinant of `L * U` from all diagonal pairs.
pub fn det_from_lu(l: &Matrix, u: &Matrix, ops: &mut OpCount) -> Result<DetValue> {
    det_from_diagonals(l, u, l.side()?, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::server::BlockLabel;

    #[test]
    fn published_padding_examples() {
        let p = plan_partition(4, 3);
        assert_eq!((p.pad, p.block_size), (2, 2));
        let p = plan_partition(6, 2);
        assert_eq!((p.pad, p.block_size), (0, 3));
        let p = plan_partition(2, 2);
        assert_eq!((p.pad, p.block_size), (2, 2));
    }

    #[test]
    fn diagonal_products() {
        let l = Matrix::identity(2);
        let u = Matrix::from_rows(&[[2.0, 5.0], [0.0, 3.0]]).unwrap();
        let mut ops = OpCount::new();
        assert_eq!(det_from_lu(&l, &u, &mut ops).unwrap().to_f64(), Some(6.0));
        assert_eq!(ops.get(), 3);
        let i3 = Matrix::identity(3);
        assert_eq!(det_from_lu(&i3, &i3, &mut OpCount::new()).unwrap().to_f64(), Some(1.0));
        let z = Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]]).unwrap();
        assert!(det_from_lu(&l, &z, &mut OpCount::new()).unwrap().is_zero());
    }

    #[test]
    fn missing_result_is_named() {
        let b = Matrix::identity(2);
        let res1 = ServerResult {
            server: 1,
            blocks: vec![
                (BlockLabel::l(1, 1), b.clone()),
                (BlockLabel::u(1, 1), b.clone()),
                (BlockLabel::u(1, 2), b.clone()),
            ],
        };
        let err = assemble(2, 2, &[res1]).unwrap_err();
        assert!(matches!(&err, SpdcError::IncompleteResults { missing } if missing == &vec![2]));
        assert!(err.to_string().contains("S_2"));
    }
}
