//! Block formulas of the parallel factorisation, in closed form.
//!
//! [`ServerState`](super::ServerState) applies the `prior` sums one term at a
//! time as upstream blocks arrive; these helpers take the accumulated sum
//! directly and are what the state machine's results are checked against.

use crate::error::Result;
use crate::flops::OpCount;
use crate::matrix::{factor_counted, solve_unit_lower_left, solve_upper_right, Matrix};

/// `X_ii = L_ii * U_ii`, unit-diagonal `L_ii`.
pub fn factor_diag(x_ii: &Matrix, ops: &mut OpCount) -> Result<(Matrix, Matrix)> {
    factor_counted(x_ii, ops)
}

/// Solves `L_ik * U_kk = X_ik - prior` for `L_ik`, where `prior` is
/// `sum_{m<k} L_im U_mk`.
pub fn compute_l_block(x_ik: &Matrix, prior: &Matrix, u_kk: &Matrix, ops: &mut OpCount) -> Result<Matrix> {
    let rhs = x_ik.sub(prior)?;
    ops.add(rhs.len() as u64);
    solve_upper_right(&rhs, u_kk, ops)
}

/// Solves `L_ii * U_ij = X_ij - prior` for `U_ij`, where `prior` is
/// `sum_{k<i} L_ik U_kj`.
pub fn compute_u_block(x_ij: &Matrix, prior: &Matrix, l_ii: &Matrix, ops: &mut OpCount) -> Result<Matrix> {
    let rhs = x_ij.sub(prior)?;
    ops.add(rhs.len() as u64);
    solve_unit_lower_left(l_ii, &rhs, ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::lu_plain;

    fn dominant4() -> Matrix {
        Matrix::from_rows(&[
            [9.0, 1.0, -2.0, 0.5],
            [1.5, 8.0, 0.25, -1.0],
            [-0.5, 2.0, 7.0, 1.0],
            [1.0, -1.0, 0.75, 6.0],
        ])
        .unwrap()
    }

    #[test]
    fn diag_factor_example() {
        let x = Matrix::from_rows(&[[4.0, 3.0], [6.0, 3.0]]).unwrap();
        let (l, u) = factor_diag(&x, &mut OpCount::new()).unwrap();
        assert_eq!(l[(1, 0)], 1.5);
        assert_eq!(u[(1, 1)], -1.5);
        assert!(factor_diag(
            &Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap(),
            &mut OpCount::new()
        )
        .is_err());
        let (l, u) = factor_diag(&Matrix::identity(3), &mut OpCount::new()).unwrap();
        assert_eq!((l, u), (Matrix::identity(3), Matrix::identity(3)));
    }

    #[test]
    fn forced_identities() {
        let u = Matrix::from_rows(&[[2.0, 1.0], [0.0, 3.0]]).unwrap();
        let zero = Matrix::zeros(2, 2);
        let l = compute_l_block(&u, &zero, &u, &mut OpCount::new()).unwrap();
        assert!(l.max_rel_diff(&Matrix::identity(2)) < 1e-15);
        let l_ii = Matrix::from_rows(&[[1.0, 0.0], [0.5, 1.0]]).unwrap();
        let uu = compute_u_block(&l_ii, &zero, &l_ii, &mut OpCount::new()).unwrap();
        assert!(uu.max_rel_diff(&Matrix::identity(2)) < 1e-15);
    }

    /// Two-by-two block elimination of a 4x4 matrix reproduces the dense
    /// Doolittle factors block for block.
    #[test]
    fn blocks_match_dense_factorisation() {
        let x = dominant4();
        let (l, u) = lu_plain(&x).unwrap();
        let blk = |m: &Matrix, i: usize, j: usize| m.submatrix(2 * i, 2 * j, 2, 2);
        let mut ops = OpCount::new();
        let zero = Matrix::zeros(2, 2);

        let (l11, u11) = factor_diag(&blk(&x, 0, 0), &mut ops).unwrap();
        let u12 = compute_u_block(&blk(&x, 0, 1), &zero, &l11, &mut ops).unwrap();
        let l21 = compute_l_block(&blk(&x, 1, 0), &zero, &u11, &mut ops).unwrap();
        let prior = l21.matmul(&u12).unwrap();
        let (l22, u22) = factor_diag(&blk(&x, 1, 1).sub(&prior).unwrap(), &mut ops).unwrap();

        for (got, want) in [
            (l11, blk(&l, 0, 0)),
            (l21, blk(&l, 1, 0)),
            (l22, blk(&l, 1, 1)),
            (u11, blk(&u, 0, 0)),
            (u12, blk(&u, 0, 1)),
            (u22, blk(&u, 1, 1)),
        ] {
            assert!(got.max_rel_diff(&want) < 1e-12);
        }
    }
}
