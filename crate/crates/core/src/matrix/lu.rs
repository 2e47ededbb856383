//! Dense LU kernels: the no-pivot Doolittle factorisation the protocol relies
//! on, the triangular solves used for off-diagonal blocks, and a pivoted
//! determinant used as the reference oracle.

use super::{DetValue, Matrix};
use crate::error::{Result, SpdcError};
use crate::flops::OpCount;

/// A pivot is rejected when `|pivot| < PIVOT_TOLERANCE * s`, where `s` is the
/// largest magnitude in the pivot's row, either in the reduced matrix or in
/// the input. The second term catches pivots that are pure cancellation
/// noise.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// Doolittle factorisation without pivoting, counting scalar operations.
///
/// Returns `(L, U)` with `L` unit lower triangular and `U` upper triangular.
pub fn factor_counted(m: &Matrix, ops: &mut OpCount) -> Result<(Matrix, Matrix)> {
    let n = m.side()?;
    let mut a = m.clone();
    let mut l = Matrix::identity(n);
    for k in 0..n {
        let pivot = a[(k, k)];
        let abs_max = |r: &[f64]| r.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        let scale = abs_max(&a.row(k)[k..]).max(abs_max(m.row(k)));
        if scale == 0.0 || pivot.abs() < PIVOT_TOLERANCE * scale {
            return Err(SpdcError::SingularPivot { index: k, pivot });
        }
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            ops.add(1);
            l[(i, k)] = factor;
            a[(i, k)] = 0.0;
            for j in k + 1..n {
                let upd = factor * a[(k, j)];
                a[(i, j)] -= upd;
            }
            ops.add(2 * (n - k - 1) as u64);
        }
    }
    Ok((l, a))
}

/// No-pivot Doolittle factorisation: the reference that an assembled
/// multi-server result must reproduce.
pub fn lu_plain(m: &Matrix) -> Result<(Matrix, Matrix)> {
    factor_counted(m, &mut OpCount::new())
}

/// Solves `X * U = B` for `X` by substitution along the columns of `U`.
pub fn solve_upper_right(b: &Matrix, u: &Matrix, ops: &mut OpCount) -> Result<Matrix> {
    let n = u.side()?;
    if b.cols() != n {
        return Err(SpdcError::DimensionMismatch(format!(
            "right solve: {}x{} against {n}x{n}",
            b.rows(),
            b.cols()
        )));
    }
    if let Some(j) = (0..n).find(|&j| u[(j, j)] == 0.0) {
        return Err(SpdcError::SingularPivot { index: j, pivot: 0.0 });
    }
    let mut x = Matrix::zeros(b.rows(), n);
    for r in 0..b.rows() {
        for j in 0..n {
            let mut acc = b[(r, j)];
            for m in 0..j {
                acc -= x[(r, m)] * u[(m, j)];
            }
            x[(r, j)] = acc / u[(j, j)];
        }
    }
    ops.add((b.rows() * n * n) as u64);
    Ok(x)
}

/// Solves `L * X = B` for unit lower triangular `L` (its stored diagonal is
/// ignored and taken as 1).
pub fn solve_unit_lower_left(l: &Matrix, b: &Matrix, ops: &mut OpCount) -> Result<Matrix> {
    let n = l.side()?;
    if b.rows() != n {
        return Err(SpdcError::DimensionMismatch(format!(
            "left solve: {n}x{n} against {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    let mut x = b.clone();
    for i in 1..n {
        for m in 0..i {
            let lim = l[(i, m)];
            if lim == 0.0 {
                continue;
            }
            for c in 0..b.cols() {
                let upd = lim * x[(m, c)];
                x[(i, c)] -= upd;
            }
        }
    }
    ops.add((b.cols() * n * (n - 1)) as u64);
    Ok(x)
}

/// `c -= a * b`.
pub fn sub_product_assign(c: &mut Matrix, a: &Matrix, b: &Matrix, ops: &mut OpCount) -> Result<()> {
    if a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols() {
        return Err(SpdcError::DimensionMismatch(format!(
            "{}x{} -= {}x{} * {}x{}",
            c.rows(),
            c.cols(),
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    for i in 0..a.rows() {
        for k in 0..a.cols() {
            let aik = a[(i, k)];
            for j in 0..b.cols() {
                c[(i, j)] -= aik * b[(k, j)];
            }
        }
    }
    ops.add(2 * (a.rows() * a.cols() * b.cols()) as u64);
    Ok(())
}

/// Reference determinant: LU with partial pivoting, accumulated in sign and
/// mantissa/exponent form. Singular matrices give a zero value.
pub fn det_oracle(m: &Matrix) -> Result<DetValue> {
    let n = m.side()?;
    let mut a = m.clone();
    let mut det = DetValue::ONE;
    for k in 0..n {
        let (p, best) = (k..n)
            .map(|i| (i, a[(i, k)].abs()))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best == 0.0 {
            return Ok(DetValue::ZERO);
        }
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            det = -det;
        }
        let pivot = a[(k, k)];
        det = det * pivot;
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let upd = f * a[(k, j)];
                a[(i, j)] -= upd;
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doolittle_hand_example() {
        let m = Matrix::from_rows(&[[4.0, 3.0], [6.0, 3.0]]).unwrap();
        let (l, u) = lu_plain(&m).unwrap();
        assert_eq!(l, Matrix::from_rows(&[[1.0, 0.0], [1.5, 1.0]]).unwrap());
        assert_eq!(u, Matrix::from_rows(&[[4.0, 3.0], [0.0, -1.5]]).unwrap());
    }

    #[test]
    fn identity_factors_to_itself() {
        let (l, u) = lu_plain(&Matrix::identity(5)).unwrap();
        assert_eq!(l, Matrix::identity(5));
        assert_eq!(u, Matrix::identity(5));
    }

    #[test]
    fn zero_leading_pivot_is_singular() {
        let m = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(lu_plain(&m), Err(SpdcError::SingularPivot { index: 0, .. })));
    }

    #[test]
    fn relative_pivot_test() {
        // pivot tiny relative to its own row
        let m = Matrix::from_rows(&[[1e-13, 1.0], [1.0, 1.0]]).unwrap();
        assert!(lu_plain(&m).is_err());
        // same pivot on a uniformly tiny row is fine
        let m = Matrix::from_rows(&[[1e-13, 1e-13], [1.0, 2.0]]).unwrap();
        assert!(lu_plain(&m).is_ok());
        // second pivot is cancellation noise: 0.75 - 0.5 * 1.5 in a row of size ~1
        let m = Matrix::from_rows(&[[2.0, 3.0], [1.0, 1.5]]).unwrap();
        assert!(matches!(lu_plain(&m), Err(SpdcError::SingularPivot { index: 1, .. })));
    }

    #[test]
    fn triangular_solves() {
        let u = Matrix::from_rows(&[[2.0, 1.0], [0.0, 4.0]]).unwrap();
        let x = Matrix::from_rows(&[[1.0, -1.0], [3.0, 0.5]]).unwrap();
        let b = x.matmul(&u).unwrap();
        let mut ops = OpCount::new();
        let got = solve_upper_right(&b, &u, &mut ops).unwrap();
        assert!(got.max_rel_diff(&x) < 1e-15);
        assert_eq!(ops.get(), 8);

        let l = Matrix::from_rows(&[[1.0, 0.0], [0.25, 1.0]]).unwrap();
        let b = l.matmul(&x).unwrap();
        let got = solve_unit_lower_left(&l, &b, &mut ops).unwrap();
        assert!(got.max_rel_diff(&x) < 1e-15);

        assert!(solve_upper_right(&b, &Matrix::zeros(2, 2), &mut ops).is_err());
    }

    #[test]
    fn oracle_small_cases() {
        let m = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let d = det_oracle(&m).unwrap();
        assert_eq!(d.sign(), -1);
        assert!((d.to_f64().unwrap() + 2.0).abs() < 1e-14);
        assert_eq!(det_oracle(&Matrix::identity(7)).unwrap().to_f64(), Some(1.0));
        let sing = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(det_oracle(&sing).unwrap().is_zero());
    }
}
