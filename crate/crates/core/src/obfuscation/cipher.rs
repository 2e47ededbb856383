use super::{BlindingKey, Mode, SeedBundle};
use crate::error::{Result, SpdcError};
use crate::flops::OpCount;
use crate::matrix::{rotate, rotation_sign, DetValue, Matrix, Rotation};

/// Everything the client needs, besides `psi`, to turn `det(X)` back into
/// `det(M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvelopeMeta {
    pub n_original: usize,
    pub theta: Rotation,
    pub mode: Mode,
    pub pad: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CipherEnvelope {
    pub x: Matrix,
    pub meta: EnvelopeMeta,
}

/// Maps the seed to a quarter-turn: `floor(psi) mod 3` selects 90, 180 or
/// 270 degrees in that order.
pub fn rotate_select(psi: f64) -> Rotation {
    assert!(psi.is_finite() && psi > 0.0, "psi must be finite and positive");
    match (psi.floor() as u64) % 3 {
        0 => Rotation::Deg90,
        1 => Rotation::Deg180,
        _ => Rotation::Deg270,
    }
}

/// First obfuscation layer: row `i` scaled by `1/v_i` (EWD) or `v_i` (EWM).
/// Costs exactly one operation per entry.
pub fn element_wise_obfuscate(key: &BlindingKey, m: &Matrix, ops: &mut OpCount) -> Result<Matrix> {
    let n = m.side()?;
    if key.len() != n {
        return Err(SpdcError::DimensionMismatch(format!(
            "blinding vector of length {} for a {n}x{n} matrix",
            key.len()
        )));
    }
    let mut out = m.clone();
    for (i, &vi) in key.v.iter().enumerate() {
        for e in out.row_mut(i) {
            match key.mode {
                Mode::Ewd => *e /= vi,
                Mode::Ewm => *e *= vi,
            }
        }
    }
    ops.add((n * n) as u64);
    Ok(out)
}

/// Blinds `m` row-wise, then rotates it by the seed-selected angle.
pub fn cipher(key: &BlindingKey, seed: &SeedBundle, m: &Matrix, ops: &mut OpCount) -> Result<CipherEnvelope> {
    let blinded = element_wise_obfuscate(key, m, ops)?;
    let theta = rotate_select(seed.psi);
    let x = rotate(&blinded, theta)?;
    Ok(CipherEnvelope {
        meta: EnvelopeMeta {
            n_original: m.rows(),
            theta,
            mode: key.mode,
            pad: 0,
        },
        x,
    })
}

/// Recovers `det(M)` from `det(X)` using only the seed and the envelope
/// metadata.
///
/// EWD: `det(M) = det(X) * s * psi`; EWM: `det(M) = det(X) * s / psi`, with
/// `s` the rotation sign for the original side. The sign flip is free, the
/// seed correction costs one operation.
pub fn decipher(seed: &SeedBundle, meta: &EnvelopeMeta, det_x: DetValue, ops: &mut OpCount) -> DetValue {
    let mut det = det_x;
    if rotation_sign(meta.n_original, meta.theta) < 0 {
        det = -det;
    }
    ops.add(1);
    match meta.mode {
        Mode::Ewd => det * seed.psi,
        Mode::Ewm => det / seed.psi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::det_oracle;

    fn fixture(mode: Mode) -> (BlindingKey, Matrix) {
        (
            BlindingKey {
                v: vec![2.0, 3.0],
                mode,
                lambda2: vec![],
            },
            Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap(),
        )
    }

    fn seed(psi: f64) -> SeedBundle {
        SeedBundle {
            lambda1: vec![],
            psi,
            mu: 0.0,
            m_max: 0.0,
        }
    }

    #[test]
    fn rotation_selection() {
        assert_eq!(rotate_select(6.7), Rotation::Deg90);
        assert_eq!(rotate_select(7.2), Rotation::Deg180);
        assert_eq!(rotate_select(8.9), Rotation::Deg270);
    }

    #[test]
    fn ewd_then_quarter_turn() {
        let (key, m) = fixture(Mode::Ewd);
        let mut ops = OpCount::new();
        // floor(6) mod 3 = 0 selects 90 degrees
        let env = cipher(&key, &seed(6.0), &m, &mut ops).unwrap();
        assert_eq!(ops.get(), 4);
        assert_eq!(env.meta.theta, Rotation::Deg90);
        let expect = Matrix::from_rows(&[[1.0, 0.5], [4.0 / 3.0, 1.0]]).unwrap();
        assert!(env.x.max_rel_diff(&expect) < 1e-15);
        let d = det_oracle(&env.x).unwrap();
        assert!((d.to_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let back = decipher(&seed(6.0), &env.meta, DetValue::from_f64(1.0 / 3.0), &mut ops);
        assert!((back.to_f64().unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn ewm_half_turn() {
        let (key, m) = fixture(Mode::Ewm);
        let blinded = element_wise_obfuscate(&key, &m, &mut OpCount::new()).unwrap();
        assert_eq!(blinded, Matrix::from_rows(&[[2.0, 4.0], [9.0, 12.0]]).unwrap());
        let env = cipher(&key, &seed(7.2), &m, &mut OpCount::new()).unwrap();
        assert_eq!(env.meta.theta, Rotation::Deg180);
        let d = det_oracle(&env.x).unwrap().to_f64().unwrap();
        assert!((d + 12.0).abs() < 1e-12);
        let back = decipher(&seed(6.0), &env.meta, DetValue::from_f64(-12.0), &mut OpCount::new());
        assert!((back.to_f64().unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn key_length_must_match() {
        let (key, _) = fixture(Mode::Ewd);
        assert!(matches!(
            cipher(&key, &seed(6.0), &Matrix::identity(3), &mut OpCount::new()),
            Err(SpdcError::DimensionMismatch(_))
        ));
    }
}
