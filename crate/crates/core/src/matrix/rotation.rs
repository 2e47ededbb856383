use std::fmt;

use super::Matrix;
use crate::error::{Result, SpdcError};

/// Clockwise quarter-turn rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rotation {
    Deg90,
    Deg180,
    Deg270,
    Deg360,
}

impl Rotation {
    pub const ALL: [Rotation; 4] = [Rotation::Deg90, Rotation::Deg180, Rotation::Deg270, Rotation::Deg360];

    pub fn degrees(self) -> u32 {
        match self {
            Rotation::Deg90 => 90,
            Rotation::Deg180 => 180,
            Rotation::Deg270 => 270,
            Rotation::Deg360 => 360,
        }
    }

    /// Rotation undoing this one.
    pub fn inverse(self) -> Rotation {
        match self {
            Rotation::Deg90 => Rotation::Deg270,
            Rotation::Deg180 => Rotation::Deg180,
            Rotation::Deg270 => Rotation::Deg90,
            Rotation::Deg360 => Rotation::Deg360,
        }
    }
}

impl TryFrom<u32> for Rotation {
    type Error = SpdcError;

    fn try_from(deg: u32) -> Result<Self> {
        match deg {
            90 => Ok(Rotation::Deg90),
            180 => Ok(Rotation::Deg180),
            270 => Ok(Rotation::Deg270),
            360 => Ok(Rotation::Deg360),
            other => Err(SpdcError::UnsupportedRotation(other)),
        }
    }
}

impl fmt::Display for Rotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.degrees())
    }
}

/// Rotates a square matrix clockwise. Pure index permutation: entries are
/// moved, never recomputed.
pub fn rotate(m: &Matrix, rotation: Rotation) -> Result<Matrix> {
    let n = m.side()?;
    let last = n - 1;
    Ok(match rotation {
        // transpose, then reverse the column order
        Rotation::Deg90 => Matrix::from_fn(n, n, |i, j| m[(last - j, i)]),
        Rotation::Deg180 => Matrix::from_fn(n, n, |i, j| m[(last - i, last - j)]),
        Rotation::Deg270 => Matrix::from_fn(n, n, |i, j| m[(j, last - i)]),
        Rotation::Deg360 => m.clone(),
    })
}

/// Factor by which `rotation` multiplies the determinant of an `n x n`
/// matrix: `(-1)^floor(n/2)` for quarter turns, `+1` otherwise.
pub fn rotation_sign(n: usize, rotation: Rotation) -> i8 {
    match rotation {
        Rotation::Deg90 | Rotation::Deg270 if (n / 2) % 2 == 1 => -1,
        _ => 1,
    }
}
