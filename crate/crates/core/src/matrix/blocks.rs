use super::Matrix;
use crate::error::{Result, SpdcError};

/// `N x N` grid of equal square blocks. Block coordinates are 1-based so
/// that `block(i, j)` is `X_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid {
    servers: usize,
    block_size: usize,
    blocks: Vec<Matrix>,
}

impl BlockGrid {
    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn side(&self) -> usize {
        self.servers * self.block_size
    }

    pub fn block(&self, i: usize, j: usize) -> &Matrix {
        assert!((1..=self.servers).contains(&i) && (1..=self.servers).contains(&j));
        &self.blocks[(i - 1) * self.servers + (j - 1)]
    }

    /// Blocks `X_i1 .. X_iN`.
    pub fn block_row(&self, i: usize) -> &[Matrix] {
        assert!((1..=self.servers).contains(&i));
        &self.blocks[(i - 1) * self.servers..i * self.servers]
    }

    pub fn reassemble(&self) -> Matrix {
        let b = self.block_size;
        let mut out = Matrix::zeros(self.side(), self.side());
        for i in 0..self.servers {
            for j in 0..self.servers {
                out.set_submatrix(i * b, j * b, &self.blocks[i * self.servers + j]);
            }
        }
        out
    }
}

/// Splits a square matrix into `n_servers^2` contiguous blocks.
pub fn partition(m: &Matrix, n_servers: usize) -> Result<BlockGrid> {
    let side = m.side()?;
    if n_servers == 0 || side % n_servers != 0 || side / n_servers <= 1 {
        return Err(SpdcError::NotPartitionable {
            side,
            servers: n_servers,
        });
    }
    let b = side / n_servers;
    let mut blocks = Vec::with_capacity(n_servers * n_servers);
    for i in 0..n_servers {
        for j in 0..n_servers {
            blocks.push(m.submatrix(i * b, j * b, b, b));
        }
    }
    Ok(BlockGrid {
        servers: n_servers,
        block_size: b,
        blocks,
    })
}
