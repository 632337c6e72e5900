use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ComplexMatrix, LinearOperator, MatrixError, Unitary, UnitaryMatrix};
use crate::state::PrecisionSpec;
use crate::ParseError;

/// Block-diagonal operator stored as its diagonal blocks.
///
/// Block `j` acts on the contiguous index range
/// `[j·block_dim, (j+1)·block_dim)` and nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockBanded<M> {
    block_dim: usize,
    blocks: Vec<M>,
}

pub type BlockBandedUnitary = BlockBanded<UnitaryMatrix>;
pub type BlockBandedMatrix = BlockBanded<ComplexMatrix>;

/// Access to the dense matrix behind a block.
pub trait Block: LinearOperator {
    fn as_matrix(&self) -> &ComplexMatrix;
}

impl Block for ComplexMatrix {
    fn as_matrix(&self) -> &ComplexMatrix {
        self
    }
}

impl Block for UnitaryMatrix {
    fn as_matrix(&self) -> &ComplexMatrix {
        self.matrix()
    }
}

/// Stacks equally sized unitary blocks along the diagonal.
pub fn assemble_block_banded(blocks: Vec<UnitaryMatrix>) -> Result<BlockBandedUnitary, MatrixError> {
    BlockBanded::new(blocks)
}

impl<M: Block> BlockBanded<M> {
    pub fn new(blocks: Vec<M>) -> Result<Self, MatrixError> {
        let first = blocks.first().ok_or(MatrixError::NoBlocks)?;
        let block_dim = first.dim();
        if !block_dim.is_power_of_two() {
            return Err(MatrixError::NotPowerOfTwo(block_dim));
        }
        if let Some((index, b)) = blocks.iter().enumerate().find(|(_, b)| b.dim() != block_dim) {
            return Err(MatrixError::BlockMismatch {
                index,
                expected: block_dim,
                found: b.dim(),
            });
        }
        if !blocks.len().is_power_of_two() {
            return Err(MatrixError::NotPowerOfTwo(blocks.len() * block_dim));
        }
        Ok(Self { block_dim, blocks })
    }

    pub fn block_dim(&self) -> usize {
        self.block_dim
    }

    pub fn blocks(&self) -> &[M] {
        &self.blocks
    }

    pub fn full_dim(&self) -> usize {
        self.block_dim * self.blocks.len()
    }

    /// Materializes the full matrix. Only sensible for small operators.
    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.full_dim();
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (j, b) in self.blocks.iter().enumerate() {
            let off = j * self.block_dim;
            for r in 0..self.block_dim {
                for c in 0..self.block_dim {
                    rows[off + r][off + c] = b.as_matrix().get(r, c);
                }
            }
        }
        ComplexMatrix::from_rows(rows).expect("square by construction")
    }

    pub fn quantize(&self, precision: PrecisionSpec) -> BlockBandedMatrix {
        BlockBanded {
            block_dim: self.block_dim,
            blocks: self.blocks.iter().map(|b| b.as_matrix().quantize(precision)).collect(),
        }
    }

    /// `blocks <count>` followed by each block in matrix text form.
    pub fn dump(&self) -> String {
        let mut out = format!("blocks {}\n", self.blocks.len());
        for b in &self.blocks {
            out.push_str(&b.as_matrix().dump());
        }
        out
    }
}

impl BlockBandedMatrix {
    /// Parses a `blocks <count>` section from the front of `lines`.
    pub(crate) fn parse_lines(lines: &[(usize, &str)]) -> Result<(Self, usize), ParseError> {
        let (line, header) = *lines.first().ok_or_else(|| ParseError::new(0, "missing `blocks` header"))?;
        let count: usize = header
            .strip_prefix("blocks ")
            .and_then(|c| c.trim().parse().ok())
            .ok_or_else(|| ParseError::new(line, "expected `blocks <count>`"))?;
        let mut used = 1;
        let mut blocks = Vec::with_capacity(count);
        for _ in 0..count {
            let (m, n) = ComplexMatrix::parse_lines(&lines[used..])?;
            used += n;
            blocks.push(m);
        }
        let banded = Self::new(blocks).map_err(|e| ParseError::new(line, e.to_string()))?;
        Ok((banded, used))
    }

    /// Re-verifies every block as unitary.
    pub fn into_unitary(self) -> Result<BlockBandedUnitary, MatrixError> {
        let blocks = self
            .blocks
            .into_iter()
            .map(UnitaryMatrix::new)
            .collect::<Result<Vec<_>, _>>()?;
        BlockBanded::new(blocks)
    }
}

impl BlockBandedUnitary {
    pub fn to_matrix_blocks(&self) -> BlockBandedMatrix {
        BlockBanded {
            block_dim: self.block_dim,
            blocks: self.blocks.iter().map(|b| b.matrix().clone()).collect(),
        }
    }
}

impl<M: Block> LinearOperator for BlockBanded<M> {
    fn dim(&self) -> usize {
        self.full_dim()
    }

    fn apply_slice(&self, input: &[Complex64], out: &mut [Complex64]) {
        for ((b, src), dst) in self
            .blocks
            .iter()
            .zip(input.chunks(self.block_dim))
            .zip(out.chunks_mut(self.block_dim))
        {
            b.apply_slice(src, dst);
        }
    }

    fn spans_full_state(&self) -> bool {
        true
    }
}

impl Unitary for BlockBandedUnitary {}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;
    use crate::unitary::{apply_unitary, build_nand_unitary, check_unitary, complete_orthonormal_block};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn two_nand_blocks_form_u2() {
        let u = build_nand_unitary();
        let u2 = assemble_block_banded(vec![u.clone(), u.clone()]).unwrap();
        let dense = u2.to_dense();
        assert_eq!(dense.dim(), 8);
        for r in 0..8 {
            for col in 0..8 {
                let expected = if r / 4 == col / 4 {
                    u.matrix().get(r % 4, col % 4)
                } else {
                    c(0.0)
                };
                assert_eq!(dense.get(r, col), expected);
            }
        }
        assert!(check_unitary(&dense, 1e-10));
    }

    #[test]
    fn single_identity_block() {
        let b = assemble_block_banded(vec![UnitaryMatrix::identity(2)]).unwrap();
        assert_eq!(b.to_dense(), ComplexMatrix::identity(2));
    }

    #[test]
    fn mismatched_blocks_rejected() {
        let err = assemble_block_banded(vec![UnitaryMatrix::identity(2), UnitaryMatrix::identity(4)]);
        assert_eq!(
            err,
            Err(MatrixError::BlockMismatch {
                index: 1,
                expected: 2,
                found: 4
            })
        );
        assert_eq!(assemble_block_banded(vec![]), Err(MatrixError::NoBlocks));
    }

    #[test]
    fn block_locality_by_enumeration() {
        let row = [c(0.5), Complex64::new(0.0, 0.5), c(-0.5), c(0.5)];
        let b = complete_orthonormal_block(&row).unwrap();
        let op = assemble_block_banded(vec![b.clone(), b.clone(), b.clone(), b]).unwrap();
        for index in 0..16 {
            let s = StateVector::basis_state(4, index).unwrap();
            let out = apply_unitary(&op, &s, 4).unwrap();
            for (i, a) in out.amps().iter().enumerate() {
                if i / 4 != index / 4 {
                    assert_eq!(*a, c(0.0), "basis {index} leaked into {i}");
                }
            }
            assert!((out.total_prob() - 1.0).abs() < 1e-12);
        }
        // a banded operator must cover the whole state
        let s = StateVector::basis_state(5, 0).unwrap();
        let op = assemble_block_banded(vec![UnitaryMatrix::identity(2); 2]).unwrap();
        assert!(apply_unitary(&op, &s, 2).is_err());
    }

    #[test]
    fn blocks_text_round_trip() {
        let op = assemble_block_banded(vec![build_nand_unitary(), UnitaryMatrix::identity(4)]).unwrap();
        let text = op.dump();
        let lines: Vec<(usize, &str)> = crate::text_lines(&text).collect();
        let (parsed, used) = BlockBandedMatrix::parse_lines(&lines).unwrap();
        assert_eq!(used, lines.len());
        assert_eq!(parsed.into_unitary().unwrap(), op);
    }
}
