//! Fixed operators: the two-qubit NAND unitary, the ancilla transfer swap,
//! and the classical-to-dense encoder.

use num_complex::Complex64;

use super::{complete_orthonormal_block, ComplexMatrix, MatrixError, UnitaryMatrix};
use crate::state::StateVector;

/// 4×4 unitary whose first row computes `(x₁ + x₂ − 2)/(2√6)` on the
/// input `½[x₁, 1, x₂, 1]`, so `|00⟩` vanishes exactly when NAND is 0.
pub fn build_nand_unitary() -> UnitaryMatrix {
    let r2 = 2f64.sqrt();
    let r3 = 3f64.sqrt();
    let r6 = 6f64.sqrt();
    let m = ComplexMatrix::from_real_rows(&[
        &[1.0 / r6, 0.0, 1.0 / r6, -2.0 / r6],
        &[1.0 / r3, 1.0 / r3, -1.0 / r3, 0.0],
        &[1.0 / (3.0 * r2), r2 / 3.0, 1.0 / r2, r2 / 3.0],
        &[2.0 / 3.0, -2.0 / 3.0, 0.0, 2.0 / 6.0],
    ])
    .expect("4x4");
    UnitaryMatrix::new(m).expect("NAND matrix is unitary")
}

/// Swap of `|01⟩` and `|10⟩` on (target, ancilla), local index `2·target + ancilla`.
pub fn build_ancilla_transfer() -> UnitaryMatrix {
    let m = ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
    .expect("4x4");
    UnitaryMatrix::new(m).expect("permutation is unitary")
}

/// Encoder for `n = 2^m` classical bits, applied lazily one block at a time.
///
/// The full operator acts on `n + m + 1` qubits and is block diagonal with
/// one `2n × 2n` block per classical input `b`. Within a block, local index
/// `2i + z` addresses encoding register `i` and sink qubit `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderOperator {
    n: usize,
}

/// Largest bit count for which encoder blocks are materialized.
pub const MAX_ENCODER_BITS: usize = 1 << 12;

pub fn build_encoder_unitary(n: usize) -> Result<EncoderOperator, MatrixError> {
    if !n.is_power_of_two() || n > MAX_ENCODER_BITS {
        return Err(MatrixError::BadBitCount(n));
    }
    Ok(EncoderOperator { n })
}

impl EncoderOperator {
    pub fn num_bits(&self) -> usize {
        self.n
    }

    pub fn unit_amp(&self) -> f64 {
        (self.n as f64).sqrt().recip()
    }

    /// Qubits of the encoding register plus the sink qubit.
    pub fn local_qubits(&self) -> usize {
        self.n.trailing_zeros() as usize + 1
    }

    /// Block `B_b`: its first column is `c·[b₀, 1−b₀, b₁, 1−b₁, …]`.
    pub fn block(&self, bits: &[bool]) -> Result<UnitaryMatrix, MatrixError> {
        if bits.len() != self.n {
            return Err(MatrixError::BadBitCount(bits.len()));
        }
        let c = self.unit_amp();
        let column: Vec<Complex64> = bits
            .iter()
            .flat_map(|&b| {
                let (hi, lo) = if b { (c, 0.0) } else { (0.0, c) };
                [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
            })
            .collect();
        let completed = complete_orthonormal_block(&column)?;
        UnitaryMatrix::new(completed.matrix().transpose())
    }

    /// Applies the block for `bits` to `|b; 0^m; 0⟩` and returns the state of
    /// the encoding register and sink qubit (the classical register is left
    /// in `|b⟩` and omitted).
    pub fn encode(&self, bits: &[bool]) -> Result<StateVector, MatrixError> {
        let block = self.block(bits)?;
        let input = StateVector::basis_state(self.local_qubits(), 0).expect("index 0 is valid");
        super::apply_unitary(&block, &input, self.local_qubits())
    }
}
