//! Dense and block-banded complex operators.
//!
//! [`UnitaryMatrix`] is a [`ComplexMatrix`] whose unitarity was verified at
//! construction. [`BlockBanded`] stores only the diagonal blocks of a
//! block-diagonal operator; the full matrix is never formed when applying it.

mod banded;
mod library;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{fmt_real, PrecisionSpec, StateVector};
use crate::ParseError;

pub use banded::{assemble_block_banded, BlockBanded, BlockBandedMatrix, BlockBandedUnitary};
pub use library::{build_ancilla_transfer, build_encoder_unitary, build_nand_unitary, EncoderOperator};

/// Tolerance at which constructed operators must be unitary.
pub const UNITARY_TOL: f64 = 1e-10;

const RESIDUAL_REJECT: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix data of length {len} is not square")]
    NotSquare { len: usize },
    #[error("matrix is not unitary: max |U†U - I| entry is {0:e}")]
    NotUnitary(f64),
    #[error("first row has norm {0}, expected 1")]
    NotUnitRow(f64),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("operator of dimension {op} cannot act on {qubits} low qubits of a {state}-dimensional state")]
    DimensionMismatch { op: usize, qubits: usize, state: usize },
    #[error("block {index} has dimension {found}, expected {expected}")]
    BlockMismatch { index: usize, expected: usize, found: usize },
    #[error("block-banded operator needs at least one block")]
    NoBlocks,
    #[error("bit count {0} is not a power of two")]
    BadBitCount(usize),
}

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, MatrixError> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(MatrixError::NotSquare {
                len: rows.iter().map(Vec::len).sum(),
            });
        }
        Ok(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self, MatrixError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[Complex64] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.dim {
            for r in 0..self.dim {
                data.push(self.get(r, c));
            }
        }
        Self { dim: self.dim, data }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for c in 0..n {
                    data[r * n + c] += a * other.get(k, c);
                }
            }
        }
        Self { dim: n, data }
    }

    /// `out = M · input`, summed in column order.
    pub fn mul_into(&self, input: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self
                .row(r)
                .iter()
                .zip(input)
                .fold(Complex64::new(0.0, 0.0), |acc, (m, x)| acc + m * x);
        }
    }

    pub fn mul_vec(&self, input: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.mul_into(input, &mut out);
        out
    }

    /// Largest entry of `|M†M − I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.get(k, i).conj() * self.get(k, j);
                }
                if i == j {
                    acc -= 1.0;
                }
                worst = worst.max(acc.norm());
            }
        }
        worst
    }

    pub fn quantize(&self, precision: PrecisionSpec) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| precision.quantize(z)).collect(),
        }
    }

    /// Text form: `dim <d>` followed by `d` rows of `re:im` entries.
    pub fn dump(&self) -> String {
        let mut out = format!("dim {}\n", self.dim);
        for r in 0..self.dim {
            let row: Vec<String> = self
                .row(r)
                .iter()
                .map(|z| format!("{}:{}", fmt_real(z.re), fmt_real(z.im)))
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let lines: Vec<(usize, &str)> = crate::text_lines(text).collect();
        let (m, used) = Self::parse_lines(&lines)?;
        if let Some((line, _)) = lines.get(used) {
            return Err(ParseError::new(*line, "trailing content after matrix"));
        }
        Ok(m)
    }

    /// Parses one matrix from the front of `lines`, returning how many lines it used.
    pub(crate) fn parse_lines(lines: &[(usize, &str)]) -> Result<(Self, usize), ParseError> {
        let (line, header) = *lines.first().ok_or_else(|| ParseError::new(0, "missing `dim` header"))?;
        let dim: usize = header
            .strip_prefix("dim ")
            .and_then(|d| d.trim().parse().ok())
            .ok_or_else(|| ParseError::new(line, "expected `dim <d>`"))?;
        if lines.len() < dim + 1 {
            return Err(ParseError::new(line, format!("expected {dim} matrix rows")));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for &(lineno, row) in &lines[1..=dim] {
            let entries: Vec<&str> = row.split_whitespace().collect();
            if entries.len() != dim {
                return Err(ParseError::new(lineno, format!("expected {dim} entries, found {}", entries.len())));
            }
            for e in entries {
                let (re, im) = e
                    .split_once(':')
                    .ok_or_else(|| ParseError::new(lineno, format!("entry `{e}` is not `re:im`")))?;
                data.push(Complex64::new(crate::parse_f64(re, lineno)?, crate::parse_f64(im, lineno)?));
            }
        }
        Ok((Self { dim, data }, dim + 1))
    }
}

/// True iff every entry of `|M†M − I|` is below `tol`.
pub fn check_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.unitarity_defect() < tol
}

/// Square complex matrix verified unitary to [`UNITARY_TOL`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct UnitaryMatrix(ComplexMatrix);

impl UnitaryMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, MatrixError> {
        let defect = m.unitarity_defect();
        if defect < UNITARY_TOL {
            Ok(Self(m))
        } else {
            Err(MatrixError::NotUnitary(defect))
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn quantize(&self, precision: PrecisionSpec) -> ComplexMatrix {
        self.0.quantize(precision)
    }
}

impl TryFrom<ComplexMatrix> for UnitaryMatrix {
    type Error = MatrixError;
    fn try_from(m: ComplexMatrix) -> Result<Self, MatrixError> {
        Self::new(m)
    }
}

impl From<UnitaryMatrix> for ComplexMatrix {
    fn from(u: UnitaryMatrix) -> Self {
        u.0
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// Completes a unit vector to a unitary whose row 0 is that vector.
///
/// Remaining rows come from the standard basis `e₀, e₁, …` in index order,
/// each orthogonalized against the accepted rows by modified Gram–Schmidt
/// (two sweeps) and rejected when its residual norm drops below `1e-8`.
pub fn complete_orthonormal_block(first_row: &[Complex64]) -> Result<UnitaryMatrix, MatrixError> {
    let d = first_row.len();
    if !d.is_power_of_two() {
        return Err(MatrixError::NotPowerOfTwo(d));
    }
    let norm = inner(first_row, first_row).re.sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(MatrixError::NotUnitRow(norm));
    }
    let mut rows: Vec<Vec<Complex64>> = vec![first_row.iter().map(|z| z / norm).collect()];
    for seed in 0..d {
        if rows.len() == d {
            break;
        }
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[seed] = Complex64::new(1.0, 0.0);
        for _ in 0..2 {
            for r in &rows {
                let coef = inner(r, &v);
                for (vk, rk) in v.iter_mut().zip(r) {
                    *vk -= coef * rk;
                }
            }
        }
        let residual = inner(&v, &v).re.sqrt();
        if residual < RESIDUAL_REJECT {
            continue;
        }
        rows.push(v.into_iter().map(|z| z / residual).collect());
    }
    UnitaryMatrix::new(ComplexMatrix::from_rows(rows)?)
}

/// Anything that maps a `dim()`-long amplitude slice to another.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_slice(&self, input: &[Complex64], out: &mut [Complex64]);
    /// Block-banded operators must span the whole state.
    fn spans_full_state(&self) -> bool {
        false
    }
}

/// Marker for operators whose unitarity has been verified.
pub trait Unitary: LinearOperator {}

impl LinearOperator for ComplexMatrix {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply_slice(&self, input: &[Complex64], out: &mut [Complex64]) {
        self.mul_into(input, out);
    }
}

impl LinearOperator for UnitaryMatrix {
    fn dim(&self) -> usize {
        self.0.dim
    }
    fn apply_slice(&self, input: &[Complex64], out: &mut [Complex64]) {
        self.0.mul_into(input, out);
    }
}

impl Unitary for UnitaryMatrix {}

/// Applies `op` to the `low_qubits` least significant qubits of `s`,
/// identically for every value of the remaining high qubits. The sink is
/// left untouched.
pub fn apply_operator<L: LinearOperator + ?Sized>(
    op: &L,
    s: &StateVector,
    low_qubits: usize,
) -> Result<StateVector, MatrixError> {
    let width = 1usize.checked_shl(low_qubits as u32).unwrap_or(0);
    let mismatch = MatrixError::DimensionMismatch {
        op: op.dim(),
        qubits: low_qubits,
        state: s.dim(),
    };
    if low_qubits > s.num_qubits() || op.dim() != width || (op.spans_full_state() && width != s.dim()) {
        return Err(mismatch);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); s.dim()];
    for (src, dst) in s.amps().chunks(width).zip(out.chunks_mut(width)) {
        op.apply_slice(src, dst);
    }
    Ok(s.with_amps(out))
}

/// [`apply_operator`] restricted to verified unitaries.
pub fn apply_unitary<U: Unitary + ?Sized>(
    op: &U,
    s: &StateVector,
    low_qubits: usize,
) -> Result<StateVector, MatrixError> {
    apply_operator(op, s, low_qubits)
}

/// Applies a 4×4 unitary to qubits `hi` and `lo` of `s`, with local index
/// `2·bit(hi) + bit(lo)`. The sink is left untouched.
pub fn apply_two_qubit(u: &UnitaryMatrix, s: &StateVector, hi: usize, lo: usize) -> Result<StateVector, MatrixError> {
    let n = s.num_qubits();
    if u.dim() != 4 || hi == lo || hi >= n || lo >= n {
        return Err(MatrixError::DimensionMismatch {
            op: u.dim(),
            qubits: 2,
            state: s.dim(),
        });
    }
    let (mh, ml) = (1usize << hi, 1usize << lo);
    let mut out = s.amps().to_vec();
    for base in (0..s.dim()).filter(|i| i & (mh | ml) == 0) {
        let idx = [base, base | ml, base | mh, base | mh | ml];
        let v: Vec<Complex64> = idx.iter().map(|&i| s.amp(i)).collect();
        for (r, &i) in idx.iter().enumerate() {
            out[i] = u.matrix().row(r).iter().zip(&v).map(|(a, b)| a * b).sum();
        }
    }
    Ok(s.with_amps(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_is_unitary_and_scaled_row_is_not() {
        assert!(check_unitary(&ComplexMatrix::identity(4), 1e-10));
        let mut rows: Vec<Vec<Complex64>> = (0..4)
            .map(|i| (0..4).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect())
            .collect();
        rows[2][2] = c(1.01);
        assert!(!check_unitary(&ComplexMatrix::from_rows(rows).unwrap(), 1e-10));
        assert!(matches!(
            ComplexMatrix::from_rows(vec![vec![c(1.0)], vec![c(0.0), c(1.0)]]),
            Err(MatrixError::NotSquare { .. })
        ));
    }

    #[test]
    fn completion_from_standard_basis_seed() {
        let u = complete_orthonormal_block(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(u.matrix(), &ComplexMatrix::identity(4));
    }

    #[test]
    fn completion_of_mixed_row() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let row = [c(h), c(0.0), c(h), c(0.0)];
        let u = complete_orthonormal_block(&row).unwrap();
        assert!(check_unitary(u.matrix(), 1e-10));
        for (a, b) in u.matrix().row(0).iter().zip(&row) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn completion_of_nand_row_computes_weighted_sum() {
        let r6 = 6f64.sqrt();
        let row = [c(1.0 / r6), c(0.0), c(1.0 / r6), c(-2.0 / r6)];
        let u = complete_orthonormal_block(&row).unwrap();
        for x1 in [0.0, 1.0] {
            for x2 in [0.0, 1.0] {
                let x = [c(x1 / 2.0), c(0.5), c(x2 / 2.0), c(0.5)];
                let y = u.matrix().mul_vec(&x);
                // oracle: first output is the plain dot product (x1 + x2 - 2) / (2√6)
                let expected = (x1 + x2 - 2.0) / (2.0 * r6);
                assert!((y[0] - c(expected)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn completion_rejects_bad_rows() {
        assert!(matches!(
            complete_orthonormal_block(&[c(0.0), c(0.0)]),
            Err(MatrixError::NotUnitRow(_))
        ));
        assert!(matches!(
            complete_orthonormal_block(&[c(1.0), c(1.0)]),
            Err(MatrixError::NotUnitRow(_))
        ));
        assert_eq!(
            complete_orthonormal_block(&[c(1.0), c(0.0), c(0.0)]),
            Err(MatrixError::NotPowerOfTwo(3))
        );
    }

    #[test]
    fn apply_identity_and_dimension_errors() {
        let s = StateVector::from_parts(vec![c(0.6), c(0.0), c(0.0), Complex64::new(0.0, 0.8)], 0.0).unwrap();
        let id = UnitaryMatrix::identity(2);
        assert_eq!(apply_unitary(&id, &s, 1).unwrap(), s);
        assert!(matches!(apply_unitary(&id, &s, 2), Err(MatrixError::DimensionMismatch { .. })));
        assert!(matches!(apply_unitary(&id, &s, 5), Err(MatrixError::DimensionMismatch { .. })));
    }

    #[test]
    fn matrix_text_round_trip() {
        let u = complete_orthonormal_block(&[c(0.6), Complex64::new(0.0, 0.8)]).unwrap();
        let text = u.matrix().dump();
        assert!(text.starts_with("dim 2\n"));
        assert_eq!(&ComplexMatrix::parse(&text).unwrap(), u.matrix());
        let err = ComplexMatrix::parse("dim 2\n1:0 0:0\n0:0\n").unwrap_err();
        assert_eq!(err.line, 3);
    }

    fn arb_unit_row(max_log: u32) -> impl Strategy<Value = Vec<Complex64>> {
        (0..=max_log).prop_flat_map(|k| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << k)
                .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
                .prop_map(|v| {
                    let row: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
                    let n = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    row.into_iter().map(|z| z / n).collect()
                })
        })
    }

    proptest! {
        #[test]
        fn completion_is_unitary_and_deterministic(row in arb_unit_row(4)) {
            let a = complete_orthonormal_block(&row).unwrap();
            let b = complete_orthonormal_block(&row).unwrap();
            prop_assert!(check_unitary(a.matrix(), UNITARY_TOL));
            prop_assert_eq!(a, b);
        }

        #[test]
        fn unitary_application_preserves_total_probability(row in arb_unit_row(2), extra in 0usize..3, seed in 0usize..64) {
            let u = complete_orthonormal_block(&row).unwrap();
            let k = u.dim().trailing_zeros() as usize;
            let n = k + extra;
            let s = StateVector::basis_state(n, seed % (1 << n)).unwrap();
            let out = apply_unitary(&u, &s, k).unwrap();
            prop_assert!((out.total_prob() - s.total_prob()).abs() < 1e-12);
            prop_assert_eq!(out.sink_prob(), s.sink_prob());
        }
    }
}
