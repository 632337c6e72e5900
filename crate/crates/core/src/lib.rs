//! Compiler and exact simulator for layered quantum neural networks.
//!
//! Classical threshold, equality-threshold and NAND circuits are rewritten
//! into one another ([`transforms`]), compiled into programs of alternating
//! block-banded unitaries and nonlinear dissipative `D` gates ([`compile`]),
//! and simulated on an exact state vector with sink bookkeeping
//! ([`runtime`]). The `D` gate can run in an ideal thresholding mode or
//! through its cubic amplitude ODE ([`dynamics`]).

pub mod circuit;
pub mod compile;
pub mod dynamics;
pub mod random;
pub mod runtime;
pub mod state;
pub mod transforms;
pub mod unitary;
pub mod verify;

use thiserror::Error;

pub use circuit::{BoolCircuit, CircuitClass, CircuitError, GateKind};
pub use compile::{ec_to_qnn, qnn_to_ec, CompileError, CompileOptions, QnnProgram};
pub use runtime::{simulate, SimOptions, SimResult};
pub use state::{PrecisionSpec, StateError, StateVector};
pub use unitary::{BlockBandedUnitary, ComplexMatrix, MatrixError, UnitaryMatrix};

/// A text-format error, tagged with a 1-based line number (0 when the
/// problem concerns the whole document).
#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub(crate) fn text_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub(crate) fn parse_f64(token: &str, line: usize) -> Result<f64, ParseError> {
    token
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| ParseError::new(line, format!("bad number `{token}`")))
}
