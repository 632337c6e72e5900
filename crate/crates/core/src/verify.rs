//! Functional comparison of circuits and QNN programs over their inputs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{assignment_from_index, BoolCircuit, CircuitError, CircuitMetrics, MAX_EXHAUSTIVE_INPUTS};
use crate::compile::QnnProgram;
use crate::runtime::{simulate, RuntimeError, SimOptions};

#[derive(Debug, Error, PartialEq)]
pub enum VerifyError {
    #[error("input counts differ: {left} vs {right}")]
    InputArity { left: usize, right: usize },
    #[error("output counts differ: {left} vs {right}")]
    OutputArity { left: usize, right: usize },
    #[error("{0} inputs is too many for exhaustive checking (limit {MAX_EXHAUSTIVE_INPUTS})")]
    TooManyInputs(usize),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

/// Something that maps input bits to output bits.
#[derive(Debug, Clone)]
pub enum Artifact {
    Circuit(BoolCircuit),
    Qnn(QnnProgram, SimOptions),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ArtifactMetrics {
    Circuit(CircuitMetrics),
    Qnn { qubits: usize, depth: usize },
}

impl fmt::Display for ArtifactMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArtifactMetrics::Circuit(m) => write!(f, "size={} depth={} weight_bound={}", m.size, m.depth, m.weight_bound),
            ArtifactMetrics::Qnn { qubits, depth } => write!(f, "qubits={qubits} depth={depth}"),
        }
    }
}

impl Artifact {
    pub fn num_inputs(&self) -> usize {
        match self {
            Artifact::Circuit(c) => c.num_inputs(),
            Artifact::Qnn(p, _) => p.num_inputs(),
        }
    }

    pub fn num_outputs(&self) -> usize {
        match self {
            Artifact::Circuit(c) => c.outputs().len(),
            Artifact::Qnn(..) => 1,
        }
    }

    pub fn eval(&self, bits: &[bool]) -> Result<Vec<bool>, VerifyError> {
        Ok(match self {
            Artifact::Circuit(c) => c.eval_bruteforce(bits)?,
            Artifact::Qnn(p, opts) => vec![simulate(p, bits, opts)?.output],
        })
    }

    pub fn metrics(&self) -> ArtifactMetrics {
        match self {
            Artifact::Circuit(c) => ArtifactMetrics::Circuit(CircuitMetrics::of(c)),
            Artifact::Qnn(p, _) => ArtifactMetrics::Qnn {
                qubits: p.num_qubits(),
                depth: p.depth(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerifyMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub input: Vec<bool>,
    pub left: Vec<bool>,
    pub right: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub left: String,
    pub right: String,
    pub num_inputs: usize,
    pub mode: VerifyMode,
    /// Assignments evaluated.
    pub checked: usize,
    pub mismatches: Vec<Mismatch>,
    pub left_metrics: ArtifactMetrics,
    pub right_metrics: ArtifactMetrics,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "left {}", self.left)?;
        writeln!(f, "right {}", self.right)?;
        writeln!(f, "inputs {}", self.num_inputs)?;
        match self.mode {
            VerifyMode::Exhaustive => writeln!(f, "mode exhaustive")?,
            VerifyMode::Sampled { samples, seed } => writeln!(f, "mode sampled {samples} seed {seed}")?,
        }
        writeln!(f, "checked {}", self.checked)?;
        writeln!(f, "left_bounds {}", self.left_metrics)?;
        writeln!(f, "right_bounds {}", self.right_metrics)?;
        writeln!(f, "mismatches {}", self.mismatches.len())?;
        for m in &self.mismatches {
            writeln!(
                f,
                "mismatch input={} left={} right={}",
                bit_string(&m.input),
                bit_string(&m.left),
                bit_string(&m.right)
            )?;
        }
        Ok(())
    }
}

/// Evaluates both artifacts on every assignment (or `samples` seeded random
/// ones) and collects the disagreements. Input bit `i` of an exhaustive
/// assignment is bit `i` of its index.
pub fn verify(
    left: (&str, &Artifact),
    right: (&str, &Artifact),
    mode: VerifyMode,
) -> Result<VerifyReport, VerifyError> {
    let (ln, la) = left;
    let (rn, ra) = right;
    let n = la.num_inputs();
    if n != ra.num_inputs() {
        return Err(VerifyError::InputArity {
            left: n,
            right: ra.num_inputs(),
        });
    }
    if la.num_outputs() != ra.num_outputs() {
        return Err(VerifyError::OutputArity {
            left: la.num_outputs(),
            right: ra.num_outputs(),
        });
    }
    let assignments: Vec<Vec<bool>> = match mode {
        VerifyMode::Exhaustive => {
            if n > MAX_EXHAUSTIVE_INPUTS {
                return Err(VerifyError::TooManyInputs(n));
            }
            (0..1usize << n).map(|x| assignment_from_index(x, n)).collect()
        }
        VerifyMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples).map(|_| (0..n).map(|_| rng.gen()).collect()).collect()
        }
    };
    let mut mismatches = Vec::new();
    for input in &assignments {
        let l = la.eval(input)?;
        let r = ra.eval(input)?;
        if l != r {
            mismatches.push(Mismatch {
                input: input.clone(),
                left: l,
                right: r,
            });
        }
    }
    Ok(VerifyReport {
        left: ln.to_string(),
        right: rn.to_string(),
        num_inputs: n,
        mode,
        checked: assignments.len(),
        mismatches,
        left_metrics: la.metrics(),
        right_metrics: ra.metrics(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{ec_to_qnn, CompileOptions};
    use crate::transforms::nand_circuit_to_ec;

    fn nand() -> BoolCircuit {
        BoolCircuit::parse_text("a INPUT\nb INPUT\ng NAND a b\nOUTPUT g\n").unwrap()
    }

    #[test]
    fn nand_against_its_compilations() {
        let c = Artifact::Circuit(nand());
        let ec = nand_circuit_to_ec(&nand()).unwrap();
        let q = Artifact::Qnn(ec_to_qnn(&ec, &CompileOptions::default()).unwrap(), SimOptions::default());
        let ec = Artifact::Circuit(ec);
        let r = verify(("nand", &c), ("ec", &ec), VerifyMode::Exhaustive).unwrap();
        assert!(r.passed());
        assert_eq!(r.checked, 4);
        let r = verify(("nand", &c), ("qnn", &q), VerifyMode::Exhaustive).unwrap();
        assert!(r.passed());
    }

    #[test]
    fn reports_every_mismatch() {
        let and = BoolCircuit::parse_text("a INPUT\nb INPUT\nt TH 2 a b\nOUTPUT t\n").unwrap();
        let r = verify(
            ("nand", &Artifact::Circuit(nand())),
            ("and", &Artifact::Circuit(and)),
            VerifyMode::Exhaustive,
        )
        .unwrap();
        assert_eq!(r.mismatches.len(), 4);
        assert!(r.to_string().contains("mismatch input=11 left=0 right=1"));
    }

    #[test]
    fn sampling_is_seeded() {
        let c = Artifact::Circuit(nand());
        let mode = VerifyMode::Sampled { samples: 5, seed: 9 };
        let a = verify(("x", &c), ("x", &c), mode).unwrap();
        assert_eq!(a, verify(("x", &c), ("x", &c), mode).unwrap());
        assert_eq!(a.checked, 5);
    }

    #[test]
    fn arity_mismatch() {
        let one = BoolCircuit::parse_text("a INPUT\nt TH 1 a\nOUTPUT t\n").unwrap();
        let e = verify(("a", &Artifact::Circuit(nand())), ("b", &Artifact::Circuit(one)), VerifyMode::Exhaustive);
        assert_eq!(e, Err(VerifyError::InputArity { left: 2, right: 1 }));
    }
}
