//! Exact state vectors with an explicit sink probability.
//!
//! A [`StateVector`] holds `2^n` complex amplitudes plus a scalar `sink_prob`
//! that absorbs the probability mass of discarded or undefined basis states,
//! so that `Σ|amp|² + sink_prob = 1` holds after every operation.
//!
//! Qubit 0 is the least significant bit of the basis index.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking the total-probability invariant.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum StateError {
    #[error("basis index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: usize, num_qubits: usize },
    #[error("qubit {qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {0} listed more than once")]
    DuplicateQubit(usize),
    #[error("bit count {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("encoded norm {0} exceeds 1")]
    NormExceeded(f64),
    #[error("amplitude count {0} is not a power of two")]
    BadLength(usize),
    #[error("non-finite amplitude at index {0}")]
    NonFinite(usize),
}

/// Fixed-point grid used to model gate precision: step `2^-bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionSpec {
    pub bits: u32,
}

impl PrecisionSpec {
    pub fn new(bits: u32) -> Self {
        assert!(bits >= 1, "precision must be at least one bit");
        Self { bits }
    }

    pub fn step(&self) -> f64 {
        (-(self.bits as f64)).exp2()
    }

    /// Largest error introduced per real component.
    pub fn max_error(&self) -> f64 {
        (-(self.bits as f64) - 1.0).exp2()
    }

    /// Nearest multiple of `2^-bits`; exact ties round toward zero.
    pub fn quantize_real(&self, x: f64) -> f64 {
        let scale = (self.bits as f64).exp2();
        let y = (x * scale).abs();
        let floor = y.floor();
        let r = if y - floor > 0.5 { floor + 1.0 } else { floor };
        (r / scale).copysign(x)
    }

    pub fn quantize(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.quantize_real(z.re), self.quantize_real(z.im))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
    sink_prob: f64,
}

impl StateVector {
    /// Builds a state from raw amplitudes and a sink probability.
    pub fn from_parts(amps: Vec<Complex64>, sink_prob: f64) -> Result<Self, StateError> {
        if !amps.len().is_power_of_two() {
            return Err(StateError::BadLength(amps.len()));
        }
        if let Some(i) = amps.iter().position(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(StateError::NonFinite(i));
        }
        Ok(Self {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
            sink_prob,
        })
    }

    /// Builds a state whose sink absorbs whatever the amplitudes leave of unit norm.
    pub fn with_implied_sink(amps: Vec<Complex64>) -> Result<Self, StateError> {
        let live: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if live > 1.0 + NORM_TOL {
            return Err(StateError::NormExceeded(live));
        }
        Self::from_parts(amps, (1.0 - live).max(0.0))
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self, StateError> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(StateError::IndexOutOfRange { index, num_qubits });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amps,
            sink_prob: 0.0,
        })
    }

    /// Dense encoding: bit `j` becomes amplitude `unit_amp` on address `|j⟩`.
    pub fn encode_dense(bits: &[bool], unit_amp: f64) -> Result<Self, StateError> {
        if !bits.len().is_power_of_two() {
            return Err(StateError::NotPowerOfTwo(bits.len()));
        }
        let amps: Vec<Complex64> = bits
            .iter()
            .map(|&b| Complex64::new(if b { unit_amp } else { 0.0 }, 0.0))
            .collect();
        Self::with_implied_sink(amps)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amp(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn sink_prob(&self) -> f64 {
        self.sink_prob
    }

    pub fn live_prob(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `Σ|amp|² + sink_prob`, which should stay at 1.
    pub fn total_prob(&self) -> f64 {
        self.live_prob() + self.sink_prob
    }

    pub fn norm_defect(&self) -> f64 {
        (self.total_prob() - 1.0).abs()
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    /// Replaces the amplitudes while keeping the sink untouched.
    pub(crate) fn with_amps(&self, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), self.amps.len());
        Self {
            num_qubits: self.num_qubits,
            amps,
            sink_prob: self.sink_prob,
        }
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<BTreeSet<usize>, StateError> {
        let mut set = BTreeSet::new();
        for &q in qubits {
            if q >= self.num_qubits {
                return Err(StateError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
            if !set.insert(q) {
                return Err(StateError::DuplicateQubit(q));
            }
        }
        Ok(set)
    }

    /// Sends `qubits` to the sink.
    ///
    /// Survivors are re-indexed over the remaining qubits in increasing
    /// order. Each surviving pattern keeps the amplitude of the basis state
    /// whose discarded qubits are all zero; every other amplitude's mass moves
    /// into `sink_prob`. No renormalization takes place.
    pub fn discard_to_sink(&self, qubits: &[usize]) -> Result<Self, StateError> {
        let discard = self.check_qubits(qubits)?;
        let keep: Vec<usize> = (0..self.num_qubits).filter(|q| !discard.contains(q)).collect();
        let discard_mask: usize = discard.iter().map(|q| 1usize << q).sum();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << keep.len()];
        let mut sink = self.sink_prob;
        for (index, a) in self.amps.iter().enumerate() {
            if index & discard_mask != 0 {
                sink += a.norm_sqr();
                continue;
            }
            let compact = keep
                .iter()
                .enumerate()
                .fold(0usize, |acc, (pos, &q)| acc | (((index >> q) & 1) << pos));
            amps[compact] = *a;
        }
        Ok(Self {
            num_qubits: keep.len(),
            amps,
            sink_prob: sink,
        })
    }

    /// Probability that `qubit` reads 0; the sink never counts toward it.
    pub fn prob_zero(&self, qubit: usize) -> Result<f64, StateError> {
        self.check_qubits(&[qubit])?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> qubit) & 1 == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Measures `qubit` along `|0⟩` with a seeded sampler.
    ///
    /// Sink mass counts toward outcome 1. The returned state is the
    /// renormalized projection onto the sampled outcome.
    pub fn measure_along_zero(
        &self,
        qubit: usize,
        rng_seed: u64,
    ) -> Result<Measurement, StateError> {
        let p0 = self.prob_zero(qubit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let u: f64 = rng.gen();
        let outcome = if u < p0 { 0u8 } else { 1u8 };
        let keep_bit = outcome as usize;
        let p_outcome = if outcome == 0 { p0 } else { 1.0 - p0 };
        let scale = if p_outcome > 0.0 { p_outcome.sqrt().recip() } else { 0.0 };
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if (i >> qubit) & 1 == keep_bit { a * scale } else { Complex64::new(0.0, 0.0) })
            .collect();
        let sink_prob = if outcome == 1 && p_outcome > 0.0 {
            self.sink_prob / p_outcome
        } else {
            0.0
        };
        Ok(Measurement {
            outcome,
            prob_zero: p0,
            state: Self {
                num_qubits: self.num_qubits,
                amps,
                sink_prob,
            },
        })
    }

    /// Rounds every real and imaginary component onto the `2^-p` grid.
    pub fn quantize(&self, precision: PrecisionSpec) -> Self {
        self.with_amps(self.amps.iter().map(|&a| precision.quantize(a)).collect())
    }

    /// Text dump: `index<TAB>re<TAB>im` for each nonzero amplitude, then `sink<TAB>prob`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, a) in self.amps.iter().enumerate() {
            if a.re != 0.0 || a.im != 0.0 {
                let _ = writeln!(out, "{i}\t{}\t{}", fmt_real(a.re), fmt_real(a.im));
            }
        }
        let _ = writeln!(out, "sink\t{}", fmt_real(self.sink_prob));
        out
    }

    /// Parses [`StateVector::dump`] output for a state on `num_qubits` qubits.
    pub fn parse_dump(text: &str, num_qubits: usize) -> Result<Self, crate::ParseError> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << num_qubits];
        let mut sink = None;
        for (lineno, line) in crate::text_lines(text) {
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["sink", p] => sink = Some(crate::parse_f64(p, lineno)?),
                [i, re, im] => {
                    let index: usize = i
                        .parse()
                        .map_err(|_| crate::ParseError::new(lineno, format!("bad index `{i}`")))?;
                    if index >= amps.len() {
                        return Err(crate::ParseError::new(lineno, "index out of range"));
                    }
                    amps[index] = Complex64::new(
                        crate::parse_f64(re, lineno)?,
                        crate::parse_f64(im, lineno)?,
                    );
                }
                _ => return Err(crate::ParseError::new(lineno, "expected `index re im` or `sink p`")),
            }
        }
        let sink = sink.ok_or_else(|| crate::ParseError::new(0, "missing sink line"))?;
        Self::from_parts(amps, sink).map_err(|e| crate::ParseError::new(0, e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub outcome: u8,
    pub prob_zero: f64,
    pub state: StateVector,
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}
