//! Compilation of equality-threshold circuits into layered QNN programs and back.
//!
//! A compiled program for a circuit of depth `d` and padded fan-in `s = 2^m`
//! runs on `m·d + 1` qubits. Leaf `i` of the levelled circuit is encoded at
//! index `2i`; odd indices are scratch and start at zero. The layer for level
//! `l` (applied from `l = d` up to `l = 1`) is a block-banded unitary with one
//! `2s × 2s` block per gate, whose first row holds the gate weights on even
//! entries. A `D` gate on the low `m + 1` qubits then thresholds each
//! `|j; 0^{m+1}⟩` amplitude and qubits `1..=m` go to the sink, so gate `j`'s
//! result lands at index `2j` for the next layer.

mod figures;
mod reverse;
mod text;

use std::collections::HashMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::{levelize, open_circuit, BoolCircuit, CircuitClass, CircuitError, LeveledCircuit, Literal};
use crate::dynamics::{DGateDynamics, DynamicsError};
use crate::state::{PrecisionSpec, StateError, StateVector};
use crate::unitary::{
    apply_operator, complete_orthonormal_block, BlockBandedMatrix, BlockBandedUnitary, ComplexMatrix, MatrixError,
    UnitaryMatrix,
};

pub use figures::{nand_program, three_nand_program, THREE_NAND_DELTA1, THREE_NAND_DELTA2};
pub use reverse::{qnn_to_ec, scaled_weight};

#[derive(Debug, Error, PartialEq)]
pub enum CompileError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("level {level}: threshold {delta:e} is not below the smallest nonzero amplitude {min_amp:e}")]
    DeltaTooLarge { level: usize, delta: f64, min_amp: f64 },
    #[error("requested fan-in {requested} is below the circuit fan-in {needed}")]
    FaninTooSmall { requested: usize, needed: usize },
    #[error("program is not in canonical layered form: {0}")]
    NonCanonical(String),
    #[error("malformed program: {0}")]
    Shape(String),
    #[error("integer weight overflow at precision {0}")]
    WeightOverflow(u32),
}

/// Behavior of a `D` gate on the amplitudes it checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DMode {
    /// `|a| > δ` becomes `c_out`, anything else 0.
    Ideal,
    /// Magnitudes are scaled by `1/scale`, evolved under the cubic dynamics,
    /// then snapped at the scaled threshold.
    Ode(DGateDynamics),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DGateSpec {
    /// Number of low qubits the gate acts on.
    pub width: usize,
    pub delta: f64,
    pub c_out: f64,
    /// Upper bound on the magnitude of checked amplitudes.
    pub scale: f64,
    pub mode: DMode,
}

impl DGateSpec {
    pub fn ideal(width: usize, delta: f64, c_out: f64, scale: f64) -> Self {
        Self {
            width,
            delta,
            c_out,
            scale,
            mode: DMode::Ideal,
        }
    }

    /// Dynamics with band `(δ'/2, 3δ'/2)` around the scaled threshold `δ' = δ/scale`.
    pub fn default_dynamics(&self) -> Result<DGateDynamics, DynamicsError> {
        DGateDynamics::for_threshold(self.delta / self.scale)
    }

    pub fn with_ode(mut self) -> Result<Self, DynamicsError> {
        self.mode = DMode::Ode(self.default_dynamics()?);
        Ok(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LayerOperator {
    Unitary(BlockBandedUnitary),
    /// Blocks rounded onto a dyadic grid; no longer exactly unitary.
    Quantized(BlockBandedMatrix),
}

impl LayerOperator {
    pub fn block_dim(&self) -> usize {
        match self {
            LayerOperator::Unitary(u) => u.block_dim(),
            LayerOperator::Quantized(q) => q.block_dim(),
        }
    }

    pub fn num_blocks(&self) -> usize {
        match self {
            LayerOperator::Unitary(u) => u.blocks().len(),
            LayerOperator::Quantized(q) => q.blocks().len(),
        }
    }

    pub fn full_dim(&self) -> usize {
        self.block_dim() * self.num_blocks()
    }

    pub fn block(&self, j: usize) -> &ComplexMatrix {
        match self {
            LayerOperator::Unitary(u) => u.blocks()[j].matrix(),
            LayerOperator::Quantized(q) => &q.blocks()[j],
        }
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector, MatrixError> {
        let qubits = s.num_qubits();
        match self {
            LayerOperator::Unitary(u) => apply_operator(u, s, qubits),
            LayerOperator::Quantized(q) => apply_operator(q, s, qubits),
        }
    }

    pub fn quantize(&self, p: PrecisionSpec) -> LayerOperator {
        match self {
            LayerOperator::Unitary(u) => LayerOperator::Quantized(u.quantize(p)),
            LayerOperator::Quantized(q) => LayerOperator::Quantized(q.quantize(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QnnLayer {
    /// Circuit level this layer realizes (1 is the output level).
    pub level: usize,
    /// Planned grid precision for this layer's entries.
    pub precision: Option<u32>,
    pub operator: LayerOperator,
    pub dgate: DGateSpec,
    /// Qubits sent to the sink after the `D` gate.
    pub sink: Vec<usize>,
}

/// Initial amplitudes: index `i` holds `amp` when `slots[i]` is true.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputEncoding {
    pub num_inputs: usize,
    pub amp: f64,
    pub slots: Vec<Literal>,
}

impl InputEncoding {
    pub fn prepare(&self, bits: &[bool]) -> Result<StateVector, CompileError> {
        if bits.len() != self.num_inputs {
            return Err(CircuitError::ArityMismatch {
                expected: self.num_inputs,
                found: bits.len(),
            }
            .into());
        }
        let amps = self
            .slots
            .iter()
            .map(|lit| Complex64::new(if lit.value(bits) { self.amp } else { 0.0 }, 0.0))
            .collect();
        Ok(StateVector::with_implied_sink(amps)?)
    }
}

/// Shape of a program produced by [`ec_to_qnn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CanonicalShape {
    pub m: usize,
    pub d: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QnnProgram {
    num_qubits: usize,
    encoding: InputEncoding,
    layers: Vec<QnnLayer>,
}

impl QnnProgram {
    /// Checks that every layer fits the state left by the previous one.
    pub fn new(num_qubits: usize, encoding: InputEncoding, layers: Vec<QnnLayer>) -> Result<Self, CompileError> {
        let shape = |m: String| Err(CompileError::Shape(m));
        if num_qubits == 0 || num_qubits > 30 {
            return shape(format!("{num_qubits} qubits"));
        }
        if encoding.slots.len() != 1 << num_qubits {
            return shape(format!("{} encoding slots for {num_qubits} qubits", encoding.slots.len()));
        }
        if let Some(Literal::Input { index, .. }) = encoding
            .slots
            .iter()
            .find(|l| matches!(l, Literal::Input { index, .. } if *index >= encoding.num_inputs))
        {
            return shape(format!("encoding reads input {index} of {}", encoding.num_inputs));
        }
        if layers.is_empty() {
            return shape("no layers".into());
        }
        let mut q = num_qubits;
        for (i, layer) in layers.iter().enumerate() {
            if layer.operator.full_dim() != 1 << q {
                return shape(format!(
                    "layer {i}: operator dimension {} on {q} qubits",
                    layer.operator.full_dim()
                ));
            }
            let g = &layer.dgate;
            if g.width == 0 || g.width > q {
                return shape(format!("layer {i}: D width {} on {q} qubits", g.width));
            }
            if !(g.delta > 0.0 && g.c_out > 0.0 && g.scale > 0.0) {
                return shape(format!("layer {i}: D parameters must be positive"));
            }
            let mut seen = layer.sink.clone();
            seen.sort_unstable();
            seen.dedup();
            if seen.len() != layer.sink.len() || seen.iter().any(|&k| k >= q) || seen.len() >= q {
                return shape(format!("layer {i}: bad sink qubits {:?}", layer.sink));
            }
            q -= layer.sink.len();
        }
        Ok(Self {
            num_qubits,
            encoding,
            layers,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_inputs(&self) -> usize {
        self.encoding.num_inputs
    }

    pub fn encoding(&self) -> &InputEncoding {
        &self.encoding
    }

    /// Layers in application order.
    pub fn layers(&self) -> &[QnnLayer] {
        &self.layers
    }

    /// Unitary and `D` gates counted separately.
    pub fn depth(&self) -> usize {
        2 * self.layers.len()
    }

    /// The `(m, d)` shape when the program is in canonical layered form.
    pub fn canonical_shape(&self) -> Result<CanonicalShape, CompileError> {
        let bad = |m: String| Err(CompileError::NonCanonical(m));
        let d = self.layers.len();
        let m = self.layers[0].dgate.width - 1;
        if self.num_qubits != m * d + 1 {
            return bad(format!("{} qubits, expected m·d + 1 = {}", self.num_qubits, m * d + 1));
        }
        let s = 1usize << m;
        for (i, layer) in self.layers.iter().enumerate() {
            let level = d - i;
            if layer.level != level {
                return bad(format!("layer {i} is labelled level {}, expected {level}", layer.level));
            }
            if layer.operator.block_dim() != 2 * s || layer.operator.num_blocks() != s.pow(level as u32 - 1) {
                return bad(format!("layer {i}: block layout does not match fan-in {s}"));
            }
            if layer.dgate.width != m + 1 || layer.sink != (1..=m).collect::<Vec<_>>() {
                return bad(format!("layer {i}: D width or sink qubits differ from m = {m}"));
            }
        }
        if self.encoding.slots.iter().skip(1).step_by(2).any(|l| *l != Literal::Const(false)) {
            return bad("odd encoding slots must be constant 0".into());
        }
        Ok(CanonicalShape { m, d })
    }

    /// Planned precision of each layer, in application order.
    pub fn planned_precisions(&self) -> Vec<Option<u32>> {
        self.layers.iter().map(|l| l.precision).collect()
    }

    pub fn with_layers(&self, layers: Vec<QnnLayer>) -> Result<Self, CompileError> {
        Self::new(self.num_qubits, self.encoding.clone(), layers)
    }

    /// Same program with every `D` gate switched to its default dynamics.
    pub fn with_ode_gates(&self) -> Result<Self, CompileError> {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                Ok(QnnLayer {
                    dgate: l.dgate.with_ode()?,
                    ..l.clone()
                })
            })
            .collect::<Result<_, CompileError>>()?;
        self.with_layers(layers)
    }
}

/// Rounds every layer's entries onto the `2^-p` grid, one `p` per layer.
pub fn quantize_program(prog: &QnnProgram, bits: &[u32]) -> Result<QnnProgram, CompileError> {
    if bits.len() != prog.layers.len() {
        return Err(CompileError::Shape(format!("{} precisions for {} layers", bits.len(), prog.layers.len())));
    }
    let layers = prog
        .layers
        .iter()
        .zip(bits)
        .map(|(l, &p)| QnnLayer {
            precision: Some(p),
            operator: l.operator.quantize(PrecisionSpec::new(p)),
            ..l.clone()
        })
        .collect();
    prog.with_layers(layers)
}

/// `δ = 1 / (2 · s^{l/2} · √s · w)`: half the smallest nonzero normalized sum.
pub fn choose_delta(level: usize, fanin: usize, weight_bound: i64) -> f64 {
    let s = fanin as f64;
    1.0 / (2.0 * s.powf(level as f64 / 2.0) * s.sqrt() * weight_bound as f64)
}

/// `p = ⌈log₂(3^l · s^{l/2} · w)⌉ + 1`.
pub fn required_precision(level: usize, fanin: usize, weight_bound: i64) -> PrecisionSpec {
    let x = 3f64.powi(level as i32) * (fanin as f64).powf(level as f64 / 2.0) * weight_bound as f64;
    PrecisionSpec::new(x.log2().ceil() as u32 + 1)
}

/// Amplitude error at a level whose entries and inputs are each off by at
/// most `eps_next`: `(√s·ε)² + 2√s·ε`.
pub fn error_recurrence(eps_next: f64, fanin: usize) -> f64 {
    let x = (fanin as f64).sqrt() * eps_next;
    x * x + 2.0 * x
}

/// How a gate's weight vector becomes the first row of its block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum RowNormalization {
    /// Scale by `g = ⌊2^p/‖w‖⌋/2^p` and put the leftover norm on scratch
    /// index 1, so the weight entries lie exactly on the `2^-p` grid.
    #[default]
    Dyadic,
    /// Divide by `‖w‖`.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompileOptions {
    /// Padded fan-in; defaults to the smallest power of two covering the circuit.
    pub fanin: Option<usize>,
    pub normalization: RowNormalization,
    /// Grid precision for dyadic rows; defaults to [`required_precision`] per level.
    pub precision: Option<u32>,
    /// Use the default cubic dynamics for every `D` gate.
    pub ode: bool,
}

/// First row of a block for gate weights `w` (length `s`), of length `2s`.
pub fn weight_row(w: &[i64], normalization: RowNormalization, p: PrecisionSpec) -> Vec<Complex64> {
    let mut row = vec![Complex64::new(0.0, 0.0); 2 * w.len()];
    let norm = (w.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
    if norm == 0.0 {
        row[1] = Complex64::new(1.0, 0.0);
        return row;
    }
    let g = match normalization {
        RowNormalization::Exact => 1.0 / norm,
        RowNormalization::Dyadic => {
            let scale = (1u64 << p.bits) as f64;
            (scale / norm).floor() / scale
        }
    };
    for (k, &x) in w.iter().enumerate() {
        row[2 * k] = Complex64::new(x as f64 * g, 0.0);
    }
    let leftover = 1.0 - (g * norm).powi(2);
    if leftover > 0.0 {
        row[1] = Complex64::new(leftover.sqrt(), 0.0);
    }
    row
}

fn next_pow2(x: usize) -> usize {
    x.max(1).next_power_of_two()
}

/// Compiles a single-output equality-threshold circuit.
pub fn ec_to_qnn(c: &BoolCircuit, opts: &CompileOptions) -> Result<QnnProgram, CompileError> {
    c.check_class(CircuitClass::Ec)?;
    let opened = open_circuit(c)?;
    let needed = next_pow2(opened.max_fanin());
    let s = match opts.fanin {
        Some(f) if f < needed => return Err(CompileError::FaninTooSmall { requested: f, needed }),
        Some(f) => f,
        None => needed,
    };
    let leveled = levelize(&opened, s)?;
    compile_leveled(&leveled, c.num_inputs(), opts)
}

/// Compiles an already levelled circuit.
pub fn compile_leveled(lc: &LeveledCircuit, num_inputs: usize, opts: &CompileOptions) -> Result<QnnProgram, CompileError> {
    let s = lc.fanin();
    let m = lc.log_fanin();
    let d = lc.depth();
    let w = lc.weight_bound().max(1);
    let sf = s as f64;

    let mut slots = Vec::with_capacity(2 * s.pow(d as u32));
    for leaf in lc.leaves() {
        slots.push(leaf);
        slots.push(Literal::Const(false));
    }
    let encoding = InputEncoding {
        num_inputs,
        amp: sf.powf(-(d as f64) / 2.0),
        slots,
    };

    let mut layers = Vec::with_capacity(d);
    for level in (1..=d).rev() {
        let p = opts.precision.map(PrecisionSpec::new).unwrap_or(required_precision(level, s, w));
        let delta = choose_delta(level, s, w);
        let input_amp = sf.powf(-(level as f64) / 2.0);
        let c_out = sf.powf(-((level - 1) as f64) / 2.0);
        let mut cache: HashMap<Vec<i64>, UnitaryMatrix> = HashMap::new();
        let mut blocks = Vec::with_capacity(lc.level(level).len());
        for j in 0..lc.level(level).len() {
            let weights = lc.gate_weights(level, j);
            if let Some(b) = cache.get(&weights) {
                blocks.push(b.clone());
                continue;
            }
            let row = weight_row(&weights, opts.normalization, p);
            if weights.iter().any(|&x| x != 0) {
                // nonzero integer sums are at least the smallest nonzero row entry scale
                let unit = row
                    .iter()
                    .step_by(2)
                    .zip(&weights)
                    .find(|(_, &x)| x != 0)
                    .map(|(e, &x)| e.re / x as f64)
                    .expect("nonzero weight");
                let min_amp = unit.abs() * input_amp;
                if delta >= min_amp {
                    return Err(CompileError::DeltaTooLarge { level, delta, min_amp });
                }
            }
            let block = complete_orthonormal_block(&row)?;
            cache.insert(weights, block.clone());
            blocks.push(block);
        }
        let mut dgate = DGateSpec::ideal(m + 1, delta, c_out, c_out);
        if opts.ode {
            dgate = dgate.with_ode()?;
        }
        layers.push(QnnLayer {
            level,
            precision: Some(p.bits),
            operator: LayerOperator::Unitary(BlockBandedUnitary::new(blocks)?),
            dgate,
            sink: (1..=m).collect(),
        });
    }
    QnnProgram::new(m * d + 1, encoding, layers)
}
