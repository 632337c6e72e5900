//! Layer-by-layer simulation of a [`QnnProgram`].
//!
//! Each layer applies its operator, then its `D` gate: the amplitude of every
//! basis state whose low `width` bits are zero is thresholded (or evolved and
//! snapped in ODE mode), all other amplitudes go to the sink, and the layer's
//! sink qubits are discarded. The answer is read from basis state `|0⟩` of
//! the final state.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::compile::{CompileError, DGateSpec, DMode, QnnLayer, QnnProgram};
use crate::dynamics::{append_ancilla, collapse_with_ancilla, integrate_amplitude, DynamicsError, MAGNITUDE_SLACK};
use crate::state::{StateError, StateVector};
use crate::unitary::MatrixError;

#[derive(Debug, Error, PartialEq)]
pub enum RuntimeError {
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error("layer {layer}: {source}")]
    Dynamics {
        layer: usize,
        #[source]
        source: DynamicsError,
    },
}

/// Which `D` behavior to use for every layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum DModeChoice {
    /// Whatever each layer's gate specifies.
    #[default]
    AsCompiled,
    Ideal,
    /// Layers without stored dynamics get their default dynamics.
    Ode,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimOptions {
    pub d_mode: DModeChoice,
    /// In ODE mode, also evolve the amplitudes the gate does not check
    /// before they are routed to the sink.
    pub evolve_all: bool,
    /// After each `D` gate, shelter `q₀ = 1` amplitudes in an ancilla and
    /// measure `q₀` along `|0⟩`, sampling with this seed.
    pub ancilla_collapse: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerTrace {
    pub level: usize,
    /// `Σ|amp|² + sink` after the operator.
    pub total_after_unitary: f64,
    /// Amplitudes the `D` gate checked, in index order.
    pub checked: Vec<Complex64>,
    /// Live amplitudes after the sink step.
    pub live: Vec<Complex64>,
    pub sink_prob: f64,
    /// Checked amplitudes whose evolved magnitude stayed in `[ε, 1 − ε]`.
    pub unsettled: usize,
    /// Probability of reading `q₀ = 0` in the ancilla collapse step.
    pub collapse_prob_zero: Option<f64>,
}

impl LayerTrace {
    pub fn total(&self) -> f64 {
        self.live.iter().map(|a| a.norm_sqr()).sum::<f64>() + self.sink_prob
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    #[serde(skip)]
    pub state: StateVector,
    pub output_amp: Complex64,
    /// `|output_amp| > c_out / 2` for the last gate's `c_out`.
    pub output: bool,
    pub layers: Vec<LayerTrace>,
}

impl SimResult {
    /// Probability of reading `|0⟩` on every remaining qubit.
    pub fn prob_zero(&self) -> f64 {
        self.output_amp.norm_sqr()
    }
}

fn effective_gate(g: &DGateSpec, choice: DModeChoice) -> Result<DGateSpec, DynamicsError> {
    match (choice, g.mode) {
        (DModeChoice::AsCompiled, _) | (DModeChoice::Ode, DMode::Ode(_)) => Ok(*g),
        (DModeChoice::Ideal, _) => Ok(DGateSpec { mode: DMode::Ideal, ..*g }),
        (DModeChoice::Ode, DMode::Ideal) => g.with_ode(),
    }
}

/// `D` on one checked amplitude; returns the new value and whether it settled.
fn threshold(a: Complex64, g: &DGateSpec) -> Result<(Complex64, bool), DynamicsError> {
    let zero = Complex64::new(0.0, 0.0);
    let high = Complex64::new(g.c_out, 0.0);
    match g.mode {
        DMode::Ideal => Ok((if a.norm() > g.delta { high } else { zero }, true)),
        DMode::Ode(dynamics) => {
            let x = a / g.scale;
            let mag = x.norm();
            if mag > 1.0 + MAGNITUDE_SLACK {
                return Err(DynamicsError::AmplitudeTooLarge(mag));
            }
            if mag == 0.0 {
                return Ok((zero, true));
            }
            let x = if mag > 1.0 { x / mag } else { x };
            let end = integrate_amplitude(x, &dynamics, dynamics.time)?.final_amp().norm();
            let settled = end < dynamics.eps || end > 1.0 - dynamics.eps;
            Ok((if end > dynamics.delta { high } else { zero }, settled))
        }
    }
}

fn evolve_free(a: Complex64, g: &DGateSpec) -> Result<Complex64, DynamicsError> {
    match g.mode {
        DMode::Ode(dynamics) if a.norm() > 0.0 => {
            let x = a / g.scale;
            let x = if x.norm() > 1.0 { x / x.norm() } else { x };
            Ok(integrate_amplitude(x, &dynamics, dynamics.time)?.final_amp() * g.scale)
        }
        _ => Ok(a),
    }
}

fn run_layer(
    index: usize,
    layer: &QnnLayer,
    state: &StateVector,
    opts: &SimOptions,
) -> Result<(StateVector, LayerTrace), RuntimeError> {
    let dyn_err = |source| RuntimeError::Dynamics { layer: index, source };
    let g = effective_gate(&layer.dgate, opts.d_mode).map_err(dyn_err)?;
    let after_u = layer.operator.apply(state)?;
    let total_after_unitary = after_u.total_prob();
    let mask = (1usize << g.width) - 1;

    let mut amps = after_u.amps().to_vec();
    let mut checked = Vec::with_capacity(amps.len() >> g.width);
    let mut unsettled = 0;
    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask == 0 {
            checked.push(*a);
            let (out, settled) = threshold(*a, &g).map_err(dyn_err)?;
            unsettled += usize::from(!settled);
            *a = out;
        } else if opts.evolve_all {
            *a = evolve_free(*a, &g).map_err(dyn_err)?;
        }
    }

    let mut collapse_prob_zero = None;
    if let Some(seed) = opts.ancilla_collapse {
        let widened = append_ancilla(&StateVector::from_parts(amps, after_u.sink_prob())?)?;
        let m = collapse_with_ancilla(&widened, 0, seed).map_err(dyn_err)?;
        collapse_prob_zero = Some(m.prob_zero);
        let top = widened.num_qubits() - 1;
        amps = m.state.amps()[..1 << top].to_vec();
    }

    for (i, a) in amps.iter_mut().enumerate() {
        if i & mask != 0 {
            *a = Complex64::new(0.0, 0.0);
        }
    }
    let next = StateVector::with_implied_sink(amps)?.discard_to_sink(&layer.sink)?;
    let trace = LayerTrace {
        level: layer.level,
        total_after_unitary,
        checked,
        live: next.amps().to_vec(),
        sink_prob: next.sink_prob(),
        unsettled,
        collapse_prob_zero,
    };
    Ok((next, trace))
}

/// Runs `prog` on the classical input `bits`.
pub fn simulate(prog: &QnnProgram, bits: &[bool], opts: &SimOptions) -> Result<SimResult, RuntimeError> {
    let mut state = prog.encoding().prepare(bits)?;
    let mut layers = Vec::with_capacity(prog.layers().len());
    for (i, layer) in prog.layers().iter().enumerate() {
        let (next, trace) = run_layer(i, layer, &state, opts)?;
        state = next;
        layers.push(trace);
    }
    let c_out = prog.layers().last().expect("programs have layers").dgate.c_out;
    let output_amp = state.amp(0);
    Ok(SimResult {
        output: output_amp.norm() > c_out / 2.0,
        output_amp,
        state,
        layers,
    })
}

/// Boolean output of `prog` on `bits`.
pub fn run_bool(prog: &QnnProgram, bits: &[bool], opts: &SimOptions) -> Result<bool, RuntimeError> {
    simulate(prog, bits, opts).map(|r| r.output)
}
