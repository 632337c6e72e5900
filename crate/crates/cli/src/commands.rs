use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use num_complex::Complex64;
use qnn_core::circuit::{BoolCircuit, CircuitClass, CircuitMetrics};
use qnn_core::compile::{ec_to_qnn, quantize_program, CompileError, CompileOptions, QnnProgram, RowNormalization};
use qnn_core::dynamics::{implicit_solution_lhs, integrate_amplitude, solve_rate, DGateDynamics, DynamicsError};
use qnn_core::runtime::{simulate, DModeChoice, RuntimeError, SimOptions};
use qnn_core::state::fmt_real;
use qnn_core::transforms::{ec_to_tc, nand_circuit_to_ec, tc_to_ec, weighted_tc_to_tc, BoundsReport, EcVariant, TransformError};
use qnn_core::unitary::{build_encoder_unitary, MatrixError};
use qnn_core::verify::{verify, Artifact, VerifyError, VerifyMode};
use qnn_core::{ParseError, StateError, StateVector};
use serde_json::{json, Value};
use thiserror::Error;

use crate::output::{emit, read, render};
use crate::{Command, DMode, Normalization, SourceClass, TargetClass, Variant};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Compile {
            from,
            to,
            input,
            output,
            report,
            variant,
            fanin,
            normalization,
            precision,
            ode,
            json,
        } => {
            let variant = match variant {
                Variant::Merged => EcVariant::Merged,
                Variant::Naive => EcVariant::Naive,
            };
            let opts = CompileOptions {
                fanin,
                normalization: match normalization {
                    Normalization::Dyadic => RowNormalization::Dyadic,
                    Normalization::Exact => RowNormalization::Exact,
                },
                precision,
                ode,
            };
            compile(&input, from, to, variant, &opts, output.as_deref(), report.as_deref(), json)
        }
        Command::Simulate {
            program,
            input,
            d_mode,
            precision,
            trace,
            evolve_all,
            collapse_seed,
            output,
            json,
        } => {
            let opts = SimOptions {
                d_mode: mode_choice(d_mode),
                evolve_all,
                ancilla_collapse: collapse_seed,
            };
            simulate_cmd(&program, &input, &opts, precision, trace, output.as_deref(), json)
        }
        Command::Verify {
            left,
            right,
            samples,
            seed,
            d_mode,
            output,
            json,
        } => {
            let mode = match samples {
                Some(samples) => VerifyMode::Sampled { samples, seed },
                None => VerifyMode::Exhaustive,
            };
            verify_cmd(&left, &right, mode, mode_choice(d_mode), output.as_deref(), json)
        }
        Command::DgatePlan {
            delta,
            delta0,
            delta1,
            eps,
            time,
            a0,
            rows,
            output,
            json,
        } => dgate_plan(delta, delta0, delta1, eps, time, a0, rows, output.as_deref(), json),
        Command::Encode {
            bits,
            sink_qubit,
            output,
            json,
        } => encode(&bits, sink_qubit, output.as_deref(), json),
    }
}

fn mode_choice(m: DMode) -> DModeChoice {
    match m {
        DMode::Program => DModeChoice::AsCompiled,
        DMode::Ideal => DModeChoice::Ideal,
        DMode::Ode => DModeChoice::Ode,
    }
}

fn parse_bits(s: &str) -> Result<Vec<bool>, CliError> {
    s.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(CliError::Usage(format!("bit string `{s}` may only hold 0 and 1"))),
        })
        .collect()
}

fn load_circuit(path: &Path) -> Result<BoolCircuit, CliError> {
    BoolCircuit::parse_text(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn load_program(path: &Path) -> Result<QnnProgram, CliError> {
    QnnProgram::parse_text(&read(path)?).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn is_program(text: &str) -> bool {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("qnn "))
}

fn load_artifact(path: &Path, d_mode: DModeChoice) -> Result<Artifact, CliError> {
    let text = read(path)?;
    let parse_err = |source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    };
    if is_program(&text) {
        let prog = QnnProgram::parse_text(&text).map_err(parse_err)?;
        Ok(Artifact::Qnn(
            prog,
            SimOptions {
                d_mode,
                ..Default::default()
            },
        ))
    } else {
        Ok(Artifact::Circuit(BoolCircuit::parse_text(&text).map_err(parse_err)?))
    }
}

fn to_unit_tc(c: BoolCircuit) -> Result<BoolCircuit, TransformError> {
    if c.is_class(CircuitClass::Tc) {
        Ok(c)
    } else {
        weighted_tc_to_tc(&c, c.weight_bound().max(1))
    }
}

fn convert(c: &BoolCircuit, from: SourceClass, to: TargetClass, variant: EcVariant) -> Result<BoolCircuit, TransformError> {
    let ec = || -> Result<BoolCircuit, TransformError> {
        match from {
            SourceClass::Tc => tc_to_ec(c, variant),
            SourceClass::Wtc => tc_to_ec(&to_unit_tc(c.clone())?, variant),
            SourceClass::Ec => Ok(c.clone()),
            SourceClass::Nand => nand_circuit_to_ec(c),
        }
    };
    let wtc = || -> Result<BoolCircuit, TransformError> {
        match from {
            SourceClass::Tc | SourceClass::Wtc => Ok(c.clone()),
            SourceClass::Ec => ec_to_tc(c),
            SourceClass::Nand => ec_to_tc(&nand_circuit_to_ec(c)?),
        }
    };
    match to {
        TargetClass::Ec | TargetClass::Qnn => ec(),
        TargetClass::Wtc => wtc(),
        TargetClass::Tc => to_unit_tc(wtc()?),
    }
}

#[allow(clippy::too_many_arguments)]
fn compile(
    input: &Path,
    from: SourceClass,
    to: TargetClass,
    variant: EcVariant,
    opts: &CompileOptions,
    output: Option<&Path>,
    report: Option<&Path>,
    json: bool,
) -> Result<ExitCode, CliError> {
    let c = load_circuit(input)?;
    let class = match from {
        SourceClass::Tc => CircuitClass::Tc,
        SourceClass::Wtc => CircuitClass::WeightedTc,
        SourceClass::Ec => CircuitClass::Ec,
        SourceClass::Nand => CircuitClass::Nand,
    };
    c.check_class(class).map_err(TransformError::from)?;
    let converted = convert(&c, from, to, variant)?;
    let (text, bounds) = if to == TargetClass::Qnn {
        let prog = ec_to_qnn(&converted, opts)?;
        let m = CircuitMetrics::of(&c);
        let bounds = format!(
            "input size={} depth={} weight_bound={}\noutput qubits={} depth={} layers={}\n",
            m.size,
            m.depth,
            m.weight_bound,
            prog.num_qubits(),
            prog.depth(),
            prog.layers().len()
        );
        let value = json.then(|| serde_json::to_value(&prog)).transpose()?;
        (render(value.map(|v| ("program", v)), &prog.to_text())?, bounds)
    } else {
        let value = json.then(|| serde_json::to_value(&converted)).transpose()?;
        let bounds = BoundsReport::between(&c, &converted).to_string();
        (render(value.map(|v| ("circuit", v)), &converted.to_text())?, bounds)
    };
    emit(output, &text)?;
    if let Some(path) = report {
        emit(Some(path), &render(None, &bounds)?)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn simulate_cmd(
    path: &Path,
    input: &str,
    opts: &SimOptions,
    precision: Option<u32>,
    trace: bool,
    output: Option<&Path>,
    json: bool,
) -> Result<ExitCode, CliError> {
    let mut prog = load_program(path)?;
    if let Some(p) = precision {
        if p == 0 {
            return Err(CliError::Usage("precision must be at least 1".into()));
        }
        prog = quantize_program(&prog, &vec![p; prog.layers().len()])?;
    }
    let bits = parse_bits(input)?;
    let r = simulate(&prog, &bits, opts)?;
    let text = if json {
        let mut value = serde_json::to_value(&r)?;
        value["state"] = serde_json::to_value(&r.state)?;
        if !trace {
            value.as_object_mut().expect("object").remove("layers");
        }
        render(Some(("simulation", value)), "")?
    } else {
        let mut body = format!(
            "output {}\namp {} {}\nprob_zero {}\nstate\n{}",
            u8::from(r.output),
            fmt_real(r.output_amp.re),
            fmt_real(r.output_amp.im),
            fmt_real(r.prob_zero()),
            r.state.dump()
        );
        if trace {
            for t in &r.layers {
                let _ = write!(
                    body,
                    "layer level={} total_after_unitary={} total={} sink={} unsettled={}",
                    t.level,
                    fmt_real(t.total_after_unitary),
                    fmt_real(t.total()),
                    fmt_real(t.sink_prob),
                    t.unsettled
                );
                if let Some(p) = t.collapse_prob_zero {
                    let _ = write!(body, " collapse_prob_zero={}", fmt_real(p));
                }
                body.push('\n');
                for (k, a) in t.checked.iter().enumerate().filter(|(_, a)| a.norm() > 0.0) {
                    let _ = writeln!(body, "checked {k} {} {}", fmt_real(a.re), fmt_real(a.im));
                }
                for (k, a) in t.live.iter().enumerate().filter(|(_, a)| a.norm() > 0.0) {
                    let _ = writeln!(body, "live {k} {} {}", fmt_real(a.re), fmt_real(a.im));
                }
            }
        }
        render(None, &body)?
    };
    emit(output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn verify_cmd(
    left: &Path,
    right: &Path,
    mode: VerifyMode,
    d_mode: DModeChoice,
    output: Option<&Path>,
    json: bool,
) -> Result<ExitCode, CliError> {
    let la = load_artifact(left, d_mode)?;
    let ra = load_artifact(right, d_mode)?;
    let report = verify(
        (&left.display().to_string(), &la),
        (&right.display().to_string(), &ra),
        mode,
    )?;
    let value = json.then(|| serde_json::to_value(&report)).transpose()?;
    emit(output, &render(value.map(|v| ("report", v)), &report.to_string())?)?;
    Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[allow(clippy::too_many_arguments)]
fn dgate_plan(
    delta: f64,
    delta0: f64,
    delta1: f64,
    eps: f64,
    time: f64,
    a0: Vec<f64>,
    rows: usize,
    output: Option<&Path>,
    json: bool,
) -> Result<ExitCode, CliError> {
    if rows < 2 {
        return Err(CliError::Usage("need at least 2 rows".into()));
    }
    let plan = solve_rate(delta, delta0, delta1, eps, time)?;
    let dynamics = DGateDynamics::plan(delta, delta0, delta1, eps, time)?;
    let starts = if a0.is_empty() { vec![delta0, delta1] } else { a0 };
    let mut table = Vec::new();
    for &start in &starts {
        if !(0.0..=1.0).contains(&start) {
            return Err(CliError::Usage(format!("a0 = {start} outside [0, 1]")));
        }
        let traj = integrate_amplitude(Complex64::new(start, 0.0), &dynamics, time)?;
        let last = traj.times.len() - 1;
        for k in 0..rows {
            let i = (k * last + (rows - 1) / 2) / (rows - 1);
            let (t, a) = (traj.times[i], traj.amps[i].norm());
            let lhs = implicit_solution_lhs(a, start, delta).ok();
            table.push((start, t, a, lhs, (-dynamics.rate * t).exp()));
        }
    }
    let text = if json {
        let rows: Vec<Value> = table
            .iter()
            .map(|&(a0, t, a, lhs, decay)| json!({"a0": a0, "t": t, "abs_a": a, "implicit_lhs": lhs, "exp_neg_rt": decay}))
            .collect();
        let value = json!({"r0": plan.r0, "r1": plan.r1, "rate": plan.rate, "dynamics": dynamics, "trajectory": rows});
        render(Some(("plan", value)), "")?
    } else {
        let mut body = format!(
            "r0 {}\nr1 {}\nrate {}\na0,t,abs_a,implicit_lhs,exp_neg_rt\n",
            fmt_real(plan.r0),
            fmt_real(plan.r1),
            fmt_real(plan.rate)
        );
        for (a0, t, a, lhs, decay) in table {
            let lhs = lhs.map_or_else(|| "nan".to_string(), fmt_real);
            let _ = writeln!(body, "{},{},{},{lhs},{}", fmt_real(a0), fmt_real(t), fmt_real(a), fmt_real(decay));
        }
        render(None, &body)?
    };
    emit(output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn encode(bits: &str, sink_qubit: bool, output: Option<&Path>, json: bool) -> Result<ExitCode, CliError> {
    let b = parse_bits(bits)?;
    if !b.len().is_power_of_two() {
        return Err(CliError::Usage(format!("bit count {} is not a power of two", b.len())));
    }
    let state = if sink_qubit {
        build_encoder_unitary(b.len())?.encode(&b)?
    } else {
        StateVector::encode_dense(&b, (b.len() as f64).sqrt().recip())?
    };
    let value = json.then(|| serde_json::to_value(&state)).transpose()?;
    emit(output, &render(value.map(|v| ("state", v)), &state.dump())?)?;
    Ok(ExitCode::SUCCESS)
}
