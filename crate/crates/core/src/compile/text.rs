//! Program file format:
//!
//! ```text
//! qnn qubits=3 inputs=2 m=2 d=1
//! encode amp=5e-1 slots x0 0 x1 0 1 0 0 0
//! layer level=1 precision=8 operator=unitary
//! blocks 1
//! dim 8
//! ...
//! dgate width=3 delta=6.25e-2 cout=1e0 scale=1e0 mode=ideal
//! sink 1 2
//! ```
//!
//! Slot tokens are `xK` (input `K`), `!xK`, `0` and `1`. `m` and `d` are
//! written for canonical programs only. An `ode` gate also carries
//! `rate= delta0= delta1= eps= time=`.

use std::collections::HashMap;
use std::fmt::Write;

use super::{DGateSpec, DMode, InputEncoding, LayerOperator, QnnLayer, QnnProgram};
use crate::circuit::Literal;
use crate::dynamics::DGateDynamics;
use crate::state::fmt_real;
use crate::unitary::BlockBandedMatrix;
use crate::{parse_f64, text_lines, ParseError};

fn slot_token(l: &Literal) -> String {
    match *l {
        Literal::Input { index, negated: false } => format!("x{index}"),
        Literal::Input { index, negated: true } => format!("!x{index}"),
        Literal::Const(b) => u8::from(b).to_string(),
    }
}

fn parse_slot(t: &str, line: usize) -> Result<Literal, ParseError> {
    match t {
        "0" => return Ok(Literal::Const(false)),
        "1" => return Ok(Literal::Const(true)),
        _ => {}
    }
    let (negated, rest) = match t.strip_prefix('!') {
        Some(r) => (true, r),
        None => (false, t),
    };
    rest.strip_prefix('x')
        .and_then(|k| k.parse().ok())
        .map(|index| Literal::Input { index, negated })
        .ok_or_else(|| ParseError::new(line, format!("bad slot `{t}`")))
}

/// `key=value` fields after the leading keyword.
fn fields(rest: &str, line: usize) -> Result<HashMap<&str, &str>, ParseError> {
    rest.split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| ParseError::new(line, format!("expected key=value, got `{kv}`")))
        })
        .collect()
}

fn field<'a>(f: &HashMap<&str, &'a str>, key: &str, line: usize) -> Result<&'a str, ParseError> {
    f.get(key)
        .copied()
        .ok_or_else(|| ParseError::new(line, format!("missing `{key}=`")))
}

fn int_field(f: &HashMap<&str, &str>, key: &str, line: usize) -> Result<usize, ParseError> {
    let v = field(f, key, line)?;
    v.parse().map_err(|_| ParseError::new(line, format!("bad {key} `{v}`")))
}

fn real_field(f: &HashMap<&str, &str>, key: &str, line: usize) -> Result<f64, ParseError> {
    parse_f64(field(f, key, line)?, line)
}

impl QnnProgram {
    pub fn to_text(&self) -> String {
        let mut out = format!("qnn qubits={} inputs={}", self.num_qubits, self.encoding.num_inputs);
        if let Ok(shape) = self.canonical_shape() {
            let _ = write!(out, " m={} d={}", shape.m, shape.d);
        }
        out.push('\n');
        let slots: Vec<String> = self.encoding.slots.iter().map(slot_token).collect();
        let _ = writeln!(out, "encode amp={} slots {}", fmt_real(self.encoding.amp), slots.join(" "));
        for layer in &self.layers {
            let precision = layer.precision.map_or("none".to_string(), |p| p.to_string());
            let (kind, blocks) = match &layer.operator {
                LayerOperator::Unitary(u) => ("unitary", u.dump()),
                LayerOperator::Quantized(q) => ("quantized", q.dump()),
            };
            let _ = writeln!(out, "layer level={} precision={precision} operator={kind}", layer.level);
            out.push_str(&blocks);
            let g = &layer.dgate;
            let _ = write!(
                out,
                "dgate width={} delta={} cout={} scale={}",
                g.width,
                fmt_real(g.delta),
                fmt_real(g.c_out),
                fmt_real(g.scale)
            );
            match g.mode {
                DMode::Ideal => out.push_str(" mode=ideal\n"),
                DMode::Ode(d) => {
                    let _ = writeln!(
                        out,
                        " mode=ode rate={} delta0={} delta1={} eps={} time={}",
                        fmt_real(d.rate),
                        fmt_real(d.delta0),
                        fmt_real(d.delta1),
                        fmt_real(d.eps),
                        fmt_real(d.time)
                    );
                }
            }
            out.push_str("sink");
            for q in &layer.sink {
                let _ = write!(out, " {q}");
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, ParseError> {
        let lines: Vec<(usize, &str)> = text_lines(text).collect();
        let mut pos = 0;
        let mut next = |want: &str| -> Result<(usize, &str), ParseError> {
            let &(line, l) = lines
                .get(pos)
                .ok_or_else(|| ParseError::new(0, format!("unexpected end of file, expected `{want}`")))?;
            let rest = l
                .strip_prefix(want)
                .filter(|r| r.is_empty() || r.starts_with(' '))
                .ok_or_else(|| ParseError::new(line, format!("expected `{want}`")))?;
            pos += 1;
            Ok((line, rest.trim()))
        };

        let (hline, header) = next("qnn")?;
        let h = fields(header, hline)?;
        let num_qubits = int_field(&h, "qubits", hline)?;
        let num_inputs = int_field(&h, "inputs", hline)?;
        let declared = match (h.get("m"), h.get("d")) {
            (Some(_), Some(_)) => Some((int_field(&h, "m", hline)?, int_field(&h, "d", hline)?)),
            (None, None) => None,
            _ => return Err(ParseError::new(hline, "`m=` and `d=` go together")),
        };

        let (eline, enc) = next("encode")?;
        let (amp_part, slot_part) = enc
            .split_once(" slots")
            .ok_or_else(|| ParseError::new(eline, "expected `encode amp=<v> slots ...`"))?;
        let amp = real_field(&fields(amp_part, eline)?, "amp", eline)?;
        let slots = slot_part
            .split_whitespace()
            .map(|t| parse_slot(t, eline))
            .collect::<Result<_, _>>()?;
        let encoding = InputEncoding {
            num_inputs,
            amp,
            slots,
        };

        let mut layers = Vec::new();
        while pos < lines.len() {
            let (lline, l) = lines[pos];
            let rest = l
                .strip_prefix("layer ")
                .ok_or_else(|| ParseError::new(lline, "expected `layer`"))?;
            let lf = fields(rest, lline)?;
            let level = int_field(&lf, "level", lline)?;
            let precision = match field(&lf, "precision", lline)? {
                "none" => None,
                v => Some(v.parse().map_err(|_| ParseError::new(lline, format!("bad precision `{v}`")))?),
            };
            let kind = field(&lf, "operator", lline)?;
            pos += 1;
            let (blocks, used) = BlockBandedMatrix::parse_lines(&lines[pos..])?;
            let operator = match kind {
                "unitary" => LayerOperator::Unitary(
                    blocks
                        .into_unitary()
                        .map_err(|e| ParseError::new(lines[pos].0, e.to_string()))?,
                ),
                "quantized" => LayerOperator::Quantized(blocks),
                other => return Err(ParseError::new(lline, format!("unknown operator kind `{other}`"))),
            };
            pos += used;

            let &(dline, dl) = lines
                .get(pos)
                .ok_or_else(|| ParseError::new(0, "unexpected end of file, expected `dgate`"))?;
            let dg = dl
                .strip_prefix("dgate ")
                .ok_or_else(|| ParseError::new(dline, "expected `dgate`"))?;
            let df = fields(dg, dline)?;
            let mut dgate = DGateSpec::ideal(
                int_field(&df, "width", dline)?,
                real_field(&df, "delta", dline)?,
                real_field(&df, "cout", dline)?,
                real_field(&df, "scale", dline)?,
            );
            match field(&df, "mode", dline)? {
                "ideal" => {}
                "ode" => {
                    let dynamics = DGateDynamics {
                        rate: real_field(&df, "rate", dline)?,
                        delta: dgate.delta / dgate.scale,
                        delta0: real_field(&df, "delta0", dline)?,
                        delta1: real_field(&df, "delta1", dline)?,
                        eps: real_field(&df, "eps", dline)?,
                        time: real_field(&df, "time", dline)?,
                    };
                    dynamics
                        .validate()
                        .map_err(|e| ParseError::new(dline, e.to_string()))?;
                    dgate.mode = DMode::Ode(dynamics);
                }
                other => return Err(ParseError::new(dline, format!("unknown mode `{other}`"))),
            }
            pos += 1;

            let &(sline, sl) = lines
                .get(pos)
                .ok_or_else(|| ParseError::new(0, "unexpected end of file, expected `sink`"))?;
            let sink = sl
                .strip_prefix("sink")
                .filter(|r| r.is_empty() || r.starts_with(' '))
                .ok_or_else(|| ParseError::new(sline, "expected `sink`"))?
                .split_whitespace()
                .map(|q| q.parse().map_err(|_| ParseError::new(sline, format!("bad qubit `{q}`"))))
                .collect::<Result<_, _>>()?;
            pos += 1;
            layers.push(QnnLayer {
                level,
                precision,
                operator,
                dgate,
                sink,
            });
        }
        let prog = QnnProgram::new(num_qubits, encoding, layers).map_err(|e| ParseError::new(0, e.to_string()))?;
        if let Some((m, d)) = declared {
            let shape = prog
                .canonical_shape()
                .map_err(|e| ParseError::new(hline, e.to_string()))?;
            if (shape.m, shape.d) != (m, d) {
                return Err(ParseError::new(hline, format!("declared m={m} d={d}, found m={} d={}", shape.m, shape.d)));
            }
        }
        Ok(prog)
    }
}
