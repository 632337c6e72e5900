//! Line format, one node per line:
//!
//! ```text
//! x1 INPUT
//! one CONST1
//! g TH 2 x1 !x2 one
//! h WTH -1 (2:x1) (-3:g)
//! e ET (1:x1) (1:x2) (-2:one)
//! n NAND g h
//! OUTPUT e n
//! ```
//!
//! `!name` reads an input complemented. Blank lines and `#` comments are skipped.

use std::collections::HashMap;
use std::fmt::Write;

use super::{BoolCircuit, Edge, GateKind, NodeId};
use crate::{text_lines, ParseError};

fn pred_token(c: &BoolCircuit, e: &Edge) -> String {
    let name = &c.node(e.src).name;
    if e.negated {
        format!("!{name}")
    } else {
        name.clone()
    }
}

impl BoolCircuit {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in self.nodes() {
            let preds = |weighted: bool| -> String {
                n.fanin
                    .iter()
                    .map(|e| {
                        let p = pred_token(self, e);
                        if weighted {
                            format!(" ({}:{p})", e.weight)
                        } else {
                            format!(" {p}")
                        }
                    })
                    .collect()
            };
            let body = match n.kind {
                GateKind::Input(_) => "INPUT".to_string(),
                GateKind::Const0 => "CONST0".to_string(),
                GateKind::Const1 => "CONST1".to_string(),
                GateKind::Th { threshold } => format!("TH {threshold}{}", preds(false)),
                GateKind::Wth { threshold } => format!("WTH {threshold}{}", preds(true)),
                GateKind::Et => format!("ET{}", preds(true)),
                GateKind::Nand => format!("NAND{}", preds(false)),
            };
            writeln!(out, "{} {body}", n.name).expect("string write");
        }
        let outs: Vec<&str> = self.outputs().iter().map(|o| self.node(*o).name.as_str()).collect();
        writeln!(out, "OUTPUT {}", outs.join(" ")).expect("string write");
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, ParseError> {
        let mut c = BoolCircuit::new();
        let mut ids: HashMap<String, NodeId> = HashMap::new();
        let mut outputs: Option<Vec<NodeId>> = None;
        for (line, l) in text_lines(text) {
            let err = |m: String| ParseError::new(line, m);
            if outputs.is_some() {
                return Err(err("content after OUTPUT".into()));
            }
            let mut tok = l.split_whitespace();
            let name = tok.next().expect("non-empty line");
            if name == "OUTPUT" {
                let outs = tok
                    .map(|t| ids.get(t).copied().ok_or_else(|| err(format!("unknown node `{t}`"))))
                    .collect::<Result<_, _>>()?;
                outputs = Some(outs);
                continue;
            }
            if name.starts_with('!') || name.contains(['(', ')', ':']) {
                return Err(err(format!("invalid node name `{name}`")));
            }
            let kind = tok.next().ok_or_else(|| err(format!("node `{name}` has no kind")))?;
            let rest: Vec<&str> = tok.collect();
            let pred = |t: &str| -> Result<Edge, ParseError> {
                let (negated, t) = match t.strip_prefix('!') {
                    Some(t) => (true, t),
                    None => (false, t),
                };
                let src = *ids.get(t).ok_or_else(|| err(format!("unknown predecessor `{t}`")))?;
                Ok(Edge { src, weight: 1, negated })
            };
            let weighted = |t: &str| -> Result<Edge, ParseError> {
                let inner = t.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(t);
                let (w, p) = inner
                    .split_once(':')
                    .ok_or_else(|| err(format!("expected (weight:pred), got `{t}`")))?;
                let weight = w.parse().map_err(|_| err(format!("bad weight `{w}`")))?;
                Ok(Edge { weight, ..pred(p)? })
            };
            let threshold = |rest: &[&str]| -> Result<i64, ParseError> {
                let t = rest.first().ok_or_else(|| err("missing threshold".into()))?;
                t.parse().map_err(|_| err(format!("bad threshold `{t}`")))
            };
            let no_args = |rest: &[&str]| {
                if rest.is_empty() {
                    Ok(())
                } else {
                    Err(err(format!("{kind} takes no arguments")))
                }
            };
            let gate = |kind: GateKind, fanin: Vec<Edge>, c: &mut BoolCircuit| {
                c.add_named_gate(name.to_string(), kind, fanin).map_err(|e| err(e.to_string()))
            };
            let id = match kind {
                "INPUT" => {
                    no_args(&rest)?;
                    c.add_input_named(name.to_string()).map_err(|e| err(e.to_string()))?
                }
                "CONST0" | "CONST1" => {
                    no_args(&rest)?;
                    c.add_constant_named(name.to_string(), kind == "CONST1")
                        .map_err(|e| err(e.to_string()))?
                }
                "TH" => {
                    let threshold = threshold(&rest)?;
                    let fanin = rest[1..].iter().map(|t| pred(t)).collect::<Result<_, _>>()?;
                    gate(GateKind::Th { threshold }, fanin, &mut c)?
                }
                "WTH" => {
                    let threshold = threshold(&rest)?;
                    let fanin = rest[1..].iter().map(|t| weighted(t)).collect::<Result<_, _>>()?;
                    gate(GateKind::Wth { threshold }, fanin, &mut c)?
                }
                "ET" => {
                    let fanin = rest.iter().map(|t| weighted(t)).collect::<Result<_, _>>()?;
                    gate(GateKind::Et, fanin, &mut c)?
                }
                "NAND" => {
                    let fanin = rest.iter().map(|t| pred(t)).collect::<Result<_, _>>()?;
                    gate(GateKind::Nand, fanin, &mut c)?
                }
                other => return Err(err(format!("unknown node kind `{other}`"))),
            };
            ids.insert(name.to_string(), id);
        }
        let outputs = outputs.ok_or_else(|| ParseError::new(0, "missing OUTPUT line"))?;
        c.set_outputs(outputs).expect("ids come from this circuit");
        Ok(c)
    }
}
