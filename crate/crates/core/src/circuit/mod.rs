//! Classical circuits over threshold, weighted threshold, equality-threshold
//! and NAND gates.
//!
//! Nodes are stored in topological order: every edge points at a node with a
//! smaller index. Input nodes may be read complemented through
//! [`Edge::negated`]; constant-0 and constant-1 nodes are ordinary nodes.

mod eval;
mod passes;
mod text;

use std::collections::{HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

pub use eval::{assignment_from_index, find_counterexample, MAX_EXHAUSTIVE_INPUTS};
pub use passes::{levelize, open_circuit, output_cone, LeveledCircuit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GateKind {
    /// Primary input; the payload is its position in the assignment.
    Input(usize),
    Const0,
    Const1,
    /// Unit-weight threshold gate: 1 iff the number of true inputs reaches the threshold.
    Th { threshold: i64 },
    /// Weighted threshold gate: 1 iff `Σ wᵢxᵢ ≥ threshold`.
    Wth { threshold: i64 },
    /// Equality-threshold gate: 0 iff `Σ wᵢxᵢ = 0`.
    Et,
    Nand,
}

impl GateKind {
    pub fn is_gate(&self) -> bool {
        !matches!(self, GateKind::Input(_) | GateKind::Const0 | GateKind::Const1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Edge {
    pub src: NodeId,
    pub weight: i64,
    /// Reads the complement of an input node.
    pub negated: bool,
}

impl Edge {
    pub fn new(src: NodeId, weight: i64) -> Self {
        Self {
            src,
            weight,
            negated: false,
        }
    }

    pub fn unit(src: NodeId) -> Self {
        Self::new(src, 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Node {
    pub name: String,
    pub kind: GateKind,
    pub fanin: Vec<Edge>,
}

/// A leaf signal of a circuit: a possibly complemented input, or a constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Literal {
    Input { index: usize, negated: bool },
    Const(bool),
}

impl Literal {
    pub fn value(&self, assignment: &[bool]) -> bool {
        match *self {
            Literal::Input { index, negated } => assignment[index] ^ negated,
            Literal::Const(b) => b,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("node `{node}`: predecessor {pred} does not precede it")]
    NotTopological { node: String, pred: usize },
    #[error("node `{node}`: only input nodes can be read complemented")]
    NegatedNonInput { node: String },
    #[error("node `{node}`: {reason}")]
    InvalidGate { node: String, reason: String },
    #[error("duplicate node name `{0}`")]
    DuplicateName(String),
    #[error("unknown node id {0}")]
    UnknownNode(usize),
    #[error("assignment has {found} bits, circuit has {expected} inputs")]
    ArityMismatch { expected: usize, found: usize },
    #[error("expected a single output, found {0}")]
    NotSingleOutput(usize),
    #[error("circuit is not opened: gate `{0}` has fan-out other than 1")]
    NotOpened(String),
    #[error("gate `{node}` has kind {found}, expected {expected}")]
    WrongClass { node: String, expected: &'static str, found: &'static str },
    #[error("fan-in {0} is not a power of two")]
    FaninNotPowerOfTwo(usize),
    #[error("gate `{node}` has fan-in {fanin}, larger than the target {target}")]
    FaninTooLarge { node: String, fanin: usize, target: usize },
    #[error("gate weight {weight} exceeds the bound {bound}")]
    WeightBound { weight: i64, bound: i64 },
    #[error("{0} inputs is too many for exhaustive evaluation")]
    TooManyInputs(usize),
}

/// Gate families that the transforms accept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitClass {
    /// Unit-weight threshold gates only.
    Tc,
    /// Threshold gates with arbitrary integer weights.
    WeightedTc,
    /// Equality-threshold gates only.
    Ec,
    /// NAND gates only.
    Nand,
}

impl CircuitClass {
    fn admits(self, kind: GateKind) -> bool {
        match self {
            CircuitClass::Tc => matches!(kind, GateKind::Th { .. }),
            CircuitClass::WeightedTc => matches!(kind, GateKind::Th { .. } | GateKind::Wth { .. }),
            CircuitClass::Ec => matches!(kind, GateKind::Et),
            CircuitClass::Nand => matches!(kind, GateKind::Nand),
        }
    }

    fn name(self) -> &'static str {
        match self {
            CircuitClass::Tc => "TH",
            CircuitClass::WeightedTc => "TH/WTH",
            CircuitClass::Ec => "ET",
            CircuitClass::Nand => "NAND",
        }
    }
}

fn kind_name(kind: GateKind) -> &'static str {
    match kind {
        GateKind::Input(_) => "INPUT",
        GateKind::Const0 => "CONST0",
        GateKind::Const1 => "CONST1",
        GateKind::Th { .. } => "TH",
        GateKind::Wth { .. } => "WTH",
        GateKind::Et => "ET",
        GateKind::Nand => "NAND",
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BoolCircuit {
    nodes: Vec<Node>,
    inputs: Vec<NodeId>,
    outputs: Vec<NodeId>,
    #[serde(skip)]
    names: HashMap<String, NodeId>,
    #[serde(skip)]
    reserved: HashSet<String>,
    #[serde(skip)]
    consts: [Option<NodeId>; 2],
}

impl PartialEq for BoolCircuit {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.inputs == other.inputs && self.outputs == other.outputs
    }
}

impl BoolCircuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// `base`, or `base_k` for the first free `k`.
    pub fn fresh_name(&self, base: &str) -> String {
        let taken = |n: &str| self.names.contains_key(n) || self.reserved.contains(n);
        if !taken(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}_{k}"))
            .find(|n| !taken(n))
            .expect("unbounded")
    }

    /// Keeps generated names clear of `names`, which may be assigned explicitly later.
    pub fn reserve_names<'a>(&mut self, names: impl IntoIterator<Item = &'a str>) {
        self.reserved.extend(names.into_iter().map(str::to_string));
    }

    /// New circuit holding copies of the inputs and constants of `c`, with
    /// every name of `c` reserved.
    pub fn with_leaves_of(c: &BoolCircuit) -> Self {
        let mut out = Self::new();
        out.reserve_names(c.nodes.iter().map(|n| n.name.as_str()));
        for n in &c.nodes {
            match n.kind {
                GateKind::Input(_) => {
                    out.push(n.name.clone(), GateKind::Input(out.inputs.len()), Vec::new());
                    out.inputs.push(NodeId(out.nodes.len() - 1));
                }
                GateKind::Const0 | GateKind::Const1 => {
                    out.push(n.name.clone(), n.kind, Vec::new());
                }
                _ => {}
            }
        }
        out
    }

    fn push(&mut self, name: String, kind: GateKind, fanin: Vec<Edge>) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.names.insert(name.clone(), id);
        match kind {
            GateKind::Const0 => self.consts[0] = self.consts[0].or(Some(id)),
            GateKind::Const1 => self.consts[1] = self.consts[1].or(Some(id)),
            _ => {}
        }
        self.nodes.push(Node { name, kind, fanin });
        id
    }

    pub fn add_input(&mut self, name: &str) -> NodeId {
        let name = self.fresh_name(name);
        let id = self.push(name, GateKind::Input(self.inputs.len()), Vec::new());
        self.inputs.push(id);
        id
    }

    /// Returns the constant node for `value`, creating it on first use.
    pub fn constant(&mut self, value: bool) -> NodeId {
        let kind = if value { GateKind::Const1 } else { GateKind::Const0 };
        if let Some(id) = self.consts[value as usize] {
            return id;
        }
        let name = self.fresh_name(if value { "one" } else { "zero" });
        self.push(name, kind, Vec::new())
    }

    /// Node for `lit`, returned as an edge source with its negation flag.
    pub fn literal_edge(&mut self, lit: Literal, weight: i64) -> Edge {
        match lit {
            Literal::Input { index, negated } => Edge {
                src: self.inputs[index],
                weight,
                negated,
            },
            Literal::Const(b) => Edge::new(self.constant(b), weight),
        }
    }

    /// Appends a gate, checking topological order and per-kind invariants.
    pub fn add_gate(&mut self, kind: GateKind, fanin: Vec<Edge>) -> Result<NodeId, CircuitError> {
        let name = self.fresh_name(&format!("g{}", self.nodes.len()));
        self.add_named_gate(name, kind, fanin)
    }

    pub fn add_named_gate(
        &mut self,
        name: String,
        kind: GateKind,
        fanin: Vec<Edge>,
    ) -> Result<NodeId, CircuitError> {
        if self.names.contains_key(&name) {
            return Err(CircuitError::DuplicateName(name));
        }
        let invalid = |reason: String| CircuitError::InvalidGate {
            node: name.clone(),
            reason,
        };
        if !kind.is_gate() {
            return Err(invalid("use add_input/constant for leaves".into()));
        }
        for e in &fanin {
            let Some(src) = self.nodes.get(e.src.0) else {
                return Err(CircuitError::NotTopological {
                    node: name,
                    pred: e.src.0,
                });
            };
            if e.negated && !matches!(src.kind, GateKind::Input(_)) {
                return Err(CircuitError::NegatedNonInput { node: name });
            }
        }
        match kind {
            GateKind::Th { threshold } => {
                if fanin.iter().any(|e| e.weight != 1) {
                    return Err(invalid("TH weights must all be 1".into()));
                }
                if threshold < 0 || threshold > fanin.len() as i64 {
                    return Err(invalid(format!(
                        "threshold {threshold} outside 0..={}",
                        fanin.len()
                    )));
                }
            }
            GateKind::Nand
                if (fanin.len() != 2 || fanin.iter().any(|e| e.weight != 1)) => {
                    return Err(invalid("NAND takes exactly two unit edges".into()));
                }
            _ => {}
        }
        Ok(self.push(name, kind, fanin))
    }

    pub fn add_input_named(&mut self, name: String) -> Result<NodeId, CircuitError> {
        if self.names.contains_key(&name) {
            return Err(CircuitError::DuplicateName(name));
        }
        let id = self.push(name, GateKind::Input(self.inputs.len()), Vec::new());
        self.inputs.push(id);
        Ok(id)
    }

    pub fn add_constant_named(&mut self, name: String, value: bool) -> Result<NodeId, CircuitError> {
        if self.names.contains_key(&name) {
            return Err(CircuitError::DuplicateName(name));
        }
        let kind = if value { GateKind::Const1 } else { GateKind::Const0 };
        Ok(self.push(name, kind, Vec::new()))
    }

    pub fn set_outputs(&mut self, outputs: Vec<NodeId>) -> Result<(), CircuitError> {
        if let Some(bad) = outputs.iter().find(|o| o.0 >= self.nodes.len()) {
            return Err(CircuitError::UnknownNode(bad.0));
        }
        self.outputs = outputs;
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn lookup(&self, name: &str) -> Option<NodeId> {
        self.names.get(name).copied()
    }

    pub fn inputs(&self) -> &[NodeId] {
        &self.inputs
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    pub fn gates(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind.is_gate())
            .map(|(i, n)| (NodeId(i), n))
    }

    /// Literal view of a leaf edge, `None` when the source is a gate.
    pub fn edge_literal(&self, e: &Edge) -> Option<Literal> {
        match self.nodes[e.src.0].kind {
            GateKind::Input(index) => Some(Literal::Input {
                index,
                negated: e.negated,
            }),
            GateKind::Const0 => Some(Literal::Const(false)),
            GateKind::Const1 => Some(Literal::Const(true)),
            _ => None,
        }
    }

    /// Number of gate nodes (inputs and constants are not counted).
    pub fn size(&self) -> usize {
        self.gates().count()
    }

    /// Gate count on the longest input-to-output path.
    pub fn depth(&self) -> usize {
        let depths = self.node_depths();
        self.outputs.iter().map(|o| depths[o.0]).max().unwrap_or(0)
    }

    pub(crate) fn node_depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if n.kind.is_gate() {
                depth[i] = 1 + n.fanin.iter().map(|e| depth[e.src.0]).max().unwrap_or(0);
            }
        }
        depth
    }

    /// Largest `|w|` on any gate edge; unit-weight gates count as 1.
    pub fn weight_bound(&self) -> i64 {
        self.gates()
            .flat_map(|(_, n)| n.fanin.iter().map(|e| e.weight.abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn max_fanin(&self) -> usize {
        self.gates().map(|(_, n)| n.fanin.len()).max().unwrap_or(0)
    }

    /// Number of edges leaving each node.
    pub fn fanouts(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.nodes.len()];
        for n in &self.nodes {
            for e in &n.fanin {
                out[e.src.0] += 1;
            }
        }
        out
    }

    pub fn check_class(&self, class: CircuitClass) -> Result<(), CircuitError> {
        match self.gates().find(|(_, n)| !class.admits(n.kind)) {
            Some((_, n)) => Err(CircuitError::WrongClass {
                node: n.name.clone(),
                expected: class.name(),
                found: kind_name(n.kind),
            }),
            None => Ok(()),
        }
    }

    pub fn is_class(&self, class: CircuitClass) -> bool {
        self.check_class(class).is_ok()
    }

    /// Gates reachable from the outputs.
    pub fn live_gates(&self) -> HashSet<NodeId> {
        let mut seen = HashSet::new();
        let mut stack: Vec<NodeId> = self.outputs.clone();
        while let Some(id) = stack.pop() {
            if self.nodes[id.0].kind.is_gate() && seen.insert(id) {
                stack.extend(self.nodes[id.0].fanin.iter().map(|e| e.src));
            }
        }
        seen
    }
}

/// Size, depth and weight bound of one circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CircuitMetrics {
    pub size: usize,
    pub depth: usize,
    pub weight_bound: i64,
}

impl CircuitMetrics {
    pub fn of(c: &BoolCircuit) -> Self {
        Self {
            size: c.size(),
            depth: c.depth(),
            weight_bound: c.weight_bound(),
        }
    }
}
