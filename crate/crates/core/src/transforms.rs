//! Rewrites between threshold, equality-threshold and NAND circuits.

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{BoolCircuit, CircuitClass, CircuitError, CircuitMetrics, Edge, GateKind, Literal, NodeId};

#[derive(Debug, Error, PartialEq)]
pub enum TransformError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("threshold {threshold} outside 0..={fanin}")]
    BadThreshold { threshold: i64, fanin: usize },
}

/// Exact size, depth and weight bound before and after a pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub before: CircuitMetrics,
    pub after: CircuitMetrics,
}

impl BoundsReport {
    pub fn between(before: &BoolCircuit, after: &BoolCircuit) -> Self {
        Self {
            before: CircuitMetrics::of(before),
            after: CircuitMetrics::of(after),
        }
    }
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "metric before after")?;
        writeln!(f, "size {} {}", self.before.size, self.after.size)?;
        writeln!(f, "depth {} {}", self.before.depth, self.after.depth)?;
        writeln!(f, "weight_bound {} {}", self.before.weight_bound, self.after.weight_bound)
    }
}

/// Which threshold-to-equality construction [`tc_to_ec`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EcVariant {
    /// Checkers feed consumers directly; depth at most `d + 1`.
    #[default]
    Merged,
    /// Every gate becomes a two-level fragment; depth at most `2d`.
    Naive,
}

/// Accumulates weighted edges, merging repeats of the same source.
#[derive(Default)]
struct EdgeSum {
    edges: Vec<Edge>,
    index: HashMap<(NodeId, bool), usize>,
}

impl EdgeSum {
    fn add(&mut self, e: Edge) {
        match self.index.get(&(e.src, e.negated)) {
            Some(&i) => self.edges[i].weight += e.weight,
            None => {
                self.index.insert((e.src, e.negated), self.edges.len());
                self.edges.push(e);
            }
        }
    }

    fn finish(self) -> Vec<Edge> {
        self.edges.into_iter().filter(|e| e.weight != 0).collect()
    }
}

/// Maps an edge of `c` whose source is a leaf onto `out`.
fn copy_leaf_edge(c: &BoolCircuit, out: &mut BoolCircuit, e: &Edge) -> Option<Edge> {
    c.edge_literal(e).map(|lit| out.literal_edge(lit, e.weight))
}

/// Depth-2 equality fragment for a unit-weight threshold gate of fan-in `n`.
///
/// Checker `v` is `ET(x₁…xₙ, −v·1)`, zero exactly when `Σx = v`; the top
/// gate `ET(checkers, (1−Δ)·1)` is zero exactly when some checker is.
pub fn th_gate_to_ec(threshold: i64, n: usize) -> Result<BoolCircuit, TransformError> {
    if threshold < 0 || threshold > n as i64 {
        return Err(TransformError::BadThreshold { threshold, fanin: n });
    }
    let mut c = BoolCircuit::new();
    let xs: Vec<NodeId> = (0..n).map(|i| c.add_input(&format!("x{i}"))).collect();
    let g = c.add_gate(GateKind::Th { threshold }, xs.iter().map(|&x| Edge::unit(x)).collect())?;
    c.set_outputs(vec![g])?;
    tc_to_ec(&c, EcVariant::Naive)
}

/// Threshold circuit to equality-threshold circuit.
///
/// In the merged form a gate `g` with threshold `Δ` is represented by its
/// `Δ` checkers, whose sum is `g + Δ − 1`; consumers absorb the `Δ − 1`
/// offset into their constant-1 weight. Output gates also get a top gate.
pub fn tc_to_ec(c: &BoolCircuit, variant: EcVariant) -> Result<BoolCircuit, TransformError> {
    c.check_class(CircuitClass::Tc)?;
    let mut out = BoolCircuit::with_leaves_of(c);
    // checkers[g] for every gate, plus the top gate where one is built
    let mut checkers: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    let mut tops: HashMap<NodeId, NodeId> = HashMap::new();
    let thresholds: HashMap<NodeId, i64> = c
        .gates()
        .map(|(id, n)| match n.kind {
            GateKind::Th { threshold } => (id, threshold),
            _ => unreachable!("class checked"),
        })
        .collect();
    let is_output: Vec<bool> = {
        let mut v = vec![false; c.nodes().len()];
        for o in c.outputs() {
            v[o.0] = true;
        }
        v
    };
    for (id, node) in c.gates() {
        let delta = thresholds[&id];
        let mut base = EdgeSum::default();
        let mut constant = 0i64;
        for e in &node.fanin {
            if let Some(lit) = c.edge_literal(e) {
                match lit {
                    Literal::Const(b) => constant += i64::from(b),
                    _ => base.add(copy_leaf_edge(c, &mut out, e).expect("leaf")),
                }
                continue;
            }
            match variant {
                EcVariant::Merged => {
                    for &ch in &checkers[&e.src] {
                        base.add(Edge::unit(ch));
                    }
                    constant -= thresholds[&e.src] - 1;
                }
                EcVariant::Naive => base.add(Edge::unit(tops[&e.src])),
            }
        }
        let mut own = Vec::with_capacity(delta as usize);
        for v in 0..delta {
            let mut sum = EdgeSum {
                edges: base.edges.clone(),
                index: base.index.clone(),
            };
            let k = constant - v;
            if k != 0 {
                let one = out.constant(true);
                sum.add(Edge::new(one, k));
            }
            let name = out.fresh_name(&format!("{}_eq{v}", node.name));
            own.push(out.add_named_gate(name, GateKind::Et, sum.finish())?);
        }
        if variant == EcVariant::Naive || is_output[id.0] {
            let mut sum = EdgeSum::default();
            for &ch in &own {
                sum.add(Edge::unit(ch));
            }
            if delta != 1 {
                let one = out.constant(true);
                sum.add(Edge::new(one, 1 - delta));
            }
            tops.insert(id, out.add_named_gate(node.name.clone(), GateKind::Et, sum.finish())?);
        }
        checkers.insert(id, own);
    }
    let outputs = c
        .outputs()
        .iter()
        .map(|o| match tops.get(o) {
            Some(&t) => Ok(t),
            None => out.lookup(&c.node(*o).name).ok_or(CircuitError::UnknownNode(o.0)),
        })
        .collect::<Result<_, _>>()?;
    out.set_outputs(outputs)?;
    Ok(out)
}

/// `g₊ = [Σwx ≥ 1]`, `g₋ = [Σ(−w)x ≥ 1]` and `top = [g₊ + g₋ ≥ 1]` over fresh inputs.
pub fn et_gate_to_tc(weights: &[i64]) -> Result<BoolCircuit, TransformError> {
    let mut c = BoolCircuit::new();
    let xs: Vec<NodeId> = (0..weights.len()).map(|i| c.add_input(&format!("x{i}"))).collect();
    let fanin = xs.iter().zip(weights).map(|(&x, &w)| Edge::new(x, w)).collect();
    let g = c.add_gate(GateKind::Et, fanin)?;
    c.set_outputs(vec![g])?;
    ec_to_tc(&c)
}

/// Equality-threshold circuit to weighted threshold circuit of size `2s + o`.
///
/// `ET(g) = g₊ + g₋` since at most one side can fire, so each consumer reads
/// both halves with the original weight.
pub fn ec_to_tc(c: &BoolCircuit) -> Result<BoolCircuit, TransformError> {
    c.check_class(CircuitClass::Ec)?;
    let mut out = BoolCircuit::with_leaves_of(c);
    let mut halves: HashMap<NodeId, (NodeId, NodeId)> = HashMap::new();
    for (id, node) in c.gates() {
        let mut plus = Vec::with_capacity(node.fanin.len());
        for e in &node.fanin {
            match copy_leaf_edge(c, &mut out, e) {
                Some(le) => plus.push(le),
                None => {
                    let (p, m) = halves[&e.src];
                    plus.push(Edge::new(p, e.weight));
                    plus.push(Edge::new(m, e.weight));
                }
            }
        }
        let minus = plus.iter().map(|e| Edge { weight: -e.weight, ..*e }).collect();
        let p_name = out.fresh_name(&format!("{}_pos", node.name));
        let p = out.add_named_gate(p_name, GateKind::Wth { threshold: 1 }, plus)?;
        let m_name = out.fresh_name(&format!("{}_neg", node.name));
        let m = out.add_named_gate(m_name, GateKind::Wth { threshold: 1 }, minus)?;
        halves.insert(id, (p, m));
    }
    let mut outputs = Vec::with_capacity(c.outputs().len());
    let mut tops: HashMap<NodeId, NodeId> = HashMap::new();
    for o in c.outputs() {
        let id = match (halves.get(o), tops.get(o)) {
            (_, Some(&t)) => t,
            (Some(&(p, m)), None) => {
                let t = out.add_named_gate(
                    c.node(*o).name.clone(),
                    GateKind::Th { threshold: 1 },
                    vec![Edge::unit(p), Edge::unit(m)],
                )?;
                tops.insert(*o, t);
                t
            }
            (None, None) => out.lookup(&c.node(*o).name).ok_or(CircuitError::UnknownNode(o.0))?,
        };
        outputs.push(id);
    }
    out.set_outputs(outputs)?;
    Ok(out)
}

/// Weighted threshold circuit to unit-weight threshold circuit.
///
/// Working from the outputs down, a gate needed complemented has its weights
/// negated and threshold `Δ` replaced by `1 − Δ`; a negative weight `w` on a
/// source is turned into `|w|` on the complemented source with `Δ − w`; a
/// weight `k > 1` on a gate is realized by `k` copies of that gate. Gates
/// that fold to a constant become `TH 1` over a constant node.
pub fn weighted_tc_to_tc(c: &BoolCircuit, weight_bound: i64) -> Result<BoolCircuit, TransformError> {
    c.check_class(CircuitClass::WeightedTc)?;
    if let Some(weight) = c
        .gates()
        .flat_map(|(_, n)| n.fanin.iter().map(|e| e.weight))
        .find(|w| w.abs() > weight_bound)
    {
        return Err(CircuitError::WeightBound { weight, bound: weight_bound }.into());
    }
    if c.is_class(CircuitClass::Tc) {
        return Ok(c.clone());
    }
    let mut b = UnitBuilder {
        src: c,
        out: BoolCircuit::with_leaves_of(c),
        memo: HashMap::new(),
    };
    let mut outputs = Vec::with_capacity(c.outputs().len());
    for &o in c.outputs() {
        let e = b.signal(o, false, 0)?;
        outputs.push(b.materialize(e)?);
    }
    b.out.set_outputs(outputs)?;
    Ok(b.out)
}

struct UnitBuilder<'a> {
    src: &'a BoolCircuit,
    out: BoolCircuit,
    memo: HashMap<(NodeId, bool, usize), NodeId>,
}

impl UnitBuilder<'_> {
    /// Edge in `out` carrying node `id` of the source, complemented if `neg`.
    fn signal(&mut self, id: NodeId, neg: bool, copy: usize) -> Result<Edge, TransformError> {
        let e = Edge::unit(id);
        match self.src.edge_literal(&e) {
            Some(Literal::Input { index, negated }) => Ok(self.out.literal_edge(
                Literal::Input {
                    index,
                    negated: negated ^ neg,
                },
                1,
            )),
            Some(Literal::Const(v)) => Ok(self.out.literal_edge(Literal::Const(v ^ neg), 1)),
            None => self.gate(id, neg, copy).map(Edge::unit),
        }
    }

    /// Outputs that are leaves of the source become identity gates.
    fn materialize(&mut self, e: Edge) -> Result<NodeId, TransformError> {
        if self.out.node(e.src).kind.is_gate() {
            return Ok(e.src);
        }
        Ok(self.out.add_gate(GateKind::Th { threshold: 1 }, vec![e])?)
    }

    fn gate(&mut self, id: NodeId, neg: bool, copy: usize) -> Result<NodeId, TransformError> {
        if let Some(&n) = self.memo.get(&(id, neg, copy)) {
            return Ok(n);
        }
        let node = self.src.node(id);
        let mut delta = match node.kind {
            GateKind::Th { threshold } | GateKind::Wth { threshold } => threshold,
            _ => unreachable!("class checked"),
        };
        if neg {
            delta = 1 - delta;
        }
        let mut fanin = Vec::new();
        for e in &node.fanin {
            let mut w = if neg { -e.weight } else { e.weight };
            let mut src_neg = e.negated;
            if w < 0 {
                delta -= w;
                w = -w;
                src_neg = !src_neg;
            }
            if w == 0 {
                continue;
            }
            match self.src.edge_literal(e) {
                Some(Literal::Const(v)) => {
                    if v ^ (src_neg != e.negated) {
                        delta -= w;
                    }
                }
                Some(Literal::Input { index, .. }) => {
                    let le = self.out.literal_edge(
                        Literal::Input {
                            index,
                            negated: src_neg,
                        },
                        1,
                    );
                    fanin.extend(std::iter::repeat_n(le, w as usize));
                }
                None => {
                    for k in 0..w as usize {
                        let g = self.gate(e.src, src_neg, k)?;
                        fanin.push(Edge::unit(g));
                    }
                }
            }
        }
        let kind = if delta > fanin.len() as i64 {
            let zero = self.out.constant(false);
            fanin = vec![Edge::unit(zero)];
            GateKind::Th { threshold: 1 }
        } else if fanin.is_empty() {
            let one = self.out.constant(true);
            fanin = vec![Edge::unit(one)];
            GateKind::Th { threshold: 1 }
        } else {
            GateKind::Th {
                threshold: delta.max(0),
            }
        };
        let suffix = match (neg, copy) {
            (false, 0) => String::new(),
            (false, k) => format!("_c{k}"),
            (true, 0) => "_n".to_string(),
            (true, k) => format!("_n_c{k}"),
        };
        let name = if suffix.is_empty() {
            node.name.clone()
        } else {
            self.out.fresh_name(&format!("{}{suffix}", node.name))
        };
        let n = self.out.add_named_gate(name, kind, fanin)?;
        self.memo.insert((id, neg, copy), n);
        Ok(n)
    }
}

/// Each `NAND(a, b)` becomes `ET(1·a, 1·b, −2·1)`.
pub fn nand_circuit_to_ec(c: &BoolCircuit) -> Result<BoolCircuit, TransformError> {
    c.check_class(CircuitClass::Nand)?;
    let mut out = BoolCircuit::with_leaves_of(c);
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    for (id, node) in c.gates() {
        let mut fanin: Vec<Edge> = node
            .fanin
            .iter()
            .map(|e| copy_leaf_edge(c, &mut out, e).unwrap_or_else(|| Edge::unit(map[&e.src])))
            .collect();
        let one = out.constant(true);
        fanin.push(Edge::new(one, -2));
        map.insert(id, out.add_named_gate(node.name.clone(), GateKind::Et, fanin)?);
    }
    let outputs = c
        .outputs()
        .iter()
        .map(|o| match map.get(o) {
            Some(&g) => Ok(g),
            None => out.lookup(&c.node(*o).name).ok_or(CircuitError::UnknownNode(o.0)),
        })
        .collect::<Result<_, _>>()?;
    out.set_outputs(outputs)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{assignment_from_index, find_counterexample};
    use crate::random::{random_circuit, RandomCircuitConfig};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gate_circuit(kind: GateKind, weights: &[i64]) -> BoolCircuit {
        let mut c = BoolCircuit::new();
        let fanin = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Edge::new(c.add_input(&format!("x{i}")), w))
            .collect();
        let g = c.add_gate(kind, fanin).unwrap();
        c.set_outputs(vec![g]).unwrap();
        c
    }

    fn equivalent(a: &BoolCircuit, b: &BoolCircuit) -> bool {
        find_counterexample(a, b).unwrap().is_none()
    }

    fn three_nand() -> BoolCircuit {
        BoolCircuit::parse_text(
            "x1 INPUT\nx2 INPUT\nx3 INPUT\nx4 INPUT\n\
             a NAND x1 x2\nb NAND x3 x4\nout NAND a b\nOUTPUT out\n",
        )
        .unwrap()
    }

    #[test]
    fn threshold_fragments() {
        let or = th_gate_to_ec(1, 2).unwrap();
        assert_eq!(or.size(), 2);
        assert_eq!(or.truth_table().unwrap(), vec![vec![false], vec![true], vec![true], vec![true]]);
        let and = th_gate_to_ec(2, 2).unwrap();
        assert_eq!(and.size(), 3);
        assert_eq!(and.truth_table().unwrap(), vec![vec![false], vec![false], vec![false], vec![true]]);
        let always = th_gate_to_ec(0, 3).unwrap();
        assert!(always.truth_table().unwrap().iter().all(|r| r[0]));
        assert!(th_gate_to_ec(4, 3).is_err());
        for n in 1..=4usize {
            for delta in 0..=n as i64 {
                let th = gate_circuit(GateKind::Th { threshold: delta }, &vec![1; n]);
                let ec = th_gate_to_ec(delta, n).unwrap();
                assert!(equivalent(&th, &ec));
                assert_eq!(tc_to_ec(&th, EcVariant::Merged).unwrap().to_text(), ec.to_text());
            }
        }
    }

    #[test]
    fn and_of_ors() {
        let c = BoolCircuit::parse_text(
            "a INPUT\nb INPUT\nc INPUT\nd INPUT\n\
             o1 TH 1 a b\no2 TH 1 c !d\nt TH 2 o1 o2\nOUTPUT t\n",
        )
        .unwrap();
        let merged = tc_to_ec(&c, EcVariant::Merged).unwrap();
        assert!(merged.depth() <= c.depth() + 1);
        assert!(equivalent(&c, &merged));
        let naive = tc_to_ec(&c, EcVariant::Naive).unwrap();
        assert!(naive.depth() <= 2 * c.depth());
        assert!(equivalent(&merged, &naive));
    }

    #[test]
    fn et_fragment() {
        let f = et_gate_to_tc(&[1, 1, -2]).unwrap();
        assert_eq!(f.size(), 3);
        assert_eq!(f.eval_bruteforce(&[true, true, true]).unwrap(), vec![false]);
        let vals = f.eval_nodes(&[true, true, true]).unwrap();
        assert!(f.gates().all(|(id, _)| !vals[id.0]));
        let id = et_gate_to_tc(&[1]).unwrap();
        assert_eq!(id.truth_table().unwrap(), vec![vec![false], vec![true]]);
        assert_eq!(id.weight_bound(), 1);
    }

    #[test]
    fn nand_to_ec() {
        let single = BoolCircuit::parse_text("a INPUT\nb INPUT\ng NAND a b\nOUTPUT g\n").unwrap();
        let ec = nand_circuit_to_ec(&single).unwrap();
        assert_eq!(ec.to_text(), "a INPUT\nb INPUT\none CONST1\ng ET (1:a) (1:b) (-2:one)\nOUTPUT g\n");
        let not = BoolCircuit::parse_text("x INPUT\ng NAND x x\nOUTPUT g\n").unwrap();
        assert_eq!(nand_circuit_to_ec(&not).unwrap().truth_table().unwrap(), vec![vec![true], vec![false]]);
        let c = three_nand();
        let ec = nand_circuit_to_ec(&c).unwrap();
        assert_eq!(ec.size(), 3);
        assert_eq!(ec.weight_bound(), 2);
        assert_eq!(ec.depth(), c.depth());
        assert!(equivalent(&c, &ec));
        let tc = ec_to_tc(&ec).unwrap();
        assert!(equivalent(&c, &tc));
        assert_eq!(tc.size(), 2 * 3 + 1);
    }

    #[test]
    fn weighted_examples() {
        let c = gate_circuit(GateKind::Wth { threshold: 2 }, &[2, 1]);
        let t = weighted_tc_to_tc(&c, 2).unwrap();
        assert_eq!(t.weight_bound(), 1);
        assert_eq!(t.node(t.outputs()[0]).fanin.len(), 3);
        assert!(equivalent(&c, &t));
        let c = gate_circuit(GateKind::Wth { threshold: 0 }, &[-1]);
        let t = weighted_tc_to_tc(&c, 1).unwrap();
        assert!(t.is_class(CircuitClass::Tc));
        assert!(equivalent(&c, &t));
        let unit = gate_circuit(GateKind::Th { threshold: 1 }, &[1, 1]);
        assert_eq!(weighted_tc_to_tc(&unit, 1).unwrap(), unit);
        assert!(weighted_tc_to_tc(&gate_circuit(GateKind::Wth { threshold: 0 }, &[3]), 2).is_err());
    }

    #[test]
    fn complemented_weighted_gate_is_copied() {
        // g feeds h with weight -2: h needs two copies of the complement of g
        let c = BoolCircuit::parse_text(
            "x INPUT\ny INPUT\none CONST1\ng WTH 1 (1:x) (-1:y) (1:one)\n\
             h WTH -1 (-2:g) (1:x)\nOUTPUT h\n",
        )
        .unwrap();
        let t = weighted_tc_to_tc(&c, 2).unwrap();
        assert!(t.is_class(CircuitClass::Tc));
        assert_eq!(t.size(), 3);
        assert!(equivalent(&c, &t));
    }

    fn cfg(inputs: usize, gates: usize) -> RandomCircuitConfig {
        RandomCircuitConfig {
            inputs,
            gates,
            max_depth: 3,
            max_fanin: 4,
            weight_bound: 4,
            outputs: 1,
            complemented_inputs: true,
            constant_one: true,
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn tc_to_ec_preserves_function(seed in any::<u64>(), n in 1usize..=5, g in 1usize..=7) {
            let c = random_circuit(CircuitClass::Tc, &cfg(n, g), &mut ChaCha8Rng::seed_from_u64(seed));
            let merged = tc_to_ec(&c, EcVariant::Merged).unwrap();
            let naive = tc_to_ec(&c, EcVariant::Naive).unwrap();
            prop_assert!(equivalent(&c, &merged));
            prop_assert!(equivalent(&c, &naive));
            prop_assert!(merged.depth() <= c.depth() + 1);
            prop_assert!(naive.depth() <= 2 * c.depth());
        }

        #[test]
        fn ec_to_tc_preserves_function(seed in any::<u64>(), n in 1usize..=5, g in 1usize..=7, o in 1usize..=2) {
            let mut config = cfg(n, g);
            config.outputs = o;
            let c = random_circuit(CircuitClass::Ec, &config, &mut ChaCha8Rng::seed_from_u64(seed));
            let t = ec_to_tc(&c).unwrap();
            prop_assert!(equivalent(&c, &t));
            prop_assert!(t.size() <= 2 * c.size() + c.outputs().len());
            prop_assert!(t.depth() <= c.depth() + 1);
            prop_assert_eq!(t.weight_bound(), c.weight_bound());
        }

        #[test]
        fn weighted_to_unit_preserves_function(seed in any::<u64>(), n in 1usize..=5, g in 1usize..=7) {
            let c = random_circuit(CircuitClass::WeightedTc, &cfg(n, g), &mut ChaCha8Rng::seed_from_u64(seed));
            let t = weighted_tc_to_tc(&c, 4).unwrap();
            prop_assert!(t.is_class(CircuitClass::Tc));
            prop_assert_eq!(t.weight_bound(), 1);
            prop_assert!(equivalent(&c, &t));
        }

        #[test]
        fn passes_compose(seed in any::<u64>(), n in 1usize..=4, g in 1usize..=5) {
            let c = random_circuit(CircuitClass::Nand, &cfg(n, g), &mut ChaCha8Rng::seed_from_u64(seed));
            let ec = nand_circuit_to_ec(&c).unwrap();
            let wtc = ec_to_tc(&ec).unwrap();
            let tc = weighted_tc_to_tc(&wtc, wtc.weight_bound().max(1)).unwrap();
            let back = tc_to_ec(&tc, EcVariant::Merged).unwrap();
            for x in 0..1usize << n {
                let bits = assignment_from_index(x, n);
                let want = c.eval_bruteforce(&bits).unwrap();
                prop_assert_eq!(&ec.eval_bruteforce(&bits).unwrap(), &want);
                prop_assert_eq!(&tc.eval_bruteforce(&bits).unwrap(), &want);
                prop_assert_eq!(&back.eval_bruteforce(&bits).unwrap(), &want);
            }
        }
    }
}
