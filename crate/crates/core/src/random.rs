//! Seeded random circuits for differential testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::circuit::{BoolCircuit, CircuitClass, Edge, GateKind, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomCircuitConfig {
    pub inputs: usize,
    pub gates: usize,
    pub max_depth: usize,
    pub max_fanin: usize,
    /// Largest `|w|` for weighted and equality gates.
    pub weight_bound: i64,
    /// The last `outputs` gates are the circuit outputs.
    pub outputs: usize,
    pub complemented_inputs: bool,
    pub constant_one: bool,
}

impl Default for RandomCircuitConfig {
    fn default() -> Self {
        Self {
            inputs: 4,
            gates: 6,
            max_depth: 3,
            max_fanin: 3,
            weight_bound: 4,
            outputs: 1,
            complemented_inputs: false,
            constant_one: false,
        }
    }
}

/// Random circuit of `class`. Predecessors are drawn from earlier nodes whose
/// depth keeps the consumer within `max_depth`; half the time the newest
/// eligible gate is included so that deep circuits are common.
pub fn random_circuit<R: Rng>(class: CircuitClass, cfg: &RandomCircuitConfig, rng: &mut R) -> BoolCircuit {
    assert!(cfg.inputs >= 1 && cfg.gates >= 1 && cfg.max_depth >= 1);
    let mut c = BoolCircuit::new();
    for i in 0..cfg.inputs {
        c.add_input(&format!("x{i}"));
    }
    if cfg.constant_one {
        c.constant(true);
    }
    let w = cfg.weight_bound.max(1);
    let mut gates: Vec<NodeId> = Vec::new();
    for _ in 0..cfg.gates {
        let depths = c.node_depths();
        let eligible: Vec<NodeId> = (0..c.nodes().len())
            .map(NodeId)
            .filter(|id| depths[id.0] < cfg.max_depth)
            .collect();
        let fanin = match class {
            CircuitClass::Nand => 2,
            _ => rng.gen_range(1..=cfg.max_fanin.max(1)),
        };
        let newest_gate = eligible.iter().rev().find(|id| c.node(**id).kind.is_gate()).copied();
        let mut preds: Vec<NodeId> = Vec::with_capacity(fanin);
        if let (Some(g), true) = (newest_gate, rng.gen_bool(0.5)) {
            preds.push(g);
        }
        while preds.len() < fanin {
            preds.push(*eligible.choose(rng).expect("inputs are always eligible"));
        }
        preds.shuffle(rng);
        let edges: Vec<Edge> = preds
            .into_iter()
            .map(|src| {
                let negated = cfg.complemented_inputs
                    && matches!(c.node(src).kind, GateKind::Input(_))
                    && rng.gen_bool(0.3);
                let weight = match class {
                    CircuitClass::Tc | CircuitClass::Nand => 1,
                    _ => {
                        let mag = rng.gen_range(1..=w);
                        if rng.gen_bool(0.5) {
                            mag
                        } else {
                            -mag
                        }
                    }
                };
                Edge { src, weight, negated }
            })
            .collect();
        let kind = match class {
            CircuitClass::Tc => GateKind::Th {
                threshold: rng.gen_range(0..=edges.len() as i64),
            },
            CircuitClass::WeightedTc => {
                let lo: i64 = edges.iter().map(|e| e.weight.min(0)).sum();
                let hi: i64 = edges.iter().map(|e| e.weight.max(0)).sum();
                GateKind::Wth {
                    threshold: rng.gen_range(lo..=hi + 1),
                }
            }
            CircuitClass::Ec => GateKind::Et,
            CircuitClass::Nand => GateKind::Nand,
        };
        gates.push(c.add_gate(kind, edges).expect("generated gates are valid"));
    }
    let outs = gates[gates.len() - cfg.outputs.clamp(1, gates.len())..].to_vec();
    c.set_outputs(outs).expect("outputs are gates of this circuit");
    c
}
