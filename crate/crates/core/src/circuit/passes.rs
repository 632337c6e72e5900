use std::collections::HashMap;

use serde::Serialize;

use super::{BoolCircuit, CircuitClass, CircuitError, Edge, GateKind, Literal, NodeId};

fn single_output(c: &BoolCircuit) -> Result<NodeId, CircuitError> {
    match c.outputs() {
        [o] => Ok(*o),
        outs => Err(CircuitError::NotSingleOutput(outs.len())),
    }
}

fn is_opened(c: &BoolCircuit, out: NodeId) -> bool {
    let fanout = c.fanouts();
    c.gates().all(|(id, _)| fanout[id.0] == usize::from(id != out))
}

/// Single-output circuit for output `k`, keeping every input and only the
/// gates that output depends on.
pub fn output_cone(c: &BoolCircuit, k: usize) -> Result<BoolCircuit, CircuitError> {
    let out = *c.outputs().get(k).ok_or(CircuitError::UnknownNode(k))?;
    let live = {
        let mut only = c.clone();
        only.set_outputs(vec![out])?;
        only.live_gates()
    };
    let mut res = BoolCircuit::with_leaves_of(c);
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    for (i, n) in c.nodes().iter().enumerate() {
        let id = NodeId(i);
        if !n.kind.is_gate() {
            map.insert(id, res.lookup(&n.name).expect("leaf copied"));
        } else if live.contains(&id) {
            let fanin = n.fanin.iter().map(|e| Edge { src: map[&e.src], ..*e }).collect();
            map.insert(id, res.add_named_gate(n.name.clone(), n.kind, fanin)?);
        }
    }
    res.set_outputs(vec![map[&out]])?;
    Ok(res)
}

/// Duplicates shared gates until every gate has fan-out exactly 1.
///
/// A circuit that already has this shape is returned as is.
pub fn open_circuit(c: &BoolCircuit) -> Result<BoolCircuit, CircuitError> {
    let out = single_output(c)?;
    if is_opened(c, out) {
        return Ok(c.clone());
    }
    let mut res = BoolCircuit::with_leaves_of(c);
    let leaf_map: HashMap<NodeId, NodeId> = c
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, n)| !n.kind.is_gate())
        .map(|(i, n)| (NodeId(i), res.lookup(&n.name).expect("leaf copied")))
        .collect();
    let mut copies: HashMap<NodeId, usize> = HashMap::new();
    let root = copy_tree(c, out, &leaf_map, &mut copies, &mut res)?;
    res.set_outputs(vec![root])?;
    Ok(res)
}

fn copy_tree(
    c: &BoolCircuit,
    id: NodeId,
    leaf_map: &HashMap<NodeId, NodeId>,
    copies: &mut HashMap<NodeId, usize>,
    res: &mut BoolCircuit,
) -> Result<NodeId, CircuitError> {
    if let Some(&leaf) = leaf_map.get(&id) {
        return Ok(leaf);
    }
    let node = c.node(id);
    let mut fanin = Vec::with_capacity(node.fanin.len());
    for e in &node.fanin {
        let src = copy_tree(c, e.src, leaf_map, copies, res)?;
        fanin.push(Edge { src, ..*e });
    }
    let k = copies.entry(id).or_insert(0);
    let name = if *k == 0 {
        node.name.clone()
    } else {
        res.fresh_name(&node.name)
    };
    *k += 1;
    res.add_named_gate(name, node.kind, fanin)
}

/// An opened ET circuit arranged as a full `s`-ary tree of depth `d`.
///
/// Level 1 holds the output gate and level `l` holds `s^(l-1)` gates in slot
/// order; child `k` of slot `j` at level `l` is slot `j·s + k` at level
/// `l + 1`. Level `d` gates read the `s^d` leaves directly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeveledCircuit {
    circuit: BoolCircuit,
    fanin: usize,
    levels: Vec<Vec<NodeId>>,
}

impl LeveledCircuit {
    pub fn circuit(&self) -> &BoolCircuit {
        &self.circuit
    }

    pub fn into_circuit(self) -> BoolCircuit {
        self.circuit
    }

    pub fn fanin(&self) -> usize {
        self.fanin
    }

    /// `m = log₂ s`.
    pub fn log_fanin(&self) -> usize {
        self.fanin.trailing_zeros() as usize
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Gates of level `l` (1-based) in slot order.
    pub fn level(&self, l: usize) -> &[NodeId] {
        &self.levels[l - 1]
    }

    /// The `s` edge weights of slot `j` at level `l`.
    pub fn gate_weights(&self, l: usize, j: usize) -> Vec<i64> {
        self.circuit
            .node(self.levels[l - 1][j])
            .fanin
            .iter()
            .map(|e| e.weight)
            .collect()
    }

    /// The `s^d` leaf literals in slot order.
    pub fn leaves(&self) -> Vec<Literal> {
        self.levels
            .last()
            .expect("depth ≥ 1")
            .iter()
            .flat_map(|&g| self.circuit.node(g).fanin.iter())
            .map(|e| self.circuit.edge_literal(e).expect("bottom level reads leaves"))
            .collect()
    }

    pub fn weight_bound(&self) -> i64 {
        self.circuit.weight_bound()
    }
}

#[derive(Clone, Copy)]
enum Slot {
    Gate(NodeId),
    Pass(Literal),
    Zero,
}

/// Pads an opened single-output ET circuit into a full `s`-ary tree.
///
/// Short paths get pass-through `ET(1)` gates; missing fan-in is filled with
/// weight-0 edges, and missing subtrees with all-zero gates over constant 0.
pub fn levelize(c: &BoolCircuit, s: usize) -> Result<LeveledCircuit, CircuitError> {
    if !s.is_power_of_two() {
        return Err(CircuitError::FaninNotPowerOfTwo(s));
    }
    let out = single_output(c)?;
    c.check_class(CircuitClass::Ec)?;
    if !is_opened(c, out) {
        let fanout = c.fanouts();
        let (_, bad) = c
            .gates()
            .find(|(id, _)| fanout[id.0] != usize::from(*id != out))
            .expect("some gate violates fan-out 1");
        return Err(CircuitError::NotOpened(bad.name.clone()));
    }
    if let Some((_, n)) = c.gates().find(|(_, n)| n.fanin.len() > s) {
        return Err(CircuitError::FaninTooLarge {
            node: n.name.clone(),
            fanin: n.fanin.len(),
            target: s,
        });
    }
    let slot_of = |e: &Edge| match c.edge_literal(e) {
        Some(lit) => Slot::Pass(lit),
        None => Slot::Gate(e.src),
    };
    let root = if c.node(out).kind.is_gate() {
        Slot::Gate(out)
    } else {
        slot_of(&Edge::unit(out))
    };
    let d = c.node_depths()[out.0].max(1);

    // slots[l] and weights[l] for levels 1..=d; slots[d] are the leaves
    let mut slots: Vec<Vec<Slot>> = vec![vec![root]];
    let mut weights: Vec<Vec<Vec<i64>>> = Vec::with_capacity(d);
    for _ in 0..d {
        let mut next = Vec::with_capacity(slots.last().unwrap().len() * s);
        let mut level_w = Vec::with_capacity(slots.last().unwrap().len());
        for slot in slots.last().unwrap() {
            let mut w = vec![0i64; s];
            match *slot {
                Slot::Gate(g) => {
                    let fanin = &c.node(g).fanin;
                    for (k, e) in fanin.iter().enumerate() {
                        w[k] = e.weight;
                        next.push(slot_of(e));
                    }
                    next.extend(std::iter::repeat_n(Slot::Zero, s - fanin.len()));
                }
                Slot::Pass(lit) => {
                    w[0] = 1;
                    next.push(Slot::Pass(lit));
                    next.extend(std::iter::repeat_n(Slot::Zero, s - 1));
                }
                Slot::Zero => next.extend(std::iter::repeat_n(Slot::Zero, s)),
            }
            level_w.push(w);
        }
        slots.push(next);
        weights.push(level_w);
    }

    let mut res = BoolCircuit::with_leaves_of(c);
    let mut below: Vec<Edge> = slots[d]
        .iter()
        .map(|slot| match *slot {
            Slot::Pass(lit) => Ok(res.literal_edge(lit, 1)),
            Slot::Zero => Ok(res.literal_edge(Literal::Const(false), 1)),
            Slot::Gate(g) => Err(CircuitError::InvalidGate {
                node: c.node(g).name.clone(),
                reason: "gate below the computed depth".into(),
            }),
        })
        .collect::<Result<_, _>>()?;
    let mut levels = vec![Vec::new(); d];
    for l in (0..d).rev() {
        let mut ids = Vec::with_capacity(slots[l].len());
        for (j, slot) in slots[l].iter().enumerate() {
            let fanin = (0..s)
                .map(|k| Edge {
                    weight: weights[l][j][k],
                    ..below[j * s + k]
                })
                .collect();
            let name = match *slot {
                Slot::Gate(g) => c.node(g).name.clone(),
                Slot::Pass(_) => res.fresh_name("pass"),
                Slot::Zero => res.fresh_name("pad"),
            };
            ids.push(res.add_named_gate(name, GateKind::Et, fanin)?);
        }
        below = ids.iter().map(|&id| Edge::unit(id)).collect();
        levels[l] = ids;
    }
    res.set_outputs(vec![levels[0][0]])?;
    Ok(LeveledCircuit {
        circuit: res,
        fanin: s,
        levels,
    })
}
