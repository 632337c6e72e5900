use super::{BoolCircuit, CircuitError, GateKind};

/// Inputs above this count are refused by the exhaustive helpers.
pub const MAX_EXHAUSTIVE_INPUTS: usize = 20;

/// Bit `i` of `index` is input `i`.
pub fn assignment_from_index(index: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| index >> i & 1 == 1).collect()
}

impl BoolCircuit {
    /// Values of every node under `assignment`.
    pub fn eval_nodes(&self, assignment: &[bool]) -> Result<Vec<bool>, CircuitError> {
        if assignment.len() != self.num_inputs() {
            return Err(CircuitError::ArityMismatch {
                expected: self.num_inputs(),
                found: assignment.len(),
            });
        }
        let mut val = vec![false; self.nodes().len()];
        for (i, n) in self.nodes().iter().enumerate() {
            let edge = |k: usize| {
                let e = &n.fanin[k];
                val[e.src.0] ^ e.negated
            };
            let sum = || -> i64 {
                (0..n.fanin.len())
                    .map(|k| if edge(k) { n.fanin[k].weight } else { 0 })
                    .sum()
            };
            val[i] = match n.kind {
                GateKind::Input(k) => assignment[k],
                GateKind::Const0 => false,
                GateKind::Const1 => true,
                GateKind::Th { threshold } | GateKind::Wth { threshold } => sum() >= threshold,
                GateKind::Et => sum() != 0,
                GateKind::Nand => !(edge(0) && edge(1)),
            };
        }
        Ok(val)
    }

    pub fn eval_bruteforce(&self, assignment: &[bool]) -> Result<Vec<bool>, CircuitError> {
        let val = self.eval_nodes(assignment)?;
        Ok(self.outputs().iter().map(|o| val[o.0]).collect())
    }

    /// Output bits for every assignment, indexed as in [`assignment_from_index`].
    pub fn truth_table(&self) -> Result<Vec<Vec<bool>>, CircuitError> {
        let n = self.num_inputs();
        if n > MAX_EXHAUSTIVE_INPUTS {
            return Err(CircuitError::TooManyInputs(n));
        }
        (0..1usize << n)
            .map(|x| self.eval_bruteforce(&assignment_from_index(x, n)))
            .collect()
    }
}

/// First assignment on which the two circuits disagree, if any.
pub fn find_counterexample(a: &BoolCircuit, b: &BoolCircuit) -> Result<Option<Vec<bool>>, CircuitError> {
    let n = a.num_inputs();
    if b.num_inputs() != n {
        return Err(CircuitError::ArityMismatch {
            expected: n,
            found: b.num_inputs(),
        });
    }
    if n > MAX_EXHAUSTIVE_INPUTS {
        return Err(CircuitError::TooManyInputs(n));
    }
    for x in 0..1usize << n {
        let bits = assignment_from_index(x, n);
        if a.eval_bruteforce(&bits)? != b.eval_bruteforce(&bits)? {
            return Ok(Some(bits));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Edge, NodeId};

    /// One gate; with `with_one` the last weight reads the constant-1 node.
    fn single(kind: GateKind, weights: &[i64], with_one: bool) -> BoolCircuit {
        let mut c = BoolCircuit::new();
        let n = weights.len() - with_one as usize;
        let mut srcs: Vec<NodeId> = (0..n).map(|i| c.add_input(&format!("x{i}"))).collect();
        if with_one {
            srcs.push(c.constant(true));
        }
        let edges = srcs.iter().zip(weights).map(|(&s, &w)| Edge::new(s, w)).collect();
        let g = c.add_gate(kind, edges).unwrap();
        c.set_outputs(vec![g]).unwrap();
        c
    }

    fn eval1(c: &BoolCircuit, bits: &[bool]) -> bool {
        c.eval_bruteforce(bits).unwrap()[0]
    }

    #[test]
    fn et_nand_identity() {
        let c = single(GateKind::Et, &[1, 1, -2], true);
        assert_eq!(c.num_inputs(), 2);
        for x in 0..4 {
            let bits = assignment_from_index(x, 2);
            assert_eq!(eval1(&c, &bits), !(bits[0] && bits[1]));
        }
    }

    #[test]
    fn gate_truth_tables() {
        let th = single(GateKind::Th { threshold: 2 }, &[1, 1, 1], false);
        assert!(eval1(&th, &[true, true, false]));
        assert!(!eval1(&th, &[false, true, false]));
        let wth = single(GateKind::Wth { threshold: -1 }, &[2, -3], false);
        assert!(!eval1(&wth, &[false, true]));
        assert!(eval1(&wth, &[true, true]));
        assert!(eval1(&wth, &[false, false]));
        let nand = single(GateKind::Nand, &[1, 1], false);
        assert_eq!(
            nand.truth_table().unwrap(),
            vec![vec![true], vec![true], vec![true], vec![false]]
        );
        // every TH threshold on up to 3 inputs, against a popcount oracle
        for n in 1..=3usize {
            for delta in 0..=n as i64 {
                let c = single(GateKind::Th { threshold: delta }, &vec![1; n], false);
                for x in 0..1usize << n {
                    let bits = assignment_from_index(x, n);
                    assert_eq!(eval1(&c, &bits), x.count_ones() as i64 >= delta);
                }
            }
        }
        let et = single(GateKind::Et, &[1, -1, 2], false);
        for x in 0..8usize {
            let bits = assignment_from_index(x, 3);
            let s = bits[0] as i64 - bits[1] as i64 + 2 * bits[2] as i64;
            assert_eq!(eval1(&et, &bits), s != 0);
        }
    }

    #[test]
    fn complemented_inputs_and_arity() {
        let mut c = BoolCircuit::new();
        let x = c.add_input("x");
        let g = c
            .add_gate(
                GateKind::Th { threshold: 1 },
                vec![Edge {
                    src: x,
                    weight: 1,
                    negated: true,
                }],
            )
            .unwrap();
        c.set_outputs(vec![g]).unwrap();
        assert_eq!(c.truth_table().unwrap(), vec![vec![true], vec![false]]);
        assert_eq!(
            c.eval_bruteforce(&[]),
            Err(CircuitError::ArityMismatch { expected: 1, found: 0 })
        );
        let mut d = c.clone();
        d.set_outputs(vec![NodeId(0)]).unwrap();
        assert_eq!(find_counterexample(&c, &d).unwrap(), Some(vec![false]));
    }
}
