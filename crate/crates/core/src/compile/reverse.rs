use num_complex::Complex64;

use super::{CompileError, QnnProgram};
use crate::circuit::{BoolCircuit, Edge, GateKind, NodeId};
use crate::state::PrecisionSpec;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Integer weight `re·2^L + im·2^{2L}` for an entry `re + i·im` on the
/// `2^-p` grid, where `L ≥ p`; callers use `L = log₂(block_dim) + p`.
///
/// The real parts of a unit row sum to less than `2^{L-p}` in magnitude, so
/// a sum of these weights vanishes exactly when both the real and the
/// imaginary sums do.
pub fn scaled_weight(entry: Complex64, l: u32, p: PrecisionSpec) -> Result<i64, CompileError> {
    let overflow = || CompileError::WeightOverflow(p.bits);
    if l < p.bits || 2 * l - p.bits >= 62 {
        return Err(overflow());
    }
    let grid = (1u64 << p.bits) as f64;
    let re = (entry.re * grid).round() as i64;
    let im = (entry.im * grid).round() as i64;
    re.checked_mul(1i64 << (l - p.bits))
        .and_then(|r| im.checked_mul(1i64 << (2 * l - p.bits)).and_then(|i| r.checked_add(i)))
        .ok_or_else(overflow)
}

/// Reads a canonical program back as an equality-threshold circuit.
///
/// Each block's first row is rounded to the `2^-p` grid; its even entries
/// become the integer weights of one `ET` gate (reduced by their gcd) over
/// the gates of the level below, so the result has depth `d`.
pub fn qnn_to_ec(prog: &QnnProgram, p: PrecisionSpec) -> Result<BoolCircuit, CompileError> {
    let shape = prog.canonical_shape()?;
    let s = 1usize << shape.m;
    let block_qubits = shape.m as u32 + 1;
    let mut c = BoolCircuit::new();
    for i in 0..prog.num_inputs() {
        c.add_input(&format!("x{i}"));
    }
    let mut below: Vec<Edge> = prog
        .encoding()
        .slots
        .iter()
        .step_by(2)
        .map(|&lit| c.literal_edge(lit, 1))
        .collect();
    for layer in prog.layers() {
        let mut gates: Vec<NodeId> = Vec::with_capacity(layer.operator.num_blocks());
        for j in 0..layer.operator.num_blocks() {
            let row = layer.operator.block(j).row(0);
            let mut weights = Vec::with_capacity(s);
            for k in 0..s {
                weights.push(scaled_weight(p.quantize(row[2 * k]), block_qubits + p.bits, p)?);
            }
            let g = weights.iter().fold(0, |acc, &w| gcd(acc, w));
            let fanin = weights
                .iter()
                .enumerate()
                .map(|(k, &w)| Edge {
                    weight: if g > 0 { w / g } else { 0 },
                    ..below[j * s + k]
                })
                .collect();
            let name = c.fresh_name(&format!("l{}_{j}", layer.level));
            gates.push(c.add_named_gate(name, GateKind::Et, fanin)?);
        }
        below = gates.into_iter().map(Edge::unit).collect();
    }
    c.set_outputs(vec![below[0].src])?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::find_counterexample;
    use crate::compile::{ec_to_qnn, CompileOptions};
    use proptest::prelude::*;

    #[test]
    fn imaginary_half_scales_to_top_bit() {
        let p = PrecisionSpec::new(8);
        // L = 3 + 8
        let w = scaled_weight(Complex64::new(0.0, 0.5), 3 + 8, p).unwrap();
        assert_eq!(w, 1i64 << (2 * 11 - 1));
        let w = scaled_weight(Complex64::new(0.25, 0.0), 3 + 8, p).unwrap();
        assert_eq!(w, 1i64 << (11 - 2));
    }

    #[test]
    fn nand_round_trip() {
        let c = BoolCircuit::parse_text("a INPUT\nb INPUT\none CONST1\ng ET (1:a) (1:b) (-2:one)\nOUTPUT g\n").unwrap();
        let prog = ec_to_qnn(&c, &CompileOptions::default()).unwrap();
        let back = qnn_to_ec(&prog, PrecisionSpec::new(8)).unwrap();
        let out = back.node(back.outputs()[0]);
        let w: Vec<i64> = out.fanin.iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![1, 1, -2, 0]);
        assert_eq!(find_counterexample(&c, &back).unwrap(), None);
    }

    #[test]
    fn pass_through_layer_reads_as_unit_weight() {
        let c = BoolCircuit::parse_text("x INPUT\ny INPUT\ng ET (1:x) (-1:y)\nh ET (1:g) (2:x)\nOUTPUT h\n").unwrap();
        let prog = ec_to_qnn(&c, &CompileOptions::default()).unwrap();
        let back = qnn_to_ec(&prog, PrecisionSpec::new(10)).unwrap();
        assert_eq!(back.depth(), 2);
        let pass = back.lookup("l2_1").unwrap();
        let w: Vec<i64> = back.node(pass).fanin.iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![1, 0]);
        assert_eq!(find_counterexample(&c, &back).unwrap(), None);
    }

    proptest! {
        // the combined weight vanishes exactly when real and imaginary sums both do
        #[test]
        fn joint_zero_check(
            re in prop::collection::vec(-16i64..=16, 4),
            im in prop::collection::vec(-16i64..=16, 4),
            mask in 0usize..16,
        ) {
            let p = PrecisionSpec::new(4);
            let l = 3 + p.bits;
            let entries: Vec<Complex64> = re.iter().zip(&im)
                .map(|(&r, &i)| Complex64::new(r as f64 / 16.0, i as f64 / 16.0) / 4.0)
                .collect();
            let picked = |k: usize| mask >> k & 1 == 1;
            let total: i64 = (0..4).filter(|&k| picked(k)).map(|k| scaled_weight(p.quantize(entries[k]), l, p).unwrap()).sum();
            let z: Complex64 = (0..4).filter(|&k| picked(k)).map(|k| p.quantize(entries[k])).sum();
            prop_assert_eq!(total == 0, z.re == 0.0 && z.im == 0.0);
        }
    }
}
