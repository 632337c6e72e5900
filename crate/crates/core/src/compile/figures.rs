//! Hand-built programs for `NAND(x₁, x₂)` and `NAND(NAND(x₁,x₂), NAND(x₃,x₄))`.

use super::{ec_to_qnn, CompileError, CompileOptions, DGateSpec, InputEncoding, LayerOperator, QnnLayer, QnnProgram};
use crate::circuit::{BoolCircuit, Edge, GateKind, Literal};
use crate::unitary::{build_nand_unitary, BlockBandedUnitary};

/// Default first-layer threshold, half the bound `1/√48`.
pub const THREE_NAND_DELTA1: f64 = 0.072_168_783_648_703_23;
/// Default second-layer threshold, half the bound `1/(2√6)`.
pub const THREE_NAND_DELTA2: f64 = 0.102_062_072_615_965_77;

/// `ET(1,1,−2)(x₁, x₂, 1)` compiled with `opts`.
pub fn nand_program(opts: &CompileOptions) -> Result<QnnProgram, CompileError> {
    let mut c = BoolCircuit::new();
    let x1 = c.add_input("x1");
    let x2 = c.add_input("x2");
    let one = c.constant(true);
    let nand = c.add_named_gate(
        "nand".to_string(),
        GateKind::Et,
        vec![Edge::new(x1, 1), Edge::new(x2, 1), Edge::new(one, -2)],
    )?;
    c.set_outputs(vec![nand])?;
    ec_to_qnn(&c, opts)
}

/// Two-layer program on 3 qubits for four inputs.
///
/// The input `[x₁,1,x₂,1,x₃,1,x₄,1]/√8` meets `U_nand ⊕ U_nand`. A width-1
/// `D` gate with threshold `δ₁ < 1/√48` and output `1/2` then acts on every
/// even index: indices 0 and 4 carry the two NAND sums, while 2 and 6 carry
/// row-2 values of at least `1/3` and become the constant `1/2`. After q₀ is
/// sunk the state is `½[N₁, 1, N₂, 1]`, which a second `U_nand` and a width-2
/// `D` gate with threshold `δ₂ < 1/(2√6)` reduce to the answer at index 0.
pub fn three_nand_program(delta1: Option<f64>, delta2: Option<f64>) -> Result<QnnProgram, CompileError> {
    let x = |index| Literal::Input { index, negated: false };
    let one = Literal::Const(true);
    let encoding = InputEncoding {
        num_inputs: 4,
        amp: 8f64.sqrt().recip(),
        slots: vec![x(0), one, x(1), one, x(2), one, x(3), one],
    };
    let u = build_nand_unitary();
    let layers = vec![
        QnnLayer {
            level: 2,
            precision: None,
            operator: LayerOperator::Unitary(BlockBandedUnitary::new(vec![u.clone(), u.clone()])?),
            dgate: DGateSpec::ideal(1, delta1.unwrap_or(THREE_NAND_DELTA1), 0.5, 1.0),
            sink: vec![0],
        },
        QnnLayer {
            level: 1,
            precision: None,
            operator: LayerOperator::Unitary(BlockBandedUnitary::new(vec![u])?),
            dgate: DGateSpec::ideal(2, delta2.unwrap_or(THREE_NAND_DELTA2), 1.0, 1.0),
            sink: vec![1],
        },
    ];
    QnnProgram::new(3, encoding, layers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_thresholds_are_half_the_bounds() {
        assert!((THREE_NAND_DELTA1 - 0.5 / 48f64.sqrt()).abs() < 1e-17);
        assert!((THREE_NAND_DELTA2 - 0.25 / 6f64.sqrt()).abs() < 1e-17);
    }

    #[test]
    fn shapes() {
        let p = three_nand_program(None, None).unwrap();
        assert_eq!(p.depth(), 4);
        assert!(p.canonical_shape().is_err());
        let n = nand_program(&CompileOptions::default()).unwrap();
        assert!(n.canonical_shape().is_ok());
    }
}
