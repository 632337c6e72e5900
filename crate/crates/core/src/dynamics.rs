//! Cubic amplitude dynamics of the `D` gate and the ancilla-assisted collapse.
//!
//! Under `dA/dt = R·A·(|A| − δ)·(1 − |A|)` the magnitude flows to 0 below
//! `δ` and to 1 above it, while the phase of `A` is unchanged. The closed-form
//! first integral
//!
//! ```text
//! (a/a₀)^(1/δ) · ((a−δ)/(a₀−δ))^(−1/(δ(1−δ))) · ((1−a)/(1−a₀))^(1/(1−δ)) = e^(−Rt)
//! ```
//!
//! fixes the rate needed to settle within `ε` by time `T`, and serves as the
//! residual check for the integrator.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::{Measurement, StateError, StateVector};
use crate::unitary::{apply_two_qubit, build_ancilla_transfer};

/// Magnitudes this far above 1 are rejected.
pub const MAGNITUDE_SLACK: f64 = 1e-9;
/// Relative tolerance on `implicit_solution_lhs(a(t)) / e^(−Rt) − 1`.
pub const RESIDUAL_TOL: f64 = 1e-4;
/// Initial integration steps per unit of `t_end`.
pub const INITIAL_STEPS: usize = 1024;
/// Residuals are checked only where `a`, `|a − δ|` and `1 − a` all exceed this.
pub const CONDITIONING_FLOOR: f64 = 1e-6;
const MAX_HALVINGS: u32 = 12;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("amplitude magnitude {0} exceeds 1")]
    AmplitudeTooLarge(f64),
    #[error("a = {a} and a0 = {a0} lie on opposite sides of δ = {delta}")]
    Straddle { a: f64, a0: f64, delta: f64 },
    #[error("magnitude {0} is a fixed point or outside (0, 1)")]
    Endpoint(f64),
    #[error("invalid parameters: {0}")]
    BadParameters(String),
    #[error("step size fell below {step:e} with residual {residual:e}")]
    StepUnderflow { step: f64, residual: f64 },
    #[error("ancilla qubit holds probability {0:e}")]
    AncillaNotZero(f64),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Parameters of one `D` evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DGateDynamics {
    pub rate: f64,
    pub delta: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub eps: f64,
    pub time: f64,
}

/// The two rates that settle each side of the band, and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePlan {
    pub r0: f64,
    pub r1: f64,
    pub rate: f64,
}

fn check_band(delta: f64, delta0: f64, delta1: f64, eps: f64, time: f64) -> Result<(), DynamicsError> {
    let bad = |m: &str| Err(DynamicsError::BadParameters(m.to_string()));
    if ![delta, delta0, delta1, eps, time].iter().all(|x| x.is_finite()) {
        return bad("parameters must be finite");
    }
    if !(0.0 <= delta0 && delta0 < delta && delta < delta1 && delta1 <= 1.0) {
        return bad("need 0 <= delta0 < delta < delta1 <= 1");
    }
    if !(eps > 0.0 && eps < delta0 && eps < 1.0 - delta1) {
        return bad("need 0 < eps < min(delta0, 1 - delta1)");
    }
    if time <= 0.0 {
        return bad("time must be positive");
    }
    Ok(())
}

impl DGateDynamics {
    /// Dynamics whose rate is fixed by [`solve_rate`].
    pub fn plan(delta: f64, delta0: f64, delta1: f64, eps: f64, time: f64) -> Result<Self, DynamicsError> {
        let RatePlan { rate, .. } = solve_rate(delta, delta0, delta1, eps, time)?;
        Ok(Self {
            rate,
            delta,
            delta0,
            delta1,
            eps,
            time,
        })
    }

    /// Band `(δ/2, 3δ/2)` (capped below 1), `ε = min(δ₀, 1 − δ₁)/10`, `T = 1`.
    pub fn for_threshold(delta: f64) -> Result<Self, DynamicsError> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(DynamicsError::BadParameters(format!("threshold {delta} outside (0, 1)")));
        }
        let delta0 = delta / 2.0;
        let delta1 = (1.5 * delta).min((1.0 + delta) / 2.0);
        let eps = delta0.min(1.0 - delta1) / 10.0;
        Self::plan(delta, delta0, delta1, eps, 1.0)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        check_band(self.delta, self.delta0, self.delta1, self.eps, self.time)?;
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(DynamicsError::BadParameters("rate must be positive".into()));
        }
        Ok(())
    }
}

/// `R·A·(|A| − δ)·(1 − |A|)`.
pub fn amplitude_rhs(a: Complex64, dynamics: &DGateDynamics) -> Result<Complex64, DynamicsError> {
    let mag = a.norm();
    if mag > 1.0 + MAGNITUDE_SLACK {
        return Err(DynamicsError::AmplitudeTooLarge(mag));
    }
    Ok(a * (dynamics.rate * (mag - dynamics.delta) * (1.0 - mag)))
}

/// Natural log of [`implicit_solution_lhs`].
pub fn implicit_solution_log_lhs(a: f64, a0: f64, delta: f64) -> Result<f64, DynamicsError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(DynamicsError::BadParameters(format!("threshold {delta} outside (0, 1)")));
    }
    for x in [a, a0] {
        if !(x > 0.0 && x < 1.0) || x == delta {
            return Err(DynamicsError::Endpoint(x));
        }
    }
    if (a - delta).signum() != (a0 - delta).signum() {
        return Err(DynamicsError::Straddle { a, a0, delta });
    }
    Ok((a / a0).ln() / delta - ((a - delta) / (a0 - delta)).ln() / (delta * (1.0 - delta))
        + ((1.0 - a) / (1.0 - a0)).ln() / (1.0 - delta))
}

/// Closed-form first integral; equals `e^(−Rt)` along an exact trajectory.
pub fn implicit_solution_lhs(a: f64, a0: f64, delta: f64) -> Result<f64, DynamicsError> {
    implicit_solution_log_lhs(a, a0, delta).map(f64::exp)
}

/// `R₀` settles `δ₀` down to `ε`, `R₁` settles `δ₁` up to `1 − ε`, both by `T`.
pub fn solve_rate(delta: f64, delta0: f64, delta1: f64, eps: f64, time: f64) -> Result<RatePlan, DynamicsError> {
    check_band(delta, delta0, delta1, eps, time)?;
    let r0 = (-implicit_solution_log_lhs(eps, delta0, delta)? / time).max(0.0);
    let r1 = (-implicit_solution_log_lhs(1.0 - eps, delta1, delta)? / time).max(0.0);
    Ok(RatePlan {
        r0,
        r1,
        rate: r0.max(r1),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub step: f64,
    pub times: Vec<f64>,
    pub amps: Vec<Complex64>,
    /// Largest relative closed-form residual over the checked points.
    pub max_residual: f64,
}

impl Trajectory {
    pub fn final_amp(&self) -> Complex64 {
        *self.amps.last().expect("trajectory holds the initial point")
    }
}

fn well_conditioned(a: f64, delta: f64) -> bool {
    a > CONDITIONING_FLOOR && 1.0 - a > CONDITIONING_FLOOR && (a - delta).abs() > CONDITIONING_FLOOR
}

fn rk4(a: Complex64, h: f64, dynamics: &DGateDynamics) -> Result<Complex64, DynamicsError> {
    let k1 = amplitude_rhs(a, dynamics)?;
    let k2 = amplitude_rhs(a + k1 * (h / 2.0), dynamics)?;
    let k3 = amplitude_rhs(a + k2 * (h / 2.0), dynamics)?;
    let k4 = amplitude_rhs(a + k3 * h, dynamics)?;
    Ok(a + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// Fixed-step RK4 from `a0` to `t_end`, starting at `t_end/1024` and halving
/// the step until every well-conditioned point matches the closed form to
/// [`RESIDUAL_TOL`].
pub fn integrate_amplitude(a0: Complex64, dynamics: &DGateDynamics, t_end: f64) -> Result<Trajectory, DynamicsError> {
    let mag0 = a0.norm();
    if mag0 > 1.0 + MAGNITUDE_SLACK {
        return Err(DynamicsError::AmplitudeTooLarge(mag0));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(DynamicsError::BadParameters(format!("end time {t_end}")));
    }
    let check = well_conditioned(mag0, dynamics.delta);
    let mut steps = INITIAL_STEPS;
    let mut last_residual = 0.0;
    for _ in 0..=MAX_HALVINGS {
        let h = t_end / steps as f64;
        let mut times = Vec::with_capacity(steps + 1);
        let mut amps = Vec::with_capacity(steps + 1);
        times.push(0.0);
        amps.push(a0);
        let mut a = a0;
        let mut max_residual = 0.0f64;
        for k in 1..=steps {
            a = rk4(a, h, dynamics)?;
            let t = k as f64 * h;
            let mag = a.norm();
            if check && well_conditioned(mag, dynamics.delta) {
                let log_lhs = implicit_solution_log_lhs(mag, mag0, dynamics.delta)?;
                max_residual = max_residual.max((log_lhs + dynamics.rate * t).exp_m1().abs());
            }
            times.push(t);
            amps.push(a);
        }
        if max_residual < RESIDUAL_TOL {
            return Ok(Trajectory {
                step: h,
                times,
                amps,
                max_residual,
            });
        }
        last_residual = max_residual;
        steps *= 2;
    }
    Err(DynamicsError::StepUnderflow {
        step: t_end / (steps / 2) as f64,
        residual: last_residual,
    })
}

/// Appends an ancilla as the new most significant qubit, in `|0⟩`.
pub fn append_ancilla(s: &StateVector) -> Result<StateVector, StateError> {
    let mut amps = s.amps().to_vec();
    amps.resize(2 * s.dim(), Complex64::new(0.0, 0.0));
    StateVector::from_parts(amps, s.sink_prob())
}

/// Moves the `target = 1` amplitude into the ancilla (the most significant
/// qubit), then measures `target` along `|0⟩`.
///
/// The outcome is sampled from the live mass only. Whatever the outcome
/// excludes is moved to the sink, without renormalization.
pub fn collapse_with_ancilla(s: &StateVector, target: usize, rng_seed: u64) -> Result<Measurement, DynamicsError> {
    let n = s.num_qubits();
    if n < 2 || target >= n - 1 {
        return Err(StateError::QubitOutOfRange { qubit: target, num_qubits: n }.into());
    }
    let ancilla = n - 1;
    let ancilla_prob = s.live_prob() - s.prob_zero(ancilla)?;
    if ancilla_prob > 1e-12 {
        return Err(DynamicsError::AncillaNotZero(ancilla_prob));
    }
    let moved = apply_two_qubit(&build_ancilla_transfer(), s, target, ancilla).map_err(|e| {
        DynamicsError::BadParameters(e.to_string())
    })?;
    let live = moved.live_prob();
    let p0 = if live > 0.0 { moved.prob_zero(target)? / live } else { 1.0 };
    let u: f64 = ChaCha8Rng::seed_from_u64(rng_seed).gen();
    let outcome = u8::from(u >= p0);
    let mut sink = moved.sink_prob();
    let amps = moved
        .amps()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if (i >> target & 1) as u8 == outcome {
                *a
            } else {
                sink += a.norm_sqr();
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(Measurement {
        outcome,
        prob_zero: p0,
        state: StateVector::from_parts(amps, sink)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> DGateDynamics {
        DGateDynamics::plan(0.5, 0.25, 0.75, 0.01, 1.0).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let d = DGateDynamics { rate: 1.0, ..reference() };
        assert_eq!(amplitude_rhs(Complex64::new(0.0, 0.0), &d).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(amplitude_rhs(Complex64::from_polar(0.5, 1.0), &d).unwrap().norm(), 0.0);
        assert!((amplitude_rhs(Complex64::new(0.8, 0.0), &d).unwrap().re - 0.048).abs() < 1e-15);
        assert!(amplitude_rhs(Complex64::new(1.1, 0.0), &d).is_err());
    }

    #[test]
    fn implicit_solution_examples() {
        assert_eq!(implicit_solution_lhs(0.3, 0.3, 0.5).unwrap(), 1.0);
        let v = implicit_solution_lhs(0.01, 0.25, 0.5).unwrap();
        // independent evaluation of the three factors
        let oracle = (0.01f64 / 0.25).powf(2.0) * (0.49f64 / 0.25).powf(-4.0) * (0.99f64 / 0.75).powf(2.0);
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 1.889e-4).abs() < 1e-7);
        let sym = implicit_solution_lhs(0.99, 0.75, 0.5).unwrap();
        assert!((sym - v).abs() < 1e-15);
        assert!(matches!(implicit_solution_lhs(0.6, 0.3, 0.5), Err(DynamicsError::Straddle { .. })));
        assert!(matches!(implicit_solution_lhs(0.5, 0.3, 0.5), Err(DynamicsError::Endpoint(_))));
        assert!(matches!(implicit_solution_lhs(0.0, 0.3, 0.5), Err(DynamicsError::Endpoint(_))));
    }

    #[test]
    fn rate_examples() {
        let p = solve_rate(0.5, 0.25, 0.75, 0.01, 1.0).unwrap();
        assert!((p.rate + implicit_solution_lhs(0.01, 0.25, 0.5).unwrap().ln()).abs() < 1e-12);
        assert!((p.rate - 8.574).abs() < 1e-3);
        assert!((p.r0 - p.r1).abs() < 1e-12);
        let p2 = solve_rate(0.5, 0.25, 0.75, 0.01, 2.0).unwrap();
        assert!((p2.rate * 2.0 - p.rate).abs() < 1e-12);
        assert!(solve_rate(0.5, 0.25, 0.75, 0.3, 1.0).is_err());
        assert!(solve_rate(0.5, 0.6, 0.75, 0.01, 1.0).is_err());
    }

    #[test]
    fn trajectories_settle() {
        let d = reference();
        let a0 = Complex64::from_polar(0.25, std::f64::consts::FRAC_PI_3);
        let tr = integrate_amplitude(a0, &d, 1.0).unwrap();
        let end = tr.final_amp();
        assert!(end.norm() <= d.eps + 1e-9);
        assert!((end.arg() - std::f64::consts::FRAC_PI_3).abs() < 1e-9);
        let tr = integrate_amplitude(Complex64::new(0.75, 0.0), &d, 1.0).unwrap();
        assert!(1.0 - tr.final_amp().norm() <= d.eps + 1e-9);
        for a in [0.0, 0.5, 1.0] {
            let tr = integrate_amplitude(Complex64::new(a, 0.0), &d, 1.0).unwrap();
            assert!(tr.amps.iter().all(|z| *z == Complex64::new(a, 0.0)));
        }
    }

    #[test]
    fn threshold_plan_band() {
        let d = DGateDynamics::for_threshold(1.0 / 16.0).unwrap();
        assert!(d.validate().is_ok());
        assert_eq!(d.delta0, 1.0 / 32.0);
        assert!(DGateDynamics::for_threshold(1.0).is_err());
    }

    #[test]
    fn collapse_moves_target_into_ancilla() {
        // qubits: target q0, ancilla q1; [b0 on |t=0,z=0>, b2 on |t=1,z=0>]
        let (b0, b2) = (0.6, 0.8);
        let s = StateVector::from_parts(
            vec![Complex64::new(b0, 0.0), Complex64::new(b2, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)],
            0.0,
        )
        .unwrap();
        let m = collapse_with_ancilla(&s, 0, 3).unwrap();
        assert_eq!(m.outcome, 0);
        assert!((m.prob_zero - 1.0).abs() < 1e-12);
        assert_eq!(m.state.amp(0).re, b0);
        assert_eq!(m.state.amp(2).re, b2);
        assert_eq!(m.state.amp(1).norm(), 0.0);
        let bad = StateVector::basis_state(2, 2).unwrap();
        assert!(matches!(collapse_with_ancilla(&bad, 0, 0), Err(DynamicsError::AncillaNotZero(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn monotone_phase_preserving_and_consistent(mag in 0.01f64..0.99, phase in -3.0f64..3.0, delta in 0.2f64..0.8) {
            prop_assume!((mag - delta).abs() > 0.01);
            let d = DGateDynamics::for_threshold(delta).unwrap();
            let tr = integrate_amplitude(Complex64::from_polar(mag, phase), &d, d.time).unwrap();
            prop_assert!(tr.max_residual < RESIDUAL_TOL);
            let up = mag > delta;
            for w in tr.amps.windows(2) {
                let (a, b) = (w[0].norm(), w[1].norm());
                if up { prop_assert!(b >= a) } else { prop_assert!(b <= a) }
                prop_assert!((w[1].arg() - phase).abs() < 1e-9 || b == 0.0);
            }
        }
    }
}
