//! Per-step feedback gain synthesis for the ancillary control law.
//!
//! Linearizes the kinematics at a reference point and solves a discrete LQR
//! problem by Riccati iteration. The contract is only that the closed loop
//! A + B K is Schur stable (spectral radius < 1); LQR is the method of
//! choice, with fixed weights.

use crate::kinematics::{self, Input, RobotState};
use crate::Real;
use nalgebra::{Matrix2, Matrix3, SMatrix};

/// Speed below which the linearization loses position controllability
/// (at v = 0 the heading column cannot move the position), so gain synthesis
/// clamps the reference speed to this floor.
const MIN_SPEED_FOR_GAIN: Real = 0.05;

const LQR_STATE_WEIGHT: [Real; 3] = [1.0, 1.0, 0.5];
const LQR_INPUT_WEIGHT: [Real; 2] = [0.1, 0.1];

pub type StateMatrix = Matrix3<Real>;
pub type InputMatrix = SMatrix<Real, 3, 2>;
pub type GainMatrix = SMatrix<Real, 2, 3>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainEntry {
    pub a: StateMatrix,
    pub b: InputMatrix,
    pub k: GainMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum GainError {
    #[error("no stabilizing gain found (closed-loop spectral radius {rho})")]
    Unstabilizable { rho: Real },
}

/// Largest eigenvalue magnitude.
pub fn spectral_radius(m: &StateMatrix) -> Real {
    m.complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0, Real::max)
}

pub fn is_stabilizing(a: &StateMatrix, b: &InputMatrix, k: &GainMatrix) -> bool {
    spectral_radius(&(a + b * k)) < 1.0
}

/// Feedback gain at one reference point. The reference speed is floored at a
/// small positive value so the linearized pair stays controllable; if the
/// first synthesis is not Schur stable the floor is raised and synthesis
/// retried before reporting failure.
pub fn synthesize_gain(
    reference_state: RobotState<Real>,
    reference_input: Input<Real>,
    c: Real,
) -> Result<GainEntry, GainError> {
    let mut rho_worst: Real = Real::INFINITY;
    for attempt in 0..4 {
        let floor = MIN_SPEED_FOR_GAIN * Real::powi(2.0, attempt);
        let speed = if reference_input.speed.abs() < floor {
            floor
        } else {
            reference_input.speed
        };
        let input = Input::new(speed, reference_input.turn_rate);
        let a_rows = kinematics::state_jacobian(reference_state, input, c);
        let b_rows = kinematics::input_jacobian(reference_state, input, c);
        let a = StateMatrix::from_fn(|r, c| a_rows[r][c]);
        let b = InputMatrix::from_fn(|r, c| b_rows[r][c]);
        let k = lqr_gain(&a, &b);
        let rho = spectral_radius(&(a + b * k));
        if rho < 1.0 {
            return Ok(GainEntry { a, b, k });
        }
        rho_worst = rho_worst.min(rho);
    }
    Err(GainError::Unstabilizable { rho: rho_worst })
}

/// Discrete LQR gain K (u = K x) by Riccati fixed-point iteration.
fn lqr_gain(a: &StateMatrix, b: &InputMatrix) -> GainMatrix {
    let q = StateMatrix::from_diagonal(&LQR_STATE_WEIGHT.into());
    let r = Matrix2::from_diagonal(&LQR_INPUT_WEIGHT.into());
    let mut p = q;
    for _ in 0..500 {
        let btp = b.transpose() * p;
        let gain_denom = (r + btp * b)
            .try_inverse()
            .expect("R + B'PB is positive definite");
        let next = q + a.transpose() * p * a
            - a.transpose() * p * b * gain_denom * btp * a;
        let delta = (next - p).abs().max();
        p = next;
        if delta < 1e-12 {
            break;
        }
    }
    let gain_denom = (r + b.transpose() * p * b)
        .try_inverse()
        .expect("R + B'PB is positive definite");
    -(gain_denom * b.transpose() * p * a)
}

/// Ancillary law: reference input corrected by feedback on the state error,
/// then clamped into the input box. Returns the input and whether clamping
/// engaged.
pub fn ancillary_input(
    reference_input: Input<Real>,
    gain: &GainMatrix,
    state: RobotState<Real>,
    reference_state: RobotState<Real>,
    input_min: Input<Real>,
    input_max: Input<Real>,
) -> (Input<Real>, bool) {
    let error = nalgebra::Vector3::new(
        state.position.x - reference_state.position.x,
        state.position.y - reference_state.position.y,
        crate::geometry::normalize_angle(state.heading - reference_state.heading),
    );
    let correction = gain * error;
    let raw = Input::new(
        reference_input.speed + correction[0],
        reference_input.turn_rate + correction[1],
    );
    let clamped = Input::new(
        raw.speed.clamp(input_min.speed, input_max.speed),
        raw.turn_rate.clamp(input_min.turn_rate, input_max.turn_rate),
    );
    (clamped, clamped != raw)
}
