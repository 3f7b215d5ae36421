//! Discrete robot kinematics and the matching linearization.

use crate::geometry::{normalize_angle, Vec2};
use crate::scalar::Scalar;

/// Robot pose: planar position plus heading in radians.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RobotState<S> {
    pub position: Vec2<S>,
    pub heading: S,
}

impl<S: Scalar> RobotState<S> {
    pub fn new(position: Vec2<S>, heading: S) -> Self {
        Self { position, heading }
    }

    pub fn is_finite(&self) -> bool {
        self.position.is_finite() && self.heading.is_finite()
    }
}

/// Control input: forward speed and turn rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Input<S> {
    pub speed: S,
    pub turn_rate: S,
}

impl<S: Scalar> Input<S> {
    pub fn new(speed: S, turn_rate: S) -> Self {
        Self { speed, turn_rate }
    }

    pub fn norm_sq(&self) -> S {
        self.speed * self.speed + self.turn_rate * self.turn_rate
    }
}

/// One discrete kinematic step with interval `step_time`.
///
/// The displacement uses the heading at the start of the step plus a
/// first-order correction for the heading change accrued during the step:
///
/// ```text
/// x+ = x + c v (cos th - c w sin th)
/// y+ = y + c v (sin th + c w cos th)
/// th+ = th + c w
/// ```
pub fn step<S: Scalar>(state: RobotState<S>, input: Input<S>, step_time: S) -> RobotState<S> {
    let c = step_time;
    let (sin, cos) = state.heading.sin_cos();
    let cw = c * input.turn_rate;
    let dx = c * input.speed * (cos - cw * sin);
    let dy = c * input.speed * (sin + cw * cos);
    RobotState {
        position: Vec2::new(state.position.x + dx, state.position.y + dy),
        heading: normalize_angle(state.heading + cw),
    }
}

/// Jacobian of [`step`] with respect to the state, row-major [x, y, th].
pub fn state_jacobian<S: Scalar>(
    state: RobotState<S>,
    input: Input<S>,
    step_time: S,
) -> [[S; 3]; 3] {
    let c = step_time;
    let (sin, cos) = state.heading.sin_cos();
    let cw = c * input.turn_rate;
    let one = S::one();
    let zero = S::zero();
    [
        [one, zero, c * input.speed * (-sin - cw * cos)],
        [zero, one, c * input.speed * (cos - cw * sin)],
        [zero, zero, one],
    ]
}

/// Jacobian of [`step`] with respect to the input, columns [speed, turn_rate].
pub fn input_jacobian<S: Scalar>(
    state: RobotState<S>,
    input: Input<S>,
    step_time: S,
) -> [[S; 2]; 3] {
    let c = step_time;
    let (sin, cos) = state.heading.sin_cos();
    let cw = c * input.turn_rate;
    let c2v = c * c * input.speed;
    [
        [c * (cos - cw * sin), -c2v * sin],
        [c * (sin + cw * cos), c2v * cos],
        [S::zero(), c],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    type State = RobotState<f64>;
    type Ctrl = Input<f64>;

    #[test]
    fn step_matches_worked_example() {
        // Heading straight up at 1 m/s while turning 0.5 rad/s over 0.1 s:
        // the turn correction pulls x back by c^2 w v = 0.005.
        let state = State::new(Vec2::new(1.0, 2.0), FRAC_PI_2);
        let next = step(state, Ctrl::new(1.0, 0.5), 0.1);
        assert_relative_eq!(next.position.x, 1.0 - 0.005, max_relative = 1e-12);
        assert_relative_eq!(next.position.y, 2.1, max_relative = 1e-12);
        assert_relative_eq!(next.heading, FRAC_PI_2 + 0.05, max_relative = 1e-12);
    }

    #[test]
    fn zero_input_holds_the_pose() {
        let state = State::new(Vec2::new(-3.0, 0.5), 1.2);
        assert_eq!(step(state, Ctrl::default(), 0.1), state);
    }

    #[test]
    fn straight_drive_covers_speed_times_time() {
        let state = State::new(Vec2::zero(), 0.0);
        let next = step(state, Ctrl::new(0.8, 0.0), 0.1);
        assert_relative_eq!(next.position.x, 0.08);
        assert_relative_eq!(next.position.y, 0.0);
        assert_relative_eq!(next.heading, 0.0);
    }

    #[test]
    fn heading_wraps_into_principal_range() {
        let state = State::new(Vec2::zero(), 3.13);
        let next = step(state, Ctrl::new(0.0, 1.0), 0.1);
        assert!(next.heading < 0.0, "wrapped past pi: {}", next.heading);
        assert_relative_eq!(next.heading, 3.23 - std::f64::consts::TAU, max_relative = 1e-9);
    }

    #[test]
    fn jacobians_match_central_differences() {
        let state = State::new(Vec2::new(0.3, -0.7), 0.9);
        let input = Ctrl::new(0.6, -0.4);
        let c = 0.1;
        let a = state_jacobian(state, input, c);
        let b = input_jacobian(state, input, c);
        let eps = 1e-6;

        let pack = |s: State| [s.position.x, s.position.y, s.heading];
        // Heading column of A.
        let plus = pack(step(State::new(state.position, state.heading + eps), input, c));
        let minus = pack(step(State::new(state.position, state.heading - eps), input, c));
        for row in 0..3 {
            let fd = (plus[row] - minus[row]) / (2.0 * eps);
            assert_relative_eq!(a[row][2], fd, epsilon = 1e-8);
        }
        // Position columns of A are identity.
        assert_eq!(
            [a[0][0], a[0][1], a[1][0], a[1][1], a[2][0], a[2][1]],
            [1.0, 0.0, 0.0, 1.0, 0.0, 0.0]
        );

        let plus_v = pack(step(state, Ctrl::new(input.speed + eps, input.turn_rate), c));
        let minus_v = pack(step(state, Ctrl::new(input.speed - eps, input.turn_rate), c));
        let plus_w = pack(step(state, Ctrl::new(input.speed, input.turn_rate + eps), c));
        let minus_w = pack(step(state, Ctrl::new(input.speed, input.turn_rate - eps), c));
        for row in 0..3 {
            assert_relative_eq!(b[row][0], (plus_v[row] - minus_v[row]) / (2.0 * eps), epsilon = 1e-8);
            assert_relative_eq!(b[row][1], (plus_w[row] - minus_w[row]) / (2.0 * eps), epsilon = 1e-8);
        }
    }
}
