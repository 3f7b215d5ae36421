//! One tracking decision: penalized objective over the stacked input
//! sequence, minimized by the derivative-free pattern search, then checked
//! by an audit that recomputes every condition from scratch.

use std::time::{Duration, Instant};

use rand::Rng;

use super::{build_constraints, DiscountMode, TmpcConfig, TmpcProblem};
use crate::geometry::normalize_angle;
use crate::kinematics::{self, Input, RobotState};
use crate::optim::{make_starts, pattern_search, Budget, SearchProblem};
use crate::Real;

/// Weight on the summed constraint violation inside the search objective.
const PENALTY_WEIGHT: Real = 1e3;

/// Largest audited violation still counted as feasible.
const FEASIBILITY_TOLERANCE: Real = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveError {
    /// Predicted states, inputs, and reference states must all span the
    /// prediction horizon.
    WindowMismatch {
        states: usize,
        inputs: usize,
        reference: usize,
    },
}

impl std::fmt::Display for ObjectiveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObjectiveError::WindowMismatch { states, inputs, reference } => write!(
                f,
                "window lengths differ: {states} states, {inputs} inputs, {reference} reference states"
            ),
        }
    }
}

impl std::error::Error for ObjectiveError {}

/// Result of one decision.
#[derive(Debug, Clone, PartialEq)]
pub struct TmpcSolution {
    /// Inputs for the whole prediction horizon; entries past the control
    /// horizon repeat the last decided input.
    pub inputs: Vec<Input<Real>>,
    /// Predicted states, one per input, starting one step past the anchor.
    pub predicted_states: Vec<RobotState<Real>>,
    /// Unpenalized objective of the returned inputs.
    pub objective: Real,
    /// True when the audit found no violation above tolerance.
    pub feasible: bool,
    /// Largest audited violation.
    pub max_violation: Real,
    pub solve_time: Duration,
    pub evaluations: u64,
}

/// Discounted tracking error plus input effort.
///
/// The tracking term sums, per step, the discounted Euclidean norm of the
/// pose error (heading wrapped); the effort term is the squared input norm
/// summed over the horizon and scaled by `w2`.
pub fn objective(
    states: &[RobotState<Real>],
    inputs: &[Input<Real>],
    reference_states: &[RobotState<Real>],
    config: &TmpcConfig,
    anchor_step: u64,
) -> Result<Real, ObjectiveError> {
    if states.len() != reference_states.len() || inputs.len() != states.len() {
        return Err(ObjectiveError::WindowMismatch {
            states: states.len(),
            inputs: inputs.len(),
            reference: reference_states.len(),
        });
    }
    let mut total = 0.0;
    for (index, (state, reference)) in states.iter().zip(reference_states).enumerate() {
        let depth = index as u64 + 1;
        let discount = match config.discount {
            DiscountMode::PerStep => config.w1.powi(depth as i32),
            DiscountMode::AnchorScaled => {
                let step = (anchor_step + depth) as Real;
                config.w1.powf(step / (anchor_step + 1) as Real)
            }
        };
        let dp = state.position - reference.position;
        let dh = normalize_angle(state.heading - reference.heading);
        total += discount * (dp.norm_sq() + dh * dh).sqrt();
    }
    let effort: Real = inputs.iter().map(Input::norm_sq).sum();
    Ok(total + config.w2 * effort)
}

/// Expand a stacked decision vector into inputs for the whole horizon,
/// repeating the last decided pair past the control horizon.
fn decode(decision: &[Real], horizon: usize) -> Vec<Input<Real>> {
    let mut inputs: Vec<Input<Real>> = decision
        .chunks_exact(2)
        .map(|pair| Input::new(pair[0], pair[1]))
        .collect();
    let tail = *inputs.last().expect("control horizon is at least 1");
    inputs.resize(horizon, tail);
    inputs
}

fn rollout(problem: &TmpcProblem, inputs: &[Input<Real>]) -> Vec<RobotState<Real>> {
    let mut states = Vec::with_capacity(inputs.len());
    let mut state = problem.current_state;
    for &input in inputs {
        state = kinematics::step(state, input, problem.config.sampling_time);
        states.push(state);
    }
    states
}

/// Solve one decision. The warm start, when given, must provide at least
/// control-horizon inputs (a previous solution shifted by one step works).
pub fn solve(
    problem: &TmpcProblem,
    budget: Budget,
    warm_start: Option<&[Input<Real>]>,
    rng: &mut impl Rng,
) -> TmpcSolution {
    let clock = Instant::now();
    let config = problem.config;
    let np = config.prediction_horizon;
    let nc = config.control_horizon;

    let mut lower = Vec::with_capacity(2 * nc);
    let mut upper = Vec::with_capacity(2 * nc);
    for _ in 0..nc {
        lower.extend([config.input_min.speed, config.input_min.turn_rate]);
        upper.extend([config.input_max.speed, config.input_max.turn_rate]);
    }
    let flatten = |window: &[Input<Real>]| -> Vec<Real> {
        window[..nc]
            .iter()
            .flat_map(|u| [u.speed, u.turn_rate])
            .collect()
    };
    let reference_decision = flatten(problem.reference_inputs);
    let warm_decision = warm_start.map(|w| {
        assert!(w.len() >= nc, "warm start shorter than the control horizon");
        flatten(w)
    });

    let constraints = build_constraints(problem);
    let penalized = |decision: &[Real]| -> Real {
        let inputs = decode(decision, np);
        let states = rollout(problem, &inputs);
        let cost = objective(&states, &inputs, problem.reference_states, config, problem.anchor_step)
            .expect("windows are sized by construction");
        cost + PENALTY_WEIGHT * constraints.total_violation(&states, &inputs)
    };

    let starts = make_starts(
        warm_decision.as_deref(),
        &reference_decision,
        config.start_count,
        &lower,
        &upper,
        rng,
    );
    let search = SearchProblem {
        lower: &lower,
        upper: &upper,
        starts: &starts,
        budget,
        max_iterations: config.max_iterations,
        objective: &penalized,
    };
    let result = pattern_search(&search).expect("clamped starts stay within the input box");

    let inputs = decode(&result.best, np);
    let predicted_states = rollout(problem, &inputs);
    let objective = objective(
        &predicted_states,
        &inputs,
        problem.reference_states,
        config,
        problem.anchor_step,
    )
    .expect("windows are sized by construction");
    let max_violation = audit_solution(problem, &predicted_states, &inputs);

    TmpcSolution {
        inputs,
        predicted_states,
        objective,
        feasible: max_violation <= FEASIBILITY_TOLERANCE,
        max_violation,
        solve_time: clock.elapsed(),
        evaluations: result.evaluations,
    }
}

/// Largest violation across every condition a decision must satisfy,
/// recomputed directly from the problem data. This shares no code with the
/// solver's constraint set: dynamics are re-simulated, tube widths re-summed,
/// obstacle tracks re-extrapolated.
pub fn audit_solution(
    problem: &TmpcProblem,
    states: &[RobotState<Real>],
    inputs: &[Input<Real>],
) -> Real {
    let config = problem.config;
    let np = config.prediction_horizon;
    let c = config.sampling_time;
    let mut worst: Real = 0.0;
    let mut note = |violation: Real| {
        if violation > worst {
            worst = violation;
        }
    };

    // Reported states must reproduce a forward simulation of the inputs.
    let mut simulated = problem.current_state;
    for (state, &input) in states.iter().zip(inputs) {
        simulated = kinematics::step(simulated, input, c);
        note((simulated.position - state.position).norm());
        note(normalize_angle(simulated.heading - state.heading).abs());
    }

    // Inputs past the control horizon must repeat the last decided one.
    let tied = inputs[config.control_horizon - 1];
    for &input in &inputs[config.control_horizon..] {
        note((input.speed - tied.speed).abs());
        note((input.turn_rate - tied.turn_rate).abs());
    }

    let tube = |base: Real, contraction: Real, depth: usize| -> Real {
        (0..depth)
            .map(|i| base * (1.0 - contraction).powi(i as i32))
            .sum::<Real>()
    };
    let robot_tube = |depth: usize| tube(config.robot_tube.base, config.robot_tube.contraction, depth);
    let obstacle_tube =
        |depth: usize| tube(config.obstacle_tube.base, config.obstacle_tube.contraction, depth);

    for (index, state) in states.iter().enumerate() {
        let depth = index + 1;
        let p = state.position;
        note(config.state_min.x - p.x);
        note(p.x - config.state_max.x);
        note(config.state_min.y - p.y);
        note(p.y - config.state_max.y);

        let u = inputs[index];
        note(config.input_min.speed - u.speed);
        note(u.speed - config.input_max.speed);
        note(config.input_min.turn_rate - u.turn_rate);
        note(u.turn_rate - config.input_max.turn_rate);

        let before = if index == 0 {
            problem.previous_input
        } else {
            inputs[index - 1]
        };
        let dv = u.speed - before.speed;
        let dw = u.turn_rate - before.turn_rate;
        note((dv * dv + dw * dw).sqrt() - config.slew_limit);

        note(
            p.dist(problem.current_state.position) - (problem.plan_radius - config.safety_radius),
        );

        for disc in &problem.snapshot.visible_static {
            note(config.safety_radius + robot_tube(depth) - p.dist(disc.center));
        }
        for obstacle in &problem.snapshot.visible_dynamic {
            for obstacle_depth in [depth.wrapping_sub(1), depth, depth + 1] {
                if obstacle_depth == 0 || obstacle_depth > np || obstacle_depth == usize::MAX {
                    continue;
                }
                let center =
                    obstacle.position + obstacle.velocity.scale(obstacle_depth as Real * c);
                note(
                    config.safety_radius + robot_tube(depth) + obstacle_tube(obstacle_depth)
                        - p.dist(center),
                );
            }
        }
    }

    worst.max(0.0)
}
