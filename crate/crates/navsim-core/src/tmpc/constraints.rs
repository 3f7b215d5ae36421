//! Typed constraint enumeration for one tracking decision.
//!
//! Dynamics equalities never appear here: candidate states are produced by
//! forward-simulating the inputs, so they hold by construction. Everything
//! else is an inequality whose violation (0 when satisfied) feeds the
//! solver's penalty and the post-hoc audit.

use super::TmpcProblem;
use crate::kinematics::{Input, RobotState};
use crate::tube::tube_width;
use crate::{Point, Real};

/// Where a dynamic-obstacle separation constraint samples the obstacle track
/// relative to the robot's prediction step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAlignment {
    /// Obstacle one step behind the robot step.
    Behind,
    /// Obstacle at the robot step.
    Aligned,
    /// Obstacle one step ahead of the robot step.
    Ahead,
}

/// One inequality, with all data needed to evaluate it baked in.
/// `state_index` 0 refers to the first predicted state (one step past the
/// anchor); `input_index` 0 refers to the input applied at the anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// Predicted position inside the state box.
    StateBox {
        state_index: usize,
        min: Point,
        max: Point,
    },
    /// Input inside its box. The solver's search box enforces this already;
    /// it stays here so the audit re-checks it independently.
    InputBox {
        input_index: usize,
        min: Input<Real>,
        max: Input<Real>,
    },
    /// Change from the previous input bounded in norm.
    Slew { input_index: usize, limit: Real },
    /// Prediction stays inside the planning zone around the anchor position.
    PlanZone {
        state_index: usize,
        center: Point,
        radius: Real,
    },
    /// Tube-tightened separation from a static obstacle center.
    StaticSeparation {
        state_index: usize,
        center: Point,
        min_distance: Real,
    },
    /// Tube-tightened separation from a predicted dynamic-obstacle position.
    DynamicSeparation {
        state_index: usize,
        predicted: Point,
        min_distance: Real,
        alignment: StepAlignment,
    },
}

impl Constraint {
    /// Amount by which the constraint is violated (0 when satisfied).
    pub fn violation(
        &self,
        states: &[RobotState<Real>],
        inputs: &[Input<Real>],
        previous_input: Input<Real>,
    ) -> Real {
        match *self {
            Constraint::StateBox { state_index, min, max } => {
                let p = states[state_index].position;
                box_excess(p.x, min.x, max.x) + box_excess(p.y, min.y, max.y)
            }
            Constraint::InputBox { input_index, min, max } => {
                let u = inputs[input_index];
                box_excess(u.speed, min.speed, max.speed)
                    + box_excess(u.turn_rate, min.turn_rate, max.turn_rate)
            }
            Constraint::Slew { input_index, limit } => {
                let current = inputs[input_index];
                let before = if input_index == 0 {
                    previous_input
                } else {
                    inputs[input_index - 1]
                };
                let dv = current.speed - before.speed;
                let dw = current.turn_rate - before.turn_rate;
                ((dv * dv + dw * dw).sqrt() - limit).max(0.0)
            }
            Constraint::PlanZone { state_index, center, radius } => {
                (states[state_index].position.dist(center) - radius).max(0.0)
            }
            Constraint::StaticSeparation { state_index, center, min_distance } => {
                (min_distance - states[state_index].position.dist(center)).max(0.0)
            }
            Constraint::DynamicSeparation {
                state_index,
                predicted,
                min_distance,
                ..
            } => (min_distance - states[state_index].position.dist(predicted)).max(0.0),
        }
    }
}

/// Every inequality for one decision, with the anchor input that the first
/// slew constraint compares against.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    pub previous_input: Input<Real>,
}

impl ConstraintSet {
    pub fn total_violation(&self, states: &[RobotState<Real>], inputs: &[Input<Real>]) -> Real {
        self.constraints
            .iter()
            .map(|c| c.violation(states, inputs, self.previous_input))
            .sum()
    }

    pub fn max_violation(&self, states: &[RobotState<Real>], inputs: &[Input<Real>]) -> Real {
        self.constraints
            .iter()
            .map(|c| c.violation(states, inputs, self.previous_input))
            .fold(0.0, Real::max)
    }
}

fn box_excess(v: Real, min: Real, max: Real) -> Real {
    (min - v).max(0.0) + (v - max).max(0.0)
}

/// Enumerate the decision's constraints. Robot prediction steps run one past
/// the anchor through the horizon end; dynamic separations sample the
/// obstacle one step behind, at, and one step ahead of each robot step,
/// trimmed so the obstacle index never touches the anchor or leaves the
/// horizon.
pub fn build_constraints(problem: &TmpcProblem) -> ConstraintSet {
    let config = problem.config;
    let np = config.prediction_horizon;
    let c = config.sampling_time;
    let mut constraints = Vec::new();

    let robot_tube = |depth: usize| {
        tube_width(
            config.robot_tube.base,
            config.robot_tube.contraction,
            0,
            depth as u64,
        )
        .expect("depth >= 1")
    };
    let obstacle_tube = |depth: usize| {
        tube_width(
            config.obstacle_tube.base,
            config.obstacle_tube.contraction,
            0,
            depth as u64,
        )
        .expect("depth >= 1")
    };

    for index in 0..np {
        constraints.push(Constraint::StateBox {
            state_index: index,
            min: config.state_min,
            max: config.state_max,
        });
        constraints.push(Constraint::InputBox {
            input_index: index,
            min: config.input_min,
            max: config.input_max,
        });
        constraints.push(Constraint::Slew {
            input_index: index,
            limit: config.slew_limit,
        });
        constraints.push(Constraint::PlanZone {
            state_index: index,
            center: problem.current_state.position,
            radius: problem.plan_radius - config.safety_radius,
        });
    }

    for disc in &problem.snapshot.visible_static {
        for index in 0..np {
            constraints.push(Constraint::StaticSeparation {
                state_index: index,
                center: disc.center,
                min_distance: config.safety_radius + robot_tube(index + 1),
            });
        }
    }

    for obstacle in &problem.snapshot.visible_dynamic {
        // Predicted centers for obstacle depths 1..=np past the anchor.
        let predicted: Vec<Point> = (1..=np)
            .map(|depth| obstacle.position + obstacle.velocity.scale(depth as Real * c))
            .collect();
        for index in 0..np {
            let depth = index + 1; // robot depth past the anchor
            let mut push = |alignment: StepAlignment, obstacle_depth: usize| {
                constraints.push(Constraint::DynamicSeparation {
                    state_index: index,
                    predicted: predicted[obstacle_depth - 1],
                    min_distance: config.safety_radius
                        + robot_tube(depth)
                        + obstacle_tube(obstacle_depth),
                    alignment,
                });
            };
            if depth >= 2 {
                push(StepAlignment::Behind, depth - 1);
            }
            push(StepAlignment::Aligned, depth);
            if depth < np {
                push(StepAlignment::Ahead, depth + 1);
            }
        }
    }

    ConstraintSet {
        constraints,
        previous_input: problem.previous_input,
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geometry::{Disc, Vec2};
    use crate::kinematics::RobotState;
    use crate::tmpc::{DiscountMode, TmpcConfig, TubeParams};
    use crate::world::{PerceivedObstacle, PerceptionSnapshot};
    use approx::assert_relative_eq;

    pub(crate) fn test_config() -> TmpcConfig {
        TmpcConfig {
            prediction_horizon: 5,
            control_horizon: 5,
            w1: 0.9,
            w2: 0.05,
            state_min: Vec2::new(0.0, 0.0),
            state_max: Vec2::new(14.0, 14.0),
            input_min: Input::new(0.0, -1.0),
            input_max: Input::new(1.0, 1.0),
            slew_limit: 0.3,
            safety_radius: 0.8,
            robot_tube: TubeParams { base: 0.02, contraction: 0.5 },
            obstacle_tube: TubeParams { base: 0.05, contraction: 0.5 },
            discount: DiscountMode::PerStep,
            start_count: 4,
            max_iterations: 10_000,
            sampling_time: 0.1,
        }
    }

    fn snapshot_with(
        robot: RobotState<Real>,
        statics: Vec<Disc<Real>>,
        dynamics: Vec<PerceivedObstacle>,
    ) -> PerceptionSnapshot {
        PerceptionSnapshot {
            robot,
            visible_static: statics,
            visible_dynamic: dynamics,
        }
    }

    #[test]
    fn counts_match_the_horizon_and_obstacle_numbers() {
        let config = test_config();
        let robot = RobotState::new(Vec2::new(2.0, 2.0), 0.0);
        let snapshot = snapshot_with(
            robot,
            vec![
                Disc::new(Vec2::new(4.0, 2.0), 0.4),
                Disc::new(Vec2::new(6.0, 3.0), 0.4),
            ],
            vec![PerceivedObstacle {
                position: Vec2::new(5.0, 5.0),
                velocity: Vec2::new(-0.2, 0.0),
            }],
        );
        let reference = vec![robot; 5];
        let problem = TmpcProblem {
            current_state: robot,
            previous_input: Input::default(),
            reference_states: &reference,
            reference_inputs: &[Input::default(); 5],
            snapshot: &snapshot,
            config: &config,
            plan_radius: 3.0,
            anchor_step: 0,
        };
        let set = build_constraints(&problem);
        let count = |f: &dyn Fn(&Constraint) -> bool| {
            set.constraints.iter().filter(|c| f(c)).count()
        };
        assert_eq!(count(&|c| matches!(c, Constraint::StaticSeparation { .. })), 10);
        assert_eq!(count(&|c| matches!(c, Constraint::DynamicSeparation { .. })), 13);
        assert_eq!(
            count(&|c| matches!(
                c,
                Constraint::DynamicSeparation { alignment: StepAlignment::Behind, .. }
            )),
            4
        );
        assert_eq!(
            count(&|c| matches!(
                c,
                Constraint::DynamicSeparation { alignment: StepAlignment::Aligned, .. }
            )),
            5
        );
        assert_eq!(
            count(&|c| matches!(
                c,
                Constraint::DynamicSeparation { alignment: StepAlignment::Ahead, .. }
            )),
            4
        );
        assert_eq!(count(&|c| matches!(c, Constraint::StateBox { .. })), 5);
        assert_eq!(count(&|c| matches!(c, Constraint::Slew { .. })), 5);
        assert_eq!(count(&|c| matches!(c, Constraint::PlanZone { .. })), 5);
    }

    #[test]
    fn behind_constraints_skip_the_first_step_and_ahead_skip_the_last() {
        let config = test_config();
        let robot = RobotState::new(Vec2::new(2.0, 2.0), 0.0);
        let snapshot = snapshot_with(
            robot,
            vec![],
            vec![PerceivedObstacle {
                position: Vec2::new(5.0, 5.0),
                velocity: Vec2::zero(),
            }],
        );
        let reference = vec![robot; 5];
        let problem = TmpcProblem {
            current_state: robot,
            previous_input: Input::default(),
            reference_states: &reference,
            reference_inputs: &[Input::default(); 5],
            snapshot: &snapshot,
            config: &config,
            plan_radius: 3.0,
            anchor_step: 0,
        };
        let set = build_constraints(&problem);
        for constraint in &set.constraints {
            if let Constraint::DynamicSeparation { state_index, alignment, .. } = constraint {
                match alignment {
                    StepAlignment::Behind => assert!(*state_index >= 1),
                    StepAlignment::Ahead => assert!(*state_index <= 3),
                    StepAlignment::Aligned => {}
                }
            }
        }
    }

    #[test]
    fn empty_snapshot_emits_no_separation_constraints() {
        let config = test_config();
        let robot = RobotState::new(Vec2::new(2.0, 2.0), 0.0);
        let snapshot = snapshot_with(robot, vec![], vec![]);
        let reference = vec![robot; 5];
        let problem = TmpcProblem {
            current_state: robot,
            previous_input: Input::default(),
            reference_states: &reference,
            reference_inputs: &[Input::default(); 5],
            snapshot: &snapshot,
            config: &config,
            plan_radius: 3.0,
            anchor_step: 0,
        };
        let set = build_constraints(&problem);
        assert!(set.constraints.iter().all(|c| !matches!(
            c,
            Constraint::StaticSeparation { .. } | Constraint::DynamicSeparation { .. }
        )));
        assert_eq!(set.constraints.len(), 20); // 4 families * Np
    }

    #[test]
    fn separation_bounds_grow_with_the_tubes() {
        let config = test_config();
        let robot = RobotState::new(Vec2::new(2.0, 2.0), 0.0);
        let snapshot = snapshot_with(robot, vec![Disc::new(Vec2::new(9.0, 9.0), 0.4)], vec![]);
        let reference = vec![robot; 5];
        let problem = TmpcProblem {
            current_state: robot,
            previous_input: Input::default(),
            reference_states: &reference,
            reference_inputs: &[Input::default(); 5],
            snapshot: &snapshot,
            config: &config,
            plan_radius: 3.0,
            anchor_step: 0,
        };
        let set = build_constraints(&problem);
        let bounds: Vec<Real> = set
            .constraints
            .iter()
            .filter_map(|c| match c {
                Constraint::StaticSeparation { min_distance, .. } => Some(*min_distance),
                _ => None,
            })
            .collect();
        // 0.8 + 0.02 * (1, 1.5, 1.75, 1.875, 1.9375)
        assert_relative_eq!(bounds[0], 0.82, max_relative = 1e-12);
        assert_relative_eq!(bounds[1], 0.83, max_relative = 1e-12);
        assert!(bounds.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn slew_violation_uses_the_previous_input_at_the_first_step() {
        let set = ConstraintSet {
            constraints: vec![Constraint::Slew { input_index: 0, limit: 0.3 }],
            previous_input: Input::new(0.5, 0.0),
        };
        let states = [RobotState::new(Vec2::zero(), 0.0); 1];
        let ok = [Input::new(0.7, 0.0)];
        assert_eq!(set.max_violation(&states, &ok), 0.0);
        let too_fast = [Input::new(0.95, 0.0)];
        assert_relative_eq!(set.max_violation(&states, &too_fast), 0.15, max_relative = 1e-12);
    }

    #[test]
    fn dynamic_separation_tracks_the_extrapolated_obstacle() {
        let config = test_config();
        let robot = RobotState::new(Vec2::new(2.0, 2.0), 0.0);
        let snapshot = snapshot_with(
            robot,
            vec![],
            vec![PerceivedObstacle {
                position: Vec2::new(4.0, 2.0),
                velocity: Vec2::new(1.0, 0.0),
            }],
        );
        let reference = vec![robot; 5];
        let problem = TmpcProblem {
            current_state: robot,
            previous_input: Input::default(),
            reference_states: &reference,
            reference_inputs: &[Input::default(); 5],
            snapshot: &snapshot,
            config: &config,
            plan_radius: 3.0,
            anchor_step: 0,
        };
        let set = build_constraints(&problem);
        // Aligned at the first step: obstacle one sampling interval along
        // its velocity, at (4.1, 2).
        let aligned0 = set
            .constraints
            .iter()
            .find_map(|c| match c {
                Constraint::DynamicSeparation {
                    state_index: 0,
                    predicted,
                    alignment: StepAlignment::Aligned,
                    ..
                } => Some(*predicted),
                _ => None,
            })
            .unwrap();
        assert_relative_eq!(aligned0.x, 4.1, max_relative = 1e-12);
        assert_relative_eq!(aligned0.y, 2.0, max_relative = 1e-12);
    }
}
