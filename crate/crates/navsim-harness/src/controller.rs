//! Controller adapters: each pluggable controller consumes one perception
//! snapshot per step and produces one input, plus the bookkeeping the run
//! loop needs (plan events, feasibility signals, decision cost).
//!
//! The tracking controller owns its reference trajectory and replans when
//! the reference runs out, when a solve comes back infeasible, or on the
//! first step. Baselines are memoryless apart from their random stream.

use crate::scenario::{ControllerSpec, DecisionBudget, ScenarioConfig, SetupMode};
use navsim_core::baselines::{apf_step, hlrrt_plan, pursue, ApfParams, HlrrtParams, HlrrtRequest};
use navsim_core::kinematics::{Input, RobotState};
use navsim_core::optim::Budget;
use navsim_core::planner::{self, PlanRequest, ReferenceTrajectory};
use navsim_core::tmpc::{self, TmpcConfig, TmpcProblem, TmpcSolution};
use navsim_core::tube;
use navsim_core::world::PerceptionSnapshot;
use navsim_core::{Point, Real};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Evaluation cap for run-to-completion tracker decisions: generous enough
/// that the solver terminates by mesh convergence instead, yet still
/// deterministic.
const RUN_TO_COMPLETION_EVALUATIONS: u64 = 50_000;

/// Growth iterations per run-to-completion decision of the sampling
/// baseline; a tree this size covers the perception disc densely.
const RUN_TO_COMPLETION_GROWTH: u64 = 4_000;

/// Controller random streams derive from the scenario seed with this offset
/// so they never alias the world's perception/disturbance stream.
const CONTROLLER_STREAM_OFFSET: u64 = 0x636f_6e74_726f_6c;

/// Why the tracking controller rebuilt its reference this step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanReason {
    Initial,
    Exhausted,
    Infeasible,
}

impl PlanReason {
    pub fn label(self) -> &'static str {
        match self {
            PlanReason::Initial => "initial",
            PlanReason::Exhausted => "exhausted",
            PlanReason::Infeasible => "infeasible",
        }
    }
}

/// Everything one decision tells the run loop.
#[derive(Debug, Clone, Copy)]
pub struct Decision {
    pub input: Input<Real>,
    /// Objective evaluations (tracker) or growth iterations (sampling
    /// baseline) this decision consumed; deterministic.
    pub evaluations: u64,
    /// Measured wall-clock cost; diagnostic only.
    pub seconds: Real,
    pub plan_reason: Option<PlanReason>,
    /// Tracker audit found no feasible input sequence this step.
    pub infeasible: bool,
    /// The planner exhausted its fallbacks; the run must stop.
    pub dead_end: bool,
    /// Budget ran out before solving; the ancillary law was applied instead.
    pub aborted: bool,
    /// Reference state the tracker steers toward next (tracking runs only).
    pub reference: Option<RobotState<Real>>,
    /// Robot tube half-width at the far end of the prediction horizon, the
    /// widest envelope this decision's constraints used; zero for baselines.
    pub tube_half_width: Real,
}

impl Decision {
    fn hold() -> Self {
        Decision {
            input: Input::default(),
            evaluations: 0,
            seconds: 0.0,
            plan_reason: None,
            infeasible: false,
            dead_end: false,
            aborted: false,
            reference: None,
            tube_half_width: 0.0,
        }
    }
}

pub enum Controller {
    Htmpc(Box<TrackingController>),
    Hlrrt { params: HlrrtParams, limits: Limits, rng: ChaCha8Rng },
    Apf { params: ApfParams, limits: Limits },
}

/// Shared per-scenario constants the adapters need every step.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub target: Point,
    pub sampling_time: Real,
    pub max_speed: Real,
    pub max_turn_rate: Real,
    pub robot_radius: Real,
    pub obstacle_radius: Real,
    pub budget: Budget,
}

fn decision_budget(config: &ScenarioConfig, completion_iterations: u64) -> Budget {
    match config.setup {
        SetupMode::RunToCompletion => Budget::Iterations(completion_iterations),
        SetupMode::Budgeted => match config.budget.expect("validated: budgeted has a budget") {
            DecisionBudget::Iterations(n) => Budget::Iterations(n),
            DecisionBudget::Seconds(s) => Budget::WallClock(Duration::from_secs_f64(s)),
        },
    }
}

impl Controller {
    pub fn from_scenario(config: &ScenarioConfig) -> Self {
        let limits = |completion_iterations| Limits {
            target: config.target,
            sampling_time: config.world.sampling_time,
            max_speed: config.robot.input_max.speed,
            max_turn_rate: config.robot.input_max.turn_rate,
            robot_radius: config.world.robot_radius,
            obstacle_radius: config.world.obstacle_radius,
            budget: decision_budget(config, completion_iterations),
        };
        let seed = config.world.rng_seed.wrapping_add(CONTROLLER_STREAM_OFFSET);
        match &config.controller {
            ControllerSpec::Htmpc(params) => {
                let tracker_config = config.tracker_config(params);
                let horizon = tracker_config.prediction_horizon as u64;
                let tube_half_width = tube::tube_width(
                    tracker_config.robot_tube.base,
                    tracker_config.robot_tube.contraction,
                    0,
                    horizon.max(1),
                )
                .expect("horizon is ahead of the anchor");
                Controller::Htmpc(Box::new(TrackingController {
                    config: tracker_config,
                    perception_radius: config.world.perception_radius,
                    limits: limits(RUN_TO_COMPLETION_EVALUATIONS),
                    tube_half_width,
                    plan: None,
                    last_solution: None,
                    need_replan: false,
                    previous_input: Input::default(),
                    rng: ChaCha8Rng::seed_from_u64(seed),
                }))
            }
            ControllerSpec::Hlrrt(params) => Controller::Hlrrt {
                params: *params,
                limits: limits(RUN_TO_COMPLETION_GROWTH),
                rng: ChaCha8Rng::seed_from_u64(seed),
            },
            ControllerSpec::Apf(params) => Controller::Apf {
                params: *params,
                limits: limits(1),
            },
        }
    }

    /// One decision at simulation step `step`.
    pub fn decide(&mut self, snapshot: &PerceptionSnapshot, step: u64) -> Decision {
        match self {
            Controller::Htmpc(tracker) => tracker.decide(snapshot, step),
            Controller::Hlrrt { params, limits, rng } => {
                let clock = Instant::now();
                let request = HlrrtRequest {
                    snapshot,
                    target: limits.target,
                    robot_radius: limits.robot_radius,
                    obstacle_radius: limits.obstacle_radius,
                    params,
                };
                let branch = hlrrt_plan(&request, limits.budget, rng);
                let input = branch
                    .map(|path| {
                        pursue(
                            &path,
                            snapshot.robot,
                            params,
                            limits.sampling_time,
                            limits.max_speed,
                            limits.max_turn_rate,
                        )
                    })
                    .unwrap_or_default();
                Decision {
                    input,
                    evaluations: match limits.budget {
                        Budget::Iterations(n) => n,
                        Budget::WallClock(_) => 0,
                    },
                    seconds: clock.elapsed().as_secs_f64(),
                    ..Decision::hold()
                }
            }
            Controller::Apf { params, limits } => {
                let clock = Instant::now();
                let input = apf_step(
                    snapshot,
                    limits.target,
                    params,
                    limits.sampling_time,
                    limits.max_speed,
                    limits.max_turn_rate,
                );
                Decision {
                    input,
                    evaluations: 1,
                    seconds: clock.elapsed().as_secs_f64(),
                    ..Decision::hold()
                }
            }
        }
    }
}

pub struct TrackingController {
    config: TmpcConfig,
    perception_radius: Real,
    limits: Limits,
    /// Widest robot tube envelope over one prediction horizon, for traces.
    tube_half_width: Real,
    plan: Option<ReferenceTrajectory>,
    last_solution: Option<TmpcSolution>,
    need_replan: bool,
    previous_input: Input<Real>,
    rng: ChaCha8Rng,
}

/// Extra clearance the reference keeps beyond the tracker's tightened
/// separation shells, so bounded disturbance and perception jitter do not
/// leave the tracker wedged against its own constraints.
const PLAN_MARGIN: Real = 0.1;

impl TrackingController {
    fn plan_request<'a>(
        &self,
        snapshot: &'a PerceptionSnapshot,
        step: u64,
    ) -> PlanRequest<'a> {
        PlanRequest {
            snapshot,
            target: self.limits.target,
            prediction_horizon: self.config.prediction_horizon,
            sampling_time: self.config.sampling_time,
            safety_radius: self.config.safety_radius + self.tube_half_width + PLAN_MARGIN,
            min_speed: self.config.input_min.speed,
            max_speed: self.config.input_max.speed,
            max_turn_rate: self.config.input_max.turn_rate,
            obstacle_tube: self.config.obstacle_tube,
            perception_radius: self.perception_radius,
            start_step: step,
        }
    }

    /// Warm start for the next solve: the previous solution shifted one step
    /// forward, with the tail repeated.
    fn warm_start(&self) -> Option<Vec<Input<Real>>> {
        let previous = self.last_solution.as_ref()?;
        let mut shifted: Vec<Input<Real>> = previous.inputs.iter().skip(1).copied().collect();
        let tail = *shifted.last()?;
        shifted.resize(self.config.prediction_horizon, tail);
        Some(shifted)
    }

    /// Fallback when the budget is spent before the solve can run: feedback
    /// on the reference point for this step, or a hold when even that is
    /// out of reach.
    fn ancillary_fallback(&self, snapshot: &PerceptionSnapshot, step: u64) -> Input<Real> {
        let Some(plan) = &self.plan else {
            return Input::default();
        };
        let offset = match step.checked_sub(plan.start_step) {
            Some(offset) => offset as usize,
            None => return Input::default(),
        };
        let (Some(&reference_state), Some(&reference_input)) =
            (plan.states.get(offset), plan.inputs.get(offset))
        else {
            return Input::default();
        };
        match tmpc::synthesize_gain(reference_state, reference_input, self.config.sampling_time) {
            Ok(entry) => {
                let (input, _) = tmpc::ancillary_input(
                    reference_input,
                    &entry.k,
                    snapshot.robot,
                    reference_state,
                    self.config.input_min,
                    self.config.input_max,
                );
                input
            }
            Err(_) => Input::default(),
        }
    }

    fn decide(&mut self, snapshot: &PerceptionSnapshot, step: u64) -> Decision {
        let clock = Instant::now();
        let horizon = self.config.prediction_horizon;

        let reason = if self.plan.is_none() {
            Some(PlanReason::Initial)
        } else if self.need_replan {
            Some(PlanReason::Infeasible)
        } else if self
            .plan
            .as_ref()
            .is_some_and(|plan| plan.window(step, horizon).is_none())
        {
            Some(PlanReason::Exhausted)
        } else {
            None
        };

        let mut plan_reason = None;
        if let Some(reason) = reason {
            match planner::plan(&self.plan_request(snapshot, step), &mut self.rng) {
                Ok(trajectory) => {
                    self.plan = Some(trajectory);
                    self.need_replan = false;
                    plan_reason = Some(reason);
                }
                Err(_) => {
                    return Decision {
                        dead_end: true,
                        seconds: clock.elapsed().as_secs_f64(),
                        tube_half_width: self.tube_half_width,
                        ..Decision::hold()
                    };
                }
            }
        }

        let plan = self.plan.as_ref().expect("planned above");
        let (reference_states, reference_inputs) = plan
            .window(step, horizon)
            .expect("a fresh plan always covers its own anchor");
        let reference = reference_states.first().copied();

        // A wall-clock budget covers the whole decision; when planning has
        // already consumed it the solve is skipped and pure feedback on the
        // reference carries this step.
        let remaining = match self.limits.budget {
            Budget::Iterations(n) => Budget::Iterations(n),
            Budget::WallClock(total) => match total.checked_sub(clock.elapsed()) {
                Some(left) => Budget::WallClock(left),
                None => {
                    let input = self.ancillary_fallback(snapshot, step);
                    self.previous_input = input;
                    return Decision {
                        input,
                        seconds: clock.elapsed().as_secs_f64(),
                        plan_reason,
                        aborted: true,
                        reference,
                        tube_half_width: self.tube_half_width,
                        ..Decision::hold()
                    };
                }
            },
        };

        let problem = TmpcProblem {
            current_state: snapshot.robot,
            previous_input: self.previous_input,
            reference_states,
            reference_inputs,
            snapshot,
            config: &self.config,
            plan_radius: plan.plan_radius(snapshot.robot.position, self.config.safety_radius),
            anchor_step: step,
        };
        let warm = self.warm_start();
        let solution = tmpc::solve(&problem, remaining, warm.as_deref(), &mut self.rng);

        let infeasible = !solution.feasible;
        self.need_replan = infeasible;
        let input = solution.inputs[0];
        let evaluations = solution.evaluations;
        self.last_solution = Some(solution);
        self.previous_input = input;

        Decision {
            input,
            evaluations,
            seconds: clock.elapsed().as_secs_f64(),
            plan_reason,
            infeasible,
            dead_end: false,
            aborted: false,
            reference,
            tube_half_width: self.tube_half_width,
        }
    }
}
