//! Tube-based MPC tracking: discounted tracking objective, robustly
//! tightened separation constraints, per-step feedback gains, and a
//! derivative-free solve with an independent feasibility audit.
//!
//! The tracker follows a reference produced by the planner. Each decision
//! optimizes the next `prediction_horizon` inputs (only the first is ever
//! applied); when no feasible solution exists the caller is expected to
//! request a fresh plan.

mod constraints;
mod gain;
mod solve;

pub use constraints::{build_constraints, Constraint, ConstraintSet, StepAlignment};
pub use gain::{ancillary_input, is_stabilizing, spectral_radius, synthesize_gain, GainEntry, GainError};
pub use solve::{audit_solution, objective, solve, ObjectiveError, TmpcSolution};

use crate::kinematics::{Input, RobotState};
use crate::world::PerceptionSnapshot;
use crate::{Point, Real};
use serde::{Deserialize, Serialize};

/// Geometric tube parameters: per-step deviation bound and damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeParams {
    /// One-step deviation bound w-bar (m).
    pub base: Real,
    /// Damping in [0, 1]: higher damps accumulated deviation faster.
    pub contraction: Real,
}

/// Which discount weight multiplies the tracking error at prediction step k
/// (anchor step kappa).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscountMode {
    /// w1^(k - kappa): depends only on the prediction depth (default).
    PerStep,
    /// w1^(k / (kappa + 1)): depends on absolute time; kept for comparison.
    AnchorScaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmpcConfig {
    pub prediction_horizon: usize,
    /// Control horizon: inputs from this index on are tied to the last free
    /// one, so the decision vector has 2 * control_horizon entries.
    pub control_horizon: usize,
    /// Tracking-error discount in (0, 1).
    pub w1: Real,
    /// Input-effort weight.
    pub w2: Real,
    pub state_min: Point,
    pub state_max: Point,
    pub input_min: Input<Real>,
    pub input_max: Input<Real>,
    /// Bound on the norm of the per-step input change.
    pub slew_limit: Real,
    /// Center-to-center safety distance rho-safe; must cover both body radii.
    pub safety_radius: Real,
    pub robot_tube: TubeParams,
    pub obstacle_tube: TubeParams,
    pub discount: DiscountMode,
    /// Number of pattern-search starts per solve.
    pub start_count: usize,
    /// Per-start sweep cap inside the solver.
    pub max_iterations: u64,
    /// Discretization interval of the motion model, also used to
    /// extrapolate perceived obstacle velocities.
    pub sampling_time: Real,
}

impl TmpcConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.control_horizon == 0 || self.control_horizon > self.prediction_horizon {
            return Err("control horizon must be in 1..=prediction horizon".into());
        }
        if !(0.0 < self.w1 && self.w1 < 1.0) {
            return Err("w1 must lie in (0, 1)".into());
        }
        if self.w2 < 0.0 {
            return Err("w2 must be nonnegative".into());
        }
        for (name, xi) in [
            ("robot tube", self.robot_tube.contraction),
            ("obstacle tube", self.obstacle_tube.contraction),
        ] {
            if !(0.0..=1.0).contains(&xi) {
                return Err(format!("{name} contraction must lie in [0, 1]"));
            }
        }
        if self.sampling_time <= 0.0 {
            return Err("sampling time must be positive".into());
        }
        Ok(())
    }
}

/// One tracking decision: everything the solver needs at anchor step kappa.
#[derive(Debug, Clone, Copy)]
pub struct TmpcProblem<'a> {
    pub current_state: RobotState<Real>,
    /// Input applied at kappa - 1; anchors the first slew constraint.
    pub previous_input: Input<Real>,
    /// Reference states for steps kappa+1 ..= kappa+Np.
    pub reference_states: &'a [RobotState<Real>],
    /// Reference inputs for steps kappa ..= kappa+Np-1.
    pub reference_inputs: &'a [Input<Real>],
    pub snapshot: &'a PerceptionSnapshot,
    pub config: &'a TmpcConfig,
    /// Planning zone radius around the anchor; the plan-zone constraint
    /// keeps predictions within this radius minus the safety radius.
    pub plan_radius: Real,
    /// Absolute anchor step kappa (only the anchor-scaled discount uses it).
    pub anchor_step: u64,
}

impl TmpcProblem<'_> {
    pub fn horizon(&self) -> usize {
        self.config.prediction_horizon
    }
}
