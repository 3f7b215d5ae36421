//! Heuristic shortest-path planning with tangent lines and boundary arcs.
//!
//! The planner takes a perception snapshot and a target, detours around
//! inflated static obstacles and the predicted positions of moving ones, and
//! returns a timed reference the tube MPC can track: states that satisfy the
//! discrete motion model exactly, paired with the inputs that generate them.
//!
//! Pipeline: a greedy walk builds candidate tangent-arc paths on both sides
//! of the direct line ([`static_plan`]), a taut rebuild removes union-walk
//! corners and redundant wraps ([`smooth`]), stations sampled along the
//! result become an exactly consistent state/input chain ([`reference`]),
//! and a risk loop adds predicted obstacle discs until the timed chain stays
//! clear of them ([`dynamic`]).

mod dynamic;
mod reference;
mod smooth;
mod static_plan;

pub use dynamic::{plan, predict_tracks, PredictedTrack};
pub use reference::reference_speed;
pub use smooth::{path_max_kink, smooth_path};
pub use static_plan::{fallback_target, plan_among_discs, plan_static, PlanError};

use crate::geometry::{path_length, GeometricPath};
use crate::kinematics::{Input, RobotState};
use crate::tmpc::TubeParams;
use crate::world::PerceptionSnapshot;
use crate::{Point, Real};

/// Everything a single planning call needs, borrowed from the caller.
#[derive(Debug, Clone)]
pub struct PlanRequest<'a> {
    pub snapshot: &'a PerceptionSnapshot,
    pub target: Point,
    /// Tracker prediction horizon; obstacle motion is extrapolated this far.
    pub prediction_horizon: usize,
    pub sampling_time: Real,
    /// Center-to-center separation to keep from every obstacle.
    pub safety_radius: Real,
    pub min_speed: Real,
    pub max_speed: Real,
    pub max_turn_rate: Real,
    /// Growth of the uncertainty around predicted obstacle positions.
    pub obstacle_tube: TubeParams,
    /// How far perception reaches; fallback targets stay inside it.
    pub perception_radius: Real,
    /// Simulation step the reference starts at.
    pub start_step: u64,
}

/// One tracking window: the reference states ahead of the anchor and the
/// inputs that generate them.
pub type ReferenceWindow<'a> = (&'a [RobotState<Real>], &'a [Input<Real>]);

/// A timed reference produced by the planner.
///
/// `states[0]` is the robot pose at `start_step`; `inputs[i]` drives
/// `states[i]` to `states[i + 1]` under the discrete motion model, exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    pub start_step: u64,
    pub states: Vec<RobotState<Real>>,
    pub inputs: Vec<Input<Real>>,
    /// The geometric path the stations were sampled from.
    pub source_path: GeometricPath<Real>,
}

impl ReferenceTrajectory {
    /// Tracking window for an anchor step: the next `horizon` reference
    /// states and the inputs that produce them. `None` once the trajectory
    /// has fewer than `horizon` steps left, which signals a replan.
    pub fn window(&self, anchor_step: u64, horizon: usize) -> Option<ReferenceWindow<'_>> {
        let offset = anchor_step.checked_sub(self.start_step)? as usize;
        let states = self.states.get(offset + 1..offset + 1 + horizon)?;
        let inputs = self.inputs.get(offset..offset + horizon)?;
        Some((states, inputs))
    }

    /// Radius around `from` that contains the whole source path with the
    /// safety margin, so a planning zone of this radius never cuts off the
    /// reference being tracked.
    pub fn plan_radius(&self, from: Point, safety_radius: Real) -> Real {
        let margin = safety_radius + 0.1;
        let total = path_length(&self.source_path);
        if total <= 0.0 {
            return margin;
        }
        let samples = (total / 0.05).ceil() as usize + 1;
        let mut reach: Real = 0.0;
        for k in 0..=samples {
            let s = total * k as Real / samples as Real;
            if let Some(p) = self.source_path.point_at_length(s) {
                reach = reach.max(from.dist(p));
            }
        }
        reach + margin
    }
}
