//! Artificial potential fields with horizon extrapolation: one attractive
//! pull toward the target plus an inverse-square repulsive push from every
//! obstacle inside the influence radius, evaluated where each obstacle is
//! predicted to be a few steps ahead rather than where it is now.
//!
//! The combined force vector is the command: its direction is the desired
//! heading (turned toward at the rate limit) and its magnitude the desired
//! speed, gated by heading alignment so the robot turns before it drives.

use crate::geometry::normalize_angle;
use crate::kinematics::Input;
use crate::world::PerceptionSnapshot;
use crate::{Point, Real};
use serde::{Deserialize, Serialize};

/// Distances are floored here before entering the inverse-square law, so a
/// perception glitch that reports an obstacle on top of the robot produces a
/// huge finite push instead of infinity.
const DISTANCE_FLOOR: Real = 1e-3;

/// Forces below this norm command a full stop.
const FORCE_FLOOR: Real = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApfParams {
    pub attraction_gain: Real,
    pub repulsion_gain: Real,
    /// Obstacles farther than this exert no force (m).
    pub influence_radius: Real,
    /// How many sampling intervals ahead obstacles are extrapolated.
    pub horizon_steps: u32,
}

impl ApfParams {
    /// The ill-tuned configuration: repulsion reaches far and overpowers
    /// progress, which traps the robot in closed orbits between obstacles.
    pub fn paper_failure() -> Self {
        Self {
            attraction_gain: 15.0,
            repulsion_gain: 2.5,
            influence_radius: 5.0,
            horizon_steps: 5,
        }
    }

    /// A tuning that trades responsiveness for progress: short influence
    /// radius and balanced gains let the robot squeeze between obstacles.
    pub fn retuned() -> Self {
        Self {
            attraction_gain: 2.0,
            repulsion_gain: 1.2,
            influence_radius: 1.5,
            horizon_steps: 5,
        }
    }
}

/// Combined force at the robot's position. Repulsions use center distances
/// to obstacle positions extrapolated `horizon_steps` sampling intervals
/// ahead (static obstacles do not move, so only their current position
/// matters); anything at or beyond the influence radius contributes nothing.
pub fn apf_force(
    snapshot: &PerceptionSnapshot,
    target: Point,
    params: &ApfParams,
    sampling_time: Real,
) -> Point {
    let robot = snapshot.robot.position;
    let to_target = target - robot;
    let mut force = match to_target.normalized() {
        Some(toward) if to_target.norm() > DISTANCE_FLOOR => {
            toward.scale(params.attraction_gain)
        }
        _ => Point::zero(),
    };

    let mut repel = |obstacle: Point| {
        let offset = robot - obstacle;
        let distance = offset.norm().max(DISTANCE_FLOOR);
        if distance >= params.influence_radius {
            return;
        }
        let magnitude = params.repulsion_gain
            * (1.0 / distance - 1.0 / params.influence_radius)
            / (distance * distance);
        force = force + offset.scale(magnitude / distance);
    };

    for disc in &snapshot.visible_static {
        repel(disc.center);
    }
    let lead = params.horizon_steps as Real * sampling_time;
    for obstacle in &snapshot.visible_dynamic {
        repel(obstacle.position + obstacle.velocity.scale(lead));
    }
    force
}

/// One reactive decision: align with the force and drive at its magnitude.
pub fn apf_step(
    snapshot: &PerceptionSnapshot,
    target: Point,
    params: &ApfParams,
    sampling_time: Real,
    max_speed: Real,
    max_turn_rate: Real,
) -> Input<Real> {
    let force = apf_force(snapshot, target, params, sampling_time);
    let magnitude = force.norm();
    if magnitude <= FORCE_FLOOR {
        return Input::default();
    }
    let bearing_error = normalize_angle(force.angle() - snapshot.robot.heading);
    let turn_rate = (bearing_error / sampling_time).clamp(-max_turn_rate, max_turn_rate);
    let alignment = bearing_error.cos().max(0.0);
    let speed = (magnitude * alignment).clamp(0.0, max_speed);
    Input::new(speed, turn_rate)
}
