//! Planning against moving obstacles.
//!
//! Perceived dynamic obstacles are extrapolated at constant velocity over
//! the tracker's prediction horizon, each predicted position inflated by
//! the safety radius plus the obstacle tube width for that depth. A first
//! plan ignores them; the resulting timed reference is then checked depth by
//! depth, and any obstacle whose predicted disc the reference enters gets a
//! "belt" of its risky predicted discs added to the planning set before
//! replanning. Obstacles that cross the path at a different time than the
//! robot never become belts, so the path does not detour around them.

use std::collections::BTreeMap;

use rand::Rng;

use crate::geometry::Disc;
use crate::kinematics::RobotState;
use crate::tmpc::TubeParams;
use crate::tube::tube_width;
use crate::world::PerceivedObstacle;
use crate::{Point, Real};

use super::reference::{reference_speed, sample_stations, trace_stations};
use super::smooth::smooth_path;
use super::static_plan::{effective_discs, fallback_target, plan_among_discs, PlanError};
use super::{PlanRequest, ReferenceTrajectory};

/// Belt-growing rounds before settling for the current reference.
const MAX_RISK_ROUNDS: usize = 10;

/// How far past the tracker's prediction horizon the planner extrapolates
/// moving obstacles, as a multiple of that horizon. A unicycle with slew
/// limits needs several horizons of warning to clear an approach corridor,
/// so the reference must bend away before the tracker's constraints can
/// even see the threat.
const RISK_LOOKAHEAD_FACTOR: usize = 4;

/// Predicted inflated discs of one obstacle, indexed by prediction depth
/// minus one.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedTrack {
    pub discs: Vec<Disc<Real>>,
}

/// Constant-velocity extrapolation of each perceived obstacle, one disc per
/// prediction depth, inflated by the safety radius plus that depth's tube
/// width.
pub fn predict_tracks(
    obstacles: &[PerceivedObstacle],
    horizon: usize,
    sampling_time: Real,
    safety_radius: Real,
    tube: TubeParams,
) -> Vec<PredictedTrack> {
    obstacles
        .iter()
        .map(|obstacle| {
            let discs = (1..=horizon as u64)
                .map(|depth| {
                    let center = obstacle.position
                        + obstacle.velocity.scale(depth as Real * sampling_time);
                    let width = tube_width(tube.base, tube.contraction, 0, depth)
                        .expect("depth starts at one");
                    Disc::new(center, safety_radius + width)
                })
                .collect();
            PredictedTrack { discs }
        })
        .collect()
}

/// Depths (1-based) at which the timed reference enters an obstacle's
/// predicted discs. A reference position at depth d is checked against
/// obstacle depths d-1, d, and d+1, mirroring the tracker's separation
/// constraints on neighbouring steps.
fn risky_depths(states: &[RobotState<Real>], track: &PredictedTrack) -> Vec<usize> {
    let horizon = track.discs.len();
    let mut depths = Vec::new();
    for (robot_depth, state) in states.iter().enumerate().take(horizon + 1).skip(1) {
        let position = state.position;
        let mut risky = false;
        for obstacle_depth in
            robot_depth.saturating_sub(1).max(1)..=(robot_depth + 1).min(horizon)
        {
            let disc = track.discs[obstacle_depth - 1];
            if position.dist(disc.center) < disc.radius {
                risky = true;
            }
        }
        if risky {
            depths.push(robot_depth);
        }
    }
    depths
}

/// Belt discs for one obstacle: the contiguous hull of its risky depths.
/// Consecutive predicted discs overlap at scenario speeds, so the hull forms
/// one solid region the path must round.
fn belt_discs(track: &PredictedTrack, lowest: usize, highest: usize) -> Vec<Disc<Real>> {
    (lowest..=highest)
        .filter_map(|depth| track.discs.get(depth - 1))
        .copied()
        .collect()
}

fn plan_toward(
    request: &PlanRequest<'_>,
    target: Point,
    statics: &[Disc<Real>],
    tracks: &[PredictedTrack],
    rng: &mut impl Rng,
) -> Result<ReferenceTrajectory, PlanError> {
    let robot = request.snapshot.robot;
    let spacing =
        reference_speed(request.min_speed, request.max_speed) * request.sampling_time;
    let input_count = 2 * request.prediction_horizon;

    // Belt per obstacle: the depth range the reference must avoid.
    let mut belts: BTreeMap<usize, (usize, usize)> = BTreeMap::new();

    // A predicted disc that already contains the robot cannot be rounded;
    // avoiding it falls to the tracker's separation constraints.
    let escapable = |disc: &Disc<Real>| robot.position.dist(disc.center) >= disc.radius + 1e-3;

    let mut trajectory = None;
    for _ in 0..MAX_RISK_ROUNDS {
        let mut planning_discs = statics.to_vec();
        for (&index, &(lowest, highest)) in &belts {
            planning_discs
                .extend(belt_discs(&tracks[index], lowest, highest).into_iter().filter(escapable));
        }

        let planning_discs = effective_discs(robot.position, &planning_discs);
        let raw = plan_among_discs(robot.position, target, &planning_discs, rng)?;
        let path = smooth_path(raw, &planning_discs)?;
        let stations = sample_stations(&path, spacing, input_count);
        let (states, inputs) = trace_stations(
            robot,
            &stations,
            input_count,
            request.sampling_time,
            request.max_speed,
            request.max_turn_rate,
        );

        let mut grew = false;
        for (index, track) in tracks.iter().enumerate() {
            for depth in risky_depths(&states, track) {
                match belts.get_mut(&index) {
                    None => {
                        belts.insert(index, (depth, depth));
                        grew = true;
                    }
                    Some(belt) => {
                        if depth < belt.0 {
                            belt.0 = depth;
                            grew = true;
                        }
                        if depth > belt.1 {
                            belt.1 = depth;
                            grew = true;
                        }
                    }
                }
            }
        }

        trajectory = Some(ReferenceTrajectory {
            start_step: request.start_step,
            states,
            inputs,
            source_path: path,
        });
        if !grew {
            break;
        }
    }
    Ok(trajectory.expect("at least one round runs"))
}

/// Plan a timed reference toward the request's target, detouring around
/// predicted obstacle positions. When no path reaches the target under
/// current perception, the nearest reachable point toward it is used
/// instead; only if that also fails does the call report a dead end.
pub fn plan(request: &PlanRequest<'_>, rng: &mut impl Rng) -> Result<ReferenceTrajectory, PlanError> {
    let statics: Vec<Disc<Real>> = request
        .snapshot
        .visible_static
        .iter()
        .map(|disc| Disc::new(disc.center, request.safety_radius))
        .collect();
    let tracks = predict_tracks(
        &request.snapshot.visible_dynamic,
        request.prediction_horizon,
        request.sampling_time,
        request.safety_radius,
        request.obstacle_tube,
    );

    match plan_toward(request, request.target, &statics, &tracks, rng) {
        Ok(trajectory) => Ok(trajectory),
        Err(PlanError::DeadEnd) => {
            eprintln!("DBG plan_toward(target) DeadEnd robot={:?}", request.snapshot.robot);
            Err(PlanError::DeadEnd)
        }
        Err(PlanError::NoTraversablePath) => {
            // Immediate predicted discs block reachability checks in the
            // fallback search; deeper belt discs are timing artefacts.
            let immediate: Vec<Disc<Real>> = tracks
                .iter()
                .filter_map(|track| track.discs.first())
                .copied()
                .collect();
            eprintln!(
                "DBG plan_toward(target) NoTraversablePath robot={:?} statics={:?} dyn={:?}",
                request.snapshot.robot, request.snapshot.visible_static, request.snapshot.visible_dynamic
            );
            let target = fallback_target(
                request.snapshot,
                request.target,
                request.safety_radius,
                request.perception_radius,
                &immediate,
                rng,
            )
            .map_err(|e| {
                eprintln!("DBG fallback_target failed: {e:?}");
                e
            })?;
            eprintln!("DBG fallback target={target:?}");
            plan_toward(request, target, &statics, &tracks, rng).map_err(|e| {
                eprintln!("DBG fallback plan_toward failed: {e:?}");
                PlanError::DeadEnd
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use crate::world::PerceptionSnapshot;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn tube() -> TubeParams {
        TubeParams { base: 0.05, contraction: 0.5 }
    }

    fn snapshot(
        robot: RobotState<Real>,
        statics: Vec<Disc<Real>>,
        dynamic: Vec<PerceivedObstacle>,
    ) -> PerceptionSnapshot {
        PerceptionSnapshot { robot, visible_static: statics, visible_dynamic: dynamic }
    }

    fn request<'a>(snapshot: &'a PerceptionSnapshot, target: Point) -> PlanRequest<'a> {
        PlanRequest {
            snapshot,
            target,
            prediction_horizon: 5,
            sampling_time: 0.1,
            safety_radius: 0.8,
            min_speed: 0.0,
            max_speed: 1.0,
            max_turn_rate: 1.0,
            obstacle_tube: tube(),
            perception_radius: 5.0,
            start_step: 0,
        }
    }

    #[test]
    fn tracks_extrapolate_at_constant_velocity_with_growing_radii() {
        let obstacles = vec![PerceivedObstacle {
            position: Vec2::new(2.0, 0.0),
            velocity: Vec2::new(1.0, 0.0),
        }];
        let tracks = predict_tracks(&obstacles, 5, 0.1, 0.8, tube());
        assert_eq!(tracks.len(), 1);
        let discs = &tracks[0].discs;
        assert_eq!(discs.len(), 5);
        for (i, disc) in discs.iter().enumerate() {
            let depth = (i + 1) as Real;
            assert_relative_eq!(disc.center.x, 2.0 + 0.1 * depth, max_relative = 1e-12);
            assert_relative_eq!(disc.center.y, 0.0);
        }
        // Tube widths 0.05 * (1, 1.5, 1.75, ...) on top of the safety radius.
        assert_relative_eq!(discs[0].radius, 0.85, max_relative = 1e-12);
        assert_relative_eq!(discs[1].radius, 0.875, max_relative = 1e-12);
        assert_relative_eq!(discs[4].radius, 0.8 + 0.05 * 1.9375, max_relative = 1e-12);
        let mut prev = 0.0;
        for disc in discs {
            assert!(disc.radius >= prev);
            prev = disc.radius;
        }
    }

    #[test]
    fn stationary_obstacles_yield_coincident_growing_discs() {
        let obstacles = vec![PerceivedObstacle {
            position: Vec2::new(1.0, 1.0),
            velocity: Vec2::zero(),
        }];
        let tracks = predict_tracks(&obstacles, 5, 0.1, 0.8, tube());
        for disc in &tracks[0].discs {
            assert_eq!(disc.center, Vec2::new(1.0, 1.0));
        }
    }

    #[test]
    fn no_dynamic_obstacles_reduces_to_the_static_plan() {
        let snap = snapshot(
            RobotState::new(Vec2::new(0.0, 0.0), 0.0),
            vec![Disc::new(Vec2::new(2.0, 0.0), 0.4)],
            vec![],
        );
        let req = request(&snap, Vec2::new(4.0, 0.0));
        let trajectory = plan(&req, &mut rng(1)).unwrap();
        assert_eq!(trajectory.inputs.len(), 10);
        assert_eq!(trajectory.states.len(), 11);
        // The reference starts at the robot and bends around the obstacle.
        assert_eq!(trajectory.states[0].position, Vec2::zero());
        let clearance = trajectory
            .states
            .iter()
            .map(|s| s.position.dist(Vec2::new(2.0, 0.0)))
            .fold(Real::INFINITY, Real::min);
        assert!(clearance >= 0.0);
    }

    #[test]
    fn a_crossing_obstacle_in_phase_with_the_robot_forces_a_detour() {
        // Obstacle descending onto the straight-line path exactly when the
        // robot's timed chain gets there: the reference must bend away from
        // its predicted discs.
        let robot = RobotState::new(Vec2::new(0.0, 0.0), 0.0);
        let crossing = PerceivedObstacle {
            position: Vec2::new(0.6, 1.0),
            velocity: Vec2::new(0.0, -0.4),
        };
        let snap = snapshot(robot, vec![], vec![crossing]);
        let req = request(&snap, Vec2::new(4.0, 0.0));
        let trajectory = plan(&req, &mut rng(3)).unwrap();

        let tracks = predict_tracks(&snap.visible_dynamic, 5, 0.1, 0.8, tube());
        assert!(risky_depths(&trajectory.states, &tracks[0]).is_empty());
        // Straight-line tracking would have been risky.
        let naive = {
            let stations: Vec<Point> =
                (1..=10).map(|k| Vec2::new(0.05 * k as Real, 0.0)).collect();
            trace_stations(robot, &stations, 10, 0.1, 1.0, 1.0)
        };
        assert!(!risky_depths(&naive.0, &tracks[0]).is_empty());
        // The detour ducks under the descending obstacle.
        assert!(trajectory.states.iter().any(|s| s.position.y < -1e-3));
    }

    #[test]
    fn an_out_of_phase_crossing_leaves_the_straight_path_alone() {
        // Same crossing line and speed, but the obstacle starts higher: its
        // predicted discs never meet the robot's timed chain, so no belt
        // forms and the reference stays straight.
        let robot = RobotState::new(Vec2::new(0.0, 0.0), 0.0);
        let crossing = PerceivedObstacle {
            position: Vec2::new(0.6, 1.6),
            velocity: Vec2::new(0.0, -0.4),
        };
        let snap = snapshot(robot, vec![], vec![crossing]);
        let req = request(&snap, Vec2::new(4.0, 0.0));
        let trajectory = plan(&req, &mut rng(4)).unwrap();
        // Pure cruise along +x, no detour.
        for input in &trajectory.inputs {
            assert_relative_eq!(input.speed, 0.5, max_relative = 1e-9);
            assert!(input.turn_rate.abs() <= 1e-9);
        }
    }

    #[test]
    fn safety_radius_growth_never_shortens_the_detour() {
        let statics = vec![Disc::new(Vec2::new(2.0, 0.1), 0.4)];
        let mut previous = 0.0;
        for &safety in &[0.6, 0.8, 1.0] {
            let snap = snapshot(RobotState::new(Vec2::zero(), 0.0), statics.clone(), vec![]);
            let mut req = request(&snap, Vec2::new(4.0, 0.0));
            req.safety_radius = safety;
            let trajectory = plan(&req, &mut rng(7)).unwrap();
            let length = crate::geometry::path_length(&trajectory.source_path);
            assert!(
                length >= previous - 1e-9,
                "length {length} shrank below {previous} at safety {safety}"
            );
            previous = length;
        }
    }

    #[test]
    fn blocked_targets_fall_back_to_the_nearest_reachable_point() {
        // Target buried inside a static obstacle: the plan heads for the
        // nearest boundary point instead of failing.
        let statics = vec![Disc::new(Vec2::new(3.0, 0.0), 0.4)];
        let snap = snapshot(RobotState::new(Vec2::zero(), 0.0), statics, vec![]);
        let req = request(&snap, Vec2::new(3.0, 0.0));
        let trajectory = plan(&req, &mut rng(2)).unwrap();
        let end = trajectory.source_path.end_point().unwrap();
        assert_relative_eq!(end.dist(Vec2::new(3.0, 0.0)), 0.8, max_relative = 1e-5);
    }

    #[test]
    fn plans_are_deterministic_per_seed() {
        let robot = RobotState::new(Vec2::new(0.0, 0.0), 0.0);
        let crossing = PerceivedObstacle {
            position: Vec2::new(0.6, 1.0),
            velocity: Vec2::new(0.0, -0.4),
        };
        let statics = vec![Disc::new(Vec2::new(2.0, 0.0), 0.4)];
        let snap = snapshot(robot, statics, vec![crossing]);
        let req = request(&snap, Vec2::new(4.0, 0.0));
        let a = plan(&req, &mut rng(11)).unwrap();
        let b = plan(&req, &mut rng(11)).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.inputs, b.inputs);
    }

    #[test]
    fn an_obstacle_already_too_close_does_not_wedge_the_planner() {
        // Predicted discs that contain the robot cannot be detoured around;
        // the planner must still produce a reference rather than dead-end,
        // leaving the close-quarters dodge to the tracker.
        let robot = RobotState::new(Vec2::new(0.0, 0.0), 0.0);
        let overlapping = PerceivedObstacle {
            position: Vec2::new(0.45, 0.5),
            velocity: Vec2::new(0.0, -1.0),
        };
        let snap = snapshot(robot, vec![], vec![overlapping]);
        let req = request(&snap, Vec2::new(4.0, 0.0));
        let trajectory = plan(&req, &mut rng(9)).unwrap();
        assert_eq!(trajectory.inputs.len(), 10);
        // The reference still makes progress toward the target.
        assert!(trajectory.states.last().unwrap().position.x > 0.3);
    }
}
