//! The per-scenario simulation loop: perceive, decide, apply, adjudicate.
//!
//! Each step is judged before it is acted on, so a terminal state (arrival,
//! collision, timeout, livelock) never produces another decision, and the
//! perception noise stream advances exactly once per decided step.

use crate::controller::Controller;
use crate::scenario::{ScenarioConfig, ScenarioError};
use navsim_core::world::World;
use navsim_core::Real;
use serde::{Deserialize, Serialize};

/// Why a run ended without reaching the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureCause {
    Collision,
    Livelock,
    /// The planner ran out of fallbacks; no safe reference exists.
    Infeasible,
    Timeout,
}

impl FailureCause {
    pub fn label(self) -> &'static str {
        match self {
            FailureCause::Collision => "collision",
            FailureCause::Livelock => "livelock",
            FailureCause::Infeasible => "infeasible",
            FailureCause::Timeout => "timeout",
        }
    }
}

/// Aggregate outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub success: bool,
    pub failure_cause: Option<FailureCause>,
    /// Integrated ground-truth displacement (m).
    pub path_length: Real,
    /// Simulated time at the terminal state (s).
    pub mission_time: Real,
    /// Per-state (time, ground-truth distance from the robot center to the
    /// nearest obstacle center); infinite in an empty arena. Covers every
    /// visited state, the terminal one included.
    pub min_obstacle_distance: Vec<(Real, Real)>,
    /// Deterministic per-decision cost: objective evaluations for the
    /// tracker, growth iterations for the sampling baseline.
    pub decision_evaluations: Vec<u64>,
    /// Measured per-decision wall-clock seconds. Diagnostic only: excluded
    /// from reproducibility comparisons and from emitted files in
    /// iteration-budget mode.
    pub decision_seconds: Vec<Real>,
    /// Tracker infeasibility signals, each of which requests a replan.
    pub replan_count: u64,
}

impl RunMetrics {
    /// Equality on every reproducible field; wall-clock diagnostics are
    /// excluded because no two runs share clock readings.
    pub fn reproducible_eq(&self, other: &Self) -> bool {
        self.success == other.success
            && self.failure_cause == other.failure_cause
            && self.path_length == other.path_length
            && self.mission_time == other.mission_time
            && self.min_obstacle_distance == other.min_obstacle_distance
            && self.decision_evaluations == other.decision_evaluations
            && self.replan_count == other.replan_count
    }
}

/// One decided step of a run, flattened for emission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub step: u64,
    pub time: Real,
    pub x: Real,
    pub y: Real,
    pub heading: Real,
    pub speed: Real,
    pub turn_rate: Real,
    pub target_distance: Real,
    pub min_center_distance: Real,
    pub reference_x: Option<Real>,
    pub reference_y: Option<Real>,
    pub plan_event: Option<&'static str>,
    pub feasible: bool,
    pub aborted: bool,
    pub dead_end: bool,
    pub evaluations: u64,
    pub visible_static: usize,
    pub visible_dynamic: usize,
    pub tube_half_width: Real,
}

/// Per-step record of a whole run; timestamps increase strictly by the
/// sampling interval.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
}

/// Windowed stagnation test: true when the best target distance achieved
/// has improved by at most `min_improvement` over the trailing
/// `window_steps` states while the robot travelled at least `min_movement`.
/// The movement clause separates livelock from deliberate holding.
///
/// Histories run from the start of the mission to the current state; the
/// test needs at least `window_steps + 1` states to look back far enough.
pub fn detect_livelock(
    target_distances: &[Real],
    cumulative_path: &[Real],
    window_steps: usize,
    min_improvement: Real,
    min_movement: Real,
) -> bool {
    debug_assert_eq!(target_distances.len(), cumulative_path.len());
    let n = target_distances.len();
    if n <= window_steps {
        return false;
    }
    let split = n - 1 - window_steps;
    let best = |slice: &[Real]| slice.iter().copied().fold(Real::INFINITY, Real::min);
    let improvement = best(&target_distances[..=split]) - best(target_distances);
    let moved = cumulative_path[n - 1] - cumulative_path[split];
    improvement <= min_improvement && moved >= min_movement
}

fn min_center_distance(world: &World) -> Real {
    let robot = world.robot.position;
    let from_static = world
        .config
        .static_obstacles
        .iter()
        .map(|disc| disc.center.dist(robot));
    let from_dynamic = world.obstacles.iter().map(|o| o.position.dist(robot));
    from_static.chain(from_dynamic).fold(Real::INFINITY, Real::min)
}

/// Simulate one scenario to its verdict.
pub fn run_scenario(config: &ScenarioConfig) -> Result<(RunMetrics, RunTrace), ScenarioError> {
    config.validate()?;
    let sampling_time = config.world.sampling_time;
    let window_steps = (config.livelock.window / sampling_time).round() as usize;

    let mut world = World::new(config.world.clone(), config.start);
    let mut controller = Controller::from_scenario(config);

    let mut distance_history = Vec::new();
    let mut path_history = Vec::new();
    let mut min_obstacle_distance = Vec::new();
    let mut decision_evaluations = Vec::new();
    let mut decision_seconds = Vec::new();
    let mut steps = Vec::new();
    let mut replan_count = 0;
    let mut path_length = 0.0;

    let (success, failure_cause, mission_time) = loop {
        let step = world.step_index;
        let time = step as Real * sampling_time;
        let target_distance = world.robot.position.dist(config.target);
        let center_distance = min_center_distance(&world);
        min_obstacle_distance.push((time, center_distance));

        if world.in_collision() {
            break (false, Some(FailureCause::Collision), time);
        }
        if target_distance <= config.arrival_tolerance {
            break (true, None, time);
        }
        if time >= config.max_mission_time {
            break (false, Some(FailureCause::Timeout), time);
        }
        distance_history.push(target_distance);
        path_history.push(path_length);
        if detect_livelock(
            &distance_history,
            &path_history,
            window_steps,
            config.livelock.improvement,
            config.livelock.movement,
        ) {
            break (false, Some(FailureCause::Livelock), time);
        }

        let snapshot = world.perceive();
        let decision = controller.decide(&snapshot, step);
        decision_evaluations.push(decision.evaluations);
        decision_seconds.push(decision.seconds);
        if decision.infeasible {
            replan_count += 1;
        }
        steps.push(TraceStep {
            step,
            time,
            x: world.robot.position.x,
            y: world.robot.position.y,
            heading: world.robot.heading,
            speed: decision.input.speed,
            turn_rate: decision.input.turn_rate,
            target_distance,
            min_center_distance: center_distance,
            reference_x: decision.reference.map(|r| r.position.x),
            reference_y: decision.reference.map(|r| r.position.y),
            plan_event: decision.plan_reason.map(|r| r.label()),
            feasible: !decision.infeasible,
            aborted: decision.aborted,
            dead_end: decision.dead_end,
            evaluations: decision.evaluations,
            visible_static: snapshot.visible_static.len(),
            visible_dynamic: snapshot.visible_dynamic.len(),
            tube_half_width: decision.tube_half_width,
        });
        if decision.dead_end {
            break (false, Some(FailureCause::Infeasible), time);
        }

        let before = world.robot.position;
        world.advance(decision.input);
        path_length += world.robot.position.dist(before);
    };

    let metrics = RunMetrics {
        success,
        failure_cause,
        path_length,
        mission_time,
        min_obstacle_distance,
        decision_evaluations,
        decision_seconds,
        replan_count,
    };
    Ok((metrics, RunTrace { steps }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn steady_progress_is_not_livelock() {
        // 30 s of closing in at 0.05 m per step.
        let distances: Vec<Real> = (0..300).map(|k| 15.0 - 0.05 * k as Real).collect();
        let path: Vec<Real> = (0..300).map(|k| 0.05 * k as Real).collect();
        assert!(!detect_livelock(&distances, &path, 150, 0.1, 1.0));
    }

    #[test]
    fn circling_without_progress_is_livelock() {
        // Approach, then orbit at constant distance while still moving.
        let mut distances = vec![10.0; 20];
        distances.extend(std::iter::repeat(5.0).take(200));
        let path: Vec<Real> = (0..220).map(|k| 0.08 * k as Real).collect();
        assert!(detect_livelock(&distances, &path, 150, 0.1, 1.0));
    }

    #[test]
    fn holding_still_is_not_livelock() {
        // Same stagnant distance but no movement: the movement clause keeps
        // this a timeout case, not a livelock.
        let distances = vec![5.0; 400];
        let path = vec![0.0; 400];
        assert!(!detect_livelock(&distances, &path, 150, 0.1, 1.0));
    }

    #[test]
    fn short_histories_never_trip_the_detector() {
        let distances = vec![5.0; 150];
        let path: Vec<Real> = (0..150).map(|k| 0.1 * k as Real).collect();
        assert!(!detect_livelock(&distances, &path, 150, 0.1, 1.0));
    }

    #[test]
    fn improvement_just_above_threshold_is_not_livelock() {
        // Best improves by 0.11 m inside the window with plenty of motion.
        let mut distances = vec![5.0; 160];
        distances[159] = 4.89;
        let path: Vec<Real> = (0..160).map(|k| 0.1 * k as Real).collect();
        assert!(!detect_livelock(&distances, &path, 150, 0.1, 1.0));
        // At exactly 0.10 m the rule still calls it livelock (<=).
        distances[159] = 4.90;
        assert!(detect_livelock(&distances, &path, 150, 0.1, 1.0));
    }
}
