//! Scenario files: a versioned, human-readable TOML schema carrying the
//! world, the robot's limits, the mission endpoints, the controller and its
//! tuning, and the timing setup. Every knob a run depends on lives here, so
//! a result is reproducible from its file alone.

use navsim_core::baselines::{ApfParams, HlrrtParams};
use navsim_core::kinematics::{Input, RobotState};
use navsim_core::tmpc::{DiscountMode, TmpcConfig, TubeParams};
use navsim_core::world::WorldConfig;
use navsim_core::{Point, Real};
use serde::{Deserialize, Serialize};
use std::path::Path;

/// The schema this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
    /// Parse errors carry the field path and line from the TOML parser.
    #[error("malformed scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot serialize scenario: {0}")]
    Emit(#[from] toml::ser::Error),
    #[error("cannot write trace: {0}")]
    Trace(#[from] csv::Error),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field, reason: reason.into() }
}

/// Timing regime of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetupMode {
    /// Every decision is cut off at the configured budget.
    Budgeted,
    /// Decisions run until the solver converges (under a deterministic
    /// safety cap, so runs stay reproducible).
    RunToCompletion,
}

impl SetupMode {
    pub fn label(self) -> &'static str {
        match self {
            SetupMode::Budgeted => "budgeted",
            SetupMode::RunToCompletion => "run-to-completion",
        }
    }
}

/// Per-decision computation allowance. Iteration budgets count the solver's
/// own work units (tracker poll sweeps, tree growth iterations) and are
/// deterministic and machine-independent; wall-clock budgets reproduce live
/// operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionBudget {
    Iterations(u64),
    Seconds(Real),
}

/// Livelock adjudication: stuck when the best target distance improved by at
/// most `improvement` over the trailing `window` seconds while the robot
/// still moved at least `movement` meters (deliberate holding is exempt).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LivelockRule {
    pub window: Real,
    pub improvement: Real,
    pub movement: Real,
}

impl Default for LivelockRule {
    fn default() -> Self {
        Self { window: 15.0, improvement: 0.1, movement: 1.0 }
    }
}

/// Input box of the robot, shared by every controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotLimits {
    pub input_min: Input<Real>,
    pub input_max: Input<Real>,
}

/// Tracking-controller tuning; the full solver configuration is assembled
/// from this plus the world (arena box, sampling time) and robot limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerParams {
    pub prediction_horizon: usize,
    pub control_horizon: usize,
    pub w1: Real,
    pub w2: Real,
    pub slew_limit: Real,
    pub safety_radius: Real,
    pub robot_tube: TubeParams,
    pub obstacle_tube: TubeParams,
    pub discount: DiscountMode,
    pub start_count: usize,
    pub max_iterations: u64,
}

/// Which controller runs and how it is tuned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ControllerSpec {
    Htmpc(TrackerParams),
    Hlrrt(HlrrtParams),
    Apf(ApfParams),
}

impl ControllerSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ControllerSpec::Htmpc(_) => "htmpc",
            ControllerSpec::Hlrrt(_) => "hlrrt",
            ControllerSpec::Apf(_) => "apf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub name: String,
    /// Suite label the scenario belongs to (for grouping in summaries).
    pub case: String,
    pub setup: SetupMode,
    #[serde(default = "default_max_mission_time")]
    pub max_mission_time: Real,
    #[serde(default = "default_arrival_tolerance")]
    pub arrival_tolerance: Real,
    pub target: Point,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<DecisionBudget>,
    #[serde(default)]
    pub livelock: LivelockRule,
    pub robot: RobotLimits,
    pub start: RobotState<Real>,
    pub world: WorldConfig,
    pub controller: ControllerSpec,
}

fn default_max_mission_time() -> Real {
    120.0
}

fn default_arrival_tolerance() -> Real {
    0.2
}

impl ScenarioConfig {
    /// Semantic checks beyond what the schema can express.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        if self.setup == SetupMode::Budgeted {
            match self.budget {
                None => {
                    return Err(invalid("budget", "budgeted setup requires a decision budget"))
                }
                Some(DecisionBudget::Iterations(0)) => {
                    return Err(invalid("budget", "iteration budget must be positive"))
                }
                Some(DecisionBudget::Seconds(s)) if s <= 0.0 => {
                    return Err(invalid("budget", "wall-clock budget must be positive"))
                }
                Some(_) => {}
            }
        }
        if self.max_mission_time <= 0.0 {
            return Err(invalid("max_mission_time", "must be positive"));
        }
        if self.arrival_tolerance <= 0.0 {
            return Err(invalid("arrival_tolerance", "must be positive"));
        }
        for (field, value) in [
            ("livelock.window", self.livelock.window),
            ("livelock.improvement", self.livelock.improvement),
            ("livelock.movement", self.livelock.movement),
        ] {
            if value <= 0.0 {
                return Err(invalid("livelock", format!("{field} must be positive")));
            }
        }
        if self.robot.input_min.speed >= self.robot.input_max.speed
            || self.robot.input_min.turn_rate >= self.robot.input_max.turn_rate
        {
            return Err(invalid("robot", "input minima must lie below maxima"));
        }
        if self.world.sampling_time <= 0.0 {
            return Err(invalid("world.sampling_time", "must be positive"));
        }

        let arena = &self.world.arena;
        let inside = |p: Point| {
            (0.0..=arena.width).contains(&p.x) && (0.0..=arena.height).contains(&p.y)
        };
        if !inside(self.start.position) {
            return Err(invalid("start", "start lies outside the arena"));
        }
        if !inside(self.target) {
            return Err(invalid("target", "target lies outside the arena"));
        }

        // Both mission endpoints must be collision-free at t = 0.
        let clear_of_obstacles = |p: Point, label: &'static str| {
            for disc in &self.world.static_obstacles {
                if p.dist(disc.center) <= self.world.robot_radius + disc.radius {
                    return Err(invalid(label, "inside an inflated static obstacle at t=0"));
                }
            }
            for obstacle in &self.world.dynamic_obstacles {
                let reach = self.world.robot_radius + self.world.obstacle_radius;
                if p.dist(obstacle.position) <= reach {
                    return Err(invalid(label, "inside an inflated dynamic obstacle at t=0"));
                }
            }
            Ok(())
        };
        clear_of_obstacles(self.start.position, "start")?;
        clear_of_obstacles(self.target, "target")?;

        if let ControllerSpec::Htmpc(params) = &self.controller {
            self.tracker_config(params)
                .validate()
                .map_err(|reason| invalid("controller", reason))?;
        }
        Ok(())
    }

    /// Assemble the full tracking-solver configuration: controller tuning
    /// plus the arena box, input limits, and sampling time.
    pub fn tracker_config(&self, params: &TrackerParams) -> TmpcConfig {
        TmpcConfig {
            prediction_horizon: params.prediction_horizon,
            control_horizon: params.control_horizon,
            w1: params.w1,
            w2: params.w2,
            state_min: Point::zero(),
            state_max: Point::new(self.world.arena.width, self.world.arena.height),
            input_min: self.robot.input_min,
            input_max: self.robot.input_max,
            slew_limit: params.slew_limit,
            safety_radius: params.safety_radius,
            robot_tube: params.robot_tube,
            obstacle_tube: params.obstacle_tube,
            discount: params.discount,
            start_count: params.start_count,
            max_iterations: params.max_iterations,
            sampling_time: self.world.sampling_time,
        }
    }
}

/// Parse and validate one scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    let config: ScenarioConfig = toml::from_str(&text)?;
    config.validate()?;
    Ok(config)
}

/// Serialize a scenario to the file format `load_scenario` reads.
pub fn scenario_to_toml(config: &ScenarioConfig) -> Result<String, ScenarioError> {
    Ok(toml::to_string_pretty(config)?)
}

/// Write one scenario file; the output loads back bit-identically.
pub fn save_scenario(
    config: &ScenarioConfig,
    path: impl AsRef<Path>,
) -> Result<(), ScenarioError> {
    std::fs::write(path, scenario_to_toml(config)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite;

    #[test]
    fn suite_scenarios_round_trip_bit_identically() {
        let config = suite::case_one()[2].clone();
        let text = scenario_to_toml(&config).unwrap();
        let reloaded: ScenarioConfig = toml::from_str(&text).unwrap();
        assert_eq!(config, reloaded);
        // Emit of the reload matches the first emit byte for byte.
        assert_eq!(text, scenario_to_toml(&reloaded).unwrap());
    }

    #[test]
    fn missing_seed_is_reported_by_field_name() {
        let config = suite::case_one()[0].clone();
        let text = scenario_to_toml(&config).unwrap();
        let broken: String = text
            .lines()
            .filter(|line| !line.starts_with("rng_seed"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = toml::from_str::<ScenarioConfig>(&broken).unwrap_err();
        assert!(err.to_string().contains("rng_seed"), "{err}");
    }

    #[test]
    fn unknown_top_level_keys_are_rejected() {
        let config = suite::case_one()[0].clone();
        let mut text = scenario_to_toml(&config).unwrap();
        text.insert_str(0, "mystery_knob = 3\n");
        let err = toml::from_str::<ScenarioConfig>(&text).unwrap_err();
        assert!(err.to_string().contains("mystery_knob"), "{err}");
    }

    #[test]
    fn budgeted_setup_without_a_budget_is_invalid() {
        let mut config = suite::case_one()[0].clone();
        config.setup = SetupMode::Budgeted;
        config.budget = None;
        let err = config.validate().unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid { field: "budget", .. }));
    }

    #[test]
    fn start_inside_an_obstacle_is_invalid() {
        let mut config = suite::case_one()[0].clone();
        config.start.position = config.world.static_obstacles[0].center;
        let err = config.validate().unwrap_err();
        assert!(matches!(err, ScenarioError::Invalid { field: "start", .. }));
    }

    #[test]
    fn case_one_files_carry_the_advertised_obstacle_counts() {
        for config in suite::case_one() {
            assert_eq!(config.world.static_obstacles.len(), 6);
            assert_eq!(config.world.dynamic_obstacles.len(), 5);
            config.validate().unwrap();
        }
        for config in suite::case_two() {
            assert_eq!(config.world.static_obstacles.len(), 8);
            assert_eq!(config.world.dynamic_obstacles.len(), 8);
            config.validate().unwrap();
        }
    }
}
