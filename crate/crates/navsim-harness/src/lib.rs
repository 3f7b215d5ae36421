//! Scenario harness for the navigation stack: versioned scenario files, the
//! perceive-decide-advance simulation loop, the controllers under test, and
//! batch statistics with deterministic result emission.

pub mod aggregate;
pub mod controller;
pub mod emit;
pub mod run;
pub mod scenario;
pub mod suite;

pub use aggregate::{aggregate, mean_and_std, Statistic, Summary};
pub use controller::{Controller, Decision, PlanReason};
pub use emit::{emit_results, load_metrics, summarize_metrics, summary_table, MetricsRecord, RunRecord};
pub use run::{detect_livelock, run_scenario, FailureCause, RunMetrics, RunTrace, TraceStep};
pub use scenario::{
    load_scenario, save_scenario, scenario_to_toml, ControllerSpec, DecisionBudget, LivelockRule,
    RobotLimits, ScenarioConfig, ScenarioError, SetupMode, TrackerParams, SCHEMA_VERSION,
};

/// Run a batch on a worker pool, one isolated world per run; results come
/// back in input order so downstream folds are deterministic.
pub fn run_many(
    configs: &[ScenarioConfig],
) -> Vec<Result<(RunMetrics, RunTrace), ScenarioError>> {
    use rayon::prelude::*;
    configs.par_iter().map(run_scenario).collect()
}
