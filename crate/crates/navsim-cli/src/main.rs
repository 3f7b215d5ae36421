//! Scenario runner: execute single scenarios or whole directories, emit
//! traces and summaries, regenerate the bundled suites, and rebuild summary
//! lines from previously emitted metrics.

use clap::{Args, Parser, Subcommand, ValueEnum};
use navsim_core::baselines::{ApfParams, HlrrtParams};
use navsim_harness::{
    emit_results, load_metrics, load_scenario, run_many, save_scenario, suite, summarize_metrics,
    summary_table, ControllerSpec, DecisionBudget, RunRecord, ScenarioConfig, ScenarioError,
    SetupMode,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "navsim", version, about = "Deterministic navigation scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run {
        file: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        output: Output,
    },
    /// Run every scenario file in a directory, sorted by name.
    Suite {
        directory: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
        #[command(flatten)]
        output: Output,
    },
    /// Write the bundled scenario suites under a directory.
    GenSuite { directory: PathBuf },
    /// Rebuild summary lines from the metrics files in a results directory.
    Aggregate { directory: PathBuf },
}

#[derive(Args)]
struct Overrides {
    /// Replace the timing setup of every loaded scenario.
    #[arg(long, value_enum)]
    setup: Option<SetupChoice>,
    /// Replace the controller of every loaded scenario (default tunings).
    #[arg(long, value_enum)]
    controller: Option<ControllerChoice>,
    /// Replace the world noise seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct Output {
    /// Directory for summaries, metrics, and traces.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Skip writing per-run trace CSVs.
    #[arg(long)]
    no_trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetupChoice {
    Budgeted,
    RunToCompletion,
}

impl SetupChoice {
    fn mode(self) -> SetupMode {
        match self {
            SetupChoice::Budgeted => SetupMode::Budgeted,
            SetupChoice::RunToCompletion => SetupMode::RunToCompletion,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerChoice {
    Htmpc,
    Hlrrt,
    /// Retuned potential field.
    Apf,
    /// Potential field with the aggressive legacy gains.
    ApfPaper,
}

impl ControllerChoice {
    fn spec(self) -> ControllerSpec {
        match self {
            ControllerChoice::Htmpc => suite::htmpc_spec(),
            ControllerChoice::Hlrrt => ControllerSpec::Hlrrt(HlrrtParams::default()),
            ControllerChoice::Apf => ControllerSpec::Apf(ApfParams::retuned()),
            ControllerChoice::ApfPaper => ControllerSpec::Apf(ApfParams::paper_failure()),
        }
    }
}

fn apply_overrides(mut config: ScenarioConfig, overrides: &Overrides) -> ScenarioConfig {
    if let Some(controller) = overrides.controller {
        config = suite::with_controller(&config, controller.spec());
    }
    if let Some(setup) = overrides.setup {
        config = suite::with_setup(&config, setup.mode());
    }
    if let Some(seed) = overrides.seed {
        config = suite::with_seed(&config, seed);
    }
    config
}

fn scenario_files(directory: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(directory)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "toml"))
        .collect();
    paths.sort();
    Ok(paths)
}

fn execute(configs: Vec<ScenarioConfig>, output: &Output) -> Result<(), ScenarioError> {
    eprintln!("running {} scenario(s)...", configs.len());
    let results = run_many(&configs);
    let mut records = Vec::with_capacity(configs.len());
    for (config, result) in configs.iter().zip(results) {
        let (metrics, trace) = result?;
        records.push(RunRecord {
            name: config.name.clone(),
            controller: config.controller.kind_name(),
            setup: config.setup.label(),
            metrics,
            trace: (!output.no_trace).then_some(trace),
        });
    }
    let wall_clock = configs
        .iter()
        .any(|c| matches!(c.budget, Some(DecisionBudget::Seconds(_))));
    emit_results(&records, &output.out, wall_clock)?;
    print!("{}", summary_table(&records));
    eprintln!("results written to {}", output.out.display());
    Ok(())
}

fn gen_suite(directory: &Path) -> Result<(), ScenarioError> {
    for (case, configs) in [("case-1", suite::case_one()), ("case-2", suite::case_two())] {
        let dir = directory.join(case);
        std::fs::create_dir_all(&dir)?;
        for config in &configs {
            save_scenario(config, dir.join(format!("{}.toml", config.name)))?;
        }
        println!("wrote {} scenarios under {}", configs.len(), dir.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Run { file, overrides, output } => {
            let config = apply_overrides(load_scenario(file)?, &overrides);
            execute(vec![config], &output)
        }
        Command::Suite { directory, overrides, output } => {
            let configs = scenario_files(&directory)?
                .into_iter()
                .map(|path| Ok(apply_overrides(load_scenario(path)?, &overrides)))
                .collect::<Result<Vec<_>, ScenarioError>>()?;
            execute(configs, &output)
        }
        Command::GenSuite { directory } => gen_suite(&directory),
        Command::Aggregate { directory } => {
            print!("{}", summarize_metrics(&load_metrics(directory)?));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
