use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use optochain::sweep::{export_dataset, run_scenario, Format, Preset, RunOptions, ScenarioConfig, ScenarioKind};
use optochain::Error;

#[derive(Parser)]
#[command(name = "optochain", version, about = "Cavity cooling of ion chains: scenario sweeps and dataset export")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Equilibrium branch and mode spectrum along the pump strength.
    Equilibrium,
    /// Mean occupation map over cavity detuning and pump strength.
    Map,
    /// Per-mode cooling along the pump branch and the resonance points.
    Resonance,
    /// Occupations and rates against chain length.
    Scaling,
    /// Kink cooling, entanglement and output spectra along the detuning.
    Kink,
    /// Parse and check a configuration without running it.
    ValidateConfig,
}

#[derive(Args)]
struct Common {
    /// TOML scenario file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Table format (overrides the config).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Bundled parameter set used as the base configuration.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

fn kind_of(command: Command) -> Option<ScenarioKind> {
    match command {
        Command::Equilibrium => Some(ScenarioKind::EquilibriumBranch),
        Command::Map => Some(ScenarioKind::CoolingMap),
        Command::Resonance => Some(ScenarioKind::ResonanceAnalysis),
        Command::Scaling => Some(ScenarioKind::ScalingStudy),
        Command::Kink => Some(ScenarioKind::KinkSpectroscopy),
        Command::ValidateConfig => None,
    }
}

fn load(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let default_preset = match cli.command {
        Command::Kink => Preset::Sec4,
        _ => Preset::Sec3c,
    };
    let preset = cli.common.preset.unwrap_or(default_preset);
    let mut cfg = match &cli.common.config {
        Some(path) => ScenarioConfig::from_file(path, Some(preset))?,
        None => ScenarioConfig::from_preset(preset)?,
    };
    if let Some(out) = &cli.common.out {
        cfg.output.dir = out.clone();
    }
    if let Some(f) = cli.common.format {
        cfg.output.format = f;
    }
    Ok(cfg)
}

fn report_config(e: &Error) {
    match e {
        Error::Config(msg) => eprintln!("config error: {msg}"),
        other => eprintln!("config error: {other}"),
    }
}

fn unix_seconds() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            report_config(&e);
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let Some(kind) = kind_of(cli.command) else {
        let kinds = [
            ScenarioKind::EquilibriumBranch,
            ScenarioKind::CoolingMap,
            ScenarioKind::ResonanceAnalysis,
            ScenarioKind::ScalingStudy,
            ScenarioKind::KinkSpectroscopy,
        ];
        let runnable: Vec<&str> = kinds.iter().filter(|k| cfg.validate_for(**k).is_ok()).map(|k| k.name()).collect();
        if let Some(s) = cfg.scenario {
            if let Err(e) = cfg.validate_for(s) {
                report_config(&e);
                return ExitCode::from(EXIT_CONFIG);
            }
        }
        if let Err(e) = optochain::model::nondimensionalize(&cfg.physical) {
            report_config(&e);
            return ExitCode::from(EXIT_CONFIG);
        }
        println!("config ok; runnable scenarios: {}", runnable.join(", "));
        return ExitCode::SUCCESS;
    };
    if let Err(e) = cfg.validate_for(kind).and_then(|_| cfg.check_output_dir()) {
        report_config(&e);
        return ExitCode::from(EXIT_CONFIG);
    }
    let started = unix_seconds();
    let clock = Instant::now();
    let run = RunOptions { workers: cli.common.workers, cache_root: Some(cfg.output.dir.join(".cache")) };
    let ds = match run_scenario(&cfg, kind, &run) {
        Ok(ds) => ds,
        Err(e @ Error::Config(_)) => {
            report_config(&e);
            return ExitCode::from(EXIT_CONFIG);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let files = match export_dataset(&ds, &cfg.output.dir, cfg.output.format) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let log = serde_json::json!({
        "scenario": ds.scenario,
        "config_hash": ds.config_hash,
        "started_unix": started,
        "finished_unix": unix_seconds(),
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "workers": cli.common.workers,
        "files": files,
    });
    let log_path = cfg.output.dir.join(format!("{}.runlog.json", ds.scenario));
    if let Err(e) = std::fs::write(&log_path, serde_json::to_string_pretty(&log).unwrap_or_default()) {
        eprintln!("warning: could not write {}: {e}", log_path.display());
    }
    for f in &files {
        println!("{}", f.display());
    }
    let counts: Vec<String> = ds.status_counts().iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("points: {}", counts.join(" "));
    if ds.all_ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    }
}
