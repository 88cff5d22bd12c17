use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use comfort_forge::pipeline::{self, parse_fixed_flag, parse_grid_flag, CommandOutput, Overrides, PipelineConfig};
use comfort_forge::{Error, FeatureSet};

#[derive(Parser)]
#[command(name = "comfort-forge", version, about = "Thermal-comfort survey pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `five` (with age) or `four` (without).
    #[arg(long, global = true, value_parser = parse_feature_set)]
    feature_set: Option<FeatureSet>,
    /// Train on unfiltered entries.
    #[arg(long, global = true)]
    no_filter: bool,
    #[arg(long, global = true)]
    augment_ratio: Option<f64>,
    /// "tmin,tmax,tstep,rhmin,rhmax,rhstep"
    #[arg(long, global = true)]
    grid: Option<String>,
    /// "clo=..,met=..,age=.."
    #[arg(long, global = true)]
    fixed: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Load the configured datasets into the unified schema.
    Ingest,
    /// Drop entries with inconsistent votes.
    Filter,
    /// Add synthetic rows to the warmer and cooler classes.
    Augment,
    /// Fit the configured classifiers.
    Train,
    /// Score the trained classifiers.
    Evaluate,
    /// Psychrometric map of the chart classifier over the validation grid.
    Chart,
    /// One chart per value of the sweep parameter.
    Sweep,
    /// Summary tables from stored artifacts.
    Report {
        /// Further run directories whose evaluations become extra columns.
        #[arg(long = "include")]
        include: Vec<PathBuf>,
    },
    /// Every command in order.
    Run,
}

fn parse_feature_set(raw: &str) -> Result<FeatureSet, String> {
    FeatureSet::parse(raw).ok_or_else(|| format!("expected `five` or `four`, got `{raw}`"))
}

fn load_config(common: &Common) -> Result<PipelineConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::from_path(path)?,
        None => PipelineConfig::default(),
    };
    let overrides = Overrides {
        seed: common.seed,
        feature_set: common.feature_set,
        no_filter: common.no_filter,
        augment_ratio: common.augment_ratio,
        grid: common.grid.as_deref().map(parse_grid_flag).transpose()?,
        fixed: common.fixed.as_deref().map(parse_fixed_flag).transpose()?,
        out: common.out.clone(),
    };
    cfg.apply(&overrides)?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<Vec<CommandOutput>, Error> {
    let cfg = load_config(&cli.common)?;
    let one = |r: Result<CommandOutput, Error>| r.map(|o| vec![o]);
    match &cli.command {
        Cmd::Ingest => one(pipeline::cmd_ingest(&cfg)),
        Cmd::Filter => one(pipeline::cmd_filter(&cfg)),
        Cmd::Augment => one(pipeline::cmd_augment(&cfg)),
        Cmd::Train => one(pipeline::cmd_train(&cfg)),
        Cmd::Evaluate => one(pipeline::cmd_evaluate(&cfg)),
        Cmd::Chart => one(pipeline::cmd_chart(&cfg)),
        Cmd::Sweep => one(pipeline::cmd_sweep(&cfg)),
        Cmd::Report { include } => one(pipeline::cmd_report(&cfg, include)),
        Cmd::Run => pipeline::cmd_run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(outputs) => {
            for o in outputs {
                println!("{}", serde_json::to_string(&o).expect("serializable"));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::FAILURE
        }
    }
}
