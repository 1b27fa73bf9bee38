use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dalkit::pipeline::{
    run_analyze, run_evaluate, run_features, run_train_mlp, run_train_tree, PipelineConfig, Target,
};
use dalkit::Error;

#[derive(Parser)]
#[command(name = "dalkit", version, about = "Daily audio log analysis: environment, speakers, mood")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file; unknown keys are rejected.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Clip directory (analyze, features) or manifest CSV (train-*, evaluate).
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "models")]
    models: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Tree,
    Mlp,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze every WAV in a directory.
    Analyze(Common),
    /// Train the environment tree from a manifest.
    TrainTree(Common),
    /// Train the mood network from a manifest.
    TrainMlp(Common),
    /// Evaluate a stored model on a manifest's test rows.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        target: TargetArg,
    },
    /// Dump per-clip features without classifying.
    Features(Common),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoInputs(_) => 2,
        Error::Config(_) => 3,
        Error::ModelMissing(_) | Error::Model(_) => 4,
        _ => 1,
    }
}

fn config(c: &Common) -> dalkit::Result<PipelineConfig> {
    let mut cfg = match &c.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = c.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn run(cli: Cli) -> dalkit::Result<()> {
    match cli.command {
        Command::Analyze(c) => {
            let cfg = config(&c)?;
            let (_, summary) = run_analyze::<f64>(&c.input, &c.models, &c.out, &cfg, c.jobs)?;
            println!("{} clips, {} with mood, {} with warnings", summary.clips, summary.analyzed, summary.with_warnings);
            if summary.analyzed == 0 {
                return Err(Error::NoSpeechDetected);
            }
        }
        Command::TrainTree(c) => {
            let report = run_train_tree::<f64>(&c.input, &c.models, &c.out, &config(&c)?, c.jobs)?;
            print_report(&report);
        }
        Command::TrainMlp(c) => {
            let report = run_train_mlp::<f64>(&c.input, &c.models, &c.out, &config(&c)?, c.jobs)?;
            print_report(&report);
        }
        Command::Evaluate { common: c, target } => {
            let target = match target {
                TargetArg::Tree => Target::Tree,
                TargetArg::Mlp => Target::Mlp,
            };
            let m = run_evaluate::<f64>(target, &c.input, &c.models, &c.out, &config(&c)?, c.jobs)?;
            print!("{}", m.table());
        }
        Command::Features(c) => {
            let n = run_features::<f64>(&c.input, &c.out, &config(&c)?, c.jobs)?;
            println!("{n} clips written");
        }
    }
    Ok(())
}

fn print_report(r: &dalkit::pipeline::TrainReport) {
    println!("model written to {}", r.model_path.display());
    println!("train ({} clips)\n{}", r.n_train, r.train.table());
    if let Some(t) = &r.test {
        println!("test ({} clips)\n{}", r.n_test, t.table());
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
