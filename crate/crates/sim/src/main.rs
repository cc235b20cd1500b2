use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fvk_sim::{load_config, run_experiment, ExperimentKind, RunOptions};

/// Runs plate experiments from a key-value configuration file.
#[derive(Parser)]
#[command(name = "fvk-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named by the `experiment` key of the file.
    Run(Common),
    /// θ continuation on the flat disc (sphere to cylinder transition).
    FlatDiscSweep(Common),
    /// α continuation from 1 to −1 with a pinned center.
    CurvatureInversion(Common),
    /// Indented cylindrical plate with and without a crease.
    Cardboard(Common),
    /// Bilayer with a curved crease against a straight one.
    BilayerFold(Common),
    /// A single flow run.
    SingleRun(Common),
    /// Parse and validate a configuration and print its canonical form.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file.
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(short = 'j', long, default_value_t = 1)]
    threads: usize,
    /// Request bitwise-reproducible results (recorded in the manifest).
    #[arg(long)]
    deterministic: bool,
    /// Override a configuration key, e.g. `--set mesh.h=0.05`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common, check) = match cli.command {
        Command::Run(c) => (None, c, false),
        Command::FlatDiscSweep(c) => (Some(ExperimentKind::FlatDiscSweep), c, false),
        Command::CurvatureInversion(c) => (Some(ExperimentKind::CurvatureInversion), c, false),
        Command::Cardboard(c) => (Some(ExperimentKind::Cardboard), c, false),
        Command::BilayerFold(c) => (Some(ExperimentKind::BilayerFold), c, false),
        Command::SingleRun(c) => (Some(ExperimentKind::SingleRun), c, false),
        Command::Check(c) => (None, c, true),
    };
    let mut cfg = match load_config(&common.config, kind, &common.overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", common.config.display());
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if check {
        print!("{}", cfg.canonical());
        return ExitCode::SUCCESS;
    }
    if let Some(out) = common.out {
        cfg.output.dir = out;
    }
    let opts = RunOptions {
        threads: common.threads.max(1),
        deterministic: common.deterministic,
    };
    match run_experiment(&cfg, &opts) {
        Ok(manifest) => {
            println!("{}", serde_json::to_string_pretty(&manifest.summary).unwrap_or_default());
            println!("wrote {} files to {}", manifest.outputs.len() + 1, cfg.output.dir.display());
            if manifest.solver_aborted() {
                for a in &manifest.aborts {
                    eprintln!("solver abort in {} at iteration {}: {}", a.run, a.iteration, a.message);
                }
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
