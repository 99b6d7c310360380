use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinbath::echo::Method;
use spinbath_cli::{execute, recipe, recipes, run_recipe, with_threads, CliError, RunConfig, Task};

#[derive(Parser)]
#[command(name = "spinbath", version, about = "Loschmidt echo of a qubit coupled to a spin-chain bath")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Engine: determinant, central_spin, ed or trotter.
    #[arg(long, global = true, value_parser = parse_method)]
    method: Option<Method>,
}

#[derive(Subcommand)]
enum Command {
    /// Echo time series, one CSV per sweep point.
    Echo,
    /// Like `echo`, but a sweep section is required.
    Sweep,
    /// Short-time Gaussian rate per sweep point.
    AlphaScan,
    /// Long-time plateau per sweep point.
    PlateauScan,
    /// Echo minimum against chain size and its logarithmic fit.
    CriticalScaling,
    /// Nearest-neighbor concurrence joined with the short-time rate.
    ConcurrenceScan,
    /// Strong-coupling Gaussian envelope width per sweep point.
    EnvelopeFit,
    /// Stroboscopic gate schedule, as text and JSON.
    Compile,
    /// Convergence of compiled schedules to the exact propagator.
    Verify,
    /// Runs a named bundle; lists the bundles when no name is given.
    Recipe {
        name: Option<String>,
        /// Print the expanded jobs as JSON instead of running them.
        #[arg(long)]
        print: bool,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown method '{s}' (expected determinant, central_spin, ed or trotter)"))
}

fn task_of(command: &Command) -> Option<Task> {
    Some(match command {
        Command::Echo => Task::Echo,
        Command::Sweep => Task::Sweep,
        Command::AlphaScan => Task::AlphaScan,
        Command::PlateauScan => Task::PlateauScan,
        Command::CriticalScaling => Task::CriticalScaling,
        Command::ConcurrenceScan => Task::ConcurrenceScan,
        Command::EnvelopeFit => Task::EnvelopeFit,
        Command::Compile => Task::Compile,
        Command::Verify => Task::Verify,
        Command::Recipe { .. } => return None,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::Recipe { name, print } = &cli.command {
        let Some(name) = name else {
            for r in recipes() {
                println!("{:<16} {}", r.name, r.description);
            }
            return Ok(());
        };
        let mut bundle = recipe(name)?;
        for job in &mut bundle.jobs {
            if let Some(m) = cli.method {
                job.config.method = m;
            }
            if cli.threads.is_some() {
                job.config.threads = cli.threads;
            }
        }
        if *print {
            println!("{}", serde_json::to_string_pretty(&bundle)?);
            return Ok(());
        }
        let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out")).join(bundle.name);
        let manifests = with_threads(cli.threads, || run_recipe(&bundle, &out))??;
        for (job, m) in bundle.jobs.iter().zip(&manifests) {
            println!("{}/{}: {} file(s), {:.2} s", out.display(), job.name, m.artifacts.len(), m.wall_time_s);
        }
        return Ok(());
    }
    let task = task_of(&cli.command).expect("non-recipe command");
    let path = cli.config.as_ref().ok_or_else(|| CliError::config("", "--config <path> is required"))?;
    let mut config = RunConfig::load(path)?;
    if let Some(m) = cli.method {
        config.method = m;
    }
    if let Some(out) = &cli.out {
        config.output = out.clone();
    }
    if cli.threads.is_some() {
        config.threads = cli.threads;
    }
    let out = config.output.clone();
    let manifest = with_threads(config.threads, || execute(task, &config, &out))??;
    println!("{}: {} file(s) in {:.2} s", out.display(), manifest.artifacts.len() + 1, manifest.wall_time_s);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
