use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rwl_cli::config::{parse_config_for, StudyKind};
use rwl_cli::run_experiment;
use rwl_core::selftest;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "rwl", version, about = "Rotating compressible flow, its acoustic-Rossby waves and the quasi-geostrophic limit")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `[run] out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random initial data, overriding `[data] seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve wave data with the exact propagator.
    Propagate(RunArgs),
    /// Measure the dispersive decay of a band-limited pulse.
    DecayStudy(RunArgs),
    /// Split initial data into its stationary and wave parts.
    Project(RunArgs),
    /// Integrate the quasi-geostrophic limit equation.
    QgRun(RunArgs),
    /// Integrate the scaled compressible Navier-Stokes system.
    NsRun(RunArgs),
    /// Sweep eps and compare fluid runs with the limit solution.
    LimitStudy(RunArgs),
    /// Run the acceptance checks.
    Selftest {
        /// Only these criteria (comma separated).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// Also write `selftest.csv` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_study(kind: StudyKind, args: RunArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut cfg = match parse_config_for(&text, Some(kind)) {
        Ok(c) => c,
        Err(errors) => {
            eprint!("{}: {errors}", args.config.display());
            return Ok(ExitCode::from(2));
        }
    };
    let mut overrides = String::new();
    if let Some(seed) = args.seed {
        cfg.data.seed = seed;
        overrides.push_str(&format!("seed = {seed}\n"));
    }
    let out = match args.out.or_else(|| cfg.run.out.clone()) {
        Some(o) => o,
        None => bail!("no output directory: pass --out or set [run] out"),
    };
    let outcome = run_experiment(&cfg, &text, &overrides, &out)?;
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    println!("artifacts in {}", out.display());
    Ok(if outcome.passed() { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn run_selftest(only: Vec<u32>, out: Option<PathBuf>) -> Result<ExitCode> {
    let ids: Vec<u32> = if only.is_empty() {
        selftest::CRITERIA.iter().map(|(id, _)| *id).collect()
    } else {
        only
    };
    let mut results = Vec::new();
    for id in ids {
        let r = selftest::run(id);
        println!("{}", r.line());
        results.push(r);
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        let mut csv = String::from("criterion,pass,seconds\n");
        for r in &results {
            csv.push_str(&format!("{},{},{}\n", r.id, u8::from(r.pass), rwl_core::io::format_g17(r.seconds)));
        }
        std::fs::write(dir.join("selftest.csv"), csv)?;
    }
    Ok(if results.iter().all(|r| r.pass) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: could not configure {n} threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Propagate(a) => run_study(StudyKind::Propagate, a),
        Command::DecayStudy(a) => run_study(StudyKind::Decay, a),
        Command::Project(a) => run_study(StudyKind::Project, a),
        Command::QgRun(a) => run_study(StudyKind::QgRun, a),
        Command::NsRun(a) => run_study(StudyKind::NsRun, a),
        Command::LimitStudy(a) => run_study(StudyKind::LimitStudy, a),
        Command::Selftest { only, out } => run_selftest(only, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
