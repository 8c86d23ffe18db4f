use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subdelay::app::{self, DemoOptions, EstimateOptions, SimulateOptions, DEFAULT_TRANSIENT, EXIT_USAGE};
use subdelay::io::{parse_config_file, sibling_path};
use subdelay::{Criterion, Error, EstimatorConfig, Result};

#[derive(Parser, Debug)]
#[command(name = "subdelay", version, about = "Estimate time-varying input delays of MIMO systems from CSV data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset and its ground-truth delays from a preset
    Simulate(SimulateArgs),
    /// Bootstrap on the first N rows, then stream the rest and write delay trajectories
    Estimate(EstimateArgs),
    /// Simulate, estimate and score a preset end to end
    Demo(DemoArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "example1")]
    preset: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Override the preset's noise standard deviation
    #[arg(long = "noise-std")]
    noise_std: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CriterionKind {
    Ratio,
    Threshold,
}

impl FromStr for CriterionKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// Sample CSV; repeat to process several files in parallel
    #[arg(long = "in", required = true)]
    input: Vec<PathBuf>,
    /// Trajectory CSV, or a directory when several inputs are given
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file with defaults for any of the numeric flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    j: Option<usize>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    h: Option<usize>,
    /// Bootstrap length (at least j+i+h-1)
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    dmax: Option<usize>,
    #[arg(long, value_enum)]
    criterion: Option<CriterionKind>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Dump the Markov first block column every this many samples
    #[arg(long = "snapshot-every")]
    snapshot_every: Option<usize>,
    /// Ground-truth delay CSV; repeat once per input
    #[arg(long)]
    truth: Vec<PathBuf>,
    /// Samples excluded from scoring after each truth change
    #[arg(long)]
    transient: Option<usize>,
}

#[derive(Args, Debug)]
struct DemoArgs {
    /// example1 or example2
    #[arg(value_parser = ["example1", "example2"])]
    name: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long = "noise-std")]
    noise_std: Option<f64>,
    /// Artifacts directory (default: <name>-artifacts)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TRANSIENT)]
    transient: usize,
}

/// Flag value, else config-file value, else `default`.
fn pick<T: FromStr>(flag: Option<T>, file: &HashMap<String, String>, key: &str, default: T) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw.parse().map_err(|_| Error::Config(format!("config file: bad value '{raw}' for {key}"))),
        None => Ok(default),
    }
}

fn pick_opt<T: FromStr>(flag: Option<T>, file: &HashMap<String, String>, key: &str) -> Result<Option<T>> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.get(key)
        .map(|raw| raw.parse().map_err(|_| Error::Config(format!("config file: bad value '{raw}' for {key}"))))
        .transpose()
}

const CONFIG_KEYS: &[&str] = &[
    "m", "l", "j", "i", "h", "N", "gamma", "epsilon", "dmax", "criterion", "threshold", "snapshot-every", "transient",
];

fn load_config_file(path: Option<&Path>) -> Result<HashMap<String, String>> {
    let Some(path) = path else { return Ok(HashMap::new()) };
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (k, v) in parse_config_file(&text)? {
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!("config file: unknown key '{k}'")));
        }
        map.insert(k, v);
    }
    Ok(map)
}

fn estimate_jobs(args: EstimateArgs) -> Result<Vec<EstimateOptions>> {
    let file = load_config_file(args.config.as_deref())?;
    let d = EstimatorConfig::default();
    let expect_m = pick_opt(args.m, &file, "m")?;
    let expect_l = pick_opt(args.l, &file, "l")?;
    let config = EstimatorConfig {
        m: d.m,
        l: d.l,
        j: pick(args.j, &file, "j", d.j)?,
        i: pick(args.i, &file, "i", d.i)?,
        h: pick(args.h, &file, "h", d.h)?,
        gamma: pick(args.gamma, &file, "gamma", d.gamma)?,
        epsilon: pick(args.epsilon, &file, "epsilon", d.epsilon)?,
        d_max: pick(args.dmax, &file, "dmax", d.d_max)?,
        rank_tol: None,
    };
    let criterion = match pick(args.criterion, &file, "criterion", CriterionKind::Ratio)? {
        CriterionKind::Ratio => Criterion::Ratio { epsilon: config.epsilon },
        CriterionKind::Threshold => Criterion::Threshold { threshold: pick(args.threshold, &file, "threshold", 0.02)? },
    };
    let bootstrap = pick_opt(args.n, &file, "N")?;
    let snapshot_every = pick_opt(args.snapshot_every, &file, "snapshot-every")?;
    let transient = pick(args.transient, &file, "transient", DEFAULT_TRANSIENT)?;

    if !args.truth.is_empty() && args.truth.len() != args.input.len() {
        return Err(Error::Config(format!(
            "{} --truth files given for {} --in files",
            args.truth.len(),
            args.input.len()
        )));
    }
    let many = args.input.len() > 1;
    args.input
        .iter()
        .enumerate()
        .map(|(n, input)| {
            let out = match (&args.out, many) {
                (Some(dir), true) => {
                    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    dir.join(format!("{stem}.traj.csv"))
                }
                (Some(path), false) => path.clone(),
                (None, _) => sibling_path(input, "traj.csv"),
            };
            Ok(EstimateOptions {
                input: input.clone(),
                out,
                config: config.clone(),
                expect_m,
                expect_l,
                bootstrap,
                criterion,
                snapshot_every,
                truth: args.truth.get(n).cloned(),
                transient,
            })
        })
        .collect()
}

fn run_estimate(args: EstimateArgs) -> i32 {
    let jobs = match estimate_jobs(args) {
        Ok(j) => j,
        Err(e) => return fail(&e),
    };
    let results: Vec<Result<app::EstimateOutcome>> = if jobs.len() == 1 {
        vec![app::estimate(&jobs[0])]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = jobs.iter().map(|job| s.spawn(move || app::estimate(job))).collect();
            handles.into_iter().map(|h| h.join().expect("estimation thread panicked")).collect()
        })
    };
    let mut code = app::EXIT_OK;
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok(outcome) => {
                print!("{}", outcome.report);
                println!("wrote {} and {}", outcome.trajectory.display(), outcome.report_path.display());
                if let Some(p) = outcome.snapshots {
                    println!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: {}: {e}", job.input.display());
                code = code.max(app::exit_code(&e));
            }
        }
    }
    code
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    app::exit_code(e)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match cli.command {
        Command::Simulate(a) => {
            let opts = SimulateOptions { preset: a.preset, seed: a.seed, noise_std: a.noise_std, out: a.out };
            match app::simulate(&opts) {
                Ok(out) => {
                    println!("wrote {} rows to {} and {}", out.rows, out.data.display(), out.truth.display());
                    0
                }
                Err(e) => fail(&e),
            }
        }
        Command::Estimate(a) => run_estimate(a),
        Command::Demo(a) => {
            let dir = a.out.unwrap_or_else(|| PathBuf::from(format!("{}-artifacts", a.name)));
            let opts = DemoOptions { name: a.name, seed: a.seed, noise_std: a.noise_std, dir: dir.clone(), transient: a.transient };
            match app::demo(&opts) {
                Ok(outcome) => {
                    print!("{}", outcome.report);
                    println!("artifacts in {}", dir.display());
                    0
                }
                Err(e) => fail(&e),
            }
        }
    };
    ExitCode::from(code as u8)
}
