//! Command implementations behind the `subdelay` binary.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimator::{Criterion, EstimatorConfig, Sample};
use crate::io;
use crate::sim::Preset;
use crate::stream::{relocks, run_stream, score, ChannelScore, Relock, TrajectoryRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const DEFAULT_TRANSIENT: usize = 50;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Range(_) => EXIT_USAGE,
        Error::Parse { .. } | Error::Io(_) | Error::Dimension { .. } | Error::NonFinite(_) | Error::InsufficientData { .. } => {
            EXIT_DATA
        }
        Error::Excitation { .. }
        | Error::Breakdown(_)
        | Error::SingularInput { .. }
        | Error::Unstable(_)
        | Error::NonMaximalTaps { .. } => EXIT_NUMERICAL,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    let f = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(BufReader::new(f))
}

pub fn read_samples_file(path: &Path) -> Result<(usize, usize, Vec<Sample>)> {
    io::read_samples(open(path)?)
}

pub fn read_truth_file(path: &Path) -> Result<Vec<Vec<usize>>> {
    io::read_truth(open(path)?)
}

#[derive(Debug, Clone)]
pub struct SimulateOptions {
    pub preset: String,
    pub seed: u64,
    pub noise_std: Option<f64>,
    pub out: PathBuf,
}

/// Paths written by [`simulate`].
#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub data: PathBuf,
    pub truth: PathBuf,
    pub rows: usize,
}

pub fn simulate(opts: &SimulateOptions) -> Result<SimulateOutput> {
    let mut preset = Preset::by_name(&opts.preset)?;
    if let Some(std) = opts.noise_std {
        if !(std >= 0.0 && std.is_finite()) {
            return Err(Error::Config(format!("noise standard deviation must be finite and nonnegative, got {std}")));
        }
        preset = preset.with_noise(std);
    }
    let data = preset.generate(opts.seed)?;
    let truth_path = io::sibling_path(&opts.out, "truth.csv");
    let mut w = create(&opts.out)?;
    io::write_samples(&mut w, &data.samples)?;
    w.flush()?;
    let mut w = create(&truth_path)?;
    io::write_truth(&mut w, &data.truth, data.l, data.m)?;
    w.flush()?;
    Ok(SimulateOutput { data: opts.out.clone(), truth: truth_path, rows: data.samples.len() })
}

#[derive(Debug, Clone)]
pub struct EstimateOptions {
    pub input: PathBuf,
    pub out: PathBuf,
    /// `m` and `l` are replaced by the CSV header's dimensions.
    pub config: EstimatorConfig,
    /// Dimensions `(m, l)` the input must have, if constrained.
    pub expect_m: Option<usize>,
    pub expect_l: Option<usize>,
    /// Bootstrap length; `None` uses the minimum.
    pub bootstrap: Option<usize>,
    pub criterion: Criterion,
    pub snapshot_every: Option<usize>,
    pub truth: Option<PathBuf>,
    pub transient: usize,
}

/// Everything [`estimate`] computed.
#[derive(Debug, Clone)]
pub struct EstimateOutcome {
    pub trajectory: PathBuf,
    pub report_path: PathBuf,
    pub snapshots: Option<PathBuf>,
    pub rows: Vec<TrajectoryRow>,
    pub scores: Option<Vec<ChannelScore>>,
    pub relocks: Vec<Relock>,
    pub report: String,
}

pub fn estimate(opts: &EstimateOptions) -> Result<EstimateOutcome> {
    let (m, l, samples) = read_samples_file(&opts.input)?;
    if let Some(want) = opts.expect_m.filter(|&w| w != m) {
        return Err(Error::Dimension { what: "input columns", expected: want, got: m });
    }
    if let Some(want) = opts.expect_l.filter(|&w| w != l) {
        return Err(Error::Dimension { what: "output columns", expected: want, got: l });
    }
    let truth = opts.truth.as_deref().map(read_truth_file).transpose()?;
    if let Some(t) = &truth {
        if let Some(bad) = t.iter().find(|row| row.len() != l * m) {
            return Err(Error::Dimension { what: "truth columns", expected: l * m, got: bad.len() });
        }
    }
    let config = EstimatorConfig { m, l, ..opts.config.clone() };
    estimate_samples(opts, &config, &samples, truth.as_deref())
}

fn estimate_samples(
    opts: &EstimateOptions,
    config: &EstimatorConfig,
    samples: &[Sample],
    truth: Option<&[Vec<usize>]>,
) -> Result<EstimateOutcome> {
    config.validate()?;
    if opts.snapshot_every == Some(0) {
        return Err(Error::Config("snapshot-every must be positive".into()));
    }
    let bootstrap = opts.bootstrap.unwrap_or_else(|| config.bootstrap_len());
    if bootstrap < config.bootstrap_len() {
        return Err(Error::Config(format!(
            "bootstrap length {bootstrap} is below j + i + h - 1 = {}",
            config.bootstrap_len()
        )));
    }
    if samples.len() < bootstrap {
        return Err(Error::InsufficientData { needed: bootstrap, got: samples.len() });
    }

    let snapshot_path = opts.snapshot_every.map(|_| io::sibling_path(&opts.out, "markov.txt"));
    let mut snap_writer = snapshot_path.as_deref().map(create).transpose()?;
    let mut snap_err: Option<Error> = None;
    let mut count = 0usize;
    let rows = run_stream(samples, config, bootstrap, opts.criterion, |k, est| {
        if let (Some(w), Some(every)) = (snap_writer.as_mut(), opts.snapshot_every) {
            if count.is_multiple_of(every) && snap_err.is_none() {
                snap_err = io::write_snapshot(w, k, est).err();
            }
        }
        count += 1;
    })?;
    if let Some(e) = snap_err {
        return Err(e);
    }
    if let Some(mut w) = snap_writer {
        w.flush()?;
    }

    let mut w = create(&opts.out)?;
    io::write_trajectory_header(&mut w, config.l, config.m)?;
    for row in &rows {
        io::write_trajectory_row(&mut w, row)?;
    }
    w.flush()?;

    let scores = truth.map(|t| score(&rows, t, opts.transient));
    let relock = truth.map(|t| relocks(&rows, t)).unwrap_or_default();
    let report = render_report(&ReportInput {
        source: &opts.input,
        samples: samples.len(),
        bootstrap,
        config,
        criterion: opts.criterion,
        rows: &rows,
        scores: scores.as_deref(),
        relocks: &relock,
        transient: opts.transient,
    });
    let report_path = io::sibling_path(&opts.out, "report.txt");
    let mut w = create(&report_path)?;
    w.write_all(report.as_bytes())?;
    w.flush()?;

    Ok(EstimateOutcome {
        trajectory: opts.out.clone(),
        report_path,
        snapshots: snapshot_path,
        rows,
        scores,
        relocks: relock,
        report,
    })
}

struct ReportInput<'a> {
    source: &'a Path,
    samples: usize,
    bootstrap: usize,
    config: &'a EstimatorConfig,
    criterion: Criterion,
    rows: &'a [TrajectoryRow],
    scores: Option<&'a [ChannelScore]>,
    relocks: &'a [Relock],
    transient: usize,
}

fn render_report(r: &ReportInput) -> String {
    let c = r.config;
    let mut s = String::new();
    let _ = writeln!(s, "source: {}", r.source.display());
    let _ = writeln!(s, "samples: {} (bootstrap {}, updates {})", r.samples, r.bootstrap, r.samples - r.bootstrap);
    let _ = writeln!(
        s,
        "settings: m={} l={} j={} i={} h={} gamma={} dmax={}",
        c.m, c.l, c.j, c.i, c.h, c.gamma, c.d_max
    );
    let _ = match r.criterion {
        Criterion::Ratio { epsilon } => writeln!(s, "criterion: ratio (epsilon {epsilon})"),
        Criterion::Threshold { threshold } => writeln!(s, "criterion: threshold ({threshold})"),
    };
    let _ = writeln!(s);

    let n_ch = c.l * c.m;
    for idx in 0..n_ch {
        let (out, inp) = (idx / c.m + 1, idx % c.m + 1);
        let mut hist = std::collections::BTreeMap::<usize, usize>::new();
        let mut invalid = 0usize;
        for row in r.rows {
            *hist.entry(row.delays.delays[idx]).or_default() += 1;
            invalid += usize::from(!row.delays.valid[idx]);
        }
        let cells: Vec<String> = hist.iter().map(|(d, n)| format!("{d}:{n}")).collect();
        let _ = writeln!(s, "channel ({out},{inp}) histogram  {}", cells.join(" "));
        if invalid > 0 {
            let _ = writeln!(s, "channel ({out},{inp}) invalid estimates: {invalid}");
        }
        if let Some(sc) = r.scores.and_then(|v| v.get(idx)) {
            let _ = writeln!(
                s,
                "channel ({out},{inp}) match rate {:.1}% over {} samples (transient {} excluded)",
                100.0 * sc.match_rate(),
                sc.scored,
                r.transient
            );
        }
    }
    if r.scores.is_some() {
        let _ = writeln!(s);
        let _ = writeln!(s, "delay changes: {}", r.relocks.len());
        for ev in r.relocks {
            let _ = match ev.latency {
                Some(lat) => writeln!(
                    s,
                    "  k={} channel ({},{}) -> {}: re-locked after {} samples, held {:.1}%",
                    ev.change_at,
                    ev.out + 1,
                    ev.inp + 1,
                    ev.true_delay,
                    lat,
                    100.0 * ev.hold
                ),
                None => writeln!(
                    s,
                    "  k={} channel ({},{}) -> {}: not re-locked",
                    ev.change_at,
                    ev.out + 1,
                    ev.inp + 1,
                    ev.true_delay
                ),
            };
        }
    }
    s
}

#[derive(Debug, Clone)]
pub struct DemoOptions {
    pub name: String,
    pub seed: u64,
    pub noise_std: Option<f64>,
    pub dir: PathBuf,
    pub transient: usize,
}

/// Simulates a preset, estimates with its settings and writes every artifact
/// into `dir`.
pub fn demo(opts: &DemoOptions) -> Result<EstimateOutcome> {
    let preset = Preset::by_name(&opts.name)?;
    let data = opts.dir.join("data.csv");
    let sim = simulate(&SimulateOptions {
        preset: opts.name.clone(),
        seed: opts.seed,
        noise_std: opts.noise_std,
        out: data.clone(),
    })?;
    let outcome = estimate(&EstimateOptions {
        input: data,
        out: opts.dir.join("trajectory.csv"),
        config: preset.config.clone(),
        expect_m: None,
        expect_l: None,
        bootstrap: None,
        criterion: Criterion::Ratio { epsilon: preset.config.epsilon },
        snapshot_every: None,
        truth: Some(sim.truth),
        transient: opts.transient,
    })?;
    write_plot_data(&opts.dir.join("plot.dat"), &outcome.rows, preset.config.l, preset.config.m)?;
    Ok(outcome)
}

/// Gnuplot-style blocks, one per channel, each with columns `k estimate`.
fn write_plot_data(path: &Path, rows: &[TrajectoryRow], l: usize, m: usize) -> Result<()> {
    let mut w = create(path)?;
    for idx in 0..l * m {
        if idx > 0 {
            writeln!(w)?;
            writeln!(w)?;
        }
        writeln!(w, "# channel ({},{}): k estimate", idx / m + 1, idx % m + 1)?;
        for row in rows {
            writeln!(w, "{} {}", row.k, row.delays.delays[idx])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Parse { line: 3, msg: "x".into() }), EXIT_DATA);
        assert_eq!(exit_code(&Error::InsufficientData { needed: 115, got: 10 }), EXIT_DATA);
        assert_eq!(exit_code(&Error::Excitation { order: 8 }), EXIT_NUMERICAL);
        assert_eq!(exit_code(&Error::Breakdown("x".into())), EXIT_NUMERICAL);
    }

    #[test]
    fn unknown_preset_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = simulate(&SimulateOptions {
            preset: "example9".into(),
            seed: 1,
            noise_std: None,
            out: dir.path().join("x.csv"),
        })
        .unwrap_err();
        assert_eq!(exit_code(&err), EXIT_USAGE);
    }

    #[test]
    fn short_input_is_insufficient_data() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("short.csv");
        let samples: Vec<Sample> = (0..10).map(|k| Sample::new(vec![k as f64, 1.0], vec![0.0, 0.0])).collect();
        io::write_samples(create(&input).unwrap(), &samples).unwrap();
        let config = EstimatorConfig::default();
        let err = estimate(&EstimateOptions {
            input,
            out: dir.path().join("t.csv"),
            config,
            expect_m: None,
            expect_l: None,
            bootstrap: Some(115),
            criterion: Criterion::Ratio { epsilon: 1e-5 },
            snapshot_every: None,
            truth: None,
            transient: DEFAULT_TRANSIENT,
        })
        .unwrap_err();
        assert_eq!(err, Error::InsufficientData { needed: 115, got: 10 });
    }
}
