//! Bootstrap-then-update driver and trajectory scoring.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::estimator::{estimate_delays, Criterion, DelayMatrix, EstimatorConfig, EstimatorState, MarkovEstimate, Sample};

/// Delay estimates at one absolute sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub k: usize,
    pub delays: DelayMatrix,
}

/// Bootstraps on the first `bootstrap` samples (at least `config.bootstrap_len()`),
/// then streams the rest through the recursive update. Emits one row for the
/// bootstrap sample and one per update; `observe` sees every Markov estimate.
pub fn run_stream<F>(
    samples: &[Sample],
    config: &EstimatorConfig,
    bootstrap: usize,
    criterion: Criterion,
    mut observe: F,
) -> Result<Vec<TrajectoryRow>>
where
    F: FnMut(usize, &MarkovEstimate),
{
    if samples.len() < bootstrap {
        return Err(Error::InsufficientData { needed: bootstrap, got: samples.len() });
    }
    let mut state = EstimatorState::bootstrap(&samples[..bootstrap], config)?;
    let mut rows = Vec::with_capacity(samples.len() - bootstrap + 1);
    let mut emit = |state: &EstimatorState, rows: &mut Vec<TrajectoryRow>| -> Result<()> {
        let est = state.markov_estimate()?;
        observe(state.time(), &est);
        rows.push(TrajectoryRow {
            k: state.time(),
            delays: estimate_delays(&est, criterion, config.d_max),
        });
        Ok(())
    };
    emit(&state, &mut rows)?;
    for s in &samples[bootstrap..] {
        state.update(&s.u, &s.y)?;
        emit(&state, &mut rows)?;
    }
    Ok(rows)
}

/// Samples at which any entry of the true delay matrix changes.
pub fn truth_changes(truth: &[Vec<usize>]) -> Vec<usize> {
    (1..truth.len()).filter(|&k| truth[k] != truth[k - 1]).collect()
}

/// Per-channel agreement statistics of a trajectory against ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScore {
    pub out: usize,
    pub inp: usize,
    pub scored: usize,
    pub matched: usize,
    pub histogram: BTreeMap<usize, usize>,
}

impl ChannelScore {
    pub fn match_rate(&self) -> f64 {
        if self.scored == 0 {
            0.0
        } else {
            self.matched as f64 / self.scored as f64
        }
    }
}

/// Scores each channel over samples that are not within `transient` samples
/// after a truth change. Invalid estimates count as misses.
pub fn score(rows: &[TrajectoryRow], truth: &[Vec<usize>], transient: usize) -> Vec<ChannelScore> {
    let Some(first) = rows.first() else { return Vec::new() };
    let (l, m) = (first.delays.l, first.delays.m);
    let changes = truth_changes(truth);
    let in_transient = |k: usize| changes.iter().any(|&c| k >= c && k < c + transient);
    let mut scores: Vec<ChannelScore> = (0..l * m)
        .map(|idx| ChannelScore { out: idx / m, inp: idx % m, scored: 0, matched: 0, histogram: BTreeMap::new() })
        .collect();
    for row in rows {
        for (idx, sc) in scores.iter_mut().enumerate() {
            *sc.histogram.entry(row.delays.delays[idx]).or_default() += 1;
            let Some(t) = truth.get(row.k) else { continue };
            if in_transient(row.k) {
                continue;
            }
            sc.scored += 1;
            if row.delays.valid[idx] && row.delays.delays[idx] == t[idx] {
                sc.matched += 1;
            }
        }
    }
    scores
}

/// How a channel's estimate behaved after one truth change.
#[derive(Debug, Clone, PartialEq)]
pub struct Relock {
    pub change_at: usize,
    pub out: usize,
    pub inp: usize,
    pub true_delay: usize,
    /// Samples from the change to the first matching estimate, if any before
    /// the next change.
    pub latency: Option<usize>,
    /// Fraction of samples from the first match up to the next change that
    /// match.
    pub hold: f64,
}

/// Relock behaviour of every channel whose true delay changes.
pub fn relocks(rows: &[TrajectoryRow], truth: &[Vec<usize>]) -> Vec<Relock> {
    let changes = truth_changes(truth);
    let Some(first) = rows.first() else { return Vec::new() };
    let n_ch = first.delays.delays.len();
    let by_k: BTreeMap<usize, &TrajectoryRow> = rows.iter().map(|r| (r.k, r)).collect();
    let end = truth.len();
    let mut out = Vec::new();
    for (ci, &c) in changes.iter().enumerate() {
        let next = changes.get(ci + 1).copied().unwrap_or(end);
        for idx in 0..n_ch {
            if truth[c][idx] == truth[c - 1][idx] {
                continue;
            }
            let want = truth[c][idx];
            let hit = |k: usize| by_k.get(&k).is_some_and(|r| r.delays.valid[idx] && r.delays.delays[idx] == want);
            let lock = (c..next).find(|&k| hit(k));
            let hold = match lock {
                Some(s) => (s..next).filter(|&k| hit(k)).count() as f64 / (next - s) as f64,
                None => 0.0,
            };
            out.push(Relock {
                change_at: c,
                out: idx / first.delays.m,
                inp: idx % first.delays.m,
                true_delay: want,
                latency: lock.map(|s| s - c),
                hold,
            });
        }
    }
    out
}
