use crate::error::{Error, Result};

/// Piecewise-constant function of the sample index.
///
/// Stored as `(first_sample, value)` pieces sorted by `first_sample`; the
/// first piece always starts at 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSchedule {
    pieces: Vec<(usize, usize)>,
}

impl StepSchedule {
    pub fn constant(value: usize) -> Self {
        Self { pieces: vec![(0, value)] }
    }

    pub fn new(mut pieces: Vec<(usize, usize)>) -> Result<Self> {
        pieces.sort_by_key(|p| p.0);
        match pieces.first() {
            Some((0, _)) => {}
            _ => return Err(Error::Config("schedule must define sample 0".into())),
        }
        if pieces.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Config("schedule has two pieces starting at the same sample".into()));
        }
        Ok(Self { pieces })
    }

    /// Builds a schedule from `(last_sample_inclusive, value)` segments, the
    /// way delay profiles are usually written ("6 for k <= 500, then 2").
    /// The final segment extends forever.
    pub fn from_segments(segments: &[(usize, usize)]) -> Result<Self> {
        let mut pieces = Vec::with_capacity(segments.len());
        let mut start = 0;
        for &(last, value) in segments {
            pieces.push((start, value));
            start = last.saturating_add(1);
        }
        Self::new(pieces)
    }

    /// Switches every `period` samples through `sequence`, holding the last
    /// entry afterwards.
    pub fn periodic(period: usize, sequence: &[usize]) -> Result<Self> {
        if period == 0 {
            return Err(Error::Config("switching period must be positive".into()));
        }
        Self::new(sequence.iter().enumerate().map(|(n, &v)| (n * period, v)).collect())
    }

    pub fn at(&self, k: usize) -> usize {
        let idx = self.pieces.partition_point(|p| p.0 <= k);
        self.pieces[idx - 1].1
    }

    pub fn max_value(&self) -> usize {
        self.pieces.iter().map(|p| p.1).max().unwrap_or(0)
    }

    /// Samples at which the value changes.
    pub fn change_points(&self) -> Vec<usize> {
        self.pieces
            .windows(2)
            .filter(|w| w[0].1 != w[1].1)
            .map(|w| w[1].0)
            .collect()
    }

    pub fn pieces(&self) -> &[(usize, usize)] {
        &self.pieces
    }
}
