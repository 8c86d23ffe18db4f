use std::collections::VecDeque;

/// One input/output observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub u: Vec<f64>,
    pub y: Vec<f64>,
}

impl Sample {
    pub fn new(u: Vec<f64>, y: Vec<f64>) -> Self {
        Self { u, y }
    }
}

/// Bounded chronological buffer of the most recent samples.
///
/// `newest` is the absolute time index of the last pushed sample.
#[derive(Debug, Clone)]
pub struct DataWindow {
    capacity: usize,
    samples: VecDeque<Sample>,
    newest: Option<usize>,
}

impl DataWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            samples: VecDeque::with_capacity(capacity),
            newest: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn newest_index(&self) -> Option<usize> {
        self.newest
    }

    /// Appends a sample at absolute time `k`, evicting the oldest when full.
    pub fn push(&mut self, k: usize, sample: Sample) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
        }
        self.samples.push_back(sample);
        self.newest = Some(k);
    }

    /// Samples oldest first.
    pub fn iter(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter()
    }

    pub fn get(&self, idx: usize) -> Option<&Sample> {
        self.samples.get(idx)
    }
}
