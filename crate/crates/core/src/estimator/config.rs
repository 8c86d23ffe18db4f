use crate::error::{Error, Result};

/// Horizons and tuning of the recursive delay estimator.
///
/// `i` is the past horizon, `h` the future horizon and `j` the number of
/// Hankel columns used by the bootstrap. Indices of inputs (`m`) and outputs
/// (`l`) are fixed for the lifetime of an estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub m: usize,
    pub l: usize,
    pub j: usize,
    pub i: usize,
    pub h: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub d_max: usize,
    /// Relative singular-value cutoff for the pseudoinverse of
    /// `L4 - L2 P L2ᵀ`. `None` selects `max(rows, cols) * eps`.
    pub rank_tol: Option<f64>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            m: 1,
            l: 1,
            j: 100,
            i: 8,
            h: 8,
            gamma: 0.95,
            epsilon: 1e-5,
            d_max: 6,
            rank_tol: None,
        }
    }
}

impl EstimatorConfig {
    /// Checks hard invariants. A short column horizon (`j < 5 i`) only logs a
    /// warning.
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.l == 0 {
            return Err(Error::Config("need at least one input and one output".into()));
        }
        if self.i == 0 || self.j == 0 {
            return Err(Error::Config("horizons i and j must be positive".into()));
        }
        if self.h < self.d_max + 2 {
            return Err(Error::Config(format!(
                "future horizon h = {} must be at least d_max + 2 = {}",
                self.h,
                self.d_max + 2
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma = {} outside (0, 1]", self.gamma)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon = {} must be positive", self.epsilon)));
        }
        if let Some(tol) = self.rank_tol {
            if !(0.0..1.0).contains(&tol) {
                return Err(Error::Config(format!("rank tolerance {tol} outside [0, 1)")));
            }
        }
        if self.j < 5 * self.i {
            log::warn!(
                "column horizon j = {} is short relative to past horizon i = {}; estimates may be poor",
                self.j,
                self.i
            );
        }
        Ok(())
    }

    /// Minimum number of samples the bootstrap needs.
    pub fn bootstrap_len(&self) -> usize {
        self.j + self.i + self.h - 1
    }

    pub fn future_input_dim(&self) -> usize {
        self.h * self.m
    }

    pub fn future_output_dim(&self) -> usize {
        self.h * self.l
    }

    pub fn past_dim(&self) -> usize {
        self.i * (self.m + self.l)
    }
}
