use crate::error::{Error, Result};
use crate::estimator::Sample;

use super::excitation::white_noise;
use super::schedule::StepSchedule;
use super::transfer::is_stable;

/// One ARX submodel:
/// `y_t = sum_j a_j y_(t-j) + sum_k b_k u_(t-k-delay)` with `j, k` from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct SarxMode {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub delay: usize,
}

impl SarxMode {
    pub fn new(a: Vec<f64>, b: Vec<f64>, delay: usize) -> Result<Self> {
        // characteristic polynomial z^n - a1 z^(n-1) - ... - an
        let den: Vec<f64> = std::iter::once(1.0).chain(a.iter().map(|x| -x)).collect();
        if !is_stable(&den) {
            return Err(Error::Unstable(format!("autoregressive part {a:?} is not stable")));
        }
        Ok(Self { a, b, delay })
    }
}

/// Switched ARX model: the active mode at sample `t` is `schedule.at(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SarxModel {
    pub modes: Vec<SarxMode>,
    pub schedule: StepSchedule,
}

impl SarxModel {
    pub fn new(modes: Vec<SarxMode>, schedule: StepSchedule) -> Result<Self> {
        if let Some(&(k, bad)) = schedule.pieces().iter().find(|p| p.1 >= modes.len()) {
            return Err(Error::Range(format!("mode {bad} scheduled at sample {k}, model has {}", modes.len())));
        }
        Ok(Self { modes, schedule })
    }

    pub fn delay_at(&self, t: usize) -> usize {
        self.modes[self.schedule.at(t)].delay
    }
}

/// Output of [`simulate_sarx`]: samples and the active delay per sample.
#[derive(Debug, Clone)]
pub struct SarxRun {
    pub samples: Vec<Sample>,
    pub delays: Vec<usize>,
}

/// Iterates the switched difference equation from zero pre-history with
/// equation noise `e_t ~ N(0, noise_std²)`.
pub fn simulate_sarx(model: &SarxModel, inputs: &[f64], noise_std: f64, seed: u64) -> Result<SarxRun> {
    if inputs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("input sample"));
    }
    let n = inputs.len();
    let noise = white_noise(n, noise_std, super::transfer::noise_seed(seed, 0))?;
    let mut y = vec![0.0; n];
    let mut delays = Vec::with_capacity(n);
    for t in 0..n {
        let mode = &model.modes[model.schedule.at(t)];
        let mut acc = noise[t];
        for (j, a) in mode.a.iter().enumerate() {
            if let Some(past) = t.checked_sub(j + 1) {
                acc += a * y[past];
            }
        }
        for (k, b) in mode.b.iter().enumerate() {
            if let Some(past) = t.checked_sub(k + 1 + mode.delay) {
                acc += b * inputs[past];
            }
        }
        y[t] = acc;
        delays.push(mode.delay);
    }
    let samples = inputs.iter().zip(y).map(|(&u, y)| Sample::new(vec![u], vec![y])).collect();
    Ok(SarxRun { samples, delays })
}
