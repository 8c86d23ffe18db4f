use crate::error::{Error, Result};
use crate::estimator::Sample;

use super::excitation::white_noise;
use super::schedule::StepSchedule;

/// Schur-Cohn step-down test: true when every root of
/// `z^n + a1 z^(n-1) + ... + an` lies strictly inside the unit circle.
pub fn is_stable(den: &[f64]) -> bool {
    if den.is_empty() || den[0] == 0.0 || den.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let mut a: Vec<f64> = den.iter().map(|x| x / den[0]).collect();
    while a.len() > 1 {
        let n = a.len() - 1;
        let k = a[n];
        if k.abs() >= 1.0 {
            return false;
        }
        let scale = 1.0 - k * k;
        a = (0..n).map(|i| (a[i] - k * a[n - i]) / scale).collect();
    }
    true
}

/// Direct-form filter state for one rational transfer function in `q⁻¹`.
#[derive(Debug, Clone)]
pub(crate) struct Filter {
    num: Vec<f64>,
    den: Vec<f64>,
    inputs: Vec<f64>,
    outputs: Vec<f64>,
}

impl Filter {
    /// `num = (b1, b2, ...)` multiplies `q⁻¹, q⁻², ...`; `den = (1, a1, ...)`.
    pub fn new(num: &[f64], den: &[f64]) -> Self {
        Self {
            num: num.to_vec(),
            den: den.to_vec(),
            inputs: vec![0.0; num.len()],
            outputs: vec![0.0; den.len().saturating_sub(1)],
        }
    }

    /// Output at time `k` given the input at time `k` (which only affects
    /// later outputs, the filter being strictly proper).
    pub fn step(&mut self, input: f64) -> f64 {
        let mut y: f64 = self.num.iter().zip(&self.inputs).map(|(b, v)| b * v).sum();
        y -= self.den.iter().skip(1).zip(&self.outputs).map(|(a, o)| a * o).sum::<f64>();
        if !self.inputs.is_empty() {
            self.inputs.rotate_right(1);
            self.inputs[0] = input;
        }
        if !self.outputs.is_empty() {
            self.outputs.rotate_right(1);
            self.outputs[0] = y;
        }
        y
    }
}

/// Strictly proper rational transfer function behind a time-varying delay.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalChannel {
    /// `(b1, b2, ...)`: coefficients of `q⁻¹, q⁻², ...`.
    pub num: Vec<f64>,
    /// `(1, a1, a2, ...)`.
    pub den: Vec<f64>,
    pub delay: StepSchedule,
}

impl RationalChannel {
    pub fn new(num: Vec<f64>, den: Vec<f64>, delay: StepSchedule) -> Result<Self> {
        if den.first() != Some(&1.0) {
            return Err(Error::Config("denominator must be monic (leading 1)".into()));
        }
        if num.iter().chain(&den).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("transfer-function coefficients"));
        }
        if !is_stable(&den) {
            return Err(Error::Unstable(format!("denominator {den:?} has a pole on or outside the unit circle")));
        }
        Ok(Self { num, den, delay })
    }
}

/// `l x m` bank of delayed channels with additive white output noise.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoDelayedSystem {
    pub l: usize,
    pub m: usize,
    /// Row-major over `(output, input)`.
    pub channels: Vec<RationalChannel>,
    pub noise_std: Vec<f64>,
}

impl MimoDelayedSystem {
    pub fn new(l: usize, m: usize, channels: Vec<RationalChannel>, noise_std: Vec<f64>) -> Result<Self> {
        if channels.len() != l * m {
            return Err(Error::Dimension { what: "channel grid", expected: l * m, got: channels.len() });
        }
        if noise_std.len() != l {
            return Err(Error::Dimension { what: "noise levels", expected: l, got: noise_std.len() });
        }
        if noise_std.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Config("noise standard deviations must be nonnegative".into()));
        }
        Ok(Self { l, m, channels, noise_std })
    }

    pub fn channel(&self, out: usize, inp: usize) -> &RationalChannel {
        &self.channels[out * self.m + inp]
    }

    /// Ground-truth delays at sample `k`, row-major.
    pub fn delays_at(&self, k: usize) -> Vec<usize> {
        self.channels.iter().map(|c| c.delay.at(k)).collect()
    }

    pub fn with_noise(&self, std: f64) -> Self {
        Self { noise_std: vec![std; self.l], ..self.clone() }
    }
}

pub(crate) fn noise_seed(seed: u64, stream: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream + 1)
}

/// Simulates `y_j(k) = sum_r G_jr(q⁻¹) v_jr(k) + e_j(k)` with
/// `v_jr(k) = u_r(k - T_jr(k))`, zero pre-history.
///
/// With strictly proper `G`, an input impulse at `k0` first shows at
/// `k0 + 1 + T`.
pub fn simulate_mimo(system: &MimoDelayedSystem, inputs: &[Vec<f64>], seed: u64) -> Result<Vec<Sample>> {
    let n = inputs.len();
    for u in inputs {
        if u.len() != system.m {
            return Err(Error::Dimension { what: "input sample", expected: system.m, got: u.len() });
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("input sample"));
        }
    }
    let noise: Vec<Vec<f64>> = system
        .noise_std
        .iter()
        .enumerate()
        .map(|(j, &std)| white_noise(n, std, noise_seed(seed, j as u64)))
        .collect::<Result<_>>()?;
    let mut filters: Vec<Filter> = system.channels.iter().map(|c| Filter::new(&c.num, &c.den)).collect();

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut y = vec![0.0; system.l];
        for (j, yj) in y.iter_mut().enumerate() {
            for r in 0..system.m {
                let idx = j * system.m + r;
                let t = system.channels[idx].delay.at(k);
                let v = if k >= t { inputs[k - t][r] } else { 0.0 };
                *yj += filters[idx].step(v);
            }
            *yj += noise[j][k];
        }
        out.push(Sample::new(inputs[k].clone(), y));
    }
    Ok(out)
}
