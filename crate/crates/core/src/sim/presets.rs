use crate::error::{Error, Result};
use crate::estimator::{EstimatorConfig, Sample};

use super::excitation::{ExcitationKind, ExcitationSpec};
use super::sarx::{simulate_sarx, SarxMode, SarxModel};
use super::schedule::StepSchedule;
use super::transfer::{noise_seed, simulate_mimo, MimoDelayedSystem, RationalChannel};

/// A data-generating model.
#[derive(Debug, Clone, PartialEq)]
pub enum SimulatorSpec {
    Mimo(MimoDelayedSystem),
    Sarx { model: SarxModel, noise_std: f64 },
}

impl SimulatorSpec {
    pub fn inputs(&self) -> usize {
        match self {
            SimulatorSpec::Mimo(s) => s.m,
            SimulatorSpec::Sarx { .. } => 1,
        }
    }

    pub fn outputs(&self) -> usize {
        match self {
            SimulatorSpec::Mimo(s) => s.l,
            SimulatorSpec::Sarx { .. } => 1,
        }
    }

    /// Same model with every output noise level replaced by `std`.
    pub fn with_noise(&self, std: f64) -> Self {
        match self {
            SimulatorSpec::Mimo(s) => SimulatorSpec::Mimo(s.with_noise(std)),
            SimulatorSpec::Sarx { model, .. } => SimulatorSpec::Sarx { model: model.clone(), noise_std: std },
        }
    }
}

/// Simulated samples with the true delay matrix (row-major) at every sample.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub m: usize,
    pub l: usize,
    pub samples: Vec<Sample>,
    pub truth: Vec<Vec<usize>>,
}

/// A complete experiment: model, excitation and estimator settings.
#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub simulator: SimulatorSpec,
    /// One excitation per input; seeds are derived from the run seed.
    pub excitation: Vec<ExcitationKind>,
    pub length: usize,
    pub config: EstimatorConfig,
}

impl Preset {
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "example1" => Ok(example1_preset()),
            "example2" => Ok(example2_preset()),
            other => Err(Error::Config(format!("unknown preset '{other}' (expected example1 or example2)"))),
        }
    }

    /// Input sequences for `seed`, one vector per sample.
    pub fn inputs(&self, seed: u64) -> Result<Vec<Vec<f64>>> {
        let mut channels = Vec::with_capacity(self.excitation.len());
        for (r, kind) in self.excitation.iter().enumerate() {
            let spec = ExcitationSpec {
                kind: kind.clone(),
                length: self.length,
                seed: input_seed(seed, r),
            };
            channels.push(spec.generate()?);
        }
        Ok((0..self.length).map(|k| channels.iter().map(|c| c[k]).collect()).collect())
    }

    pub fn generate(&self, seed: u64) -> Result<Dataset> {
        let inputs = self.inputs(seed)?;
        self.generate_from(&inputs, seed)
    }

    /// Runs the simulator on caller-provided inputs (e.g. rescaled ones).
    pub fn generate_from(&self, inputs: &[Vec<f64>], seed: u64) -> Result<Dataset> {
        let (m, l) = (self.simulator.inputs(), self.simulator.outputs());
        match &self.simulator {
            SimulatorSpec::Mimo(sys) => {
                let samples = simulate_mimo(sys, inputs, seed)?;
                let truth = (0..samples.len()).map(|k| sys.delays_at(k)).collect();
                Ok(Dataset { m, l, samples, truth })
            }
            SimulatorSpec::Sarx { model, noise_std } => {
                let u: Vec<f64> = inputs.iter().map(|v| v[0]).collect();
                let run = simulate_sarx(model, &u, *noise_std, seed)?;
                let truth = run.delays.iter().map(|&d| vec![d]).collect();
                Ok(Dataset { m, l, samples: run.samples, truth })
            }
        }
    }

    pub fn with_noise(&self, std: f64) -> Self {
        Self { simulator: self.simulator.with_noise(std), ..self.clone() }
    }
}

fn input_seed(seed: u64, r: usize) -> u64 {
    // distinct PRBS phases for the two Example 1 channels come from these
    // differing in their residues mod 2047
    noise_seed(seed, 1000 + r as u64).wrapping_add(r as u64)
}

fn channel(num: &[f64], den: &[f64], segments: &[(usize, usize)]) -> RationalChannel {
    RationalChannel::new(num.to_vec(), den.to_vec(), StepSchedule::from_segments(segments).expect("valid schedule"))
        .expect("stable preset channel")
}

/// Two-input two-output delayed transfer-function bank with piecewise
/// constant delays over 2000 samples, PRBS(11) excitation.
pub fn example1_preset() -> Preset {
    let end = usize::MAX - 1;
    let channels = vec![
        channel(&[0.02, 0.1], &[1.0, -1.1, 0.3], &[(500, 6), (end, 2)]),
        channel(&[1.0, 2.0], &[1.0, -0.4], &[(500, 1), (1000, 5), (end, 2)]),
        channel(&[1.0, 0.5], &[1.0, 0.9], &[(1500, 1), (end, 4)]),
        channel(&[0.02], &[1.0, -0.8, -0.25, 0.2], &[(500, 5), (1500, 2), (end, 1)]),
    ];
    let system = MimoDelayedSystem::new(2, 2, channels, vec![0.01, 0.01]).expect("valid preset");
    let prbs = ExcitationKind::Prbs { register_length: 11, amplitude: 1.0 };
    Preset {
        name: "example1",
        simulator: SimulatorSpec::Mimo(system),
        excitation: vec![prbs.clone(), prbs],
        length: 2000,
        config: EstimatorConfig {
            m: 2,
            l: 2,
            j: 100,
            i: 8,
            h: 8,
            gamma: 0.9,
            epsilon: 1e-5,
            d_max: 6,
            rank_tol: None,
        },
    }
}

/// Three-mode delayed SARX model switching every 250 samples, unit-variance
/// Gaussian excitation.
pub fn example2_preset() -> Preset {
    let modes = vec![
        // y(t-1), y(t-3); u(t-2), u(t-3)
        SarxMode::new(vec![0.89, 0.0, -0.0710], vec![-1.2878, -1.1252], 1).expect("stable"),
        // y(t-1); u(t-4), u(t-5)
        SarxMode::new(vec![-0.75], vec![1.1050, 3.16], 3).expect("stable"),
        // y(t-1), y(t-2); u(t-5)
        SarxMode::new(vec![-0.5, 0.1875], vec![0.4055], 4).expect("stable"),
    ];
    // published order (3, 2, 3, 1, 2, 3, 1, 2), zero-based here
    let schedule = StepSchedule::periodic(250, &[2, 1, 2, 0, 1, 2, 0, 1]).expect("valid schedule");
    let model = SarxModel::new(modes, schedule).expect("valid model");
    Preset {
        name: "example2",
        simulator: SimulatorSpec::Sarx { model, noise_std: 0.05 },
        excitation: vec![ExcitationKind::Gaussian { std: 1.0 }],
        length: 2000,
        config: EstimatorConfig {
            m: 1,
            l: 1,
            j: 78,
            i: 11,
            h: 12,
            gamma: 0.8,
            epsilon: 1e-5,
            d_max: 4,
            rank_tol: None,
        },
    }
}
