#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subdelay::sim::{prbs, ExcitationKind, ExcitationSpec, MimoDelayedSystem, RationalChannel, StepSchedule};
use subdelay::{EstimatorConfig, EstimatorState, MarkovEstimate, Sample};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Second-order SISO channel with real poles in (-0.8, 0.8) and a delay in
/// `0..=max_delay`.
pub fn random_siso(rng: &mut ChaCha8Rng, max_delay: usize) -> MimoDelayedSystem {
    let p1: f64 = rng.random_range(-0.8..0.8);
    let p2: f64 = rng.random_range(-0.8..0.8);
    let den = vec![1.0, -(p1 + p2), p1 * p2];
    let mut b0: f64 = rng.random_range(0.3..1.5);
    if rng.random_bool(0.5) {
        b0 = -b0;
    }
    let num = vec![b0, rng.random_range(-1.0..1.0)];
    let t = rng.random_range(0..=max_delay);
    let ch = RationalChannel::new(num, den, StepSchedule::constant(t)).unwrap();
    MimoDelayedSystem::new(1, 1, vec![ch], vec![0.0]).unwrap()
}

/// `m` independent ±1 PRBS channels of `n` samples.
pub fn prbs_inputs(n: usize, m: usize, register: u32, seed: u64) -> Vec<Vec<f64>> {
    let chans: Vec<Vec<f64>> = (0..m)
        .map(|r| {
            let spec = ExcitationSpec {
                kind: ExcitationKind::Prbs { register_length: register, amplitude: 1.0 },
                length: n,
                seed: seed.wrapping_mul(31).wrapping_add(r as u64 * 977),
            };
            prbs(&spec).unwrap()
        })
        .collect();
    (0..n).map(|k| chans.iter().map(|c| c[k]).collect()).collect()
}

/// Markov estimates after bootstrapping on `n0` samples and after every
/// later sample.
pub fn markov_trajectory(samples: &[Sample], config: &EstimatorConfig, n0: usize) -> Vec<MarkovEstimate> {
    let mut state = EstimatorState::bootstrap(&samples[..n0], config).unwrap();
    let mut out = vec![state.markov_estimate().unwrap()];
    for s in &samples[n0..] {
        state.update(&s.u, &s.y).unwrap();
        out.push(state.markov_estimate().unwrap());
    }
    out
}

pub fn rel_diff(a: &MarkovEstimate, b: &MarkovEstimate) -> f64 {
    (&a.psi - &b.psi).norm() / b.psi.norm().max(f64::MIN_POSITIVE)
}
