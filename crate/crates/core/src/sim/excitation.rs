use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Feedback taps of maximal-length Fibonacci LFSRs, indexed by register
/// length.
const MAXIMAL_TAPS: &[(u32, &[u32])] = &[
    (2, &[2, 1]),
    (3, &[3, 2]),
    (4, &[4, 3]),
    (5, &[5, 3]),
    (6, &[6, 5]),
    (7, &[7, 6]),
    (8, &[8, 6, 5, 4]),
    (9, &[9, 5]),
    (10, &[10, 7]),
    (11, &[11, 9]),
    (12, &[12, 6, 4, 1]),
    (13, &[13, 4, 3, 1]),
    (14, &[14, 5, 3, 1]),
    (15, &[15, 14]),
    (16, &[16, 15, 13, 4]),
    (17, &[17, 14]),
    (18, &[18, 11]),
    (19, &[19, 6, 2, 1]),
    (20, &[20, 17]),
];

/// Fibonacci linear-feedback shift register.
#[derive(Debug, Clone)]
pub struct Lfsr {
    len: u32,
    taps: Vec<u32>,
    state: u32,
}

impl Lfsr {
    /// Register with the standard maximal taps for `len` bits.
    pub fn maximal(len: u32, seed: u64) -> Result<Self> {
        let taps = MAXIMAL_TAPS
            .iter()
            .find(|(n, _)| *n == len)
            .map(|(_, t)| t.to_vec())
            .ok_or_else(|| Error::Config(format!("no maximal tap table entry for a {len}-bit register")))?;
        Self::with_taps(len, taps, seed)
    }

    /// Register with explicit taps; rejects tap sets whose period is not
    /// `2^len - 1`.
    pub fn with_taps(len: u32, taps: Vec<u32>, seed: u64) -> Result<Self> {
        if !(2..=24).contains(&len) {
            return Err(Error::Config(format!("register length {len} outside 2..=24")));
        }
        if taps.is_empty() || taps.iter().any(|&t| t == 0 || t > len) || !taps.contains(&len) {
            return Err(Error::NonMaximalTaps { len, taps });
        }
        let period = (1u64 << len) - 1;
        let state = (seed % period) as u32 + 1;
        let mut lfsr = Self { len, taps, state: 1 };
        if lfsr.cycle_length() != period {
            return Err(Error::NonMaximalTaps { len: lfsr.len, taps: lfsr.taps });
        }
        lfsr.state = state;
        Ok(lfsr)
    }

    pub fn period(&self) -> u64 {
        (1u64 << self.len) - 1
    }

    fn mask(&self) -> u32 {
        ((1u64 << self.len) - 1) as u32
    }

    fn cycle_length(&mut self) -> u64 {
        let start = self.state;
        let mut n = 0u64;
        loop {
            self.next_bit();
            n += 1;
            if self.state == start || n > self.period() {
                return n;
            }
        }
    }

    /// Emits the output bit and shifts the register once.
    pub fn next_bit(&mut self) -> bool {
        let out = (self.state >> (self.len - 1)) & 1 == 1;
        let feedback = self.taps.iter().fold(0u32, |acc, &t| acc ^ ((self.state >> (t - 1)) & 1));
        self.state = ((self.state << 1) | feedback) & self.mask();
        out
    }
}

/// Excitation signal description.
#[derive(Debug, Clone, PartialEq)]
pub enum ExcitationKind {
    /// Maximal-length binary sequence mapped to `{-amplitude, +amplitude}`.
    Prbs { register_length: u32, amplitude: f64 },
    /// White Gaussian samples.
    Gaussian { std: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationSpec {
    pub kind: ExcitationKind,
    pub length: usize,
    pub seed: u64,
}

impl ExcitationSpec {
    pub fn generate(&self) -> Result<Vec<f64>> {
        match self.kind {
            ExcitationKind::Prbs { .. } => prbs(self),
            ExcitationKind::Gaussian { .. } => gaussian_sequence(self),
        }
    }
}

/// PRBS from a maximal LFSR; the seed selects the starting phase.
pub fn prbs(spec: &ExcitationSpec) -> Result<Vec<f64>> {
    let ExcitationKind::Prbs { register_length, amplitude } = spec.kind else {
        return Err(Error::Config("prbs called with a non-PRBS spec".into()));
    };
    if spec.length == 0 {
        return Err(Error::Config("excitation length must be positive".into()));
    }
    let mut lfsr = Lfsr::maximal(register_length, spec.seed)?;
    Ok((0..spec.length)
        .map(|_| if lfsr.next_bit() { amplitude } else { -amplitude })
        .collect())
}

/// Seeded white Gaussian noise with zero mean.
pub fn gaussian_sequence(spec: &ExcitationSpec) -> Result<Vec<f64>> {
    let ExcitationKind::Gaussian { std } = spec.kind else {
        return Err(Error::Config("gaussian_sequence called with a non-Gaussian spec".into()));
    };
    white_noise(spec.length, std, spec.seed)
}

pub(crate) fn white_noise(length: usize, std: f64, seed: u64) -> Result<Vec<f64>> {
    if !(std >= 0.0 && std.is_finite()) {
        return Err(Error::Config(format!("standard deviation {std} must be nonnegative")));
    }
    if std == 0.0 {
        return Ok(vec![0.0; length]);
    }
    let normal = Normal::new(0.0, std).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..length).map(|_| normal.sample(&mut rng)).collect())
}
