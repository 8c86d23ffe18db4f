use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Estimate of the block lower-triangular Toeplitz matrix of Markov
/// parameters, `(h*l) x (h*m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovEstimate {
    pub psi: Matrix,
    pub m: usize,
    pub l: usize,
    pub h: usize,
}

impl MarkovEstimate {
    pub fn new(psi: Matrix, m: usize, l: usize, h: usize) -> Result<Self> {
        if psi.shape() != (h * l, h * m) {
            return Err(Error::Dimension {
                what: "Markov estimate rows",
                expected: h * l,
                got: psi.nrows(),
            });
        }
        Ok(Self { psi, m, l, h })
    }

    /// The first `m` columns: `h` stacked `l x m` blocks `D, CB, CAB, ...`.
    pub fn first_block_column(&self) -> Matrix {
        self.psi.columns(0, self.m).into_owned()
    }

    /// The `r`-th (zero-based) `l x m` Markov block.
    pub fn block(&self, r: usize) -> Result<Matrix> {
        if r >= self.h {
            return Err(Error::Range(format!("Markov block {r} of {}", self.h)));
        }
        Ok(self.psi.view((r * self.l, 0), (self.l, self.m)).into_owned())
    }

    /// Impulse-response samples of output `out` to input `inp` (zero-based),
    /// lag 0 first. Always `h` entries.
    pub fn channel_vector(&self, out: usize, inp: usize) -> Result<Vec<f64>> {
        if out >= self.l || inp >= self.m {
            return Err(Error::Range(format!(
                "channel ({out}, {inp}) outside {} outputs x {} inputs",
                self.l, self.m
            )));
        }
        Ok((0..self.h).map(|r| self.psi[(r * self.l + out, inp)]).collect())
    }
}

/// Per-channel delay estimates, row-major over `(output, input)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayMatrix {
    pub l: usize,
    pub m: usize,
    pub delays: Vec<usize>,
    pub valid: Vec<bool>,
}

impl DelayMatrix {
    pub fn delay(&self, out: usize, inp: usize) -> usize {
        self.delays[out * self.m + inp]
    }

    pub fn is_valid(&self, out: usize, inp: usize) -> bool {
        self.valid[out * self.m + inp]
    }
}
