//! Recursive estimation of Markov parameters and the delays read off them.
//!
//! The estimator keeps five cross products of the block-Hankel data matrices
//!
//! ```text
//! L1 = U_f U_fᵀ   L2 = W_p U_fᵀ   L3 = Y_f U_fᵀ   L4 = W_p W_pᵀ   L5 = Y_f W_pᵀ
//! ```
//!
//! together with `P = L1⁻¹`. Each new sample adds one Hankel column, so every
//! product receives a rank-one term and `P` a Sherman-Morrison update, all
//! discounted by the forgetting factor. The Markov estimate is then
//!
//! ```text
//! Psi = {L3 - [L5 - L3 P L2ᵀ] [L4 - L2 P L2ᵀ]⁺ L2} P
//! ```
//!
//! which equals the LQ-based projection estimate exactly when `gamma = 1`.

mod batch;
mod config;
mod criterion;
mod excitation;
mod markov;
mod window;

pub use batch::batch_markov_lq;
pub use config::EstimatorConfig;
pub use criterion::{ratio_criterion, threshold_criterion, Criterion, RatioPick};
pub use excitation::{pe_order_check, PeCheck};
pub use markov::{DelayMatrix, MarkovEstimate};
pub use window::{DataWindow, Sample};

use crate::error::{Error, Result};
use crate::linalg::{block_hankel, default_tolerance, pinv, sherman_morrison_update, spd_inverse, Matrix, Vector};

/// Channels whose impulse-response norm falls below this fraction of the
/// whole estimate's norm are reported invalid.
const MACHINE_NOISE: f64 = 1e-12;

pub(crate) struct DataMatrices {
    pub uf: Matrix,
    pub wp: Matrix,
    pub yf: Matrix,
}

pub(crate) fn check_sample(s: &Sample, m: usize, l: usize) -> Result<()> {
    if s.u.len() != m {
        return Err(Error::Dimension { what: "input sample", expected: m, got: s.u.len() });
    }
    if s.y.len() != l {
        return Err(Error::Dimension { what: "output sample", expected: l, got: s.y.len() });
    }
    if s.u.iter().chain(&s.y).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sample"));
    }
    Ok(())
}

/// Hankel blocks over all of `data`: `N - i - h + 1` columns.
pub(crate) fn data_matrices(data: &[Sample], config: &EstimatorConfig) -> Result<DataMatrices> {
    let needed = config.bootstrap_len();
    if data.len() < needed {
        return Err(Error::InsufficientData { needed, got: data.len() });
    }
    for s in data {
        check_sample(s, config.m, config.l)?;
    }
    let cols = data.len() - config.i - config.h + 1;
    let us: Vec<&[f64]> = data.iter().map(|s| s.u.as_slice()).collect();
    let ys: Vec<&[f64]> = data.iter().map(|s| s.y.as_slice()).collect();
    let up = block_hankel(&us, 0, config.i, cols)?;
    let yp = block_hankel(&ys, 0, config.i, cols)?;
    let uf = block_hankel(&us, config.i, config.h, cols)?;
    let yf = block_hankel(&ys, config.i, config.h, cols)?;
    let mut wp = Matrix::zeros(up.nrows() + yp.nrows(), cols);
    wp.rows_mut(0, up.nrows()).copy_from(&up);
    wp.rows_mut(up.nrows(), yp.nrows()).copy_from(&yp);
    Ok(DataMatrices { uf, wp, yf })
}

pub(crate) fn rank_tolerance(config: &EstimatorConfig, past_dim: usize) -> f64 {
    config.rank_tol.unwrap_or_else(|| default_tolerance(past_dim, past_dim))
}

/// The complete mutable state of one estimator stream.
#[derive(Debug, Clone)]
pub struct EstimatorState {
    config: EstimatorConfig,
    p: Matrix,
    l2: Matrix,
    l3: Matrix,
    l4: Matrix,
    l5: Matrix,
    window: DataWindow,
    k: usize,
}

impl EstimatorState {
    /// Builds the initial state from a batch of samples (absolute times
    /// `0..N`), forming the products with uniform weight and inverting `L1`
    /// directly.
    pub fn bootstrap(data: &[Sample], config: &EstimatorConfig) -> Result<Self> {
        config.validate()?;
        let mats = data_matrices(data, config)?;

        let order = config.i + config.h;
        if data.len() >= 10 * order {
            let us: Vec<&[f64]> = data.iter().map(|s| s.u.as_slice()).collect();
            let r0: f64 = us.iter().flat_map(|u| u.iter()).map(|x| x * x).sum::<f64>() / us.len() as f64;
            match pe_order_check(&us, order, 1e-6 * r0.max(f64::MIN_POSITIVE)) {
                Ok(c) if !c.is_pe => log::warn!(
                    "bootstrap input fails the excitation diagnostic at order {order} (min eigenvalue {:e})",
                    c.min_eig
                ),
                _ => {}
            }
        }

        let l1 = &mats.uf * mats.uf.transpose();
        let p = spd_inverse(&l1).ok_or(Error::Excitation { order: config.h })?;
        let l2 = &mats.wp * mats.uf.transpose();
        let l3 = &mats.yf * mats.uf.transpose();
        let l4 = &mats.wp * mats.wp.transpose();
        let l5 = &mats.yf * mats.wp.transpose();

        let mut window = DataWindow::new(config.i + config.h);
        let n = data.len();
        for (k, s) in data.iter().enumerate().skip(n - window.capacity()) {
            window.push(k, s.clone());
        }
        Ok(Self {
            config: config.clone(),
            p,
            l2,
            l3,
            l4,
            l5,
            window,
            k: n - 1,
        })
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    /// Absolute time index of the newest sample absorbed.
    pub fn time(&self) -> usize {
        self.k
    }

    pub fn window(&self) -> &DataWindow {
        &self.window
    }

    /// `P = L1⁻¹`.
    pub fn p(&self) -> &Matrix {
        &self.p
    }

    /// Cross products `(L2, L3, L4, L5)`.
    pub fn products(&self) -> (&Matrix, &Matrix, &Matrix, &Matrix) {
        (&self.l2, &self.l3, &self.l4, &self.l5)
    }

    /// Absorbs the sample at time `k + 1`.
    ///
    /// On error the state is left untouched.
    pub fn update(&mut self, u: &[f64], y: &[f64]) -> Result<()> {
        let sample = Sample::new(u.to_vec(), y.to_vec());
        check_sample(&sample, self.config.m, self.config.l)?;
        let EstimatorConfig { m, l, i, h, gamma, .. } = self.config;

        // window after the push: w_i from the oldest i samples, u_h / y_h
        // from the newest h
        let recent: Vec<&Sample> = self.window.iter().skip(1).chain(std::iter::once(&sample)).collect();
        let mut u_h = Vector::zeros(h * m);
        let mut y_h = Vector::zeros(h * l);
        for (r, s) in recent[i..].iter().enumerate() {
            u_h.rows_mut(r * m, m).copy_from_slice(&s.u);
            y_h.rows_mut(r * l, l).copy_from_slice(&s.y);
        }
        let mut w_i = Vector::zeros(i * (m + l));
        for (r, s) in recent[..i].iter().enumerate() {
            w_i.rows_mut(r * m, m).copy_from_slice(&s.u);
            w_i.rows_mut(i * m + r * l, l).copy_from_slice(&s.y);
        }

        let p = sherman_morrison_update(&self.p, &u_h, gamma)?;
        self.p = p;
        self.l2.ger(1.0, &w_i, &u_h, gamma);
        self.l3.ger(1.0, &y_h, &u_h, gamma);
        self.l4.ger(1.0, &w_i, &w_i, gamma);
        self.l5.ger(1.0, &y_h, &w_i, gamma);
        self.k += 1;
        self.window.push(self.k, sample);
        Ok(())
    }

    /// Markov-parameter estimate from the current products.
    pub fn markov_estimate(&self) -> Result<MarkovEstimate> {
        let lp = &self.l3 * &self.p;
        let l2p = &self.l2 * &self.p;
        let cross = &self.l5 - &lp * self.l2.transpose();
        let past = &self.l4 - &l2p * self.l2.transpose();
        if past.iter().chain(cross.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Breakdown("non-finite cross products".into()));
        }
        let tol = rank_tolerance(&self.config, past.nrows());
        let past_pinv = pinv(&past, Some(tol))?;
        let psi = lp - cross * past_pinv * l2p;
        if psi.iter().any(|x| !x.is_finite()) {
            return Err(Error::Breakdown("non-finite Markov estimate".into()));
        }
        MarkovEstimate::new(psi, self.config.m, self.config.l, self.config.h)
    }

    /// Markov estimate followed by [`estimate_delays`].
    pub fn delays(&self, criterion: Criterion) -> Result<DelayMatrix> {
        Ok(estimate_delays(&self.markov_estimate()?, criterion, self.config.d_max))
    }
}

/// Applies `criterion` to every channel's impulse-response vector.
///
/// A channel is invalid when its vector is non-finite or its norm is at
/// machine-noise level relative to the whole estimate (in particular when
/// the estimate is identically zero).
pub fn estimate_delays(est: &MarkovEstimate, criterion: Criterion, d_max: usize) -> DelayMatrix {
    let total = est.psi.norm();
    let mut delays = Vec::with_capacity(est.l * est.m);
    let mut valid = Vec::with_capacity(est.l * est.m);
    for out in 0..est.l {
        for inp in 0..est.m {
            let v = est.channel_vector(out, inp).expect("indices in range");
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let ok = norm.is_finite() && norm > MACHINE_NOISE * total;
            let d = match criterion {
                Criterion::Ratio { epsilon } => ratio_criterion(&v, epsilon, d_max).delay,
                Criterion::Threshold { threshold } => threshold_criterion(&v, threshold).min(d_max),
            };
            delays.push(d);
            valid.push(ok);
        }
    }
    DelayMatrix { l: est.l, m: est.m, delays, valid }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn siso_data(n: usize) -> Vec<Sample> {
        // y(k) = 0.5 y(k-1) + u(k-1) with a deterministic pseudo-random input
        let mut state = 0x2545_f491u32;
        let mut u = Vec::with_capacity(n);
        for _ in 0..n {
            state ^= state << 13;
            state ^= state >> 17;
            state ^= state << 5;
            u.push(if state & 1 == 1 { 1.0 } else { -1.0 });
        }
        let mut y = vec![0.0; n];
        for k in 1..n {
            y[k] = 0.5 * y[k - 1] + u[k - 1];
        }
        u.into_iter().zip(y).map(|(u, y)| Sample::new(vec![u], vec![y])).collect()
    }

    fn cfg() -> EstimatorConfig {
        EstimatorConfig { j: 60, i: 4, h: 5, d_max: 3, gamma: 1.0, ..Default::default() }
    }

    #[test]
    fn zero_input_is_an_excitation_error() {
        let data: Vec<Sample> = (0..80).map(|_| Sample::new(vec![0.0], vec![0.0])).collect();
        assert_eq!(EstimatorState::bootstrap(&data, &cfg()).unwrap_err(), Error::Excitation { order: 5 });
    }

    #[test]
    fn bootstrap_needs_enough_samples() {
        let data = siso_data(20);
        assert_eq!(
            EstimatorState::bootstrap(&data, &cfg()).unwrap_err(),
            Error::InsufficientData { needed: 68, got: 20 }
        );
    }

    #[test]
    fn window_holds_trailing_samples() {
        let data = siso_data(70);
        let st = EstimatorState::bootstrap(&data, &cfg()).unwrap();
        assert_eq!(st.window().len(), 9);
        assert_eq!(st.time(), 69);
        assert_eq!(st.window().get(0).unwrap(), &data[61]);
    }

    #[test]
    fn zero_sample_leaves_products_unchanged() {
        let data = siso_data(70);
        let mut st = EstimatorState::bootstrap(&data, &cfg()).unwrap();
        // after a full window of zeros every new Hankel column is zero
        for _ in 0..9 {
            st.update(&[0.0], &[0.0]).unwrap();
        }
        let before = st.clone();
        st.update(&[0.0], &[0.0]).unwrap();
        assert_eq!(st.p(), before.p());
        assert_eq!(st.products(), before.products());
    }

    #[test]
    fn update_rejects_bad_sample_without_mutating() {
        let data = siso_data(70);
        let mut st = EstimatorState::bootstrap(&data, &cfg()).unwrap();
        let before = st.clone();
        assert!(st.update(&[1.0, 2.0], &[0.0]).is_err());
        assert!(st.update(&[f64::NAN], &[0.0]).is_err());
        assert_eq!(st.time(), before.time());
        assert_eq!(st.p(), before.p());
    }

    #[test]
    fn all_zero_estimate_is_invalid() {
        let est = MarkovEstimate::new(Matrix::zeros(8, 8), 2, 2, 4).unwrap();
        let d = estimate_delays(&est, Criterion::Ratio { epsilon: 1e-5 }, 2);
        assert!(d.valid.iter().all(|v| !v));
    }

    #[test]
    fn siso_first_order_delay_zero() {
        let data = siso_data(300);
        let st = EstimatorState::bootstrap(&data, &cfg()).unwrap();
        let est = st.markov_estimate().unwrap();
        let v = est.channel_vector(0, 0).unwrap();
        for (r, x) in v.iter().enumerate() {
            let expected = if r == 0 { 0.0 } else { 0.5f64.powi(r as i32 - 1) };
            assert!((x - expected).abs() < 1e-8, "lag {r}: {x} vs {expected}");
        }
        let d = st.delays(Criterion::Ratio { epsilon: 1e-5 }).unwrap();
        assert_eq!(d.delay(0, 0), 0);
        assert!(d.is_valid(0, 0));
    }
}
