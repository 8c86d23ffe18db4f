use crate::error::{Error, Result};
use crate::linalg::{lq_decompose, pinv, Matrix};

use super::{data_matrices, EstimatorConfig, MarkovEstimate, Sample};

/// Non-recursive Markov estimate from one LQ factorization of the stacked
/// data matrix `(U_f; W_p; Y_f)`:
///
/// `Psi = (L31 - L32 L22⁺ L21) L11⁻¹`
///
/// Uses every sample in `data` (`N - i - h + 1` Hankel columns). The
/// pseudoinverse cutoff on `L22` is the square root of the estimator's
/// cutoff on `L22 L22ᵀ`, so both paths truncate the same subspace.
pub fn batch_markov_lq(data: &[Sample], config: &EstimatorConfig) -> Result<MarkovEstimate> {
    config.validate()?;
    let mats = data_matrices(data, config)?;
    let (hm, ip, hl) = (config.future_input_dim(), config.past_dim(), config.future_output_dim());
    let stacked = {
        let mut s = Matrix::zeros(hm + ip + hl, mats.uf.ncols());
        s.rows_mut(0, hm).copy_from(&mats.uf);
        s.rows_mut(hm, ip).copy_from(&mats.wp);
        s.rows_mut(hm + ip, hl).copy_from(&mats.yf);
        s
    };
    let f = lq_decompose(&stacked)?;
    let l = &f.l;

    let l11 = l.view((0, 0), (hm, hm)).into_owned();
    let scale = l11.diagonal().amax();
    let cutoff = crate::linalg::default_tolerance(hm, mats.uf.ncols()) * scale;
    if scale == 0.0 || l11.diagonal().iter().any(|d| *d <= cutoff) {
        return Err(Error::Excitation { order: config.h });
    }
    let l21 = l.view((hm, 0), (ip, hm));
    let l22 = l.view((hm, hm), (ip, ip)).into_owned();
    let l31 = l.view((hm + ip, 0), (hl, hm));
    let l32 = l.view((hm + ip, hm), (hl, ip));

    let tol = super::rank_tolerance(config, ip).sqrt();
    let l22_pinv = pinv(&l22, Some(tol))?;
    let numer = l31 - l32 * l22_pinv * l21;
    // numer * L11⁻¹  <=>  L11ᵀ Xᵀ = numerᵀ
    let psi_t = l11
        .transpose()
        .solve_upper_triangular(&numer.transpose())
        .ok_or(Error::Excitation { order: config.h })?;
    MarkovEstimate::new(psi_t.transpose(), config.m, config.l, config.h)
}
