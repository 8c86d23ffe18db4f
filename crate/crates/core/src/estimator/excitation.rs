use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Outcome of the persistent-excitation diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeCheck {
    pub is_pe: bool,
    pub min_eig: f64,
}

/// Sample covariance `R_u(tau) = 1/(N - tau) * sum_k u(k + tau) u(k)ᵀ`.
fn sample_covariance<S: AsRef<[f64]>>(u: &[S], tau: usize, m: usize) -> Matrix {
    let n = u.len();
    let mut r = Matrix::zeros(m, m);
    for k in 0..n - tau {
        let a = u[k + tau].as_ref();
        let b = u[k].as_ref();
        for p in 0..m {
            for q in 0..m {
                r[(p, q)] += a[p] * b[q];
            }
        }
    }
    r / (n - tau) as f64
}

/// Tests whether `u` is persistently exciting of order `order`: the
/// block-Toeplitz covariance `R_n` must have its smallest eigenvalue above
/// `tol`.
///
/// Covariances are unbiased lag-product averages without mean removal, so a
/// constant input yields an exactly rank-one `R_n`.
pub fn pe_order_check<S: AsRef<[f64]>>(u: &[S], order: usize, tol: f64) -> Result<PeCheck> {
    if order == 0 {
        return Err(Error::Config("excitation order must be positive".into()));
    }
    if u.len() < 10 * order {
        return Err(Error::InsufficientData {
            needed: 10 * order,
            got: u.len(),
        });
    }
    let m = u[0].as_ref().len();
    if let Some(bad) = u.iter().find(|s| s.as_ref().len() != m) {
        return Err(Error::Dimension {
            what: "input sample",
            expected: m,
            got: bad.as_ref().len(),
        });
    }
    let lags: Vec<Matrix> = (0..order).map(|tau| sample_covariance(u, tau, m)).collect();
    let mut rn = Matrix::zeros(order * m, order * m);
    for a in 0..order {
        for b in 0..order {
            // block (a, b) = R_u(a - b), with R_u(-tau) = R_u(tau)ᵀ
            let block = if a >= b {
                lags[a - b].clone()
            } else {
                lags[b - a].transpose()
            };
            rn.view_mut((a * m, b * m), (m, m)).copy_from(&block);
        }
    }
    let min_eig = SymmetricEigen::new(rn).eigenvalues.min();
    Ok(PeCheck {
        is_pe: min_eig > tol,
        min_eig,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input_fails_order_two() {
        let u = vec![[1.0]; 100];
        let check = pe_order_check(&u, 2, 1e-6).unwrap();
        assert!(!check.is_pe);
        assert!(check.min_eig.abs() < 0.05);
    }

    #[test]
    fn constant_input_passes_order_one() {
        let u = vec![[1.0]; 100];
        assert!(pe_order_check(&u, 1, 1e-6).unwrap().is_pe);
    }

    #[test]
    fn too_short() {
        let u = vec![[1.0]; 15];
        assert!(matches!(
            pe_order_check(&u, 2, 1e-6),
            Err(Error::InsufficientData { needed: 20, got: 15 })
        ));
    }

    #[test]
    fn alternating_sign_is_order_two_only() {
        // +1, -1, +1, ... spans only one sinusoid at Nyquist: order 1 yes, order 2 no
        let u: Vec<[f64; 1]> = (0..400).map(|k| [if k % 2 == 0 { 1.0 } else { -1.0 }]).collect();
        assert!(pe_order_check(&u, 1, 1e-3).unwrap().is_pe);
        assert!(!pe_order_check(&u, 2, 1e-3).unwrap().is_pe);
    }
}
