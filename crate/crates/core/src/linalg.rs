//! Dense kernels the estimator is assembled from: block-Hankel construction,
//! LQ factorization, the SVD pseudoinverse and the rank-one inverse update.
//!
//! Everything here is a pure function over borrowed inputs.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Default relative cutoff for singular values: `max(rows, cols) * eps`.
pub fn default_tolerance(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON
}

pub(crate) fn ensure_finite(a: &Matrix, what: &'static str) -> Result<()> {
    if a.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Builds the block-Hankel matrix whose `(r, c)` block is `samples[start + r + c]`.
///
/// With `s`-dimensional samples the result is `(block_rows * s) x cols`.
pub fn block_hankel<S: AsRef<[f64]>>(
    samples: &[S],
    start: usize,
    block_rows: usize,
    cols: usize,
) -> Result<Matrix> {
    if block_rows == 0 || cols == 0 {
        return Err(Error::Range("block_hankel needs at least one block row and column".into()));
    }
    let last = start + block_rows + cols - 2;
    if last >= samples.len() {
        return Err(Error::Range(format!(
            "block_hankel needs sample {last}, sequence has {}",
            samples.len()
        )));
    }
    let dim = samples[start].as_ref().len();
    for (idx, s) in samples[start..=last].iter().enumerate() {
        if s.as_ref().len() != dim {
            return Err(Error::Dimension {
                what: "sample",
                expected: dim,
                got: s.as_ref().len(),
            });
        }
        if s.as_ref().iter().any(|x| !x.is_finite()) {
            return Err(Error::Range(format!("sample {} is not finite", start + idx)));
        }
    }
    Ok(Matrix::from_fn(block_rows * dim, cols, |row, c| {
        let (r, q) = (row / dim, row % dim);
        samples[start + r + c].as_ref()[q]
    }))
}

/// `a = l * q` with `l` lower triangular and `q` row-orthonormal.
#[derive(Debug, Clone)]
pub struct LqFactors {
    pub l: Matrix,
    pub q: Matrix,
}

impl LqFactors {
    /// Sub-block `(bi, bj)` of `l` under the given row partition.
    pub fn block(&self, partition: &[usize], bi: usize, bj: usize) -> Matrix {
        let offsets = partition_offsets(partition);
        let (r0, r1) = (offsets[bi], offsets[bi + 1]);
        let (c0, c1) = (offsets[bj], offsets[bj + 1].min(self.l.ncols()));
        self.l.view((r0, c0), (r1 - r0, c1.saturating_sub(c0))).into_owned()
    }
}

fn partition_offsets(partition: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(partition.len() + 1);
    offsets.push(0);
    let mut acc = 0;
    for &p in partition {
        acc += p;
        offsets.push(acc);
    }
    offsets
}

/// LQ factorization without any rank requirement.
///
/// Computed as the transpose of a Householder QR of `aᵀ`, with signs
/// normalized so that `l` has a nonnegative diagonal.
pub fn lq_decompose(a: &Matrix) -> Result<LqFactors> {
    ensure_finite(a, "lq input")?;
    let qr = a.transpose().qr();
    let mut q = qr.q().transpose();
    let mut l = qr.r().transpose();
    for k in 0..l.ncols().min(l.nrows()) {
        if l[(k, k)] < 0.0 {
            l.column_mut(k).neg_mut();
            q.row_mut(k).neg_mut();
        }
    }
    Ok(LqFactors { l, q })
}

/// LQ factorization of a full-row-rank matrix, lower block-triangular with
/// respect to `row_partition`.
///
/// Fails with [`Error::SingularInput`] naming the first block whose diagonal
/// block of `l` is rank deficient.
pub fn lq_factorize(a: &Matrix, row_partition: &[usize]) -> Result<LqFactors> {
    let total: usize = row_partition.iter().sum();
    if total != a.nrows() {
        return Err(Error::Dimension {
            what: "row partition sum",
            expected: a.nrows(),
            got: total,
        });
    }
    let f = lq_decompose(a)?;
    let offsets = partition_offsets(row_partition);
    let block_of = |row: usize| offsets.iter().rposition(|&o| o <= row).unwrap_or(0).min(row_partition.len() - 1);
    let diag_len = f.l.nrows().min(f.l.ncols());
    let scale = (0..diag_len).map(|k| f.l[(k, k)].abs()).fold(0.0, f64::max);
    let tol = default_tolerance(a.nrows(), a.ncols()) * scale;
    for row in 0..a.nrows() {
        if row >= diag_len || f.l[(row, row)] <= tol {
            return Err(Error::SingularInput { block: block_of(row) });
        }
    }
    Ok(f)
}

/// Moore-Penrose pseudoinverse via SVD.
///
/// Singular values below `tol * sigma_max` are treated as zero; `None` uses
/// [`default_tolerance`].
pub fn pinv(a: &Matrix, tol: Option<f64>) -> Result<Matrix> {
    ensure_finite(a, "pinv input")?;
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return Ok(Matrix::zeros(cols, rows));
    }
    let tol = tol.unwrap_or_else(|| default_tolerance(rows, cols));
    // nalgebra's bidiagonal SVD loses accuracy on rank-deficient inputs, so
    // the factorization is delegated to faer
    let fa = faer::Mat::<f64>::from_fn(rows, cols, |r, c| a[(r, c)]);
    let svd = fa.thin_svd().map_err(|_| Error::Breakdown("SVD did not converge".into()))?;
    let (u, s, v) = (svd.U(), svd.S(), svd.V());
    let k = rows.min(cols);
    let sigma_max = (0..k).map(|i| s[i]).fold(0.0, f64::max);
    let cutoff = tol * sigma_max;
    let mut out = Matrix::zeros(cols, rows);
    for i in 0..k {
        let si = s[i];
        if si > cutoff && si > 0.0 {
            // out += v_i * u_iᵀ / s_i
            for c in 0..rows {
                let uc = u[(c, i)] / si;
                for r in 0..cols {
                    out[(r, c)] += v[(r, i)] * uc;
                }
            }
        }
    }
    Ok(out)
}

/// Rank-one inverse update with forgetting.
///
/// Given `p = M⁻¹`, returns `(γ M + v vᵀ)⁻¹ = (1/γ) p [I - v vᵀ p / (γ + vᵀ p v)]`.
pub fn sherman_morrison_update(p: &Matrix, v: &Vector, gamma: f64) -> Result<Matrix> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::Dimension {
            what: "inverse columns",
            expected: n,
            got: p.ncols(),
        });
    }
    if v.len() != n {
        return Err(Error::Dimension {
            what: "update vector",
            expected: n,
            got: v.len(),
        });
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Config(format!("forgetting factor {gamma} outside (0, 1]")));
    }
    let pv = p * v;
    let vp = v.transpose() * p;
    let denom = gamma + v.dot(&pv);
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(Error::Breakdown(format!(
            "inverse-update denominator {denom:e} is not positive"
        )));
    }
    let mut out = p.clone();
    out.ger(-1.0 / denom, &pv, &vp.transpose(), 1.0);
    out /= gamma;
    Ok(out)
}

/// Inverse of a symmetric positive definite matrix through Cholesky.
///
/// Returns `None` when the factorization fails or the matrix is numerically
/// singular.
pub fn spd_inverse(a: &Matrix) -> Option<Matrix> {
    let n = a.nrows();
    let chol = a.clone().cholesky()?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), d| (lo.min(d.abs()), hi.max(d.abs())));
    // condition number of `a` is (hi/lo)^2 at best
    if n > 0 && (lo / hi).powi(2) <= default_tolerance(n, n) {
        return None;
    }
    Some(chol.inverse())
}
