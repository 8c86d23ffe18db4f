//! Delay pickers operating on one channel's impulse-response vector.

/// How the delay is read off an impulse-response vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Ratio of each entry to the running maximum of its predecessors,
    /// regularized by `epsilon`.
    Ratio { epsilon: f64 },
    /// Leading entries below `threshold` count as zeros.
    Threshold { threshold: f64 },
}

/// Result of [`ratio_criterion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioPick {
    pub delay: usize,
    pub score: f64,
}

/// Picks the delay as the position of the first significant rise.
///
/// Evaluates `C(t) = |psi[t]| / (max_{s<t} |psi[s]| + epsilon)` on the
/// zero-based vector and returns `argmax C - 1` over `t = 1..=d_max+1`, so the
/// answer always lies in `[0, d_max]`. `t = 0` would be a negative delay and
/// is not searched; `psi[0]` still enters the running maximum. Ties go to the
/// smallest `t`.
pub fn ratio_criterion(psi: &[f64], epsilon: f64, d_max: usize) -> RatioPick {
    let last = (d_max + 1).min(psi.len().saturating_sub(1));
    let mut running_max = 0.0f64;
    let mut best_t = 1usize;
    let mut best = f64::NEG_INFINITY;
    for (t, x) in psi.iter().enumerate().take(last + 1) {
        let c = x.abs() / (running_max + epsilon);
        if t >= 1 && c > best {
            best = c;
            best_t = t;
        }
        running_max = running_max.max(x.abs());
    }
    RatioPick {
        delay: best_t.saturating_sub(1).min(d_max),
        score: best.max(0.0),
    }
}

/// Counts leading entries with magnitude below `threshold`; the delay is one
/// less than that count, floored at zero.
pub fn threshold_criterion(psi: &[f64], threshold: f64) -> usize {
    let zeros = psi.iter().take_while(|x| x.abs() < threshold).count();
    zeros.saturating_sub(1)
}
