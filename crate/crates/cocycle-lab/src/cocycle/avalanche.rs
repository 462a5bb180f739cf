//! Avalanche Principle residual checks.

use serde::{Deserialize, Serialize};

use super::{CocycleError, Mat2, ScaledMatrix2};

/// Residuals and hypothesis diagnostics of one Avalanche Principle check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ApReport {
    /// `|log||A_n...A_1|| + sum_{j=2}^{n-1} log||A_j|| - sum_{j=1}^{n-1} log||A_{j+1}A_j|||`.
    pub residual: f64,
    /// `residual * H / n`, the scale-free form of the asserted bound.
    pub ratio: f64,
    pub min_norm: f64,
    /// `max_j [log||A_{j+1}|| + log||A_j|| - log||A_{j+1}A_j||]`.
    pub max_pair_defect: f64,
    pub n: usize,
    pub h: f64,
}

/// Verifies the Avalanche Principle hypotheses for an ordered matrix list and,
/// when they hold, returns the chain-rule residual.
///
/// Hypothesis failures are reported as errors, never silently passed:
/// [`CocycleError::HypothesisLarge`] when `min ||A_j|| >= H > n` fails and
/// [`CocycleError::HypothesisDiff`] when some consecutive pair loses more than
/// `log(H)/2` of its norm product.
pub fn avalanche_check(matrices: &[Mat2], h: f64) -> Result<ApReport, CocycleError> {
    let n = matrices.len();
    assert!(n >= 3, "avalanche_check needs at least 3 matrices");
    for (j, m) in matrices.iter().enumerate() {
        let det = m.det().norm();
        assert!(
            det <= 1.0 + 1e-6,
            "matrix {j} has |det| = {det} > 1; not admissible"
        );
    }

    let log_norms: Vec<f64> = matrices.iter().map(|m| m.spectral_norm().ln()).collect();
    let min_norm = log_norms
        .iter()
        .fold(f64::INFINITY, |acc, &l| acc.min(l.exp()));
    if !(min_norm >= h && h > n as f64) {
        return Err(CocycleError::HypothesisLarge {
            min_norm,
            h,
            n,
        });
    }

    let pair_log_norms: Vec<f64> = matrices
        .windows(2)
        .map(|w| {
            ScaledMatrix2::from_mat(w[1])
                .mul(&ScaledMatrix2::from_mat(w[0]))
                .log_norm()
        })
        .collect();
    let max_pair_defect = pair_log_norms
        .iter()
        .enumerate()
        .map(|(j, &lp)| log_norms[j + 1] + log_norms[j] - lp)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_pair_defect >= 0.5 * h.ln() {
        return Err(CocycleError::HypothesisDiff {
            max_pair_defect,
            bound: 0.5 * h.ln(),
        });
    }

    let mut product = ScaledMatrix2::identity();
    for m in matrices {
        product.apply(m);
    }
    let middle: f64 = log_norms[1..n - 1].iter().sum();
    let pairs: f64 = pair_log_norms.iter().sum();
    let residual = (product.log_norm() + middle - pairs).abs();

    Ok(ApReport {
        residual,
        ratio: residual * h / n as f64,
        min_norm,
        max_pair_defect,
        n,
        h,
    })
}
