//! Hermitian tridiagonal spectra: certified Sturm counts, bisection
//! eigenvalues, window counting, the spectral window, and a Hölder probe for
//! the Lyapunov exponent in energy.
//!
//! The finite Jacobi block is gauged to a real symmetric tridiagonal matrix
//! (off-diagonals `-|a|`) by a diagonal unitary, which preserves eigenvalues
//! exactly. Counting works through Sturm sequences, so window counts are
//! certified integers rather than by-products of a dense solve.

mod jensen;

pub use jensen::{jensen_zero_count, JensenReport};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cocycle::{finite_lyapunov, CocycleParams, Variant};

#[derive(Debug, thiserror::Error)]
pub enum SpectrumError {
    #[error("tolerance must be positive, got {tol}")]
    InvalidTolerance { tol: f64 },
    #[error("f(z0) vanishes at every jittered center near {z0}")]
    CenterZero { z0: Complex64 },
    #[error("degenerate fit: {usable} usable radii (differences above the noise floor)")]
    DegenerateFit { usable: usize },
}

/// The symmetrized `n`-site Dirichlet block: real diagonal `v(x + j w)` and
/// non-negative off-diagonals `|a(x + (j+1) w)|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TridiagonalOperator {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Base phase the block was built at.
    pub x: f64,
    /// Cumulative phases of the diagonal gauge that symmetrized the block.
    pub phase_gauge: Vec<f64>,
}

/// Builds the symmetrized operator `H_n(x)` (the energy in `params` is
/// ignored: this is the operator, not the pencil).
pub fn build_symmetrized(params: &CocycleParams, x: f64, n: usize) -> TridiagonalOperator {
    assert!(n >= 1);
    let diag: Vec<f64> = (1..=n as i64).map(|j| params.potential_at(x, j)).collect();
    let mut offdiag = Vec::with_capacity(n - 1);
    let mut phase_gauge = vec![0.0f64];
    for j in 1..n as i64 {
        let a = params.weight_at(x, j + 1);
        offdiag.push(a.norm());
        let prev = *phase_gauge.last().expect("non-empty");
        phase_gauge.push(prev + a.arg());
    }
    TridiagonalOperator {
        diag,
        offdiag,
        x,
        phase_gauge,
    }
}

impl TridiagonalOperator {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    /// Interval certain to contain every eigenvalue.
    pub fn gershgorin_interval(&self) -> (f64, f64) {
        let max_off = self.offdiag.iter().cloned().fold(0.0, f64::max);
        let lo = self.diag.iter().cloned().fold(f64::INFINITY, f64::min) - 2.0 * max_off;
        let hi = self.diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 2.0 * max_off;
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `lambda` (Sturm pivot count).
    pub fn sturm_count(&self, lambda: f64) -> usize {
        let n = self.size();
        let max_off2 = self
            .offdiag
            .iter()
            .map(|c| c * c)
            .fold(0.0f64, f64::max)
            .max(1.0);
        let pivmin = f64::MIN_POSITIVE * max_off2;
        let mut count = 0;
        let mut d = 1.0f64;
        for j in 0..n {
            let off2 = if j == 0 {
                0.0
            } else {
                self.offdiag[j - 1] * self.offdiag[j - 1]
            };
            d = (self.diag[j] - lambda) - off2 / d;
            if d.abs() < pivmin {
                d = -pivmin;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Number of eigenvalues in the half-open window `[lo, hi)`.
    pub fn count_in_window(&self, lo: f64, hi: f64) -> usize {
        if hi <= lo {
            return 0;
        }
        self.sturm_count(hi) - self.sturm_count(lo)
    }

    /// All `n` eigenvalues by Sturm bisection, each bracketed to width
    /// `<= tol`. Exact zero off-diagonals split the matrix into independent
    /// blocks first.
    pub fn eigenvalues(&self, tol: f64) -> Result<Vec<f64>, SpectrumError> {
        if !(tol > 0.0) {
            return Err(SpectrumError::InvalidTolerance { tol });
        }
        // Split on exact zeros (Sturm sequences degenerate there).
        let mut blocks: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for (i, &c) in self.offdiag.iter().enumerate() {
            if c == 0.0 {
                blocks.push((start, i + 1));
                start = i + 1;
            }
        }
        blocks.push((start, self.size()));

        let mut all = Vec::with_capacity(self.size());
        for (lo_idx, hi_idx) in blocks {
            if lo_idx == hi_idx {
                continue;
            }
            let sub = TridiagonalOperator {
                diag: self.diag[lo_idx..hi_idx].to_vec(),
                offdiag: self.offdiag[lo_idx..hi_idx.saturating_sub(1)].to_vec(),
                x: self.x,
                phase_gauge: Vec::new(),
            };
            sub.bisect_all(tol, &mut all);
        }
        all.sort_by(f64::total_cmp);
        Ok(all)
    }

    fn bisect_all(&self, tol: f64, out: &mut Vec<f64>) {
        let n = self.size();
        let (glo, ghi) = self.gershgorin_interval();
        for k in 1..=n {
            let mut lo = glo;
            let mut hi = ghi + (ghi - glo).abs() * 1e-15 + 1e-300;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if self.sturm_count(mid) >= k {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if !(0.5 * (lo + hi) > lo && 0.5 * (lo + hi) < hi) {
                    break;
                }
            }
            out.push(0.5 * (lo + hi));
        }
    }
}

/// Certified count of eigenvalues of `H_n(x0)` in `[e0 - radius, e0 + radius)`.
pub fn eigen_count_window(
    params: &CocycleParams,
    x0: f64,
    e0: f64,
    radius: f64,
    n: usize,
) -> usize {
    assert!(radius > 0.0);
    let t = build_symmetrized(params, x0, n);
    t.count_in_window(e0 - radius, e0 + radius)
}

/// The eigenvalue-counting experiment: window radius `delta0^(1/h)`, count by
/// two Sturm evaluations, compared against the bound `13 n delta0`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WindowReport {
    pub count: usize,
    pub radius: f64,
    pub delta0: f64,
    pub holder_exponent: f64,
    /// `13 n delta0`.
    pub bound: f64,
    /// Whether the count respects the bound at these calibrated constants.
    pub holds: bool,
}

pub fn eigen_count_report(
    params: &CocycleParams,
    x0: f64,
    e0: f64,
    n: usize,
    delta0: f64,
    holder_exponent: f64,
) -> WindowReport {
    let radius = delta0.powf(1.0 / holder_exponent);
    let count = eigen_count_window(params, x0, e0, radius, n);
    let bound = 13.0 * n as f64 * delta0;
    WindowReport {
        count,
        radius,
        delta0,
        holder_exponent,
        bound,
        holds: (count as f64) <= bound,
    }
}

/// The energy window `[-2||a||_oo - ||v||_oo, 2||a||_oo + ||v||_oo]`
/// containing the spectrum (torus sup norms).
pub fn spectral_window(params: &CocycleParams) -> (f64, f64) {
    let half = 2.0 * params.weight.sup_torus() + params.potential.sup_torus();
    (-half, half)
}

/// Least-squares local Hölder exponent estimate for `L(E)` at `e_center`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HolderEstimate {
    /// Fitted slope of `log |L(E+r) - L(E)|` against `log r`.
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Per-radius fit residuals.
    pub residuals: Vec<f64>,
    /// Radii that survived the noise floor.
    pub radii_used: Vec<f64>,
}

/// Probes `|L_n(E + r) - L_n(E)|` over decreasing radii and fits the log-log
/// slope. Differences below `1e-12` are dropped; fewer than two usable radii
/// is a degenerate fit.
pub fn holder_probe(
    params: &CocycleParams,
    e_center: f64,
    radii: &[f64],
    n_ref: usize,
    grid_log2: u32,
) -> Result<HolderEstimate, SpectrumError> {
    assert!(n_ref >= 1024, "holder_probe requires n_ref >= 1024");
    for w in radii.windows(2) {
        assert!(w[1] < w[0], "radii must be strictly decreasing");
    }
    const NOISE_FLOOR: f64 = 1e-12;
    let at = |e: f64| {
        finite_lyapunov(
            &params.with_energy(Complex64::new(e, 0.0)),
            n_ref,
            grid_log2,
            Variant::Analytic,
        )
        .expect("analytic variant never skips")
        .value
    };
    let l0 = at(e_center);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut radii_used = Vec::new();
    for &r in radii {
        let diff = (at(e_center + r) - l0).abs();
        if diff > NOISE_FLOOR {
            xs.push(r.ln());
            ys.push(diff.ln());
            radii_used.push(r);
        }
    }
    if xs.len() < 2 {
        return Err(SpectrumError::DegenerateFit { usable: xs.len() });
    }
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    let residuals = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| y - (slope * x + intercept))
        .collect();
    Ok(HolderEstimate {
        exponent: slope,
        intercept,
        r_squared,
        residuals,
        radii_used,
    })
}

/// Plain least squares `(slope, intercept, r^2)`.
pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}
