//! Birkhoff sums, the `F_{q,zeta}` orbit-log machinery, exceptional-set
//! measures and the large-deviation experiment harness.

mod bmo;
mod sampler;

pub use bmo::{bmo_estimate, john_nirenberg_fit, BmoReport, JohnNirenbergFit};
pub use sampler::{
    clopper_pearson, measure_estimate, measure_from_hits, MeasureEstimate, Sampler, SamplerKind,
};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticObservable;
use crate::cocycle::{finite_lyapunov, transfer_product, CocycleParams, Variant};
use crate::determinant::{det_recurrence, normalized_dets};
use crate::freq::Frequency;
use crate::spectrum::least_squares;

#[derive(Debug, thiserror::Error)]
pub enum ErgodicError {
    #[error("orbit point k = {k} hits zeta (distance {distance:e})")]
    OrbitHit { k: usize, distance: f64 },
    #[error("delta grid must be strictly increasing")]
    DeltaGridNotIncreasing,
    #[error("every delta yielded zero hits; the sampler cannot resolve the exceptional sets")]
    AllMassBelowResolution,
}

/// `|sum_{k=1..n} u(x + k w) - n <u>|` for a real-valued observable.
pub fn birkhoff_deviation(u: &AnalyticObservable, x: f64, n: usize, omega: f64) -> f64 {
    birkhoff_deviation_fn(|y| u.eval_torus(y).re, u.mean().re, x, n, omega)
}

/// Same with an arbitrary sampled observable and known mean.
pub fn birkhoff_deviation_fn(
    u: impl Fn(f64) -> f64,
    mean: f64,
    x: f64,
    n: usize,
    omega: f64,
) -> f64 {
    let sum: f64 = (1..=n).map(|k| u(x + k as f64 * omega)).sum();
    (sum - n as f64 * mean).abs()
}

/// `I(zeta) = int_0^1 log|y - zeta| dy` in closed form.
///
/// The antiderivative `(y - zeta) log(y - zeta) - y` along `[0, 1]` gives
/// `Re[(1 - zeta) log(1 - zeta) + zeta log(-zeta)] - 1` with the principal
/// branch (for real `zeta` in `(0, 1)` this reduces to the familiar
/// `t log t - t` pieces); limits at `zeta = 0, 1` are removable. Note the
/// `log(-zeta)`: the path starts at `y = 0`, so the lower endpoint
/// contributes `(-zeta) log(-zeta)`.
pub fn log_distance_integral(zeta: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let term = |w: Complex64| {
        if w.norm() == 0.0 {
            0.0
        } else {
            (w * w.ln()).re
        }
    };
    term(one - zeta) - term(-zeta) - 1.0
}

/// Right-hand side terms of the `F_{l q_s, zeta}` bound
/// `C l log q_s + |log D(x - xi, -w, l q_s)| + 2 l log q_{s+1}`.
///
/// `D` is evaluated in its two-sided form (distance of the orbit to the
/// integers): the one-sided fractional-part minimum misses orbit points that
/// approach `xi` from below, and no constant `C` can absorb those.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OrbitLogBound {
    /// Convergent index `s` with `q_s <= q < q_{s+1}`.
    pub s: usize,
    pub q_s: u64,
    /// Multiplier `l` with `q = l q_s`.
    pub l: u64,
    /// `l log q_s` (the coefficient of the constant `C`).
    pub c_coefficient: f64,
    /// `|log D(x - xi, -w, l q_s)|`.
    pub orbit_min_log: f64,
    /// `2 l log q_{s+1}`.
    pub tail: f64,
}

impl OrbitLogBound {
    /// The full right-hand side at a chosen constant `C`.
    pub fn rhs(&self, c: f64) -> f64 {
        c * self.c_coefficient + self.orbit_min_log + self.tail
    }
}

/// `F_{q, zeta}(x) = sum_{0 <= k < q} log |{x + k w} - zeta|` together with
/// `I(zeta)` and, when `q` is a multiple of a stored denominator, the
/// orbit-log bound terms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FqReport {
    pub f: f64,
    pub i: f64,
    /// `|F - q I|`.
    pub deviation: f64,
    pub bound: Option<OrbitLogBound>,
}

/// Evaluates `F_{q, zeta}` and its centered deviation.
///
/// Fails with [`ErgodicError::OrbitHit`] when the orbit meets `zeta` closer
/// than the floor distance.
pub fn fq_zeta(
    x: f64,
    zeta: Complex64,
    q: u64,
    freq: &Frequency,
) -> Result<FqReport, ErgodicError> {
    const FLOOR: f64 = 1e-300;
    let omega = freq.value_f64();
    let mut f = 0.0;
    for k in 0..q {
        let pos = (x + k as f64 * omega).rem_euclid(1.0);
        let dist = (Complex64::new(pos, 0.0) - zeta).norm();
        if dist < FLOOR {
            return Err(ErgodicError::OrbitHit {
                k: k as usize,
                distance: dist,
            });
        }
        f += dist.ln();
    }
    let i = log_distance_integral(zeta);
    let deviation = (f - q as f64 * i).abs();

    let qs_list = freq.denominators_f64();
    let mut bound = None;
    if let Some(s) = freq.scale_index(q) {
        let q_s = qs_list[s - 1] as u64;
        if q % q_s == 0 && s < qs_list.len() {
            let l = q / q_s;
            let d = crate::freq::orbit_min_dist(x - zeta.re, -omega, q as usize);
            if d > 0.0 {
                bound = Some(OrbitLogBound {
                    s,
                    q_s,
                    l,
                    c_coefficient: l as f64 * (q_s as f64).ln(),
                    orbit_min_log: d.ln().abs(),
                    tail: 2.0 * l as f64 * qs_list[s].ln(),
                });
            }
        }
    }
    Ok(FqReport {
        f,
        i,
        deviation,
        bound,
    })
}

/// Quadrature estimate of `int_0^1 exp(sigma |F_{n,zeta}(x) - n I(zeta)|) dx`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExpMomentReport {
    pub value: f64,
    /// Some summand exceeded the floating range; `value` is `+inf`.
    pub overflowed: bool,
    pub sigma: f64,
    pub n: u64,
}

/// Exponential moment of the centered orbit-log sums. `sigma = 0` and
/// `n = 0` return exactly 1; orbit hits skip the offending grid point (the
/// integrand is integrable there) and are counted.
pub fn exp_moment(
    zeta: Complex64,
    n: u64,
    freq: &Frequency,
    sigma: f64,
    grid_log2: u32,
) -> ExpMomentReport {
    assert!(sigma >= 0.0);
    assert!(grid_log2 >= 10, "exp_moment requires a grid of at least 2^10");
    if sigma == 0.0 || n == 0 {
        return ExpMomentReport {
            value: 1.0,
            overflowed: false,
            sigma,
            n,
        };
    }
    let g = 1usize << grid_log2;
    let values: Vec<Option<f64>> = (0..g)
        .into_par_iter()
        .map(|idx| {
            let x = (idx as f64 + 0.5) / g as f64;
            fq_zeta(x, zeta, n, freq).ok().map(|r| sigma * r.deviation)
        })
        .collect();
    let mut sum = 0.0f64;
    let mut used = 0usize;
    let mut overflowed = false;
    for v in values.into_iter().flatten() {
        if v > 700.0 {
            overflowed = true;
        }
        sum += v.exp();
        used += 1;
    }
    ExpMomentReport {
        value: if overflowed { f64::INFINITY } else { sum / used as f64 },
        overflowed,
        sigma,
        n,
    }
}

/// Which deviation statistic an LDT experiment observes.
#[derive(Debug, Clone)]
pub enum LdtObservable {
    /// `sum_{k=1..n} u(x + k w)` for a real trig-polynomial observable.
    Birkhoff(AnalyticObservable),
    /// `log ||M_n^variant(x)||`.
    Matrix(Variant),
    /// `log |f_n^a(x)|`.
    Determinant,
}

impl LdtObservable {
    fn describe(&self) -> &'static str {
        match self {
            LdtObservable::Birkhoff(_) => "birkhoff",
            LdtObservable::Matrix(_) => "matrix",
            LdtObservable::Determinant => "determinant",
        }
    }

    /// The decay form the source theorems predict for this observable.
    fn predicted_decay(&self) -> &'static str {
        match self {
            LdtObservable::Birkhoff(_) => "exp(-c delta n)",
            LdtObservable::Matrix(_) => "exp(-c1 delta n) + exp(-c2 delta^2 n)",
            LdtObservable::Determinant => "exp(-c delta / delta_0^n)",
        }
    }
}

/// How the deviation statistic is centered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// Subtract the empirical mean of the sampled observable.
    EmpiricalMean,
    /// Subtract `n L_n` (matching variant) or `n <u>`.
    #[serde(rename = "nL")]
    LyapunovScale,
}

impl std::str::FromStr for Centering {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "empirical-mean" => Ok(Centering::EmpiricalMean),
            "nL" | "nl" => Ok(Centering::LyapunovScale),
            other => Err(format!("unknown centering {other:?}")),
        }
    }
}

/// Per-`(n, delta)` exceptional-set measures with the decay fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeviationReport {
    pub observable: String,
    pub n: usize,
    pub centering: Centering,
    /// The center that was subtracted.
    pub center: f64,
    pub deltas: Vec<f64>,
    pub measures: Vec<MeasureEstimate>,
    /// Per-delta flag: zero hits (excluded from the fit).
    pub censored: Vec<bool>,
    pub sampler: Sampler,
    /// Least-squares fit of `log measure` against `delta` over the
    /// uncensored points (needs at least two).
    pub fit: Option<DecayFit>,
    /// Every delta yielded zero hits.
    pub all_below_resolution: bool,
    /// Sample points skipped by the near-zero-weight rule.
    pub skipped_points: usize,
    /// Decay form predicted by the source theorems.
    pub predicted_decay: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Runs one large-deviation experiment: estimates
/// `mes{ x : |obs(x) - center| > n delta }` for every `delta` in the grid,
/// then fits the decay over the strictly positive measures.
///
/// Measures are nested by construction (one observable evaluation per
/// sample, thresholded across the whole grid).
pub fn ldt_experiment(
    observable: &LdtObservable,
    params: &CocycleParams,
    n: usize,
    delta_grid: &[f64],
    sampler: &Sampler,
    centering: Centering,
) -> Result<DeviationReport, ErgodicError> {
    const LOG_FLOOR: f64 = -700.0;
    if delta_grid.windows(2).any(|w| w[1] <= w[0]) || delta_grid.is_empty() {
        return Err(ErgodicError::DeltaGridNotIncreasing);
    }
    if matches!(observable, LdtObservable::Determinant) {
        assert!(n >= 8, "determinant LDT requires n >= 8");
    }
    let omega = params.omega_f64();
    let xs = sampler.points();
    let values: Vec<Option<f64>> = xs
        .par_iter()
        .map(|&x| match observable {
            LdtObservable::Birkhoff(u) => Some(
                (1..=n).map(|k| u.eval_torus(x + k as f64 * omega).re).sum::<f64>(),
            ),
            LdtObservable::Matrix(variant) => transfer_product(params, x, n, *variant)
                .ok()
                .map(|m| m.log_norm()),
            LdtObservable::Determinant => {
                Some(det_recurrence(params, x, n).last().log_mag.max(LOG_FLOOR))
            }
        })
        .collect();
    let skipped_points = values.iter().filter(|v| v.is_none()).count();
    let kept: Vec<f64> = values.into_iter().flatten().collect();

    let center = match centering {
        Centering::EmpiricalMean => kept.iter().sum::<f64>() / kept.len() as f64,
        Centering::LyapunovScale => match observable {
            LdtObservable::Birkhoff(u) => n as f64 * u.mean().re,
            LdtObservable::Matrix(variant) => {
                n as f64
                    * finite_lyapunov(params, n, 10, *variant)
                        .expect("reference Lyapunov grid")
                        .value
            }
            LdtObservable::Determinant => {
                n as f64
                    * finite_lyapunov(params, n, 10, Variant::Analytic)
                        .expect("analytic variant never skips")
                        .value
            }
        },
    };

    let mut measures = Vec::with_capacity(delta_grid.len());
    let mut censored = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let threshold = n as f64 * delta;
        let hits = kept.iter().filter(|&&v| (v - center).abs() > threshold).count();
        measures.push(measure_from_hits(hits, kept.len(), sampler.kind));
        censored.push(hits == 0);
    }

    let mut xs_fit = Vec::new();
    let mut ys_fit = Vec::new();
    for ((&delta, m), &c) in delta_grid.iter().zip(&measures).zip(&censored) {
        if !c {
            xs_fit.push(delta);
            ys_fit.push(m.estimate.ln());
        }
    }
    let fit = if xs_fit.len() >= 2 {
        let (slope, intercept, r_squared) = least_squares(&xs_fit, &ys_fit);
        Some(DecayFit {
            slope,
            intercept,
            r_squared,
        })
    } else {
        None
    };

    Ok(DeviationReport {
        observable: observable.describe().to_string(),
        n,
        centering,
        center,
        deltas: delta_grid.to_vec(),
        measures,
        censored: censored.clone(),
        sampler: *sampler,
        fit,
        all_below_resolution: censored.iter().all(|&c| c),
        skipped_points,
        predicted_decay: observable.predicted_decay().to_string(),
    })
}

/// Small-determinant measure experiment: `mes{ x : |f_l(x)| <= exp(-theta) }`
/// for the weight-normalized determinant, compared with `exp(-l)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SmallDetReport {
    pub measure: MeasureEstimate,
    pub threshold_exponent: f64,
    /// The comparison level `exp(-l)`.
    pub reference: f64,
}

pub fn small_det_measure(
    params: &CocycleParams,
    l: usize,
    threshold_exponent: f64,
    sampler: &Sampler,
) -> SmallDetReport {
    assert!(l >= 4, "small_det_measure requires l >= 4");
    let pts = sampler.points();
    let hits: usize = pts
        .par_iter()
        .map(|&x| match normalized_dets(params, x, l) {
            Ok((plain, _)) => usize::from(plain.log_mag <= -threshold_exponent),
            Err(_) => 0,
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    SmallDetReport {
        measure: measure_from_hits(hits, pts.len(), sampler.kind),
        threshold_exponent,
        reference: (-(l as f64)).exp(),
    }
}
