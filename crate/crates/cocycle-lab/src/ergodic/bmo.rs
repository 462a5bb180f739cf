//! Dyadic BMO-norm estimation and the John-Nirenberg tail fit.

use serde::{Deserialize, Serialize};

use crate::spectrum::least_squares;

/// Lower bound for the BMO norm from the dyadic interval family.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BmoReport {
    /// Max over dyadic intervals of the interval mean of `|f - <f>_I|`.
    pub norm: f64,
    /// Dyadic depth at which the max was attained (0 = whole torus).
    pub depth: u32,
}

/// Max over all dyadic intervals (depths `0 ..= max_depth`, all translates)
/// of the mean oscillation of `samples`, which must hold the function values
/// on the `2^max_depth` dyadic grid.
///
/// This is a lower bound for the true BMO norm (the sup over all intervals).
pub fn bmo_estimate(samples: &[f64], max_depth: u32) -> BmoReport {
    assert!(max_depth >= 8, "bmo_estimate requires max_depth >= 8");
    assert_eq!(
        samples.len(),
        1usize << max_depth,
        "samples must fill the dyadic grid"
    );
    let n = samples.len();
    // Prefix sums give interval means in O(1).
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0f64);
    for &v in samples {
        prefix.push(prefix.last().unwrap() + v);
    }
    let mut best = 0.0f64;
    let mut best_depth = 0u32;
    for depth in 0..=max_depth {
        let len = n >> depth;
        for block in 0..(1usize << depth) {
            let lo = block * len;
            let hi = lo + len;
            let mean = (prefix[hi] - prefix[lo]) / len as f64;
            let osc = samples[lo..hi]
                .iter()
                .map(|v| (v - mean).abs())
                .sum::<f64>()
                / len as f64;
            if osc > best {
                best = osc;
                best_depth = depth;
            }
        }
    }
    BmoReport {
        norm: best,
        depth: best_depth,
    }
}

/// Fit of the John-Nirenberg tail
/// `mes{ |f - <f>| > gamma } <= C exp(-c gamma / ||f||_BMO)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JohnNirenbergFit {
    /// Prefactor `C` (from the fitted intercept).
    pub c_big: f64,
    /// Decay rate `c` (minus the fitted slope in `gamma / BMO`).
    pub c_small: f64,
    pub r_squared: f64,
    /// `(gamma, measure)` pairs used by the fit.
    pub points: Vec<(f64, f64)>,
}

/// Fits the John-Nirenberg form to the empirical tail of `samples`.
///
/// Measures are exact sample fractions on a gamma grid spanning the observed
/// deviations; only strictly positive tail fractions enter the fit.
pub fn john_nirenberg_fit(samples: &[f64], bmo_norm: f64, gammas: usize) -> JohnNirenbergFit {
    assert!(gammas >= 2);
    assert!(bmo_norm > 0.0, "BMO norm must be positive to fit the tail");
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let devs: Vec<f64> = samples.iter().map(|v| (v - mean).abs()).collect();
    let max_dev = devs.iter().cloned().fold(0.0, f64::max);
    let mut points = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 1..=gammas {
        let gamma = max_dev * k as f64 / (gammas + 1) as f64;
        let frac = devs.iter().filter(|&&d| d > gamma).count() as f64 / devs.len() as f64;
        if frac > 0.0 {
            points.push((gamma, frac));
            xs.push(gamma / bmo_norm);
            ys.push(frac.ln());
        }
    }
    let (slope, intercept, r_squared) = least_squares(&xs, &ys);
    JohnNirenbergFit {
        c_big: intercept.exp(),
        c_small: -slope,
        r_squared,
        points,
    }
}
