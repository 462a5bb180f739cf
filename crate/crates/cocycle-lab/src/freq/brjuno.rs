//! Brjuno-Rüssmann gauge functions `Delta(t)` and the smallest deviations
//! `delta_0^n` they induce.
//!
//! Every family is normalized so that `Delta(1) = 1` and `Delta` is strictly
//! increasing on `[1, oo)`; the two `exp`-type families need an explicit
//! normalization for this (see [`DeltaFamily`]). The hypothesis checks
//! (H.1/H.2/H.3) and the Brjuno integral are evaluated numerically on grids
//! and reported, never assumed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::FreqError;

/// Gauge families from the Brjuno-Rüssmann literature, all normalized to
/// `Delta(1) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DeltaFamily {
    /// `t (log t + 1)^alpha`.
    PolyLog { alpha: f64 },
    /// `t^alpha`.
    Power { alpha: f64 },
    /// `exp((log t)^alpha)`.
    ExpLogPower { alpha: f64 },
    /// `exp(t^(1/alpha) - 1)`; the `-1` normalizes the value at `t = 1`.
    ExpRoot { alpha: f64 },
    /// `exp(t/(log t + alpha)^alpha - alpha^-alpha)`. Shifting the logarithm
    /// by `alpha` keeps the exponent increasing on all of `[1, oo)` while
    /// preserving the `t/(log t)^alpha` growth.
    ExpOverLog { alpha: f64 },
    /// Tabulated `(t, Delta(t))` pairs starting at `(1, 1)`, interpolated
    /// log-linearly in both coordinates.
    CustomTabulated { points: Vec<(f64, f64)> },
}

/// A Brjuno-Rüssmann function together with the frequency constant `C_omega`
/// of the lower bound `||k omega|| > C_omega / Delta(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrjunoFunction {
    #[serde(flatten)]
    pub family: DeltaFamily,
    pub c_omega: f64,
}

/// Which hypothesis from the deviation table applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    #[serde(rename = "H.1")]
    H1,
    #[serde(rename = "H.2")]
    H2,
    #[serde(rename = "H.3")]
    H3,
}

impl std::str::FromStr for Hypothesis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "H.1" | "h1" | "H1" => Ok(Hypothesis::H1),
            "H.2" | "h2" | "H2" => Ok(Hypothesis::H2),
            "H.3" | "h3" | "H3" => Ok(Hypothesis::H3),
            other => Err(format!("unknown hypothesis {other:?}")),
        }
    }
}

impl BrjunoFunction {
    pub fn new(family: DeltaFamily, c_omega: f64) -> Self {
        BrjunoFunction { family, c_omega }
    }

    /// `Delta(t)` for `t >= 1`.
    pub fn eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 1.0);
        match &self.family {
            DeltaFamily::PolyLog { alpha } => t * (t.ln() + 1.0).powf(*alpha),
            DeltaFamily::Power { alpha } => t.powf(*alpha),
            DeltaFamily::ExpLogPower { alpha } => t.ln().powf(*alpha).exp(),
            DeltaFamily::ExpRoot { alpha } => (t.powf(1.0 / alpha) - 1.0).exp(),
            DeltaFamily::ExpOverLog { alpha } => {
                (t / (t.ln() + alpha).powf(*alpha) - alpha.powf(-alpha)).exp()
            }
            DeltaFamily::CustomTabulated { points } => tabulated_eval(points, t),
        }
    }

    /// `log Delta(t)`, safe against overflow of the `exp`-type families.
    pub fn log_eval(&self, t: f64) -> f64 {
        debug_assert!(t >= 1.0);
        match &self.family {
            DeltaFamily::PolyLog { alpha } => t.ln() + alpha * (t.ln() + 1.0).ln(),
            DeltaFamily::Power { alpha } => alpha * t.ln(),
            DeltaFamily::ExpLogPower { alpha } => t.ln().powf(*alpha),
            DeltaFamily::ExpRoot { alpha } => t.powf(1.0 / alpha) - 1.0,
            DeltaFamily::ExpOverLog { alpha } => {
                t / (t.ln() + alpha).powf(*alpha) - alpha.powf(-alpha)
            }
            DeltaFamily::CustomTabulated { points } => tabulated_eval(points, t).ln(),
        }
    }

    /// `(log Delta)'(t) = Delta'(t)/Delta(t)`, analytic per family.
    pub fn log_derivative(&self, t: f64) -> f64 {
        debug_assert!(t >= 1.0);
        match &self.family {
            DeltaFamily::PolyLog { alpha } => {
                let l = t.ln() + 1.0;
                (l + alpha) / (t * l)
            }
            DeltaFamily::Power { alpha } => alpha / t,
            DeltaFamily::ExpLogPower { alpha } => {
                if t == 1.0 && *alpha > 1.0 {
                    return 0.0;
                }
                alpha * t.ln().powf(alpha - 1.0) / t
            }
            DeltaFamily::ExpRoot { alpha } => t.powf(1.0 / alpha - 1.0) / alpha,
            DeltaFamily::ExpOverLog { alpha } => {
                let l = t.ln() + alpha;
                t.ln() * l.powf(-alpha - 1.0)
            }
            DeltaFamily::CustomTabulated { points } => tabulated_slope(points, t) / t,
        }
    }

    /// `Delta'(t)`, analytic per family.
    pub fn derivative(&self, t: f64) -> f64 {
        debug_assert!(t >= 1.0);
        match &self.family {
            DeltaFamily::PolyLog { alpha } => {
                let l = t.ln() + 1.0;
                l.powf(alpha - 1.0) * (l + alpha)
            }
            DeltaFamily::Power { alpha } => alpha * t.powf(alpha - 1.0),
            DeltaFamily::ExpLogPower { alpha } => {
                if t == 1.0 && *alpha > 1.0 {
                    return 0.0;
                }
                self.eval(t) * alpha * t.ln().powf(alpha - 1.0) / t
            }
            DeltaFamily::ExpRoot { alpha } => {
                self.eval(t) * t.powf(1.0 / alpha - 1.0) / alpha
            }
            DeltaFamily::ExpOverLog { alpha } => {
                let l = t.ln() + alpha;
                self.eval(t) * t.ln() * l.powf(-alpha - 1.0)
            }
            DeltaFamily::CustomTabulated { points } => {
                let s = tabulated_slope(points, t);
                s * self.eval(t) / t
            }
        }
    }

    /// Inverse of `Delta` by monotone bisection with bracket doubling,
    /// to relative tolerance `1e-12` on the value.
    pub fn inverse(&self, y: f64) -> Result<f64, FreqError> {
        const REL_TOL: f64 = 1e-12;
        if y < 1.0 {
            return Err(FreqError::BracketFailure { y });
        }
        if y == 1.0 {
            return Ok(1.0);
        }
        // Bisection runs on log Delta so exp-type families cannot overflow.
        let ly = y.ln();
        let mut lo = 1.0f64;
        let mut hi = 2.0f64;
        while self.log_eval(hi) < ly {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(FreqError::NonMonotoneDelta { t: hi });
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = self.log_eval(mid);
            if (v - ly).abs() <= REL_TOL * ly.abs().max(REL_TOL) {
                return Ok(mid);
            }
            if v < ly {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= f64::EPSILON * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Smallest deviation `delta_0^n` per hypothesis:
    ///
    /// * H.1: `C_breve log Delta(n) / (Delta^-1(C_omega n))^(1-eps)`
    /// * H.2: `C_breve / (log Delta^-1(C_omega n))^(1-eps)`
    /// * H.3: `C_breve log(C_omega n) / (Delta^-1(C_omega n))^(1-eps)`
    ///
    /// The result is clamped below by the smallest positive `f64`; the second
    /// return flag records whether clamping occurred.
    pub fn delta_zero(
        &self,
        hypothesis: Hypothesis,
        n: u64,
        epsilon: f64,
        c_breve: f64,
    ) -> Result<(f64, bool), FreqError> {
        assert!(n >= 2, "delta_zero requires n >= 2");
        assert!(
            (0.0..0.5).contains(&epsilon),
            "epsilon must lie in [0, 0.5)"
        );
        let nf = n as f64;
        let inv = self.inverse(self.c_omega * nf)?;
        let denom = inv.powf(1.0 - epsilon);
        let raw = match hypothesis {
            Hypothesis::H1 => c_breve * self.log_eval(nf) / denom,
            Hypothesis::H2 => c_breve / inv.ln().powf(1.0 - epsilon),
            Hypothesis::H3 => c_breve * (self.c_omega * nf).ln() / denom,
        };
        if raw < f64::MIN_POSITIVE {
            Ok((f64::MIN_POSITIVE, true))
        } else {
            Ok((raw, false))
        }
    }

    /// `breve delta_0^n`: the deviation scale without the `C_breve` factor,
    /// used by the exponential-moment bound.
    pub fn breve_delta_zero(
        &self,
        hypothesis: Hypothesis,
        n: u64,
        epsilon: f64,
    ) -> Result<f64, FreqError> {
        Ok(self.delta_zero(hypothesis, n, epsilon, 1.0)?.0)
    }

    /// Tabulates `delta_0^n` over `ns` and records where the entries become
    /// non-increasing.
    pub fn delta_zero_table(
        &self,
        hypothesis: Hypothesis,
        ns: &[u64],
        epsilon: f64,
        c_breve: f64,
    ) -> Result<DeltaZeroTable, FreqError> {
        let mut entries = BTreeMap::new();
        let mut clamped = Vec::new();
        for &n in ns {
            let (v, cl) = self.delta_zero(hypothesis, n, epsilon, c_breve)?;
            if cl {
                clamped.push(n);
            }
            entries.insert(n, v);
        }
        let values: Vec<(u64, f64)> = entries.iter().map(|(&n, &v)| (n, v)).collect();
        let mut monotone_from = values.first().map(|&(n, _)| n);
        for w in values.windows(2) {
            if w[1].1 > w[0].1 {
                monotone_from = Some(w[1].0);
            }
        }
        Ok(DeltaZeroTable {
            hypothesis,
            epsilon,
            c_breve,
            c_omega: self.c_omega,
            entries,
            clamped,
            monotone_from,
        })
    }

    /// Evaluates hypotheses H.1, H.2 and H.3 on `t_grid` (H.3 monotonicity on
    /// the part of the grid at or beyond `t0`), together with the Brjuno
    /// integral `int_1^T log Delta / t^2`.
    pub fn check_hypotheses(
        &self,
        t_grid: &[f64],
        t0: f64,
    ) -> Result<HypothesisReport, FreqError> {
        const REL_TOL: f64 = 1e-9;
        // Malformed family: log Delta may never decrease along the grid.
        let mut prev: Option<f64> = None;
        for &t in t_grid {
            let v = self.log_eval(t);
            if let Some(pv) = prev {
                if v < pv - REL_TOL * pv.abs().max(1e-6) {
                    return Err(FreqError::NonMonotoneDelta { t });
                }
            }
            prev = Some(v);
        }

        let mut h1_derivative = true;
        let mut h1_lower = true;
        let mut h2_upper = true;
        for &t in t_grid {
            let ld = self.log_eval(t);
            // t Delta'(t) >= Delta(t) compared as t (log Delta)'(t) >= 1 so
            // the exp-type families stay finite.
            if t * self.log_derivative(t) < 1.0 - REL_TOL {
                h1_derivative = false;
            }
            if ld < (t * (t.ln() + 1.0)).ln() - REL_TOL {
                h1_lower = false;
            }
            // The H.2 envelope exp(t/log t) is +oo at t = 1.
            if t > 1.0 && ld > t / t.ln() + REL_TOL {
                h2_upper = false;
            }
        }
        let h1 = h1_derivative && h1_lower;

        let tail_grid: Vec<f64> = t_grid.iter().copied().filter(|&t| t >= t0).collect();
        let mut h3_monotone = true;
        for w in tail_grid.windows(2) {
            let a = self.log_eval(w[0]) / w[0];
            let b = self.log_eval(w[1]) / w[1];
            if b > a + REL_TOL * a.abs().max(1.0) {
                h3_monotone = false;
            }
        }

        let integral = self.brjuno_integral(1e8, 4096);

        Ok(HypothesisReport {
            h1,
            h1_derivative,
            h1_lower,
            h2: h1 && h2_upper,
            h2_upper,
            h3: h1 && h3_monotone,
            h3_monotone,
            t0,
            brjuno_integral: integral.0,
            tail_estimate: integral.1,
            divergent: integral.2,
        })
    }

    /// Simpson quadrature of `int_1^T log Delta(t)/t^2 dt` in log coordinates,
    /// plus a geometric tail extrapolation and a divergence flag taken from
    /// the per-decade contributions.
    pub fn brjuno_integral(&self, t_max: f64, panels: usize) -> (f64, f64, bool) {
        let u_max = t_max.ln();
        let integrand = |u: f64| {
            let t = u.exp();
            self.log_eval(t) / t
        };
        let h = u_max / panels as f64;
        let mut total = 0.0;
        let mut decades: Vec<f64> = Vec::new();
        let mut decade_acc = 0.0;
        let mut next_decade = 10f64.ln();
        for i in 0..panels {
            let a = i as f64 * h;
            let b = a + h;
            let piece = (h / 6.0) * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b));
            total += piece;
            decade_acc += piece;
            if b >= next_decade {
                decades.push(decade_acc);
                decade_acc = 0.0;
                next_decade += 10f64.ln();
            }
        }
        if decade_acc > 0.0 {
            decades.push(decade_acc);
        }
        let (tail, divergent) = match decades.len() {
            0 | 1 => (0.0, false),
            n => {
                let last = decades[n - 1];
                let prev = decades[n - 2];
                if prev <= 0.0 {
                    (0.0, false)
                } else {
                    let ratio = last / prev;
                    if ratio >= 0.9 {
                        (f64::INFINITY, true)
                    } else {
                        (last * ratio / (1.0 - ratio), false)
                    }
                }
            }
        };
        (total, tail, divergent)
    }
}

fn tabulated_eval(points: &[(f64, f64)], t: f64) -> f64 {
    assert!(
        points.first().map(|&(t0, d0)| t0 == 1.0 && d0 == 1.0) == Some(true),
        "tabulated family must start at (1, 1)"
    );
    let lt = t.ln();
    let idx = points.partition_point(|&(ti, _)| ti.ln() <= lt);
    let (i, j) = if idx == 0 {
        (0, 1)
    } else if idx >= points.len() {
        (points.len() - 2, points.len() - 1)
    } else {
        (idx - 1, idx)
    };
    let (t1, d1) = points[i];
    let (t2, d2) = points[j];
    let slope = (d2.ln() - d1.ln()) / (t2.ln() - t1.ln());
    (d1.ln() + slope * (lt - t1.ln())).exp()
}

fn tabulated_slope(points: &[(f64, f64)], t: f64) -> f64 {
    let lt = t.ln();
    let idx = points.partition_point(|&(ti, _)| ti.ln() <= lt);
    let (i, j) = if idx == 0 {
        (0, 1)
    } else if idx >= points.len() {
        (points.len() - 2, points.len() - 1)
    } else {
        (idx - 1, idx)
    };
    let (t1, d1) = points[i];
    let (t2, d2) = points[j];
    (d2.ln() - d1.ln()) / (t2.ln() - t1.ln())
}

/// Outcome of the numeric hypothesis checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub h1: bool,
    pub h1_derivative: bool,
    pub h1_lower: bool,
    pub h2: bool,
    pub h2_upper: bool,
    pub h3: bool,
    pub h3_monotone: bool,
    /// Lower end of the interval on which H.3 monotonicity was tested.
    pub t0: f64,
    /// `int_1^T log Delta / t^2` at the default horizon.
    pub brjuno_integral: f64,
    /// Geometric extrapolation of the remaining tail (infinite if divergent).
    pub tail_estimate: f64,
    /// Per-decade contributions stopped decaying: the integral looks divergent.
    pub divergent: bool,
}

/// Tabulated smallest deviations for one hypothesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaZeroTable {
    pub hypothesis: Hypothesis,
    pub epsilon: f64,
    pub c_breve: f64,
    pub c_omega: f64,
    pub entries: BTreeMap<u64, f64>,
    /// Scales where the positive floor clamp was applied.
    pub clamped: Vec<u64>,
    /// Smallest tabulated `n` from which the entries are non-increasing.
    pub monotone_from: Option<u64>,
}
