//! Continued-fraction and Brjuno-Rüssmann frequency arithmetic.
//!
//! A [`Frequency`] couples a certified rational interval for an irrational
//! rotation number with its partial quotients and exact integer convergents
//! `(p_s, q_s)`. Expansion runs on the interval, so a partial quotient is only
//! emitted when both endpoints agree on it; disagreement surfaces as
//! [`FreqError::PrecisionExhausted`] instead of silently corrupted convergents.

mod brjuno;
pub mod precision;

pub use brjuno::{
    BrjunoFunction, DeltaFamily, DeltaZeroTable, Hypothesis, HypothesisReport,
};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use precision::RealInterval;

/// Default number of certified decimal digits carried by named constants
/// (about 266 bits).
pub const DEFAULT_DIGITS: usize = 80;

#[derive(Debug, thiserror::Error)]
pub enum FreqError {
    #[error("omega is not a decimal in (0,1) or a named constant: {0}")]
    InvalidOmega(String),
    #[error("rational detected: remainder fell below the precision floor at depth {depth}")]
    RationalDetected { depth: usize },
    #[error("precision exhausted: only {reached} of {requested} partial quotients are certified at {digits} digits")]
    PrecisionExhausted {
        reached: usize,
        requested: usize,
        digits: usize,
    },
    #[error("at least {needed} convergents are required, only {got} available")]
    InsufficientDepth { needed: usize, got: usize },
    #[error("delta family is not strictly increasing near t = {t}")]
    NonMonotoneDelta { t: f64 },
    #[error("no bracket: y = {y} is below Delta(1) = 1")]
    BracketFailure { y: f64 },
}

/// Where an expansion input comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaSpec {
    /// `(sqrt 5 - 1)/2`.
    Golden,
    /// `sqrt 2 - 1`.
    Silver,
    /// `pi - 3`.
    PiMinus3,
    /// A decimal truncation `0.d1 d2 ...` of the target number.
    Decimal(String),
}

impl std::str::FromStr for OmegaSpec {
    type Err = FreqError;
    fn from_str(s: &str) -> Result<Self, FreqError> {
        Ok(match s {
            "golden" => OmegaSpec::Golden,
            "silver" => OmegaSpec::Silver,
            "pi-3" => OmegaSpec::PiMinus3,
            other => OmegaSpec::Decimal(other.to_string()),
        })
    }
}

/// An irrational rotation number with certified continued-fraction data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Frequency {
    /// Decimal expansion of the interval midpoint at `digits` precision.
    pub value: String,
    /// Number of certified decimal digits behind the expansion.
    pub digits: usize,
    /// Partial quotients `a_1 .. a_S`.
    pub partial_quotients: Vec<u64>,
    /// Convergents `(p_s, q_s)`, `s = 1 .. S`, as exact integers
    /// (serialized as decimal strings).
    #[serde(with = "convergent_strings")]
    pub convergents: Vec<(BigInt, BigInt)>,
    #[serde(skip)]
    interval: Option<RealInterval>,
}

mod convergent_strings {
    use super::*;
    use serde::de::Error;

    pub fn serialize<S: serde::Serializer>(
        v: &[(BigInt, BigInt)],
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        let strings: Vec<(String, String)> =
            v.iter().map(|(p, q)| (p.to_string(), q.to_string())).collect();
        serde::Serialize::serialize(&strings, ser)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        de: D,
    ) -> Result<Vec<(BigInt, BigInt)>, D::Error> {
        let strings: Vec<(String, String)> = serde::Deserialize::deserialize(de)?;
        strings
            .into_iter()
            .map(|(p, q)| {
                Ok((
                    p.parse().map_err(|_| D::Error::custom("bad integer"))?,
                    q.parse().map_err(|_| D::Error::custom("bad integer"))?,
                ))
            })
            .collect()
    }
}

/// Expands `omega` into `depth` certified partial quotients.
///
/// Named constants are generated at [`DEFAULT_DIGITS`] decimals; use
/// [`continued_fraction_with_digits`] to control the precision.
pub fn continued_fraction(omega: &OmegaSpec, depth: usize) -> Result<Frequency, FreqError> {
    continued_fraction_with_digits(omega, depth, DEFAULT_DIGITS)
}

/// Expands `omega` into `depth` certified partial quotients at `digits`
/// decimal digits of working precision.
pub fn continued_fraction_with_digits(
    omega: &OmegaSpec,
    depth: usize,
    digits: usize,
) -> Result<Frequency, FreqError> {
    assert!(depth >= 1, "depth must be at least 1");
    let interval = match omega {
        OmegaSpec::Golden => precision::golden_interval(digits),
        OmegaSpec::Silver => precision::silver_interval(digits),
        OmegaSpec::PiMinus3 => precision::pi_minus_3_interval(digits),
        OmegaSpec::Decimal(text) => precision::parse_decimal_interval(text)?,
    };
    expand_interval(interval, depth, digits)
}

fn expand_interval(
    interval: RealInterval,
    depth: usize,
    digits: usize,
) -> Result<Frequency, FreqError> {
    let one = BigRational::one();
    if interval.lo <= BigRational::zero() || interval.hi >= one {
        return Err(FreqError::InvalidOmega(format!(
            "interval [{}, {}] is not inside (0,1)",
            interval.lo, interval.hi
        )));
    }

    let mut quotients = Vec::with_capacity(depth);
    let mut convergents = Vec::with_capacity(depth);
    // p and q recurrences seeded for a_0 = 0: (p_{-1}, p_0) = (1, 0),
    // (q_{-1}, q_0) = (0, 1).
    let (mut p_prev, mut p_cur) = (BigInt::one(), BigInt::zero());
    let (mut q_prev, mut q_cur) = (BigInt::zero(), BigInt::one());

    // Current remainder interval, always inside (0, 1).
    let mut lo = interval.lo.clone();
    let mut hi = interval.hi.clone();

    for s in 0..depth {
        if lo.is_zero() {
            // The interval reaches a terminating rational: the input cannot be
            // distinguished from a rational at this precision.
            return Err(FreqError::RationalDetected { depth: s });
        }
        // 1/x maps [lo, hi] to [1/hi, 1/lo].
        let inv_lo = hi.recip();
        let inv_hi = lo.recip();
        let a_lo = inv_lo.floor().to_integer();
        let a_hi = inv_hi.floor().to_integer();
        if a_lo != a_hi {
            return Err(FreqError::PrecisionExhausted {
                reached: s,
                requested: depth,
                digits,
            });
        }
        let a = a_lo;
        let a_u64 = a.to_u64().ok_or(FreqError::PrecisionExhausted {
            reached: s,
            requested: depth,
            digits,
        })?;
        quotients.push(a_u64);

        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        convergents.push((p_next.clone(), q_next.clone()));
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);

        let a_rat = BigRational::from_integer(a);
        // New remainder: 1/x - a on [inv_lo, inv_hi].
        let new_lo = &inv_lo - &a_rat;
        let new_hi = &inv_hi - &a_rat;
        lo = new_lo;
        hi = new_hi;
    }

    Ok(Frequency {
        value: interval.to_decimal_string(digits),
        digits,
        partial_quotients: quotients,
        convergents,
        interval: Some(interval),
    })
}

impl Frequency {
    /// Builds a synthetic frequency from explicit convergents (tests and
    /// tabulated inputs). No interval is attached, so exact-arithmetic
    /// operations are unavailable.
    pub fn from_convergents(convergents: Vec<(i64, i64)>) -> Frequency {
        let convergents: Vec<(BigInt, BigInt)> = convergents
            .into_iter()
            .map(|(p, q)| (BigInt::from(p), BigInt::from(q)))
            .collect();
        let value = if let Some((p, q)) = convergents.last() {
            let r = BigRational::new(p.clone(), q.clone());
            format!("{:.17}", precision::rational_to_f64(&r))
        } else {
            "0.".to_string()
        };
        Frequency {
            value,
            digits: 0,
            partial_quotients: Vec::new(),
            convergents,
            interval: None,
        }
    }

    /// The rotation number as an `f64` (interval midpoint).
    pub fn value_f64(&self) -> f64 {
        match &self.interval {
            Some(iv) => iv.to_f64(),
            None => {
                let (p, q) = self.convergents.last().expect("non-empty convergents");
                precision::rational_to_f64(&BigRational::new(p.clone(), q.clone()))
            }
        }
    }

    /// Certified interval, when the frequency was produced by expansion.
    pub fn interval(&self) -> Option<&RealInterval> {
        self.interval.as_ref()
    }

    /// Denominators `q_s` as `f64`.
    pub fn denominators_f64(&self) -> Vec<f64> {
        self.convergents
            .iter()
            .map(|(_, q)| precision::rational_to_f64(&BigRational::from_integer(q.clone())))
            .collect()
    }

    /// Checks the two-sided convergent inequality
    /// `1/(q_s(q_{s+1}+q_s)) < |omega - p_s/q_s| < 1/(q_s q_{s+1})`
    /// in exact arithmetic for every stored `s` with a stored successor.
    ///
    /// Returns the number of convergents verified.
    pub fn verify_sandwich(&self) -> Result<usize, FreqError> {
        let iv = self.interval.as_ref().ok_or(FreqError::InsufficientDepth {
            needed: 1,
            got: 0,
        })?;
        let mut checked = 0;
        for s in 0..self.convergents.len().saturating_sub(1) {
            let (p, q) = &self.convergents[s];
            let (_, q_next) = &self.convergents[s + 1];
            let approx = BigRational::new(p.clone(), q.clone());
            // |omega - p/q| over the interval: both endpoints give bounds.
            let d_lo = (&iv.lo - &approx).abs();
            let d_hi = (&iv.hi - &approx).abs();
            let (d_min, d_max) = if d_lo <= d_hi { (d_lo, d_hi) } else { (d_hi, d_lo) };
            let upper = BigRational::new(BigInt::one(), q * q_next);
            let lower = BigRational::new(BigInt::one(), q * (q_next + q));
            if !(d_min > lower && d_max < upper) {
                return Err(FreqError::PrecisionExhausted {
                    reached: s,
                    requested: self.convergents.len(),
                    digits: self.digits,
                });
            }
            checked += 1;
        }
        Ok(checked)
    }

    /// Largest `s` with `q_s <= n`, if any (1-based like the convergent list).
    pub fn scale_index(&self, n: u64) -> Option<usize> {
        let n = BigInt::from(n);
        let mut found = None;
        for (i, (_, q)) in self.convergents.iter().enumerate() {
            if *q <= n {
                found = Some(i + 1);
            }
        }
        found
    }
}

/// Truncated estimates of the exponential growth exponent
/// `beta(omega) = limsup log q_{s+1} / q_s`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BetaEstimate {
    /// Max of `log q_{s+1} / q_s` over all stored `s`.
    pub max: f64,
    /// The value at the deepest stored `s`.
    pub tail: f64,
}

/// Upper proxy for `beta(omega)` truncated at the available depth.
pub fn beta_estimate(freq: &Frequency) -> Result<BetaEstimate, FreqError> {
    let q = freq.denominators_f64();
    if q.len() < 3 {
        return Err(FreqError::InsufficientDepth {
            needed: 3,
            got: q.len(),
        });
    }
    let ratios: Vec<f64> = q.windows(2).map(|w| w[1].ln() / w[0]).collect();
    Ok(BetaEstimate {
        max: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        tail: *ratios.last().expect("at least two denominators"),
    })
}

/// `D(x, omega, n) = min_{0 <= k < n} {x + k omega}` with the fractional part
/// taken in `[0, 1)`.
pub fn orbit_min(x: f64, omega: f64, n: usize) -> f64 {
    assert!(n >= 1, "orbit_min requires n >= 1");
    (0..n)
        .map(|k| (x + k as f64 * omega).rem_euclid(1.0))
        .fold(f64::INFINITY, f64::min)
}

/// Two-sided variant of [`orbit_min`]: the distance of the orbit to the
/// nearest integer, `min_{0 <= k < n} ||x + k omega||`. Near-hits are seen
/// from both sides, which is what orbit-log lower bounds need.
pub fn orbit_min_dist(x: f64, omega: f64, n: usize) -> f64 {
    assert!(n >= 1, "orbit_min_dist requires n >= 1");
    (0..n)
        .map(|k| dist_to_integer(x + k as f64 * omega))
        .fold(f64::INFINITY, f64::min)
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integer(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Scans `k = 1 .. k_max` and returns the largest constant `C` such that
/// `|| k omega || > C / Delta(k)` holds for every scanned `k`, i.e.
/// `min_k || k omega || Delta(k)`.
///
/// When the frequency carries a certified interval the distance is bounded
/// from below in exact arithmetic; otherwise `f64` arithmetic is used.
pub fn certify_c_omega(freq: &Frequency, delta: &BrjunoFunction, k_max: u64) -> f64 {
    let mut best = f64::INFINITY;
    match freq.interval() {
        Some(iv) => {
            let mut k_lo = BigRational::zero();
            let mut k_hi = BigRational::zero();
            for k in 1..=k_max {
                k_lo += &iv.lo;
                k_hi += &iv.hi;
                // ||k omega|| lower bound over the interval: if both endpoints
                // round to the same integer the distance interval is direct.
                let m_lo = nearest_integer(&k_lo);
                let m_hi = nearest_integer(&k_hi);
                let dist = if m_lo == m_hi {
                    let m = BigRational::from_integer(m_lo);
                    let d_lo = (&k_lo - &m).abs();
                    let d_hi = (&k_hi - &m).abs();
                    precision::rational_to_f64(&d_lo.min(d_hi))
                } else {
                    // The interval straddles a half-integer boundary; at this
                    // width nothing is certified.
                    0.0
                };
                best = best.min(dist * delta.eval(k as f64));
            }
        }
        None => {
            let omega = freq.value_f64();
            for k in 1..=k_max {
                best = best.min(dist_to_integer(k as f64 * omega) * delta.eval(k as f64));
            }
        }
    }
    best
}

fn nearest_integer(r: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    (r + half).floor().to_integer()
}
