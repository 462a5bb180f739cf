//! Exact interval arithmetic used by the continued-fraction expansion.
//!
//! Irrational inputs are certified by a rational interval `[lo, hi]` that is
//! known to contain the true value. The named constants are produced by
//! integer algorithms (`isqrt`, a Machin-type series for pi) so the interval
//! endpoints are exact `BigRational`s; a decimal string input is read as the
//! interval `[d, d + ulp]` of its truncation.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::FreqError;

/// A rational interval certified to contain a real number.
#[derive(Debug, Clone, PartialEq)]
pub struct RealInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RealInterval {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        debug_assert!(lo <= hi);
        RealInterval { lo, hi }
    }

    /// Point interval of an exact rational.
    pub fn exact(v: BigRational) -> Self {
        RealInterval { lo: v.clone(), hi: v }
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(2.into())
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.midpoint())
    }

    /// Decimal expansion of the midpoint, truncated to `digits` fractional digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let mid = self.midpoint();
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = (mid.numer() * &scale).div_floor(mid.denom());
        let (int, frac) = scaled.div_rem(&scale);
        let frac = frac.abs().to_string();
        format!("{}.{}{}", int, "0".repeat(digits - frac.len()), frac)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    // BigRational::to_f64 handles the scaling; the values used here are
    // always well inside the f64 range.
    r.to_f64().unwrap_or(f64::NAN)
}

/// Floor of the square root of a non-negative integer (Newton iteration).
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    let mut x = BigUint::one() << (n.bits().div_ceil(2) as usize);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// `floor(pi * 10^digits)` by the Machin formula with integer arithmetic.
///
/// The result is certified to within one unit in the last place, so
/// `[p, p + 1] / 10^digits` brackets pi after widening by one ulp on each side.
fn machin_pi_scaled(digits: usize) -> BigInt {
    const GUARD: usize = 15;
    let unit: BigInt = BigInt::from(10u32).pow((digits + GUARD) as u32);

    // atan(1/x) * unit as an alternating integer series.
    let atan_inv = |x: u32| -> BigInt {
        let xx = BigInt::from(x) * BigInt::from(x);
        let mut term = &unit / BigInt::from(x);
        let mut total = BigInt::zero();
        let mut k: u32 = 0;
        while !term.is_zero() {
            let contrib = &term / BigInt::from(2 * k + 1);
            if k % 2 == 0 {
                total += contrib;
            } else {
                total -= contrib;
            }
            term /= &xx;
            k += 1;
        }
        total
    };

    let pi = BigInt::from(16) * atan_inv(5) - BigInt::from(4) * atan_inv(239);
    pi / BigInt::from(10u32).pow(GUARD as u32)
}

fn pow10(digits: usize) -> BigInt {
    BigInt::from(10u32).pow(digits as u32)
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// The golden mean `(sqrt 5 - 1)/2` as a certified interval at `digits` decimals.
pub fn golden_interval(digits: usize) -> RealInterval {
    let scale = pow10(digits);
    let s = BigInt::from(isqrt(
        &(BigUint::from(5u32) * (&scale * &scale).to_biguint().unwrap()),
    ));
    // sqrt5 * 10^d is in [s, s+1]
    let two = BigInt::from(2);
    RealInterval::new(
        ratio(&s - &scale, &two * &scale),
        ratio(&s + 1 - &scale, &two * &scale),
    )
}

/// The silver mean `sqrt 2 - 1` as a certified interval at `digits` decimals.
pub fn silver_interval(digits: usize) -> RealInterval {
    let scale = pow10(digits);
    let s = BigInt::from(isqrt(
        &(BigUint::from(2u32) * (&scale * &scale).to_biguint().unwrap()),
    ));
    RealInterval::new(ratio(&s - &scale, scale.clone()), ratio(&s + 1 - &scale, scale))
}

/// `pi - 3` as a certified interval at `digits` decimals.
pub fn pi_minus_3_interval(digits: usize) -> RealInterval {
    let scale = pow10(digits);
    let p = machin_pi_scaled(digits);
    let three = BigInt::from(3) * &scale;
    RealInterval::new(ratio(&p - 1 - &three, scale.clone()), ratio(&p + 2 - &three, scale))
}

/// Parses a decimal string in (0, 1) as the interval `[d, d + 10^-digits]`
/// of its truncation.
pub fn parse_decimal_interval(text: &str) -> Result<RealInterval, FreqError> {
    let bad = || FreqError::InvalidOmega(text.to_string());
    let (int_part, frac_part) = text.split_once('.').ok_or_else(bad)?;
    if int_part.parse::<u8>().map_err(|_| bad())? != 0 || frac_part.is_empty() {
        return Err(bad());
    }
    if !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = frac_part.len();
    let num: BigInt = frac_part.parse().map_err(|_| bad())?;
    let den = pow10(digits);
    Ok(RealInterval::new(
        ratio(num.clone(), den.clone()),
        ratio(num + 1, den),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isqrt_exact_squares_and_neighbours() {
        for n in 0u32..200 {
            let s = isqrt(&BigUint::from(n));
            let s = s.to_u32().unwrap();
            assert!(s * s <= n && (s + 1) * (s + 1) > n, "isqrt({n}) = {s}");
        }
    }

    #[test]
    fn machin_pi_prefix() {
        // 50 digits of pi, a standard reference value.
        let p = machin_pi_scaled(50).to_string();
        assert_eq!(p, "314159265358979323846264338327950288419716939937510");
    }

    #[test]
    fn golden_interval_brackets_value() {
        let iv = golden_interval(40);
        let g = iv.to_f64();
        assert!((g - 0.6180339887498949).abs() < 1e-15);
        assert!(iv.hi > iv.lo);
        let s = iv.to_decimal_string(20);
        assert!(s.starts_with("0.61803398874989484820"), "{s}");
    }

    #[test]
    fn decimal_parse_rejects_garbage() {
        assert!(parse_decimal_interval("1.5").is_err());
        assert!(parse_decimal_interval("0.12a").is_err());
        assert!(parse_decimal_interval("x").is_err());
        assert!(parse_decimal_interval("0.5").is_ok());
    }
}
