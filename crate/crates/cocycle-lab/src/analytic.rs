//! Finite Fourier observables on the torus and their annulus extensions.
//!
//! An [`AnalyticObservable`] is a trigonometric polynomial
//! `f(x) = sum_{|k| <= K} a_k e^{2 pi i k x}` evaluated on the strip
//! `{x + i y : |y| < rho}` (`rho` measured in rotations). Trig polynomials are
//! entire, so `rho` records the declared analyticity margin used by
//! sup-norm bounds rather than a hard domain boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use std::f64::consts::TAU;

#[derive(Debug, thiserror::Error)]
pub enum AnalyticError {
    #[error("evaluation point y = {y} is outside the declared annulus |y| < {rho}")]
    OutsideAnnulus { y: f64, rho: f64 },
}

/// A finite Fourier series with band limit `K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticObservable {
    /// Coefficients for `k = -k_max ..= k_max`, stored at index `k + k_max`.
    coeffs: Vec<Complex64>,
    k_max: i64,
    /// Annulus half-width (rotations).
    pub rho: f64,
    /// Marks observables constructed with the real-valuedness symmetry
    /// `a_{-k} = conj(a_k)`.
    pub real_valued: bool,
}

impl AnalyticObservable {
    /// Builds an observable from sparse `(k, coefficient)` pairs.
    pub fn from_coeffs(pairs: &[(i64, Complex64)], rho: f64) -> Self {
        let k_max = pairs.iter().map(|&(k, _)| k.abs()).max().unwrap_or(0);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); (2 * k_max + 1) as usize];
        for &(k, c) in pairs {
            coeffs[(k + k_max) as usize] += c;
        }
        let real_valued = (1..=k_max).all(|k| {
            let a = coeffs[(k + k_max) as usize];
            let b = coeffs[(k_max - k) as usize];
            (a - b.conj()).norm() <= 1e-15 * (a.norm() + b.norm()).max(1e-300)
        }) && coeffs[k_max as usize].im.abs() <= 1e-15 * coeffs[k_max as usize].norm().max(1e-300);
        AnalyticObservable {
            coeffs,
            k_max,
            rho,
            real_valued,
        }
    }

    /// The constant observable `c`.
    pub fn constant(c: Complex64) -> Self {
        AnalyticObservable {
            coeffs: vec![c],
            k_max: 0,
            rho: 1.0,
            real_valued: c.im == 0.0,
        }
    }

    /// The almost Mathieu potential `v(x) = 2 lambda cos(2 pi x)`.
    pub fn amo_potential(lambda: f64) -> Self {
        let c = Complex64::new(lambda, 0.0);
        Self::from_coeffs(&[(1, c), (-1, c)], 0.5)
    }

    /// `v(x) = 2 cos(2 pi x)`.
    pub fn two_cos() -> Self {
        Self::amo_potential(1.0)
    }

    /// The extended-Harper weight
    /// `a(x) = l3 e^{-2 pi i (x + omega/2)} + l2 + l1 e^{2 pi i (x + omega/2)}`;
    /// the half-rotation phases are folded into the coefficients.
    pub fn harper_weight(l1: f64, l2: f64, l3: f64, omega: f64) -> Self {
        let phase = Complex64::from_polar(1.0, std::f64::consts::PI * omega);
        Self::from_coeffs(
            &[
                (-1, phase.conj() * l3),
                (0, Complex64::new(l2, 0.0)),
                (1, phase * l1),
            ],
            0.5,
        )
    }

    pub fn band_limit(&self) -> i64 {
        self.k_max
    }

    /// Sparse view of the nonzero coefficients.
    pub fn coeff_pairs(&self) -> Vec<(i64, Complex64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, &c)| (i as i64 - self.k_max, c))
            .collect()
    }

    /// Mean over the torus (the `k = 0` coefficient).
    pub fn mean(&self) -> Complex64 {
        self.coeffs[self.k_max as usize]
    }

    /// `sum_k |a_k|`.
    pub fn coeff_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// Evaluates at the real point `x` (the `y = 0` circle).
    pub fn eval_torus(&self, x: f64) -> Complex64 {
        self.eval_unchecked(x, 0.0)
    }

    /// Evaluates `sum_k a_k e^{2 pi i k (x + i y)}`; fails outside the annulus.
    pub fn eval(&self, x: f64, y: f64) -> Result<Complex64, AnalyticError> {
        if y.abs() >= self.rho {
            return Err(AnalyticError::OutsideAnnulus { y, rho: self.rho });
        }
        Ok(self.eval_unchecked(x, y))
    }

    fn eval_unchecked(&self, x: f64, y: f64) -> Complex64 {
        // e^{2 pi i k (x + i y)} = w^k r^k with w on the unit circle and
        // r = e^{-2 pi y}; accumulate powers to avoid per-mode trig calls.
        let w = Complex64::from_polar(1.0, TAU * x);
        let step = if y == 0.0 {
            w
        } else {
            w * (-TAU * y).exp()
        };
        let mut acc = self.coeffs[self.k_max as usize];
        let mut pow_pos = Complex64::new(1.0, 0.0);
        let mut pow_neg = Complex64::new(1.0, 0.0);
        let inv_step = 1.0 / step;
        for k in 1..=self.k_max {
            pow_pos *= step;
            pow_neg *= inv_step;
            acc += self.coeffs[(self.k_max + k) as usize] * pow_pos;
            acc += self.coeffs[(self.k_max - k) as usize] * pow_neg;
        }
        acc
    }

    /// The conjugate-dual `a~` with coefficient `conj(a_k)` at `-k`; on the
    /// real circle it agrees with `conj(a(x))`, off the circle it is the
    /// analytic continuation of that boundary function (reflection of the
    /// annulus).
    pub fn conj_dual(&self) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
        for k in -self.k_max..=self.k_max {
            coeffs[(-k + self.k_max) as usize] = self.coeffs[(k + self.k_max) as usize].conj();
        }
        AnalyticObservable {
            coeffs,
            k_max: self.k_max,
            rho: self.rho,
            real_valued: self.real_valued,
        }
    }

    /// Rotates every coefficient by a global unit phase.
    pub fn rotate_phase(&self, theta: f64) -> Self {
        let ph = Complex64::from_polar(1.0, theta);
        let coeffs = self.coeffs.iter().map(|&c| c * ph).collect();
        AnalyticObservable {
            coeffs,
            k_max: self.k_max,
            rho: self.rho,
            real_valued: false,
        }
    }

    /// Coefficient bound `sum_k |a_k| e^{2 pi |k| rho}` for the annulus sup
    /// together with a boundary-sampled lower estimate. The bound always
    /// dominates the estimate.
    pub fn sup_norm_annulus(&self, rho: f64) -> Result<SupNorm, AnalyticError> {
        if rho >= self.rho {
            return Err(AnalyticError::OutsideAnnulus { y: rho, rho: self.rho });
        }
        let mut bound = 0.0;
        for (k, c) in self.coeff_pairs() {
            bound += c.norm() * (TAU * k.abs() as f64 * rho).exp();
        }
        let grid = 1 << 12;
        let mut estimate: f64 = 0.0;
        for i in 0..grid {
            let x = i as f64 / grid as f64;
            estimate = estimate
                .max(self.eval_unchecked(x, rho).norm())
                .max(self.eval_unchecked(x, -rho).norm());
        }
        // The coefficient bound dominates mathematically; keep the reported
        // pair ordered under f64 rounding too.
        Ok(SupNorm {
            bound: bound.max(estimate),
            estimate,
        })
    }

    /// Grid maximum of `|f|` on the real torus.
    pub fn sup_torus(&self) -> f64 {
        let grid = 1 << 12;
        (0..grid)
            .map(|i| self.eval_unchecked(i as f64 / grid as f64, 0.0).norm())
            .fold(0.0, f64::max)
    }

    /// Locates zeros of `|f|` on the real torus by a magnitude scan on a
    /// dyadic grid followed by ternary refinement. Trig polynomials have
    /// finitely many zeros, so the scan is exhaustive at sufficient depth.
    pub fn zeros_on_torus(&self, grid_log2: u32) -> Vec<f64> {
        let n = 1usize << grid_log2;
        let h = 1.0 / n as f64;
        let scale = self.coeff_l1().max(1e-300);
        let vals: Vec<f64> = (0..n)
            .map(|i| self.eval_unchecked(i as f64 * h, 0.0).norm())
            .collect();
        let mut zeros = Vec::new();
        for i in 0..n {
            let prev = vals[(i + n - 1) % n];
            let next = vals[(i + 1) % n];
            let v = vals[i];
            if v <= prev && v <= next && v < scale * 1e-2 {
                // Local minimum candidate: refine by ternary search.
                let mut lo = i as f64 * h - h;
                let mut hi = i as f64 * h + h;
                for _ in 0..80 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    if self.eval_unchecked(m1, 0.0).norm() < self.eval_unchecked(m2, 0.0).norm() {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                let x = 0.5 * (lo + hi);
                if self.eval_unchecked(x, 0.0).norm() <= scale * 1e-9 {
                    zeros.push(x.rem_euclid(1.0));
                }
            }
        }
        zeros.sort_by(f64::total_cmp);
        zeros.dedup_by(|a, b| (*a - *b).abs() < h);
        zeros
    }
}

/// Annulus sup-norm data: a coefficient upper bound and a sampled estimate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SupNorm {
    pub bound: f64,
    pub estimate: f64,
}

/// Declarative observable description used by configs and the CLI.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ObservableSpec {
    /// Explicit `(k, re, im)` triples.
    Coeffs { terms: Vec<(i64, f64, f64)>, rho: f64 },
    /// `2 lambda cos(2 pi x)`.
    AmoPotential { lambda: f64 },
    /// A constant.
    Constant { re: f64, #[serde(default)] im: f64 },
    /// Extended-Harper weight; the frequency is supplied at build time.
    HarperWeight { l1: f64, l2: f64, l3: f64 },
}

impl ObservableSpec {
    pub fn build(&self, omega: f64) -> AnalyticObservable {
        match self {
            ObservableSpec::Coeffs { terms, rho } => AnalyticObservable::from_coeffs(
                &terms
                    .iter()
                    .map(|&(k, re, im)| (k, Complex64::new(re, im)))
                    .collect::<Vec<_>>(),
                *rho,
            ),
            ObservableSpec::AmoPotential { lambda } => AnalyticObservable::amo_potential(*lambda),
            ObservableSpec::Constant { re, im } => {
                AnalyticObservable::constant(Complex64::new(*re, *im))
            }
            ObservableSpec::HarperWeight { l1, l2, l3 } => {
                AnalyticObservable::harper_weight(*l1, *l2, *l3, omega)
            }
        }
    }
}
