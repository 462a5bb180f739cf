//! Jacobi-cocycle transfer matrices, log-scaled products and finite-scale
//! Lyapunov exponents.
//!
//! The one-step factor at orbit index `j` and phase `x` is
//!
//! ```text
//! F_j(x) = [ v(x + j w) - E   -a~(x + j w) ]
//!          [ a(x + (j+1) w)        0       ]
//! ```
//!
//! with `a~` the conjugate-dual weight. The `plain` variant divides by
//! `a(x + (j+1) w)` and the `unimodular` variant additionally normalizes the
//! one-step determinant to unit modulus. Products are ordered `j = n .. 1` and
//! rescaled after every multiplication, so `n` in the tens of thousands stays
//! far from overflow.

mod avalanche;
mod scaled;
mod svd;

pub use avalanche::{avalanche_check, ApReport};
pub use scaled::{Mat2, ScaledMatrix2};
pub use svd::{svd_directions, wedge, Directions};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticObservable;
use crate::freq::Frequency;

#[derive(Debug, thiserror::Error)]
pub enum CocycleError {
    #[error("orbit point x + {j} w = {x} lies within the exclusion radius of a zero of the weight (|a| = {magnitude})")]
    NearZeroWeight { x: f64, j: i64, magnitude: f64 },
    #[error("{skipped} of {total} grid points were excluded (> {limit_percent}%)")]
    TooManySkipped {
        skipped: usize,
        total: usize,
        limit_percent: f64,
    },
    #[error("singular values too close to 1 (norm = {norm}); directions are ill-defined")]
    DegenerateSingularValues { norm: f64 },
    #[error("avalanche hypothesis min||A_j|| >= H > n fails: min norm {min_norm}, H = {h}, n = {n}")]
    HypothesisLarge { min_norm: f64, h: f64, n: usize },
    #[error("avalanche hypothesis on consecutive pairs fails: defect {max_pair_defect} >= {bound}")]
    HypothesisDiff { max_pair_defect: f64, bound: f64 },
}

/// Which normalization of the transfer matrix to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// The polynomial factors `F_j` (no division by the weight).
    #[serde(rename = "a")]
    Analytic,
    /// `F_j / a(x + (j+1) w)`.
    Plain,
    /// The plain step normalized to unit-modulus determinant.
    Unimodular,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "a" | "analytic" => Ok(Variant::Analytic),
            "plain" => Ok(Variant::Plain),
            "u" | "unimodular" => Ok(Variant::Unimodular),
            other => Err(format!("unknown variant {other:?} (expected a|plain|unimodular)")),
        }
    }
}

/// Weight, potential, energy and frequency of one Jacobi cocycle.
#[derive(Debug, Clone)]
pub struct CocycleParams {
    /// The weight `a` (complex analytic, not identically zero).
    pub weight: AnalyticObservable,
    /// Conjugate-dual of the weight, precomputed.
    weight_dual: AnalyticObservable,
    /// The potential `v` (real-valued).
    pub potential: AnalyticObservable,
    /// Spectral parameter `E`.
    pub energy: Complex64,
    pub omega: Frequency,
    /// Orbits passing within this distance of a zero of `a` are refused.
    pub exclusion_radius: f64,
}

impl CocycleParams {
    pub fn new(
        weight: AnalyticObservable,
        potential: AnalyticObservable,
        energy: Complex64,
        omega: Frequency,
    ) -> Self {
        assert!(
            weight.coeff_pairs().iter().any(|(_, c)| c.norm() > 0.0),
            "weight must not be identically zero"
        );
        assert!(potential.real_valued, "potential must be real-valued");
        let weight_dual = weight.conj_dual();
        CocycleParams {
            weight,
            weight_dual,
            potential,
            energy,
            omega: omega.clone(),
            exclusion_radius: 1e-8,
        }
    }

    pub fn with_energy(&self, energy: Complex64) -> Self {
        let mut p = self.clone();
        p.energy = energy;
        p
    }

    pub fn omega_f64(&self) -> f64 {
        self.omega.value_f64()
    }

    pub fn weight_dual(&self) -> &AnalyticObservable {
        &self.weight_dual
    }

    /// `v(x + j w)` as a real number (the potential is real-valued).
    pub fn potential_at(&self, x: f64, j: i64) -> f64 {
        self.potential.eval_torus(x + j as f64 * self.omega_f64()).re
    }

    /// `a(x + j w)`.
    pub fn weight_at(&self, x: f64, j: i64) -> Complex64 {
        self.weight.eval_torus(x + j as f64 * self.omega_f64())
    }

    /// `a~(x + j w)`.
    pub fn weight_dual_at(&self, x: f64, j: i64) -> Complex64 {
        self.weight_dual.eval_torus(x + j as f64 * self.omega_f64())
    }

    /// The bound `M_0 = log(3 ||a||_rho + 2 ||v||_rho)` with annulus sup-norm
    /// coefficient bounds at margin `rho`.
    pub fn m_zero(&self, rho: f64) -> f64 {
        let a = self
            .weight
            .sup_norm_annulus(rho)
            .map(|s| s.bound)
            .unwrap_or_else(|_| self.weight.coeff_l1());
        let v = self
            .potential
            .sup_norm_annulus(rho)
            .map(|s| s.bound)
            .unwrap_or_else(|_| self.potential.coeff_l1());
        (3.0 * a + 2.0 * v).ln()
    }
}

/// One-step transfer factor at orbit index `j` (see the module docs).
pub fn step_matrix(
    params: &CocycleParams,
    j: i64,
    x: f64,
    variant: Variant,
) -> Result<Mat2, CocycleError> {
    let v = Complex64::new(params.potential_at(x, j), 0.0);
    let a_next = params.weight_at(x, j + 1);
    let a_dual = params.weight_dual_at(x, j);
    let top_left = v - params.energy;
    let f = Mat2::from_rows(top_left, -a_dual, a_next, Complex64::new(0.0, 0.0));
    match variant {
        Variant::Analytic => Ok(f),
        Variant::Plain => {
            if a_next.norm() <= params.exclusion_radius {
                return Err(CocycleError::NearZeroWeight {
                    x: (x + (j + 1) as f64 * params.omega_f64()).rem_euclid(1.0),
                    j: j + 1,
                    magnitude: a_next.norm(),
                });
            }
            Ok(f.scale(1.0 / a_next))
        }
        Variant::Unimodular => {
            if a_next.norm() <= params.exclusion_radius {
                return Err(CocycleError::NearZeroWeight {
                    x: (x + (j + 1) as f64 * params.omega_f64()).rem_euclid(1.0),
                    j: j + 1,
                    magnitude: a_next.norm(),
                });
            }
            if a_dual.norm() <= params.exclusion_radius {
                return Err(CocycleError::NearZeroWeight {
                    x: (x + j as f64 * params.omega_f64()).rem_euclid(1.0),
                    j,
                    magnitude: a_dual.norm(),
                });
            }
            let plain = f.scale(1.0 / a_next);
            // det(plain step) = a~_j / a_{j+1}; divide by |det|^(1/2).
            let det_mag = plain.det().norm();
            Ok(plain.scale(Complex64::new(1.0 / det_mag.sqrt(), 0.0)))
        }
    }
}

/// Ordered product of step factors `j = n .. 1` with per-step rescaling.
pub fn transfer_product(
    params: &CocycleParams,
    x: f64,
    n: usize,
    variant: Variant,
) -> Result<ScaledMatrix2, CocycleError> {
    transfer_product_with_stride(params, x, n, variant, 1)
}

/// Like [`transfer_product`] but rescaling only every `stride` steps; the
/// scaling-transparency property checks stride independence.
pub fn transfer_product_with_stride(
    params: &CocycleParams,
    x: f64,
    n: usize,
    variant: Variant,
    stride: usize,
) -> Result<ScaledMatrix2, CocycleError> {
    assert!(n >= 1, "transfer_product requires n >= 1");
    assert!(stride >= 1);
    let mut product = ScaledMatrix2::identity();
    for j in 1..=n as i64 {
        let f = step_matrix(params, j, x, variant)?;
        if j as usize % stride == 0 {
            product.apply(&f);
        } else {
            product.apply_no_rescale(&f);
        }
    }
    product.rescale();
    Ok(product)
}

/// Variant-`a` product evaluated at a point `x + i y` of the annulus.
pub fn transfer_product_at(
    params: &CocycleParams,
    x: f64,
    y: f64,
    n: usize,
) -> Result<ScaledMatrix2, crate::analytic::AnalyticError> {
    assert!(n >= 1);
    let omega = params.omega_f64();
    let mut product = ScaledMatrix2::identity();
    for j in 1..=n as i64 {
        let xj = x + j as f64 * omega;
        let v = params.potential.eval(xj, y)?;
        let a_dual = params.weight_dual().eval(xj, y)?;
        let a_next = params.weight.eval(xj + omega, y)?;
        let f = Mat2::from_rows(
            v - params.energy,
            -a_dual,
            a_next,
            Complex64::new(0.0, 0.0),
        );
        product.apply(&f);
    }
    Ok(product)
}

/// Deterministic quadrature grid: `2^log2` midpoints of a uniform partition.
pub fn grid_points(log2: u32) -> Vec<f64> {
    let n = 1usize << log2;
    (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect()
}

/// A finite-scale Lyapunov average over the phase grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// `(1/n) <log ||M_n(x)||>` over the unskipped grid points.
    pub value: f64,
    pub n: usize,
    pub grid_log2: u32,
    /// Grid points excluded by the near-zero-weight rule.
    pub skipped: usize,
}

/// `(1/n) * average over the grid of log||M_n^variant(x)||`.
///
/// Grid points whose orbit passes the exclusion radius of a weight zero are
/// skipped and counted; more than 1% skipped is an error. The grid map runs
/// in parallel with an ordered reduction, so results are identical for any
/// worker count.
pub fn finite_lyapunov(
    params: &CocycleParams,
    n: usize,
    grid_log2: u32,
    variant: Variant,
) -> Result<LyapunovEstimate, CocycleError> {
    assert!(grid_log2 >= 6, "grid must have at least 64 points");
    assert!(n >= 1);
    let xs = grid_points(grid_log2);
    let logs: Vec<Option<f64>> = xs
        .par_iter()
        .map(|&x| transfer_product(params, x, n, variant).ok().map(|m| m.log_norm()))
        .collect();
    let skipped = logs.iter().filter(|l| l.is_none()).count();
    let total = logs.len();
    if skipped * 100 > total {
        return Err(CocycleError::TooManySkipped {
            skipped,
            total,
            limit_percent: 1.0,
        });
    }
    let sum: f64 = logs.iter().flatten().sum();
    Ok(LyapunovEstimate {
        value: sum / ((total - skipped) as f64 * n as f64),
        n,
        grid_log2,
        skipped,
    })
}

/// Grid average of `log |a(x)|` (the constant `D` relating the analytic and
/// plain Lyapunov exponents). Values below the log floor are clamped.
pub fn weight_log_mean(params: &CocycleParams, grid_log2: u32) -> f64 {
    const LOG_FLOOR: f64 = -700.0;
    let xs = grid_points(grid_log2);
    let sum: f64 = xs
        .iter()
        .map(|&x| params.weight.eval_torus(x).norm().ln().max(LOG_FLOOR))
        .sum();
    sum / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq::{continued_fraction, OmegaSpec};

    fn golden() -> Frequency {
        continued_fraction(&OmegaSpec::Golden, 30).unwrap()
    }

    fn free_params() -> CocycleParams {
        CocycleParams::new(
            AnalyticObservable::constant(Complex64::new(1.0, 0.0)),
            AnalyticObservable::constant(Complex64::new(0.0, 0.0)),
            Complex64::new(0.0, 0.0),
            golden(),
        )
    }

    fn amo_params(lambda: f64, energy: f64) -> CocycleParams {
        CocycleParams::new(
            AnalyticObservable::constant(Complex64::new(1.0, 0.0)),
            AnalyticObservable::amo_potential(lambda),
            Complex64::new(energy, 0.0),
            golden(),
        )
    }

    fn harper_params(energy: f64) -> CocycleParams {
        let omega = golden();
        CocycleParams::new(
            AnalyticObservable::harper_weight(0.8, 1.0, 0.3, omega.value_f64()),
            AnalyticObservable::amo_potential(1.0),
            Complex64::new(energy, 0.0),
            omega,
        )
    }

    #[test]
    fn free_step_is_rotation() {
        let p = free_params();
        let m = step_matrix(&p, 3, 0.42, Variant::Analytic).unwrap();
        let expect = Mat2::from_rows(
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        assert_eq!(m, expect);
        // Plain and unimodular coincide for a == 1.
        assert_eq!(step_matrix(&p, 3, 0.42, Variant::Plain).unwrap(), expect);
        assert_eq!(step_matrix(&p, 3, 0.42, Variant::Unimodular).unwrap(), expect);
    }

    #[test]
    fn step_determinant_is_weight_product() {
        // det [[v-E, -a~_j], [a_{j+1}, 0]] = a~(x+jw) a(x+(j+1)w).
        let p = harper_params(0.7);
        for (j, x) in [(1i64, 0.13), (5, 0.77), (9, 0.301)] {
            let m = step_matrix(&p, j, x, Variant::Analytic).unwrap();
            let expect = p.weight_dual_at(x, j) * p.weight_at(x, j + 1);
            assert!((m.det() - expect).norm() < 1e-14 * expect.norm());
        }
    }

    #[test]
    fn amo_step_example() {
        let p = amo_params(5.0, 0.0);
        let omega = p.omega_f64();
        let m = step_matrix(&p, 1, 0.0, Variant::Analytic).unwrap();
        assert!((m.0[0][0].re - 10.0 * (std::f64::consts::TAU * omega).cos()).abs() < 1e-12);
        assert_eq!(m.0[0][1], Complex64::new(-1.0, 0.0));
        assert_eq!(m.0[1][0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn near_zero_weight_is_refused() {
        // Harper weight with l2 = 0 vanishes on the torus.
        let omega = golden();
        let w = AnalyticObservable::harper_weight(1.0, 0.0, 1.0, omega.value_f64());
        let zeros = w.zeros_on_torus(12);
        let p = CocycleParams::new(
            w,
            AnalyticObservable::amo_potential(1.0),
            Complex64::new(0.0, 0.0),
            omega,
        );
        // Place the j = 1 weight argument exactly on a zero.
        let x = zeros[0] - 2.0 * p.omega_f64();
        let err = step_matrix(&p, 1, x, Variant::Plain);
        assert!(matches!(err, Err(CocycleError::NearZeroWeight { .. })));
        // The analytic variant is defined everywhere.
        assert!(step_matrix(&p, 1, x, Variant::Analytic).is_ok());
    }

    #[test]
    fn free_fourth_power_is_identity() {
        let p = free_params();
        let m = transfer_product(&p, 0.3, 4, Variant::Plain).unwrap();
        let r = m.represented();
        let id = Mat2::identity();
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.0[i][j] - id.0[i][j]).norm() < 1e-14);
            }
        }
        let u = transfer_product(&p, 0.3, 4, Variant::Unimodular).unwrap();
        assert!(u.log_norm() <= 0.5f64.ln().abs() + 1e-12);
    }

    #[test]
    fn analytic_determinant_telescopes() {
        // |det M_n^a| = prod |a~(x+jw)| |a(x+(j+1)w)|, n = 20.
        let p = harper_params(0.25);
        for &x in &[0.05, 0.511, 0.93] {
            let m = transfer_product(&p, x, 20, Variant::Analytic).unwrap();
            let mut expect = 0.0;
            for j in 1..=20i64 {
                expect += p.weight_dual_at(x, j).norm().ln() + p.weight_at(x, j + 1).norm().ln();
            }
            assert!(
                (m.log_abs_det() - expect).abs() <= 1e-10 * expect.abs().max(1.0),
                "x = {x}"
            );
        }
    }

    #[test]
    fn unimodular_variant_has_unit_determinant() {
        let p = harper_params(1.3);
        for &(x, n) in &[(0.11, 7usize), (0.42, 33), (0.78, 120)] {
            let m = transfer_product(&p, x, n, Variant::Unimodular).unwrap();
            assert!(m.log_abs_det().abs() < 1e-10, "x={x} n={n}");
            // Norm symmetry: ||M|| = ||M^-1|| for unit-modulus determinant.
            assert!((m.log_norm() - m.log_inverse_norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn rescale_stride_is_transparent() {
        let p = amo_params(5.0, 0.3);
        for &x in &[0.21, 0.64] {
            let every = transfer_product_with_stride(&p, x, 400, Variant::Analytic, 1).unwrap();
            let eighth = transfer_product_with_stride(&p, x, 400, Variant::Analytic, 8).unwrap();
            let a = every.log_norm();
            let b = eighth.log_norm();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }

    #[test]
    fn free_lyapunov_vanishes() {
        let p = free_params();
        let l = finite_lyapunov(&p, 64, 6, Variant::Plain).unwrap();
        assert!(l.value.abs() < 1e-12);
        assert_eq!(l.skipped, 0);
    }

    #[test]
    fn herman_bound_quick() {
        let p = amo_params(5.0, 0.0);
        let l = finite_lyapunov(&p, 256, 9, Variant::Unimodular).unwrap();
        assert!(l.value >= 5f64.ln() - 0.05, "L = {}", l.value);
    }

    #[test]
    fn dominant_diagonal_matches_log_integral() {
        // v = 2cos, E = 100: L_n tracks the quadrature of log|100 - 2cos|.
        let omega = golden();
        let p = CocycleParams::new(
            AnalyticObservable::constant(Complex64::new(1.0, 0.0)),
            AnalyticObservable::two_cos(),
            Complex64::new(100.0, 0.0),
            omega,
        );
        let l = finite_lyapunov(&p, 200, 9, Variant::Plain).unwrap();
        let g = 1 << 16;
        let oracle: f64 = (0..g)
            .map(|i| {
                let x = (i as f64 + 0.5) / g as f64;
                (100.0 - 2.0 * (std::f64::consts::TAU * x).cos()).abs().ln()
            })
            .sum::<f64>()
            / g as f64;
        assert!((oracle - 4.60507).abs() < 1e-4, "oracle {oracle}");
        assert!((l.value - oracle).abs() < 2e-3, "L {} vs oracle {oracle}", l.value);
    }

    #[test]
    fn analytic_and_plain_averages_differ_by_weight_mean() {
        let p = harper_params(0.4);
        let la = finite_lyapunov(&p, 64, 10, Variant::Analytic).unwrap();
        let lp = finite_lyapunov(&p, 64, 10, Variant::Plain).unwrap();
        let d = weight_log_mean(&p, 10);
        assert!(
            (la.value - lp.value - d).abs() < 1e-8,
            "gap {} vs D {d}",
            la.value - lp.value
        );
    }

    #[test]
    fn subadditivity_of_scaled_averages() {
        let p = amo_params(5.0, 0.7);
        let l32 = finite_lyapunov(&p, 32, 10, Variant::Analytic).unwrap();
        let l64 = finite_lyapunov(&p, 64, 10, Variant::Analytic).unwrap();
        assert!(l64.value <= l32.value + 1e-3);
    }
}
