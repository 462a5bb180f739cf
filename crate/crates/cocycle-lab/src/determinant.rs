//! Finite-scale Dirichlet determinants in log-scaled form.
//!
//! `f_n(x)` is the characteristic determinant of the `n`-site Jacobi block
//! with Dirichlet boundary conditions, carried as `(log-magnitude, phase)`
//! through the two-term cofactor recurrence
//!
//! ```text
//! f_j = (v(x + j w) - E) f_{j-1} - a(x + j w) a~(x + j w) f_{j-2},
//! f_0 = 1, f_{-1} = 0.
//! ```
//!
//! On the real torus the middle coefficient is `|a(x + j w)|^2`. Near zeros
//! of `f_n` the recurrence cancels; the number of cancelled digits is tracked
//! and reported rather than hidden.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::{
    finite_lyapunov, grid_points, transfer_product, CocycleError, CocycleParams, Variant,
};

/// A determinant value in log-scaled form: `f = exp(log_mag) * phase`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogDet {
    /// Natural log of `|f|`; `-inf` encodes an exact zero.
    pub log_mag: f64,
    /// Unit-modulus phase `f / |f|` (1 for an exact zero).
    pub phase: Complex64,
    /// Number of lattice sites.
    pub n: usize,
}

impl LogDet {
    pub fn zero(n: usize) -> Self {
        LogDet {
            log_mag: f64::NEG_INFINITY,
            phase: Complex64::new(1.0, 0.0),
            n,
        }
    }

    pub fn one() -> Self {
        LogDet {
            log_mag: 0.0,
            phase: Complex64::new(1.0, 0.0),
            n: 0,
        }
    }

    /// The complex value `exp(log_mag) * phase`; only usable at moderate
    /// magnitudes.
    pub fn to_complex(&self) -> Complex64 {
        if self.log_mag == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_mag.exp()
        }
    }
}

/// The determinant sequence `f_1 .. f_n` with its cancellation diagnostic.
#[derive(Debug, Clone)]
pub struct DetSequence {
    pub values: Vec<LogDet>,
    /// Max over all steps of `log10(largest term / |result|)`; large values
    /// flag subtraction cancellation near a determinant zero.
    pub max_cancellation_digits: f64,
}

impl DetSequence {
    pub fn last(&self) -> LogDet {
        *self.values.last().expect("n >= 1")
    }
}

/// Runs the Dirichlet recurrence `f_1 .. f_n` at base phase `x` using the
/// energy stored in `params`.
pub fn det_recurrence(params: &CocycleParams, x: f64, n: usize) -> DetSequence {
    det_recurrence_at(params, x, n, params.energy)
}

/// Same recurrence with an explicit energy (the determinant is a polynomial
/// in `E`; spectral probes sweep it).
pub fn det_recurrence_at(
    params: &CocycleParams,
    x: f64,
    n: usize,
    energy: Complex64,
) -> DetSequence {
    assert!(n >= 1, "det_recurrence requires n >= 1");
    let omega = params.omega_f64();
    let mut values = Vec::with_capacity(n);
    // f_{j} = e^{scale} g_{j}; both live registers share one scale.
    let mut g_prev = Complex64::new(0.0, 0.0); // f_{-1}
    let mut g_cur = Complex64::new(1.0, 0.0); // f_0
    let mut scale = 0.0f64;
    let mut max_cancel: f64 = 0.0;
    for j in 1..=n as i64 {
        let xj = x + j as f64 * omega;
        let v = Complex64::new(params.potential.eval_torus(xj).re, 0.0);
        let w = params.weight.eval_torus(xj) * params.weight_dual().eval_torus(xj);
        let t1 = (v - energy) * g_cur;
        let t2 = w * g_prev;
        let g_next = t1 - t2;
        let largest = t1.norm().max(t2.norm());
        if largest > 0.0 && g_next.norm() > 0.0 {
            let cancel = (largest / g_next.norm()).log10();
            if cancel > max_cancel {
                max_cancel = cancel;
            }
        }
        g_prev = g_cur;
        g_cur = g_next;
        let m = g_prev.norm().max(g_cur.norm());
        if m > 0.0 && !(0.5..=2.0).contains(&m) {
            g_prev /= m;
            g_cur /= m;
            scale += m.ln();
        }
        values.push(if g_cur.norm() == 0.0 {
            LogDet::zero(j as usize)
        } else {
            LogDet {
                log_mag: scale + g_cur.norm().ln(),
                phase: g_cur / g_cur.norm(),
                n: j as usize,
            }
        });
    }
    DetSequence {
        values,
        max_cancellation_digits: max_cancel,
    }
}

/// Determinant of the interval-restricted operator on `[m, n]`:
/// `f_{n-m+1}` started at the shifted phase `x + (m-1) w`.
pub fn shifted_det(params: &CocycleParams, x: f64, m: usize, n: usize) -> LogDet {
    assert!(m >= 1 && m <= n, "shifted_det requires 1 <= m <= n");
    let omega = params.omega_f64();
    det_recurrence(params, x + (m - 1) as f64 * omega, n - m + 1).last()
}

/// Residuals of the four-entry identity between the variant-`a` transfer
/// matrix and the Dirichlet determinants:
///
/// ```text
/// M_n^a(x) = [ f_n(x)                   -a~(x+w) f_{n-1}(x+w)              ]
///            [ a(x+(n+1)w) f_{n-1}(x)   -a~(x+w) a(x+(n+1)w) f_{n-2}(x+w)  ]
/// ```
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IdentityResidual {
    /// Max over the four entries of `|log|entry| - log|expected||` relative
    /// to `max(1, |log|expected||)`.
    pub max_log_residual: f64,
    /// Max over the four entries of `|phase(entry) - phase(expected)|`.
    pub max_phase_residual: f64,
}

/// Compares all four entries of `M_n^a(x)` against the determinant
/// expressions, in log-magnitude and phase.
pub fn det_identity_check(
    params: &CocycleParams,
    x: f64,
    n: usize,
) -> Result<IdentityResidual, CocycleError> {
    assert!(n >= 2, "det_identity_check requires n >= 2");
    let omega = params.omega_f64();
    let m = transfer_product(params, x, n, Variant::Analytic)?;

    let seq_x = det_recurrence(params, x, n);
    let seq_shift = det_recurrence(params, x + omega, n - 1);
    let f_n = seq_x.values[n - 1];
    let f_n1 = seq_x.values[n - 2];
    let f_n1_shift = seq_shift.values[n - 2];
    let f_n2_shift = if n == 2 {
        LogDet::one()
    } else {
        seq_shift.values[n - 3]
    };

    let a_dual_1 = params.weight_dual_at(x, 1);
    let a_np1 = params.weight_at(x, n as i64 + 1);

    let expected = [
        (f_n.log_mag, f_n.phase),
        mul_factor(f_n1_shift, -a_dual_1),
        mul_factor(f_n1, a_np1),
        mul_factor(f_n2_shift, -a_dual_1 * a_np1),
    ];
    let got = [
        m.entry_log_mag(0, 0),
        m.entry_log_mag(0, 1),
        m.entry_log_mag(1, 0),
        m.entry_log_mag(1, 1),
    ];

    // Entries indistinguishable from zero at the product's scale are matched
    // structurally rather than through their (meaningless) logs.
    let floor = m.log_norm() - 60.0 * std::f64::consts::LN_10;
    let mut max_log = 0.0f64;
    let mut max_phase = 0.0f64;
    for ((lm_got, ph_got), (lm_exp, ph_exp)) in got.iter().zip(expected.iter()) {
        if *lm_got < floor && *lm_exp < floor {
            continue;
        }
        let log_res = (lm_got - lm_exp).abs() / lm_exp.abs().max(1.0);
        let phase_res = (ph_got - ph_exp).norm();
        max_log = max_log.max(log_res);
        max_phase = max_phase.max(phase_res);
    }
    Ok(IdentityResidual {
        max_log_residual: max_log,
        max_phase_residual: max_phase,
    })
}

fn mul_factor(d: LogDet, factor: Complex64) -> (f64, Complex64) {
    let fm = factor.norm();
    if fm == 0.0 || d.log_mag == f64::NEG_INFINITY {
        (f64::NEG_INFINITY, Complex64::new(1.0, 0.0))
    } else {
        (d.log_mag + fm.ln(), d.phase * (factor / fm))
    }
}

/// The weight-normalized determinants
/// `f_n = f_n^a / prod_{j=1..n} a(x+jw)` and
/// `f_n^u = f_n^a / |prod_{j=0}^{n-1} a(x+(j+1)w) a~(x+jw)|^{1/2}`,
/// computed by subtracting accumulated log-weights.
pub fn normalized_dets(
    params: &CocycleParams,
    x: f64,
    n: usize,
) -> Result<(LogDet, LogDet), CocycleError> {
    assert!(n >= 1);
    let omega = params.omega_f64();
    let f_a = det_recurrence(params, x, n).last();

    let mut log_plain = 0.0f64;
    let mut phase_plain = Complex64::new(1.0, 0.0);
    let mut log_uni = 0.0f64;
    for j in 0..=n as i64 {
        let aj = params.weight_at(x, j);
        let mag = aj.norm();
        if mag <= params.exclusion_radius {
            return Err(CocycleError::NearZeroWeight {
                x: (x + j as f64 * omega).rem_euclid(1.0),
                j,
                magnitude: mag,
            });
        }
        if j >= 1 {
            log_plain += mag.ln();
            phase_plain *= aj / mag;
            // |a(x+jw)| for j = 1..n: the (j+1)-indexed half of the weights.
            log_uni += 0.5 * mag.ln();
        }
        if j <= n as i64 - 1 {
            // |a~(x+jw)| = |a(x+jw)| on the real torus: j = 0..n-1.
            log_uni += 0.5 * mag.ln();
        }
    }

    let plain = LogDet {
        log_mag: f_a.log_mag - log_plain,
        phase: f_a.phase * phase_plain.conj(),
        n,
    };
    let uni = LogDet {
        log_mag: f_a.log_mag - log_uni,
        phase: f_a.phase,
        n,
    };
    Ok((plain, uni))
}

/// Grid statistics of `log |f_n^a|`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetStats {
    /// `<log |f_n^a|>` over the grid (clamped values included).
    pub mean: f64,
    /// Centered samples `log|f_n^a(x)| - mean`, in grid order.
    pub deviations: Vec<f64>,
    /// `(1/n) <log||M_n^a||>` over the same grid.
    pub lyapunov_n: f64,
    /// `<log|f_n^a|> - n L_n^a`.
    pub mean_minus_n_lyapunov: f64,
    /// Grid points clamped at the log floor (-700).
    pub clamped: usize,
}

/// Computes `<log |f_n^a|>` and the centered samples over a deterministic
/// `2^grid_log2` midpoint grid. The quadrature excludes no points; values
/// below the log floor are clamped and counted.
pub fn log_det_stats(params: &CocycleParams, n: usize, grid_log2: u32) -> DetStats {
    const LOG_FLOOR: f64 = -700.0;
    assert!(grid_log2 >= 9, "log_det_stats requires a grid of at least 2^9");
    let xs = grid_points(grid_log2);
    let raw: Vec<f64> = xs
        .par_iter()
        .map(|&x| det_recurrence(params, x, n).last().log_mag)
        .collect();
    let mut clamped = 0;
    let logs: Vec<f64> = raw
        .into_iter()
        .map(|l| {
            if l < LOG_FLOOR {
                clamped += 1;
                LOG_FLOOR
            } else {
                l
            }
        })
        .collect();
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let lyap = finite_lyapunov(params, n, grid_log2, Variant::Analytic)
        .expect("analytic variant never skips")
        .value;
    DetStats {
        mean,
        deviations: logs.iter().map(|l| l - mean).collect(),
        lyapunov_n: lyap,
        mean_minus_n_lyapunov: mean - n as f64 * lyap,
        clamped,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::AnalyticObservable;
    use crate::freq::{continued_fraction, Frequency, OmegaSpec};

    fn golden() -> Frequency {
        continued_fraction(&OmegaSpec::Golden, 30).unwrap()
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

    /// Dense LU determinant of `H_n(x) - E` with partial pivoting; the
    /// independent oracle for the recurrence.
    fn dense_det(params: &CocycleParams, x: f64, n: usize) -> Complex64 {
        let omega = params.omega_f64();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for j in 0..n {
            let xj = x + (j as f64 + 1.0) * omega;
            m[j][j] = Complex64::new(params.potential.eval_torus(xj).re, 0.0) - params.energy;
            if j + 1 < n {
                let a = params.weight.eval_torus(x + (j as f64 + 2.0) * omega);
                m[j][j + 1] = -a;
                m[j + 1][j] = -a.conj();
            }
        }
        let mut det = Complex64::new(1.0, 0.0);
        for col in 0..n {
            let (pivot_row, _) = (col..n)
                .map(|r| (r, m[r][col].norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if m[pivot_row][col].norm() == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            if pivot_row != col {
                m.swap(pivot_row, col);
                det = -det;
            }
            det *= m[col][col];
            for r in col + 1..n {
                let factor = m[r][col] / m[col][col];
                for c in col..n {
                    let sub = factor * m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
        det
    }

    #[test]
    fn one_site_determinant() {
        let p = amo_params(2.0, 0.7);
        let f1 = det_recurrence(&p, 0.31, 1).last();
        let expect = Complex64::new(p.potential_at(0.31, 1), 0.0) - p.energy;
        assert!((f1.to_complex() - expect).norm() < 1e-14 * expect.norm());
    }

    #[test]
    fn two_site_determinant_closed_form() {
        let p = harper_params(0.2);
        let x = 0.47;
        let f2 = det_recurrence(&p, x, 2).last();
        let v1 = Complex64::new(p.potential_at(x, 1), 0.0) - p.energy;
        let v2 = Complex64::new(p.potential_at(x, 2), 0.0) - p.energy;
        let a2 = p.weight_at(x, 2);
        let expect = v1 * v2 - Complex64::new(a2.norm_sqr(), 0.0);
        assert!((f2.to_complex() - expect).norm() < 1e-13 * expect.norm());
    }

    #[test]
    fn recurrence_matches_dense_lu() {
        let p = amo_params(2.0, 0.35);
        let q = harper_params(-0.6);
        for params in [&p, &q] {
            for &x in &[0.08, 0.344, 0.91] {
                let f6 = det_recurrence(params, x, 6).last();
                let oracle = dense_det(params, x, 6);
                assert!(
                    (f6.to_complex() - oracle).norm() <= 1e-10 * oracle.norm(),
                    "x = {x}"
                );
            }
        }
    }

    #[test]
    fn shifted_det_basics() {
        let p = harper_params(0.9);
        let x = 0.123;
        // m = n: single site at the shifted phase.
        let d = shifted_det(&p, x, 5, 5);
        let expect = Complex64::new(p.potential_at(x, 5), 0.0) - p.energy;
        assert!((d.to_complex() - expect).norm() < 1e-13 * expect.norm());
        // m = 1 reduces to the plain recurrence.
        let d = shifted_det(&p, x, 1, 7);
        let direct = det_recurrence(&p, x, 7).last();
        assert!((d.log_mag - direct.log_mag).abs() < 1e-12);
        // [3, 7] equals the recurrence at x + 2 w.
        let d = shifted_det(&p, x, 3, 7);
        let direct = det_recurrence(&p, x + 2.0 * p.omega_f64(), 5).last();
        assert!((d.log_mag - direct.log_mag).abs() < 1e-12);
        assert!((d.phase - direct.phase).norm() < 1e-12);
    }

    #[test]
    fn identity_free_case_exact() {
        // v = 0, a = 1, E = 0, n = 3: the +-1/0 pattern matches exactly.
        let p = CocycleParams::new(
            AnalyticObservable::constant(Complex64::new(1.0, 0.0)),
            AnalyticObservable::constant(Complex64::new(0.0, 0.0)),
            Complex64::new(0.0, 0.0),
            golden(),
        );
        let r = det_identity_check(&p, 0.4, 3).unwrap();
        assert_eq!(r.max_log_residual, 0.0);
        assert_eq!(r.max_phase_residual, 0.0);
    }

    #[test]
    fn identity_amo_and_harper() {
        let p = amo_params(5.0, 0.0);
        for &x in &[0.051, 0.42, 0.777] {
            let r = det_identity_check(&p, x, 100).unwrap();
            assert!(r.max_log_residual <= 1e-8, "amo x={x}: {r:?}");
            assert!(r.max_phase_residual <= 1e-8, "amo x={x}: {r:?}");
        }
        let p = harper_params(0.3);
        for &x in &[0.19, 0.64] {
            let r = det_identity_check(&p, x, 50).unwrap();
            assert!(r.max_log_residual <= 1e-8, "harper x={x}: {r:?}");
            assert!(r.max_phase_residual <= 1e-8, "harper x={x}: {r:?}");
        }
    }

    #[test]
    fn top_left_entry_is_the_determinant() {
        let p = amo_params(5.0, 0.0);
        for &(x, n) in &[(0.21, 50usize), (0.66, 200)] {
            let m = transfer_product(&p, x, n, Variant::Analytic).unwrap();
            let (lm, _) = m.entry_log_mag(0, 0);
            let f = det_recurrence(&p, x, n).last();
            assert!(
                (lm - f.log_mag).abs() <= 1e-8 * f.log_mag.abs().max(1.0),
                "n={n} x={x}"
            );
        }
    }

    #[test]
    fn normalized_dets_unit_weight_coincide() {
        let p = amo_params(3.0, 0.1);
        let f = det_recurrence(&p, 0.3, 9).last();
        let (plain, uni) = normalized_dets(&p, 0.3, 9).unwrap();
        assert!((plain.log_mag - f.log_mag).abs() < 1e-12);
        assert!((uni.log_mag - f.log_mag).abs() < 1e-12);
    }

    #[test]
    fn normalized_dets_constant_weight() {
        // a = 2, n = 4: log|f_plain| = log|f_4^a| - 4 log 2 (and likewise
        // for the unimodular weights).
        let p = CocycleParams::new(
            AnalyticObservable::constant(Complex64::new(2.0, 0.0)),
            AnalyticObservable::amo_potential(1.5),
            Complex64::new(0.4, 0.0),
            golden(),
        );
        let f = det_recurrence(&p, 0.2, 4).last();
        let (plain, uni) = normalized_dets(&p, 0.2, 4).unwrap();
        assert!((plain.log_mag - (f.log_mag - 4.0 * 2f64.ln())).abs() < 1e-12);
        assert!((uni.log_mag - (f.log_mag - 4.0 * 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn unimodular_det_phase_rotation_invariant() {
        // |f_u| is invariant under a global phase rotation of the weight.
        let omega = golden();
        let base = AnalyticObservable::harper_weight(0.8, 1.0, 0.3, omega.value_f64());
        let v = AnalyticObservable::amo_potential(1.0);
        let p1 = CocycleParams::new(
            base.clone(),
            v.clone(),
            Complex64::new(0.5, 0.0),
            omega.clone(),
        );
        let p2 = CocycleParams::new(base.rotate_phase(1.234), v, Complex64::new(0.5, 0.0), omega);
        for &x in &[0.15, 0.52, 0.88] {
            let (_, u1) = normalized_dets(&p1, x, 30).unwrap();
            let (_, u2) = normalized_dets(&p2, x, 30).unwrap();
            assert!(
                (u1.log_mag - u2.log_mag).abs() <= 1e-10 * u1.log_mag.abs().max(1.0),
                "x = {x}"
            );
        }
    }

    #[test]
    fn hermitian_reality_of_phases() {
        // Real x, real E: H_n is Hermitian, so f_n is real and the phase is
        // a sign.
        let p = harper_params(0.7);
        for &x in &[0.05, 0.3, 0.62, 0.94] {
            for d in det_recurrence(&p, x, 40).values {
                assert!(d.phase.im.abs() < 1e-10, "phase {:?}", d.phase);
                assert!((d.phase.re.abs() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degree_and_leading_coefficient() {
        // E -> f_n(x, E) is a degree-n polynomial with leading coefficient
        // (-1)^n: the n-th finite difference at step 1 equals (-1)^n n!.
        let p = harper_params(0.0);
        let x = 0.37;
        for n in 1..=8usize {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut binom = 1.0f64;
            for k in 0..=n {
                let e = Complex64::new(k as f64 - n as f64 / 2.0, 0.0);
                let f = det_recurrence_at(&p, x, n, e).last().to_complex();
                let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                acc += f * sign * binom;
                binom = binom * (n - k) as f64 / (k + 1) as f64;
            }
            let factorial: f64 = (1..=n).map(|i| i as f64).product();
            let expect = factorial * if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!(
                (acc.re - expect).abs() <= 1e-8 * factorial && acc.im.abs() <= 1e-8 * factorial,
                "n = {n}: {acc} vs {expect}"
            );
        }
    }

    #[test]
    fn stats_dominant_diagonal() {
        // v = 0, a = 1, E = 100: f_n ~ (-100)^n, so the mean is near n log 100.
        let p = CocycleParams::new(
            AnalyticObservable::constant(Complex64::new(1.0, 0.0)),
            AnalyticObservable::constant(Complex64::new(0.0, 0.0)),
            Complex64::new(100.0, 0.0),
            golden(),
        );
        let s = log_det_stats(&p, 10, 9);
        let expect = 10.0 * 100f64.ln();
        assert!((s.mean - expect).abs() <= 0.02 * expect, "mean {}", s.mean);
        assert_eq!(s.clamped, 0);
    }

    #[test]
    fn stats_match_scalar_recurrence_oracle() {
        // Constant potential: f_n is a Chebyshev-like scalar recurrence.
        let p = CocycleParams::new(
            AnalyticObservable::constant(Complex64::new(1.0, 0.0)),
            AnalyticObservable::constant(Complex64::new(3.0, 0.0)),
            Complex64::new(0.25, 0.0),
            golden(),
        );
        let n = 24;
        let mut f_prev = 1.0f64;
        let mut f_cur = 3.0 - 0.25;
        for _ in 2..=n {
            let f_next = (3.0 - 0.25) * f_cur - f_prev;
            f_prev = f_cur;
            f_cur = f_next;
        }
        let s = log_det_stats(&p, n, 9);
        assert!((s.mean - f_cur.abs().ln()).abs() < 1e-10);
        assert!(s.deviations.iter().all(|d| d.abs() < 1e-10));
    }

    #[test]
    fn stats_mean_tracks_n_lyapunov() {
        let p = amo_params(5.0, 0.0);
        for n in [128usize, 256] {
            let s = log_det_stats(&p, n, 10);
            assert!(
                s.mean_minus_n_lyapunov.abs() <= 10.0,
                "n = {n}: gap {}",
                s.mean_minus_n_lyapunov
            );
        }
    }

    #[test]
    fn cancellation_reported_near_zeros() {
        // Scan for a phase where f_n nearly vanishes; the cancellation
        // diagnostic must notice.
        let p = amo_params(2.0, 0.1);
        let mut worst = 0.0f64;
        for i in 0..2000 {
            let x = i as f64 / 2000.0;
            let seq = det_recurrence(&p, x, 64);
            worst = worst.max(seq.max_cancellation_digits);
        }
        assert!(worst > 3.0, "no cancellation seen anywhere: {worst}");
    }
}
