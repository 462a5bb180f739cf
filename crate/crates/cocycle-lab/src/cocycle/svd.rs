//! Expanding/contracting singular directions of (near-)unimodular matrices.

use num_complex::Complex64;

use super::{CocycleError, Mat2};

/// Unit singular directions of a 2x2 matrix `A` with `|det A| = 1`:
/// `A u_plus = norm * v_plus` and `A u_minus = norm^-1 * v_minus`,
/// with `u_plus` perpendicular to `u_minus` and likewise for the `v` pair.
#[derive(Debug, Clone, Copy)]
pub struct Directions {
    pub u_plus: [Complex64; 2],
    pub u_minus: [Complex64; 2],
    pub v_plus: [Complex64; 2],
    pub v_minus: [Complex64; 2],
    pub norm: f64,
}

fn normalize(v: [Complex64; 2]) -> [Complex64; 2] {
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

/// The unit vector Hermitian-orthogonal to `v`.
fn perp(v: [Complex64; 2]) -> [Complex64; 2] {
    [-v[1].conj(), v[0].conj()]
}

/// Complex wedge `u /\ w = u_0 w_1 - u_1 w_0`.
pub fn wedge(u: [Complex64; 2], w: [Complex64; 2]) -> Complex64 {
    u[0] * w[1] - u[1] * w[0]
}

/// Computes the polar-decomposition directions of `a`.
///
/// Fails with [`CocycleError::DegenerateSingularValues`] when `||a||` is so
/// close to 1 that the directions are ill-defined.
pub fn svd_directions(a: &Mat2) -> Result<Directions, CocycleError> {
    let m = &a.0;
    let g11 = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let g22 = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let g12 = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let tr = g11 + g22;
    let disc = ((g11 - g22).powi(2) + 4.0 * g12.norm_sqr()).max(0.0).sqrt();
    let lam_max = 0.5 * (tr + disc);
    let norm = lam_max.sqrt();
    if norm <= 1.0 + 1e-12 {
        return Err(CocycleError::DegenerateSingularValues { norm });
    }

    let u_plus = if g12.norm() == 0.0 {
        if g11 >= g22 {
            [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        } else {
            [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
        }
    } else {
        // Two algebraically equivalent eigenvector formulas; pick the better
        // conditioned one.
        let c1 = [g12, Complex64::new(lam_max - g11, 0.0)];
        let c2 = [Complex64::new(lam_max - g22, 0.0), g12.conj()];
        let n1 = c1[0].norm_sqr() + c1[1].norm_sqr();
        let n2 = c2[0].norm_sqr() + c2[1].norm_sqr();
        normalize(if n1 >= n2 { c1 } else { c2 })
    };
    let u_minus = perp(u_plus);
    let v_plus = normalize(a.mul_vec(u_plus));
    let v_minus = normalize(a.mul_vec(u_minus));
    Ok(Directions {
        u_plus,
        u_minus,
        v_plus,
        v_minus,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e1() -> [Complex64; 2] {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    }

    fn e2() -> [Complex64; 2] {
        [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]
    }

    /// Random SL(2, C) matrix with comfortably split singular values.
    pub(crate) fn random_sl2(rng: &mut ChaCha8Rng) -> Mat2 {
        loop {
            let mut entries = [[Complex64::new(0.0, 0.0); 2]; 2];
            for row in &mut entries {
                for e in row.iter_mut() {
                    *e = Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                }
            }
            let m = Mat2(entries);
            let d = m.det();
            if d.norm() < 1e-3 {
                continue;
            }
            let m = m.scale(1.0 / d.sqrt());
            if m.spectral_norm() > 1.0 + 1e-4 {
                return m;
            }
        }
    }

    #[test]
    fn diagonal_directions() {
        let a = Mat2::diag(2.0, 0.5);
        let d = svd_directions(&a).unwrap();
        assert!((d.norm - 2.0).abs() < 1e-14);
        assert!((wedge(d.u_plus, e1())).norm() < 1e-14);
        assert!((wedge(d.v_plus, e1())).norm() < 1e-14);
    }

    #[test]
    fn antidiagonal_directions() {
        // A e2 = (-2, 0): u_plus = e2, v_plus = -e1 up to phase, norm 2.
        let a = Mat2::from_rows(
            Complex64::new(0.0, 0.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let d = svd_directions(&a).unwrap();
        assert!((d.norm - 2.0).abs() < 1e-14);
        assert!(wedge(d.u_plus, e2()).norm() < 1e-14);
        assert!(wedge(d.v_plus, e1()).norm() < 1e-14);
    }

    #[test]
    fn near_identity_is_degenerate() {
        let a = Mat2::identity();
        assert!(matches!(
            svd_directions(&a),
            Err(CocycleError::DegenerateSingularValues { .. })
        ));
    }

    #[test]
    fn defining_relations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let a = random_sl2(&mut rng);
            let d = svd_directions(&a).unwrap();
            let au = a.mul_vec(d.u_plus);
            let diff_plus = [au[0] - d.v_plus[0] * d.norm, au[1] - d.v_plus[1] * d.norm];
            assert!(diff_plus[0].norm() + diff_plus[1].norm() < 1e-10);
            let au = a.mul_vec(d.u_minus);
            let s = 1.0 / d.norm;
            let diff_minus = [au[0] - d.v_minus[0] * s, au[1] - d.v_minus[1] * s];
            assert!(diff_minus[0].norm() + diff_minus[1].norm() < 1e-10);
            // Hermitian orthogonality.
            let ip = d.u_plus[0].conj() * d.u_minus[0] + d.u_plus[1].conj() * d.u_minus[1];
            assert!(ip.norm() < 1e-12);
            let ip = d.v_plus[0].conj() * d.v_minus[0] + d.v_plus[1].conj() * d.v_minus[1];
            assert!(ip.norm() < 1e-10);
        }
    }

    #[test]
    fn direction_stability_inequalities_sample() {
        // A 500-sample preview of the acceptance-scale check.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let a = random_sl2(&mut rng);
            let b = random_sl2(&mut rng);
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            let (da, dab, dba) = match (
                svd_directions(&a),
                svd_directions(&ab),
                svd_directions(&ba),
            ) {
                (Ok(x), Ok(y), Ok(z)) => (x, y, z),
                _ => continue,
            };
            let na = a.spectral_norm();
            let nb = b.spectral_norm();
            let slack = 1e-9;
            let lhs = wedge(b.mul_vec(dab.u_minus), da.u_minus).norm();
            assert!(lhs <= nb / (na * na) + slack);
            let lhs = wedge(dba.u_minus, da.u_minus).norm();
            assert!(lhs <= nb * nb / (na * na) + slack);
            let lhs = wedge(dab.v_plus, da.v_plus).norm();
            assert!(lhs <= nb * nb / (na * na) + slack);
            let lhs = wedge(dba.v_plus, b.mul_vec(da.v_plus)).norm();
            assert!(lhs <= nb / (na * na) + slack);
        }
    }
}
