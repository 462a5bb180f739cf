//! 2x2 complex matrices and their log-scaled products.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A plain 2x2 complex matrix in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn from_rows(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: f64, d: f64) -> Self {
        Self::from_rows(
            Complex64::new(a, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(d, 0.0),
        )
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    pub fn mul_vec(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        Mat2(self.0.map(|row| row.map(|e| e * s)))
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let inv = 1.0 / d;
        Some(Mat2([
            [self.0[1][1] * inv, -self.0[0][1] * inv],
            [-self.0[1][0] * inv, self.0[0][0] * inv],
        ]))
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|e| e.norm())
            .fold(0.0, f64::max)
    }

    /// Spectral norm from the closed-form singular values of the 2x2 Gram
    /// matrix.
    pub fn spectral_norm(&self) -> f64 {
        let a = &self.0;
        let g11 = a[0][0].norm_sqr() + a[1][0].norm_sqr();
        let g22 = a[0][1].norm_sqr() + a[1][1].norm_sqr();
        let g12 = a[0][0].conj() * a[0][1] + a[1][0].conj() * a[1][1];
        let tr = g11 + g22;
        let disc = ((g11 - g22).powi(2) + 4.0 * g12.norm_sqr()).max(0.0).sqrt();
        (0.5 * (tr + disc)).sqrt()
    }

    /// Smallest singular value, via `|det| / sigma_max` (stable when the
    /// matrix is far from singular in scaled form).
    pub fn smallest_singular_value(&self) -> f64 {
        let smax = self.spectral_norm();
        if smax == 0.0 {
            0.0
        } else {
            self.det().norm() / smax
        }
    }
}

/// A 2x2 complex matrix stored as normalized entries plus a natural-log scale
/// exponent; the represented matrix is `exp(log_scale) * entries`.
///
/// After every rescale the largest entry magnitude lies in `[1/2, 2]`, so
/// products of any length stay representable. The determinant log-magnitude
/// is carried multiplicatively alongside: for strongly hyperbolic products
/// the entrywise 2x2 determinant cancels catastrophically, while each factor
/// determinant is well-conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledMatrix2 {
    pub entries: Mat2,
    pub log_scale: f64,
    log_det: f64,
}

impl ScaledMatrix2 {
    pub fn identity() -> Self {
        ScaledMatrix2 {
            entries: Mat2::identity(),
            log_scale: 0.0,
            log_det: 0.0,
        }
    }

    pub fn from_mat(m: Mat2) -> Self {
        let mut s = ScaledMatrix2 {
            entries: m,
            log_scale: 0.0,
            log_det: m.det().norm().ln(),
        };
        s.rescale();
        s
    }

    /// Divides the entries by their max magnitude and accumulates its log.
    pub fn rescale(&mut self) {
        let m = self.entries.max_abs();
        if m > 0.0 && (m < 0.5 || m > 2.0) {
            let inv = Complex64::new(1.0 / m, 0.0);
            self.entries = self.entries.scale(inv);
            self.log_scale += m.ln();
        }
    }

    /// Left-multiplies by a plain factor and rescales.
    pub fn apply(&mut self, factor: &Mat2) {
        self.entries = factor.mul(&self.entries);
        self.log_det += factor.det().norm().ln();
        self.rescale();
    }

    /// Left-multiplies without rescaling (used by the rescale-stride checks).
    pub fn apply_no_rescale(&mut self, factor: &Mat2) {
        self.entries = factor.mul(&self.entries);
        self.log_det += factor.det().norm().ln();
    }

    pub fn mul(&self, rhs: &ScaledMatrix2) -> ScaledMatrix2 {
        let mut out = ScaledMatrix2 {
            entries: self.entries.mul(&rhs.entries),
            log_scale: self.log_scale + rhs.log_scale,
            log_det: self.log_det + rhs.log_det,
        };
        out.rescale();
        out
    }

    /// `log ||represented matrix||` (spectral norm).
    pub fn log_norm(&self) -> f64 {
        self.log_scale + self.entries.spectral_norm().ln()
    }

    /// `log |det(represented matrix)|`, carried multiplicatively.
    pub fn log_abs_det(&self) -> f64 {
        self.log_det
    }

    /// `log ||represented matrix^-1||`. The 2x2 adjugate shares the singular
    /// values of the matrix, so this is stable even when the smaller singular
    /// value underflows entrywise.
    pub fn log_inverse_norm(&self) -> f64 {
        let adj = Mat2([
            [self.entries.0[1][1], -self.entries.0[0][1]],
            [-self.entries.0[1][0], self.entries.0[0][0]],
        ]);
        adj.spectral_norm().ln() + self.log_scale - self.log_det
    }

    /// The represented matrix as a plain `Mat2`; overflows for large scales,
    /// so only use at moderate `log_scale`.
    pub fn represented(&self) -> Mat2 {
        self.entries.scale(Complex64::new(self.log_scale.exp(), 0.0))
    }

    /// Entry of the represented matrix as `(log-magnitude, unit phase)`.
    pub fn entry_log_mag(&self, row: usize, col: usize) -> (f64, Complex64) {
        let e = self.entries.0[row][col];
        let n = e.norm();
        if n == 0.0 {
            (f64::NEG_INFINITY, Complex64::new(1.0, 0.0))
        } else {
            (self.log_scale + n.ln(), e / n)
        }
    }
}
