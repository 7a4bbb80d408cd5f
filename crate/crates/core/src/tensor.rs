//! 2×2 tensors in chart coordinates.

use serde::{Deserialize, Serialize};

/// Symmetric 2×2 tensor `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { xx: 1.0, xy: 0.0, yy: 1.0 };

    pub fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Sym2 { xx, xy, yy }
    }

    pub fn scaled(s: f64) -> Self {
        Sym2 { xx: s, xy: 0.0, yy: s }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Positive definite by the trace/determinant test.
    pub fn is_positive_definite(&self) -> bool {
        self.trace() > 0.0 && self.det() > 0.0 && self.xx.is_finite() && self.yy.is_finite()
    }

    /// Closed-form inverse via the adjugate; symmetry is preserved exactly.
    pub fn inverse(&self) -> Sym2 {
        let det = self.det();
        Sym2 { xx: self.yy / det, xy: -self.xy / det, yy: self.xx / det }
    }

    pub fn quad(&self, v: [f64; 2]) -> f64 {
        self.xx * v[0] * v[0] + 2.0 * self.xy * v[0] * v[1] + self.yy * v[1] * v[1]
    }

    pub fn bilinear(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        self.xx * u[0] * v[0] + self.xy * (u[0] * v[1] + u[1] * v[0]) + self.yy * u[1] * v[1]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        self.as_mat().eigenvalues()
    }

    pub fn as_mat(&self) -> Mat2 {
        Mat2([[self.xx, self.xy], [self.xy, self.yy]])
    }

    pub fn mean(ts: &[Sym2]) -> Sym2 {
        let n = ts.len() as f64;
        let (mut xx, mut xy, mut yy) = (0.0, 0.0, 0.0);
        for t in ts {
            xx += t.xx;
            xy += t.xy;
            yy += t.yy;
        }
        Sym2 { xx: xx / n, xy: xy / n, yy: yy / n }
    }
}

/// General 2×2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn mul(&self, other: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &other.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn symmetric_part(&self) -> Sym2 {
        let m = &self.0;
        Sym2 { xx: m[0][0], xy: 0.5 * (m[0][1] + m[1][0]), yy: m[1][1] }
    }

    /// Eigenvalues assuming they are real (true for products of symmetric
    /// matrices with one factor positive definite); a negative discriminant
    /// from rounding is clamped to zero.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half = 0.5 * self.trace();
        let disc = (half * half - self.det()).max(0.0).sqrt();
        (half - disc, half + disc)
    }
}
