use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// 2x3 affine map `p' = A p + t` from source (object-local) pixel
/// coordinates to canvas coordinates. Pixel centers sit on integer
/// coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineTransform {
    pub matrix: [[f64; 3]; 2],
}

impl Default for AffineTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl AffineTransform {
    pub const IDENTITY: AffineTransform = AffineTransform {
        matrix: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
    };

    /// Validating constructor: finite entries and a positive determinant.
    pub fn from_matrix(matrix: [[f64; 3]; 2]) -> Result<Self> {
        let t = AffineTransform { matrix };
        t.validate()?;
        Ok(t)
    }

    pub fn translation(dx: f64, dy: f64) -> Self {
        AffineTransform {
            matrix: [[1.0, 0.0, dx], [0.0, 1.0, dy]],
        }
    }

    /// Isotropic scaling by `s` with fixed point `center`.
    pub fn scale_about(s: f64, center: Point) -> Self {
        let [cx, cy] = center;
        AffineTransform {
            matrix: [[s, 0.0, cx - s * cx], [0.0, s, cy - s * cy]],
        }
    }

    /// Counter-clockwise rotation (in image axes: x right, y down) about `center`.
    pub fn rotation_about(theta: f64, center: Point) -> Self {
        let (sin, cos) = theta.sin_cos();
        let [cx, cy] = center;
        AffineTransform {
            matrix: [
                [cos, -sin, cx - cos * cx + sin * cy],
                [sin, cos, cy - sin * cx - cos * cy],
            ],
        }
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        let [[a, b, tx], [c, d, ty]] = self.matrix;
        [a * p[0] + b * p[1] + tx, c * p[0] + d * p[1] + ty]
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &AffineTransform) -> AffineTransform {
        let [[a1, b1, t1], [c1, d1, u1]] = self.matrix;
        let [[a2, b2, t2], [c2, d2, u2]] = next.matrix;
        AffineTransform {
            matrix: [
                [a2 * a1 + b2 * c1, a2 * b1 + b2 * d1, a2 * t1 + b2 * u1 + t2],
                [c2 * a1 + d2 * c1, c2 * b1 + d2 * d1, c2 * t1 + d2 * u1 + u2],
            ],
        }
    }

    pub fn determinant(&self) -> f64 {
        let [[a, b, _], [c, d, _]] = self.matrix;
        a * d - b * c
    }

    /// Geometric-mean scale, `sqrt(det)`.
    pub fn scale_factor(&self) -> f64 {
        self.determinant().max(0.0).sqrt()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn validate(&self) -> Result<()> {
        if self.matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTransform("non-finite matrix entry".into()));
        }
        let det = self.determinant();
        if !det.is_finite() || det <= 0.0 {
            return Err(Error::InvalidTransform(format!(
                "scale component must be positive, determinant is {det}"
            )));
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<AffineTransform> {
        self.validate()?;
        let [[a, b, tx], [c, d, ty]] = self.matrix;
        if b == 0.0 && c == 0.0 && a == 1.0 && d == 1.0 {
            // exact for pure translations
            return Ok(AffineTransform::translation(-tx, -ty));
        }
        let det = self.determinant();
        let (ia, ib, ic, id) = (d / det, -b / det, -c / det, a / det);
        Ok(AffineTransform {
            matrix: [
                [ia, ib, -(ia * tx + ib * ty)],
                [ic, id, -(ic * tx + id * ty)],
            ],
        })
    }
}
