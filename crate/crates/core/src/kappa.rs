//! The normal bilinear form `kappa = [[p, -w], [w, p]]` and the embedding of
//! planar vectors as 2x2 normal matrices (complex numbers acting on the plane).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{Mat2, Vec2};

/// Tolerance used by [`unembed_c`] to accept a matrix as `[[a, -b], [b, a]]`.
pub const NORMAL_FORM_TOL: f64 = 1e-9;

/// The pi/2 rotation `[[0, -1], [1, 0]]`.
pub fn r_perp() -> Mat2 {
    Mat2::new(0.0, -1.0, 1.0, 0.0)
}

/// Rotates a vector by pi/2 counterclockwise.
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Two-dimensional cross product `a.x * b.y - a.y * b.x`.
#[inline]
pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Maps `(a, b)` to the normal matrix `[[a, -b], [b, a]]`.
pub fn embed_c(v: Vec2) -> Mat2 {
    Mat2::new(v.x, -v.y, v.y, v.x)
}

/// Inverse of [`embed_c`]. Fails unless `m` has the normal form within
/// [`NORMAL_FORM_TOL`].
pub fn unembed_c(m: &Mat2) -> Result<Vec2> {
    let diag = (m[(0, 0)] - m[(1, 1)]).abs();
    let anti = (m[(0, 1)] + m[(1, 0)]).abs();
    if diag > NORMAL_FORM_TOL || anti > NORMAL_FORM_TOL {
        return Err(Error::Shape(format!(
            "matrix is not of the form [[a, -b], [b, a]] (diagonal mismatch {diag:e}, off-diagonal mismatch {anti:e})"
        )));
    }
    Ok(Vec2::new(
        0.5 * (m[(0, 0)] + m[(1, 1)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    ))
}

/// The pair `(p, w)`: potential (dissipative) and rotational parts of kappa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaForm {
    pub p: f64,
    pub w: f64,
}

impl KappaForm {
    pub const fn new(p: f64, w: f64) -> Self {
        Self { p, w }
    }

    pub fn sigma(&self) -> Vec2 {
        Vec2::new(self.p, self.w)
    }

    pub fn matrix(&self) -> Mat2 {
        embed_c(self.sigma())
    }

    /// `p^2 + w^2`, the determinant of the matrix form.
    pub fn det(&self) -> f64 {
        self.p * self.p + self.w * self.w
    }

    /// Angle by which kappa rotates a gradient, `atan2(w, p)`.
    pub fn angle(&self) -> f64 {
        self.w.atan2(self.p)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.p * c, self.w * c)
    }

    pub fn inverse(&self) -> Result<KappaForm> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::SingularKappa);
        }
        Ok(Self::new(self.p / det, -self.w / det))
    }
}

/// `kappa * g`, i.e. the complex product `(p + iw)(g_x + i g_y)`.
pub fn apply_kappa(kappa: KappaForm, gradient: Vec2) -> Vec2 {
    Vec2::new(
        kappa.p * gradient.x - kappa.w * gradient.y,
        kappa.p * gradient.y + kappa.w * gradient.x,
    )
}

/// Solves `velocity = kappa * gradient` for kappa (complex division).
pub fn kappa_from(velocity: Vec2, gradient: Vec2) -> Option<KappaForm> {
    let n2 = gradient.norm_squared();
    if n2 == 0.0 {
        return None;
    }
    Some(KappaForm::new(
        velocity.dot(&gradient) / n2,
        cross(gradient, velocity) / n2,
    ))
}
