//! Planar vector fields and the differential operators used on them.

use crate::error::{Error, Result};
use crate::{Mat2, Vec2};

/// Step of the central finite-difference Jacobian.
pub const FD_STEP: f64 = 1e-5;

/// A planar autonomous system `d/dt (x, y) = f(x, y)` with its fixed point at
/// the origin.
pub trait VectorField: Send + Sync {
    fn rhs(&self, p: Vec2) -> Vec2;

    /// Closed-form Jacobian `[[dfx/dx, dfx/dy], [dfy/dx, dfy/dy]]`, if known.
    fn analytic_jacobian(&self, _p: Vec2) -> Option<Mat2> {
        None
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn rhs(&self, p: Vec2) -> Vec2 {
        (**self).rhs(p)
    }
    fn analytic_jacobian(&self, p: Vec2) -> Option<Mat2> {
        (**self).analytic_jacobian(p)
    }
}

/// Wraps closures as a [`VectorField`]; handy for user-supplied systems and tests.
pub struct FnField<F, J = fn(Vec2) -> Mat2> {
    rhs: F,
    jacobian: Option<J>,
}

impl<F> FnField<F>
where
    F: Fn(Vec2) -> Vec2 + Send + Sync,
{
    pub fn new(rhs: F) -> Self {
        Self { rhs, jacobian: None }
    }
}

impl<F, J> FnField<F, J>
where
    F: Fn(Vec2) -> Vec2 + Send + Sync,
    J: Fn(Vec2) -> Mat2 + Send + Sync,
{
    pub fn with_jacobian(rhs: F, jacobian: J) -> Self {
        Self { rhs, jacobian: Some(jacobian) }
    }
}

impl<F, J> VectorField for FnField<F, J>
where
    F: Fn(Vec2) -> Vec2 + Send + Sync,
    J: Fn(Vec2) -> Mat2 + Send + Sync,
{
    fn rhs(&self, p: Vec2) -> Vec2 {
        (self.rhs)(p)
    }
    fn analytic_jacobian(&self, p: Vec2) -> Option<Mat2> {
        self.jacobian.as_ref().map(|j| j(p))
    }
}

fn checked_rhs<F: VectorField + ?Sized>(field: &F, p: Vec2) -> Result<Vec2> {
    let v = field.rhs(p);
    if v.x.is_finite() && v.y.is_finite() {
        Ok(v)
    } else {
        Err(Error::NumericalDomain { x: p.x, y: p.y })
    }
}

/// Central finite-difference Jacobian with step `h`.
pub fn fd_jacobian<F: VectorField + ?Sized>(field: &F, p: Vec2, h: f64) -> Result<Mat2> {
    let dx = Vec2::new(h, 0.0);
    let dy = Vec2::new(0.0, h);
    let cx = (checked_rhs(field, p + dx)? - checked_rhs(field, p - dx)?) / (2.0 * h);
    let cy = (checked_rhs(field, p + dy)? - checked_rhs(field, p - dy)?) / (2.0 * h);
    Ok(Mat2::new(cx.x, cy.x, cx.y, cy.y))
}

/// Analytic Jacobian when available, otherwise central differences with [`FD_STEP`].
pub fn jacobian<F: VectorField + ?Sized>(field: &F, p: Vec2) -> Result<Mat2> {
    if !(p.x.is_finite() && p.y.is_finite()) {
        return Err(Error::NumericalDomain { x: p.x, y: p.y });
    }
    match field.analytic_jacobian(p) {
        Some(j) if j.iter().all(|v| v.is_finite()) => Ok(j),
        Some(_) => Err(Error::NumericalDomain { x: p.x, y: p.y }),
        None => fd_jacobian(field, p, FD_STEP),
    }
}

pub fn divergence<F: VectorField + ?Sized>(field: &F, p: Vec2) -> Result<f64> {
    let j = jacobian(field, p)?;
    Ok(j[(0, 0)] + j[(1, 1)])
}

/// Scalar curl `dfy/dx - dfx/dy`.
pub fn curl<F: VectorField + ?Sized>(field: &F, p: Vec2) -> Result<f64> {
    let j = jacobian(field, p)?;
    Ok(j[(1, 0)] - j[(0, 1)])
}

/// Finite-difference operators on scalar and vector functions of the plane.
pub mod ops {
    use crate::{Mat2, Vec2};

    pub fn gradient(f: impl Fn(Vec2) -> f64, p: Vec2, h: f64) -> Vec2 {
        let dx = Vec2::new(h, 0.0);
        let dy = Vec2::new(0.0, h);
        Vec2::new(
            (f(p + dx) - f(p - dx)) / (2.0 * h),
            (f(p + dy) - f(p - dy)) / (2.0 * h),
        )
    }

    pub fn vector_jacobian(f: impl Fn(Vec2) -> Vec2, p: Vec2, h: f64) -> Mat2 {
        let dx = Vec2::new(h, 0.0);
        let dy = Vec2::new(0.0, h);
        let cx = (f(p + dx) - f(p - dx)) / (2.0 * h);
        let cy = (f(p + dy) - f(p - dy)) / (2.0 * h);
        Mat2::new(cx.x, cy.x, cx.y, cy.y)
    }

    pub fn divergence(f: impl Fn(Vec2) -> Vec2, p: Vec2, h: f64) -> f64 {
        let j = vector_jacobian(f, p, h);
        j[(0, 0)] + j[(1, 1)]
    }

    pub fn curl(f: impl Fn(Vec2) -> Vec2, p: Vec2, h: f64) -> f64 {
        let j = vector_jacobian(f, p, h);
        j[(1, 0)] - j[(0, 1)]
    }

    /// Five-point Laplacian.
    pub fn laplacian(f: impl Fn(Vec2) -> f64, p: Vec2, h: f64) -> f64 {
        let dx = Vec2::new(h, 0.0);
        let dy = Vec2::new(0.0, h);
        (f(p + dx) + f(p - dx) + f(p + dy) + f(p - dy) - 4.0 * f(p)) / (h * h)
    }

    pub fn hessian(f: impl Fn(Vec2) -> f64, p: Vec2, h: f64) -> Mat2 {
        let dx = Vec2::new(h, 0.0);
        let dy = Vec2::new(0.0, h);
        let fxx = (f(p + dx) - 2.0 * f(p) + f(p - dx)) / (h * h);
        let fyy = (f(p + dy) - 2.0 * f(p) + f(p - dy)) / (h * h);
        let fxy = (f(p + dx + dy) - f(p + dx - dy) - f(p - dx + dy) + f(p - dx - dy)) / (4.0 * h * h);
        Mat2::new(fxx, fxy, fxy, fyy)
    }
}
