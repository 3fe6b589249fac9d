//! Central finite differences on chart evaluators.
//!
//! First derivatives use the five-point central stencil
//! `(f(-2h) - 8f(-h) + 8f(h) - f(2h)) / 12h`, which is exact on
//! polynomials through degree four. Nested constructions (derivatives
//! of quantities that are themselves finite differences) reuse the same
//! stencil at the `nested_step`.
//!
//! Curves that must stay on a constraint set `{C(p) = 0}` are corrected
//! by Gauss-Newton projection with the constraint Jacobian frozen at
//! the base point; the correction is `O(λ²)` along the curve, so it
//! does not disturb the tangent vector being measured.

use nalgebra::{DMatrix, DVector};

use crate::linalg;

/// Step sizes for the difference stencils, overridable from the CLI.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    /// Step for first derivatives of directly-given evaluators.
    pub step: f64,
    /// Step for derivatives of finite-difference quantities.
    pub nested_step: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig {
            step: 1e-3,
            nested_step: 1e-3,
        }
    }
}

impl FdConfig {
    pub fn with_step(step: f64) -> Self {
        FdConfig {
            step,
            nested_step: step,
        }
    }
}

/// Five-point derivative of a scalar curve at 0.
pub fn deriv(f: impl Fn(f64) -> f64, h: f64) -> f64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

/// Five-point derivative of a vector curve at 0.
pub fn deriv_vec(f: impl Fn(f64) -> Vec<f64>, h: f64) -> Vec<f64> {
    let a = f(-2.0 * h);
    let b = f(-h);
    let c = f(h);
    let d = f(2.0 * h);
    (0..a.len())
        .map(|i| (a[i] - 8.0 * b[i] + 8.0 * c[i] - d[i]) / (12.0 * h))
        .collect()
}

pub fn add_scaled(p: &[f64], w: &[f64], lambda: f64) -> Vec<f64> {
    p.iter().zip(w).map(|(a, b)| a + lambda * b).collect()
}

/// Gradient of a scalar field.
pub fn grad(f: &dyn Fn(&[f64]) -> f64, p: &[f64], h: f64) -> DVector<f64> {
    DVector::from_iterator(
        p.len(),
        (0..p.len()).map(|i| {
            deriv(
                |l| {
                    let mut q = p.to_vec();
                    q[i] += l;
                    f(&q)
                },
                h,
            )
        }),
    )
}

/// Jacobian of a vector-valued map, one stencil per input coordinate.
pub fn jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], h: f64) -> DMatrix<f64> {
    let out_dim = f(p).len();
    let mut jac = DMatrix::zeros(out_dim, p.len());
    for j in 0..p.len() {
        let col = deriv_vec(
            |l| {
                let mut q = p.to_vec();
                q[j] += l;
                f(&q)
            },
            h,
        );
        for i in 0..out_dim {
            jac[(i, j)] = col[i];
        }
    }
    jac
}

/// Directional derivative along `w`.
pub fn directional(f: &dyn Fn(&[f64]) -> Vec<f64>, p: &[f64], w: &[f64], h: f64) -> Vec<f64> {
    deriv_vec(|l| f(&add_scaled(p, w, l)), h)
}

/// Gauss-Newton projector onto a constraint set `{C(p) = 0}`, with the
/// constraint Jacobian (and its pseudo-inverse) frozen at a base point.
pub struct Projector<'a> {
    constraint: &'a dyn Fn(&[f64]) -> Vec<f64>,
    pinv: DMatrix<f64>,
}

impl<'a> Projector<'a> {
    /// Build the projector at `p0`. An empty constraint (zero outputs)
    /// yields a no-op projector.
    pub fn new(constraint: &'a dyn Fn(&[f64]) -> Vec<f64>, p0: &[f64], h: f64) -> Self {
        let dim = constraint(p0).len();
        let pinv = if dim == 0 {
            DMatrix::zeros(p0.len(), 0)
        } else {
            let jac = jacobian(constraint, p0, h);
            linalg::pinv(&jac, linalg::RANK_REL_TOL)
        };
        Projector { constraint, pinv }
    }

    /// Five frozen-Jacobian Gauss-Newton steps. For points at distance
    /// `O(λ)` from the base this contracts the constraint residual to
    /// rounding level. A fixed iteration count keeps the projection a
    /// smooth function of the input.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        if self.pinv.ncols() == 0 {
            return p.to_vec();
        }
        let mut q = DVector::from_column_slice(p);
        for _ in 0..5 {
            let c = DVector::from_vec((self.constraint)(q.as_slice()));
            q -= &self.pinv * c;
        }
        q.as_slice().to_vec()
    }
}

/// Derivative of `λ ↦ f(Π(p0 + λ w))` at 0, where `Π` projects back
/// onto the constraint set. `w` must be tangent to the constraint at
/// `p0` (the projection then moves points by `O(λ²)` only).
pub fn constrained_directional(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    projector: &Projector,
    p0: &[f64],
    w: &[f64],
    h: f64,
) -> Vec<f64> {
    deriv_vec(|l| f(&projector.project(&add_scaled(p0, w, l))), h)
}
