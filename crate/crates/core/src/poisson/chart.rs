//! Coordinate presentations of Lie groupoids and their smooth actions.
//!
//! A `CoordinateGroupoid` is a groupoid whose object and arrow spaces
//! are boxes in Euclidean space, with all five structure maps given as
//! closures (built-ins) or expression trees (manifests). All geometric
//! checks in this crate evaluate these maps pointwise; there is no
//! atlas machinery because every check is local.

use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::report::{CheckReport, CheckRow};

use super::fd::{self, FdConfig, Projector};

/// Shared vector-valued chart evaluator.
pub type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// An axis-aligned box; the chart domain and sampling region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChartBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ChartBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len());
        ChartBox { lo, hi }
    }

    /// The symmetric box `[-r, r]^dim`.
    pub fn symmetric(dim: usize, r: f64) -> Self {
        ChartBox {
            lo: vec![-r; dim],
            hi: vec![r; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| if a == b { a } else { rng.random_range(a..b) })
            .collect()
    }
}

/// A point of a cotangent bundle in chart coordinates: a base point and
/// covector components.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    pub base: Vec<f64>,
    pub covector: Vec<f64>,
}

impl CotangentPoint {
    pub fn new(base: Vec<f64>, covector: Vec<f64>) -> Self {
        assert_eq!(base.len(), covector.len());
        CotangentPoint { base, covector }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Flat `(base, covector)` coordinates, the phase-space chart.
    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.base.clone();
        v.extend_from_slice(&self.covector);
        v
    }

    pub fn from_flat(v: &[f64]) -> Self {
        let d = v.len() / 2;
        CotangentPoint {
            base: v[..d].to_vec(),
            covector: v[d..].to_vec(),
        }
    }
}

/// A Lie groupoid presented by chart evaluators on box domains.
pub struct CoordinateGroupoid {
    pub name: String,
    pub base_dim: usize,
    pub arrow_dim: usize,
    pub base_box: ChartBox,
    pub arrow_box: ChartBox,
    source: VecFn,
    target: VecFn,
    /// Multiplication on `(x, y)` pairs, concatenated coordinates.
    multiply: VecFn,
    invert: VecFn,
    unit: VecFn,
    /// Optional closed-form frame of `ker Dt` along the unit section,
    /// as a `q ↦ arrow_dim × fiber_dim` column matrix (flattened
    /// column-major). When absent a projection frame is constructed.
    frame_fn: Option<Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>>,
    reference_frame: OnceLock<DMatrix<f64>>,
}

impl std::fmt::Debug for CoordinateGroupoid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoordinateGroupoid")
            .field("name", &self.name)
            .field("base_dim", &self.base_dim)
            .field("arrow_dim", &self.arrow_dim)
            .finish()
    }
}

impl CoordinateGroupoid {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        base_dim: usize,
        arrow_dim: usize,
        base_box: ChartBox,
        arrow_box: ChartBox,
        source: VecFn,
        target: VecFn,
        multiply: VecFn,
        invert: VecFn,
        unit: VecFn,
        frame_fn: Option<Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>>,
    ) -> Result<Self> {
        if arrow_dim < base_dim {
            return Err(Error::InvalidParameter(
                "arrow space cannot have lower dimension than the base".into(),
            ));
        }
        if base_box.dim() != base_dim || arrow_box.dim() != arrow_dim {
            return Err(Error::InvalidParameter("chart box dimensions disagree".into()));
        }
        Ok(CoordinateGroupoid {
            name: name.into(),
            base_dim,
            arrow_dim,
            base_box,
            arrow_box,
            source,
            target,
            multiply,
            invert,
            unit,
            frame_fn,
            reference_frame: OnceLock::new(),
        })
    }

    /// Fiber dimension of the Lie algebroid (`ker Dt` along units).
    pub fn fiber_dim(&self) -> usize {
        self.arrow_dim - self.base_dim
    }

    pub fn source(&self, x: &[f64]) -> Vec<f64> {
        (self.source)(x)
    }

    pub fn target(&self, x: &[f64]) -> Vec<f64> {
        (self.target)(x)
    }

    pub fn multiply(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut p = x.to_vec();
        p.extend_from_slice(y);
        (self.multiply)(&p)
    }

    pub fn multiply_flat(&self, xy: &[f64]) -> Vec<f64> {
        (self.multiply)(xy)
    }

    pub fn invert(&self, x: &[f64]) -> Vec<f64> {
        (self.invert)(x)
    }

    pub fn unit(&self, q: &[f64]) -> Vec<f64> {
        (self.unit)(q)
    }

    pub fn source_jacobian(&self, x: &[f64], fd: &FdConfig) -> DMatrix<f64> {
        fd::jacobian(&|p| (self.source)(p), x, fd.step)
    }

    pub fn target_jacobian(&self, x: &[f64], fd: &FdConfig) -> DMatrix<f64> {
        fd::jacobian(&|p| (self.target)(p), x, fd.step)
    }

    pub fn invert_jacobian(&self, x: &[f64], fd: &FdConfig) -> DMatrix<f64> {
        fd::jacobian(&|p| (self.invert)(p), x, fd.step)
    }

    pub fn unit_jacobian(&self, q: &[f64], fd: &FdConfig) -> DMatrix<f64> {
        fd::jacobian(&|p| (self.unit)(p), q, fd.step)
    }

    /// A smooth frame of `ker Dt` at the unit over `q`, as columns of an
    /// `arrow_dim × fiber_dim` matrix.
    ///
    /// Built-ins supply closed forms. The fallback projects a reference
    /// kernel basis (computed once at the box center) onto the kernel at
    /// `q`; this varies smoothly with `q` while the rank is constant.
    pub fn algebroid_frame(&self, q: &[f64], fd: &FdConfig) -> Result<DMatrix<f64>> {
        let k = self.fiber_dim();
        if let Some(f) = &self.frame_fn {
            return Ok(f(q));
        }
        if k == 0 {
            return Ok(DMatrix::zeros(self.arrow_dim, 0));
        }
        let reference = self
            .reference_frame
            .get_or_init(|| {
                let q0 = self.base_box.center();
                let dt = self.target_jacobian(&self.unit(&q0), fd);
                linalg::kernel_basis(&dt, linalg::RANK_REL_TOL)
            })
            .clone();
        if reference.ncols() != k {
            return Err(Error::DegenerateKernel(format!(
                "target differential has kernel of dimension {} at the reference point, expected {}",
                reference.ncols(),
                k
            )));
        }
        let dt = self.target_jacobian(&self.unit(q), fd);
        let pinv = linalg::pinv(&dt, linalg::RANK_REL_TOL);
        let projector = DMatrix::identity(self.arrow_dim, self.arrow_dim) - &pinv * &dt;
        let frame = projector * reference;
        if linalg::rank(&frame, 1e-6) != k {
            return Err(Error::DegenerateKernel(format!(
                "projected frame at {q:?} lost rank"
            )));
        }
        Ok(frame)
    }

    /// Columns spanning the tangent of the unit section at `unit(q)`.
    pub fn unit_section_tangent(&self, q: &[f64], fd: &FdConfig) -> DMatrix<f64> {
        self.unit_jacobian(q, fd)
    }

    /// Sample an arrow and then project a second raw sample onto the
    /// composable locus `{source(x) = target(y)}`.
    pub fn sample_composable_pair(
        &self,
        rng: &mut impl Rng,
        fd: &FdConfig,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        for _ in 0..64 {
            let x = self.arrow_box.sample(rng);
            let y0 = self.arrow_box.sample(rng);
            let sx = self.source(&x);
            let c = |y: &[f64]| {
                self.target(y)
                    .iter()
                    .zip(&sx)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>()
            };
            let proj = Projector::new(&c, &y0, fd.step);
            let mut y = y0.clone();
            for _ in 0..8 {
                y = proj.project(&y);
            }
            let residual = c(&y).iter().map(|v| v.abs()).fold(0.0, f64::max);
            if residual < 1e-10 && self.arrow_box.contains(&y) {
                return Ok((x, y));
            }
        }
        Err(Error::Domain(
            "could not sample a composable pair inside the arrow box".into(),
        ))
    }

    /// Pointwise verification of the groupoid identities at seeded
    /// samples.
    pub fn check_identities(
        &self,
        samples: usize,
        tol: f64,
        rng: &mut impl Rng,
        fd: &FdConfig,
    ) -> CheckReport {
        let mut unit_endpoints = 0.0f64;
        let mut inverse_law = 0.0f64;
        let mut endpoint_law = 0.0f64;
        let mut unit_law = 0.0f64;
        let mut assoc = 0.0f64;
        let inf = |v: &[f64], w: &[f64]| -> f64 {
            v.iter()
                .zip(w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        for _ in 0..samples {
            let q = self.base_box.sample(rng);
            let u = self.unit(&q);
            unit_endpoints = unit_endpoints
                .max(inf(&self.source(&u), &q))
                .max(inf(&self.target(&u), &q));

            let x = self.arrow_box.sample(rng);
            let xi = self.invert(&x);
            inverse_law = inverse_law
                .max(inf(&self.multiply(&x, &xi), &self.unit(&self.target(&x))))
                .max(inf(&self.multiply(&xi, &x), &self.unit(&self.source(&x))))
                .max(inf(&self.invert(&xi), &x));

            unit_law = unit_law
                .max(inf(&self.multiply(&self.unit(&self.target(&x)), &x), &x))
                .max(inf(&self.multiply(&x, &self.unit(&self.source(&x))), &x));

            if let Ok((x, y)) = self.sample_composable_pair(rng, fd) {
                let xy = self.multiply(&x, &y);
                endpoint_law = endpoint_law
                    .max(inf(&self.target(&xy), &self.target(&x)))
                    .max(inf(&self.source(&xy), &self.source(&y)));

                // Extend to a composable triple: z with target(z) = source(y).
                let sy = self.source(&y);
                let c = |z: &[f64]| {
                    self.target(z)
                        .iter()
                        .zip(&sy)
                        .map(|(a, b)| a - b)
                        .collect::<Vec<_>>()
                };
                let z0 = self.arrow_box.sample(rng);
                let proj = Projector::new(&c, &z0, fd.step);
                let mut z = z0;
                for _ in 0..8 {
                    z = proj.project(&z);
                }
                if c(&z).iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-10 {
                    let yz = self.multiply(&y, &z);
                    assoc = assoc.max(inf(&self.multiply(&xy, &z), &self.multiply(&x, &yz)));
                }
            }
        }
        CheckReport::new(
            format!("groupoid-identities:{}", self.name),
            vec![
                CheckRow::new("unit-endpoints", unit_endpoints, tol),
                CheckRow::new("inverse-law", inverse_law, tol),
                CheckRow::new("composition-endpoints", endpoint_law, tol),
                CheckRow::new("unit-law", unit_law, tol),
                CheckRow::new("associativity", assoc, tol),
            ],
        )
    }
}

/// Which side a groupoid acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A smooth groupoid action on a manifold chart. The evaluator takes
/// `(arrow, point)` coordinates concatenated in this order for both
/// sides; for a right action `apply(h, m)` means `m · h`.
#[derive(Clone)]
pub struct SmoothAction {
    pub groupoid: Arc<CoordinateGroupoid>,
    pub side: Side,
    pub manifold_dim: usize,
    pub manifold_box: ChartBox,
    base_map: VecFn,
    action: VecFn,
}

impl std::fmt::Debug for SmoothAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothAction")
            .field("groupoid", &self.groupoid.name)
            .field("side", &self.side)
            .field("manifold_dim", &self.manifold_dim)
            .finish()
    }
}

impl SmoothAction {
    pub fn new(
        groupoid: Arc<CoordinateGroupoid>,
        side: Side,
        manifold_dim: usize,
        manifold_box: ChartBox,
        base_map: VecFn,
        action: VecFn,
    ) -> Result<Self> {
        if manifold_box.dim() != manifold_dim {
            return Err(Error::InvalidParameter("manifold box dimension disagrees".into()));
        }
        Ok(SmoothAction {
            groupoid,
            side,
            manifold_dim,
            manifold_box,
            base_map,
            action,
        })
    }

    /// The base map: `tau` for a left action, `sigma` for a right one.
    pub fn base_map(&self, m: &[f64]) -> Vec<f64> {
        (self.base_map)(m)
    }

    /// `x · m` (left) or `m · h` (right).
    pub fn apply(&self, arrow: &[f64], point: &[f64]) -> Vec<f64> {
        let mut p = arrow.to_vec();
        p.extend_from_slice(point);
        (self.action)(&p)
    }

    pub fn apply_flat(&self, arrow_point: &[f64]) -> Vec<f64> {
        (self.action)(arrow_point)
    }

    pub fn base_map_jacobian(&self, m: &[f64], fd: &FdConfig) -> DMatrix<f64> {
        fd::jacobian(&|p| (self.base_map)(p), m, fd.step)
    }

    /// Wrap the action evaluator (used by negative controls in tests).
    pub fn with_action(&self, action: VecFn) -> Self {
        let mut out = self.clone();
        out.action = action;
        out
    }

    /// Sample `(arrow, point)` with the composability constraint
    /// (`source(x) = tau(m)` on the left, `sigma(m) = target(h)` on the
    /// right) solved by projecting the point sample.
    pub fn sample_pair(&self, rng: &mut impl Rng, fd: &FdConfig) -> Result<(Vec<f64>, Vec<f64>)> {
        for _ in 0..64 {
            let x = self.groupoid.arrow_box.sample(rng);
            let m0 = self.manifold_box.sample(rng);
            let anchor = match self.side {
                Side::Left => self.groupoid.source(&x),
                Side::Right => self.groupoid.target(&x),
            };
            let c = |m: &[f64]| {
                self.base_map(m)
                    .iter()
                    .zip(&anchor)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>()
            };
            let proj = Projector::new(&c, &m0, fd.step);
            let mut m = m0;
            for _ in 0..8 {
                m = proj.project(&m);
            }
            let residual = c(&m).iter().map(|v| v.abs()).fold(0.0, f64::max);
            if residual < 1e-10 && self.manifold_box.contains(&m) {
                return Ok((x, m));
            }
        }
        Err(Error::Domain(
            "could not sample a composable (arrow, point) pair".into(),
        ))
    }

    /// Pointwise action-law verification at seeded samples.
    pub fn check_action_identities(
        &self,
        samples: usize,
        tol: f64,
        rng: &mut impl Rng,
        fd: &FdConfig,
    ) -> CheckReport {
        let g = &self.groupoid;
        let inf = |v: &[f64], w: &[f64]| -> f64 {
            v.iter()
                .zip(w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let mut base_law = 0.0f64;
        let mut unit_law = 0.0f64;
        let mut assoc = 0.0f64;
        for _ in 0..samples {
            if let Ok((x, m)) = self.sample_pair(rng, fd) {
                let xm = self.apply(&x, &m);
                match self.side {
                    Side::Left => {
                        base_law = base_law.max(inf(&self.base_map(&xm), &g.target(&x)));
                    }
                    Side::Right => {
                        base_law = base_law.max(inf(&self.base_map(&xm), &g.source(&x)));
                    }
                }
                let u = g.unit(&self.base_map(&m));
                unit_law = unit_law.max(inf(&self.apply(&u, &m), &m));

                // Second arrow composable with x.
                let anchor = match self.side {
                    Side::Left => g.target(&x),
                    Side::Right => g.source(&x),
                };
                let c = |y: &[f64]| {
                    let v = match self.side {
                        Side::Left => g.source(y),
                        Side::Right => g.target(y),
                    };
                    v.iter().zip(&anchor).map(|(a, b)| a - b).collect::<Vec<_>>()
                };
                let y0 = g.arrow_box.sample(rng);
                let proj = Projector::new(&c, &y0, fd.step);
                let mut y = y0;
                for _ in 0..8 {
                    y = proj.project(&y);
                }
                if c(&y).iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-10 {
                    match self.side {
                        Side::Left => {
                            let yxm = self.apply(&y, &xm);
                            let yx = g.multiply(&y, &x);
                            assoc = assoc.max(inf(&yxm, &self.apply(&yx, &m)));
                        }
                        Side::Right => {
                            let xym = self.apply(&y, &xm);
                            let xy = g.multiply(&x, &y);
                            assoc = assoc.max(inf(&xym, &self.apply(&xy, &m)));
                        }
                    }
                }
            }
        }
        CheckReport::new(
            "action-identities",
            vec![
                CheckRow::new("base-map-law", base_law, tol),
                CheckRow::new("unit-acts-trivially", unit_law, tol),
                CheckRow::new("action-associativity", assoc, tol),
            ],
        )
    }
}

/// A smooth bibundle: commuting left and right actions on one manifold
/// chart.
#[derive(Debug, Clone)]
pub struct SmoothBibundle {
    pub left: SmoothAction,
    pub right: SmoothAction,
}

impl SmoothBibundle {
    pub fn new(left: SmoothAction, right: SmoothAction) -> Result<Self> {
        if left.side != Side::Left || right.side != Side::Right {
            return Err(Error::InvalidParameter("bibundle sides are mislabeled".into()));
        }
        if left.manifold_dim != right.manifold_dim {
            return Err(Error::InvalidParameter(
                "bibundle actions live on different manifolds".into(),
            ));
        }
        Ok(SmoothBibundle { left, right })
    }

    pub fn manifold_dim(&self) -> usize {
        self.left.manifold_dim
    }

    pub fn manifold_box(&self) -> &ChartBox {
        &self.left.manifold_box
    }

    /// Sampled verification that the two actions commute and preserve
    /// each other's base maps.
    pub fn check_commutation(
        &self,
        samples: usize,
        tol: f64,
        rng: &mut impl Rng,
        fd: &FdConfig,
    ) -> CheckReport {
        let inf = |v: &[f64], w: &[f64]| -> f64 {
            v.iter()
                .zip(w)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let mut base_invariance = 0.0f64;
        let mut commutation = 0.0f64;
        for _ in 0..samples {
            let (x, m) = match self.left.sample_pair(rng, fd) {
                Ok(p) => p,
                Err(_) => continue,
            };
            // Right arrow composable at the same point.
            let sig = self.right.base_map(&m);
            let c = |h: &[f64]| {
                self.right
                    .groupoid
                    .target(h)
                    .iter()
                    .zip(&sig)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>()
            };
            let h0 = self.right.groupoid.arrow_box.sample(rng);
            let proj = Projector::new(&c, &h0, fd.step);
            let mut h = h0;
            for _ in 0..8 {
                h = proj.project(&h);
            }
            if c(&h).iter().map(|v| v.abs()).fold(0.0, f64::max) >= 1e-10 {
                continue;
            }
            let xm = self.left.apply(&x, &m);
            let mh = self.right.apply(&h, &m);
            base_invariance = base_invariance
                .max(inf(&self.left.base_map(&mh), &self.left.base_map(&m)))
                .max(inf(&self.right.base_map(&xm), &self.right.base_map(&m)));
            commutation = commutation.max(inf(
                &self.right.apply(&h, &xm),
                &self.left.apply(&x, &mh),
            ));
        }
        CheckReport::new(
            "bibundle-commutation",
            vec![
                CheckRow::new("base-map-invariance", base_invariance, tol),
                CheckRow::new("actions-commute", commutation, tol),
            ],
        )
    }
}
