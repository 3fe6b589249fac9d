//! Lie algebroid data extracted from a coordinate groupoid.
//!
//! The algebroid fiber over a base point `q` is the kernel of the
//! target differential at the unit arrow `unit(q)`; the anchor is the
//! source differential restricted to that kernel; the bracket comes
//! from commutators of left-invariant vector fields on the arrow space,
//! evaluated by nested finite differences and resolved in the frame
//! through the splitting of the arrow tangent space into the kernel and
//! the unit-section tangent.
//!
//! Covectors over the base live in two equivalent pictures: components
//! in the algebroid frame (`DualPoint`), or full arrow-chart covectors
//! that annihilate the unit-section tangent (the annihilator
//! convention). Conversions between the two are linear solves against
//! the frame and unit-section columns.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;

use super::chart::{ChartBox, CoordinateGroupoid};
use super::fd::{self, FdConfig, Projector};

/// A point of the dual bundle of a Lie algebroid: base coordinates plus
/// fiber components in the algebroid frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPoint {
    pub base: Vec<f64>,
    pub mu: Vec<f64>,
}

impl DualPoint {
    pub fn new(base: Vec<f64>, mu: Vec<f64>) -> Self {
        DualPoint { base, mu }
    }

    pub fn flat(&self) -> Vec<f64> {
        let mut v = self.base.clone();
        v.extend_from_slice(&self.mu);
        v
    }

    /// Max-norm distance, base and fiber together.
    pub fn distance(&self, other: &DualPoint) -> f64 {
        self.base
            .iter()
            .zip(&other.base)
            .chain(self.mu.iter().zip(&other.mu))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

type AnchorFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
type StructureFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;

/// Anchor matrix and structure functions of a Lie algebroid in a fixed
/// frame, as evaluators on the base chart.
///
/// `structure(q)[l][(i, j)]` is the coefficient of the `l`-th frame
/// vector in the bracket of the `i`-th and `j`-th; each matrix is
/// antisymmetric.
#[derive(Clone)]
pub struct LieAlgebroidChart {
    pub base_dim: usize,
    pub fiber_dim: usize,
    pub base_box: ChartBox,
    anchor: AnchorFn,
    structure: StructureFn,
}

impl std::fmt::Debug for LieAlgebroidChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LieAlgebroidChart")
            .field("base_dim", &self.base_dim)
            .field("fiber_dim", &self.fiber_dim)
            .finish()
    }
}

impl LieAlgebroidChart {
    pub fn new(
        base_dim: usize,
        fiber_dim: usize,
        base_box: ChartBox,
        anchor: AnchorFn,
        structure: StructureFn,
    ) -> Self {
        LieAlgebroidChart {
            base_dim,
            fiber_dim,
            base_box,
            anchor,
            structure,
        }
    }

    /// Constant anchor and structure functions. Rejects structure data
    /// that is not antisymmetric.
    pub fn constant(
        base_dim: usize,
        fiber_dim: usize,
        base_box: ChartBox,
        anchor: DMatrix<f64>,
        structure: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        if anchor.shape() != (base_dim, fiber_dim) {
            return Err(Error::Dimension {
                expected: base_dim * fiber_dim,
                got: anchor.len(),
            });
        }
        if structure.len() != fiber_dim
            || structure.iter().any(|c| c.shape() != (fiber_dim, fiber_dim))
        {
            return Err(Error::InvalidParameter(
                "structure functions must be fiber_dim matrices of shape fiber_dim²".into(),
            ));
        }
        for c in &structure {
            if (c + c.transpose()).amax() != 0.0 {
                return Err(Error::InvalidParameter(
                    "structure functions must be antisymmetric".into(),
                ));
            }
        }
        Ok(LieAlgebroidChart::new(
            base_dim,
            fiber_dim,
            base_box,
            Arc::new(move |_| anchor.clone()),
            Arc::new(move |_| structure.clone()),
        ))
    }

    /// The algebroid of a pair groupoid: identity anchor, zero bracket
    /// (its dual is the cotangent bundle with the canonical structure).
    pub fn canonical_cotangent(n: usize, base_box: ChartBox) -> Self {
        LieAlgebroidChart::new(
            n,
            n,
            base_box,
            Arc::new(move |_| DMatrix::identity(n, n)),
            Arc::new(move |_| vec![DMatrix::zeros(n, n); n]),
        )
    }

    pub fn anchor(&self, q: &[f64]) -> DMatrix<f64> {
        (self.anchor)(q)
    }

    pub fn structure(&self, q: &[f64]) -> Vec<DMatrix<f64>> {
        (self.structure)(q)
    }

    /// Worst antisymmetry violation of the structure functions at
    /// sampled base points.
    pub fn antisymmetry_residual(&self, samples: usize, rng: &mut impl Rng) -> f64 {
        let mut worst = 0.0f64;
        for _ in 0..samples.max(1) {
            let q = self.base_box.sample(rng);
            for c in self.structure(&q) {
                worst = worst.max((&c + c.transpose()).amax());
            }
        }
        worst
    }
}

/// Left-invariant extension of the `i`-th frame vector, evaluated at an
/// arrow `x`: the derivative of right translation by a kernel curve at
/// the unit over `source(x)`.
pub(crate) fn left_invariant_field(
    g: &CoordinateGroupoid,
    x: &[f64],
    frame_index: usize,
    fd_cfg: &FdConfig,
) -> Result<Vec<f64>> {
    let sx = g.source(x);
    let frame = g.algebroid_frame(&sx, fd_cfg)?;
    let e_i: Vec<f64> = frame.column(frame_index).iter().copied().collect();
    let unit = g.unit(&sx);
    let constraint = |y: &[f64]| {
        g.target(y)
            .iter()
            .zip(&sx)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>()
    };
    let projector = Projector::new(&constraint, &unit, fd_cfg.step);
    let f = |y: &[f64]| g.multiply(x, y);
    Ok(fd::constrained_directional(
        &f, &projector, &unit, &e_i, fd_cfg.step,
    ))
}

/// Extract anchor and structure functions of the Lie algebroid of a
/// coordinate groupoid. Both are lazy evaluators capturing the
/// groupoid; nothing is tabulated.
pub fn algebroid_from_groupoid(
    g: &Arc<CoordinateGroupoid>,
    fd_cfg: &FdConfig,
) -> LieAlgebroidChart {
    let k = g.fiber_dim();
    let n0 = g.base_dim;
    let anchor_g = g.clone();
    let anchor_fd = *fd_cfg;
    let anchor: AnchorFn = Arc::new(move |q: &[f64]| {
        let unit = anchor_g.unit(q);
        let ds = anchor_g.source_jacobian(&unit, &anchor_fd);
        let frame = anchor_g
            .algebroid_frame(q, &anchor_fd)
            .expect("frame at an interior base point");
        ds * frame
    });

    let structure_g = g.clone();
    let structure_fd = *fd_cfg;
    let structure: StructureFn = Arc::new(move |q: &[f64]| {
        let g = &structure_g;
        let fd_cfg = &structure_fd;
        let unit = g.unit(q);
        let frame = g
            .algebroid_frame(q, fd_cfg)
            .expect("frame at an interior base point");
        let unit_tangent = g.unit_section_tangent(q, fd_cfg);
        // Split T(arrow chart) = ker Dt ⊕ T(unit section).
        let mut split = DMatrix::zeros(g.arrow_dim, g.arrow_dim);
        split.view_mut((0, 0), (g.arrow_dim, k)).copy_from(&frame);
        split
            .view_mut((0, k), (g.arrow_dim, n0))
            .copy_from(&unit_tangent);
        let split_inv = linalg::pinv(&split, linalg::RANK_REL_TOL);

        let field_values: Vec<Vec<f64>> = (0..k)
            .map(|i| left_invariant_field(g, &unit, i, fd_cfg).expect("left-invariant field"))
            .collect();
        let mut c = vec![DMatrix::zeros(k, k); k];
        for i in 0..k {
            for j in (i + 1)..k {
                // Commutator [X_i, X_j] at the unit: derivative of X_j
                // along X_i minus derivative of X_i along X_j.
                let xj_along_xi = fd::deriv_vec(
                    |l| {
                        let p = fd::add_scaled(&unit, &field_values[i], l);
                        left_invariant_field(g, &p, j, fd_cfg).expect("left-invariant field")
                    },
                    fd_cfg.nested_step,
                );
                let xi_along_xj = fd::deriv_vec(
                    |l| {
                        let p = fd::add_scaled(&unit, &field_values[j], l);
                        left_invariant_field(g, &p, i, fd_cfg).expect("left-invariant field")
                    },
                    fd_cfg.nested_step,
                );
                let commutator = DVector::from_iterator(
                    g.arrow_dim,
                    xj_along_xi.iter().zip(&xi_along_xj).map(|(a, b)| a - b),
                );
                let coeffs = &split_inv * commutator;
                for l in 0..k {
                    c[l][(i, j)] = coeffs[l];
                    c[l][(j, i)] = -coeffs[l];
                }
            }
        }
        c
    });

    LieAlgebroidChart::new(n0, k, g.base_box.clone(), anchor, structure)
}

/// Extend algebroid-frame dual components to a full arrow-chart
/// covector at `unit(q)` that annihilates the unit-section tangent.
pub fn to_annihilator(
    g: &CoordinateGroupoid,
    q: &[f64],
    mu: &[f64],
    fd_cfg: &FdConfig,
) -> Result<Vec<f64>> {
    let k = g.fiber_dim();
    if mu.len() != k {
        return Err(Error::Dimension {
            expected: k,
            got: mu.len(),
        });
    }
    let frame = g.algebroid_frame(q, fd_cfg)?;
    let unit_tangent = g.unit_section_tangent(q, fd_cfg);
    // Want alpha with alpha^T * frame = mu and alpha^T * unit_tangent = 0.
    let mut lhs = DMatrix::zeros(g.arrow_dim, g.arrow_dim);
    lhs.view_mut((0, 0), (g.arrow_dim, k)).copy_from(&frame);
    lhs.view_mut((0, k), (g.arrow_dim, g.base_dim))
        .copy_from(&unit_tangent);
    let mut rhs = DVector::zeros(g.arrow_dim);
    for i in 0..k {
        rhs[i] = mu[i];
    }
    let alpha = linalg::lstsq(&lhs.transpose(), &rhs, linalg::RANK_REL_TOL);
    let residual = (lhs.transpose() * &alpha - rhs).amax();
    if residual > 1e-8 {
        return Err(Error::DegenerateKernel(format!(
            "frame and unit-section tangent do not split the arrow tangent space (residual {residual:.2e})"
        )));
    }
    Ok(alpha.as_slice().to_vec())
}

/// Restrict an arrow-chart covector at `unit(q)` to the algebroid frame.
pub fn mu_from_annihilator(
    g: &CoordinateGroupoid,
    q: &[f64],
    alpha: &[f64],
    fd_cfg: &FdConfig,
) -> Result<Vec<f64>> {
    if alpha.len() != g.arrow_dim {
        return Err(Error::Dimension {
            expected: g.arrow_dim,
            got: alpha.len(),
        });
    }
    let frame = g.algebroid_frame(q, fd_cfg)?;
    let a = DVector::from_column_slice(alpha);
    Ok((frame.transpose() * a).as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::registry::{aff1_groupoid, pair_groupoid, unit_groupoid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pair_groupoid_has_trivial_algebroid_data() {
        let g = pair_groupoid(3).unwrap();
        let fd_cfg = FdConfig::default();
        let chart = algebroid_from_groupoid(&g, &fd_cfg);
        assert_eq!(chart.fiber_dim, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let q = chart.base_box.sample(&mut rng);
            let anchor = chart.anchor(&q);
            assert!((anchor - DMatrix::identity(3, 3)).amax() < 1e-6);
            for c in chart.structure(&q) {
                assert!(c.amax() < 1e-3, "structure functions should vanish");
            }
        }
    }

    #[test]
    fn aff1_structure_constant_is_recovered() {
        let g = aff1_groupoid().unwrap();
        let fd_cfg = FdConfig::default();
        let chart = algebroid_from_groupoid(&g, &fd_cfg);
        assert_eq!(chart.base_dim, 0);
        assert_eq!(chart.fiber_dim, 2);
        let c = chart.structure(&[]);
        // Bracket of the two frame fields is the second frame field.
        assert!((c[1][(0, 1)] - 1.0).abs() < 1e-3, "c^2_12 = {}", c[1][(0, 1)]);
        assert!(c[0][(0, 1)].abs() < 1e-3);
        // Zero anchor over the point base.
        assert_eq!(chart.anchor(&[]).nrows(), 0);
    }

    #[test]
    fn unit_groupoid_has_zero_fiber() {
        let g = unit_groupoid(2).unwrap();
        let chart = algebroid_from_groupoid(&g, &FdConfig::default());
        assert_eq!(chart.fiber_dim, 0);
        assert!(chart.structure(&[0.1, 0.2]).is_empty());
    }

    #[test]
    fn annihilator_round_trip() {
        let g = pair_groupoid(2).unwrap();
        let fd_cfg = FdConfig::default();
        let q = [0.3, -0.7];
        let mu = [1.5, -2.0];
        let alpha = to_annihilator(&g, &q, &mu, &fd_cfg).unwrap();
        assert_eq!(alpha.len(), 4);
        // Must annihilate the unit-section tangent (the diagonal).
        let ut = g.unit_section_tangent(&q, &fd_cfg);
        let a = DVector::from_column_slice(&alpha);
        assert!((ut.transpose() * &a).amax() < 1e-9);
        let back = mu_from_annihilator(&g, &q, &alpha, &fd_cfg).unwrap();
        assert!((back[0] - mu[0]).abs() < 1e-9);
        assert!((back[1] - mu[1]).abs() < 1e-9);
    }

    #[test]
    fn constant_chart_rejects_non_antisymmetric_structure() {
        let mut c = DMatrix::zeros(2, 2);
        c[(0, 1)] = 1.0;
        // Not antisymmetrized.
        let result = LieAlgebroidChart::constant(
            0,
            2,
            ChartBox::new(vec![], vec![]),
            DMatrix::zeros(0, 2),
            vec![DMatrix::zeros(2, 2), c],
        );
        assert!(result.is_err());
    }
}
