//! Poisson bracket evaluators.
//!
//! On the dual of a Lie algebroid with base coordinates `q` and fiber
//! coordinates `mu` (in the algebroid frame), the bracket of two
//! functions is assembled from the anchor `a` and structure functions
//! `c`:
//!
//! ```text
//! {F, G} = Σ c^l_{ij} mu_l ∂F/∂mu_i ∂G/∂mu_j
//!        + Σ a_{αi} (∂F/∂mu_i ∂G/∂q_α − ∂G/∂mu_i ∂F/∂q_α)
//! ```
//!
//! On a cotangent chart `(m, θ)` the canonical bracket is
//! `{F, G} = Σ ∂F/∂θ_i ∂G/∂m_i − ∂F/∂m_i ∂G/∂θ_i`. For the algebroid of
//! a pair groupoid (identity anchor, zero structure) the two coincide.
//!
//! Derivatives are always finite differences of the field evaluators;
//! the kind tags (`Basic`, `Linear`, `Symbol`) exist so tests and
//! checkers can build the families on which the bracket's defining
//! special cases are exact.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::report::{CheckReport, CheckRow};

use super::algebroid::LieAlgebroidChart;
use super::chart::ChartBox;
use super::fd::{self, FdConfig};

type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A scalar field on a phase chart `(base, fiber)`, tagged by how it is
/// built from base data.
#[derive(Clone)]
pub enum ScalarField {
    /// Pullback of a function on the base: `F(base, fiber) = f(base)`.
    Basic(ScalarFn),
    /// Fiberwise-linear function of a section: `F = Σ s^i(base) fiber_i`.
    Linear(VectorFn),
    /// Symbol of a vector field on the base (cotangent charts only,
    /// where fiber components pair with base tangents):
    /// `F = Σ fiber_i ξ^i(base)`.
    Symbol(VectorFn),
    /// Arbitrary function of the full phase point.
    Generic(ScalarFn),
}

impl std::fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self {
            ScalarField::Basic(_) => "Basic",
            ScalarField::Linear(_) => "Linear",
            ScalarField::Symbol(_) => "Symbol",
            ScalarField::Generic(_) => "Generic",
        };
        write!(f, "ScalarField::{tag}")
    }
}

impl ScalarField {
    pub fn basic(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Basic(Arc::new(f))
    }

    pub fn linear(s: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        ScalarField::Linear(Arc::new(s))
    }

    /// Fiberwise-linear field of a constant section.
    pub fn constant_section(components: Vec<f64>) -> Self {
        ScalarField::Linear(Arc::new(move |_| components.clone()))
    }

    pub fn symbol(xi: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        ScalarField::Symbol(Arc::new(xi))
    }

    pub fn generic(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Generic(Arc::new(f))
    }

    /// The `i`-th base coordinate as a basic field.
    pub fn coordinate(i: usize) -> Self {
        ScalarField::basic(move |base| base[i])
    }

    /// The `i`-th fiber coordinate (the linear field of the `i`-th
    /// constant frame section).
    pub fn fiber_coordinate(i: usize, fiber_dim: usize) -> Self {
        let mut e = vec![0.0; fiber_dim];
        e[i] = 1.0;
        ScalarField::constant_section(e)
    }

    /// Evaluate at a phase point.
    pub fn eval(&self, base: &[f64], fiber: &[f64]) -> f64 {
        match self {
            ScalarField::Basic(f) => f(base),
            ScalarField::Linear(s) => {
                let comp = s(base);
                comp.iter().zip(fiber).map(|(a, b)| a * b).sum()
            }
            ScalarField::Symbol(xi) => {
                let v = xi(base);
                v.iter().zip(fiber).map(|(a, b)| a * b).sum()
            }
            ScalarField::Generic(f) => {
                let mut p = base.to_vec();
                p.extend_from_slice(fiber);
                f(&p)
            }
        }
    }
}

/// Gradient of a field split into base and fiber blocks.
fn phase_gradient(
    f: &ScalarField,
    base: &[f64],
    fiber: &[f64],
    h: f64,
) -> (Vec<f64>, Vec<f64>) {
    let db: Vec<f64> = (0..base.len())
        .map(|i| {
            fd::deriv(
                |l| {
                    let mut b = base.to_vec();
                    b[i] += l;
                    f.eval(&b, fiber)
                },
                h,
            )
        })
        .collect();
    let df: Vec<f64> = (0..fiber.len())
        .map(|i| {
            fd::deriv(
                |l| {
                    let mut p = fiber.to_vec();
                    p[i] += l;
                    f.eval(base, &p)
                },
                h,
            )
        })
        .collect();
    (db, df)
}

/// Linear Poisson bracket on the dual of a Lie algebroid, evaluated at
/// `(q, mu)`.
pub fn lie_poisson_bracket(
    chart: &LieAlgebroidChart,
    f: &ScalarField,
    g: &ScalarField,
    q: &[f64],
    mu: &[f64],
    fd_cfg: &FdConfig,
) -> Result<f64> {
    if !chart.base_box.contains(q) {
        return Err(Error::Domain(format!("base point {q:?} outside the chart box")));
    }
    if mu.len() != chart.fiber_dim {
        return Err(Error::Dimension {
            expected: chart.fiber_dim,
            got: mu.len(),
        });
    }
    let h = fd_cfg.step;
    let (f_q, f_mu) = phase_gradient(f, q, mu, h);
    let (g_q, g_mu) = phase_gradient(g, q, mu, h);
    let anchor = chart.anchor(q);
    let structure = chart.structure(q);

    let mut bracket = 0.0;
    for i in 0..chart.fiber_dim {
        for j in 0..chart.fiber_dim {
            if structure.is_empty() {
                break;
            }
            let mut c_mu = 0.0;
            for (l, c) in structure.iter().enumerate() {
                c_mu += c[(i, j)] * mu[l];
            }
            bracket += c_mu * f_mu[i] * g_mu[j];
        }
    }
    for alpha in 0..chart.base_dim {
        for i in 0..chart.fiber_dim {
            bracket += anchor[(alpha, i)] * (f_mu[i] * g_q[alpha] - g_mu[i] * f_q[alpha]);
        }
    }
    Ok(bracket)
}

/// Canonical bracket on a cotangent chart, evaluated at `(m, theta)`.
pub fn canonical_bracket(
    f: &ScalarField,
    g: &ScalarField,
    m: &[f64],
    theta: &[f64],
    base_box: &ChartBox,
    fd_cfg: &FdConfig,
) -> Result<f64> {
    if !base_box.contains(m) {
        return Err(Error::Domain(format!("base point {m:?} outside the chart box")));
    }
    if theta.len() != m.len() {
        return Err(Error::Dimension {
            expected: m.len(),
            got: theta.len(),
        });
    }
    let h = fd_cfg.step;
    let (f_m, f_t) = phase_gradient(f, m, theta, h);
    let (g_m, g_t) = phase_gradient(g, m, theta, h);
    Ok((0..m.len())
        .map(|i| f_t[i] * g_m[i] - f_m[i] * g_t[i])
        .sum())
}

/// Basic fields for the test families: all base coordinates plus seeded
/// random quadratics `c + Σ l_i q_i + Σ a_{ij} q_i q_j`.
pub fn basic_family(base_dim: usize, extra: usize, rng: &mut impl Rng) -> Vec<ScalarField> {
    let mut fields: Vec<ScalarField> = (0..base_dim).map(ScalarField::coordinate).collect();
    for _ in 0..extra {
        let c: f64 = rng.random_range(-1.0..1.0);
        let lin: Vec<f64> = (0..base_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let quad: Vec<f64> = (0..base_dim * base_dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let d = base_dim;
        fields.push(ScalarField::basic(move |q| {
            let mut v = c;
            for i in 0..d {
                v += lin[i] * q[i];
                for j in 0..d {
                    v += quad[i * d + j] * q[i] * q[j];
                }
            }
            v
        }));
    }
    fields
}

/// Linear fields of all constant frame sections.
pub fn constant_section_family(fiber_dim: usize) -> Vec<ScalarField> {
    (0..fiber_dim)
        .map(|i| ScalarField::fiber_coordinate(i, fiber_dim))
        .collect()
}

/// Seeded random quadratic functions of the full phase point, for
/// Jacobi-identity sampling.
fn random_phase_quadratic(dim: usize, rng: &mut impl Rng) -> ScalarField {
    let lin: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let quad: Vec<f64> = (0..dim * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    ScalarField::generic(move |p| {
        let mut v = 0.0;
        for i in 0..dim {
            v += lin[i] * p[i];
            for j in 0..dim {
                v += quad[i * dim + j] * p[i] * p[j];
            }
        }
        v
    })
}

/// Jacobi identity of the algebroid-dual bracket at seeded sample
/// points, on random quadratic test functions. The inner bracket is
/// wrapped as a generic field and differentiated again, so residuals
/// carry nested finite-difference error.
pub fn check_jacobi(
    chart: &LieAlgebroidChart,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = chart.base_dim + chart.fiber_dim;
    let mut worst = 0.0f64;
    let nested = FdConfig {
        step: fd_cfg.nested_step,
        nested_step: fd_cfg.nested_step,
    };
    for _ in 0..samples {
        let q = chart.base_box.sample(&mut rng);
        let mu: Vec<f64> = (0..chart.fiber_dim)
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let f = random_phase_quadratic(dim, &mut rng);
        let g = random_phase_quadratic(dim, &mut rng);
        let k = random_phase_quadratic(dim, &mut rng);

        let pair_bracket = |a: &ScalarField, b: &ScalarField| -> ScalarField {
            let a = a.clone();
            let b = b.clone();
            let chart = chart.clone();
            let inner_fd = *fd_cfg;
            let n0 = chart.base_dim;
            ScalarField::generic(move |p| {
                lie_poisson_bracket(&chart, &a, &b, &p[..n0], &p[n0..], &inner_fd)
                    .expect("bracket inside the chart box")
            })
        };

        let fg = pair_bracket(&f, &g);
        let gk = pair_bracket(&g, &k);
        let kf = pair_bracket(&k, &f);
        let jacobi = lie_poisson_bracket(chart, &fg, &k, &q, &mu, &nested)?
            + lie_poisson_bracket(chart, &gk, &f, &q, &mu, &nested)?
            + lie_poisson_bracket(chart, &kf, &g, &q, &mu, &nested)?;
        worst = worst.max(jacobi.abs());
    }
    Ok(CheckReport::new(
        "jacobi-identity",
        vec![CheckRow::new("cyclic-sum", worst, tol)],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::algebroid::algebroid_from_groupoid;
    use crate::poisson::registry::pair_groupoid;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn aff1_dual_chart() -> LieAlgebroidChart {
        // Zero anchor over a point base; bracket of the frame fields is
        // the second frame field.
        let mut c2 = DMatrix::zeros(2, 2);
        c2[(0, 1)] = 1.0;
        c2[(1, 0)] = -1.0;
        LieAlgebroidChart::constant(
            0,
            2,
            ChartBox::new(vec![], vec![]),
            DMatrix::zeros(0, 2),
            vec![DMatrix::zeros(2, 2), c2],
        )
        .unwrap()
    }

    #[test]
    fn basic_functions_commute() {
        let chart = LieAlgebroidChart::canonical_cotangent(2, ChartBox::symmetric(2, 2.0));
        let fd_cfg = FdConfig::default();
        let f = ScalarField::basic(|q| q[0] * q[0] + q[1]);
        let g = ScalarField::basic(|q| q[0] - 3.0 * q[1] * q[1]);
        let v = lie_poisson_bracket(&chart, &f, &g, &[0.3, -0.4], &[1.0, 2.0], &fd_cfg).unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn aff1_coordinate_bracket_is_second_coordinate() {
        let chart = aff1_dual_chart();
        let fd_cfg = FdConfig::default();
        let mu1 = ScalarField::fiber_coordinate(0, 2);
        let mu2 = ScalarField::fiber_coordinate(1, 2);
        for (a, b) in [(0.7, -0.3), (1.5, 2.0), (0.0, 1.0)] {
            let v = lie_poisson_bracket(&chart, &mu1, &mu2, &[], &[a, b], &fd_cfg).unwrap();
            assert_relative_eq!(v, b, epsilon = 1e-9);
            // Antisymmetry.
            let w = lie_poisson_bracket(&chart, &mu2, &mu1, &[], &[a, b], &fd_cfg).unwrap();
            assert_relative_eq!(w, -b, epsilon = 1e-9);
        }
    }

    #[test]
    fn canonical_bracket_darboux_pair() {
        let fd_cfg = FdConfig::default();
        let bx = ChartBox::symmetric(2, 2.0);
        let theta1 = ScalarField::generic(|p| p[2]);
        let m1 = ScalarField::basic(|m| m[0]);
        let v = canonical_bracket(&theta1, &m1, &[0.1, 0.2], &[0.5, -0.5], &bx, &fd_cfg).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn symbol_bracket_with_basic_is_directional_derivative() {
        let fd_cfg = FdConfig::default();
        let bx = ChartBox::symmetric(2, 2.0);
        // xi = ∂/∂m_0, h = m_0² + 2 m_1.
        let sym = ScalarField::symbol(|_| vec![1.0, 0.0]);
        let h = ScalarField::basic(|m| m[0] * m[0] + 2.0 * m[1]);
        let m = [0.7, -0.2];
        let v = canonical_bracket(&sym, &h, &m, &[0.3, 0.4], &bx, &fd_cfg).unwrap();
        assert_relative_eq!(v, 2.0 * m[0], epsilon = 1e-9);
    }

    #[test]
    fn symbols_of_constant_fields_commute() {
        let fd_cfg = FdConfig::default();
        let bx = ChartBox::symmetric(2, 2.0);
        let s1 = ScalarField::symbol(|_| vec![1.0, 2.0]);
        let s2 = ScalarField::symbol(|_| vec![-3.0, 0.5]);
        let v = canonical_bracket(&s1, &s2, &[0.1, 0.9], &[1.0, -1.0], &bx, &fd_cfg).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn symbol_bracket_realizes_field_commutator() {
        let fd_cfg = FdConfig::default();
        let bx = ChartBox::symmetric(1, 2.0);
        // xi = m ∂/∂m, eta = ∂/∂m on the line: [xi, eta] = -∂/∂m.
        let sym_xi = ScalarField::symbol(|m| vec![m[0]]);
        let sym_eta = ScalarField::symbol(|_| vec![1.0]);
        let m = [0.4];
        let theta = [1.3];
        let v = canonical_bracket(&sym_xi, &sym_eta, &m, &theta, &bx, &fd_cfg).unwrap();
        assert_relative_eq!(v, -theta[0], epsilon = 1e-9);
    }

    #[test]
    fn pair_algebroid_bracket_matches_canonical() {
        let g = pair_groupoid(2).unwrap();
        let fd_cfg = FdConfig::default();
        let chart = algebroid_from_groupoid(&g, &fd_cfg);
        let bx = chart.base_box.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let q = bx.sample(&mut rng);
            let mu: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = random_phase_quadratic(4, &mut rng);
            let g_field = random_phase_quadratic(4, &mut rng);
            let lhs = lie_poisson_bracket(&chart, &f, &g_field, &q, &mu, &fd_cfg).unwrap();
            let rhs = canonical_bracket(&f, &g_field, &q, &mu, &bx, &fd_cfg).unwrap();
            assert!((lhs - rhs).abs() < 1e-5, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn jacobi_identity_on_aff1_dual() {
        let chart = aff1_dual_chart();
        let report = check_jacobi(&chart, 25, 1e-5, 99, &FdConfig::default()).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn domain_violation_is_reported() {
        let chart = LieAlgebroidChart::canonical_cotangent(1, ChartBox::symmetric(1, 1.0));
        let f = ScalarField::coordinate(0);
        let g = ScalarField::fiber_coordinate(0, 1);
        let err = lie_poisson_bracket(&chart, &f, &g, &[5.0], &[0.0], &FdConfig::default());
        assert!(matches!(err, Err(Error::Domain(_))));
    }
}
