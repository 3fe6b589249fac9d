//! The cotangent groupoid of a coordinate Lie groupoid and its action
//! on cotangent bundles.
//!
//! Viewing the groupoid as a bibundle over itself, the source and
//! target of the cotangent groupoid are the momentum maps of right and
//! left self-multiplication. A composable pair of covectors `(α_x, β_y)`
//! has a unique product `γ` at `x∘y` determined by
//!
//! ```text
//! γ(Dm(X, Y)) = α(X) + β(Y)   for all (X, Y) tangent to the
//!                              composable locus,
//! ```
//!
//! solved here in the least-squares sense over a kernel basis of the
//! locus. A covector `α_x` matched to `θ_m` (source of `α` equals the
//! momentum of `θ`) acts by
//!
//! ```text
//! ⟨α·θ, ξ⟩ = ⟨θ, Dφ(DI(η) + ξ)⟩ + ⟨α, η⟩,
//! ```
//!
//! where `η` lifts the base velocity of `ξ` through the target map; the
//! matching condition makes the lift choice immaterial, which is
//! verified by recomputation with a second lift.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::report::{CheckReport, CheckRow};

use super::algebroid::{to_annihilator, DualPoint};
use super::chart::{CotangentPoint, CoordinateGroupoid, Side, SmoothAction, SmoothBibundle};
use super::fd::{self, FdConfig, Projector};
use super::momentum::{
    action_generators, momentum_left, momentum_right, self_left_action, self_right_action,
};

/// Source map of the cotangent groupoid: the momentum map of the
/// groupoid's right action on itself, in algebroid-frame components
/// over `source(x)`.
pub fn cotangent_source(
    g: &Arc<CoordinateGroupoid>,
    alpha: &CotangentPoint,
    fd_cfg: &FdConfig,
) -> Result<DualPoint> {
    momentum_right(&self_right_action(g), alpha, fd_cfg)
}

/// Target map of the cotangent groupoid: the momentum map of left
/// self-multiplication, over `target(x)`.
pub fn cotangent_target(
    g: &Arc<CoordinateGroupoid>,
    alpha: &CotangentPoint,
    fd_cfg: &FdConfig,
) -> Result<DualPoint> {
    momentum_left(&self_left_action(g), alpha, fd_cfg)
}

fn inf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Compose two covectors of the cotangent groupoid. Requires the
/// matching condition `source(α) = target(β)` within `tol`.
pub fn compose_covectors(
    g: &Arc<CoordinateGroupoid>,
    alpha: &CotangentPoint,
    beta: &CotangentPoint,
    fd_cfg: &FdConfig,
    tol: f64,
) -> Result<CotangentPoint> {
    let n1 = g.arrow_dim;
    let x = &alpha.base;
    let y = &beta.base;
    let base_gap = inf_diff(&g.source(x), &g.target(y));
    if base_gap > tol {
        return Err(Error::Match(format!(
            "arrows are not composable: source/target gap {base_gap:.3e}"
        )));
    }
    let s_alpha = cotangent_source(g, alpha, fd_cfg)?;
    let t_beta = cotangent_target(g, beta, fd_cfg)?;
    let match_gap = inf_diff(&s_alpha.mu, &t_beta.mu);
    if match_gap > tol {
        return Err(Error::Match(format!(
            "cotangent source/target mismatch {match_gap:.3e}"
        )));
    }

    // Tangent space of the composable locus at (x, y).
    let mut pair = x.clone();
    pair.extend_from_slice(y);
    let constraint = |uv: &[f64]| {
        let (u, v) = uv.split_at(n1);
        g.source(u)
            .iter()
            .zip(&g.target(v))
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>()
    };
    let cjac = fd::jacobian(&constraint, &pair, fd_cfg.step);
    let kernel = linalg::kernel_basis(&cjac, linalg::RANK_REL_TOL);
    if kernel.ncols() != 2 * n1 - g.base_dim {
        return Err(Error::Rank(format!(
            "composable locus has tangent dimension {}, expected {}",
            kernel.ncols(),
            2 * n1 - g.base_dim
        )));
    }

    let projector = Projector::new(&constraint, &pair, fd_cfg.step);
    let multiply = |uv: &[f64]| g.multiply_flat(uv);
    let mut lhs = DMatrix::zeros(kernel.ncols(), n1);
    let mut rhs = DVector::zeros(kernel.ncols());
    for b in 0..kernel.ncols() {
        let w: Vec<f64> = kernel.column(b).iter().copied().collect();
        let dm = fd::constrained_directional(&multiply, &projector, &pair, &w, fd_cfg.step);
        for c in 0..n1 {
            lhs[(b, c)] = dm[c];
        }
        let pairing: f64 = w[..n1]
            .iter()
            .zip(&alpha.covector)
            .chain(w[n1..].iter().zip(&beta.covector))
            .map(|(a, b)| a * b)
            .sum();
        rhs[b] = pairing;
    }
    if linalg::rank(&lhs, linalg::RANK_REL_TOL) != n1 {
        return Err(Error::Rank(
            "multiplication differential is not surjective at this pair".into(),
        ));
    }
    let gamma = linalg::lstsq(&lhs, &rhs, linalg::RANK_REL_TOL);
    let residual = (&lhs * &gamma - &rhs).amax();
    if residual > tol.max(1e-8) {
        return Err(Error::Match(format!(
            "covector composition system is inconsistent (residual {residual:.3e})"
        )));
    }
    Ok(CotangentPoint::new(
        g.multiply(x, y),
        gamma.as_slice().to_vec(),
    ))
}

/// Act with a cotangent-groupoid covector on a cotangent vector of the
/// acted-on manifold. Requires the matching condition
/// `source(α) = J_L(θ)` within `tol`.
pub fn act_on_covector(
    act: &SmoothAction,
    alpha: &CotangentPoint,
    theta: &CotangentPoint,
    fd_cfg: &FdConfig,
    tol: f64,
) -> Result<CotangentPoint> {
    if act.side != Side::Left {
        return Err(Error::InvalidParameter(
            "the cotangent action is built over a left action".into(),
        ));
    }
    let g = &act.groupoid;
    let n1 = g.arrow_dim;
    let dm = act.manifold_dim;
    let x = &alpha.base;
    let m = &theta.base;

    let base_gap = inf_diff(&g.source(x), &act.base_map(m));
    if base_gap > tol {
        return Err(Error::Match(format!(
            "arrow source and point base disagree by {base_gap:.3e}"
        )));
    }
    let s_alpha = cotangent_source(g, alpha, fd_cfg)?;
    let j_theta = momentum_left(act, theta, fd_cfg)?;
    let match_gap = inf_diff(&s_alpha.mu, &j_theta.mu);
    if match_gap > tol {
        return Err(Error::Match(format!(
            "cotangent source does not match the momentum of the covector ({match_gap:.3e})"
        )));
    }

    let dt = g.target_jacobian(x, fd_cfg);
    if linalg::rank(&dt, linalg::RANK_REL_TOL) != g.base_dim {
        return Err(Error::Lift(
            "target map is not submersive at this arrow".into(),
        ));
    }
    let dt_pinv = linalg::pinv(&dt, linalg::RANK_REL_TOL);
    let xm = act.apply(x, m);
    let dtau = act.base_map_jacobian(&xm, fd_cfg);
    let di = g.invert_jacobian(x, fd_cfg);
    let xinv = g.invert(x);

    // Base point of the action evaluation and its composability
    // constraint; directions below are tangent to it by construction.
    let mut pair = xinv.clone();
    pair.extend_from_slice(&xm);
    let constraint = |un: &[f64]| {
        let (u, n) = un.split_at(n1);
        g.source(u)
            .iter()
            .zip(&act.base_map(n))
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>()
    };
    let projector = Projector::new(&constraint, &pair, fd_cfg.step);
    let apply = |un: &[f64]| act.apply_flat(un);

    let kernel = linalg::kernel_basis(&dt, linalg::RANK_REL_TOL);
    let evaluate = |lift_shift: Option<&DVector<f64>>| -> Vec<f64> {
        (0..dm)
            .map(|j| {
                let mut xi = vec![0.0; dm];
                xi[j] = 1.0;
                let base_velocity = &dtau * DVector::from_column_slice(&xi);
                let mut eta = &dt_pinv * base_velocity;
                if let Some(shift) = lift_shift {
                    eta += shift;
                }
                let v = &di * &eta;
                let mut w = v.as_slice().to_vec();
                w.extend_from_slice(&xi);
                let dphi = fd::constrained_directional(&apply, &projector, &pair, &w, fd_cfg.step);
                let first: f64 = theta
                    .covector
                    .iter()
                    .zip(&dphi)
                    .map(|(a, b)| a * b)
                    .sum();
                let second: f64 = alpha
                    .covector
                    .iter()
                    .zip(eta.iter())
                    .map(|(a, b)| a * b)
                    .sum();
                first + second
            })
            .collect()
    };

    let components = evaluate(None);
    if kernel.ncols() > 0 {
        let shift = DVector::from_iterator(n1, kernel.column(0).iter().copied());
        let alt = evaluate(Some(&shift));
        let spread = inf_diff(&components, &alt);
        if spread > tol {
            return Err(Error::Lift(format!(
                "result depends on the lift choice (spread {spread:.3e}); matching condition too loose"
            )));
        }
    }
    Ok(CotangentPoint::new(xm, components))
}

/// Sample a matched tuple `(α_x, θ_m)`: an arrow, a point over its
/// source, a random covector at the point, and a covector at the arrow
/// solving the (linear) matching condition with a random free part.
pub fn sample_matched_pair(
    act: &SmoothAction,
    rng: &mut impl Rng,
    fd_cfg: &FdConfig,
) -> Result<(CotangentPoint, CotangentPoint)> {
    let g = &act.groupoid;
    let (x, m) = act.sample_pair(rng, fd_cfg)?;
    let theta: Vec<f64> = (0..act.manifold_dim)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let theta = CotangentPoint::new(m, theta);
    let j = momentum_left(act, &theta, fd_cfg)?;
    let alpha = covector_with_momentum(&self_right_action(g), &x, &j.mu, rng, fd_cfg)?;
    Ok((CotangentPoint::new(x, alpha), theta))
}

/// Solve for a covector at `point` whose momentum under `act` has the
/// given frame components: a linear system over the action generators,
/// with the minimum-norm correction applied to a random start (the
/// complement of the generator span stays free).
fn covector_with_momentum(
    act: &SmoothAction,
    point: &[f64],
    target_mu: &[f64],
    rng: &mut impl Rng,
    fd_cfg: &FdConfig,
) -> Result<Vec<f64>> {
    let dim = act.manifold_dim;
    let rows = action_generators(act, point, fd_cfg)?.transpose();
    let alpha0 = DVector::from_iterator(dim, (0..dim).map(|_| rng.random_range(-1.0..1.0)));
    let defect = &rows * &alpha0 - DVector::from_column_slice(target_mu);
    let correction = linalg::lstsq(&rows, &defect, linalg::RANK_REL_TOL);
    let alpha = alpha0 - correction;
    let residual = (&rows * &alpha - DVector::from_column_slice(target_mu)).amax();
    if residual > 1e-8 {
        return Err(Error::Rank(format!(
            "matching system is rank-deficient (residual {residual:.3e})"
        )));
    }
    Ok(alpha.as_slice().to_vec())
}

/// Check the groupoid laws of covector composition at seeded samples:
/// associativity over matched triples and the unit laws (a unit
/// covector composes with itself to itself, and absorbs on the left).
pub fn check_compose_associativity(
    g: &Arc<CoordinateGroupoid>,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let match_tol = tol.max(1e-7);
    let self_left = self_left_action(g);
    let mut assoc_residual = 0.0f64;
    let mut unit_residual = 0.0f64;
    let n1 = g.arrow_dim;

    for _ in 0..samples {
        let (x, y) = g.sample_composable_pair(&mut rng, fd_cfg)?;
        let alpha_cov: Vec<f64> = (0..n1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let alpha = CotangentPoint::new(x.clone(), alpha_cov);
        let s_alpha = cotangent_source(g, &alpha, fd_cfg)?;
        let beta = CotangentPoint::new(
            y.clone(),
            covector_with_momentum(&self_left, &y, &s_alpha.mu, &mut rng, fd_cfg)?,
        );

        // Third arrow composable with y.
        let sy = g.source(&y);
        let constraint = |z: &[f64]| {
            g.target(z)
                .iter()
                .zip(&sy)
                .map(|(a, b)| a - b)
                .collect::<Vec<_>>()
        };
        let z0 = g.arrow_box.sample(&mut rng);
        let proj = Projector::new(&constraint, &z0, fd_cfg.step);
        let mut z = z0;
        for _ in 0..8 {
            z = proj.project(&z);
        }
        if constraint(&z).iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-10 {
            let s_beta = cotangent_source(g, &beta, fd_cfg)?;
            let gamma = CotangentPoint::new(
                z.clone(),
                covector_with_momentum(&self_left, &z, &s_beta.mu, &mut rng, fd_cfg)?,
            );
            let ab = compose_covectors(g, &alpha, &beta, fd_cfg, match_tol)?;
            let bc = compose_covectors(g, &beta, &gamma, fd_cfg, match_tol)?;
            let lhs = compose_covectors(g, &ab, &gamma, fd_cfg, match_tol)?;
            let rhs = compose_covectors(g, &alpha, &bc, fd_cfg, match_tol)?;
            assoc_residual = assoc_residual
                .max(inf_diff(&lhs.base, &rhs.base))
                .max(inf_diff(&lhs.covector, &rhs.covector));
        }

        // Unit laws: the annihilator extension of the target momentum is
        // a unit for composition.
        let t_alpha = cotangent_target(g, &alpha, fd_cfg)?;
        let unit_cov = to_annihilator(g, &t_alpha.base, &t_alpha.mu, fd_cfg)?;
        let unit = CotangentPoint::new(g.unit(&t_alpha.base), unit_cov);
        let absorbed = compose_covectors(g, &unit, &alpha, fd_cfg, match_tol)?;
        unit_residual = unit_residual
            .max(inf_diff(&absorbed.base, &alpha.base))
            .max(inf_diff(&absorbed.covector, &alpha.covector));
        let double_unit = compose_covectors(g, &unit, &unit, fd_cfg, match_tol)?;
        unit_residual = unit_residual
            .max(inf_diff(&double_unit.base, &unit.base))
            .max(inf_diff(&double_unit.covector, &unit.covector));
    }

    Ok(CheckReport::new(
        "cotangent-composition-laws",
        vec![
            CheckRow::new("associativity", assoc_residual, tol),
            CheckRow::new("unit-composition", unit_residual, tol),
        ],
    ))
}

/// Check the cotangent-action axioms at seeded samples: the momentum of
/// an acted covector equals the cotangent target of the actor,
/// composition before acting equals acting twice, and unit covectors
/// act trivially.
pub fn check_action_axioms(
    act: &SmoothAction,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let g = &act.groupoid;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut target_residual = 0.0f64;
    let mut assoc_residual = 0.0f64;
    let mut unit_residual = 0.0f64;
    let mut target_error: Option<String> = None;
    let mut assoc_error: Option<String> = None;
    let mut unit_error: Option<String> = None;
    let match_tol = tol.max(1e-7);

    for _ in 0..samples {
        // Momentum equivariance of the action. A matching failure in a
        // sub-step is itself a violated axiom, so it is recorded as a
        // failing row rather than aborting the check.
        let mut part1 = || -> Result<f64> {
            let (alpha, theta) = sample_matched_pair(act, &mut rng, fd_cfg)?;
            let moved = act_on_covector(act, &alpha, &theta, fd_cfg, match_tol)?;
            let lhs = momentum_left(act, &moved, fd_cfg)?;
            let rhs = cotangent_target(g, &alpha, fd_cfg)?;
            Ok(lhs.distance(&rhs))
        };
        match part1() {
            Ok(r) => target_residual = target_residual.max(r),
            Err(e) => target_error = Some(e.to_string()),
        }

        // Compose-then-act against act-twice.
        let mut part2 = || -> Result<f64> {
            let (beta, theta2) = sample_matched_pair(act, &mut rng, fd_cfg)?;
            let y = beta.base.clone();
            // An arrow x composable with y, and α_x matched to the
            // cotangent target of β.
            let ty = g.target(&y);
            let x0 = g.arrow_box.sample(&mut rng);
            let source_constraint = |u: &[f64]| {
                g.source(u)
                    .iter()
                    .zip(&ty)
                    .map(|(a, b)| a - b)
                    .collect::<Vec<_>>()
            };
            let proj = Projector::new(&source_constraint, &x0, fd_cfg.step);
            let mut x = x0;
            for _ in 0..8 {
                x = proj.project(&x);
            }
            if source_constraint(&x)
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max)
                >= 1e-10
            {
                return Ok(0.0);
            }
            let t_beta = cotangent_target(g, &beta, fd_cfg)?;
            let alpha = CotangentPoint::new(
                x.clone(),
                covector_with_momentum(&self_right_action(g), &x, &t_beta.mu, &mut rng, fd_cfg)?,
            );
            let beta_theta = act_on_covector(act, &beta, &theta2, fd_cfg, match_tol)?;
            let twice = act_on_covector(act, &alpha, &beta_theta, fd_cfg, match_tol)?;
            let composed = compose_covectors(g, &alpha, &beta, fd_cfg, match_tol)?;
            let at_once = act_on_covector(act, &composed, &theta2, fd_cfg, match_tol)?;
            Ok(inf_diff(&twice.base, &at_once.base)
                .max(inf_diff(&twice.covector, &at_once.covector)))
        };
        match part2() {
            Ok(r) => assoc_residual = assoc_residual.max(r),
            Err(e) => assoc_error = Some(e.to_string()),
        }

        // Unit covectors act trivially: extend the momentum of a fresh
        // covector to the annihilator covector at the unit arrow.
        let mut part3 = || -> Result<f64> {
            let (_, theta3) = sample_matched_pair(act, &mut rng, fd_cfg)?;
            let j = momentum_left(act, &theta3, fd_cfg)?;
            let unit_cov = to_annihilator(g, &j.base, &j.mu, fd_cfg)?;
            let unit_arrow = g.unit(&j.base);
            let unit_alpha = CotangentPoint::new(unit_arrow, unit_cov);
            let moved = act_on_covector(act, &unit_alpha, &theta3, fd_cfg, match_tol)?;
            Ok(inf_diff(&moved.base, &theta3.base)
                .max(inf_diff(&moved.covector, &theta3.covector)))
        };
        match part3() {
            Ok(r) => unit_residual = unit_residual.max(r),
            Err(e) => unit_error = Some(e.to_string()),
        }
    }

    let row = |name: &str, residual: f64, error: Option<String>| match error {
        Some(e) => CheckRow::error(name, tol, e),
        None => CheckRow::new(name, residual, tol),
    };
    Ok(CheckReport::new(
        "cotangent-action-axioms",
        vec![
            row("target-equivariance", target_residual, target_error),
            row("compose-then-act", assoc_residual, assoc_error),
            row("unit-acts-trivially", unit_residual, unit_error),
        ],
    )
    .with_assumptions(vec![
        "source-connectedness and source-simple-connectedness of the groupoid are hypotheses, not checked".into(),
    ]))
}

/// Standard pairing `ω((ξ1,π1),(ξ2,π2)) = π1·ξ2 − π2·ξ1` on a block of
/// phase coordinates.
fn block_omega(u: &[f64], v: &[f64]) -> f64 {
    let d = u.len() / 2;
    let mut acc = 0.0;
    for i in 0..d {
        acc += u[d + i] * v[i] - v[d + i] * u[i];
    }
    acc
}

/// Check that the graph of the cotangent action is Lagrangian in the
/// product of the three phase spaces with weights `(-1, -1, +1)`:
/// numerically build the graph tangent space at matched samples, check
/// its dimension is half the ambient dimension, and that the weighted
/// symplectic form vanishes on all tangent pairs.
pub fn check_lagrangian_graph(
    act: &SmoothAction,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let g = act.groupoid.clone();
    let n1 = g.arrow_dim;
    let dm = act.manifold_dim;
    let ambient_dim = 2 * n1 + 4 * dm;
    let expected_graph_dim = n1 + 2 * dm;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let match_tol = tol.max(1e-7);
    let nested = fd_cfg.nested_step;

    let mut dim_ok = true;
    let mut dim_detail = String::new();
    let mut form_residual = 0.0f64;

    for _ in 0..samples {
        let (alpha, theta) = sample_matched_pair(act, &mut rng, fd_cfg)?;
        let mut p = alpha.base.clone();
        p.extend_from_slice(&alpha.covector);
        p.extend_from_slice(&theta.base);
        p.extend_from_slice(&theta.covector);

        let constraint = |p: &[f64]| {
            let x = &p[..n1];
            let a = &p[n1..2 * n1];
            let m = &p[2 * n1..2 * n1 + dm];
            let t = &p[2 * n1 + dm..];
            let mut out: Vec<f64> = g
                .source(x)
                .iter()
                .zip(&act.base_map(m))
                .map(|(u, v)| u - v)
                .collect();
            let s_alpha = cotangent_source(&g, &CotangentPoint::new(x.to_vec(), a.to_vec()), fd_cfg)
                .expect("cotangent source at a sampled arrow");
            let j = momentum_left(act, &CotangentPoint::new(m.to_vec(), t.to_vec()), fd_cfg)
                .expect("momentum at a sampled point");
            out.extend(s_alpha.mu.iter().zip(&j.mu).map(|(u, v)| u - v));
            out
        };
        let cjac = fd::jacobian(&constraint, &p, nested);
        let kernel = linalg::kernel_basis(&cjac, linalg::RANK_REL_TOL);
        if kernel.ncols() != expected_graph_dim || 2 * expected_graph_dim != ambient_dim {
            dim_ok = false;
            dim_detail = format!(
                "graph tangent dimension {} in ambient dimension {ambient_dim}",
                kernel.ncols()
            );
            continue;
        }
        if dim_detail.is_empty() {
            dim_detail = format!(
                "graph dimension {expected_graph_dim} = half of ambient {ambient_dim}"
            );
        }

        let projector = Projector::new(&constraint, &p, nested);
        let graph_map = |p: &[f64]| {
            let x = &p[..n1];
            let a = &p[n1..2 * n1];
            let m = &p[2 * n1..2 * n1 + dm];
            let t = &p[2 * n1 + dm..];
            let alpha = CotangentPoint::new(x.to_vec(), a.to_vec());
            let theta = CotangentPoint::new(m.to_vec(), t.to_vec());
            let moved = act_on_covector(act, &alpha, &theta, fd_cfg, match_tol)
                .expect("matched point stays matched under projection");
            let mut out = p.to_vec();
            out.extend_from_slice(&moved.base);
            out.extend_from_slice(&moved.covector);
            out
        };

        let mut tangents: Vec<Vec<f64>> = Vec::with_capacity(kernel.ncols());
        for b in 0..kernel.ncols() {
            let w: Vec<f64> = kernel.column(b).iter().copied().collect();
            let u = fd::constrained_directional(&graph_map, &projector, &p, &w, nested);
            let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
            tangents.push(u.into_iter().map(|v| v / norm).collect());
        }
        for i in 0..tangents.len() {
            for j in (i + 1)..tangents.len() {
                let u = &tangents[i];
                let v = &tangents[j];
                let omega = -block_omega(&u[..2 * n1], &v[..2 * n1])
                    - block_omega(
                        &u[2 * n1..2 * n1 + 2 * dm],
                        &v[2 * n1..2 * n1 + 2 * dm],
                    )
                    + block_omega(&u[2 * n1 + 2 * dm..], &v[2 * n1 + 2 * dm..]);
                form_residual = form_residual.max(omega.abs());
            }
        }
    }

    Ok(CheckReport::new(
        "cotangent-action-graph",
        vec![
            CheckRow::exact("dimension-count", dim_ok, dim_detail),
            CheckRow::new("graph-isotropic", form_residual, tol),
        ],
    ))
}

type MomentumFn<'a> = dyn Fn(&CotangentPoint) -> Result<DualPoint> + 'a;

fn orthogonality_rows(
    bib: &SmoothBibundle,
    jl: &MomentumFn<'_>,
    jr: &MomentumFn<'_>,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<Vec<CheckRow>> {
    let dm = bib.manifold_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nested = fd_cfg.nested_step;

    let mut dims_ok = true;
    let mut dims_detail = String::new();
    let mut pairing_residual = 0.0f64;
    let mut left_gen_residual = 0.0f64;
    let mut right_gen_residual = 0.0f64;
    let mut gen_rank_ok = true;
    let mut gen_rank_detail = String::new();

    for _ in 0..samples {
        let m = bib.manifold_box().sample(&mut rng);
        let th: Vec<f64> = (0..dm).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut p = m.clone();
        p.extend_from_slice(&th);

        let jl_flat = |p: &[f64]| {
            jl(&CotangentPoint::from_flat(p))
                .expect("momentum at a sampled point")
                .flat()
        };
        let jr_flat = |p: &[f64]| {
            jr(&CotangentPoint::from_flat(p))
                .expect("momentum at a sampled point")
                .flat()
        };
        let djl = fd::jacobian(&jl_flat, &p, nested);
        let djr = fd::jacobian(&jr_flat, &p, nested);
        let kl = linalg::kernel_basis(&djl, linalg::RANK_REL_TOL);
        let kr = linalg::kernel_basis(&djr, linalg::RANK_REL_TOL);
        if kl.ncols() + kr.ncols() != 2 * dm {
            dims_ok = false;
            dims_detail = format!(
                "kernel dimensions {} + {} != {}",
                kl.ncols(),
                kr.ncols(),
                2 * dm
            );
        } else if dims_detail.is_empty() {
            dims_detail = format!("{} + {} = {}", kl.ncols(), kr.ncols(), 2 * dm);
        }

        for i in 0..kl.ncols() {
            let u: Vec<f64> = kl.column(i).iter().copied().collect();
            for j in 0..kr.ncols() {
                let v: Vec<f64> = kr.column(j).iter().copied().collect();
                pairing_residual = pairing_residual.max(block_omega(&u, &v).abs());
            }
        }

        // Level sets of the base maps versus action generators: the
        // right base map is killed by left generators (and the
        // left base map by right generators), with matching ranks.
        let lgen = action_generators(&bib.left, &m, fd_cfg)?;
        let rgen = action_generators(&bib.right, &m, fd_cfg)?;
        let dsigma = bib.right.base_map_jacobian(&m, fd_cfg);
        let dtau = bib.left.base_map_jacobian(&m, fd_cfg);
        left_gen_residual = left_gen_residual.max((&dsigma * &lgen).amax());
        right_gen_residual = right_gen_residual.max((&dtau * &rgen).amax());
        let lrank = linalg::rank(&lgen, linalg::RANK_REL_TOL);
        let rrank = linalg::rank(&rgen, linalg::RANK_REL_TOL);
        let sigma_null = dm - linalg::rank(&dsigma, linalg::RANK_REL_TOL);
        let tau_null = dm - linalg::rank(&dtau, linalg::RANK_REL_TOL);
        if lrank != sigma_null || rrank != tau_null {
            gen_rank_ok = false;
            gen_rank_detail = format!(
                "left generators rank {lrank} vs sigma nullity {sigma_null}; right generators rank {rrank} vs tau nullity {tau_null}"
            );
        } else if gen_rank_detail.is_empty() {
            gen_rank_detail = format!(
                "left rank {lrank} = sigma nullity; right rank {rrank} = tau nullity"
            );
        }
    }

    Ok(vec![
        CheckRow::exact("kernel-dimensions", dims_ok, dims_detail),
        CheckRow::new("kernel-orthogonality", pairing_residual, tol),
        CheckRow::new("left-generators-span-sigma-fibers", left_gen_residual, tol),
        CheckRow::new("right-generators-span-tau-fibers", right_gen_residual, tol),
        CheckRow::exact("generator-rank-identities", gen_rank_ok, gen_rank_detail),
    ])
}

/// Check that the momentum-map level foliations of a smooth bibundle
/// are symplectically orthogonal with complementary dimensions, and
/// that the base-map level sets are spanned by the opposite action's
/// generators.
pub fn check_symplectic_orthogonality(
    bib: &SmoothBibundle,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let jl = |theta: &CotangentPoint| momentum_left(&bib.left, theta, fd_cfg);
    let jr = |theta: &CotangentPoint| momentum_right(&bib.right, theta, fd_cfg);
    let rows = orthogonality_rows(bib, &jl, &jr, samples, tol, seed, fd_cfg)?;
    Ok(CheckReport::new("momentum-kernel-orthogonality", rows).with_assumptions(vec![
        "connectedness and simple-connectedness of momentum level sets are assumed, not checked".into(),
    ]))
}

/// Negative-control variant with a replacement right momentum map;
/// exposed for tests that verify a non-invariant map is caught.
pub fn check_symplectic_orthogonality_with(
    bib: &SmoothBibundle,
    jr: &MomentumFn<'_>,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let jl = |theta: &CotangentPoint| momentum_left(&bib.left, theta, fd_cfg);
    let rows = orthogonality_rows(bib, &jl, jr, samples, tol, seed, fd_cfg)?;
    Ok(CheckReport::new("momentum-kernel-orthogonality", rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::registry::{aff1_action, aff1_groupoid, pair_action, pair_groupoid, rect_bibundle};
    use approx::assert_relative_eq;

    #[test]
    fn pair_source_and_target_components() {
        // For an arrow (a, b) of the pair groupoid with covector (ξ, η),
        // the cotangent source is η at b and the target is -ξ at a.
        let g = pair_groupoid(2).unwrap();
        let fd_cfg = FdConfig::default();
        let alpha = CotangentPoint::new(vec![0.4, -0.2, 1.0, 0.3], vec![1.0, 2.0, 3.0, 4.0]);
        let s = cotangent_source(&g, &alpha, &fd_cfg).unwrap();
        assert_relative_eq!(s.base[0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(s.mu[0], 3.0, epsilon = 1e-9);
        assert_relative_eq!(s.mu[1], 4.0, epsilon = 1e-9);
        let t = cotangent_target(&g, &alpha, &fd_cfg).unwrap();
        assert_relative_eq!(t.base[0], 0.4, epsilon = 1e-10);
        assert_relative_eq!(t.mu[0], -1.0, epsilon = 1e-9);
        assert_relative_eq!(t.mu[1], -2.0, epsilon = 1e-9);
    }

    #[test]
    fn pair_composition_closed_form() {
        // α = (ξ, η) at (x, y), β = (ξ', η') at (y, z) with η = -ξ'
        // compose to (ξ, η') at (x, z).
        let g = pair_groupoid(2).unwrap();
        let fd_cfg = FdConfig::default();
        let x = [0.5, -0.1];
        let y = [0.2, 0.7];
        let z = [-0.9, 0.4];
        let xi = [1.0, -2.0];
        let eta = [0.5, 1.5];
        let xi2 = [-0.5, -1.5]; // = -η
        let eta2 = [2.0, 0.25];
        let alpha = CotangentPoint::new(
            [x, y].concat(),
            [xi.to_vec(), eta.to_vec()].concat(),
        );
        let beta = CotangentPoint::new(
            [y, z].concat(),
            [xi2.to_vec(), eta2.to_vec()].concat(),
        );
        let gamma = compose_covectors(&g, &alpha, &beta, &fd_cfg, 1e-6).unwrap();
        let expected_base = [x, z].concat();
        let expected_cov = [xi.to_vec(), eta2.to_vec()].concat();
        for i in 0..4 {
            assert_relative_eq!(gamma.base[i], expected_base[i], epsilon = 1e-8);
            assert_relative_eq!(gamma.covector[i], expected_cov[i], epsilon = 1e-7);
        }
    }

    #[test]
    fn mismatched_covectors_do_not_compose() {
        let g = pair_groupoid(1).unwrap();
        let fd_cfg = FdConfig::default();
        let alpha = CotangentPoint::new(vec![0.5, 0.2], vec![1.0, 1.0]);
        let beta = CotangentPoint::new(vec![0.2, -0.4], vec![1.0, 1.0]);
        // Matching would need the second component of α's covector to be
        // the negative of β's first.
        let err = compose_covectors(&g, &alpha, &beta, &fd_cfg, 1e-6).unwrap_err();
        assert!(matches!(err, Error::Match(_)));
    }

    #[test]
    fn group_composition_matches_translation_pullbacks() {
        // For a group, γ is α pulled back through right translation by
        // y⁻¹, and the matched β is γ pulled back through left
        // translation by x.
        let g = aff1_groupoid().unwrap();
        let fd_cfg = FdConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let x = g.arrow_box.sample(&mut rng);
            let y = g.arrow_box.sample(&mut rng);
            let alpha_cov: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let xy = g.multiply(&x, &y);

            // Right translation by y⁻¹ maps xy to x; pull α back.
            let yinv = g.invert(&y);
            let right_translate = |u: &[f64]| g.multiply(u, &yinv);
            let dr = fd::jacobian(&right_translate, &xy, fd_cfg.step);
            let gamma_expected = dr.transpose() * DVector::from_column_slice(&alpha_cov);

            // Left translation by x maps y to xy; pull γ back for β.
            let left_translate = |u: &[f64]| g.multiply(&x, u);
            let dl = fd::jacobian(&left_translate, &y, fd_cfg.step);
            let beta_cov = dl.transpose() * &gamma_expected;

            let alpha = CotangentPoint::new(x.clone(), alpha_cov.clone());
            let beta = CotangentPoint::new(y.clone(), beta_cov.as_slice().to_vec());
            let gamma = compose_covectors(&g, &alpha, &beta, &fd_cfg, 1e-6).unwrap();
            for i in 0..2 {
                assert_relative_eq!(gamma.covector[i], gamma_expected[i], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn group_action_is_pullback_by_inverse() {
        // For the affine group acting on the line, α_x · θ is θ/a at
        // a·p + b, independent of the free part of α.
        let act = aff1_action().unwrap();
        let fd_cfg = FdConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let (alpha, theta) = sample_matched_pair(&act, &mut rng, &fd_cfg).unwrap();
            let a = alpha.base[0];
            let b = alpha.base[1];
            let p = theta.base[0];
            let moved = act_on_covector(&act, &alpha, &theta, &fd_cfg, 1e-7).unwrap();
            assert_relative_eq!(moved.base[0], a * p + b, epsilon = 1e-9);
            assert_relative_eq!(moved.covector[0], theta.covector[0] / a, epsilon = 1e-7);
        }
    }

    #[test]
    fn pair_action_closed_form() {
        // For the pair groupoid acting on itself's base, the result
        // covector is the first block of α at the target point.
        let act = pair_action(2).unwrap();
        let fd_cfg = FdConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let (alpha, theta) = sample_matched_pair(&act, &mut rng, &fd_cfg).unwrap();
            let moved = act_on_covector(&act, &alpha, &theta, &fd_cfg, 1e-7).unwrap();
            for i in 0..2 {
                assert_relative_eq!(moved.base[i], alpha.base[i], epsilon = 1e-9);
                assert_relative_eq!(moved.covector[i], alpha.covector[i], epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn composition_laws_hold_on_corpus() {
        let fd_cfg = FdConfig::default();
        for g in [pair_groupoid(2).unwrap(), aff1_groupoid().unwrap()] {
            let report = check_compose_associativity(&g, 8, 1e-5, 42, &fd_cfg).unwrap();
            assert!(report.pass, "{}: {report:?}", g.name);
        }
    }

    #[test]
    fn action_axioms_pass_on_corpus() {
        let fd_cfg = FdConfig::default();
        for act in [pair_action(2).unwrap(), aff1_action().unwrap()] {
            let report = check_action_axioms(&act, 10, 1e-5, 42, &fd_cfg).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn perturbed_action_breaks_target_equivariance() {
        let act = pair_action(2).unwrap();
        let broken = act.with_action(Arc::new(|xm: &[f64]| {
            // Target block plus a non-equivariant squeeze.
            vec![xm[0] + 0.05 * xm[1] * xm[1], xm[1]]
        }));
        let fd_cfg = FdConfig::default();
        let report = check_action_axioms(&broken, 10, 1e-5, 42, &fd_cfg).unwrap();
        let row = report
            .rows
            .iter()
            .find(|r| r.name == "target-equivariance")
            .unwrap();
        assert!(!row.pass, "{report:?}");
    }

    #[test]
    fn lagrangian_graph_on_pair_1() {
        let act = pair_action(1).unwrap();
        let fd_cfg = FdConfig::default();
        let report = check_lagrangian_graph(&act, 5, 1e-5, 42, &fd_cfg).unwrap();
        assert!(report.pass, "{report:?}");
        // Graph dimension 4 in ambient dimension 8.
        assert!(report.rows[0].detail.contains("4"));
        assert!(report.rows[0].detail.contains("8"));
    }

    #[test]
    fn orthogonality_on_rectangle() {
        let bib = rect_bibundle(2, 3).unwrap();
        let fd_cfg = FdConfig::default();
        let report = check_symplectic_orthogonality(&bib, 10, 1e-8, 42, &fd_cfg).unwrap();
        assert!(report.pass, "{report:?}");
        let dims = report
            .rows
            .iter()
            .find(|r| r.name == "kernel-dimensions")
            .unwrap();
        assert!(dims.detail.contains("6 + 4") || dims.detail.contains("4 + 6"), "{dims:?}");
    }

    #[test]
    fn broken_right_momentum_fails_orthogonality() {
        let bib = rect_bibundle(2, 2).unwrap();
        let fd_cfg = FdConfig::default();
        let jr = |theta: &CotangentPoint| -> Result<DualPoint> {
            // A map that is not invariant under the left action: keeps
            // the full base and mixes covector blocks.
            Ok(DualPoint::new(
                theta.base[2..].to_vec(),
                vec![
                    theta.covector[0] + theta.covector[2],
                    theta.covector[1] + theta.covector[3],
                ],
            ))
        };
        let report =
            check_symplectic_orthogonality_with(&bib, &jr, 5, 1e-8, 42, &fd_cfg).unwrap();
        assert!(!report.pass);
    }
}
