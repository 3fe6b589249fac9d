//! Momentum maps of smooth groupoid actions and the Poisson-map checks
//! built on them.
//!
//! A left action induces `J_L : T*M -> A*(G)` by pairing a covector
//! with the action generators: the `i`-th component at `θ_m` is
//! `-⟨θ, d/dλ (γ_i(λ)⁻¹ · m)⟩`, where `γ_i` is a curve through the unit
//! over `tau(m)` staying in the target fiber with tangent the `i`-th
//! frame vector. A right action induces `J_R` without the sign:
//! `⟨J_R(θ_m), dh/dλ⟩ = ⟨θ, d(m · h(λ))/dλ⟩`.
//!
//! `J_L` reverses brackets (it is a Poisson map out of the opposite
//! cotangent structure) and `J_L`, `J_R` pullbacks Poisson-commute when
//! the two actions commute; both statements are checked by seeded
//! sampling with nested finite differences.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::parallel::par_map;
use crate::report::{CheckReport, CheckRow};

use super::algebroid::{algebroid_from_groupoid, DualPoint, LieAlgebroidChart};
use super::bracket::{basic_family, canonical_bracket, constant_section_family, lie_poisson_bracket, ScalarField};
use super::chart::{CotangentPoint, CoordinateGroupoid, Side, SmoothAction};
use super::fd::{self, FdConfig, Projector};

/// Columns are the action generator vector fields at `m`, one per
/// algebroid frame vector: `ξ_i(m) = -d/dλ (γ_i(λ)⁻¹ · m)` for a left
/// action, `ξ_i(m) = d/dλ (m · h_i(λ))` for a right action.
pub fn action_generators(
    act: &SmoothAction,
    m: &[f64],
    fd_cfg: &FdConfig,
) -> Result<DMatrix<f64>> {
    let g = &act.groupoid;
    let q = act.base_map(m);
    let frame = g.algebroid_frame(&q, fd_cfg)?;
    let unit = g.unit(&q);
    let constraint = |y: &[f64]| {
        g.target(y)
            .iter()
            .zip(&q)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>()
    };
    let projector = Projector::new(&constraint, &unit, fd_cfg.step);
    let mut gens = DMatrix::zeros(act.manifold_dim, g.fiber_dim());
    for i in 0..g.fiber_dim() {
        let e_i: Vec<f64> = frame.column(i).iter().copied().collect();
        let column: Vec<f64> = match act.side {
            Side::Left => {
                let f = |y: &[f64]| act.apply(&g.invert(y), m);
                fd::constrained_directional(&f, &projector, &unit, &e_i, fd_cfg.step)
                    .into_iter()
                    .map(|v| -v)
                    .collect()
            }
            Side::Right => {
                let f = |y: &[f64]| act.apply(y, m);
                fd::constrained_directional(&f, &projector, &unit, &e_i, fd_cfg.step)
            }
        };
        for (r, v) in column.iter().enumerate() {
            gens[(r, i)] = *v;
        }
    }
    Ok(gens)
}

fn momentum(act: &SmoothAction, theta: &CotangentPoint, fd_cfg: &FdConfig) -> Result<DualPoint> {
    if theta.dim() != act.manifold_dim {
        return Err(Error::Dimension {
            expected: act.manifold_dim,
            got: theta.dim(),
        });
    }
    let gens = action_generators(act, &theta.base, fd_cfg)?;
    let mu: Vec<f64> = (0..gens.ncols())
        .map(|i| {
            gens.column(i)
                .iter()
                .zip(&theta.covector)
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    Ok(DualPoint::new(act.base_map(&theta.base), mu))
}

/// Momentum map of a left action.
pub fn momentum_left(
    act: &SmoothAction,
    theta: &CotangentPoint,
    fd_cfg: &FdConfig,
) -> Result<DualPoint> {
    if act.side != Side::Left {
        return Err(Error::InvalidParameter("momentum_left needs a left action".into()));
    }
    momentum(act, theta, fd_cfg)
}

/// Momentum map of a right action.
pub fn momentum_right(
    act: &SmoothAction,
    theta: &CotangentPoint,
    fd_cfg: &FdConfig,
) -> Result<DualPoint> {
    if act.side != Side::Right {
        return Err(Error::InvalidParameter("momentum_right needs a right action".into()));
    }
    momentum(act, theta, fd_cfg)
}

/// A groupoid acting on its own arrow space by left multiplication,
/// with the target projection as base map.
pub fn self_left_action(g: &Arc<CoordinateGroupoid>) -> SmoothAction {
    let gt = g.clone();
    let gm = g.clone();
    let n1 = g.arrow_dim;
    SmoothAction::new(
        g.clone(),
        Side::Left,
        n1,
        g.arrow_box.clone(),
        Arc::new(move |y: &[f64]| gt.target(y)),
        Arc::new(move |xy: &[f64]| gm.multiply_flat(xy)),
    )
    .expect("arrow chart dimensions agree")
}

/// A groupoid acting on its own arrow space by right multiplication,
/// with the source projection as base map. The evaluator receives
/// `(arrow h, point x)` and returns `x ∘ h`.
pub fn self_right_action(g: &Arc<CoordinateGroupoid>) -> SmoothAction {
    let gs = g.clone();
    let gm = g.clone();
    let n1 = g.arrow_dim;
    SmoothAction::new(
        g.clone(),
        Side::Right,
        n1,
        g.arrow_box.clone(),
        Arc::new(move |y: &[f64]| gs.source(y)),
        Arc::new(move |hx: &[f64]| {
            let (h, x) = hx.split_at(n1);
            gm.multiply(x, h)
        }),
    )
    .expect("arrow chart dimensions agree")
}

/// Test-function families on the algebroid dual: pullbacks of base
/// functions and fiberwise-linear functions of constant sections.
fn dual_family(chart: &LieAlgebroidChart, rng: &mut impl Rng) -> Vec<(String, ScalarField)> {
    let mut fams: Vec<(String, ScalarField)> = basic_family(chart.base_dim, 2, rng)
        .into_iter()
        .map(|f| ("basic".to_string(), f))
        .collect();
    fams.extend(
        constant_section_family(chart.fiber_dim)
            .into_iter()
            .map(|f| ("linear".to_string(), f)),
    );
    fams
}

fn pullback_field(
    act: &SmoothAction,
    field: &ScalarField,
    fd_cfg: &FdConfig,
    negate_mu: bool,
) -> ScalarField {
    let act = act.clone();
    let field = field.clone();
    let fd_cfg = *fd_cfg;
    let dim = act.manifold_dim;
    ScalarField::generic(move |p: &[f64]| {
        let theta = CotangentPoint::new(p[..dim].to_vec(), p[dim..].to_vec());
        let j = momentum(&act, &theta, &fd_cfg).expect("momentum map sample");
        let mu: Vec<f64> = if negate_mu {
            j.mu.iter().map(|v| -v).collect()
        } else {
            j.mu
        };
        field.eval(&j.base, &mu)
    })
}

fn anti_poisson_rows(
    act: &SmoothAction,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
    negate_mu: bool,
) -> Result<Vec<CheckRow>> {
    if act.side != Side::Left {
        return Err(Error::InvalidParameter(
            "the bracket-reversal check runs on left actions".into(),
        ));
    }
    let chart = algebroid_from_groupoid(&act.groupoid, fd_cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family = dual_family(&chart, &mut rng);
    let dim = act.manifold_dim;
    let nested = FdConfig {
        step: fd_cfg.nested_step,
        nested_step: fd_cfg.nested_step,
    };

    let points: Vec<CotangentPoint> = (0..samples)
        .map(|_| {
            let m = act.manifold_box.sample(&mut rng);
            let th: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            CotangentPoint::new(m, th)
        })
        .collect();

    // One row per unordered kind combination.
    let mut combo_names: Vec<String> = Vec::new();
    let mut combo_residuals: Vec<f64> = Vec::new();
    for (i, (kind_f, f)) in family.iter().enumerate() {
        for (kind_g, g) in family.iter().skip(i) {
            let name = format!("{kind_f}-{kind_g}");
            let jf = pullback_field(act, f, fd_cfg, negate_mu);
            let jg = pullback_field(act, g, fd_cfg, negate_mu);
            let worst = par_map(points.clone(), |theta| {
                let tm_bracket = canonical_bracket(
                    &jf,
                    &jg,
                    &theta.base,
                    &theta.covector,
                    &act.manifold_box,
                    &nested,
                )
                .expect("sample inside the manifold box");
                let j = momentum(act, theta, fd_cfg).expect("momentum map sample");
                let mu: Vec<f64> = if negate_mu {
                    j.mu.iter().map(|v| -v).collect()
                } else {
                    j.mu.clone()
                };
                let dual_bracket = lie_poisson_bracket(&chart, f, g, &j.base, &mu, fd_cfg)
                    .expect("image point inside the base box");
                (tm_bracket + dual_bracket).abs()
            })
            .into_iter()
            .fold(0.0f64, f64::max);
            match combo_names.iter().position(|n| n == &name) {
                Some(idx) => combo_residuals[idx] = combo_residuals[idx].max(worst),
                None => {
                    combo_names.push(name);
                    combo_residuals.push(worst);
                }
            }
        }
    }
    Ok(combo_names
        .into_iter()
        .zip(combo_residuals)
        .map(|(name, r)| CheckRow::new(name, r, tol))
        .collect())
}

/// Check that the momentum map of a left action reverses brackets:
/// `{J*F, J*G}_{T*M} + J*{F, G} = 0` on the test families, at seeded
/// samples.
pub fn check_anti_poisson(
    act: &SmoothAction,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let rows = anti_poisson_rows(act, samples, tol, seed, fd_cfg, false)?;
    Ok(
        CheckReport::new("momentum-bracket-reversal", rows).with_assumptions(vec![
            "completeness of the momentum map is implied by a passing cotangent action-axiom check, not tested dynamically".into(),
        ]),
    )
}

/// Negative control: the same residuals with the momentum fiber
/// components sign-flipped. Passes when the flipped map visibly fails,
/// i.e. the worst residual is at least `10 * tol`.
pub fn check_anti_poisson_control(
    act: &SmoothAction,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let rows = anti_poisson_rows(act, samples, tol, seed, fd_cfg, true)?;
    let worst = rows.iter().fold(0.0f64, |m, r| m.max(r.residual));
    let pass = worst >= 10.0 * tol;
    let row = CheckRow {
        name: "sign-flip-detected".into(),
        pass,
        residual: worst,
        tol: 10.0 * tol,
        detail: "a sign-flipped momentum map must violate bracket reversal".into(),
    };
    Ok(CheckReport::new("momentum-sign-flip-control", vec![row]))
}

/// Check Poisson commutation of the two momentum-map pullbacks of a
/// smooth bibundle: `{J_L*F, J_R*G}_{T*M} = 0` for all four kind
/// combinations, after sampling the bibundle commutation axioms as a
/// precondition.
pub fn check_commuting_pullbacks(
    bib: &super::chart::SmoothBibundle,
    samples: usize,
    tol: f64,
    seed: u64,
    fd_cfg: &FdConfig,
) -> Result<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Exact algebraic identities, checked at a precondition tolerance
    // decoupled from the bracket tolerance.
    let pre = bib.check_commutation(samples, 1e-9, &mut rng, fd_cfg);
    let mut rows: Vec<CheckRow> = pre
        .rows
        .into_iter()
        .map(|mut r| {
            r.name = format!("precondition-{}", r.name);
            r
        })
        .collect();
    if rows.iter().any(|r| !r.pass) {
        return Ok(CheckReport::new("momentum-pullbacks-commute", rows));
    }

    let chart_left = algebroid_from_groupoid(&bib.left.groupoid, fd_cfg);
    let chart_right = algebroid_from_groupoid(&bib.right.groupoid, fd_cfg);
    let fam_left = dual_family(&chart_left, &mut rng);
    let fam_right = dual_family(&chart_right, &mut rng);
    let dim = bib.manifold_dim();
    let nested = FdConfig {
        step: fd_cfg.nested_step,
        nested_step: fd_cfg.nested_step,
    };
    let points: Vec<CotangentPoint> = (0..samples)
        .map(|_| {
            let m = bib.manifold_box().sample(&mut rng);
            let th: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            CotangentPoint::new(m, th)
        })
        .collect();

    let mut combo_names: Vec<String> = Vec::new();
    let mut combo_residuals: Vec<f64> = Vec::new();
    for (kind_f, f) in &fam_left {
        for (kind_g, g) in &fam_right {
            let name = format!("{kind_f}-{kind_g}");
            let jf = pullback_field(&bib.left, f, fd_cfg, false);
            let jg = pullback_field(&bib.right, g, fd_cfg, false);
            let worst = par_map(points.clone(), |theta| {
                canonical_bracket(
                    &jf,
                    &jg,
                    &theta.base,
                    &theta.covector,
                    bib.manifold_box(),
                    &nested,
                )
                .expect("sample inside the manifold box")
                .abs()
            })
            .into_iter()
            .fold(0.0f64, f64::max);
            match combo_names.iter().position(|n| n == &name) {
                Some(idx) => combo_residuals[idx] = combo_residuals[idx].max(worst),
                None => {
                    combo_names.push(name);
                    combo_residuals.push(worst);
                }
            }
        }
    }
    rows.extend(
        combo_names
            .into_iter()
            .zip(combo_residuals)
            .map(|(name, r)| CheckRow::new(name, r, tol)),
    );
    Ok(CheckReport::new("momentum-pullbacks-commute", rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::registry::{aff1_action, pair_action, rect_bibundle, unit_action};
    use approx::assert_relative_eq;

    #[test]
    fn pair_momentum_is_minus_theta() {
        let act = pair_action(2).unwrap();
        let fd_cfg = FdConfig::default();
        let theta = CotangentPoint::new(vec![0.3, -0.8], vec![1.2, 0.5]);
        let j = momentum_left(&act, &theta, &fd_cfg).unwrap();
        assert_relative_eq!(j.base[0], 0.3, epsilon = 1e-10);
        assert_relative_eq!(j.mu[0], -1.2, epsilon = 1e-9);
        assert_relative_eq!(j.mu[1], -0.5, epsilon = 1e-9);
    }

    #[test]
    fn momentum_of_zero_covector_is_zero() {
        let act = pair_action(3).unwrap();
        let fd_cfg = FdConfig::default();
        let theta = CotangentPoint::new(vec![0.1, 0.2, 0.3], vec![0.0; 3]);
        let j = momentum_left(&act, &theta, &fd_cfg).unwrap();
        assert!(j.mu.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn momentum_is_fiberwise_linear() {
        let act = aff1_action().unwrap();
        let fd_cfg = FdConfig::default();
        let m = vec![0.7];
        let t1 = CotangentPoint::new(m.clone(), vec![1.3]);
        let t2 = CotangentPoint::new(m.clone(), vec![-0.4]);
        let sum = CotangentPoint::new(m.clone(), vec![1.3 + 2.0 * (-0.4)]);
        let j1 = momentum_left(&act, &t1, &fd_cfg).unwrap();
        let j2 = momentum_left(&act, &t2, &fd_cfg).unwrap();
        let js = momentum_left(&act, &sum, &fd_cfg).unwrap();
        for i in 0..2 {
            assert_relative_eq!(js.mu[i], j1.mu[i] + 2.0 * j2.mu[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn aff1_momentum_matches_closed_form() {
        // Generators of the affine action at x: scaling x·d/dx and
        // translation d/dx, so the momentum components are (x·θ, θ).
        let act = aff1_action().unwrap();
        let fd_cfg = FdConfig::default();
        let x = 0.9;
        let th = -1.1;
        let j = momentum_left(&act, &CotangentPoint::new(vec![x], vec![th]), &fd_cfg).unwrap();
        assert_relative_eq!(j.mu[0], x * th, epsilon = 1e-9);
        assert_relative_eq!(j.mu[1], th, epsilon = 1e-9);
    }

    #[test]
    fn rect_right_momentum_is_plus_theta_on_column_block() {
        let bib = rect_bibundle(2, 3).unwrap();
        let fd_cfg = FdConfig::default();
        let m = vec![0.1, 0.2, -0.3, 0.4, 0.5];
        let th = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let j = momentum_right(&bib.right, &CotangentPoint::new(m, th), &fd_cfg).unwrap();
        assert_eq!(j.mu.len(), 3);
        for i in 0..3 {
            assert_relative_eq!(j.mu[i], [3.0, 4.0, 5.0][i], epsilon = 1e-9);
        }
    }

    #[test]
    fn unit_groupoid_momentum_has_empty_fiber() {
        let act = unit_action(2).unwrap();
        let fd_cfg = FdConfig::default();
        let theta = CotangentPoint::new(vec![0.5, 0.5], vec![1.0, -1.0]);
        let j = momentum_left(&act, &theta, &fd_cfg).unwrap();
        assert!(j.mu.is_empty());
    }

    #[test]
    fn anti_poisson_passes_on_pair_and_aff1() {
        let fd_cfg = FdConfig::default();
        for act in [pair_action(2).unwrap(), aff1_action().unwrap()] {
            let report = check_anti_poisson(&act, 20, 1e-5, 42, &fd_cfg).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn sign_flip_control_fails_loudly() {
        let fd_cfg = FdConfig::default();
        for act in [pair_action(2).unwrap(), aff1_action().unwrap()] {
            let report = check_anti_poisson_control(&act, 20, 1e-5, 42, &fd_cfg).unwrap();
            assert!(report.pass, "control must detect the flip: {report:?}");
            assert!(report.rows[0].residual >= 1e-4);
        }
    }

    #[test]
    fn commuting_pullbacks_on_rectangle() {
        let bib = rect_bibundle(2, 3).unwrap();
        let fd_cfg = FdConfig::default();
        let report = check_commuting_pullbacks(&bib, 15, 1e-6, 42, &fd_cfg).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn non_commuting_actions_fail_the_precondition() {
        let bib = rect_bibundle(2, 2).unwrap();
        // Corrupt the left action so it no longer commutes with the right.
        let broken = bib.left.with_action(Arc::new(|xm: &[f64]| {
            // x · (u, v) with a spurious dependence on v in the u block.
            let mut out = xm[..2].to_vec();
            out[0] += 0.1 * xm[6] * xm[6];
            out.push(xm[6]);
            out.push(xm[7]);
            out
        }));
        let bib = super::super::chart::SmoothBibundle::new(broken, bib.right).unwrap();
        let fd_cfg = FdConfig::default();
        let report = check_commuting_pullbacks(&bib, 10, 1e-6, 42, &fd_cfg).unwrap();
        assert!(!report.pass);
        assert!(report
            .rows
            .iter()
            .any(|r| r.name.starts_with("precondition") && !r.pass));
    }
}
