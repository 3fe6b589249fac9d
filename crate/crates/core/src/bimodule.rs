//! The pre-equivalence bimodule attached to an equivalence bibundle:
//! complex functions on the bibundle points, acted on by both
//! convolution algebras, with inner products valued in either algebra.
//!
//! Counting-measure formulas, with `m_h` any point of the relevant
//! fiber (well defined because fibers of an equivalence bibundle are
//! single free orbits):
//!
//! ```text
//! (A · ψ)(m)  = Σ_{x : tgt(x) = tau(m)}   A(x) ψ(x⁻¹·m)
//! (ψ · B)(m)  = Σ_{h : tgt(h) = sigma(m)} ψ(m·h) B(h⁻¹)
//! ⟨ψ, φ⟩_B(h) = Σ_{x : tgt(x) = tau(m_h)} conj(ψ(x⁻¹·m_h)) φ((x⁻¹·m_h)·h)
//! _A⟨ψ, φ⟩(x) = Σ_{h : tgt(h) = sigma(m_x)} ψ(x·(m_x·h)) conj(φ(m_x·h))
//! ```
//!
//! `verify_pre_equivalence` checks every axiom numerically: module
//! laws, the compatibility identity `_A⟨ψ,φ⟩·ζ = ψ·⟨φ,ζ⟩_B`, positivity
//! and boundedness through the regular representation, and fullness as
//! rank conditions (the finite stand-in for density of the inner
//! products' ranges).

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{convolve, cstar_norm, involute, AlgebraElement, RegularRepresentation};
use crate::bibundle::{check_equivalence, Bibundle};
use crate::error::{Error, Result};
use crate::linalg;
use crate::report::{CheckReport, CheckRow};

/// A complex-valued function on the points of a fixed bibundle.
#[derive(Debug, Clone)]
pub struct BimoduleElement {
    bibundle: Arc<Bibundle>,
    values: Vec<Complex64>,
}

impl BimoduleElement {
    pub fn new(bibundle: Arc<Bibundle>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != bibundle.n_points() {
            return Err(Error::Dimension {
                expected: bibundle.n_points(),
                got: values.len(),
            });
        }
        Ok(BimoduleElement { bibundle, values })
    }

    pub fn zero(bibundle: Arc<Bibundle>) -> Self {
        let n = bibundle.n_points();
        BimoduleElement {
            bibundle,
            values: vec![Complex64::ZERO; n],
        }
    }

    pub fn delta(bibundle: Arc<Bibundle>, point: usize) -> Self {
        let mut e = Self::zero(bibundle);
        e.values[point] = Complex64::ONE;
        e
    }

    pub fn random(bibundle: Arc<Bibundle>, rng: &mut impl Rng) -> Self {
        let n = bibundle.n_points();
        let values = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        BimoduleElement { bibundle, values }
    }

    pub fn bibundle(&self) -> &Arc<Bibundle> {
        &self.bibundle
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, m: usize) -> Complex64 {
        self.values[m]
    }

    pub fn sub(&self, other: &Self) -> Self {
        BimoduleElement {
            bibundle: self.bibundle.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Left action of the algebra of the left groupoid.
pub fn left_act(a: &AlgebraElement, psi: &BimoduleElement) -> Result<BimoduleElement> {
    let b = &psi.bibundle;
    if a.groupoid() != b.g() && !Arc::ptr_eq(a.groupoid(), b.g()) {
        return Err(Error::GroupoidMismatch);
    }
    let g = b.g();
    let mut out = BimoduleElement::zero(b.clone());
    for m in b.points() {
        let mut acc = Complex64::ZERO;
        for &x in g.t_fiber(b.tau(m)) {
            let x = x as usize;
            let xi_m = b.left_act_defined(g.inverse(x), m);
            acc += a.value(x) * psi.values[xi_m];
        }
        out.values[m] = acc;
    }
    Ok(out)
}

/// Right action of the algebra of the right groupoid.
pub fn right_act(psi: &BimoduleElement, bb: &AlgebraElement) -> Result<BimoduleElement> {
    let b = &psi.bibundle;
    if bb.groupoid() != b.h() && !Arc::ptr_eq(bb.groupoid(), b.h()) {
        return Err(Error::GroupoidMismatch);
    }
    let h = b.h();
    let mut out = BimoduleElement::zero(b.clone());
    for m in b.points() {
        let mut acc = Complex64::ZERO;
        for &hh in h.t_fiber(b.sigma(m)) {
            let hh = hh as usize;
            let mh = b.right_act_defined(m, hh);
            acc += psi.values[mh] * bb.value(h.inverse(hh));
        }
        out.values[m] = acc;
    }
    Ok(out)
}

fn check_same_bibundle(a: &BimoduleElement, b: &BimoduleElement) -> Result<()> {
    if Arc::ptr_eq(&a.bibundle, &b.bibundle) {
        Ok(())
    } else {
        Err(Error::GroupoidMismatch)
    }
}

fn inner_right_at(
    psi: &BimoduleElement,
    phi: &BimoduleElement,
    h_arrow: usize,
    basepoint: usize,
) -> Complex64 {
    let b = &psi.bibundle;
    let g = b.g();
    let mut acc = Complex64::ZERO;
    for &x in g.t_fiber(b.tau(basepoint)) {
        let x = x as usize;
        let p = b.left_act_defined(g.inverse(x), basepoint);
        let ph = b.right_act_defined(p, h_arrow);
        acc += psi.values[p].conj() * phi.values[ph];
    }
    acc
}

/// Inner product valued in the right algebra. The value at each arrow
/// is recomputed over every admissible basepoint; the spread across
/// basepoints is returned alongside (zero for an equivalence bibundle,
/// up to summation rounding).
pub fn inner_right_with_spread(
    psi: &BimoduleElement,
    phi: &BimoduleElement,
) -> Result<(AlgebraElement, f64)> {
    check_same_bibundle(psi, phi)?;
    let b = &psi.bibundle;
    let h = b.h();
    let mut out = AlgebraElement::zero(h.clone());
    let mut spread = 0.0f64;
    for hh in h.arrows() {
        let fiber = b.sigma_fiber(h.tgt(hh));
        if fiber.is_empty() {
            return Err(Error::EmptyFiber(format!(
                "no bibundle point over object {} of the right base",
                h.tgt(hh)
            )));
        }
        let first = inner_right_at(psi, phi, hh, fiber[0] as usize);
        for &mh in &fiber[1..] {
            let other = inner_right_at(psi, phi, hh, mh as usize);
            spread = spread.max((other - first).norm());
        }
        out.set(hh, first);
    }
    Ok((out, spread))
}

/// Inner product valued in the right algebra.
pub fn inner_right(psi: &BimoduleElement, phi: &BimoduleElement) -> Result<AlgebraElement> {
    Ok(inner_right_with_spread(psi, phi)?.0)
}

fn inner_left_at(
    psi: &BimoduleElement,
    phi: &BimoduleElement,
    x_arrow: usize,
    basepoint: usize,
) -> Complex64 {
    let b = &psi.bibundle;
    let h = b.h();
    let mut acc = Complex64::ZERO;
    for &hh in h.t_fiber(b.sigma(basepoint)) {
        let hh = hh as usize;
        let p = b.right_act_defined(basepoint, hh);
        let xp = b.left_act_defined(x_arrow, p);
        acc += psi.values[xp] * phi.values[p].conj();
    }
    acc
}

/// Inner product valued in the left algebra, with basepoint spread.
pub fn inner_left_with_spread(
    psi: &BimoduleElement,
    phi: &BimoduleElement,
) -> Result<(AlgebraElement, f64)> {
    check_same_bibundle(psi, phi)?;
    let b = &psi.bibundle;
    let g = b.g();
    let mut out = AlgebraElement::zero(g.clone());
    let mut spread = 0.0f64;
    for x in g.arrows() {
        let fiber = b.tau_fiber(g.src(x));
        if fiber.is_empty() {
            return Err(Error::EmptyFiber(format!(
                "no bibundle point over object {} of the left base",
                g.src(x)
            )));
        }
        let first = inner_left_at(psi, phi, x, fiber[0] as usize);
        for &mx in &fiber[1..] {
            let other = inner_left_at(psi, phi, x, mx as usize);
            spread = spread.max((other - first).norm());
        }
        out.set(x, first);
    }
    Ok((out, spread))
}

/// Inner product valued in the left algebra.
pub fn inner_left(psi: &BimoduleElement, phi: &BimoduleElement) -> Result<AlgebraElement> {
    Ok(inner_left_with_spread(psi, phi)?.0)
}

/// Verify every pre-equivalence bimodule axiom on a validated
/// equivalence bibundle; returns a per-axiom report with worst
/// residuals. `tol` gates the pass/fail flags.
pub fn verify_pre_equivalence(bibundle: &Arc<Bibundle>, tol: f64, seed: u64) -> Result<CheckReport> {
    if !check_equivalence(bibundle).pass {
        return Err(Error::PreconditionFailed(
            "bibundle is not an equivalence bibundle".into(),
        ));
    }
    let b = bibundle;
    let g = b.g().clone();
    let h = b.h().clone();
    let rep_g = RegularRepresentation::new(g.clone());
    let rep_h = RegularRepresentation::new(h.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trials = 100;

    // Module laws on random triples, plus basepoint independence of
    // both inner products.
    let mut law_residual = 0.0f64;
    for _ in 0..trials {
        let a1 = AlgebraElement::random(g.clone(), &mut rng);
        let a2 = AlgebraElement::random(g.clone(), &mut rng);
        let b1 = AlgebraElement::random(h.clone(), &mut rng);
        let b2 = AlgebraElement::random(h.clone(), &mut rng);
        let psi = BimoduleElement::random(b.clone(), &mut rng);

        let lhs = left_act(&convolve(&a1, &a2)?, &psi)?;
        let rhs = left_act(&a1, &left_act(&a2, &psi)?)?;
        law_residual = law_residual.max(lhs.sub(&rhs).norm_inf());

        let lhs = right_act(&psi, &convolve(&b1, &b2)?)?;
        let rhs = right_act(&right_act(&psi, &b1)?, &b2)?;
        law_residual = law_residual.max(lhs.sub(&rhs).norm_inf());

        let lhs = right_act(&left_act(&a1, &psi)?, &b1)?;
        let rhs = left_act(&a1, &right_act(&psi, &b1)?)?;
        law_residual = law_residual.max(lhs.sub(&rhs).norm_inf());

        let phi = BimoduleElement::random(b.clone(), &mut rng);
        let (ip_r, spread_r) = inner_right_with_spread(&psi, &phi)?;
        let (ip_l, spread_l) = inner_left_with_spread(&psi, &phi)?;
        law_residual = law_residual.max(spread_r).max(spread_l);

        // Hermitian symmetry of both inner products.
        let sym_r = involute(&ip_r).sub(&inner_right(&phi, &psi)?)?.norm_inf();
        let sym_l = involute(&ip_l).sub(&inner_left(&phi, &psi)?)?.norm_inf();
        law_residual = law_residual.max(sym_r).max(sym_l);

        // Algebra-linearity: ⟨ψ, φ·B⟩_B = ⟨ψ,φ⟩_B * B and
        // _A⟨A·ψ, φ⟩ = A * _A⟨ψ,φ⟩.
        let lin_r = inner_right(&psi, &right_act(&phi, &b1)?)?
            .sub(&convolve(&ip_r, &b1)?)?
            .norm_inf();
        let lin_l = inner_left(&left_act(&a1, &psi)?, &phi)?
            .sub(&convolve(&a1, &ip_l)?)?
            .norm_inf();
        law_residual = law_residual.max(lin_r).max(lin_l);
    }

    // Compatibility of the two inner products, on all delta triples and
    // on random triples. This is the check that pins down every sign
    // and composition-order convention.
    let mut compat_residual = 0.0f64;
    let n = b.n_points();
    for m1 in 0..n {
        let d1 = BimoduleElement::delta(b.clone(), m1);
        for m2 in 0..n {
            let d2 = BimoduleElement::delta(b.clone(), m2);
            let lhs_alg = inner_left(&d1, &d2)?;
            for m3 in 0..n {
                let d3 = BimoduleElement::delta(b.clone(), m3);
                let lhs = left_act(&lhs_alg, &d3)?;
                let rhs = right_act(&d1, &inner_right(&d2, &d3)?)?;
                compat_residual = compat_residual.max(lhs.sub(&rhs).norm_inf());
            }
        }
    }
    for _ in 0..trials {
        let p1 = BimoduleElement::random(b.clone(), &mut rng);
        let p2 = BimoduleElement::random(b.clone(), &mut rng);
        let p3 = BimoduleElement::random(b.clone(), &mut rng);
        let lhs = left_act(&inner_left(&p1, &p2)?, &p3)?;
        let rhs = right_act(&p1, &inner_right(&p2, &p3)?)?;
        compat_residual = compat_residual.max(lhs.sub(&rhs).norm_inf());
    }

    // Positivity of ⟨ψ,ψ⟩ on both sides through the regular
    // representation.
    let mut pos_right = 0.0f64;
    let mut pos_left = 0.0f64;
    for _ in 0..trials {
        let psi = BimoduleElement::random(b.clone(), &mut rng);
        let m_r = rep_h.matrix(&inner_right(&psi, &psi)?)?;
        pos_right = pos_right.max(-linalg::min_hermitian_eigenvalue(&m_r));
        let m_l = rep_g.matrix(&inner_left(&psi, &psi)?)?;
        pos_left = pos_left.max(-linalg::min_hermitian_eigenvalue(&m_l));
    }

    // Fullness: the spans of all pairwise delta inner products must fill
    // both algebras (rank conditions standing in for dense range).
    let mut right_span = nalgebra::DMatrix::<Complex64>::zeros(h.n_arrows(), n * n);
    let mut left_span = nalgebra::DMatrix::<Complex64>::zeros(g.n_arrows(), n * n);
    for m1 in 0..n {
        let d1 = BimoduleElement::delta(b.clone(), m1);
        for m2 in 0..n {
            let d2 = BimoduleElement::delta(b.clone(), m2);
            let r = inner_right(&d1, &d2)?;
            let l = inner_left(&d1, &d2)?;
            for (row, v) in r.values().iter().enumerate() {
                right_span[(row, m1 * n + m2)] = *v;
            }
            for (row, v) in l.values().iter().enumerate() {
                left_span[(row, m1 * n + m2)] = *v;
            }
        }
    }
    let rank_right = linalg::complex_rank(&right_span, linalg::RANK_REL_TOL);
    let rank_left = linalg::complex_rank(&left_span, linalg::RANK_REL_TOL);

    // Completion bounds: ⟨Aψ, Aψ⟩_B ≼ ‖A‖² ⟨ψ,ψ⟩_B and the mirror,
    // as positive semidefiniteness of the difference.
    let mut bound_right = 0.0f64;
    let mut bound_left = 0.0f64;
    for _ in 0..trials {
        let psi = BimoduleElement::random(b.clone(), &mut rng);
        let a = AlgebraElement::random(g.clone(), &mut rng);
        let na = cstar_norm(&a);
        let apsi = left_act(&a, &psi)?;
        let big = rep_h.matrix(&inner_right(&psi, &psi)?)?.scale(na * na);
        let small = rep_h.matrix(&inner_right(&apsi, &apsi)?)?;
        bound_right = bound_right.max(-linalg::min_hermitian_eigenvalue(&(big - small)));

        let bb = AlgebraElement::random(h.clone(), &mut rng);
        let nb = cstar_norm(&bb);
        let psib = right_act(&psi, &bb)?;
        let big = rep_g.matrix(&inner_left(&psi, &psi)?)?.scale(nb * nb);
        let small = rep_g.matrix(&inner_left(&psib, &psib)?)?;
        bound_left = bound_left.max(-linalg::min_hermitian_eigenvalue(&(big - small)));
    }

    let rows = vec![
        CheckRow::new("module-laws", law_residual, tol),
        CheckRow::new("inner-compatibility", compat_residual, tol),
        CheckRow::new("positivity-right", pos_right, tol),
        CheckRow::new("positivity-left", pos_left, tol),
        CheckRow::exact(
            "fullness-right",
            rank_right == h.n_arrows(),
            format!("rank {} of {}", rank_right, h.n_arrows()),
        ),
        CheckRow::exact(
            "fullness-left",
            rank_left == g.n_arrows(),
            format!("rank {} of {}", rank_left, g.n_arrows()),
        ),
        CheckRow::new("bound-right", bound_right, tol),
        CheckRow::new("bound-left", bound_left, tol),
    ];
    Ok(CheckReport::new("pre-equivalence-bimodule", rows))
}
