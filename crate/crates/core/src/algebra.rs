//! The convolution *-algebra of a finite groupoid and its regular
//! representation.
//!
//! With counting measures on target fibers the convolution product is
//!
//! ```text
//! (f * g)(x) = Σ_{y : tgt(y) = tgt(x)} f(y) · g(y⁻¹ ∘ x)
//! ```
//!
//! and the involution is `f*(x) = conj(f(x⁻¹))`. The left regular
//! representation acts on the arrow-indexed inner-product space by
//! `π(f) ξ = f * ξ`; it is faithful, `π(f*) = π(f)†`, and the operator
//! norm of `π(f)` realizes the C*-norm (a single faithful
//! finite-dimensional representation attains the supremum over all
//! representations here).

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::linalg;

/// A complex-valued function on the arrows of a fixed groupoid.
#[derive(Debug, Clone)]
pub struct AlgebraElement {
    groupoid: Arc<FiniteGroupoid>,
    values: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn new(groupoid: Arc<FiniteGroupoid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != groupoid.n_arrows() {
            return Err(Error::Dimension {
                expected: groupoid.n_arrows(),
                got: values.len(),
            });
        }
        Ok(AlgebraElement { groupoid, values })
    }

    pub fn zero(groupoid: Arc<FiniteGroupoid>) -> Self {
        let n = groupoid.n_arrows();
        AlgebraElement {
            groupoid,
            values: vec![Complex64::ZERO; n],
        }
    }

    /// The delta function at one arrow.
    pub fn delta(groupoid: Arc<FiniteGroupoid>, arrow: usize) -> Self {
        let mut e = Self::zero(groupoid);
        e.values[arrow] = Complex64::ONE;
        e
    }

    /// Element with independent standard complex Gaussian entries.
    pub fn random(groupoid: Arc<FiniteGroupoid>, rng: &mut impl Rng) -> Self {
        let n = groupoid.n_arrows();
        let values = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        AlgebraElement { groupoid, values }
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn value(&self, arrow: usize) -> Complex64 {
        self.values[arrow]
    }

    pub fn set(&mut self, arrow: usize, v: Complex64) {
        self.values[arrow] = v;
    }

    pub fn scale(&self, c: Complex64) -> Self {
        AlgebraElement {
            groupoid: self.groupoid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_groupoid(other)?;
        Ok(AlgebraElement {
            groupoid: self.groupoid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_groupoid(other)?;
        Ok(AlgebraElement {
            groupoid: self.groupoid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn check_same_groupoid(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.groupoid, &other.groupoid) || self.groupoid == other.groupoid {
            Ok(())
        } else {
            Err(Error::GroupoidMismatch)
        }
    }

    /// Serialize as a JSON array of `[re, im]` pairs indexed by arrow id.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.values
                .iter()
                .map(|v| serde_json::json!([v.re, v.im]))
                .collect(),
        )
    }

    pub fn from_json(groupoid: Arc<FiniteGroupoid>, value: &serde_json::Value) -> Result<Self> {
        let pairs: Vec<[f64; 2]> = serde_json::from_value(value.clone())
            .map_err(|e| Error::Parse(format!("algebra element: {e}")))?;
        Self::new(
            groupoid,
            pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect(),
        )
    }
}

/// Convolution product over counting measures on target fibers.
pub fn convolve(f: &AlgebraElement, g: &AlgebraElement) -> Result<AlgebraElement> {
    f.check_same_groupoid(g)?;
    let grp = &f.groupoid;
    let mut out = AlgebraElement::zero(grp.clone());
    for x in grp.arrows() {
        let mut acc = Complex64::ZERO;
        for &y in grp.t_fiber(grp.tgt(x)) {
            let y = y as usize;
            let yi_x = grp.compose_defined(grp.inverse(y), x);
            acc += f.values[y] * g.values[yi_x];
        }
        out.values[x] = acc;
    }
    Ok(out)
}

/// The involution `f*(x) = conj(f(x⁻¹))`.
pub fn involute(f: &AlgebraElement) -> AlgebraElement {
    let grp = &f.groupoid;
    let mut out = AlgebraElement::zero(grp.clone());
    for x in grp.arrows() {
        out.values[x] = f.values[grp.inverse(x)].conj();
    }
    out
}

/// Left regular representation on the arrow-indexed inner-product space.
pub struct RegularRepresentation {
    groupoid: Arc<FiniteGroupoid>,
}

impl RegularRepresentation {
    pub fn new(groupoid: Arc<FiniteGroupoid>) -> Self {
        RegularRepresentation { groupoid }
    }

    pub fn dimension(&self) -> usize {
        self.groupoid.n_arrows()
    }

    /// Matrix of `π(f)`. Entry `(x, z)` is `f(x ∘ z⁻¹)` when
    /// `src(x) == src(z)`, else zero.
    pub fn matrix(&self, f: &AlgebraElement) -> Result<DMatrix<Complex64>> {
        if !(Arc::ptr_eq(&self.groupoid, f.groupoid()) || self.groupoid == *f.groupoid()) {
            return Err(Error::GroupoidMismatch);
        }
        let grp = &self.groupoid;
        let n = grp.n_arrows();
        let mut m = DMatrix::from_element(n, n, Complex64::ZERO);
        for x in grp.arrows() {
            for &z in grp.s_fiber(grp.src(x)) {
                let z = z as usize;
                let a = grp.compose_defined(x, grp.inverse(z));
                m[(x, z)] = f.values[a];
            }
        }
        Ok(m)
    }

    pub fn basis_matrix(&self, arrow: usize) -> DMatrix<Complex64> {
        self.matrix(&AlgebraElement::delta(self.groupoid.clone(), arrow))
            .expect("same groupoid")
    }
}

/// Construct the regular representation of a groupoid.
pub fn regular_representation(groupoid: Arc<FiniteGroupoid>) -> RegularRepresentation {
    RegularRepresentation::new(groupoid)
}

/// C*-norm of `f`: the operator norm of its regular-representation
/// matrix.
pub fn cstar_norm(f: &AlgebraElement) -> f64 {
    let rep = RegularRepresentation::new(f.groupoid.clone());
    let m = rep.matrix(f).expect("same groupoid");
    linalg::operator_norm(&m)
}

/// Dimension of the center of the convolution algebra, i.e. the number
/// of simple matrix blocks, computed as the nullity of the commutant
/// system `{z : z*δ_a = δ_a*z for every arrow a}`.
///
/// Convolution of delta functions has 0/1 structure constants, so the
/// system is real and solved by one real SVD rank decision.
pub fn block_count(groupoid: &Arc<FiniteGroupoid>) -> usize {
    let g = groupoid;
    let n = g.n_arrows();
    // Row block per arrow a: the linear map z ↦ z*δ_a − δ_a*z,
    // expressed on the delta basis. δ_b * δ_a = δ_{b∘a} when defined.
    let mut rows = DMatrix::<f64>::zeros(n * n, n);
    for a in g.arrows() {
        for b in g.arrows() {
            if g.src(b) == g.tgt(a) {
                let ba = g.compose_defined(b, a);
                rows[(a * n + ba, b)] += 1.0;
            }
            if g.src(a) == g.tgt(b) {
                let ab = g.compose_defined(a, b);
                rows[(a * n + ab, b)] -= 1.0;
            }
        }
    }
    n - linalg::rank(&rows, linalg::RANK_REL_TOL)
}

/// Finite-dimensional Morita test: two finite-dimensional C*-algebras
/// are Morita equivalent exactly when they have the same number of
/// simple summands.
pub fn morita_oracle(g: &Arc<FiniteGroupoid>, h: &Arc<FiniteGroupoid>) -> bool {
    block_count(g) == block_count(h)
}

/// Rank of the representation map `f ↦ π(f)`; equality with the arrow
/// count certifies faithfulness.
pub fn representation_rank(groupoid: &Arc<FiniteGroupoid>) -> usize {
    let rep = RegularRepresentation::new(groupoid.clone());
    let n = groupoid.n_arrows();
    let mut m = DMatrix::<f64>::zeros(n * n, n);
    for a in groupoid.arrows() {
        let ma = rep.basis_matrix(a);
        for i in 0..n {
            for j in 0..n {
                m[(i * n + j, a)] = ma[(i, j)].re;
            }
        }
    }
    linalg::rank(&m, linalg::RANK_REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{cyclic_group_table, make_builtin, Builtin};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pair(n: usize) -> Arc<FiniteGroupoid> {
        Arc::new(make_builtin(&Builtin::Pair(n)).unwrap())
    }

    fn unit(n: usize) -> Arc<FiniteGroupoid> {
        Arc::new(make_builtin(&Builtin::Unit(n)).unwrap())
    }

    fn z(n: usize) -> Arc<FiniteGroupoid> {
        Arc::new(make_builtin(&Builtin::Group(cyclic_group_table(n))).unwrap())
    }

    #[test]
    fn unit_groupoid_convolution_is_pointwise() {
        let g = unit(2);
        let f = AlgebraElement::new(g.clone(), vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let h = AlgebraElement::new(g.clone(), vec![c(3.0, 0.0), c(4.0, 0.0)]).unwrap();
        let fh = convolve(&f, &h).unwrap();
        assert_eq!(fh.value(0), c(3.0, 0.0));
        assert_eq!(fh.value(1), c(8.0, 0.0));
    }

    #[test]
    fn z2_delta_convolution() {
        let g = z(2);
        let dg = AlgebraElement::delta(g.clone(), 1);
        let sq = convolve(&dg, &dg).unwrap();
        assert_eq!(sq.value(0), c(1.0, 0.0));
        assert_eq!(sq.value(1), c(0.0, 0.0));
    }

    #[test]
    fn groupoid_mismatch_is_rejected() {
        let f = AlgebraElement::zero(pair(2));
        let g = AlgebraElement::zero(pair(3));
        assert!(matches!(convolve(&f, &g), Err(Error::GroupoidMismatch)));
    }

    #[test]
    fn involution_fixes_real_functions_on_unit_groupoid() {
        let g = unit(3);
        let f = AlgebraElement::new(g, vec![c(1.0, 0.0), c(-2.0, 0.0), c(0.5, 0.0)]).unwrap();
        let fs = involute(&f);
        for x in 0..3 {
            assert_eq!(fs.value(x), f.value(x));
        }
    }

    #[test]
    fn involution_is_antilinear_on_deltas() {
        let g = pair(2);
        // i·δ_x with x = arrow (0 <- 1) = id 1; x⁻¹ = (1 <- 0) = id 2.
        let f = AlgebraElement::delta(g.clone(), 1).scale(c(0.0, 1.0));
        let fs = involute(&f);
        assert_eq!(fs.value(2), c(0.0, -1.0));
        assert_eq!(fs.norm_inf(), 1.0);
    }

    #[test]
    fn involution_reverses_products() {
        let g = z(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let f = AlgebraElement::random(g.clone(), &mut rng);
            let h = AlgebraElement::random(g.clone(), &mut rng);
            let lhs = involute(&convolve(&f, &h).unwrap());
            let rhs = convolve(&involute(&h), &involute(&f)).unwrap();
            assert!(lhs.sub(&rhs).unwrap().norm_inf() <= 1e-12);
        }
    }

    #[test]
    fn regular_representation_is_diagonal_on_unit_groupoid() {
        let g = unit(3);
        let rep = regular_representation(g.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = AlgebraElement::random(g, &mut rng);
        let m = rep.matrix(&f).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(m[(i, j)], Complex64::ZERO);
                } else {
                    assert_eq!(m[(i, j)], f.value(i));
                }
            }
        }
    }

    #[test]
    fn regular_representation_is_multiplicative_and_star_compatible() {
        for g in [pair(3), z(3), unit(2)] {
            let rep = regular_representation(g.clone());
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..10 {
                let f = AlgebraElement::random(g.clone(), &mut rng);
                let h = AlgebraElement::random(g.clone(), &mut rng);
                let lhs = rep.matrix(&convolve(&f, &h).unwrap()).unwrap();
                let rhs = rep.matrix(&f).unwrap() * rep.matrix(&h).unwrap();
                assert!((lhs - rhs).map(|v| v.norm()).max() <= 1e-12);

                let star = rep.matrix(&involute(&f)).unwrap();
                let adj = rep.matrix(&f).unwrap().adjoint();
                assert!((star - adj).map(|v| v.norm()).max() <= 1e-12);
            }
        }
    }

    #[test]
    fn delta_norms_and_eigenvalues() {
        // Unit arrows are projections of norm 1; every pair-groupoid
        // delta is a partial isometry of norm 1.
        let g = pair(3);
        for x in g.arrows() {
            let d = AlgebraElement::delta(g.clone(), x);
            assert_relative_eq!(cstar_norm(&d), 1.0, epsilon = 1e-12);
        }

        // In C*(Z_2), δ_e + δ_g has spectrum {2, 0}.
        let g2 = z(2);
        let f = AlgebraElement::new(g2.clone(), vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_relative_eq!(cstar_norm(&f), 2.0, epsilon = 1e-12);
        let rep = regular_representation(g2);
        let m = rep.matrix(&f).unwrap();
        let min = linalg::min_hermitian_eigenvalue(&m);
        assert_relative_eq!(min, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cstar_norm_of_zero_is_zero() {
        let g = pair(2);
        assert_eq!(cstar_norm(&AlgebraElement::zero(g)), 0.0);
    }

    #[test]
    fn cstar_identity_on_random_elements() {
        for g in [pair(2), z(3)] {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..25 {
                let f = AlgebraElement::random(g.clone(), &mut rng);
                let n = cstar_norm(&f);
                let n2 = cstar_norm(&convolve(&involute(&f), &f).unwrap());
                assert!((n2 - n * n).abs() <= 1e-9 * n * n);
            }
        }
    }

    #[test]
    fn block_counts() {
        assert_eq!(block_count(&pair(2)), 1);
        assert_eq!(block_count(&pair(3)), 1);
        assert_eq!(block_count(&unit(4)), 4);
        assert_eq!(block_count(&z(3)), 3);
        // Action groupoid of Z_2 swapping two points is equivalent to a
        // point: full 2x2 matrix algebra, one block.
        let swap = Arc::new(
            make_builtin(&Builtin::Action {
                group: cyclic_group_table(2),
                action: vec![vec![0, 1], vec![1, 0]],
            })
            .unwrap(),
        );
        assert_eq!(block_count(&swap), 1);
    }

    #[test]
    fn morita_oracle_on_corpus() {
        assert!(morita_oracle(&pair(2), &pair(3)));
        assert!(!morita_oracle(&pair(2), &unit(2)));
        let g = z(3);
        assert!(morita_oracle(&g, &g));
    }

    #[test]
    fn regular_representation_is_faithful() {
        for g in [pair(3), unit(3), z(4)] {
            assert_eq!(representation_rank(&g), g.n_arrows());
        }
    }

    #[test]
    fn element_json_round_trip() {
        let g = pair(2);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = AlgebraElement::random(g.clone(), &mut rng);
        let back = AlgebraElement::from_json(g, &f.to_json()).unwrap();
        assert!(f.sub(&back).unwrap().norm_inf() == 0.0);
    }
}
