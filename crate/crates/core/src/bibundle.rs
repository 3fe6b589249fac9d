//! Finite bibundles: a point set with commuting left and right groupoid
//! actions over base maps `tau` and `sigma`, plus the principality and
//! equivalence checks that certify Morita equivalence of the two
//! groupoids.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;

const NONE: u32 = u32::MAX;

/// A validated finite bibundle between two groupoids.
#[derive(Debug, Clone)]
pub struct Bibundle {
    g: Arc<FiniteGroupoid>,
    h: Arc<FiniteGroupoid>,
    n_points: usize,
    tau: Vec<u32>,
    sigma: Vec<u32>,
    /// `left[x * n_points + m]` = image of point `m` under arrow `x`,
    /// defined when `src(x) == tau(m)`.
    left: Vec<u32>,
    /// `right[m * |H arrows| + h]` = image of `m` under `h`,
    /// defined when `sigma(m) == tgt(h)`.
    right: Vec<u32>,
    tau_fibers: Vec<Vec<u32>>,
    sigma_fibers: Vec<Vec<u32>>,
}

/// On-disk bibundle description. `tau`/`sigma` are indexed by point id;
/// action tables list `[arrow, point, image]` / `[point, arrow, image]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BibundleSpec {
    pub points: usize,
    pub tau: Vec<usize>,
    pub sigma: Vec<usize>,
    pub left_act: Vec<[usize; 3]>,
    pub right_act: Vec<[usize; 3]>,
}

/// Outcome of a one-sided principality check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrincipalityReport {
    pub side: String,
    pub surjective_base: bool,
    pub free: bool,
    /// Properness holds automatically for maps of finite discrete sets;
    /// recorded, not computed.
    pub proper: bool,
    pub witnesses: Vec<String>,
}

impl PrincipalityReport {
    pub fn pass(&self) -> bool {
        self.surjective_base && self.free
    }
}

/// One named condition of the equivalence check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub witness: String,
}

/// Full report of the equivalence-bibundle conditions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub left_principal: PrincipalityReport,
    pub right_principal: PrincipalityReport,
    pub conditions: Vec<Condition>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Bibundle {
    pub fn g(&self) -> &Arc<FiniteGroupoid> {
        &self.g
    }

    pub fn h(&self) -> &Arc<FiniteGroupoid> {
        &self.h
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.n_points
    }

    pub fn tau(&self, m: usize) -> usize {
        self.tau[m] as usize
    }

    pub fn sigma(&self, m: usize) -> usize {
        self.sigma[m] as usize
    }

    pub fn tau_fiber(&self, q: usize) -> &[u32] {
        &self.tau_fibers[q]
    }

    pub fn sigma_fiber(&self, u: usize) -> &[u32] {
        &self.sigma_fibers[u]
    }

    /// `x · m`, defined when `src(x) == tau(m)`.
    pub fn left_act(&self, x: usize, m: usize) -> Option<usize> {
        let v = self.left[x * self.n_points + m];
        if v == NONE {
            None
        } else {
            Some(v as usize)
        }
    }

    /// `m · h`, defined when `sigma(m) == tgt(h)`.
    pub fn right_act(&self, m: usize, h: usize) -> Option<usize> {
        let v = self.right[m * self.h.n_arrows() + h];
        if v == NONE {
            None
        } else {
            Some(v as usize)
        }
    }

    pub fn left_act_defined(&self, x: usize, m: usize) -> usize {
        self.left_act(x, m)
            .unwrap_or_else(|| panic!("left action undefined on ({x}, {m})"))
    }

    pub fn right_act_defined(&self, m: usize, h: usize) -> usize {
        self.right_act(m, h)
            .unwrap_or_else(|| panic!("right action undefined on ({m}, {h})"))
    }

    pub fn to_spec(&self) -> BibundleSpec {
        let mut left_act = Vec::new();
        for x in self.g.arrows() {
            for m in self.points() {
                if let Some(xm) = self.left_act(x, m) {
                    left_act.push([x, m, xm]);
                }
            }
        }
        let mut right_act = Vec::new();
        for m in self.points() {
            for h in self.h.arrows() {
                if let Some(mh) = self.right_act(m, h) {
                    right_act.push([m, h, mh]);
                }
            }
        }
        BibundleSpec {
            points: self.n_points,
            tau: self.tau.iter().map(|&v| v as usize).collect(),
            sigma: self.sigma.iter().map(|&v| v as usize).collect(),
            left_act,
            right_act,
        }
    }

    /// The opposite bibundle: exchange the two groupoids and act through
    /// inverses.
    pub fn swap(&self) -> Result<Bibundle> {
        let mut spec = BibundleSpec {
            points: self.n_points,
            tau: self.sigma.iter().map(|&v| v as usize).collect(),
            sigma: self.tau.iter().map(|&v| v as usize).collect(),
            left_act: Vec::new(),
            right_act: Vec::new(),
        };
        for m in self.points() {
            for h in self.h.arrows() {
                if let Some(mh) = self.right_act(m, h) {
                    // h⁻¹ · m := m · h
                    spec.left_act.push([self.h.inverse(h), m, mh]);
                }
            }
        }
        for x in self.g.arrows() {
            for m in self.points() {
                if let Some(xm) = self.left_act(x, m) {
                    // m · x⁻¹ := x · m
                    spec.right_act.push([m, self.g.inverse(x), xm]);
                }
            }
        }
        bibundle_from_spec(self.h.clone(), self.g.clone(), &spec)
    }
}

/// Parse and validate a bibundle spec from JSON text.
pub fn validate_bibundle(
    g: Arc<FiniteGroupoid>,
    h: Arc<FiniteGroupoid>,
    raw: &str,
) -> Result<Bibundle> {
    let spec: BibundleSpec =
        serde_json::from_str(raw).map_err(|e| Error::Parse(format!("bibundle spec: {e}")))?;
    bibundle_from_spec(g, h, &spec)
}

/// Validate an already-parsed bibundle spec.
pub fn bibundle_from_spec(
    g: Arc<FiniteGroupoid>,
    h: Arc<FiniteGroupoid>,
    spec: &BibundleSpec,
) -> Result<Bibundle> {
    let n = spec.points;
    if n == 0 {
        return Err(Error::Parse("bibundle has no points".into()));
    }
    if spec.tau.len() != n || spec.sigma.len() != n {
        return Err(Error::Parse("tau/sigma must assign one object per point".into()));
    }
    if spec.tau.iter().any(|&q| q >= g.n_objects()) {
        return Err(Error::Parse("tau references object out of range".into()));
    }
    if spec.sigma.iter().any(|&u| u >= h.n_objects()) {
        return Err(Error::Parse("sigma references object out of range".into()));
    }

    let mut left = vec![NONE; g.n_arrows() * n];
    for &[x, m, xm] in &spec.left_act {
        if x >= g.n_arrows() || m >= n || xm >= n {
            return Err(Error::Parse(format!(
                "left action entry [{x}, {m}, {xm}] out of range"
            )));
        }
        let slot = &mut left[x * n + m];
        if *slot != NONE {
            return Err(Error::Parse(format!("duplicate left action entry ({x}, {m})")));
        }
        *slot = xm as u32;
    }
    let mut right = vec![NONE; n * h.n_arrows()];
    for &[m, hh, mh] in &spec.right_act {
        if hh >= h.n_arrows() || m >= n || mh >= n {
            return Err(Error::Parse(format!(
                "right action entry [{m}, {hh}, {mh}] out of range"
            )));
        }
        let slot = &mut right[m * h.n_arrows() + hh];
        if *slot != NONE {
            return Err(Error::Parse(format!("duplicate right action entry ({m}, {hh})")));
        }
        *slot = mh as u32;
    }

    let mut tau_fibers = vec![Vec::new(); g.n_objects()];
    let mut sigma_fibers = vec![Vec::new(); h.n_objects()];
    for m in 0..n {
        tau_fibers[spec.tau[m]].push(m as u32);
        sigma_fibers[spec.sigma[m]].push(m as u32);
    }

    let b = Bibundle {
        g,
        h,
        n_points: n,
        tau: spec.tau.iter().map(|&v| v as u32).collect(),
        sigma: spec.sigma.iter().map(|&v| v as u32).collect(),
        left,
        right,
        tau_fibers,
        sigma_fibers,
    };
    check_bibundle_axioms(&b)?;
    Ok(b)
}

/// Exhaustive verification of the action and commutation laws.
fn check_bibundle_axioms(b: &Bibundle) -> Result<()> {
    let g = &b.g;
    let h = &b.h;

    // Left action: defined exactly on matching pairs, right base map,
    // unit law, associativity with groupoid composition.
    for x in g.arrows() {
        for m in b.points() {
            let matching = g.src(x) == b.tau(m);
            match b.left_act(x, m) {
                Some(xm) => {
                    if !matching {
                        return Err(Error::axiom(
                            "left action domain",
                            format!("({x}, {m}) declared but src(x) != tau(m)"),
                        ));
                    }
                    if b.tau(xm) != g.tgt(x) {
                        return Err(Error::axiom(
                            "left action base map",
                            format!("tau({x}·{m}) != tgt({x})"),
                        ));
                    }
                }
                None => {
                    if matching {
                        return Err(Error::axiom(
                            "left action totality",
                            format!("({x}, {m}) composable but no entry"),
                        ));
                    }
                }
            }
        }
    }
    for m in b.points() {
        let u = g.unit(b.tau(m));
        if b.left_act(u, m) != Some(m) {
            return Err(Error::axiom("left unit action", format!("unit · {m} != {m}")));
        }
    }
    for y in g.arrows() {
        for m in b.points() {
            if g.src(y) != b.tau(m) {
                continue;
            }
            let ym = b.left_act_defined(y, m);
            for &x in g.s_fiber(g.tgt(y)) {
                let x = x as usize;
                let xy = g.compose_defined(x, y);
                if b.left_act(x, ym) != b.left_act(xy, m) {
                    return Err(Error::axiom(
                        "left action associativity",
                        format!("{x} · ({y} · {m}) != ({x}∘{y}) · {m}"),
                    ));
                }
            }
        }
    }

    // Right action mirror.
    for m in b.points() {
        for hh in h.arrows() {
            let matching = b.sigma(m) == h.tgt(hh);
            match b.right_act(m, hh) {
                Some(mh) => {
                    if !matching {
                        return Err(Error::axiom(
                            "right action domain",
                            format!("({m}, {hh}) declared but sigma(m) != tgt(h)"),
                        ));
                    }
                    if b.sigma(mh) != h.src(hh) {
                        return Err(Error::axiom(
                            "right action base map",
                            format!("sigma({m}·{hh}) != src({hh})"),
                        ));
                    }
                }
                None => {
                    if matching {
                        return Err(Error::axiom(
                            "right action totality",
                            format!("({m}, {hh}) composable but no entry"),
                        ));
                    }
                }
            }
        }
    }
    for m in b.points() {
        let u = h.unit(b.sigma(m));
        if b.right_act(m, u) != Some(m) {
            return Err(Error::axiom("right unit action", format!("{m} · unit != {m}")));
        }
    }
    for m in b.points() {
        for hh in h.arrows() {
            if b.sigma(m) != h.tgt(hh) {
                continue;
            }
            let mh = b.right_act_defined(m, hh);
            for &k in h.t_fiber(h.src(hh)) {
                let k = k as usize;
                let hk = h.compose_defined(hh, k);
                if b.right_act(mh, k) != b.right_act(m, hk) {
                    return Err(Error::axiom(
                        "right action associativity",
                        format!("({m} · {hh}) · {k} != {m} · ({hh}∘{k})"),
                    ));
                }
            }
        }
    }

    // Commutation of the two actions.
    for m in b.points() {
        for hh in h.arrows() {
            if b.sigma(m) != h.tgt(hh) {
                continue;
            }
            let mh = b.right_act_defined(m, hh);
            if b.tau(mh) != b.tau(m) {
                return Err(Error::axiom(
                    "commutation base maps",
                    format!("tau({m}·{hh}) != tau({m})"),
                ));
            }
            for &x in g.s_fiber(b.tau(m)) {
                let x = x as usize;
                let xm = b.left_act_defined(x, m);
                if b.sigma(xm) != b.sigma(m) {
                    return Err(Error::axiom(
                        "commutation base maps",
                        format!("sigma({x}·{m}) != sigma({m})"),
                    ));
                }
                if b.right_act(xm, hh) != b.left_act(x, mh) {
                    return Err(Error::axiom(
                        "commutation",
                        format!("({x}·{m})·{hh} != {x}·({m}·{hh})"),
                    ));
                }
            }
        }
    }

    Ok(())
}

/// Decide surjectivity of the base map and freeness of the action on
/// one side by exhaustive enumeration.
pub fn check_principality(b: &Bibundle, side: Side) -> PrincipalityReport {
    let mut witnesses = Vec::new();
    let (surjective, free) = match side {
        Side::Left => {
            let mut surjective = true;
            for q in b.g.objects() {
                if b.tau_fiber(q).is_empty() {
                    surjective = false;
                    witnesses.push(format!("object {q} of the left base is not hit by tau"));
                }
            }
            let mut free = true;
            for m in b.points() {
                for &x in b.g.s_fiber(b.tau(m)) {
                    let x = x as usize;
                    if b.left_act_defined(x, m) == m && !b.g.is_unit(x) {
                        free = false;
                        witnesses.push(format!("non-unit arrow {x} fixes point {m}"));
                    }
                }
            }
            (surjective, free)
        }
        Side::Right => {
            let mut surjective = true;
            for u in b.h.objects() {
                if b.sigma_fiber(u).is_empty() {
                    surjective = false;
                    witnesses.push(format!("object {u} of the right base is not hit by sigma"));
                }
            }
            let mut free = true;
            for m in b.points() {
                for hh in b.h.arrows() {
                    if b.h.tgt(hh) != b.sigma(m) {
                        continue;
                    }
                    if b.right_act_defined(m, hh) == m && !b.h.is_unit(hh) {
                        free = false;
                        witnesses.push(format!("non-unit arrow {hh} fixes point {m}"));
                    }
                }
            }
            (surjective, free)
        }
    };
    PrincipalityReport {
        side: match side {
            Side::Left => "left".into(),
            Side::Right => "right".into(),
        },
        surjective_base: surjective,
        free,
        proper: true,
        witnesses,
    }
}

/// Union-find quotient of the points by an edge relation.
fn quotient_classes(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut q: usize) -> usize {
        while parent[q] != q {
            parent[q] = parent[parent[q]];
            q = parent[q];
        }
        q
    }
    for (a, b) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    (0..n).map(|q| find(&mut parent, q)).collect()
}

/// Class representatives of `M/H` (orbits of the right action).
pub fn right_orbit_classes(b: &Bibundle) -> Vec<usize> {
    let edges = b.points().flat_map(|m| {
        let b = &b;
        b.h.arrows().filter_map(move |hh| b.right_act(m, hh).map(|mh| (m, mh)))
    });
    quotient_classes(b.n_points, edges)
}

/// Class representatives of `G\M` (orbits of the left action).
pub fn left_orbit_classes(b: &Bibundle) -> Vec<usize> {
    let edges = b.points().flat_map(|m| {
        let b = &b;
        b.g.arrows().filter_map(move |x| b.left_act(x, m).map(|xm| (m, xm)))
    });
    quotient_classes(b.n_points, edges)
}

/// Decide the equivalence-bibundle conditions: both sides principal,
/// `tau` inducing a bijection `M/H -> G_0`, and `sigma` inducing a
/// bijection `G\M -> H_0`.
pub fn check_equivalence(b: &Bibundle) -> EquivalenceReport {
    let left_principal = check_principality(b, Side::Left);
    let right_principal = check_principality(b, Side::Right);

    let mut conditions = Vec::new();

    // tau descends to M/H (guaranteed by the commutation axiom) and
    // must hit each left-base object exactly once.
    let right_classes = right_orbit_classes(b);
    let mut reps: Vec<usize> = right_classes.clone();
    reps.sort_unstable();
    reps.dedup();
    {
        let mut pass = reps.len() == b.g.n_objects();
        let mut witness = if pass {
            String::new()
        } else {
            format!(
                "quotient by the right action has {} classes, left base has {} objects",
                reps.len(),
                b.g.n_objects()
            )
        };
        if pass {
            let mut seen = vec![false; b.g.n_objects()];
            for &r in &reps {
                let q = b.tau(r);
                if seen[q] {
                    pass = false;
                    witness = format!("two right-action orbits map to object {q}");
                    break;
                }
                seen[q] = true;
            }
        }
        conditions.push(Condition {
            name: "right-quotient-bijects-left-base".into(),
            pass,
            witness,
        });
    }

    // sigma on G\M mirror.
    let left_classes = left_orbit_classes(b);
    let mut reps: Vec<usize> = left_classes.clone();
    reps.sort_unstable();
    reps.dedup();
    {
        let mut pass = reps.len() == b.h.n_objects();
        let mut witness = if pass {
            String::new()
        } else {
            format!(
                "quotient by the left action has {} classes, right base has {} objects",
                reps.len(),
                b.h.n_objects()
            )
        };
        if pass {
            let mut seen = vec![false; b.h.n_objects()];
            for &r in &reps {
                let u = b.sigma(r);
                if seen[u] {
                    pass = false;
                    witness = format!("two left-action orbits map to object {u}");
                    break;
                }
                seen[u] = true;
            }
        }
        conditions.push(Condition {
            name: "left-quotient-bijects-right-base".into(),
            pass,
            witness,
        });
    }

    let pass = left_principal.pass()
        && right_principal.pass()
        && conditions.iter().all(|c| c.pass);
    EquivalenceReport {
        left_principal,
        right_principal,
        conditions,
        pass,
    }
}

/// Each sigma-fiber of an equivalence bibundle is a single free
/// left-orbit (and the tau mirror); used by the inner products to pick
/// basepoints. Returns the worst violation as a witness.
pub fn check_fiber_transitivity(b: &Bibundle) -> Result<()> {
    for u in b.h.objects() {
        let fiber = b.sigma_fiber(u);
        if fiber.is_empty() {
            return Err(Error::EmptyFiber(format!("sigma fiber over object {u}")));
        }
        let m0 = fiber[0] as usize;
        for &m in fiber {
            let m = m as usize;
            let hits = b
                .g
                .t_fiber(b.tau(m0))
                .iter()
                .filter(|&&x| b.left_act(b.g.inverse(x as usize), m0) == Some(m))
                .count();
            if hits != 1 {
                return Err(Error::axiom(
                    "sigma fibers are free transitive left orbits",
                    format!("points {m0}, {m} are connected by {hits} arrows"),
                ));
            }
        }
    }
    for q in b.g.objects() {
        let fiber = b.tau_fiber(q);
        if fiber.is_empty() {
            return Err(Error::EmptyFiber(format!("tau fiber over object {q}")));
        }
        let m0 = fiber[0] as usize;
        for &m in fiber {
            let m = m as usize;
            let hits = b
                .h
                .arrows()
                .filter(|&hh| b.h.tgt(hh) == b.sigma(m0) && b.right_act(m0, hh) == Some(m))
                .count();
            if hits != 1 {
                return Err(Error::axiom(
                    "tau fibers are free transitive right orbits",
                    format!("points {m0}, {m} are connected by {hits} arrows"),
                ));
            }
        }
    }
    Ok(())
}

/// The rectangle bibundle between `Pair(rows)` and `Pair(cols)`:
/// points are grid cells, the left action replaces the row index, the
/// right action the column index. The canonical equivalence bibundle.
pub fn rectangle_bibundle(rows: usize, cols: usize) -> Result<Bibundle> {
    use crate::groupoid::{make_builtin, Builtin};
    let g = Arc::new(make_builtin(&Builtin::Pair(rows))?);
    let h = Arc::new(make_builtin(&Builtin::Pair(cols))?);
    let spec = rectangle_spec(rows, cols);
    bibundle_from_spec(g, h, &spec)
}

/// The spec of the rectangle bibundle (exposed for fixture generation).
pub fn rectangle_spec(rows: usize, cols: usize) -> BibundleSpec {
    let n = rows * cols;
    let tau: Vec<usize> = (0..n).map(|m| m / cols).collect();
    let sigma: Vec<usize> = (0..n).map(|m| m % cols).collect();
    let mut left_act = Vec::new();
    for i2 in 0..rows {
        for i in 0..rows {
            // arrow (i2 <- i) moves row i to row i2
            let x = i2 * rows + i;
            for j in 0..cols {
                left_act.push([x, i * cols + j, i2 * cols + j]);
            }
        }
    }
    let mut right_act = Vec::new();
    for j in 0..cols {
        for j2 in 0..cols {
            // arrow (j <- j2) moves column j to column j2
            let hh = j * cols + j2;
            for i in 0..rows {
                right_act.push([i * cols + j, hh, i * cols + j2]);
            }
        }
    }
    BibundleSpec {
        points: n,
        tau,
        sigma,
        left_act,
        right_act,
    }
}

/// A group as an equivalence bibundle over itself: both translation
/// actions on its own arrow set.
pub fn self_equivalence_bibundle(g: &Arc<FiniteGroupoid>) -> Result<Bibundle> {
    let n = g.n_arrows();
    let tau: Vec<usize> = (0..n).map(|m| g.tgt(m)).collect();
    let sigma: Vec<usize> = (0..n).map(|m| g.src(m)).collect();
    let mut left_act = Vec::new();
    let mut right_act = Vec::new();
    for m in 0..n {
        for x in g.arrows() {
            if g.src(x) == g.tgt(m) {
                left_act.push([x, m, g.compose_defined(x, m)]);
            }
        }
        for hh in g.arrows() {
            if g.src(m) == g.tgt(hh) {
                right_act.push([m, hh, g.compose_defined(m, hh)]);
            }
        }
    }
    let spec = BibundleSpec {
        points: n,
        tau,
        sigma,
        left_act,
        right_act,
    };
    bibundle_from_spec(g.clone(), g.clone(), &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{cyclic_group_table, make_builtin, Builtin};

    fn pair(n: usize) -> Arc<FiniteGroupoid> {
        Arc::new(make_builtin(&Builtin::Pair(n)).unwrap())
    }

    #[test]
    fn rectangle_bibundle_is_valid_and_equivalence() {
        let b = rectangle_bibundle(2, 3).unwrap();
        assert_eq!(b.n_points(), 6);
        let left = check_principality(&b, Side::Left);
        assert!(left.surjective_base && left.free && left.proper);
        let right = check_principality(&b, Side::Right);
        assert!(right.surjective_base && right.free);
        let report = check_equivalence(&b);
        assert!(report.pass, "{report:?}");
        check_fiber_transitivity(&b).unwrap();
    }

    #[test]
    fn self_translation_bibundle_is_valid() {
        // G acting on itself on the left, unit groupoid of G_0 on the right.
        let g = pair(2);
        let h = Arc::new(make_builtin(&Builtin::Unit(2)).unwrap());
        let n = g.n_arrows();
        let mut spec = BibundleSpec {
            points: n,
            tau: (0..n).map(|m| g.tgt(m)).collect(),
            sigma: (0..n).map(|m| g.src(m)).collect(),
            left_act: Vec::new(),
            right_act: Vec::new(),
        };
        for m in 0..n {
            for x in g.arrows() {
                if g.src(x) == g.tgt(m) {
                    spec.left_act.push([x, m, g.compose_defined(x, m)]);
                }
            }
            // Unit groupoid: only the unit arrow at sigma(m) acts.
            spec.right_act.push([m, g.src(m), m]);
        }
        let b = bibundle_from_spec(g, h, &spec).unwrap();
        // Valid bibundle, but not an equivalence: M/H = M has 4 classes.
        let report = check_equivalence(&b);
        assert!(!report.pass);
        assert!(!report.conditions[0].pass);
    }

    #[test]
    fn broken_commutation_is_axiom_error() {
        let mut spec = rectangle_spec(2, 2);
        // Corrupt one left-action image so that (x·m)·h != x·(m·h).
        // Arrow x = (1 <- 0) = id 2 sends (0,0) -> (1,0); point (0,0) = 0,
        // image (1,0) = 2. Redirect it to (1,1) = 3.
        for entry in spec.left_act.iter_mut() {
            if entry[0] == 2 && entry[1] == 0 {
                entry[2] = 3;
            }
        }
        let g = pair(2);
        let h = pair(2);
        let err = bibundle_from_spec(g, h, &spec).unwrap_err();
        assert!(matches!(err, Error::Axiom { .. }), "{err:?}");
    }

    #[test]
    fn fixed_point_by_non_unit_is_not_free() {
        // Z_2 acting trivially on one point: valid bibundle, not free.
        let z2 = Arc::new(make_builtin(&Builtin::Group(cyclic_group_table(2))).unwrap());
        let h = Arc::new(make_builtin(&Builtin::Unit(1)).unwrap());
        let spec = BibundleSpec {
            points: 1,
            tau: vec![0],
            sigma: vec![0],
            left_act: vec![[0, 0, 0], [1, 0, 0]],
            right_act: vec![[0, 0, 0]],
        };
        let b = bibundle_from_spec(z2, h, &spec).unwrap();
        let report = check_principality(&b, Side::Left);
        assert!(!report.free);
        assert!(report.witnesses.iter().any(|w| w.contains("fixes point")));
    }

    #[test]
    fn missing_base_object_is_not_surjective() {
        // One point over object 0 of Unit(2): tau misses object 1, and
        // totality of the action is still satisfied.
        let g = Arc::new(make_builtin(&Builtin::Unit(2)).unwrap());
        let h = Arc::new(make_builtin(&Builtin::Unit(1)).unwrap());
        let spec = BibundleSpec {
            points: 1,
            tau: vec![0],
            sigma: vec![0],
            left_act: vec![[0, 0, 0]],
            right_act: vec![[0, 0, 0]],
        };
        let b = bibundle_from_spec(g, h, &spec).unwrap();
        let report = check_principality(&b, Side::Left);
        assert!(!report.surjective_base);
        assert!(report.free);
    }

    #[test]
    fn group_self_equivalence_passes() {
        let z2 = Arc::new(make_builtin(&Builtin::Group(cyclic_group_table(2))).unwrap());
        let b = self_equivalence_bibundle(&z2).unwrap();
        let report = check_equivalence(&b);
        assert!(report.pass);
        // So does a groupoid that is not a group.
        let p3 = pair(3);
        let b = self_equivalence_bibundle(&p3).unwrap();
        assert!(check_equivalence(&b).pass);
    }

    #[test]
    fn swap_preserves_equivalence_verdict() {
        let b = rectangle_bibundle(2, 3).unwrap();
        let swapped = b.swap().unwrap();
        assert_eq!(check_equivalence(&b).pass, check_equivalence(&swapped).pass);

        let z3 = Arc::new(make_builtin(&Builtin::Group(cyclic_group_table(3))).unwrap());
        let b = self_equivalence_bibundle(&z3).unwrap();
        let swapped = b.swap().unwrap();
        assert_eq!(check_equivalence(&b).pass, check_equivalence(&swapped).pass);
    }

    #[test]
    fn bibundle_spec_round_trip() {
        let b = rectangle_bibundle(2, 3).unwrap();
        let json = serde_json::to_string(&b.to_spec()).unwrap();
        let b2 = validate_bibundle(b.g().clone(), b.h().clone(), &json).unwrap();
        assert_eq!(b.to_spec().left_act, b2.to_spec().left_act);
    }
}
