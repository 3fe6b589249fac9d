//! Finite groupoids: explicit arrow sets with source/target/composition/
//! inversion tables, validated exhaustively.
//!
//! Conventions fixed here and relied on by every downstream module:
//! objects and arrows are dense integer ids; `compose(x, y)` means
//! "x after y" and is defined exactly when `src(x) == tgt(y)`, with
//! `tgt(x∘y) == tgt(x)` and `src(x∘y) == src(y)`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// A validated finite groupoid. Immutable after construction; safe to
/// share read-only across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroupoid {
    n_objects: usize,
    src: Vec<u32>,
    tgt: Vec<u32>,
    inv: Vec<u32>,
    /// Unit arrow per object.
    unit_arrow: Vec<u32>,
    /// Dense composition table, `NONE` where undefined.
    compose: Vec<u32>,
    /// Arrows grouped by target object.
    t_fibers: Vec<Vec<u32>>,
    /// Arrows grouped by source object.
    s_fibers: Vec<Vec<u32>>,
}

/// On-disk groupoid description. All five structure maps must be given
/// explicitly; omitted compose/inverse entries are axiom errors, not
/// defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupoidSpec {
    pub objects: usize,
    pub arrows: Vec<ArrowSpec>,
    pub compose: Vec<[usize; 3]>,
    pub inverse: Vec<[usize; 2]>,
    pub units: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrowSpec {
    pub id: usize,
    pub src: usize,
    pub tgt: usize,
}

/// Orbit partition of the object set together with one isotropy group
/// per orbit (arrows with source = target = the orbit's basepoint).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitDecomposition {
    pub orbits: Vec<Vec<usize>>,
    pub basepoints: Vec<usize>,
    pub isotropy: Vec<Vec<usize>>,
}

impl FiniteGroupoid {
    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn n_arrows(&self) -> usize {
        self.src.len()
    }

    pub fn src(&self, x: usize) -> usize {
        self.src[x] as usize
    }

    pub fn tgt(&self, x: usize) -> usize {
        self.tgt[x] as usize
    }

    pub fn inverse(&self, x: usize) -> usize {
        self.inv[x] as usize
    }

    pub fn unit(&self, q: usize) -> usize {
        self.unit_arrow[q] as usize
    }

    pub fn is_unit(&self, x: usize) -> bool {
        self.unit_arrow[self.tgt[x] as usize] as usize == x
    }

    /// Composition `x∘y`, defined when `src(x) == tgt(y)`.
    pub fn compose(&self, x: usize, y: usize) -> Option<usize> {
        let v = self.compose[x * self.n_arrows() + y];
        if v == NONE {
            None
        } else {
            Some(v as usize)
        }
    }

    /// Composition that must be defined; panics on a non-composable pair.
    pub fn compose_defined(&self, x: usize, y: usize) -> usize {
        self.compose(x, y)
            .unwrap_or_else(|| panic!("arrows {x} and {y} are not composable"))
    }

    pub fn t_fiber(&self, q: usize) -> &[u32] {
        &self.t_fibers[q]
    }

    pub fn s_fiber(&self, q: usize) -> &[u32] {
        &self.s_fibers[q]
    }

    pub fn arrows(&self) -> std::ops::Range<usize> {
        0..self.n_arrows()
    }

    pub fn objects(&self) -> std::ops::Range<usize> {
        0..self.n_objects
    }

    /// Serialize back to the on-disk spec format.
    pub fn to_spec(&self) -> GroupoidSpec {
        let arrows = self
            .arrows()
            .map(|x| ArrowSpec {
                id: x,
                src: self.src(x),
                tgt: self.tgt(x),
            })
            .collect();
        let mut compose = Vec::new();
        for x in self.arrows() {
            for y in self.arrows() {
                if let Some(xy) = self.compose(x, y) {
                    compose.push([x, y, xy]);
                }
            }
        }
        let inverse = self.arrows().map(|x| [x, self.inverse(x)]).collect();
        let units = self.objects().map(|q| [q, self.unit(q)]).collect();
        GroupoidSpec {
            objects: self.n_objects,
            arrows,
            compose,
            inverse,
            units,
        }
    }
}

/// Parse and validate a groupoid spec from JSON text. Structural
/// problems (bad ids, duplicates) are parse errors; violations of the
/// groupoid laws are axiom errors carrying witnesses.
pub fn validate_groupoid(raw: &str) -> Result<FiniteGroupoid> {
    let spec: GroupoidSpec =
        serde_json::from_str(raw).map_err(|e| Error::Parse(format!("groupoid spec: {e}")))?;
    groupoid_from_spec(&spec)
}

/// Validate an already-parsed spec.
pub fn groupoid_from_spec(spec: &GroupoidSpec) -> Result<FiniteGroupoid> {
    let n_obj = spec.objects;
    let n_arr = spec.arrows.len();
    if n_obj == 0 {
        return Err(Error::Parse("object set is empty".into()));
    }

    let mut src = vec![NONE; n_arr];
    let mut tgt = vec![NONE; n_arr];
    let mut seen = HashSet::new();
    for a in &spec.arrows {
        if a.id >= n_arr {
            return Err(Error::Parse(format!(
                "arrow id {} out of range (ids must be dense 0..{})",
                a.id, n_arr
            )));
        }
        if !seen.insert(a.id) {
            return Err(Error::Parse(format!("duplicate arrow id {}", a.id)));
        }
        if a.src >= n_obj || a.tgt >= n_obj {
            return Err(Error::Parse(format!(
                "arrow {} references object out of range",
                a.id
            )));
        }
        src[a.id] = a.src as u32;
        tgt[a.id] = a.tgt as u32;
    }

    let mut compose = vec![NONE; n_arr * n_arr];
    for &[x, y, xy] in &spec.compose {
        if x >= n_arr || y >= n_arr || xy >= n_arr {
            return Err(Error::Parse(format!(
                "compose entry [{x}, {y}, {xy}] references arrow out of range"
            )));
        }
        let slot = &mut compose[x * n_arr + y];
        if *slot != NONE {
            return Err(Error::Parse(format!("duplicate compose entry for ({x}, {y})")));
        }
        *slot = xy as u32;
    }

    let mut inv = vec![NONE; n_arr];
    for &[x, xi] in &spec.inverse {
        if x >= n_arr || xi >= n_arr {
            return Err(Error::Parse(format!(
                "inverse entry [{x}, {xi}] references arrow out of range"
            )));
        }
        if inv[x] != NONE {
            return Err(Error::Parse(format!("duplicate inverse entry for {x}")));
        }
        inv[x] = xi as u32;
    }

    let mut unit_arrow = vec![NONE; n_obj];
    for &[q, u] in &spec.units {
        if q >= n_obj || u >= n_arr {
            return Err(Error::Parse(format!(
                "unit entry [{q}, {u}] out of range"
            )));
        }
        if unit_arrow[q] != NONE {
            return Err(Error::Parse(format!("duplicate unit entry for object {q}")));
        }
        unit_arrow[q] = u as u32;
    }

    // All five maps must be total.
    for q in 0..n_obj {
        if unit_arrow[q] == NONE {
            return Err(Error::axiom("unit totality", format!("object {q} has no unit arrow")));
        }
    }
    for x in 0..n_arr {
        if inv[x] == NONE {
            return Err(Error::axiom("inverse totality", format!("arrow {x} has no inverse entry")));
        }
    }

    let g = assemble(n_obj, src, tgt, inv, unit_arrow, compose)?;
    check_axioms(&g)?;
    Ok(g)
}

fn assemble(
    n_objects: usize,
    src: Vec<u32>,
    tgt: Vec<u32>,
    inv: Vec<u32>,
    unit_arrow: Vec<u32>,
    compose: Vec<u32>,
) -> Result<FiniteGroupoid> {
    let n_arr = src.len();
    let mut t_fibers = vec![Vec::new(); n_objects];
    let mut s_fibers = vec![Vec::new(); n_objects];
    for x in 0..n_arr {
        t_fibers[tgt[x] as usize].push(x as u32);
        s_fibers[src[x] as usize].push(x as u32);
    }
    Ok(FiniteGroupoid {
        n_objects,
        src,
        tgt,
        inv,
        unit_arrow,
        compose,
        t_fibers,
        s_fibers,
    })
}

/// Exhaustive check of every groupoid law. Finite scale makes
/// completeness free, so nothing is sampled.
fn check_axioms(g: &FiniteGroupoid) -> Result<()> {
    let n = g.n_arrows();

    // Units must be loops at their object.
    for q in g.objects() {
        let u = g.unit(q);
        if g.src(u) != q || g.tgt(u) != q {
            return Err(Error::axiom(
                "unit endpoints",
                format!("unit({q}) = {u} has src {} tgt {}", g.src(u), g.tgt(u)),
            ));
        }
    }

    // Composability: defined exactly on matching pairs, with the right
    // endpoints.
    for x in 0..n {
        for y in 0..n {
            let matching = g.src(x) == g.tgt(y);
            match g.compose(x, y) {
                Some(xy) => {
                    if !matching {
                        return Err(Error::axiom(
                            "composability",
                            format!(
                                "compose({x}, {y}) declared but src({x}) = {} != tgt({y}) = {}",
                                g.src(x),
                                g.tgt(y)
                            ),
                        ));
                    }
                    if g.tgt(xy) != g.tgt(x) || g.src(xy) != g.src(y) {
                        return Err(Error::axiom(
                            "composition endpoints",
                            format!("compose({x}, {y}) = {xy} has wrong src/tgt"),
                        ));
                    }
                }
                None => {
                    if matching {
                        return Err(Error::axiom(
                            "composability",
                            format!("compose({x}, {y}) omitted although src({x}) == tgt({y})"),
                        ));
                    }
                }
            }
        }
    }

    // Units are two-sided identities.
    for x in 0..n {
        let ut = g.unit(g.tgt(x));
        let us = g.unit(g.src(x));
        if g.compose(ut, x) != Some(x) {
            return Err(Error::axiom(
                "left unit law",
                format!("unit({}) ∘ {x} != {x}", g.tgt(x)),
            ));
        }
        if g.compose(x, us) != Some(x) {
            return Err(Error::axiom(
                "right unit law",
                format!("{x} ∘ unit({}) != {x}", g.src(x)),
            ));
        }
    }

    // Inverses compose to units on both sides.
    for x in 0..n {
        let xi = g.inverse(x);
        if g.src(xi) != g.tgt(x) || g.tgt(xi) != g.src(x) {
            return Err(Error::axiom(
                "inverse endpoints",
                format!("inverse({x}) = {xi} has wrong src/tgt"),
            ));
        }
        if g.compose(xi, x) != Some(g.unit(g.src(x))) {
            return Err(Error::axiom(
                "left inverse law",
                format!("inverse({x}) ∘ {x} != unit({})", g.src(x)),
            ));
        }
        if g.compose(x, xi) != Some(g.unit(g.tgt(x))) {
            return Err(Error::axiom(
                "right inverse law",
                format!("{x} ∘ inverse({x}) != unit({})", g.tgt(x)),
            ));
        }
    }

    // Associativity on every composable triple.
    for x in 0..n {
        for y in 0..n {
            if g.src(x) != g.tgt(y) {
                continue;
            }
            let xy = g.compose_defined(x, y);
            for z in 0..n {
                if g.src(y) != g.tgt(z) {
                    continue;
                }
                let yz = g.compose_defined(y, z);
                if g.compose(xy, z) != g.compose(x, yz) {
                    return Err(Error::axiom(
                        "associativity",
                        format!("({x} ∘ {y}) ∘ {z} != {x} ∘ ({y} ∘ {z})"),
                    ));
                }
            }
        }
    }

    Ok(())
}

/// The built-in groupoid families used throughout the test corpus.
#[derive(Debug, Clone)]
pub enum Builtin {
    /// Unit groupoid on `n` objects: only identity arrows.
    Unit(usize),
    /// Pair groupoid on `n` objects: one arrow `j -> i` per ordered pair.
    Pair(usize),
    /// A finite group presented by its multiplication table, as a
    /// one-object groupoid.
    Group(Vec<Vec<usize>>),
    /// Action groupoid of a group (by table) acting on a finite set
    /// (`action[g][s]` is the image of point `s` under `g`).
    Action {
        group: Vec<Vec<usize>>,
        action: Vec<Vec<usize>>,
    },
}

/// Construct a named groupoid. The output always passes
/// `validate_groupoid`'s axiom battery.
pub fn make_builtin(kind: &Builtin) -> Result<FiniteGroupoid> {
    let g = match kind {
        Builtin::Unit(n) => {
            if *n == 0 {
                return Err(Error::InvalidParameter("unit groupoid needs n >= 1".into()));
            }
            let n = *n;
            let src: Vec<u32> = (0..n as u32).collect();
            let mut compose = vec![NONE; n * n];
            for q in 0..n {
                compose[q * n + q] = q as u32;
            }
            assemble(n, src.clone(), src.clone(), src.clone(), src, compose)?
        }
        Builtin::Pair(n) => {
            if *n == 0 {
                return Err(Error::InvalidParameter("pair groupoid needs n >= 1".into()));
            }
            let n = *n;
            // Arrow (i <- j) has id i*n + j, src j, tgt i.
            let n_arr = n * n;
            let mut src = vec![0u32; n_arr];
            let mut tgt = vec![0u32; n_arr];
            let mut inv = vec![0u32; n_arr];
            let mut units = vec![0u32; n];
            for i in 0..n {
                for j in 0..n {
                    let id = i * n + j;
                    src[id] = j as u32;
                    tgt[id] = i as u32;
                    inv[id] = (j * n + i) as u32;
                }
                units[i] = (i * n + i) as u32;
            }
            let mut compose = vec![NONE; n_arr * n_arr];
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        // (i <- j) ∘ (j <- k) = (i <- k)
                        compose[(i * n + j) * n_arr + (j * n + k)] = (i * n + k) as u32;
                    }
                }
            }
            assemble(n, src, tgt, inv, units, compose)?
        }
        Builtin::Group(table) => {
            let (inv, e) = group_data(table)?;
            let k = table.len();
            let mut compose = vec![NONE; k * k];
            for x in 0..k {
                for y in 0..k {
                    compose[x * k + y] = table[x][y] as u32;
                }
            }
            assemble(1, vec![0; k], vec![0; k], inv, vec![e as u32], compose)?
        }
        Builtin::Action { group, action } => {
            let (ginv, e) = group_data(group)?;
            let k = group.len();
            if action.len() != k {
                return Err(Error::InvalidParameter(
                    "action table must have one row per group element".into(),
                ));
            }
            let n_pts = action[0].len();
            if n_pts == 0 || action.iter().any(|row| row.len() != n_pts) {
                return Err(Error::InvalidParameter("ragged or empty action table".into()));
            }
            for row in action {
                if row.iter().any(|&p| p >= n_pts) {
                    return Err(Error::InvalidParameter("action image out of range".into()));
                }
            }
            // Action law: e acts as identity, g(h s) = (gh) s.
            for s in 0..n_pts {
                if action[e][s] != s {
                    return Err(Error::InvalidParameter(
                        "identity element does not act trivially".into(),
                    ));
                }
            }
            for g in 0..k {
                for h in 0..k {
                    for s in 0..n_pts {
                        if action[g][action[h][s]] != action[group[g][h]][s] {
                            return Err(Error::InvalidParameter(
                                "action table is not a group action".into(),
                            ));
                        }
                    }
                }
            }
            // Arrow (g, s) has id g*n_pts + s, src s, tgt g·s.
            let n_arr = k * n_pts;
            let mut src = vec![0u32; n_arr];
            let mut tgt = vec![0u32; n_arr];
            let mut inv = vec![0u32; n_arr];
            let mut units = vec![0u32; n_pts];
            for g in 0..k {
                for s in 0..n_pts {
                    let id = g * n_pts + s;
                    src[id] = s as u32;
                    tgt[id] = action[g][s] as u32;
                    inv[id] = (ginv[g] as usize * n_pts + action[g][s]) as u32;
                }
            }
            for s in 0..n_pts {
                units[s] = (e * n_pts + s) as u32;
            }
            let mut compose = vec![NONE; n_arr * n_arr];
            for g in 0..k {
                for h in 0..k {
                    for s in 0..n_pts {
                        // (g, h·s) ∘ (h, s) = (gh, s)
                        let x = g * n_pts + action[h][s];
                        let y = h * n_pts + s;
                        compose[x * n_arr + y] = (group[g][h] * n_pts + s) as u32;
                    }
                }
            }
            assemble(n_pts, src, tgt, inv, units, compose)?
        }
    };
    check_axioms(&g)?;
    Ok(g)
}

/// Check a multiplication table is a finite group; returns the inverse
/// table and identity index.
fn group_data(table: &[Vec<usize>]) -> Result<(Vec<u32>, usize)> {
    let k = table.len();
    if k == 0 {
        return Err(Error::InvalidParameter("empty group table".into()));
    }
    if table.iter().any(|row| row.len() != k || row.iter().any(|&v| v >= k)) {
        return Err(Error::InvalidParameter("group table is not square over 0..k".into()));
    }
    let e = (0..k)
        .find(|&e| (0..k).all(|g| table[e][g] == g && table[g][e] == g))
        .ok_or_else(|| Error::InvalidParameter("group table has no identity".into()))?;
    let mut inv = vec![NONE; k];
    for g in 0..k {
        let gi = (0..k)
            .find(|&h| table[g][h] == e && table[h][g] == e)
            .ok_or_else(|| Error::InvalidParameter(format!("element {g} has no inverse")))?;
        inv[g] = gi as u32;
    }
    for a in 0..k {
        for b in 0..k {
            for c in 0..k {
                if table[table[a][b]][c] != table[a][table[b][c]] {
                    return Err(Error::InvalidParameter("group table is not associative".into()));
                }
            }
        }
    }
    Ok((inv, e))
}

/// Multiplication table of the cyclic group Z_n.
pub fn cyclic_group_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect()
}

/// Partition the objects into orbits and compute the isotropy group at
/// the least object of each orbit.
pub fn orbit_decomposition(g: &FiniteGroupoid) -> OrbitDecomposition {
    let n = g.n_objects();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut q: usize) -> usize {
        while parent[q] != q {
            parent[q] = parent[parent[q]];
            q = parent[q];
        }
        q
    }
    for x in g.arrows() {
        let a = find(&mut parent, g.src(x));
        let b = find(&mut parent, g.tgt(x));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut orbit_of_root: Vec<Option<usize>> = vec![None; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for q in 0..n {
        let r = find(&mut parent, q);
        match orbit_of_root[r] {
            Some(idx) => orbits[idx].push(q),
            None => {
                orbit_of_root[r] = Some(orbits.len());
                orbits.push(vec![q]);
            }
        }
    }
    let basepoints: Vec<usize> = orbits.iter().map(|o| o[0]).collect();
    let isotropy = basepoints
        .iter()
        .map(|&b| {
            g.arrows()
                .filter(|&x| g.src(x) == b && g.tgt(x) == b)
                .collect()
        })
        .collect();
    OrbitDecomposition {
        orbits,
        basepoints,
        isotropy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_groupoid_spec_round_trip() {
        let g = make_builtin(&Builtin::Unit(2)).unwrap();
        assert_eq!(g.n_objects(), 2);
        assert_eq!(g.n_arrows(), 2);
        let json = serde_json::to_string(&g.to_spec()).unwrap();
        let g2 = validate_groupoid(&json).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn pair3_composition_law() {
        let n = 3;
        let g = make_builtin(&Builtin::Pair(n)).unwrap();
        assert_eq!(g.n_arrows(), 9);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    // (i <- j) ∘ (j <- k) = (i <- k)
                    assert_eq!(g.compose(i * n + j, j * n + k), Some(i * n + k));
                }
            }
        }
    }

    #[test]
    fn pair_arrow_count_is_n_squared() {
        for n in 1..=5 {
            let g = make_builtin(&Builtin::Pair(n)).unwrap();
            assert_eq!(g.n_arrows(), n * n);
        }
    }

    #[test]
    fn declared_composition_of_mismatched_pair_is_axiom_error() {
        let g = make_builtin(&Builtin::Unit(2)).unwrap();
        let mut spec = g.to_spec();
        // unit(0) ∘ unit(1) is not composable.
        spec.compose.push([0, 1, 0]);
        let err = groupoid_from_spec(&spec).unwrap_err();
        match err {
            Error::Axiom { axiom, .. } => assert_eq!(axiom, "composability"),
            other => panic!("expected axiom error, got {other:?}"),
        }
    }

    #[test]
    fn missing_composition_entry_is_axiom_error() {
        let g = make_builtin(&Builtin::Pair(2)).unwrap();
        let mut spec = g.to_spec();
        spec.compose.pop();
        let err = groupoid_from_spec(&spec).unwrap_err();
        match err {
            Error::Axiom { axiom, .. } => assert_eq!(axiom, "composability"),
            other => panic!("expected axiom error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(validate_groupoid("{ not json"), Err(Error::Parse(_))));
        assert!(matches!(validate_groupoid("{\"objects\": 1}"), Err(Error::Parse(_))));
    }

    #[test]
    fn group_z3_is_one_object_groupoid() {
        let g = make_builtin(&Builtin::Group(cyclic_group_table(3))).unwrap();
        assert_eq!(g.n_objects(), 1);
        assert_eq!(g.n_arrows(), 3);
        // 1 + 2 = 0 mod 3
        assert_eq!(g.compose(1, 2), Some(0));
    }

    #[test]
    fn non_group_table_is_invalid_parameter() {
        // Left-zero semigroup: no identity.
        let table = vec![vec![0, 0], vec![1, 1]];
        assert!(matches!(
            make_builtin(&Builtin::Group(table)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn zero_size_is_invalid_parameter() {
        assert!(matches!(make_builtin(&Builtin::Pair(0)), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_builtin(&Builtin::Unit(0)), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn swap_action_groupoid() {
        let z2 = cyclic_group_table(2);
        let swap = vec![vec![0, 1], vec![1, 0]];
        let g = make_builtin(&Builtin::Action {
            group: z2,
            action: swap,
        })
        .unwrap();
        assert_eq!(g.n_objects(), 2);
        assert_eq!(g.n_arrows(), 4);
        let dec = orbit_decomposition(&g);
        assert_eq!(dec.orbits.len(), 1);
        assert_eq!(dec.isotropy[0].len(), 1);
    }

    #[test]
    fn orbit_structure_of_builtins() {
        let pair = make_builtin(&Builtin::Pair(4)).unwrap();
        let dec = orbit_decomposition(&pair);
        assert_eq!(dec.orbits.len(), 1);
        assert_eq!(dec.isotropy[0].len(), 1); // only the unit loop

        let unit = make_builtin(&Builtin::Unit(4)).unwrap();
        let dec = orbit_decomposition(&unit);
        assert_eq!(dec.orbits.len(), 4);
        assert!(dec.isotropy.iter().all(|iso| iso.len() == 1));
    }

    #[test]
    fn inverse_is_involutive_on_builtins() {
        let corpus = [
            make_builtin(&Builtin::Pair(3)).unwrap(),
            make_builtin(&Builtin::Unit(3)).unwrap(),
            make_builtin(&Builtin::Group(cyclic_group_table(4))).unwrap(),
        ];
        for g in &corpus {
            for x in g.arrows() {
                assert_eq!(g.inverse(g.inverse(x)), x);
            }
        }
    }
}
