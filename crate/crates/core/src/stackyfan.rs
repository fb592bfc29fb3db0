//! Stacky fans `(N, Σ, β)` with an ordered divisor set and distinguished marks,
//! plus the two permitted modifications: star subdivision and root stacks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::intlat::{self, Character, FinAbGroup, IntMatrix, LatticeError};

/// A cone, as the sorted list of its ray indices.
pub type Cone = Vec<usize>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("cone {0:?} is not in the fan")]
    ConeNotInFan(Cone),
    #[error("invalid center: {0}")]
    InvalidCenter(String),
    #[error("subset is not closed under faces")]
    NotFaceClosed,
    #[error("ray index {0} out of range")]
    RayIndex(usize),
    #[error("malformed fan: {0}")]
    Malformed(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub type Result<T> = std::result::Result<T, FanError>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ray {
    pub beta: Vec<BigInt>,
    /// Position in the divisor order. Rays sharing a value form one divisor.
    pub order: u64,
    pub in_d: bool,
    pub distinguished: bool,
}

impl Ray {
    pub fn new(beta: &[i64], order: u64, in_d: bool) -> Ray {
        Ray { beta: intlat::to_bigints(beta), order, in_d, distinguished: false }
    }

    pub fn primitive(&self) -> Vec<BigInt> {
        intlat::primitive(&self.beta).0
    }

    pub fn multiplicity(&self) -> BigInt {
        intlat::primitive(&self.beta).1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackyFan {
    rank: usize,
    rays: Vec<Ray>,
    cones: BTreeSet<Cone>,
}

fn subsets(c: &[usize]) -> impl Iterator<Item = Cone> + '_ {
    (1u64..(1u64 << c.len())).map(move |mask| {
        c.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &r)| r).collect()
    })
}

/// Whether `a ⊆ b` for sorted index lists.
pub fn is_subcone(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn union(a: &[usize], b: &[usize]) -> Cone {
    let mut u: Cone = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u.dedup();
    u
}

impl StackyFan {
    /// Builds a fan from its rays and generating cones; all faces are added.
    pub fn new(rank: usize, rays: Vec<Ray>, generating: &[Vec<usize>]) -> Result<StackyFan> {
        for r in &rays {
            if r.beta.len() != rank {
                return Err(FanError::Malformed(format!("ray of length {} in rank {rank}", r.beta.len())));
            }
        }
        let mut cones = BTreeSet::new();
        for c in generating {
            let mut c = c.clone();
            c.sort_unstable();
            c.dedup();
            if let Some(&bad) = c.iter().find(|&&i| i >= rays.len()) {
                return Err(FanError::RayIndex(bad));
            }
            cones.extend(subsets(&c));
        }
        Ok(StackyFan { rank, rays, cones })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &Ray {
        &self.rays[i]
    }

    /// All nonempty cones.
    pub fn cones(&self) -> &BTreeSet<Cone> {
        &self.cones
    }

    pub fn has_cone(&self, c: &[usize]) -> bool {
        self.cones.contains(c)
    }

    pub fn maximal_cones(&self) -> Vec<Cone> {
        self.cones
            .iter()
            .filter(|c| !self.cones.iter().any(|d| d.len() > c.len() && is_subcone(c, d)))
            .cloned()
            .collect()
    }

    /// Rays that lie in at least one cone.
    pub fn used_rays(&self) -> BTreeSet<usize> {
        self.cones.iter().flatten().copied().collect()
    }

    /// One more than the largest order in use.
    pub fn next_order(&self) -> u64 {
        self.rays.iter().map(|r| r.order + 1).max().unwrap_or(0)
    }

    pub fn betas(&self, c: &[usize]) -> Vec<Vec<BigInt>> {
        c.iter().map(|&i| self.rays[i].beta.clone()).collect()
    }

    /// Whether the primitive generators of `c` extend to a basis of the lattice.
    pub fn is_coarse_smooth(&self, c: &[usize]) -> bool {
        let prims: Vec<Vec<BigInt>> = c.iter().map(|&i| self.rays[i].primitive()).collect();
        intlat::extends_to_basis(&prims, self.rank)
    }

    /// Index of the primitive generators of `c` in their saturated span.
    pub fn coarse_index(&self, c: &[usize]) -> BigInt {
        let prims: Vec<Vec<BigInt>> = c.iter().map(|&i| self.rays[i].primitive()).collect();
        saturated_coords(&prims, self.rank).det().abs()
    }

    pub fn with_marks(&self, ray: usize, order: u64, in_d: bool, distinguished: bool) -> StackyFan {
        let mut g = self.clone();
        let r = &mut g.rays[ray];
        r.order = order;
        r.in_d = in_d;
        r.distinguished = distinguished;
        g
    }
}

/// Coordinates of `k` independent vectors in a basis of their saturated span, as a `k × k` matrix.
pub fn saturated_coords(vectors: &[Vec<BigInt>], n: usize) -> IntMatrix {
    let k = vectors.len();
    let b = IntMatrix::from_columns(n, vectors);
    let (_, u, _) = intlat::snf(&b);
    let ub = u.mul(&b);
    let mut c = IntMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            c.set(i, j, ub.get(i, j).clone());
        }
    }
    c
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the fan axioms and mark conventions. In strict mode a divisor whose
/// own character is trivial (multiplicity one) is a violation; otherwise a warning.
pub fn validate(f: &StackyFan, strict: bool) -> ValidationReport {
    let mut rep = ValidationReport::default();
    for (i, r) in f.rays.iter().enumerate() {
        if r.beta.len() != f.rank {
            rep.violations.push(format!("ray {i}: beta has length {}, expected {}", r.beta.len(), f.rank));
            return rep;
        }
        if r.beta.iter().all(|x| x.is_zero()) {
            rep.violations.push(format!("ray {i}: beta is zero"));
        }
        if r.distinguished && !r.in_d {
            rep.violations.push(format!("ray {i}: distinguished but not in D"));
        }
        if r.in_d && r.multiplicity().is_one() {
            let msg = format!("ray {i}: divisor acts trivially (multiplicity 1)");
            if strict {
                rep.violations.push(msg);
            } else {
                rep.warnings.push(msg);
            }
        }
    }
    if !rep.violations.is_empty() {
        return rep;
    }
    for c in &f.cones {
        if let Some(&bad) = c.iter().find(|&&i| i >= f.rays.len()) {
            rep.violations.push(format!("cone {c:?}: ray index {bad} out of range"));
            continue;
        }
        let m = IntMatrix::from_columns(f.rank, &f.betas(c));
        if m.rank() != c.len() {
            rep.violations.push(format!("cone {c:?}: not simplicial"));
        }
        for face in subsets(c) {
            if !f.cones.contains(&face) {
                rep.violations.push(format!("cone {c:?}: face {face:?} missing"));
            }
        }
    }
    if !rep.violations.is_empty() {
        return rep;
    }
    let max = f.maximal_cones();
    for (a, s) in max.iter().enumerate() {
        for t in &max[a + 1..] {
            if !meet_properly(f, s, t) {
                rep.violations.push(format!("cones {s:?} and {t:?} overlap beyond a common face"));
            }
        }
    }
    rep.violations.extend(mark_violations(f));
    rep
}

/// Violations of the mark conventions only: distinguished rays form an upper
/// set of D, and the components of one divisor agree and share no cone.
pub fn mark_violations(f: &StackyFan) -> Vec<String> {
    let mut out = Vec::new();
    let dist_min = f.rays.iter().filter(|r| r.distinguished).map(|r| r.order).min();
    if let Some(lo) = dist_min {
        for (i, r) in f.rays.iter().enumerate() {
            if r.in_d && !r.distinguished && r.order >= lo {
                out.push(format!("ray {i}: undistinguished divisor at order {} is not below the distinguished ones", r.order));
            }
        }
    }
    let mut by_order: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, r) in f.rays.iter().enumerate() {
        if r.in_d {
            by_order.entry(r.order).or_default().push(i);
        }
    }
    for (o, rs) in &by_order {
        for (a, &i) in rs.iter().enumerate() {
            for &j in &rs[a + 1..] {
                if f.rays[i].distinguished != f.rays[j].distinguished {
                    out.push(format!("divisor {o}: components disagree on the distinguished mark"));
                }
                if f.cones.contains(&union(&[i], &[j])) {
                    out.push(format!("divisor {o}: components {i} and {j} share a cone"));
                }
            }
        }
    }
    out
}

/// Whether two simplicial cones intersect in their common face. Enumerates the
/// extreme rays of `{(a, b) ≥ 0 : Σ a_i s_i = Σ b_j t_j}` via minimal supports.
/// Looks for a hyperplane, built from facet normals of full-dimensional `a`,
/// with `a` on one side, `b` strictly on the other except for the common rays,
/// which lie on it. Such a hyperplane forces `a ∩ b` to be the common face.
fn facet_separates(f: &StackyFan, a: &[usize], b: &[usize], common: &[usize]) -> bool {
    if a.len() != f.rank {
        return false;
    }
    let m = IntMatrix::from_columns(f.rank, &f.betas(a));
    let sign = m.det().signum();
    let adj = m.adjugate();
    let rows: Vec<Vec<BigInt>> = (0..a.len()).filter(|&k| !common.contains(&a[k])).map(|k| adj.row(k)).collect();
    let sum: Vec<BigInt> = (0..f.rank).map(|j| rows.iter().map(|r| &r[j]).sum()).collect();
    rows.iter().chain(std::iter::once(&sum)).any(|u| {
        a.iter().chain(b).all(|&i| {
            let d: BigInt = u.iter().zip(&f.rays[i].beta).map(|(x, y)| x * y).sum::<BigInt>() * &sign;
            if common.contains(&i) {
                d.is_zero()
            } else if a.contains(&i) {
                d > BigInt::zero()
            } else {
                d < BigInt::zero()
            }
        })
    })
}

fn meet_properly(f: &StackyFan, s: &[usize], t: &[usize]) -> bool {
    let common: Vec<usize> = s.iter().copied().filter(|x| t.contains(x)).collect();
    if facet_separates(f, s, t, &common) || facet_separates(f, t, s, &common) {
        return true;
    }
    let mut cols: Vec<Vec<BigInt>> = f.betas(s);
    for v in f.betas(t) {
        cols.push(v.into_iter().map(|x| -x).collect());
    }
    let total = cols.len();
    for mask in 1u64..(1u64 << total) {
        let support: Vec<usize> = (0..total).filter(|&i| mask >> i & 1 == 1).collect();
        let m = IntMatrix::from_columns(f.rank, &support.iter().map(|&i| cols[i].clone()).collect::<Vec<_>>());
        let (_, u, rank) = intlat::echelon(&m);
        if support.len() - rank != 1 {
            continue;
        }
        let kv: Vec<BigInt> = (0..support.len()).map(|i| u.get(i, 0).clone()).collect();
        let pos = kv.iter().all(|x| x > &BigInt::zero());
        let neg = kv.iter().all(|x| x < &BigInt::zero());
        if !(pos || neg) {
            continue;
        }
        for &i in &support {
            if i < s.len() && !common.contains(&s[i]) {
                return false;
            }
        }
    }
    true
}

/// The local group `N_σ / β(Z^σ(1))` and the character of each ray of `σ`.
#[derive(Clone, Debug)]
pub struct LocalGroup {
    pub group: Arc<FinAbGroup>,
    pub chars: Vec<(usize, Character)>,
}

impl LocalGroup {
    pub fn char_of(&self, ray: usize) -> Option<&Character> {
        self.chars.iter().find(|(r, _)| *r == ray).map(|(_, c)| c)
    }
}

pub fn local_group(f: &StackyFan, cone: &[usize]) -> Result<LocalGroup> {
    if !f.cones.contains(cone) {
        return Err(FanError::ConeNotInFan(cone.to_vec()));
    }
    let c = saturated_coords(&f.betas(cone), f.rank);
    let group = intlat::cokernel(&c.transpose())?;
    let chars = cone.iter().enumerate().map(|(i, &r)| (r, group.generator(i))).collect();
    Ok(LocalGroup { group, chars })
}

/// The lattice index `[N_σ : β(Z^σ(1))]` as the product of Smith invariants of the β matrix.
pub fn lattice_index(f: &StackyFan, cone: &[usize]) -> BigInt {
    let b = IntMatrix::from_columns(f.rank, &f.betas(cone));
    let (d, _, _) = intlat::snf(&b);
    (0..cone.len()).map(|i| d.get(i, i).clone()).product()
}

/// Star subdivision along `center` at `v = Σ β(ρ)`. The new ray is appended with
/// the next order, in D, not distinguished.
pub fn star_subdivide(f: &StackyFan, center: &[usize]) -> Result<(StackyFan, usize)> {
    let order = f.next_order();
    star_subdivide_with(f, center, order, false)
}

pub(crate) fn star_subdivide_with(f: &StackyFan, center: &[usize], order: u64, distinguished: bool) -> Result<(StackyFan, usize)> {
    let mut tau = center.to_vec();
    tau.sort_unstable();
    if tau.len() < 2 {
        return Err(FanError::InvalidCenter(format!("{tau:?} has dimension below 2")));
    }
    if !f.cones.contains(&tau) {
        return Err(FanError::InvalidCenter(format!("{tau:?} is not a cone of the fan")));
    }
    let mut v = vec![BigInt::zero(); f.rank];
    for &i in &tau {
        for (a, b) in v.iter_mut().zip(&f.rays[i].beta) {
            *a += b;
        }
    }
    Ok(insert_ray(f, &tau, v, order, distinguished))
}

/// Stellar subdivision of `center` at an arbitrary vector `w`, which must lie in
/// the relative interior of the cone. The new ray gets the next order and is not in D.
pub fn subdivide_at(f: &StackyFan, center: &[usize], w: Vec<BigInt>) -> Result<(StackyFan, usize)> {
    let mut tau = center.to_vec();
    tau.sort_unstable();
    if tau.len() < 2 || !f.cones.contains(&tau) {
        return Err(FanError::InvalidCenter(format!("{tau:?}")));
    }
    if w.len() != f.rank {
        return Err(FanError::Malformed("subdivision vector has the wrong length".into()));
    }
    let order = f.next_order();
    let (mut g, new) = insert_ray(f, &tau, w, order, false);
    g.rays[new].in_d = false;
    Ok((g, new))
}

fn insert_ray(f: &StackyFan, tau: &[usize], v: Vec<BigInt>, order: u64, distinguished: bool) -> (StackyFan, usize) {
    let new = f.rays.len();
    let mut rays = f.rays.clone();
    rays.push(Ray { beta: v, order, in_d: true, distinguished });
    let mut cones = BTreeSet::new();
    cones.insert(vec![new]);
    for w in &f.cones {
        if is_subcone(tau, w) {
            continue;
        }
        cones.insert(w.clone());
        if f.cones.contains(&union(w, tau)) {
            let mut x = w.clone();
            x.push(new);
            cones.insert(x);
        }
    }
    (StackyFan { rank: f.rank, rays, cones }, new)
}

/// Multiplies `β(ρ)` by `d`.
pub fn root_stack(f: &StackyFan, ray: usize, d: u64) -> Result<StackyFan> {
    if ray >= f.rays.len() {
        return Err(FanError::RayIndex(ray));
    }
    if d == 0 {
        return Err(FanError::InvalidCenter("root stack order must be positive".into()));
    }
    let mut g = f.clone();
    if d > 1 {
        let k = BigInt::from(d);
        for x in g.rays[ray].beta.iter_mut() {
            *x *= &k;
        }
    }
    Ok(g)
}

/// The subfan on a face-closed set of cones. Rays not used by any kept cone are
/// dropped; the returned map sends new ray indices to old ones.
pub fn restrict_to_subfan(f: &StackyFan, cones: &[Cone]) -> Result<(StackyFan, Vec<usize>)> {
    let set: BTreeSet<Cone> = cones
        .iter()
        .map(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c
        })
        .collect();
    for c in &set {
        if !f.cones.contains(c) {
            return Err(FanError::ConeNotInFan(c.clone()));
        }
        if subsets(c).any(|x| !set.contains(&x)) {
            return Err(FanError::NotFaceClosed);
        }
    }
    let used: Vec<usize> = set.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let idx: BTreeMap<usize, usize> = used.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let rays = used.iter().map(|&o| f.rays[o].clone()).collect();
    let cones = set.iter().map(|c| c.iter().map(|o| idx[o]).collect()).collect();
    Ok((StackyFan { rank: f.rank, rays, cones }, used))
}

/// Canonical text form: rays sorted by (order, beta, marks), cones as sorted
/// lists of the new indices in lexicographic order.
pub fn canonical_form(f: &StackyFan) -> String {
    let mut perm: Vec<usize> = (0..f.rays.len()).collect();
    perm.sort_by(|&a, &b| {
        let (x, y) = (&f.rays[a], &f.rays[b]);
        (x.order, &x.beta, x.in_d, x.distinguished).cmp(&(y.order, &y.beta, y.in_d, y.distinguished))
    });
    let mut inv = vec![0; perm.len()];
    for (n, &o) in perm.iter().enumerate() {
        inv[o] = n;
    }
    let mut s = String::new();
    let _ = writeln!(s, "rank {}", f.rank);
    for &o in &perm {
        let r = &f.rays[o];
        let beta: Vec<String> = r.beta.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "ray [{}] order {} d {} dist {}", beta.join(","), r.order, r.in_d as u8, r.distinguished as u8);
    }
    let mut cones: Vec<Vec<usize>> = f
        .cones
        .iter()
        .map(|c| {
            let mut x: Vec<usize> = c.iter().map(|&o| inv[o]).collect();
            x.sort_unstable();
            x
        })
        .collect();
    cones.sort();
    for c in cones {
        let v: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "cone {}", v.join(","));
    }
    s
}

/// SHA-256 of the canonical form, hex encoded.
pub fn fan_hash(f: &StackyFan) -> String {
    hex::encode(Sha256::digest(canonical_form(f).as_bytes()))
}

/// One modification of a fan, replayable from the fan it was applied to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum StepAction {
    /// Star subdivision; the new ray receives `order` and the given distinguished flag.
    StarSubdivision { center: Vec<usize>, order: u64, distinguished: bool },
    RootStack { ray: usize, d: u64 },
    /// Sets the marks of existing rays, all at once.
    #[serde(rename_all = "camelCase")]
    Mark { rays: Vec<usize>, order: u64, in_d: bool, distinguished: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Step {
    pub phase: String,
    pub action: StepAction,
    pub invariant_before: String,
    pub invariant_after: String,
    pub fan_hash_after: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct StepTrace {
    pub input_hash: String,
    pub steps: Vec<Step>,
}

pub fn apply_action(f: &StackyFan, a: &StepAction) -> Result<StackyFan> {
    match a {
        StepAction::StarSubdivision { center, order, distinguished } => {
            Ok(star_subdivide_with(f, center, *order, *distinguished)?.0)
        }
        StepAction::RootStack { ray, d } => root_stack(f, *ray, *d),
        StepAction::Mark { rays, order, in_d, distinguished } => {
            let mut g = f.clone();
            for &ray in rays {
                if ray >= f.rays.len() {
                    return Err(FanError::RayIndex(ray));
                }
                let r = &mut g.rays[ray];
                r.order = *order;
                r.in_d = *in_d;
                r.distinguished = *distinguished;
            }
            Ok(g)
        }
    }
}

/// Replays a trace, checking every recorded hash. Returns the final fan or the
/// index of the first mismatching step.
pub fn replay(f: &StackyFan, trace: &StepTrace) -> std::result::Result<StackyFan, (usize, String)> {
    if fan_hash(f) != trace.input_hash {
        return Err((0, "input hash mismatch".into()));
    }
    let mut cur = f.clone();
    for (i, s) in trace.steps.iter().enumerate() {
        cur = apply_action(&cur, &s.action).map_err(|e| (i, e.to_string()))?;
        if fan_hash(&cur) != s.fan_hash_after {
            return Err((i, "hash mismatch".into()));
        }
    }
    Ok(cur)
}
