//! Finite groups of monomial matrices over exact cyclotomic integers, with
//! character-level tools for the non-abelian stage: ord^na, Γ̄, fixed
//! subspaces, the local abelianization step, and equivariant polynomial counts.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("budget of {0} exceeded")]
    BudgetExceeded(usize),
    #[error("not a monomial matrix: {0}")]
    NonMonomial(String),
    #[error("group is not abelian")]
    NonAbelian,
    #[error("no symmetric power of V contains W (V not faithful, or the characters of W need different degrees)")]
    NotFaithful,
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, GroupError>;

pub const CLOSURE_BUDGET: usize = 10_000;
pub const SUBGROUP_BUDGET: usize = 256;

fn cyclotomic_cache() -> &'static Mutex<HashMap<u32, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients of the `n`-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Arc<Vec<i64>> {
    if let Some(p) = cyclotomic_cache().lock().expect("cache lock").get(&n) {
        return Arc::clone(p);
    }
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = divide_monic(&num, &cyclotomic_polynomial(d));
        }
    }
    let p = Arc::new(num);
    cyclotomic_cache().lock().expect("cache lock").insert(n, Arc::clone(&p));
    p
}

/// Exact quotient of `a` by the monic polynomial `b`.
fn divide_monic(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let mut q = vec![0i64; r.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db];
        q[k] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[k + j] -= c * bj;
        }
    }
    debug_assert!(r.iter().all(|&x| x == 0), "inexact polynomial division");
    q
}

/// An element of `Z[ζ_m]`, stored as its remainder modulo the `m`-th cyclotomic polynomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloNum {
    m: u32,
    c: Vec<i64>,
}

impl CycloNum {
    fn reduce(m: u32, mut full: Vec<i64>) -> CycloNum {
        let phi = cyclotomic_polynomial(m);
        let deg = phi.len() - 1;
        for k in (deg..full.len()).rev() {
            let c = full[k];
            if c != 0 {
                for (j, &pj) in phi.iter().enumerate() {
                    full[k - deg + j] -= c * pj;
                }
            }
        }
        full.truncate(deg);
        full.resize(deg, 0);
        CycloNum { m, c: full }
    }

    /// `Σ coeffs[k] ζ^k` for `k < m`.
    pub fn from_powers(m: u32, coeffs: &[i64]) -> CycloNum {
        let mut full = vec![0i64; m as usize];
        for (k, &x) in coeffs.iter().enumerate() {
            full[k % m as usize] += x;
        }
        CycloNum::reduce(m, full)
    }

    /// `ζ_m^k`.
    pub fn root(m: u32, k: i64) -> CycloNum {
        let mut full = vec![0i64; m as usize];
        full[k.rem_euclid(m as i64) as usize] = 1;
        CycloNum::reduce(m, full)
    }

    pub fn int(m: u32, n: i64) -> CycloNum {
        CycloNum::from_powers(m, &[n])
    }

    pub fn zero(m: u32) -> CycloNum {
        CycloNum::int(m, 0)
    }

    pub fn conductor(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.c
    }

    fn check(&self, o: &CycloNum) {
        assert_eq!(self.m, o.m, "conductor mismatch");
    }

    pub fn add(&self, o: &CycloNum) -> CycloNum {
        self.check(o);
        CycloNum { m: self.m, c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &CycloNum) -> CycloNum {
        self.check(o);
        CycloNum { m: self.m, c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn neg(&self) -> CycloNum {
        CycloNum { m: self.m, c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, o: &CycloNum) -> CycloNum {
        self.check(o);
        let m = self.m as usize;
        let mut full = vec![0i64; m];
        for (i, &a) in self.c.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.c.iter().enumerate() {
                full[(i + j) % m] += a * b;
            }
        }
        CycloNum::reduce(self.m, full)
    }

    pub fn scale(&self, k: i64) -> CycloNum {
        CycloNum { m: self.m, c: self.c.iter().map(|a| a * k).collect() }
    }

    /// Exact division by an integer, if every coefficient is divisible.
    pub fn div_exact(&self, k: i64) -> Option<CycloNum> {
        if self.c.iter().all(|a| a % k == 0) {
            Some(CycloNum { m: self.m, c: self.c.iter().map(|a| a / k).collect() })
        } else {
            None
        }
    }

    /// Complex conjugate, sending `ζ` to `ζ^{-1}`.
    pub fn conj(&self) -> CycloNum {
        let m = self.m as usize;
        let mut full = vec![0i64; m];
        for (k, &a) in self.c.iter().enumerate() {
            full[(m - k) % m] += a;
        }
        CycloNum::reduce(self.m, full)
    }

    /// The same number with conductor `n`, a multiple of the current one.
    pub fn lift(&self, n: u32) -> CycloNum {
        assert_eq!(n % self.m, 0, "lift to a non-multiple conductor");
        let f = (n / self.m) as usize;
        let mut full = vec![0i64; n as usize];
        for (k, &a) in self.c.iter().enumerate() {
            full[k * f] += a;
        }
        CycloNum::reduce(n, full)
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&a| a == 0)
    }

    /// The rational integer equal to this number, if it is one.
    pub fn to_integer(&self) -> Option<i64> {
        if self.c.iter().skip(1).all(|&a| a == 0) {
            Some(self.c.first().copied().unwrap_or(0))
        } else {
            None
        }
    }

    /// Numerical value as `(re, im)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, &a) in self.c.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * k as f64 / self.m as f64;
            re += a as f64 * t.cos();
            im += a as f64 * t.sin();
        }
        (re, im)
    }
}

/// A monomial matrix: column `j` has the single entry `ζ_m^{exps[j]}` in row `perm[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub perm: Vec<usize>,
    pub exps: Vec<u32>,
}

impl Monomial {
    pub fn identity(n: usize) -> Monomial {
        Monomial { perm: (0..n).collect(), exps: vec![0; n] }
    }

    /// The product `self · other`.
    pub fn compose(&self, other: &Monomial, m: u32) -> Monomial {
        let perm = other.perm.iter().map(|&j| self.perm[j]).collect();
        let exps = other.exps.iter().zip(&other.perm).map(|(&e, &j)| (e + self.exps[j]) % m).collect();
        Monomial { perm, exps }
    }

    pub fn inverse(&self, m: u32) -> Monomial {
        let n = self.perm.len();
        let mut perm = vec![0; n];
        let mut exps = vec![0; n];
        for j in 0..n {
            perm[self.perm[j]] = j;
            exps[self.perm[j]] = (m - self.exps[j] % m) % m;
        }
        Monomial { perm, exps }
    }

    fn validate(&self, n: usize, m: u32) -> Result<()> {
        if self.perm.len() != n || self.exps.len() != n {
            return Err(GroupError::NonMonomial(format!("expected size {n}")));
        }
        let seen: BTreeSet<usize> = self.perm.iter().copied().collect();
        if seen.len() != n || seen.iter().any(|&x| x >= n) {
            return Err(GroupError::NonMonomial(format!("{:?} is not a permutation", self.perm)));
        }
        if self.exps.iter().any(|&e| e >= m) {
            return Err(GroupError::NonMonomial(format!("exponent out of range for conductor {m}")));
        }
        Ok(())
    }
}

/// A finite group of monomial matrices, enumerated at construction.
#[derive(Debug)]
pub struct MonomialGroup {
    degree: usize,
    conductor: u32,
    field: u32,
    generators: Vec<Monomial>,
    elements: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialGroup {
    pub fn new(degree: usize, conductor: u32, generators: Vec<Monomial>) -> Result<Arc<MonomialGroup>> {
        MonomialGroup::with_budget(degree, conductor, generators, CLOSURE_BUDGET)
    }

    pub fn with_budget(degree: usize, conductor: u32, generators: Vec<Monomial>, budget: usize) -> Result<Arc<MonomialGroup>> {
        if conductor == 0 {
            return Err(GroupError::NonMonomial("conductor must be positive".into()));
        }
        for g in &generators {
            g.validate(degree, conductor)?;
        }
        let id = Monomial::identity(degree);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::from([(id, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(i) = queue.pop_front() {
            for g in &generators {
                let x = elements[i].compose(g, conductor);
                if !index.contains_key(&x) {
                    if elements.len() >= budget {
                        return Err(GroupError::BudgetExceeded(budget));
                    }
                    index.insert(x.clone(), elements.len());
                    queue.push_back(elements.len());
                    elements.push(x);
                }
            }
        }
        let mut grp = MonomialGroup { degree, conductor, field: conductor, generators, elements, index };
        let exp = (0..grp.order()).map(|i| grp.element_order(i) as u32).fold(1u32, |a, b| a.lcm(&b));
        grp.field = conductor.lcm(&exp);
        Ok(Arc::new(grp))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    /// Conductor used for all character values: lcm of the matrix conductor and the exponent.
    pub fn field(&self) -> u32 {
        self.field
    }

    pub fn generators(&self) -> &[Monomial] {
        &self.generators
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, i: usize) -> &Monomial {
        &self.elements[i]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.index[&self.elements[a].compose(&self.elements[b], self.conductor)]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.index[&self.elements[a].inverse(self.conductor)]
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let gens: Vec<usize> = self.generators.iter().map(|g| self.index[g]).collect();
        gens.iter().all(|&a| gens.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn whole(self: &Arc<Self>) -> Group {
        Group { parent: Arc::clone(self), members: (0..self.order()).collect() }
    }

    /// Whether coordinates `block` are permuted among themselves by every element.
    pub fn preserves(&self, block: &Block) -> bool {
        self.generators.iter().all(|g| block.range().all(|j| block.range().contains(&g.perm[j])))
    }

    /// Character of the representation on `block`, as a class function on all elements.
    pub fn character(&self, block: &Block) -> Result<ClassFn> {
        if block.start + block.len > self.degree || !self.preserves(block) {
            return Err(GroupError::Precondition(format!("block {block:?} is not a subrepresentation")));
        }
        let f = self.field / self.conductor;
        let values = self
            .elements
            .iter()
            .map(|g| {
                let mut s = CycloNum::zero(self.field);
                for j in block.range() {
                    if g.perm[j] == j {
                        s = s.add(&CycloNum::root(self.field, (g.exps[j] * f) as i64));
                    }
                }
                s
            })
            .collect();
        Ok(ClassFn { values })
    }
}

/// A contiguous block of coordinates carrying a subrepresentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

impl Block {
    pub fn all(degree: usize) -> Block {
        Block { start: 0, len: degree }
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// A function on the elements of a monomial group, indexed by element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassFn {
    pub values: Vec<CycloNum>,
}

impl ClassFn {
    pub fn dim(&self) -> i64 {
        self.values[0].to_integer().expect("character degree is an integer")
    }
}

/// A subgroup of a monomial group, as the sorted indices of its elements.
#[derive(Clone, Debug)]
pub struct Group {
    parent: Arc<MonomialGroup>,
    members: Vec<usize>,
}

impl PartialEq for Group {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.parent, &o.parent) && self.members == o.members
    }
}

impl Eq for Group {}

/// A one-dimensional character, as exponents of `ζ_N` on the members of a group.
pub type Linear = BTreeMap<usize, u32>;

impl Group {
    pub fn parent(&self) -> &Arc<MonomialGroup> {
        &self.parent
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, g: usize) -> bool {
        self.members.binary_search(&g).is_ok()
    }

    pub fn is_abelian(&self) -> bool {
        let p = &self.parent;
        self.members.iter().all(|&a| self.members.iter().all(|&b| p.mul(a, b) == p.mul(b, a)))
    }

    fn closure(&self, gens: &[usize]) -> Group {
        let p = &self.parent;
        let mut set = BTreeSet::from([0usize]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = p.mul(x, g);
                if set.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        Group { parent: Arc::clone(p), members: set.into_iter().collect() }
    }

    /// The subgroup generated by `gens`.
    pub fn generated(&self, gens: &[usize]) -> Group {
        self.closure(gens)
    }

    /// Every subgroup, by closing the cyclic subgroups under joins.
    pub fn subgroups(&self) -> Result<Vec<Group>> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut frontier = Vec::new();
        for &g in &self.members {
            let c = self.closure(&[g]);
            if found.insert(c.members.clone()) {
                frontier.push(c);
            }
        }
        let cyclic = frontier.clone();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for h in &frontier {
                for c in &cyclic {
                    if c.members.iter().all(|x| h.contains(*x)) {
                        continue;
                    }
                    let gens: Vec<usize> = h.members.iter().chain(&c.members).copied().collect();
                    let j = self.closure(&gens);
                    if found.insert(j.members.clone()) {
                        if found.len() > SUBGROUP_BUDGET {
                            return Err(GroupError::BudgetExceeded(SUBGROUP_BUDGET));
                        }
                        next.push(j);
                    }
                }
            }
            frontier = next;
        }
        Ok(found.into_iter().map(|members| Group { parent: Arc::clone(&self.parent), members }).collect())
    }

    /// The commutator subgroup, by closure of all commutators.
    pub fn commutator_subgroup(&self) -> Group {
        let p = &self.parent;
        let mut comms = BTreeSet::new();
        for &a in &self.members {
            for &b in &self.members {
                comms.insert(p.mul(p.mul(a, b), p.mul(p.inv(a), p.inv(b))));
            }
        }
        self.closure(&comms.into_iter().collect::<Vec<_>>())
    }

    fn small_generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut span = self.closure(&[]);
        for &g in &self.members {
            if !span.contains(g) {
                gens.push(g);
                span = self.closure(&gens);
            }
        }
        gens
    }

    /// All one-dimensional characters, with values in `μ_N` for the parent's field conductor.
    pub fn linear_characters(&self) -> Vec<Linear> {
        let p = &self.parent;
        let n = p.field();
        let gens = self.small_generating_set();
        // a spanning tree of words: each member reached from its parent by one generator
        let mut word: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        let mut seen = BTreeSet::from([0usize]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for (gi, &g) in gens.iter().enumerate() {
                let y = p.mul(x, g);
                if seen.insert(y) {
                    word.insert(y, (x, gi));
                    queue.push_back(y);
                }
            }
        }
        let choices: Vec<Vec<u32>> = gens
            .iter()
            .map(|&g| {
                let o = p.element_order(g) as u32;
                (0..o).map(|k| k * (n / o)).collect()
            })
            .collect();
        let mut out = Vec::new();
        let mut idx = vec![0usize; gens.len()];
        loop {
            let vals: Vec<u32> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let mut chi: Linear = BTreeMap::from([(0usize, 0u32)]);
            let mut order: Vec<usize> = word.keys().copied().collect();
            order.sort_by_key(|x| depth(&word, *x));
            for x in order {
                let (par, gi) = word[&x];
                chi.insert(x, (chi[&par] + vals[gi]) % n);
            }
            let hom = self.members.iter().all(|&a| gens.iter().enumerate().all(|(gi, &g)| chi[&p.mul(a, g)] == (chi[&a] + vals[gi]) % n));
            if hom {
                out.push(chi);
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return out;
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// `(1/|H|) Σ_h a(h)·conj(b(h))` for a class function and a linear character.
    pub fn inner_linear(&self, a: &ClassFn, lambda: &Linear) -> i64 {
        let n = self.parent.field();
        let mut s = CycloNum::zero(n);
        for &h in &self.members {
            s = s.add(&a.values[h].mul(&CycloNum::root(n, -(lambda[&h] as i64))));
        }
        let v = s.to_integer().expect("inner product is rational");
        assert_eq!(v % self.order() as i64, 0, "inner product is not integral");
        v / self.order() as i64
    }

    /// `(1/|H|) Σ_h |a(h)|²`.
    pub fn norm(&self, a: &ClassFn) -> i64 {
        let mut s = CycloNum::zero(self.parent.field());
        for &h in &self.members {
            s = s.add(&a.values[h].mul(&a.values[h].conj()));
        }
        s.to_integer().expect("norm is rational") / self.order() as i64
    }

    fn conjugate(&self, g: usize) -> Group {
        let p = &self.parent;
        let gi = p.inv(g);
        let mut members: Vec<usize> = self.members.iter().map(|&h| p.mul(p.mul(g, h), gi)).collect();
        members.sort_unstable();
        Group { parent: Arc::clone(p), members }
    }
}

fn depth(word: &BTreeMap<usize, (usize, usize)>, mut x: usize) -> usize {
    let mut d = 0;
    while let Some(&(p, _)) = word.get(&x) {
        x = p;
        d += 1;
    }
    d
}

/// One-dimensional constituents with multiplicities, and ord^na.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub constituents: Vec<(Linear, i64)>,
    pub ord_na: i64,
}

pub fn decompose_dim_one(h: &Group, chi: &ClassFn) -> Decomposition {
    let mut constituents = Vec::new();
    let mut total = 0;
    for l in h.linear_characters() {
        let m = h.inner_linear(chi, &l);
        if m > 0 {
            total += m;
            constituents.push((l, m));
        }
    }
    Decomposition { constituents, ord_na: chi.dim() - total }
}

/// Intersection of the kernels of the one-dimensional constituents.
pub fn gamma_bar(h: &Group, chi: &ClassFn) -> Group {
    let d = decompose_dim_one(h, chi);
    let members = h.members.iter().copied().filter(|g| d.constituents.iter().all(|(l, _)| l[g] == 0)).collect();
    Group { parent: Arc::clone(&h.parent), members }
}

/// Basis of the `H`-invariant vectors in `block`: one averaged orbit sum per
/// coordinate orbit on which the stabilizer acts trivially. Vectors list
/// `(coordinate, coefficient)` pairs.
pub fn fixed_subspace(h: &Group, block: &Block) -> Vec<Vec<(usize, CycloNum)>> {
    let p = &h.parent;
    let n = p.field();
    let f = n / p.conductor();
    let mut done = BTreeSet::new();
    let mut basis = Vec::new();
    for j in block.range() {
        if done.contains(&j) {
            continue;
        }
        // g·e_j = ζ^{e} e_{π(j)}; record the scalar reaching each coordinate of the orbit
        let mut reach: BTreeMap<usize, u32> = BTreeMap::new();
        let mut trivial = true;
        for &g in &h.members {
            let m = p.element(g);
            let (t, e) = (m.perm[j], m.exps[j] * f % n);
            reach.entry(t).or_insert(e);
            if t == j && e != 0 {
                trivial = false;
            }
        }
        done.extend(reach.keys().copied());
        if trivial {
            basis.push(reach.into_iter().map(|(t, e)| (t, CycloNum::root(n, e as i64))).collect());
        }
    }
    basis
}

/// Number of lines in a stratum of the exceptional divisor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineCount {
    /// Isolated lines, all in one orbit.
    Finite(usize),
    /// A family of lines of the given projective dimension.
    Family(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordSource {
    Declared,
    OracleComputed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Summand {
    pub dim: usize,
    pub label: String,
    /// Exponents of `ζ_N` on the group elements, for one-dimensional summands.
    pub character: Option<Vec<u32>>,
}

/// An isotropy type `(Γ, V)` without trivial summands.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct IsotropyTypeRecord {
    pub group_order: usize,
    pub dim: usize,
    pub summands: Option<Vec<Summand>>,
    pub source: RecordSource,
}

impl IsotropyTypeRecord {
    /// The record of `(H, χ)`: its nontrivial one-dimensional constituents and
    /// the remaining part, whose irreducible summands all have dimension at least 2.
    pub fn from_character(h: &Group, chi: &ClassFn) -> IsotropyTypeRecord {
        let d = decompose_dim_one(h, chi);
        let mut summands = Vec::new();
        for (l, m) in &d.constituents {
            if l.values().all(|&e| e == 0) {
                continue;
            }
            for _ in 0..*m {
                summands.push(Summand { dim: 1, label: "linear".into(), character: Some(l.values().copied().collect()) });
            }
        }
        if d.ord_na > 0 {
            summands.push(Summand { dim: d.ord_na as usize, label: "higher".into(), character: None });
        }
        let dim = summands.iter().map(|s| s.dim).sum();
        IsotropyTypeRecord { group_order: h.order(), dim, summands: Some(summands), source: RecordSource::OracleComputed }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StratumKind {
    /// A point of the exceptional divisor, over a line of the normal space.
    Exceptional,
    /// A nonzero vector off the blow-up center.
    OffCenter,
}

/// One stratum of the blow-up, up to conjugacy.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub kind: StratumKind,
    pub stabilizer: Group,
    /// Character of the stabilizer on the tautological line (exceptional strata).
    pub line_character: Option<Linear>,
    pub lines: LineCount,
    /// Character of the stabilizer on the tangent space at the stratum.
    pub character: ClassFn,
    pub record: IsotropyTypeRecord,
    pub ord_na: i64,
}

#[derive(Clone, Debug)]
pub struct AbelianizeStep {
    pub gamma_bar: Group,
    pub ord_na: i64,
    pub strata: Vec<Stratum>,
}

impl AbelianizeStep {
    pub fn max_ord_na(&self) -> i64 {
        self.strata.iter().map(|s| s.ord_na).max().unwrap_or(0)
    }
}

fn restrict_linear(l: &Linear, k: &Group) -> Linear {
    k.members.iter().map(|&g| (g, l[&g])).collect()
}

/// Canonical representative of the conjugacy class of `(K, λ)` under `H`.
fn class_key(h: &Group, k: &Group, l: Option<&Linear>) -> (Vec<usize>, Vec<u32>) {
    let p = &h.parent;
    let mut best: Option<(Vec<usize>, Vec<u32>)> = None;
    for &g in &h.members {
        let c = k.conjugate(g);
        let gi = p.inv(g);
        let vals: Vec<u32> = match l {
            Some(l) => c.members.iter().map(|&x| l[&p.mul(p.mul(gi, x), g)]).collect(),
            None => Vec::new(),
        };
        let key = (c.members, vals);
        if best.as_ref().is_none_or(|b| key < *b) {
            best = Some(key);
        }
    }
    best.expect("nonempty group")
}

/// The strata of the blow-up of `(H, χ)` along the fixed locus of Γ̄.
pub fn abelianize_local_step(h: &Group, chi: &ClassFn) -> Result<AbelianizeStep> {
    let dec = decompose_dim_one(h, chi);
    if dec.ord_na == 0 {
        return Err(GroupError::Precondition("ord^na is already zero".into()));
    }
    let p = Arc::clone(&h.parent);
    let n = p.field();
    let gb = gamma_bar(h, chi);
    // character of the Γ̄-fixed part, by averaging over Γ̄
    let mut fixed = chi.clone();
    for &g in &h.members {
        let mut s = CycloNum::zero(n);
        for &k in &gb.members {
            s = s.add(&chi.values[p.mul(g, k)]);
        }
        fixed.values[g] = s.div_exact(gb.order() as i64).expect("averaged character is integral");
    }
    let mut moving = chi.clone();
    for &g in &h.members {
        moving.values[g] = chi.values[g].sub(&fixed.values[g]);
    }
    let subgroups = h.subgroups()?;
    let linear: Vec<Vec<Linear>> = subgroups.iter().map(|k| k.linear_characters()).collect();
    let mut strata = Vec::new();
    let mut seen = BTreeSet::new();
    for (a, k) in subgroups.iter().enumerate() {
        for l in &linear[a] {
            let dim_e = k.inner_linear(&moving, l);
            if dim_e == 0 {
                continue;
            }
            let exact = subgroups.iter().enumerate().all(|(b, big)| {
                big.order() == k.order()
                    || !k.members.iter().all(|x| big.contains(*x))
                    || linear[b].iter().all(|mu| restrict_linear(mu, k) != *l || big.inner_linear(&moving, mu) != dim_e)
            });
            if !exact || !seen.insert(("e", class_key(h, k, Some(l)))) {
                continue;
            }
            let mut character = chi.clone();
            for &x in &k.members {
                let lam = CycloNum::root(n, l[&x] as i64);
                let lam_inv = CycloNum::root(n, -(l[&x] as i64));
                character.values[x] = fixed.values[x].add(&moving.values[x].sub(&lam).mul(&lam_inv)).add(&lam);
            }
            let record = IsotropyTypeRecord::from_character(k, &character);
            let ord_na = decompose_dim_one(k, &character).ord_na;
            let lines = if dim_e == 1 { LineCount::Finite(h.order() / k.order()) } else { LineCount::Family(dim_e as usize - 1) };
            strata.push(Stratum {
                kind: StratumKind::Exceptional,
                stabilizer: k.clone(),
                line_character: Some(l.clone()),
                lines,
                character,
                record,
                ord_na,
            });
        }
    }
    // nonzero vectors off the center: exact stabilizers not containing Γ̄
    let trivial = |k: &Group| -> Linear { k.members.iter().map(|&x| (x, 0u32)).collect() };
    for k in &subgroups {
        if gb.members.iter().all(|x| k.contains(*x)) {
            continue;
        }
        let dim_fix = k.inner_linear(chi, &trivial(k));
        if dim_fix == 0 {
            continue;
        }
        let exact = subgroups.iter().all(|big| {
            big.order() == k.order() || !k.members.iter().all(|x| big.contains(*x)) || big.inner_linear(chi, &trivial(big)) < dim_fix
        });
        if !exact || !seen.insert(("o", class_key(h, k, None))) {
            continue;
        }
        let record = IsotropyTypeRecord::from_character(k, chi);
        let ord_na = decompose_dim_one(k, chi).ord_na;
        strata.push(Stratum {
            kind: StratumKind::OffCenter,
            stabilizer: k.clone(),
            line_character: None,
            lines: LineCount::Family(dim_fix as usize),
            character: chi.clone(),
            record,
            ord_na,
        });
    }
    Ok(AbelianizeStep { gamma_bar: gb, ord_na: dec.ord_na, strata })
}

/// Repeated local steps: level `k + 1` applies the step to every stratum of
/// level `k` whose ord^na is still positive.
pub fn abelianize_iterated(h: &Group, chi: &ClassFn, max_levels: usize) -> Result<Vec<Vec<AbelianizeStep>>> {
    let mut levels: Vec<Vec<AbelianizeStep>> = Vec::new();
    let mut pending = if decompose_dim_one(h, chi).ord_na > 0 { vec![(h.clone(), chi.clone())] } else { Vec::new() };
    while !pending.is_empty() {
        if levels.len() == max_levels {
            return Err(GroupError::BudgetExceeded(max_levels));
        }
        let mut level = Vec::new();
        for (k, c) in &pending {
            level.push(abelianize_local_step(k, c)?);
        }
        pending = level
            .iter()
            .flat_map(|st| st.strata.iter().filter(|s| s.ord_na > 0).map(|s| (s.stabilizer.clone(), s.character.clone())))
            .collect();
        levels.push(level);
    }
    Ok(levels)
}

/// Characters of `Sym^e(V*)` for `e ≤ d`, by Newton's identities.
fn sym_dual_characters(h: &Group, v: &ClassFn, d: usize) -> Vec<ClassFn> {
    let p = &h.parent;
    let n = p.field();
    let len = v.values.len();
    let mut out = vec![ClassFn { values: vec![CycloNum::int(n, 1); len] }];
    // power sums p_i(g) = conj χ_V(g^i)
    let mut powers: Vec<Vec<CycloNum>> = Vec::new();
    let mut gpow: Vec<usize> = (0..len).collect();
    for _ in 1..=d {
        powers.push((0..len).map(|g| if h.contains(g) { v.values[gpow[g]].conj() } else { CycloNum::zero(n) }).collect());
        gpow = (0..len).map(|g| p.mul(gpow[g], g)).collect();
    }
    for e in 1..=d {
        let mut vals = Vec::with_capacity(len);
        for g in 0..len {
            let mut s = CycloNum::zero(n);
            for i in 1..=e {
                s = s.add(&powers[i - 1][g].mul(&out[e - i].values[g]));
            }
            vals.push(s.div_exact(e as i64).expect("Newton recursion is integral"));
        }
        out.push(ClassFn { values: vals });
    }
    out
}

fn require_abelian(g: &Arc<MonomialGroup>) -> Result<()> {
    if g.is_abelian() {
        Ok(())
    } else {
        Err(GroupError::NonAbelian)
    }
}

/// `dim Poly_d^G(V, W)`: equivariant polynomial maps `V → W` of degree at most `d`.
pub fn poly_dim(g: &Arc<MonomialGroup>, v: &Block, w: &Block, d: usize) -> Result<i64> {
    Ok(poly_dim_by_degree(g, v, w, d)?.iter().sum())
}

/// Dimensions of the homogeneous pieces of degree `0..=d` of `Poly^G(V, W)`.
pub fn poly_dim_by_degree(g: &Arc<MonomialGroup>, v: &Block, w: &Block, d: usize) -> Result<Vec<i64>> {
    require_abelian(g)?;
    let h = g.whole();
    let cv = g.character(v)?;
    let cw = g.character(w)?;
    let n = g.field();
    let mut out = Vec::with_capacity(d + 1);
    for s in sym_dual_characters(&h, &cv, d) {
        let mut acc = CycloNum::zero(n);
        for &x in h.members() {
            acc = acc.add(&s.values[x].mul(&cw.values[x]));
        }
        let v = acc.to_integer().expect("invariant count is rational");
        assert_eq!(v % h.order() as i64, 0, "averaging is not exact");
        out.push(v / h.order() as i64);
    }
    Ok(out)
}

/// Whether only the identity acts trivially on `block`.
pub fn is_faithful(g: &Arc<MonomialGroup>, block: &Block) -> bool {
    (1..g.order()).all(|i| {
        let m = g.element(i);
        block.range().any(|j| m.perm[j] != j || m.exps[j] != 0)
    })
}

/// The least `d ≥ 1` such that every character of `W` occurs in `Sym^d(V)`
/// with at least its multiplicity in `W`.
pub fn fo_degree(g: &Arc<MonomialGroup>, v: &Block, w: &Block) -> Result<usize> {
    require_abelian(g)?;
    if !is_faithful(g, v) {
        return Err(GroupError::NotFaithful);
    }
    let h = g.whole();
    let cv = g.character(v)?;
    let cw = g.character(w)?;
    // Sym^e(V) is the dual of Sym^e(V*), so use V* as input
    let mut dual = cv.clone();
    for x in dual.values.iter_mut() {
        *x = x.conj();
    }
    let bound = g.order() * w.len.max(1);
    let syms = sym_dual_characters(&h, &dual, bound);
    let chars = h.linear_characters();
    let needed: Vec<(Linear, i64)> = chars.iter().map(|l| (l.clone(), h.inner_linear(&cw, l))).filter(|(_, m)| *m > 0).collect();
    for (e, s) in syms.iter().enumerate().skip(1) {
        if needed.iter().all(|(l, m)| h.inner_linear(s, l) >= *m) {
            return Ok(e);
        }
    }
    Err(GroupError::NotFaithful)
}

/// Bundled monomial representations.
pub mod examples {
    use super::*;

    fn mono(perm: &[usize], exps: &[u32]) -> Monomial {
        Monomial { perm: perm.to_vec(), exps: exps.to_vec() }
    }

    /// `S_3` on its standard 2-dimensional irreducible.
    pub fn s3_standard() -> Arc<MonomialGroup> {
        MonomialGroup::new(2, 3, vec![mono(&[0, 1], &[1, 2]), mono(&[1, 0], &[0, 0])]).expect("S3")
    }

    /// `S_3` on sign ⊕ standard.
    pub fn s3_sign_standard() -> Arc<MonomialGroup> {
        MonomialGroup::new(3, 6, vec![mono(&[0, 1, 2], &[0, 2, 4]), mono(&[0, 2, 1], &[3, 0, 0])]).expect("S3")
    }

    /// The dihedral group of order 8 on the plane, as signed permutations.
    pub fn d4() -> Arc<MonomialGroup> {
        MonomialGroup::new(2, 2, vec![mono(&[1, 0], &[0, 1]), mono(&[0, 1], &[0, 1])]).expect("D4")
    }

    /// The quaternion group on its 2-dimensional irreducible.
    pub fn q8() -> Arc<MonomialGroup> {
        MonomialGroup::new(2, 4, vec![mono(&[0, 1], &[1, 3]), mono(&[1, 0], &[0, 2])]).expect("Q8")
    }

    /// `A_4` on its 3-dimensional irreducible.
    pub fn a4() -> Arc<MonomialGroup> {
        MonomialGroup::new(3, 2, vec![mono(&[0, 1, 2], &[1, 1, 0]), mono(&[1, 2, 0], &[0, 0, 0])]).expect("A4")
    }

    /// The cyclic group `μ_r` acting on `C` by `ζ^a` on each block coordinate.
    pub fn cyclic_diagonal(r: u32, weights: &[u32]) -> Arc<MonomialGroup> {
        let n = weights.len();
        MonomialGroup::new(n, r, vec![mono(&(0..n).collect::<Vec<_>>(), &weights.iter().map(|w| w % r).collect::<Vec<_>>())])
            .expect("cyclic")
    }

    pub fn non_abelian() -> Vec<(&'static str, Arc<MonomialGroup>)> {
        vec![("S3 standard", s3_standard()), ("S3 sign+standard", s3_sign_standard()), ("D4", d4()), ("Q8", q8()), ("A4", a4())]
    }
}
