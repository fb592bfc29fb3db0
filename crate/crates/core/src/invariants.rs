//! Local invariants at the cones of a stacky fan. Each cone stands for the
//! generic point of its orbit stratum.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::grouprep::IsotropyTypeRecord;
use crate::intlat::{self, Character, FinAbGroup, IntMatrix, LatticeError, Subgroup};
use crate::stackyfan::{local_group, Cone, FanError, LocalGroup, StackyFan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvariantError {
    #[error("cone is not divisorial")]
    NotDivisorial,
    #[error("isotropy record has no irreducible decomposition")]
    MissingDecomposition,
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub type Result<T> = std::result::Result<T, InvariantError>;

/// The pair `(A, v)`: the subgroup generated by the dependent divisor
/// characters and the tuple of those characters, keyed by divisor order.
#[derive(Clone, Debug)]
pub struct DivisorialType {
    group: Arc<FinAbGroup>,
    entries: Vec<(u64, Character)>,
    subgroup: Subgroup,
    hnf: IntMatrix,
}

impl DivisorialType {
    /// Builds the type from `(divisor order, character)` pairs; zero characters are dropped.
    pub fn new(group: &Arc<FinAbGroup>, entries: Vec<(u64, Character)>) -> Result<DivisorialType> {
        let mut entries: Vec<(u64, Character)> = entries.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        entries.sort_by_key(|e| std::cmp::Reverse(e.0));
        let chars: Vec<Character> = entries.iter().map(|(_, c)| c.clone()).collect();
        let subgroup = intlat::subgroup_generated(group, &chars)?;
        let hnf = relation_hnf(group, &chars);
        Ok(DivisorialType { group: Arc::clone(group), entries, subgroup, hnf })
    }

    pub fn empty() -> DivisorialType {
        let g = FinAbGroup::cyclic(1);
        DivisorialType::new(&g, Vec::new()).expect("trivial group")
    }

    pub fn group(&self) -> &Arc<FinAbGroup> {
        &self.group
    }

    /// `(order, character)` pairs in descending order.
    pub fn entries(&self) -> &[(u64, Character)] {
        &self.entries
    }

    /// The subgroup `A` generated by the entries.
    pub fn subgroup(&self) -> &Subgroup {
        &self.subgroup
    }

    /// Hermite form of the relation lattice `K = ker(Z^m → A)`, columns a basis of `K`.
    pub fn hnf(&self) -> &IntMatrix {
        &self.hnf
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn key(&self) -> TypeKey {
        let m = self.entries.len();
        let mut entries = Vec::with_capacity(m * m);
        for r in (0..m).rev() {
            for c in 0..m {
                entries.push(self.hnf.get(r, c).clone());
            }
        }
        TypeKey { orders: self.entries.iter().map(|(k, _)| *k).collect(), entries }
    }
}

impl PartialEq for DivisorialType {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for DivisorialType {}

impl PartialOrd for DivisorialType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DivisorialType {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Comparison key of a divisorial type: the descending order sequence, then the
/// Hermite entries read from the last row up.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TypeKey {
    pub orders: Vec<u64>,
    pub entries: Vec<BigInt>,
}

/// Hermite form of `ker(Z^m → G, e_t ↦ chars[t])`.
fn relation_hnf(group: &Arc<FinAbGroup>, chars: &[Character]) -> IntMatrix {
    let m = chars.len();
    let mods = group.moduli();
    let r = mods.len();
    if r == 0 {
        return IntMatrix::identity(m);
    }
    let mut cols: Vec<Vec<BigInt>> = chars.iter().map(|c| c.coords().to_vec()).collect();
    for (i, q) in mods.iter().enumerate() {
        let mut e = vec![BigInt::zero(); r];
        e[i] = q.clone();
        cols.push(e);
    }
    let rel = IntMatrix::from_columns(r, &cols);
    let (_, u, rank) = intlat::echelon(&rel);
    let kernel: Vec<Vec<BigInt>> = (0..(m + r - rank)).map(|j| (0..m).map(|i| u.get(i, j).clone()).collect()).collect();
    let k = IntMatrix::from_columns(m, &kernel);
    let (h, _, rank) = intlat::echelon(&k);
    debug_assert_eq!(rank, m);
    let off = h.cols() - m;
    let mut out = IntMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            out.set(i, j, h.get(i, off + j).clone());
        }
    }
    out
}

/// Lexicographic composition of independence index, toroidal index and divisorial type.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LexInvariant {
    pub violations: usize,
    pub toroidal: usize,
    pub divisorial_type: TypeKey,
}

impl fmt::Display for LexInvariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.divisorial_type.entries.iter().map(|x| x.to_string()).collect();
        write!(f, "({}, {}, {:?}, [{}])", self.violations, self.toroidal, self.divisorial_type.orders, e.join(","))
    }
}

#[derive(Clone, Debug)]
pub struct ConeInvariants {
    pub cone: Cone,
    pub local: LocalGroup,
    /// Rays of the cone in D with nontrivial character.
    pub divisor_rays: Vec<usize>,
    /// Rays of the cone outside D with nontrivial character.
    pub residual_rays: Vec<usize>,
    /// Rays whose character fails the independence condition.
    pub dependent_rays: Vec<usize>,
    /// Subgroup generated by the divisor characters.
    pub chi_div: Subgroup,
    /// Residual rays whose character lies outside `chi_div`.
    pub residual_outside: Vec<usize>,
    pub divisorial_type: DivisorialType,
}

impl ConeInvariants {
    pub fn independence_violations(&self) -> usize {
        self.dependent_rays.len()
    }

    pub fn toroidal_index(&self) -> usize {
        self.residual_rays.len()
    }

    pub fn divisorial_index(&self) -> usize {
        self.residual_outside.len()
    }

    pub fn character(&self, ray: usize) -> &Character {
        self.local.char_of(ray).expect("ray of the cone")
    }

    pub fn lex(&self) -> LexInvariant {
        LexInvariant {
            violations: self.independence_violations(),
            toroidal: self.toroidal_index(),
            divisorial_type: self.divisorial_type.key(),
        }
    }

    /// The D-divisorial index for the divisor with the given order, with the
    /// residual rays contributing a nonzero multiple. Zero when the cone does
    /// not meet that divisor.
    pub fn d_div_index(&self, f: &StackyFan, order: u64) -> Result<(BigInt, Vec<usize>)> {
        if self.divisorial_index() != 0 {
            return Err(InvariantError::NotDivisorial);
        }
        let Some(&d) = self.divisor_rays.iter().find(|&&i| f.ray(i).order == order) else {
            return Ok((BigInt::zero(), Vec::new()));
        };
        let group = &self.local.group;
        let others: Vec<Character> =
            self.divisor_rays.iter().filter(|&&i| i != d).map(|&i| self.character(i).clone()).collect();
        let small = intlat::subgroup_generated(group, &others)?;
        let q = intlat::cyclic_quotient(&self.chi_div, &small, Some(self.character(d)))?;
        let mut total = BigInt::zero();
        let mut nonzero = Vec::new();
        for &i in &self.residual_rays {
            let c = q.multiple_of_generator(self.character(i))?;
            if !c.is_zero() {
                nonzero.push(i);
            }
            total += c;
        }
        Ok((total, nonzero))
    }
}

fn independent(group: &Arc<FinAbGroup>, x: &Character, others: &[Character]) -> Result<bool> {
    let a = intlat::subgroup_generated(group, std::slice::from_ref(x))?;
    let b = intlat::subgroup_generated(group, others)?;
    Ok(intlat::subgroup_intersect(&a, &b)?.is_trivial())
}

pub fn cone_invariants(f: &StackyFan, cone: &[usize]) -> Result<ConeInvariants> {
    let local = local_group(f, cone)?;
    let group = Arc::clone(&local.group);
    let nontrivial: Vec<(usize, Character)> = local.chars.iter().filter(|(_, c)| !c.is_zero()).cloned().collect();
    let divisor_rays: Vec<usize> = nontrivial.iter().map(|(i, _)| *i).filter(|&i| f.ray(i).in_d).collect();
    let residual_rays: Vec<usize> = nontrivial.iter().map(|(i, _)| *i).filter(|&i| !f.ray(i).in_d).collect();
    let mut dependent_rays = Vec::new();
    for (i, c) in &nontrivial {
        let others: Vec<Character> = nontrivial.iter().filter(|(j, _)| j != i).map(|(_, c)| c.clone()).collect();
        if !independent(&group, c, &others)? {
            dependent_rays.push(*i);
        }
    }
    let char_of = |i: usize| local.char_of(i).expect("ray of the cone").clone();
    let div_chars: Vec<Character> = divisor_rays.iter().map(|&i| char_of(i)).collect();
    let chi_div = intlat::subgroup_generated(&group, &div_chars)?;
    let residual_outside = residual_rays.iter().copied().filter(|&i| !chi_div.contains(&char_of(i))).collect();
    let typed: Vec<(u64, Character)> = divisor_rays
        .iter()
        .filter(|i| dependent_rays.contains(i))
        .map(|&i| (f.ray(i).order, char_of(i)))
        .collect();
    let divisorial_type = DivisorialType::new(&group, typed)?;
    Ok(ConeInvariants {
        cone: cone.to_vec(),
        local,
        divisor_rays,
        residual_rays,
        dependent_rays,
        chi_div,
        residual_outside,
        divisorial_type,
    })
}

/// Invariants at every cone, in the fan's cone order.
pub fn all_invariants(f: &StackyFan) -> Result<Vec<ConeInvariants>> {
    f.cones().iter().map(|c| cone_invariants(f, c)).collect()
}

pub fn lex_invariant(f: &StackyFan, cone: &[usize]) -> Result<LexInvariant> {
    Ok(cone_invariants(f, cone)?.lex())
}

/// Maximum of the lex invariant over all cones (the minimum triple for an empty fan).
pub fn max_lex(f: &StackyFan) -> Result<LexInvariant> {
    let mut best = LexInvariant::default();
    for c in f.cones() {
        best = best.max(lex_invariant(f, c)?);
    }
    Ok(best)
}

pub fn max_divisorial_index(f: &StackyFan) -> Result<usize> {
    let mut best = 0;
    for c in f.cones() {
        best = best.max(cone_invariants(f, c)?.divisorial_index());
    }
    Ok(best)
}

/// Whether every cone has zero independence violations.
pub fn is_independent_everywhere(f: &StackyFan) -> Result<bool> {
    for c in f.cones() {
        if cone_invariants(f, c)?.independence_violations() != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The multiple `c` of the designated generator, for use outside a full cone computation.
pub fn cyclic_multiple(big: &Subgroup, small: &Subgroup, gen: &Character, x: &Character) -> Result<BigInt> {
    let q = intlat::cyclic_quotient(big, small, Some(gen))?;
    if !q.designated_generates() && !q.order().is_one() {
        return Err(InvariantError::Lattice(LatticeError::NotCyclic));
    }
    Ok(q.multiple_of_generator(x)?)
}

/// ord^na of an isotropy type: the total dimension of its summands of dimension at least 2.
pub fn ord_na(record: &IsotropyTypeRecord) -> Result<usize> {
    let summands = record.summands.as_ref().ok_or(InvariantError::MissingDecomposition)?;
    Ok(summands.iter().filter(|s| s.dim >= 2).map(|s| s.dim).sum())
}
