//! Exact integer matrices, Hermite and Smith normal forms, and finite abelian
//! groups presented as cokernels.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix lacks full column rank")]
    RankDeficient,
    #[error("cokernel is infinite")]
    InfiniteCokernel,
    #[error("characters belong to different groups")]
    GroupMismatch,
    #[error("quotient is not cyclic")]
    NotCyclic,
    #[error("subgroup is not contained in the ambient subgroup")]
    NotContained,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, LatticeError>;

/// Dense matrix of arbitrary-precision integers, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        IntMatrix { rows, cols, data }
    }

    /// Builds a matrix from rows of machine integers. All rows must have equal length.
    pub fn from_rows<T: Into<BigInt> + Copy>(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| x.into()));
        }
        IntMatrix { rows: r, cols: c, data }
    }

    /// Builds a `rows × cols.len()` matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, cols: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length does not match row count");
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.get(i, t);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(t, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&r| !a.get(r, k).is_zero()) {
                    Some(r) => {
                        a.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        let (_, _, rank) = echelon(self);
        rank
    }

    /// Adjugate of a square matrix, so that `m·adj(m) = det(m)·I`.
    pub fn adjugate(&self) -> IntMatrix {
        assert_eq!(self.rows, self.cols, "adjugate of a non-square matrix");
        let n = self.rows;
        let mut out = IntMatrix::zeros(n, n);
        if n == 1 {
            out.set(0, 0, BigInt::one());
            return out;
        }
        for i in 0..n {
            for j in 0..n {
                let mut minor = IntMatrix::zeros(n - 1, n - 1);
                for (a, r) in (0..n).filter(|&r| r != i).enumerate() {
                    for (b, c) in (0..n).filter(|&c| c != j).enumerate() {
                        minor.set(a, b, self.get(r, c).clone());
                    }
                }
                let d = minor.det();
                out.set(j, i, if (i + j) % 2 == 0 { d } else { -d });
            }
        }
        out
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += q * row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(src, j) * q;
            self.data[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += q * col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, src) * q;
            self.data[i * self.cols + dst] += v;
        }
    }

    fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }

    fn permute_cols(&self, order: &[usize]) -> IntMatrix {
        let mut out = Self::zeros(self.rows, order.len());
        for (new, &old) in order.iter().enumerate() {
            for i in 0..self.rows {
                out.set(i, new, self.get(i, old).clone());
            }
        }
        out
    }
}

pub fn to_bigints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Column echelon form by unimodular column operations.
///
/// Returns `(h, u, rank)` with `h = m·u`. The last `rank` columns of `h` carry the
/// pivots in increasing row order; each pivot is positive, entries below it vanish,
/// and entries to its right in the pivot row lie in `[0, pivot)`. The first
/// `cols - rank` columns of `h` are zero, so the matching columns of `u` span the kernel.
pub fn echelon(m: &IntMatrix) -> (IntMatrix, IntMatrix, usize) {
    let (n, k) = (m.rows, m.cols);
    let mut h = m.clone();
    let mut u = IntMatrix::identity(k);
    let mut free: Vec<usize> = (0..k).collect();
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for i in (0..n).rev() {
        if free.is_empty() {
            break;
        }
        loop {
            let nz: Vec<usize> = free.iter().copied().filter(|&c| !h.get(i, c).is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&c| h.get(i, c).abs()).unwrap();
            for &c in &nz {
                if c == p {
                    continue;
                }
                let q = -h.get(i, c).div_floor(h.get(i, p));
                h.add_col(c, p, &q);
                u.add_col(c, p, &q);
            }
        }
        if let Some(pos) = free.iter().position(|&c| !h.get(i, c).is_zero()) {
            let p = free.remove(pos);
            if h.get(i, p).is_negative() {
                h.negate_col(p);
                u.negate_col(p);
            }
            pivots.push((i, p));
        }
    }
    let rank = pivots.len();
    let mut order: Vec<usize> = free.clone();
    order.extend(pivots.iter().rev().map(|&(_, c)| c));
    let mut h = h.permute_cols(&order);
    let mut u = u.permute_cols(&order);
    let prow: Vec<usize> = pivots.iter().rev().map(|&(r, _)| r).collect();
    let off = k - rank;
    for j in (0..rank).rev() {
        let r = prow[j];
        for j2 in j + 1..rank {
            let q = h.get(r, off + j2).div_floor(h.get(r, off + j));
            if !q.is_zero() {
                let nq = -q;
                h.add_col(off + j2, off + j, &nq);
                u.add_col(off + j2, off + j, &nq);
            }
        }
    }
    (h, u, rank)
}

/// Hermite normal form under column operations: `h = m·u` is upper triangular
/// with positive pivots and `0 ≤ h[i][j] < h[i][i]` for `j > i`.
pub fn hnf(m: &IntMatrix) -> Result<(IntMatrix, IntMatrix)> {
    let (h, u, rank) = echelon(m);
    if rank < m.cols {
        return Err(LatticeError::RankDeficient);
    }
    Ok((h, u))
}

/// Smith normal form: `(d, u, v)` with `d = u·m·v` diagonal, nonnegative, and
/// each diagonal entry dividing the next.
pub fn snf(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let lim = rows.min(cols);
    let mut t = 0;
    while t < lim {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                let x = a.get(i, j);
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap_rows(t, bi);
        u.swap_rows(t, bi);
        a.swap_cols(t, bj);
        v.swap_cols(t, bj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !a.get(i, t).is_zero() {
                    let q = -a.get(i, t).div_floor(a.get(t, t));
                    a.add_row(i, t, &q);
                    u.add_row(i, t, &q);
                    if !a.get(i, t).is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !a.get(t, j).is_zero() {
                    let q = -a.get(t, j).div_floor(a.get(t, t));
                    a.add_col(j, t, &q);
                    v.add_col(j, t, &q);
                    if !a.get(t, j).is_zero() {
                        clean = false;
                    }
                }
            }
            if clean {
                let p = a.get(t, t).clone();
                let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.get(i, j).is_multiple_of(&p)));
                match bad {
                    None => break,
                    Some(i) => {
                        let one = BigInt::one();
                        a.add_row(t, i, &one);
                        u.add_row(t, i, &one);
                        continue;
                    }
                }
            }
            let bi = (t..rows)
                .filter(|&i| !a.get(i, t).is_zero())
                .min_by_key(|&i| a.get(i, t).abs())
                .unwrap();
            a.swap_rows(t, bi);
            u.swap_rows(t, bi);
            let bj = (t..cols)
                .filter(|&j| !a.get(t, j).is_zero())
                .min_by_key(|&j| a.get(t, j).abs())
                .unwrap();
            a.swap_cols(t, bj);
            v.swap_cols(t, bj);
        }
        if a.get(t, t).is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
        t += 1;
    }
    (a, u, v)
}

/// Solves `b·x = y` for an upper-triangular square `b` with nonzero diagonal,
/// returning `None` when no integral solution exists.
pub fn solve_upper(b: &IntMatrix, y: &[BigInt]) -> Option<Vec<BigInt>> {
    let r = b.rows;
    let mut rest = y.to_vec();
    let mut x = vec![BigInt::zero(); r];
    for i in (0..r).rev() {
        let (q, rem) = rest[i].div_rem(b.get(i, i));
        if !rem.is_zero() {
            return None;
        }
        for t in 0..=i {
            let d = b.get(t, i) * &q;
            rest[t] -= d;
        }
        x[i] = q;
    }
    Some(x)
}

/// Finite abelian group `Z^k / colspan(presentation)` with a cached Smith form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinAbGroup {
    presentation: IntMatrix,
    factors: Vec<BigInt>,
    mods: Vec<BigInt>,
    proj: IntMatrix,
    order: BigInt,
}

/// The quotient of `Z^k` by the column span of `m` (a `k × c` matrix).
pub fn cokernel(m: &IntMatrix) -> Result<Arc<FinAbGroup>> {
    let k = m.rows;
    let (d, u, _) = snf(m);
    let factors: Vec<BigInt> = (0..k)
        .map(|i| if i < m.cols { d.get(i, i).clone() } else { BigInt::zero() })
        .collect();
    if factors.iter().any(|x| x.is_zero()) {
        return Err(LatticeError::InfiniteCokernel);
    }
    let keep: Vec<usize> = (0..k).filter(|&i| !factors[i].is_one()).collect();
    let mut proj = IntMatrix::zeros(keep.len(), k);
    for (r, &i) in keep.iter().enumerate() {
        for j in 0..k {
            proj.set(r, j, u.get(i, j).clone());
        }
    }
    let mods: Vec<BigInt> = keep.iter().map(|&i| factors[i].clone()).collect();
    let order = factors.iter().product();
    Ok(Arc::new(FinAbGroup { presentation: m.clone(), factors, mods, proj, order }))
}

impl FinAbGroup {
    /// The cyclic group `Z/n` in its standard presentation.
    pub fn cyclic(n: i64) -> Arc<FinAbGroup> {
        cokernel(&IntMatrix::from_rows(&[vec![n]])).expect("nonzero order")
    }

    pub fn presentation(&self) -> &IntMatrix {
        &self.presentation
    }

    /// All diagonal entries of the Smith form, including units.
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.factors
    }

    /// The invariant factors greater than one; elements are reduced modulo these.
    pub fn moduli(&self) -> &[BigInt] {
        &self.mods
    }

    pub fn order(&self) -> &BigInt {
        &self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.mods.is_empty()
    }

    /// Number of generators of the presentation.
    pub fn ambient_rank(&self) -> usize {
        self.presentation.rows
    }

    fn reduce(&self, coords: Vec<BigInt>) -> Vec<BigInt> {
        coords.into_iter().zip(&self.mods).map(|(x, m)| x.mod_floor(m)).collect()
    }

    /// Image of a vector of `Z^k` in the group.
    pub fn project(self: &Arc<Self>, v: &[BigInt]) -> Character {
        assert_eq!(v.len(), self.ambient_rank(), "vector length does not match presentation");
        let coords = self.reduce(self.proj.mul_vec(v));
        Character { group: Arc::clone(self), coords }
    }

    /// Image of the `i`-th standard basis vector.
    pub fn generator(self: &Arc<Self>, i: usize) -> Character {
        let mut e = vec![BigInt::zero(); self.ambient_rank()];
        e[i] = BigInt::one();
        self.project(&e)
    }

    pub fn zero(self: &Arc<Self>) -> Character {
        Character { group: Arc::clone(self), coords: vec![BigInt::zero(); self.mods.len()] }
    }

    pub fn from_coords(self: &Arc<Self>, coords: Vec<BigInt>) -> Character {
        assert_eq!(coords.len(), self.mods.len());
        Character { group: Arc::clone(self), coords: self.reduce(coords) }
    }

    /// Every element, in lexicographic order of canonical coordinates. Intended for small groups.
    pub fn elements(self: &Arc<Self>) -> Vec<Character> {
        let mut out = vec![Vec::new()];
        for m in &self.mods {
            let mut next = Vec::new();
            for prefix in &out {
                let mut x = BigInt::zero();
                while &x < m {
                    let mut p: Vec<BigInt> = prefix.clone();
                    p.push(x.clone());
                    next.push(p);
                    x += 1;
                }
            }
            out = next;
        }
        out.into_iter().map(|c| Character { group: Arc::clone(self), coords: c }).collect()
    }
}

/// An element of a finite abelian group, stored in canonical coordinates.
#[derive(Clone, Debug)]
pub struct Character {
    group: Arc<FinAbGroup>,
    coords: Vec<BigInt>,
}

impl PartialEq for Character {
    fn eq(&self, other: &Self) -> bool {
        self.same_group(other) && self.coords == other.coords
    }
}

impl Eq for Character {}

impl Character {
    pub fn group(&self) -> &Arc<FinAbGroup> {
        &self.group
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn same_group(&self, other: &Character) -> bool {
        Arc::ptr_eq(&self.group, &other.group) || self.group == other.group
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, other: &Character) -> Result<Character> {
        if !self.same_group(other) {
            return Err(LatticeError::GroupMismatch);
        }
        let c = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        Ok(self.group.from_coords(c))
    }

    pub fn neg(&self) -> Character {
        self.group.from_coords(self.coords.iter().map(|x| -x).collect())
    }

    pub fn scale(&self, k: &BigInt) -> Character {
        self.group.from_coords(self.coords.iter().map(|x| x * k).collect())
    }

    /// Order of the element.
    pub fn order(&self) -> BigInt {
        self.coords
            .iter()
            .zip(self.group.moduli())
            .map(|(x, m)| m / x.gcd(m))
            .fold(BigInt::one(), |acc, o| acc.lcm(&o))
    }
}

/// A subgroup, stored as the lattice of `Z^r` lying over it, where `r` is the
/// number of nontrivial invariant factors. The basis is upper triangular.
#[derive(Clone, Debug)]
pub struct Subgroup {
    group: Arc<FinAbGroup>,
    basis: IntMatrix,
    order: BigInt,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.group, &other.group) || self.group == other.group) && self.basis == other.basis
    }
}

impl Eq for Subgroup {}

fn lattice_over(group: &Arc<FinAbGroup>, gens: Vec<Vec<BigInt>>) -> Subgroup {
    let r = group.mods.len();
    let mut cols = gens;
    for (i, m) in group.mods.iter().enumerate() {
        let mut e = vec![BigInt::zero(); r];
        e[i] = m.clone();
        cols.push(e);
    }
    let m = IntMatrix::from_columns(r, &cols);
    let (h, _, rank) = echelon(&m);
    debug_assert_eq!(rank, r);
    let off = h.cols - r;
    let mut basis = IntMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            basis.set(i, j, h.get(i, off + j).clone());
        }
    }
    let idx: BigInt = (0..r).map(|i| basis.get(i, i).clone()).product();
    let order = group.order() / idx;
    Subgroup { group: Arc::clone(group), basis, order }
}

/// Subgroup generated by a list of characters of `group`.
pub fn subgroup_generated(group: &Arc<FinAbGroup>, chars: &[Character]) -> Result<Subgroup> {
    let mut gens = Vec::with_capacity(chars.len());
    for c in chars {
        if !(Arc::ptr_eq(&c.group, group) || *c.group == **group) {
            return Err(LatticeError::GroupMismatch);
        }
        gens.push(c.coords.clone());
    }
    Ok(lattice_over(group, gens))
}

/// Intersection of two subgroups of the same group.
pub fn subgroup_intersect(a: &Subgroup, b: &Subgroup) -> Result<Subgroup> {
    if !(Arc::ptr_eq(&a.group, &b.group) || a.group == b.group) {
        return Err(LatticeError::GroupMismatch);
    }
    let r = a.basis.rows;
    if r == 0 {
        return Ok(a.clone());
    }
    let mut cols = a.basis.columns();
    for c in b.basis.columns() {
        cols.push(c.into_iter().map(|x| -x).collect());
    }
    let m = IntMatrix::from_columns(r, &cols);
    let (_, u, rank) = echelon(&m);
    let mut gens = Vec::new();
    for j in 0..(2 * r - rank) {
        let x: Vec<BigInt> = (0..r).map(|i| u.get(i, j).clone()).collect();
        gens.push(a.basis.mul_vec(&x));
    }
    Ok(lattice_over(&a.group, gens))
}

/// Membership test.
pub fn contains(sub: &Subgroup, c: &Character) -> Result<bool> {
    if !(Arc::ptr_eq(c.group(), &sub.group) || **c.group() == *sub.group) {
        return Err(LatticeError::GroupMismatch);
    }
    Ok(solve_upper(&sub.basis, &c.coords).is_some())
}

impl Subgroup {
    pub fn group(&self) -> &Arc<FinAbGroup> {
        &self.group
    }

    pub fn order(&self) -> &BigInt {
        &self.order
    }

    pub fn is_trivial(&self) -> bool {
        self.order.is_one()
    }

    pub fn contains(&self, c: &Character) -> bool {
        contains(self, c).expect("character from another group")
    }

    /// Whether `other` is contained in `self`.
    pub fn contains_subgroup(&self, other: &Subgroup) -> bool {
        other.basis.columns().iter().all(|c| solve_upper(&self.basis, c).is_some())
    }

    /// All elements, enumerated from the full group. Intended for small groups.
    pub fn elements(&self) -> Vec<Character> {
        self.group.elements().into_iter().filter(|c| self.contains(c)).collect()
    }
}

/// A cyclic quotient `big / small` together with a chosen generator.
#[derive(Clone, Debug)]
pub struct CyclicQuotient {
    order: BigInt,
    big: IntMatrix,
    row: Vec<BigInt>,
    generator: BigInt,
    designated_generates: bool,
}

/// The quotient `big / small`, which must be cyclic. The generator is the image
/// of `designated` when that image generates, otherwise the canonical generator.
pub fn cyclic_quotient(big: &Subgroup, small: &Subgroup, designated: Option<&Character>) -> Result<CyclicQuotient> {
    if !(Arc::ptr_eq(&big.group, &small.group) || big.group == small.group) {
        return Err(LatticeError::GroupMismatch);
    }
    let r = big.basis.rows;
    let mut cols = Vec::with_capacity(r);
    for c in small.basis.columns() {
        cols.push(solve_upper(&big.basis, &c).ok_or(LatticeError::NotContained)?);
    }
    let t = IntMatrix::from_columns(r, &cols);
    let (d, u, _) = snf(&t);
    let nontrivial: Vec<usize> = (0..r).filter(|&i| !d.get(i, i).is_one()).collect();
    if nontrivial.len() >= 2 {
        return Err(LatticeError::NotCyclic);
    }
    let (order, row) = match nontrivial.first() {
        Some(&i) => (d.get(i, i).clone(), u.row(i)),
        None => (BigInt::one(), vec![BigInt::zero(); r]),
    };
    let mut q = CyclicQuotient { order, big: big.basis.clone(), row, generator: BigInt::one(), designated_generates: false };
    if let Some(c) = designated {
        let g = q.image(c)?;
        if g.gcd(&q.order).is_one() {
            q.generator = g;
            q.designated_generates = true;
        }
    }
    if q.order.is_one() {
        q.generator = BigInt::zero();
    }
    Ok(q)
}

impl CyclicQuotient {
    pub fn order(&self) -> &BigInt {
        &self.order
    }

    /// Whether the designated character's image was taken as generator.
    pub fn designated_generates(&self) -> bool {
        self.designated_generates
    }

    /// Image in `Z/order` under the canonical presentation.
    pub fn image(&self, c: &Character) -> Result<BigInt> {
        let y = solve_upper(&self.big, c.coords()).ok_or(LatticeError::NotContained)?;
        let s: BigInt = self.row.iter().zip(&y).map(|(a, b)| a * b).sum();
        Ok(s.mod_floor(&self.order))
    }

    /// The multiple `c ∈ [0, order)` with image(x) = c · generator.
    pub fn multiple_of_generator(&self, x: &Character) -> Result<BigInt> {
        if self.order.is_one() {
            return Ok(BigInt::zero());
        }
        let img = self.image(x)?;
        let inv = mod_inverse(&self.generator, &self.order).expect("generator is a unit");
        Ok((img * inv).mod_floor(&self.order))
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Primitive vector on the ray of `v` and the multiplicity `m` with `v = m·u`.
pub fn primitive(v: &[BigInt]) -> (Vec<BigInt>, BigInt) {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return (v.to_vec(), g);
    }
    (v.iter().map(|x| x / &g).collect(), g)
}

/// Whether the given vectors extend to a basis of the ambient lattice.
pub fn extends_to_basis(vectors: &[Vec<BigInt>], n: usize) -> bool {
    if vectors.is_empty() {
        return true;
    }
    let m = IntMatrix::from_columns(n, vectors);
    let (d, _, _) = snf(&m);
    (0..vectors.len()).all(|i| i < n && d.get(i, i).is_one())
}
