//! Test and benchmark fans: cyclic quotient cones, stacky weighted projective
//! lines and planes, named fixtures, and seeded random fans.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::intlat::{self, IntMatrix};
use crate::stackyfan::{lattice_index, root_stack, subdivide_at, Cone, Ray, StackyFan};

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub fan: StackyFan,
}

fn entry(name: impl Into<String>, fan: StackyFan) -> CorpusEntry {
    CorpusEntry { name: name.into(), fan }
}

fn two_ray(a: &[i64], b: &[i64]) -> StackyFan {
    StackyFan::new(2, vec![Ray::new(a, 0, false), Ray::new(b, 1, false)], &[vec![0, 1]]).expect("two-ray cone")
}

/// The cone of the cyclic quotient singularity `1/r(1,a)`.
pub fn cyclic_cone(r: i64, a: i64) -> StackyFan {
    two_ray(&[0, 1], &[r, -a])
}

/// All `1/r(1,a)` with `2 ≤ r ≤ 12` and `gcd(a, r) = 1`.
pub fn cyclic_quotients() -> Vec<CorpusEntry> {
    let mut out = Vec::new();
    for r in 2..=12i64 {
        for a in 1..r {
            if a.gcd(&r) == 1 {
                out.push(entry(format!("1/{r}(1,{a})"), cyclic_cone(r, a)));
            }
        }
    }
    out
}

/// Stacky `P(w)`: rays are the images of the standard basis in `Z^k / Z·w`.
/// Weights must have gcd 1.
pub fn weighted_projective(weights: &[i64]) -> StackyFan {
    let k = weights.len();
    let w = IntMatrix::from_rows(&[weights.to_vec()]);
    // wᵀ·u = (0, …, 0, 1), so uᵀ maps w to the last basis vector and its
    // first k - 1 rows present the quotient.
    let (h, u, _) = intlat::echelon(&w);
    assert!(h.get(0, k - 1) == &BigInt::from(1), "weights must have gcd 1");
    let rays = (0..k)
        .map(|i| {
            let beta: Vec<BigInt> = (0..k - 1).map(|r| u.get(i, r).clone()).collect();
            Ray { beta, order: i as u64, in_d: false, distinguished: false }
        })
        .collect();
    let cones: Vec<Vec<usize>> = (0..k).map(|skip| (0..k).filter(|&j| j != skip).collect()).collect();
    StackyFan::new(k - 1, rays, &cones).expect("weighted projective fan")
}

/// `P(a,b)` and `P(a,b,c)` with weights at most 5, divided by their gcd and deduplicated.
pub fn weighted_projectives() -> Vec<CorpusEntry> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut add = |ws: Vec<i64>| {
        let g = ws.iter().fold(0i64, |a, &b| a.gcd(&b));
        let ws: Vec<i64> = ws.iter().map(|x| x / g).collect();
        if seen.insert(ws.clone()) {
            let name = format!("P({})", ws.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","));
            out.push(entry(name, weighted_projective(&ws)));
        }
    };
    for a in 1..=5 {
        for b in a..=5 {
            add(vec![a, b]);
        }
    }
    for a in 1..=5 {
        for b in a..=5 {
            for c in b..=5 {
                add(vec![a, b, c]);
            }
        }
    }
    out
}

/// The A1 cone, the `1/4(1,1)` cone, and the two local models over `C_2`.
pub fn fixtures() -> Vec<CorpusEntry> {
    vec![
        entry("A1", two_ray(&[0, 1], &[2, -1])),
        entry("1/4(1,1)", two_ray(&[0, 1], &[4, -1])),
        entry("C(0)+C(-1) over C2", two_ray(&[1, 0], &[0, 2])),
        entry("C(-1)+C(-1) over C2", two_ray(&[0, 1], &[2, -1])),
    ]
}

fn unit(n: usize, i: usize, sign: i64) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = sign;
    v
}

fn base_fan(rng: &mut ChaCha8Rng, n: usize) -> StackyFan {
    let choice = rng.gen_range(0..3);
    let (rays, cones): (Vec<Vec<i64>>, Vec<Vec<usize>>) = if n == 1 {
        if choice == 0 {
            (vec![vec![1]], vec![vec![0]])
        } else {
            (vec![vec![1], vec![-1]], vec![vec![0], vec![1]])
        }
    } else if choice == 0 {
        ((0..n).map(|i| unit(n, i, 1)).collect(), vec![(0..n).collect()])
    } else if choice == 1 {
        let mut rays: Vec<Vec<i64>> = (0..n).map(|i| unit(n, i, 1)).collect();
        rays.push(vec![-1; n]);
        let cones = (0..=n).map(|skip| (0..=n).filter(|&j| j != skip).collect()).collect();
        (rays, cones)
    } else {
        let mut rays: Vec<Vec<i64>> = (0..n).map(|i| unit(n, i, 1)).collect();
        rays.extend((0..n).map(|i| unit(n, i, -1)));
        let mut cones: Vec<Vec<usize>> =
            (0..1usize << n).map(|mask| (0..n).map(|i| i + n * (mask >> i & 1)).collect()).collect();
        if rng.gen_bool(0.5) {
            cones.truncate((cones.len() / 2).max(1));
        }
        (rays, cones)
    };
    let used: BTreeSet<usize> = cones.iter().flatten().copied().collect();
    let keep: Vec<usize> = used.into_iter().collect();
    let rays: Vec<Ray> = keep.iter().map(|&i| Ray::new(&rays[i], 0, false)).collect();
    let cones: Vec<Vec<usize>> =
        cones.iter().map(|c| c.iter().map(|i| keep.iter().position(|k| k == i).expect("used ray")).collect()).collect();
    StackyFan::new(n, rays, &cones).expect("base fan")
}

/// Largest local group order over all cones.
pub fn max_local_order(f: &StackyFan) -> BigInt {
    f.cones().iter().map(|c| lattice_index(f, c)).max().unwrap_or_else(|| BigInt::from(1))
}

/// A random stacky fan of rank at most 3 with largest local group order in `(1, max_order]`.
pub fn random_fan(seed: u64, max_order: u64) -> StackyFan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let n = *[1usize, 2, 2, 3, 3, 3].choose(&mut rng).expect("nonempty");
        let mut f = base_fan(&mut rng, n);
        for _ in 0..rng.gen_range(0..3) {
            let cs: Vec<Cone> = f.cones().iter().filter(|c| c.len() >= 2).cloned().collect();
            if cs.is_empty() {
                break;
            }
            let tau = cs.choose(&mut rng).expect("nonempty").clone();
            let mut w = vec![BigInt::from(0); n];
            for &i in &tau {
                let k = rng.gen_range(1..4);
                for (a, b) in w.iter_mut().zip(&f.ray(i).beta) {
                    *a += b * k;
                }
            }
            let (w, _) = intlat::primitive(&w);
            f = subdivide_at(&f, &tau, w).expect("cone of the fan").0;
        }
        for i in 0..f.rays().len() {
            let d = *[1u64, 1, 1, 2, 3].choose(&mut rng).expect("nonempty");
            f = root_stack(&f, i, d).expect("ray of the fan");
        }
        let mut orders: Vec<u64> = (0..f.rays().len() as u64).collect();
        orders.shuffle(&mut rng);
        for (i, &o) in orders.iter().enumerate() {
            let in_d = rng.gen_bool(0.4);
            f = f.with_marks(i, o, in_d, false);
        }
        let m = max_local_order(&f);
        if m > BigInt::from(1) && m <= BigInt::from(max_order) {
            return f;
        }
    }
}

/// A random face-closed subset of `f`: a random selection of maximal cones and
/// their faces, sometimes with the first selected cone removed.
pub fn random_subset(f: &StackyFan, seed: u64) -> Vec<Cone> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maximal = f.maximal_cones();
    let mut pick: Vec<Cone> = maximal.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if pick.is_empty() {
        pick.push(maximal[0].clone());
    }
    let mut sub: BTreeSet<Cone> = f.cones().iter().filter(|c| pick.iter().any(|p| crate::stackyfan::is_subcone(c, p))).cloned().collect();
    // pick[0] is maximal in f, so dropping it keeps the subset face-closed
    if rng.gen_bool(0.3) && pick[0].len() > 1 {
        sub.remove(&pick[0]);
    }
    sub.into_iter().collect()
}

/// Seeds of the random part of the corpus.
pub const RANDOM_SEEDS: std::ops::Range<u64> = 0..50;
/// Bound on local group orders for random fans.
pub const RANDOM_MAX_ORDER: u64 = 60;

pub fn random_fans() -> Vec<CorpusEntry> {
    RANDOM_SEEDS.map(|s| entry(format!("random-{s}"), random_fan(s, RANDOM_MAX_ORDER))).collect()
}

/// Every corpus fan: cyclic quotients, weighted projective spaces, fixtures and random fans.
pub fn full_corpus() -> Vec<CorpusEntry> {
    let mut out = cyclic_quotients();
    out.extend(weighted_projectives());
    out.extend(fixtures());
    out.extend(random_fans());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stackyfan::{local_group, validate};

    #[test]
    fn cyclic_count() {
        let expected: usize = (2..=12i64).map(|r| (1..r).filter(|a| a.gcd(&r) == 1).count()).sum();
        assert_eq!(cyclic_quotients().len(), expected);
        let f = cyclic_cone(5, 2);
        assert_eq!(local_group(&f, &[0, 1]).unwrap().group.order(), &BigInt::from(5));
    }

    #[test]
    fn weighted_projective_local_groups() {
        let f = weighted_projective(&[1, 2, 3]);
        assert!(validate(&f, false).is_valid());
        // the chart missing ray i has local group of order w_i
        for (skip, w) in [(0usize, 1), (1, 2), (2, 3)] {
            let c: Vec<usize> = (0..3).filter(|&j| j != skip).collect();
            assert_eq!(local_group(&f, &c).unwrap().group.order(), &BigInt::from(w));
        }
        let line = weighted_projective(&[2, 3]);
        assert_eq!(local_group(&line, &[0]).unwrap().group.order(), &BigInt::from(3));
        assert_eq!(local_group(&line, &[1]).unwrap().group.order(), &BigInt::from(2));
        assert!(weighted_projectives().iter().all(|e| validate(&e.fan, false).is_valid()));
    }

    #[test]
    fn random_fans_are_valid_and_bounded() {
        for s in 0..20 {
            let f = random_fan(s, RANDOM_MAX_ORDER);
            assert!(validate(&f, false).is_valid(), "seed {s}: {:?}", validate(&f, false));
            let m = max_local_order(&f);
            assert!(m > BigInt::from(1) && m <= BigInt::from(RANDOM_MAX_ORDER));
            assert_eq!(f, random_fan(s, RANDOM_MAX_ORDER));
        }
    }

    #[test]
    fn random_subsets_are_face_closed() {
        for s in 0..20 {
            let f = random_fan(s, RANDOM_MAX_ORDER);
            let sub = random_subset(&f, 1000 + s);
            assert!(crate::stackyfan::restrict_to_subfan(&f, &sub).is_ok());
        }
    }
}
