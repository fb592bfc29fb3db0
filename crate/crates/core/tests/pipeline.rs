use num_bigint::BigInt;

use destack_core::corpus;
use destack_core::destackify::{destackify_all, functoriality_check, Config, DestackError};
use destack_core::invariants::all_invariants;
use destack_core::stackyfan::{fan_hash, replay, Ray, StackyFan};

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn a1() -> StackyFan {
    corpus::cyclic_cone(2, 1)
}

fn all_smooth(f: &StackyFan) -> bool {
    f.cones().iter().all(|c| f.is_coarse_smooth(c))
}

/// Every primitive ray of `out` lies in the coarse cone spanned by `rays`.
fn inside_cone(out: &StackyFan, rays: &[Vec<i64>]) -> bool {
    let [a, b] = [&rays[0], &rays[1]];
    let det = a[0] * b[1] - a[1] * b[0];
    out.rays().iter().all(|r| {
        let u = r.primitive();
        let (x, y) = (&u[0], &u[1]);
        let s = (x * b[1] - y * b[0]) * det.signum();
        let t = (y * a[0] - x * a[1]) * det.signum();
        s >= BigInt::from(0) && t >= BigInt::from(0)
    })
}

#[test]
fn smooth_input_is_untouched() {
    let f = StackyFan::new(2, vec![Ray::new(&[1, 0], 0, false), Ray::new(&[0, 1], 1, false)], &[vec![0, 1]]).unwrap();
    let out = destackify_all(&f, Config::default()).unwrap();
    assert!(out.trace.steps.is_empty());
    assert_eq!(out.fan, f);
}

#[test]
fn a1_gains_the_ray_1_0() {
    let out = destackify_all(&a1(), Config::default()).unwrap();
    assert!(!out.trace.steps.is_empty());
    assert!(out.fan.rays().iter().any(|r| r.primitive() == big(&[1, 0])));
    assert!(all_smooth(&out.fan));
    assert!(all_invariants(&out.fan).unwrap().iter().all(|c| c.independence_violations() == 0));
}

#[test]
fn cyclic_quotients_resolve_inside_their_cone() {
    for e in corpus::cyclic_quotients() {
        let out = destackify_all(&e.fan, Config::default()).unwrap();
        assert!(all_smooth(&out.fan), "{}", e.name);
        let rays: Vec<Vec<i64>> = e.fan.rays().iter().map(|r| r.beta.iter().map(|x| i64::try_from(x).unwrap()).collect()).collect();
        assert!(inside_cone(&out.fan, &rays), "{}", e.name);
    }
}

#[test]
fn traces_replay_to_the_final_fan() {
    for e in corpus::fixtures().into_iter().chain(corpus::weighted_projectives()) {
        let out = destackify_all(&e.fan, Config::default()).unwrap();
        let g = replay(&e.fan, &out.trace).unwrap_or_else(|(i, m)| panic!("{} step {i}: {m}", e.name));
        assert_eq!(fan_hash(&g), fan_hash(&out.fan), "{}", e.name);
    }
}

#[test]
fn reruns_are_identical() {
    let f = corpus::weighted_projective(&[2, 3, 5]);
    let a = destackify_all(&f, Config::default()).unwrap();
    let b = destackify_all(&f, Config::default()).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(fan_hash(&a.fan), fan_hash(&b.fan));
}

#[test]
fn budget_exhaustion_keeps_the_trace() {
    let f = corpus::weighted_projective(&[2, 3, 5]);
    let full = destackify_all(&f, Config::default()).unwrap();
    match destackify_all(&f, Config { budget: 1, ..Config::default() }) {
        Err(DestackError::BudgetExceeded { trace, .. }) => {
            assert!(!trace.steps.is_empty());
            assert_eq!(trace.steps[0].action, full.trace.steps[0].action);
            assert_eq!(trace.steps[0].fan_hash_after, full.trace.steps[0].fan_hash_after);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn functoriality_examples() {
    let f = a1();
    assert!(functoriality_check(&f, &f.cones().iter().cloned().collect::<Vec<_>>(), Config::default()).unwrap().equal);
    assert!(functoriality_check(&f, &[vec![0]], Config::default()).unwrap().equal);
    let two = corpus::weighted_projective(&[1, 2]);
    assert!(functoriality_check(&two, &[vec![0]], Config::default()).unwrap().equal);
}
