//! The eight acceptance criteria. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;

use destack_core::corpus::{self, CorpusEntry};
use destack_core::destackify::{destackify_all, functoriality_check, Config, Output};
use destack_core::grouprep::{
    abelianize_iterated, decompose_dim_one, examples, fo_degree, is_faithful, poly_dim_by_degree, Block, ClassFn, Group,
    GroupError, Monomial, MonomialGroup,
};
use destack_core::invariants::cone_invariants;
use destack_core::io;
use destack_core::stackyfan::{apply_action, fan_hash, replay, validate, Cone, StackyFan};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(problems: &[String], detail: String) -> Verdict {
    for p in problems.iter().take(10) {
        eprintln!("    {p}");
    }
    Verdict { pass: problems.is_empty(), detail }
}

fn run_corpus(entries: &[CorpusEntry], config: Config) -> Vec<Output> {
    entries.iter().map(|e| destackify_all(&e.fan, config).unwrap_or_else(|err| panic!("{}: {err}", e.name))).collect()
}

fn c1_endpoint(entries: &[CorpusEntry]) -> (Verdict, Vec<Output>) {
    let t = Instant::now();
    let outs = run_corpus(entries, Config::default());
    let elapsed = t.elapsed();
    let mut problems = Vec::new();
    for (e, o) in entries.iter().zip(&outs) {
        for c in o.fan.cones() {
            if !o.fan.is_coarse_smooth(c) {
                problems.push(format!("{}: final cone {c:?} is not smooth", e.name));
            }
        }
        if !validate(&o.fan, false).is_valid() {
            problems.push(format!("{}: final fan is invalid", e.name));
        }
    }
    if elapsed >= Duration::from_secs(60) {
        problems.push(format!("runtime {elapsed:?} exceeds 60 s"));
    }
    let steps: usize = outs.iter().map(|o| o.trace.steps.len()).sum();
    (verdict(&problems, format!("{} fans, {steps} steps, {:.1} s", entries.len(), elapsed.as_secs_f64())), outs)
}

fn c2_strict_decrease(entries: &[CorpusEntry]) -> Verdict {
    let outs = run_corpus(entries, Config { check: true, ..Config::default() });
    let mut problems = Vec::new();
    let (mut lex_pairs, mut div_rounds, mut ann_rounds) = (0, 0, 0);
    for (e, o) in entries.iter().zip(&outs) {
        for f in &o.report.failures {
            problems.push(format!("{}: {f}", e.name));
        }
        for w in o.report.lex_sequence.windows(2) {
            lex_pairs += 1;
            if w[1] >= w[0] {
                problems.push(format!("{}: lex {} then {}", e.name, w[0], w[1]));
            }
        }
        for (a, b) in &o.report.divisorial_rounds {
            div_rounds += 1;
            if b >= a {
                problems.push(format!("{}: divisorial index {a} -> {b}", e.name));
            }
        }
        ann_rounds += o.report.annihilation_rounds.len();
    }
    verdict(&problems, format!("{lex_pairs} lex steps, {div_rounds} divisorial rounds, {ann_rounds} annihilation rounds"))
}

type Key = (Cone, Vec<(Vec<BigInt>, bool, u64)>);

fn c3_crosscheck(entries: &[CorpusEntry], outs: &[Output]) -> Verdict {
    let mut problems = Vec::new();
    let mut seen: HashMap<Key, ()> = HashMap::new();
    let mut checked = 0usize;
    let mut check_fan = |name: &str, f: &StackyFan, problems: &mut Vec<String>| {
        for c in f.cones() {
            let key = (c.clone(), c.iter().map(|&i| (f.ray(i).beta.clone(), f.ray(i).in_d, f.ray(i).order)).collect());
            if seen.insert(key, ()).is_some() {
                continue;
            }
            checked += 1;
            let v = cone_invariants(f, c).expect("invariants").independence_violations();
            if (v == 0) != f.is_coarse_smooth(c) {
                problems.push(format!("{name}: cone {c:?} has {v} violations, smooth = {}", f.is_coarse_smooth(c)));
            }
        }
    };
    for (e, o) in entries.iter().zip(outs) {
        let mut f = e.fan.clone();
        check_fan(&e.name, &f, &mut problems);
        for s in &o.trace.steps {
            f = apply_action(&f, &s.action).expect("trace step applies");
            check_fan(&e.name, &f, &mut problems);
        }
    }
    // the two C2 examples: C(0)+C(-1) is smooth, C(-1)+C(-1) is not
    let fixtures = corpus::fixtures();
    for (name, smooth) in [("C(0)+C(-1) over C2", true), ("C(-1)+C(-1) over C2", false)] {
        let f = &fixtures.iter().find(|e| e.name == name).expect("fixture").fan;
        let v = cone_invariants(f, &[0, 1]).expect("invariants").independence_violations();
        if (v == 0) != smooth || f.is_coarse_smooth(&[0, 1]) != smooth {
            problems.push(format!("{name}: expected smooth = {smooth}, got {v} violations"));
        }
    }
    verdict(&problems, format!("{checked} distinct cones"))
}

fn c4_functoriality() -> Verdict {
    let mut problems = Vec::new();
    let (mut exact, mut coarse) = (0, 0);
    for s in 0..20u64 {
        let f = corpus::random_fan(s, corpus::RANDOM_MAX_ORDER);
        let sub = corpus::random_subset(&f, 1000 + s);
        let r = functoriality_check(&f, &sub, Config::default()).expect("functoriality check runs");
        exact += r.equal as usize;
        coarse += r.coarse_equal as usize;
        if !r.equal {
            problems.push(format!("seed {s}: restriction of the whole result differs from the result on the subset"));
        }
    }
    verdict(&problems, format!("{exact}/20 exact, coarse fans agree {coarse}/20"))
}

/// Trace of a monomial matrix as a complex number, straight from the matrix.
fn numeric_trace(m: &Monomial, conductor: u32) -> (f64, f64) {
    let mut z = (0.0, 0.0);
    for (j, (&p, &e)) in m.perm.iter().zip(&m.exps).enumerate() {
        if p == j {
            let t = 2.0 * std::f64::consts::PI * e as f64 / conductor as f64;
            z = (z.0 + t.cos(), z.1 + t.sin());
        }
    }
    z
}

fn c5_abelianization() -> Verdict {
    let t = Instant::now();
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for (name, g) in examples::non_abelian() {
        let chi = g.character(&Block::all(g.degree())).expect("character");
        let h = g.whole();
        let mut seq = vec![decompose_dim_one(&h, &chi).ord_na];
        match abelianize_iterated(&h, &chi, 16) {
            Ok(levels) => seq.extend(levels.iter().map(|l| l.iter().map(|s| s.max_ord_na()).max().unwrap_or(0))),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
        if seq.windows(2).any(|w| w[1] >= w[0]) || seq.last() != Some(&0) {
            problems.push(format!("{name}: ord^na sequence {seq:?}"));
        }
        summary.push(format!("{name} {seq:?}"));
    }
    // element-level oracle: the standard representation of S3 has character norm 1,
    // so it is irreducible of dimension 2 and has no one-dimensional constituent
    let g = examples::s3_standard();
    let norm: f64 = (0..g.order())
        .map(|i| {
            let (re, im) = numeric_trace(g.element(i), g.conductor());
            re * re + im * im
        })
        .sum::<f64>()
        / g.order() as f64;
    let ord = decompose_dim_one(&g.whole(), &g.character(&Block::all(2)).expect("character")).ord_na;
    if (norm - 1.0).abs() > 1e-9 || g.degree() != 2 || ord != 2 {
        problems.push(format!("S3 standard: norm {norm}, ord^na {ord}"));
    }
    let elapsed = t.elapsed();
    if elapsed >= Duration::from_secs(10) {
        problems.push(format!("runtime {elapsed:?} exceeds 10 s"));
    }
    verdict(&problems, format!("{}; {:.2} s", summary.join(", "), elapsed.as_secs_f64()))
}

fn c6_semicontinuity(entries: &[CorpusEntry], outs: &[Output]) -> Verdict {
    let mut problems = Vec::new();
    let mut pairs = 0usize;
    let fans = entries.iter().map(|e| (&e.name, &e.fan)).chain(entries.iter().zip(outs).map(|(e, o)| (&e.name, &o.fan)));
    for (name, f) in fans {
        let mut cache = HashMap::new();
        let mut scal = |c: &Cone| -> [BigInt; 4] {
            cache
                .entry(c.clone())
                .or_insert_with(|| {
                    let ci = cone_invariants(f, c).expect("invariants");
                    [
                        BigInt::from(ci.independence_violations()),
                        BigInt::from(ci.toroidal_index()),
                        BigInt::from(ci.divisorial_index()),
                        ci.local.group.order().clone(),
                    ]
                })
                .clone()
        };
        for c in f.cones() {
            for skip in 0..c.len() {
                let face: Cone = c.iter().enumerate().filter(|(k, _)| *k != skip).map(|(_, &i)| i).collect();
                if face.is_empty() {
                    continue;
                }
                pairs += 1;
                let (a, b) = (scal(&face), scal(c));
                if a.iter().zip(&b).any(|(x, y)| x > y) {
                    problems.push(format!("{name}: face {face:?} {a:?} exceeds cone {c:?} {b:?}"));
                }
            }
        }
    }
    // restriction monotonicity of ord^na over every bundled record and every record it produces
    let mut records = 0usize;
    for (name, g) in examples::non_abelian() {
        let chi = g.character(&Block::all(g.degree())).expect("character");
        let h = g.whole();
        let mut todo: Vec<(Group, ClassFn)> = vec![(h.clone(), chi.clone())];
        for level in abelianize_iterated(&h, &chi, 16).expect("iteration") {
            for step in level {
                todo.extend(step.strata.into_iter().map(|s| (s.stabilizer, s.character)));
            }
        }
        for (k, c) in todo {
            records += 1;
            let top = decompose_dim_one(&k, &c).ord_na;
            for sub in k.subgroups().expect("subgroups") {
                let low = decompose_dim_one(&sub, &c).ord_na;
                if low > top {
                    problems.push(format!("{name}: ord^na {low} on a subgroup of order {} exceeds {top}", sub.order()));
                }
            }
        }
    }
    verdict(&problems, format!("{pairs} face pairs, {records} isotropy records"))
}

/// Counts invariant vectors of a monomial action on an explicit basis: one per
/// orbit whose stabilizer acts with trivial scalar.
fn count_invariants<B: Ord + Clone>(order: usize, field: i64, basis: &[B], act: impl Fn(usize, &B) -> (B, i64)) -> usize {
    let mut done = BTreeSet::new();
    let mut n = 0;
    for b in basis {
        if done.contains(b) {
            continue;
        }
        let mut ok = true;
        for g in 0..order {
            let (img, s) = act(g, b);
            if img == *b && s.rem_euclid(field) != 0 {
                ok = false;
            }
            done.insert(img);
        }
        n += ok as usize;
    }
    n
}

fn monomials(vars: usize, degree: usize) -> Vec<Vec<usize>> {
    if vars == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    (0..=degree)
        .flat_map(|k| {
            monomials(vars - 1, degree - k).into_iter().map(move |mut rest| {
                rest.insert(0, k);
                rest
            })
        })
        .collect()
}

/// Scalar exponent (over the field conductor) and image of `x^a` under element `g`,
/// for the action on `Sym(V)` (`sign = 1`) or on `Sym(V*)` (`sign = -1`).
fn act_monomial(g: &MonomialGroup, x: usize, v: &Block, a: &[usize], sign: i64) -> (Vec<usize>, i64) {
    let m = g.element(x);
    let f = (g.field() / g.conductor()) as i64;
    let mut img = vec![0; v.len];
    let mut s = 0;
    for (jj, &k) in a.iter().enumerate() {
        let j = v.start + jj;
        img[m.perm[j] - v.start] += k;
        s += sign * m.exps[j] as i64 * f * k as i64;
    }
    (img, s)
}

fn poly_dim_oracle(g: &MonomialGroup, v: &Block, w: &Block, e: usize) -> usize {
    let basis: Vec<(Vec<usize>, usize)> = monomials(v.len, e).into_iter().flat_map(|a| w.range().map(move |k| (a.clone(), k))).collect();
    let f = (g.field() / g.conductor()) as i64;
    count_invariants(g.order(), g.field() as i64, &basis, |x, (a, k)| {
        let (img, s) = act_monomial(g, x, v, a, -1);
        let m = g.element(x);
        ((img, m.perm[*k]), s + m.exps[*k] as i64 * f)
    })
}

/// All homomorphisms to `Z/N`, by brute force over values on the generators.
fn oracle_characters(g: &MonomialGroup) -> Vec<Vec<i64>> {
    let n = g.field() as i64;
    let gens: Vec<usize> = g.generators().iter().map(|m| (0..g.order()).find(|&i| g.element(i) == m).expect("generator")).collect();
    let mut out = Vec::new();
    let total = (n as usize).pow(gens.len() as u32);
    'tuple: for code in 0..total {
        let vals: Vec<i64> = (0..gens.len()).map(|i| (code / (n as usize).pow(i as u32) % n as usize) as i64).collect();
        let mut chi: Vec<Option<i64>> = vec![None; g.order()];
        chi[0] = Some(0);
        let mut stack = vec![0usize];
        while let Some(x) = stack.pop() {
            for (gi, &s) in gens.iter().enumerate() {
                let y = g.mul(x, s);
                let val = (chi[x].expect("visited") + vals[gi]).rem_euclid(n);
                match chi[y] {
                    None => {
                        chi[y] = Some(val);
                        stack.push(y);
                    }
                    Some(old) if old != val => continue 'tuple,
                    _ => {}
                }
            }
        }
        out.push(chi.into_iter().map(|c| c.expect("generated")).collect());
    }
    out
}

fn fo_degree_oracle(g: &MonomialGroup, v: &Block, w: &Block, bound: usize) -> Option<usize> {
    let n = g.field() as i64;
    let f = (g.field() / g.conductor()) as i64;
    let chars = oracle_characters(g);
    let wbasis: Vec<usize> = w.range().collect();
    let needed: Vec<(Vec<i64>, usize)> = chars
        .into_iter()
        .map(|l| {
            let m = count_invariants(g.order(), n, &wbasis, |x, &k| {
                let el = g.element(x);
                (el.perm[k], el.exps[k] as i64 * f - l[x])
            });
            (l, m)
        })
        .filter(|(_, m)| *m > 0)
        .collect();
    (1..=bound).find(|&d| {
        let basis = monomials(v.len, d);
        needed.iter().all(|(l, m)| count_invariants(g.order(), n, &basis, |x, a| {
            let (img, s) = act_monomial(g, x, v, a, 1);
            (img, s - l[x])
        }) >= *m)
    })
}

fn diag(r: u32, weights: &[u32]) -> std::sync::Arc<MonomialGroup> {
    examples::cyclic_diagonal(r, weights)
}

fn abelian_cases() -> Vec<(String, std::sync::Arc<MonomialGroup>, Block, Block)> {
    let mut out = Vec::new();
    let one = |s| Block { start: s, len: 1 };
    let two = |s| Block { start: s, len: 2 };
    for r in 1..=12u32 {
        for a in 0..r {
            for c in 0..r {
                out.push((format!("mu{r}({a};{c})"), diag(r, &[a, c]), one(0), one(1)));
                for b in a..r {
                    out.push((format!("mu{r}({a},{b};{c})"), diag(r, &[a, b, c]), two(0), one(2)));
                }
            }
        }
    }
    for r in 1..=4u32 {
        for a in 0..r {
            for b in 0..r {
                for c in 0..r {
                    for d in c..r {
                        out.push((format!("mu{r}({a},{b};{c},{d})"), diag(r, &[a, b, c, d]), two(0), two(2)));
                    }
                }
            }
        }
    }
    let mono = |perm: &[usize], exps: &[u32]| Monomial { perm: perm.to_vec(), exps: exps.to_vec() };
    // products of two cyclic groups, acting diagonally on V ⊕ W
    for (r, s) in [(2u32, 2u32), (2, 4), (2, 6), (3, 3), (2, 3)] {
        let m = r * s / num_gcd(r, s);
        for code in 0..(r * s).pow(3) {
            let ws: Vec<(u32, u32)> = (0..3).map(|i| code / (r * s).pow(i) % (r * s)).map(|x| (x % r, x / r)).collect();
            let g1 = mono(&[0, 1, 2], &ws.iter().map(|w| w.0 * (m / r)).collect::<Vec<_>>());
            let g2 = mono(&[0, 1, 2], &ws.iter().map(|w| w.1 * (m / s)).collect::<Vec<_>>());
            let g = MonomialGroup::new(3, m, vec![g1, g2]).expect("product group");
            if g.order() <= 12 {
                out.push((format!("mu{r}xmu{s}{ws:?}"), g, two(0), one(2)));
            }
        }
    }
    // non-diagonal monomial actions
    let swaps: Vec<(&str, u32, Vec<Monomial>)> = vec![
        ("swap;triv", 2, vec![mono(&[1, 0, 2], &[0, 0, 0])]),
        ("swap;sign", 2, vec![mono(&[1, 0, 2], &[0, 0, 1])]),
        ("rot4;i", 4, vec![mono(&[1, 0, 2], &[0, 2, 1])]),
        ("rot4;-1", 4, vec![mono(&[1, 0, 2], &[0, 2, 2])]),
        ("swap x -1;sign", 2, vec![mono(&[1, 0, 2], &[0, 0, 1]), mono(&[0, 1, 2], &[1, 1, 0])]),
        ("swap x mu3;w", 3, vec![mono(&[1, 0, 2], &[0, 0, 0]), mono(&[0, 1, 2], &[1, 1, 1])]),
        ("swap x mu3;w2", 6, vec![mono(&[1, 0, 2], &[0, 0, 3]), mono(&[0, 1, 2], &[2, 2, 4])]),
        ("swap.mu6;z", 6, vec![mono(&[1, 0, 2], &[1, 1, 1])]),
    ];
    for (name, m, gens) in swaps {
        out.push((name.to_string(), MonomialGroup::new(3, m, gens).expect("group"), two(0), one(2)));
    }
    out
}

fn num_gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn c7_representation_oracle() -> Verdict {
    let mut problems = Vec::new();
    let (mut cases, mut fo_cases) = (0, 0);
    for (name, g, v, w) in abelian_cases() {
        if g.order() > 12 {
            continue;
        }
        cases += 1;
        let got = poly_dim_by_degree(&g, &v, &w, 8).expect("abelian");
        let want: Vec<i64> = (0..=8).map(|e| poly_dim_oracle(&g, &v, &w, e) as i64).collect();
        if got != want {
            problems.push(format!("{name}: polyDim by degree {got:?}, oracle {want:?}"));
        }
        let bound = g.order() * w.len;
        let faithful = (1..g.order()).all(|x| {
            let m = g.element(x);
            v.range().any(|j| m.perm[j] != j || m.exps[j] != 0)
        });
        assert_eq!(faithful, is_faithful(&g, &v));
        let want = if faithful { fo_degree_oracle(&g, &v, &w, 3 * bound) } else { None };
        match (fo_degree(&g, &v, &w), want) {
            (Ok(d), Some(e)) if d == e => fo_cases += 1,
            (Err(GroupError::NotFaithful), None) => {}
            (got, want) => problems.push(format!("{name}: foDegree {got:?}, oracle {want:?}")),
        }
    }
    verdict(&problems, format!("{cases} representations, {fo_cases} with a degree, degrees 0..=8"))
}

fn destack(args: &[&str], dir: &Path) -> (i32, Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_destack"))
        .args(args)
        .current_dir(dir)
        .env_remove("DESTACK_BUDGET")
        .output()
        .expect("run destack");
    (out.status.code().unwrap_or(-1), out.stdout, out.stderr)
}

fn c8_determinism(entries: &[CorpusEntry], outs: &[Output]) -> Verdict {
    let mut problems = Vec::new();
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let mut runs = 0;
    for (i, (e, o)) in entries.iter().zip(outs).enumerate() {
        if let Err((k, m)) = replay(&e.fan, &o.trace) {
            problems.push(format!("{}: library replay failed at step {k}: {m}", e.name));
        }
        let fan = format!("fan{i}.json");
        std::fs::write(d.join(&fan), io::fan_to_string(&e.fan)).expect("write fan");
        let mut first: Option<(Vec<u8>, Vec<u8>, Vec<u8>)> = None;
        for rep in 0..2 {
            let (code, stdout, _) = destack(&["destackify", &fan, "--trace", &format!("t{i}.jsonl"), "--emit-dot", &format!("g{i}.dot")], d);
            runs += 1;
            if code != 0 {
                problems.push(format!("{}: destackify exited {code}", e.name));
                break;
            }
            let trace = std::fs::read(d.join(format!("t{i}.jsonl"))).expect("trace");
            let dot = std::fs::read(d.join(format!("g{i}.dot"))).expect("dot");
            if rep == 0 {
                if stdout != io::fan_to_string(&o.fan).into_bytes() {
                    problems.push(format!("{}: CLI output differs from the library result", e.name));
                }
                first = Some((stdout, trace, dot));
            } else if first.as_ref() != Some(&(stdout, trace, dot)) {
                problems.push(format!("{}: rerun produced different bytes", e.name));
            }
        }
        let (code, stdout, _) = destack(&["replay", &fan, &format!("t{i}.jsonl")], d);
        runs += 1;
        let expected = format!("verified {}\n", fan_hash(&o.fan));
        if code != 0 || stdout != expected.as_bytes() {
            problems.push(format!("{}: replay exited {code}: {}", e.name, String::from_utf8_lossy(&stdout)));
        }
    }
    let f = |p: &str| fixtures.join(p).to_string_lossy().into_owned();
    let commands: Vec<Vec<String>> = vec![
        vec!["validate".into(), f("fans/a1.json")],
        vec!["--json".into(), "validate".into(), f("fans/two_charts.json")],
        vec!["invariants".into(), f("fans/p123.json")],
        vec!["--json".into(), "invariants".into(), f("fans/quarter_1_4_11.json")],
        vec!["ordna".into(), f("groups/s3_sign_standard.json")],
        vec!["--json".into(), "ordna".into(), f("groups/q8.json")],
        vec!["abelianize-demo".into(), f("groups/a4.json")],
        vec!["--json".into(), "abelianize-demo".into(), f("groups/s3_standard.json")],
        vec!["polydim".into(), f("groups/z2_swap_to_sign.json"), "--v".into(), "V".into(), "--w".into(), "W".into(), "--degree".into(), "8".into()],
        vec!["fo-degree".into(), f("groups/mu4_1_to_3.json"), "--v".into(), "V".into(), "--w".into(), "W".into()],
    ];
    for args in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = destack(&args, d);
        let b = destack(&args, d);
        runs += 2;
        if a.0 != 0 || a != b {
            problems.push(format!("{args:?}: exit {} / {}, identical = {}", a.0, b.0, a == b));
        }
    }
    verdict(&problems, format!("{} traces replayed, {runs} CLI runs", entries.len()))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn main() {
    let entries = corpus::full_corpus();
    let ((v1, outs), t1) = timed(|| c1_endpoint(&entries));
    let mut results = vec![("1 endpoint smoothness", v1, t1)];
    let mut run = |name, f: &dyn Fn() -> Verdict| {
        let (v, t) = timed(f);
        results.push((name, v, t));
    };
    run("2 strict lex decrease", &|| c2_strict_decrease(&entries));
    run("3 smoothness cross-check", &|| c3_crosscheck(&entries, &outs));
    run("4 functoriality", &c4_functoriality);
    run("5 abelianization decrease", &c5_abelianization);
    run("6 semi-continuity", &|| c6_semicontinuity(&entries, &outs));
    run("7 representation-dimension oracle", &c7_representation_oracle);
    run("8 determinism and replay", &|| c8_determinism(&entries, &outs));
    let mut failed = 0;
    for (name, v, t) in &results {
        println!("criterion {name}: {} ({}) [{:.1} s]", if v.pass { "PASS" } else { "FAIL" }, v.detail, t.as_secs_f64());
        failed += !v.pass as usize;
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
