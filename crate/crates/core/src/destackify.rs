//! Destackification of stacky fans: divisorialification, Algorithm A on
//! divisorial-type models, D-divisorial annihilation and the master loop.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::intlat;
use crate::invariants::{self, ConeInvariants, DivisorialType, InvariantError, LexInvariant};
use crate::stackyfan::{
    self, apply_action, canonical_form, fan_hash, restrict_to_subfan, saturated_coords, Cone, FanError, Ray,
    StackyFan, Step, StepAction, StepTrace,
};

pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Error)]
pub enum DestackError {
    #[error("step budget of {budget} exhausted")]
    BudgetExceeded { budget: usize, trace: Box<StepTrace>, fan: Box<StackyFan> },
    #[error("divisorial type is empty")]
    EmptyType,
    #[error("label mismatch: {0}")]
    LabelMismatch(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Invariant(#[from] InvariantError),
    #[error(transparent)]
    Fan(#[from] FanError),
}

impl From<intlat::LatticeError> for DestackError {
    fn from(e: intlat::LatticeError) -> Self {
        DestackError::Invariant(e.into())
    }
}

pub type Result<T> = std::result::Result<T, DestackError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Divisorialify,
    LexLoop,
    AlgorithmA,
    DDivAnnihilate,
    Done,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::Divisorialify => "divisorialify",
            Phase::LexLoop => "lex-loop",
            Phase::AlgorithmA => "algorithm-a",
            Phase::DDivAnnihilate => "d-div-annihilate",
            Phase::Done => "done",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Config {
    pub budget: usize,
    /// Verify the monotonicity claims and the smoothness cross-check while running.
    pub check: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config { budget: DEFAULT_BUDGET, check: false }
    }
}

/// Findings of the runtime checks. `failures` is empty when every claim held.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    /// Maximal lex invariant at the start of each master-loop iteration, and at the end.
    pub lex_sequence: Vec<LexInvariant>,
    /// Maximal divisorial index before and after each divisorialification round.
    pub divisorial_rounds: Vec<(usize, usize)>,
    /// Divisor order and maximal D-divisorial index of each annihilation round.
    pub annihilation_rounds: Vec<(u64, BigInt)>,
    /// Cones on which the smoothness cross-check was evaluated.
    pub cones_checked: usize,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Output {
    pub fan: StackyFan,
    pub trace: StepTrace,
    pub report: Report,
}

type InvMap = BTreeMap<Cone, ConeInvariants>;

struct Run {
    fan: StackyFan,
    trace: StepTrace,
    config: Config,
    report: Report,
    cache: InvCache,
}

/// One blow-up round: each center with the ray that became its exceptional divisor.
struct Round {
    centers: Vec<(Cone, usize)>,
}

impl Round {
    /// The cone before the round that a cone after the round subdivides.
    fn parent(&self, c: &[usize]) -> Cone {
        let mut p: BTreeSet<usize> = c.iter().copied().filter(|i| !self.centers.iter().any(|(_, r)| r == i)).collect();
        for (ctr, r) in &self.centers {
            if c.contains(r) {
                p.extend(ctr.iter().copied());
            }
        }
        p.into_iter().collect()
    }

    fn touches(&self, c: &[usize]) -> bool {
        self.centers.iter().any(|(_, r)| c.contains(r))
    }
}

/// Everything the invariants of a cone depend on.
type CacheKey = (Cone, Vec<(Vec<BigInt>, bool, u64)>);

#[derive(Default)]
struct InvCache {
    map: HashMap<CacheKey, ConeInvariants>,
}

impl InvCache {
    fn get(&mut self, f: &StackyFan, c: &[usize]) -> Result<ConeInvariants> {
        let key = (c.to_vec(), c.iter().map(|&i| (f.ray(i).beta.clone(), f.ray(i).in_d, f.ray(i).order)).collect());
        if let Some(ci) = self.map.get(&key) {
            return Ok(ci.clone());
        }
        let ci = invariants::cone_invariants(f, c)?;
        self.map.insert(key, ci.clone());
        Ok(ci)
    }

    fn all(&mut self, f: &StackyFan) -> Result<InvMap> {
        let mut m = BTreeMap::new();
        for c in f.cones() {
            m.insert(c.clone(), self.get(f, c)?);
        }
        Ok(m)
    }
}

impl Run {
    fn new(fan: StackyFan, config: Config) -> Run {
        let trace = StepTrace { input_hash: fan_hash(&fan), steps: Vec::new() };
        Run { fan, trace, config, report: Report::default(), cache: InvCache::default() }
    }

    fn act(&mut self, phase: Phase, action: StepAction, before: &str) -> Result<()> {
        if self.trace.steps.len() >= self.config.budget {
            return Err(DestackError::BudgetExceeded {
                budget: self.config.budget,
                trace: Box::new(self.trace.clone()),
                fan: Box::new(self.fan.clone()),
            });
        }
        self.fan = apply_action(&self.fan, &action)?;
        self.trace.steps.push(Step {
            phase: phase.to_string(),
            action,
            invariant_before: before.to_string(),
            invariant_after: String::new(),
            fan_hash_after: fan_hash(&self.fan),
        });
        Ok(())
    }

    /// Fills in the after-snapshot of the steps recorded since `start`.
    fn close(&mut self, start: usize, after: &str) {
        for s in &mut self.trace.steps[start..] {
            s.invariant_after = after.to_string();
        }
    }

    fn fail(&mut self, msg: String) {
        self.report.failures.push(msg);
    }

    fn crosscheck(&mut self, inv: &InvMap) {
        if !self.config.check {
            return;
        }
        for (c, ci) in inv {
            self.report.cones_checked += 1;
            if (ci.independence_violations() == 0) != self.fan.is_coarse_smooth(c) {
                let msg = format!("cone {c:?}: independence index {} disagrees with the smoothness oracle", ci.independence_violations());
                self.fail(msg);
            }
        }
    }

    fn check_disjoint(&self, centers: &[Cone]) -> Result<()> {
        for (a, x) in centers.iter().enumerate() {
            for y in &centers[a + 1..] {
                let mut u: Cone = x.iter().chain(y).copied().collect();
                u.sort_unstable();
                u.dedup();
                if self.fan.has_cone(&u) {
                    return Err(DestackError::Internal(format!("centers {x:?} and {y:?} share a cone")));
                }
            }
        }
        Ok(())
    }

    /// Blows up all centers with one shared exceptional order. A one-ray
    /// center is its own exceptional divisor and is re-marked into D.
    fn blow_up_round(&mut self, phase: Phase, centers: BTreeSet<Cone>, distinguished: bool, before: &str) -> Result<Round> {
        let centers: Vec<Cone> = centers.into_iter().collect();
        self.check_disjoint(&centers)?;
        let order = self.fan.next_order();
        let mut out = Vec::new();
        let (rays, cones): (Vec<Cone>, Vec<Cone>) = centers.into_iter().partition(|c| c.len() == 1);
        if !rays.is_empty() {
            let list: Vec<usize> = rays.iter().map(|c| c[0]).collect();
            self.act(phase, StepAction::Mark { rays: list, order, in_d: true, distinguished }, before)?;
            out.extend(rays.into_iter().map(|c| (c.clone(), c[0])));
        }
        for tau in cones {
            self.act(phase, StepAction::StarSubdivision { center: tau.clone(), order, distinguished }, before)?;
            out.push((tau, self.fan.rays().len() - 1));
        }
        Ok(Round { centers: out })
    }

    fn any_distinguished(&self) -> bool {
        self.fan.rays().iter().any(|r| r.distinguished)
    }

    fn divisorialify(&mut self) -> Result<()> {
        loop {
            let inv = self.cache.all(&self.fan)?;
            self.crosscheck(&inv);
            let mx = inv.values().map(|c| c.divisorial_index()).max().unwrap_or(0);
            if mx == 0 {
                return Ok(());
            }
            let centers: BTreeSet<Cone> =
                inv.values().filter(|c| c.divisorial_index() == mx).map(|c| c.residual_outside.clone()).collect();
            let start = self.trace.steps.len();
            let dist = self.any_distinguished();
            self.blow_up_round(Phase::Divisorialify, centers, dist, &format!("divisorial index {mx}"))?;
            let after = self.cache.all(&self.fan)?.values().map(|c| c.divisorial_index()).max().unwrap_or(0);
            self.close(start, &format!("divisorial index {after}"));
            self.report.divisorial_rounds.push((mx, after));
            if after >= mx {
                self.fail(format!("divisorialification round did not decrease the index: {mx} -> {after}"));
            }
        }
    }

    /// Cones where a distinguished ray fails the independence condition.
    fn bad_cones(&mut self) -> Result<Vec<Cone>> {
        let mut bad = Vec::new();
        for c in self.fan.cones() {
            if !c.iter().any(|&i| self.fan.ray(i).distinguished) {
                continue;
            }
            let ci = self.cache.get(&self.fan, c)?;
            if ci.dependent_rays.iter().any(|&i| self.fan.ray(i).distinguished) {
                if self.fan.is_coarse_smooth(c) {
                    return Err(DestackError::Internal(format!("cone {c:?} is smooth but has a dependent character")));
                }
                bad.push(c.clone());
            }
        }
        Ok(bad)
    }

    /// Subdivides minimal bad cones at root-stacked parallelepiped points until
    /// every distinguished character is independent at every cone.
    fn algorithm_a(&mut self) -> Result<()> {
        loop {
            let bad = self.bad_cones()?;
            if bad.is_empty() {
                return Ok(());
            }
            let tau = bad
                .iter()
                .filter(|c| !bad.iter().any(|d| d.len() < c.len() && stackyfan::is_subcone(d, c)))
                .min_by_key(|c| {
                    let mut orders: Vec<u64> = c.iter().map(|&i| self.fan.ray(i).order).collect();
                    orders.sort_unstable();
                    (c.len(), orders, (*c).clone())
                })
                .expect("nonempty")
                .clone();
            let before = format!("{} bad cones", bad.len());
            let start = self.trace.steps.len();
            for (i, d) in root_orders(&self.fan, &tau) {
                if d > 1 {
                    self.act(Phase::AlgorithmA, StepAction::RootStack { ray: i, d }, &before)?;
                }
            }
            let order = self.fan.next_order();
            self.act(Phase::AlgorithmA, StepAction::StarSubdivision { center: tau, order, distinguished: true }, &before)?;
            let after = format!("{} bad cones", self.bad_cones()?.len());
            self.close(start, &after);
        }
    }

    fn annihilate(&mut self) -> Result<()> {
        loop {
            let inv = self.cache.all(&self.fan)?;
            self.crosscheck(&inv);
            if inv.values().any(|c| c.divisorial_index() != 0) {
                return Err(DestackError::Internal("annihilation started on a non-divisorial fan".into()));
            }
            let orders: BTreeSet<u64> = self.fan.rays().iter().filter(|r| r.in_d && r.distinguished).map(|r| r.order).collect();
            let mut target = None;
            for &k in &orders {
                let mut vals = BTreeMap::new();
                for (c, ci) in &inv {
                    vals.insert(c.clone(), ci.d_div_index(&self.fan, k)?);
                }
                let mx = vals.values().map(|v| v.0.clone()).max().unwrap_or_default();
                if mx > BigInt::zero() {
                    target = Some((k, vals, mx));
                    break;
                }
            }
            let Some((k, vals, mx)) = target else { return Ok(()) };
            let mut centers = BTreeSet::new();
            for (c, (v, nz)) in &vals {
                if *v == mx {
                    let d = *inv[c].divisor_rays.iter().find(|&&i| self.fan.ray(i).order == k).expect("cone meets D");
                    let mut ctr = nz.clone();
                    ctr.push(d);
                    ctr.sort_unstable();
                    centers.insert(ctr);
                }
            }
            let old = self.fan.clone();
            let start = self.trace.steps.len();
            let round = self.blow_up_round(Phase::DDivAnnihilate, centers, true, &format!("D-div index {mx} at order {k}"))?;
            self.report.annihilation_rounds.push((k, mx.clone()));
            let exceptional = self.fan.ray(round.centers[0].1).order;
            let inv2 = self.cache.all(&self.fan)?;
            let after = inv2.values().map(|ci| ci.d_div_index(&self.fan, k).map(|x| x.0)).collect::<std::result::Result<Vec<_>, _>>()?;
            let after = after.into_iter().max().unwrap_or_default();
            self.close(start, &format!("D-div index {after} at order {k}"));
            if self.config.check {
                self.check_claims(&old, &inv, &inv2, &round, &orders, k, exceptional, &mx)?;
            }
        }
    }

    /// Per-cone comparison with the parent cone: other distinguished divisors do
    /// not get worse, the processed divisor improves, and the exceptional divisor
    /// starts below the processed maximum.
    #[allow(clippy::too_many_arguments)]
    fn check_claims(
        &mut self,
        old: &StackyFan,
        inv: &InvMap,
        inv2: &InvMap,
        round: &Round,
        orders: &BTreeSet<u64>,
        k: u64,
        exceptional: u64,
        mx: &BigInt,
    ) -> Result<()> {
        for (c, ci) in inv2 {
            if !round.touches(c) {
                continue;
            }
            let parent = round.parent(c);
            let Some(pci) = inv.get(&parent) else {
                return Err(DestackError::Internal(format!("cone {c:?} has no parent cone {parent:?}")));
            };
            for &kk in orders {
                let a = ci.d_div_index(&self.fan, kk)?.0;
                let b = pci.d_div_index(old, kk)?.0;
                if a > b {
                    self.fail(format!("cone {c:?}: D-div index at order {kk} rose from {b} to {a}"));
                }
                if kk == k && !(a < b || b.is_zero()) {
                    self.fail(format!("cone {c:?}: D-div index at order {k} did not drop ({b} -> {a})"));
                }
            }
            let a = ci.d_div_index(&self.fan, exceptional)?.0;
            if &a >= mx {
                self.fail(format!("cone {c:?}: exceptional divisor has D-div index {a}, not below {mx}"));
            }
        }
        Ok(())
    }

    /// Rays of D grouped by order, for rays selected by `pick`.
    fn divisors_where(&self, pick: impl Fn(&Ray) -> bool) -> BTreeMap<u64, Vec<usize>> {
        let mut out: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, r) in self.fan.rays().iter().enumerate() {
            if r.in_d && pick(r) {
                out.entry(r.order).or_default().push(i);
            }
        }
        out
    }

    /// Makes every divisor of order at least `lo` distinguished, from the top
    /// down so the distinguished set stays an upper set after each step.
    fn mark_distinguished_from(&mut self, lo: Option<u64>, before: &str) -> Result<()> {
        let Some(lo) = lo else { return Ok(()) };
        let todo = self.divisors_where(|r| !r.distinguished && r.order >= lo);
        for (order, rays) in todo.into_iter().rev() {
            self.act(Phase::LexLoop, StepAction::Mark { rays, order, in_d: true, distinguished: true }, before)?;
        }
        Ok(())
    }

    /// Clears the distinguished marks, from the bottom up.
    fn forget_distinguished(&mut self, before: &str) -> Result<()> {
        let todo = self.divisors_where(|r| r.distinguished);
        for (order, rays) in todo {
            self.act(Phase::LexLoop, StepAction::Mark { rays, order, in_d: true, distinguished: false }, before)?;
        }
        Ok(())
    }

    /// Replays a model trace on the ambient fan inside `region`, translating
    /// model rays to divisor orders.
    fn lift(&mut self, model: &StackyFan, model_trace: &StepTrace, mut region: BTreeSet<Cone>, before: &str) -> Result<()> {
        let mut labels: Vec<Option<u64>> = model.rays().iter().map(|r| Some(r.order)).collect();
        for s in &model_trace.steps {
            match &s.action {
                StepAction::RootStack { ray, d } => {
                    let Some(k) = *labels.get(*ray).ok_or_else(|| DestackError::LabelMismatch(format!("model ray {ray}")))? else {
                        continue;
                    };
                    let touched: BTreeSet<usize> = region.iter().flatten().copied().collect();
                    for i in touched {
                        let r = self.fan.ray(i);
                        if r.in_d && r.order == k {
                            self.act(Phase::AlgorithmA, StepAction::RootStack { ray: i, d: *d }, before)?;
                        }
                    }
                }
                StepAction::StarSubdivision { center, .. } => {
                    let keys: Option<Vec<u64>> = center
                        .iter()
                        .map(|&j| labels.get(j).copied().ok_or_else(|| DestackError::LabelMismatch(format!("model ray {j}"))))
                        .collect::<Result<Vec<_>>>()?
                        .into_iter()
                        .collect();
                    let Some(mut keys) = keys else {
                        labels.push(None);
                        continue;
                    };
                    keys.sort_unstable();
                    let mut centers = BTreeSet::new();
                    for s in &region {
                        let sel: Cone = s.iter().copied().filter(|&i| self.fan.ray(i).in_d && keys.contains(&self.fan.ray(i).order)).collect();
                        let mut got: Vec<u64> = sel.iter().map(|&i| self.fan.ray(i).order).collect();
                        got.sort_unstable();
                        if got == keys {
                            centers.insert(sel);
                        }
                    }
                    if centers.is_empty() {
                        labels.push(None);
                        continue;
                    }
                    let old: BTreeSet<Cone> = self.fan.cones().clone();
                    let round = self.blow_up_round(Phase::AlgorithmA, centers, true, before)?;
                    labels.push(Some(self.fan.ray(round.centers[0].1).order));
                    let mut next = BTreeSet::new();
                    for c in self.fan.cones() {
                        if old.contains(c) && !round.touches(c) {
                            if region.contains(c) {
                                next.insert(c.clone());
                            }
                        } else if region.contains(&round.parent(c)) {
                            next.insert(c.clone());
                        }
                    }
                    region = next;
                }
                StepAction::Mark { .. } => return Err(DestackError::LabelMismatch("mark step in a model trace".into())),
            }
        }
        Ok(())
    }

    fn destackify_all(&mut self) -> Result<()> {
        self.divisorialify()?;
        let mut prev: Option<LexInvariant> = None;
        loop {
            let inv = self.cache.all(&self.fan)?;
            self.crosscheck(&inv);
            let mx = inv.values().map(|c| c.lex()).max().unwrap_or_default();
            self.report.lex_sequence.push(mx.clone());
            if let Some(p) = &prev {
                if mx >= *p {
                    self.fail(format!("lex invariant did not decrease: {p} -> {mx}"));
                }
            }
            if mx.violations == 0 {
                return Ok(());
            }
            let before = format!("lex {mx}");
            let start = self.trace.steps.len();
            prev = Some(mx.clone());
            let region: BTreeSet<Cone> = inv.iter().filter(|(_, ci)| ci.lex() == mx).map(|(c, _)| c.clone()).collect();
            let c0 = region.iter().min_by_key(|c| (c.len(), (*c).clone())).expect("nonempty region").clone();
            let dt = &inv[&c0].divisorial_type;
            let lo = dt.entries().iter().map(|(k, _)| *k).min();
            if !dt.is_empty() {
                let model = divisorial_type_fan(dt)?;
                let mut sub = Run::new(model.clone(), Config { budget: self.config.budget, check: false });
                sub.algorithm_a()?;
                self.lift(&model, &sub.trace, region, &before)?;
            }
            self.mark_distinguished_from(lo, &before)?;
            self.algorithm_a()?;
            self.divisorialify()?;
            self.annihilate()?;
            self.forget_distinguished(&before)?;
            if self.trace.steps.len() == start {
                return Err(DestackError::Internal(format!("no progress at lex {mx}")));
            }
            let after = self.cache.all(&self.fan)?.values().map(|c| c.lex()).max().unwrap_or_default();
            self.close(start, &format!("lex {after}"));
        }
    }

    fn finish(self) -> Output {
        Output { fan: self.fan, trace: self.trace, report: self.report }
    }
}

/// Root-stack orders for subdividing `tau`: the minimal nonzero point `Σ λ_i u_i`
/// of the coarse parallelepiped, scaled so each `t·λ_i` is a multiple of `β_i`'s multiplicity.
fn root_orders(f: &StackyFan, tau: &[usize]) -> Vec<(usize, u64)> {
    let (nums, den) = parallelepiped_point(f, tau);
    let mults: Vec<BigInt> = tau.iter().map(|&i| f.ray(i).multiplicity()).collect();
    let mut t = BigInt::one();
    for (n, m) in nums.iter().zip(&mults) {
        let full = &den * m;
        let req = &full / n.gcd(&full);
        t = t.lcm(&req);
    }
    tau.iter()
        .zip(nums.iter().zip(&mults))
        .map(|(&i, (n, m))| {
            let d = &t * n / (&den * m);
            (i, u64::try_from(&d).expect("root order fits in u64"))
        })
        .collect()
}

/// The nonzero point of `N ∩ {Σ λ_i u_i : 0 ≤ λ_i < 1}` minimizing `(Σ λ_i, λ)`,
/// where `u_i` are the primitive generators. Returned as numerators over a common denominator.
pub fn parallelepiped_point(f: &StackyFan, tau: &[usize]) -> (Vec<BigInt>, BigInt) {
    let prims: Vec<Vec<BigInt>> = tau.iter().map(|&i| f.ray(i).primitive()).collect();
    let c = saturated_coords(&prims, f.rank());
    let det = c.det();
    let den = det.abs();
    let sign = if det.is_negative() { -BigInt::one() } else { BigInt::one() };
    let adj = c.adjugate();
    let k = tau.len();
    let gens: Vec<Vec<BigInt>> = (0..k).map(|j| (0..k).map(|i| (adj.get(i, j) * &sign).mod_floor(&den)).collect()).collect();
    let zero = vec![BigInt::zero(); k];
    let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    seen.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y: Vec<BigInt> = x.iter().zip(g).map(|(a, b)| (a + b).mod_floor(&den)).collect();
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    let best = seen
        .into_iter()
        .filter(|x| x.iter().any(|v| !v.is_zero()))
        .min_by_key(|x| (x.iter().sum::<BigInt>(), x.clone()))
        .expect("non-smooth cone has a nonzero parallelepiped point");
    (best, den)
}

/// The one-cone model fan of a divisorial type: ray `t` has `β` equal to row
/// `t` of the Hermite basis of `K`, and carries the divisor's order.
pub fn divisorial_type_fan(dt: &DivisorialType) -> Result<StackyFan> {
    if dt.is_empty() {
        return Err(DestackError::EmptyType);
    }
    let h = dt.hnf();
    let m = dt.entries().len();
    let rays = dt
        .entries()
        .iter()
        .enumerate()
        .map(|(t, (k, _))| Ray { beta: h.row(t), order: *k, in_d: true, distinguished: true })
        .collect();
    Ok(StackyFan::new(m, rays, &[(0..m).collect()])?)
}

pub fn divisorialify(f: &StackyFan, config: Config) -> Result<Output> {
    let mut run = Run::new(f.clone(), config);
    run.divisorialify()?;
    Ok(run.finish())
}

/// Algorithm A on a fan with distinguished marks.
pub fn algorithm_a(f: &StackyFan, config: Config) -> Result<Output> {
    let mut run = Run::new(f.clone(), config);
    run.algorithm_a()?;
    Ok(run.finish())
}

/// Translates a model trace to the ambient fan, acting on the cones of `region`
/// (every cone when `region` is `None`). Returns the ambient output.
pub fn lift_steps(ambient: &StackyFan, model: &StackyFan, trace: &StepTrace, region: Option<&[Cone]>, config: Config) -> Result<Output> {
    let mut run = Run::new(ambient.clone(), config);
    let region: BTreeSet<Cone> = match region {
        Some(r) => r.iter().cloned().collect(),
        None => ambient.cones().clone(),
    };
    run.lift(model, trace, region, "lift")?;
    Ok(run.finish())
}

pub fn annihilate_d_div(f: &StackyFan, config: Config) -> Result<Output> {
    let mut run = Run::new(f.clone(), config);
    run.annihilate()?;
    Ok(run.finish())
}

/// The full pipeline: divisorialify, then iterate the lex loop until every
/// cone is smooth.
pub fn destackify_all(f: &StackyFan, config: Config) -> Result<Output> {
    let mut run = Run::new(f.clone(), config);
    run.destackify_all()?;
    Ok(run.finish())
}

/// For each ray of the fan produced by `trace`, the smallest cone of the input
/// fan whose relative interior contains it.
pub fn ray_carriers(input: &StackyFan, trace: &StepTrace) -> Vec<Cone> {
    let mut carriers: Vec<Cone> = (0..input.rays().len()).map(|i| vec![i]).collect();
    for s in &trace.steps {
        if let StepAction::StarSubdivision { center, .. } = &s.action {
            let u: BTreeSet<usize> = center.iter().flat_map(|&i| carriers[i].iter().copied()).collect();
            carriers.push(u.into_iter().collect());
        }
    }
    carriers
}

/// The cones of `out` whose carrier lies in `sub`, as a face-closed subfan.
pub fn restrict_along_trace(input: &StackyFan, out: &Output, sub: &[Cone]) -> Result<StackyFan> {
    let carriers = ray_carriers(input, &out.trace);
    let sub: BTreeSet<Cone> = sub.iter().map(|c| {
        let mut c = c.clone();
        c.sort_unstable();
        c
    }).collect();
    let keep: Vec<Cone> = out
        .fan
        .cones()
        .iter()
        .filter(|c| {
            let u: BTreeSet<usize> = c.iter().flat_map(|&i| carriers[i].iter().copied()).collect();
            sub.contains(&u.into_iter().collect::<Vec<_>>())
        })
        .cloned()
        .collect();
    Ok(restrict_to_subfan(&out.fan, &keep)?.0)
}

/// Renumbers orders densely (preserving their relative order) and returns the
/// canonical text form, so fans from different runs can be compared.
pub fn normalized_form(f: &StackyFan) -> String {
    let orders: BTreeSet<u64> = f.rays().iter().map(|r| r.order).collect();
    let rank: BTreeMap<u64, u64> = orders.into_iter().enumerate().map(|(n, o)| (o, n as u64)).collect();
    let mut g = f.clone();
    for i in 0..f.rays().len() {
        let r = f.ray(i);
        g = g.with_marks(i, rank[&r.order], r.in_d, r.distinguished);
    }
    canonical_form(&g)
}

/// The coarse fan: the set of cones, each as its sorted primitive generators.
pub fn coarse_form(f: &StackyFan) -> BTreeSet<Vec<Vec<BigInt>>> {
    f.cones()
        .iter()
        .map(|c| {
            let mut v: Vec<Vec<BigInt>> = c.iter().map(|&i| f.ray(i).primitive()).collect();
            v.sort();
            v
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctorialityOutcome {
    /// Exact structural equality of the two stacky fans.
    pub equal: bool,
    /// Equality of the underlying coarse fans only.
    pub coarse_equal: bool,
}

/// Compares `destackify_all(restrict(f, sub))` with the restriction of
/// `destackify_all(f)` to the cones lying over `sub`.
pub fn functoriality_check(f: &StackyFan, sub: &[Cone], config: Config) -> Result<FunctorialityOutcome> {
    let whole = destackify_all(f, config)?;
    let over = restrict_along_trace(f, &whole, sub)?;
    let (restricted, _) = restrict_to_subfan(f, sub)?;
    let local = destackify_all(&restricted, config)?;
    Ok(FunctorialityOutcome {
        equal: normalized_form(&over) == normalized_form(&local.fan),
        coarse_equal: coarse_form(&over) == coarse_form(&local.fan),
    })
}
