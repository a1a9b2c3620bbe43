//! Deduction over finite partial oracles.
//!
//! A finite partial oracle `σ` deduces `Φ(n) = i` at rank 0 when `Φ^σ(n)`
//! halts with `i` inside the budget, and at rank `r + 1` when enough of its
//! 1-extensions deduce the same fact at rank `≤ r`. "Enough" is either a
//! threshold (at least `t` extensions below a position bound `P`, which is an
//! approximation of "infinitely many") or, for counting searches, the exact
//! clause: the relevant positions form an infinite set, so infinitely many
//! 1-extensions fall in one class.
//!
//! [`gamma_step`] applies the closure operator once on an explicit finite
//! universe. [`RankSolver`] computes the same ranks on demand, with memo keys
//! supplied by the functional, so large position bounds stay cheap.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::machine::{run, Functional};
use crate::oracles::{Oracle, OracleEntry};
use crate::rng::SplitMix64;
use crate::sequences::EventuallyPeriodicSet;

/// A finite assignment of bits to positions, with no delays.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FinitePartialOracle(pub BTreeMap<u64, bool>);

impl FinitePartialOracle {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn extend1(&self, position: u64, bit: bool) -> Option<Self> {
        if self.0.contains_key(&position) {
            return None;
        }
        let mut m = self.0.clone();
        m.insert(position, bit);
        Some(FinitePartialOracle(m))
    }

    /// All 1-extensions at positions below `bound`.
    pub fn extensions(&self, bound: u64) -> impl Iterator<Item = Self> + '_ {
        (0..bound).flat_map(move |p| [false, true].into_iter().filter_map(move |b| self.extend1(p, b)))
    }

    pub fn max_position(&self) -> Option<u64> {
        self.0.keys().next_back().copied()
    }
}

impl Oracle for FinitePartialOracle {
    fn entry(&self, position: u64) -> Option<OracleEntry> {
        self.0.get(&position).map(|&bit| OracleEntry { bit, delay: 0 })
    }
}

/// `{3:1,7:0}`; the empty oracle is `{}`.
impl fmt::Display for FinitePartialOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (p, b)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}:{}", *b as u8)?;
        }
        f.write_str("}")
    }
}

impl FromStr for FinitePartialOracle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse { input: s.to_string(), message: m.to_string() };
        let body =
            s.trim().strip_prefix('{').and_then(|r| r.strip_suffix('}')).ok_or_else(|| bad("expected `{p:b,...}`"))?;
        let mut m = BTreeMap::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (p, b) = part.split_once(':').ok_or_else(|| bad("expected `position:bit`"))?;
            let p: u64 = p.trim().parse().map_err(|_| bad("bad position"))?;
            let b = match b.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(bad("bit must be 0 or 1")),
            };
            if m.insert(p, b).is_some() {
                return Err(bad("position assigned twice"));
            }
        }
        Ok(FinitePartialOracle(m))
    }
}

impl Serialize for FinitePartialOracle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FinitePartialOracle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `σ` deduces `Φ(input) = value`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fact {
    pub sigma: FinitePartialOracle,
    pub input: u64,
    pub value: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DeductionMode {
    /// At least `t` qualifying 1-extensions below `position_bound`.
    #[serde(rename_all = "camelCase")]
    Threshold { t: u64, position_bound: u64, budget: u64 },
    /// Counting searches only: the relevant set is infinite.
    #[serde(rename_all = "camelCase")]
    ExactCounting { budget: u64 },
}

impl DeductionMode {
    pub fn budget(&self) -> u64 {
        match *self {
            DeductionMode::Threshold { budget, .. } | DeductionMode::ExactCounting { budget } => budget,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.budget() == 0 {
            return Err(invalid("budget must be at least 1"));
        }
        if let DeductionMode::Threshold { t, .. } = self {
            if *t == 0 {
                return Err(invalid("threshold t must be at least 1"));
            }
        }
        Ok(())
    }
}

/// `max(0, c - d)`, or `None` when `d < c` and the relevant set is finite:
/// then only finitely many 1-extensions converge and nothing is deduced
/// beyond direct convergence.
pub fn exact_rank_counting(c: u64, d: u64, relevant_infinite: bool) -> Option<u64> {
    if d >= c {
        return Some(0);
    }
    relevant_infinite.then(|| c - d)
}

fn counting_profile(f: &Functional) -> Result<(u64, EventuallyPeriodicSet)> {
    f.program()
        .counting_profile()
        .map(|(c, s)| (c, s.clone()))
        .ok_or_else(|| invalid(format!("exact mode needs a counting search, got `{}`", f.id())))
}

// ---------------------------------------------------------------------------
// Explicit universe
// ---------------------------------------------------------------------------

/// Every `σ` with domain inside `[0, position_bound)` and at most `max_size`
/// positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Universe {
    pub position_bound: u64,
    pub max_size: usize,
}

impl Universe {
    pub fn contains(&self, sigma: &FinitePartialOracle) -> bool {
        sigma.len() <= self.max_size && sigma.max_position().is_none_or(|p| p < self.position_bound)
    }

    pub fn enumerate(&self) -> Vec<FinitePartialOracle> {
        let mut out = vec![FinitePartialOracle::empty()];
        let mut frontier = out.clone();
        for _ in 0..self.max_size {
            let mut next = Vec::new();
            for s in &frontier {
                let from = s.max_position().map_or(0, |p| p + 1);
                for p in from..self.position_bound {
                    for b in [false, true] {
                        next.push(s.extend1(p, b).expect("fresh position"));
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out.sort();
        out
    }
}

/// One application of the closure operator on `universe`.
pub fn gamma_step(
    f: &Functional,
    x: &BTreeSet<Fact>,
    mode: &DeductionMode,
    universe: &Universe,
    inputs: &[u64],
) -> Result<BTreeSet<Fact>> {
    mode.validate()?;
    let profile = match mode {
        DeductionMode::ExactCounting { .. } => Some(counting_profile(f)?),
        DeductionMode::Threshold { .. } => None,
    };
    let mut out = x.clone();
    for sigma in universe.enumerate() {
        for &n in inputs {
            let direct = run(f, &sigma, n, mode.budget())?.output();
            for value in [false, true] {
                let fact = Fact { sigma: sigma.clone(), input: n, value };
                if out.contains(&fact) {
                    continue;
                }
                let in_x = |tau: FinitePartialOracle| x.contains(&Fact { sigma: tau, input: n, value });
                let add = direct == Some(value)
                    || match (mode, &profile) {
                        (DeductionMode::Threshold { t, position_bound, .. }, _) => {
                            let bound = (*position_bound).min(universe.position_bound);
                            let hits = sigma
                                .extensions(bound)
                                .filter(|tau| universe.contains(tau))
                                .filter(|tau| in_x(tau.clone()))
                                .count();
                            hits as u64 >= *t
                        }
                        (DeductionMode::ExactCounting { .. }, Some((_, relevant))) => {
                            let rel: Vec<_> = sigma
                                .extensions(universe.position_bound)
                                .filter(|tau| universe.contains(tau))
                                .filter(|tau| tau.0.keys().any(|p| !sigma.0.contains_key(p) && relevant.contains(*p)))
                                .collect();
                            relevant.is_infinite() && !rel.is_empty() && rel.into_iter().all(in_x)
                        }
                        _ => unreachable!("profile present in exact mode"),
                    };
                if add {
                    out.insert(fact);
                }
            }
        }
    }
    Ok(out)
}

/// Iterate [`gamma_step`] from the empty set to its fixpoint; the rank of a
/// fact is the stage that added it.
pub fn closure_explicit(
    f: &Functional,
    mode: &DeductionMode,
    universe: &Universe,
    inputs: &[u64],
) -> Result<BTreeMap<Fact, u64>> {
    let mut ranks = BTreeMap::new();
    let mut x = BTreeSet::new();
    for stage in 0.. {
        let next = gamma_step(f, &x, mode, universe, inputs)?;
        if next.len() == x.len() {
            break;
        }
        for fact in next.difference(&x) {
            ranks.insert(fact.clone(), stage);
        }
        x = next;
    }
    Ok(ranks)
}

// ---------------------------------------------------------------------------
// Demand-driven ranks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Key {
    Abstract(Vec<u64>),
    Raw(Vec<(u64, bool)>),
}

/// Memoised ranks for one functional and mode.
pub struct RankSolver {
    f: Functional,
    mode: DeductionMode,
    profile: Option<(u64, EventuallyPeriodicSet)>,
    memo: HashMap<(u64, bool, Key), Option<u64>>,
    direct: HashMap<(u64, Key), Option<bool>>,
    node_limit: usize,
}

/// Default cap on memo entries before the solver gives up.
pub const DEFAULT_NODE_LIMIT: usize = 2_000_000;

impl RankSolver {
    pub fn new(f: &Functional, mode: DeductionMode) -> Result<Self> {
        mode.validate()?;
        let profile = match mode {
            DeductionMode::ExactCounting { .. } => Some(counting_profile(f)?),
            DeductionMode::Threshold { .. } => None,
        };
        Ok(RankSolver {
            f: f.clone(),
            mode,
            profile,
            memo: HashMap::new(),
            direct: HashMap::new(),
            node_limit: DEFAULT_NODE_LIMIT,
        })
    }

    pub fn with_node_limit(mut self, limit: usize) -> Self {
        self.node_limit = limit;
        self
    }

    fn key(&self, sigma: &BTreeMap<u64, bool>) -> Key {
        let (bound, budget) = match self.mode {
            DeductionMode::Threshold { position_bound, budget, .. } => (position_bound, budget),
            DeductionMode::ExactCounting { .. } => return Key::Raw(sigma.iter().map(|(&p, &b)| (p, b)).collect()),
        };
        match self.f.program().deduction_key(sigma, bound, budget) {
            Some(k) => Key::Abstract(k),
            None => Key::Raw(sigma.iter().map(|(&p, &b)| (p, b)).collect()),
        }
    }

    /// Least rank at which `sigma` deduces `Φ(input) = value`, or `None`.
    pub fn rank(&mut self, sigma: &FinitePartialOracle, input: u64, value: bool) -> Result<Option<u64>> {
        if let DeductionMode::Threshold { position_bound, .. } = self.mode {
            if sigma.max_position().is_some_and(|p| p >= position_bound) {
                return Err(invalid(format!("{sigma} assigns a position at or beyond the bound {position_bound}")));
            }
        }
        let mut s = sigma.0.clone();
        self.rank_of(&mut s, input, value)
    }

    fn rank_of(&mut self, sigma: &mut BTreeMap<u64, bool>, n: u64, value: bool) -> Result<Option<u64>> {
        let key = (n, value, self.key(sigma));
        if let Some(&r) = self.memo.get(&key) {
            return Ok(r);
        }
        if self.memo.len() >= self.node_limit {
            return Err(invalid(format!(
                "deduction search exceeded {} states; lower the position bound or use an exact mode",
                self.node_limit
            )));
        }
        let direct = match self.direct.get(&(n, key.2.clone())) {
            Some(&d) => d,
            None => {
                let fpo = FinitePartialOracle(std::mem::take(sigma));
                let d = run(&self.f, &fpo, n, self.mode.budget())?.output();
                *sigma = fpo.0;
                self.direct.insert((n, key.2.clone()), d);
                d
            }
        };
        let r = if direct == Some(value) {
            Some(0)
        } else {
            match self.mode {
                DeductionMode::Threshold { t, position_bound, .. } => {
                    let mut ranks = Vec::new();
                    for p in 0..position_bound {
                        if sigma.contains_key(&p) {
                            continue;
                        }
                        for b in [false, true] {
                            if let Key::Abstract(k) = &key.2 {
                                let child = self.f.program().extended_key(k, p, b);
                                if let Some(&r) = child.and_then(|c| self.memo.get(&(n, value, Key::Abstract(c)))) {
                                    ranks.extend(r);
                                    continue;
                                }
                            }
                            sigma.insert(p, b);
                            let r = self.rank_of(sigma, n, value);
                            sigma.remove(&p);
                            if let Some(r) = r? {
                                ranks.push(r);
                            }
                        }
                    }
                    ranks.sort_unstable();
                    ranks.get(t as usize - 1).map(|r| r + 1)
                }
                DeductionMode::ExactCounting { .. } => {
                    let (_, relevant) = self.profile.as_ref().expect("exact mode has a profile");
                    if !relevant.is_infinite() {
                        None
                    } else {
                        // the class of relevant 1-extensions is infinite and
                        // uniform; one representative stands for all of it
                        let free = relevant.members_from(0).find(|p| !sigma.contains_key(p)).expect("infinite set");
                        sigma.insert(free, true);
                        let r = self.rank_of(sigma, n, value);
                        sigma.remove(&free);
                        r?.map(|r| r + 1)
                    }
                }
            }
        };
        self.memo.insert(key, r);
        Ok(r)
    }

    pub fn states(&self) -> usize {
        self.memo.len()
    }
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeductionEntry {
    pub sigma: FinitePartialOracle,
    pub input: u64,
    pub value: u8,
    /// `null` when nothing is deduced.
    pub rank: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DeductionTable {
    pub functional: String,
    #[serde(flatten)]
    pub mode: DeductionMode,
    pub closed: bool,
    pub entries: Vec<DeductionEntry>,
    /// Rank → number of deduced entries.
    pub histogram: BTreeMap<u64, u64>,
    pub undeduced: u64,
}

/// Ranks of `Φ(n) = i` for every listed `σ`, input and both values.
pub fn deduction_closure(
    f: &Functional,
    mode: DeductionMode,
    sigmas: &[FinitePartialOracle],
    inputs: &[u64],
) -> Result<DeductionTable> {
    let mut solver = RankSolver::new(f, mode)?;
    let mut entries = Vec::new();
    let mut histogram = BTreeMap::new();
    let mut undeduced = 0;
    for sigma in sigmas {
        for &n in inputs {
            for value in [false, true] {
                let rank = solver.rank(sigma, n, value)?;
                match rank {
                    Some(r) => *histogram.entry(r).or_insert(0) += 1,
                    None => undeduced += 1,
                }
                entries.push(DeductionEntry { sigma: sigma.clone(), input: n, value: value as u8, rank });
            }
        }
    }
    Ok(DeductionTable { functional: f.id(), mode, closed: true, entries, histogram, undeduced })
}

/// A random `σ` inside `[0, bound)` with exactly `relevant_count` positions
/// from `relevant` and `other_count` positions outside it, with random bits.
pub fn random_sigma(
    rng: &mut SplitMix64,
    bound: u64,
    relevant: &EventuallyPeriodicSet,
    relevant_count: usize,
    other_count: usize,
) -> Result<FinitePartialOracle> {
    let (rel, other): (Vec<u64>, Vec<u64>) = (0..bound).partition(|&p| relevant.contains(p));
    if rel.len() < relevant_count || other.len() < other_count {
        return Err(invalid("not enough positions below the bound"));
    }
    let mut m = BTreeMap::new();
    for (pool, k) in [(rel, relevant_count), (other, other_count)] {
        let mut pool = pool;
        // partial Fisher-Yates
        for i in 0..k {
            let j = i + rng.below((pool.len() - i) as u64) as usize;
            pool.swap(i, j);
            m.insert(pool[i], rng.next_bool());
        }
    }
    Ok(FinitePartialOracle(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::parse_functional;

    fn f(s: &str) -> Functional {
        parse_functional(s).unwrap()
    }

    fn sigma(s: &str) -> FinitePartialOracle {
        s.parse().unwrap()
    }

    const SMALL: Universe = Universe { position_bound: 4, max_size: 3 };

    fn threshold(t: u64) -> DeductionMode {
        DeductionMode::Threshold { t, position_bound: 4, budget: 50 }
    }

    #[test]
    fn sigma_text() {
        assert_eq!(sigma("{3:1,7:0}").to_string(), "{3:1,7:0}");
        assert_eq!(sigma("{}"), FinitePartialOracle::empty());
        assert!("{1:2}".parse::<FinitePartialOracle>().is_err());
        assert!("{1:1,1:0}".parse::<FinitePartialOracle>().is_err());
        assert_eq!(serde_json::to_string(&sigma("{0:1}")).unwrap(), "\"{0:1}\"");
    }

    #[test]
    fn universe_enumeration() {
        // 1 + 4·2 + 6·4 + 4·8
        assert_eq!(SMALL.enumerate().len(), 1 + 8 + 24 + 32);
    }

    #[test]
    fn gamma_examples() {
        let any = f("counting(1,all)");
        let x1 = gamma_step(&any, &BTreeSet::new(), &threshold(2), &SMALL, &[0]).unwrap();
        assert!(x1.iter().all(|fact| !fact.sigma.is_empty() && fact.value));
        assert_eq!(x1.len(), SMALL.enumerate().len() - 1);
        let x2 = gamma_step(&any, &x1, &threshold(2), &SMALL, &[0]).unwrap();
        assert!(x2.contains(&Fact { sigma: FinitePartialOracle::empty(), input: 0, value: true }));

        let bit0 = f("halt-if-one(0)");
        let closed = closure_explicit(&bit0, &threshold(2), &SMALL, &[0]).unwrap();
        assert!(!closed.contains_key(&Fact { sigma: FinitePartialOracle::empty(), input: 0, value: true }));
    }

    #[test]
    fn closure_ranks_match_formula() {
        let g = f("counting(3,all)");
        let u = Universe { position_bound: 5, max_size: 4 };
        let mode = DeductionMode::Threshold { t: 2, position_bound: 5, budget: 50 };
        let closed = closure_explicit(&g, &mode, &u, &[0]).unwrap();
        let one = sigma("{2:0}");
        assert_eq!(closed[&Fact { sigma: one.clone(), input: 0, value: true }], 2);
        let mut solver = RankSolver::new(&g, mode).unwrap();
        assert_eq!(solver.rank(&one, 0, true).unwrap(), Some(2));

        let c1 = f("counting(1,all)");
        let mut solver = RankSolver::new(&c1, mode).unwrap();
        assert_eq!(solver.rank(&FinitePartialOracle::empty(), 0, true).unwrap(), Some(1));
        assert_eq!(solver.rank(&sigma("{1:1}"), 0, true).unwrap(), Some(0));
    }

    #[test]
    fn solver_agrees_with_explicit_closure() {
        let u = Universe { position_bound: 4, max_size: 4 };
        for fs in ["counting(2,all)", "counting(2,ep:/10)", "halt-if-one(1)", "xor(1,0,1,1)"] {
            let g = f(fs);
            let mode = DeductionMode::Threshold { t: 2, position_bound: 4, budget: 50 };
            let closed = closure_explicit(&g, &mode, &u, &[0, 1]).unwrap();
            let mut solver = RankSolver::new(&g, mode).unwrap();
            for s in u.enumerate() {
                for n in [0, 1] {
                    for v in [false, true] {
                        let want = closed.get(&Fact { sigma: s.clone(), input: n, value: v }).copied();
                        assert_eq!(solver.rank(&s, n, v).unwrap(), want, "{fs} {s} {n} {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn exact_formula() {
        assert_eq!(exact_rank_counting(3, 0, true), Some(3));
        assert_eq!(exact_rank_counting(2, 2, true), Some(0));
        assert_eq!(exact_rank_counting(1, 0, false), None);
        assert_eq!(exact_rank_counting(1, 1, false), Some(0));
    }

    #[test]
    fn exact_mode_solver() {
        let mode = DeductionMode::ExactCounting { budget: 100 };
        let mut s = RankSolver::new(&f("counting(3,ep:01/1)"), mode).unwrap();
        assert_eq!(s.rank(&sigma("{0:1,2:0}"), 0, true).unwrap(), Some(2));
        let mut s = RankSolver::new(&f("counting(1,ep:11111/0)"), mode).unwrap();
        assert_eq!(s.rank(&FinitePartialOracle::empty(), 0, true).unwrap(), None);
        assert!(RankSolver::new(&f("identity"), mode).is_err());
    }

    #[test]
    fn threshold_matches_exact_on_large_bound() {
        let mode = DeductionMode::Threshold { t: 8, position_bound: 512, budget: 1000 };
        let rel = EventuallyPeriodicSet::from_text("ep:011/1").unwrap();
        let mut rng = SplitMix64::new(5);
        for c in 1..=4u64 {
            let g = f(&format!("counting({c},{})", rel.to_text()));
            let mut solver = RankSolver::new(&g, mode).unwrap();
            for d in 0..=c {
                let s = random_sigma(&mut rng, 512, &rel, d as usize, 1).unwrap();
                assert_eq!(solver.rank(&s, 0, true).unwrap(), exact_rank_counting(c, d, true));
            }
            assert!(solver.states() < 5000);
        }
    }

    #[test]
    fn table_histogram() {
        let g = f("counting(2,all)");
        let mode = DeductionMode::Threshold { t: 2, position_bound: 8, budget: 50 };
        let t = deduction_closure(&g, mode, &[FinitePartialOracle::empty(), sigma("{3:0}")], &[0]).unwrap();
        assert_eq!(t.histogram, BTreeMap::from([(1, 1), (2, 1)]));
        assert_eq!(t.undeduced, 2);
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"mode\":\"threshold\""));
        assert_eq!(serde_json::from_str::<DeductionTable>(&json).unwrap(), t);
    }
}
