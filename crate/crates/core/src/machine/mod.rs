//! Deterministic execution of oracle functionals under a tick budget.
//!
//! A functional is a [`Program`]: given an input it starts a [`Process`], a
//! state machine stepped once per tick. Each step receives the oracle answers
//! that arrived this tick and may issue further queries or halt. Queries are
//! resolved by the runner: a query issued at tick `s` to a position with
//! delay `l` is delivered at tick `s + 1 + l`; undefined positions are never
//! delivered. While a query is pending the process keeps ticking.

mod catalog;
mod combinators;
mod parse;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Result};
use crate::oracles::Oracle;
use crate::sequences::EventuallyPeriodicSet;
use crate::term::Term;

pub use catalog::{
    Combine, Constant, Counting, Diverge, HaltIfOne, Lookup, OneInverse, REncode, RtildeEncode, SearchFirst,
};
pub use combinators::{flip_on_set, patch_finite, race, FlipOnSet, Patch, Race};
pub use parse::{functional_from_term, parse_functional, parse_functional_with};

/// A running computation.
pub trait Process: Send + ProcessClone {
    /// One tick. `delivered` holds `(position, bit)` answers that arrived this
    /// tick; new queries are pushed onto `issue`. Returning `Some(bit)` halts.
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool>;
}

pub trait ProcessClone {
    fn box_clone(&self) -> Box<dyn Process>;
}

impl<T: Process + Clone + 'static> ProcessClone for T {
    fn box_clone(&self) -> Box<dyn Process> {
        Box::new(self.clone())
    }
}

impl Clone for Box<dyn Process> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

/// A Turing functional in the catalog or built from catalog combinators.
pub trait Program: Send + Sync {
    fn start(&self, input: u64) -> Box<dyn Process>;

    /// Canonical term; parsing it yields an equivalent functional.
    fn term(&self) -> Term;

    /// For counting-search functionals: the required count and the set of
    /// relevant positions.
    fn counting_profile(&self) -> Option<(u64, &EventuallyPeriodicSet)> {
        None
    }

    /// A key such that finite partial oracles with equal keys behave the same
    /// under runs and under 1-extension within `position_bound`, up to a
    /// renaming of positions. `None` when the functional cannot vouch for it.
    fn deduction_key(&self, _sigma: &BTreeMap<u64, bool>, _position_bound: u64, _budget: u64) -> Option<Vec<u64>> {
        None
    }

    /// The key of `sigma ∪ {position: bit}` given the key of `sigma`, when it
    /// can be had without looking at `sigma`. Must agree with
    /// [`Program::deduction_key`].
    fn extended_key(&self, _key: &[u64], _position: u64, _bit: bool) -> Option<Vec<u64>> {
        None
    }
}

/// Shared handle to a [`Program`].
#[derive(Clone)]
pub struct Functional(Arc<dyn Program>);

impl Functional {
    pub fn new(p: impl Program + 'static) -> Self {
        Functional(Arc::new(p))
    }

    pub fn start(&self, input: u64) -> Box<dyn Process> {
        self.0.start(input)
    }

    pub fn term(&self) -> Term {
        self.0.term()
    }

    /// The canonical id, i.e. the term text.
    pub fn id(&self) -> String {
        self.0.term().to_string()
    }

    pub fn program(&self) -> &dyn Program {
        &*self.0
    }
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Functional({})", self.id())
    }
}

// ---------------------------------------------------------------------------
// Traces and outcomes
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Issued(u64),
    Resolved(u64, bool),
    Halted(bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub tick: u64,
    pub action: Action,
}

#[derive(Serialize)]
struct TraceRecord {
    tick: u64,
    action: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    position: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bit: Option<u8>,
}

/// Ordered log of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    /// Least position whose answer was delivered to the functional.
    pub min_queried: Option<u64>,
    pub max_queried: Option<u64>,
    /// Least position ever issued, answered or not.
    pub min_issued: Option<u64>,
    pub max_issued: Option<u64>,
}

impl Trace {
    fn push(&mut self, tick: u64, action: Action) {
        match action {
            Action::Issued(p) => {
                self.min_issued = Some(self.min_issued.map_or(p, |m| m.min(p)));
                self.max_issued = Some(self.max_issued.map_or(p, |m| m.max(p)));
            }
            Action::Resolved(p, _) => {
                self.min_queried = Some(self.min_queried.map_or(p, |m| m.min(p)));
                self.max_queried = Some(self.max_queried.map_or(p, |m| m.max(p)));
            }
            Action::Halted(_) => {}
        }
        self.steps.push(TraceStep { tick, action });
    }

    /// Positions whose answers were delivered.
    pub fn resolved_positions(&self) -> BTreeSet<u64> {
        self.steps
            .iter()
            .filter_map(|s| match s.action {
                Action::Resolved(p, _) => Some(p),
                _ => None,
            })
            .collect()
    }

    /// One JSON record per step: `{tick, action, position?, bit?}`.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            let rec = match s.action {
                Action::Issued(p) => TraceRecord { tick: s.tick, action: "issued", position: Some(p), bit: None },
                Action::Resolved(p, b) => {
                    TraceRecord { tick: s.tick, action: "resolved", position: Some(p), bit: Some(b as u8) }
                }
                Action::Halted(b) => TraceRecord { tick: s.tick, action: "halted", position: None, bit: Some(b as u8) },
            };
            out.push_str(&serde_json::to_string(&rec).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of [`Trace::to_jsonl`], hex encoded.
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.to_jsonl().as_bytes());
        h.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum RunResult {
    Halted { bit: bool, tick: u64 },
    Exhausted { budget: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub result: RunResult,
    pub trace: Trace,
    /// Issued positions that were never delivered.
    pub pending: BTreeSet<u64>,
    pub ticks: u64,
}

impl RunOutcome {
    pub fn output(&self) -> Option<bool> {
        match self.result {
            RunResult::Halted { bit, .. } => Some(bit),
            RunResult::Exhausted { .. } => None,
        }
    }

    pub fn halted(&self) -> bool {
        self.output().is_some()
    }
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Simulate `f` on `oracle` and `input` for at most `budget` ticks.
pub fn run(f: &Functional, oracle: &dyn Oracle, input: u64, budget: u64) -> Result<RunOutcome> {
    if budget == 0 {
        return Err(invalid("budget must be at least 1"));
    }
    let mut process = f.start(input);
    let mut trace = Trace::default();
    let mut pending: HashSet<u64> = HashSet::new();
    let mut never: BTreeSet<u64> = BTreeSet::new();
    // (due tick, issue sequence number) -> (position, bit)
    let mut scheduled: BTreeMap<(u64, u64), (u64, bool)> = BTreeMap::new();
    let mut seq = 0u64;
    let mut delivered = Vec::new();
    let mut issue = Vec::new();

    for tick in 1..=budget {
        delivered.clear();
        while let Some(entry) = scheduled.first_entry() {
            if entry.key().0 > tick {
                break;
            }
            let (p, b) = entry.remove();
            pending.remove(&p);
            trace.push(tick, Action::Resolved(p, b));
            delivered.push((p, b));
        }

        issue.clear();
        let halted = process.step(&delivered, &mut issue);
        for &p in &issue {
            if !pending.insert(p) {
                continue;
            }
            trace.push(tick, Action::Issued(p));
            match oracle.entry(p) {
                Some(e) => {
                    let due = tick.saturating_add(1).saturating_add(e.delay);
                    scheduled.insert((due, seq), (p, e.bit));
                    seq += 1;
                }
                None => {
                    never.insert(p);
                }
            }
        }
        if let Some(bit) = halted {
            trace.push(tick, Action::Halted(bit));
            return Ok(RunOutcome {
                result: RunResult::Halted { bit, tick },
                trace,
                pending: pending.into_iter().collect(),
                ticks: tick,
            });
        }
    }
    Ok(RunOutcome {
        result: RunResult::Exhausted { budget },
        trace,
        pending: pending.into_iter().collect(),
        ticks: budget,
    })
}
