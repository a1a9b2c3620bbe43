//! Functional-to-functional constructions: mod-finite to use-bounded-from-below,
//! and use-bounded-from-below to cofinite.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::machine::{Functional, Process, Program};
use crate::term::Term;

/// On input `n`, simulate `Φ` against every way of changing the oracle below
/// `n`, never asking the real bits there. If the simulations disagree, ask
/// the real bits `n-1, n-2, …, 0` and drop the variants they refute until the
/// survivors agree.
///
/// Variants are created lazily: a simulation forks only when it asks a low
/// bit it has no hypothesis for, so each branch stands for every variant
/// consistent with its hypotheses. Branches share the run's budget, one
/// branch step per tick in round-robin order.
pub struct MfToUbfb {
    pub inner: Functional,
}

#[derive(Clone)]
struct Branch {
    process: Box<dyn Process>,
    hyp: BTreeMap<u64, bool>,
    inbox: Vec<(u64, bool)>,
    awaiting: HashSet<u64>,
    output: Option<bool>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    Simulate,
    /// Next low bit to ask, and whether an answer is outstanding.
    Refute {
        next: Option<u64>,
        waiting: bool,
    },
}

#[derive(Clone)]
struct MfToUbfbRun {
    n: u64,
    branches: Vec<Branch>,
    cursor: usize,
    cache: HashMap<u64, bool>,
    requested: HashSet<u64>,
    phase: Phase,
    scratch: Vec<u64>,
}

impl MfToUbfbRun {
    fn agreed(&self) -> Option<bool> {
        let first = self.branches.first()?.output?;
        self.branches.iter().all(|b| b.output == Some(first)).then_some(first)
    }

    fn step_branch(&mut self, issue: &mut Vec<u64>) {
        let i = self.cursor;
        let br = &mut self.branches[i];
        self.scratch.clear();
        let inbox = std::mem::take(&mut br.inbox);
        if let Some(b) = br.process.step(&inbox, &mut self.scratch) {
            br.output = Some(b);
            self.cursor = i + 1;
            return;
        }
        let mut copies = vec![br.clone()];
        let mut fresh = Vec::new();
        for &q in &self.scratch {
            if q < self.n {
                if let Some(&h) = copies[0].hyp.get(&q) {
                    copies.iter_mut().for_each(|c| c.inbox.push((q, h)));
                } else if !fresh.contains(&q) {
                    fresh.push(q);
                }
            } else if let Some(&b) = self.cache.get(&q) {
                copies.iter_mut().for_each(|c| c.inbox.push((q, b)));
            } else {
                copies.iter_mut().for_each(|c| {
                    c.awaiting.insert(q);
                });
                if self.requested.insert(q) {
                    issue.push(q);
                }
            }
        }
        for q in fresh {
            copies = copies
                .into_iter()
                .flat_map(|c| {
                    [false, true].map(|b| {
                        let mut c = c.clone();
                        c.hyp.insert(q, b);
                        c.inbox.push((q, b));
                        c
                    })
                })
                .collect();
        }
        let k = copies.len();
        self.branches.splice(i..=i, copies);
        self.cursor = i + k;
    }
}

impl Process for MfToUbfbRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        for &(p, b) in delivered {
            if p >= self.n {
                self.cache.insert(p, b);
                for br in &mut self.branches {
                    if br.awaiting.remove(&p) {
                        br.inbox.push((p, b));
                    }
                }
            } else {
                self.branches.retain(|br| br.hyp.get(&p).is_none_or(|&h| h == b));
                if let Phase::Refute { next, .. } = self.phase {
                    self.phase = Phase::Refute { next, waiting: false };
                }
            }
        }

        if self.phase == Phase::Simulate {
            if self.branches.iter().any(|b| b.output.is_none()) {
                let len = self.branches.len();
                self.cursor %= len;
                while self.branches[self.cursor].output.is_some() {
                    self.cursor = (self.cursor + 1) % len;
                }
                self.step_branch(issue);
            }
            if self.branches.iter().all(|b| b.output.is_some()) {
                self.phase = Phase::Refute { next: self.n.checked_sub(1), waiting: false };
            } else {
                return None;
            }
        }

        if let Some(b) = self.agreed() {
            return Some(b);
        }
        if let Phase::Refute { next: Some(p), waiting: false } = self.phase {
            issue.push(p);
            self.phase = Phase::Refute { next: p.checked_sub(1), waiting: true };
        }
        None
    }
}

impl Program for MfToUbfb {
    fn start(&self, input: u64) -> Box<dyn Process> {
        let root = Branch {
            process: self.inner.start(input),
            hyp: BTreeMap::new(),
            inbox: Vec::new(),
            awaiting: HashSet::new(),
            output: None,
        };
        Box::new(MfToUbfbRun {
            n: input,
            branches: vec![root],
            cursor: 0,
            cache: HashMap::new(),
            requested: HashSet::new(),
            phase: Phase::Simulate,
            scratch: Vec::new(),
        })
    }

    fn term(&self) -> Term {
        Term::call("mf-to-ubfb", vec![self.inner.term()])
    }
}

/// Runs `Φ`, but never steps it while one of its queries is unanswered, so a
/// query to an undefined bit suspends it for good.
pub struct UbfbToCf {
    pub inner: Functional,
}

#[derive(Clone)]
struct UbfbToCfRun {
    process: Box<dyn Process>,
    outstanding: HashSet<u64>,
    inbox: Vec<(u64, bool)>,
    scratch: Vec<u64>,
}

impl Process for UbfbToCfRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        for &(p, b) in delivered {
            self.outstanding.remove(&p);
            self.inbox.push((p, b));
        }
        if !self.outstanding.is_empty() {
            return None;
        }
        self.scratch.clear();
        let inbox = std::mem::take(&mut self.inbox);
        let out = self.process.step(&inbox, &mut self.scratch);
        self.outstanding.extend(self.scratch.iter().copied());
        issue.extend_from_slice(&self.scratch);
        out
    }
}

impl Program for UbfbToCf {
    fn start(&self, input: u64) -> Box<dyn Process> {
        Box::new(UbfbToCfRun {
            process: self.inner.start(input),
            outstanding: HashSet::new(),
            inbox: Vec::new(),
            scratch: Vec::new(),
        })
    }

    fn term(&self) -> Term {
        Term::call("ubfb-to-cf", vec![self.inner.term()])
    }
}

pub fn mf_to_ubfb(phi: &Functional) -> Functional {
    Functional::new(MfToUbfb { inner: phi.clone() })
}

pub fn ubfb_to_cf(phi: &Functional) -> Functional {
    Functional::new(UbfbToCf { inner: phi.clone() })
}

/// Apply a transformer by name (`mf-to-ubfb` or `ubfb-to-cf`).
pub fn transform(op: &str, phi: &Functional) -> Result<Functional> {
    match op {
        "mf-to-ubfb" => Ok(mf_to_ubfb(phi)),
        "ubfb-to-cf" => Ok(ubfb_to_cf(phi)),
        other => Err(Error::InvalidArgument(format!("unknown transform `{other}`"))),
    }
}
