//! The codings ℛ and ℛ̃, columns, and recovery of `S` from imperfect views of
//! its codes.
//!
//! `ℛ(S)` contains `p = 2^n·m` (m odd) iff `n ∈ S`; `ℛ̃(S)` contains `p` iff
//! `floor(log2 p) ∈ S`. Position 0 is in neither.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::machine::{run, Functional, Process, Program, RunOutcome};
use crate::oracles::{Affine, Oracle, PartialOracle};
use crate::sequences::BitSequence;
use crate::term::Term;

pub fn r_member(s: &BitSequence, p: u64) -> bool {
    p != 0 && s.get(p.trailing_zeros() as u64)
}

pub fn rtilde_member(s: &BitSequence, p: u64) -> bool {
    p != 0 && s.get(p.ilog2() as u64)
}

/// `2^n·(2k+1)`, the `n`-th position of column `k`.
pub fn column_position(n: u64, k: u64) -> Option<u64> {
    let odd = k.checked_mul(2)?.checked_add(1)?;
    let shift = u32::try_from(n).ok()?;
    let p = 1u64.checked_shl(shift)?.checked_mul(odd)?;
    // checked_shl only guards the shift amount
    (p >> shift == odd).then_some(p)
}

/// Column and row of a position `p ≥ 1`, inverse to [`column_position`].
pub fn column_of(p: u64) -> Option<(u64, u64)> {
    if p == 0 {
        return None;
    }
    let n = p.trailing_zeros() as u64;
    Some(((p >> n) / 2, n))
}

// ---------------------------------------------------------------------------
// Recovery functionals
// ---------------------------------------------------------------------------

/// Most block queries issued in one tick.
const BLOCK_CHUNK: u64 = 4096;

/// Recovers `S(n)` from a never-lying partial oracle for `ℛ̃(S)` by asking the
/// whole block `[2^n, 2^(n+1))` and taking the first answer.
#[derive(Debug, Clone, Copy)]
pub struct BlockSearch;

#[derive(Clone)]
struct BlockSearchRun {
    next: u64,
    end: u64,
}

impl Process for BlockSearchRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        if let Some(&(_, b)) = delivered.first() {
            return Some(b);
        }
        let stop = self.end.min(self.next.saturating_add(BLOCK_CHUNK));
        issue.extend(self.next..stop);
        self.next = stop;
        None
    }
}

fn block(n: u64) -> Option<(u64, u64)> {
    let lo = 1u64.checked_shl(u32::try_from(n).ok()?)?;
    Some((lo, lo.saturating_mul(2)))
}

impl Program for BlockSearch {
    fn start(&self, input: u64) -> Box<dyn Process> {
        let (next, end) = block(input).unwrap_or((0, 0));
        Box::new(BlockSearchRun { next, end })
    }

    fn term(&self) -> Term {
        Term::atom("block-search")
    }
}

/// Recovers `S(n)` from a total view of `ℛ̃(S)` that is right on more than
/// half of block `n`: asks the block one position at a time and stops once
/// one value has been seen `2^(n-1)` times (once, for `n = 0`).
#[derive(Debug, Clone, Copy)]
pub struct BlockVote;

#[derive(Clone)]
struct BlockVoteRun {
    next: u64,
    end: u64,
    waiting: bool,
    need: u64,
    votes: [u64; 2],
}

impl Process for BlockVoteRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        for &(_, b) in delivered {
            self.waiting = false;
            self.votes[b as usize] += 1;
            if self.votes[b as usize] >= self.need {
                return Some(b);
            }
        }
        if !self.waiting && self.next < self.end {
            issue.push(self.next);
            self.next += 1;
            self.waiting = true;
        }
        None
    }
}

impl Program for BlockVote {
    fn start(&self, input: u64) -> Box<dyn Process> {
        let (next, end) = block(input).unwrap_or((0, 0));
        let need = if input == 0 { 1 } else { 1u64 << (input - 1).min(63) };
        Box::new(BlockVoteRun { next, end, waiting: false, need, votes: [0, 0] })
    }

    fn term(&self) -> Term {
        Term::atom("block-vote")
    }
}

/// Recovers `S(n)` from a cofinite never-lying oracle for `ℛ(S)`: asks
/// `2^n·m` for odd `m = 1, 3, 5, …`, one per tick, and takes the first answer.
#[derive(Debug, Clone, Copy)]
pub struct ColumnSearch;

#[derive(Clone)]
struct ColumnSearchRun {
    n: u64,
    k: Option<u64>,
}

impl Process for ColumnSearchRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        if let Some(&(_, b)) = delivered.first() {
            return Some(b);
        }
        if let Some(k) = self.k {
            match column_position(self.n, k) {
                Some(p) => {
                    issue.push(p);
                    self.k = k.checked_add(1);
                }
                None => self.k = None,
            }
        }
        None
    }
}

impl Program for ColumnSearch {
    fn start(&self, input: u64) -> Box<dyn Process> {
        Box::new(ColumnSearchRun { n: input, k: Some(0) })
    }

    fn term(&self) -> Term {
        Term::atom("column-search")
    }
}

/// Given `Φ` with `Φ^A = ℛ(B)` and an oracle `C` for `ℛ(A)` that is right
/// except on finitely many columns, computes `ℛ(B)` mod finite: on input `k`
/// run `Φ` on columns `l = k+1, k+2, …` (dovetailed) and return the first
/// halting output.
///
/// Round `r` brings columns `k+1 … k+r` up to `r` steps each.
pub struct MfEmbed {
    pub inner: Functional,
}

#[derive(Clone)]
struct Column {
    process: Box<dyn Process>,
    inbox: Vec<(u64, bool)>,
    used: u64,
}

#[derive(Clone)]
struct MfEmbedRun {
    inner: Functional,
    input: u64,
    columns: Vec<Column>,
    round: u64,
    cursor: usize,
    scratch: Vec<u64>,
}

impl MfEmbedRun {
    fn first_column(&self) -> u64 {
        self.input + 1
    }
}

impl Process for MfEmbedRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        let first = self.first_column();
        for &(p, b) in delivered {
            if let Some((l, q)) = column_of(p) {
                if let Some(c) = l.checked_sub(first).and_then(|i| self.columns.get_mut(i as usize)) {
                    c.inbox.push((q, b));
                }
            }
        }
        // find the next column owed a step this round
        loop {
            if self.cursor as u64 >= self.round {
                self.round += 1;
                self.cursor = 0;
                if self.columns.len() < self.round as usize {
                    self.columns.push(Column { process: self.inner.start(self.input), inbox: Vec::new(), used: 0 });
                }
            }
            if self.columns[self.cursor].used < self.round {
                break;
            }
            self.cursor += 1;
        }
        let l = first + self.cursor as u64;
        let c = &mut self.columns[self.cursor];
        c.used += 1;
        self.scratch.clear();
        let inbox = std::mem::take(&mut c.inbox);
        let out = c.process.step(&inbox, &mut self.scratch);
        issue.extend(self.scratch.iter().filter_map(|&q| column_position(q, l)));
        out
    }
}

impl Program for MfEmbed {
    fn start(&self, input: u64) -> Box<dyn Process> {
        Box::new(MfEmbedRun {
            inner: self.inner.clone(),
            input,
            columns: Vec::new(),
            round: 0,
            cursor: 0,
            scratch: Vec::new(),
        })
    }

    fn term(&self) -> Term {
        Term::call("mf-embed", vec![self.inner.term()])
    }
}

// ---------------------------------------------------------------------------
// Recovery entry points
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Recovery {
    pub input: u64,
    pub output: Option<bool>,
    pub queries_issued: u64,
    #[serde(skip)]
    pub outcome: RunOutcome,
}

impl Recovery {
    fn from_outcome(input: u64, outcome: RunOutcome) -> Self {
        let queries_issued =
            outcome.trace.steps.iter().filter(|s| matches!(s.action, crate::machine::Action::Issued(_))).count() as u64;
        Recovery { input, output: outcome.output(), queries_issued, outcome }
    }
}

fn recover_with(f: impl Program + 'static, t: &dyn Oracle, n: u64, budget: u64) -> Result<Recovery> {
    let outcome = run(&Functional::new(f), t, n, budget)?;
    Ok(Recovery::from_outcome(n, outcome))
}

pub fn recover_from_generic_rtilde(t: &dyn Oracle, n: u64, budget: u64) -> Result<Recovery> {
    recover_with(BlockSearch, t, n, budget)
}

/// Always halts on a total view given `2^(n+1) + 1` ticks.
pub fn recover_from_coarse_rtilde(t: &dyn Oracle, n: u64, budget: u64) -> Result<Recovery> {
    recover_with(BlockVote, t, n, budget)
}

/// Ticks needed by [`recover_from_coarse_rtilde`] on a total view without delays.
pub fn coarse_budget(n: u64) -> u64 {
    block(n).map_or(u64::MAX, |(lo, _)| lo.saturating_mul(2).saturating_add(1))
}

pub fn recover_from_cofinite_r(t: &dyn Oracle, n: u64, budget: u64) -> Result<Recovery> {
    recover_with(ColumnSearch, t, n, budget)
}

pub fn mf_embedding_reduction(phi: &Functional, c: &dyn Oracle, k: u64, budget: u64) -> Result<Recovery> {
    recover_with(MfEmbed { inner: phi.clone() }, c, k, budget)
}

/// A partial oracle for `A` from one for `B = A∘f`, `f` one-one: defined at
/// `f(n)` exactly where `oracle_b` is defined at `n`.
pub fn ii_from_one_reduction(f: Affine, oracle_b: PartialOracle) -> Result<PartialOracle> {
    if !f.is_injective() {
        return Err(invalid("the reduction map must be one-one"));
    }
    Ok(PartialOracle::mapped(oracle_b, f))
}

/// Every column of `x` on `window`, for columns `0..columns`.
pub fn columns_table(x: &BitSequence, columns: u64, window: u64) -> HashMap<u64, Vec<bool>> {
    let col = |k| (0..window).map(|n| column_position(n, k).is_some_and(|p| x.get(p))).collect();
    (0..columns).map(|k| (k, col(k))).collect()
}
