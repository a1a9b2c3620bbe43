//! Patching, output flipping and racing.

use std::collections::BTreeMap;

use super::catalog::halt_now;
use super::{Functional, Process, Program};
use crate::sequences::EventuallyPeriodicSet;
use crate::term::Term;

/// `f` with finitely many outputs hard-coded.
pub struct Patch {
    pub inner: Functional,
    pub patch: BTreeMap<u64, bool>,
}

impl Program for Patch {
    fn start(&self, input: u64) -> Box<dyn Process> {
        match self.patch.get(&input) {
            Some(&b) => halt_now(b),
            None => self.inner.start(input),
        }
    }

    fn term(&self) -> Term {
        let mut args = vec![self.inner.term()];
        args.extend(self.patch.iter().map(|(n, b)| Term::atom(format!("{n}={}", *b as u8))));
        Term::call("patch", args)
    }
}

pub fn patch_finite(f: &Functional, patch: BTreeMap<u64, bool>) -> Functional {
    Functional::new(Patch { inner: f.clone(), patch })
}

/// `f` with its output complemented on a set of inputs.
pub struct FlipOnSet {
    pub inner: Functional,
    pub set: EventuallyPeriodicSet,
}

#[derive(Clone)]
struct Negate(Box<dyn Process>);

impl Process for Negate {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        self.0.step(delivered, issue).map(|b| !b)
    }
}

impl Program for FlipOnSet {
    fn start(&self, input: u64) -> Box<dyn Process> {
        let p = self.inner.start(input);
        if self.set.contains(input) {
            Box::new(Negate(p))
        } else {
            p
        }
    }

    fn term(&self) -> Term {
        Term::call("flip", vec![self.inner.term(), Term::atom(self.set.to_text())])
    }
}

pub fn flip_on_set(f: &Functional, set: EventuallyPeriodicSet) -> Functional {
    Functional::new(FlipOnSet { inner: f.clone(), set })
}

/// Runs `even` on `{n : 2n ∈ S}` and `odd` on `{n : 2n+1 ∈ S}`, alternating
/// ticks with `even` first, and returns whichever halts first.
pub struct Race {
    pub even: Functional,
    pub odd: Functional,
}

#[derive(Clone)]
struct RaceRun {
    sides: [Box<dyn Process>; 2],
    inbox: [Vec<(u64, bool)>; 2],
    tick: u64,
    scratch: Vec<u64>,
}

impl Process for RaceRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        for &(p, b) in delivered {
            self.inbox[(p % 2) as usize].push((p / 2, b));
        }
        let side = (self.tick % 2) as usize;
        self.tick += 1;
        self.scratch.clear();
        let inbox = std::mem::take(&mut self.inbox[side]);
        let out = self.sides[side].step(&inbox, &mut self.scratch);
        // a translated position that overflows is never asked
        issue.extend(self.scratch.iter().filter_map(|&q| q.checked_mul(2)?.checked_add(side as u64)));
        out
    }
}

impl Program for Race {
    fn start(&self, input: u64) -> Box<dyn Process> {
        Box::new(RaceRun {
            sides: [self.even.start(input), self.odd.start(input)],
            inbox: [Vec::new(), Vec::new()],
            tick: 0,
            scratch: Vec::new(),
        })
    }

    fn term(&self) -> Term {
        Term::call("race", vec![self.even.term(), self.odd.term()])
    }
}

pub fn race(even: &Functional, odd: &Functional) -> Functional {
    Functional::new(Race { even: even.clone(), odd: odd.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::{parse_functional, run, RunResult};
    use crate::oracles::PartialOracle;
    use crate::sequences::BitSequence;

    fn f(s: &str) -> Functional {
        parse_functional(s).unwrap()
    }

    #[test]
    fn patch_halts_without_queries() {
        let p = patch_finite(&f("diverge"), BTreeMap::from([(5, true)]));
        let o = run(&p, &BitSequence::parse("zeros").unwrap(), 5, 10).unwrap();
        assert_eq!(o.output(), Some(true));
        assert_eq!(o.trace.min_issued, None);
        assert_eq!(o.ticks, 1);

        let p = patch_finite(&f("identity"), BTreeMap::from([(0, true)]));
        let zeros = BitSequence::parse("zeros").unwrap();
        let outs: Vec<_> = (0..4).map(|n| run(&p, &zeros, n, 10).unwrap().output().unwrap()).collect();
        assert_eq!(outs, [true, false, false, false]);
    }

    #[test]
    fn empty_patch_is_transparent() {
        let id = f("identity");
        let p = patch_finite(&id, BTreeMap::new());
        let a = BitSequence::parse("random(2)").unwrap();
        for n in 0..16 {
            assert_eq!(run(&p, &a, n, 10).unwrap(), run(&id, &a, n, 10).unwrap());
        }
    }

    #[test]
    fn flips() {
        let zeros = BitSequence::parse("zeros").unwrap();
        let all = flip_on_set(&f("identity"), EventuallyPeriodicSet::all());
        assert_eq!(run(&all, &zeros, 3, 10).unwrap().output(), Some(true));
        let none = flip_on_set(&f("identity"), EventuallyPeriodicSet::empty());
        assert_eq!(run(&none, &zeros, 3, 10).unwrap(), run(&f("identity"), &zeros, 3, 10).unwrap());
        let ev = flip_on_set(&f("identity"), EventuallyPeriodicSet::evens());
        let outs: Vec<_> = (0..4).map(|n| run(&ev, &zeros, n, 10).unwrap().output().unwrap()).collect();
        assert_eq!(outs, [true, false, true, false]);
    }

    #[test]
    fn race_first_halter_wins() {
        // even side reads 2·4 = 8, odd side asks 2·0+1 = 1 which never answers
        let oracle = PartialOracle::only(BitSequence::parse("ones").unwrap(), [8]);
        let r = race(&f("projection(1,4)"), &f("identity"));
        assert_eq!(run(&r, &oracle, 0, 20).unwrap().output(), Some(true));

        let r = race(&f("diverge"), &f("constant(0)"));
        let o = run(&r, &oracle, 0, 20).unwrap();
        assert_eq!(o.output(), Some(false));

        let r = race(&f("diverge"), &f("diverge"));
        assert_eq!(run(&r, &oracle, 0, 20).unwrap().result, RunResult::Exhausted { budget: 20 });
    }

    #[test]
    fn race_prefers_even_on_ties() {
        let r = race(&f("constant(1)"), &f("constant(0)"));
        let o = run(&r, &BitSequence::parse("zeros").unwrap(), 0, 5).unwrap();
        assert_eq!(o.output(), Some(true));
    }

    #[test]
    fn race_halt_order_tracks_inner_ticks() {
        let seq = BitSequence::parse("ones").unwrap();
        let r = race(&f("identity"), &f("constant(0)"));
        // the odd side halts on parent tick 2, before the even side reads its
        // answer on parent tick 3
        assert_eq!(run(&r, &seq, 3, 10).unwrap().output(), Some(false));
    }
}
