//! Built-in functionals.

use std::collections::{BTreeMap, HashMap};

use super::{Process, Program};
use crate::oracles::Affine;
use crate::sequences::EventuallyPeriodicSet;
use crate::term::Term;

fn bit_atom(b: bool) -> Term {
    Term::atom(b as u8)
}

// ---------------------------------------------------------------------------
// Lookups: identity, bit-flip, projection, xor, and, or
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    Identity,
    Flip,
    Project,
    Xor,
    And,
    Or,
}

/// Queries `a_i·n + b_i` for each affine rule once at tick 1 and combines the
/// answers.
#[derive(Debug, Clone)]
pub struct Lookup {
    pub op: Combine,
    pub maps: Vec<Affine>,
}

impl Lookup {
    pub fn identity() -> Self {
        Lookup { op: Combine::Identity, maps: vec![Affine::new(1, 0)] }
    }

    pub fn flip() -> Self {
        Lookup { op: Combine::Flip, maps: vec![Affine::new(1, 0)] }
    }

    pub fn projection(scale: u64, offset: u64) -> Self {
        Lookup { op: Combine::Project, maps: vec![Affine::new(scale, offset)] }
    }
}

#[derive(Clone)]
struct LookupRun {
    op: Combine,
    positions: Option<Vec<u64>>,
    started: bool,
    got: HashMap<u64, bool>,
}

impl Process for LookupRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        let positions = self.positions.as_ref()?;
        if !self.started {
            self.started = true;
            issue.extend(positions.iter().copied());
        }
        for &(p, b) in delivered {
            self.got.insert(p, b);
        }
        let mut bits = Vec::with_capacity(positions.len());
        for p in positions {
            bits.push(*self.got.get(p)?);
        }
        Some(match self.op {
            Combine::Identity | Combine::Project => bits[0],
            Combine::Flip => !bits[0],
            Combine::Xor => bits.iter().fold(false, |a, &b| a ^ b),
            Combine::And => bits.iter().all(|&b| b),
            Combine::Or => bits.iter().any(|&b| b),
        })
    }
}

impl Program for Lookup {
    fn start(&self, input: u64) -> Box<dyn Process> {
        // an overflowing position cannot be asked, so the run never halts
        let positions: Option<Vec<u64>> = self.maps.iter().map(|m| m.apply(input)).collect();
        Box::new(LookupRun { op: self.op, positions, started: false, got: HashMap::new() })
    }

    fn term(&self) -> Term {
        let pairs = || self.maps.iter().flat_map(|m| [Term::atom(m.scale), Term::atom(m.offset)]).collect::<Vec<_>>();
        match self.op {
            Combine::Identity => Term::atom("identity"),
            Combine::Flip => Term::atom("bit-flip"),
            Combine::Project => Term::call("projection", pairs()),
            Combine::Xor => Term::call("xor", pairs()),
            Combine::And => Term::call("and", pairs()),
            Combine::Or => Term::call("or", pairs()),
        }
    }
}

// ---------------------------------------------------------------------------
// Trivial programs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct Constant(pub bool);

#[derive(Clone)]
struct Halt(bool);

impl Process for Halt {
    fn step(&mut self, _: &[(u64, bool)], _: &mut Vec<u64>) -> Option<bool> {
        Some(self.0)
    }
}

impl Program for Constant {
    fn start(&self, _: u64) -> Box<dyn Process> {
        Box::new(Halt(self.0))
    }

    fn term(&self) -> Term {
        Term::call("constant", vec![bit_atom(self.0)])
    }
}

/// Halts immediately with a fixed bit. Used by combinators.
pub(crate) fn halt_now(bit: bool) -> Box<dyn Process> {
    Box::new(Halt(bit))
}

#[derive(Debug, Clone, Copy)]
pub struct Diverge;

#[derive(Clone)]
struct Spin;

impl Process for Spin {
    fn step(&mut self, _: &[(u64, bool)], _: &mut Vec<u64>) -> Option<bool> {
        None
    }
}

pub(crate) fn spin() -> Box<dyn Process> {
    Box::new(Spin)
}

impl Program for Diverge {
    fn start(&self, _: u64) -> Box<dyn Process> {
        spin()
    }

    fn term(&self) -> Term {
        Term::atom("diverge")
    }
}

// ---------------------------------------------------------------------------
// Searches
// ---------------------------------------------------------------------------

/// Tick `k` queries position `k - 1`; halts with 1 on the first answer.
#[derive(Debug, Clone, Copy)]
pub struct SearchFirst;

#[derive(Clone)]
struct SearchFirstRun {
    next: u64,
}

impl Process for SearchFirstRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        if !delivered.is_empty() {
            return Some(true);
        }
        issue.push(self.next);
        self.next += 1;
        None
    }
}

impl Program for SearchFirst {
    fn start(&self, _: u64) -> Box<dyn Process> {
        Box::new(SearchFirstRun { next: 0 })
    }

    fn term(&self) -> Term {
        Term::atom("search-first")
    }
}

/// Queries a fixed position; halts with 1 if it reads 1, otherwise diverges.
#[derive(Debug, Clone, Copy)]
pub struct HaltIfOne(pub u64);

#[derive(Clone)]
struct HaltIfOneRun {
    position: u64,
    started: bool,
}

impl Process for HaltIfOneRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        if !self.started {
            self.started = true;
            issue.push(self.position);
        }
        delivered.iter().any(|&(p, b)| p == self.position && b).then_some(true)
    }
}

impl Program for HaltIfOne {
    fn start(&self, _: u64) -> Box<dyn Process> {
        Box::new(HaltIfOneRun { position: self.0, started: false })
    }

    fn term(&self) -> Term {
        Term::call("halt-if-one", vec![Term::atom(self.0)])
    }
}

/// Counting search: tick `k` queries the `k`-th member of `relevant`;
/// halts with 1 once `count` of the queried bits are defined, whatever their
/// values.
#[derive(Debug, Clone)]
pub struct Counting {
    pub count: u64,
    pub relevant: EventuallyPeriodicSet,
}

#[derive(Clone)]
struct CountingRun {
    count: u64,
    relevant: EventuallyPeriodicSet,
    next: Option<u64>,
    seen: u64,
}

fn next_member(set: &EventuallyPeriodicSet, from: u64) -> Option<u64> {
    if !set.is_infinite() && from >= set.transient().len() as u64 {
        return None;
    }
    set.members_from(from).next()
}

impl Process for CountingRun {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        self.seen += delivered.len() as u64;
        if self.seen >= self.count {
            return Some(true);
        }
        if let Some(p) = self.next {
            issue.push(p);
            self.next = p.checked_add(1).and_then(|q| next_member(&self.relevant, q));
        }
        None
    }
}

impl Program for Counting {
    fn start(&self, _: u64) -> Box<dyn Process> {
        Box::new(CountingRun {
            count: self.count,
            relevant: self.relevant.clone(),
            next: next_member(&self.relevant, 0),
            seen: 0,
        })
    }

    fn term(&self) -> Term {
        Term::call("counting", vec![Term::atom(self.count), Term::atom(self.relevant.to_text())])
    }

    fn counting_profile(&self) -> Option<(u64, &EventuallyPeriodicSet)> {
        Some((self.count, &self.relevant))
    }

    fn deduction_key(&self, sigma: &BTreeMap<u64, bool>, bound: u64, budget: u64) -> Option<Vec<u64>> {
        // Behavior depends only on how many relevant positions sigma defines,
        // provided every relevant position below the bound can be reached
        // within the budget.
        if bound.saturating_add(1) > budget {
            return None;
        }
        let d = sigma.keys().filter(|&&p| self.relevant.contains(p)).count() as u64;
        let other = sigma.len() as u64 - d;
        Some(vec![d.min(self.count), other])
    }

    fn extended_key(&self, key: &[u64], position: u64, _bit: bool) -> Option<Vec<u64>> {
        let &[d, other] = key else { return None };
        Some(if self.relevant.contains(position) { vec![(d + 1).min(self.count), other] } else { vec![d, other + 1] })
    }
}

// ---------------------------------------------------------------------------
// Codings as functionals
// ---------------------------------------------------------------------------

#[derive(Clone)]
struct Ask {
    position: Option<u64>,
    started: bool,
}

impl Process for Ask {
    fn step(&mut self, delivered: &[(u64, bool)], issue: &mut Vec<u64>) -> Option<bool> {
        let p = self.position?;
        if !self.started {
            self.started = true;
            issue.push(p);
        }
        delivered.iter().find(|d| d.0 == p).map(|d| d.1)
    }
}

fn ask(position: Option<u64>) -> Box<dyn Process> {
    Box::new(Ask { position, started: false })
}

/// Φ^S = ℛ(S): input `p = 2^n·m` answers `S(n)`; input 0 answers 0.
#[derive(Debug, Clone, Copy)]
pub struct REncode;

impl Program for REncode {
    fn start(&self, input: u64) -> Box<dyn Process> {
        if input == 0 {
            halt_now(false)
        } else {
            ask(Some(input.trailing_zeros() as u64))
        }
    }

    fn term(&self) -> Term {
        Term::atom("r-encode")
    }
}

/// Φ^S = ℛ̃(S): input `p` answers `S(floor(log2 p))`; input 0 answers 0.
#[derive(Debug, Clone, Copy)]
pub struct RtildeEncode;

impl Program for RtildeEncode {
    fn start(&self, input: u64) -> Box<dyn Process> {
        if input == 0 {
            halt_now(false)
        } else {
            ask(Some(input.ilog2() as u64))
        }
    }

    fn term(&self) -> Term {
        Term::atom("rtilde-encode")
    }
}

/// Inverse of a one-one affine reduction: on `m = f(n)` answer `S(n)`,
/// diverge off the range.
#[derive(Debug, Clone, Copy)]
pub struct OneInverse(pub Affine);

impl Program for OneInverse {
    fn start(&self, input: u64) -> Box<dyn Process> {
        ask(self.0.preimage(input))
    }

    fn term(&self) -> Term {
        Term::call("one-inverse", vec![Term::atom(self.0.scale), Term::atom(self.0.offset)])
    }
}

#[cfg(test)]
mod tests {
    use crate::machine::{parse_functional, run};
    use crate::oracles::PartialOracle;
    use crate::sequences::BitSequence;

    fn out(f: &str, a: &str, n: u64) -> Option<bool> {
        let f = parse_functional(f).unwrap();
        run(&f, &BitSequence::parse(a).unwrap(), n, 200).unwrap().output()
    }

    #[test]
    fn lookups() {
        assert_eq!(out("projection(2,0)", "evens", 3), Some(true));
        assert_eq!(out("projection(2,1)", "evens", 3), Some(false));
        assert_eq!(out("xor(1,0,1,1)", "evens", 4), Some(true));
        assert_eq!(out("xor(1,0,1,0)", "ones", 4), Some(false));
        assert_eq!(out("and(1,0,1,2)", "evens", 4), Some(true));
        assert_eq!(out("or(1,0,1,1)", "zeros", 4), Some(false));
    }

    #[test]
    fn encoders() {
        // 12 = 2^2·3
        assert_eq!(out("r-encode", "finite(2)", 12), Some(true));
        assert_eq!(out("r-encode", "finite(2)", 0), Some(false));
        assert_eq!(out("rtilde-encode", "finite(2)", 5), Some(true));
        assert_eq!(out("rtilde-encode", "finite(2)", 8), Some(false));
        assert_eq!(out("one-inverse(2,0)", "finite(3)", 6), Some(true));
        assert_eq!(out("one-inverse(2,0)", "finite(3)", 7), None);
    }

    #[test]
    fn counting_counts_defined_bits() {
        let f = parse_functional("counting(3,evens)").unwrap();
        let seq = BitSequence::parse("zeros").unwrap();
        let oracle = PartialOracle::only(seq.clone(), [0, 4, 6]);
        assert_eq!(run(&f, &oracle, 0, 100).unwrap().output(), Some(true));
        let oracle = PartialOracle::only(seq, [0, 4, 5]);
        assert_eq!(run(&f, &oracle, 0, 100).unwrap().output(), None);
    }

    #[test]
    fn halt_if_one_and_constants() {
        assert_eq!(out("halt-if-one(3)", "finite(3)", 0), Some(true));
        assert_eq!(out("halt-if-one(3)", "zeros", 0), None);
        assert_eq!(out("constant(1)", "zeros", 9), Some(true));
        assert_eq!(out("diverge", "zeros", 9), None);
    }

    #[test]
    fn counting_key_extends() {
        let f = parse_functional("counting(2,ep:011/1)").unwrap();
        let mut sigma = std::collections::BTreeMap::new();
        let mut key = f.program().deduction_key(&sigma, 16, 100).unwrap();
        for (p, b) in [(3, true), (0, false), (1, true), (7, false), (2, true)] {
            let next = f.program().extended_key(&key, p, b).unwrap();
            sigma.insert(p, b);
            key = f.program().deduction_key(&sigma, 16, 100).unwrap();
            assert_eq!(next, key);
        }
    }
}
