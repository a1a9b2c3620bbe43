//! Total binary sequences given by a rule, plus density arithmetic and
//! eventually-periodic sets.
//!
//! A [`BitSequence`] is built from a serializable [`SequenceSpec`] and
//! memoizes the low positions it has evaluated. Sets are identified with
//! their characteristic functions throughout.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::{Arc, OnceLock};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ratio::{self, format_ratio, parse_ratio, Rational};
use crate::rng;
use crate::term::{self, Term};

/// Positions below this bound are memoized.
const MEMO_LEN: usize = 1 << 16;

// ---------------------------------------------------------------------------
// Eventually periodic sets
// ---------------------------------------------------------------------------

/// A finite transient followed by a repeating pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicSet {
    transient: Vec<bool>,
    pattern: Vec<bool>,
}

impl EventuallyPeriodicSet {
    pub fn new(transient: Vec<bool>, pattern: Vec<bool>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(invalid("eventually periodic set needs a nonempty pattern"));
        }
        Ok(EventuallyPeriodicSet { transient, pattern })
    }

    pub fn periodic(pattern: Vec<bool>) -> Result<Self> {
        Self::new(Vec::new(), pattern)
    }

    pub fn empty() -> Self {
        EventuallyPeriodicSet { transient: Vec::new(), pattern: vec![false] }
    }

    pub fn all() -> Self {
        EventuallyPeriodicSet { transient: Vec::new(), pattern: vec![true] }
    }

    pub fn evens() -> Self {
        EventuallyPeriodicSet { transient: Vec::new(), pattern: vec![true, false] }
    }

    /// `{n : n >= from}`.
    pub fn cofinite_from(from: usize) -> Self {
        EventuallyPeriodicSet { transient: vec![false; from], pattern: vec![true] }
    }

    pub fn transient(&self) -> &[bool] {
        &self.transient
    }

    pub fn pattern(&self) -> &[bool] {
        &self.pattern
    }

    pub fn period(&self) -> usize {
        self.pattern.len()
    }

    pub fn contains(&self, n: u64) -> bool {
        let t = self.transient.len() as u64;
        if n < t {
            self.transient[n as usize]
        } else {
            self.pattern[((n - t) % self.pattern.len() as u64) as usize]
        }
    }

    /// Whether the set has infinitely many members.
    pub fn is_infinite(&self) -> bool {
        self.pattern.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        EventuallyPeriodicSet {
            transient: self.transient.iter().map(|b| !b).collect(),
            pattern: self.pattern.iter().map(|b| !b).collect(),
        }
    }

    /// Members in increasing order, starting at `from`.
    pub fn members_from(&self, from: u64) -> impl Iterator<Item = u64> + '_ {
        let infinite = self.is_infinite();
        let last_transient = self.transient.len() as u64;
        (from..).take_while(move |&n| infinite || n < last_transient).filter(move |&n| self.contains(n))
    }

    /// Text form `ep:TRANSIENT/PATTERN`, e.g. `ep:/10` for the evens.
    pub fn to_text(&self) -> String {
        format!("ep:{}/{}", bits_to_string(&self.transient), bits_to_string(&self.pattern))
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix("ep:")
            .ok_or_else(|| Error::Parse { input: s.to_string(), message: "expected `ep:TRANSIENT/PATTERN`".into() })?;
        let (t, p) = body.split_once('/').ok_or_else(|| Error::Parse {
            input: s.to_string(),
            message: "missing `/` between transient and pattern".into(),
        })?;
        Self::new(parse_bits(t)?, parse_bits(p)?)
    }
}

impl Serialize for EventuallyPeriodicSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_text())
    }
}

impl<'de> Deserialize<'de> for EventuallyPeriodicSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Self::from_text(&s).map_err(serde::de::Error::custom)
    }
}

/// Brute-force search for an eventually periodic description of `bits`.
///
/// Periods are tried in increasing order, and for each period transients in
/// increasing order; the first match wins. A candidate must leave at least
/// two full periods after its transient so that the period is witnessed.
pub fn detect_eventually_periodic(
    bits: &[bool],
    period_cap: usize,
    transient_cap: usize,
) -> Option<EventuallyPeriodicSet> {
    for period in 1..=period_cap {
        for transient in 0..=transient_cap {
            if bits.len() < transient + 2 * period {
                break;
            }
            if (transient..bits.len() - period).all(|i| bits[i] == bits[i + period]) {
                return Some(EventuallyPeriodicSet {
                    transient: bits[..transient].to_vec(),
                    pattern: bits[transient..transient + period].to_vec(),
                });
            }
        }
    }
    None
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn parse_bits(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(Error::Parse { input: s.to_string(), message: "expected a 0/1 string".into() }),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Descriptors
// ---------------------------------------------------------------------------

/// Where the corrupted positions of a dyadic mask sit inside each block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Seeded pseudo-random positions (exact count per block).
    Random,
    /// The lowest positions of each block.
    Leading,
}

/// Serializable description of a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "descriptor", content = "parameters", rename_all = "kebab-case")]
pub enum SequenceSpec {
    ExplicitPrefixWithDefault { prefix: String, default: bool },
    EventuallyPeriodic { set: EventuallyPeriodicSet },
    Random { seed: u64 },
    Coded(CodedSpec),
    DerivedView(DerivedSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum CodedSpec {
    R {
        base: Box<SequenceSpec>,
    },
    Rtilde {
        base: Box<SequenceSpec>,
    },
    Column {
        base: Box<SequenceSpec>,
        k: u64,
    },
    Join {
        left: Box<SequenceSpec>,
        right: Box<SequenceSpec>,
    },
    /// `{n : 2n ∈ base}`.
    JoinLeft {
        base: Box<SequenceSpec>,
    },
    /// `{n : 2n+1 ∈ base}`.
    JoinRight {
        base: Box<SequenceSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum DerivedSpec {
    Complement {
        base: Box<SequenceSpec>,
    },
    Flip {
        base: Box<SequenceSpec>,
        positions: Vec<u64>,
    },
    Xor {
        base: Box<SequenceSpec>,
        mask: Box<SequenceSpec>,
    },
    /// 1 at `floor(rate * 2^b)` positions of every dyadic block `[2^b, 2^(b+1))`
    /// with `2^b >= start`, 0 elsewhere.
    DyadicMask {
        #[serde(with = "ratio::serde_ratio")]
        rate: Rational,
        start: u64,
        placement: Placement,
        seed: u64,
    },
    /// The output of a functional run on `base`, input by input.
    Image {
        functional: String,
        base: Box<SequenceSpec>,
        budget: u64,
    },
}

impl SequenceSpec {
    pub fn zeros() -> Self {
        SequenceSpec::EventuallyPeriodic { set: EventuallyPeriodicSet::empty() }
    }

    pub fn ones() -> Self {
        SequenceSpec::EventuallyPeriodic { set: EventuallyPeriodicSet::all() }
    }

    pub fn periodic_set(set: EventuallyPeriodicSet) -> Self {
        SequenceSpec::EventuallyPeriodic { set }
    }

    pub fn finite(positions: &[u64]) -> Self {
        let len = positions.iter().max().map_or(0, |m| m + 1) as usize;
        let mut bits = vec![false; len];
        for &p in positions {
            bits[p as usize] = true;
        }
        SequenceSpec::ExplicitPrefixWithDefault { prefix: bits_to_string(&bits), default: false }
    }

    pub fn random(seed: u64) -> Self {
        SequenceSpec::Random { seed }
    }

    pub fn r(self) -> Self {
        SequenceSpec::Coded(CodedSpec::R { base: Box::new(self) })
    }

    pub fn rtilde(self) -> Self {
        SequenceSpec::Coded(CodedSpec::Rtilde { base: Box::new(self) })
    }

    pub fn column(self, k: u64) -> Self {
        SequenceSpec::Coded(CodedSpec::Column { base: Box::new(self), k })
    }

    pub fn join(self, right: SequenceSpec) -> Self {
        SequenceSpec::Coded(CodedSpec::Join { left: Box::new(self), right: Box::new(right) })
    }

    pub fn complement(self) -> Self {
        SequenceSpec::DerivedView(DerivedSpec::Complement { base: Box::new(self) })
    }

    pub fn flip(self, positions: Vec<u64>) -> Self {
        SequenceSpec::DerivedView(DerivedSpec::Flip { base: Box::new(self), positions })
    }

    pub fn xor(self, mask: SequenceSpec) -> Self {
        SequenceSpec::DerivedView(DerivedSpec::Xor { base: Box::new(self), mask: Box::new(mask) })
    }

    pub fn image(self, functional: impl Into<String>, budget: u64) -> Self {
        SequenceSpec::DerivedView(DerivedSpec::Image { functional: functional.into(), base: Box::new(self), budget })
    }

    pub fn to_term(&self) -> Term {
        let b = |s: &SequenceSpec| s.to_term();
        match self {
            SequenceSpec::ExplicitPrefixWithDefault { prefix, default } => {
                Term::atom(format!("prefix:{}/{}", prefix, u8::from(*default)))
            }
            SequenceSpec::EventuallyPeriodic { set } => Term::atom(set.to_text()),
            SequenceSpec::Random { seed } => Term::call("random", vec![Term::atom(seed)]),
            SequenceSpec::Coded(c) => match c {
                CodedSpec::R { base } => Term::call("r", vec![b(base)]),
                CodedSpec::Rtilde { base } => Term::call("rtilde", vec![b(base)]),
                CodedSpec::Column { base, k } => Term::call("column", vec![b(base), Term::atom(k)]),
                CodedSpec::Join { left, right } => Term::call("join", vec![b(left), b(right)]),
                CodedSpec::JoinLeft { base } => Term::call("even", vec![b(base)]),
                CodedSpec::JoinRight { base } => Term::call("odd", vec![b(base)]),
            },
            SequenceSpec::DerivedView(d) => match d {
                DerivedSpec::Complement { base } => Term::call("complement", vec![b(base)]),
                DerivedSpec::Flip { base, positions } => {
                    let mut args = vec![b(base)];
                    args.extend(positions.iter().map(Term::atom));
                    Term::call("flip", args)
                }
                DerivedSpec::Xor { base, mask } => Term::call("xor", vec![b(base), b(mask)]),
                DerivedSpec::DyadicMask { rate, start, placement, seed } => Term::call(
                    "dyadic-mask",
                    vec![
                        Term::atom(format_ratio(rate)),
                        Term::atom(start),
                        Term::atom(match placement {
                            Placement::Random => "random",
                            Placement::Leading => "leading",
                        }),
                        Term::atom(seed),
                    ],
                ),
                DerivedSpec::Image { functional, base, budget } => Term::call(
                    "image",
                    vec![
                        Term::parse(functional).unwrap_or_else(|_| Term::atom(functional)),
                        b(base),
                        Term::atom(budget),
                    ],
                ),
            },
        }
    }

    /// Parse the text form, resolving bare identifiers through `env`.
    pub fn parse_with(text: &str, env: &HashMap<String, SequenceSpec>) -> Result<Self> {
        Self::from_term(&Term::parse(text)?, env)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &HashMap::new())
    }

    pub fn from_term(t: &Term, env: &HashMap<String, SequenceSpec>) -> Result<Self> {
        let sub = |i: usize| -> Result<Box<SequenceSpec>> { Ok(Box::new(Self::from_term(&t.args()[i], env)?)) };
        let parse_err = |msg: &str| Error::Parse { input: t.to_string(), message: msg.to_string() };
        if let Term::Atom(a) = t {
            return match a.as_str() {
                "zeros" => Ok(Self::zeros()),
                "ones" => Ok(Self::ones()),
                "evens" => Ok(Self::periodic_set(EventuallyPeriodicSet::evens())),
                "odds" => Ok(Self::periodic_set(EventuallyPeriodicSet::evens().complement())),
                s if s.starts_with("ep:") => Ok(Self::periodic_set(EventuallyPeriodicSet::from_text(s)?)),
                s if s.starts_with("prefix:") => {
                    let (bits, d) = s["prefix:".len()..]
                        .split_once('/')
                        .ok_or_else(|| parse_err("expected `prefix:BITS/DEFAULT`"))?;
                    parse_bits(bits)?;
                    let default = match d {
                        "0" => false,
                        "1" => true,
                        _ => return Err(parse_err("default must be 0 or 1")),
                    };
                    Ok(SequenceSpec::ExplicitPrefixWithDefault { prefix: bits.to_string(), default })
                }
                id => env.get(id).cloned().ok_or_else(|| Error::UnknownId(id.to_string())),
            };
        }
        match t.head() {
            "random" => {
                term::expect_arity(t, 1)?;
                Ok(Self::random(term::parse_u64(&t.args()[0])?))
            }
            "finite" => {
                let ps = t.args().iter().map(term::parse_u64).collect::<Result<Vec<_>>>()?;
                Ok(Self::finite(&ps))
            }
            "r" => {
                term::expect_arity(t, 1)?;
                Ok(SequenceSpec::Coded(CodedSpec::R { base: sub(0)? }))
            }
            "rtilde" => {
                term::expect_arity(t, 1)?;
                Ok(SequenceSpec::Coded(CodedSpec::Rtilde { base: sub(0)? }))
            }
            "column" => {
                term::expect_arity(t, 2)?;
                Ok(SequenceSpec::Coded(CodedSpec::Column { base: sub(0)?, k: term::parse_u64(&t.args()[1])? }))
            }
            "join" => {
                term::expect_arity(t, 2)?;
                Ok(SequenceSpec::Coded(CodedSpec::Join { left: sub(0)?, right: sub(1)? }))
            }
            "even" => {
                term::expect_arity(t, 1)?;
                Ok(SequenceSpec::Coded(CodedSpec::JoinLeft { base: sub(0)? }))
            }
            "odd" => {
                term::expect_arity(t, 1)?;
                Ok(SequenceSpec::Coded(CodedSpec::JoinRight { base: sub(0)? }))
            }
            "complement" => {
                term::expect_arity(t, 1)?;
                Ok(SequenceSpec::DerivedView(DerivedSpec::Complement { base: sub(0)? }))
            }
            "flip" => {
                if t.args().is_empty() {
                    return Err(parse_err("flip needs a base sequence"));
                }
                let positions = t.args()[1..].iter().map(term::parse_u64).collect::<Result<Vec<_>>>()?;
                Ok(SequenceSpec::DerivedView(DerivedSpec::Flip { base: sub(0)?, positions }))
            }
            "xor" => {
                term::expect_arity(t, 2)?;
                Ok(SequenceSpec::DerivedView(DerivedSpec::Xor { base: sub(0)?, mask: sub(1)? }))
            }
            "dyadic-mask" => {
                term::expect_arity(t, 4)?;
                let rate = parse_ratio(t.args()[0].as_atom().unwrap_or(""))?;
                let placement = match t.args()[2].as_atom() {
                    Some("random") => Placement::Random,
                    Some("leading") => Placement::Leading,
                    _ => return Err(parse_err("placement must be `random` or `leading`")),
                };
                Ok(SequenceSpec::DerivedView(DerivedSpec::DyadicMask {
                    rate,
                    start: term::parse_u64(&t.args()[1])?,
                    placement,
                    seed: term::parse_u64(&t.args()[3])?,
                }))
            }
            "image" => {
                if !(2..=3).contains(&t.args().len()) {
                    return Err(parse_err("image takes (functional, sequence[, budget])"));
                }
                let budget = match t.args().get(2) {
                    Some(b) => term::parse_u64(b)?,
                    None => DEFAULT_IMAGE_BUDGET,
                };
                Ok(SequenceSpec::DerivedView(DerivedSpec::Image {
                    functional: t.args()[0].to_string(),
                    base: sub(1)?,
                    budget,
                }))
            }
            other => Err(Error::UnknownId(other.to_string())),
        }
    }
}

pub const DEFAULT_IMAGE_BUDGET: u64 = 100_000;

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

// ---------------------------------------------------------------------------
// BitSequence
// ---------------------------------------------------------------------------

enum Rule {
    Prefix { bits: Vec<bool>, default: bool },
    Periodic(EventuallyPeriodicSet),
    Random { seed: u64 },
    R(BitSequence),
    Rtilde(BitSequence),
    Column(BitSequence, u64),
    Join(BitSequence, BitSequence),
    JoinLeft(BitSequence),
    JoinRight(BitSequence),
    Complement(BitSequence),
    Flip(BitSequence, BTreeSet<u64>),
    Xor(BitSequence, BitSequence),
    DyadicMask { rate: Rational, start: u64, placement: Placement, seed: u64 },
    Image { functional: crate::machine::Functional, base: BitSequence, budget: u64 },
}

struct Inner {
    spec: SequenceSpec,
    rule: Rule,
    memo: OnceLock<Box<[AtomicU8]>>,
}

/// A total 0/1 sequence given by a rule, with a memo of evaluated positions.
///
/// Cloning is cheap; clones share the memo.
#[derive(Clone)]
pub struct BitSequence(Arc<Inner>);

impl fmt::Debug for BitSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitSequence({})", self.0.spec)
    }
}

impl BitSequence {
    pub fn from_spec(spec: &SequenceSpec) -> Result<Self> {
        let build = |s: &SequenceSpec| BitSequence::from_spec(s);
        let rule = match spec {
            SequenceSpec::ExplicitPrefixWithDefault { prefix, default } => {
                Rule::Prefix { bits: parse_bits(prefix)?, default: *default }
            }
            SequenceSpec::EventuallyPeriodic { set } => Rule::Periodic(set.clone()),
            SequenceSpec::Random { seed } => Rule::Random { seed: *seed },
            SequenceSpec::Coded(c) => match c {
                CodedSpec::R { base } => Rule::R(build(base)?),
                CodedSpec::Rtilde { base } => Rule::Rtilde(build(base)?),
                CodedSpec::Column { base, k } => Rule::Column(build(base)?, *k),
                CodedSpec::Join { left, right } => Rule::Join(build(left)?, build(right)?),
                CodedSpec::JoinLeft { base } => Rule::JoinLeft(build(base)?),
                CodedSpec::JoinRight { base } => Rule::JoinRight(build(base)?),
            },
            SequenceSpec::DerivedView(d) => match d {
                DerivedSpec::Complement { base } => Rule::Complement(build(base)?),
                DerivedSpec::Flip { base, positions } => Rule::Flip(build(base)?, positions.iter().copied().collect()),
                DerivedSpec::Xor { base, mask } => Rule::Xor(build(base)?, build(mask)?),
                DerivedSpec::DyadicMask { rate, start, placement, seed } => {
                    if *rate > Ratio::from_integer(1) {
                        return Err(invalid("dyadic mask rate must lie in [0,1]"));
                    }
                    Rule::DyadicMask { rate: *rate, start: *start, placement: *placement, seed: *seed }
                }
                DerivedSpec::Image { functional, base, budget } => {
                    if *budget == 0 {
                        return Err(invalid("image budget must be positive"));
                    }
                    Rule::Image {
                        functional: crate::machine::parse_functional(functional)?,
                        base: build(base)?,
                        budget: *budget,
                    }
                }
            },
        };
        Ok(BitSequence(Arc::new(Inner { spec: spec.clone(), rule, memo: OnceLock::new() })))
    }

    /// Parse a text descriptor such as `rtilde(random(7))`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_spec(&SequenceSpec::parse(text)?)
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.0.spec
    }

    pub fn descriptor(&self) -> String {
        self.0.spec.to_string()
    }

    /// Bit at `n`.
    pub fn get(&self, n: u64) -> bool {
        if (n as usize) < MEMO_LEN {
            let memo = self.0.memo.get_or_init(|| (0..MEMO_LEN).map(|_| AtomicU8::new(0)).collect());
            let slot = &memo[n as usize];
            match slot.load(Ordering::Relaxed) {
                1 => return false,
                2 => return true,
                _ => {}
            }
            let b = self.eval(n);
            slot.store(1 + u8::from(b), Ordering::Relaxed);
            b
        } else {
            self.eval(n)
        }
    }

    pub fn bits(&self, window: Range<u64>) -> Vec<bool> {
        window.map(|n| self.get(n)).collect()
    }

    /// First 64 bits as a 0/1 string.
    pub fn prefix64(&self) -> String {
        bits_to_string(&self.bits(0..64))
    }

    /// Report form `{descriptor, parameters, prefix}`.
    pub fn report(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(&self.0.spec).expect("sequence specs serialize");
        if let serde_json::Value::Object(m) = &mut v {
            m.insert("text".into(), serde_json::Value::String(self.descriptor()));
            m.insert("prefix".into(), serde_json::Value::String(self.prefix64()));
        }
        v
    }

    fn eval(&self, n: u64) -> bool {
        match &self.0.rule {
            Rule::Prefix { bits, default } => bits.get(n as usize).copied().unwrap_or(*default),
            Rule::Periodic(set) => set.contains(n),
            Rule::Random { seed } => rng::hash2(*seed, n) & 1 == 1,
            Rule::R(base) => crate::codings::r_member(base, n),
            Rule::Rtilde(base) => crate::codings::rtilde_member(base, n),
            Rule::Column(base, k) => match crate::codings::column_position(n, *k) {
                Some(p) => base.get(p),
                None => false,
            },
            Rule::Join(a, b) => {
                if n.is_multiple_of(2) {
                    a.get(n / 2)
                } else {
                    b.get(n / 2)
                }
            }
            Rule::JoinLeft(x) => n.checked_mul(2).is_some_and(|p| x.get(p)),
            Rule::JoinRight(x) => n.checked_mul(2).and_then(|p| p.checked_add(1)).is_some_and(|p| x.get(p)),
            Rule::Complement(x) => !x.get(n),
            Rule::Flip(x, ps) => x.get(n) ^ ps.contains(&n),
            Rule::Xor(x, m) => x.get(n) ^ m.get(n),
            Rule::DyadicMask { rate, start, placement, seed } => dyadic_mask_bit(n, rate, *start, *placement, *seed),
            Rule::Image { functional, base, budget } => {
                crate::machine::run(functional, base, n, *budget).ok().and_then(|o| o.output()).unwrap_or(false)
            }
        }
    }
}

/// Membership in a dyadic mask; see [`DerivedSpec::DyadicMask`].
pub fn dyadic_mask_bit(n: u64, rate: &Rational, start: u64, placement: Placement, seed: u64) -> bool {
    if n == 0 {
        return false;
    }
    let b = 63 - n.leading_zeros();
    let size = 1u64 << b;
    if size < start {
        return false;
    }
    let count = ratio::floor_mul(rate, size);
    let offset = n - size;
    match placement {
        Placement::Leading => offset < count,
        Placement::Random => rng::permute_bits(offset, b, rng::derive_seed(seed, b as u64)) < count,
    }
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

/// `|{k < n : seq(k) = 1}| / n`.
pub fn density_at(seq: &BitSequence, n: u64) -> Result<Rational> {
    if n == 0 {
        return Err(invalid("density_at needs n >= 1"));
    }
    let ones = (0..n).filter(|&k| seq.get(k)).count() as u64;
    Ok(Ratio::new(ones, n))
}

/// Densities of initial segments for each `n` in `[from, to)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub from: u64,
    pub to: u64,
    #[serde(with = "ratio::serde_ratio_vec")]
    pub values: Vec<Rational>,
    #[serde(with = "ratio::serde_ratio")]
    pub min: Rational,
    #[serde(with = "ratio::serde_ratio")]
    pub max: Rational,
}

pub fn tail_density_window(seq: &BitSequence, from: u64, to: u64) -> Result<DensityProfile> {
    if from == 0 || from >= to {
        return Err(invalid(format!("density window [{from},{to}) must satisfy 1 <= from < to")));
    }
    let mut ones = (0..from).filter(|&k| seq.get(k)).count() as u64;
    let mut values = Vec::with_capacity((to - from) as usize);
    for n in from..to {
        values.push(Ratio::new(ones, n));
        if seq.get(n) {
            ones += 1;
        }
    }
    let min = *values.iter().min().expect("nonempty window");
    let max = *values.iter().max().expect("nonempty window");
    Ok(DensityProfile { from, to, values, min, max })
}

/// Fraction of members inside the dyadic block `[2^b, 2^(b+1))`.
pub fn block_density(seq: &BitSequence, b: u32) -> Rational {
    let lo = 1u64 << b;
    let ones = (lo..2 * lo).filter(|&k| seq.get(k)).count() as u64;
    Ratio::new(ones, lo)
}

/// Positions in `window` where `a` and `b` differ.
pub fn symmetric_difference_view(a: &BitSequence, b: &BitSequence, window: Range<u64>) -> BTreeSet<u64> {
    window.filter(|&n| a.get(n) != b.get(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> BitSequence {
        BitSequence::parse(s).unwrap()
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_at(&seq("ep:/10"), 100).unwrap(), Ratio::new(1, 2));
        assert_eq!(density_at(&seq("ones"), 10).unwrap(), Ratio::from_integer(1));
        let first_ten = seq("finite(0,1,2,3,4,5,6,7,8,9)");
        assert_eq!(density_at(&first_ten, 100).unwrap(), Ratio::new(1, 10));
        assert!(density_at(&first_ten, 0).is_err());
    }

    #[test]
    fn tail_window_examples() {
        let p = tail_density_window(&seq("ones"), 10, 12).unwrap();
        assert_eq!(p.values, vec![Ratio::from_integer(1); 2]);
        let p = tail_density_window(&seq("evens"), 10, 12).unwrap();
        assert_eq!(p.values, vec![Ratio::new(1, 2), Ratio::new(6, 11)]);
        assert_eq!((p.min, p.max), (Ratio::new(1, 2), Ratio::new(6, 11)));
        let p = tail_density_window(&seq("finite(0)"), 2, 4).unwrap();
        assert_eq!(p.values, vec![Ratio::new(1, 2), Ratio::new(1, 3)]);
        assert!(tail_density_window(&seq("ones"), 5, 5).is_err());
        assert!(tail_density_window(&seq("ones"), 0, 5).is_err());
    }

    #[test]
    fn symmetric_difference_examples() {
        let a = seq("random(3)");
        assert!(symmetric_difference_view(&a, &a, 0..64).is_empty());
        let flipped = seq("flip(random(3),3)");
        assert_eq!(symmetric_difference_view(&a, &flipped, 0..64), BTreeSet::from([3]));
        let d = symmetric_difference_view(&seq("zeros"), &seq("ep:/01"), 0..6);
        assert_eq!(d, BTreeSet::from([1, 3, 5]));
    }

    #[test]
    fn periodic_membership_and_text() {
        let s = EventuallyPeriodicSet::from_text("ep:110/01").unwrap();
        let got: Vec<bool> = (0..8).map(|n| s.contains(n)).collect();
        assert_eq!(got, vec![true, true, false, false, true, false, true, false]);
        assert_eq!(s.to_text(), "ep:110/01");
        assert!(EventuallyPeriodicSet::from_text("ep:1/").is_err());
        assert_eq!(s.members_from(0).take(3).collect::<Vec<_>>(), vec![0, 1, 4]);
        let finite = EventuallyPeriodicSet::from_text("ep:0101/0").unwrap();
        assert_eq!(finite.members_from(0).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn detection_finds_smallest_period_then_transient() {
        let s = EventuallyPeriodicSet::from_text("ep:111/001").unwrap();
        let bits: Vec<bool> = (0..40).map(|n| s.contains(n)).collect();
        let found = detect_eventually_periodic(&bits, 8, 10).unwrap();
        assert_eq!(found.period(), 3);
        assert!((0..40).all(|n| found.contains(n) == s.contains(n)));
        let noise = seq("random(9)").bits(0..64);
        assert!(detect_eventually_periodic(&noise, 8, 16).is_none());
    }

    #[test]
    fn dyadic_mask_counts_are_exact() {
        let m = seq("dyadic-mask(3/8,8,random,5)");
        for b in 0..12u32 {
            let lo = 1u64 << b;
            let ones = (lo..2 * lo).filter(|&k| m.get(k)).count() as u64;
            let expected = if lo < 8 { 0 } else { 3 * lo / 8 };
            assert_eq!(ones, expected, "block {b}");
        }
        let lead = seq("dyadic-mask(1/2,1,leading,0)");
        assert_eq!(lead.bits(8..16), vec![true, true, true, true, false, false, false, false]);
    }

    #[test]
    fn text_round_trip() {
        for s in [
            "ep:/10",
            "prefix:0110/1",
            "random(4)",
            "rtilde(flip(random(1),3,4))",
            "join(r(ep:/1),complement(evens))",
            "column(xor(random(2),dyadic-mask(1/8,4,leading,0)),3)",
            "image(xor(2,0,2,1),random(5),1000)",
        ] {
            let spec = SequenceSpec::parse(s).unwrap();
            let again = SequenceSpec::parse(&spec.to_string()).unwrap();
            assert_eq!(spec, again, "{s}");
        }
        assert_eq!(SequenceSpec::parse("evens").unwrap().to_string(), "ep:/10");
        assert!(matches!(SequenceSpec::parse("nope"), Err(Error::UnknownId(_))));
    }

    #[test]
    fn json_round_trip_and_report() {
        let spec = SequenceSpec::parse("rtilde(random(3))").unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SequenceSpec>(&json).unwrap(), spec);
        let r = BitSequence::from_spec(&spec).unwrap().report();
        assert_eq!(r["descriptor"], "coded");
        assert_eq!(r["prefix"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn memo_is_invisible() {
        let a = seq("random(77)");
        let first: Vec<bool> = (0..2000).map(|n| a.get(n)).collect();
        let again: Vec<bool> = (0..2000).map(|n| a.get(n)).collect();
        assert_eq!(first, again);
        let fresh = seq("random(77)");
        assert_eq!(fresh.get(1 << 20), a.get(1 << 20));
    }
}
