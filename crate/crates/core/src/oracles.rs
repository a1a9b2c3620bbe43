//! Partial oracles with delayed resolution, and the corruption adversaries
//! that derive them from a reference sequence.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::ratio::{self, format_ratio, Rational};
use crate::rng;
use crate::sequences::{dyadic_mask_bit, BitSequence, EventuallyPeriodicSet, Placement, SequenceSpec};

/// A defined oracle bit together with the number of ticks it takes to arrive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OracleEntry {
    pub bit: bool,
    pub delay: u64,
}

/// Anything a functional can query.
pub trait Oracle: Send + Sync {
    /// The entry at `position`, or `None` if the oracle is undefined there.
    fn entry(&self, position: u64) -> Option<OracleEntry>;
}

impl Oracle for BitSequence {
    fn entry(&self, position: u64) -> Option<OracleEntry> {
        Some(OracleEntry { bit: self.get(position), delay: 0 })
    }
}

impl<T: Oracle + ?Sized> Oracle for &T {
    fn entry(&self, position: u64) -> Option<OracleEntry> {
        (**self).entry(position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryResult {
    Resolved(bool),
    Pending,
}

/// Resolves iff the oracle has an entry at `position` whose delay is at most
/// `ticks_available`.
pub fn oracle_query(oracle: &dyn Oracle, position: u64, ticks_available: u64) -> QueryResult {
    match oracle.entry(position) {
        Some(e) if e.delay <= ticks_available => QueryResult::Resolved(e.bit),
        _ => QueryResult::Pending,
    }
}

/// `n ↦ scale·n + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Affine {
    pub scale: u64,
    pub offset: u64,
}

impl Affine {
    pub fn new(scale: u64, offset: u64) -> Self {
        Affine { scale, offset }
    }

    pub fn apply(&self, n: u64) -> Option<u64> {
        n.checked_mul(self.scale)?.checked_add(self.offset)
    }

    pub fn is_injective(&self) -> bool {
        self.scale > 0
    }

    /// The unique preimage of `m`, if `m` is in the range.
    pub fn preimage(&self, m: u64) -> Option<u64> {
        if m < self.offset {
            return None;
        }
        let d = m - self.offset;
        match self.scale {
            0 => (d == 0).then_some(0),
            s => d.is_multiple_of(s).then_some(d / s),
        }
    }
}

// ---------------------------------------------------------------------------
// Partial oracles
// ---------------------------------------------------------------------------

/// How positions below a dyadic-domain start are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrefixPolicy {
    #[default]
    Drop,
    Keep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum DelayRule {
    Zero,
    Constant {
        delay: u64,
    },
    /// `delay(p) = scale·p + offset`, saturating.
    Affine {
        scale: u64,
        offset: u64,
    },
    /// `delay(p) = hash2(seed, p) mod (max + 1)`.
    Seeded {
        max: u64,
    },
}

impl DelayRule {
    fn delay(&self, position: u64, seed: u64) -> u64 {
        match self {
            DelayRule::Zero => 0,
            DelayRule::Constant { delay } => *delay,
            DelayRule::Affine { scale, offset } => scale.saturating_mul(position).saturating_add(*offset),
            DelayRule::Seeded { max } => rng::hash2(seed, position) % max.saturating_add(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Domain {
    All,
    Except(BTreeSet<u64>),
    Only(BTreeSet<u64>),
    Dyadic { keep: Rational, start: u64, prefix: PrefixPolicy, seed: u64 },
}

impl Domain {
    fn contains(&self, p: u64) -> bool {
        match self {
            Domain::All => true,
            Domain::Except(s) => !s.contains(&p),
            Domain::Only(s) => s.contains(&p),
            Domain::Dyadic { keep, start, prefix, seed } => {
                if p < *start || p == 0 {
                    return *prefix == PrefixPolicy::Keep;
                }
                let drop = Ratio::from_integer(1) - *keep;
                !dyadic_mask_bit(p, &drop, 0, Placement::Random, *seed)
            }
        }
    }
}

/// Which coding a lifted oracle presents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coding {
    R,
    Rtilde,
}

enum Source {
    Restricted { base: BitSequence, domain: Domain, delay: DelayRule, seed: u64 },
    Finite(BTreeMap<u64, OracleEntry>),
    Mapped { inner: PartialOracle, map: Affine },
    Lifted { inner: PartialOracle, coding: Coding },
}

/// A partial 0/1 function with per-position delays.
///
/// Oracles built from a reference sequence (and the drop/domain
/// corruptions) take every bit from that sequence, so they never
/// lie about it.
#[derive(Clone)]
pub struct PartialOracle(Arc<Source>);

impl fmt::Debug for PartialOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialOracle({})", self.domain_descriptor())
    }
}

impl PartialOracle {
    pub fn total(base: BitSequence) -> Self {
        Self::with_parts(base, Domain::All, DelayRule::Zero, 0)
    }

    pub fn except(base: BitSequence, dropped: impl IntoIterator<Item = u64>) -> Self {
        Self::with_parts(base, Domain::Except(dropped.into_iter().collect()), DelayRule::Zero, 0)
    }

    pub fn only(base: BitSequence, positions: impl IntoIterator<Item = u64>) -> Self {
        Self::with_parts(base, Domain::Only(positions.into_iter().collect()), DelayRule::Zero, 0)
    }

    /// Defined exactly on `positions`, with delay from `delay`.
    pub fn only_delayed(
        base: BitSequence,
        positions: impl IntoIterator<Item = u64>,
        delay: DelayRule,
        seed: u64,
    ) -> Self {
        Self::with_parts(base, Domain::Only(positions.into_iter().collect()), delay, seed)
    }

    pub fn with_delays(base: BitSequence, delay: DelayRule, seed: u64) -> Self {
        Self::with_parts(base, Domain::All, delay, seed)
    }

    /// Per dyadic block `[2^b, 2^(b+1))` with `2^b >= start`, exactly
    /// `ceil(keep·2^b)` positions are defined.
    pub fn dyadic(base: BitSequence, keep: Rational, start: u64, prefix: PrefixPolicy, seed: u64) -> Self {
        Self::with_parts(base, Domain::Dyadic { keep, start, prefix, seed }, DelayRule::Zero, 0)
    }

    /// An explicit finite table of entries (no reference sequence).
    pub fn finite(entries: impl IntoIterator<Item = (u64, OracleEntry)>) -> Self {
        PartialOracle(Arc::new(Source::Finite(entries.into_iter().collect())))
    }

    pub fn finite_bits(bits: impl IntoIterator<Item = (u64, bool)>) -> Self {
        Self::finite(bits.into_iter().map(|(p, bit)| (p, OracleEntry { bit, delay: 0 })))
    }

    pub fn empty() -> Self {
        Self::finite(std::iter::empty())
    }

    /// Defined at `map(n)` exactly when `inner` is defined at `n`, with the same
    /// bit and delay.
    pub fn mapped(inner: PartialOracle, map: Affine) -> Self {
        PartialOracle(Arc::new(Source::Mapped { inner, map }))
    }

    /// A partial oracle for `R(S)` or `R̃(S)` from a partial oracle for `S`.
    ///
    /// Position 0 is in neither coding and is answered immediately.
    pub fn lifted(inner: PartialOracle, coding: Coding) -> Self {
        PartialOracle(Arc::new(Source::Lifted { inner, coding }))
    }

    fn with_parts(base: BitSequence, domain: Domain, delay: DelayRule, seed: u64) -> Self {
        PartialOracle(Arc::new(Source::Restricted { base, domain, delay, seed }))
    }

    pub fn is_defined(&self, position: u64) -> bool {
        self.entry(position).is_some()
    }

    /// Defined positions inside `window`.
    pub fn defined_in(&self, window: std::ops::Range<u64>) -> Vec<u64> {
        window.filter(|&p| self.is_defined(p)).collect()
    }

    pub fn domain_descriptor(&self) -> String {
        match &*self.0 {
            Source::Restricted { domain, .. } => match domain {
                Domain::All => "total".into(),
                Domain::Except(s) => format!("cofinite-minus:{:?}", s),
                Domain::Only(s) => format!("finite-support:{:?}", s),
                Domain::Dyadic { keep, start, .. } => {
                    format!("masked:dyadic-keep({},{})", format_ratio(keep), start)
                }
            },
            Source::Finite(m) => format!("finite-support:{:?}", m.keys().collect::<Vec<_>>()),
            Source::Mapped { inner, map } => {
                format!("masked:image({}n+{} of {})", map.scale, map.offset, inner.domain_descriptor())
            }
            Source::Lifted { inner, coding } => format!("masked:{coding:?}-lift({})", inner.domain_descriptor()),
        }
    }
}

impl Oracle for PartialOracle {
    fn entry(&self, position: u64) -> Option<OracleEntry> {
        match &*self.0 {
            Source::Restricted { base, domain, delay, seed } => domain
                .contains(position)
                .then(|| OracleEntry { bit: base.get(position), delay: delay.delay(position, *seed) }),
            Source::Finite(m) => m.get(&position).copied(),
            Source::Mapped { inner, map } => inner.entry(map.preimage(position)?),
            Source::Lifted { inner, coding } => {
                if position == 0 {
                    return Some(OracleEntry { bit: false, delay: 0 });
                }
                let n = match coding {
                    Coding::R => position.trailing_zeros() as u64,
                    Coding::Rtilde => 63 - position.leading_zeros() as u64,
                };
                inner.entry(n)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Corruption specs
// ---------------------------------------------------------------------------

/// One quantifier instance over oracles: how a view deviates from the
/// reference sequence.
///
/// Canonical JSON: `{"kind": ..., "parameters": {...}, "seed": n}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    #[serde(flatten)]
    pub kind: CorruptionKind,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CorruptionKind {
    /// Flip the listed bits.
    FiniteError { positions: Vec<u64> },
    /// Leave the listed bits undefined.
    FiniteDrop { positions: Vec<u64> },
    /// Same semantics as `finite-drop`.
    CofiniteDomain { dropped: Vec<u64> },
    /// Exactly `ceil(keep·2^b)` defined positions per dyadic block at or
    /// beyond `start`.
    Density1Domain {
        #[serde(with = "ratio::serde_ratio")]
        keep: Rational,
        #[serde(default)]
        start: u64,
        #[serde(default)]
        prefix: PrefixPolicy,
    },
    /// Exactly `floor(rate·2^b)` flipped positions per dyadic block at or
    /// beyond `start`.
    DensityError {
        #[serde(with = "ratio::serde_ratio")]
        rate: Rational,
        #[serde(default)]
        start: u64,
        #[serde(default = "default_placement")]
        placement: Placement,
    },
    /// Flip exactly the members of an eventually periodic set.
    EventuallyPeriodicDifference { set: EventuallyPeriodicSet },
    /// A strictly growing chain of finite domains.
    InfiniteSparseDomain { chain: Vec<Vec<u64>> },
    /// Total domain with resolution delays.
    DelayProfile { rule: DelayRule },
}

fn default_placement() -> Placement {
    Placement::Random
}

const ERROR_KEYS: &[&str] = &["rate", "placement", "set"];
const DROP_KEYS: &[&str] = &["dropped", "keep", "prefix", "chain"];

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, seed: u64) -> Self {
        CorruptionSpec { kind, seed }
    }

    pub fn finite_error(positions: Vec<u64>) -> Self {
        Self::new(CorruptionKind::FiniteError { positions }, 0)
    }

    pub fn finite_drop(positions: Vec<u64>) -> Self {
        Self::new(CorruptionKind::FiniteDrop { positions }, 0)
    }

    pub fn density1_domain(keep: Rational, start: u64, seed: u64) -> Self {
        Self::new(CorruptionKind::Density1Domain { keep, start, prefix: PrefixPolicy::Drop }, seed)
    }

    pub fn density_error(rate: Rational, start: u64, placement: Placement, seed: u64) -> Self {
        Self::new(CorruptionKind::DensityError { rate, start, placement }, seed)
    }

    pub fn periodic_difference(set: EventuallyPeriodicSet) -> Self {
        Self::new(CorruptionKind::EventuallyPeriodicDifference { set }, 0)
    }

    pub fn sparse_chain(chain: Vec<Vec<u64>>) -> Self {
        Self::new(CorruptionKind::InfiniteSparseDomain { chain }, 0)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            CorruptionKind::FiniteError { .. } => "finite-error",
            CorruptionKind::FiniteDrop { .. } => "finite-drop",
            CorruptionKind::CofiniteDomain { .. } => "cofinite-domain",
            CorruptionKind::Density1Domain { .. } => "density1-domain",
            CorruptionKind::DensityError { .. } => "density-error",
            CorruptionKind::EventuallyPeriodicDifference { .. } => "eventually-periodic-difference",
            CorruptionKind::InfiniteSparseDomain { .. } => "infinite-sparse-domain",
            CorruptionKind::DelayProfile { .. } => "delay-profile",
        }
    }

    /// Whether the kind corrupts values (total view) rather than the domain.
    pub fn is_value_corrupting(&self) -> bool {
        matches!(
            self.kind,
            CorruptionKind::FiniteError { .. }
                | CorruptionKind::DensityError { .. }
                | CorruptionKind::EventuallyPeriodicDifference { .. }
        )
    }

    /// Parse the canonical JSON encoding.
    ///
    /// A document that carries parameters of both regimes (wrong bits and
    /// missing bits) is rejected as an invalid argument.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        Self::from_value(v)
    }

    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        if let Some(params) = v.get("parameters").and_then(|p| p.as_object()) {
            let error = params.keys().any(|k| ERROR_KEYS.contains(&k.as_str()));
            let drop = params.keys().any(|k| DROP_KEYS.contains(&k.as_str()));
            let kind = v.get("kind").and_then(|k| k.as_str()).unwrap_or("");
            let value_kind = matches!(kind, "finite-error" | "density-error" | "eventually-periodic-difference");
            let domain_kind =
                matches!(kind, "finite-drop" | "cofinite-domain" | "density1-domain" | "infinite-sparse-domain");
            if (error && drop) || (value_kind && drop) || (domain_kind && error) {
                return Err(invalid(format!("corruption spec `{kind}` mixes error and drop semantics")));
            }
        }
        let spec: CorruptionSpec = serde_json::from_value(v).map_err(|e| invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("corruption specs serialize")
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            CorruptionKind::Density1Domain { keep, .. } => {
                if *keep.numer() == 0 || *keep > Ratio::from_integer(1) {
                    return Err(invalid(format!("keep fraction {} not in (0,1]", format_ratio(keep))));
                }
            }
            CorruptionKind::DensityError { rate, .. } => {
                if *rate > Ratio::from_integer(1) {
                    return Err(invalid(format!("error rate {} not in [0,1]", format_ratio(rate))));
                }
            }
            CorruptionKind::InfiniteSparseDomain { chain } => {
                if chain.is_empty() {
                    return Err(invalid("domain chain is empty"));
                }
                for w in chain.windows(2) {
                    let (a, b): (BTreeSet<u64>, BTreeSet<u64>) =
                        (w[0].iter().copied().collect(), w[1].iter().copied().collect());
                    if !(a.is_subset(&b) && b.len() > a.len()) {
                        return Err(invalid("domain chain is not strictly increasing"));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

/// The result of corrupting a sequence: a wrong-bits total view or a
/// missing-bits partial oracle.
#[derive(Debug, Clone)]
pub enum CorruptedView {
    Total(BitSequence),
    Partial(PartialOracle),
}

impl CorruptedView {
    pub fn as_total(&self) -> Option<&BitSequence> {
        match self {
            CorruptedView::Total(s) => Some(s),
            CorruptedView::Partial(_) => None,
        }
    }

    pub fn as_partial(&self) -> Option<&PartialOracle> {
        match self {
            CorruptedView::Partial(p) => Some(p),
            CorruptedView::Total(_) => None,
        }
    }
}

impl Oracle for CorruptedView {
    fn entry(&self, position: u64) -> Option<OracleEntry> {
        match self {
            CorruptedView::Total(s) => s.entry(position),
            CorruptedView::Partial(p) => p.entry(position),
        }
    }
}

/// Apply `spec` to `seq`. For a domain chain the last stage is used; see
/// [`oracle_for_stage`].
pub fn oracle_for(seq: &BitSequence, spec: &CorruptionSpec) -> Result<CorruptedView> {
    spec.validate()?;
    let base = seq.spec().clone();
    let view = match &spec.kind {
        CorruptionKind::FiniteError { positions } => {
            CorruptedView::Total(BitSequence::from_spec(&base.flip(positions.clone()))?)
        }
        CorruptionKind::DensityError { rate, start, placement } => {
            let mask = SequenceSpec::DerivedView(crate::sequences::DerivedSpec::DyadicMask {
                rate: *rate,
                start: *start,
                placement: *placement,
                seed: spec.seed,
            });
            CorruptedView::Total(BitSequence::from_spec(&base.xor(mask))?)
        }
        CorruptionKind::EventuallyPeriodicDifference { set } => {
            CorruptedView::Total(BitSequence::from_spec(&base.xor(SequenceSpec::periodic_set(set.clone())))?)
        }
        CorruptionKind::FiniteDrop { positions } => {
            CorruptedView::Partial(PartialOracle::except(seq.clone(), positions.iter().copied()))
        }
        CorruptionKind::CofiniteDomain { dropped } => {
            CorruptedView::Partial(PartialOracle::except(seq.clone(), dropped.iter().copied()))
        }
        CorruptionKind::Density1Domain { keep, start, prefix } => {
            CorruptedView::Partial(PartialOracle::dyadic(seq.clone(), *keep, *start, *prefix, spec.seed))
        }
        CorruptionKind::InfiniteSparseDomain { chain } => {
            return oracle_for_stage(seq, spec, chain.len() - 1);
        }
        CorruptionKind::DelayProfile { rule } => {
            CorruptedView::Partial(PartialOracle::with_delays(seq.clone(), rule.clone(), spec.seed))
        }
    };
    Ok(view)
}

/// Apply stage `stage` of a domain chain.
pub fn oracle_for_stage(seq: &BitSequence, spec: &CorruptionSpec, stage: usize) -> Result<CorruptedView> {
    match &spec.kind {
        CorruptionKind::InfiniteSparseDomain { chain } => {
            spec.validate()?;
            let d = chain.get(stage).ok_or_else(|| invalid(format!("chain has no stage {stage}")))?;
            Ok(CorruptedView::Partial(PartialOracle::only(seq.clone(), d.iter().copied())))
        }
        _ => {
            if stage != 0 {
                return Err(invalid("only domain chains have stages"));
            }
            oracle_for(seq, spec)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::symmetric_difference_view;

    fn a() -> BitSequence {
        BitSequence::parse("random(21)").unwrap()
    }

    #[test]
    fn finite_drop_is_undefined_exactly_there() {
        let v = oracle_for(&a(), &CorruptionSpec::finite_drop(vec![5])).unwrap();
        let p = v.as_partial().unwrap();
        assert_eq!((0..64).filter(|&i| !p.is_defined(i)).collect::<Vec<_>>(), vec![5]);
    }

    #[test]
    fn finite_error_flips_exactly_there() {
        let v = oracle_for(&a(), &CorruptionSpec::finite_error(vec![5])).unwrap();
        let t = v.as_total().unwrap();
        assert_eq!(symmetric_difference_view(&a(), t, 0..64), BTreeSet::from([5]));
    }

    #[test]
    fn dyadic_keep_fraction_is_exact() {
        let spec = CorruptionSpec::density1_domain(Ratio::new(7, 8), 0, 1);
        let p = oracle_for(&a(), &spec).unwrap();
        let p = p.as_partial().unwrap();
        for b in 3..14u32 {
            let lo = 1u64 << b;
            let defined = (lo..2 * lo).filter(|&k| p.is_defined(k)).count() as u64;
            assert_eq!(Ratio::new(defined, lo), Ratio::new(7, 8), "block {b}");
        }
    }

    #[test]
    fn dyadic_prefix_policy() {
        let drop = PartialOracle::dyadic(a(), Ratio::new(1, 2), 8, PrefixPolicy::Drop, 0);
        assert!((0..8).all(|k| !drop.is_defined(k)));
        let keep = PartialOracle::dyadic(a(), Ratio::new(1, 2), 8, PrefixPolicy::Keep, 0);
        assert!((0..8).all(|k| keep.is_defined(k)));
    }

    #[test]
    fn query_examples() {
        let o = PartialOracle::finite([(7, OracleEntry { bit: true, delay: 3 })]);
        assert_eq!(oracle_query(&o, 7, 3), QueryResult::Resolved(true));
        assert_eq!(oracle_query(&o, 7, 2), QueryResult::Pending);
        assert_eq!(oracle_query(&o, 9, u64::MAX), QueryResult::Pending);
    }

    #[test]
    fn json_encoding_is_canonical() {
        let spec = CorruptionSpec::density1_domain(Ratio::new(7, 8), 8, 3);
        let json = spec.to_json();
        assert_eq!(
            json,
            r#"{"kind":"density1-domain","parameters":{"keep":"7/8","start":8,"prefix":"drop"},"seed":3}"#
        );
        assert_eq!(CorruptionSpec::from_json(&json).unwrap(), spec);
    }

    #[test]
    fn mixed_semantics_rejected() {
        let bad = r#"{"kind":"finite-error","parameters":{"positions":[1],"dropped":[2]},"seed":0}"#;
        let err = CorruptionSpec::from_json(bad).unwrap_err();
        assert!(err.to_string().contains("mixes error and drop"), "{err}");
        let bad = r#"{"kind":"density1-domain","parameters":{"keep":"1/2","rate":"1/4"}}"#;
        assert!(CorruptionSpec::from_json(bad).is_err());
    }

    #[test]
    fn well_formedness() {
        assert!(CorruptionSpec::density1_domain(Ratio::new(0, 1), 0, 0).validate().is_err());
        assert!(CorruptionSpec::density1_domain(Ratio::new(9, 8), 0, 0).validate().is_err());
        assert!(CorruptionSpec::sparse_chain(vec![vec![1, 2], vec![1, 2]]).validate().is_err());
        assert!(CorruptionSpec::sparse_chain(vec![vec![1], vec![1, 2]]).validate().is_ok());
    }

    #[test]
    fn mapped_and_lifted_views() {
        let b = PartialOracle::finite_bits([(3, true)]);
        let m = PartialOracle::mapped(b, Affine::new(2, 0));
        assert_eq!(m.entry(6).map(|e| e.bit), Some(true));
        assert!(m.entry(7).is_none());
        assert!(m.entry(3).is_none());

        let s = PartialOracle::except(BitSequence::parse("finite(2)").unwrap(), [1]);
        let lifted = PartialOracle::lifted(s, Coding::Rtilde);
        assert_eq!(lifted.entry(5).map(|e| e.bit), Some(true));
        assert!(lifted.entry(2).is_none() && lifted.entry(3).is_none());
        assert_eq!(lifted.entry(0).map(|e| e.bit), Some(false));
    }

    #[test]
    fn delays_do_not_change_values() {
        let spec = CorruptionSpec::new(CorruptionKind::DelayProfile { rule: DelayRule::Seeded { max: 5 } }, 9);
        let v = oracle_for(&a(), &spec).unwrap();
        for p in 0..200 {
            let e = v.entry(p).unwrap();
            assert_eq!(e.bit, a().get(p));
            assert!(e.delay <= 5);
        }
    }
}
