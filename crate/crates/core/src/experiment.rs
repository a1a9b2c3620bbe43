//! Batch experiments: a JSON config naming sequences, functionals, checks,
//! recoveries and deductions, run deterministically into JSON reports.
//!
//! Every item is computed twice and the two serialized reports compared; a
//! difference is a hard [`Error::Nondeterminism`].

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::checkers::{check, CheckParams, CheckReport, Reducibility};
use crate::codings::{
    coarse_budget, mf_embedding_reduction, recover_from_coarse_rtilde, recover_from_cofinite_r,
    recover_from_generic_rtilde, Recovery,
};
use crate::deduction::{
    deduction_closure, exact_rank_counting, random_sigma, DeductionMode, DeductionTable, FinitePartialOracle, Universe,
};
use crate::error::{invalid, Error, Result};
use crate::machine::{parse_functional_with, run, Functional};
use crate::oracles::{oracle_for, Coding, CorruptedView, CorruptionSpec, PartialOracle};
use crate::rng::SplitMix64;
use crate::sequences::{BitSequence, EventuallyPeriodicSet, SequenceSpec};
use crate::transformers::transform;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub sequences: Vec<SequenceDecl>,
    #[serde(default)]
    pub functionals: Vec<FunctionalDecl>,
    #[serde(default)]
    pub checks: Vec<CheckItem>,
    #[serde(default)]
    pub recoveries: Vec<RecoveryItem>,
    #[serde(default)]
    pub deductions: Vec<DeductionItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDecl {
    pub id: String,
    /// Sequence text; may mention earlier ids.
    pub descriptor: String,
}

/// Either a term (which may mention earlier ids) or a transformer applied to
/// an earlier id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalDecl {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub term: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckItem {
    pub id: String,
    pub reducibility: Reducibility,
    pub functional: String,
    pub a: String,
    pub b: String,
    #[serde(default)]
    pub params: CheckParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryAlgorithm {
    /// Block search on a partial oracle for ℛ̃(S).
    GenericRtilde,
    /// Block vote on a total view of ℛ̃(S).
    CoarseRtilde,
    /// Column search on a partial oracle for ℛ(S).
    CofiniteR,
    /// Column-dovetailed search for Φ on a view of ℛ(S).
    MfEmbedding,
}

impl RecoveryAlgorithm {
    fn coding(self) -> Coding {
        match self {
            Self::GenericRtilde | Self::CoarseRtilde => Coding::Rtilde,
            Self::CofiniteR | Self::MfEmbedding => Coding::R,
        }
    }
}

/// Which sequence the corruption is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorruptionTarget {
    /// The coded sequence ℛ(S) or ℛ̃(S).
    #[default]
    Code,
    /// `S` itself, lifted through the coding.
    Base,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RecoveryItem {
    pub id: String,
    pub algorithm: RecoveryAlgorithm,
    pub sequence: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corruption: Option<CorruptionSpec>,
    #[serde(default)]
    pub corrupt: CorruptionTarget,
    pub window: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Required for `mf-embedding`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    /// Inputs at or beyond this must be defined for a pass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defined_from: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", rename_all_fields = "camelCase", deny_unknown_fields)]
pub enum SigmaSource {
    Explicit(Vec<FinitePartialOracle>),
    Universe { position_bound: u64, max_size: usize },
    Random { count: usize, seed: u64, bound: u64, max_relevant: usize, max_other: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DeductionItem {
    pub id: String,
    pub functional: String,
    pub mode: DeductionMode,
    pub inputs: Vec<u64>,
    pub sigmas: SigmaSource,
    /// Compare every rank with the counting formula.
    #[serde(default)]
    pub check_exact: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        if c.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(invalid(format!("schemaVersion: expected {CONFIG_SCHEMA_VERSION}, got {}", c.schema_version)));
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty() && self.recoveries.is_empty() && self.deductions.is_empty()
    }
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

/// Named sequences and functionals.
#[derive(Default, Clone)]
pub struct Registry {
    seq_specs: HashMap<String, SequenceSpec>,
    sequences: HashMap<String, BitSequence>,
    functionals: HashMap<String, Functional>,
}

fn at(field: String) -> impl FnOnce(Error) -> Error {
    move |e| match e {
        Error::UnknownId(id) => Error::InvalidArgument(format!("{field}: unknown id `{id}`")),
        other => Error::InvalidArgument(format!("{field}: {other}")),
    }
}

impl Registry {
    pub fn add_sequence(&mut self, id: &str, descriptor: &str) -> Result<BitSequence> {
        let spec = SequenceSpec::parse_with(descriptor, &self.seq_specs)?;
        let seq = BitSequence::from_spec(&spec)?;
        self.seq_specs.insert(id.to_string(), spec);
        self.sequences.insert(id.to_string(), seq.clone());
        Ok(seq)
    }

    pub fn add_functional(&mut self, id: &str, f: Functional) {
        self.functionals.insert(id.to_string(), f);
    }

    /// A registered id or inline sequence text.
    pub fn sequence(&self, s: &str) -> Result<BitSequence> {
        if let Some(q) = self.sequences.get(s) {
            return Ok(q.clone());
        }
        BitSequence::from_spec(&SequenceSpec::parse_with(s, &self.seq_specs)?)
    }

    /// A registered id or inline functional term.
    pub fn functional(&self, s: &str) -> Result<Functional> {
        if let Some(f) = self.functionals.get(s) {
            return Ok(f.clone());
        }
        parse_functional_with(s, &self.functionals)
    }

    pub fn functional_ids(&self) -> BTreeMap<String, String> {
        self.functionals.iter().map(|(k, v)| (k.clone(), v.id())).collect()
    }

    pub fn declare(&mut self, config: &ExperimentConfig) -> Result<()> {
        for (i, s) in config.sequences.iter().enumerate() {
            self.add_sequence(&s.id, &s.descriptor).map_err(at(format!("sequences[{i}] ({})", s.id)))?;
        }
        for (i, d) in config.functionals.iter().enumerate() {
            let field = format!("functionals[{i}] ({})", d.id);
            let f = match (&d.term, &d.transform, &d.of) {
                (Some(t), None, None) => self.functional(t).map_err(at(field))?,
                (None, Some(op), Some(of)) => {
                    let base = self.functional(of).map_err(at(format!("{field}.of")))?;
                    transform(op, &base).map_err(at(format!("{field}.transform")))?
                }
                _ => return Err(invalid(format!("{field}: give either `term` or both `transform` and `of`"))),
            };
            self.add_functional(&d.id, f);
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Items
// ---------------------------------------------------------------------------

pub fn run_check(reg: &Registry, item: &CheckItem) -> Result<CheckReport> {
    let field = |k: &str| format!("checks[{}].{k}", item.id);
    let f = reg.functional(&item.functional).map_err(at(field("functional")))?;
    let a = reg.sequence(&item.a).map_err(at(field("a")))?;
    let b = reg.sequence(&item.b).map_err(at(field("b")))?;
    check(item.reducibility, &f, &a, &b, &item.params).map_err(at(field("params")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecoveryVerdict {
    Correct,
    Wrong,
    Undefined,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecoveryRow {
    #[serde(flatten)]
    pub recovery: Recovery,
    pub expected: u8,
    pub verdict: RecoveryVerdict,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RecoveryReport {
    pub schema_version: u32,
    pub id: String,
    pub algorithm: RecoveryAlgorithm,
    pub sequence: String,
    pub oracle: String,
    pub budget: u64,
    pub passed: bool,
    pub rows: Vec<RecoveryRow>,
}

fn coded(s: &BitSequence, coding: Coding) -> Result<BitSequence> {
    let spec = s.spec().clone();
    BitSequence::from_spec(&match coding {
        Coding::R => spec.r(),
        Coding::Rtilde => spec.rtilde(),
    })
}

pub fn run_recovery(reg: &Registry, item: &RecoveryItem) -> Result<RecoveryReport> {
    let field = |k: &str| format!("recoveries[{}].{k}", item.id);
    let s = reg.sequence(&item.sequence).map_err(at(field("sequence")))?;
    let coding = item.algorithm.coding();
    let (oracle, desc) = match (&item.corruption, item.corrupt) {
        (None, _) => {
            let c = coded(&s, coding)?;
            let d = c.descriptor();
            (CorruptedView::Total(c), d)
        }
        (Some(spec), CorruptionTarget::Code) => {
            let c = coded(&s, coding)?;
            let d = format!("{} under {}", c.descriptor(), spec.to_json());
            (oracle_for(&c, spec).map_err(at(field("corruption")))?, d)
        }
        (Some(spec), CorruptionTarget::Base) => {
            let d = format!("{coding:?} lift of {} under {}", s.descriptor(), spec.to_json());
            match oracle_for(&s, spec).map_err(at(field("corruption")))? {
                CorruptedView::Total(t) => (CorruptedView::Total(coded(&t, coding)?), d),
                CorruptedView::Partial(p) => (CorruptedView::Partial(PartialOracle::lifted(p, coding)), d),
            }
        }
    };
    let phi = match item.algorithm {
        RecoveryAlgorithm::MfEmbedding => {
            let id = item.functional.as_deref().ok_or_else(|| invalid(format!("{}: required", field("functional"))))?;
            Some(reg.functional(id).map_err(at(field("functional")))?)
        }
        _ => None,
    };
    let budget = item.budget.unwrap_or(match item.algorithm {
        RecoveryAlgorithm::CoarseRtilde => coarse_budget(item.window.saturating_sub(1)),
        _ => 10_000,
    });
    let mut rows = Vec::new();
    for n in 0..item.window {
        let (rec, expected) = match item.algorithm {
            RecoveryAlgorithm::GenericRtilde => (recover_from_generic_rtilde(&oracle, n, budget)?, s.get(n)),
            RecoveryAlgorithm::CoarseRtilde => (recover_from_coarse_rtilde(&oracle, n, budget)?, s.get(n)),
            RecoveryAlgorithm::CofiniteR => (recover_from_cofinite_r(&oracle, n, budget)?, s.get(n)),
            RecoveryAlgorithm::MfEmbedding => {
                let phi = phi.as_ref().expect("checked above");
                let want = run(phi, &s, n, budget)?.output();
                let want = want.ok_or_else(|| {
                    invalid(format!("{}: Φ does not halt on the exact oracle at {n}", field("functional")))
                })?;
                (mf_embedding_reduction(phi, &oracle, n, budget)?, want)
            }
        };
        let verdict = match rec.output {
            Some(b) if b == expected => RecoveryVerdict::Correct,
            Some(_) => RecoveryVerdict::Wrong,
            None => RecoveryVerdict::Undefined,
        };
        rows.push(RecoveryRow { recovery: rec, expected: expected as u8, verdict });
    }
    let passed = rows.iter().enumerate().all(|(n, r)| match r.verdict {
        RecoveryVerdict::Correct => true,
        RecoveryVerdict::Wrong => false,
        RecoveryVerdict::Undefined => item.defined_from.is_none_or(|from| (n as u64) < from),
    });
    Ok(RecoveryReport {
        schema_version: CONFIG_SCHEMA_VERSION,
        id: item.id.clone(),
        algorithm: item.algorithm,
        sequence: s.descriptor(),
        oracle: desc,
        budget,
        passed,
        rows,
    })
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DeductionReport {
    pub schema_version: u32,
    pub id: String,
    pub passed: bool,
    pub mismatches: u64,
    #[serde(flatten)]
    pub table: DeductionTable,
}

pub fn sigmas_for(f: &Functional, mode: &DeductionMode, source: &SigmaSource) -> Result<Vec<FinitePartialOracle>> {
    Ok(match source {
        SigmaSource::Explicit(v) => v.clone(),
        SigmaSource::Universe { position_bound, max_size } => {
            Universe { position_bound: *position_bound, max_size: *max_size }.enumerate()
        }
        SigmaSource::Random { count, seed, bound, max_relevant, max_other } => {
            let relevant =
                f.program().counting_profile().map(|(_, s)| s.clone()).unwrap_or_else(EventuallyPeriodicSet::all);
            let bound = match mode {
                DeductionMode::Threshold { position_bound, .. } => (*bound).min(*position_bound),
                DeductionMode::ExactCounting { .. } => *bound,
            };
            let mut rng = SplitMix64::new(*seed);
            let mut out = Vec::with_capacity(*count);
            for _ in 0..*count {
                let d = rng.below(*max_relevant as u64 + 1) as usize;
                let o = rng.below(*max_other as u64 + 1) as usize;
                out.push(random_sigma(&mut rng, bound, &relevant, d, o)?);
            }
            out
        }
    })
}

pub fn run_deduction(reg: &Registry, item: &DeductionItem) -> Result<DeductionReport> {
    let field = |k: &str| format!("deductions[{}].{k}", item.id);
    let f = reg.functional(&item.functional).map_err(at(field("functional")))?;
    let sigmas = sigmas_for(&f, &item.mode, &item.sigmas).map_err(at(field("sigmas")))?;
    let table = deduction_closure(&f, item.mode, &sigmas, &item.inputs).map_err(at(field("mode")))?;
    let mut mismatches = 0;
    if item.check_exact {
        let (c, relevant) = f
            .program()
            .counting_profile()
            .ok_or_else(|| invalid(format!("{}: checkExact needs a counting search", field("functional"))))?;
        for e in &table.entries {
            let d = e.sigma.0.keys().filter(|&&p| relevant.contains(p)).count() as u64;
            let want = if e.value == 1 { exact_rank_counting(c, d, relevant.is_infinite()) } else { None };
            if e.rank != want {
                mismatches += 1;
            }
        }
    }
    Ok(DeductionReport {
        schema_version: CONFIG_SCHEMA_VERSION,
        id: item.id.clone(),
        passed: mismatches == 0,
        mismatches,
        table,
    })
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SummaryRow {
    pub kind: String,
    pub id: String,
    pub passed: bool,
    pub file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Summary {
    pub schema_version: u32,
    pub name: String,
    pub passed: bool,
    pub items: Vec<SummaryRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

impl Summary {
    pub fn table(&self) -> String {
        let mut s = format!("experiment {}\n", self.name);
        for r in &self.items {
            s.push_str(&format!("  {:<10} {:<28} {}\n", r.kind, r.id, if r.passed { "pass" } else { "fail" }));
        }
        s.push_str(&format!("overall    {}\n", if self.passed { "pass" } else { "fail" }));
        s
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's output directory.
    pub output_dir: Option<PathBuf>,
    pub no_timestamp: bool,
}

fn twice<T: Serialize>(what: &str, mut f: impl FnMut() -> Result<T>) -> Result<(T, String)> {
    let first = f()?;
    let text = serde_json::to_string_pretty(&first)?;
    let again = serde_json::to_string_pretty(&f()?)?;
    if text != again {
        return Err(Error::Nondeterminism(format!("{what}: two runs produced different reports")));
    }
    Ok((first, text))
}

fn file_name(kind: &str, id: &str) -> String {
    let safe: String =
        id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{kind}-{safe}.json")
}

/// Run every item, write one report per item and `summary.json`.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<Summary> {
    let out = opts
        .output_dir
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .ok_or_else(|| invalid("outputDir: not set in the config or on the command line"))?;
    let mut reg = Registry::default();
    reg.declare(config)?;
    // resolve every reference before any work is done
    for c in &config.checks {
        reg.functional(&c.functional).map_err(at(format!("checks[{}].functional", c.id)))?;
        reg.sequence(&c.a).map_err(at(format!("checks[{}].a", c.id)))?;
        reg.sequence(&c.b).map_err(at(format!("checks[{}].b", c.id)))?;
    }
    for d in &config.deductions {
        reg.functional(&d.functional).map_err(at(format!("deductions[{}].functional", d.id)))?;
    }
    for r in &config.recoveries {
        reg.sequence(&r.sequence).map_err(at(format!("recoveries[{}].sequence", r.id)))?;
    }
    fs::create_dir_all(&out)?;

    let mut items = Vec::new();
    let mut write = |kind: &str, id: &str, passed: bool, text: String| -> Result<()> {
        let name = file_name(kind, id);
        fs::write(out.join(&name), text + "\n")?;
        items.push(SummaryRow { kind: kind.into(), id: id.into(), passed, file: name });
        Ok(())
    };
    for c in &config.checks {
        let (r, text) = twice(&format!("checks[{}]", c.id), || run_check(&reg, c))?;
        write("check", &c.id, r.passed(), text)?;
    }
    for c in &config.recoveries {
        let (r, text) = twice(&format!("recoveries[{}]", c.id), || run_recovery(&reg, c))?;
        write("recovery", &c.id, r.passed, text)?;
    }
    for c in &config.deductions {
        let (r, text) = twice(&format!("deductions[{}]", c.id), || run_deduction(&reg, c))?;
        write("deduction", &c.id, r.passed, text)?;
    }

    let generated_at = (!opts.no_timestamp)
        .then(|| std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let summary = Summary {
        schema_version: CONFIG_SCHEMA_VERSION,
        name: config.name.clone(),
        passed: items.iter().all(|r| r.passed),
        items,
        generated_at,
    };
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    fs::write(out.join("summary.txt"), summary.table())?;
    Ok(summary)
}

/// Diagnostic JSON for a config that failed to load or run.
pub fn diagnostic(e: &Error) -> Value {
    json!({ "error": e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(body: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(r#"{{"schemaVersion":1,"name":"t",{body}}}"#)).unwrap()
    }

    #[test]
    fn empty_config_passes() {
        let dir = std::env::temp_dir().join(format!("oracle-lab-empty-{}", std::process::id()));
        let c = config(r#""sequences":[]"#);
        let s = run_experiment(&c, &RunOptions { output_dir: Some(dir.clone()), no_timestamp: true }).unwrap();
        assert!(s.passed && s.items.is_empty());
        let _ = fs::remove_dir_all(dir);
    }

    #[test]
    fn unknown_functional_is_named() {
        let c = config(
            r#""sequences":[{"id":"A","descriptor":"random(1)"}],
               "checks":[{"id":"x","reducibility":"mf","functional":"nope","a":"A","b":"A"}]"#,
        );
        let dir = std::env::temp_dir().join(format!("oracle-lab-unknown-{}", std::process::id()));
        let e = run_experiment(&c, &RunOptions { output_dir: Some(dir.clone()), no_timestamp: true }).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("checks[x].functional") && msg.contains("nope"), "{msg}");
        let _ = fs::remove_dir_all(dir);
    }

    #[test]
    fn config_round_trips() {
        let c = config(
            r#""sequences":[{"id":"A","descriptor":"random(1)"},{"id":"B","descriptor":"complement(A)"}],
               "functionals":[{"id":"phi","term":"bit-flip"},{"id":"psi","transform":"mf-to-ubfb","of":"phi"}],
               "checks":[{"id":"c","reducibility":"ubfb","functional":"psi","a":"A","b":"B",
                          "params":{"inputWindow":16,"oracleWindow":32}}],
               "recoveries":[{"id":"r","algorithm":"cofinite-r","sequence":"A","window":8,
                              "corruption":{"kind":"finite-drop","parameters":{"positions":[2]},"seed":0}}],
               "deductions":[{"id":"d","functional":"counting(1,all)",
                              "mode":{"mode":"threshold","t":2,"positionBound":4,"budget":20},
                              "inputs":[0],"sigmas":{"explicit":["{}","{1:0}"]}}]"#,
        );
        let text = c.to_json();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn items_run_and_pass() {
        let c = config(
            r#""sequences":[{"id":"A","descriptor":"random(1)"},{"id":"B","descriptor":"complement(A)"}],
               "functionals":[{"id":"phi","term":"bit-flip"},{"id":"psi","transform":"mf-to-ubfb","of":"phi"}],
               "checks":[{"id":"c","reducibility":"ubfb","functional":"psi","a":"A","b":"B",
                          "params":{"inputWindow":48,"oracleWindow":64,"ubfbFloorTargets":[8]}}],
               "recoveries":[{"id":"r","algorithm":"cofinite-r","sequence":"A","window":8,"definedFrom":0,
                              "corruption":{"kind":"finite-drop","parameters":{"positions":[2]},"seed":0}},
                             {"id":"lift","algorithm":"generic-rtilde","sequence":"A","window":10,"corrupt":"base",
                              "corruption":{"kind":"finite-drop","parameters":{"positions":[1,4]},"seed":0}}],
               "deductions":[{"id":"d","functional":"counting(2,all)","checkExact":true,
                              "mode":{"mode":"threshold","t":2,"positionBound":6,"budget":20},
                              "inputs":[0],"sigmas":{"random":{"count":20,"seed":3,"bound":6,"maxRelevant":2,"maxOther":0}}}]"#,
        );
        let dir = std::env::temp_dir().join(format!("oracle-lab-items-{}", std::process::id()));
        let s = run_experiment(&c, &RunOptions { output_dir: Some(dir.clone()), no_timestamp: true }).unwrap();
        assert!(s.passed, "{}", s.table());
        assert_eq!(s.items.len(), 4);
        let lift: Value = serde_json::from_str(&fs::read_to_string(dir.join("recovery-lift.json")).unwrap()).unwrap();
        let undefined: Vec<u64> = lift["rows"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|r| r["verdict"] == "undefined")
            .map(|r| r["input"].as_u64().unwrap())
            .collect();
        assert_eq!(undefined, [1, 4]);
        let _ = fs::remove_dir_all(dir);
    }
}
