//! Falsifiable desk-scale verdicts for the seven reducibilities.
//!
//! Each checker runs a functional on the reference oracle `A` and on every
//! corrupted view in the parameter's corruption family, for inputs
//! `0..input_window`, and compares the outputs with `B`. "Total" means halting
//! within the budget, "cofinite" means beyond some `n0 <= cofinite_slack`,
//! and "density 1" means a density of at least `density_floor` on the tail
//! `[cofinite_slack, input_window)`.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::exec::{map_indexed, ExecMode};
use crate::machine::{parse_functional, run, Functional, RunOutcome};
use crate::oracles::{oracle_for_stage, CorruptedView, CorruptionKind, CorruptionSpec};
use crate::ratio::{self, format_ratio, Rational};
use crate::sequences::{bits_to_string, detect_eventually_periodic, BitSequence};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Witnesses kept in a report; the total is always counted.
pub const MAX_WITNESSES: usize = 16;

/// Traces up to this many steps are embedded in witnesses verbatim.
const INLINE_TRACE_STEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reducibility {
    Mf,
    Cf,
    G,
    Cor,
    Mr,
    Ii,
    Ubfb,
}

impl Reducibility {
    pub const ALL: [Reducibility; 7] = [Self::Mf, Self::Cf, Self::G, Self::Cor, Self::Mr, Self::Ii, Self::Ubfb];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mf => "mf",
            Self::Cf => "cf",
            Self::G => "g",
            Self::Cor => "cor",
            Self::Mr => "mr",
            Self::Ii => "ii",
            Self::Ubfb => "ubfb",
        }
    }

    fn accepts(self, kind: &CorruptionKind) -> bool {
        use CorruptionKind::*;
        match self {
            Self::Mf => matches!(kind, FiniteError { .. }),
            Self::Cf => matches!(kind, FiniteDrop { .. } | CofiniteDomain { .. } | DelayProfile { .. }),
            Self::G => matches!(kind, Density1Domain { .. } | FiniteDrop { .. } | CofiniteDomain { .. }),
            Self::Cor => matches!(kind, DensityError { .. } | FiniteError { .. }),
            Self::Mr => matches!(kind, EventuallyPeriodicDifference { .. }),
            Self::Ii => matches!(kind, InfiniteSparseDomain { .. }),
            Self::Ubfb => true,
        }
    }
}

impl fmt::Display for Reducibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Reducibility {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| invalid(format!("unknown reducibility `{s}` (expected mf, cf, g, cor, mr, ii or ubfb)")))
    }
}

/// How "density 1" is measured on the tail of the input window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityWindow {
    /// One fraction over the whole tail.
    #[default]
    Absolute,
    /// The least fraction over complete dyadic blocks inside the tail.
    BlockRelative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct CheckParams {
    pub input_window: u64,
    pub oracle_window: u64,
    pub budget: u64,
    pub corruption_family: Vec<CorruptionSpec>,
    /// Defaults to `input_window / 4`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cofinite_slack: Option<u64>,
    #[serde(with = "ratio::serde_ratio")]
    pub density_floor: Rational,
    pub period_cap: u64,
    pub ubfb_floor_targets: Vec<u64>,
    /// Measure the ubfb use on issued rather than answered queries.
    pub use_issued: bool,
    pub density_window: DensityWindow,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            input_window: 64,
            oracle_window: 256,
            budget: 10_000,
            corruption_family: Vec::new(),
            cofinite_slack: None,
            density_floor: Ratio::new(7, 8),
            period_cap: 8,
            ubfb_floor_targets: vec![8, 16, 32],
            use_issued: false,
            density_window: DensityWindow::Absolute,
        }
    }
}

impl CheckParams {
    pub fn with_family(mut self, family: Vec<CorruptionSpec>) -> Self {
        self.corruption_family = family;
        self
    }

    pub fn slack(&self) -> u64 {
        self.cofinite_slack.unwrap_or(self.input_window / 4)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_window == 0 {
            return Err(invalid("inputWindow must be positive"));
        }
        if self.input_window > self.oracle_window {
            return Err(invalid(format!(
                "inputWindow {} exceeds oracleWindow {}",
                self.input_window, self.oracle_window
            )));
        }
        if self.budget == 0 {
            return Err(invalid("budget must be at least 1"));
        }
        if *self.density_floor.numer() == 0 || self.density_floor > Ratio::from_integer(1) {
            return Err(invalid("densityFloor must lie in (0,1]"));
        }
        if self.slack() >= self.input_window {
            return Err(invalid("cofiniteSlack must be below inputWindow"));
        }
        for s in &self.corruption_family {
            s.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessReason {
    /// A run did not halt within the budget where totality is required.
    Exhausted,
    /// A total view produced a wrong output past the slack.
    Disagreement,
    /// A partial view produced a wrong output.
    FalseOutput,
    /// A partial view produced no output past the slack.
    Undefined,
    /// Tail density below the floor; the input is the first offender.
    LowDensity,
    /// The output agreement set has no small eventually periodic description.
    AperiodicAgreement,
    /// A chain stage produced no more outputs than the one before.
    NoGrowth,
    /// The input queried a position at or below the floor target.
    LowQuery,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Witness {
    pub reason: WitnessReason,
    /// Index into the corruption family; absent for the reference oracle.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub spec_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stage: Option<usize>,
    pub input: u64,
    pub expected: u8,
    /// `"0"`, `"1"` or `"pending"`.
    pub got: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub queried: Option<u64>,
    pub budget: u64,
    pub ticks: u64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub pending: Vec<u64>,
    pub trace_digest: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckReport {
    pub schema_version: u32,
    pub reducibility: Reducibility,
    pub functional: String,
    pub pair: Pair,
    pub verdict: Verdict,
    pub witness_count: usize,
    pub witnesses: Vec<Witness>,
    pub statistics: Value,
    pub params: CheckParams,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = format!(
            "reducibility  {}\nfunctional    {}\npair          {} -> {}\nverdict       {}\nbudget        {}\nwitnesses     {}\n",
            self.reducibility,
            self.functional,
            self.pair.a,
            self.pair.b,
            if self.passed() { "pass" } else { "fail" },
            self.params.budget,
            self.witness_count,
        );
        if !self.witnesses.is_empty() {
            s.push_str("\n  spec  stage  input  expected  got      reason\n");
            for w in &self.witnesses {
                let spec = w.spec_index.map_or("-".into(), |i| i.to_string());
                let stage = w.stage.map_or("-".into(), |i| i.to_string());
                s.push_str(&format!(
                    "  {:<5} {:<6} {:<6} {:<9} {:<8} {}\n",
                    spec,
                    stage,
                    w.input,
                    w.expected,
                    w.got,
                    serde_json::to_value(w.reason).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
                ));
            }
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Running views
// ---------------------------------------------------------------------------

struct View {
    spec_index: Option<usize>,
    stage: Option<usize>,
    oracle: CorruptedView,
}

#[derive(Debug, Clone)]
struct RunSummary {
    output: Option<bool>,
    ticks: u64,
    min_used: Option<u64>,
    min_issued: Option<u64>,
    pending: Vec<u64>,
    digest: String,
    inline: Option<String>,
}

impl RunSummary {
    fn of(o: &RunOutcome) -> Self {
        RunSummary {
            output: o.output(),
            ticks: o.ticks,
            min_used: o.trace.min_queried,
            min_issued: o.trace.min_issued,
            pending: o.pending.iter().copied().take(MAX_WITNESSES).collect(),
            digest: o.trace.digest(),
            inline: (o.trace.steps.len() <= INLINE_TRACE_STEPS).then(|| o.trace.to_jsonl()),
        }
    }
}

fn got(o: Option<bool>) -> String {
    match o {
        Some(b) => (b as u8).to_string(),
        None => "pending".into(),
    }
}

struct Ctx<'a> {
    b: &'a BitSequence,
    params: &'a CheckParams,
    witnesses: Vec<Witness>,
    count: usize,
}

impl Ctx<'_> {
    fn witness(&mut self, view: &View, n: u64, r: &RunSummary, reason: WitnessReason) -> &mut Witness {
        self.count += 1;
        self.witnesses.push(Witness {
            reason,
            spec_index: view.spec_index,
            stage: view.stage,
            input: n,
            expected: self.b.get(n) as u8,
            got: got(r.output),
            target: None,
            queried: None,
            budget: self.params.budget,
            ticks: r.ticks,
            pending: r.pending.clone(),
            trace_digest: r.digest.clone(),
            trace: r.inline.clone(),
        });
        self.witnesses.last_mut().expect("just pushed")
    }
}

fn views_for(red: Reducibility, a: &BitSequence, params: &CheckParams) -> Result<Vec<View>> {
    let mut views = Vec::new();
    if red != Reducibility::Ii {
        views.push(View { spec_index: None, stage: None, oracle: CorruptedView::Total(a.clone()) });
    }
    if red == Reducibility::Ubfb {
        return Ok(views);
    }
    for (i, spec) in params.corruption_family.iter().enumerate() {
        if !red.accepts(&spec.kind) {
            return Err(invalid(format!(
                "corruptionFamily[{i}]: `{}` does not belong to the {} checker",
                spec.kind_name(),
                red
            )));
        }
        if let CorruptionKind::DensityError { rate, .. } = &spec.kind {
            if *rate > Ratio::from_integer(1) - params.density_floor {
                return Err(invalid(format!(
                    "corruptionFamily[{i}]: error rate {} exceeds 1 - densityFloor",
                    format_ratio(rate)
                )));
            }
        }
        if let CorruptionKind::InfiniteSparseDomain { chain } = &spec.kind {
            for s in 0..chain.len() {
                views.push(View { spec_index: Some(i), stage: Some(s), oracle: oracle_for_stage(a, spec, s)? });
            }
        } else {
            views.push(View { spec_index: Some(i), stage: None, oracle: oracle_for_stage(a, spec, 0)? });
        }
    }
    Ok(views)
}

fn run_views(f: &Functional, views: &[View], params: &CheckParams, mode: ExecMode) -> Vec<Vec<RunSummary>> {
    let n_in = params.input_window as usize;
    let flat = map_indexed(views.len() * n_in, mode, |i| {
        let (v, n) = (i / n_in, (i % n_in) as u64);
        let o = run(f, &views[v].oracle, n, params.budget).expect("budget validated");
        RunSummary::of(&o)
    });
    let mut it = flat.into_iter();
    views.iter().map(|_| it.by_ref().take(n_in).collect()).collect()
}

fn ratio_str(num: u64, den: u64) -> String {
    if den == 0 {
        return "1".into();
    }
    format_ratio(&Ratio::new(num, den))
}

/// Tail density of `good` in the chosen window mode, and the first tail
/// input that is not good.
fn tail_density(good: &[bool], slack: u64, mode: DensityWindow) -> (Rational, Option<u64>) {
    let tail = &good[slack as usize..];
    let first_bad = tail.iter().position(|&g| !g).map(|i| i as u64 + slack);
    let absolute = Ratio::new(tail.iter().filter(|&&g| g).count() as u64, tail.len() as u64);
    if mode == DensityWindow::Absolute {
        return (absolute, first_bad);
    }
    let n = good.len() as u64;
    let mut worst: Option<Rational> = None;
    for b in 0..64u32 {
        let lo = 1u64 << b;
        let Some(hi) = lo.checked_mul(2) else { break };
        if hi > n {
            break;
        }
        if lo < slack {
            continue;
        }
        let cnt = (lo..hi).filter(|&i| good[i as usize]).count() as u64;
        let r = Ratio::new(cnt, lo);
        worst = Some(worst.map_or(r, |w| w.min(r)));
    }
    (worst.unwrap_or(absolute), first_bad)
}

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

pub fn check(
    red: Reducibility,
    f: &Functional,
    a: &BitSequence,
    b: &BitSequence,
    params: &CheckParams,
) -> Result<CheckReport> {
    check_with_mode(red, f, a, b, params, ExecMode::default())
}

pub fn check_with_mode(
    red: Reducibility,
    f: &Functional,
    a: &BitSequence,
    b: &BitSequence,
    params: &CheckParams,
    mode: ExecMode,
) -> Result<CheckReport> {
    params.validate()?;
    let views = views_for(red, a, params)?;
    let runs = run_views(f, &views, params, mode);
    let mut ctx = Ctx { b, params, witnesses: Vec::new(), count: 0 };
    let n_in = params.input_window;
    let slack = params.slack();
    let expected: Vec<bool> = b.bits(0..n_in);
    let mut stats = serde_json::Map::new();
    let mut per_view = Vec::new();

    for (view, rs) in views.iter().zip(&runs) {
        let halted = rs.iter().filter(|r| r.output.is_some()).count() as u64;
        let agree: Vec<bool> = rs.iter().zip(&expected).map(|(r, &e)| r.output == Some(e)).collect();
        let agreements = agree.iter().filter(|&&g| g).count() as u64;
        let mut vs = json!({
            "spec": view.spec_index,
            "halted": halted,
            "agreement": ratio_str(agreements, n_in),
        });
        if let Some(s) = view.stage {
            vs["stage"] = json!(s);
        }

        match red {
            Reducibility::Mf | Reducibility::Cor | Reducibility::Mr | Reducibility::Ubfb => {
                for (n, r) in rs.iter().enumerate() {
                    if r.output.is_none() {
                        ctx.witness(view, n as u64, r, WitnessReason::Exhausted);
                    }
                }
            }
            _ => {
                for (n, r) in rs.iter().enumerate() {
                    if r.output.is_some_and(|o| o != expected[n]) {
                        ctx.witness(view, n as u64, r, WitnessReason::FalseOutput);
                    }
                }
            }
        }

        match red {
            Reducibility::Mf => {
                let wrong: Vec<u64> =
                    (0..n_in).filter(|&n| rs[n as usize].output.is_some_and(|o| o != expected[n as usize])).collect();
                vs["n0"] = json!(wrong.last().map_or(0, |&n| n + 1));
                for &n in wrong.iter().filter(|&&n| n >= slack) {
                    ctx.witness(view, n, &rs[n as usize], WitnessReason::Disagreement);
                }
            }
            Reducibility::Cf => {
                let undefined: Vec<u64> = (0..n_in).filter(|&n| rs[n as usize].output.is_none()).collect();
                vs["n0"] = json!(undefined.last().map_or(0, |&n| n + 1));
                vs["undefined"] = json!(undefined.iter().take(MAX_WITNESSES).collect::<Vec<_>>());
                for &n in undefined.iter().filter(|&&n| n >= slack) {
                    ctx.witness(view, n, &rs[n as usize], WitnessReason::Undefined);
                }
            }
            Reducibility::G | Reducibility::Cor => {
                let good: Vec<bool> = if red == Reducibility::G {
                    rs.iter().map(|r| r.output.is_some()).collect()
                } else {
                    agree.clone()
                };
                let (d, first_bad) = tail_density(&good, slack, params.density_window);
                vs["tailDensity"] = json!(format_ratio(&d));
                if d < params.density_floor {
                    let n = first_bad.expect("density below 1 has an offender");
                    ctx.witness(view, n, &rs[n as usize], WitnessReason::LowDensity);
                }
            }
            Reducibility::Mr => {
                if rs.iter().all(|r| r.output.is_some()) {
                    match detect_eventually_periodic(&agree, params.period_cap as usize, slack as usize) {
                        Some(set) => vs["agreementSet"] = json!(set.to_text()),
                        None => {
                            vs["agreementSet"] = Value::Null;
                            let n = (slack..n_in).find(|&n| !agree[n as usize]).unwrap_or(n_in - 1);
                            ctx.witness(view, n, &rs[n as usize], WitnessReason::AperiodicAgreement);
                        }
                    }
                    vs["agreementBits"] = json!(bits_to_string(&agree));
                }
            }
            Reducibility::Ii => {
                vs["outputs"] = json!(halted);
            }
            Reducibility::Ubfb => {
                for n in 0..n_in {
                    let r = &rs[n as usize];
                    if r.output.is_some_and(|o| o != expected[n as usize]) {
                        ctx.witness(view, n, r, WitnessReason::Disagreement);
                    }
                }
                let min_q = |r: &RunSummary| if params.use_issued { r.min_issued } else { r.min_used };
                let profile: Vec<Option<u64>> = rs.iter().map(min_q).collect();
                let mut floors = serde_json::Map::new();
                for &m in &params.ubfb_floor_targets {
                    let last_bad = profile.iter().rposition(|q| q.is_some_and(|q| q <= m));
                    let n0 = last_bad.map_or(0, |i| i as u64 + 1);
                    floors.insert(m.to_string(), json!(n0));
                    if n0 >= n_in {
                        let n = n0 - 1;
                        let r = &rs[n as usize];
                        let w = ctx.witness(view, n, r, WitnessReason::LowQuery);
                        w.target = Some(m);
                        w.queried = profile[n as usize];
                    }
                }
                stats.insert("minQueryProfile".into(), json!(profile));
                stats.insert("floorN0".into(), Value::Object(floors));
            }
        }
        per_view.push(vs);
    }

    if red == Reducibility::Ii {
        check_growth(&mut ctx, &views, &runs, &mut stats);
    }

    stats.insert("views".into(), Value::Array(per_view));
    stats.insert("slack".into(), json!(slack));
    let verdict = if ctx.count == 0 { Verdict::Pass } else { Verdict::Fail };
    let mut witnesses = ctx.witnesses;
    witnesses.truncate(MAX_WITNESSES);
    Ok(CheckReport {
        schema_version: REPORT_SCHEMA_VERSION,
        reducibility: red,
        functional: f.id(),
        pair: Pair { a: a.descriptor(), b: b.descriptor() },
        verdict,
        witness_count: ctx.count,
        witnesses,
        statistics: Value::Object(stats),
        params: params.clone(),
    })
}

/// Output counts must strictly increase along each chain, starting above 0.
fn check_growth(
    ctx: &mut Ctx<'_>,
    views: &[View],
    runs: &[Vec<RunSummary>],
    stats: &mut serde_json::Map<String, Value>,
) {
    let mut counts: Vec<(usize, Vec<u64>)> = Vec::new();
    for (view, rs) in views.iter().zip(runs) {
        let i = view.spec_index.expect("chain views carry a spec");
        let c = rs.iter().filter(|r| r.output.is_some()).count() as u64;
        let prev = match counts.last_mut() {
            Some((j, v)) if *j == i => {
                let p = *v.last().expect("nonempty");
                v.push(c);
                p
            }
            _ => {
                counts.push((i, vec![c]));
                0
            }
        };
        if c <= prev {
            let n = rs.iter().position(|r| r.output.is_none()).unwrap_or(rs.len() - 1);
            ctx.witness(view, n as u64, &rs[n], WitnessReason::NoGrowth);
        }
    }
    stats.insert("outputCounts".into(), json!(counts.into_iter().map(|(_, v)| v).collect::<Vec<_>>()));
}

pub fn check_modfinite(f: &Functional, a: &BitSequence, b: &BitSequence, p: &CheckParams) -> Result<CheckReport> {
    check(Reducibility::Mf, f, a, b, p)
}

pub fn check_cofinite(f: &Functional, a: &BitSequence, b: &BitSequence, p: &CheckParams) -> Result<CheckReport> {
    check(Reducibility::Cf, f, a, b, p)
}

pub fn check_generic(f: &Functional, a: &BitSequence, b: &BitSequence, p: &CheckParams) -> Result<CheckReport> {
    check(Reducibility::G, f, a, b, p)
}

pub fn check_coarse(f: &Functional, a: &BitSequence, b: &BitSequence, p: &CheckParams) -> Result<CheckReport> {
    check(Reducibility::Cor, f, a, b, p)
}

pub fn check_modrecursive(f: &Functional, a: &BitSequence, b: &BitSequence, p: &CheckParams) -> Result<CheckReport> {
    check(Reducibility::Mr, f, a, b, p)
}

pub fn check_ii(f: &Functional, a: &BitSequence, b: &BitSequence, p: &CheckParams) -> Result<CheckReport> {
    check(Reducibility::Ii, f, a, b, p)
}

pub fn check_ubfb(f: &Functional, a: &BitSequence, b: &BitSequence, p: &CheckParams) -> Result<CheckReport> {
    check(Reducibility::Ubfb, f, a, b, p)
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Replay {
    pub matches: bool,
    pub got: String,
    pub trace_digest: String,
    pub trace: String,
}

/// Re-run one witness from nothing but the report.
pub fn replay_witness(report: &CheckReport, w: &Witness) -> Result<Replay> {
    let f = parse_functional(&report.functional)?;
    let a = BitSequence::parse(&report.pair.a)?;
    let oracle = match w.spec_index {
        None => CorruptedView::Total(a),
        Some(i) => {
            let spec = report
                .params
                .corruption_family
                .get(i)
                .ok_or_else(|| invalid(format!("witness refers to missing spec {i}")))?;
            oracle_for_stage(&a, spec, w.stage.unwrap_or(0))?
        }
    };
    let o = run(&f, &oracle, w.input, w.budget)?;
    let digest = o.trace.digest();
    let trace = o.trace.to_jsonl();
    let g = got(o.output());
    let matches =
        digest == w.trace_digest && g == w.got && o.ticks == w.ticks && w.trace.as_ref().is_none_or(|t| *t == trace);
    Ok(Replay { matches, got: g, trace_digest: digest, trace })
}

/// `count` seeded corruption specs of a kind `red` accepts, small enough
/// to fit the parameters' slack and windows. ubfb ignores families, so it
/// gets none.
pub fn seeded_family(red: Reducibility, count: usize, seed: u64, p: &CheckParams) -> Vec<CorruptionSpec> {
    use crate::rng::SplitMix64;
    use crate::sequences::{EventuallyPeriodicSet, Placement};

    let mut rng = SplitMix64::new(seed);
    let slack = p.slack().max(1);
    let positions = |rng: &mut SplitMix64| {
        let k = 1 + rng.below(4);
        let mut v: Vec<u64> = (0..k).map(|_| rng.below(slack)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    (0..count)
        .filter_map(|_| {
            let s = rng.next_u64();
            Some(match red {
                Reducibility::Mf => CorruptionSpec::finite_error(positions(&mut rng)),
                Reducibility::Cf => CorruptionSpec::finite_drop(positions(&mut rng)),
                Reducibility::G => CorruptionSpec::density1_domain(Ratio::new(15, 16), slack, s),
                Reducibility::Cor => CorruptionSpec::density_error(Ratio::new(1, 16), slack, Placement::Random, s),
                Reducibility::Mr => {
                    let period = 1 + rng.below(p.period_cap.max(1)) as usize;
                    let transient = (0..rng.below(4)).map(|_| rng.next_bool()).collect();
                    let pattern = (0..period).map(|_| rng.next_bool()).collect();
                    let set = EventuallyPeriodicSet::new(transient, pattern).ok()?;
                    CorruptionSpec::periodic_difference(set)
                }
                Reducibility::Ii => {
                    let window = p.oracle_window.max(1);
                    let mut stage = std::collections::BTreeSet::new();
                    let chain = (0..4.min(window))
                        .map(|_| {
                            while !stage.insert(rng.below(window)) {}
                            stage.iter().copied().collect()
                        })
                        .collect();
                    CorruptionSpec { seed: s, ..CorruptionSpec::sparse_chain(chain) }
                }
                Reducibility::Ubfb => return None,
            })
        })
        .collect()
}
