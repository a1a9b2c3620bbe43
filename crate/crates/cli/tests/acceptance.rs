//! End-to-end acceptance suite. Runs without the libtest harness so that the
//! per-criterion lines are always printed; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Context, Result};
use num_rational::Ratio;

use oracle_lab::checkers::{
    check_cofinite, check_ii, check_modfinite, check_modrecursive, check_ubfb, replay_witness, CheckParams,
    WitnessReason,
};
use oracle_lab::codings::{
    coarse_budget, ii_from_one_reduction, recover_from_coarse_rtilde, recover_from_generic_rtilde,
};
use oracle_lab::deduction::{
    closure_explicit, deduction_closure, exact_rank_counting, gamma_step, random_sigma, DeductionMode, Fact,
    FinitePartialOracle, Universe,
};
use oracle_lab::exec::{map_indexed, ExecMode};
use oracle_lab::machine::{parse_functional, Functional};
use oracle_lab::oracles::{oracle_for, Affine, Coding, CorruptionSpec, Oracle, PartialOracle};
use oracle_lab::rng::SplitMix64;
use oracle_lab::sequences::{BitSequence, EventuallyPeriodicSet, Placement};
use oracle_lab::transformers::{mf_to_ubfb, ubfb_to_cf};

fn seq(s: &str) -> Result<BitSequence> {
    Ok(BitSequence::parse(s)?)
}

fn func(s: &str) -> Result<Functional> {
    Ok(parse_functional(s)?)
}

fn all_ok(results: Vec<Result<()>>) -> Result<()> {
    results.into_iter().collect()
}

fn within(start: Instant, limit: u64) -> Result<()> {
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(limit), "took {:.1}s, limit {limit}s", t.as_secs_f64());
    Ok(())
}

/// Distinct positions below `bound`, between 1 and `max` of them.
fn positions(rng: &mut SplitMix64, bound: u64, max: u64) -> Vec<u64> {
    let k = 1 + rng.below(max);
    let mut v: BTreeSet<u64> = BTreeSet::new();
    while (v.len() as u64) < k {
        v.insert(rng.below(bound));
    }
    v.into_iter().collect()
}

/// Criterion 1: Block voting survives 2^(n-2) errors per block and falls to 2^(n-1)
/// leading ones.
fn voting_threshold() -> Result<()> {
    let start = Instant::now();
    all_ok(map_indexed(100, ExecMode::Parallel, |seed| -> Result<()> {
        let seed = seed as u64;
        let s = seq(&format!("random({seed})"))?;
        let t = seq(&format!("rtilde(random({seed}))"))?;
        let honest = oracle_for(&t, &CorruptionSpec::density_error(Ratio::new(1, 4), 16, Placement::Random, seed))?;
        let adversary = oracle_for(&t, &CorruptionSpec::density_error(Ratio::new(1, 2), 16, Placement::Leading, seed))?;
        let (honest, adversary) = (honest.as_total().unwrap(), adversary.as_total().unwrap());
        for n in 4..16u64 {
            let block = (1u64 << n)..(2u64 << n);
            let errors = block.clone().filter(|&p| honest.get(p) != t.get(p)).count() as u64;
            ensure!(errors == 1 << (n - 2), "seed {seed}: block {n} has {errors} errors");
            let leading = block.take(1 << (n - 1)).all(|p| adversary.get(p) != t.get(p));
            ensure!(leading, "seed {seed}: block {n} leading half not flipped");

            let got = recover_from_coarse_rtilde(honest, n, coarse_budget(n))?.output;
            ensure!(got == Some(s.get(n)), "seed {seed}: n={n} recovered {got:?}, want {}", s.get(n));
            let bad = recover_from_coarse_rtilde(adversary, n, coarse_budget(n))?.output;
            ensure!(bad == Some(!s.get(n)), "seed {seed}: n={n} adversarial vote gave {bad:?}");
        }
        Ok(())
    }))?;
    within(start, 10)
}

/// Criterion 2: Keep 5/8 of every block beyond position 8: defined from n = 3, never wrong.
fn generic_halting_bound() -> Result<()> {
    let start = Instant::now();
    all_ok(map_indexed(20, ExecMode::Parallel, |seed| -> Result<()> {
        let seed = seed as u64;
        let s = seq(&format!("random({seed})"))?;
        let t = seq(&format!("rtilde(random({seed}))"))?;
        let view = oracle_for(&t, &CorruptionSpec::density1_domain(Ratio::new(5, 8), 8, seed))?;
        let o = view.as_partial().unwrap();
        for n in 0..16u64 {
            let r = recover_from_generic_rtilde(o, n, 10_000)?;
            match r.output {
                Some(b) => ensure!(b == s.get(n), "seed {seed}: false value at n={n}"),
                None => ensure!(n < 3, "seed {seed}: undefined at n={n}"),
            }
            if n >= 3 {
                let kept = o.defined_in((1 << n)..(2 << n)).len() as u64;
                ensure!(kept == (5u64 << n).div_ceil(8), "seed {seed}: block {n} keeps {kept}");
            }
        }
        Ok(())
    }))?;
    within(start, 5)
}

/// Criterion 3: Drop up to five bits of S, lift through ℛ̃, recover.
fn round_trip() -> Result<()> {
    all_ok(map_indexed(50, ExecMode::Parallel, |seed| -> Result<()> {
        let seed = seed as u64;
        let mut rng = SplitMix64::new(seed);
        let s = seq(&format!("random({})", seed + 1000))?;
        let dropped: BTreeSet<u64> = positions(&mut rng, 16, 5).into_iter().collect();
        let lifted = PartialOracle::lifted(PartialOracle::except(s.clone(), dropped.iter().copied()), Coding::Rtilde);
        let mut undefined = 0;
        for n in 0..16u64 {
            match recover_from_generic_rtilde(&lifted, n, 10_000)?.output {
                Some(b) => ensure!(b == s.get(n), "seed {seed}: wrong at {n}"),
                None => {
                    ensure!(dropped.contains(&n), "seed {seed}: undefined at kept {n}");
                    undefined += 1;
                }
            }
        }
        ensure!(undefined == dropped.len() && undefined <= 5, "seed {seed}: {undefined} undefined");
        Ok(())
    }))
}

/// Criterion 4: mf, then ubfb after mf-to-ubfb, then cf after ubfb-to-cf.
fn reduction_chain() -> Result<()> {
    let start = Instant::now();
    let a = seq("random(4)")?;
    let b = seq("image(xor(2,0,2,1),random(4))")?;
    let phi = func("xor(2,0,2,1)")?;
    let base = CheckParams { input_window: 256, oracle_window: 512, budget: 10_000, ..CheckParams::default() };
    let slack = base.slack();
    let mut rng = SplitMix64::new(44);
    let errors = (0..20).map(|_| CorruptionSpec::finite_error(positions(&mut rng, 2 * slack, 5))).collect();
    let drops = (0..20).map(|_| CorruptionSpec::finite_drop(positions(&mut rng, 2 * slack, 5))).collect();

    let r = check_modfinite(&phi, &a, &b, &base.clone().with_family(errors))?;
    ensure!(r.passed(), "mf failed:\n{}", r.table());
    let psi = mf_to_ubfb(&phi);
    let p = CheckParams { ubfb_floor_targets: vec![8, 16, 32], ..base.clone() };
    let r = check_ubfb(&psi, &a, &b, &p)?;
    ensure!(r.passed(), "ubfb failed:\n{}", r.table());
    let theta = ubfb_to_cf(&psi);
    let r = check_cofinite(&theta, &a, &b, &base.with_family(drops))?;
    ensure!(r.passed(), "cf failed:\n{}", r.table());
    within(start, 60)
}

/// Criterion 5: ubfb falsified for n ↦ S(0) with a replayable witness; bit-flip is
/// mod-recursive against the complement.
fn falsification() -> Result<()> {
    let a = seq("random(1)")?;
    let b = seq("image(projection(0,0),random(1))")?;
    let r = check_ubfb(&func("projection(0,0)")?, &a, &b, &CheckParams::default())?;
    ensure!(!r.passed(), "ubfb passed for a constant-position functional");
    ensure!(!r.witnesses.is_empty(), "no witness");
    for w in &r.witnesses {
        ensure!(w.reason == WitnessReason::LowQuery && w.queried == Some(0), "witness {w:?}");
        let rep = replay_witness(&r, w)?;
        ensure!(rep.matches, "replay differs");
        ensure!(Some(&rep.trace) == w.trace.as_ref() && rep.trace_digest == w.trace_digest, "trace bytes differ");
    }

    let mut rng = SplitMix64::new(5);
    let family = (0..10)
        .map(|i| {
            let period = 1 + (i % 8) as usize;
            let transient = (0..rng.below(5)).map(|_| rng.next_bool()).collect();
            let pattern = (0..period).map(|_| rng.next_bool()).collect();
            Ok(CorruptionSpec::periodic_difference(EventuallyPeriodicSet::new(transient, pattern)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let s = seq("random(12)")?;
    let not_s = seq("complement(random(12))")?;
    let p = CheckParams::default().with_family(family);
    let r = check_modrecursive(&func("bit-flip")?, &s, &not_s, &p)?;
    ensure!(r.passed(), "mr failed:\n{}", r.table());
    Ok(())
}

/// A chain of `stages` growing sets drawn from `pick(i)`.
fn chain(rng: &mut SplitMix64, stages: usize, candidates: &[u64]) -> Vec<Vec<u64>> {
    let mut stage = BTreeSet::new();
    (0..stages)
        .map(|_| {
            let before = stage.len();
            while stage.len() < before + 2 {
                stage.insert(candidates[rng.below(candidates.len() as u64) as usize]);
            }
            stage.iter().copied().collect()
        })
        .collect()
}

/// Criterion 6: race on A ⊕ B, and transfer along n ↦ 2n.
fn ii_constructions() -> Result<()> {
    let mut rng = SplitMix64::new(66);
    let a = seq("join(random(6),complement(random(6)))")?;
    let target = seq("random(6)")?;
    let evens: Vec<u64> = (0..128).filter(|p| p % 2 == 0).collect();
    let odds: Vec<u64> = (0..128).filter(|p| p % 2 == 1).collect();
    let family = vec![
        CorruptionSpec::sparse_chain(chain(&mut rng, 10, &evens)),
        CorruptionSpec::sparse_chain(chain(&mut rng, 10, &odds)),
    ];
    let p = CheckParams { input_window: 64, oracle_window: 128, ..CheckParams::default() }.with_family(family);
    let r = check_ii(&func("race(identity,bit-flip)")?, &a, &target, &p)?;
    ensure!(r.passed(), "race failed:\n{}", r.table());

    // B = A∘f with f(n) = 2n
    let b = seq("image(projection(2,0),random(6))")?;
    let f = Affine::new(2, 0);
    for trial in 0..10u64 {
        let dom: BTreeSet<u64> = (0..256).filter(|_| rng.below(5) == 0).collect();
        let x = ii_from_one_reduction(f, PartialOracle::only(b.clone(), dom.iter().copied()))?;
        let defined = x.defined_in(0..512);
        ensure!(defined.len() == dom.len(), "trial {trial}: {} defined, {} given", defined.len(), dom.len());
        for m in 0..512u64 {
            let want = m % 2 == 0 && dom.contains(&(m / 2));
            ensure!(x.is_defined(m) == want, "trial {trial}: domain differs at {m}");
            if want {
                ensure!(x.entry(m).map(|e| e.bit) == Some(target.get(m)), "trial {trial}: lies at {m}");
            }
        }
    }
    let low: Vec<u64> = (0..32).collect();
    let p = CheckParams { input_window: 64, oracle_window: 128, ..CheckParams::default() }
        .with_family(vec![CorruptionSpec::sparse_chain(chain(&mut rng, 10, &low))]);
    let r = check_ii(&func("one-inverse(2,0)")?, &b, &target, &p)?;
    ensure!(r.passed(), "one-inverse failed:\n{}", r.table());
    Ok(())
}

fn counting_instances() -> Result<Vec<(u64, Functional, EventuallyPeriodicSet)>> {
    let mut out = Vec::new();
    for c in 1..=4u64 {
        for set in ["all", "evens", "odds", "ep:011/1"] {
            let f = func(&format!("counting({c},{set})"))?;
            let relevant = f.program().counting_profile().context("not a counting search")?.1.clone();
            out.push((c, f, relevant));
        }
    }
    Ok(out)
}

fn rank_order(r: Option<u64>) -> u64 {
    r.unwrap_or(u64::MAX)
}

/// Criterion 7: Threshold ranks against the counting formula, Γ laws, antitonicity in t.
fn deduction() -> Result<()> {
    let start = Instant::now();
    let instances = counting_instances()?;
    all_ok(map_indexed(instances.len(), ExecMode::Parallel, |i| -> Result<()> {
        let (c, f, relevant) = &instances[i];
        let name = f.id();
        let mut rng = SplitMix64::new(700 + i as u64);

        let others = (0..512).filter(|&p| !relevant.contains(p)).count() as u64;
        let sigmas = (0..1000)
            .map(|_| {
                let d = rng.below(c + 1) as usize;
                let o = rng.below(others.min(2) + 1) as usize;
                Ok(random_sigma(&mut rng, 512, relevant, d, o)?)
            })
            .collect::<Result<Vec<FinitePartialOracle>>>()?;
        let mode = DeductionMode::Threshold { t: 8, position_bound: 512, budget: 1000 };
        let table = deduction_closure(f, mode, &sigmas, &[0])?;
        for e in &table.entries {
            let d = e.sigma.0.keys().filter(|&&p| relevant.contains(p)).count() as u64;
            let want = if e.value == 1 { exact_rank_counting(*c, d, true) } else { None };
            ensure!(e.rank == want, "{name}: σ={} value {} rank {:?}, want {want:?}", e.sigma, e.value, e.rank);
        }

        let universe = Universe { position_bound: 6, max_size: 3 };
        let mode = DeductionMode::Threshold { t: 2, position_bound: 6, budget: 50 };
        let fixed = closure_explicit(f, &mode, &universe, &[0])?;
        let top: BTreeSet<Fact> = fixed.keys().cloned().collect();
        ensure!(gamma_step(f, &top, &mode, &universe, &[0])? == top, "{name}: the closure is not a fixpoint");
        let facts: Vec<Fact> = top.iter().cloned().collect();
        for _ in 0..5 {
            let x: BTreeSet<Fact> = facts.iter().filter(|_| rng.below(3) == 0).cloned().collect();
            let mut y = x.clone();
            y.extend(facts.iter().filter(|_| rng.below(2) == 0).cloned());
            let (gx, gy) = (gamma_step(f, &x, &mode, &universe, &[0])?, gamma_step(f, &y, &mode, &universe, &[0])?);
            ensure!(gx.is_subset(&gy), "{name}: Γ is not monotone");
        }

        let others = (0..64).filter(|&p| !relevant.contains(p)).count() as u64;
        let sigmas = (0..200)
            .map(|_| {
                let d = rng.below(c + 1) as usize;
                let o = rng.below(others.min(2) + 1) as usize;
                Ok(random_sigma(&mut rng, 64, relevant, d, o)?)
            })
            .collect::<Result<Vec<FinitePartialOracle>>>()?;
        let sigmas = &sigmas[..];
        let mut previous: Option<Vec<Option<u64>>> = None;
        for t in [2, 4, 8, 16] {
            let mode = DeductionMode::Threshold { t, position_bound: 64, budget: 1000 };
            let ranks: Vec<Option<u64>> =
                deduction_closure(f, mode, sigmas, &[0])?.entries.iter().map(|e| e.rank).collect();
            if let Some(prev) = &previous {
                for (k, (lo, hi)) in prev.iter().zip(&ranks).enumerate() {
                    ensure!(rank_order(*lo) <= rank_order(*hi), "{name}: t={t} entry {k} rank {hi:?} below {lo:?}");
                }
            }
            previous = Some(ranks);
        }
        Ok(())
    }))?;
    within(start, 120)
}

fn files(dir: &Path) -> Result<Vec<(PathBuf, Vec<u8>)>> {
    let mut v: Vec<_> = fs::read_dir(dir)?
        .map(|e| {
            let p = e?.path();
            Ok((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p)?))
        })
        .collect::<Result<_>>()?;
    v.sort();
    Ok(v)
}

/// Criterion 8: Two `run`s of the demo config give byte-identical output trees.
fn determinism() -> Result<()> {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.json");
    let tmp = tempfile::tempdir()?;
    let mut trees = Vec::new();
    for i in 0..2 {
        let out = tmp.path().join(format!("run{i}"));
        let st = Command::new(env!("CARGO_BIN_EXE_oracle-lab"))
            .arg("run")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .arg("--no-timestamp")
            .env("ORACLE_LAB_THREADS", if i == 0 { "1" } else { "4" })
            .output()?;
        ensure!(st.status.success(), "run {i} exited {:?}: {}", st.status, String::from_utf8_lossy(&st.stderr));
        trees.push(files(&out)?);
    }
    ensure!(trees[0].len() > 1, "no reports written");
    if trees[0] != trees[1] {
        let names: Vec<_> =
            trees[0].iter().zip(&trees[1]).filter(|(x, y)| x != y).map(|(x, _)| x.0.display().to_string()).collect();
        bail!("reports differ: {names:?}");
    }
    Ok(())
}

type Criterion = fn() -> Result<()>;

fn main() {
    let criteria: [(&str, Criterion); 8] = [
        ("voting threshold", voting_threshold),
        ("generic halting bound", generic_halting_bound),
        ("round trip", round_trip),
        ("reduction chain", reduction_chain),
        ("falsification soundness", falsification),
        ("ii constructions", ii_constructions),
        ("deduction", deduction),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(()) => println!("criterion {} {name}: pass ({secs:.2}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({secs:.2}s): {e:#}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria pass", criteria.len());
}
