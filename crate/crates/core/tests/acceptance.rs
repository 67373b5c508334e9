//! Acceptance suite. Prints one PASS/FAIL line per criterion; run with
//! `cargo test -p sbfl-core --test acceptance -- --nocapture` to see them.

mod common;

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rand::Rng;
use sbfl_core::bench::{generate, oracle_rank, running_example, GenParams};
use sbfl_core::callstack::{frequency_matrix, unique_stacks, Call, CallEvent, TestTrace};
use sbfl_core::formats::{self, SubjectBundle};
use sbfl_core::formulas::{score, Formula, Score};
use sbfl_core::metrics::{tie_reduction, BugOutcome, CategoryTable, MoveCategory};
use sbfl_core::pipeline::{run_subject, PipelineOptions};
use sbfl_core::ranking::{build_ranking, Rank, Ranking};
use sbfl_core::report;
use sbfl_core::spectra::compute_counters;
use sbfl_core::tiebreak::{break_ties, Phi};
use sbfl_core::{Counters, MethodId};

use common::*;

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

const SCORE_TOLERANCE: f64 = 0.005;
const ORACLE_INSTANCES: usize = 10_000;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const FORMULA_CASES: usize = 5_000;
const FORMULA_BUDGET: Duration = Duration::from_secs(10);
const INVARIANT_CASES: usize = 1_000;
const BOUND_SUBJECTS: u64 = 500;

fn example_result(formula: Formula) -> sbfl_core::pipeline::SubjectResult {
    run_subject(&running_example(), formula, &PipelineOptions::default()).unwrap()
}

fn mids(r: &Ranking) -> Vec<String> {
    r.ranks.values().map(|x| x.mid.to_string()).collect()
}

fn golden_counters() -> Check {
    let counters = compute_counters(&running_example().spectrum).map_err(|e| e.to_string())?;
    for id in ["a", "b", "g"] {
        ensure!(counters[id] == Counters::new(2, 2, 0, 0), "{id}: {:?}", counters[id]);
    }
    ensure!(counters["f"] == Counters::new(1, 1, 1, 1), "f: {:?}", counters["f"]);
    Ok(())
}

fn golden_scores() -> Check {
    // a, b, f, g
    let expected: [(Formula, [f64; 4]); 5] = [
        (Formula::Tarantula, [0.50, 0.50, 0.50, 0.50]),
        (Formula::Confidence, [0.00, 0.00, 0.00, 0.00]),
        (Formula::DStar { star: 2 }, [2.00, 2.00, 0.50, 2.00]),
        (Formula::GP13, [2.33, 2.33, 1.33, 2.33]),
        (Formula::Ochiai, [0.71, 0.71, 0.50, 0.71]),
    ];
    for (formula, values) in expected {
        let result = example_result(formula);
        for (got, want) in result.scores.values().zip(values) {
            ensure!((got.value() - want).abs() <= SCORE_TOLERANCE, "{formula}: {got} vs {want}");
        }
    }
    Ok(())
}

fn golden_before_ranks() -> Check {
    for formula in Formula::ALL {
        let want: [&str; 4] = match formula {
            Formula::Confidence | Formula::Tarantula => ["2.5"; 4],
            _ => ["2.0", "2.0", "4.0", "2.0"],
        };
        let got = mids(&example_result(formula).before);
        ensure!(got == want, "{formula}: {got:?}");
    }
    Ok(())
}

fn golden_phi_and_after_ranks() -> Check {
    for formula in Formula::ALL {
        let result = example_result(formula);
        let phi: Vec<u64> = result.phi.values().copied().collect();
        ensure!(phi == [3, 2, 1, 4], "{formula}: phi {phi:?}");
        let got = mids(&result.after.ranking);
        ensure!(got == ["2.0", "3.0", "4.0", "1.0"], "{formula}: after {got:?}");
    }
    Ok(())
}

fn golden_fault_outcome() -> Check {
    for formula in Formula::ALL {
        let outcome = example_result(formula).outcome().map_err(|e| e.to_string())?;
        ensure!(outcome.tie_reduction == Some(100.0), "{formula}: {:?}", outcome.tie_reduction);
        ensure!(outcome.category == MoveCategory::Best, "{formula}: {}", outcome.category);
    }
    Ok(())
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = rng(6);
    for i in 0..ORACLE_INSTANCES {
        let params = GenParams {
            seed: i as u64,
            n_methods: rng.gen_range(2..=12),
            n_tests: rng.gen_range(2..=10),
            fault_count: 1,
            tie_pressure: rng.gen_range(0.0..=1.0),
        };
        let subject = generate(params).map_err(|e| e.to_string())?;
        let formula = Formula::ALL[i % 5];
        let result = run_subject(&subject, formula, &PipelineOptions::default()).map_err(|e| e.to_string())?;
        let scores: Vec<Score> = result.scores.values().copied().collect();
        let phi: Vec<u64> = result.phi.values().copied().collect();
        let got: Vec<_> = result.after.ranking.ranks.values().copied().collect();
        ensure!(got == oracle_rank(&scores, &phi), "instance {i} ({formula}) differs from oracle");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < ORACLE_BUDGET, "took {elapsed:?}");
    Ok(())
}

fn formula_oracle() -> Check {
    let start = Instant::now();
    let mut rng = rng(7);
    for _ in 0..FORMULA_CASES {
        let c = random_counters(&mut rng, 500);
        for formula in Formula::ALL {
            let got = score(formula, c).map_err(|e| e.to_string())?.value();
            let want = rational_score(formula, c);
            ensure!(got.to_bits() == want.to_bits(), "{formula} {c:?}: {got} vs {want}");
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < FORMULA_BUDGET, "took {elapsed:?}");
    Ok(())
}

fn random_ranking(rng: &mut impl Rng) -> (Ranking, Phi) {
    let n = rng.gen_range(1..=12);
    let scores: IndexMap<MethodId, Score> = (0..n)
        .map(|i| (MethodId::new(format!("m{i}")), Score::new(rng.gen_range(0..4) as f64).unwrap()))
        .collect();
    let phi: Phi = scores.keys().map(|m| (m.clone(), rng.gen_range(0..4))).collect();
    (build_ranking(&scores).unwrap(), phi)
}

fn invariant_suite() -> Check {
    let mut rng = rng(8);
    for case in 0..INVARIANT_CASES {
        let (before, phi) = random_ranking(&mut rng);
        let after = break_ties(&before, &phi).map_err(|e| e.to_string())?;
        let n = before.len() as u64;

        for r in [&before, &after.ranking] {
            let halves: u64 = r.ranks.values().map(|x| x.mid.halves()).sum();
            ensure!(halves == n * (n + 1), "case {case}: mid sum {halves} halves for n={n}");
        }
        for (i, (b, a)) in before.ranks.values().zip(after.ranking.ranks.values()).enumerate() {
            ensure!(a.min >= b.min && a.max <= b.max, "case {case}: method {i} left its tie");
            if before.group_of_index(i).size == 1 {
                ensure!(a == b, "case {case}: untied method {i} moved");
            }
        }
        let again = break_ties(&after.ranking, &phi).map_err(|e| e.to_string())?;
        ensure!(again.ranking == after.ranking, "case {case}: not idempotent");

        let size_before = rng.gen_range(2..50);
        let tr = tie_reduction(size_before, rng.gen_range(1..=size_before)).map_err(|e| e.to_string())?;
        ensure!((0.0..=100.0).contains(&tr), "tie reduction {tr}");
    }

    // categories partition the bugs
    let mut outcomes: Vec<BugOutcome> = Vec::new();
    for _ in 0..INVARIANT_CASES {
        let (before, phi) = random_ranking(&mut rng);
        let after = break_ties(&before, &phi).unwrap();
        let n = before.len();
        let mut faults: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.25)).collect();
        if faults.is_empty() {
            faults.push(rng.gen_range(0..n));
        }
        let o = BugOutcome::compare("r", &before, &after, &faults).map_err(|e| e.to_string())?;
        if let Some(tr) = o.tie_reduction {
            ensure!((0.0..=100.0).contains(&tr), "tie reduction {tr}");
            ensure!((tr == 100.0) == (o.size_after == 1), "100% iff singleton");
        }
        ensure!(o.after.mid >= o.before.min && o.after.mid <= o.before.max, "locality");
        outcomes.push(o);
    }
    let table = CategoryTable::collect(&outcomes);
    let total: usize = MoveCategory::ALL.iter().map(|&c| table.count(c)).sum();
    ensure!(total == outcomes.len(), "categories cover {total} of {} bugs", outcomes.len());
    let same_diff = table.rows.iter().find(|r| r.category == MoveCategory::Same).and_then(|r| r.avg_diff);
    ensure!(same_diff.is_none_or(|d| d == 0.0), "same-category diff {same_diff:?}");

    // loop and recursion deduplication
    let methods = ["a", "b", "c", "d"];
    for case in 0..INVARIANT_CASES {
        let trace = random_trace(&mut rng, "t", &methods, 4);
        let base = unique_stacks(&trace).map_err(|e| e.to_string())?;
        let doubled = duplicate_first_call(&trace);
        ensure!(unique_stacks(&doubled).unwrap() == base, "case {case}: repeated call changed stacks");
    }
    let recursive = TestTrace::from_calls("t", &[Call::new("a", vec![Call::new("a", vec![Call::leaf("f")])])]);
    let freq = frequency_matrix(&[recursive], &["a".into(), "f".into()]).unwrap();
    ensure!(freq.get(0, 0) == 1, "recursive frame counted {} times", freq.get(0, 0));
    Ok(())
}

/// Repeats the first complete top-level call right after itself.
fn duplicate_first_call(trace: &TestTrace) -> TestTrace {
    let mut depth = 0i32;
    let mut end = 0;
    for (i, e) in trace.events.iter().enumerate() {
        depth += if e == &CallEvent::enter(e.method.clone()) { 1 } else { -1 };
        if depth == 0 {
            end = i + 1;
            break;
        }
    }
    let mut events = trace.events[..end].to_vec();
    events.extend_from_slice(&trace.events[..end]);
    events.extend_from_slice(&trace.events[end..]);
    TestTrace::new(trace.test.clone(), events)
}

fn bound_check() -> Check {
    for formula in Formula::ALL {
        let (mut achieved, mut possible, mut count) = (0.0, 0.0, 0usize);
        for seed in 0..BOUND_SUBJECTS {
            let subject = generate(GenParams {
                seed: 90_000 + seed,
                n_methods: 10 + (seed as usize % 30),
                n_tests: 10 + (seed as usize % 20),
                fault_count: 1 + (seed % 5 == 0) as usize,
                tie_pressure: (seed % 5) as f64 / 5.0,
            })
            .map_err(|e| e.to_string())?;
            let result = run_subject(&subject, formula, &PipelineOptions::default()).map_err(|e| e.to_string())?;
            let o = result.outcome().map_err(|e| e.to_string())?;
            if !o.critical_before {
                continue;
            }
            let gain = o.before.mid.value() - o.after.mid.value();
            let bound = o.before.mid.value() - o.before.min.value();
            achieved += gain;
            possible += bound;
            count += 1;

            let group = result.before.group_of_index(subject.spectrum.method_index(o.fault_before.as_str()).unwrap());
            let strict_max = group.indices.iter().any(|&i| {
                result.fault_indices.contains(&i)
                    && group.indices.iter().all(|&j| j == i || result.phi[j] < result.phi[i])
            });
            ensure!(
                (gain == bound) == strict_max,
                "{formula} subject {seed}: gain {gain}, bound {bound}, strictly maximal phi {strict_max}"
            );
        }
        ensure!(count > 0, "{formula}: no critical ties generated");
        let (mean_gain, mean_bound) = (achieved / count as f64, possible / count as f64);
        ensure!(mean_gain <= mean_bound, "{formula}: {mean_gain} > {mean_bound}");
    }
    Ok(())
}

fn fixture_dirs() -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    dirs.sort();
    dirs
}

fn cli_round_trip() -> Check {
    let dirs = fixture_dirs();
    ensure!(!dirs.is_empty(), "no fixtures");
    for dir in dirs {
        let bundle = SubjectBundle::discover(&dir).map_err(|e| e.to_string())?;
        let read = |p: &Path| std::fs::read_to_string(p).unwrap();
        let spectrum = read(&bundle.spectrum);
        ensure!(
            formats::emit_spectrum(&formats::parse_spectrum(&spectrum).map_err(|e| e.to_string())?) == spectrum,
            "{} spectrum",
            dir.display()
        );
        let traces = read(&bundle.traces);
        ensure!(
            formats::emit_traces(&formats::parse_traces(&traces).map_err(|e| e.to_string())?) == traces,
            "{} traces",
            dir.display()
        );
        if let Some(f) = &bundle.faults {
            let faults = read(f);
            ensure!(
                formats::emit_faults(&formats::parse_faults(&faults).map_err(|e| e.to_string())?) == faults,
                "{} faults",
                dir.display()
            );
        }

        let subject = bundle.load().map_err(|e| e.to_string())?;
        let render = || {
            let result = run_subject(&subject, Formula::DStar { star: 2 }, &PipelineOptions::default()).unwrap();
            let report = sbfl_core::metrics::EvalReport::from_outcomes(
                Formula::DStar { star: 2 },
                vec![result.outcome().unwrap()],
            );
            (serde_json::to_string(&report).unwrap(), report::rank_table(&result, Default::default()))
        };
        ensure!(render() == render(), "{}: pipeline output differs between runs", dir.display());
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("1 counters match the coverage table", golden_counters),
        ("2 scores match within 0.005", golden_scores),
        ("3 ranks before tie-breaking", golden_before_ranks),
        ("4 phi and ranks after tie-breaking", golden_phi_and_after_ranks),
        ("5 fault g: 100% tie reduction, best move", golden_fault_outcome),
        ("6 break_ties . build_ranking == composite-key oracle (10k)", oracle_equivalence),
        ("7 formulae == rational transcription (5k)", formula_oracle),
        ("8 invariant suite (1k each)", invariant_suite),
        ("9 improvement bound on 500 subjects", bound_check),
        ("10 format round trip and pipeline determinism", cli_round_trip),
    ];
    let mut failed = Vec::new();
    for (name, check) in criteria {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("PASS  {name}  ({:.2?})", start.elapsed()),
            Err(why) => {
                println!("FAIL  {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn rank_display_matches_halves() {
    assert_eq!(Rank::from_halves(5).to_string(), "2.5");
}
