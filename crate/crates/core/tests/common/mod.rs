//! Test-only oracles. None of these call into the ranking, tie-breaking,
//! call-stack or formula code they are used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sbfl_core::callstack::{CallEvent, EventKind, TestTrace};
use sbfl_core::formulas::Formula;
use sbfl_core::Counters;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

type Q = Ratio<i128>;

fn q(n: u32) -> Q {
    Q::from_integer(n as i128)
}

fn round(r: Q) -> f64 {
    // numerator and denominator stay below 2^53 for the counter ranges used,
    // so one division rounds the exact value correctly
    let (n, d) = (*r.numer(), *r.denom());
    assert!(n.unsigned_abs() < 1 << 53 && d.unsigned_abs() < 1 << 53, "oracle range exceeded");
    n as f64 / d as f64
}

/// Literal transcription of the five formulae in exact rational arithmetic,
/// with the degenerate-denominator policy applied to each fraction.
pub fn rational_score(formula: Formula, c: Counters) -> f64 {
    let (ef, ep, nf, np) = (c.ef, c.ep, c.nf, c.np);
    let frac = |n: Q, d: Q| if d == q(0) { q(0) } else { n / d };
    match formula {
        Formula::Confidence => round(frac(q(ef), q(ef) + q(nf)) - frac(q(ep), q(ep) + q(np))),
        Formula::DStar { star } => {
            if ef == 0 {
                0.0
            } else if ep + nf == 0 {
                f64::INFINITY
            } else {
                let mut num = q(1);
                for _ in 0..star {
                    num *= q(ef);
                }
                round(num / (q(ep) + q(nf)))
            }
        }
        Formula::GP13 => {
            if 2 * ep + ef == 0 {
                0.0
            } else {
                round(q(ef) * (q(1) + q(1) / (q(2) * q(ep) + q(ef))))
            }
        }
        Formula::Ochiai => {
            if ef == 0 {
                0.0
            } else {
                // ef / sqrt(x)  ==  sqrt(ef^2 / x)
                let squared = q(ef) * q(ef) / ((q(ef) + q(nf)) * (q(ef) + q(ep)));
                round(squared).sqrt()
            }
        }
        Formula::Tarantula => {
            if ef == 0 {
                0.0
            } else {
                let failed_ratio = q(ef) / (q(ef) + q(nf));
                let passed_ratio = frac(q(ep), q(ep) + q(np));
                round(failed_ratio / (failed_ratio + passed_ratio))
            }
        }
    }
}

pub fn random_counters(rng: &mut impl Rng, max: u32) -> Counters {
    loop {
        let c = Counters::new(
            rng.gen_range(0..=max),
            rng.gen_range(0..=max),
            rng.gen_range(0..=max),
            rng.gen_range(0..=max),
        );
        if c.ef + c.nf > 0 {
            return c;
        }
    }
}

/// Replays a trace with an explicit stack; a snapshot is taken whenever the
/// entered frame turns out to be a leaf.
pub fn replay_stacks(trace: &TestTrace) -> BTreeSet<Vec<String>> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<String> = Vec::new();
    let events = &trace.events;
    for (i, e) in events.iter().enumerate() {
        match e.kind {
            EventKind::Enter => {
                stack.push(e.method.to_string());
                let leaf = matches!(events.get(i + 1), Some(next) if next.kind == EventKind::Exit);
                if leaf {
                    out.insert(stack.clone());
                }
            }
            EventKind::Exit => {
                stack.pop();
            }
        }
    }
    out
}

/// Random balanced trace over `methods`, as (events, call-tree nodes).
pub fn random_trace(rng: &mut impl Rng, test: &str, methods: &[&str], max_depth: usize) -> TestTrace {
    fn node(rng: &mut impl Rng, methods: &[&str], depth: usize, max_depth: usize, out: &mut Vec<CallEvent>) {
        let m = methods[rng.gen_range(0..methods.len())];
        out.push(CallEvent::enter(m));
        if depth < max_depth {
            for _ in 0..rng.gen_range(0..=3) {
                node(rng, methods, depth + 1, max_depth, out);
            }
        }
        out.push(CallEvent::exit(m));
    }
    let mut events = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        node(rng, methods, 1, max_depth, &mut events);
    }
    TestTrace::new(test, events)
}

/// Sort-and-average MID ranks in halves for plain scores, by brute force:
/// each method's MID is the mean position of all methods with equal score.
pub fn brute_mid_halves(scores: &[f64]) -> Vec<u64> {
    scores
        .iter()
        .map(|&s| {
            let above = scores.iter().filter(|&&o| o > s).count() as u64;
            let equal = scores.iter().filter(|&&o| o == s).count() as u64;
            // positions above+1 ..= above+equal
            2 * above + 1 + equal
        })
        .collect()
}
