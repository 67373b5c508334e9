//! Synthetic subjects and an independent rank oracle.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::callstack::{derive_hit_spectrum, Call, TestTrace};
use crate::formulas::Score;
use crate::pipeline::Subject;
use crate::ranking::{MethodRank, Rank};
use crate::{Error, FaultSet, HitSpectrum, MethodId, Outcome, Result, TestCase};

/// The four-method, four-test program used throughout the documentation.
/// Method `g` is faulty; `t1` and `t2` fail.
pub fn running_example() -> Subject {
    let methods: Vec<MethodId> = ["a", "b", "f", "g"].into_iter().map(MethodId::from).collect();
    let tests = vec![
        TestCase::new("t1", Outcome::Failed),
        TestCase::new("t2", Outcome::Failed),
        TestCase::new("t3", Outcome::Passed),
        TestCase::new("t4", Outcome::Passed),
    ];
    let hits = vec![vec![1, 1, 1, 1], vec![1, 1, 1, 1], vec![1, 0, 0, 1], vec![1, 1, 1, 1]];
    let spectrum = HitSpectrum::new(methods, tests, hits).expect("valid example");

    let call = Call::new;
    let leaf = Call::leaf;
    let traces = vec![
        TestTrace::from_calls(
            "t1",
            &[call("a", vec![leaf("f"), leaf("g")]), call("b", vec![leaf("g")])],
        ),
        TestTrace::from_calls("t2", &[call("a", vec![leaf("g")]), call("b", vec![leaf("g")])]),
        TestTrace::from_calls("t3", &[call("a", vec![leaf("g")]), leaf("b")]),
        TestTrace::from_calls(
            "t4",
            &[
                call("a", vec![leaf("f")]),
                call("a", vec![leaf("g")]),
                call("a", vec![call("b", vec![leaf("g")])]),
            ],
        ),
    ];
    Subject { name: "running_example".into(), spectrum, traces, faults: FaultSet::new(["g"]) }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub n_methods: usize,
    pub n_tests: usize,
    pub fault_count: usize,
    /// Probability that a method is a shadow that runs exactly when another
    /// method runs, giving it an identical coverage row.
    pub tie_pressure: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { seed: 0, n_methods: 20, n_tests: 20, fault_count: 1, tie_pressure: 0.3 }
    }
}

pub const MAX_DEPTH: usize = 8;
pub const MAX_WIDTH: usize = 6;
const MAX_ROOT_CALLS: usize = 3;
const FAIL_PROBABILITY: f64 = 0.7;

struct Generator<'a> {
    rng: ChaCha8Rng,
    shadows: Vec<Vec<usize>>,
    methods: &'a [MethodId],
}

impl Generator<'_> {
    /// A call of `m` followed by leaf calls of its shadows, then random callees.
    fn call(&mut self, m: usize, depth: usize, vocab: &[usize]) -> Call {
        let mut callees: Vec<Call> = self.shadows[m].iter().map(|&s| Call::leaf(self.methods[s].clone())).collect();
        // shadows sit one level below, so random frames stop one short
        if depth + 1 < MAX_DEPTH && self.rng.gen_bool(0.7 / depth as f64) {
            let width = self.rng.gen_range(1..=MAX_WIDTH);
            for _ in 0..width {
                let callee = vocab[self.rng.gen_range(0..vocab.len())];
                callees.push(self.call(callee, depth + 1, vocab));
            }
        }
        Call::new(self.methods[m].clone(), callees)
    }
}

/// Builds a random subject. Deterministic for a fixed seed.
///
/// Calls form random trees at most [`MAX_DEPTH`] frames deep with at most
/// [`MAX_WIDTH`] random callees per frame. A test that executes a fault fails
/// with a fixed probability; no other test fails. The generator makes sure
/// at least one test fails and every fault runs in some failing test.
pub fn generate(params: GenParams) -> Result<Subject> {
    let GenParams { seed, n_methods, n_tests, fault_count, tie_pressure } = params;
    if !(2..=200).contains(&n_methods) {
        return Err(Error::Generation(format!("n_methods must be in 2..=200, got {n_methods}")));
    }
    if !(2..=500).contains(&n_tests) {
        return Err(Error::Generation(format!("n_tests must be in 2..=500, got {n_tests}")));
    }
    if fault_count == 0 || fault_count > n_methods {
        return Err(Error::Generation(format!("fault_count must be in 1..={n_methods}, got {fault_count}")));
    }
    if !(0.0..=1.0).contains(&tie_pressure) {
        return Err(Error::Generation(format!("tie_pressure must be in [0, 1], got {tie_pressure}")));
    }

    let methods: Vec<MethodId> = (0..n_methods).map(|i| MethodId::new(format!("m{i:03}"))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // every shadow hangs off a representative that is not itself a shadow
    let mut representative: Vec<usize> = (0..n_methods).collect();
    for i in 1..n_methods {
        if rng.gen_bool(tie_pressure) {
            let j = rng.gen_range(0..i);
            representative[i] = representative[j];
        }
    }
    let roots: Vec<usize> = (0..n_methods).filter(|&i| representative[i] == i).collect();
    let mut shadows = vec![Vec::new(); n_methods];
    for i in 0..n_methods {
        if representative[i] != i {
            shadows[representative[i]].push(i);
        }
    }

    let mut faults: Vec<usize> = (0..n_methods).collect();
    faults.shuffle(&mut rng);
    faults.truncate(fault_count);
    faults.sort_unstable();

    let mut gen = Generator { rng, shadows, methods: &methods };
    let mut forests: Vec<Vec<Call>> = Vec::with_capacity(n_tests);
    for _ in 0..n_tests {
        let max_vocab = (roots.len() / 3).max(1);
        let size = gen.rng.gen_range(1..=max_vocab);
        let vocab: Vec<usize> = roots.choose_multiple(&mut gen.rng, size).copied().collect();
        let n_calls = gen.rng.gen_range(1..=MAX_ROOT_CALLS);
        let forest = (0..n_calls)
            .map(|_| {
                let m = vocab[gen.rng.gen_range(0..vocab.len())];
                gen.call(m, 1, &vocab)
            })
            .collect();
        forests.push(forest);
    }

    let fault_ids: Vec<&MethodId> = faults.iter().map(|&f| &methods[f]).collect();
    let covers_fault = |forest: &[Call]| forest.iter().any(|c| call_contains(c, &fault_ids));
    let mut failed: Vec<bool> = forests
        .iter()
        .map(|f| covers_fault(f) && gen.rng.gen_bool(FAIL_PROBABILITY))
        .collect();

    if !failed.iter().any(|&f| f) {
        match forests.iter().position(|f| covers_fault(f)) {
            Some(t) => failed[t] = true,
            None => {
                let f = faults[0];
                let call = gen.call(representative[f], 1, &[representative[f]]);
                forests[0].push(call);
                failed[0] = true;
            }
        }
    }
    for &f in &faults {
        let executed = forests
            .iter()
            .zip(&failed)
            .any(|(forest, &fail)| fail && forest.iter().any(|c| call_contains(c, &[&methods[f]])));
        if !executed {
            let t = failed.iter().position(|&x| x).expect("one failing test exists");
            let call = gen.call(representative[f], 1, &[representative[f]]);
            forests[t].push(call);
        }
    }

    let tests: Vec<TestCase> = failed
        .iter()
        .enumerate()
        .map(|(i, &f)| TestCase::new(format!("t{i:03}"), if f { Outcome::Failed } else { Outcome::Passed }))
        .collect();
    let traces: Vec<TestTrace> = forests
        .iter()
        .zip(&tests)
        .map(|(forest, t)| TestTrace::from_calls(t.id.clone(), forest))
        .collect();
    let spectrum = derive_hit_spectrum(&traces, &tests, &methods)?;
    let faults = FaultSet::new(faults.iter().map(|&f| methods[f].clone()));
    Ok(Subject { name: format!("synthetic_{seed}"), spectrum, traces, faults })
}

fn call_contains(call: &Call, targets: &[&MethodId]) -> bool {
    targets.contains(&&call.method) || call.callees.iter().any(|c| call_contains(c, targets))
}

/// Reference ranks from a single sort on (score desc, phi desc, input
/// position), averaging positions over blocks of equal (score, phi).
///
/// Shares no code with the ranking or tie-breaking modules.
pub fn oracle_rank(scores: &[Score], phi: &[u64]) -> Vec<MethodRank> {
    assert_eq!(scores.len(), phi.len());
    let n = scores.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        scores[y]
            .value()
            .total_cmp(&scores[x].value())
            .then(phi[y].cmp(&phi[x]))
            .then(x.cmp(&y))
    });

    let mut ranks = vec![
        MethodRank { min: Rank::from_halves(0), mid: Rank::from_halves(0), max: Rank::from_halves(0) };
        n
    ];
    let mut first = 0;
    while first < n {
        let key = (scores[order[first]].value().to_bits(), phi[order[first]]);
        let mut last = first;
        while last + 1 < n && (scores[order[last + 1]].value().to_bits(), phi[order[last + 1]]) == key {
            last += 1;
        }
        // 1-based positions first+1 ..= last+1
        let lo = first as u64 + 1;
        let hi = last as u64 + 1;
        for &i in &order[first..=last] {
            ranks[i] = MethodRank {
                min: Rank::from_position(lo),
                mid: Rank::from_halves(lo + hi),
                max: Rank::from_position(hi),
            };
        }
        first = last + 1;
    }
    ranks
}
