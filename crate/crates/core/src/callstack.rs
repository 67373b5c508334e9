//! Unique call stacks and the per-test call frequency matrix.
//!
//! A call stack instance is recorded for every leaf call: a frame that is
//! entered and exits again without entering anything else. Its frames are all
//! open methods, outermost first; the test driver itself is never a frame.
//! Prefixes of a recorded stack are therefore not separate instances, and a
//! call repeated in a loop collapses into one instance.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::{Error, HitSpectrum, MethodId, Result, TestCase};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Enter,
    Exit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallEvent {
    pub kind: EventKind,
    pub method: MethodId,
}

impl CallEvent {
    pub fn enter(method: impl Into<MethodId>) -> Self {
        CallEvent { kind: EventKind::Enter, method: method.into() }
    }

    pub fn exit(method: impl Into<MethodId>) -> Self {
        CallEvent { kind: EventKind::Exit, method: method.into() }
    }
}

/// Ordered enter/exit events of one test.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestTrace {
    pub test: String,
    pub events: Vec<CallEvent>,
}

impl TestTrace {
    pub fn new(test: impl Into<String>, events: Vec<CallEvent>) -> Self {
        TestTrace { test: test.into(), events }
    }

    /// Builds a trace from a nested call description, e.g.
    /// `[("a", vec![leaf("f")])]`. Mostly useful in tests and generators.
    pub fn from_calls(test: impl Into<String>, calls: &[Call]) -> Self {
        let mut events = Vec::new();
        for call in calls {
            call.emit(&mut events);
        }
        TestTrace { test: test.into(), events }
    }

    /// Checks that every exit closes the innermost open frame and that no
    /// frame is left open.
    pub fn check_balanced(&self) -> Result<()> {
        let mut depth: Vec<&MethodId> = Vec::new();
        for (pos, event) in self.events.iter().enumerate() {
            match event.kind {
                EventKind::Enter => depth.push(&event.method),
                EventKind::Exit => match depth.pop() {
                    Some(open) if open == &event.method => {}
                    Some(open) => {
                        return Err(self.malformed(format!(
                            "event {pos}: exit from `{}` while `{open}` is open",
                            event.method
                        )))
                    }
                    None => {
                        return Err(self.malformed(format!("event {pos}: stray exit from `{}`", event.method)))
                    }
                },
            }
        }
        if let Some(open) = depth.last() {
            return Err(self.malformed(format!("`{open}` never exits")));
        }
        Ok(())
    }

    fn malformed(&self, reason: String) -> Error {
        Error::MalformedTrace { test: self.test.clone(), reason }
    }
}

/// Nested call used to describe traces compactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Call {
    pub method: MethodId,
    pub callees: Vec<Call>,
}

impl Call {
    pub fn new(method: impl Into<MethodId>, callees: Vec<Call>) -> Self {
        Call { method: method.into(), callees }
    }

    pub fn leaf(method: impl Into<MethodId>) -> Self {
        Call::new(method, Vec::new())
    }

    fn emit(&self, events: &mut Vec<CallEvent>) {
        events.push(CallEvent::enter(self.method.clone()));
        for c in &self.callees {
            c.emit(events);
        }
        events.push(CallEvent::exit(self.method.clone()));
    }
}

/// Open frames at a leaf call, outermost first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CallStackInstance {
    pub frames: Vec<MethodId>,
}

impl CallStackInstance {
    pub fn new<I, M>(frames: I) -> Self
    where
        I: IntoIterator<Item = M>,
        M: Into<MethodId>,
    {
        CallStackInstance { frames: frames.into_iter().map(Into::into).collect() }
    }

    pub fn contains(&self, method: &MethodId) -> bool {
        self.frames.contains(method)
    }

    /// Number of frames occupied by `method`.
    pub fn occurrences(&self, method: &MethodId) -> u32 {
        self.frames.iter().filter(|&f| f == method).count() as u32
    }
}

/// Distinct call stacks of one test.
pub fn unique_stacks(trace: &TestTrace) -> Result<BTreeSet<CallStackInstance>> {
    trace.check_balanced()?;
    let mut stacks = BTreeSet::new();
    let mut open: Vec<MethodId> = Vec::new();
    // whether the innermost open frame has entered a callee yet
    let mut has_callee = false;
    for event in &trace.events {
        match event.kind {
            EventKind::Enter => {
                open.push(event.method.clone());
                has_callee = false;
            }
            EventKind::Exit => {
                if !has_callee {
                    stacks.insert(CallStackInstance { frames: open.clone() });
                }
                open.pop();
                has_callee = true;
            }
        }
    }
    Ok(stacks)
}

/// How a method that occupies several frames of one stack is counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecursionCounting {
    /// Once per stack.
    #[default]
    Presence,
    /// Once per frame.
    Multiplicity,
}

impl RecursionCounting {
    fn count(self, stack: &CallStackInstance, method: &MethodId) -> u32 {
        match self {
            RecursionCounting::Presence => stack.contains(method) as u32,
            RecursionCounting::Multiplicity => stack.occurrences(method),
        }
    }
}

/// `counts[m][t]`: number of distinct stacks of test `t` containing method `m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrequencyMatrix {
    pub methods: Vec<MethodId>,
    pub tests: Vec<String>,
    pub counts: Vec<Vec<u32>>,
}

impl FrequencyMatrix {
    pub fn get(&self, method: usize, test: usize) -> u32 {
        self.counts[method][test]
    }
}

pub fn frequency_matrix(traces: &[TestTrace], methods: &[MethodId]) -> Result<FrequencyMatrix> {
    frequency_matrix_with(traces, methods, RecursionCounting::Presence)
}

/// Builds the frequency matrix with one column per trace, in trace order.
pub fn frequency_matrix_with(
    traces: &[TestTrace],
    methods: &[MethodId],
    counting: RecursionCounting,
) -> Result<FrequencyMatrix> {
    let index: HashMap<&MethodId, usize> = methods.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let mut counts = vec![vec![0u32; traces.len()]; methods.len()];
    for (t, trace) in traces.iter().enumerate() {
        for event in &trace.events {
            if !index.contains_key(&event.method) {
                return Err(Error::unknown("method", event.method.as_str()));
            }
        }
        for stack in unique_stacks(trace)? {
            let mut distinct: Vec<&MethodId> = stack.frames.iter().collect();
            distinct.sort();
            distinct.dedup();
            for m in distinct {
                counts[index[m]][t] += counting.count(&stack, m);
            }
        }
    }
    Ok(FrequencyMatrix {
        methods: methods.to_vec(),
        tests: traces.iter().map(|t| t.test.clone()).collect(),
        counts,
    })
}

/// Coverage implied by the traces: a method hits a test if it occurs in any
/// of its events. Tests without a trace get an all-zero column.
pub fn derive_hit_spectrum(traces: &[TestTrace], tests: &[TestCase], methods: &[MethodId]) -> Result<HitSpectrum> {
    let method_index: HashMap<&MethodId, usize> = methods.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let test_index: HashMap<&str, usize> = tests.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
    let mut hits = vec![vec![0u8; tests.len()]; methods.len()];
    for trace in traces {
        trace.check_balanced()?;
        let t = *test_index
            .get(trace.test.as_str())
            .ok_or_else(|| Error::unknown("test", trace.test.as_str()))?;
        for event in &trace.events {
            let m = *method_index
                .get(&event.method)
                .ok_or_else(|| Error::unknown("method", event.method.as_str()))?;
            hits[m][t] = 1;
        }
    }
    Ok(HitSpectrum { methods: methods.to_vec(), tests: tests.to_vec(), hits })
}
