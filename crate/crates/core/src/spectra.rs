//! Coverage spectra, test outcomes and the four SBFL counters.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Identifier of a program method, unique within one subject.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MethodId(String);

impl MethodId {
    pub fn new(id: impl Into<String>) -> Self {
        MethodId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MethodId {
    fn from(s: &str) -> Self {
        MethodId(s.to_owned())
    }
}

impl std::borrow::Borrow<str> for MethodId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Passed,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub id: String,
    pub outcome: Outcome,
}

impl TestCase {
    pub fn new(id: impl Into<String>, outcome: Outcome) -> Self {
        TestCase { id: id.into(), outcome }
    }

    pub fn failed(&self) -> bool {
        self.outcome == Outcome::Failed
    }
}

/// Method-by-test coverage matrix plus per-test outcomes.
///
/// Fields are public so that arbitrary (possibly invalid) input can be
/// represented and then checked with [`validate_spectrum`]. Row `i` of
/// `hits` belongs to `methods[i]`, column `j` to `tests[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitSpectrum {
    pub methods: Vec<MethodId>,
    pub tests: Vec<TestCase>,
    pub hits: Vec<Vec<u8>>,
}

impl HitSpectrum {
    /// Builds a spectrum and rejects it unless every invariant holds.
    pub fn new(methods: Vec<MethodId>, tests: Vec<TestCase>, hits: Vec<Vec<u8>>) -> Result<Self> {
        let spectrum = HitSpectrum { methods, tests, hits };
        let report = validate_spectrum(&spectrum);
        if report.is_valid() {
            Ok(spectrum)
        } else {
            Err(Error::Structural(report.to_string()))
        }
    }

    pub fn method_index(&self, id: &str) -> Option<usize> {
        self.methods.iter().position(|m| m.as_str() == id)
    }

    pub fn test_index(&self, id: &str) -> Option<usize> {
        self.tests.iter().position(|t| t.id == id)
    }

    pub fn hit(&self, method: usize, test: usize) -> bool {
        self.hits[method][test] != 0
    }

    pub fn failed_count(&self) -> usize {
        self.tests.iter().filter(|t| t.failed()).count()
    }

    pub fn passed_count(&self) -> usize {
        self.tests.len() - self.failed_count()
    }

    fn check_shape(&self) -> Result<()> {
        if self.tests.is_empty() {
            return Err(Error::EmptyInput("spectrum has no tests"));
        }
        if self.hits.len() != self.methods.len() {
            return Err(Error::Structural(format!(
                "{} hit rows for {} methods",
                self.hits.len(),
                self.methods.len()
            )));
        }
        for (row, method) in self.hits.iter().zip(&self.methods) {
            if row.len() != self.tests.len() {
                return Err(Error::Structural(format!(
                    "row `{method}` has {} cells for {} tests",
                    row.len(),
                    self.tests.len()
                )));
            }
            if let Some(v) = row.iter().find(|&&v| v > 1) {
                return Err(Error::Structural(format!("non-binary hit value {v} in row `{method}`")));
            }
        }
        Ok(())
    }
}

/// The four per-method tallies, in number of tests.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Counters {
    /// failed tests executing the method
    pub ef: u32,
    /// passed tests executing the method
    pub ep: u32,
    /// failed tests not executing the method
    pub nf: u32,
    /// passed tests not executing the method
    pub np: u32,
}

impl Counters {
    pub fn new(ef: u32, ep: u32, nf: u32, np: u32) -> Self {
        Counters { ef, ep, nf, np }
    }

    pub fn total_failed(&self) -> u32 {
        self.ef + self.nf
    }

    pub fn total_passed(&self) -> u32 {
        self.ep + self.np
    }

    pub fn total(&self) -> u32 {
        self.total_failed() + self.total_passed()
    }
}

/// Tallies ef/ep/nf/np for every method, in spectrum order.
pub fn compute_counters(spectrum: &HitSpectrum) -> Result<IndexMap<MethodId, Counters>> {
    spectrum.check_shape()?;
    let failed: Vec<bool> = spectrum.tests.iter().map(TestCase::failed).collect();
    let total_failed = failed.iter().filter(|&&f| f).count() as u32;
    let total_passed = failed.len() as u32 - total_failed;

    Ok(spectrum
        .methods
        .iter()
        .zip(&spectrum.hits)
        .map(|(method, row)| {
            let (mut ef, mut ep) = (0, 0);
            for (&hit, &is_failed) in row.iter().zip(&failed) {
                match (hit != 0, is_failed) {
                    (true, true) => ef += 1,
                    (true, false) => ep += 1,
                    _ => {}
                }
            }
            let counters = Counters::new(ef, ep, total_failed - ef, total_passed - ep);
            (method.clone(), counters)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoMethods,
    NoTests,
    EmptyMethodId { index: usize },
    EmptyTestId { index: usize },
    DuplicateMethod(MethodId),
    DuplicateTest(String),
    RowCount { rows: usize, methods: usize },
    RowLength { method: MethodId, cells: usize, tests: usize },
    NonBinary { method: MethodId, test: String, value: u8 },
    NoFailingTest,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoMethods => write!(f, "no methods"),
            Violation::NoTests => write!(f, "no tests"),
            Violation::EmptyMethodId { index } => write!(f, "empty method id at row {index}"),
            Violation::EmptyTestId { index } => write!(f, "empty test id at column {index}"),
            Violation::DuplicateMethod(m) => write!(f, "duplicate method `{m}`"),
            Violation::DuplicateTest(t) => write!(f, "duplicate test `{t}`"),
            Violation::RowCount { rows, methods } => {
                write!(f, "dimension mismatch: {rows} hit rows for {methods} methods")
            }
            Violation::RowLength { method, cells, tests } => {
                write!(f, "dimension mismatch: row `{method}` has {cells} cells for {tests} tests")
            }
            Violation::NonBinary { method, test, value } => {
                write!(f, "non-binary hit value {value} at ({method}, {test})")
            }
            Violation::NoFailingTest => write!(f, "no failing test"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every spectrum invariant and returns the itemized violations.
pub fn validate_spectrum(spectrum: &HitSpectrum) -> ValidationReport {
    let mut violations = Vec::new();
    if spectrum.methods.is_empty() {
        violations.push(Violation::NoMethods);
    }
    if spectrum.tests.is_empty() {
        violations.push(Violation::NoTests);
    }

    let mut seen = HashSet::new();
    for (index, m) in spectrum.methods.iter().enumerate() {
        if m.as_str().is_empty() {
            violations.push(Violation::EmptyMethodId { index });
        } else if !seen.insert(m.as_str()) {
            violations.push(Violation::DuplicateMethod(m.clone()));
        }
    }
    let mut seen = HashSet::new();
    for (index, t) in spectrum.tests.iter().enumerate() {
        if t.id.is_empty() {
            violations.push(Violation::EmptyTestId { index });
        } else if !seen.insert(t.id.as_str()) {
            violations.push(Violation::DuplicateTest(t.id.clone()));
        }
    }

    if spectrum.hits.len() != spectrum.methods.len() {
        violations.push(Violation::RowCount { rows: spectrum.hits.len(), methods: spectrum.methods.len() });
    }
    for (method, row) in spectrum.methods.iter().zip(&spectrum.hits) {
        if row.len() != spectrum.tests.len() {
            violations.push(Violation::RowLength {
                method: method.clone(),
                cells: row.len(),
                tests: spectrum.tests.len(),
            });
        }
        for (&value, test) in row.iter().zip(&spectrum.tests) {
            if value > 1 {
                violations.push(Violation::NonBinary { method: method.clone(), test: test.id.clone(), value });
            }
        }
    }

    if !spectrum.tests.is_empty() && spectrum.failed_count() == 0 {
        violations.push(Violation::NoFailingTest);
    }
    ValidationReport { violations }
}

/// Ground-truth faulty methods of a subject.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultSet {
    pub faulty: BTreeSet<MethodId>,
}

impl FaultSet {
    pub fn new<I, M>(faulty: I) -> Self
    where
        I: IntoIterator<Item = M>,
        M: Into<MethodId>,
    {
        FaultSet { faulty: faulty.into_iter().map(Into::into).collect() }
    }

    pub fn is_empty(&self) -> bool {
        self.faulty.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.faulty.contains(id)
    }

    /// Resolves the faults to positions in `methods`, sorted ascending.
    pub fn resolve(&self, methods: &[MethodId]) -> Result<Vec<usize>> {
        if self.faulty.is_empty() {
            return Err(Error::EmptyInput("fault set is empty"));
        }
        let mut indices = self
            .faulty
            .iter()
            .map(|f| {
                methods
                    .iter()
                    .position(|m| m == f)
                    .ok_or_else(|| Error::unknown("fault method", f.as_str()))
            })
            .collect::<Result<Vec<_>>>()?;
        indices.sort_unstable();
        Ok(indices)
    }
}

impl From<String> for MethodId {
    fn from(s: String) -> Self {
        MethodId(s)
    }
}

impl From<&MethodId> for MethodId {
    fn from(m: &MethodId) -> Self {
        m.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::running_example;

    #[test]
    fn running_example_counters() {
        let counters = compute_counters(&running_example().spectrum).unwrap();
        for id in ["a", "b", "g"] {
            assert_eq!(counters[id], Counters::new(2, 2, 0, 0), "method {id}");
        }
        assert_eq!(counters["f"], Counters::new(1, 1, 1, 1));
    }

    #[test]
    fn unexecuted_method_has_only_complements() {
        let s = HitSpectrum::new(
            vec!["x".into(), "y".into()],
            vec![
                TestCase::new("t1", Outcome::Failed),
                TestCase::new("t2", Outcome::Passed),
                TestCase::new("t3", Outcome::Passed),
            ],
            vec![vec![1, 1, 0], vec![0, 0, 0]],
        )
        .unwrap();
        let c = compute_counters(&s).unwrap();
        assert_eq!(c["y"], Counters::new(0, 0, 1, 2));
    }

    #[test]
    fn counters_reject_bad_shapes() {
        let mut s = running_example().spectrum;
        s.hits[1].pop();
        assert!(matches!(compute_counters(&s), Err(Error::Structural(_))));

        let empty = HitSpectrum { methods: vec!["a".into()], tests: vec![], hits: vec![vec![]] };
        assert!(matches!(compute_counters(&empty), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn validation_reports_each_violation() {
        assert!(validate_spectrum(&running_example().spectrum).is_valid());

        let mut s = running_example().spectrum;
        s.hits[0][0] = 2;
        let report = validate_spectrum(&s);
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("non-binary hit value"));

        let mut s = running_example().spectrum;
        for t in &mut s.tests {
            t.outcome = Outcome::Passed;
        }
        let report = validate_spectrum(&s);
        assert_eq!(report.violations, vec![Violation::NoFailingTest]);
        assert_eq!(report.to_string(), "no failing test");

        let mut s = running_example().spectrum;
        s.methods[1] = "a".into();
        s.hits.push(vec![0; 4]);
        let report = validate_spectrum(&s);
        assert!(report.violations.contains(&Violation::DuplicateMethod("a".into())));
        assert!(report.violations.contains(&Violation::RowCount { rows: 5, methods: 4 }));
    }

    #[test]
    fn zero_passed_tests_is_legal() {
        let s = HitSpectrum::new(
            vec!["x".into()],
            vec![TestCase::new("t1", Outcome::Failed)],
            vec![vec![1]],
        )
        .unwrap();
        assert_eq!(compute_counters(&s).unwrap()["x"], Counters::new(1, 0, 0, 0));
    }

    #[test]
    fn fault_resolution() {
        let s = running_example().spectrum;
        assert_eq!(FaultSet::new(["g", "a"]).resolve(&s.methods).unwrap(), vec![0, 3]);
        assert!(matches!(
            FaultSet::new(["zz"]).resolve(&s.methods),
            Err(Error::UnknownReference { .. })
        ));
        assert!(FaultSet::default().resolve(&s.methods).is_err());
    }
}
