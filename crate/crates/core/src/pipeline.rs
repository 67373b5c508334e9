//! The two-stage process: score and rank from the hit spectrum, then break
//! ties with call frequencies from the failing tests.

use indexmap::IndexMap;
use serde::Serialize;

use crate::callstack::{frequency_matrix_with, FrequencyMatrix, RecursionCounting, TestTrace};
use crate::formulas::{score_all, Formula, Score};
use crate::metrics::BugOutcome;
use crate::ranking::{build_ranking, classify_ties, CriticalTieReport, Ranking};
use crate::spectra::{compute_counters, validate_spectrum};
use crate::tiebreak::{break_ties, compute_phi, BrokenRanking, Phi};
use crate::{Counters, Error, FaultSet, HitSpectrum, MethodId, Result};

/// A program version: coverage, per-test traces and the known faults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subject {
    pub name: String,
    pub spectrum: HitSpectrum,
    pub traces: Vec<TestTrace>,
    pub faults: FaultSet,
}

impl Subject {
    /// Checks the spectrum and that every trace and fault refers to a known
    /// test or method.
    pub fn validate(&self) -> Result<()> {
        let report = validate_spectrum(&self.spectrum);
        if !report.is_valid() {
            return Err(Error::Structural(report.to_string()));
        }
        for trace in &self.traces {
            if self.spectrum.test_index(&trace.test).is_none() {
                return Err(Error::unknown("test", trace.test.as_str()));
            }
            trace.check_balanced()?;
        }
        if !self.faults.is_empty() {
            self.faults.resolve(&self.spectrum.methods)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PipelineOptions {
    /// Skip the second stage; the "after" ranking equals the initial one.
    pub no_tiebreak: bool,
    pub counting: RecursionCounting,
}

/// Everything both stages produce for one subject.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubjectResult {
    pub subject: String,
    pub formula: String,
    pub counters: IndexMap<MethodId, Counters>,
    pub scores: IndexMap<MethodId, Score>,
    pub before: Ranking,
    pub frequency: FrequencyMatrix,
    pub phi: Phi,
    pub after: BrokenRanking,
    /// Present when the subject lists faults.
    pub critical: Option<CriticalTieReport>,
    #[serde(skip)]
    pub fault_indices: Vec<usize>,
}

impl SubjectResult {
    pub fn outcome(&self) -> Result<BugOutcome> {
        BugOutcome::compare(&self.subject, &self.before, &self.after, &self.fault_indices)
    }
}

pub fn run_subject(subject: &Subject, formula: Formula, options: &PipelineOptions) -> Result<SubjectResult> {
    subject.validate()?;
    let spectrum = &subject.spectrum;

    let counters = compute_counters(spectrum)?;
    let scores = score_all(formula, &counters)?;
    let before = build_ranking(&scores)?;

    let frequency = frequency_matrix_with(&subject.traces, &spectrum.methods, options.counting)?;
    let phi = compute_phi(&frequency, &spectrum.tests)?;
    let after = if options.no_tiebreak { BrokenRanking::identity(&before) } else { break_ties(&before, &phi)? };

    let (critical, fault_indices) = if subject.faults.is_empty() {
        (None, Vec::new())
    } else {
        (Some(classify_ties(&before, &subject.faults)?), subject.faults.resolve(&spectrum.methods)?)
    };

    Ok(SubjectResult {
        subject: subject.name.clone(),
        formula: formula.to_string(),
        counters,
        scores,
        before,
        frequency,
        phi,
        after,
        critical,
        fault_indices,
    })
}
