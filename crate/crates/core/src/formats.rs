//! Line-oriented file formats.
//!
//! Spectrum (UTF-8 CSV):
//!
//! ```text
//! method,t1,t2,t3,t4
//! a,1,1,1,1
//! f,1,0,0,1
//! __outcome__,F,F,P,P
//! ```
//!
//! Trace: one `testId,E|X,methodId` record per line in execution order.
//! Records of different tests may interleave. Faults: one method id per line.
//!
//! The `emit_*` functions write the canonical form (LF line endings, trailing
//! newline, traces grouped by test, faults sorted); parsing a canonical file
//! and emitting it again reproduces it byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;

use crate::callstack::{CallEvent, EventKind, TestTrace};
use crate::pipeline::Subject;
use crate::{Error, FaultSet, HitSpectrum, MethodId, Outcome, Result, TestCase};

pub const HEADER_FIRST_CELL: &str = "method";
pub const OUTCOME_MARKER: &str = "__outcome__";

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

pub fn parse_spectrum(text: &str) -> Result<HitSpectrum> {
    let mut lines = lines(text);
    let (header_line, header) = lines.next().ok_or_else(|| Error::parse(1, "missing header"))?;
    let mut cells = header.split(',');
    if cells.next() != Some(HEADER_FIRST_CELL) {
        return Err(Error::parse(header_line, format!("header must start with `{HEADER_FIRST_CELL}`")));
    }
    let test_ids: Vec<&str> = cells.collect();
    if test_ids.is_empty() {
        return Err(Error::parse(header_line, "header lists no tests"));
    }
    if let Some(pos) = test_ids.iter().position(|t| t.is_empty()) {
        return Err(Error::parse(header_line, format!("empty test id in column {}", pos + 2)));
    }

    let mut methods = Vec::new();
    let mut hits = Vec::new();
    let mut outcomes = None;
    for (line, row) in lines {
        if outcomes.is_some() {
            return Err(Error::parse(line, format!("data after the `{OUTCOME_MARKER}` row")));
        }
        let mut cells = row.split(',');
        let id = cells.next().unwrap_or_default();
        let values: Vec<&str> = cells.collect();
        if values.len() != test_ids.len() {
            return Err(Error::parse(
                line,
                format!("row has {} values, header lists {} tests", values.len(), test_ids.len()),
            ));
        }
        if id == OUTCOME_MARKER {
            let parsed = values
                .iter()
                .map(|v| match *v {
                    "P" => Ok(Outcome::Passed),
                    "F" => Ok(Outcome::Failed),
                    other => Err(Error::parse(line, format!("outcome must be P or F, got `{other}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            outcomes = Some(parsed);
            continue;
        }
        if id.is_empty() {
            return Err(Error::parse(line, "empty method id"));
        }
        if methods.iter().any(|m: &MethodId| m.as_str() == id) {
            return Err(Error::parse(line, format!("duplicate method `{id}`")));
        }
        let row = values
            .iter()
            .map(|v| match *v {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => Err(Error::parse(line, format!("non-binary hit value `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()?;
        methods.push(MethodId::new(id));
        hits.push(row);
    }

    let outcomes = outcomes.ok_or_else(|| {
        Error::parse(text.lines().count().max(1), format!("missing `{OUTCOME_MARKER}` row"))
    })?;
    let tests = test_ids.iter().zip(outcomes).map(|(id, o)| TestCase::new(*id, o)).collect();
    HitSpectrum::new(methods, tests, hits)
}

pub fn emit_spectrum(spectrum: &HitSpectrum) -> String {
    let mut out = String::from(HEADER_FIRST_CELL);
    for t in &spectrum.tests {
        out.push(',');
        out.push_str(&t.id);
    }
    out.push('\n');
    for (m, row) in spectrum.methods.iter().zip(&spectrum.hits) {
        out.push_str(m.as_str());
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out.push_str(OUTCOME_MARKER);
    for t in &spectrum.tests {
        out.push_str(if t.failed() { ",F" } else { ",P" });
    }
    out.push('\n');
    out
}

/// Parses trace records, grouping them by test in order of first
/// appearance. Every test's events must be balanced.
pub fn parse_traces(text: &str) -> Result<Vec<TestTrace>> {
    let mut grouped: IndexMap<String, Vec<CallEvent>> = IndexMap::new();
    for (line, record) in lines(text) {
        let fields: Vec<&str> = record.split(',').collect();
        let [test, kind, method] = fields[..] else {
            return Err(Error::parse(line, format!("expected `testId,E|X,methodId`, got {} fields", fields.len())));
        };
        if test.is_empty() || method.is_empty() {
            return Err(Error::parse(line, "empty test or method id"));
        }
        let kind = match kind {
            "E" => EventKind::Enter,
            "X" => EventKind::Exit,
            other => return Err(Error::parse(line, format!("event kind must be E or X, got `{other}`"))),
        };
        grouped
            .entry(test.to_owned())
            .or_default()
            .push(CallEvent { kind, method: MethodId::new(method) });
    }
    let traces: Vec<TestTrace> = grouped.into_iter().map(|(test, events)| TestTrace { test, events }).collect();
    for t in &traces {
        t.check_balanced()?;
    }
    Ok(traces)
}

pub fn emit_traces(traces: &[TestTrace]) -> String {
    let mut out = String::new();
    for trace in traces {
        for e in &trace.events {
            let kind = match e.kind {
                EventKind::Enter => 'E',
                EventKind::Exit => 'X',
            };
            let _ = writeln!(out, "{},{kind},{}", trace.test, e.method);
        }
    }
    out
}

pub fn parse_faults(text: &str) -> Result<FaultSet> {
    let mut faults = FaultSet::default();
    for (line, id) in lines(text) {
        let id = id.trim();
        if id.contains(',') {
            return Err(Error::parse(line, "one method id per line expected"));
        }
        if !faults.faulty.insert(MethodId::new(id)) {
            return Err(Error::parse(line, format!("duplicate fault `{id}`")));
        }
    }
    Ok(faults)
}

pub fn emit_faults(faults: &FaultSet) -> String {
    faults.faulty.iter().map(|f| format!("{f}\n")).collect()
}

/// Paths of the three files describing one subject.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubjectBundle {
    pub spectrum: PathBuf,
    pub traces: PathBuf,
    pub faults: Option<PathBuf>,
}

pub const SPECTRUM_EXT: &str = "spectrum";
pub const TRACE_EXT: &str = "trace";
pub const FAULTS_EXT: &str = "faults";

impl SubjectBundle {
    /// Finds `<name>.spectrum`, `<name>.trace` and optionally `<name>.faults`
    /// inside `dir`.
    pub fn discover(dir: &Path) -> Result<Self> {
        let io = |e: std::io::Error| Error::Structural(format!("{}: {e}", dir.display()));
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(io)?
            .map(|e| e.map(|e| e.path()))
            .collect::<std::io::Result<_>>()
            .map_err(io)?;
        entries.sort();
        let find = |ext: &str| entries.iter().find(|p| p.extension().is_some_and(|e| e == ext)).cloned();
        let missing = |ext: &str| Error::Structural(format!("no .{ext} file in {}", dir.display()));
        Ok(SubjectBundle {
            spectrum: find(SPECTRUM_EXT).ok_or_else(|| missing(SPECTRUM_EXT))?,
            traces: find(TRACE_EXT).ok_or_else(|| missing(TRACE_EXT))?,
            faults: find(FAULTS_EXT),
        })
    }

    /// Reads and parses all files; errors name the offending file.
    pub fn load(&self) -> Result<Subject> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|e| Error::Structural(format!("{}: {e}", p.display())))
        };
        let located = |p: &Path, e: Error| match e {
            Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", p.display()) },
            other => other,
        };
        let spectrum = parse_spectrum(&read(&self.spectrum)?).map_err(|e| located(&self.spectrum, e))?;
        let traces = parse_traces(&read(&self.traces)?).map_err(|e| located(&self.traces, e))?;
        let faults = match &self.faults {
            Some(p) => parse_faults(&read(p)?).map_err(|e| located(p, e))?,
            None => FaultSet::default(),
        };
        let name = self
            .spectrum
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let subject = Subject { name, spectrum, traces, faults };
        subject.validate()?;
        Ok(subject)
    }
}

/// Writes `<dir>/<name>.{spectrum,trace,faults}` in canonical form.
pub fn write_subject(dir: &Path, subject: &Subject) -> std::io::Result<SubjectBundle> {
    std::fs::create_dir_all(dir)?;
    let path = |ext: &str| dir.join(format!("{}.{ext}", subject.name));
    let bundle = SubjectBundle {
        spectrum: path(SPECTRUM_EXT),
        traces: path(TRACE_EXT),
        faults: Some(path(FAULTS_EXT)),
    };
    std::fs::write(&bundle.spectrum, emit_spectrum(&subject.spectrum))?;
    std::fs::write(&bundle.traces, emit_traces(&subject.traces))?;
    std::fs::write(bundle.faults.as_ref().unwrap(), emit_faults(&subject.faults))?;
    Ok(bundle)
}
