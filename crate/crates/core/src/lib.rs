//! Spectrum-based fault localization (SBFL) with call-frequency tie-breaking.
//!
//! The pipeline has two stages. The first scores every method from its hit
//! spectrum with one of five classic formulae and ranks the methods,
//! keeping score ties as explicit groups. The second replays per-test call
//! traces, counts how many distinct call stacks of the failing tests each
//! method takes part in (`phi`), and uses that count to reorder the members
//! of each tie group.
//!
//! ```
//! use sbfl_core::{bench, formulas::Formula, pipeline};
//!
//! let subject = bench::running_example();
//! let result = pipeline::run_subject(&subject, Formula::DStar { star: 2 }, &Default::default()).unwrap();
//! let g = subject.spectrum.method_index("g").unwrap();
//! assert_eq!(result.after.ranking.ranks[g].mid.to_string(), "1.0");
//! ```

pub mod bench;
pub mod callstack;
mod error;
pub mod formats;
pub mod formulas;
pub mod metrics;
pub mod pipeline;
pub mod ranking;
pub mod report;
pub mod spectra;
pub mod tiebreak;

pub use error::{Error, Result};
pub use spectra::{Counters, FaultSet, HitSpectrum, MethodId, Outcome, TestCase};
