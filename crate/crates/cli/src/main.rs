use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use sbfl_core::bench::{generate, GenParams};
use sbfl_core::formats::{self, SubjectBundle};
use sbfl_core::formulas::{score_all, Formula};
use sbfl_core::metrics::EvalReport;
use sbfl_core::pipeline::{run_subject, PipelineOptions, Subject};
use sbfl_core::ranking::{build_ranking, RankMode};
use sbfl_core::report;
use sbfl_core::spectra::compute_counters;

#[derive(Parser)]
#[command(name = "sbfl", version, about = "Spectrum-based fault localization with call-frequency tie-breaking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score and rank the methods of one spectrum.
    Score {
        #[arg(long)]
        spectrum: PathBuf,
        #[command(flatten)]
        formula: FormulaArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Rank one subject before and after call-frequency tie-breaking.
    Tiebreak {
        #[command(flatten)]
        subject: SubjectArgs,
        #[command(flatten)]
        formula: FormulaArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate tie-breaking over one or more subjects.
    Eval {
        #[command(flatten)]
        subject: SubjectArgs,
        #[command(flatten)]
        formula: FormulaArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Worker threads for per-subject evaluation.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Write synthetic subjects as spectrum, trace and fault files.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        methods: usize,
        #[arg(long, default_value_t = 20)]
        tests: usize,
        #[arg(long, default_value_t = 1)]
        faults: usize,
        #[arg(long, default_value_t = 0.3)]
        tie_pressure: f64,
        /// Number of subjects, seeded `seed`, `seed + 1`, ...
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Directory receiving one sub-directory per subject.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct FormulaArgs {
    #[arg(long, value_enum, default_value_t = FormulaName::Dstar)]
    formula: FormulaName,
    /// DStar exponent.
    #[arg(long, default_value_t = Formula::DEFAULT_STAR)]
    star: u32,
    /// Rank reported for tied methods.
    #[arg(long, value_enum, default_value_t = ModeName::Mid)]
    mode: ModeName,
}

impl FormulaArgs {
    fn formula(&self) -> Result<Formula> {
        Ok(Formula::from_name(self.formula.as_str(), self.star)?)
    }

    fn mode(&self) -> RankMode {
        match self.mode {
            ModeName::Min => RankMode::Min,
            ModeName::Mid => RankMode::Mid,
            ModeName::Max => RankMode::Max,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormulaName {
    Tarantula,
    Ochiai,
    Dstar,
    Gp13,
    Confidence,
}

impl FormulaName {
    fn as_str(self) -> &'static str {
        match self {
            FormulaName::Tarantula => "tarantula",
            FormulaName::Ochiai => "ochiai",
            FormulaName::Dstar => "dstar",
            FormulaName::Gp13 => "gp13",
            FormulaName::Confidence => "confidence",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeName {
    Min,
    Mid,
    Max,
}

#[derive(Args)]
struct SubjectArgs {
    /// Directory holding `<name>.spectrum`, `<name>.trace` and `<name>.faults`.
    /// May be repeated for `eval`.
    #[arg(long)]
    bundle: Vec<PathBuf>,
    #[arg(long, conflicts_with = "bundle", requires = "traces")]
    spectrum: Option<PathBuf>,
    #[arg(long, conflicts_with = "bundle", requires = "spectrum")]
    traces: Option<PathBuf>,
    #[arg(long, conflicts_with = "bundle")]
    faults: Option<PathBuf>,
}

impl SubjectArgs {
    fn bundles(&self) -> Result<Vec<SubjectBundle>> {
        match (&self.spectrum, &self.traces) {
            (Some(spectrum), Some(traces)) => Ok(vec![SubjectBundle {
                spectrum: spectrum.clone(),
                traces: traces.clone(),
                faults: self.faults.clone(),
            }]),
            _ if self.bundle.is_empty() => bail!("give --bundle DIR or --spectrum FILE --traces FILE"),
            _ => self
                .bundle
                .iter()
                .map(|dir| SubjectBundle::discover(dir).with_context(|| format!("bundle {}", dir.display())))
                .collect(),
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    /// Skip the tie-breaking stage.
    #[arg(long)]
    no_tiebreak: bool,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn load(bundle: &SubjectBundle) -> Result<Subject> {
    bundle.load().with_context(|| format!("loading {}", bundle.spectrum.display()))
}

fn score_cmd(spectrum: &Path, formula: &FormulaArgs, output: &OutputArgs) -> Result<()> {
    let text = std::fs::read_to_string(spectrum).with_context(|| format!("reading {}", spectrum.display()))?;
    let spectrum = formats::parse_spectrum(&text).with_context(|| format!("parsing {}", spectrum.display()))?;
    let f = formula.formula()?;
    let counters = compute_counters(&spectrum)?;
    let scores = score_all(f, &counters)?;
    let ranking = build_ranking(&scores)?;

    let out = match output.format {
        Format::Json => json(&serde_json::json!({
            "formula": f.to_string(),
            "scores": scores,
            "ranking": ranking,
        }))?,
        Format::Table => {
            let mode = formula.mode();
            let mut out = String::new();
            writeln!(out, "formula: {f}  ranks: {mode:?}")?;
            let width = scores.keys().map(|m| m.as_str().len()).max().unwrap_or(0).max(6);
            writeln!(out, "{:<width$}  {:>10}  {:>6}", "method", "score", "rank")?;
            for (method, s) in &scores {
                let rank = ranking.ranks[method.as_str()].get(mode);
                writeln!(out, "{:<width$}  {:>10}  {:>6}", method.as_str(), format!("{s:.4}"), rank.to_string())?;
            }
            out
        }
    };
    output.emit(&out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score { spectrum, formula, output } => score_cmd(&spectrum, &formula, &output),
        Command::Tiebreak { subject, formula, pipeline, output } => {
            let bundles = subject.bundles()?;
            let [bundle] = &bundles[..] else { bail!("tiebreak takes exactly one subject") };
            let subject = load(bundle)?;
            let options = PipelineOptions { no_tiebreak: pipeline.no_tiebreak, ..Default::default() };
            let result = run_subject(&subject, formula.formula()?, &options)?;
            let out = match output.format {
                Format::Json => json(&result)?,
                Format::Table => report::rank_table(&result, formula.mode()),
            };
            output.emit(&out)
        }
        Command::Eval { subject, formula, pipeline, jobs, output } => {
            let f = formula.formula()?;
            let options = PipelineOptions { no_tiebreak: pipeline.no_tiebreak, ..Default::default() };
            let bundles = subject.bundles()?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build()?;
            let outcomes = pool.install(|| {
                bundles
                    .par_iter()
                    .map(|b| {
                        let subject = load(b)?;
                        let result = run_subject(&subject, f, &options)
                            .with_context(|| format!("subject {}", subject.name))?;
                        result.outcome().with_context(|| format!("subject {} (faults required)", subject.name))
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            let report = EvalReport::from_outcomes(f, outcomes);
            let out = match output.format {
                Format::Json => json(&report)?,
                Format::Table => report::eval_report(&report),
            };
            output.emit(&out)
        }
        Command::Gen { seed, methods, tests, faults, tie_pressure, count, out } => {
            for s in seed..seed + count {
                let params = GenParams { seed: s, n_methods: methods, n_tests: tests, fault_count: faults, tie_pressure };
                let subject = generate(params)?;
                let dir = out.join(&subject.name);
                let bundle = formats::write_subject(&dir, &subject)
                    .with_context(|| format!("writing {}", dir.display()))?;
                println!("{}", bundle.spectrum.parent().unwrap_or(&dir).display());
            }
            Ok(())
        }
    }
}
