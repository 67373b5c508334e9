//! Aligned-text rendering of rank tables and evaluation reports.

use std::fmt::Write as _;

use crate::metrics::{EvalReport, TieStats, TopNTable};
use crate::pipeline::SubjectResult;
use crate::ranking::RankMode;

fn opt(v: Option<f64>, decimals: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |v| format!("{v:.decimals$}"))
}

fn pct(count: usize, total: usize) -> String {
    if total == 0 {
        "-".to_owned()
    } else {
        format!("{:.1}%", count as f64 * 100.0 / total as f64)
    }
}

struct Table {
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table { rows: vec![header.iter().map(|s| s.to_string()).collect()] }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn render(&self, out: &mut String) {
        let cols = self.rows.iter().map(Vec::len).max().unwrap_or(0);
        let widths: Vec<usize> = (0..cols)
            .map(|c| self.rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
            .collect();
        for (i, row) in self.rows.iter().enumerate() {
            let mut line = String::new();
            for (c, cell) in row.iter().enumerate() {
                if c == 0 {
                    let _ = write!(line, "{cell:<w$}", w = widths[c]);
                } else {
                    let _ = write!(line, "  {cell:>w$}", w = widths[c]);
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
                out.push_str(&"-".repeat(total));
                out.push('\n');
            }
        }
    }
}

/// Per-method table: counters, score, phi and the rank before and after
/// tie-breaking under `mode`. Faulty methods are marked with `*`.
pub fn rank_table(result: &SubjectResult, mode: RankMode) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "subject: {}  formula: {}  ranks: {:?}", result.subject, result.formula, mode);
    let mut table = Table::new(&["method", "ef", "ep", "nf", "np", "score", "phi", "before", "after"]);
    for (i, (method, counters)) in result.counters.iter().enumerate() {
        let marker = if result.fault_indices.contains(&i) { "*" } else { "" };
        table.row(vec![
            format!("{method}{marker}"),
            counters.ef.to_string(),
            counters.ep.to_string(),
            counters.nf.to_string(),
            counters.np.to_string(),
            format!("{:.4}", result.scores[i]),
            result.phi[i].to_string(),
            result.before.ranks[i].get(mode).to_string(),
            result.after.ranking.ranks[i].get(mode).to_string(),
        ]);
    }
    table.render(&mut out);
    out
}

fn tie_stats_rows(table: &mut Table, label: &str, s: &TieStats) {
    table.row(vec![
        label.to_owned(),
        s.tie_count.to_string(),
        format!("{:.2}", s.avg_ties_per_bug),
        s.critical_tie_count.to_string(),
        pct(s.critical_tie_count, s.bugs),
        s.min_neq_mid_count.to_string(),
        format!("{:.1}", s.rank_diff_sum),
        opt(s.avg_diff, 2),
    ]);
}

fn top_n_section(out: &mut String, t: &TopNTable, bugs: usize) {
    let mut table = Table::new(&["", "before", "%", "after", "%", "change"]);
    for (i, label) in TopNTable::LABELS.iter().enumerate() {
        table.row(vec![
            label.to_string(),
            t.before[i].to_string(),
            pct(t.before[i], bugs),
            t.after[i].to_string(),
            pct(t.after[i], bugs),
            format!("{:+}", t.after[i] as i64 - t.before[i] as i64),
        ]);
    }
    table.render(out);
    out.push('\n');

    let mut table = Table::new(&["interval", "before", "after", "improved into", "worsened into"]);
    for r in &t.intervals {
        table.row(vec![
            r.interval.label().to_owned(),
            r.before.to_string(),
            r.after.to_string(),
            r.improved_into.to_string(),
            r.worsened_into.to_string(),
        ]);
    }
    table.render(out);
    let _ = writeln!(out, "interval moves: {} improved, {} worsened", t.improved, t.worsened);
}

/// The full evaluation report as aligned text tables.
pub fn eval_report(report: &EvalReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "formula: {}  bugs: {}\n", report.formula, report.bugs);

    out.push_str("Tie statistics\n");
    let mut table = Table::new(&[
        "",
        "ties",
        "ties/bug",
        "critical",
        "% bugs",
        "MIN!=MID",
        "sum(MID-MIN)",
        "avg(MID-MIN)",
    ]);
    tie_stats_rows(&mut table, "before", &report.before);
    tie_stats_rows(&mut table, "after", &report.after);
    table.render(&mut out);
    out.push('\n');

    let r = &report.tie_reduction;
    let _ = writeln!(
        out,
        "Tie-Reduction over {} critical ties: mean {}%  median {}%  Q1 {}%\n",
        r.count,
        opt(r.mean, 1),
        opt(r.median, 1),
        opt(r.q1, 1)
    );

    let _ = writeln!(
        out,
        "Average rank: before {}  after {}  diff {}\n",
        opt(report.avg_rank_before, 2),
        opt(report.avg_rank_after, 2),
        opt(report.avg_rank_diff, 2)
    );

    out.push_str("Rank movement\n");
    let mut table = Table::new(&["category", "bugs", "avg diff"]);
    for row in &report.categories.rows {
        table.row(vec![row.category.to_string(), row.count.to_string(), opt(row.avg_diff, 2)]);
    }
    let c = &report.categories;
    table.row(vec!["improve".into(), c.improve.to_string(), opt(c.improve_avg_diff, 2)]);
    table.row(vec!["deteriorate".into(), c.deteriorate.to_string(), opt(c.deteriorate_avg_diff, 2)]);
    table.render(&mut out);
    out.push('\n');

    out.push_str("Top-N\n");
    top_n_section(&mut out, &report.top_n, report.bugs);
    out
}
