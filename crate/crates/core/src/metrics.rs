//! Evaluation battery: tie statistics, Tie-Reduction, rank movement
//! categories and Top-N tables.

use std::fmt;

use serde::Serialize;

use crate::formulas::Formula;
use crate::pipeline::{run_subject, PipelineOptions, Subject};
use crate::ranking::{MethodRank, Rank, Ranking};
use crate::tiebreak::BrokenRanking;
use crate::{Error, MethodId, Result};

/// Share of the superfluous members of a critical tie that were removed, in
/// percent: `(1 - (after - 1) / (before - 1)) * 100`.
pub fn tie_reduction(size_before: u64, size_after: u64) -> Result<f64> {
    if size_before < 2 {
        return Err(Error::UndefinedMetric(format!("tie reduction needs a tie, got size {size_before}")));
    }
    if size_after == 0 || size_after > size_before {
        return Err(Error::UndefinedMetric(format!(
            "size after ({size_after}) must lie in 1..={size_before}"
        )));
    }
    Ok((1.0 - (size_after - 1) as f64 / (size_before - 1) as f64) * 100.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveCategory {
    Best,
    Better,
    Same,
    Worse,
    Worst,
}

impl MoveCategory {
    pub const ALL: [MoveCategory; 5] =
        [MoveCategory::Best, MoveCategory::Better, MoveCategory::Same, MoveCategory::Worse, MoveCategory::Worst];

    pub fn name(self) -> &'static str {
        match self {
            MoveCategory::Best => "best",
            MoveCategory::Better => "better",
            MoveCategory::Same => "same",
            MoveCategory::Worse => "worse",
            MoveCategory::Worst => "worst",
        }
    }
}

impl fmt::Display for MoveCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the fault's MID rank landed relative to its original tie.
///
/// An unchanged MID rank is `Same` even when the tie is a singleton (where it
/// also equals MIN and MAX); the other equalities take precedence over the
/// strict comparisons.
pub fn classify_move(before: MethodRank, after_mid: Rank) -> Result<MoveCategory> {
    if after_mid < before.min || after_mid > before.max {
        return Err(Error::LocalityViolation {
            min: before.min.to_string(),
            max: before.max.to_string(),
            after: after_mid.to_string(),
        });
    }
    let category = if after_mid == before.mid {
        MoveCategory::Same
    } else if after_mid == before.min {
        MoveCategory::Best
    } else if after_mid == before.max {
        MoveCategory::Worst
    } else if after_mid < before.mid {
        MoveCategory::Better
    } else {
        MoveCategory::Worse
    };
    Ok(category)
}

/// Non-accumulating Top-N buckets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TopInterval {
    #[serde(rename = "[1]")]
    First,
    #[serde(rename = "(1,3]")]
    UpTo3,
    #[serde(rename = "(3,5]")]
    UpTo5,
    #[serde(rename = "(5,10]")]
    UpTo10,
    #[serde(rename = "other")]
    Other,
}

impl TopInterval {
    pub const ALL: [TopInterval; 5] =
        [TopInterval::First, TopInterval::UpTo3, TopInterval::UpTo5, TopInterval::UpTo10, TopInterval::Other];

    pub fn label(self) -> &'static str {
        match self {
            TopInterval::First => "[1]",
            TopInterval::UpTo3 => "(1,3]",
            TopInterval::UpTo5 => "(3,5]",
            TopInterval::UpTo10 => "(5,10]",
            TopInterval::Other => "other",
        }
    }
}

/// Cumulative Top-N memberships of one rank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TopN {
    pub top1: bool,
    pub top3: bool,
    pub top5: bool,
    pub top10: bool,
    pub other: bool,
    pub interval: TopInterval,
}

impl TopN {
    fn cumulative(&self) -> [bool; 5] {
        [self.top1, self.top3, self.top5, self.top10, self.other]
    }
}

/// Half ranks compare numerically, so 3.5 is outside Top-3.
pub fn top_n(rank: Rank) -> TopN {
    let h = rank.halves();
    let within = |n: u64| h <= 2 * n;
    let interval = if within(1) {
        TopInterval::First
    } else if within(3) {
        TopInterval::UpTo3
    } else if within(5) {
        TopInterval::UpTo5
    } else if within(10) {
        TopInterval::UpTo10
    } else {
        TopInterval::Other
    };
    TopN { top1: within(1), top3: within(3), top5: within(5), top10: within(10), other: !within(10), interval }
}

/// Per-bug comparison of the fault's position before and after tie-breaking.
///
/// With several faults the best-placed one is used throughout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BugOutcome {
    pub subject: String,
    pub fault_before: MethodId,
    pub before: MethodRank,
    pub critical_before: bool,
    pub size_before: u64,
    pub fault_after: MethodId,
    pub after: MethodRank,
    pub critical_after: bool,
    pub size_after: u64,
    /// Only defined for bugs whose fault sat in a critical tie.
    pub tie_reduction: Option<f64>,
    pub category: MoveCategory,
    pub ties_before: usize,
    pub ties_after: usize,
}

impl BugOutcome {
    pub fn rank_diff(&self) -> f64 {
        self.after.mid.value() - self.before.mid.value()
    }

    /// Compares the fault positions in two rankings. `faults` are input
    /// positions of the faulty methods.
    pub fn compare(subject: &str, before: &Ranking, after: &BrokenRanking, faults: &[usize]) -> Result<Self> {
        if faults.is_empty() {
            return Err(Error::EmptyInput("fault set is empty"));
        }
        let is_fault = |i: &usize| faults.contains(i);
        let critical = |r: &Ranking, i: usize| r.group_of_index(i).indices.iter().any(|m| !is_fault(m));

        let best_before = *faults
            .iter()
            .min_by_key(|&&i| (before.group_of_index(i).start, i))
            .expect("non-empty");
        let best_after = *faults
            .iter()
            .min_by_key(|&&i| (after.ranking.rank_of_index(i).mid, i))
            .expect("non-empty");

        let b = before.rank_of_index(best_before);
        let a = after.ranking.rank_of_index(best_after);
        let critical_before = critical(before, best_before);
        let size_before = before.group_of_index(best_before).size;
        let size_after = after.ranking.group_of_index(best_after).size;
        let tie_reduction = if critical_before {
            Some(tie_reduction(size_before, size_after)?)
        } else {
            None
        };
        let id = |i: usize| before.ranks.get_index(i).expect("index in range").0.clone();

        Ok(BugOutcome {
            subject: subject.to_owned(),
            fault_before: id(best_before),
            before: b,
            critical_before,
            size_before,
            fault_after: id(best_after),
            after: a,
            critical_after: critical(&after.ranking, best_after),
            size_after,
            tie_reduction,
            category: classify_move(b, a.mid)?,
            ties_before: before.tie_count(),
            ties_after: after.ranking.tie_count(),
        })
    }
}

/// Tie statistics for one side (before or after) of a batch of bugs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TieStats {
    pub bugs: usize,
    /// Groups of size two or more, summed over subjects.
    pub tie_count: usize,
    pub avg_ties_per_bug: f64,
    pub critical_tie_count: usize,
    pub critical_tie_sizes: Vec<u64>,
    pub min_neq_mid_count: usize,
    /// Sum of MID - MIN over the critical-tie bugs.
    pub rank_diff_sum: f64,
    pub avg_diff: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Before,
    After,
}

impl TieStats {
    pub fn collect(outcomes: &[BugOutcome], side: Side) -> Self {
        let mut stats = TieStats {
            bugs: outcomes.len(),
            tie_count: 0,
            avg_ties_per_bug: 0.0,
            critical_tie_count: 0,
            critical_tie_sizes: Vec::new(),
            min_neq_mid_count: 0,
            rank_diff_sum: 0.0,
            avg_diff: None,
        };
        for o in outcomes {
            let (ties, critical, size, rank) = match side {
                Side::Before => (o.ties_before, o.critical_before, o.size_before, o.before),
                Side::After => (o.ties_after, o.critical_after, o.size_after, o.after),
            };
            stats.tie_count += ties;
            if critical {
                stats.critical_tie_count += 1;
                stats.critical_tie_sizes.push(size);
                if rank.min != rank.mid {
                    stats.min_neq_mid_count += 1;
                }
                stats.rank_diff_sum += rank.mid.value() - rank.min.value();
            }
        }
        if !outcomes.is_empty() {
            stats.avg_ties_per_bug = stats.tie_count as f64 / outcomes.len() as f64;
        }
        if stats.critical_tie_count > 0 {
            stats.avg_diff = Some(stats.rank_diff_sum / stats.critical_tie_count as f64);
        }
        stats
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Median of the values below the median position.
    pub q1: Option<f64>,
}

fn median_of_sorted(v: &[f64]) -> Option<f64> {
    match v.len() {
        0 => None,
        n if n % 2 == 1 => Some(v[n / 2]),
        n => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    }
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let q1 = if n == 1 { median_of_sorted(&sorted) } else { median_of_sorted(&sorted[..n / 2]) };
        Summary {
            count: n,
            mean: (n > 0).then(|| sorted.iter().sum::<f64>() / n as f64),
            median: median_of_sorted(&sorted),
            q1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryRow {
    pub category: MoveCategory,
    pub count: usize,
    /// Mean of `A_mid - B_mid` over the bugs in the category.
    pub avg_diff: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryTable {
    pub rows: Vec<CategoryRow>,
    pub improve: usize,
    pub improve_avg_diff: Option<f64>,
    pub deteriorate: usize,
    pub deteriorate_avg_diff: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl CategoryTable {
    pub fn collect(outcomes: &[BugOutcome]) -> Self {
        fn diffs_in<'a>(
            outcomes: &'a [BugOutcome],
            cats: &'a [MoveCategory],
        ) -> impl Iterator<Item = f64> + 'a {
            outcomes.iter().filter(move |o| cats.contains(&o.category)).map(BugOutcome::rank_diff)
        }
        let rows = MoveCategory::ALL
            .iter()
            .map(|&c| CategoryRow {
                category: c,
                count: outcomes.iter().filter(|o| o.category == c).count(),
                avg_diff: mean(diffs_in(outcomes, &[c])),
            })
            .collect();
        let up = [MoveCategory::Best, MoveCategory::Better];
        let down = [MoveCategory::Worse, MoveCategory::Worst];
        CategoryTable {
            rows,
            improve: diffs_in(outcomes, &up).count(),
            improve_avg_diff: mean(diffs_in(outcomes, &up)),
            deteriorate: diffs_in(outcomes, &down).count(),
            deteriorate_avg_diff: mean(diffs_in(outcomes, &down)),
        }
    }

    pub fn count(&self, category: MoveCategory) -> usize {
        self.rows.iter().find(|r| r.category == category).map_or(0, |r| r.count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalRow {
    pub interval: TopInterval,
    pub before: usize,
    pub after: usize,
    /// Bugs that entered this interval from a worse one.
    pub improved_into: usize,
    /// Bugs that entered this interval from a better one.
    pub worsened_into: usize,
}

/// Top-N counts before and after tie-breaking.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopNTable {
    /// Cumulative counts in the order Top-1, Top-3, Top-5, Top-10, Other.
    pub before: [usize; 5],
    pub after: [usize; 5],
    pub intervals: Vec<IntervalRow>,
    /// `moves[i][j]`: bugs that went from interval `i` to interval `j`.
    pub moves: [[usize; 5]; 5],
    pub improved: usize,
    pub worsened: usize,
}

impl TopNTable {
    pub const LABELS: [&'static str; 5] = ["Top-1", "Top-3", "Top-5", "Top-10", "Other"];

    pub fn collect(outcomes: &[BugOutcome]) -> Self {
        let mut before = [0; 5];
        let mut after = [0; 5];
        let mut moves = [[0; 5]; 5];
        for o in outcomes {
            let b = top_n(o.before.mid);
            let a = top_n(o.after.mid);
            for (slot, hit) in before.iter_mut().zip(b.cumulative()) {
                *slot += hit as usize;
            }
            for (slot, hit) in after.iter_mut().zip(a.cumulative()) {
                *slot += hit as usize;
            }
            moves[b.interval as usize][a.interval as usize] += 1;
        }
        let intervals = TopInterval::ALL
            .iter()
            .enumerate()
            .map(|(j, &interval)| IntervalRow {
                interval,
                before: moves[j].iter().sum(),
                after: moves.iter().map(|row| row[j]).sum(),
                improved_into: (j + 1..5).map(|i| moves[i][j]).sum(),
                worsened_into: (0..j).map(|i| moves[i][j]).sum(),
            })
            .collect::<Vec<_>>();
        let improved = intervals.iter().map(|r| r.improved_into).sum();
        let worsened = intervals.iter().map(|r| r.worsened_into).sum();
        TopNTable { before, after, intervals, moves, improved, worsened }
    }
}

/// Aggregated before/after comparison over a batch of bugs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub formula: String,
    pub bugs: usize,
    pub before: TieStats,
    pub after: TieStats,
    pub tie_reduction: Summary,
    pub avg_rank_before: Option<f64>,
    pub avg_rank_after: Option<f64>,
    /// Mean of `A_mid - B_mid`; negative means faults moved up.
    pub avg_rank_diff: Option<f64>,
    pub categories: CategoryTable,
    pub top_n: TopNTable,
    pub per_bug: Vec<BugOutcome>,
}

impl EvalReport {
    pub fn from_outcomes(formula: Formula, outcomes: Vec<BugOutcome>) -> Self {
        let reductions: Vec<f64> = outcomes.iter().filter_map(|o| o.tie_reduction).collect();
        EvalReport {
            formula: formula.to_string(),
            bugs: outcomes.len(),
            before: TieStats::collect(&outcomes, Side::Before),
            after: TieStats::collect(&outcomes, Side::After),
            tie_reduction: Summary::of(&reductions),
            avg_rank_before: mean(outcomes.iter().map(|o| o.before.mid.value())),
            avg_rank_after: mean(outcomes.iter().map(|o| o.after.mid.value())),
            avg_rank_diff: mean(outcomes.iter().map(BugOutcome::rank_diff)),
            categories: CategoryTable::collect(&outcomes),
            top_n: TopNTable::collect(&outcomes),
            per_bug: outcomes,
        }
    }
}

/// Runs the two-stage pipeline on every subject and aggregates the results.
pub fn evaluate(subjects: &[Subject], formula: Formula, options: &PipelineOptions) -> Result<EvalReport> {
    let outcomes = subjects
        .iter()
        .map(|s| run_subject(s, formula, options)?.outcome())
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_outcomes(formula, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(halves: u64) -> Rank {
        Rank::from_halves(halves)
    }

    fn b(min: u64, mid: u64, max: u64) -> MethodRank {
        MethodRank { min: r(min), mid: r(mid), max: r(max) }
    }

    #[test]
    fn tie_reduction_values() {
        assert_eq!(tie_reduction(4, 1).unwrap(), 100.0);
        for k in 2..20 {
            assert_eq!(tie_reduction(k, k).unwrap(), 0.0);
        }
        assert_eq!(tie_reduction(5, 3).unwrap(), 50.0);
        assert!(matches!(tie_reduction(1, 1), Err(Error::UndefinedMetric(_))));
        assert!(tie_reduction(3, 4).is_err());
        assert!(tie_reduction(3, 0).is_err());
    }

    #[test]
    fn move_categories() {
        // ranks given in halves
        assert_eq!(classify_move(b(2, 5, 8), r(2)).unwrap(), MoveCategory::Best);
        assert_eq!(classify_move(b(4, 4, 4), r(4)).unwrap(), MoveCategory::Same);
        assert_eq!(classify_move(b(2, 6, 10), r(4)).unwrap(), MoveCategory::Better);
        assert_eq!(classify_move(b(2, 6, 10), r(10)).unwrap(), MoveCategory::Worst);
        assert_eq!(classify_move(b(2, 6, 10), r(8)).unwrap(), MoveCategory::Worse);
        assert_eq!(classify_move(b(2, 6, 10), r(6)).unwrap(), MoveCategory::Same);
        assert!(matches!(classify_move(b(2, 6, 10), r(12)), Err(Error::LocalityViolation { .. })));
        assert!(classify_move(b(4, 6, 8), r(2)).is_err());
    }

    #[test]
    fn top_n_buckets() {
        let t = top_n(r(5));
        assert!(!t.top1 && t.top3 && t.top5 && t.top10 && !t.other);
        assert_eq!(t.interval, TopInterval::UpTo3);

        let t = top_n(r(2));
        assert!(t.top1 && t.top3 && t.top5 && t.top10);
        assert_eq!(t.interval, TopInterval::First);

        let t = top_n(r(21));
        assert!(t.other && !t.top10);
        assert_eq!(t.interval, TopInterval::Other);

        assert_eq!(top_n(r(7)).interval, TopInterval::UpTo5);
        assert!(!top_n(r(7)).top3);
        assert_eq!(top_n(r(20)).interval, TopInterval::UpTo10);
    }

    #[test]
    fn summary_quartiles() {
        let s = Summary::of(&[100.0, 0.0, 50.0, 100.0, 100.0]);
        assert_eq!(s.count, 5);
        assert_eq!(s.mean, Some(70.0));
        assert_eq!(s.median, Some(100.0));
        assert_eq!(s.q1, Some(25.0));
        assert_eq!(Summary::of(&[]).mean, None);
        assert_eq!(Summary::of(&[40.0]).q1, Some(40.0));
        assert_eq!(Summary::of(&[10.0, 20.0, 30.0, 40.0]).median, Some(25.0));
    }
}
