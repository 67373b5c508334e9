//! Rank lists with explicit tie groups and MIN/MID/MAX rank values.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};

use crate::formulas::Score;
use crate::{Error, FaultSet, MethodId, Result};

/// A 1-based rank position, exact to halves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(u64);

impl Rank {
    pub fn from_position(position: u64) -> Self {
        Rank(position * 2)
    }

    pub fn from_halves(halves: u64) -> Self {
        Rank(halves)
    }

    /// Twice the rank value; always an integer.
    pub fn halves(self) -> u64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.0 / 2, if self.0 % 2 == 1 { 5 } else { 0 })
    }
}

impl Serialize for Rank {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.value())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    Min,
    #[default]
    Mid,
    Max,
}

impl FromStr for RankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "min" => Ok(RankMode::Min),
            "mid" => Ok(RankMode::Mid),
            "max" => Ok(RankMode::Max),
            other => Err(Error::unknown("rank mode", other)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MethodRank {
    pub min: Rank,
    pub mid: Rank,
    pub max: Rank,
}

impl MethodRank {
    pub fn get(&self, mode: RankMode) -> Rank {
        match mode {
            RankMode::Min => self.min,
            RankMode::Mid => self.mid,
            RankMode::Max => self.max,
        }
    }
}

/// Methods sharing one position block. Size 1 groups are kept so that every
/// method belongs to exactly one group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TieGroup {
    pub members: Vec<MethodId>,
    /// Input positions of `members`, ascending.
    #[serde(skip)]
    pub indices: Vec<usize>,
    pub score: Score,
    /// Secondary key once ties have been broken by call frequency.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<u64>,
    pub start: u64,
    pub size: u64,
}

impl TieGroup {
    pub fn is_tie(&self) -> bool {
        self.size >= 2
    }

    pub fn rank(&self) -> MethodRank {
        let start = self.start * 2;
        MethodRank {
            min: Rank(start),
            mid: Rank(start + self.size - 1),
            max: Rank(start + 2 * (self.size - 1)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ranking {
    pub groups: Vec<TieGroup>,
    /// Per-method ranks in input order.
    pub ranks: IndexMap<MethodId, MethodRank>,
    /// Group index of every method, by input position.
    #[serde(skip)]
    pub group_of: Vec<usize>,
}

impl Ranking {
    /// Lays out already-ordered groups (given as input positions) and
    /// assigns start positions and ranks.
    pub(crate) fn from_blocks(methods: &[MethodId], blocks: Vec<(Score, Option<u64>, Vec<usize>)>) -> Self {
        let mut group_of = vec![usize::MAX; methods.len()];
        let mut groups = Vec::with_capacity(blocks.len());
        let mut start = 1u64;
        for (g, (score, phi, indices)) in blocks.into_iter().enumerate() {
            debug_assert!(!indices.is_empty());
            for &i in &indices {
                group_of[i] = g;
            }
            let size = indices.len() as u64;
            groups.push(TieGroup {
                members: indices.iter().map(|&i| methods[i].clone()).collect(),
                indices,
                score,
                phi,
                start,
                size,
            });
            start += size;
        }
        let ranks = methods
            .iter()
            .zip(&group_of)
            .map(|(m, &g)| (m.clone(), groups[g].rank()))
            .collect();
        Ranking { groups, ranks, group_of }
    }

    pub fn len(&self) -> usize {
        self.group_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group_of.is_empty()
    }

    pub fn methods(&self) -> impl Iterator<Item = &MethodId> {
        self.ranks.keys()
    }

    pub fn group_of_index(&self, index: usize) -> &TieGroup {
        &self.groups[self.group_of[index]]
    }

    pub fn rank_of_index(&self, index: usize) -> MethodRank {
        self.ranks[index]
    }

    /// Number of groups holding two or more methods.
    pub fn tie_count(&self) -> usize {
        self.groups.iter().filter(|g| g.is_tie()).count()
    }
}

/// Sorts methods by descending score; equal scores form one group whose
/// members keep input order.
pub fn build_ranking(scores: &IndexMap<MethodId, Score>) -> Result<Ranking> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("no scores to rank"));
    }
    let values: Vec<Score> = scores.values().copied().collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].cmp(&values[a]).then(a.cmp(&b)));

    let mut blocks: Vec<(Score, Option<u64>, Vec<usize>)> = Vec::new();
    for i in order {
        match blocks.last_mut() {
            Some((s, _, members)) if *s == values[i] => members.push(i),
            _ => blocks.push((values[i], None, vec![i])),
        }
    }
    let methods: Vec<MethodId> = scores.keys().cloned().collect();
    Ok(Ranking::from_blocks(&methods, blocks))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaultTie {
    pub fault: MethodId,
    /// Index into `Ranking::groups`.
    pub group: usize,
    pub size_before: u64,
    pub is_critical: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriticalTieReport {
    pub faults: Vec<FaultTie>,
}

impl CriticalTieReport {
    pub fn any_critical(&self) -> bool {
        self.faults.iter().any(|f| f.is_critical)
    }
}

pub(crate) fn resolve_faults(ranking: &Ranking, faults: &FaultSet) -> Result<Vec<usize>> {
    let methods: Vec<MethodId> = ranking.methods().cloned().collect();
    faults.resolve(&methods)
}

/// Whether the group of every fault also holds a non-faulty method.
pub fn classify_ties(ranking: &Ranking, faults: &FaultSet) -> Result<CriticalTieReport> {
    let fault_indices = resolve_faults(ranking, faults)?;
    let faults = fault_indices
        .iter()
        .map(|&i| {
            let group = ranking.group_of[i];
            let members = &ranking.groups[group].indices;
            let is_critical = members.iter().any(|m| fault_indices.binary_search(m).is_err());
            FaultTie {
                fault: ranking.ranks.get_index(i).unwrap().0.clone(),
                group,
                size_before: members.len() as u64,
                is_critical,
            }
        })
        .collect();
    Ok(CriticalTieReport { faults })
}

/// Best (smallest) rank over all faulty methods.
pub fn fault_rank(ranking: &Ranking, faults: &FaultSet, mode: RankMode) -> Result<Rank> {
    let fault_indices = resolve_faults(ranking, faults)?;
    Ok(fault_indices
        .into_iter()
        .map(|i| ranking.ranks[i].get(mode))
        .min()
        .expect("fault set is non-empty"))
}
