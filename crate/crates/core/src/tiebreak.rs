//! Call-frequency tie-breaking.
//!
//! `phi(m)` sums, over the failing tests, the number of distinct call stacks
//! that contain `m`. Inside every tie group, methods with a higher `phi` move
//! up. Methods that share both score and `phi` stay tied in a smaller group.

use indexmap::IndexMap;
use serde::Serialize;

use crate::callstack::FrequencyMatrix;
use crate::formulas::Score;
use crate::ranking::Ranking;
use crate::{Error, MethodId, Result, TestCase};

pub type Phi = IndexMap<MethodId, u64>;

/// Sums each method's frequency row over the failing tests.
pub fn compute_phi(freq: &FrequencyMatrix, tests: &[TestCase]) -> Result<Phi> {
    if !tests.iter().any(TestCase::failed) {
        return Err(Error::NoFailingTest);
    }
    let failed_columns = freq
        .tests
        .iter()
        .enumerate()
        .filter_map(|(col, id)| match tests.iter().find(|t| &t.id == id) {
            Some(t) if t.failed() => Some(Ok(col)),
            Some(_) => None,
            None => Some(Err(Error::unknown("test", id.as_str()))),
        })
        .collect::<Result<Vec<usize>>>()?;

    Ok(freq
        .methods
        .iter()
        .zip(&freq.counts)
        .map(|(m, row)| (m.clone(), failed_columns.iter().map(|&c| row[c] as u64).sum()))
        .collect())
}

/// A ranking after tie-breaking, with the pre-break group of every method.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrokenRanking {
    pub ranking: Ranking,
    /// Group index in the original ranking, by input position.
    #[serde(skip)]
    pub origin: Vec<usize>,
}

impl BrokenRanking {
    /// The unchanged ranking, for pipelines that skip tie-breaking.
    pub fn identity(ranking: &Ranking) -> Self {
        BrokenRanking { ranking: ranking.clone(), origin: ranking.group_of.clone() }
    }
}

/// Reorders every tie group by descending `phi`.
pub fn break_ties(ranking: &Ranking, phi: &Phi) -> Result<BrokenRanking> {
    let methods: Vec<MethodId> = ranking.methods().cloned().collect();
    let values = methods
        .iter()
        .map(|m| phi.get(m).copied().ok_or_else(|| Error::unknown("phi entry for method", m.as_str())))
        .collect::<Result<Vec<u64>>>()?;

    let mut blocks: Vec<(Score, Option<u64>, Vec<usize>)> = Vec::with_capacity(ranking.groups.len());
    for group in &ranking.groups {
        let mut members = group.indices.clone();
        members.sort_by(|&a, &b| values[b].cmp(&values[a]).then(a.cmp(&b)));
        let mut sub: Vec<(Score, Option<u64>, Vec<usize>)> = Vec::new();
        for i in members {
            match sub.last_mut() {
                Some((_, Some(p), block)) if *p == values[i] => block.push(i),
                _ => sub.push((group.score, Some(values[i]), vec![i])),
            }
        }
        blocks.extend(sub);
    }

    Ok(BrokenRanking {
        ranking: Ranking::from_blocks(&methods, blocks),
        origin: ranking.group_of.clone(),
    })
}
