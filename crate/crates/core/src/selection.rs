//! Ranking candidate transfer sources for a target language.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::csv_field;
use crate::matrix::{DistanceMatrix, MatrixKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AscendingDistance,
    DescendingSimilarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub source: String,
    pub value: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excluded {
    pub code: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub target: String,
    pub metric_provenance: String,
    pub direction: Direction,
    pub entries: Vec<RankedEntry>,
    pub excluded: Vec<Excluded>,
    /// Decimal places of the source matrix, used by the CSV rendering.
    #[serde(skip)]
    pub precision: Option<usize>,
}

impl RankedList {
    pub fn best(&self) -> &RankedEntry {
        &self.entries[0]
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("rank,source,value,status\n");
        for e in &self.entries {
            let value = match self.precision {
                Some(p) => format!("{:.p$}", e.value),
                None => e.value.to_string(),
            };
            out.push_str(&format!(
                "{},{},{value},ranked\n",
                e.rank,
                csv_field(&e.source)
            ));
        }
        for x in &self.excluded {
            out.push_str(&format!(",{},NA,{}\n", csv_field(&x.code), x.reason));
        }
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("ranked list serializes") + "\n"
    }
}

/// Orders `candidates` by their value in `m` as transfer sources into
/// `target`, best first. Cells are read as row = source, column = target.
/// Ties go to the lexicographically smaller code, each entry keeping its own
/// rank. The target is dropped from the candidates; sources with a missing
/// cell are reported in `excluded`.
pub fn rank_sources(m: &DistanceMatrix, target: &str, candidates: &[&str]) -> Result<RankedList> {
    let t = m
        .index_of(target)
        .ok_or_else(|| Error::unknown_language(target))?;
    let mut seen = BTreeSet::new();
    let mut scored = Vec::new();
    let mut excluded = Vec::new();
    for &c in candidates {
        if !seen.insert(c) {
            return Err(Error::DuplicateCandidate {
                code: c.to_string(),
            });
        }
        let s = m.index_of(c).ok_or_else(|| Error::unknown_language(c))?;
        if c == target {
            continue;
        }
        match m.get(s, t) {
            Some(v) => scored.push((c.to_string(), v)),
            None => excluded.push(Excluded {
                code: c.to_string(),
                reason: "missing-cell".to_string(),
            }),
        }
    }
    if scored.is_empty() {
        return Err(Error::EmptyCandidates {
            target: target.to_string(),
        });
    }
    let direction = match m.kind() {
        MatrixKind::Distance => Direction::AscendingDistance,
        MatrixKind::Similarity => Direction::DescendingSimilarity,
    };
    scored.sort_by(|a, b| {
        let by_value = match direction {
            Direction::AscendingDistance => a.1.total_cmp(&b.1),
            Direction::DescendingSimilarity => b.1.total_cmp(&a.1),
        };
        match by_value {
            Ordering::Equal => a.0.cmp(&b.0),
            other => other,
        }
    });
    excluded.sort_by(|a, b| a.code.cmp(&b.code));
    Ok(RankedList {
        target: target.to_string(),
        metric_provenance: m.provenance().to_string(),
        direction,
        entries: scored
            .into_iter()
            .enumerate()
            .map(|(i, (source, value))| RankedEntry {
                source,
                value,
                rank: i + 1,
            })
            .collect(),
        excluded,
        precision: m.precision(),
    })
}

/// The rank-1 source and its value.
pub fn best_source(m: &DistanceMatrix, target: &str, candidates: &[&str]) -> Result<(String, f64)> {
    let ranked = rank_sources(m, target, candidates)?;
    let best = ranked.best();
    Ok((best.source.clone(), best.value))
}
