//! Pairs transfer-score matrices with language similarity matrices and runs
//! the correlation study and the reference-source z-test over them.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::csv_field;
use crate::matrix::{DistanceMatrix, MatrixKind};
use crate::stats::{
    format3, paired_z_test, pearson, spearman, CorrelationResult, PairLabel, PairedSample,
    ZTestResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Sentiment,
    Ner,
    Dep,
}

impl Task {
    /// Score reported for the task: LAS for parsing, macro-F1 otherwise.
    pub fn metric(self) -> ScoreMetric {
        match self {
            Task::Dep => ScoreMetric::Las,
            Task::Sentiment | Task::Ner => ScoreMetric::MacroF1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Mbert,
    Xlmr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMetric {
    MacroF1,
    Las,
}

macro_rules! str_enum {
    ($ty:ty { $($variant:path => $name:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(format!("unknown {} `{other}`", stringify!($ty).to_lowercase())),
                }
            }
        }
    };
}

str_enum!(Task { Task::Sentiment => "sentiment", Task::Ner => "ner", Task::Dep => "dep" });
str_enum!(Model { Model::Mbert => "mbert", Model::Xlmr => "xlmr" });
str_enum!(ScoreMetric { ScoreMetric::MacroF1 => "macro-f1", ScoreMetric::Las => "las" });

/// Transfer scores, rows = source language, columns = target language.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix {
    pub task: Task,
    pub model: Model,
    pub metric: ScoreMetric,
    matrix: DistanceMatrix,
}

impl ScoreMatrix {
    pub fn load(path: &Path) -> Result<Self> {
        let m = DistanceMatrix::load(path, None, false)?;
        Self::from_matrix(m, &path.display().to_string())
    }

    /// Validates a parsed matrix carrying `task=` and `model=` header keys
    /// (and optionally `metric=`, which must match the task).
    pub fn from_matrix(matrix: DistanceMatrix, origin: &str) -> Result<Self> {
        let meta = |key: &str| -> Result<&str> {
            matrix.meta(key).ok_or_else(|| Error::MissingMetadata {
                at: origin.to_string(),
                key: key.to_string(),
            })
        };
        let bad = |message: String| Error::InvalidMatrix {
            at: origin.to_string(),
            message,
        };
        let task: Task = meta("task")?.parse().map_err(bad)?;
        let model: Model = meta("model")?.parse().map_err(bad)?;
        if let Some(m) = matrix.meta("metric") {
            let declared: ScoreMetric = m.parse().map_err(bad)?;
            if declared != task.metric() {
                return Err(bad(format!(
                    "task {task} is scored with {}, file declares {declared}",
                    task.metric()
                )));
            }
        }
        if matrix.kind() != MatrixKind::Similarity {
            return Err(bad("score matrices must declare kind=similarity".into()));
        }
        let n = matrix.len();
        for i in 0..n {
            for j in 0..n {
                let at = format!(
                    "{origin}: ({}, {})",
                    matrix.languages()[i],
                    matrix.languages()[j]
                );
                match matrix.get(i, j) {
                    None => return Err(bad(format!("missing score at {at}"))),
                    Some(v) if !(0.0..=1.0).contains(&v) => {
                        return Err(Error::OutOfRangeScore { at, value: v })
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(ScoreMatrix {
            task,
            model,
            metric: task.metric(),
            matrix,
        })
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.matrix
    }

    pub fn languages(&self) -> &[String] {
        self.matrix.languages()
    }

    pub fn score(&self, source: &str, target: &str) -> Result<f64> {
        Ok(self
            .matrix
            .lookup(source, target)?
            .expect("score matrices are complete"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DiagonalMode {
    /// Every source/target cell, including monolingual anchors.
    #[serde(rename = "full")]
    Include,
    /// Cross-lingual cells only.
    #[serde(rename = "zero-shot")]
    Exclude,
}

impl DiagonalMode {
    pub fn includes_diagonal(self) -> bool {
        self == DiagonalMode::Include
    }
}

str_enum!(DiagonalMode { DiagonalMode::Include => "full", DiagonalMode::Exclude => "zero-shot" });

fn same_language_set(a: &[String], b: &[String]) -> Result<()> {
    let sa: BTreeSet<&String> = a.iter().collect();
    let sb: BTreeSet<&String> = b.iter().collect();
    if sa != sb || a.len() != b.len() {
        return Err(Error::LanguageSetMismatch {
            left: a.to_vec(),
            right: b.to_vec(),
        });
    }
    Ok(())
}

/// Pairs every score cell with the similarity of the same (source, target)
/// cell. Cells with a missing similarity are dropped; the second value is
/// how many were dropped that way.
pub fn build_pairs_counted(
    scores: &ScoreMatrix,
    sim: &DistanceMatrix,
    include_diagonal: bool,
) -> Result<(PairedSample, usize)> {
    same_language_set(scores.languages(), sim.languages())?;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut missing = 0;
    for source in scores.languages() {
        for target in scores.languages() {
            if !include_diagonal && source == target {
                continue;
            }
            let Some(x) = sim.lookup(source, target)? else {
                missing += 1;
                continue;
            };
            points.push((x, scores.score(source, target)?));
            labels.push(PairLabel {
                source: source.clone(),
                target: target.clone(),
                task: scores.task.to_string(),
                model: scores.model.to_string(),
            });
        }
    }
    Ok((PairedSample::new(points, labels)?, missing))
}

pub fn build_pairs(
    scores: &ScoreMatrix,
    sim: &DistanceMatrix,
    include_diagonal: bool,
) -> Result<PairedSample> {
    build_pairs_counted(scores, sim, include_diagonal).map(|(s, _)| s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub task: Task,
    pub model: Model,
    pub metric: String,
    pub mode: DiagonalMode,
    pub pearson: CorrelationResult,
    pub spearman: CorrelationResult,
    pub pairs: usize,
    pub excluded_pairs: usize,
}

impl StudyRow {
    fn sort_key(&self) -> (Task, Model, &str, DiagonalMode) {
        (self.task, self.model, &self.metric, self.mode)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
}

/// One line of the CSV rendering of a [`StudyReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRecord {
    pub task: String,
    pub model: String,
    pub metric: String,
    pub mode: String,
    pub method: String,
    pub rho: f64,
    pub p: f64,
    pub n: usize,
}

pub const REPORT_CSV_HEADER: &str = "task,model,metric,mode,method,rho,p,n";

impl StudyReport {
    /// Finds the row for a (task, model, metric provenance, mode) cell.
    pub fn find(
        &self,
        task: Task,
        model: Model,
        metric: &str,
        mode: DiagonalMode,
    ) -> Option<&StudyRow> {
        self.rows
            .iter()
            .find(|r| r.task == task && r.model == model && r.metric == metric && r.mode == mode)
    }

    pub fn merge(mut self, other: StudyReport) -> StudyReport {
        self.rows.extend(other.rows);
        self.rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        self
    }

    pub fn records(&self) -> Vec<ReportRecord> {
        self.rows
            .iter()
            .flat_map(|r| {
                [r.pearson, r.spearman].map(|c| ReportRecord {
                    task: r.task.to_string(),
                    model: r.model.to_string(),
                    metric: r.metric.clone(),
                    mode: r.mode.to_string(),
                    method: c.method.to_string(),
                    rho: c.rho,
                    p: c.p_value,
                    n: c.n,
                })
            })
            .collect()
    }

    /// CSV with coefficients and p-values at three decimals.
    pub fn to_csv_string(&self) -> String {
        records_to_csv(&self.records())
    }

    /// JSON at full precision; reading it back restores the report exactly.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed {
            at: format!("report json line {}", e.line()),
            message: e.to_string(),
        })
    }
}

pub fn records_to_csv(records: &[ReportRecord]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            csv_field(&r.task),
            csv_field(&r.model),
            csv_field(&r.metric),
            csv_field(&r.mode),
            csv_field(&r.method),
            format3(r.rho),
            format3(r.p),
            r.n
        ));
    }
    out
}

pub fn records_from_csv(text: &str) -> Result<Vec<ReportRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| report_error(0, e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    if header.join(",") != REPORT_CSV_HEADER {
        return Err(report_error(
            1,
            format!("unexpected header `{}`", header.join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| report_error(0, e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let num = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| report_error(line, format!("bad number `{}`", &rec[i])))
        };
        out.push(ReportRecord {
            task: rec[0].to_string(),
            model: rec[1].to_string(),
            metric: rec[2].to_string(),
            mode: rec[3].to_string(),
            method: rec[4].to_string(),
            rho: num(5)?,
            p: num(6)?,
            n: rec[7]
                .parse()
                .map_err(|_| report_error(line, format!("bad count `{}`", &rec[7])))?,
        });
    }
    Ok(out)
}

fn report_error(line: u64, message: String) -> Error {
    Error::Malformed {
        at: format!("report csv line {line}"),
        message,
    }
}

/// Pearson and Spearman for every (score matrix, similarity matrix) pair.
/// Rows are ordered by task, model and similarity provenance.
pub fn correlation_study(
    scores: &[ScoreMatrix],
    sims: &[DistanceMatrix],
    mode: DiagonalMode,
) -> Result<StudyReport> {
    let cells: Vec<(&ScoreMatrix, &DistanceMatrix)> = scores
        .iter()
        .flat_map(|s| sims.iter().map(move |m| (s, m)))
        .collect();
    let mut rows = cells
        .par_iter()
        .map(|&(s, m)| {
            let (sample, excluded) = build_pairs_counted(s, m, mode.includes_diagonal())?;
            Ok(StudyRow {
                task: s.task,
                model: s.model,
                metric: m.provenance().to_string(),
                mode,
                pearson: pearson(&sample)?,
                spearman: spearman(&sample)?,
                pairs: sample.len(),
                excluded_pairs: excluded,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(StudyReport { rows })
}

/// One target cell of the reference-vs-best comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Difference {
    pub task: Task,
    pub model: Model,
    pub target: String,
    pub reference_score: f64,
    pub best_source: String,
    pub best_score: f64,
    pub diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    pub reference: String,
    /// Widest decimal precision among the input score matrices.
    #[serde(skip)]
    pub precision: Option<usize>,
    pub result: ZTestResult,
    pub differences: Vec<Difference>,
}

impl ReferenceComparison {
    pub fn result_json(&self) -> String {
        serde_json::to_string_pretty(&self.result).expect("z-test serializes") + "\n"
    }

    pub fn differences_csv(&self) -> String {
        let mut out = String::from(
            "task,model,target,reference,reference_score,best_source,best_score,diff\n",
        );
        let num = |v: f64| match self.precision {
            Some(p) => format!("{v:.p$}"),
            None => v.to_string(),
        };
        for d in &self.differences {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                d.task,
                d.model,
                csv_field(&d.target),
                csv_field(&self.reference),
                num(d.reference_score),
                csv_field(&d.best_source),
                num(d.best_score),
                num(d.diff)
            ));
        }
        out
    }
}

/// Compares using `reference` as the transfer source against the best
/// available source for each target.
///
/// For every matrix and every target other than the reference,
/// `d = score(reference -> target) - max_{s != target} score(s -> target)`.
/// The maximum ranges over cross-lingual sources only (the reference
/// included, so `d <= 0`) and ties go to the smaller code. The z-test runs
/// over all `d`.
pub fn english_vs_best(scores: &[ScoreMatrix], reference: &str) -> Result<ReferenceComparison> {
    let mut ordered: Vec<&ScoreMatrix> = scores.iter().collect();
    ordered.sort_by_key(|s| (s.task, s.model));
    let mut differences = Vec::new();
    for s in ordered {
        let langs = s.languages();
        if !langs.iter().any(|l| l == reference) {
            return Err(Error::unknown_language(reference));
        }
        for target in langs.iter().filter(|t| *t != reference) {
            let mut best: Option<(&String, f64)> = None;
            for source in langs.iter().filter(|src| *src != target) {
                let v = s.score(source, target)?;
                best = match best {
                    Some((b, bv)) if bv > v || (bv == v && b < source) => Some((b, bv)),
                    _ => Some((source, v)),
                };
            }
            let (best_source, best_score) = best.expect("at least two languages");
            let reference_score = s.score(reference, target)?;
            differences.push(Difference {
                task: s.task,
                model: s.model,
                target: target.clone(),
                reference_score,
                best_source: best_source.clone(),
                best_score,
                diff: reference_score - best_score,
            });
        }
    }
    let diffs: Vec<f64> = differences.iter().map(|d| d.diff).collect();
    let precision = scores
        .iter()
        .map(|s| s.matrix().precision())
        .try_fold(0, |acc, p| p.map(|p| acc.max(p)));
    Ok(ReferenceComparison {
        reference: reference.to_string(),
        precision,
        result: paired_z_test(&diffs)?,
        differences,
    })
}

/// Mean score of each source language across all targets, one column per
/// score matrix (in the given order).
pub fn source_averages(scores: &[ScoreMatrix]) -> Result<Vec<(String, Vec<f64>)>> {
    let Some(first) = scores.first() else {
        return Ok(Vec::new());
    };
    for s in scores {
        same_language_set(first.languages(), s.languages())?;
    }
    first
        .languages()
        .iter()
        .map(|source| {
            let means = scores
                .iter()
                .map(|s| {
                    let row = s
                        .languages()
                        .iter()
                        .map(|t| s.score(source, t))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(row.iter().sum::<f64>() / row.len() as f64)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((source.clone(), means))
        })
        .collect()
}
