//! Error type shared by every module of the crate.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{at}: malformed input: {message}")]
    Malformed { at: String, message: String },

    #[error("{}: file has no data rows", path.display())]
    EmptyFile { path: PathBuf },

    #[error("{}: missing required column `{column}`", path.display())]
    MissingColumn { path: PathBuf, column: String },

    #[error("{at}: duplicate language code `{code}`")]
    DuplicateCode { at: String, code: String },

    #[error("{at}: duplicate feature id `{feature_id}`")]
    DuplicateFeatureId { at: String, feature_id: String },

    #[error("{at}: invalid category count `{value}` (must be an integer >= 2)")]
    InvalidCategoryCount { at: String, value: String },

    #[error("{}unknown language `{code}`", at_prefix(.at))]
    UnknownLanguage { code: String, at: Option<String> },

    #[error("{}unknown feature `{feature_id}`", at_prefix(.at))]
    UnknownFeature {
        feature_id: String,
        at: Option<String>,
    },

    #[error("{}value {value} for feature `{feature_id}` outside 1..={num_categories}", at_prefix(.at))]
    ValueOutOfRange {
        feature_id: String,
        value: i64,
        num_categories: u32,
        at: Option<String>,
    },

    #[error("languages `{a}` and `{b}` share no defined features")]
    NoSharedFeatures { a: String, b: String },

    #[error("missing lang2vec categories: {}", .missing.join(", "))]
    MissingCategory { missing: Vec<&'static str> },

    #[error("no lang2vec category distances present")]
    NoCategories,

    #[error("{at}: matrix is not square: {message}")]
    NotSquare { at: String, message: String },

    #[error("symmetry violation at ({a}, {b}): {forward} vs {backward}")]
    SymmetryViolation {
        a: String,
        b: String,
        forward: String,
        backward: String,
    },

    #[error("{at}: unparseable cell `{cell}`")]
    UnparseableCell { at: String, cell: String },

    #[error("{at}: invalid matrix: {message}")]
    InvalidMatrix { at: String, message: String },

    #[error("{at}: missing metadata key `{key}`")]
    MissingMetadata { at: String, key: String },

    #[error("{at}: score {value} outside [0, 1]")]
    OutOfRangeScore { at: String, value: f64 },

    #[error("language sets differ: [{}] vs [{}]", .left.join(","), .right.join(","))]
    LanguageSetMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },

    #[error("no candidate source languages left for target `{target}`")]
    EmptyCandidates { target: String },

    #[error("candidate `{code}` listed more than once")]
    DuplicateCandidate { code: String },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("zero variance in {coordinate}")]
    ZeroVariance { coordinate: &'static str },

    #[error("non-finite value {value} in {context}")]
    NonFiniteValue { value: f64, context: &'static str },

    #[error("invalid degrees of freedom {df}")]
    InvalidDegreesOfFreedom { df: u64 },

    #[error("mismatched sample: {points} points but {labels} labels")]
    LabelMismatch { points: usize, labels: usize },
}

fn at_prefix(at: &Option<String>) -> String {
    match at {
        Some(at) => format!("{at}: "),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn unknown_language(code: impl Into<String>) -> Self {
        Error::UnknownLanguage {
            code: code.into(),
            at: None,
        }
    }
}
