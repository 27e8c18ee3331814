//! Typological language distance metrics, transfer-source ranking, and the
//! correlation analysis linking language similarity to zero-shot
//! cross-lingual transfer scores.
//!
//! - [`typology`] - WALS-style language, feature and value tables
//! - [`matrix`] - language-indexed distance/similarity matrices and their CSV format
//! - [`metrics`] - quantified WALS distance, averaged lang2vec distance
//! - [`stats`] - Pearson, Spearman, t and normal tail probabilities, paired z-test
//! - [`selection`] - ranking candidate transfer sources for a target
//! - [`evaluation`] - score matrices, the correlation study, reference-vs-best z-test
//! - [`svg`] - scatter plots of study cells

pub mod error;
pub mod evaluation;
pub mod fixtures;
mod io;
pub mod matrix;
pub mod metrics;
pub mod selection;
pub mod stats;
pub mod svg;
pub mod typology;

pub use error::{Error, Result};
pub use io::write_atomic;
pub use matrix::{DistanceMatrix, MatrixKind};
