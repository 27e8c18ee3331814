//! Correlation and significance testing.

mod correlation;
pub mod special;
mod ztest;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use correlation::{
    fractional_ranks, pearson, spearman, spearman_permutation_p, CorrelationMethod,
    CorrelationResult, PERMUTATION_MAX_N,
};
pub use ztest::{paired_z_test, ZTestResult};

/// Provenance of one observation in a [`PairedSample`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairLabel {
    pub source: String,
    pub target: String,
    pub task: String,
    pub model: String,
}

/// (x, y) observations, x a similarity or distance and y a transfer score.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairedSample {
    points: Vec<(f64, f64)>,
    labels: Vec<PairLabel>,
}

impl PairedSample {
    pub fn new(points: Vec<(f64, f64)>, labels: Vec<PairLabel>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::LabelMismatch {
                points: points.len(),
                labels: labels.len(),
            });
        }
        Ok(PairedSample { points, labels })
    }

    pub fn unlabeled(points: Vec<(f64, f64)>) -> Self {
        let labels = vec![PairLabel::default(); points.len()];
        PairedSample { points, labels }
    }

    pub fn from_xy(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LabelMismatch {
                points: x.len(),
                labels: y.len(),
            });
        }
        Ok(Self::unlabeled(
            x.iter().copied().zip(y.iter().copied()).collect(),
        ))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn labels(&self) -> &[PairLabel] {
        &self.labels
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// The same sample with coordinates exchanged.
    pub fn swapped(&self) -> Self {
        PairedSample {
            points: self.points.iter().map(|&(x, y)| (y, x)).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Two-tailed p-value of Student's t with `df` degrees of freedom:
/// `p = I_{df/(df+t^2)}(df/2, 1/2)`.
pub fn student_t_two_tailed_p(t: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(Error::InvalidDegreesOfFreedom { df });
    }
    if !t.is_finite() {
        return Err(Error::NonFiniteValue {
            value: t,
            context: "t statistic",
        });
    }
    let v = df as f64;
    let x = v / (v + t * t);
    Ok(special::regularized_incomplete_beta(v / 2.0, 0.5, x).clamp(0.0, 1.0))
}

/// Two-tailed standard normal tail probability `P(|Z| >= |z|)`.
pub fn normal_two_tailed_p(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

/// Formats a probability or coefficient at three decimals, the precision of
/// published correlation tables (so p < 0.0005 prints as `0.000`).
pub fn format3(value: f64) -> String {
    format!("{value:.3}")
}
