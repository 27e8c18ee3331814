use std::fmt;

use serde::{Deserialize, Serialize};

use super::{student_t_two_tailed_p, PairedSample};
use crate::error::{Error, Result};

/// Largest sample for which [`spearman_permutation_p`] enumerates exactly.
pub const PERMUTATION_MAX_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    Pearson,
    Spearman,
}

impl fmt::Display for CorrelationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMethod::Pearson => "pearson",
            CorrelationMethod::Spearman => "spearman",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub method: CorrelationMethod,
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    pub df: usize,
}

/// Pearson's product-moment correlation with a two-tailed t-test p-value.
pub fn pearson(sample: &PairedSample) -> Result<CorrelationResult> {
    let (xs, ys) = checked_coordinates(sample)?;
    let rho = pearson_rho(&xs, &ys);
    finish(CorrelationMethod::Pearson, rho, xs.len())
}

/// Spearman's rank correlation: Pearson over fractional ranks, with the same
/// t approximation for the p-value.
pub fn spearman(sample: &PairedSample) -> Result<CorrelationResult> {
    let (xs, ys) = checked_coordinates(sample)?;
    let rx = fractional_ranks(&xs)?;
    let ry = fractional_ranks(&ys)?;
    let rho = pearson_rho(&rx, &ry);
    finish(CorrelationMethod::Spearman, rho, xs.len())
}

/// Exact two-tailed permutation p-value for Spearman's rho, enumerating all
/// `n!` orderings of the y ranks. Only defined for `n <= PERMUTATION_MAX_N`.
pub fn spearman_permutation_p(sample: &PairedSample) -> Result<f64> {
    let (xs, ys) = checked_coordinates(sample)?;
    let n = xs.len();
    if n > PERMUTATION_MAX_N {
        return Err(Error::Malformed {
            at: "spearman permutation test".into(),
            message: format!("exact enumeration limited to n <= {PERMUTATION_MAX_N}, got {n}"),
        });
    }
    let rx = fractional_ranks(&xs)?;
    let mut ry = fractional_ranks(&ys)?;
    let observed = pearson_rho(&rx, &ry).abs();
    let tolerance = 1e-12;

    // Heap's algorithm
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut c = vec![0usize; n];
    let mut visit = |perm: &[f64]| {
        total += 1;
        if pearson_rho(&rx, perm).abs() >= observed - tolerance {
            hits += 1;
        }
    };
    visit(&ry);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                ry.swap(0, i);
            } else {
                ry.swap(c[i], i);
            }
            visit(&ry);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Ranks starting at 1 for the smallest value; ties share the mean of the
/// positions they span, so the ranks always sum to `n(n+1)/2`.
pub fn fractional_ranks(xs: &[f64]) -> Result<Vec<f64>> {
    if let Some(&bad) = xs.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue {
            value: bad,
            context: "rank input",
        });
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start;
        while end + 1 < order.len() && xs[order[end + 1]] == xs[order[start]] {
            end += 1;
        }
        // positions start..=end hold ranks start+1..=end+1
        let rank = (start + end + 2) as f64 / 2.0;
        for &i in &order[start..=end] {
            ranks[i] = rank;
        }
        start = end + 1;
    }
    Ok(ranks)
}

fn checked_coordinates(sample: &PairedSample) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = sample.len();
    if n < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: n });
    }
    let xs = sample.xs();
    let ys = sample.ys();
    for (values, context) in [(&xs, "x coordinate"), (&ys, "y coordinate")] {
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                value: bad,
                context,
            });
        }
    }
    if xs.iter().all(|&v| v == xs[0]) {
        return Err(Error::ZeroVariance { coordinate: "x" });
    }
    if ys.iter().all(|&v| v == ys[0]) {
        return Err(Error::ZeroVariance { coordinate: "y" });
    }
    Ok((xs, ys))
}

fn pearson_rho(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

fn finish(method: CorrelationMethod, rho: f64, n: usize) -> Result<CorrelationResult> {
    let df = n - 2;
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let t = rho * (df as f64 / (1.0 - rho * rho)).sqrt();
        student_t_two_tailed_p(t, df as u64)?
    };
    Ok(CorrelationResult {
        method,
        rho,
        p_value,
        n,
        df,
    })
}
