use serde::{Deserialize, Serialize};

use super::normal_two_tailed_p;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTestResult {
    pub z: f64,
    #[serde(rename = "p")]
    pub p_value: f64,
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
}

/// One-sample z-test on paired differences: `z = mean / (sd / sqrt(n))`
/// with the sample (n - 1) standard deviation and a two-tailed normal
/// p-value.
pub fn paired_z_test(diffs: &[f64]) -> Result<ZTestResult> {
    let n = diffs.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    if let Some(&bad) = diffs.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue {
            value: bad,
            context: "paired differences",
        });
    }
    if diffs.iter().all(|&d| d == diffs[0]) {
        return Err(Error::ZeroVariance {
            coordinate: "paired differences",
        });
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let ss: f64 = diffs.iter().map(|d| (d - mean) * (d - mean)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();
    let z = mean / (sd / nf.sqrt());
    Ok(ZTestResult {
        z,
        p_value: normal_two_tailed_p(z),
        n,
        mean_diff: mean,
        sd_diff: sd,
    })
}
