use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    /// Mean of `b − a` over instances.
    pub mean_diff: f64,
    /// 95% percentile interval of the resampled mean difference.
    pub ci_low: f64,
    pub ci_high: f64,
    pub iterations: usize,
    pub instance_count: usize,
}

/// Paired bootstrap over per-instance scores of two systems.
///
/// Instances are resampled with replacement `iterations` times; the interval
/// comes from the 2.5th and 97.5th percentiles (linear interpolation) of the
/// resampled mean differences.
pub fn paired_bootstrap(
    a: &[(String, f64)],
    b: &[(String, f64)],
    iterations: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    let a: BTreeMap<&str, f64> = a.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let b: BTreeMap<&str, f64> = b.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    let ka: BTreeSet<&str> = a.keys().copied().collect();
    let kb: BTreeSet<&str> = b.keys().copied().collect();
    if ka != kb {
        return Err(Error::IdMismatch(
            ka.symmetric_difference(&kb)
                .map(|s| s.to_string())
                .collect(),
        ));
    }
    if ka.is_empty() {
        return Err(Error::Invalid("bootstrap over zero instances".into()));
    }
    if iterations == 0 {
        return Err(Error::Invalid(
            "bootstrap needs at least one iteration".into(),
        ));
    }
    let diffs: Vec<f64> = ka.iter().map(|k| b[k] - a[k]).collect();
    let n = diffs.len();
    let mean_diff = diffs.iter().sum::<f64>() / n as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..iterations)
        .map(|_| (0..n).map(|_| diffs[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    Ok(BootstrapResult {
        mean_diff,
        ci_low: percentile(&means, 0.025),
        ci_high: percentile(&means, 0.975),
        iterations,
        instance_count: n,
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}
