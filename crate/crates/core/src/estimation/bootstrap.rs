use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FitResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self { replicates: 1000, level: 0.95, seed: 0 }
    }
}

/// Percentile intervals, keyed by parameter name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub level: f64,
    pub replicates: usize,
    pub seed: u64,
    pub intervals: BTreeMap<String, [f64; 2]>,
}

/// Linear-interpolation quantile of ascending data (the R type 7 rule).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Refits `fit` on `replicates` resamples of `data` drawn with replacement.
///
/// Replicate b draws from its own ChaCha stream b under `seed`, so results
/// do not depend on thread scheduling.
pub fn bootstrap_ci<T, F>(data: &[T], opts: &BootstrapOptions, fit: F) -> Result<BootstrapCi>
where
    T: Clone + Send + Sync,
    F: Fn(&[T]) -> Result<FitResult> + Sync,
{
    if opts.replicates == 0 {
        return Err(Error::Invalid("bootstrap needs at least one replicate".into()));
    }
    if !(opts.level > 0.0 && opts.level < 1.0) {
        return Err(Error::Invalid(format!("confidence level {} not in (0, 1)", opts.level)));
    }
    if data.is_empty() {
        return Err(Error::Empty("bootstrap data"));
    }
    let draws: Vec<Vec<(String, f64)>> = (0..opts.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(b as u64);
            let sample: Vec<T> = (0..data.len()).map(|_| data[rng.random_range(0..data.len())].clone()).collect();
            fit(&sample).map(|r| r.parameters())
        })
        .collect::<Result<_>>()?;
    let mut by_name: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for params in draws {
        for (name, v) in params {
            by_name.entry(name).or_default().push(v);
        }
    }
    let tail = (1.0 - opts.level) / 2.0;
    let intervals = by_name
        .into_iter()
        .map(|(name, mut vs)| {
            vs.sort_by(f64::total_cmp);
            let iv = [percentile(&vs, tail), percentile(&vs, 1.0 - tail)];
            (name, iv)
        })
        .collect();
    Ok(BootstrapCi { level: opts.level, replicates: opts.replicates, seed: opts.seed, intervals })
}

/// Averages per-subject fits: proportions are averaged and renormalized,
/// τ is averaged. With `boot`, subjects are resampled for the intervals.
pub fn aggregate_subject_fits(fits: &[FitResult], boot: Option<&BootstrapOptions>) -> Result<FitResult> {
    let first = fits.first().ok_or(Error::Empty("subject fits"))?;
    if fits
        .iter()
        .any(|f| f.model != first.model || f.game != first.game || f.k_max != first.k_max || f.ranks != first.ranks)
    {
        return Err(Error::MixedModels);
    }
    let n = fits.len() as f64;
    let mut proportions = vec![0.0; first.proportions.len()];
    for f in fits {
        for (acc, p) in proportions.iter_mut().zip(&f.proportions) {
            *acc += p / n;
        }
    }
    let total: f64 = proportions.iter().sum();
    proportions.iter_mut().for_each(|p| *p /= total);
    let tau = fits.iter().map(|f| f.tau).collect::<Option<Vec<f64>>>().map(|ts| ts.iter().sum::<f64>() / n);
    let noise_dispersion = first.noise_dispersion.filter(|a| fits.iter().all(|f| f.noise_dispersion == Some(*a)));
    let ci = match boot {
        Some(opts) => Some(bootstrap_ci(fits, opts, |s| aggregate_subject_fits(s, None))?),
        None => None,
    };
    Ok(FitResult {
        schema_version: first.schema_version,
        game: first.game,
        model: first.model,
        k_max: first.k_max,
        ranks: first.ranks.clone(),
        proportions,
        tau,
        noise_dispersion,
        log_likelihood: fits.iter().map(|f| f.log_likelihood).sum(),
        n_obs: fits.iter().map(|f| f.n_obs).sum(),
        ci,
    })
}
