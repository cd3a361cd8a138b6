//! Maximum-likelihood fits of the level-k mixture and the CH model.
//!
//! Each observation is a noisy best guess of some rank or a uniform draw.
//! Level-k estimates the rank proportions directly; CH derives them, and the
//! guesses themselves, from the single Poisson parameter τ.

mod bootstrap;
mod gg;
mod mixture;
mod mrg;
mod noise;
mod noisy;
mod pbcg;
pub mod synthetic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::GameKind;

pub use bootstrap::{aggregate_subject_fits, bootstrap_ci, percentile, BootstrapCi, BootstrapOptions};
pub use gg::{fit_ch_gg, fit_levelk_gg, GgObservation};
pub use mrg::{fit_ch_mrg, fit_levelk_mrg};
pub use noise::{default_alpha_grid, NoiseModel};
pub use pbcg::{fit_ch_pbcg, fit_levelk_pbcg};

pub const FIT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    LevelK,
    Ch,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::LevelK => "levelk",
            ModelKind::Ch => "ch",
        })
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "levelk" | "level-k" => Ok(ModelKind::LevelK),
            "ch" => Ok(ModelKind::Ch),
            other => Err(Error::Unknown(format!("model {other:?}"))),
        }
    }
}

/// How a rank's density is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankKind {
    /// Uniform over the choice domain.
    Uniform,
    /// Binomial error around the rank's best guess.
    Noisy,
    /// Exactly the rank's best guess.
    Exact,
}

/// Ordered ranks of a model and the density each one uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSpace {
    pub labels: Vec<String>,
    pub kinds: Vec<RankKind>,
}

impl TypeSpace {
    /// L0 (uniform), L1..LK (noisy) and L∞ (noisy, at the equilibrium).
    pub fn with_equilibrium(k_max: usize) -> Self {
        let mut labels = vec!["L0".to_string()];
        let mut kinds = vec![RankKind::Uniform];
        for k in 1..=k_max {
            labels.push(format!("L{k}"));
            kinds.push(RankKind::Noisy);
        }
        labels.push("Linf".into());
        kinds.push(RankKind::Noisy);
        Self { labels, kinds }
    }

    /// A random rank (uniform) followed by exact L0..LK.
    pub fn with_random(k_max: usize) -> Self {
        let mut labels = vec!["random".to_string()];
        let mut kinds = vec![RankKind::Uniform];
        for k in 0..=k_max {
            labels.push(format!("L{k}"));
            kinds.push(RankKind::Exact);
        }
        Self { labels, kinds }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Search settings shared by all fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Deepest finite rank.
    pub k_max: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_step: f64,
    /// Noise dispersions profiled out of the likelihood.
    pub alpha_grid: Vec<u32>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { k_max: 4, tau_min: 0.0, tau_max: 10.0, tau_step: 0.01, alpha_grid: default_alpha_grid() }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.k_max == 0 {
            return Err(Error::Invalid("K must be at least 1".into()));
        }
        if !(self.tau_min >= 0.0 && self.tau_min <= self.tau_max && self.tau_max.is_finite()) {
            return Err(Error::Invalid(format!("bad tau bounds [{}, {}]", self.tau_min, self.tau_max)));
        }
        if self.tau_step.is_nan() || self.tau_step <= 0.0 {
            return Err(Error::Invalid("tau step must be positive".into()));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::Invalid("empty noise grid".into()));
        }
        for &a in &self.alpha_grid {
            NoiseModel::new(a)?;
        }
        Ok(())
    }

    pub(crate) fn noise_models(&self) -> Result<Vec<NoiseModel>> {
        self.validate()?;
        self.alpha_grid.iter().map(|&a| NoiseModel::new(a)).collect()
    }
}

/// Estimated model with its fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub schema_version: u32,
    pub game: GameKind,
    pub model: ModelKind,
    pub k_max: usize,
    pub ranks: Vec<String>,
    /// Estimated (level-k) or τ-implied (CH) share of each rank.
    pub proportions: Vec<f64>,
    pub tau: Option<f64>,
    /// Binomial α of the noise; absent for exact-match games and averages.
    pub noise_dispersion: Option<u32>,
    pub log_likelihood: f64,
    pub n_obs: usize,
    pub ci: Option<BootstrapCi>,
}

impl FitResult {
    /// Reported parameters by name: τ for CH, one share per rank otherwise.
    pub fn parameters(&self) -> Vec<(String, f64)> {
        match (self.model, self.tau) {
            (ModelKind::Ch, Some(tau)) => vec![("tau".into(), tau)],
            _ => self.ranks.iter().cloned().zip(self.proportions.iter().copied()).collect(),
        }
    }

    pub fn proportion(&self, rank: &str) -> Option<f64> {
        self.ranks.iter().position(|r| r == rank).map(|i| self.proportions[i])
    }
}

/// Grid search over τ, then golden-section refinement around the best grid
/// point. The refinement is kept only if it improves the objective.
pub(crate) fn search_tau<T>(
    opts: &FitOptions,
    mut objective: impl FnMut(f64) -> Result<(f64, T)>,
) -> Result<(f64, f64, T)> {
    let n = ((opts.tau_max - opts.tau_min) / opts.tau_step).round() as usize;
    let mut best: Option<(f64, f64, T)> = None;
    for i in 0..=n {
        let tau = (opts.tau_min + i as f64 * opts.tau_step).min(opts.tau_max);
        let (ll, extra) = objective(tau)?;
        if best.as_ref().is_none_or(|b| ll > b.1) {
            best = Some((tau, ll, extra));
        }
    }
    let (t0, ll0, extra0) = best.expect("grid has at least one point");
    let (mut a, mut b) = ((t0 - opts.tau_step).max(opts.tau_min), (t0 + opts.tau_step).min(opts.tau_max));
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = objective(c)?.0;
    let mut fd = objective(d)?.0;
    for _ in 0..30 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = objective(c)?.0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = objective(d)?.0;
        }
    }
    let t1 = 0.5 * (a + b);
    let (ll1, extra1) = objective(t1)?;
    if ll1 > ll0 {
        Ok((t1, ll1, extra1))
    } else {
        Ok((t0, ll0, extra0))
    }
}
