//! Likelihood of rounded responses under a uniform rank plus noisy point
//! ranks, shared by the beauty contest and the guessing game.

use super::mixture::MixtureData;
use super::noise::NoiseModel;
use crate::hierarchy::{round_half_away, PredictionLadder};

/// Responses that share one set of rank predictions.
#[derive(Debug, Clone)]
pub(crate) struct Group {
    /// Density of the uniform rank.
    pub uniform: f64,
    /// Distinct rounded responses, ascending.
    pub values: Vec<i64>,
    pub counts: Vec<f64>,
    pub total: f64,
}

impl Group {
    pub fn new(uniform: f64, responses: impl IntoIterator<Item = i64>) -> Self {
        let mut all: Vec<i64> = responses.into_iter().collect();
        all.sort_unstable();
        let mut values = Vec::new();
        let mut counts: Vec<f64> = Vec::new();
        for v in all {
            if values.last() == Some(&v) {
                *counts.last_mut().unwrap() += 1.0;
            } else {
                values.push(v);
                counts.push(1.0);
            }
        }
        let total = counts.iter().sum();
        Self { uniform, values, counts, total }
    }

    /// Row indices whose response lies within reach of some prediction,
    /// ascending and without repeats.
    fn near(&self, preds: &[Option<i64>], reach: i64, out: &mut Vec<usize>) {
        out.clear();
        let mut centers: Vec<i64> = preds.iter().flatten().copied().collect();
        centers.sort_unstable();
        let mut next = 0;
        for p in centers {
            let lo = self.values.partition_point(|&v| v < p - reach).max(next);
            let hi = self.values.partition_point(|&v| v <= p + reach);
            if hi > lo {
                out.extend(lo..hi);
                next = hi;
            }
        }
    }
}

/// Predictions of ranks 1..=K and ∞ from a level-k ladder. Ranks that have
/// already reached the equilibrium are zeroed so their mass goes to ∞.
pub(crate) fn levelk_predictions(ladder: &PredictionLadder, nash: f64) -> Vec<Option<i64>> {
    let mut out: Vec<Option<i64>> = (1..ladder.values.len())
        .map(|k| (!ladder.is_nash(k)).then(|| round_half_away(ladder.values[k]) as i64))
        .collect();
    out.push(Some(round_half_away(nash) as i64));
    out
}

/// Predictions of steps 1..=K and ∞ from a CH ladder. Steps at the
/// equilibrium keep their own density, which coincides with the ∞ rank's.
pub(crate) fn ch_predictions(ladder: &PredictionLadder, nash: f64) -> Vec<Option<i64>> {
    let mut out: Vec<Option<i64>> = ladder.values[1..].iter().map(|&v| Some(round_half_away(v) as i64)).collect();
    out.push(Some(round_half_away(nash) as i64));
    out
}

/// Component densities near the predictions for one noise dispersion.
#[derive(Debug, Clone, Default)]
struct Table {
    alpha: u32,
    /// Row-major, one row per response near some prediction.
    dens: Vec<f64>,
    counts: Vec<f64>,
    /// Index of the row's group.
    group: Vec<usize>,
}

/// Profiles the noise dispersion out of the likelihood for fixed weights.
///
/// Density tables depend only on the rounded predictions, which change at
/// few points along the τ grid, so they are rebuilt only when those change.
pub(crate) struct Profile<'a> {
    groups: &'a [Group],
    noises: &'a [NoiseModel],
    preds: Vec<Vec<Option<i64>>>,
    tables: Vec<Table>,
    /// Σ_g n_g ln u_g, the uniform floor without its weight.
    floor: f64,
    total: f64,
}

impl<'a> Profile<'a> {
    pub fn new(groups: &'a [Group], noises: &'a [NoiseModel]) -> Self {
        Self {
            groups,
            noises,
            preds: Vec::new(),
            tables: Vec::new(),
            floor: groups.iter().map(|g| g.total * g.uniform.ln()).sum(),
            total: groups.iter().map(|g| g.total).sum(),
        }
    }

    pub fn set_predictions(&mut self, preds: &[Vec<Option<i64>>]) {
        if self.preds.as_slice() == preds {
            return;
        }
        self.preds = preds.to_vec();
        let mut near = Vec::new();
        self.tables = self
            .noises
            .iter()
            .map(|n| {
                let mut t = Table { alpha: n.alpha(), ..Table::default() };
                for (gi, (g, preds)) in self.groups.iter().zip(preds).enumerate() {
                    g.near(preds, n.half_width(), &mut near);
                    for &i in &near {
                        let y = g.values[i];
                        // Divided by the floor density so the ratio needs
                        // only the weights.
                        t.dens.extend(preds.iter().map(|p| p.map_or(0.0, |p| n.pmf(y - p) / g.uniform)));
                        t.counts.push(g.counts[i]);
                        t.group.push(gi);
                    }
                }
                t
            })
            .collect();
    }

    /// Best log-likelihood over the noise grid with weights `[uniform,
    /// rank 1, .., rank K, ∞]`; ties keep the earliest grid entry. The
    /// uniform weight must be positive.
    pub fn best(&self, weights: &[f64]) -> (f64, u32) {
        debug_assert!(weights[0] > 0.0, "uniform rank needs positive weight");
        let ranks = weights.len() - 1;
        let scaled: Vec<f64> = weights[1..].iter().map(|w| w / weights[0]).collect();
        let base = self.floor + self.total * weights[0].ln();
        let mut best = (f64::NEG_INFINITY, self.noises[0].alpha());
        for t in &self.tables {
            // Ratios to the uniform floor are multiplied up and only logged
            // when the running product grows large; the logarithm dominates
            // the cost.
            let mut ll = base;
            let mut product = 1.0f64;
            for (row, &c) in t.dens.chunks_exact(ranks).zip(&t.counts) {
                let ratio = 1.0 + row.iter().zip(&scaled).map(|(h, w)| h * w).sum::<f64>();
                if c <= 16.0 && ratio < 1e9 && c.fract() == 0.0 {
                    product *= ratio.powi(c as i32);
                    if product > 1e150 {
                        ll += product.ln();
                        product = 1.0;
                    }
                } else {
                    ll += c * ratio.ln();
                }
            }
            ll += product.ln();
            if ll > best.0 {
                best = (ll, t.alpha);
            }
        }
        best
    }
}

/// Mixture weights maximized by EM for each dispersion; returns the
/// weights, log-likelihood and dispersion of the best.
pub(crate) fn fit_weights(groups: &[Group], preds: &[Vec<Option<i64>>], noises: &[NoiseModel]) -> (Vec<f64>, f64, u32) {
    let ranks = preds[0].len() + 1;
    let mut best: Option<(Vec<f64>, f64, u32)> = None;
    let mut row = vec![0.0; ranks];
    for n in noises {
        let mut data = MixtureData::new(ranks);
        for (g, preds) in groups.iter().zip(preds) {
            for (&y, &c) in g.values.iter().zip(&g.counts) {
                row[0] = g.uniform;
                for (slot, p) in row[1..].iter_mut().zip(preds) {
                    *slot = p.map_or(0.0, |p| n.pmf(y - p));
                }
                data.push(&row, c);
            }
        }
        let (w, ll) = data.fit();
        if best.as_ref().is_none_or(|b| ll > b.1) {
            best = Some((w, ll, n.alpha()));
        }
    }
    best.expect("nonempty noise grid")
}
