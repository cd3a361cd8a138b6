//! Data generators that follow the fitted models exactly, used to check that
//! the estimators recover known parameters.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use super::{GgObservation, NoiseModel};
use crate::error::{Error, Result};
use crate::games::{GgRoundSpec, MrgVariant, PbcgSpec, MRG_MAX, MRG_MIN};
use crate::hierarchy::{gg_ch, gg_levelk, mrg_ch, mrg_levelk, pbcg_ch, pbcg_levelk, round_half_away, step_shares};

fn chooser(weights: &[f64]) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(weights).map_err(|e| Error::Invalid(format!("bad rank weights: {e}")))
}

/// One response: uniform over the integers in [lo, hi] for rank 0,
/// otherwise the rounded prediction plus noise, clamped to the domain.
fn draw<R: Rng + ?Sized>(rank: usize, preds: &[f64], lo: f64, hi: f64, noise: &NoiseModel, rng: &mut R) -> f64 {
    if rank == 0 {
        return rng.random_range(lo.ceil() as i64..=hi.floor() as i64) as f64;
    }
    let y = round_half_away(preds[rank - 1]) as i64 + noise.sample(rng);
    (y as f64).clamp(lo, hi)
}

fn pbcg_draws<R: Rng + ?Sized>(
    spec: &PbcgSpec,
    weights: &[f64],
    preds: &[f64],
    alpha: u32,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let noise = NoiseModel::new(alpha)?;
    let pick = chooser(weights)?;
    Ok((0..n).map(|_| draw(pick.sample(rng), preds, spec.lo, spec.hi, &noise, rng)).collect())
}

/// Predictions of ranks 1..=K followed by the equilibrium.
fn with_nash(values: &[f64], nash: f64) -> Vec<f64> {
    let mut out = values[1..].to_vec();
    out.push(nash);
    out
}

/// Beauty contest responses from level-k shares `[L0, L1, .., LK, L∞]`.
pub fn levelk_pbcg<R: Rng + ?Sized>(
    spec: &PbcgSpec,
    proportions: &[f64],
    alpha: u32,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let k_max = proportions.len().checked_sub(2).ok_or(Error::Empty("proportions"))?;
    let nash = spec.nash().ok_or(Error::NoUniqueEquilibrium)?;
    let ladder = pbcg_levelk(spec, k_max)?;
    pbcg_draws(spec, proportions, &with_nash(&ladder.values, nash), alpha, n, rng)
}

/// Beauty contest responses from a CH population with parameter τ.
pub fn ch_pbcg<R: Rng + ?Sized>(
    spec: &PbcgSpec,
    tau: f64,
    k_max: usize,
    alpha: u32,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let nash = spec.nash().ok_or(Error::NoUniqueEquilibrium)?;
    let ladder = pbcg_ch(spec, tau, k_max)?;
    let shares = step_shares(tau, k_max)?;
    pbcg_draws(spec, &shares, &with_nash(&ladder.values, nash), alpha, n, rng)
}

fn gg_draws<R: Rng + ?Sized>(
    rounds: &[GgRoundSpec],
    weights: &[f64],
    alpha: u32,
    rng: &mut R,
    ladder: impl Fn(&GgRoundSpec) -> Result<Vec<f64>>,
) -> Result<Vec<GgObservation>> {
    let noise = NoiseModel::new(alpha)?;
    let pick = chooser(weights)?;
    rounds
        .iter()
        .map(|round| {
            let nash = round.nash()?.0;
            let preds = with_nash(&ladder(round)?, nash);
            let me = round.player1;
            let value = draw(pick.sample(rng), &preds, me.lower, me.upper, &noise, rng);
            Ok(GgObservation { round: *round, value })
        })
        .collect()
}

/// One subject's guesses (as player 1) from level-k shares, drawing a fresh
/// rank for every round.
pub fn levelk_gg<R: Rng + ?Sized>(
    rounds: &[GgRoundSpec],
    proportions: &[f64],
    alpha: u32,
    rng: &mut R,
) -> Result<Vec<GgObservation>> {
    let k_max = proportions.len().checked_sub(2).ok_or(Error::Empty("proportions"))?;
    gg_draws(rounds, proportions, alpha, rng, |r| Ok(gg_levelk(r, k_max)?.0.values))
}

/// One subject's guesses (as player 1) from a CH population.
pub fn ch_gg<R: Rng + ?Sized>(
    rounds: &[GgRoundSpec],
    tau: f64,
    k_max: usize,
    alpha: u32,
    rng: &mut R,
) -> Result<Vec<GgObservation>> {
    let shares = step_shares(tau, k_max)?;
    gg_draws(rounds, &shares, alpha, rng, |r| Ok(gg_ch(r, tau, k_max)?.0.values))
}

fn mrg_draws<R: Rng + ?Sized>(weights: &[f64], values: &[f64], n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let pick = chooser(weights)?;
    Ok((0..n)
        .map(|_| match pick.sample(rng) {
            0 => rng.random_range(MRG_MIN..=MRG_MAX) as f64,
            k => values[k - 1],
        })
        .collect())
}

/// Money request responses from shares `[random, L0, .., LK]`.
pub fn levelk_mrg<R: Rng + ?Sized>(
    variant: MrgVariant,
    proportions: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let k_max = proportions.len().checked_sub(2).ok_or(Error::Empty("proportions"))?;
    mrg_draws(proportions, &mrg_levelk(variant, k_max)?.values, n, rng)
}

/// Money request responses from a CH population; the random rank takes
/// the Poisson tail.
pub fn ch_mrg<R: Rng + ?Sized>(variant: MrgVariant, tau: f64, k_max: usize, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let mut shares = step_shares(tau, k_max)?;
    let tail = shares.pop().unwrap_or(0.0);
    shares.insert(0, tail);
    mrg_draws(&shares, &mrg_ch(variant, tau, k_max)?.values, n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::canonical_gg_rounds;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn draws_stay_in_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = PbcgSpec::baseline();
        let ys = ch_pbcg(&spec, 1.5, 4, 64, 2000, &mut rng).unwrap();
        assert!(ys.iter().all(|&y| (0.0..=100.0).contains(&y) && y.fract() == 0.0));
        let obs = ch_gg(&canonical_gg_rounds(), 2.0, 4, 64, &mut rng).unwrap();
        assert!(obs.iter().all(|o| o.value >= o.round.player1.lower && o.value <= o.round.player1.upper));
        let m = ch_mrg(MrgVariant::Game1, 3.0, 4, 500, &mut rng).unwrap();
        assert!(m.iter().all(|&y| (11.0..=20.0).contains(&y)));
    }

    #[test]
    fn pure_rank_is_noiseless_up_to_dispersion() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = PbcgSpec::baseline();
        let ys = levelk_pbcg(&spec, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 2, 500, &mut rng).unwrap();
        assert!(ys.iter().all(|&y| (32.0..=34.0).contains(&y)));
    }
}
