use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::noisy::{ch_predictions, fit_weights, levelk_predictions, Group, Profile};
use super::{search_tau, FitOptions, FitResult, ModelKind, TypeSpace, FIT_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::games::{GameKind, GgRoundSpec};
use crate::hierarchy::{gg_ch, gg_levelk, round_half_away, step_shares};

/// Rounds a subject must answer: one per canonical game.
const GG_ROUNDS: u32 = 16;

/// One guess by the subject, who plays as player 1 of `round`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgObservation {
    pub round: GgRoundSpec,
    pub value: f64,
}

struct Prepared {
    groups: Vec<Group>,
    rounds: Vec<GgRoundSpec>,
    nash: Vec<f64>,
}

fn prepare(obs: &[GgObservation]) -> Result<Prepared> {
    if obs.is_empty() {
        return Err(Error::Empty("guessing-game responses"));
    }
    let mut seen = BTreeSet::new();
    for o in obs {
        if !seen.insert(o.round.round) {
            return Err(Error::Invalid(format!("round {} answered twice", o.round.round)));
        }
    }
    let missing: Vec<usize> = (1..=GG_ROUNDS).filter(|r| !seen.contains(r)).map(|r| r as usize).collect();
    if !missing.is_empty() {
        return Err(Error::MissingRounds(missing));
    }
    let mut groups = Vec::with_capacity(obs.len());
    let mut nash = Vec::with_capacity(obs.len());
    for o in obs {
        o.round.validate()?;
        let me = o.round.player1;
        let y = me.clamp(o.value);
        if y != o.value {
            log::warn!(
                "round {}: guess {} outside [{}, {}], adjusted to {}",
                o.round.round,
                o.value,
                me.lower,
                me.upper,
                y
            );
        }
        groups.push(Group::new(1.0 / me.width(), [round_half_away(y) as i64]));
        nash.push(o.round.nash()?.0);
    }
    Ok(Prepared { groups, rounds: obs.iter().map(|o| o.round).collect(), nash })
}

/// Level-k mixture for one subject's guesses across the rounds, with one
/// noise dispersion shared by all rounds.
pub fn fit_levelk_gg(obs: &[GgObservation], opts: &FitOptions) -> Result<FitResult> {
    let noises = opts.noise_models()?;
    let prep = prepare(obs)?;
    let mut preds = Vec::with_capacity(obs.len());
    for (round, &nash) in prep.rounds.iter().zip(&prep.nash) {
        let (ladder, _) = gg_levelk(round, opts.k_max)?;
        preds.push(levelk_predictions(&ladder, nash));
    }
    let (weights, ll, alpha) = fit_weights(&prep.groups, &preds, &noises);
    Ok(FitResult {
        schema_version: FIT_SCHEMA_VERSION,
        game: GameKind::Gg,
        model: ModelKind::LevelK,
        k_max: opts.k_max,
        ranks: TypeSpace::with_equilibrium(opts.k_max).labels,
        proportions: weights,
        tau: None,
        noise_dispersion: Some(alpha),
        log_likelihood: ll,
        n_obs: obs.len(),
        ci: None,
    })
}

/// CH model for one subject's guesses across the rounds.
pub fn fit_ch_gg(obs: &[GgObservation], opts: &FitOptions) -> Result<FitResult> {
    let noises = opts.noise_models()?;
    let prep = prepare(obs)?;
    let mut preds = vec![Vec::new(); obs.len()];
    let mut profile = Profile::new(&prep.groups, &noises);
    let (tau, ll, alpha) = search_tau(opts, |tau| {
        for ((round, &nash), slot) in prep.rounds.iter().zip(&prep.nash).zip(preds.iter_mut()) {
            let (ladder, _) = gg_ch(round, tau, opts.k_max)?;
            *slot = ch_predictions(&ladder, nash);
        }
        profile.set_predictions(&preds);
        Ok(profile.best(&step_shares(tau, opts.k_max)?))
    })?;
    Ok(FitResult {
        schema_version: FIT_SCHEMA_VERSION,
        game: GameKind::Gg,
        model: ModelKind::Ch,
        k_max: opts.k_max,
        ranks: TypeSpace::with_equilibrium(opts.k_max).labels,
        proportions: step_shares(tau, opts.k_max)?,
        tau: Some(tau),
        noise_dispersion: Some(alpha),
        log_likelihood: ll,
        n_obs: obs.len(),
        ci: None,
    })
}
