use super::noisy::{ch_predictions, fit_weights, levelk_predictions, Group, Profile};
use super::{search_tau, FitOptions, FitResult, ModelKind, TypeSpace, FIT_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::games::{GameKind, PbcgSpec};
use crate::hierarchy::{pbcg_ch, pbcg_levelk, round_half_away, step_shares};

fn group(spec: &PbcgSpec, responses: &[f64]) -> Result<Group> {
    spec.validate()?;
    if responses.is_empty() {
        return Err(Error::Empty("responses"));
    }
    let mut rounded = Vec::with_capacity(responses.len());
    for &y in responses {
        if !spec.contains(y) {
            return Err(Error::OutOfDomain { value: y, lo: spec.lo, hi: spec.hi });
        }
        rounded.push(round_half_away(y) as i64);
    }
    let width = (spec.hi - spec.lo).round() + 1.0;
    Ok(Group::new(1.0 / width, rounded))
}

/// Level-k mixture over L0..LK and L∞ fitted to pooled beauty contest
/// responses.
pub fn fit_levelk_pbcg(spec: &PbcgSpec, responses: &[f64], opts: &FitOptions) -> Result<FitResult> {
    let noises = opts.noise_models()?;
    let groups = [group(spec, responses)?];
    let nash = spec.nash().ok_or(Error::NoUniqueEquilibrium)?;
    let ladder = pbcg_levelk(spec, opts.k_max)?;
    let preds = [levelk_predictions(&ladder, nash)];
    let (weights, ll, alpha) = fit_weights(&groups, &preds, &noises);
    Ok(FitResult {
        schema_version: FIT_SCHEMA_VERSION,
        game: GameKind::Pbcg,
        model: ModelKind::LevelK,
        k_max: opts.k_max,
        ranks: TypeSpace::with_equilibrium(opts.k_max).labels,
        proportions: weights,
        tau: None,
        noise_dispersion: Some(alpha),
        log_likelihood: ll,
        n_obs: responses.len(),
        ci: None,
    })
}

/// CH model fitted to pooled beauty contest responses.
pub fn fit_ch_pbcg(spec: &PbcgSpec, responses: &[f64], opts: &FitOptions) -> Result<FitResult> {
    let noises = opts.noise_models()?;
    let groups = [group(spec, responses)?];
    let nash = spec.nash().ok_or(Error::NoUniqueEquilibrium)?;
    let mut profile = Profile::new(&groups, &noises);
    let (tau, ll, alpha) = search_tau(opts, |tau| {
        let ladder = pbcg_ch(spec, tau, opts.k_max)?;
        profile.set_predictions(&[ch_predictions(&ladder, nash)]);
        Ok(profile.best(&step_shares(tau, opts.k_max)?))
    })?;
    Ok(FitResult {
        schema_version: FIT_SCHEMA_VERSION,
        game: GameKind::Pbcg,
        model: ModelKind::Ch,
        k_max: opts.k_max,
        ranks: TypeSpace::with_equilibrium(opts.k_max).labels,
        proportions: step_shares(tau, opts.k_max)?,
        tau: Some(tau),
        noise_dispersion: Some(alpha),
        log_likelihood: ll,
        n_obs: responses.len(),
        ci: None,
    })
}
