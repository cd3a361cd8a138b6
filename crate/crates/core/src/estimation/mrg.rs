use super::mixture::MixtureData;
use super::{search_tau, FitOptions, FitResult, ModelKind, TypeSpace, FIT_SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::games::{GameKind, MrgVariant, MRG_MAX, MRG_MIN};
use crate::hierarchy::{mrg_ch, mrg_levelk, step_shares};

const ACTIONS: usize = (MRG_MAX - MRG_MIN + 1) as usize;

/// Counts of each action 11..=20.
fn tally(responses: &[f64]) -> Result<[f64; ACTIONS]> {
    if responses.is_empty() {
        return Err(Error::Empty("responses"));
    }
    let mut counts = [0.0; ACTIONS];
    for &y in responses {
        if y.fract() != 0.0 || y < MRG_MIN as f64 || y > MRG_MAX as f64 {
            return Err(Error::OutOfDomain { value: y, lo: MRG_MIN as f64, hi: MRG_MAX as f64 });
        }
        counts[(y as i64 - MRG_MIN) as usize] += 1.0;
    }
    Ok(counts)
}

fn result(model: ModelKind, k_max: usize, proportions: Vec<f64>, tau: Option<f64>, ll: f64, n: usize) -> FitResult {
    FitResult {
        schema_version: FIT_SCHEMA_VERSION,
        game: GameKind::Mrg,
        model,
        k_max,
        ranks: TypeSpace::with_random(k_max).labels,
        proportions,
        tau,
        noise_dispersion: None,
        log_likelihood: ll,
        n_obs: n,
        ci: None,
    }
}

/// Level-k mixture over a random rank and exact L0..LK.
pub fn fit_levelk_mrg(variant: MrgVariant, responses: &[f64], opts: &FitOptions) -> Result<FitResult> {
    let counts = tally(responses)?;
    let ladder = mrg_levelk(variant, opts.k_max)?;
    let mut data = MixtureData::new(opts.k_max + 2);
    let mut row = vec![0.0; opts.k_max + 2];
    for (i, &c) in counts.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let y = (MRG_MIN + i as i64) as f64;
        row[0] = 1.0 / ACTIONS as f64;
        for (slot, &v) in row[1..].iter_mut().zip(&ladder.values) {
            *slot = if v == y { 1.0 } else { 0.0 };
        }
        data.push(&row, c);
    }
    let (w, ll) = data.fit();
    Ok(result(ModelKind::LevelK, opts.k_max, w, None, ll, responses.len()))
}

/// Log-likelihood of action counts when the random rank has weight
/// `weights[0]` and rank k plays `values[k]` with weight `weights[k + 1]`.
fn exact_loglik(counts: &[f64; ACTIONS], weights: &[f64], values: &[f64]) -> f64 {
    let mut ll = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let y = (MRG_MIN + i as i64) as f64;
        let mut mix = weights[0] / ACTIONS as f64;
        for (w, &v) in weights[1..].iter().zip(values) {
            if v == y {
                mix += w;
            }
        }
        ll += c * mix.ln();
    }
    ll
}

/// CH model: steps 0..K at Poisson shares, the random rank taking the tail.
///
/// At τ = 0 the random rank has no mass, so any response other than 20
/// makes that grid point's likelihood zero.
pub fn fit_ch_mrg(variant: MrgVariant, responses: &[f64], opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let counts = tally(responses)?;
    let shares = |tau: f64| -> Result<Vec<f64>> {
        let mut s = step_shares(tau, opts.k_max)?;
        let tail = s.pop().unwrap_or(0.0);
        s.insert(0, tail);
        Ok(s)
    };
    let (tau, ll, _) = search_tau(opts, |tau| {
        let ladder = mrg_ch(variant, tau, opts.k_max)?;
        Ok((exact_loglik(&counts, &shares(tau)?, &ladder.values), ()))
    })?;
    Ok(result(ModelKind::Ch, opts.k_max, shares(tau)?, Some(tau), ll, responses.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_nineteen_is_level_one() {
        let fit = fit_levelk_mrg(MrgVariant::Game1, &[19.0; 30], &FitOptions::default()).unwrap();
        assert!(fit.proportion("L1").unwrap() > 0.99);
    }

    #[test]
    fn all_twenty_is_anchor() {
        let opts = FitOptions::default();
        let lk = fit_levelk_mrg(MrgVariant::Game1, &[20.0; 30], &opts).unwrap();
        assert!(lk.proportion("L0").unwrap() > 0.99);
        let ch = fit_ch_mrg(MrgVariant::Game1, &[20.0; 30], &opts).unwrap();
        assert_eq!(ch.tau, Some(0.0));
        assert_eq!(ch.log_likelihood, 0.0);
    }

    #[test]
    fn errors() {
        let opts = FitOptions::default();
        assert!(fit_levelk_mrg(MrgVariant::Game1, &[], &opts).is_err());
        assert!(fit_levelk_mrg(MrgVariant::Game1, &[10.0], &opts).is_err());
        assert!(fit_ch_mrg(MrgVariant::Game3, &[15.5], &opts).is_err());
        let deep = FitOptions { k_max: 10, ..FitOptions::default() };
        assert_eq!(fit_levelk_mrg(MrgVariant::Game1, &[15.0], &deep), Err(Error::RankOutOfRange(10)));
    }

    #[test]
    fn ch_loglik_finite_at_optimum() {
        let ys = [19.0, 18.0, 17.0, 20.0, 11.0, 14.0];
        let ch = fit_ch_mrg(MrgVariant::Game3, &ys, &FitOptions::default()).unwrap();
        assert!(ch.log_likelihood.is_finite());
        assert!((ch.proportions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
