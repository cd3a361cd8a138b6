//! Level-k and cognitive-hierarchy (CH) prediction ladders.
//!
//! A ladder lists the best guess of each reasoning rank for one player. When
//! a rank's guess reaches the equilibrium action the ladder is marked
//! terminal there and stays at the equilibrium for every deeper rank.

mod poisson;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::{GgPlayer, GgRoundSpec, MrgVariant, PbcgSpec, MRG_MAX, MRG_MIN};

pub use poisson::{poisson_conditional, poisson_pmf, step_shares};

/// Guesses this close to the equilibrium count as reaching it.
pub const NASH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum LadderModel {
    LevelK,
    Ch { tau: f64 },
}

impl fmt::Display for LadderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LadderModel::LevelK => f.write_str("levelk"),
            LadderModel::Ch { tau } => write!(f, "ch(tau={tau})"),
        }
    }
}

/// Best guesses by rank for one player of one game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionLadder {
    /// Game label, e.g. `"pbcg"`, `"gg-4"`, `"mrg-game1"`.
    pub game: String,
    pub player: u8,
    pub model: LadderModel,
    /// Guess of ranks 0..=K.
    pub values: Vec<f64>,
    /// Equilibrium guess (the ∞ rank), when one exists.
    pub nash: Option<f64>,
    /// First rank whose guess is the equilibrium.
    pub terminal: Option<usize>,
}

/// One CSV row of a ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub game: String,
    pub player: u8,
    pub rank: usize,
    pub value: f64,
    pub is_nash: bool,
}

impl PredictionLadder {
    pub fn max_rank(&self) -> usize {
        self.values.len() - 1
    }

    pub fn value(&self, rank: usize) -> Result<f64> {
        self.values.get(rank).copied().ok_or(Error::RankOutOfRange(rank))
    }

    pub fn is_nash(&self, rank: usize) -> bool {
        self.terminal.is_some_and(|t| rank >= t)
    }

    /// Rows up to and including the terminal rank (or all ranks when the
    /// equilibrium is never reached within the ladder).
    pub fn rows(&self) -> Vec<LadderRow> {
        let last = self.terminal.unwrap_or(self.max_rank()).min(self.max_rank());
        (0..=last)
            .map(|rank| LadderRow {
                game: self.game.clone(),
                player: self.player,
                rank,
                value: self.values[rank],
                is_nash: self.is_nash(rank),
            })
            .collect()
    }
}

fn reaches(x: f64, nash: Option<f64>) -> bool {
    nash.is_some_and(|n| (x - n).abs() <= NASH_TOL * n.abs().max(1.0))
}

/// Builds a ladder from a recursion over lower ranks, freezing at the
/// equilibrium once it is reached.
fn build(
    game: String,
    player: u8,
    model: LadderModel,
    start: f64,
    nash: Option<f64>,
    k_max: usize,
    mut step: impl FnMut(&[f64]) -> f64,
) -> PredictionLadder {
    let mut values = vec![start];
    let mut terminal = reaches(start, nash).then_some(0);
    for _ in 1..=k_max {
        let next = match (terminal, nash) {
            (Some(_), Some(n)) => n,
            _ => step(&values),
        };
        if terminal.is_none() && reaches(next, nash) {
            terminal = Some(values.len());
        }
        values.push(next);
    }
    PredictionLadder { game, player, model, values, nash, terminal }
}

/// Level-k ladder: l_0 is the midpoint, l_k = clamp(p · l_{k−1}).
pub fn pbcg_levelk(spec: &PbcgSpec, k_max: usize) -> Result<PredictionLadder> {
    spec.validate()?;
    let p = spec.multiplier();
    Ok(build("pbcg".into(), 1, LadderModel::LevelK, spec.midpoint(), spec.nash(), k_max, |lower| {
        spec.clamp(p * lower[lower.len() - 1])
    }))
}

/// CH ladder: step k plays p times the belief-weighted mean of lower steps.
pub fn pbcg_ch(spec: &PbcgSpec, tau: f64, k_max: usize) -> Result<PredictionLadder> {
    spec.validate()?;
    let p = spec.multiplier();
    let weights = conditional_table(tau, k_max)?;
    Ok(build("pbcg".into(), 1, LadderModel::Ch { tau }, spec.midpoint(), spec.nash(), k_max, |lower| {
        spec.clamp(p * dot(&weights[lower.len()], lower))
    }))
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Row k holds the step-k beliefs; row 0 is empty.
fn conditional_table(tau: f64, k_max: usize) -> Result<Vec<Vec<f64>>> {
    let mut t = vec![Vec::new()];
    for k in 1..=k_max {
        t.push(poisson_conditional(tau, k)?);
    }
    if k_max == 0 {
        // Still validate tau.
        poisson_conditional(tau, 1)?;
    }
    Ok(t)
}

/// Runs both players' ladders jointly: each rank responds to the other
/// player's lower ranks.
fn gg_pair(
    round: &GgRoundSpec,
    model: LadderModel,
    k_max: usize,
    respond: impl Fn(usize, &GgPlayer, &[f64]) -> f64,
) -> Result<(PredictionLadder, PredictionLadder)> {
    round.validate()?;
    let (n1, n2) = round.nash()?;
    let players = [round.player1, round.player2];
    let nash = [n1, n2];
    let mut values = [vec![players[0].midpoint()], vec![players[1].midpoint()]];
    let mut terminal = [None, None];
    for i in 0..2 {
        if reaches(values[i][0], Some(nash[i])) {
            terminal[i] = Some(0);
        }
    }
    for k in 1..=k_max {
        let mut next = [0.0; 2];
        for i in 0..2 {
            next[i] = if terminal[i].is_some() { nash[i] } else { respond(k, &players[i], &values[1 - i]) };
        }
        for i in 0..2 {
            if terminal[i].is_none() && reaches(next[i], Some(nash[i])) {
                terminal[i] = Some(k);
            }
            values[i].push(next[i]);
        }
    }
    let game = format!("gg-{}", round.round);
    let [v1, v2] = values;
    Ok((
        PredictionLadder { game: game.clone(), player: 1, model, values: v1, nash: Some(n1), terminal: terminal[0] },
        PredictionLadder { game, player: 2, model, values: v2, nash: Some(n2), terminal: terminal[1] },
    ))
}

/// Level-k ladders of both guessing-game players.
pub fn gg_levelk(round: &GgRoundSpec, k_max: usize) -> Result<(PredictionLadder, PredictionLadder)> {
    gg_pair(round, LadderModel::LevelK, k_max, |_, me, other| me.best_response(other[other.len() - 1]))
}

/// CH ladders of both guessing-game players.
pub fn gg_ch(round: &GgRoundSpec, tau: f64, k_max: usize) -> Result<(PredictionLadder, PredictionLadder)> {
    let weights = conditional_table(tau, k_max)?;
    gg_pair(round, LadderModel::Ch { tau }, k_max, |k, me, other| me.best_response(dot(&weights[k], other)))
}

/// Level-k ladder of the money request game: l_k = 20 − k.
pub fn mrg_levelk(variant: MrgVariant, k_max: usize) -> Result<PredictionLadder> {
    let deepest = (MRG_MAX - MRG_MIN) as usize;
    if k_max > deepest {
        return Err(Error::RankOutOfRange(k_max));
    }
    Ok(PredictionLadder {
        game: format!("mrg-{variant}"),
        player: 1,
        model: LadderModel::LevelK,
        values: (0..=k_max).map(|k| (MRG_MAX - k as i64) as f64).collect(),
        nash: None,
        terminal: None,
    })
}

/// Nearest integer, halves away from zero.
pub fn round_half_away(x: f64) -> f64 {
    x.round()
}

/// CH ladder of the money request game: undercut the rounded
/// belief-weighted mean by one, never below 11.
pub fn mrg_ch(variant: MrgVariant, tau: f64, k_max: usize) -> Result<PredictionLadder> {
    let weights = conditional_table(tau, k_max)?;
    let mut values = vec![MRG_MAX as f64];
    for belief in &weights[1..=k_max] {
        let v = (round_half_away(dot(belief, &values)) - 1.0).max(MRG_MIN as f64);
        values.push(v);
    }
    Ok(PredictionLadder {
        game: format!("mrg-{variant}"),
        player: 1,
        model: LadderModel::Ch { tau },
        values,
        nash: None,
        terminal: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::canonical_gg_rounds;
    use proptest::prelude::*;

    fn baseline() -> PbcgSpec {
        PbcgSpec::baseline()
    }

    #[test]
    fn pbcg_levelk_examples() {
        let l = pbcg_levelk(&baseline(), 4).unwrap();
        assert_eq!(l.values[0], 50.0);
        assert!((l.values[1] - 100.0 / 3.0).abs() < 1e-12);
        assert!((l.values[2] - 200.0 / 9.0).abs() < 1e-12);
        assert_eq!(l.nash, Some(0.0));

        let up = pbcg_levelk(
            &PbcgSpec::new(Some(11), "4/3".parse().unwrap(), crate::games::TargetStatistic::Mean).unwrap(),
            6,
        )
        .unwrap();
        assert_eq!(up.nash, Some(100.0));
        assert_eq!(up.terminal, Some(3));
        assert_eq!(&up.values[3..], &[100.0; 4]);

        let flat = pbcg_levelk(
            &PbcgSpec::new(Some(11), "1".parse().unwrap(), crate::games::TargetStatistic::Mean).unwrap(),
            5,
        )
        .unwrap();
        assert!(flat.values.iter().all(|&v| v == 50.0));
        assert_eq!(flat.nash, None);
        assert_eq!(flat.terminal, None);
    }

    #[test]
    fn pbcg_levelk_reaches_zero_only_within_tolerance() {
        let l = pbcg_levelk(&baseline(), 80).unwrap();
        let t = l.terminal.unwrap();
        assert!(l.values[t - 1] > NASH_TOL);
        for w in l.values[..t].windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn pbcg_ch_examples() {
        let s = pbcg_ch(&baseline(), 1.5, 3).unwrap();
        assert!((s.values[1] - 100.0 / 3.0).abs() < 1e-12);
        // (2/3)(0.4·50 + 0.6·33.33) = 26.67
        assert!((s.values[2] - 2.0 / 3.0 * (0.4 * 50.0 + 0.6 * 100.0 / 3.0)).abs() < 1e-12);
        assert!((s.values[2] - 26.67).abs() < 0.005);
        let z = pbcg_ch(&baseline(), 0.0, 4).unwrap();
        assert!(z.values[1..].iter().all(|&v| (v - 100.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn gg_text_example() {
        // Limits [100,900] with p = 0.5 against [100,500] with p = 1.5.
        let r = GgRoundSpec::new(0, GgPlayer::new(100.0, 900.0, 0.5), GgPlayer::new(100.0, 500.0, 1.5)).unwrap();
        let (a, b) = gg_levelk(&r, 1).unwrap();
        assert_eq!(a.values, vec![500.0, 150.0]);
        assert_eq!(b.values, vec![300.0, 500.0]);
    }

    #[test]
    fn gg_ladders_stay_in_limits_and_freeze() {
        for r in canonical_gg_rounds() {
            for (a, b) in [gg_levelk(&r, 15).unwrap(), gg_ch(&r, 1.5, 15).unwrap()] {
                for (l, p) in [(a, r.player1), (b, r.player2)] {
                    assert!(l.values.iter().all(|&v| p.lower <= v && v <= p.upper));
                    if let Some(t) = l.terminal {
                        assert!(l.values[t..].iter().all(|&v| v == l.nash.unwrap()));
                    }
                }
            }
        }
    }

    #[test]
    fn mrg_levelk_examples() {
        let l = mrg_levelk(MrgVariant::Game1, 9).unwrap();
        assert_eq!(l.values[0], 20.0);
        assert_eq!(l.values[4], 16.0);
        assert_eq!(l.values[9], 11.0);
        assert_eq!(mrg_levelk(MrgVariant::Game1, 10), Err(Error::RankOutOfRange(10)));
    }

    #[test]
    fn mrg_ch_examples() {
        let s = mrg_ch(MrgVariant::Game1, 1.5, 2).unwrap();
        assert_eq!(s.values, vec![20.0, 19.0, 18.0]);
        let z = mrg_ch(MrgVariant::Game1, 0.0, 2).unwrap();
        assert_eq!(z.values, vec![20.0, 19.0, 19.0]);
    }

    #[test]
    fn rows_stop_at_terminal() {
        let r = canonical_gg_rounds()[15];
        let (a, _) = gg_levelk(&r, 10).unwrap();
        let rows = a.rows();
        assert_eq!(rows.len(), 2);
        assert!(!rows[0].is_nash && rows[1].is_nash);
        assert_eq!(rows[1].value, 500.0);
    }

    proptest! {
        #[test]
        fn mrg_ch_is_integer_in_range(tau in 0.0f64..10.0) {
            let s = mrg_ch(MrgVariant::Game3, tau, 9).unwrap();
            for &v in &s.values[1..] {
                prop_assert!(v.fract() == 0.0 && (11.0..=19.0).contains(&v));
            }
        }

        #[test]
        fn pbcg_ladders_in_domain(num in 1u32..8, den in 1u32..8, tau in 0.0f64..6.0) {
            let spec = PbcgSpec::new(Some(11), crate::games::Fraction::new(num, den).unwrap(), crate::games::TargetStatistic::Mean).unwrap();
            for l in [pbcg_levelk(&spec, 12).unwrap(), pbcg_ch(&spec, tau, 12).unwrap()] {
                prop_assert!(l.values.iter().all(|&v| (0.0..=100.0).contains(&v)));
            }
        }

        #[test]
        fn pbcg_levelk_monotone(num in 1u32..8, den in 1u32..8) {
            let spec = PbcgSpec::new(Some(11), crate::games::Fraction::new(num, den).unwrap(), crate::games::TargetStatistic::Mean).unwrap();
            let l = pbcg_levelk(&spec, 30).unwrap();
            let end = l.terminal.unwrap_or(l.max_rank());
            for w in l.values[..=end].windows(2) {
                match spec.multiplier().partial_cmp(&1.0).unwrap() {
                    std::cmp::Ordering::Less => prop_assert!(w[1] < w[0]),
                    std::cmp::Ordering::Greater => prop_assert!(w[1] > w[0]),
                    std::cmp::Ordering::Equal => prop_assert!(w[1] == w[0]),
                }
            }
        }
    }
}
