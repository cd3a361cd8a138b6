//! Rule-based players and the repeated beauty contest loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::NoiseModel;
use crate::games::PbcgSpec;
use crate::hierarchy::{pbcg_ch, pbcg_levelk, round_half_away};

/// First-round choice of a myopic player, who has no history yet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "anchor", content = "value", rename_all = "kebab-case")]
pub enum MyopicAnchor {
    /// The domain midpoint (l_0).
    #[default]
    Midpoint,
    /// The level-1 guess.
    LevelOne,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicyKind {
    /// Always plays the level-k guess.
    FixedLevel { k: usize },
    /// Always plays the CH step-k guess.
    ChStep { k: usize, tau: f64 },
    /// Always plays the equilibrium.
    Equilibrium,
    /// Uniform integer in the domain, fresh each round.
    Uniform,
    /// Best reply to last round's average.
    MyopicBestReply {
        #[serde(default)]
        anchor: MyopicAnchor,
    },
    /// Plays the listed choices in order, repeating the last one.
    Scripted { choices: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentPolicy {
    #[serde(flatten)]
    pub kind: PolicyKind,
    /// Binomial dispersion added to the rounded choice.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<u32>,
}

impl AgentPolicy {
    pub fn new(kind: PolicyKind) -> Self {
        Self { kind, noise: None }
    }

    pub fn myopic() -> Self {
        Self::new(PolicyKind::MyopicBestReply { anchor: MyopicAnchor::Midpoint })
    }

    pub fn with_noise(mut self, alpha: u32) -> Self {
        self.noise = Some(alpha);
        self
    }
}

/// What a player learns after a round: no identities and no other bids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundFeedback {
    pub round: usize,
    pub average: f64,
    pub target: f64,
    pub won: bool,
}

/// One player's choice for the next round given its own feedback so far.
pub fn agent_choose<R: Rng + ?Sized>(
    policy: &AgentPolicy,
    spec: &PbcgSpec,
    history: &[RoundFeedback],
    rng: &mut R,
) -> Result<f64> {
    let p = spec.multiplier();
    let base = match &policy.kind {
        PolicyKind::FixedLevel { k } => pbcg_levelk(spec, *k)?.values[*k],
        PolicyKind::ChStep { k, tau } => pbcg_ch(spec, *tau, *k)?.values[*k],
        PolicyKind::Equilibrium => spec.nash().ok_or(Error::NoUniqueEquilibrium)?,
        PolicyKind::Uniform => {
            return Ok(rng.random_range(spec.lo.ceil() as i64..=spec.hi.floor() as i64) as f64);
        }
        PolicyKind::MyopicBestReply { anchor } => match (history.last(), anchor) {
            (Some(last), _) => spec.clamp(p * last.average),
            (None, MyopicAnchor::Midpoint) => spec.midpoint(),
            (None, MyopicAnchor::LevelOne) => pbcg_levelk(spec, 1)?.values[1],
            (None, MyopicAnchor::Fixed(v)) => spec.clamp(*v),
        },
        PolicyKind::Scripted { choices } => {
            let last = choices.len().checked_sub(1).ok_or(Error::Empty("scripted choices"))?;
            choices[history.len().min(last)]
        }
    };
    Ok(match policy.noise {
        Some(alpha) => {
            let noise = NoiseModel::new(alpha)?;
            spec.clamp(round_half_away(base) + noise.sample(rng) as f64)
        }
        None => base,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub choices: Vec<f64>,
    /// The target statistic (the average for mean games).
    pub average: f64,
    pub target: f64,
    pub winner: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedGameLog {
    pub spec: PbcgSpec,
    pub seed: u64,
    pub rounds: Vec<RoundRecord>,
    /// `feedback[i]` is what player i was told after each round.
    pub feedback: Vec<Vec<RoundFeedback>>,
}

impl RepeatedGameLog {
    pub fn averages(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.average).collect()
    }

    /// CSV time series, one line per round.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,average,target,winner\n");
        for r in &self.rounds {
            out.push_str(&format!("{},{},{},{}\n", r.round, r.average, r.target, r.winner));
        }
        out
    }
}

/// Plays `rounds` rounds with one policy per player. A single seeded
/// stream drives every draw, so a seed reproduces the log exactly.
pub fn run_repeated_pbcg(
    policies: &[AgentPolicy],
    spec: &PbcgSpec,
    rounds: usize,
    seed: u64,
) -> Result<RepeatedGameLog> {
    spec.validate()?;
    let n = spec.n_players.ok_or(Error::UnspecifiedPlayers)? as usize;
    if policies.len() != n {
        return Err(Error::ChoiceCount { expected: n, got: policies.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut feedback: Vec<Vec<RoundFeedback>> = vec![Vec::with_capacity(rounds); n];
    let mut records = Vec::with_capacity(rounds);
    for round in 1..=rounds {
        let mut choices = Vec::with_capacity(n);
        for (policy, seen) in policies.iter().zip(&feedback) {
            let c = agent_choose(policy, spec, seen, &mut rng)?;
            if !spec.contains(c) {
                return Err(Error::OutOfDomain { value: c, lo: spec.lo, hi: spec.hi });
            }
            choices.push(c);
        }
        let outcome = spec.resolve(&choices, &mut rng)?;
        for (i, seen) in feedback.iter_mut().enumerate() {
            seen.push(RoundFeedback {
                round,
                average: outcome.statistic_value,
                target: outcome.target,
                won: i == outcome.winner,
            });
        }
        records.push(RoundRecord {
            round,
            choices,
            average: outcome.statistic_value,
            target: outcome.target,
            winner: outcome.winner,
        });
    }
    Ok(RepeatedGameLog { spec: spec.clone(), seed, rounds: records, feedback })
}
