use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Fraction;
use crate::error::{Error, Result};

/// Distances closer than this are treated as ties.
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetStatistic {
    Mean,
    Median,
}

impl TargetStatistic {
    /// Mean, or median with the even-count median taken as the mean of the
    /// middle pair.
    pub fn apply(&self, values: &[f64]) -> f64 {
        match self {
            TargetStatistic::Mean => values.iter().sum::<f64>() / values.len() as f64,
            TargetStatistic::Median => {
                let mut v = values.to_vec();
                v.sort_by(f64::total_cmp);
                let n = v.len();
                if n % 2 == 1 {
                    v[n / 2]
                } else {
                    0.5 * (v[n / 2 - 1] + v[n / 2])
                }
            }
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            TargetStatistic::Mean => "average",
            TargetStatistic::Median => "median",
        }
    }
}

/// One p-beauty contest condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbcgSpec {
    /// `None` when subjects are only told the group is finite.
    pub n_players: Option<u32>,
    pub p: Fraction,
    pub statistic: TargetStatistic,
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
}

fn default_lo() -> f64 {
    0.0
}

fn default_hi() -> f64 {
    100.0
}

/// Result of one resolved pBCG round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PbcgOutcome {
    pub statistic_value: f64,
    pub target: f64,
    /// Every player at minimal distance from the target.
    pub tied: Vec<usize>,
    /// The single winner drawn uniformly from `tied`.
    pub winner: usize,
}

impl PbcgSpec {
    pub fn new(n_players: Option<u32>, p: Fraction, statistic: TargetStatistic) -> Result<Self> {
        let spec = Self { n_players, p, statistic, lo: 0.0, hi: 100.0 };
        spec.validate()?;
        Ok(spec)
    }

    /// Eleven players, target 2/3 of the average.
    pub fn baseline() -> Self {
        Self {
            n_players: Some(11),
            p: Fraction::new(2, 3).expect("static fraction"),
            statistic: TargetStatistic::Mean,
            lo: 0.0,
            hi: 100.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(n) = self.n_players {
            if n < 2 {
                return Err(Error::InvalidSpec(format!("need at least 2 players, got {n}")));
            }
        }
        if !(self.lo.is_finite() && self.hi.is_finite() && 0.0 <= self.lo && self.lo < self.hi) {
            return Err(Error::InvalidSpec(format!("bad choice domain [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn multiplier(&self) -> f64 {
        self.p.value()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        super::clamp(x, self.lo, self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && self.lo <= x && x <= self.hi
    }

    /// Equilibrium guess: the lower bound for p < 1, the upper bound for p > 1.
    pub fn nash(&self) -> Option<f64> {
        let p = self.multiplier();
        if p < 1.0 {
            Some(self.lo)
        } else if p > 1.0 {
            Some(self.hi)
        } else {
            None
        }
    }

    pub fn target(&self, choices: &[f64]) -> f64 {
        self.multiplier() * self.statistic.apply(choices)
    }

    fn check_choices(&self, choices: &[f64]) -> Result<()> {
        if choices.is_empty() {
            return Err(Error::Empty("choices"));
        }
        if let Some(&bad) = choices.iter().find(|&&c| !self.contains(c)) {
            return Err(Error::OutOfDomain { value: bad, lo: self.lo, hi: self.hi });
        }
        Ok(())
    }

    /// Resolves a round: target = p × statistic, the closest choice wins and
    /// ties are broken by a uniform draw from `rng`.
    pub fn resolve<R: Rng + ?Sized>(&self, choices: &[f64], rng: &mut R) -> Result<PbcgOutcome> {
        let n = self.n_players.ok_or(Error::UnspecifiedPlayers)? as usize;
        self.check_choices(choices)?;
        if choices.len() != n {
            return Err(Error::ChoiceCount { expected: n, got: choices.len() });
        }
        let statistic_value = self.statistic.apply(choices);
        let target = self.multiplier() * statistic_value;
        let tied = closest(choices, target);
        let winner = tied[rng.random_range(0..tied.len())];
        Ok(PbcgOutcome { statistic_value, target, tied, winner })
    }

    /// Own integer choices that win with maximal probability against the
    /// given choices of the other n − 1 players. Own choice enters the
    /// statistic; a k-way tie wins with probability 1/k.
    pub fn best_response_set(&self, others: &[f64]) -> Result<BTreeSet<i64>> {
        let n = self.n_players.ok_or(Error::UnspecifiedPlayers)? as usize;
        if others.len() + 1 != n {
            return Err(Error::ChoiceCount { expected: n - 1, got: others.len() });
        }
        if let Some(&bad) = others.iter().find(|&&c| !self.contains(c)) {
            return Err(Error::OutOfDomain { value: bad, lo: self.lo, hi: self.hi });
        }
        let mut all = others.to_vec();
        all.push(0.0);
        let own = all.len() - 1;
        let lo = self.lo.ceil() as i64;
        let hi = self.hi.floor() as i64;
        let mut probs = Vec::with_capacity((hi - lo + 1) as usize);
        for c in lo..=hi {
            all[own] = c as f64;
            let target = self.target(&all);
            let tied = closest(&all, target);
            let p = if tied.contains(&own) { 1.0 / tied.len() as f64 } else { 0.0 };
            probs.push((c, p));
        }
        let best = probs.iter().map(|&(_, p)| p).fold(0.0, f64::max);
        Ok(probs.into_iter().filter(|&(_, p)| (p - best).abs() < 1e-12).map(|(c, _)| c).collect())
    }
}

fn closest(choices: &[f64], target: f64) -> Vec<usize> {
    let dmin = choices.iter().map(|c| (c - target).abs()).fold(f64::INFINITY, f64::min);
    choices.iter().enumerate().filter(|(_, c)| (*c - target).abs() <= dmin + TIE_EPS).map(|(i, _)| i).collect()
}
