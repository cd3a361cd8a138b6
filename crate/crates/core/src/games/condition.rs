use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{canonical_gg_rounds, Fraction, GameKind, GameSpec, MrgSpec, MrgVariant, PbcgSpec, TargetStatistic};
use crate::error::{Error, Result};

/// A catalogued experimental condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Condition {
    Pbcg2Person,
    PbcgHalf,
    PbcgBaseline,
    PbcgFourThirds,
    PbcgUnspecifiedN,
    PbcgMedian,
    PbcgRepeatedTwoThirds,
    PbcgRepeatedFourThirds,
    Gg,
    MrgGame1,
    MrgGame3,
}

impl Condition {
    pub const ALL: [Condition; 11] = [
        Condition::Pbcg2Person,
        Condition::PbcgHalf,
        Condition::PbcgBaseline,
        Condition::PbcgFourThirds,
        Condition::PbcgUnspecifiedN,
        Condition::PbcgMedian,
        Condition::PbcgRepeatedTwoThirds,
        Condition::PbcgRepeatedFourThirds,
        Condition::Gg,
        Condition::MrgGame1,
        Condition::MrgGame3,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Pbcg2Person => "pbcg-2person",
            Condition::PbcgHalf => "pbcg-p1_2",
            Condition::PbcgBaseline => "pbcg-baseline",
            Condition::PbcgFourThirds => "pbcg-p4_3",
            Condition::PbcgUnspecifiedN => "pbcg-nunspec",
            Condition::PbcgMedian => "pbcg-median",
            Condition::PbcgRepeatedTwoThirds => "pbcg-repeated-p2_3",
            Condition::PbcgRepeatedFourThirds => "pbcg-repeated-p4_3",
            Condition::Gg => "gg",
            Condition::MrgGame1 => "mrg-game1",
            Condition::MrgGame3 => "mrg-game3",
        }
    }

    pub fn kind(&self) -> GameKind {
        match self {
            Condition::Gg => GameKind::Gg,
            Condition::MrgGame1 | Condition::MrgGame3 => GameKind::Mrg,
            _ => GameKind::Pbcg,
        }
    }

    pub fn is_repeated(&self) -> bool {
        matches!(self, Condition::PbcgRepeatedTwoThirds | Condition::PbcgRepeatedFourThirds)
    }

    /// Rounds played per session.
    pub fn rounds(&self) -> usize {
        match self {
            Condition::PbcgRepeatedTwoThirds | Condition::PbcgRepeatedFourThirds => 10,
            Condition::Gg => 16,
            _ => 1,
        }
    }

    pub fn pbcg_spec(&self) -> Option<PbcgSpec> {
        let frac = |n, d| Fraction::new(n, d).expect("static fraction");
        let (n, p, stat) = match self {
            Condition::Pbcg2Person => (Some(2), frac(2, 3), TargetStatistic::Mean),
            Condition::PbcgHalf => (Some(11), frac(1, 2), TargetStatistic::Mean),
            Condition::PbcgBaseline | Condition::PbcgRepeatedTwoThirds => (Some(11), frac(2, 3), TargetStatistic::Mean),
            Condition::PbcgFourThirds | Condition::PbcgRepeatedFourThirds => {
                (Some(11), frac(4, 3), TargetStatistic::Mean)
            }
            Condition::PbcgUnspecifiedN => (None, frac(2, 3), TargetStatistic::Mean),
            Condition::PbcgMedian => (Some(11), frac(2, 3), TargetStatistic::Median),
            _ => return None,
        };
        Some(PbcgSpec::new(n, p, stat).expect("catalogued condition is valid"))
    }

    pub fn mrg_variant(&self) -> Option<MrgVariant> {
        match self {
            Condition::MrgGame1 => Some(MrgVariant::Game1),
            Condition::MrgGame3 => Some(MrgVariant::Game3),
            _ => None,
        }
    }

    /// Game played in a 1-based round.
    pub fn game_spec(&self, round: usize) -> Result<GameSpec> {
        if round == 0 || round > self.rounds() {
            return Err(Error::Invalid(format!("{self} has rounds 1..={}, got {round}", self.rounds())));
        }
        Ok(match self.kind() {
            GameKind::Pbcg => GameSpec::Pbcg(self.pbcg_spec().expect("pbcg condition")),
            GameKind::Gg => GameSpec::Gg(canonical_gg_rounds()[round - 1]),
            GameKind::Mrg => GameSpec::Mrg(MrgSpec::new(self.mrg_variant().expect("mrg condition"))),
        })
    }

    /// Closed choice interval of the subject (player 1 in the guessing game).
    pub fn domain(&self, round: usize) -> Result<(f64, f64)> {
        Ok(match self.game_spec(round)? {
            GameSpec::Pbcg(s) => (s.lo, s.hi),
            GameSpec::Gg(r) => (r.player1.lower, r.player1.upper),
            GameSpec::Mrg(_) => (super::MRG_MIN as f64, super::MRG_MAX as f64),
        })
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Condition::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Unknown(format!("condition {s:?}")))
    }
}

impl TryFrom<String> for Condition {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Condition> for String {
    fn from(c: Condition) -> String {
        c.as_str().to_string()
    }
}
