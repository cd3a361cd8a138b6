//! Game definitions: the p-beauty contest (pBCG), the two-player guessing
//! game (GG) and the 11-20 money request game (MRG).
//!
//! Each game exposes its payoff or win rule and a best-response oracle. The
//! oracles drive prediction ladders, synthetic agents and the grading of
//! understanding questions.

mod condition;
mod gg;
mod mrg;
mod pbcg;
pub mod understanding;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use condition::Condition;
pub use gg::{canonical_gg_rounds, gg_points, GgPlayer, GgRoundSpec};
pub use mrg::{mrg_best_responses, mrg_points, MrgSpec, MrgVariant, MRG_BONUS, MRG_MAX, MRG_MIN};
pub use pbcg::{PbcgOutcome, PbcgSpec, TargetStatistic};

/// A positive rational multiplier such as `2/3`.
///
/// Kept as a fraction so prompts can print it the way subjects read it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Fraction {
    num: u32,
    den: u32,
}

impl Fraction {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidSpec(format!("multiplier must be positive, got {num}/{den}")));
        }
        let g = gcd(num, den);
        Ok(Self { num: num / g, den: den / g })
    }

    pub fn numerator(&self) -> u32 {
        self.num
    }

    pub fn denominator(&self) -> u32 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Fraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("cannot parse multiplier {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse().map_err(|_| bad())?;
                let d = d.trim().parse().map_err(|_| bad())?;
                Fraction::new(n, d)
            }
            None => {
                // Decimal input: "0.5", "1.3".
                let (int, frac) = s.split_once('.').unwrap_or((s, ""));
                if int.is_empty() && frac.is_empty() {
                    return Err(bad());
                }
                let den = 10u32.checked_pow(frac.len() as u32).ok_or_else(bad)?;
                let digits = format!("{int}{frac}");
                let num: u32 = digits.parse().map_err(|_| bad())?;
                Fraction::new(num, den)
            }
        }
    }
}

impl TryFrom<String> for Fraction {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Fraction> for String {
    fn from(f: Fraction) -> String {
        f.to_string()
    }
}

/// Serialized game specification, tagged by `"game"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "game", rename_all = "lowercase")]
pub enum GameSpec {
    Pbcg(PbcgSpec),
    Gg(GgRoundSpec),
    Mrg(MrgSpec),
}

impl GameSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GameSpec::Pbcg(s) => s.validate(),
            GameSpec::Gg(s) => s.validate(),
            GameSpec::Mrg(_) => Ok(()),
        }
    }

    pub fn kind(&self) -> GameKind {
        match self {
            GameSpec::Pbcg(_) => GameKind::Pbcg,
            GameSpec::Gg(_) => GameKind::Gg,
            GameSpec::Mrg(_) => GameKind::Mrg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Pbcg,
    Gg,
    Mrg,
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Pbcg => "pbcg",
            GameKind::Gg => "gg",
            GameKind::Mrg => "mrg",
        })
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pbcg" => Ok(GameKind::Pbcg),
            "gg" => Ok(GameKind::Gg),
            "mrg" => Ok(GameKind::Mrg),
            other => Err(Error::Unknown(format!("game {other:?}"))),
        }
    }
}

pub(crate) fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}
