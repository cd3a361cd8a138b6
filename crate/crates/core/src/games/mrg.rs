use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MRG_MIN: i64 = 11;
pub const MRG_MAX: i64 = 20;
/// Extra points for undercutting the opponent by exactly one.
pub const MRG_BONUS: i64 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MrgVariant {
    /// Base points equal the chosen number.
    Game1,
    /// Base points are 20 for choosing 20 and 17 otherwise.
    Game3,
}

impl fmt::Display for MrgVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MrgVariant::Game1 => "game1",
            MrgVariant::Game3 => "game3",
        })
    }
}

impl FromStr for MrgVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "game1" | "1" => Ok(MrgVariant::Game1),
            "game3" | "3" => Ok(MrgVariant::Game3),
            other => Err(Error::Unknown(format!("money request variant {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MrgSpec {
    pub variant: MrgVariant,
}

impl MrgSpec {
    pub fn new(variant: MrgVariant) -> Self {
        Self { variant }
    }

    pub fn actions() -> std::ops::RangeInclusive<i64> {
        MRG_MIN..=MRG_MAX
    }

    pub fn contains(x: i64) -> bool {
        (MRG_MIN..=MRG_MAX).contains(&x)
    }

    pub fn points(&self, own: i64, other: i64) -> Result<i64> {
        mrg_points(self.variant, own, other)
    }
}

fn check(x: i64) -> Result<()> {
    if MrgSpec::contains(x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain { value: x as f64, lo: MRG_MIN as f64, hi: MRG_MAX as f64 })
    }
}

pub fn mrg_points(variant: MrgVariant, own: i64, other: i64) -> Result<i64> {
    check(own)?;
    check(other)?;
    let base = match variant {
        MrgVariant::Game1 => own,
        MrgVariant::Game3 if own == MRG_MAX => MRG_MAX,
        MrgVariant::Game3 => MRG_MAX - 3,
    };
    let bonus = if own == other - 1 { MRG_BONUS } else { 0 };
    Ok(base + bonus)
}

/// All own choices attaining the maximal points against `other`.
pub fn mrg_best_responses(variant: MrgVariant, other: i64) -> Result<Vec<i64>> {
    check(other)?;
    let pts: Vec<(i64, i64)> =
        MrgSpec::actions().map(|x| (x, mrg_points(variant, x, other).expect("in domain"))).collect();
    let best = pts.iter().map(|&(_, p)| p).max().expect("nonempty domain");
    Ok(pts.into_iter().filter(|&(_, p)| p == best).map(|(x, _)| x).collect())
}
