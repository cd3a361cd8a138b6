use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of interval-shrinking passes tried when solving for the
/// equilibrium. Canonical games finish in under ten.
const MAX_DOMINANCE_PASSES: usize = 10_000;

const CANONICAL_JSON: &str = include_str!("../../fixtures/gg_canonical_v1.json");

/// One player's limits and target multiplier in a guessing-game round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgPlayer {
    pub lower: f64,
    pub upper: f64,
    pub target: f64,
}

impl GgPlayer {
    pub fn new(lower: f64, upper: f64, target: f64) -> Self {
        Self { lower, upper, target }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn clamp(&self, x: f64) -> f64 {
        super::clamp(x, self.lower, self.upper)
    }

    /// The unique payoff-maximizing guess against `other`, adjusted into
    /// this player's limits.
    pub fn best_response(&self, other: f64) -> f64 {
        self.clamp(self.target * other)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    fn validate(&self, which: &str) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::InvalidSpec(format!(
                "{which}: lower limit {} must be below upper limit {}",
                self.lower, self.upper
            )));
        }
        if !(self.target.is_finite() && self.target > 0.0) {
            return Err(Error::InvalidSpec(format!("{which}: target must be positive, got {}", self.target)));
        }
        Ok(())
    }
}

/// Parameters of one two-player guessing-game round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GgRoundSpec {
    pub round: u32,
    pub player1: GgPlayer,
    pub player2: GgPlayer,
}

#[derive(Deserialize)]
struct CanonicalSet {
    version: u32,
    rounds: Vec<GgRoundSpec>,
}

/// The sixteen rounds in play order, loaded from the bundled fixture.
pub fn canonical_gg_rounds() -> Vec<GgRoundSpec> {
    let set: CanonicalSet = serde_json::from_str(CANONICAL_JSON).expect("bundled guessing-game fixture is valid JSON");
    debug_assert_eq!(set.version, 1);
    set.rounds
}

/// Points for a guess at distance d from the player's target number.
pub fn gg_points(own_guess: f64, other_guess: f64, own_target: f64) -> f64 {
    let d = (own_guess - own_target * other_guess).abs();
    (200.0 - d).max(0.0) + (100.0 - d / 10.0).max(0.0)
}

impl GgRoundSpec {
    pub fn new(round: u32, player1: GgPlayer, player2: GgPlayer) -> Result<Self> {
        let spec = Self { round, player1, player2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.player1.validate("player 1")?;
        self.player2.validate("player 2")
    }

    /// Player by role, 1 or 2.
    pub fn player(&self, role: usize) -> Result<&GgPlayer> {
        match role {
            1 => Ok(&self.player1),
            2 => Ok(&self.player2),
            _ => Err(Error::Invalid(format!("player role must be 1 or 2, got {role}"))),
        }
    }

    /// Unique equilibrium by iterated elimination of dominated guesses.
    ///
    /// Each pass maps both players' surviving intervals through the other
    /// player's best-response map until both collapse to points.
    pub fn nash(&self) -> Result<(f64, f64)> {
        let (p1, p2) = (&self.player1, &self.player2);
        let (mut lo1, mut hi1) = (p1.lower, p1.upper);
        let (mut lo2, mut hi2) = (p2.lower, p2.upper);
        for _ in 0..MAX_DOMINANCE_PASSES {
            let next1 = (p1.best_response(lo2), p1.best_response(hi2));
            let next2 = (p2.best_response(lo1), p2.best_response(hi1));
            (lo1, hi1) = next1;
            (lo2, hi2) = next2;
            if hi1 - lo1 <= 1e-9 && hi2 - lo2 <= 1e-9 {
                return Ok((lo1, lo2));
            }
        }
        Err(Error::NoUniqueEquilibrium)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q_spec() -> (GgPlayer, GgPlayer) {
        (GgPlayer::new(200.0, 600.0, 1.2), GgPlayer::new(400.0, 800.0, 0.8))
    }

    #[test]
    fn points_examples() {
        assert_eq!(gg_points(600.0, 500.0, 1.2), 300.0);
        assert!((gg_points(400.0, 400.0, 0.8) - 212.0).abs() < 1e-9);
        assert!((gg_points(200.0, 0.0, 1.0) - 80.0).abs() < 1e-9);
    }

    #[test]
    fn understanding_best_responses() {
        let (you, them) = q_spec();
        assert_eq!(you.best_response(500.0), 600.0);
        assert_eq!(them.best_response(400.0), 400.0);
        assert_eq!(you.best_response(800.0), 600.0);
        assert!((them.best_response(600.0) - 480.0).abs() < 1e-9);
    }

    #[test]
    fn canonical_set_has_sixteen_valid_rounds() {
        let rounds = canonical_gg_rounds();
        assert_eq!(rounds.len(), 16);
        for (i, r) in rounds.iter().enumerate() {
            assert_eq!(r.round as usize, i + 1);
            r.validate().unwrap();
            for p in [r.player1, r.player2] {
                assert!([0.5, 0.7, 1.3, 1.5].contains(&p.target));
                assert!([100.0, 300.0].contains(&p.lower));
                assert!([500.0, 900.0].contains(&p.upper));
            }
        }
        assert_eq!(rounds[0].player1, GgPlayer::new(300.0, 900.0, 1.3));
        assert_eq!(rounds[15].player2, GgPlayer::new(300.0, 900.0, 1.3));
    }

    #[test]
    fn canonical_equilibria() {
        let expected = [
            (650.0, 500.0),
            (350.0, 500.0),
            (750.0, 500.0),
            (150.0, 100.0),
            (100.0, 150.0),
            (100.0, 100.0),
            (390.0, 300.0),
            (150.0, 300.0),
            (500.0, 350.0),
            (300.0, 390.0),
            (300.0, 150.0),
            (500.0, 750.0),
            (900.0, 900.0),
            (100.0, 100.0),
            (900.0, 900.0),
            (500.0, 650.0),
        ];
        for (r, (e1, e2)) in canonical_gg_rounds().iter().zip(expected) {
            let (n1, n2) = r.nash().unwrap();
            assert!((n1 - e1).abs() < 1e-6 && (n2 - e2).abs() < 1e-6, "round {}", r.round);
            // Mutual best responses.
            assert!((r.player1.best_response(n2) - n1).abs() < 1e-6);
            assert!((r.player2.best_response(n1) - n2).abs() < 1e-6);
        }
    }

    #[test]
    fn unit_targets_have_no_unique_equilibrium() {
        let p = GgPlayer::new(100.0, 500.0, 1.0);
        let r = GgRoundSpec::new(1, p, p).unwrap();
        assert_eq!(r.nash(), Err(Error::NoUniqueEquilibrium));
    }

    #[test]
    fn invalid_limits_rejected() {
        let bad = GgPlayer::new(500.0, 100.0, 0.5);
        assert!(GgRoundSpec::new(1, bad, GgPlayer::new(100.0, 500.0, 0.5)).is_err());
        let zero = GgPlayer::new(100.0, 500.0, 0.0);
        assert!(GgRoundSpec::new(1, zero, zero).is_err());
    }

    proptest! {
        #[test]
        fn points_symmetric_in_error(other in 0.0f64..1000.0, target in 0.1f64..2.0, d in 0.0f64..500.0) {
            let centre = target * other;
            prop_assert!((gg_points(centre + d, other, target) - gg_points(centre - d, other, target)).abs() < 1e-9);
        }

        #[test]
        fn exact_target_earns_300(other in 0.0f64..1000.0, target in 0.1f64..2.0) {
            prop_assert!((gg_points(target * other, other, target) - 300.0).abs() < 1e-9);
        }
    }
}
