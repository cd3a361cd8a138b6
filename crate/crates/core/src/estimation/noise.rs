use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dispersions profiled by default: α = 2, 4, …, 64.
pub fn default_alpha_grid() -> Vec<u32> {
    (1..=32).map(|i| 2 * i).collect()
}

/// Integer, zero-mean guessing error: ε + α/2 ~ Binomial(α, 1/2).
///
/// The variance is α/4 and the support is −α/2..=α/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    alpha: u32,
    #[serde(skip)]
    pmf: Vec<f64>,
}

impl NoiseModel {
    pub fn new(alpha: u32) -> Result<Self> {
        if alpha == 0 || alpha % 2 == 1 {
            return Err(Error::Invalid(format!("noise dispersion must be a positive even integer, got {alpha}")));
        }
        // Binomial(α, 1/2) by the running ratio C(α, j+1)/C(α, j).
        let mut pmf = Vec::with_capacity(alpha as usize + 1);
        let mut p = 0.5f64.powi(alpha as i32);
        for j in 0..=alpha {
            pmf.push(p);
            p *= (alpha - j) as f64 / (j + 1) as f64;
        }
        Ok(Self { alpha, pmf })
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn half_width(&self) -> i64 {
        (self.alpha / 2) as i64
    }

    pub fn variance(&self) -> f64 {
        self.alpha as f64 / 4.0
    }

    /// Probability of an error of exactly `eps`.
    pub fn pmf(&self, eps: i64) -> f64 {
        let j = eps + self.half_width();
        if j < 0 || j > self.alpha as i64 {
            0.0
        } else {
            self.pmf[j as usize]
        }
    }

    /// Draws one error using `alpha` fair coin flips.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let heads = (0..self.alpha).filter(|_| rng.random::<bool>()).count() as i64;
        heads - self.half_width()
    }
}
