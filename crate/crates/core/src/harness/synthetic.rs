//! An offline stand-in for a chat model: answers follow a CH population
//! in one-shot games and the guessing game, and a myopic best reply in
//! repeated beauty contests.

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::client::{ChatError, ChatRequest, ChatServiceClient};
use super::prompts::format_number;
use super::session::Role;
use crate::estimation::synthetic;
use crate::games::{canonical_gg_rounds, GameKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticClient {
    pub tau: f64,
    pub k_max: usize,
    /// Binomial noise dispersion around each step's guess.
    pub alpha: u32,
    pub seed: u64,
}

impl Default for SyntheticClient {
    fn default() -> Self {
        Self { tau: 1.5, k_max: 4, alpha: 8, seed: 0 }
    }
}

/// FNV-1a, used only to give every request its own stable random stream.
fn stream_key(parts: &[&[u8]]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for part in parts {
        for &b in *part {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn average_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"the average was (-?\d+(?:\.\d+)?)").expect("static regex"))
}

impl SyntheticClient {
    fn choose(&self, req: &ChatRequest) -> crate::Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream_key(&[req.session_id.as_bytes(), &req.round.to_le_bytes(), &req.attempt.to_le_bytes()]));
        let c = req.condition;
        if c.is_repeated() {
            let spec = c.pbcg_spec().expect("pbcg condition");
            let last = req
                .messages
                .iter()
                .rev()
                .filter(|m| m.role == Role::User)
                .find_map(|m| average_re().captures(&m.content))
                .and_then(|caps| caps[1].parse::<f64>().ok());
            return Ok(match last {
                Some(avg) => spec.clamp(spec.multiplier() * avg),
                None => spec.midpoint(),
            });
        }
        let v = match c.kind() {
            GameKind::Pbcg => {
                let spec = c.pbcg_spec().expect("pbcg condition");
                synthetic::ch_pbcg(&spec, self.tau, self.k_max, self.alpha, 1, &mut rng)?[0]
            }
            GameKind::Gg => {
                let round = canonical_gg_rounds()[req.round - 1];
                synthetic::ch_gg(&[round], self.tau, self.k_max, self.alpha, &mut rng)?[0].value
            }
            GameKind::Mrg => {
                let v = c.mrg_variant().expect("mrg condition");
                synthetic::ch_mrg(v, self.tau, self.k_max, 1, &mut rng)?[0]
            }
        };
        Ok(v)
    }
}

impl ChatServiceClient for SyntheticClient {
    fn send(&self, request: &ChatRequest) -> Result<String, ChatError> {
        let v = self.choose(request).map_err(|e| ChatError::fatal(e.to_string()))?;
        // Repeated-game replies keep full precision so the group follows the
        // best-reply path closely.
        let shown = if request.condition.is_repeated() { v.to_string() } else { format_number(v) };
        Ok(format!("My final answer is [{shown}]."))
    }
}
