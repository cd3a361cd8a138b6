//! Two-sample Kolmogorov–Smirnov tests and the dominance verdict built on
//! the two one-sided tests.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Alternative hypothesis, named after how F (the CDF of x) compares to G
/// (the CDF of y) somewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    /// F ≠ G; statistic sup|F − G|.
    TwoSided,
    /// F < G somewhere; statistic D− = sup(G − F).
    Less,
    /// F > G somewhere; statistic D+ = sup(F − G).
    Greater,
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::TwoSided => "two-sided",
            Alternative::Less => "less",
            Alternative::Greater => "greater",
        })
    }
}

impl FromStr for Alternative {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" => Ok(Alternative::TwoSided),
            "less" => Ok(Alternative::Less),
            "greater" => Ok(Alternative::Greater),
            other => Err(Error::Unknown(format!("alternative {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum KsMethod {
    /// Exact when both samples are small and tie-free, else asymptotic.
    Auto,
    /// Kolmogorov limit with the small-sample correction.
    Asymptotic,
    /// Exact null distribution by lattice-path counting (assumes no ties).
    Exact,
    /// Relabeling distribution from seeded random permutations.
    Permutation { draws: usize, seed: u64 },
}

/// Samples with n·m up to this size use the exact distribution under `Auto`.
const EXACT_LIMIT: usize = 10_000;
const SERIES_TERMS: usize = 100;
const SERIES_TOL: f64 = 1e-10;
/// Pooled tie share above which p-values are flagged approximate.
const TIE_FLAG: f64 = 0.1;
/// Slack when comparing statistics that are sums of 1/n and 1/m steps.
const D_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub alternative: Alternative,
    /// The statistic matching the alternative.
    pub statistic: f64,
    pub d_plus: f64,
    pub d_minus: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
    /// The method actually used.
    pub method: KsMethod,
    /// Share of pooled observations that repeat an earlier value.
    pub tie_fraction: f64,
    /// True when ties make the reported p-value approximate.
    pub approximate: bool,
}

/// sup(F − G) and sup(G − F) over the pooled points.
fn sup_differences(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let (mut dp, mut dm) = (0.0f64, 0.0f64);
    while i < x.len() || j < y.len() {
        let t = match (x.get(i), y.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        let diff = i as f64 / n - j as f64 / m;
        dp = dp.max(diff);
        dm = dm.max(-diff);
    }
    // Adding zero turns a −0 from the negation into +0.
    (dp + 0.0, dm + 0.0)
}

fn sorted(v: &[f64], what: &'static str) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Empty(what));
    }
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Invalid(format!("{what} contains NaN")));
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

fn tie_fraction(x: &[f64], y: &[f64]) -> f64 {
    let mut pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let repeats = pooled.windows(2).filter(|w| w[0] == w[1]).count();
    repeats as f64 / pooled.len() as f64
}

/// Kolmogorov survival function Q(λ) = 2 Σ (−1)^{j−1} exp(−2 j² λ²).
///
/// Below λ = 1.18 the alternating series converges slowly, so the
/// equivalent Jacobi theta form of the CDF is summed instead.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for j in 1..=SERIES_TERMS {
            let k = (2 * j - 1) as f64;
            let term = (-k * k * c).exp();
            sum += term;
            if term <= SERIES_TOL * sum {
                break;
            }
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / lambda * sum;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=SERIES_TERMS {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term <= SERIES_TOL * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn asymptotic_p(d: f64, n: usize, m: usize, alternative: Alternative) -> f64 {
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    match alternative {
        Alternative::TwoSided => kolmogorov_sf(lambda),
        _ => (-2.0 * lambda * lambda).exp().min(1.0),
    }
}

/// P(statistic ≥ d) under the null, from the share of the C(n+m, n)
/// equally likely merge orders whose path stays inside the band.
fn exact_p(d: f64, n: usize, m: usize, alternative: Alternative) -> f64 {
    if d <= D_EPS {
        return 1.0;
    }
    let inside = |i: usize, j: usize| {
        let diff = i as f64 / n as f64 - j as f64 / m as f64;
        match alternative {
            Alternative::TwoSided => diff.abs() < d - D_EPS,
            Alternative::Greater => diff < d - D_EPS,
            Alternative::Less => -diff < d - D_EPS,
        }
    };
    // prob[j] after row i: probability a uniform path to (i, j) never left
    // the band, built with the weights i/(i+j) and j/(i+j).
    let mut prob = vec![0.0f64; m + 1];
    prob[0] = 1.0;
    for j in 1..=m {
        prob[j] = if inside(0, j) { prob[j - 1] } else { 0.0 };
    }
    for i in 1..=n {
        prob[0] = if inside(i, 0) { prob[0] } else { 0.0 };
        for j in 1..=m {
            prob[j] = if inside(i, j) {
                let t = (i + j) as f64;
                prob[j] * i as f64 / t + prob[j - 1] * j as f64 / t
            } else {
                0.0
            };
        }
    }
    (1.0 - prob[m]).clamp(0.0, 1.0)
}

fn pick(dp: f64, dm: f64, alternative: Alternative) -> f64 {
    match alternative {
        Alternative::TwoSided => dp.max(dm),
        Alternative::Greater => dp,
        Alternative::Less => dm,
    }
}

fn permutation_p(x: &[f64], y: &[f64], d: f64, alternative: Alternative, draws: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let n = x.len();
    let mut hits = 0usize;
    for _ in 0..draws {
        pooled.shuffle(&mut rng);
        let mut a = pooled[..n].to_vec();
        let mut b = pooled[n..].to_vec();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        let (dp, dm) = sup_differences(&a, &b);
        if pick(dp, dm, alternative) >= d - D_EPS {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (draws + 1) as f64
}

/// Two-sample KS test of x against y.
pub fn ks_two_sample(x: &[f64], y: &[f64], alternative: Alternative, method: KsMethod) -> Result<KsResult> {
    let xs = sorted(x, "first sample")?;
    let ys = sorted(y, "second sample")?;
    let (n, m) = (xs.len(), ys.len());
    let (d_plus, d_minus) = sup_differences(&xs, &ys);
    let statistic = pick(d_plus, d_minus, alternative);
    let ties = tie_fraction(&xs, &ys);
    let method = match method {
        KsMethod::Auto if n * m <= EXACT_LIMIT && ties == 0.0 => KsMethod::Exact,
        KsMethod::Auto => KsMethod::Asymptotic,
        other => other,
    };
    let p_value = match method {
        KsMethod::Asymptotic | KsMethod::Auto => asymptotic_p(statistic, n, m, alternative),
        KsMethod::Exact => exact_p(statistic, n, m, alternative),
        KsMethod::Permutation { draws, seed } => {
            if draws == 0 {
                return Err(Error::Invalid("permutation test needs at least one draw".into()));
            }
            permutation_p(&xs, &ys, statistic, alternative, draws, seed)
        }
    };
    let approximate = ties > TIE_FLAG && !matches!(method, KsMethod::Permutation { .. });
    Ok(KsResult { alternative, statistic, d_plus, d_minus, p_value, n, m, method, tie_fraction: ties, approximate })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    XDominates,
    YDominates,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::XDominates => "x-dominates",
            Verdict::YDominates => "y-dominates",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Both one-sided tests and the verdict they imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub two_sided: KsResult,
    pub less: KsResult,
    pub greater: KsResult,
    pub alpha: f64,
    pub verdict: Verdict,
}

/// First-order stochastic dominance from the one-sided tests: a side
/// dominates only when exactly one of them rejects.
///
/// Rejecting "greater" (F above G) means x sits lower, so y dominates;
/// rejecting "less" means x dominates.
pub fn dominance_verdict(x: &[f64], y: &[f64], alpha: f64, method: KsMethod) -> Result<DominanceReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Invalid(format!("significance level {alpha} not in (0, 1)")));
    }
    let two_sided = ks_two_sample(x, y, Alternative::TwoSided, method)?;
    let less = ks_two_sample(x, y, Alternative::Less, method)?;
    let greater = ks_two_sample(x, y, Alternative::Greater, method)?;
    let verdict = match (less.p_value < alpha, greater.p_value < alpha) {
        (true, false) => Verdict::XDominates,
        (false, true) => Verdict::YDominates,
        _ => Verdict::Inconclusive,
    };
    Ok(DominanceReport { two_sided, less, greater, alpha, verdict })
}
