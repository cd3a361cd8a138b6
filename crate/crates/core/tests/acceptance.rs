//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::time::{Duration, Instant};

use hierarch_core::agents::{run_repeated_pbcg, AgentPolicy};
use hierarch_core::estimation::{
    bootstrap_ci, fit_ch_pbcg, fit_levelk_mrg, fit_levelk_pbcg, synthetic, BootstrapOptions, FitOptions,
};
use hierarch_core::games::{canonical_gg_rounds, Fraction, MrgVariant, PbcgSpec};
use hierarch_core::harness::{parse_answer, ParseError};
use hierarch_core::hierarchy::{gg_ch, gg_levelk, poisson_conditional, LadderRow, PredictionLadder};
use hierarch_core::stats::{dominance_verdict, ks_two_sample, Alternative, KsMethod, Verdict};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

// 1, 2: guessing-game tables

fn table_check(fixture: &str, ladders: impl Fn() -> Vec<PredictionLadder>) -> Outcome {
    let start = Instant::now();
    let got: Vec<LadderRow> = ladders().iter().flat_map(PredictionLadder::rows).collect();
    let elapsed = start.elapsed();
    let path = common::fixture_dir(fixture);
    let want: Vec<LadderRow> = csv::Reader::from_path(&path)
        .map_err(|e| e.to_string())?
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    ensure(got.len() == want.len(), || format!("{} rows, fixture has {}", got.len(), want.len()))?;
    for (g, w) in got.iter().zip(&want) {
        ensure((&g.game, g.player, g.rank, g.is_nash) == (&w.game, w.player, w.rank, w.is_nash), || {
            format!("row mismatch: got {g:?}, want {w:?}")
        })?;
        ensure((g.value - w.value).abs() <= 0.01, || {
            format!("{} rank {}: {} vs {}", g.game, g.rank, g.value, w.value)
        })?;
    }
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("{} cells in {elapsed:.2?}", want.len()))
}

fn criterion_1() -> Outcome {
    table_check("gg_levelk_table.csv", || canonical_gg_rounds().iter().map(|r| gg_levelk(r, 20).unwrap().0).collect())
}

fn criterion_2() -> Outcome {
    table_check("gg_ch_tau1.5_table.csv", || {
        canonical_gg_rounds().iter().map(|r| gg_ch(r, 1.5, 5).unwrap().0).collect()
    })
}

// 3: truncated Poisson beliefs

fn criterion_3() -> Outcome {
    let b = poisson_conditional(1.5, 2).map_err(|e| e.to_string())?;
    ensure(b.len() == 2 && (b[0] - 0.4).abs() <= 1e-12 && (b[1] - 0.6).abs() <= 1e-12, || format!("{b:?}"))?;
    Ok(format!("({}, {})", b[0], b[1]))
}

// 4: estimator recovery

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let spec = PbcgSpec::baseline();
    let opts = FitOptions::default();
    let mut worst_share = 0.0f64;
    for truth in [[0.0, 0.5, 0.5, 0.0, 0.0, 0.0], [0.1, 0.3, 0.3, 0.2, 0.05, 0.05]] {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ys = synthetic::levelk_pbcg(&spec, &truth, 8, 1000, &mut rng).map_err(|e| e.to_string())?;
            let fit = fit_levelk_pbcg(&spec, &ys, &opts).map_err(|e| e.to_string())?;
            for (rank, (est, t)) in fit.proportions.iter().zip(&truth).enumerate() {
                let err = (est - t).abs();
                worst_share = worst_share.max(err);
                ensure(err <= 0.05, || format!("level-k {truth:?} seed {seed} rank {rank}: {est:.3}"))?;
            }
        }
    }
    let mut worst_tau = 0.0f64;
    for tau in [0.5, 1.5, 3.0] {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ys = synthetic::ch_pbcg(&spec, tau, 4, 8, 1000, &mut rng).map_err(|e| e.to_string())?;
            let est = fit_ch_pbcg(&spec, &ys, &opts).map_err(|e| e.to_string())?.tau.unwrap_or(f64::NAN);
            let err = (est - tau).abs();
            worst_tau = worst_tau.max(err);
            ensure(err <= 0.2, || format!("CH tau {tau} seed {seed}: estimate {est:.3}"))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!("worst share error {worst_share:.3}, worst tau error {worst_tau:.3}, {elapsed:.1?}"))
}

// 5: money request game against a count-based closed form

/// Maximum log-likelihood of the level-k mixture from counts alone.
///
/// Actions off the ladder all get the random rank's share `f`; ladder
/// actions get `f` plus their rank's weight, so their probability can't
/// fall below `f`. The optimum pools off-ladder actions, then keeps adding
/// the least chosen ladder action while its empirical frequency is below
/// the pooled level.
fn mrg_oracle(counts: &[f64; 10], ladder: &[usize]) -> f64 {
    let n: f64 = counts.iter().sum();
    let mut pooled: Vec<usize> = (0..10).filter(|i| !ladder.contains(i)).collect();
    let mut free: Vec<usize> = ladder.to_vec();
    free.sort_by(|a, b| counts[*a].total_cmp(&counts[*b]));
    let level = |pooled: &[usize]| pooled.iter().map(|&i| counts[i]).sum::<f64>() / (n * pooled.len() as f64);
    while let Some(&next) = free.first() {
        if !pooled.is_empty() && counts[next] / n >= level(&pooled) {
            break;
        }
        pooled.push(next);
        free.remove(0);
    }
    let f = level(&pooled);
    (0..10)
        .filter(|&i| counts[i] > 0.0)
        .map(|i| counts[i] * if pooled.contains(&i) { f.ln() } else { (counts[i] / n).ln() })
        .sum()
}

fn criterion_5() -> Outcome {
    let mut fixtures: Vec<[f64; 10]> = vec![
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 30.0],
        [5.0; 10],
        [1.0, 0.0, 2.0, 0.0, 0.0, 3.0, 9.0, 25.0, 8.0, 4.0],
        [4.0, 4.0, 4.0, 4.0, 4.0, 1.0, 2.0, 10.0, 0.0, 6.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 12.0, 0.0, 0.0, 0.0],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..15 {
        let mut c = [0.0; 10];
        let weights: Vec<f64> = (0..10).map(|_| rng.random::<f64>().powi(3)).collect();
        let total: f64 = weights.iter().sum();
        for _ in 0..200 {
            let mut u = rng.random::<f64>() * total;
            let i = weights.iter().position(|w| {
                u -= w;
                u <= 0.0
            });
            c[i.unwrap_or(9)] += 1.0;
        }
        fixtures.push(c);
    }
    let mut worst = 0.0f64;
    for variant in [MrgVariant::Game1, MrgVariant::Game3] {
        for k_max in [1, 4, 6] {
            let opts = FitOptions { k_max, ..FitOptions::default() };
            // Level k asks for 20 − k, which is action index 9 − k.
            let ladder: Vec<usize> = (0..=k_max).map(|k| 9 - k).collect();
            for counts in &fixtures {
                let responses: Vec<f64> = counts
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &c)| std::iter::repeat_n(11.0 + i as f64, c as usize))
                    .collect();
                let fit = fit_levelk_mrg(variant, &responses, &opts).map_err(|e| e.to_string())?;
                let oracle = mrg_oracle(counts, &ladder);
                let gap = (fit.log_likelihood - oracle).abs();
                worst = worst.max(gap);
                ensure(gap <= 1e-6, || {
                    format!("{variant} K={k_max} counts {counts:?}: fit {} vs oracle {oracle}", fit.log_likelihood)
                })?;
            }
        }
    }
    Ok(format!("{} fixtures x 6 settings, worst gap {worst:.2e}", fixtures.len()))
}

// 6: KS p-values and the dominance verdict

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    (-2.0 * (1.0 - u).ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// sup(F − G) and sup(G − F) over the pooled points, F and G being the
/// empirical CDFs of x and y.
fn ecdf_gaps(x: &[f64], y: &[f64]) -> (f64, f64) {
    let (mut xs, mut ys) = (x.to_vec(), y.to_vec());
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (mut up, mut down) = (0.0f64, 0.0f64);
    for &t in xs.iter().chain(&ys) {
        let f = xs.partition_point(|&v| v <= t) as f64 / xs.len() as f64;
        let g = ys.partition_point(|&v| v <= t) as f64 / ys.len() as f64;
        up = up.max(f - g);
        down = down.max(g - f);
    }
    (up, down)
}

fn permutation_oracle(x: &[f64], y: &[f64], draws: usize, seed: u64) -> [f64; 3] {
    let stats = |(up, down): (f64, f64)| [up.max(down), down, up];
    let observed = stats(ecdf_gaps(x, y));
    let mut pooled: Vec<f64> = x.iter().chain(y).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = [0usize; 3];
    for _ in 0..draws {
        pooled.shuffle(&mut rng);
        let s = stats(ecdf_gaps(&pooled[..x.len()], &pooled[x.len()..]));
        for j in 0..3 {
            if s[j] >= observed[j] - 1e-12 {
                hits[j] += 1;
            }
        }
    }
    hits.map(|h| h as f64 / draws as f64)
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(600 + seed);
        let shift = 0.1 * seed as f64;
        let x: Vec<f64> = (0..50).map(|_| gaussian(&mut rng)).collect();
        let y: Vec<f64> = (0..50).map(|_| gaussian(&mut rng) + shift).collect();
        let oracle = permutation_oracle(&x, &y, 10_000, seed);
        for (alt, want) in [Alternative::TwoSided, Alternative::Less, Alternative::Greater].into_iter().zip(oracle) {
            let got = ks_two_sample(&x, &y, alt, KsMethod::Auto).map_err(|e| e.to_string())?.p_value;
            worst = worst.max((got - want).abs());
            ensure((got - want).abs() <= 0.01, || format!("fixture {seed} {alt}: p {got:.4} vs oracle {want:.4}"))?;
        }
    }

    let low: Vec<f64> = (0..50).map(|i| i as f64).collect();
    let high: Vec<f64> = (0..50).map(|i| 100.0 + i as f64).collect();
    let spread: Vec<f64> = (0..50).map(|i| if i < 25 { i as f64 } else { 175.0 + i as f64 }).collect();
    let middle: Vec<f64> = (0..50).map(|i| 75.0 + i as f64).collect();
    let cases = [
        ("separated", &high, &low, Verdict::XDominates),
        ("separated, swapped", &low, &high, Verdict::YDominates),
        ("identical", &low, &low, Verdict::Inconclusive),
        ("crossing", &spread, &middle, Verdict::Inconclusive),
    ];
    for (name, x, y, want) in cases {
        let r = dominance_verdict(x, y, 0.05, KsMethod::Auto).map_err(|e| e.to_string())?;
        ensure(r.verdict == want, || format!("{name}: {} (want {want})", r.verdict))?;
        // The verdict must follow from the one-sided tests alone.
        let implied = match (r.less.p_value < 0.05, r.greater.p_value < 0.05) {
            (true, false) => Verdict::XDominates,
            (false, true) => Verdict::YDominates,
            _ => Verdict::Inconclusive,
        };
        ensure(implied == r.verdict, || format!("{name}: verdict disagrees with the one-sided tests"))?;
        if name == "crossing" {
            ensure(r.less.p_value < 0.05 && r.greater.p_value < 0.05, || "crossing: both sides should reject".into())?;
        }
    }
    Ok(format!("worst p-value gap {worst:.4} over 30 tests; 4 verdict fixtures"))
}

// 7: bootstrap coverage

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let spec = PbcgSpec::baseline();
    let opts = FitOptions::default();
    let mut hits = 0;
    for trial in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
        let ys = synthetic::ch_pbcg(&spec, 1.5, 4, 8, 500, &mut rng).map_err(|e| e.to_string())?;
        let boot = BootstrapOptions { replicates: 500, level: 0.95, seed: trial };
        let ci = bootstrap_ci(&ys, &boot, |d| fit_ch_pbcg(&spec, d, &opts)).map_err(|e| e.to_string())?;
        let [lo, hi] = ci.intervals["tau"];
        if lo <= 1.5 && 1.5 <= hi {
            hits += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(hits >= 45, || format!("coverage {hits}/50"))?;
    within(elapsed, Duration::from_secs(600))?;
    Ok(format!("coverage {hits}/50 in {elapsed:.1?}"))
}

// 8: repeated game with myopic agents

fn criterion_8() -> Outcome {
    let players = vec![AgentPolicy::myopic(); 11];
    let two_thirds = run_repeated_pbcg(&players, &PbcgSpec::baseline(), 10, 0).map_err(|e| e.to_string())?;
    for (t, avg) in two_thirds.averages().iter().enumerate() {
        let want = 50.0 * (2.0f64 / 3.0).powi(t as i32);
        ensure((avg - want).abs() <= 1e-9, || format!("p=2/3 round {}: {avg} vs {want}", t + 1))?;
    }
    let spec = PbcgSpec { p: Fraction::new(4, 3).unwrap(), ..PbcgSpec::baseline() };
    let four_thirds = run_repeated_pbcg(&players, &spec, 10, 0).map_err(|e| e.to_string())?.averages();
    ensure(four_thirds[3] == 100.0 && four_thirds[2] < 100.0, || format!("p=4/3 averages {four_thirds:?}"))?;
    ensure(four_thirds.windows(2).all(|w| w[1] >= w[0]), || "p=4/3 path is not rising".into())?;
    Ok(format!("round 10 average {:.4}; p=4/3 hits 100 in round 4", two_thirds.averages()[9]))
}

// 9: prompt goldens and answer parsing

fn criterion_9() -> Outcome {
    let bad = common::prompt_mismatches();
    ensure(bad.is_empty(), || bad.join("; "))?;
    let ok = [
        ("My final answer is [33].", 33.0),
        ("[ 12.5 ]", 12.5),
        ("First I thought [50], then [40]. Final: [22]", 22.0),
        ("The answer is [0]", 0.0),
        ("[100]", 100.0),
    ];
    for (text, want) in ok {
        let got = parse_answer(text).map_err(|e| format!("{text:?}: {e}"))?;
        ensure(got == want, || format!("{text:?}: {got} vs {want}"))?;
    }
    let fail = [
        ("I pick 33", ParseError::NoBrackets),
        ("", ParseError::NoBrackets),
        ("[thirty]", ParseError::NotANumber("thirty".into())),
        ("[]", ParseError::NotANumber(String::new())),
    ];
    for (text, want) in fail {
        let got = parse_answer(text);
        ensure(got.as_ref() == Err(&want), || format!("{text:?}: {got:?}, want {want:?}"))?;
    }
    ensure(parse_answer("[inf]").is_err(), || "[inf] accepted".into())?;
    Ok(format!("{} goldens equal; 10 parse fixtures", common::rendered_prompts().len()))
}

// 10: replay end to end

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    common::replay_roundtrip(dir.path())?;
    Ok("collect (replay) + estimate equals expected_fit.json".into())
}

fn main() {
    let criteria: [Check; 10] = [
        ("guessing-game level-k table", criterion_1),
        ("guessing-game CH table at tau 1.5", criterion_2),
        ("truncated Poisson beliefs", criterion_3),
        ("estimator recovery", criterion_4),
        ("money request game closed form", criterion_5),
        ("KS p-values and dominance verdict", criterion_6),
        ("bootstrap coverage", criterion_7),
        ("repeated-game oracle", criterion_8),
        ("prompt goldens and parsing", criterion_9),
        ("replay end to end", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({why})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
