use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use super::{parse_condition, parse_fraction, parse_game, parse_model, parse_temperature, CliError, CliResult};
use crate::agents::{run_repeated_pbcg, AgentPolicy, MyopicAnchor, PolicyKind, RepeatedGameLog};
use crate::error::Error;
use crate::estimation::{
    aggregate_subject_fits, bootstrap_ci, fit_ch_gg, fit_ch_mrg, fit_ch_pbcg, fit_levelk_gg, fit_levelk_mrg,
    fit_levelk_pbcg, BootstrapOptions, FitOptions, FitResult, ModelKind,
};
use crate::games::{canonical_gg_rounds, Condition, Fraction, GameKind, PbcgSpec, TargetStatistic};
use crate::harness::prompts::format_number;
use crate::harness::{
    read_transcripts, run_experiment, run_understanding_battery, write_transcripts, ChatServiceClient, ExperimentPlan,
    QuestionReport, ReplayClient, SyntheticClient, Temperature,
};
use crate::hierarchy::{gg_ch, gg_levelk, mrg_ch, mrg_levelk, pbcg_ch, pbcg_levelk, PredictionLadder};
use crate::stats::{dominance_verdict, DominanceReport, KsMethod, Verdict};
use crate::store::{read_dataset, write_dataset, ResponseDataset};

/// Version of the JSON documents written by the commands.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Data(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable output") + "\n"
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

// ---------------------------------------------------------------- predict

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlayerChoice {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    Both,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// pbcg, gg or mrg; implied by --condition when omitted.
    #[arg(long, value_parser = parse_game)]
    pub game: Option<GameKind>,
    /// One-shot condition to predict (pbcg-baseline, mrg-game3, ...).
    #[arg(long, value_parser = parse_condition)]
    pub condition: Option<Condition>,
    /// levelk or ch.
    #[arg(long, alias = "table", value_parser = parse_model, default_value = "levelk")]
    pub model: ModelKind,
    #[arg(long, default_value_t = 1.5)]
    pub tau: f64,
    /// Deepest rank; defaults to 20 (guessing game level-k), 5 (guessing
    /// game CH) or 4.
    #[arg(long)]
    pub k: Option<usize>,
    /// Guessing-game player(s) to list.
    #[arg(long, value_enum, default_value = "1")]
    pub player: PlayerChoice,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PredictDoc<'a> {
    schema_version: u32,
    ladders: &'a [PredictionLadder],
}

#[derive(Serialize)]
struct LadderCsvRow<'a> {
    game: &'a str,
    player: u8,
    rank: usize,
    value: String,
    is_nash: bool,
}

fn resolve_game(game: Option<GameKind>, condition: Option<Condition>) -> CliResult<(GameKind, Option<Condition>)> {
    match (game, condition) {
        (Some(g), Some(c)) if c.kind() != g => {
            Err(CliError::Usage(format!("--game {g} conflicts with --condition {c}")))
        }
        (_, Some(c)) => Ok((c.kind(), Some(c))),
        (Some(g), None) => Ok((g, None)),
        (None, None) => Err(CliError::Usage("give --game or --condition".into())),
    }
}

pub fn predict(a: PredictArgs) -> CliResult<()> {
    let (game, condition) = resolve_game(a.game, a.condition)?;
    let k = a.k.unwrap_or(match (game, a.model) {
        (GameKind::Gg, ModelKind::LevelK) => 20,
        (GameKind::Gg, ModelKind::Ch) => 5,
        _ => 4,
    });
    let mut ladders = Vec::new();
    match game {
        GameKind::Pbcg => {
            let spec = condition.unwrap_or(Condition::PbcgBaseline).pbcg_spec().expect("pbcg condition");
            ladders.push(match a.model {
                ModelKind::LevelK => pbcg_levelk(&spec, k)?,
                ModelKind::Ch => pbcg_ch(&spec, a.tau, k)?,
            });
        }
        GameKind::Mrg => {
            let variant = condition.unwrap_or(Condition::MrgGame1).mrg_variant().expect("mrg condition");
            ladders.push(match a.model {
                ModelKind::LevelK => mrg_levelk(variant, k)?,
                ModelKind::Ch => mrg_ch(variant, a.tau, k)?,
            });
        }
        GameKind::Gg => {
            for round in canonical_gg_rounds() {
                let (p1, p2) = match a.model {
                    ModelKind::LevelK => gg_levelk(&round, k)?,
                    ModelKind::Ch => gg_ch(&round, a.tau, k)?,
                };
                match a.player {
                    PlayerChoice::One => ladders.push(p1),
                    PlayerChoice::Two => ladders.push(p2),
                    PlayerChoice::Both => ladders.extend([p1, p2]),
                }
            }
        }
    }
    let text = match a.format {
        Format::Json => to_json(&PredictDoc { schema_version: OUTPUT_SCHEMA_VERSION, ladders: &ladders }),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for ladder in &ladders {
                for row in ladder.rows() {
                    w.serialize(LadderCsvRow {
                        game: &row.game,
                        player: row.player,
                        rank: row.rank,
                        value: format_number(row.value),
                        is_nash: row.is_nash,
                    })
                    .map_err(|e| CliError::Data(e.to_string()))?;
                }
            }
            String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
        }
    };
    emit(a.out.as_deref(), &text)
}

// --------------------------------------------------------------- estimate

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Response dataset (.csv or .json).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_model)]
    pub model: ModelKind,
    /// Checked against the condition when given.
    #[arg(long, value_parser = parse_game)]
    pub game: Option<GameKind>,
    /// Required when the dataset holds more than one condition.
    #[arg(long, value_parser = parse_condition)]
    pub condition: Option<Condition>,
    /// Round of a repeated game to fit (one-shot games have round 1).
    #[arg(long, default_value_t = 1)]
    pub round: usize,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    #[arg(long, default_value_t = 0.0)]
    pub tau_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub tau_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub tau_step: f64,
    /// Bootstrap replicates for the intervals; 0 skips them.
    #[arg(long, default_value_t = 1000)]
    pub bootstrap: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Skip the table on stderr.
    #[arg(long)]
    pub quiet: bool,
}

/// Fits one condition of a dataset. Guessing-game subjects are fitted one
/// by one and averaged; subjects missing a round are skipped.
pub fn fit_dataset(
    ds: &ResponseDataset,
    condition: Condition,
    round: usize,
    model: ModelKind,
    opts: &FitOptions,
    boot: Option<&BootstrapOptions>,
) -> crate::Result<FitResult> {
    match condition.kind() {
        GameKind::Gg => {
            let mut fits = Vec::new();
            for (subject, obs) in ds.gg_subjects() {
                let fit = match model {
                    ModelKind::LevelK => fit_levelk_gg(&obs, opts),
                    ModelKind::Ch => fit_ch_gg(&obs, opts),
                };
                match fit {
                    Ok(f) => fits.push(f),
                    Err(Error::MissingRounds(rounds)) => {
                        log::warn!("subject {subject} skipped: no usable answer for rounds {rounds:?}");
                    }
                    Err(e) => return Err(e),
                }
            }
            aggregate_subject_fits(&fits, boot)
        }
        kind => {
            if round == 0 || round > condition.rounds() {
                return Err(Error::Invalid(format!("{condition} has rounds 1..={}, got {round}", condition.rounds())));
            }
            let values = ds.values(condition, Some(round));
            let fit = |sample: &[f64]| -> crate::Result<FitResult> {
                match kind {
                    GameKind::Pbcg => {
                        let spec = condition.pbcg_spec().expect("pbcg condition");
                        match model {
                            ModelKind::LevelK => fit_levelk_pbcg(&spec, sample, opts),
                            ModelKind::Ch => fit_ch_pbcg(&spec, sample, opts),
                        }
                    }
                    _ => {
                        let variant = condition.mrg_variant().expect("mrg condition");
                        match model {
                            ModelKind::LevelK => fit_levelk_mrg(variant, sample, opts),
                            ModelKind::Ch => fit_ch_mrg(variant, sample, opts),
                        }
                    }
                }
            };
            let mut result = fit(&values)?;
            if let Some(b) = boot {
                result.ci = Some(bootstrap_ci(&values, b, fit)?);
            }
            Ok(result)
        }
    }
}

fn only_condition(ds: &ResponseDataset, given: Option<Condition>, path: &Path) -> CliResult<Condition> {
    if let Some(c) = given {
        return Ok(c);
    }
    let all = ds.conditions();
    match all.len() {
        1 => Ok(*all.iter().next().expect("one condition")),
        0 => Err(CliError::Data(format!("{}: no responses", path.display()))),
        _ => Err(CliError::Usage(format!("{} holds several conditions; pick one with --condition", path.display()))),
    }
}

fn fit_table(fit: &FitResult) -> String {
    let mut out = format!(
        "{} {} (K = {}, n = {}, log-likelihood = {:.3})\n",
        fit.game, fit.model, fit.k_max, fit.n_obs, fit.log_likelihood
    );
    if let Some(tau) = fit.tau {
        out.push_str(&format!("tau = {tau:.3}"));
        if let Some([lo, hi]) = fit.ci.as_ref().and_then(|c| c.intervals.get("tau")) {
            out.push_str(&format!("  [{lo:.3}, {hi:.3}]"));
        }
        out.push('\n');
    }
    if let Some(a) = fit.noise_dispersion {
        out.push_str(&format!("noise alpha = {a}\n"));
    }
    out.push_str("rank    share   interval\n");
    for (rank, p) in fit.ranks.iter().zip(&fit.proportions) {
        let interval = fit
            .ci
            .as_ref()
            .and_then(|c| c.intervals.get(rank))
            .map(|[lo, hi]| format!("[{lo:.3}, {hi:.3}]"))
            .unwrap_or_default();
        out.push_str(&format!("{rank:<7} {p:.3}   {interval}\n"));
    }
    out
}

pub fn estimate(a: EstimateArgs) -> CliResult<()> {
    let ds = read_dataset(&a.input)?;
    let condition = only_condition(&ds, a.condition, &a.input)?;
    if let Some(g) = a.game {
        if g != condition.kind() {
            return Err(CliError::Usage(format!("--game {g} conflicts with condition {condition}")));
        }
    }
    let opts = FitOptions {
        k_max: a.k,
        tau_min: a.tau_min,
        tau_max: a.tau_max,
        tau_step: a.tau_step,
        ..FitOptions::default()
    };
    let boot = (a.bootstrap > 0).then_some(BootstrapOptions { replicates: a.bootstrap, level: a.level, seed: a.seed });
    let fit = fit_dataset(&ds, condition, a.round, a.model, &opts, boot.as_ref())?;
    if !a.quiet {
        eprint!("{}", fit_table(&fit));
    }
    emit(a.out.as_deref(), &to_json(&fit))
}

// --------------------------------------------------------------- simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Agent groups as `kind[:count]`: myopic, myopic-l1, level<k>,
    /// ch<k>@<tau>, nash, uniform. Repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    pub agents: Vec<String>,
    /// JSON array of `{"count": n, "kind": ..., ...}` agent groups.
    #[arg(long)]
    pub population: Option<PathBuf>,
    #[arg(long, value_parser = parse_fraction, default_value = "2/3")]
    pub p: Fraction,
    /// mean or median.
    #[arg(long, value_enum, default_value = "mean")]
    pub statistic: StatisticChoice,
    #[arg(long, default_value_t = 10)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatisticChoice {
    Mean,
    Median,
}

#[derive(Debug, Deserialize)]
struct PopulationEntry {
    #[serde(default = "one")]
    count: usize,
    #[serde(flatten)]
    policy: AgentPolicy,
}

fn one() -> usize {
    1
}

/// Simulation output: the log plus a schema version.
#[derive(Debug, Serialize, Deserialize)]
pub struct SimulationDoc {
    pub schema_version: u32,
    #[serde(flatten)]
    pub log: RepeatedGameLog,
}

fn parse_agent(token: &str) -> CliResult<(AgentPolicy, usize)> {
    let bad = || CliError::Usage(format!("bad agent group {token:?}"));
    let (kind, count) = match token.split_once(':') {
        Some((k, n)) => (k, n.parse::<usize>().map_err(|_| bad())?),
        None => (token, 1),
    };
    let policy = match kind {
        "myopic" => PolicyKind::MyopicBestReply { anchor: MyopicAnchor::Midpoint },
        "myopic-l1" => PolicyKind::MyopicBestReply { anchor: MyopicAnchor::LevelOne },
        "nash" => PolicyKind::Equilibrium,
        "uniform" => PolicyKind::Uniform,
        _ => {
            if let Some(k) = kind.strip_prefix("level") {
                PolicyKind::FixedLevel { k: k.parse().map_err(|_| bad())? }
            } else if let Some(rest) = kind.strip_prefix("ch") {
                let (k, tau) = rest.split_once('@').ok_or_else(bad)?;
                PolicyKind::ChStep { k: k.parse().map_err(|_| bad())?, tau: tau.parse().map_err(|_| bad())? }
            } else {
                return Err(bad());
            }
        }
    };
    Ok((AgentPolicy::new(policy), count))
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let mut groups = Vec::new();
    if let Some(path) = &a.population {
        let entries: Vec<PopulationEntry> = read_json(path)?;
        groups.extend(entries.into_iter().map(|e| (e.policy, e.count)));
    }
    for token in a.agents.iter().filter(|t| !t.is_empty()) {
        groups.push(parse_agent(token)?);
    }
    let policies: Vec<AgentPolicy> = groups.into_iter().flat_map(|(p, n)| std::iter::repeat_n(p, n)).collect();
    if policies.len() < 2 {
        return Err(CliError::Usage("a contest needs at least two agents (--agents or --population)".into()));
    }
    let statistic = match a.statistic {
        StatisticChoice::Mean => TargetStatistic::Mean,
        StatisticChoice::Median => TargetStatistic::Median,
    };
    let spec = PbcgSpec::new(Some(policies.len() as u32), a.p, statistic)?;
    let log = run_repeated_pbcg(&policies, &spec, a.rounds, a.seed)?;
    let text = match a.format {
        Format::Csv => log.to_csv(),
        Format::Json => to_json(&SimulationDoc { schema_version: OUTPUT_SCHEMA_VERSION, log }),
    };
    emit(a.out.as_deref(), &text)
}

// ---------------------------------------------------------------- collect

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Provider {
    /// Answers from earlier transcripts (--replay-dir).
    Replay,
    /// Offline simulated model.
    Synthetic,
    /// An OpenAI-compatible HTTP endpoint (needs the `live` feature).
    OpenaiCompatible,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Experiment plan (JSON); flags below override its fields.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, value_parser = parse_condition)]
    pub condition: Option<Condition>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub model: Option<String>,
    /// A number or `provider-default`.
    #[arg(long, value_parser = parse_temperature)]
    pub temperature: Option<Temperature>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub requests_per_second: Option<f64>,
    #[arg(long, value_enum)]
    pub provider: Provider,
    #[arg(long)]
    pub replay_dir: Option<PathBuf>,
    #[arg(long, default_value = "https://api.openai.com/v1")]
    pub base_url: String,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "OPENAI_API_KEY")]
    pub api_key_env: String,
    /// Run the understanding battery instead of the experiment.
    #[arg(long)]
    pub battery: bool,
    /// Repetitions per battery question.
    #[arg(long, default_value_t = 25)]
    pub reps: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct BatteryDoc<'a> {
    schema_version: u32,
    condition: Condition,
    model: &'a str,
    questions: &'a [QuestionReport],
}

fn build_plan(a: &CollectArgs) -> CliResult<ExperimentPlan> {
    let mut plan = match (&a.plan, a.condition) {
        (Some(path), _) => read_json::<ExperimentPlan>(path)?,
        (None, Some(c)) => ExperimentPlan::new(c, a.model.clone().unwrap_or_default()),
        (None, None) => return Err(CliError::Usage("give --plan or --condition".into())),
    };
    if let Some(c) = a.condition {
        plan.condition = c;
    }
    if let Some(r) = a.repetitions {
        plan.repetitions = r;
    }
    if a.rounds.is_some() {
        plan.rounds = a.rounds;
    }
    if let Some(m) = &a.model {
        plan.settings.model = m.clone();
    }
    if let Some(t) = a.temperature {
        plan.settings.temperature = t;
    }
    if let Some(s) = a.seed {
        plan.seed = s;
    }
    if let Some(w) = a.workers {
        plan.settings.workers = w;
    }
    if a.requests_per_second.is_some() {
        plan.settings.requests_per_second = a.requests_per_second;
    }
    if plan.settings.model.is_empty() {
        plan.settings.model = match a.provider {
            Provider::Synthetic => "synthetic".into(),
            _ => return Err(CliError::Usage("no model named in the plan or with --model".into())),
        };
    }
    plan.validate()?;
    Ok(plan)
}

fn make_client(a: &CollectArgs, seed: u64) -> CliResult<Box<dyn ChatServiceClient>> {
    match a.provider {
        Provider::Replay => {
            let dir =
                a.replay_dir.as_ref().ok_or_else(|| CliError::Usage("--provider replay needs --replay-dir".into()))?;
            let transcripts = read_transcripts(dir)?;
            Ok(Box::new(ReplayClient::from_transcripts(&transcripts)))
        }
        Provider::Synthetic => Ok(Box::new(SyntheticClient { seed, ..SyntheticClient::default() })),
        Provider::OpenaiCompatible => live_client(a),
    }
}

#[cfg(feature = "live")]
fn live_client(a: &CollectArgs) -> CliResult<Box<dyn ChatServiceClient>> {
    let client = crate::harness::HttpChatClient::from_env(&a.base_url, &a.api_key_env)
        .map_err(|e| CliError::Provider(e.to_string()))?;
    Ok(Box::new(client))
}

#[cfg(not(feature = "live"))]
fn live_client(_: &CollectArgs) -> CliResult<Box<dyn ChatServiceClient>> {
    Err(CliError::Usage("this build has no HTTP provider; rebuild with --features live".into()))
}

pub fn collect(a: CollectArgs) -> CliResult<()> {
    let plan = build_plan(&a)?;
    let client = make_client(&a, plan.seed)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| io_err(&a.out_dir, e))?;
    let transcripts_dir = a.out_dir.join("transcripts");
    let write = |name: &str, text: String| {
        let path = a.out_dir.join(name);
        fs::write(&path, text).map_err(|e| io_err(&path, e))
    };
    write("plan.json", to_json(&plan))?;
    if a.battery {
        let report = run_understanding_battery(plan.condition, client.as_ref(), a.reps, &plan.settings)?;
        write_transcripts(&transcripts_dir, &report.transcripts)?;
        return write(
            "understanding.json",
            to_json(&BatteryDoc {
                schema_version: OUTPUT_SCHEMA_VERSION,
                condition: report.condition,
                model: &report.model,
                questions: &report.questions,
            }),
        );
    }
    let output = run_experiment(&plan, client.as_ref())?;
    write_dataset(&output.dataset, &a.out_dir.join("responses.csv"))?;
    write_transcripts(&transcripts_dir, &output.transcripts)?;
    write("summary.json", to_json(&output.summary))?;
    let short = output.summary.shortfall();
    if short > 0 {
        return Err(CliError::Provider(format!(
            "{short} of {} planned units have no usable answers",
            output.summary.planned
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Auto,
    Asymptotic,
    Exact,
    Permutation,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub x: PathBuf,
    #[arg(long)]
    pub y: PathBuf,
    /// Condition taken from both files.
    #[arg(long, value_parser = parse_condition)]
    pub condition: Option<Condition>,
    #[arg(long, value_parser = parse_condition)]
    pub x_condition: Option<Condition>,
    #[arg(long, value_parser = parse_condition)]
    pub y_condition: Option<Condition>,
    /// Only this round; all rounds when omitted.
    #[arg(long)]
    pub round: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: MethodChoice,
    /// Relabelings for the permutation method.
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct CompareDoc {
    schema_version: u32,
    x: String,
    y: String,
    x_condition: Condition,
    y_condition: Condition,
    round: Option<usize>,
    /// `"x"`, `"y"` or `"inconclusive"`.
    more_rational: &'static str,
    #[serde(flatten)]
    report: DominanceReport,
}

/// Whether deeper reasoning moves choices up: only beauty contests with a
/// multiplier above one. Elsewhere the more rational sample sits lower.
fn higher_is_more_rational(c: Condition) -> bool {
    c.pbcg_spec().is_some_and(|s| s.multiplier() > 1.0)
}

pub fn compare(a: CompareArgs) -> CliResult<()> {
    if a.condition.is_some() && (a.x_condition.is_some() || a.y_condition.is_some()) {
        return Err(CliError::Usage("--condition conflicts with --x-condition/--y-condition".into()));
    }
    let method = match a.method {
        MethodChoice::Auto => KsMethod::Auto,
        MethodChoice::Asymptotic => KsMethod::Asymptotic,
        MethodChoice::Exact => KsMethod::Exact,
        MethodChoice::Permutation => KsMethod::Permutation { draws: a.draws, seed: a.seed },
    };
    let xs = read_dataset(&a.x)?;
    let ys = read_dataset(&a.y)?;
    let xc = only_condition(&xs, a.x_condition.or(a.condition), &a.x)?;
    let yc = only_condition(&ys, a.y_condition.or(a.condition), &a.y)?;
    let report = dominance_verdict(&xs.values(xc, a.round), &ys.values(yc, a.round), a.alpha, method)?;
    let more_rational = match (report.verdict, higher_is_more_rational(xc)) {
        (Verdict::Inconclusive, _) => "inconclusive",
        (Verdict::XDominates, true) | (Verdict::YDominates, false) => "x",
        _ => "y",
    };
    eprintln!("two-sided p   not-less p   not-greater p   dominance      more rational");
    eprintln!(
        "{:<13.4} {:<12.4} {:<15.4} {:<14} {}",
        report.two_sided.p_value, report.less.p_value, report.greater.p_value, report.verdict, more_rational
    );
    let doc = CompareDoc {
        schema_version: OUTPUT_SCHEMA_VERSION,
        x: a.x.display().to_string(),
        y: a.y.display().to_string(),
        x_condition: xc,
        y_condition: yc,
        round: a.round,
        more_rational,
        report,
    };
    emit(a.out.as_deref(), &to_json(&doc))
}

// ----------------------------------------------------------------- report

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// FitResult JSON files.
    #[arg(long)]
    pub fit: Vec<PathBuf>,
    /// Response datasets with repeated-game rounds.
    #[arg(long)]
    pub dataset: Vec<PathBuf>,
    /// Simulation JSON logs.
    #[arg(long)]
    pub log: Vec<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Serialize)]
struct ProportionRow<'a> {
    source: &'a str,
    game: GameKind,
    model: ModelKind,
    rank: &'a str,
    proportion: f64,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
}

#[derive(Serialize)]
struct ParameterRow<'a> {
    source: &'a str,
    game: GameKind,
    model: ModelKind,
    parameter: String,
    value: f64,
    ci_lo: Option<f64>,
    ci_hi: Option<f64>,
    log_likelihood: f64,
    n_obs: usize,
}

#[derive(Serialize)]
struct SeriesRow<'a> {
    source: &'a str,
    series: &'a str,
    round: usize,
    average: f64,
    n: usize,
}

fn csv_text<T: Serialize>(header: &[&str], rows: &[T]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header).map_err(|e| CliError::Data(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv"))
}

pub fn report(a: ReportArgs) -> CliResult<()> {
    if a.fit.is_empty() && a.dataset.is_empty() && a.log.is_empty() {
        return Err(CliError::Usage("nothing to report; give --fit, --dataset or --log".into()));
    }
    let fits: Vec<(String, FitResult)> =
        a.fit.iter().map(|p| Ok((stem(p), read_json(p)?))).collect::<CliResult<_>>()?;
    let mut proportions = Vec::new();
    let mut parameters = Vec::new();
    for (source, fit) in &fits {
        let interval = |name: &str| fit.ci.as_ref().and_then(|c| c.intervals.get(name)).copied();
        for (rank, &p) in fit.ranks.iter().zip(&fit.proportions) {
            let ci = interval(rank);
            proportions.push(ProportionRow {
                source,
                game: fit.game,
                model: fit.model,
                rank,
                proportion: p,
                ci_lo: ci.map(|c| c[0]),
                ci_hi: ci.map(|c| c[1]),
            });
        }
        for (name, value) in fit.parameters() {
            let ci = interval(&name);
            parameters.push(ParameterRow {
                source,
                game: fit.game,
                model: fit.model,
                parameter: name,
                value,
                ci_lo: ci.map(|c| c[0]),
                ci_hi: ci.map(|c| c[1]),
                log_likelihood: fit.log_likelihood,
                n_obs: fit.n_obs,
            });
        }
    }

    let mut series: Vec<(String, String, usize, f64, usize)> = Vec::new();
    for path in &a.log {
        let doc: SimulationDoc = read_json(path)?;
        let n = doc.log.spec.n_players.unwrap_or(0) as usize;
        for r in &doc.log.rounds {
            series.push((stem(path), "simulated".into(), r.round, r.average, n));
        }
    }
    for path in &a.dataset {
        let ds = read_dataset(path)?;
        for c in ds.conditions().into_iter().filter(Condition::is_repeated) {
            let mut by_round: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for row in ds.rows().iter().filter(|r| r.condition == c && !r.incoherent) {
                by_round.entry(row.round).or_default().push(row.value);
            }
            for (round, vs) in by_round {
                let avg = vs.iter().sum::<f64>() / vs.len() as f64;
                series.push((stem(path), c.to_string(), round, avg, vs.len()));
            }
        }
    }
    let series_rows: Vec<SeriesRow> = series
        .iter()
        .map(|(source, s, round, average, n)| SeriesRow { source, series: s, round: *round, average: *average, n: *n })
        .collect();

    fs::create_dir_all(&a.out_dir).map_err(|e| io_err(&a.out_dir, e))?;
    let files = [
        (
            "proportions.csv",
            csv_text(&["source", "game", "model", "rank", "proportion", "ci_lo", "ci_hi"], &proportions)?,
        ),
        (
            "parameters.csv",
            csv_text(
                &["source", "game", "model", "parameter", "value", "ci_lo", "ci_hi", "log_likelihood", "n_obs"],
                &parameters,
            )?,
        ),
        ("timeseries.csv", csv_text(&["source", "series", "round", "average", "n"], &series_rows)?),
    ];
    for (name, text) in files {
        let path = a.out_dir.join(name);
        fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn agent_tokens() {
        let (p, n) = parse_agent("myopic:11").unwrap();
        assert_eq!((p, n), (AgentPolicy::myopic(), 11));
        let (p, n) = parse_agent("ch2@1.5").unwrap();
        assert_eq!(p.kind, PolicyKind::ChStep { k: 2, tau: 1.5 });
        assert_eq!(n, 1);
        assert_eq!(parse_agent("level3:2").unwrap().0.kind, PolicyKind::FixedLevel { k: 3 });
        assert!(parse_agent("wizard:2").is_err());
        assert!(parse_agent("myopic:x").is_err());
    }

    #[test]
    fn empty_csv_has_header() {
        let rows: Vec<SeriesRow> = Vec::new();
        assert_eq!(
            csv_text(&["source", "series", "round", "average", "n"], &rows).unwrap(),
            "source,series,round,average,n\n"
        );
    }
}
