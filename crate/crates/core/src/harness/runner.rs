//! Experiment sessions against a chat service: one-shot games, the
//! 16-round guessing game, repeated beauty contests in groups, and the
//! understanding battery.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::client::{send_with_retry, ChatError, ChatRequest, ChatServiceClient, RetryPolicy, TokenBucket};
use super::parse::parse_answer;
use super::prompts::{render_prompt, system_prompt, understanding_prompt};
use super::session::{ChatSession, Message};
use super::transcript::{
    SessionStatus, SessionTranscript, TranscriptEvent, TranscriptHeader, TRANSCRIPT_SCHEMA_VERSION,
};
use crate::agents::RoundFeedback;
use crate::error::Error;
use crate::games::understanding::{battery, grade_answer};
use crate::games::Condition;
use crate::store::{is_coherent, ResponseDataset, ResponseRow, StoreError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Plan(#[from] Error),
    #[error("provider: {0}")]
    Provider(#[from] ChatError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// Sampling temperature: a value, or whatever the provider uses when none
/// is sent (written `"provider-default"`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Temperature {
    Fixed(f64),
    ProviderDefault,
}

impl Default for Temperature {
    fn default() -> Self {
        Temperature::Fixed(0.5)
    }
}

impl Temperature {
    pub fn value(&self) -> Option<f64> {
        match self {
            Temperature::Fixed(t) => Some(*t),
            Temperature::ProviderDefault => None,
        }
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Temperature::Fixed(t) => write!(f, "{t}"),
            Temperature::ProviderDefault => f.write_str("provider-default"),
        }
    }
}

impl std::str::FromStr for Temperature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "provider-default" {
            return Ok(Temperature::ProviderDefault);
        }
        s.parse()
            .map(Temperature::Fixed)
            .map_err(|_| Error::Invalid(format!("temperature {s:?} is neither a number nor \"provider-default\"")))
    }
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Temperature::Fixed(t) => s.serialize_f64(*t),
            Temperature::ProviderDefault => s.serialize_str("provider-default"),
        }
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(t) => Ok(Temperature::Fixed(t)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Provider-facing settings shared by experiments and the battery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub model: String,
    #[serde(default)]
    pub temperature: Temperature,
    /// Sessions run at once.
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub requests_per_second: Option<f64>,
    #[serde(default)]
    pub retry: RetryPolicy,
    /// Times a turn is asked before an unusable answer fails the session.
    #[serde(default = "default_answer_attempts")]
    pub answer_attempts: usize,
}

fn default_workers() -> usize {
    4
}

fn default_answer_attempts() -> usize {
    3
}

fn default_repetitions() -> usize {
    100
}

impl RunSettings {
    pub fn new(model: impl Into<String>) -> Self {
        Self {
            model: model.into(),
            temperature: Temperature::default(),
            workers: default_workers(),
            requests_per_second: None,
            retry: RetryPolicy::default(),
            answer_attempts: default_answer_attempts(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.workers == 0 {
            return Err(Error::Invalid("workers must be at least 1".into()));
        }
        if self.answer_attempts == 0 {
            return Err(Error::Invalid("answer attempts must be at least 1".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(Error::Invalid("retry attempts must be at least 1".into()));
        }
        if let Temperature::Fixed(t) = self.temperature {
            if !(0.0..=2.0).contains(&t) {
                return Err(Error::Invalid(format!("temperature {t} outside [0, 2]")));
            }
        }
        if let Some(r) = self.requests_per_second {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Invalid(format!("request rate {r} must be positive")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub condition: Condition,
    /// Usable subjects wanted (groups, for repeated games).
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Rounds per session; defaults to the condition's full length.
    #[serde(default)]
    pub rounds: Option<usize>,
    /// Seeds the tie-breaks of repeated games.
    #[serde(default)]
    pub seed: u64,
    /// Extra sessions allowed to replace unusable ones; defaults to the
    /// number of repetitions.
    #[serde(default)]
    pub max_extra_sessions: Option<usize>,
    #[serde(flatten)]
    pub settings: RunSettings,
}

impl ExperimentPlan {
    pub fn new(condition: Condition, model: impl Into<String>) -> Self {
        Self {
            condition,
            repetitions: default_repetitions(),
            rounds: None,
            seed: 0,
            max_extra_sessions: None,
            settings: RunSettings::new(model),
        }
    }

    pub fn rounds(&self) -> usize {
        self.rounds.unwrap_or(self.condition.rounds())
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.settings.validate()?;
        if self.repetitions == 0 {
            return Err(Error::Invalid("repetitions must be at least 1".into()));
        }
        let r = self.rounds();
        if r == 0 || r > self.condition.rounds() {
            return Err(Error::Invalid(format!(
                "{} has rounds 1..={}, got {r}",
                self.condition,
                self.condition.rounds()
            )));
        }
        if self.condition.is_repeated() {
            let spec = self.condition.pbcg_spec().expect("pbcg condition");
            if spec.n_players != Some(11) {
                return Err(Error::Invalid("repeated groups have 11 players".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub planned: usize,
    pub complete: usize,
    pub incoherent: usize,
    pub failed: usize,
    pub sessions: usize,
}

impl RunSummary {
    pub fn shortfall(&self) -> usize {
        self.planned.saturating_sub(self.complete)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub dataset: ResponseDataset,
    pub transcripts: Vec<SessionTranscript>,
    pub summary: RunSummary,
}

/// What one turn produced.
enum Turn {
    Answer(f64),
    Unusable(String),
    Provider(ChatError),
}

struct Runner<'a> {
    condition: Condition,
    settings: &'a RunSettings,
    client: &'a dyn ChatServiceClient,
    limiter: Option<TokenBucket>,
}

/// One subject's live state.
struct Subject {
    session: ChatSession,
    transcript: SessionTranscript,
}

impl Subject {
    fn new(header: TranscriptHeader, system: &str) -> Self {
        let mut transcript = SessionTranscript::new(header);
        transcript
            .events
            .push(TranscriptEvent::Message { role: super::session::Role::System, content: system.to_string() });
        Self { session: ChatSession::new(system), transcript }
    }

    fn push_user(&mut self, msg: Message) {
        self.transcript.events.push(TranscriptEvent::Message { role: msg.role, content: msg.content.clone() });
        self.session.push_user(msg).expect("user message");
    }

    fn finish(&mut self, status: SessionStatus, reason: Option<String>) {
        self.transcript.events.push(TranscriptEvent::Status { status, reason });
    }
}

/// Transcripts and rows of one unit of work: a subject, or a whole group.
struct Unit {
    transcripts: Vec<SessionTranscript>,
    rows: Vec<ResponseRow>,
    status: SessionStatus,
}

impl<'a> Runner<'a> {
    fn new(condition: Condition, settings: &'a RunSettings, client: &'a dyn ChatServiceClient) -> Self {
        let limiter = settings.requests_per_second.map(|r| TokenBucket::new(r, 1));
        Self { condition, settings, client, limiter }
    }

    fn header(&self, session_id: String) -> TranscriptHeader {
        TranscriptHeader {
            schema_version: TRANSCRIPT_SCHEMA_VERSION,
            session_id,
            condition: self.condition,
            question_id: None,
            model: self.settings.model.clone(),
            temperature: self.settings.temperature.value(),
            group: None,
            seat: None,
        }
    }

    fn request(&self, subject: &Subject, round: usize, attempt: usize) -> ChatRequest {
        ChatRequest {
            session_id: subject.transcript.header.session_id.clone(),
            condition: self.condition,
            round,
            attempt,
            model: self.settings.model.clone(),
            temperature: self.settings.temperature.value(),
            messages: subject.session.messages().to_vec(),
        }
    }

    fn send(&self, req: &ChatRequest) -> Result<String, ChatError> {
        send_with_retry(self.client, req, &self.settings.retry, self.limiter.as_ref())
    }

    /// Asks for a numeric answer, re-asking while the reply is unusable.
    /// Rejected replies stay out of the history.
    fn ask(&self, s: &mut Subject, round: usize, accept: impl Fn(f64) -> Result<(), String>) -> Turn {
        let mut last = String::new();
        for attempt in 0..self.settings.answer_attempts {
            let text = match self.send(&self.request(s, round, attempt)) {
                Ok(t) => t,
                Err(e) => return Turn::Provider(e),
            };
            let verdict = parse_answer(&text).map_err(|e| e.to_string()).and_then(|v| accept(v).map(|_| v));
            match verdict {
                Ok(v) => {
                    s.transcript.events.push(TranscriptEvent::Reply {
                        round,
                        attempt,
                        content: text.clone(),
                        accepted: true,
                        reason: None,
                    });
                    s.session.push_assistant(text).expect("pending user message");
                    return Turn::Answer(v);
                }
                Err(reason) => {
                    s.transcript.events.push(TranscriptEvent::Reply {
                        round,
                        attempt,
                        content: text,
                        accepted: false,
                        reason: Some(reason.clone()),
                    });
                    last = reason;
                }
            }
        }
        Turn::Unusable(last)
    }

    fn row(&self, subject: &str, round: usize, value: f64, incoherent: bool) -> ResponseRow {
        ResponseRow {
            source: self.settings.model.clone(),
            condition: self.condition,
            subject: subject.to_string(),
            round,
            value,
            temperature: self.settings.temperature.value(),
            timestamp: None,
            incoherent,
        }
    }

    /// A one-shot or guessing-game subject, with no feedback between rounds.
    fn run_subject(&self, index: usize, rounds: usize) -> Result<Unit, ChatError> {
        let c = self.condition;
        let name = format!("s{:04}", index + 1);
        let mut s = Subject::new(self.header(format!("{c}/{name}")), system_prompt(c));
        let mut rows = Vec::new();
        let mut stop = None;
        for round in 1..=rounds {
            for m in render_prompt(c, round, None).expect("validated plan") {
                s.push_user(m);
            }
            match self.ask(&mut s, round, |_| Ok(())) {
                Turn::Answer(v) => {
                    let incoherent = !is_coherent(c, round, v);
                    s.transcript.events.push(TranscriptEvent::Choice { round, value: v, incoherent });
                    rows.push(self.row(&name, round, v, incoherent));
                }
                Turn::Unusable(reason) => {
                    stop = Some(format!("round {round}: {reason}"));
                    break;
                }
                Turn::Provider(e) if !e.is_retryable() => return Err(e),
                Turn::Provider(e) => {
                    stop = Some(format!("round {round}: {e}"));
                    break;
                }
            }
        }
        let status = match stop {
            Some(_) => SessionStatus::Failed,
            None if rows.iter().any(|r| r.incoherent) => SessionStatus::Incoherent,
            None => SessionStatus::Complete,
        };
        s.finish(status, stop);
        Ok(Unit { transcripts: vec![s.transcript], rows, status })
    }

    /// One repeated beauty contest group. Every player sees only the
    /// average, the target and its own result after each round.
    fn run_group(&self, index: usize, rounds: usize, seed: u64) -> Result<Unit, ChatError> {
        let c = self.condition;
        let spec = c.pbcg_spec().expect("pbcg condition");
        let n = spec.n_players.expect("validated plan") as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let names: Vec<String> = (0..n).map(|seat| format!("g{:03}-p{:02}", index + 1, seat + 1)).collect();
        let mut subjects: Vec<Subject> = names
            .iter()
            .enumerate()
            .map(|(seat, name)| {
                let mut h = self.header(format!("{c}/{name}"));
                h.group = Some(index + 1);
                h.seat = Some(seat + 1);
                Subject::new(h, system_prompt(c))
            })
            .collect();
        let mut feedback: Vec<Option<RoundFeedback>> = vec![None; n];
        let mut rows = Vec::new();
        let mut stop: Option<(usize, String)> = None;
        let accept = |v: f64| {
            if spec.contains(v) {
                Ok(())
            } else {
                Err(format!("{v} outside [{}, {}]", spec.lo, spec.hi))
            }
        };
        'rounds: for round in 1..=rounds {
            let mut choices = Vec::with_capacity(n);
            for (seat, s) in subjects.iter_mut().enumerate() {
                for m in render_prompt(c, round, feedback[seat].as_ref()).expect("validated plan") {
                    s.push_user(m);
                }
                match self.ask(s, round, accept) {
                    Turn::Answer(v) => {
                        s.transcript.events.push(TranscriptEvent::Choice { round, value: v, incoherent: false });
                        rows.push(self.row(&names[seat], round, v, false));
                        choices.push(v);
                    }
                    Turn::Unusable(reason) => {
                        stop = Some((seat, format!("round {round}: {reason}")));
                        break 'rounds;
                    }
                    Turn::Provider(e) if !e.is_retryable() => return Err(e),
                    Turn::Provider(e) => {
                        stop = Some((seat, format!("round {round}: {e}")));
                        break 'rounds;
                    }
                }
            }
            let outcome = spec.resolve(&choices, &mut rng).expect("choices checked against the domain");
            for (seat, s) in subjects.iter_mut().enumerate() {
                let fb = RoundFeedback {
                    round,
                    average: outcome.statistic_value,
                    target: outcome.target,
                    won: seat == outcome.winner,
                };
                s.transcript.events.push(TranscriptEvent::Feedback(fb));
                feedback[seat] = Some(fb);
            }
        }
        let status = if stop.is_some() { SessionStatus::Failed } else { SessionStatus::Complete };
        for (seat, s) in subjects.iter_mut().enumerate() {
            let reason =
                stop.as_ref().map(
                    |(bad, why)| {
                        if *bad == seat {
                            why.clone()
                        } else {
                            format!("group member {} failed", bad + 1)
                        }
                    },
                );
            s.finish(status, reason);
        }
        Ok(Unit { transcripts: subjects.into_iter().map(|s| s.transcript).collect(), rows, status })
    }
}

fn pool(workers: usize) -> HarnessResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Plan(Error::Invalid(format!("worker pool: {e}"))))
}

/// Runs a plan to completion. Sessions that end unusable (unparseable,
/// failed, or with answers outside the game's domain) are kept, flagged,
/// and replaced by fresh sessions until the planned number of usable ones
/// is reached or the extra-session budget runs out.
///
/// Session ids are assigned in order and every random draw is seeded, so a
/// replayed run reproduces its output exactly.
pub fn run_experiment(plan: &ExperimentPlan, client: &dyn ChatServiceClient) -> HarnessResult<ExperimentOutput> {
    plan.validate()?;
    let runner = Runner::new(plan.condition, &plan.settings, client);
    let rounds = plan.rounds();
    let budget = plan.repetitions + plan.max_extra_sessions.unwrap_or(plan.repetitions);
    let workers = pool(plan.settings.workers)?;
    let mut summary = RunSummary { planned: plan.repetitions, ..RunSummary::default() };
    let mut dataset = ResponseDataset::new();
    let mut transcripts = Vec::new();
    let mut next = 0;
    while summary.complete < plan.repetitions && next < budget {
        let batch = (plan.repetitions - summary.complete).min(budget - next);
        let units: Vec<Result<Unit, ChatError>> = workers.install(|| {
            (next..next + batch)
                .into_par_iter()
                .map(|i| {
                    if plan.condition.is_repeated() {
                        runner.run_group(i, rounds, plan.seed)
                    } else {
                        runner.run_subject(i, rounds)
                    }
                })
                .collect()
        });
        next += batch;
        for unit in units {
            let unit = unit?;
            match unit.status {
                SessionStatus::Complete => summary.complete += 1,
                SessionStatus::Incoherent => summary.incoherent += 1,
                SessionStatus::Failed => summary.failed += 1,
            }
            let usable = unit.status == SessionStatus::Complete;
            for mut row in unit.rows {
                row.incoherent |= !usable;
                dataset.push(row)?;
            }
            summary.sessions += unit.transcripts.len();
            transcripts.extend(unit.transcripts);
        }
    }
    if summary.shortfall() > 0 {
        log::warn!(
            "{}: {} of {} planned sessions usable after {} attempts",
            plan.condition,
            summary.complete,
            plan.repetitions,
            next
        );
    }
    Ok(ExperimentOutput { dataset, transcripts, summary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionReport {
    pub question_id: String,
    pub asked: usize,
    pub passed: usize,
    pub pass_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnderstandingReport {
    pub condition: Condition,
    pub model: String,
    pub questions: Vec<QuestionReport>,
    pub transcripts: Vec<SessionTranscript>,
}

/// Asks each of the condition's understanding questions `reps` times, each
/// in a fresh session with no earlier answers, and grades the replies.
/// A reply the service never delivered counts as a failed answer.
pub fn run_understanding_battery(
    condition: Condition,
    client: &dyn ChatServiceClient,
    reps: usize,
    settings: &RunSettings,
) -> HarnessResult<UnderstandingReport> {
    settings.validate()?;
    if reps == 0 {
        return Err(Error::Invalid("repetitions must be at least 1".into()).into());
    }
    let runner = Runner::new(condition, settings, client);
    let questions = battery(condition);
    let jobs: Vec<(usize, usize)> = (0..questions.len()).flat_map(|q| (0..reps).map(move |r| (q, r))).collect();
    let results: Vec<Result<(bool, SessionTranscript), ChatError>> = pool(settings.workers)?.install(|| {
        jobs.par_iter()
            .map(|&(qi, rep)| {
                let q = &questions[qi];
                let mut h = runner.header(format!("{}/r{:02}", q.id, rep + 1));
                h.question_id = Some(q.id.clone());
                let mut s = Subject::new(h, system_prompt(condition));
                s.push_user(understanding_prompt(&q.id).expect("catalogued question"));
                let passed = match runner.send(&runner.request(&s, 1, 0)) {
                    Ok(text) => {
                        let grade = grade_answer(q, &text);
                        s.transcript.events.push(TranscriptEvent::Reply {
                            round: 1,
                            attempt: 0,
                            content: text,
                            accepted: true,
                            reason: grade.reason.clone(),
                        });
                        s.finish(SessionStatus::Complete, None);
                        grade.passed
                    }
                    Err(e) if !e.is_retryable() => return Err(e),
                    Err(e) => {
                        s.finish(SessionStatus::Failed, Some(e.to_string()));
                        false
                    }
                };
                Ok((passed, s.transcript))
            })
            .collect()
    });
    let mut reports: Vec<QuestionReport> = questions
        .iter()
        .map(|q| QuestionReport { question_id: q.id.clone(), asked: 0, passed: 0, pass_rate: 0.0 })
        .collect();
    let mut transcripts = Vec::with_capacity(jobs.len());
    for (&(qi, _), res) in jobs.iter().zip(results) {
        let (passed, t) = res?;
        reports[qi].asked += 1;
        reports[qi].passed += passed as usize;
        transcripts.push(t);
    }
    for r in &mut reports {
        r.pass_rate = r.passed as f64 / r.asked as f64;
    }
    Ok(UnderstandingReport { condition, model: settings.model.clone(), questions: reports, transcripts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::client::{ReplayClient, ScriptedClient};

    fn plan(c: Condition, reps: usize) -> ExperimentPlan {
        let mut p = ExperimentPlan::new(c, "mock");
        p.repetitions = reps;
        p.settings.retry = RetryPolicy::immediate();
        p
    }

    #[test]
    fn constant_client_fills_the_plan() {
        let out = run_experiment(&plan(Condition::PbcgBaseline, 100), &ScriptedClient::constant("[0]")).unwrap();
        assert_eq!(out.dataset.values(Condition::PbcgBaseline, None), vec![0.0; 100]);
        assert_eq!(out.summary.complete, 100);
        assert_eq!(out.transcripts.len(), 100);
        assert_eq!(out.transcripts[0].messages().len(), 3);
    }

    #[test]
    fn incoherent_sessions_are_topped_up() {
        // Every third session answers out of range.
        let client = ScriptedClient::from_fn(|r| {
            let n: usize = r.session_id.rsplit('s').next().unwrap().parse().unwrap();
            Ok(if n.is_multiple_of(3) { "[150]".into() } else { "[20]".into() })
        });
        let out = run_experiment(&plan(Condition::PbcgBaseline, 10), &client).unwrap();
        assert_eq!(out.summary.complete, 10);
        assert_eq!(out.summary.incoherent, 4);
        assert_eq!(out.dataset.len(), 14);
        assert_eq!(out.dataset.values(Condition::PbcgBaseline, None).len(), 10);
        assert_eq!(out.dataset.rows().iter().filter(|r| r.incoherent).count(), 4);
    }

    #[test]
    fn unparseable_turns_are_reasked_without_touching_history() {
        let client = ScriptedClient::from_fn(|r| Ok(if r.attempt < 2 { "thirty".into() } else { "[30]".into() }));
        let out = run_experiment(&plan(Condition::MrgGame1, 1), &client).unwrap();
        assert_eq!(out.summary.complete, 0);
        let out = run_experiment(&plan(Condition::PbcgBaseline, 1), &client).unwrap();
        let t = &out.transcripts[0];
        assert_eq!(t.messages().len(), 3);
        assert_eq!(t.events.iter().filter(|e| matches!(e, TranscriptEvent::Reply { accepted: false, .. })).count(), 2);
    }

    #[test]
    fn budget_limits_top_up() {
        let mut p = plan(Condition::PbcgBaseline, 3);
        p.max_extra_sessions = Some(2);
        let out = run_experiment(&p, &ScriptedClient::constant("no idea")).unwrap();
        assert_eq!(out.summary.failed, 5);
        assert_eq!(out.summary.shortfall(), 3);
        assert!(out.dataset.is_empty());
    }

    #[test]
    fn fatal_provider_error_aborts() {
        let err = run_experiment(&plan(Condition::PbcgBaseline, 2), &ReplayClient::new()).unwrap_err();
        assert!(matches!(err, HarnessError::Provider(ChatError::Fatal { .. })));
    }

    #[test]
    fn guessing_game_has_sixteen_rounds_without_feedback() {
        let out = run_experiment(&plan(Condition::Gg, 2), &ScriptedClient::constant("[400]")).unwrap();
        assert_eq!(out.dataset.len(), 32);
        let t = &out.transcripts[0];
        assert_eq!(t.messages().len(), 1 + 2 * 16);
        assert!(t.feedback().is_empty());
        assert!(!t.messages().iter().any(|m| m.content.contains("previous round")));
    }

    #[test]
    fn repeated_groups_get_private_feedback() {
        let out =
            run_experiment(&plan(Condition::PbcgRepeatedTwoThirds, 1), &ScriptedClient::constant("[50]")).unwrap();
        assert_eq!(out.transcripts.len(), 11);
        assert_eq!(out.dataset.len(), 110);
        let winners: usize = out.transcripts.iter().map(|t| t.feedback().iter().filter(|f| f.won).count()).sum();
        assert_eq!(winners, 10);
        // Round 2 opens with the feedback message, then the round prompt.
        let msgs = out.transcripts[0].messages();
        assert!(msgs[3].content.starts_with("In the previous round, the average was 50 and the target was 33.33."));
        assert_eq!(msgs[4].content, "Round 2. Please pick one number between 0 and 100 inclusive.");
    }

    #[test]
    fn battery_pass_rates() {
        let s = {
            let mut s = RunSettings::new("mock");
            s.retry = RetryPolicy::immediate();
            s
        };
        let right = ScriptedClient::constant("[14]");
        let report = run_understanding_battery(Condition::MrgGame1, &right, 25, &s).unwrap();
        assert_eq!(report.questions[0].question_id, "mrg-game1/br-1");
        assert_eq!(report.questions[0].pass_rate, 1.0);
        assert_eq!(report.questions[1].pass_rate, 0.0);
        let mixed = ScriptedClient::from_fn(|r| {
            let rep: usize = r.session_id.rsplit("/r").next().unwrap().parse().unwrap();
            Ok(if rep <= 20 { "[14]".into() } else { "[15]".into() })
        });
        let report = run_understanding_battery(Condition::MrgGame1, &mixed, 25, &s).unwrap();
        assert!((report.questions[0].pass_rate - 0.8).abs() < 1e-12);
        assert_eq!(report.transcripts.len(), 25 * 5);
    }

    #[test]
    fn plan_json_accepts_provider_default_temperature() {
        let p: ExperimentPlan =
            serde_json::from_str(r#"{"condition":"gg","model":"x","temperature":"provider-default"}"#).unwrap();
        assert_eq!(p.settings.temperature, Temperature::ProviderDefault);
        assert_eq!(p.repetitions, 100);
        assert_eq!(p.rounds(), 16);
        let back: ExperimentPlan = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        let bad = ExperimentPlan { rounds: Some(17), ..p };
        assert!(bad.validate().is_err());
    }
}
