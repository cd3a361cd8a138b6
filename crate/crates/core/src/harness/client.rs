use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::session::Message;
use super::transcript::{SessionTranscript, TranscriptEvent};
use crate::games::Condition;

/// One completion request. Besides the messages, it names the session turn
/// it belongs to so recorded replies can be replayed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub session_id: String,
    pub condition: Condition,
    /// 1-based round the reply answers.
    pub round: usize,
    /// 0-based answer attempt within the round; unparseable replies are
    /// asked again.
    pub attempt: usize,
    pub model: String,
    /// `None` leaves the provider's default.
    pub temperature: Option<f64>,
    pub messages: Vec<Message>,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChatError {
    #[error("rate limited")]
    RateLimited { retry_after_ms: Option<u64> },
    #[error("transient failure: {message}")]
    Transient { message: String },
    #[error("{message}")]
    Fatal { message: String },
}

impl ChatError {
    pub fn transient(message: impl Into<String>) -> Self {
        ChatError::Transient { message: message.into() }
    }

    pub fn fatal(message: impl Into<String>) -> Self {
        ChatError::Fatal { message: message.into() }
    }

    pub fn is_retryable(&self) -> bool {
        !matches!(self, ChatError::Fatal { .. })
    }
}

/// A chat-completion provider.
pub trait ChatServiceClient: Send + Sync {
    fn send(&self, request: &ChatRequest) -> Result<String, ChatError>;
}

/// Exponential backoff on rate-limit and transient errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 5, initial_backoff_ms: 500, max_backoff_ms: 30_000, multiplier: 2.0 }
    }
}

impl RetryPolicy {
    /// No waiting between attempts.
    pub fn immediate() -> Self {
        Self { initial_backoff_ms: 0, max_backoff_ms: 0, ..Self::default() }
    }

    /// Wait before attempt `n + 1`, after `n` failures (n ≥ 1).
    pub fn backoff(&self, failures: u32) -> Duration {
        let ms = self.initial_backoff_ms as f64 * self.multiplier.powi(failures.saturating_sub(1) as i32);
        Duration::from_millis(ms.min(self.max_backoff_ms as f64) as u64)
    }
}

/// Requests-per-second limit shared by every worker.
#[derive(Debug)]
pub struct TokenBucket {
    rate: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(rate_per_sec: f64, burst: u32) -> Self {
        assert!(rate_per_sec > 0.0, "rate must be positive");
        let capacity = burst.max(1) as f64;
        Self { rate: rate_per_sec, capacity, state: Mutex::new((capacity, Instant::now())) }
    }

    /// Blocks until a token is available and takes it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut state = self.state.lock().expect("token bucket lock");
                let now = Instant::now();
                let (tokens, last) = *state;
                let tokens = (tokens + now.duration_since(last).as_secs_f64() * self.rate).min(self.capacity);
                if tokens >= 1.0 {
                    *state = (tokens - 1.0, now);
                    return;
                }
                *state = (tokens, now);
                Duration::from_secs_f64((1.0 - tokens) / self.rate)
            };
            std::thread::sleep(wait);
        }
    }
}

/// Sends with retries. Fatal errors return at once; others are retried up
/// to the policy's attempt limit and the last error is returned.
pub fn send_with_retry(
    client: &dyn ChatServiceClient,
    request: &ChatRequest,
    policy: &RetryPolicy,
    limiter: Option<&TokenBucket>,
) -> Result<String, ChatError> {
    let mut failures = 0;
    loop {
        if let Some(bucket) = limiter {
            bucket.acquire();
        }
        match client.send(request) {
            Ok(text) => return Ok(text),
            Err(e) if !e.is_retryable() => return Err(e),
            Err(e) => {
                failures += 1;
                if failures >= policy.max_attempts {
                    return Err(e);
                }
                let mut wait = policy.backoff(failures);
                if let ChatError::RateLimited { retry_after_ms: Some(ms) } = e {
                    wait = wait.max(Duration::from_millis(ms));
                }
                log::debug!("{}: {e}; retrying in {wait:?}", request.session_id);
                std::thread::sleep(wait);
            }
        }
    }
}

type Responder = dyn Fn(&ChatRequest) -> Result<String, ChatError> + Send + Sync;

/// Replies computed by a function of the request, for tests and offline
/// simulation.
pub struct ScriptedClient {
    respond: Box<Responder>,
}

impl ScriptedClient {
    pub fn from_fn(f: impl Fn(&ChatRequest) -> Result<String, ChatError> + Send + Sync + 'static) -> Self {
        Self { respond: Box::new(f) }
    }

    /// Always the same reply.
    pub fn constant(reply: impl Into<String>) -> Self {
        let reply = reply.into();
        Self::from_fn(move |_| Ok(reply.clone()))
    }
}

impl ChatServiceClient for ScriptedClient {
    fn send(&self, request: &ChatRequest) -> Result<String, ChatError> {
        (self.respond)(request)
    }
}

/// Replays replies recorded in transcripts, keyed by session, round and
/// attempt.
#[derive(Debug, Clone, Default)]
pub struct ReplayClient {
    replies: HashMap<(String, usize, usize), String>,
}

impl ReplayClient {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, session_id: impl Into<String>, round: usize, attempt: usize, reply: impl Into<String>) {
        self.replies.insert((session_id.into(), round, attempt), reply.into());
    }

    pub fn from_transcripts<'a>(transcripts: impl IntoIterator<Item = &'a SessionTranscript>) -> Self {
        let mut out = Self::new();
        for t in transcripts {
            for ev in &t.events {
                match ev {
                    TranscriptEvent::Reply { round, attempt, content, .. } => {
                        out.record(t.header.session_id.clone(), *round, *attempt, content.clone());
                    }
                    _ => continue,
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.replies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replies.is_empty()
    }
}

impl ChatServiceClient for ReplayClient {
    fn send(&self, request: &ChatRequest) -> Result<String, ChatError> {
        self.replies.get(&(request.session_id.clone(), request.round, request.attempt)).cloned().ok_or_else(|| {
            ChatError::fatal(format!(
                "no recorded reply for {} round {} attempt {}",
                request.session_id, request.round, request.attempt
            ))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicU32, Ordering};
    use std::sync::Arc;

    fn request() -> ChatRequest {
        ChatRequest {
            session_id: "s".into(),
            condition: Condition::PbcgBaseline,
            round: 1,
            attempt: 0,
            model: "m".into(),
            temperature: Some(0.5),
            messages: vec![Message::user("hi")],
        }
    }

    fn flaky(fail_first: u32, err: ChatError) -> (ScriptedClient, Arc<AtomicU32>) {
        let calls = Arc::new(AtomicU32::new(0));
        let c = calls.clone();
        let client = ScriptedClient::from_fn(move |_| {
            let n = c.fetch_add(1, Ordering::SeqCst);
            if n < fail_first {
                Err(err.clone())
            } else {
                Ok("[1]".into())
            }
        });
        (client, calls)
    }

    #[test]
    fn transient_errors_are_retried() {
        let (client, calls) = flaky(4, ChatError::transient("boom"));
        let out = send_with_retry(&client, &request(), &RetryPolicy::immediate(), None);
        assert_eq!(out.unwrap(), "[1]");
        assert_eq!(calls.load(Ordering::SeqCst), 5);
    }

    #[test]
    fn retries_stop_at_the_limit() {
        let (client, calls) = flaky(10, ChatError::RateLimited { retry_after_ms: None });
        let out = send_with_retry(&client, &request(), &RetryPolicy::immediate(), None);
        assert!(matches!(out, Err(ChatError::RateLimited { .. })));
        assert_eq!(calls.load(Ordering::SeqCst), 5);
    }

    #[test]
    fn fatal_errors_are_not_retried() {
        let (client, calls) = flaky(10, ChatError::fatal("bad key"));
        assert!(send_with_retry(&client, &request(), &RetryPolicy::immediate(), None).is_err());
        assert_eq!(calls.load(Ordering::SeqCst), 1);
    }

    #[test]
    fn backoff_grows_and_caps() {
        let p = RetryPolicy::default();
        assert_eq!(p.backoff(1), Duration::from_millis(500));
        assert_eq!(p.backoff(2), Duration::from_millis(1000));
        assert_eq!(p.backoff(20), Duration::from_millis(30_000));
    }

    #[test]
    fn bucket_paces_requests() {
        let bucket = TokenBucket::new(200.0, 1);
        let start = Instant::now();
        for _ in 0..5 {
            bucket.acquire();
        }
        // One token up front, then four more at 5 ms each.
        assert!(start.elapsed() >= Duration::from_millis(18));
    }

    #[test]
    fn replay_misses_are_fatal() {
        let mut replay = ReplayClient::new();
        replay.record("s", 1, 0, "[7]");
        assert_eq!(replay.send(&request()).unwrap(), "[7]");
        let other = ChatRequest { attempt: 1, ..request() };
        assert!(matches!(replay.send(&other), Err(ChatError::Fatal { .. })));
    }
}
