//! Chat-model experiment sessions: prompts, answer parsing, provider
//! clients with retries, and the experiment runner.

mod client;
#[cfg(feature = "live")]
mod live;
mod parse;
pub mod prompts;
mod runner;
mod session;
mod synthetic;
mod transcript;

pub use client::{
    send_with_retry, ChatError, ChatRequest, ChatServiceClient, ReplayClient, RetryPolicy, ScriptedClient, TokenBucket,
};
#[cfg(feature = "live")]
pub use live::HttpChatClient;
pub use parse::{parse_answer, ParseError};
pub use prompts::{render_prompt, system_prompt, understanding_prompt};
pub use runner::{
    run_experiment, run_understanding_battery, ExperimentOutput, ExperimentPlan, HarnessError, HarnessResult,
    QuestionReport, RunSettings, RunSummary, Temperature, UnderstandingReport,
};
pub use session::{ChatSession, Message, Role};
pub use synthetic::SyntheticClient;
pub use transcript::{
    read_transcripts, write_transcripts, SessionStatus, SessionTranscript, TranscriptEvent, TranscriptHeader,
    TRANSCRIPT_SCHEMA_VERSION,
};
