//! Session transcripts, persisted as JSON lines: a header line, then one
//! line per event in the order it happened.

use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::session::{Message, Role};
use crate::agents::RoundFeedback;
use crate::games::Condition;
use crate::store::{StoreError, StoreResult};

pub const TRANSCRIPT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub schema_version: u32,
    pub session_id: String,
    pub condition: Condition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question_id: Option<String>,
    pub model: String,
    pub temperature: Option<f64>,
    /// Repeated games: the group and the subject's seat in it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seat: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionStatus {
    Complete,
    /// Finished, but some answer fell outside the game's domain.
    Incoherent,
    /// Stopped early: unparseable answers or provider errors.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TranscriptEvent {
    /// A system or user message added to the history.
    Message {
        role: Role,
        content: String,
    },
    /// A model reply. Accepted replies join the history; rejected ones are
    /// kept here only, and the turn is asked again.
    Reply {
        round: usize,
        attempt: usize,
        content: String,
        accepted: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
    Choice {
        round: usize,
        value: f64,
        incoherent: bool,
    },
    Feedback(RoundFeedback),
    Status {
        status: SessionStatus,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reason: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub header: TranscriptHeader,
    pub events: Vec<TranscriptEvent>,
}

impl SessionTranscript {
    pub fn new(header: TranscriptHeader) -> Self {
        Self { header, events: Vec::new() }
    }

    /// The message history the model saw, in order.
    pub fn messages(&self) -> Vec<Message> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TranscriptEvent::Message { role, content } => Some(Message { role: *role, content: content.clone() }),
                TranscriptEvent::Reply { content, accepted: true, .. } => Some(Message::assistant(content.clone())),
                _ => None,
            })
            .collect()
    }

    /// Parsed choices by round.
    pub fn choices(&self) -> Vec<(usize, f64)> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TranscriptEvent::Choice { round, value, .. } => Some((*round, *value)),
                _ => None,
            })
            .collect()
    }

    pub fn feedback(&self) -> Vec<RoundFeedback> {
        self.events
            .iter()
            .filter_map(|e| match e {
                TranscriptEvent::Feedback(f) => Some(*f),
                _ => None,
            })
            .collect()
    }

    /// The final status; a transcript without one is still running.
    pub fn status(&self) -> Option<SessionStatus> {
        self.events.iter().rev().find_map(|e| match e {
            TranscriptEvent::Status { status, .. } => Some(*status),
            _ => None,
        })
    }

    /// File name derived from the session id.
    pub fn file_name(&self) -> String {
        let safe: String = self
            .header
            .session_id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
            .collect();
        format!("{safe}.jsonl")
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> StoreResult<()> {
        let io = |e| StoreError::Io { path: PathBuf::new(), source: e };
        writeln!(w, "{}", serde_json::to_string(&self.header)?).map_err(io)?;
        for e in &self.events {
            writeln!(w, "{}", serde_json::to_string(e)?).map_err(io)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> StoreResult<Self> {
        let mut lines = r.lines().enumerate();
        let schema = |line: usize, message: String| StoreError::Schema { line: line as u64 + 1, column: None, message };
        let io = |e| StoreError::Io { path: PathBuf::new(), source: e };
        let (_, first) = lines.next().ok_or_else(|| schema(0, "empty transcript".into()))?;
        let header: TranscriptHeader =
            serde_json::from_str(&first.map_err(io)?).map_err(|e| schema(0, e.to_string()))?;
        if header.schema_version != TRANSCRIPT_SCHEMA_VERSION {
            return Err(schema(0, format!("unsupported transcript version {}", header.schema_version)));
        }
        let mut events = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line).map_err(|e| schema(i, e.to_string()))?);
        }
        Ok(Self { header, events })
    }
}

/// Writes one file per session into `dir`, creating it if needed.
pub fn write_transcripts(dir: &Path, transcripts: &[SessionTranscript]) -> StoreResult<()> {
    let io = |e| StoreError::Io { path: dir.to_path_buf(), source: e };
    std::fs::create_dir_all(dir).map_err(io)?;
    for t in transcripts {
        let path = dir.join(t.file_name());
        let f = std::fs::File::create(&path).map_err(|e| StoreError::Io { path: path.clone(), source: e })?;
        let mut w = std::io::BufWriter::new(f);
        t.write_jsonl(&mut w)?;
        w.flush().map_err(|e| StoreError::Io { path, source: e })?;
    }
    Ok(())
}

/// Reads every `.jsonl` transcript in `dir`, in file-name order.
pub fn read_transcripts(dir: &Path) -> StoreResult<Vec<SessionTranscript>> {
    let io = |e| StoreError::Io { path: dir.to_path_buf(), source: e };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let f = std::fs::File::open(p).map_err(|e| StoreError::Io { path: p.clone(), source: e })?;
            SessionTranscript::read_jsonl(BufReader::new(f)).map_err(|e| match e {
                StoreError::Schema { line, column, message } => {
                    StoreError::Schema { line, column, message: format!("{}: {message}", p.display()) }
                }
                other => other,
            })
        })
        .collect()
}
