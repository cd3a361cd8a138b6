use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

impl Role {
    pub fn as_str(&self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
            Role::Assistant => "assistant",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// Append-only message history of one subject.
///
/// Starts with a system message; every assistant reply must answer at least
/// one user message, and a user turn may span several messages (feedback then
/// the next round prompt).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ChatSession {
    messages: Vec<Message>,
}

impl ChatSession {
    pub fn new(system: impl Into<String>) -> Self {
        Self { messages: vec![Message::system(system)] }
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn push_user(&mut self, msg: Message) -> Result<()> {
        if msg.role != Role::User {
            return Err(Error::Invalid("expected a user message".into()));
        }
        self.messages.push(msg);
        Ok(())
    }

    pub fn push_assistant(&mut self, content: impl Into<String>) -> Result<()> {
        if self.messages.last().map(|m| m.role) != Some(Role::User) {
            return Err(Error::Invalid("assistant reply without a pending user message".into()));
        }
        self.messages.push(Message::assistant(content));
        Ok(())
    }

    /// True when the last message awaits a reply.
    pub fn awaiting_reply(&self) -> bool {
        self.messages.last().map(|m| m.role) == Some(Role::User)
    }

    pub fn into_messages(self) -> Vec<Message> {
        self.messages
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_rules() {
        let mut s = ChatSession::new("sys");
        assert!(s.push_assistant("x").is_err());
        s.push_user(Message::user("feedback")).unwrap();
        s.push_user(Message::user("Round 2.")).unwrap();
        assert!(s.awaiting_reply());
        s.push_assistant("[3]").unwrap();
        assert!(s.push_assistant("again").is_err());
        assert!(s.push_user(Message::assistant("x")).is_err());
        assert_eq!(s.messages().len(), 4);
    }
}
