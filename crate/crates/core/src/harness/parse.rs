use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ParseError {
    #[error("no [ ] pair in the answer")]
    NoBrackets,
    #[error("bracketed answer {0:?} is not a number")]
    NotANumber(String),
}

/// The number inside the last `[...]` pair of a reply.
pub fn parse_answer(text: &str) -> Result<f64, ParseError> {
    let close = text.rfind(']').ok_or(ParseError::NoBrackets)?;
    let open = text[..close].rfind('[').ok_or(ParseError::NoBrackets)?;
    let inner = text[open + 1..close].trim();
    match inner.parse::<f64>() {
        Ok(v) if v.is_finite() && !inner.contains(char::is_alphabetic) => Ok(v),
        _ => Err(ParseError::NotANumber(inner.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_bracket_wins() {
        assert_eq!(parse_answer("I choose [33]"), Ok(33.0));
        assert_eq!(parse_answer("Maybe [40]... final: [22]"), Ok(22.0));
        assert_eq!(parse_answer("[ 12.5 ]"), Ok(12.5));
        assert_eq!(parse_answer("Maybe [40]... final: [22"), Ok(40.0));
    }

    #[test]
    fn failures() {
        assert_eq!(parse_answer("I choose 33"), Err(ParseError::NoBrackets));
        assert_eq!(parse_answer("] then ["), Err(ParseError::NoBrackets));
        assert_eq!(parse_answer("[thirty]"), Err(ParseError::NotANumber("thirty".into())));
        assert_eq!(parse_answer("[]"), Err(ParseError::NotANumber(String::new())));
        assert!(parse_answer("[inf]").is_err());
        assert!(parse_answer("[NaN]").is_err());
    }
}
