//! Understanding-question battery: question ids, answer keys and grading.
//!
//! Question text lives with the other prompt templates in the harness; this
//! module only knows what counts as a correct answer.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{mrg_best_responses, mrg_points, Condition, GgPlayer, MrgVariant, PbcgSpec};
use crate::error::{Error, Result};

/// The opponents' choices used by every 11-player best-response question.
pub const BR_OPPONENTS: [f64; 10] = [0.0, 80.0, 43.0, 70.0, 21.0, 33.0, 37.0, 18.0, 50.0, 50.0];

/// Limits and targets of the guessing-game understanding questions
/// (you, then her/him).
pub const GG_QUESTION_PLAYERS: (GgPlayer, GgPlayer) =
    (GgPlayer { lower: 200.0, upper: 600.0, target: 1.2 }, GgPlayer { lower: 400.0, upper: 800.0, target: 0.8 });

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnswerKey {
    /// Every number in the answer must belong to the set.
    Integers { accept: BTreeSet<i64> },
    /// Best guess followed by the points it earns.
    GuessAndPoints { guess: f64, points: f64 },
    /// Both interval ends must be named.
    Interval { lo: f64, hi: f64 },
    /// A word answer: some accepted word and no rejected word.
    Words { accept: Vec<String>, reject: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnderstandingQuestion {
    /// `"<condition>/br"`, `"<condition>/br-2"`, `"<condition>/rules-4"`, ...
    pub id: String,
    pub condition: Condition,
    pub key: AnswerKey,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grade {
    pub question_id: String,
    pub passed: bool,
    /// Why an answer failed to parse; `None` when it was gradeable.
    pub reason: Option<String>,
}

fn words(accept: &[&str], reject: &[&str]) -> AnswerKey {
    AnswerKey::Words {
        accept: accept.iter().map(|s| s.to_string()).collect(),
        reject: reject.iter().map(|s| s.to_string()).collect(),
    }
}

fn yes() -> AnswerKey {
    words(&["yes"], &["no"])
}

fn no() -> AnswerKey {
    words(&["no"], &["yes"])
}

fn integers(it: impl IntoIterator<Item = i64>) -> AnswerKey {
    AnswerKey::Integers { accept: it.into_iter().collect() }
}

fn q(condition: Condition, suffix: &str, key: AnswerKey) -> UnderstandingQuestion {
    UnderstandingQuestion { id: format!("{condition}/{suffix}"), condition, key }
}

/// Outcome of the three-player rules question: others chose 90 and 60, you
/// chose 30, so the statistic is 60.
fn three_player_wins(spec: &PbcgSpec) -> bool {
    let target = spec.multiplier() * 60.0;
    let mine = (30.0 - target).abs();
    mine < (60.0 - target).abs() && mine < (90.0 - target).abs()
}

fn pbcg_questions(c: Condition) -> Vec<UnderstandingQuestion> {
    let spec = c.pbcg_spec().expect("pbcg condition");
    let mut out = Vec::new();
    if !c.is_repeated() {
        let mut sized = spec.clone();
        let others: &[f64] = if sized.n_players == Some(2) {
            &[20.0]
        } else {
            sized.n_players = Some(11);
            &BR_OPPONENTS
        };
        let set = sized.best_response_set(others).expect("valid question");
        out.push(q(c, "br", AnswerKey::Integers { accept: set }));
    }
    out.push(q(c, "rules-1", AnswerKey::Interval { lo: spec.lo, hi: spec.hi }));
    out.push(q(c, "rules-2", yes()));
    if let Some(n) = spec.n_players {
        out.push(q(c, "rules-3", integers([n as i64])));
    }
    let outcome = if three_player_wins(&spec) {
        words(&["win", "won", "winner"], &["lose", "lost", "loser"])
    } else {
        words(&["lose", "lost", "loser"], &["win", "won", "winner"])
    };
    out.push(q(c, "rules-4", outcome));
    if c.is_repeated() {
        out.push(q(c, "rules-5", no()));
    }
    out
}

fn gg_questions() -> Vec<UnderstandingQuestion> {
    let c = Condition::Gg;
    let (you, them) = GG_QUESTION_PLAYERS;
    let g1 = you.best_response(500.0);
    let g2 = them.best_response(400.0);
    vec![
        q(c, "br-1", AnswerKey::GuessAndPoints { guess: g1, points: super::gg_points(g1, 500.0, you.target) }),
        q(c, "br-2", AnswerKey::GuessAndPoints { guess: g2, points: super::gg_points(g2, 400.0, them.target) }),
        q(c, "br-3", integers([you.best_response(800.0).round() as i64])),
        q(c, "br-4", integers([them.best_response(600.0).round() as i64])),
        // The first rules question has no single keyed interval: limits
        // change every round.
        q(c, "rules-2", words(&["same"], &["more", "fewer", "less"])),
        q(c, "rules-3", yes()),
        q(c, "rules-4", integers([2])),
        q(c, "rules-5", no()),
    ]
}

fn mrg_questions(c: Condition, v: MrgVariant) -> Vec<UnderstandingQuestion> {
    let br = |other| integers(mrg_best_responses(v, other).expect("in domain"));
    vec![
        q(c, "br-1", br(15)),
        q(c, "br-2", br(11)),
        q(c, "rules-1", AnswerKey::Interval { lo: super::MRG_MIN as f64, hi: super::MRG_MAX as f64 }),
        q(c, "rules-2", integers([2])),
        q(c, "rules-3", integers([mrg_points(v, 19, 20).expect("in domain")])),
    ]
}

/// Questions asked for one condition, in battery order.
pub fn battery(condition: Condition) -> Vec<UnderstandingQuestion> {
    match condition {
        Condition::Gg => gg_questions(),
        Condition::MrgGame1 => mrg_questions(condition, MrgVariant::Game1),
        Condition::MrgGame3 => mrg_questions(condition, MrgVariant::Game3),
        c => pbcg_questions(c),
    }
}

/// Every catalogued question across all conditions.
pub fn catalog() -> Vec<UnderstandingQuestion> {
    Condition::ALL.iter().flat_map(|&c| battery(c)).collect()
}

pub fn find_question(question_id: &str) -> Result<UnderstandingQuestion> {
    let (cond, _) = question_id.split_once('/').ok_or_else(|| Error::Unknown(format!("question {question_id:?}")))?;
    let cond: Condition = cond.parse()?;
    battery(cond)
        .into_iter()
        .find(|q| q.id == question_id)
        .ok_or_else(|| Error::Unknown(format!("question {question_id:?}")))
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d+(?:\.\d+)?").expect("static regex"))
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[a-z]+").expect("static regex"))
}

/// The text inside the last `[...]`, or the whole answer without brackets.
fn graded_span(answer: &str) -> &str {
    if let Some(close) = answer.rfind(']') {
        if let Some(open) = answer[..close].rfind('[') {
            return &answer[open + 1..close];
        }
    }
    answer
}

fn numbers(span: &str) -> Vec<f64> {
    number_re().find_iter(span).filter_map(|m| m.as_str().parse().ok()).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-6
}

/// Grades one answer against a question's key.
pub fn grade_answer(question: &UnderstandingQuestion, answer: &str) -> Grade {
    let span = graded_span(answer);
    let fail =
        |reason: &str| Grade { question_id: question.id.clone(), passed: false, reason: Some(reason.to_string()) };
    let passed = match &question.key {
        AnswerKey::Words { accept, reject } => {
            let lower = span.to_lowercase();
            let found: Vec<&str> = word_re().find_iter(&lower).map(|m| m.as_str()).collect();
            let hit = |set: &[String]| found.iter().any(|w| set.iter().any(|s| s == w));
            if !hit(accept) && !hit(reject) {
                return fail("no recognizable answer word");
            }
            hit(accept) && !hit(reject)
        }
        key => {
            let nums = numbers(span);
            if nums.is_empty() {
                return fail("no number in answer");
            }
            match key {
                AnswerKey::Integers { accept } => {
                    nums.iter().all(|&x| x.fract() == 0.0 && accept.contains(&(x as i64)))
                }
                AnswerKey::GuessAndPoints { guess, points } => {
                    close(nums[0], *guess) && nums[1..].iter().any(|&x| close(x, *points))
                }
                AnswerKey::Interval { lo, hi } => {
                    nums.iter().any(|&x| close(x, *lo)) && nums.iter().any(|&x| close(x, *hi))
                }
                AnswerKey::Words { .. } => unreachable!(),
            }
        }
    };
    Grade { question_id: question.id.clone(), passed, reason: None }
}

/// Looks up a catalogued question and grades the answer.
pub fn grade_understanding(question_id: &str, answer: &str) -> Result<Grade> {
    Ok(grade_answer(&find_question(question_id)?, answer))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pass(id: &str, answer: &str) -> bool {
        grade_understanding(id, answer).unwrap().passed
    }

    fn key_set(id: &str) -> BTreeSet<i64> {
        match find_question(id).unwrap().key {
            AnswerKey::Integers { accept } => accept,
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn pbcg_best_response_keys() {
        assert_eq!(key_set("pbcg-2person/br"), (0..=19).collect());
        assert_eq!(key_set("pbcg-p1_2/br"), [19, 20].into_iter().collect());
        assert_eq!(key_set("pbcg-baseline/br"), (22..=31).collect());
        assert_eq!(key_set("pbcg-p4_3/br"), (51..=62).collect());
        assert_eq!(key_set("pbcg-nunspec/br"), (22..=31).collect());
        assert_eq!(key_set("pbcg-median/br"), (22..=28).collect());
    }

    #[test]
    fn examples() {
        assert!(pass("gg/br-1", "Answer = 600, Points = 300"));
        assert!(pass("gg/br-1", "so [600, 300]"));
        assert!(!pass("gg/br-1", "[600]"));
        assert!(pass("gg/br-2", "[400 and 212 points]"));
        assert!(pass("gg/br-3", "[600]"));
        assert!(pass("gg/br-4", "[480]"));
        assert!(pass("mrg-game1/br-2", "20"));
        assert!(!pass("mrg-game1/br-1", "15"));
        assert!(pass("mrg-game1/br-1", "I pick [14]"));
        assert!(pass("mrg-game1/rules-3", "[39]"));
        assert!(pass("mrg-game3/rules-3", "[37]"));
        assert!(pass("mrg-game3/rules-1", "[11 to 20]"));
    }

    #[test]
    fn last_bracket_is_graded() {
        assert!(pass("pbcg-baseline/br", "maybe [40] ... final [25]"));
        assert!(!pass("pbcg-baseline/br", "maybe [25] ... final [40]"));
    }

    #[test]
    fn word_answers() {
        assert!(pass("pbcg-baseline/rules-4", "[Win]"));
        assert!(!pass("pbcg-baseline/rules-4", "[Lose]"));
        assert!(pass("pbcg-p4_3/rules-4", "You [lose]"));
        assert!(pass("gg/rules-2", "[the same]"));
        assert!(!pass("gg/rules-2", "[more]"));
        assert!(pass("pbcg-repeated-p4_3/rules-5", "[No]"));
        assert!(pass("gg/rules-3", "[Yes]"));
    }

    #[test]
    fn unparseable_answers_fail_with_reason() {
        let g = grade_understanding("mrg-game1/br-1", "fourteen").unwrap();
        assert!(!g.passed);
        assert!(g.reason.is_some());
        let g = grade_understanding("gg/rules-3", "[maybe]").unwrap();
        assert!(!g.passed && g.reason.is_some());
    }

    #[test]
    fn catalog_shape() {
        let all = catalog();
        let ids: BTreeSet<_> = all.iter().map(|q| q.id.clone()).collect();
        assert_eq!(ids.len(), all.len());
        assert!(!ids.contains("pbcg-nunspec/rules-3"));
        assert!(!ids.contains("gg/rules-1"));
        assert!(ids.contains("pbcg-repeated-p2_3/rules-5"));
        assert!(find_question("gg/br-9").is_err());
        assert!(find_question("nothing").is_err());
    }
}
