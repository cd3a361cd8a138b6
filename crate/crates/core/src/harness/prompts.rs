//! Prompt texts for every catalogued condition and the understanding battery.
//!
//! Fixed texts are stored verbatim under `templates/`; placeholders are
//! written `{name}` and filled here.

use crate::agents::RoundFeedback;
use crate::error::{Error, Result};
use crate::games::understanding::find_question;
use crate::games::{canonical_gg_rounds, Condition, GgRoundSpec, PbcgSpec};

use super::session::Message;

const SYSTEM_ONE_SHOT: &str = include_str!("../../templates/system-one-shot.txt");
const SYSTEM_REPEATED: &str = include_str!("../../templates/system-repeated.txt");
const SYSTEM_GG: &str = include_str!("../../templates/system-gg.txt");

const PBCG_2PERSON: &str = include_str!("../../templates/pbcg-2person.txt");
const PBCG_P1_2: &str = include_str!("../../templates/pbcg-p1_2.txt");
const PBCG_BASELINE: &str = include_str!("../../templates/pbcg-baseline.txt");
const PBCG_P4_3: &str = include_str!("../../templates/pbcg-p4_3.txt");
const PBCG_NUNSPEC: &str = include_str!("../../templates/pbcg-nunspec.txt");
const PBCG_MEDIAN: &str = include_str!("../../templates/pbcg-median.txt");
const PBCG_REPEATED_ROUND1: &str = include_str!("../../templates/pbcg-repeated-round1.txt");
const PBCG_REPEATED_EXAMPLES_P2_3: &str = include_str!("../../templates/pbcg-repeated-examples-p2_3.txt");
const PBCG_REPEATED_EXAMPLES_P4_3: &str = include_str!("../../templates/pbcg-repeated-examples-p4_3.txt");

const GG_INSTRUCTIONS: &str = include_str!("../../templates/gg-instructions.txt");
const GG_ROUND: &str = include_str!("../../templates/gg-round.txt");

const MRG_GAME1: &str = include_str!("../../templates/mrg-game1.txt");
const MRG_GAME3: &str = include_str!("../../templates/mrg-game3.txt");

const UND_PBCG_2PERSON_BR: &str = include_str!("../../templates/understanding-pbcg-2person-br.txt");
const UND_PBCG_P1_2_BR: &str = include_str!("../../templates/understanding-pbcg-p1_2-br.txt");
const UND_PBCG_BASELINE_BR: &str = include_str!("../../templates/understanding-pbcg-baseline-br.txt");
const UND_PBCG_P4_3_BR: &str = include_str!("../../templates/understanding-pbcg-p4_3-br.txt");
const UND_PBCG_NUNSPEC_BR: &str = include_str!("../../templates/understanding-pbcg-nunspec-br.txt");
const UND_PBCG_MEDIAN_BR: &str = include_str!("../../templates/understanding-pbcg-median-br.txt");
const UND_GG_CONTEXT: &str = include_str!("../../templates/understanding-gg-context.txt");
const UND_MRG_GAME1_CONTEXT: &str = include_str!("../../templates/understanding-mrg-game1-context.txt");
const UND_MRG_GAME3_CONTEXT: &str = include_str!("../../templates/understanding-mrg-game3-context.txt");

/// Integers print without a decimal point; other values with at most two
/// decimals and no trailing zeros.
pub fn format_number(x: f64) -> String {
    let rounded = (x * 100.0).round() / 100.0;
    if rounded.fract() == 0.0 {
        return format!("{:.0}", rounded + 0.0);
    }
    let s = format!("{rounded:.2}");
    s.trim_end_matches('0').to_string()
}

fn fill(template: &str, pairs: &[(&str, String)]) -> String {
    let mut out = template.to_string();
    for (key, value) in pairs {
        out = out.replace(&format!("{{{key}}}"), value);
    }
    out
}

pub fn system_prompt(condition: Condition) -> &'static str {
    if condition.is_repeated() {
        SYSTEM_REPEATED
    } else if condition == Condition::Gg {
        SYSTEM_GG
    } else {
        SYSTEM_ONE_SHOT
    }
}

fn pbcg(condition: Condition) -> PbcgSpec {
    condition.pbcg_spec().expect("pbcg condition")
}

fn repeated_round1(condition: Condition) -> String {
    let spec = pbcg(condition);
    let examples = if spec.p.value() > 1.0 { PBCG_REPEATED_EXAMPLES_P4_3 } else { PBCG_REPEATED_EXAMPLES_P2_3 };
    fill(PBCG_REPEATED_ROUND1, &[("p", spec.p.to_string()), ("examples", examples.to_string())])
}

/// Feedback shown to a repeated-game subject after a round.
pub fn feedback_text(feedback: &RoundFeedback) -> String {
    format!(
        "In the previous round, the average was {} and the target was {}. You {} in the previous round.",
        format_number(feedback.average),
        format_number(feedback.target),
        if feedback.won { "won" } else { "lost" }
    )
}

/// The per-round guessing game text, from the subject's seat as player 1.
pub fn gg_round_text(round: &GgRoundSpec) -> String {
    let (you, other) = (round.player1, round.player2);
    fill(
        GG_ROUND,
        &[
            ("round", round.round.to_string()),
            ("lower_you", format_number(you.lower)),
            ("upper_you", format_number(you.upper)),
            ("target_you", format_number(you.target)),
            ("lower_other", format_number(other.lower)),
            ("upper_other", format_number(other.upper)),
            ("target_other", format_number(other.target)),
        ],
    )
}

/// User messages that open `round` (1-based) of a session.
///
/// Repeated beauty contests need the previous round's feedback from round 2
/// on; it arrives as its own message ahead of the round prompt.
pub fn render_prompt(condition: Condition, round: usize, feedback: Option<&RoundFeedback>) -> Result<Vec<Message>> {
    if round == 0 || round > condition.rounds() {
        return Err(Error::Invalid(format!("{condition} has rounds 1..={}, got {round}", condition.rounds())));
    }
    let text = match condition {
        Condition::Pbcg2Person => PBCG_2PERSON.to_string(),
        Condition::PbcgHalf => PBCG_P1_2.to_string(),
        Condition::PbcgBaseline => PBCG_BASELINE.to_string(),
        Condition::PbcgFourThirds => PBCG_P4_3.to_string(),
        Condition::PbcgUnspecifiedN => PBCG_NUNSPEC.to_string(),
        Condition::PbcgMedian => PBCG_MEDIAN.to_string(),
        Condition::MrgGame1 => MRG_GAME1.to_string(),
        Condition::MrgGame3 => MRG_GAME3.to_string(),
        Condition::PbcgRepeatedTwoThirds | Condition::PbcgRepeatedFourThirds => {
            if round == 1 {
                repeated_round1(condition)
            } else {
                let fb = feedback.ok_or_else(|| {
                    Error::Invalid(format!("round {round} of {condition} needs the previous round's feedback"))
                })?;
                return Ok(vec![
                    Message::user(feedback_text(fb)),
                    Message::user(format!("Round {round}. Please pick one number between 0 and 100 inclusive.")),
                ]);
            }
        }
        Condition::Gg => {
            let spec = canonical_gg_rounds()[round - 1];
            if round == 1 {
                format!("{GG_INSTRUCTIONS} {}", gg_round_text(&spec))
            } else {
                gg_round_text(&spec)
            }
        }
    };
    Ok(vec![Message::user(text)])
}

fn pbcg_br_text(condition: Condition) -> Option<&'static str> {
    Some(match condition {
        Condition::Pbcg2Person => UND_PBCG_2PERSON_BR,
        Condition::PbcgHalf => UND_PBCG_P1_2_BR,
        Condition::PbcgBaseline => UND_PBCG_BASELINE_BR,
        Condition::PbcgFourThirds => UND_PBCG_P4_3_BR,
        Condition::PbcgUnspecifiedN => UND_PBCG_NUNSPEC_BR,
        Condition::PbcgMedian => UND_PBCG_MEDIAN_BR,
        _ => return None,
    })
}

const RULES_END: &str = "randomly chosen to win.";

/// The rules part of a beauty contest prompt, without any question.
fn pbcg_rules_context(condition: Condition) -> String {
    match pbcg_br_text(condition) {
        Some(br) => {
            let end = br.find(RULES_END).expect("rules text") + RULES_END.len();
            br[..end].to_string()
        }
        None => {
            let full = repeated_round1(condition);
            let end = full.find(" Round 1.").expect("round marker");
            full[..end].to_string()
        }
    }
}

fn pbcg_rules_question(condition: Condition, n: usize) -> String {
    let spec = pbcg(condition);
    let p = spec.p.to_string();
    let stat = spec.statistic.as_str();
    match n {
        1 => "What numbers can you choose between?".to_string(),
        2 => format!("If the number you choose is closest to {p}'s of the {stat}, do you win the game?"),
        3 => "How many participants are there, including yourself?".to_string(),
        4 => format!(
            "Suppose there are 3 participants, including you, and you have to choose the number closest to {p} of \
             the average. The other 2 participants chose 90 and 60. Suppose you chose 30. Therefore {p}'s of the \
             {stat} is {p}*60={}. Do you win or lose?",
            format_number(spec.multiplier() * 60.0)
        ),
        _ => "Will decisions made in previous rounds have any effect on the current round?".to_string(),
    }
}

fn gg_question(suffix: &str) -> &'static str {
    match suffix {
        "br-1" => {
            "If s/he guesses 500, which of your guesses earns you the most points? How many points would you earn \
             by entering that guess?"
        }
        "br-2" => {
            "If you guess 400, which of her/his guesses earns her/him the most points? How many points would s/he \
             earn by entering that guess?"
        }
        "br-3" => "If s/he guesses 800, which of your guesses earns you the most points?",
        "br-4" => "If your guess is 600, which of her/his guesses earns her/him the most points?",
        "rules-2" => {
            "Do you earn more/fewer/the same points when your guess is too high or too low by the same amount?"
        }
        "rules-3" => "Will the targets, lower limits, and upper limits for each player be known to all players?",
        "rules-4" => "How many participants are there, including yourself?",
        _ => "Will decisions made in previous rounds have any effect on the current round?",
    }
}

fn mrg_question(suffix: &str) -> &'static str {
    match suffix {
        "br-1" => "Suppose your opponent chooses 15. What number from 11 to 20 earns you the most?",
        "br-2" => "Suppose your opponent chooses 11. What number from 11 to 20 earns you the most?",
        "rules-1" => "What numbers can you choose between?",
        "rules-2" => "How many participants are there, including yourself?",
        _ => {
            "Suppose you choose 19 and the participant you have been matched with chooses 20. How many points will \
             you receive?"
        }
    }
}

/// The single user message asking one understanding question in isolation.
pub fn understanding_prompt(question_id: &str) -> Result<Message> {
    let question = find_question(question_id)?;
    let condition = question.condition;
    let (_, suffix) = question_id.split_once('/').expect("validated id");
    let text = match condition {
        Condition::Gg => {
            let context = if suffix.starts_with("br") {
                UND_GG_CONTEXT
            } else {
                let end = UND_GG_CONTEXT.find("\n\nSuppose that:").expect("gg context");
                &UND_GG_CONTEXT[..end]
            };
            format!("{context}\n\n{}", gg_question(suffix))
        }
        Condition::MrgGame1 => format!("{UND_MRG_GAME1_CONTEXT}\n\n{}", mrg_question(suffix)),
        Condition::MrgGame3 => format!("{UND_MRG_GAME3_CONTEXT}\n\n{}", mrg_question(suffix)),
        c if suffix == "br" => pbcg_br_text(c).expect("one-shot condition").to_string(),
        c => {
            let n: usize = suffix
                .strip_prefix("rules-")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Unknown(format!("question {question_id:?}")))?;
            format!("{}\n\n{}", pbcg_rules_context(c), pbcg_rules_question(c, n))
        }
    };
    Ok(Message::user(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(format_number(30.0), "30");
        assert_eq!(format_number(40.0), "40");
        assert_eq!(format_number(1.3), "1.3");
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(33.333333), "33.33");
        assert_eq!(format_number(26.666667), "26.67");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(99.999), "100");
    }

    #[test]
    fn feedback_wording() {
        let fb = RoundFeedback { round: 1, average: 30.0, target: 40.0, won: false };
        let text = feedback_text(&fb);
        assert!(text.contains("the average was 30 and the target was 40"));
        assert!(text.ends_with("You lost in the previous round."));
    }

    #[test]
    fn repeated_rounds_need_feedback() {
        let c = Condition::PbcgRepeatedFourThirds;
        assert!(render_prompt(c, 2, None).is_err());
        let fb = RoundFeedback { round: 1, average: 30.0, target: 40.0, won: true };
        let msgs = render_prompt(c, 2, Some(&fb)).unwrap();
        assert_eq!(msgs.len(), 2);
        assert!(msgs[1].content.starts_with("Round 2."));
    }

    #[test]
    fn round_bounds() {
        assert!(render_prompt(Condition::PbcgBaseline, 2, None).is_err());
        assert!(render_prompt(Condition::Gg, 17, None).is_err());
        assert!(render_prompt(Condition::Gg, 0, None).is_err());
    }

    #[test]
    fn gg_later_rounds_carry_only_the_round() {
        let msgs = render_prompt(Condition::Gg, 2, None).unwrap();
        assert!(msgs[0].content.starts_with("We are now starting a new round of the game. Round 2:"));
        assert!(msgs[0].content.contains("your lower limit is 100, your upper limit is 500"));
    }

    #[test]
    fn every_catalogued_question_renders() {
        for q in crate::games::understanding::catalog() {
            let m = understanding_prompt(&q.id).unwrap();
            assert!(!m.content.is_empty(), "{}", q.id);
        }
        assert!(understanding_prompt("gg/rules-9").is_err());
    }
}
