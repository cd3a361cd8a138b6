mod common;

use hierarch_core::harness::parse_answer;

#[test]
fn rendered_prompts_match_goldens() {
    let bad = common::prompt_mismatches();
    assert!(bad.is_empty(), "{bad:#?}");
}

#[test]
fn rendering_is_deterministic() {
    assert_eq!(common::rendered_prompts(), common::rendered_prompts());
}

#[test]
fn answer_parsing_fixtures() {
    assert_eq!(parse_answer("I choose [33]").unwrap(), 33.0);
    assert_eq!(parse_answer("Maybe [40]... final: [22]").unwrap(), 22.0);
    assert!(parse_answer("I choose 33").is_err());
    assert!(parse_answer("[about thirty]").is_err());
}
