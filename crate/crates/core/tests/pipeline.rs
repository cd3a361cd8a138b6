use hierarch_core::games::Condition;
use hierarch_core::harness::{run_experiment, ExperimentPlan, SyntheticClient};

// A synthetic model that best-replies to the reported average should make
// every group trace the myopic path. Feedback shows the average to two
// decimals, so each round replies to the rounded figure.
fn check_path(condition: Condition, p: f64) {
    let mut plan = ExperimentPlan::new(condition, "synthetic");
    plan.repetitions = 2;
    plan.seed = 4;
    let out = run_experiment(&plan, &SyntheticClient::default()).unwrap();
    assert_eq!(out.summary.shortfall(), 0);
    let mut want = 50.0f64;
    for round in 1..=10 {
        let values = out.dataset.values(condition, Some(round));
        assert_eq!(values.len(), 22);
        let avg = values.iter().sum::<f64>() / values.len() as f64;
        assert!((avg - want).abs() < 1e-9, "{condition} round {round}: {avg} vs {want}");
        want = (p * (want * 100.0).round() / 100.0).min(100.0);
    }
}

#[test]
fn synthetic_groups_follow_two_thirds_path() {
    check_path(Condition::PbcgRepeatedTwoThirds, 2.0 / 3.0);
}

#[test]
fn synthetic_groups_follow_four_thirds_path() {
    check_path(Condition::PbcgRepeatedFourThirds, 4.0 / 3.0);
}
