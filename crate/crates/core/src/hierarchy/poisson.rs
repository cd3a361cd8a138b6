use crate::error::{Error, Result};

/// Unnormalized Poisson terms τ^j / j! for j = 0..n.
///
/// Built by the running product so τ = 0 gives the point mass at j = 0
/// without evaluating 0^0.
fn terms(tau: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut t = 1.0;
    for j in 0..n {
        if j > 0 {
            t *= tau / j as f64;
        }
        out.push(t);
    }
    out
}

fn check_tau(tau: f64) -> Result<()> {
    if tau.is_finite() && tau >= 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!("tau must be a finite nonnegative number, got {tau}")))
    }
}

/// Poisson probability of exactly `j` steps.
pub fn poisson_pmf(j: usize, tau: f64) -> f64 {
    (-tau).exp() * terms(tau, j + 1)[j]
}

/// Beliefs of a step-k player over steps 0..k−1: the Poisson weights
/// truncated below k and renormalized.
pub fn poisson_conditional(tau: f64, k: usize) -> Result<Vec<f64>> {
    check_tau(tau)?;
    if k == 0 {
        return Err(Error::Invalid("a step-0 player holds no beliefs (k must be ≥ 1)".into()));
    }
    let t = terms(tau, k);
    let total: f64 = t.iter().sum();
    Ok(t.into_iter().map(|x| x / total).collect())
}

/// Population shares of steps 0..=k_max followed by the tail mass of all
/// deeper steps, which is credited to the equilibrium (or random) rank.
pub fn step_shares(tau: f64, k_max: usize) -> Result<Vec<f64>> {
    check_tau(tau)?;
    let scale = (-tau).exp();
    let mut out: Vec<f64> = terms(tau, k_max + 1).into_iter().map(|x| x * scale).collect();
    let head: f64 = out.iter().sum();
    out.push((1.0 - head).max(0.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_step_example() {
        let w = poisson_conditional(1.5, 2).unwrap();
        assert!((w[0] - 0.4).abs() < 1e-12 && (w[1] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn three_step_example() {
        // 1 : 1.5 : 1.125 out of 3.625.
        let w = poisson_conditional(1.5, 3).unwrap();
        let exact = [1.0 / 3.625, 1.5 / 3.625, 1.125 / 3.625];
        for (a, b) in w.iter().zip(exact) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((w[0] - 0.2759).abs() < 5e-5 && (w[1] - 0.4138).abs() < 5e-5 && (w[2] - 0.3103).abs() < 5e-5);
    }

    #[test]
    fn zero_tau_is_point_mass() {
        assert_eq!(poisson_conditional(0.0, 5).unwrap(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let s = step_shares(0.0, 4).unwrap();
        assert_eq!(s[0], 1.0);
        assert_eq!(s[5], 0.0);
    }

    #[test]
    fn errors() {
        assert!(poisson_conditional(1.0, 0).is_err());
        assert!(poisson_conditional(-1.0, 2).is_err());
        assert!(step_shares(f64::NAN, 2).is_err());
    }

    proptest! {
        #[test]
        fn conditional_is_renormalized_unconditional(tau in 0.001f64..12.0, k in 1usize..=20) {
            let w = poisson_conditional(tau, k).unwrap();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let head: f64 = (0..k).map(|j| poisson_pmf(j, tau)).sum();
            for (j, wj) in w.iter().enumerate() {
                prop_assert!((wj - poisson_pmf(j, tau) / head).abs() < 1e-10);
            }
        }

        #[test]
        fn shares_sum_to_one(tau in 0.0f64..10.0, k in 0usize..=10) {
            let s = step_shares(tau, k).unwrap();
            prop_assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(s.iter().all(|&x| x >= 0.0));
        }
    }
}
