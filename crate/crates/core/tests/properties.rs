//! Whole-run invariants over random seeds and scenario perturbations.

use dmae_core::analysis::rmse;
use dmae_core::experiment::{run_dmae, run_scenario, Estimator};
use dmae_core::scenario::{reference, simulate_truth, Scenario};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probabilities_and_covariances_stay_valid(seed in any::<u64>(), floor in 1e-6..0.2f64, case in 0usize..4) {
        let mut cfg = match case {
            0 => reference::example1(),
            1 => reference::example2_case1(),
            2 => reference::example2_case2(),
            _ => reference::example2_case3(),
        };
        cfg.horizon = 160;
        cfg.faults.segments.retain(|s| s.end <= 160);
        cfg.dmae.prob_floor = floor;
        let scn = Scenario::from_config(&cfg).unwrap();
        let truth = simulate_truth(&scn, seed).unwrap();
        let (_, recs) = run_dmae(&scn, &truth, seed).unwrap();
        for r in &recs {
            prop_assert!((r.probs[0] + r.probs[1] - 1.0).abs() <= 1e-12);
            prop_assert!(r.probs.iter().all(|&p| p >= floor * (1.0 - 1e-12) && p <= 1.0 - floor * (1.0 - 1e-12)));
            prop_assert!(r.min_eig_nf >= -1e-10 && r.min_eig_af >= -1e-10);
            prop_assert!(r.qd.iter().all(|v| v.is_finite()));
            prop_assert!(r.qd.diagonal().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn runs_are_reproducible(seed in any::<u64>()) {
        let mut cfg = reference::example2_case3();
        cfg.horizon = 80;
        cfg.faults.segments.clear();
        let scn = Scenario::from_config(&cfg).unwrap();
        for est in Estimator::ALL {
            prop_assert_eq!(
                format!("{:?}", run_scenario(&scn, est, seed).unwrap()),
                format!("{:?}", run_scenario(&scn, est, seed).unwrap())
            );
        }
    }

    #[test]
    fn larger_measurement_noise_never_helps_fault_only_case(seed in 0u64..1000) {
        // Truth unchanged; the filter's assumed R inflated a thousandfold.
        let cfg = reference::example2_case1();
        let mut inflated = cfg.clone();
        inflated.noise.filter_kr = 1e3;
        let base = run_scenario(&Scenario::from_config(&cfg).unwrap(), Estimator::Dmae, seed).unwrap();
        let worse = run_scenario(&Scenario::from_config(&inflated).unwrap(), Estimator::Dmae, seed).unwrap();
        let a: f64 = rmse(&base.fbar, &base.f, 10).unwrap().iter().sum();
        let b: f64 = rmse(&worse.fbar, &worse.f, 10).unwrap().iter().sum();
        prop_assert!(a < b, "base {} inflated {}", a, b);
    }
}
