mod common;

use common::{plain_log_z_factor_graph, random_tree, rng};
use planarz_core::bp::{BpConfig, Schedule, run_bp, run_bp_multistart};
use planarz_core::gen::{ModelParams, gen_grid};
use planarz_core::model::factor_to_forney;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #[test]
    fn every_schedule_is_exact_on_trees(seed in any::<u64>(), which in 0..4usize) {
        let mut r = rng(seed);
        let n = r.random_range(2..=12);
        let fg = random_tree(&mut r, n);
        let exact = plain_log_z_factor_graph(&fg);
        let g = factor_to_forney(&fg).unwrap();
        let cfg = BpConfig { schedule: Schedule::CASCADE[which], seed, ..BpConfig::default() };
        let res = run_bp(&g, &cfg).unwrap();
        prop_assert!(res.converged);
        prop_assert!((res.log_z - exact).abs() <= 1e-10 * exact.abs().max(1.0), "{} vs {exact}", res.log_z);
        prop_assert!(res.marginal_inconsistency(&g) < 1e-10);
    }
}

#[test]
fn schedules_reach_the_same_fixed_point() {
    let g = gen_grid(4, &ModelParams::new(0.4, 0.5, 3)).unwrap();
    let runs: Vec<_> = Schedule::CASCADE
        .into_iter()
        .map(|schedule| run_bp(&g, &BpConfig { schedule, ..BpConfig::default() }).unwrap())
        .collect();
    for r in &runs {
        assert!(r.converged, "{} did not converge", r.schedule);
        assert!((r.log_z - runs[0].log_z).abs() < 1e-10);
        for (m, m0) in r.magnetizations.iter().zip(&runs[0].magnetizations) {
            assert!((m - m0).abs() < 1e-8);
        }
    }
}

#[test]
fn multistart_reports_the_schedule_used() {
    let g = gen_grid(3, &ModelParams::new(0.5, 0.2, 1)).unwrap();
    let res = run_bp_multistart(&g, &BpConfig::default()).unwrap();
    assert!(res.converged);
    assert_eq!(res.schedule, Schedule::FixedSequential);
    let capped = BpConfig { max_iterations: 1, ..BpConfig::default() };
    let res = run_bp_multistart(&g, &capped).unwrap();
    assert!(!res.converged);
    assert!(res.residual.is_finite());
}
