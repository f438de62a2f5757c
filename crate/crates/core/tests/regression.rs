//! Frozen instances and sweep outputs. Set `UPDATE_GOLDEN=1` to rewrite the
//! files under `tests/golden` after an intentional change.

use planarz_core::bp::{BpConfig, run_bp_multistart};
use planarz_core::experiment::{error_metric, parse_config, run_experiment};
use planarz_core::gen::{ModelParams, grid_factor_graph, reduced_forney, spiderweb_factor_graph};
use planarz_core::model::io::write_factor_graph;
use planarz_core::model::{FactorGraph, exact_log_z_factor_graph};
use planarz_core::series::{pfaffian_series, z_empty};
use std::path::PathBuf;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn updating() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some()
}

fn check_text(name: &str, actual: &str) {
    let path = golden(name);
    if updating() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "{name} changed");
}

/// Compares CSV-like text field by field, numbers to a relative tolerance.
fn check_table(name: &str, actual: &str, skip_last: bool) {
    let path = golden(name);
    if updating() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    let (a, e): (Vec<&str>, Vec<&str>) = (actual.lines().collect(), expected.lines().collect());
    assert_eq!(a.len(), e.len(), "{name}: row count");
    for (ra, re) in a.iter().zip(&e) {
        let (mut fa, mut fe): (Vec<&str>, Vec<&str>) = (ra.split(',').collect(), re.split(',').collect());
        if skip_last {
            fa.pop();
            fe.pop();
        }
        assert_eq!(fa.len(), fe.len());
        for (x, y) in fa.iter().zip(&fe) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) => assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-3), "{name}: {ra} vs {re}"),
                _ => assert_eq!(x, y, "{name}: {ra} vs {re}"),
            }
        }
    }
}

fn values(fg: &FactorGraph) -> String {
    let g = reduced_forney(fg).unwrap();
    let res = run_bp_multistart(&g, &BpConfig::default()).unwrap();
    assert!(res.converged);
    let exact = exact_log_z_factor_graph(fg).unwrap();
    let z0 = res.log_z + z_empty(&g, &res).unwrap().ln().unwrap();
    let pf2 = pfaffian_series(&g, &res, 2, usize::MAX).unwrap().log_z(&res);
    let mut out = String::from("method,log_z,error\n");
    for (m, v) in [("exact", exact), ("bp", res.log_z), ("z_empty", z0), ("pfaffian_2", pf2)] {
        out.push_str(&format!("{m},{v:.15e},{:.15e}\n", error_metric(v, exact).unwrap()));
    }
    out
}

#[test]
fn frozen_grid_instance() {
    let fg = grid_factor_graph(4, &ModelParams::new(1.0, 0.01, 42)).unwrap();
    check_text("grid4_seed42.model", &write_factor_graph(&fg));
    check_table("grid4_seed42.csv", &values(&fg), false);
}

#[test]
fn frozen_spiderweb_instance() {
    let fg = spiderweb_factor_graph(2, 4, &ModelParams::new(1.0, 0.01, 7)).unwrap();
    check_text("web2x4_seed7.model", &write_factor_graph(&fg));
    check_table("web2x4_seed7.csv", &values(&fg), false);
}

#[test]
fn frozen_sweeps() {
    for name in ["sweep", "webs"] {
        let cfg = parse_config(&std::fs::read_to_string(golden(&format!("{name}.cfg"))).unwrap()).unwrap();
        let mut buf = Vec::new();
        let outcome = run_experiment(&cfg, &mut buf).unwrap();
        assert_eq!(outcome.failures, 0);
        check_table(&format!("{name}.csv"), &String::from_utf8(buf).unwrap(), true);
    }
}
