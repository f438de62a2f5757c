mod common;

use common::{frontier_log_z, plain_log_z_factor_graph, plain_log_z_forney, random_table, rng};
use planarz_core::gen::{ModelParams, grid_factor_graph, reduced_forney, spiderweb_factor_graph};
use planarz_core::model::io::{ModelFile, parse_model, write_factor_graph, write_forney};
use planarz_core::model::{
    Factor, FactorGraph, exact_log_z_factor_graph, exact_log_z_forney, factor_to_forney,
    reduce_degree, two_core,
};
use proptest::prelude::*;
use rand::Rng;

fn random_factor_graph(seed: u64) -> FactorGraph {
    let mut r = rng(seed);
    let n = r.random_range(1..=7usize);
    let mut factors = Vec::new();
    for i in 0..r.random_range(1..=6usize) {
        let arity = r.random_range(1..=3usize).min(n);
        let mut scope: Vec<usize> = (0..n).collect();
        for j in 0..arity {
            let k = r.random_range(j..n);
            scope.swap(j, k);
        }
        scope.truncate(arity);
        factors.push(Factor {
            name: format!("f{i}"),
            scope,
            table: random_table(&mut r, arity, 0.05, 4.0),
        });
    }
    // every variable must be used
    for v in 0..n {
        factors.push(Factor {
            name: format!("u{v}"),
            scope: vec![v],
            table: random_table(&mut r, 1, 0.5, 2.0),
        });
    }
    FactorGraph::new((0..n).map(|v| format!("x{v}")).collect(), factors).unwrap()
}

proptest! {
    #[test]
    fn conversion_chain_preserves_z(seed in any::<u64>()) {
        let fg = random_factor_graph(seed);
        let z = exact_log_z_factor_graph(&fg).unwrap();
        prop_assert!((z - plain_log_z_factor_graph(&fg)).abs() < 1e-12 * z.abs().max(1.0));
        let forney = factor_to_forney(&fg).unwrap();
        let core = two_core(&forney).unwrap();
        let reduced = reduce_degree(&core).unwrap();
        prop_assert!(reduced.is_reduced());
        for g in [&forney, &core, &reduced] {
            let zg = exact_log_z_forney(g).unwrap();
            prop_assert!((zg - z).abs() < 1e-12 * z.abs().max(1.0), "{zg} vs {z}");
        }
        if reduced.num_edges() <= 16 {
            prop_assert!((plain_log_z_forney(&reduced) - z).abs() < 1e-12 * z.abs().max(1.0));
        }
    }

    #[test]
    fn text_format_round_trips(seed in any::<u64>()) {
        let fg = random_factor_graph(seed);
        let ModelFile::FactorGraph(back) = parse_model(&write_factor_graph(&fg)).unwrap() else {
            panic!("expected a factor graph");
        };
        prop_assert_eq!(&back, &fg);
        let g = reduce_degree(&two_core(&factor_to_forney(&fg).unwrap()).unwrap()).unwrap();
        let ModelFile::Forney(back) = parse_model(&write_forney(&g)).unwrap() else {
            panic!("expected a Forney graph");
        };
        prop_assert_eq!(write_forney(&back), write_forney(&g));
        if g.num_edges() <= 20 {
            let (a, b) = (plain_log_z_forney(&g), plain_log_z_forney(&back));
            prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }
    }
}

#[test]
fn frontier_oracle_agrees_with_enumeration() {
    for seed in 0..5 {
        let params = ModelParams::new(1.0, 0.5, seed);
        let fg = grid_factor_graph(4, &params).unwrap();
        let a = frontier_log_z(&fg, 4);
        let b = exact_log_z_factor_graph(&fg).unwrap();
        assert!((a - b).abs() < 1e-12 * b, "{a} vs {b}");
        let c = plain_log_z_factor_graph(&fg);
        assert!((c - b).abs() < 1e-12 * b);
    }
}

#[test]
fn generated_models_reduce_with_z_intact() {
    let params = ModelParams::new(1.0, 0.3, 9);
    for fg in [
        grid_factor_graph(3, &params).unwrap(),
        spiderweb_factor_graph(1, 5, &params).unwrap(),
        spiderweb_factor_graph(2, 3, &params).unwrap(),
    ] {
        let g = reduced_forney(&fg).unwrap();
        assert!(g.is_reduced());
        let z = exact_log_z_factor_graph(&fg).unwrap();
        assert!((exact_log_z_forney(&g).unwrap() - z).abs() < 1e-10 * z);
    }
}
