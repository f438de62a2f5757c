//! Fixed instances shared by the criterion benchmarks.

use planarz_core::bp::{BpConfig, BpResult, run_bp_multistart};
use planarz_core::gen::{ModelParams, gen_grid, gen_spiderweb};
use planarz_core::model::ForneyGraph;
use planarz_core::pfaffian::SkewMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub struct Fixture {
    pub name: String,
    pub graph: ForneyGraph,
    pub bp: BpResult,
}

impl Fixture {
    fn new(name: String, graph: ForneyGraph) -> Self {
        let bp = run_bp_multistart(&graph, &BpConfig::default()).expect("bp runs on fixtures");
        Fixture { name, graph, bp }
    }
}

pub fn grids(sides: &[usize]) -> Vec<Fixture> {
    sides
        .iter()
        .map(|&n| Fixture::new(format!("grid{n}"), gen_grid(n, &ModelParams::new(1.0, 0.1, 42)).unwrap()))
        .collect()
}

pub fn spiderwebs(rings: usize, degrees: &[usize]) -> Vec<Fixture> {
    degrees
        .iter()
        .map(|&d| {
            let g = gen_spiderweb(rings, d, &ModelParams::new(1.0, 0.1, 7)).unwrap();
            Fixture::new(format!("web{rings}x{d}"), g)
        })
        .collect()
}

/// Dense random skew matrix with entries uniform in [-1, 1).
pub fn random_skew(n: usize, seed: u64) -> SkewMatrix {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut m = SkewMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    m
}
