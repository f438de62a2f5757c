//! Random Ising instances on planar graphs.
//!
//! Couplings `f(σi, σj) = exp(J σi σj)` with `J ~ N(0, β/2)` and fields
//! `f(σi) = exp(h σi)` with `h ~ N(0, βΘ)`; the second argument is the
//! standard deviation. Attractive mode takes absolute values.

use crate::model::{
    Factor, FactorGraph, FactorTable, ForneyGraph, ModelError, factor_to_forney, reduce_degree,
    two_core,
};
use crate::planar::{PlanarError, align_to_rotation};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InteractionMode {
    Mixed,
    Attractive,
}

impl fmt::Display for InteractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionMode::Mixed => "mixed",
            InteractionMode::Attractive => "attractive",
        })
    }
}

impl std::str::FromStr for InteractionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mixed" => Ok(InteractionMode::Mixed),
            "attractive" => Ok(InteractionMode::Attractive),
            _ => Err(format!("unknown interaction mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub beta: f64,
    pub theta: f64,
    pub seed: u64,
    pub mode: InteractionMode,
}

impl ModelParams {
    pub fn new(beta: f64, theta: f64, seed: u64) -> Self {
        ModelParams {
            beta,
            theta,
            seed,
            mode: InteractionMode::Mixed,
        }
    }

    pub fn attractive(self) -> Self {
        ModelParams {
            mode: InteractionMode::Attractive,
            ..self
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
}

/// Samples `count` values of `N(0, std)`, folded to `|x|` in attractive mode.
fn sample(rng: &mut ChaCha20Rng, std: f64, count: usize, mode: InteractionMode) -> Vec<f64> {
    if std == 0.0 {
        return vec![0.0; count];
    }
    let normal = Normal::new(0.0, std).expect("finite positive standard deviation");
    (0..count)
        .map(|_| {
            let x = normal.sample(rng);
            match mode {
                InteractionMode::Mixed => x,
                InteractionMode::Attractive => x.abs(),
            }
        })
        .collect()
}

pub fn coupling_table(j: f64) -> FactorTable {
    FactorTable::new(2, vec![j.exp(), (-j).exp(), (-j).exp(), j.exp()]).expect("finite coupling")
}

pub fn field_table(h: f64) -> FactorTable {
    FactorTable::new(1, vec![(-h).exp(), h.exp()]).expect("finite field")
}

/// Pairwise Ising model over `pairs` (couplings drawn first, in pair order,
/// then one field per variable).
pub fn ising_factor_graph(
    var_names: Vec<String>,
    pairs: &[[usize; 2]],
    params: &ModelParams,
) -> Result<FactorGraph, GenError> {
    if !(params.beta >= 0.0 && params.beta.is_finite()) {
        return Err(GenError::InvalidParameter(format!("beta = {}", params.beta)));
    }
    if !(params.theta >= 0.0 && params.theta.is_finite()) {
        return Err(GenError::InvalidParameter(format!("theta = {}", params.theta)));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let couplings = sample(&mut rng, params.beta / 2.0, pairs.len(), params.mode);
    let fields = sample(&mut rng, params.beta * params.theta, var_names.len(), params.mode);
    let mut factors = Vec::with_capacity(pairs.len() + var_names.len());
    for (&[a, b], &j) in pairs.iter().zip(&couplings) {
        factors.push(Factor {
            name: format!("J{a}_{b}"),
            scope: vec![a, b],
            table: coupling_table(j),
        });
    }
    for (v, &h) in fields.iter().enumerate() {
        factors.push(Factor {
            name: format!("h{v}"),
            scope: vec![v],
            table: field_table(h),
        });
    }
    Ok(FactorGraph::new(var_names, factors)?)
}

/// Nearest-neighbour pairs of an `n × n` grid; spin `(r, c)` is `r * n + c`.
pub fn grid_pairs(n: usize) -> Vec<[usize; 2]> {
    let mut pairs = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let v = r * n + c;
            if c + 1 < n {
                pairs.push([v, v + 1]);
            }
            if r + 1 < n {
                pairs.push([v, v + n]);
            }
        }
    }
    pairs
}

/// Hub `0`, ring `r` vertex `k` is `1 + r d + k`: spokes from the hub to the
/// first ring, ring cycles, and radial edges between consecutive rings.
pub fn spiderweb_pairs(rings: usize, d: usize) -> Vec<[usize; 2]> {
    let id = |r: usize, k: usize| 1 + r * d + k;
    let mut pairs = Vec::new();
    for k in 0..d {
        pairs.push([0, id(0, k)]);
    }
    for r in 0..rings {
        for k in 0..d {
            pairs.push([id(r, k), id(r, (k + 1) % d)]);
            if r + 1 < rings {
                pairs.push([id(r, k), id(r + 1, k)]);
            }
        }
    }
    pairs
}

pub fn grid_factor_graph(n: usize, params: &ModelParams) -> Result<FactorGraph, GenError> {
    if n < 2 {
        return Err(GenError::InvalidParameter(format!("grid side {n} < 2")));
    }
    let names = (0..n * n).map(|v| format!("s{}_{}", v / n, v % n)).collect();
    ising_factor_graph(names, &grid_pairs(n), params)
}

pub fn spiderweb_factor_graph(
    rings: usize,
    d: usize,
    params: &ModelParams,
) -> Result<FactorGraph, GenError> {
    if rings < 1 || d < 3 {
        return Err(GenError::InvalidParameter(format!(
            "spiderweb needs rings >= 1 and d >= 3, got rings={rings} d={d}"
        )));
    }
    let mut names = vec!["hub".to_string()];
    for r in 0..rings {
        for k in 0..d {
            names.push(format!("r{r}_{k}"));
        }
    }
    ising_factor_graph(names, &spiderweb_pairs(rings, d), params)
}

/// Converts a planar factor graph to a reduced Forney graph: conversion,
/// 2-core, neighbour order aligned to a planar rotation, degree reduction.
/// Fails if the model is not planar.
pub fn reduced_forney(fg: &FactorGraph) -> Result<ForneyGraph, GenError> {
    reduce_planar(&factor_to_forney(fg)?)
}

/// 2-core, rotation alignment and degree reduction of a planar Forney graph.
pub fn reduce_planar(g: &ForneyGraph) -> Result<ForneyGraph, GenError> {
    let aligned = align_to_rotation(&two_core(g)?)?;
    Ok(reduce_degree(&aligned)?)
}

pub fn gen_grid(n: usize, params: &ModelParams) -> Result<ForneyGraph, GenError> {
    reduced_forney(&grid_factor_graph(n, params)?)
}

pub fn gen_spiderweb(rings: usize, d: usize, params: &ModelParams) -> Result<ForneyGraph, GenError> {
    reduced_forney(&spiderweb_factor_graph(rings, d, params)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{exact_log_z_factor_graph, exact_log_z_forney};

    #[test]
    fn zero_beta_counts_states() {
        let fg = grid_factor_graph(3, &ModelParams::new(0.0, 1.0, 5)).unwrap();
        let z = exact_log_z_factor_graph(&fg).unwrap();
        assert!((z - 9.0 * 2f64.ln()).abs() < 1e-12);
        let g = gen_grid(3, &ModelParams::new(0.0, 1.0, 5)).unwrap();
        assert!((exact_log_z_forney(&g).unwrap() - z).abs() < 1e-12);
    }

    #[test]
    fn grid_pipeline_preserves_z_and_reduces() {
        let params = ModelParams::new(1.0, 0.1, 3);
        let fg = grid_factor_graph(3, &params).unwrap();
        let g = gen_grid(3, &params).unwrap();
        assert!(g.is_reduced());
        let z0 = exact_log_z_factor_graph(&fg).unwrap();
        let z1 = exact_log_z_forney(&g).unwrap();
        assert!((z0 - z1).abs() < 1e-10);
    }

    #[test]
    fn smallest_spiderweb_is_k4() {
        let pairs = spiderweb_pairs(1, 3);
        assert_eq!(pairs.len(), 6);
        let g = gen_spiderweb(1, 3, &ModelParams::new(0.5, 0.1, 1)).unwrap();
        // K4 variables: 4 degree-3 equality nodes joined through 6 couplings
        assert_eq!(g.triplets().len(), 4);
        assert_eq!(g.num_nodes(), 10);
        assert_eq!(spiderweb_pairs(9, 25).len(), 25 + 9 * 25 + 8 * 25);
    }

    #[test]
    fn attractive_mode_is_nonnegative_and_deterministic() {
        let params = ModelParams::new(2.0, 1.0, 11).attractive();
        let a = grid_factor_graph(4, &params).unwrap();
        let b = grid_factor_graph(4, &params).unwrap();
        assert_eq!(a, b);
        for f in a.factors() {
            let v = f.table.values();
            match f.scope.len() {
                2 => assert!(v[0] >= v[1]),
                _ => assert!(v[1] >= v[0]),
            }
        }
        let c = grid_factor_graph(4, &ModelParams::new(2.0, 1.0, 12).attractive()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(grid_factor_graph(1, &ModelParams::new(1.0, 0.1, 0)).is_err());
        assert!(spiderweb_factor_graph(1, 2, &ModelParams::new(1.0, 0.1, 0)).is_err());
        assert!(grid_factor_graph(3, &ModelParams::new(-1.0, 0.1, 0)).is_err());
    }
}
