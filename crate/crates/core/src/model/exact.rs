//! Exhaustive partition-function oracle.
//!
//! Variables are split into a set `free` that never share a factor and the
//! rest. Every assignment of the rest is enumerated; given that assignment the
//! free variables decouple and are summed in closed form. The result is the
//! exact `sum_σ prod_a f_a(σ_a)`.

use super::{FactorGraph, ForneyGraph, ModelError};
use crate::numeric::{LogAccumulator, log_sum_exp};

/// Largest number of variables the oracle accepts.
pub const EXACT_VARIABLE_LIMIT: usize = 30;

struct LogFactor {
    scope: Vec<usize>,
    log_table: Vec<f64>,
}

impl LogFactor {
    #[inline]
    fn eval(&self, state: u64) -> f64 {
        let idx = self
            .scope
            .iter()
            .fold(0usize, |acc, &v| (acc << 1) | ((state >> v) & 1) as usize);
        self.log_table[idx]
    }
}

fn enumerate(num_vars: usize, factors: Vec<LogFactor>) -> Result<f64, ModelError> {
    if num_vars > EXACT_VARIABLE_LIMIT {
        return Err(ModelError::TooManyVariables {
            count: num_vars,
            limit: EXACT_VARIABLE_LIMIT,
        });
    }
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); num_vars];
    for (fi, f) in factors.iter().enumerate() {
        for &v in &f.scope {
            touching[v].push(fi);
        }
    }
    // greedy set of variables, no two in one factor
    let mut factor_taken = vec![false; factors.len()];
    let mut free = Vec::new();
    for (v, fs) in touching.iter().enumerate() {
        if fs.iter().all(|&f| !factor_taken[f]) {
            fs.iter().for_each(|&f| factor_taken[f] = true);
            free.push(v);
        }
    }
    let is_free: Vec<bool> = (0..num_vars).map(|v| free.contains(&v)).collect();
    let rest: Vec<usize> = (0..num_vars).filter(|&v| !is_free[v]).collect();
    let base: Vec<usize> = (0..factors.len()).filter(|&f| !factor_taken[f]).collect();

    let mut acc = LogAccumulator::new();
    for bits in 0u64..(1u64 << rest.len()) {
        let mut state = 0u64;
        for (k, &v) in rest.iter().enumerate() {
            state |= ((bits >> k) & 1) << v;
        }
        let mut total: f64 = base.iter().map(|&f| factors[f].eval(state)).sum();
        for &v in &free {
            let lo: f64 = touching[v].iter().map(|&f| factors[f].eval(state)).sum();
            let up = state | (1 << v);
            let hi: f64 = touching[v].iter().map(|&f| factors[f].eval(up)).sum();
            total += log_sum_exp(&[lo, hi]);
        }
        acc.push(total);
    }
    let log_z = acc.value();
    if log_z == f64::NEG_INFINITY {
        Err(ModelError::ZeroPartition)
    } else {
        Ok(log_z)
    }
}

fn log_table(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| v.ln()).collect()
}

/// `ln Z` of a factor graph with at most [`EXACT_VARIABLE_LIMIT`] variables.
pub fn exact_log_z_factor_graph(fg: &FactorGraph) -> Result<f64, ModelError> {
    let factors = fg
        .factors()
        .iter()
        .map(|f| LogFactor {
            scope: f.scope.clone(),
            log_table: log_table(f.table.values()),
        })
        .collect();
    enumerate(fg.num_vars(), factors)
}

/// `ln Z` of a Forney graph (edges are the variables), including `log_scale`.
pub fn exact_log_z_forney(g: &ForneyGraph) -> Result<f64, ModelError> {
    let factors = g
        .nodes()
        .iter()
        .map(|n| LogFactor {
            scope: n.edges.clone(),
            log_table: log_table(n.table.values()),
        })
        .collect();
    Ok(enumerate(g.num_edges(), factors)? + g.log_scale())
}
