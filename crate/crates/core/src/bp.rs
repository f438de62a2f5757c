//! Loopy belief propagation on Forney graphs.
//!
//! Each edge carries two messages, one per direction, stored as normalized
//! log-probabilities over `{-1, +1}`. Message `2e` flows from `edges[e][0]` to
//! `edges[e][1]`, message `2e + 1` the other way.
//!
//! At a fixed point the Bethe free energy
//!
//! ```text
//! F = Σ_a Σ_σa b_a ln(b_a / f_a) - Σ_ab Σ_σ b_ab ln b_ab
//! ```
//!
//! gives `Z_bp = exp(-F)`, exact on trees.

use crate::model::{EdgeId, ForneyGraph, NodeId, spin_at};
use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha20Rng;
use std::fmt::{self, Write};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schedule {
    FixedSequential,
    RandomSequential,
    Parallel,
    Residual,
}

impl Schedule {
    /// Order tried by [`run_bp_multistart`].
    pub const CASCADE: [Schedule; 4] = [
        Schedule::FixedSequential,
        Schedule::RandomSequential,
        Schedule::Parallel,
        Schedule::Residual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schedule::FixedSequential => "fixed-sequential",
            Schedule::RandomSequential => "random-sequential",
            Schedule::Parallel => "parallel",
            Schedule::Residual => "residual",
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Schedule::CASCADE
            .into_iter()
            .find(|sch| sch.name() == s)
            .ok_or_else(|| format!("unknown schedule `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpConfig {
    pub schedule: Schedule,
    /// Convergence threshold on the largest absolute message change.
    pub threshold: f64,
    /// Sweep limit; for the residual schedule one sweep is one update per message.
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig {
            schedule: Schedule::FixedSequential,
            threshold: 1e-14,
            max_iterations: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BpError {
    #[error("invalid BP configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("non-finite message at edge {edge} ({schedule} schedule)")]
    NumericFailure { edge: EdgeId, schedule: Schedule },
    #[error("magnetization {m} on edge {edge} is saturated")]
    Saturated { edge: EdgeId, m: f64 },
    #[error("edge {edge} is not incident to node {node}")]
    NotIncident { node: NodeId, edge: EdgeId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpResult {
    pub converged: bool,
    pub iterations: usize,
    pub schedule: Schedule,
    /// Largest message change in the last sweep (or largest pending residual).
    pub residual: f64,
    /// Normalized `b_a`, indexed like the node's factor table.
    pub node_beliefs: Vec<Vec<f64>>,
    /// `[b_ab(-1), b_ab(+1)]` per edge.
    pub edge_beliefs: Vec<[f64; 2]>,
    pub magnetizations: Vec<f64>,
    /// `ln Z_bp`, including the graph's `log_scale`.
    pub log_z: f64,
}

#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

struct Engine<'g> {
    g: &'g ForneyGraph,
    log_tables: Vec<Vec<f64>>,
    /// (sender, position of the edge in the sender's variable order)
    sender: Vec<(NodeId, usize)>,
    msgs: Vec<[f64; 2]>,
    schedule: Schedule,
}

impl<'g> Engine<'g> {
    fn new(g: &'g ForneyGraph, schedule: Schedule) -> Self {
        let log_tables = g
            .nodes()
            .iter()
            .map(|n| n.table.values().iter().map(|v| v.ln()).collect())
            .collect();
        let mut sender = vec![(0, 0); 2 * g.num_edges()];
        for (a, node) in g.nodes().iter().enumerate() {
            for (pos, &e) in node.edges.iter().enumerate() {
                let m = if g.edges()[e][0] == a { 2 * e } else { 2 * e + 1 };
                sender[m] = (a, pos);
            }
        }
        let half = 0.5f64.ln();
        Engine {
            g,
            log_tables,
            sender,
            msgs: vec![[half, half]; 2 * g.num_edges()],
            schedule,
        }
    }

    /// Message flowing into `a` along `e`.
    #[inline]
    fn incoming(&self, a: NodeId, e: EdgeId) -> usize {
        if self.g.edges()[e][1] == a { 2 * e } else { 2 * e + 1 }
    }

    fn compute(&self, m: usize) -> Result<[f64; 2], BpError> {
        let (a, pos) = self.sender[m];
        let node = self.g.node(a);
        let k = node.edges.len();
        let inc: Vec<[f64; 2]> = node
            .edges
            .iter()
            .map(|&e| self.msgs[self.incoming(a, e)])
            .collect();
        let mut out = [f64::NEG_INFINITY; 2];
        for (x, &lf) in self.log_tables[a].iter().enumerate() {
            if lf == f64::NEG_INFINITY {
                continue;
            }
            let mut val = lf;
            for (j, msg) in inc.iter().enumerate() {
                if j != pos {
                    val += msg[(x >> (k - 1 - j)) & 1];
                }
            }
            let slot = (x >> (k - 1 - pos)) & 1;
            out[slot] = log_add(out[slot], val);
        }
        let norm = log_add(out[0], out[1]);
        if !norm.is_finite() {
            return Err(BpError::NumericFailure {
                edge: m / 2,
                schedule: self.schedule,
            });
        }
        Ok([out[0] - norm, out[1] - norm])
    }

    fn change(old: [f64; 2], new: [f64; 2]) -> f64 {
        (old[0].exp() - new[0].exp())
            .abs()
            .max((old[1].exp() - new[1].exp()).abs())
    }

    fn sweep(&mut self, order: &[usize]) -> Result<f64, BpError> {
        let mut delta = 0.0f64;
        for &m in order {
            let new = self.compute(m)?;
            delta = delta.max(Self::change(self.msgs[m], new));
            self.msgs[m] = new;
        }
        Ok(delta)
    }

    fn parallel_sweep(&mut self) -> Result<f64, BpError> {
        let new = (0..self.msgs.len())
            .map(|m| self.compute(m))
            .collect::<Result<Vec<_>, _>>()?;
        let delta = self
            .msgs
            .iter()
            .zip(&new)
            .map(|(&o, &n)| Self::change(o, n))
            .fold(0.0, f64::max);
        self.msgs = new;
        Ok(delta)
    }

    /// Returns (converged, sweeps, final residual).
    fn run(&mut self, cfg: &BpConfig) -> Result<(bool, usize, f64), BpError> {
        let count = self.msgs.len();
        if count == 0 {
            return Ok((true, 0, 0.0));
        }
        if self.schedule == Schedule::Residual {
            return self.run_residual(cfg);
        }
        let mut order: Vec<usize> = (0..count).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
        let mut delta = f64::INFINITY;
        for sweep in 1..=cfg.max_iterations {
            delta = match self.schedule {
                Schedule::FixedSequential => self.sweep(&order)?,
                Schedule::RandomSequential => {
                    order.shuffle(&mut rng);
                    self.sweep(&order)?
                }
                Schedule::Parallel => self.parallel_sweep()?,
                Schedule::Residual => unreachable!(),
            };
            if delta < cfg.threshold {
                return Ok((true, sweep, delta));
            }
        }
        Ok((false, cfg.max_iterations, delta))
    }

    fn run_residual(&mut self, cfg: &BpConfig) -> Result<(bool, usize, f64), BpError> {
        let count = self.msgs.len();
        let mut pending = (0..count)
            .map(|m| self.compute(m))
            .collect::<Result<Vec<_>, _>>()?;
        let mut residual: Vec<f64> = (0..count)
            .map(|m| Self::change(self.msgs[m], pending[m]))
            .collect();
        let budget = cfg.max_iterations.saturating_mul(count);
        let mut updates = 0usize;
        loop {
            // first index wins ties
            let (best, &r) = residual
                .iter()
                .enumerate()
                .fold((0, &residual[0]), |acc, x| if x.1 > acc.1 { x } else { acc });
            if r < cfg.threshold {
                return Ok((true, updates.div_ceil(count).max(1), r));
            }
            if updates >= budget {
                return Ok((false, cfg.max_iterations, r));
            }
            self.msgs[best] = pending[best];
            residual[best] = 0.0;
            updates += 1;
            let e = best / 2;
            let receiver = self.g.edges()[e][1 - best % 2];
            for &f in &self.g.node(receiver).edges {
                if f == e {
                    continue;
                }
                let out = if self.g.edges()[f][0] == receiver { 2 * f } else { 2 * f + 1 };
                pending[out] = self.compute(out)?;
                residual[out] = Self::change(self.msgs[out], pending[out]);
            }
        }
    }

    fn finish(self, converged: bool, iterations: usize, residual: f64) -> Result<BpResult, BpError> {
        let g = self.g;
        let mut node_beliefs = Vec::with_capacity(g.num_nodes());
        let mut free_energy = 0.0;
        for (a, node) in g.nodes().iter().enumerate() {
            let k = node.edges.len();
            let inc: Vec<[f64; 2]> = node
                .edges
                .iter()
                .map(|&e| self.msgs[self.incoming(a, e)])
                .collect();
            // log b_a up to normalization, and the message part alone
            let logits: Vec<f64> = self.log_tables[a]
                .iter()
                .enumerate()
                .map(|(x, &lf)| {
                    lf + inc
                        .iter()
                        .enumerate()
                        .map(|(j, msg)| msg[(x >> (k - 1 - j)) & 1])
                        .sum::<f64>()
                })
                .collect();
            let norm = crate::numeric::log_sum_exp(&logits);
            if !norm.is_finite() {
                return Err(BpError::NumericFailure {
                    edge: node.edges.first().copied().unwrap_or(0),
                    schedule: self.schedule,
                });
            }
            let mut belief = Vec::with_capacity(logits.len());
            for (x, &l) in logits.iter().enumerate() {
                let b = (l - norm).exp();
                if b > 0.0 {
                    // ln b - ln f = (sum of incoming log-messages) - norm
                    free_energy += b * (l - self.log_tables[a][x] - norm);
                }
                belief.push(b);
            }
            node_beliefs.push(belief);
        }
        let mut edge_beliefs = Vec::with_capacity(g.num_edges());
        let mut magnetizations = Vec::with_capacity(g.num_edges());
        for e in 0..g.num_edges() {
            let l = [
                self.msgs[2 * e][0] + self.msgs[2 * e + 1][0],
                self.msgs[2 * e][1] + self.msgs[2 * e + 1][1],
            ];
            let norm = log_add(l[0], l[1]);
            if !norm.is_finite() {
                return Err(BpError::NumericFailure {
                    edge: e,
                    schedule: self.schedule,
                });
            }
            let b = [(l[0] - norm).exp(), (l[1] - norm).exp()];
            for (&p, &lp) in b.iter().zip(&l) {
                if p > 0.0 {
                    free_energy -= p * (lp - norm);
                }
            }
            magnetizations.push(b[1] - b[0]);
            edge_beliefs.push(b);
        }
        Ok(BpResult {
            converged,
            iterations,
            schedule: self.schedule,
            residual,
            node_beliefs,
            edge_beliefs,
            magnetizations,
            log_z: -free_energy + g.log_scale(),
        })
    }
}

/// Runs BP from uniform messages under `cfg.schedule`.
///
/// Non-convergence is reported through `converged`, not as an error.
pub fn run_bp(g: &ForneyGraph, cfg: &BpConfig) -> Result<BpResult, BpError> {
    if cfg.threshold.is_nan() || cfg.threshold <= 0.0 {
        return Err(BpError::InvalidConfig("threshold must be positive"));
    }
    if cfg.max_iterations == 0 {
        return Err(BpError::InvalidConfig("max_iterations must be at least 1"));
    }
    let mut engine = Engine::new(g, cfg.schedule);
    let (converged, iterations, residual) = engine.run(cfg)?;
    engine.finish(converged, iterations, residual)
}

/// Tries each schedule of [`Schedule::CASCADE`] in turn and returns the first
/// converged run, or else the run with the smallest final residual.
pub fn run_bp_multistart(g: &ForneyGraph, cfg: &BpConfig) -> Result<BpResult, BpError> {
    let mut best: Option<BpResult> = None;
    let mut last_err = None;
    for schedule in Schedule::CASCADE {
        match run_bp(g, &BpConfig { schedule, ..*cfg }) {
            Ok(res) if res.converged => return Ok(res),
            Ok(res) => {
                if best.as_ref().is_none_or(|b| res.residual < b.residual) {
                    best = Some(res);
                }
            }
            Err(err @ BpError::InvalidConfig(_)) => return Err(err),
            Err(err) => last_err = Some(err),
        }
    }
    best.ok_or_else(|| last_err.expect("at least one schedule ran"))
}

/// Largest |m_ab| treated as unsaturated.
const SATURATION: f64 = 1.0 - 1e-12;

/// Loop weight of node `a` restricted to the incident edges `subset`:
///
/// ```text
/// μ = Σ_σa b_a(σa) Π_{e∈S} (σ_e - m_e)  /  Π_{e∈S} sqrt(1 - m_e²)
/// ```
pub fn mu_term(
    res: &BpResult,
    g: &ForneyGraph,
    a: NodeId,
    subset: &[EdgeId],
) -> Result<f64, BpError> {
    let node = g.node(a);
    let k = node.edges.len();
    let mut positions = Vec::with_capacity(subset.len());
    let mut denom = 1.0;
    for &e in subset {
        let pos = g
            .edge_position(a, e)
            .ok_or(BpError::NotIncident { node: a, edge: e })?;
        let m = res.magnetizations[e];
        if m.abs() >= SATURATION {
            return Err(BpError::Saturated { edge: e, m });
        }
        denom *= (1.0 - m * m).sqrt();
        positions.push((pos, m));
    }
    let numer: f64 = res.node_beliefs[a]
        .iter()
        .enumerate()
        .map(|(x, &b)| {
            b * positions
                .iter()
                .map(|&(pos, m)| f64::from(spin_at(x, k, pos)) - m)
                .product::<f64>()
        })
        .sum();
    Ok(numer / denom)
}

impl BpResult {
    /// One line per node and edge belief, 17 significant digits.
    pub fn dump(&self, g: &ForneyGraph) -> String {
        let mut out = String::new();
        for (a, b) in self.node_beliefs.iter().enumerate() {
            write!(out, "node {a}").unwrap();
            for v in b {
                write!(out, " {v:.16e}").unwrap();
            }
            out.push('\n');
        }
        for (e, b) in self.edge_beliefs.iter().enumerate() {
            let [x, y] = g.edges()[e];
            writeln!(
                out,
                "edge {e} {x} {y} {:.16e} {:.16e} {:.16e}",
                b[0], b[1], self.magnetizations[e]
            )
            .unwrap();
        }
        out
    }

    /// Largest violation of `Σ_{σa \ σab} b_a = b_ab` over all node-edge pairs.
    pub fn marginal_inconsistency(&self, g: &ForneyGraph) -> f64 {
        let mut worst = 0.0f64;
        for (a, node) in g.nodes().iter().enumerate() {
            let k = node.edges.len();
            for (pos, &e) in node.edges.iter().enumerate() {
                let mut marg = [0.0; 2];
                for (x, &b) in self.node_beliefs[a].iter().enumerate() {
                    marg[(x >> (k - 1 - pos)) & 1] += b;
                }
                worst = worst
                    .max((marg[0] - self.edge_beliefs[e][0]).abs())
                    .max((marg[1] - self.edge_beliefs[e][1]).abs());
            }
        }
        worst
    }
}
