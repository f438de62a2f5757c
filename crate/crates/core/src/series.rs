//! Loop-series corrections to `Z_bp`.
//!
//! The exact expansion is `Z = Z_bp (1 + Σ_C r_C)` over generalized loops
//! `C` (edge sets where every touched node has degree at least 2), with
//! `r_C = Π_{a∈C} μ_{a;C}`. On a reduced planar graph, grouping loops by the
//! set Ψ of nodes where they have degree 3 gives
//!
//! ```text
//! Z = Z_bp Σ_Ψ z_Ψ Π_{a∈Ψ} μ_{a;all}
//! ```
//!
//! where `z_Ψ` is a weighted perfect-matching sum, i.e. a Pfaffian, of the
//! extended graph with Ψ removed. `z_∅` alone sums the 2-regular loops.

use crate::bp::{BpError, BpResult, mu_term};
use crate::model::{EdgeId, ForneyGraph, NodeId};
use crate::numeric::SignedLog;
use crate::pfaffian::{PfaffianError, corrected_z, kasteleyn_matrix, tutte_matrix};
use crate::planar::{PlanarEmbedding, PlanarError, biconnect, fisher_extend_with, forney_embedding, orient};
use rayon::prelude::*;
use std::collections::HashMap;
use std::fmt::Write;
use thiserror::Error;

/// Largest number of degree-2 chains accepted by [`enumerate_loops`].
pub const LOOP_EDGE_LIMIT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error(transparent)]
    Bp(#[from] BpError),
    #[error(transparent)]
    Planar(#[from] PlanarError),
    #[error(transparent)]
    Pfaffian(#[from] PfaffianError),
    #[error("loop enumeration limited to {limit} chains, graph has {count}")]
    TooManyEdges { count: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PfaffianTerm {
    /// Removed triplets, sorted; even cardinality.
    pub psi: Vec<NodeId>,
    pub z_psi: SignedLog,
    /// `Π_{a∈Ψ} μ_{a;all three edges}`.
    pub triplet_factor: SignedLog,
    pub contribution: SignedLog,
    /// The extended graph had no perfect matching.
    pub no_matching: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    pub terms: Vec<PfaffianTerm>,
    /// `Σ_Ψ Z_Ψ` over the evaluated terms.
    pub total: SignedLog,
    /// Stopped by the term budget before exhausting `max_psi_size`.
    pub truncated: bool,
}

impl SeriesResult {
    /// `ln(Z_bp · total)`, NaN when the partial sum is not positive.
    pub fn log_z(&self, res: &BpResult) -> f64 {
        self.total.ln().map_or(f64::NAN, |l| res.log_z + l)
    }
}

/// μ for every node and edge pair, plus μ over all three edges of triplets.
struct MuTable {
    pairs: HashMap<(NodeId, [EdgeId; 2]), f64>,
    triplets: HashMap<NodeId, f64>,
}

impl MuTable {
    fn new(g: &ForneyGraph, res: &BpResult) -> Result<Self, BpError> {
        let mut pairs = HashMap::new();
        let mut triplets = HashMap::new();
        for (a, node) in g.nodes().iter().enumerate() {
            let k = node.edges.len();
            for i in 0..k {
                for j in i + 1..k {
                    let pair = [node.edges[i], node.edges[j]];
                    pairs.insert((a, pair), mu_term(res, g, a, &pair)?);
                }
            }
            if k == 3 {
                triplets.insert(a, mu_term(res, g, a, &node.edges)?);
            }
        }
        Ok(MuTable { pairs, triplets })
    }
}

fn psi_term(
    g: &ForneyGraph,
    emb: &PlanarEmbedding,
    mu: &MuTable,
    psi: &[NodeId],
) -> Result<PfaffianTerm, SeriesError> {
    let ext = fisher_extend_with(g, emb, psi, |a, pair| {
        Ok::<_, PlanarError>(mu.pairs[&(a, pair)])
    })?;
    let oriented = orient(&biconnect(&ext))?;
    let z = corrected_z(&tutte_matrix(&oriented), &kasteleyn_matrix(&oriented))?;
    let triplet_factor = ext
        .psi()
        .iter()
        .map(|a| SignedLog::from_f64(mu.triplets[a]))
        .fold(SignedLog::ONE, |acc, x| acc * x);
    Ok(PfaffianTerm {
        psi: ext.psi().to_vec(),
        z_psi: z.value,
        triplet_factor,
        contribution: z.value * triplet_factor,
        no_matching: z.no_matching,
    })
}

/// `z_∅`: the 2-regular loop sum `1 + Σ_{C 2-regular} r_C`.
///
/// `Z_∅ = Z_bp · z_∅`. An empty graph gives 1.
pub fn z_empty(g: &ForneyGraph, res: &BpResult) -> Result<SignedLog, SeriesError> {
    if g.is_empty() {
        return Ok(SignedLog::ONE);
    }
    let emb = forney_embedding(g)?;
    let mu = MuTable::new(g, res)?;
    Ok(psi_term(g, &emb, &mu, &[])?.z_psi)
}

/// Even subsets of `triplets` by increasing size, then lexicographically,
/// up to `max_size` elements and `budget` subsets.
pub fn psi_subsets(triplets: &[NodeId], max_size: usize, budget: usize) -> (Vec<Vec<NodeId>>, bool) {
    let mut out = Vec::new();
    let t = triplets.len();
    let mut size = 0;
    while size <= max_size.min(t) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            if out.len() == budget {
                return (out, true);
            }
            out.push(idx.iter().map(|&i| triplets[i]).collect());
            // next combination in lexicographic order
            let Some(p) = (0..size).rev().find(|&p| idx[p] != p + t - size) else {
                break;
            };
            idx[p] += 1;
            for q in p + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
        size += 2;
    }
    (out, false)
}

/// Evaluates `Z_Ψ` for even Ψ up to `max_psi_size` triplets, at most
/// `budget` terms, in size-then-lexicographic order. Terms are computed in
/// parallel and summed in that order.
pub fn pfaffian_series(
    g: &ForneyGraph,
    res: &BpResult,
    max_psi_size: usize,
    budget: usize,
) -> Result<SeriesResult, SeriesError> {
    if g.is_empty() || budget == 0 {
        let terms = if budget == 0 {
            Vec::new()
        } else {
            vec![PfaffianTerm {
                psi: Vec::new(),
                z_psi: SignedLog::ONE,
                triplet_factor: SignedLog::ONE,
                contribution: SignedLog::ONE,
                no_matching: false,
            }]
        };
        let total = terms.iter().map(|t| t.contribution).sum();
        return Ok(SeriesResult {
            terms,
            total,
            truncated: budget == 0,
        });
    }
    let emb = forney_embedding(g)?;
    let mu = MuTable::new(g, res)?;
    let (subsets, truncated) = psi_subsets(&g.triplets(), max_psi_size, budget);
    let terms = subsets
        .par_iter()
        .map(|psi| psi_term(g, &emb, &mu, psi))
        .collect::<Result<Vec<_>, _>>()?;
    let total = terms
        .iter()
        .fold(SignedLog::ZERO, |acc, t| acc + t.contribution);
    Ok(SeriesResult {
        terms,
        total,
        truncated,
    })
}

/// Stable sort by descending `|Z_Ψ|`.
pub fn term_ranking(terms: &[PfaffianTerm]) -> Vec<PfaffianTerm> {
    let mut ranked = terms.to_vec();
    ranked.sort_by(|a, b| b.contribution.cmp_magnitude(&a.contribution));
    ranked
}

/// `ln Z` estimates after each prefix of `terms`; NaN where the partial sum
/// is not positive.
pub fn cumulative_log_z(log_z_bp: f64, terms: &[PfaffianTerm]) -> Vec<f64> {
    let mut acc = SignedLog::ZERO;
    terms
        .iter()
        .map(|t| {
            acc = acc + t.contribution;
            acc.ln().map_or(f64::NAN, |l| log_z_bp + l)
        })
        .collect()
}

/// One line per term: Ψ ids, then sign and log-magnitude of `Z_Ψ`, `z_Ψ`
/// and the triplet factor.
pub fn term_log(terms: &[PfaffianTerm]) -> String {
    let mut out = String::new();
    for t in terms {
        let psi: Vec<String> = t.psi.iter().map(|a| a.to_string()).collect();
        writeln!(
            out,
            "psi [{}] Z {} {:.16e} z {} {:.16e} mu {} {:.16e}",
            psi.join(" "),
            t.contribution.sign,
            t.contribution.log_abs,
            t.z_psi.sign,
            t.z_psi.log_abs,
            t.triplet_factor.sign,
            t.triplet_factor.log_abs
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopTerm {
    /// Sorted edge ids of the loop.
    pub edges: Vec<EdgeId>,
    /// `r_C = Π_{a∈C} μ_{a;C}`.
    pub r: f64,
}

impl LoopTerm {
    /// All touched nodes have degree exactly 2.
    pub fn is_regular(&self, g: &ForneyGraph) -> bool {
        let mut deg = vec![0u8; g.num_nodes()];
        for &e in &self.edges {
            for a in g.edges()[e] {
                deg[a] += 1;
            }
        }
        deg.iter().all(|&d| d == 0 || d == 2)
    }
}

/// Maximal paths whose interior nodes have degree 2; a loop contains each
/// chain entirely or not at all. Returns edge lists and the two end nodes
/// (equal for a chain closing on itself or an isolated cycle).
fn chains(g: &ForneyGraph) -> Vec<(Vec<EdgeId>, [NodeId; 2])> {
    let mut used = vec![false; g.num_edges()];
    let mut out = Vec::new();
    let walk = |start: NodeId, mut e: EdgeId, used: &mut Vec<bool>, edges: &mut Vec<EdgeId>| {
        let mut at = start;
        loop {
            used[e] = true;
            edges.push(e);
            at = g.other_end(e, at);
            if g.degree(at) != 2 {
                return at;
            }
            let next = g.node(at).edges.iter().copied().find(|&f| f != e).expect("degree 2");
            if used[next] {
                return at;
            }
            e = next;
        }
    };
    for e0 in 0..g.num_edges() {
        if used[e0] {
            continue;
        }
        let a = g.edges()[e0][0];
        let mut fwd = Vec::new();
        let end_b = walk(a, e0, &mut used, &mut fwd);
        let mut back = Vec::new();
        let mut end_a = a;
        if g.degree(a) == 2 {
            let other = g.node(a).edges.iter().copied().find(|&f| f != e0).expect("degree 2");
            if !used[other] {
                end_a = walk(a, other, &mut used, &mut back);
            }
        }
        back.reverse();
        back.extend(fwd);
        back.sort_unstable();
        out.push((back, [end_a, end_b]));
    }
    out
}

/// Exhaustive list of generalized loops (or only 2-regular ones) with their
/// BP loop weights.
///
/// The search runs over chains of degree-2 nodes rather than single edges;
/// at most [`LOOP_EDGE_LIMIT`] chains are accepted.
pub fn enumerate_loops(
    g: &ForneyGraph,
    res: &BpResult,
    regular_only: bool,
) -> Result<Vec<LoopTerm>, SeriesError> {
    let chains = chains(g);
    if chains.len() > LOOP_EDGE_LIMIT {
        return Err(SeriesError::TooManyEdges {
            count: chains.len(),
            limit: LOOP_EDGE_LIMIT,
        });
    }
    struct Search<'a> {
        chains: &'a [(Vec<EdgeId>, [NodeId; 2])],
        regular_only: bool,
        included: Vec<usize>,
        undecided: Vec<usize>,
        chosen: Vec<bool>,
        found: Vec<Vec<usize>>,
    }
    impl Search<'_> {
        fn viable(&self, a: NodeId) -> bool {
            let inc = self.included[a];
            if self.regular_only && inc > 2 {
                return false;
            }
            inc == 0 || inc + self.undecided[a] >= 2
        }

        fn go(&mut self, c: usize) {
            if c == self.chosen.len() {
                if self.chosen.iter().any(|&x| x) {
                    self.found.push((0..c).filter(|&x| self.chosen[x]).collect());
                }
                return;
            }
            let [a, b] = self.chains[c].1;
            self.undecided[a] -= 1;
            self.undecided[b] -= 1;
            if self.viable(a) && self.viable(b) {
                self.go(c + 1);
            }
            self.included[a] += 1;
            self.included[b] += 1;
            self.chosen[c] = true;
            if self.viable(a) && self.viable(b) {
                self.go(c + 1);
            }
            self.chosen[c] = false;
            self.included[a] -= 1;
            self.included[b] -= 1;
            self.undecided[a] += 1;
            self.undecided[b] += 1;
        }
    }
    let mut undecided = vec![0; g.num_nodes()];
    for (_, [a, b]) in &chains {
        undecided[*a] += 1;
        undecided[*b] += 1;
    }
    let mut search = Search {
        chains: &chains,
        regular_only,
        included: vec![0; g.num_nodes()],
        undecided,
        chosen: vec![false; chains.len()],
        found: Vec::new(),
    };
    search.go(0);

    let mut cache: HashMap<(NodeId, Vec<EdgeId>), f64> = HashMap::new();
    let mut terms = Vec::with_capacity(search.found.len());
    for picked in search.found {
        let mut edges: Vec<EdgeId> = picked.iter().flat_map(|&c| chains[c].0.iter().copied()).collect();
        edges.sort_unstable();
        let mut at: Vec<Vec<EdgeId>> = vec![Vec::new(); g.num_nodes()];
        for &e in &edges {
            for a in g.edges()[e] {
                at[a].push(e);
            }
        }
        let mut r = 1.0;
        for (a, subset) in at.into_iter().enumerate() {
            if subset.is_empty() {
                continue;
            }
            let key = (a, subset);
            let mu = match cache.get(&key) {
                Some(&v) => v,
                None => {
                    let v = mu_term(res, g, a, &key.1)?;
                    cache.insert(key, v);
                    v
                }
            };
            r *= mu;
        }
        terms.push(LoopTerm { edges, r });
    }
    Ok(terms)
}
