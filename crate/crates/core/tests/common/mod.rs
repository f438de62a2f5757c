//! Independent oracles and random instance builders shared by the
//! integration tests. Nothing here calls into the code under test beyond
//! plain constructors.
#![allow(dead_code)]

use planarz_core::model::{Factor, FactorGraph, FactorTable, ForneyGraph};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Table entry for spins given as bits, first variable most significant.
fn entry(table: &FactorTable, bits: &[bool]) -> f64 {
    let idx = bits.iter().fold(0, |acc, &b| (acc << 1) | b as usize);
    table.values()[idx]
}

/// `ln Z` of a Forney graph by direct summation over all `2^|E|` states.
pub fn plain_log_z_forney(g: &ForneyGraph) -> f64 {
    let scopes: Vec<(&[usize], &[f64])> =
        g.nodes().iter().map(|n| (n.edges.as_slice(), n.table.values())).collect();
    plain_sum(g.num_edges(), &scopes).ln() + g.log_scale()
}

fn plain_sum(n: usize, scopes: &[(&[usize], &[f64])]) -> f64 {
    assert!(n <= 26, "plain enumerator is for tiny models");
    let mut z = 0.0;
    for state in 0u32..(1 << n) {
        let mut p = 1.0;
        for (scope, values) in scopes {
            let idx = scope.iter().fold(0, |acc, &v| (acc << 1) | (state >> v & 1) as usize);
            p *= values[idx];
        }
        z += p;
    }
    z
}

/// `ln Z` of a factor graph by direct summation.
pub fn plain_log_z_factor_graph(fg: &FactorGraph) -> f64 {
    let scopes: Vec<(&[usize], &[f64])> =
        fg.factors().iter().map(|f| (f.scope.as_slice(), f.table.values())).collect();
    plain_sum(fg.num_vars(), &scopes).ln()
}

/// `ln Z` by a sweep over variables in index order, keeping the joint
/// weight of the last `width` variables. Every factor scope must fit in
/// `width + 1` consecutive indices; exact and fast for row-major grids.
pub fn frontier_log_z(fg: &FactorGraph, width: usize) -> f64 {
    let mut by_last: Vec<Vec<&Factor>> = vec![Vec::new(); fg.num_vars()];
    for f in fg.factors() {
        let hi = *f.scope.iter().max().unwrap();
        let lo = *f.scope.iter().min().unwrap();
        assert!(hi - lo <= width, "factor scope wider than the frontier");
        by_last[hi].push(f);
    }
    // before adding v, bit k of a state is variable v - 1 - k
    let mut w = vec![0.0; 1 << width];
    w[0] = 1.0;
    let mut log_z = 0.0;
    for (v, factors) in by_last.iter().enumerate() {
        let mut wide: Vec<f64> = (0..2 << width).map(|s| w[s >> 1]).collect();
        for f in factors {
            for (s, x) in wide.iter_mut().enumerate() {
                let bits: Vec<bool> = f.scope.iter().map(|&u| s >> (v - u) & 1 == 1).collect();
                *x *= entry(&f.table, &bits);
            }
        }
        // sum out variable v - width, the top bit
        w = (0..1 << width).map(|s| wide[s] + wide[s | 1 << width]).collect();
        let total: f64 = w.iter().sum();
        log_z += total.ln();
        w.iter_mut().for_each(|x| *x /= total);
    }
    log_z
}

/// Number of perfect matchings by branching on the lowest unmatched vertex.
pub fn perfect_matchings(n: usize, edges: &[[usize; 2]]) -> u64 {
    let mut adj = vec![Vec::new(); n];
    for &[a, b] in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    fn go(adj: &[Vec<usize>], matched: &mut Vec<bool>) -> u64 {
        let Some(v) = matched.iter().position(|&m| !m) else {
            return 1;
        };
        matched[v] = true;
        let mut count = 0;
        for &w in &adj[v] {
            if !matched[w] {
                matched[w] = true;
                count += go(adj, matched);
                matched[w] = false;
            }
        }
        matched[v] = false;
        count
    }
    if n % 2 == 1 {
        return 0;
    }
    go(&adj, &mut vec![false; n])
}

pub fn random_table(rng: &mut impl Rng, arity: usize, lo: f64, hi: f64) -> FactorTable {
    FactorTable::new(arity, (0..1 << arity).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// Random planar Forney graph: a cycle with up to `max_chords` non-crossing
/// chords, every chain subdivided so that the edge count stays within
/// `max_edges`. All tables are random and positive.
pub fn random_planar_forney(
    rng: &mut impl Rng,
    max_chords: usize,
    max_edges: usize,
    lo: f64,
    hi: f64,
) -> ForneyGraph {
    loop {
        let k = rng.random_range(4..=8usize);
        let mut deg = vec![2usize; k];
        let mut chords: Vec<[usize; 2]> = Vec::new();
        for _ in 0..rng.random_range(0..=max_chords) {
            let a = rng.random_range(0..k);
            let b = rng.random_range(0..k);
            let (a, b) = (a.min(b), a.max(b));
            let adjacent = b == a + 1 || (a == 0 && b == k - 1);
            let crosses = chords
                .iter()
                .any(|&[c, d]| (a < c && c < b && b < d) || (c < a && a < d && d < b));
            if a == b || adjacent || crosses || deg[a] == 3 || deg[b] == 3 || chords.contains(&[a, b]) {
                continue;
            }
            deg[a] += 1;
            deg[b] += 1;
            chords.push([a, b]);
        }
        let mut skeleton: Vec<[usize; 2]> = (0..k).map(|i| [i, (i + 1) % k]).collect();
        skeleton.extend(&chords);
        let base = skeleton.len();
        if base > max_edges {
            continue;
        }
        // spread extra degree-2 nodes over the skeleton edges
        let extra = rng.random_range(0..=max_edges - base);
        let mut splits = vec![0usize; base];
        for _ in 0..extra {
            splits[rng.random_range(0..base)] += 1;
        }
        let mut n = k;
        let mut edges = Vec::new();
        for (&[a, b], &s) in skeleton.iter().zip(&splits) {
            let mut prev = a;
            for _ in 0..s {
                edges.push([prev, n]);
                prev = n;
                n += 1;
            }
            edges.push([prev, b]);
        }
        let mut degree = vec![0; n];
        for &[a, b] in &edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let tables = (0..n)
            .map(|v| (format!("n{v}"), random_table(rng, degree[v], lo, hi)))
            .collect();
        if let Ok(g) = ForneyGraph::from_edge_list(tables, edges) {
            return g;
        }
    }
}

/// Random tree-shaped factor graph with pairwise and unary factors.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> FactorGraph {
    let names = (0..n).map(|v| format!("x{v}")).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut factors = Vec::new();
    for i in 1..n {
        let parent = order[rng.random_range(0..i)];
        factors.push(Factor {
            name: format!("p{i}"),
            scope: vec![parent, order[i]],
            table: random_table(rng, 2, 0.1, 3.0),
        });
    }
    for v in 0..n {
        if rng.random_bool(0.7) {
            factors.push(Factor {
                name: format!("u{v}"),
                scope: vec![v],
                table: random_table(rng, 1, 0.1, 3.0),
            });
        }
    }
    FactorGraph::new(names, factors).unwrap()
}

/// Ladder with four degree-3 nodes `c, e, h, l` and eight degree-2 nodes:
/// `c-e` on top, `h-l` below, two rungs and two end arcs.
pub struct Ladder {
    pub graph: ForneyGraph,
    pub c: usize,
    pub e: usize,
    pub h: usize,
    pub l: usize,
}

pub fn ladder(rng: &mut impl Rng) -> Ladder {
    let (c, e, h, l) = (0, 1, 2, 3);
    // chains between triplets with their number of interior nodes
    let chains = [([c, h], 2), ([c, h], 1), ([c, e], 1), ([e, l], 1), ([e, l], 2), ([h, l], 1)];
    let mut n = 4;
    let mut edges = Vec::new();
    for ([a, b], s) in chains {
        let mut prev = a;
        for _ in 0..s {
            edges.push([prev, n]);
            prev = n;
            n += 1;
        }
        edges.push([prev, b]);
    }
    assert_eq!((n, edges.len()), (12, 14));
    let tables = (0..n)
        .map(|v| {
            let arity = if v < 4 { 3 } else { 2 };
            (format!("n{v}"), random_table(rng, arity, 0.2, 2.0))
        })
        .collect();
    Ladder {
        graph: ForneyGraph::from_edge_list(tables, edges).unwrap(),
        c,
        e,
        h,
        l,
    }
}

/// Sum over perfect matchings of the product of edge weights.
pub fn matching_sum(n: usize, edges: &[[usize; 2]], weights: &[f64]) -> f64 {
    let mut adj = vec![Vec::new(); n];
    for (&[a, b], &w) in edges.iter().zip(weights) {
        adj[a].push((b, w));
        adj[b].push((a, w));
    }
    fn go(adj: &[Vec<(usize, f64)>], matched: &mut Vec<bool>) -> f64 {
        let Some(v) = matched.iter().position(|&m| !m) else {
            return 1.0;
        };
        matched[v] = true;
        let mut total = 0.0;
        for &(u, w) in &adj[v] {
            if !matched[u] {
                matched[u] = true;
                total += w * go(adj, matched);
                matched[u] = false;
            }
        }
        matched[v] = false;
        total
    }
    if n % 2 == 1 {
        return 0.0;
    }
    go(&adj, &mut vec![false; n])
}

/// Random planar graph: a `rows x cols` grid with edges kept with
/// probability `keep`, at most one diagonal per cell, isolated vertices
/// dropped and the rest relabelled at random.
pub fn random_planar_edges(rng: &mut impl Rng, rows: usize, cols: usize, keep: f64) -> (usize, Vec<[usize; 2]>) {
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols && rng.random_bool(keep) {
                edges.push([id(r, c), id(r, c + 1)]);
            }
            if r + 1 < rows && rng.random_bool(keep) {
                edges.push([id(r, c), id(r + 1, c)]);
            }
            if r + 1 < rows && c + 1 < cols && rng.random_bool(0.4) {
                if rng.random_bool(0.5) {
                    edges.push([id(r, c), id(r + 1, c + 1)]);
                } else {
                    edges.push([id(r, c + 1), id(r + 1, c)]);
                }
            }
        }
    }
    let mut used: Vec<usize> = edges.iter().flatten().copied().collect();
    used.sort_unstable();
    used.dedup();
    let mut labels: Vec<usize> = (0..used.len()).collect();
    labels.shuffle(rng);
    let relabel = |v: usize| labels[used.binary_search(&v).unwrap()];
    let mut edges: Vec<[usize; 2]> = edges.into_iter().map(|[a, b]| [relabel(a), relabel(b)]).collect();
    edges.shuffle(rng);
    (used.len(), edges)
}
