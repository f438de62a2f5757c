use super::PlanarError;
use crate::model::ForneyGraph;
use std::collections::HashSet;

pub type VertexId = usize;

/// Simple undirected graph with stable edge ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    edges: Vec<[VertexId; 2]>,
    adj: Vec<Vec<(VertexId, usize)>>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<[VertexId; 2]>) -> Result<Self, PlanarError> {
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for (e, &[a, b]) in edges.iter().enumerate() {
            for x in [a, b] {
                if x >= n {
                    return Err(PlanarError::VertexOutOfRange(x));
                }
            }
            if a == b {
                return Err(PlanarError::SelfLoop(a));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(PlanarError::ParallelEdge(a.min(b), a.max(b)));
            }
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        Ok(Graph { edges, adj })
    }

    /// Node/edge skeleton of a Forney graph; ids are shared.
    pub fn from_forney(g: &ForneyGraph) -> Self {
        Graph::new(g.num_nodes(), g.edges().to_vec()).expect("Forney graphs are simple")
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[[VertexId; 2]] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> [VertexId; 2] {
        self.edges[e]
    }

    /// `(neighbor, edge)` pairs in edge-id order.
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn other_end(&self, e: usize, v: VertexId) -> VertexId {
        let [a, b] = self.edges[e];
        if a == v { b } else { a }
    }

    /// Component label per vertex, labels numbered by smallest member.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.num_vertices();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adj[v] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// Biconnected blocks as edge lists (bridges form single-edge blocks).
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let none = usize::MAX;
        let mut disc = vec![none; n];
        let mut low = vec![0; n];
        let mut timer = 0;
        let mut blocks = Vec::new();
        let mut estack: Vec<usize> = Vec::new();
        let mut stack: Vec<(VertexId, usize, usize)> = Vec::new();
        for root in 0..n {
            if disc[root] != none || self.adj[root].is_empty() {
                continue;
            }
            disc[root] = timer;
            low[root] = timer;
            timer += 1;
            stack.push((root, none, 0));
            while let Some(top) = stack.last_mut() {
                let (v, pe, i) = *top;
                if i < self.adj[v].len() {
                    top.2 += 1;
                    let (w, e) = self.adj[v][i];
                    if e == pe {
                        continue;
                    }
                    if disc[w] == none {
                        estack.push(e);
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, e, 0));
                    } else if disc[w] < disc[v] {
                        estack.push(e);
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(u, _, _)) = stack.last() {
                        low[u] = low[u].min(low[v]);
                        if low[v] >= disc[u] {
                            let mut block = Vec::new();
                            while let Some(e) = estack.pop() {
                                block.push(e);
                                if e == pe {
                                    break;
                                }
                            }
                            block.reverse();
                            blocks.push(block);
                        }
                    }
                }
            }
        }
        blocks
    }

    /// Connected, no articulation vertex (graphs with at most one edge count).
    pub fn is_biconnected(&self) -> bool {
        let (count, _) = self.components();
        count <= 1 && self.blocks().len() <= 1
    }

    pub(crate) fn with_edges_added(&self, extra: &[[VertexId; 2]]) -> Result<Graph, PlanarError> {
        let mut edges = self.edges.clone();
        edges.extend_from_slice(extra);
        Graph::new(self.num_vertices(), edges)
    }
}
