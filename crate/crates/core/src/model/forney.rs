use super::{FactorTable, ModelError};
use std::collections::HashSet;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct ForneyNode {
    pub name: String,
    /// Incident edges; position `j` is variable `j` of `table`.
    pub edges: Vec<EdgeId>,
    pub table: FactorTable,
}

/// Forney (normal) graph: nodes are interactions, edges are binary variables.
///
/// The represented partition function is `exp(log_scale) * sum_σ prod_a f_a`;
/// `log_scale` collects factors absorbed while simplifying the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct ForneyGraph {
    nodes: Vec<ForneyNode>,
    edges: Vec<[NodeId; 2]>,
    log_scale: f64,
}

impl ForneyGraph {
    /// Builds a graph from nodes whose `edges` lists refer into `edges`.
    pub fn from_parts(
        nodes: Vec<ForneyNode>,
        edges: Vec<[NodeId; 2]>,
        log_scale: f64,
    ) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for (e, &[a, b]) in edges.iter().enumerate() {
            if a >= nodes.len() {
                return Err(ModelError::NodeOutOfRange(a));
            }
            if b >= nodes.len() {
                return Err(ModelError::NodeOutOfRange(b));
            }
            if a == b {
                return Err(ModelError::SelfLoop(e));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(ModelError::ParallelEdge(a.min(b), a.max(b)));
            }
        }
        let mut incidence = vec![0usize; edges.len()];
        for (id, node) in nodes.iter().enumerate() {
            if node.table.arity() != node.edges.len() {
                return Err(ModelError::DegreeMismatch {
                    node: id,
                    degree: node.edges.len(),
                    arity: node.table.arity(),
                });
            }
            for &e in &node.edges {
                if e >= edges.len() || !edges[e].contains(&id) {
                    return Err(ModelError::DegreeMismatch {
                        node: id,
                        degree: node.edges.len(),
                        arity: node.table.arity(),
                    });
                }
                incidence[e] += 1;
            }
        }
        if let Some(e) = incidence.iter().position(|&c| c != 2) {
            let [a, b] = edges[e];
            return Err(ModelError::DegreeMismatch {
                node: a,
                degree: nodes[a].edges.len(),
                arity: nodes[b].edges.len(),
            });
        }
        Ok(ForneyGraph {
            nodes,
            edges,
            log_scale,
        })
    }

    /// Builds a graph from named tables and an edge list; each node's
    /// variable order is the order in which its edges appear in `edges`.
    pub fn from_edge_list(
        tables: Vec<(String, FactorTable)>,
        edges: Vec<[NodeId; 2]>,
    ) -> Result<Self, ModelError> {
        let mut lists = vec![Vec::new(); tables.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if a >= tables.len() {
                return Err(ModelError::NodeOutOfRange(a));
            }
            if b >= tables.len() {
                return Err(ModelError::NodeOutOfRange(b));
            }
            if a == b {
                return Err(ModelError::SelfLoop(e));
            }
            lists[a].push(e);
            lists[b].push(e);
        }
        let nodes = tables
            .into_iter()
            .zip(lists)
            .map(|((name, table), edges)| ForneyNode { name, edges, table })
            .collect();
        Self::from_parts(nodes, edges, 0.0)
    }

    pub fn empty(log_scale: f64) -> Self {
        ForneyGraph {
            nodes: Vec::new(),
            edges: Vec::new(),
            log_scale,
        }
    }

    pub fn nodes(&self) -> &[ForneyNode] {
        &self.nodes
    }

    pub fn node(&self, a: NodeId) -> &ForneyNode {
        &self.nodes[a]
    }

    pub fn edges(&self) -> &[[NodeId; 2]] {
        &self.edges
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn degree(&self, a: NodeId) -> usize {
        self.nodes[a].edges.len()
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn other_end(&self, e: EdgeId, a: NodeId) -> NodeId {
        let [x, y] = self.edges[e];
        if x == a { y } else { x }
    }

    /// Position of edge `e` in node `a`'s variable order.
    pub fn edge_position(&self, a: NodeId, e: EdgeId) -> Option<usize> {
        self.nodes[a].edges.iter().position(|&x| x == e)
    }

    pub fn max_degree(&self) -> usize {
        self.nodes.iter().map(|n| n.edges.len()).max().unwrap_or(0)
    }

    /// All degrees in {2, 3}: the shape produced by degree reduction plus 2-core.
    pub fn is_reduced(&self) -> bool {
        self.nodes.iter().all(|n| matches!(n.edges.len(), 2 | 3))
    }

    /// Degree-3 nodes in increasing id order.
    pub fn triplets(&self) -> Vec<NodeId> {
        (0..self.nodes.len())
            .filter(|&a| self.degree(a) == 3)
            .collect()
    }

    /// Same graph with each node's variables reordered; `orders[a][j]` is the
    /// old position that becomes position `j`.
    pub fn with_node_orders(&self, orders: &[Vec<usize>]) -> ForneyGraph {
        let nodes = self
            .nodes
            .iter()
            .zip(orders)
            .map(|(node, order)| ForneyNode {
                name: node.name.clone(),
                edges: order.iter().map(|&p| node.edges[p]).collect(),
                table: node.table.permuted(order),
            })
            .collect();
        ForneyGraph {
            nodes,
            edges: self.edges.clone(),
            log_scale: self.log_scale,
        }
    }

    /// Folds `log_scale` into the first node's table (or a lone degree-0 node)
    /// so the graph can be written without losing the constant.
    pub fn with_scale_folded(&self) -> ForneyGraph {
        if self.log_scale == 0.0 {
            return self.clone();
        }
        let factor = self.log_scale.exp();
        let mut g = self.clone();
        g.log_scale = 0.0;
        if let Some(first) = g.nodes.first_mut() {
            first.table = first.table.scaled(factor);
        } else {
            g.nodes.push(ForneyNode {
                name: "scale".into(),
                edges: Vec::new(),
                table: FactorTable::new(0, vec![factor]).expect("positive scale"),
            });
        }
        g
    }

    pub(crate) fn into_parts(self) -> (Vec<ForneyNode>, Vec<[NodeId; 2]>, f64) {
        (self.nodes, self.edges, self.log_scale)
    }
}
