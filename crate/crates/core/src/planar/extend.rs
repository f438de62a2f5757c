//! Fisher's extended graph: perfect matchings stand for 2-regular loops.
//!
//! Every remaining node `a` of a reduced Forney graph is replaced by one
//! port per incident edge. A degree-2 node gives two ports joined by one
//! internal edge; a degree-3 node gives a triangle of ports. Each Forney edge
//! becomes an external edge (weight 1) between the two ports serving it.
//! An external edge is matched exactly when its Forney edge is outside the
//! loop, so an internal edge between the ports of `e` and `f` at `a` stands
//! for `a` routing the loop through `e` and `f`, and carries weight
//! `μ_{a;{e,f}}`.
//!
//! Nodes in a removed set Ψ are deleted. Their neighbors' ports then have no
//! external edge and must be matched internally, which forces the Forney edge
//! into the loop; an edge joining two removed nodes simply disappears.

use super::embed::PlanarEmbedding;
use super::{Graph, PlanarError, VertexId, forney_embedding};
use crate::bp::{BpResult, mu_term};
use crate::model::{EdgeId, ForneyGraph, NodeId};
use std::collections::HashMap;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtEdgeKind {
    /// Stands for Forney edge `edge`; matched means the edge is outside the loop.
    External { edge: EdgeId },
    /// Node `node` routes the loop through both edges of `pair`.
    Internal { node: NodeId, pair: [EdgeId; 2] },
    /// Zero-weight edge added for bi-connectivity.
    Dummy,
}

/// Extended-graph vertex serving Forney edge `edge` at node `node`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Port {
    pub node: NodeId,
    pub edge: EdgeId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedGraph {
    graph: Graph,
    weights: Vec<f64>,
    kinds: Vec<ExtEdgeKind>,
    ports: Vec<Port>,
    embedding: PlanarEmbedding,
    psi: Vec<NodeId>,
    /// Ext edge standing for each Forney edge; `None` when it touches Ψ.
    external_of: Vec<Option<usize>>,
}

impl ExtendedGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kinds(&self) -> &[ExtEdgeKind] {
        &self.kinds
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn embedding(&self) -> &PlanarEmbedding {
        &self.embedding
    }

    pub fn psi(&self) -> &[NodeId] {
        &self.psi
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn num_dummies(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| matches!(k, ExtEdgeKind::Dummy))
            .count()
    }

    /// Forney edges forced into every loop because they touch Ψ.
    pub fn forced_edges(&self) -> Vec<EdgeId> {
        (0..self.external_of.len())
            .filter(|&e| self.external_of[e].is_none())
            .collect()
    }

    /// Forney edges of the loop encoded by a perfect matching (`matched[x]`
    /// per ext edge).
    pub fn loop_of_matching(&self, matched: &[bool]) -> Vec<EdgeId> {
        (0..self.external_of.len())
            .filter(|&e| self.external_of[e].is_none_or(|x| !matched[x]))
            .collect()
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (p, port) in self.ports.iter().enumerate() {
            writeln!(out, "port {p} node {} edge {}", port.node, port.edge).unwrap();
        }
        for (x, &[a, b]) in self.graph.edges().iter().enumerate() {
            let kind = match self.kinds[x] {
                ExtEdgeKind::External { edge } => format!("external {edge}"),
                ExtEdgeKind::Internal { node, pair } => {
                    format!("internal {node} {} {}", pair[0], pair[1])
                }
                ExtEdgeKind::Dummy => "dummy".to_string(),
            };
            writeln!(out, "edge {x} {a} {b} {:.16e} {kind}", self.weights[x]).unwrap();
        }
        out.push_str(&self.embedding.dump(&self.graph));
        out
    }
}

/// Builds the extended graph with BP loop weights `μ`, embedding `g` first.
pub fn fisher_extend(
    g: &ForneyGraph,
    res: &BpResult,
    psi: &[NodeId],
) -> Result<ExtendedGraph, PlanarError> {
    let emb = forney_embedding(g)?;
    fisher_extend_with(g, &emb, psi, |a, pair| mu_term(res, g, a, &pair))
}

/// Builds the extended graph over a given embedding of `g`, with internal
/// weights supplied by `weight(node, pair)`.
pub fn fisher_extend_with<E>(
    g: &ForneyGraph,
    emb: &PlanarEmbedding,
    psi: &[NodeId],
    mut weight: impl FnMut(NodeId, [EdgeId; 2]) -> Result<f64, E>,
) -> Result<ExtendedGraph, PlanarError>
where
    PlanarError: From<E>,
{
    for (a, node) in g.nodes().iter().enumerate() {
        if !matches!(node.edges.len(), 2 | 3) {
            return Err(PlanarError::NotReduced {
                node: a,
                degree: node.edges.len(),
            });
        }
    }
    let mut in_psi = vec![false; g.num_nodes()];
    for &a in psi {
        if a >= g.num_nodes() || g.degree(a) != 3 {
            return Err(PlanarError::NotATriplet(a));
        }
        in_psi[a] = true;
    }
    let mut psi: Vec<NodeId> = psi.to_vec();
    psi.sort_unstable();
    psi.dedup();

    let mut ports = Vec::new();
    let mut port_at: HashMap<(NodeId, EdgeId), VertexId> = HashMap::new();
    for (a, node) in g.nodes().iter().enumerate() {
        if in_psi[a] {
            continue;
        }
        for &e in &node.edges {
            port_at.insert((a, e), ports.len());
            ports.push(Port { node: a, edge: e });
        }
    }

    let mut edges = Vec::new();
    let mut weights = Vec::new();
    let mut kinds = Vec::new();
    // ext edge id of the internal edge between two ports
    let mut internal_at: HashMap<(VertexId, VertexId), usize> = HashMap::new();
    for (a, node) in g.nodes().iter().enumerate() {
        if in_psi[a] {
            continue;
        }
        let k = node.edges.len();
        for i in 0..k {
            for j in i + 1..k {
                let pair = [node.edges[i], node.edges[j]];
                let (p, q) = (port_at[&(a, pair[0])], port_at[&(a, pair[1])]);
                internal_at.insert((p, q), edges.len());
                internal_at.insert((q, p), edges.len());
                edges.push([p, q]);
                weights.push(weight(a, pair)?);
                kinds.push(ExtEdgeKind::Internal { node: a, pair });
            }
        }
    }
    let mut external_of = vec![None; g.num_edges()];
    for (e, &[a, b]) in g.edges().iter().enumerate() {
        if in_psi[a] || in_psi[b] {
            continue;
        }
        external_of[e] = Some(edges.len());
        edges.push([port_at[&(a, e)], port_at[&(b, e)]]);
        weights.push(1.0);
        kinds.push(ExtEdgeKind::External { edge: e });
    }

    // Each port sits where its edge meets the node, so its rotation is
    // external edge, then the port of the next edge, then the previous one.
    let mut rotation = Vec::with_capacity(ports.len());
    for (p, port) in ports.iter().enumerate() {
        let rot = emb.rotation(port.node);
        let k = rot.len();
        let i = rot.iter().position(|&e| e == port.edge).expect("port edge in rotation");
        let mut r = Vec::with_capacity(3);
        if let Some(x) = external_of[port.edge] {
            r.push(x);
        }
        let next = port_at[&(port.node, rot[(i + 1) % k])];
        r.push(internal_at[&(p, next)]);
        if k == 3 {
            let prev = port_at[&(port.node, rot[(i + k - 1) % k])];
            r.push(internal_at[&(p, prev)]);
        }
        rotation.push(r);
    }
    let graph = Graph::new(ports.len(), edges)?;
    let embedding = PlanarEmbedding::from_rotation(&graph, rotation)?;
    Ok(ExtendedGraph {
        graph,
        weights,
        kinds,
        ports,
        embedding,
        psi,
        external_of,
    })
}

/// Adds zero-weight dummy edges until the graph is connected with no
/// articulation vertex, keeping the embedding planar.
///
/// Components are first chained to the component of vertex 0. Then for
/// every vertex `v` and consecutive rotation neighbors `x`, `y` in different
/// blocks, the edge `x-y` is drawn through the corner `x, v, y`.
pub fn biconnect(ext: &ExtendedGraph) -> ExtendedGraph {
    let n = ext.num_nodes();
    let mut rotation = ext.embedding.rotations().to_vec();
    let mut added: Vec<[VertexId; 2]> = Vec::new();
    let base = ext.num_edges();

    let (count, label) = ext.graph.components();
    let mut first = vec![usize::MAX; count];
    for v in (0..n).rev() {
        first[label[v]] = v;
    }
    for &s in first.iter().skip(1) {
        let id = base + added.len();
        added.push([first[0], s]);
        rotation[first[0]].push(id);
        rotation[s].push(id);
    }
    let connected = ext.graph.with_edges_added(&added).expect("new edges join components");

    let blocks = connected.blocks();
    let mut block_of = vec![0usize; connected.num_edges()];
    for (b, block) in blocks.iter().enumerate() {
        for &e in block {
            block_of[e] = b;
        }
    }
    let mut parent: Vec<usize> = (0..blocks.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut ends: Vec<[VertexId; 2]> = connected.edges().to_vec();
    for v in 0..n {
        let deg = rotation[v].len();
        for t in 0..deg {
            let e1 = rotation[v][t];
            let e2 = rotation[v][(t + 1) % deg];
            let b1 = find(&mut parent, block_of[e1]);
            let b2 = find(&mut parent, block_of[e2]);
            if b1 == b2 {
                continue;
            }
            let other = |e: usize| if ends[e][0] == v { ends[e][1] } else { ends[e][0] };
            let (x, y) = (other(e1), other(e2));
            let id = ends.len();
            ends.push([x, y]);
            added.push([x, y]);
            parent[b2] = b1;
            block_of.push(b1);
            let at_x = rotation[x].iter().position(|&e| e == e1).expect("edge at x");
            rotation[x].insert(at_x, id);
            let at_y = rotation[y].iter().position(|&e| e == e2).expect("edge at y");
            rotation[y].insert(at_y + 1, id);
        }
    }

    let graph = ext.graph.with_edges_added(&added).expect("dummy edges keep the graph simple");
    let embedding = PlanarEmbedding::from_rotation(&graph, rotation)
        .expect("dummy edges are drawn inside faces");
    let mut weights = ext.weights.clone();
    let mut kinds = ext.kinds.clone();
    weights.resize(graph.num_edges(), 0.0);
    kinds.resize(graph.num_edges(), ExtEdgeKind::Dummy);
    ExtendedGraph {
        graph,
        weights,
        kinds,
        ports: ext.ports.clone(),
        embedding,
        psi: ext.psi.clone(),
        external_of: ext.external_of.clone(),
    }
}

/// Wraps an arbitrary embedded graph with explicit weights (all edges
/// treated as internal to node 0); used for matching-level tests and tools.
pub fn weighted_planar_graph(
    graph: Graph,
    weights: Vec<f64>,
    embedding: PlanarEmbedding,
) -> ExtendedGraph {
    assert_eq!(weights.len(), graph.num_edges());
    let kinds = vec![ExtEdgeKind::Internal { node: 0, pair: [0, 0] }; graph.num_edges()];
    ExtendedGraph {
        ports: Vec::new(),
        psi: Vec::new(),
        external_of: Vec::new(),
        graph,
        weights,
        kinds,
        embedding,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FactorTable;
    use std::convert::Infallible;

    fn theta() -> ForneyGraph {
        // two triplets joined by three paths of lengths 1, 2, 3
        let t = FactorTable::equality(3);
        let d = FactorTable::equality(2);
        ForneyGraph::from_edge_list(
            vec![
                ("a".into(), t.clone()),
                ("b".into(), t),
                ("p".into(), d.clone()),
                ("q".into(), d.clone()),
                ("r".into(), d),
            ],
            vec![[0, 1], [0, 2], [2, 1], [0, 3], [3, 4], [4, 1]],
        )
        .unwrap()
    }

    fn unit(_: NodeId, _: [EdgeId; 2]) -> Result<f64, Infallible> {
        Ok(1.0)
    }

    #[test]
    fn gadget_sizes_and_bounds() {
        let g = theta();
        let emb = forney_embedding(&g).unwrap();
        let ext = fisher_extend_with(&g, &emb, &[], unit).unwrap();
        assert_eq!(ext.num_nodes(), 3 + 3 + 2 * 3);
        assert_eq!(ext.num_edges(), 6 + 3 + 3 + 3);
        assert!(ext.num_nodes() <= 3 * g.num_nodes());
        assert!(ext.num_edges() <= 3 * g.num_edges());
        assert!(ext.graph().is_biconnected());
    }

    #[test]
    fn psi_removal_forces_neighbor_edges() {
        let g = theta();
        let emb = forney_embedding(&g).unwrap();
        let ext = fisher_extend_with(&g, &emb, &[0, 1], unit).unwrap();
        assert_eq!(ext.psi(), &[0, 1]);
        // edge 0 joins the two removed triplets and vanishes
        assert_eq!(ext.forced_edges(), vec![0, 1, 2, 3, 5]);
        assert_eq!(ext.num_nodes(), 6);
        assert_eq!(ext.num_edges(), 3 + 1);
        assert!(matches!(
            fisher_extend_with(&g, &emb, &[2], unit),
            Err(PlanarError::NotATriplet(2))
        ));
    }

    #[test]
    fn biconnect_joins_components_and_blocks() {
        let g = theta();
        let emb = forney_embedding(&g).unwrap();
        let ext = fisher_extend_with(&g, &emb, &[0, 1], unit).unwrap();
        assert!(!ext.graph().is_biconnected());
        let bi = biconnect(&ext);
        assert!(bi.graph().is_biconnected());
        assert!(bi.num_dummies() >= 2);
        assert!(bi.weights()[ext.num_edges()..].iter().all(|&w| w == 0.0));

        let already = fisher_extend_with(&g, &emb, &[], unit).unwrap();
        assert_eq!(biconnect(&already), already);
    }

    #[test]
    fn bowtie_needs_one_dummy() {
        let g = Graph::new(5, vec![[0, 1], [1, 2], [2, 0], [2, 3], [3, 4], [4, 2]]).unwrap();
        let emb = super::super::embed(&g).unwrap();
        let ext = weighted_planar_graph(g, vec![1.0; 6], emb);
        let bi = biconnect(&ext);
        assert_eq!(bi.num_dummies(), 1);
        assert!(bi.graph().is_biconnected());
    }
}
