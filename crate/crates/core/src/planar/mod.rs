//! Planar embeddings, the extended matching graph and Pfaffian orientations.

mod embed;
mod extend;
mod graph;
mod orient;

pub use embed::{
    Dart, KuratowskiKind, KuratowskiWitness, PlanarEmbedding, dart_from, dart_head, dart_tail,
    embed, is_planar, kuratowski_witness,
};
pub use extend::{
    ExtEdgeKind, ExtendedGraph, Port, biconnect, fisher_extend, fisher_extend_with,
    weighted_planar_graph,
};
pub use graph::{Graph, VertexId};
pub use orient::{OrientedPlanarGraph, orient};

use crate::bp::BpError;
use crate::model::ForneyGraph;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanarError {
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edges between {0} and {1}")]
    ParallelEdge(usize, usize),
    #[error("graph is not planar: {0}")]
    NonPlanar(KuratowskiWitness),
    #[error("invalid rotation system: {0}")]
    InvalidRotation(String),
    #[error("graph is not bi-connected")]
    NotBiconnected,
    #[error("node {node} has degree {degree}; expected 2 or 3")]
    NotReduced { node: usize, degree: usize },
    #[error("node {0} is not a degree-3 node")]
    NotATriplet(usize),
    #[error(transparent)]
    Bp(#[from] BpError),
}

impl From<std::convert::Infallible> for PlanarError {
    fn from(x: std::convert::Infallible) -> Self {
        match x {}
    }
}

/// Embedding of a Forney graph. Each node's variable order is tried as its
/// rotation first (degree reduction of an aligned graph produces one); if
/// that is not planar an embedding is computed.
pub fn forney_embedding(g: &ForneyGraph) -> Result<PlanarEmbedding, PlanarError> {
    let graph = Graph::from_forney(g);
    let rotation = g.nodes().iter().map(|n| n.edges.clone()).collect();
    match PlanarEmbedding::from_rotation(&graph, rotation) {
        Ok(emb) => Ok(emb),
        Err(_) => embed(&graph),
    }
}

/// Reorders every node's variables to follow a planar rotation, so that
/// splitting high-degree nodes into chains keeps the graph planar.
pub fn align_to_rotation(g: &ForneyGraph) -> Result<ForneyGraph, PlanarError> {
    let emb = embed(&Graph::from_forney(g))?;
    let orders: Vec<Vec<usize>> = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(a, node)| {
            emb.rotation(a)
                .iter()
                .map(|e| node.edges.iter().position(|x| x == e).expect("incident edge"))
                .collect()
        })
        .collect();
    Ok(g.with_node_orders(&orders))
}
