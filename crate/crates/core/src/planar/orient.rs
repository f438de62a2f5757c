//! Pfaffian (Kasteleyn) orientation of an embedded bi-connected graph.
//!
//! A BFS spanning tree is oriented from lower to higher vertex id. The
//! remaining edges form a spanning tree of the dual, rooted at the external
//! face. Faces are processed leaves first; when a face is reached, its edge
//! to the parent face is the only one left unoriented, and it is oriented so
//! that the number of boundary edges agreeing with the face traversal
//! direction is odd.

use super::{ExtendedGraph, PlanarError};
use std::collections::VecDeque;
use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct OrientedPlanarGraph {
    ext: ExtendedGraph,
    /// `forward[e]`: edge `e` points from `edges[e][0]` to `edges[e][1]`.
    forward: Vec<bool>,
}

impl OrientedPlanarGraph {
    pub fn ext(&self) -> &ExtendedGraph {
        &self.ext
    }

    pub fn forward(&self) -> &[bool] {
        &self.forward
    }

    /// `(tail, head)` of edge `e` under the orientation.
    pub fn directed(&self, e: usize) -> (usize, usize) {
        let [a, b] = self.ext.graph().edge(e);
        if self.forward[e] { (a, b) } else { (b, a) }
    }

    /// Number of boundary darts of face `f` that agree with the orientation.
    pub fn clockwise_count(&self, f: usize) -> usize {
        self.ext.embedding().faces()[f]
            .iter()
            .filter(|&&d| self.forward[d / 2] == (d % 2 == 0))
            .count()
    }

    /// Every face except the external one has an odd clockwise count.
    pub fn is_kasteleyn(&self) -> bool {
        let emb = self.ext.embedding();
        (0..emb.num_faces())
            .filter(|&f| Some(f) != emb.external())
            .all(|f| self.clockwise_count(f) % 2 == 1)
    }

    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in 0..self.forward.len() {
            let (t, h) = self.directed(e);
            writeln!(out, "edge {e} {t} -> {h}").unwrap();
        }
        let emb = self.ext.embedding();
        for f in 0..emb.num_faces() {
            let mark = if Some(f) == emb.external() { " external" } else { "" };
            writeln!(out, "face {f} clockwise {}{mark}", self.clockwise_count(f)).unwrap();
        }
        out
    }
}

pub fn orient(ext: &ExtendedGraph) -> Result<OrientedPlanarGraph, PlanarError> {
    let g = ext.graph();
    if !g.is_biconnected() {
        return Err(PlanarError::NotBiconnected);
    }
    let n = g.num_vertices();
    let m = g.num_edges();
    let mut forward = vec![false; m];
    if m == 0 {
        return Ok(OrientedPlanarGraph {
            ext: ext.clone(),
            forward,
        });
    }

    let mut tree = vec![false; m];
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                tree[e] = true;
                queue.push_back(w);
            }
        }
    }
    for e in 0..m {
        if tree[e] {
            let [a, b] = g.edge(e);
            forward[e] = a < b;
        }
    }

    let emb = ext.embedding();
    let root = emb.external().expect("graph has edges");
    let faces = emb.faces();
    let mut parent_edge = vec![usize::MAX; faces.len()];
    let mut visited = vec![false; faces.len()];
    visited[root] = true;
    let mut order = vec![root];
    let mut head = 0;
    while head < order.len() {
        let f = order[head];
        head += 1;
        for &d in &faces[f] {
            let e = d / 2;
            if tree[e] {
                continue;
            }
            let other = emb.face_of(d ^ 1);
            if !visited[other] {
                visited[other] = true;
                parent_edge[other] = e;
                order.push(other);
            }
        }
    }
    debug_assert_eq!(order.len(), faces.len(), "dual of the cotree is spanning");

    for &f in order.iter().skip(1).rev() {
        let pe = parent_edge[f];
        let mut count = 0;
        let mut parent_dart = None;
        for &d in &faces[f] {
            if d / 2 == pe {
                parent_dart = Some(d);
            } else if forward[d / 2] == (d % 2 == 0) {
                count += 1;
            }
        }
        let dp = parent_dart.expect("parent edge lies on the face");
        // the parent dart must agree exactly when the rest is even
        forward[pe] = (dp % 2 == 0) == (count % 2 == 0);
    }

    let oriented = OrientedPlanarGraph {
        ext: ext.clone(),
        forward,
    };
    debug_assert!(oriented.is_kasteleyn());
    Ok(oriented)
}
