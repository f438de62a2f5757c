//! Combinatorial planar embeddings.
//!
//! An embedding is a rotation system: for each vertex, the cyclic order of
//! its incident edges. Dart `2e` runs `edges[e][0] -> edges[e][1]` and dart
//! `2e + 1` the reverse. Faces are traced with the rule that the dart after
//! `u -> v` leaves `v` along the edge following `{u, v}` in the rotation at `v`.
//! Every face is traversed in the same rotational sense, which is the sense
//! treated as "clockwise" by the orientation code.
//!
//! Embeddings are computed per biconnected block with the
//! Demoucron-Malgrange-Pertuiset path-addition algorithm and joined at cut
//! vertices by concatenating rotations.

use super::{Graph, PlanarError, VertexId};
use std::collections::VecDeque;
use std::fmt::{self, Write};

pub type Dart = usize;

#[inline]
pub fn dart_tail(g: &Graph, d: Dart) -> VertexId {
    g.edge(d / 2)[d % 2]
}

#[inline]
pub fn dart_head(g: &Graph, d: Dart) -> VertexId {
    g.edge(d / 2)[1 - d % 2]
}

/// Dart leaving `v` along edge `e`.
#[inline]
pub fn dart_from(g: &Graph, e: usize, v: VertexId) -> Dart {
    if g.edge(e)[0] == v { 2 * e } else { 2 * e + 1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KuratowskiKind {
    K5,
    K33,
}

/// Edge set of a subdivision of K5 or K3,3 inside a non-planar graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KuratowskiWitness {
    pub kind: KuratowskiKind,
    pub edges: Vec<[VertexId; 2]>,
}

impl fmt::Display for KuratowskiWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            KuratowskiKind::K5 => "K5",
            KuratowskiKind::K33 => "K3,3",
        };
        write!(f, "subdivision of {kind} on edges")?;
        for [a, b] in &self.edges {
            write!(f, " {a}-{b}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarEmbedding {
    rotation: Vec<Vec<usize>>,
    faces: Vec<Vec<Dart>>,
    dart_face: Vec<usize>,
    external: Option<usize>,
}

impl PlanarEmbedding {
    /// Validates a rotation system against `g` and traces its faces.
    ///
    /// Fails unless every rotation is a permutation of the incident edges and
    /// each connected component has Euler characteristic 2.
    pub fn from_rotation(g: &Graph, rotation: Vec<Vec<usize>>) -> Result<Self, PlanarError> {
        let n = g.num_vertices();
        if rotation.len() != n {
            return Err(PlanarError::InvalidRotation(format!(
                "{} rotations for {n} vertices",
                rotation.len()
            )));
        }
        let m = g.num_edges();
        // position of each dart's edge in the rotation at its tail
        let mut rot_pos = vec![usize::MAX; 2 * m];
        for (v, rot) in rotation.iter().enumerate() {
            if rot.len() != g.degree(v) {
                return Err(PlanarError::InvalidRotation(format!(
                    "vertex {v} lists {} edges, has degree {}",
                    rot.len(),
                    g.degree(v)
                )));
            }
            for (i, &e) in rot.iter().enumerate() {
                if e >= m || !g.edge(e).contains(&v) {
                    return Err(PlanarError::InvalidRotation(format!(
                        "edge {e} is not incident to vertex {v}"
                    )));
                }
                let d = dart_from(g, e, v);
                if rot_pos[d] != usize::MAX {
                    return Err(PlanarError::InvalidRotation(format!(
                        "edge {e} repeated at vertex {v}"
                    )));
                }
                rot_pos[d] = i;
            }
        }
        let next = |d: Dart| -> Dart {
            let v = dart_head(g, d);
            let back = d ^ 1;
            let rot = &rotation[v];
            let e = rot[(rot_pos[back] + 1) % rot.len()];
            dart_from(g, e, v)
        };
        let mut dart_face = vec![usize::MAX; 2 * m];
        let mut faces = Vec::new();
        for start in 0..2 * m {
            if dart_face[start] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let mut face = Vec::new();
            let mut d = start;
            loop {
                dart_face[d] = id;
                face.push(d);
                d = next(d);
                if d == start {
                    break;
                }
            }
            faces.push(face);
        }
        let (count, label) = g.components();
        let mut chi = vec![0i64; count];
        let mut has_edge = vec![false; count];
        for v in 0..n {
            chi[label[v]] += 1;
        }
        for &[a, _] in g.edges() {
            chi[label[a]] -= 1;
            has_edge[label[a]] = true;
        }
        for face in &faces {
            chi[label[dart_tail(g, face[0])]] += 1;
        }
        if let Some(c) = (0..count).find(|&c| has_edge[c] && chi[c] != 2) {
            return Err(PlanarError::InvalidRotation(format!(
                "component {c} has Euler characteristic {}",
                chi[c]
            )));
        }
        let mut external = None;
        for (f, face) in faces.iter().enumerate() {
            if external.is_none_or(|x: usize| face.len() > faces[x].len()) {
                external = Some(f);
            }
        }
        Ok(PlanarEmbedding {
            rotation,
            faces,
            dart_face,
            external,
        })
    }

    pub fn rotation(&self, v: VertexId) -> &[usize] {
        &self.rotation[v]
    }

    pub fn rotations(&self) -> &[Vec<usize>] {
        &self.rotation
    }

    pub fn faces(&self) -> &[Vec<Dart>] {
        &self.faces
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn face_of(&self, d: Dart) -> usize {
        self.dart_face[d]
    }

    /// First face of maximal length; `None` for an edgeless graph.
    pub fn external(&self) -> Option<usize> {
        self.external
    }

    /// Tails of the face's darts, in traversal order.
    pub fn face_vertices(&self, g: &Graph, f: usize) -> Vec<VertexId> {
        self.faces[f].iter().map(|&d| dart_tail(g, d)).collect()
    }

    pub fn into_rotations(self) -> Vec<Vec<usize>> {
        self.rotation
    }

    pub fn dump(&self, g: &Graph) -> String {
        let mut out = String::new();
        for (v, rot) in self.rotation.iter().enumerate() {
            write!(out, "rotation {v}:").unwrap();
            for e in rot {
                write!(out, " {e}").unwrap();
            }
            out.push('\n');
        }
        for f in 0..self.faces.len() {
            write!(out, "face {f}:").unwrap();
            for v in self.face_vertices(g, f) {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        if let Some(x) = self.external {
            writeln!(out, "external {x}").unwrap();
        }
        out
    }
}

/// Computes a planar embedding, or a Kuratowski witness if there is none.
pub fn embed(g: &Graph) -> Result<PlanarEmbedding, PlanarError> {
    match block_rotations(g) {
        Some(rotation) => Ok(PlanarEmbedding::from_rotation(g, rotation)
            .expect("block embeddings join into a planar rotation system")),
        None => Err(PlanarError::NonPlanar(kuratowski_witness(g))),
    }
}

pub fn is_planar(g: &Graph) -> bool {
    block_rotations(g).is_some()
}

fn block_rotations(g: &Graph) -> Option<Vec<Vec<usize>>> {
    let mut rotation = vec![Vec::new(); g.num_vertices()];
    for block in g.blocks() {
        if let [e] = block[..] {
            let [a, b] = g.edge(e);
            rotation[a].push(e);
            rotation[b].push(e);
            continue;
        }
        let mut local = Vec::new();
        let mut index = std::collections::HashMap::new();
        let mut local_edges = Vec::with_capacity(block.len());
        for &e in &block {
            let [a, b] = g.edge(e).map(|v| {
                *index.entry(v).or_insert_with(|| {
                    local.push(v);
                    local.len() - 1
                })
            });
            local_edges.push([a, b]);
        }
        let faces = dmp(local.len(), &local_edges)?;
        let block_graph = Graph::new(local.len(), local_edges).expect("subgraph of a simple graph");
        for (lv, rot) in rotation_from_faces(&block_graph, &faces).into_iter().enumerate() {
            rotation[local[lv]].extend(rot.into_iter().map(|le| block[le]));
        }
    }
    Some(rotation)
}

/// Rotation at each vertex from consistently oriented vertex-cycle faces.
fn rotation_from_faces(g: &Graph, faces: &[Vec<VertexId>]) -> Vec<Vec<usize>> {
    let n = g.num_vertices();
    // succ[v][i] = index in adj[v] of the neighbor following adj[v][i]
    let mut succ: Vec<Vec<usize>> = (0..n).map(|v| vec![usize::MAX; g.degree(v)]).collect();
    let slot = |v: VertexId, u: VertexId| {
        g.neighbors(v)
            .iter()
            .position(|&(w, _)| w == u)
            .expect("face walks follow edges")
    };
    for face in faces {
        let len = face.len();
        for t in 0..len {
            let u = face[(t + len - 1) % len];
            let v = face[t];
            let w = face[(t + 1) % len];
            succ[v][slot(v, u)] = slot(v, w);
        }
    }
    (0..n)
        .map(|v| {
            let mut rot = Vec::with_capacity(g.degree(v));
            let mut i = 0;
            for _ in 0..g.degree(v) {
                rot.push(g.neighbors(v)[i].1);
                i = succ[v][i];
            }
            rot
        })
        .collect()
}

struct Fragment {
    attach: Vec<VertexId>,
    chord: Option<usize>,
    member: Option<usize>,
}

/// Faces (vertex cycles) of a planar embedding of a biconnected graph with a
/// cycle, or `None` if the graph is not planar.
fn dmp(n: usize, edges: &[[VertexId; 2]]) -> Option<Vec<Vec<VertexId>>> {
    let m = edges.len();
    let mut adj = vec![Vec::new(); n];
    for (e, &[a, b]) in edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut emb_v = vec![false; n];
    let mut emb_e = vec![false; m];

    // initial cycle: edge 0 plus a path between its ends avoiding it
    let [s, t] = edges[0];
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[s] = true;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        for &(w, e) in &adj[v] {
            if e != 0 && !seen[w] {
                seen[w] = true;
                parent[w] = Some((v, e));
                queue.push_back(w);
            }
        }
    }
    let mut cycle = vec![t];
    emb_e[0] = true;
    let mut v = t;
    while let Some((p, e)) = parent[v] {
        emb_e[e] = true;
        cycle.push(p);
        v = p;
    }
    if v != s {
        return None;
    }
    for &v in &cycle {
        emb_v[v] = true;
    }
    let mut remaining = m - cycle.len();
    let mut faces = vec![cycle.clone(), cycle.iter().rev().copied().collect::<Vec<_>>()];
    let mut face_has: Vec<Vec<bool>> = faces
        .iter()
        .map(|f| {
            let mut has = vec![false; n];
            f.iter().for_each(|&v| has[v] = true);
            has
        })
        .collect();

    let mut comp = vec![usize::MAX; n];
    let mut stamp = vec![usize::MAX; n];
    while remaining > 0 {
        let mut frags = Vec::new();
        for (e, &[a, b]) in edges.iter().enumerate() {
            if !emb_e[e] && emb_v[a] && emb_v[b] {
                frags.push(Fragment {
                    attach: vec![a, b],
                    chord: Some(e),
                    member: None,
                });
            }
        }
        comp.iter_mut().for_each(|c| *c = usize::MAX);
        for root in 0..n {
            if emb_v[root] || comp[root] != usize::MAX {
                continue;
            }
            let id = frags.len();
            let mut attach = Vec::new();
            comp[root] = id;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &(w, _) in &adj[v] {
                    if emb_v[w] {
                        if stamp[w] != id {
                            stamp[w] = id;
                            attach.push(w);
                        }
                    } else if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            frags.push(Fragment {
                attach,
                chord: None,
                member: Some(root),
            });
        }
        stamp.iter_mut().for_each(|s| *s = usize::MAX);

        let mut choice = None;
        for (fi, frag) in frags.iter().enumerate() {
            let mut admissible = (0..faces.len())
                .filter(|&f| frag.attach.iter().all(|&v| face_has[f][v]));
            let first = admissible.next()?;
            let unique = admissible.next().is_none();
            if unique {
                choice = Some((fi, first));
                break;
            }
            if choice.is_none() {
                choice = Some((fi, first));
            }
        }
        let (fi, face) = choice.expect("at least one fragment while edges remain");
        let frag = &frags[fi];

        // path a = x0, x1, .., b through the fragment
        let mut path = Vec::new();
        match (frag.chord, frag.member) {
            (Some(e), _) => {
                emb_e[e] = true;
                path.extend(edges[e]);
            }
            (None, Some(member)) => {
                let id = comp[member];
                let a = frag.attach[0];
                let mut prev: Vec<Option<(VertexId, usize)>> = vec![None; n];
                let mut queue = VecDeque::new();
                for &(w, e) in &adj[a] {
                    if !emb_v[w] && comp[w] == id && prev[w].is_none() {
                        prev[w] = Some((a, e));
                        queue.push_back(w);
                    }
                }
                let mut end = None;
                'search: while let Some(v) = queue.pop_front() {
                    for &(w, e) in &adj[v] {
                        if emb_v[w] && w != a {
                            end = Some((w, v, e));
                            break 'search;
                        }
                        if !emb_v[w] && prev[w].is_none() {
                            prev[w] = Some((v, e));
                            queue.push_back(w);
                        }
                    }
                }
                // biconnected blocks give every fragment two attachments
                let (b, last, e) = end?;
                emb_e[e] = true;
                path.push(b);
                let mut v = last;
                while v != a {
                    path.push(v);
                    emb_v[v] = true;
                    let (p, e) = prev[v].expect("BFS tree");
                    emb_e[e] = true;
                    v = p;
                }
                path.push(a);
                path.reverse();
            }
            (None, None) => unreachable!(),
        }
        remaining -= path.len() - 1;

        let old = std::mem::take(&mut faces[face]);
        let len = old.len();
        let i = old.iter().position(|&v| v == path[0]).expect("attachment on face");
        let j = old.iter().position(|&v| v == *path.last().unwrap()).expect("attachment on face");
        let interior = &path[1..path.len() - 1];
        let arc = |from: usize, to: usize| {
            let mut out = Vec::new();
            let mut k = from;
            loop {
                out.push(old[k]);
                if k == to {
                    break;
                }
                k = (k + 1) % len;
            }
            out
        };
        let mut f1 = arc(i, j);
        f1.extend(interior.iter().rev());
        let mut f2 = arc(j, i);
        f2.extend(interior.iter());
        let mark = |f: &[VertexId]| {
            let mut has = vec![false; n];
            f.iter().for_each(|&v| has[v] = true);
            has
        };
        face_has[face] = mark(&f1);
        face_has.push(mark(&f2));
        faces[face] = f1;
        faces.push(f2);
    }
    Some(faces)
}

/// Shrinks a non-planar graph to a minimal non-planar edge set and names it.
pub fn kuratowski_witness(g: &Graph) -> KuratowskiWitness {
    let n = g.num_vertices();
    let mut keep = g.edges().to_vec();
    let mut i = 0;
    while i < keep.len() {
        let mut trial = keep.clone();
        trial.remove(i);
        let sub = Graph::new(n, trial.clone()).expect("subgraph of a simple graph");
        if is_planar(&sub) {
            i += 1;
        } else {
            keep = trial;
        }
    }
    let mut degree = vec![0usize; n];
    for &[a, b] in &keep {
        degree[a] += 1;
        degree[b] += 1;
    }
    let branch = degree.iter().filter(|&&d| d >= 3).count();
    let kind = if branch == 5 {
        KuratowskiKind::K5
    } else {
        KuratowskiKind::K33
    };
    KuratowskiWitness { kind, edges: keep }
}
