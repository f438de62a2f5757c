use super::{FactorGraph, FactorTable, ForneyGraph, ForneyNode, ModelError, NodeId};
use std::collections::{HashSet, VecDeque};

/// Converts a factor graph into an equivalent Forney graph.
///
/// Factor nodes come first, in factor order, and keep their scope order.
/// A variable shared by three or more factors becomes an equality node
/// `eq:<name>`; a variable in exactly two factors becomes a direct edge
/// (or, if those two factors are already joined, an edge through a degree-2
/// equality node); a variable in one factor hangs off a uniform stub node
/// `stub:<name>` that `two_core` later absorbs.
pub fn factor_to_forney(fg: &FactorGraph) -> Result<ForneyGraph, ModelError> {
    let occ = fg.occurrences();
    let mut nodes: Vec<ForneyNode> = fg
        .factors()
        .iter()
        .map(|f| ForneyNode {
            name: f.name.clone(),
            edges: vec![usize::MAX; f.scope.len()],
            table: f.table.clone(),
        })
        .collect();
    let mut edges: Vec<[NodeId; 2]> = Vec::new();
    let mut joined: HashSet<(NodeId, NodeId)> = HashSet::new();

    let attach = |nodes: &mut Vec<ForneyNode>,
                      edges: &mut Vec<[NodeId; 2]>,
                      a: NodeId,
                      slot_a: Option<usize>,
                      b: NodeId,
                      slot_b: Option<usize>| {
        let e = edges.len();
        edges.push([a, b]);
        for (n, slot) in [(a, slot_a), (b, slot_b)] {
            match slot {
                Some(p) => nodes[n].edges[p] = e,
                None => nodes[n].edges.push(e),
            }
        }
    };

    for (var, uses) in occ.iter().enumerate() {
        let name = &fg.var_names()[var];
        match uses.len() {
            0 => return Err(ModelError::UnusedVariable(name.clone())),
            1 => {
                let (f, p) = uses[0];
                let stub = nodes.len();
                nodes.push(ForneyNode {
                    name: format!("stub:{name}"),
                    edges: Vec::new(),
                    table: FactorTable::uniform(1),
                });
                attach(&mut nodes, &mut edges, f, Some(p), stub, None);
            }
            2 => {
                let (f1, p1) = uses[0];
                let (f2, p2) = uses[1];
                if joined.insert((f1.min(f2), f1.max(f2))) {
                    attach(&mut nodes, &mut edges, f1, Some(p1), f2, Some(p2));
                } else {
                    let eq = nodes.len();
                    nodes.push(ForneyNode {
                        name: format!("eq:{name}"),
                        edges: Vec::new(),
                        table: FactorTable::equality(2),
                    });
                    attach(&mut nodes, &mut edges, f1, Some(p1), eq, None);
                    attach(&mut nodes, &mut edges, f2, Some(p2), eq, None);
                }
            }
            k => {
                let eq = nodes.len();
                nodes.push(ForneyNode {
                    name: format!("eq:{name}"),
                    edges: Vec::new(),
                    table: FactorTable::equality(k),
                });
                for &(f, p) in uses {
                    attach(&mut nodes, &mut edges, f, Some(p), eq, None);
                }
            }
        }
    }
    ForneyGraph::from_parts(nodes, edges, 0.0)
}

/// Splits every equality node of degree `N > 3` into a chain of `N - 2`
/// degree-3 equality nodes, following the node's stored variable order.
///
/// The first chain node keeps the original id and any weights on the two
/// diagonal entries; later chain nodes are appended as `<name>#k`.
pub fn reduce_degree(g: &ForneyGraph) -> Result<ForneyGraph, ModelError> {
    if g.max_degree() <= 3 {
        return Ok(g.clone());
    }
    let (mut nodes, mut edges, log_scale) = g.clone().into_parts();
    for a in 0..nodes.len() {
        let n = nodes[a].edges.len();
        if n <= 3 {
            continue;
        }
        if !nodes[a].table.is_diagonal() {
            return Err(ModelError::UnsupportedDegree { node: a, degree: n });
        }
        let vals = nodes[a].table.values();
        let (minus, plus) = (vals[0], vals[vals.len() - 1]);
        let original = nodes[a].edges.clone();
        let name = nodes[a].name.clone();

        // chain[k] is the node id of the k-th chain element; aux[k] joins k and k+1
        let mut chain = vec![a];
        for k in 1..n - 2 {
            chain.push(nodes.len() + k - 1);
        }
        let aux: Vec<usize> = (0..n - 3).map(|k| edges.len() + k).collect();
        for k in 0..n - 3 {
            edges.push([chain[k], chain[k + 1]]);
        }

        let mut lists: Vec<Vec<usize>> = Vec::with_capacity(n - 2);
        lists.push(vec![original[0], original[1], aux[0]]);
        for k in 1..n - 3 {
            lists.push(vec![aux[k - 1], original[k + 1], aux[k]]);
        }
        lists.push(vec![aux[n - 4], original[n - 2], original[n - 1]]);

        for (k, list) in lists.into_iter().enumerate() {
            let id = chain[k];
            for &e in &list {
                for end in edges[e].iter_mut() {
                    if *end == a && id != a && !aux.contains(&e) {
                        *end = id;
                    }
                }
            }
            let table = if k == 0 {
                FactorTable::weighted_equality(3, minus, plus)
            } else {
                FactorTable::equality(3)
            };
            let node = ForneyNode {
                name: if k == 0 { name.clone() } else { format!("{name}#{k}") },
                edges: list,
                table,
            };
            if k == 0 {
                nodes[a] = node;
            } else {
                nodes.push(node);
            }
        }
    }
    ForneyGraph::from_parts(nodes, edges, log_scale)
}

/// Repeatedly absorbs degree-0 and degree-1 nodes into their neighbours.
///
/// A leaf is multiplied into its neighbour's table and the shared variable is
/// summed out; an isolated node's single entry is folded into `log_scale`.
/// The result has minimum degree 2 or is empty, and represents the same
/// partition function.
pub fn two_core(g: &ForneyGraph) -> Result<ForneyGraph, ModelError> {
    let (nodes, edges, mut log_scale) = g.clone().into_parts();
    let mut work: Vec<Option<ForneyNode>> = nodes.into_iter().map(Some).collect();
    let mut queue: VecDeque<NodeId> = (0..work.len())
        .filter(|&a| work[a].as_ref().is_some_and(|n| n.edges.len() <= 1))
        .collect();

    while let Some(a) = queue.pop_front() {
        let Some(node) = work[a].as_ref() else {
            continue;
        };
        match node.edges.len() {
            0 => {
                let v = node.table.get(0);
                if v == 0.0 {
                    return Err(ModelError::ZeroPartition);
                }
                log_scale += v.ln();
                work[a] = None;
            }
            1 => {
                let e = node.edges[0];
                let leaf = [node.table.get(0), node.table.get(1)];
                let [x, y] = edges[e];
                let b = if x == a { y } else { x };
                let nb = work[b].as_mut().expect("neighbour of live node is live");
                let pos = nb.edges.iter().position(|&f| f == e).expect("incident");
                let values = nb.table.absorb(pos, leaf);
                nb.table = FactorTable::new(nb.table.arity() - 1, values)
                    .map_err(|_| ModelError::ZeroPartition)?;
                nb.edges.remove(pos);
                if nb.edges.len() <= 1 {
                    queue.push_back(b);
                }
                work[a] = None;
            }
            _ => {}
        }
    }

    // compact ids, keeping relative order
    let mut node_map = vec![usize::MAX; work.len()];
    let mut kept = Vec::new();
    for (a, slot) in work.into_iter().enumerate() {
        if let Some(n) = slot {
            node_map[a] = kept.len();
            kept.push(n);
        }
    }
    let mut edge_map = vec![usize::MAX; edges.len()];
    let mut new_edges = Vec::new();
    for (e, &[a, b]) in edges.iter().enumerate() {
        if node_map[a] != usize::MAX && node_map[b] != usize::MAX {
            edge_map[e] = new_edges.len();
            new_edges.push([node_map[a], node_map[b]]);
        }
    }
    for n in &mut kept {
        for e in &mut n.edges {
            *e = edge_map[*e];
        }
    }
    ForneyGraph::from_parts(kept, new_edges, log_scale)
}
