mod common;

use common::{matching_sum, perfect_matchings, random_planar_edges, random_planar_forney, rng};
use planarz_core::model::ForneyGraph;
use planarz_core::pfaffian::{corrected_z, kasteleyn_matrix, pfaffian, tutte_matrix};
use planarz_core::planar::{
    ExtEdgeKind, Graph, KuratowskiKind, OrientedPlanarGraph, PlanarError, biconnect, embed,
    fisher_extend_with, forney_embedding, is_planar, orient, weighted_planar_graph,
};
use proptest::prelude::*;
use rand::Rng;

/// Parity of edges directed along the face walk, from vertex sequences only.
fn faces_agree_odd(o: &OrientedPlanarGraph) -> bool {
    let ext = o.ext();
    let g = ext.graph();
    let emb = ext.embedding();
    (0..emb.num_faces()).filter(|&f| Some(f) != emb.external()).all(|f| {
        let vs = emb.face_vertices(g, f);
        let k = vs.len();
        let along = (0..k)
            .filter(|&i| {
                let (u, v) = (vs[i], vs[(i + 1) % k]);
                let e = g.neighbors(u).iter().find(|&&(w, _)| w == v).unwrap().1;
                o.directed(e) == (u, v)
            })
            .count();
        along % 2 == 1
    })
}

fn oriented(n: usize, edges: Vec<[usize; 2]>, weights: Vec<f64>) -> OrientedPlanarGraph {
    let graph = Graph::new(n, edges).unwrap();
    let emb = embed(&graph).unwrap();
    orient(&biconnect(&weighted_planar_graph(graph, weights, emb))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn orientation_is_kasteleyn(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (rows, cols) = (r.random_range(2..=6), r.random_range(2..=6));
        let (n, edges) = random_planar_edges(&mut r, rows, cols, 0.8);
        prop_assume!(!edges.is_empty());
        let m = edges.len();
        let o = oriented(n, edges, vec![1.0; m]);
        prop_assert!(o.ext().graph().is_biconnected());
        prop_assert!(o.is_kasteleyn());
        prop_assert!(faces_agree_odd(&o));
    }

    #[test]
    fn pfaffians_count_and_weigh_matchings(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (n, edges) = random_planar_edges(&mut r, 3, 4, 0.85);
        prop_assume!(!edges.is_empty());
        let weights: Vec<f64> = edges.iter().map(|_| r.random_range(0.2..3.0)).collect();
        let o = oriented(n, edges, weights);
        let ext = o.ext();
        let all = ext.graph().edges();
        let count = perfect_matchings(ext.num_nodes(), all);
        let pf_b = pfaffian(&kasteleyn_matrix(&o)).to_f64().abs();
        prop_assert_eq!(pf_b.round() as u64, count);
        prop_assert!((pf_b - count as f64).abs() < 1e-8);

        // dummies carry weight 0 in the Tutte matrix
        let w: Vec<f64> = ext.kinds().iter().zip(ext.weights())
            .map(|(k, &w)| if matches!(k, ExtEdgeKind::Dummy) { 0.0 } else { w })
            .collect();
        let expect = matching_sum(ext.num_nodes(), all, &w);
        match corrected_z(&tutte_matrix(&o), &kasteleyn_matrix(&o)) {
            Ok(z) => prop_assert!((z.value.to_f64() - expect).abs() <= 1e-9 * expect.max(1.0)),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

fn count_loops(g: &ForneyGraph, psi: &[usize]) -> u64 {
    let m = g.num_edges();
    (0u32..1 << m)
        .filter(|s| {
            let mut deg = vec![0; g.num_nodes()];
            for e in 0..m {
                if s >> e & 1 == 1 {
                    for a in g.edges()[e] {
                        deg[a] += 1;
                    }
                }
            }
            deg.iter().enumerate().all(|(a, &d)| if psi.contains(&a) { d == 3 } else { d == 0 || d == 2 })
        })
        .count() as u64
}

#[test]
fn extended_graph_matchings_are_loops() {
    let mut r = rng(17);
    for _ in 0..60 {
        let g = random_planar_forney(&mut r, 3, 14, 0.5, 2.0);
        let triplets = g.triplets();
        let mut psi: Vec<usize> = triplets.iter().copied().filter(|_| r.random_bool(0.5)).collect();
        if psi.len() % 2 == 1 {
            psi.pop();
        }
        let emb = forney_embedding(&g).unwrap();
        let ext = fisher_extend_with(&g, &emb, &psi, |_, _| Ok::<_, PlanarError>(1.0)).unwrap();
        assert_eq!(ext.num_dummies(), 0);
        let count = perfect_matchings(ext.num_nodes(), ext.graph().edges());
        assert_eq!(count, count_loops(&g, &psi), "psi {psi:?}");
    }
}

#[test]
fn embeddings_satisfy_euler() {
    let mut r = rng(3);
    for _ in 0..100 {
        let (n, edges) = random_planar_edges(&mut r, 5, 5, 0.7);
        let m = edges.len();
        let g = Graph::new(n, edges).unwrap();
        let (components, _) = g.components();
        let emb = embed(&g).unwrap();
        // every component keeps its own outer face
        assert_eq!(n + emb.num_faces(), m + 2 * components);
        // each dart lies on exactly one face
        let darts: usize = emb.faces().iter().map(Vec::len).sum();
        assert_eq!(darts, 2 * m);
    }
}

fn subdivide(n: usize, edges: &[[usize; 2]], r: &mut impl Rng) -> (usize, Vec<[usize; 2]>) {
    let mut next = n;
    let mut out = Vec::new();
    for &[a, b] in edges {
        if r.random_bool(0.5) {
            out.push([a, next]);
            out.push([next, b]);
            next += 1;
        } else {
            out.push([a, b]);
        }
    }
    (next, out)
}

#[test]
fn kuratowski_subdivisions_are_rejected() {
    let k5: Vec<[usize; 2]> = (0..5).flat_map(|a| (a + 1..5).map(move |b| [a, b])).collect();
    let k33: Vec<[usize; 2]> = (0..3).flat_map(|a| (3..6).map(move |b| [a, b])).collect();
    let mut r = rng(5);
    for (base, n, kind) in [(&k5, 5, KuratowskiKind::K5), (&k33, 6, KuratowskiKind::K33)] {
        for _ in 0..10 {
            let (n, mut edges) = subdivide(n, base, &mut r);
            // a pendant path that is not part of any obstruction
            edges.push([0, n]);
            edges.push([n, n + 1]);
            let g = Graph::new(n + 2, edges.clone()).unwrap();
            assert!(!is_planar(&g));
            let Err(PlanarError::NonPlanar(w)) = embed(&g) else {
                panic!("expected a witness");
            };
            assert_eq!(w.kind, kind);
            let sub: Vec<[usize; 2]> = w.edges.clone();
            assert!(sub.iter().all(|e| edges.contains(e)));
            assert!(!is_planar(&Graph::new(n + 2, sub.clone()).unwrap()));
            // minimal: dropping any edge leaves a planar graph
            for i in 0..sub.len() {
                let mut fewer = sub.clone();
                fewer.remove(i);
                assert!(is_planar(&Graph::new(n + 2, fewer).unwrap()));
            }
        }
    }
}
