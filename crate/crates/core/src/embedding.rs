//! Connected embeddings of an arbitrary source graph into a cubic bipartite
//! expander host.
//!
//! Source vertices are spread evenly over host vertices (the anchor map);
//! every source edge whose endpoints land on different anchors becomes a
//! demand, the demand multigraph is split into matchings, and each matching
//! is routed through the host. The image of `v` is its anchor together with
//! every routed path of an edge at `v`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::EmbedParams;
use crate::expander::{bipartite_expander, CertifiedExpander, ExpanderError};
use crate::graph::{matching_decomposition, Graph, MultiEdge, Multigraph, Path};
use crate::routing::{route_matching_loaded, DemandSet, RoutingError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbedError {
    #[error("host size {0} must be even and at least 6")]
    InvalidHostSize(usize),
    #[error(transparent)]
    Expander(#[from] ExpanderError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

/// `Ψ`: each source vertex maps to a connected set of host vertices that
/// contains its anchor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectedEmbedding {
    pub host: Graph,
    pub anchor: Vec<usize>,
    /// Sorted, duplicate-free host vertex sets.
    pub psi: Vec<Vec<usize>>,
}

impl ConnectedEmbedding {
    /// Number of images containing each host vertex.
    pub fn load(&self) -> Vec<usize> {
        let mut per_vertex = vec![0; self.host.n()];
        for set in &self.psi {
            for &x in set {
                if x < per_vertex.len() {
                    per_vertex[x] += 1;
                }
            }
        }
        per_vertex
    }

    pub fn depth(&self) -> usize {
        self.load().into_iter().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub depth: usize,
    pub per_vertex: Vec<usize>,
    /// `Z·(1 + (|V|+|E|)/k)·log2 k`.
    pub bound: f64,
}

impl DepthReport {
    pub fn within_bound(&self) -> bool {
        self.depth as f64 <= self.bound
    }
}

/// `(1 + (|V|+|E|)/k)·log2 k`, the depth bound without its constant.
pub fn depth_scale(n_src: usize, m_src: usize, k: usize) -> f64 {
    (1.0 + (n_src + m_src) as f64 / k as f64) * (k as f64).log2()
}

/// Seeded balanced assignment of `n` source vertices to `k` classes: a
/// shuffled vertex order is dealt round-robin, so every class receives at
/// most `⌈n/k⌉` vertices.
pub fn balanced_map(n: usize, k: usize, seed: u64) -> Vec<usize> {
    assert!(k >= 1, "need at least one class");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut anchor = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        anchor[v] = i % k;
    }
    anchor
}

#[derive(Clone, Debug, PartialEq)]
pub struct DemandGraph {
    /// One edge per source edge crossing classes, carrying the source edge id.
    pub multigraph: Multigraph,
    /// Source edge ids with both endpoints in the same class.
    pub intra_class: Vec<usize>,
}

pub fn demand_graph(g_src: &Graph, anchor: &[usize], k: usize) -> DemandGraph {
    let mut edges = Vec::new();
    let mut intra_class = Vec::new();
    for (id, &(u, v)) in g_src.edges().iter().enumerate() {
        if anchor[u] == anchor[v] {
            intra_class.push(id);
        } else {
            edges.push(MultiEdge {
                u: anchor[u],
                v: anchor[v],
                id,
            });
        }
    }
    DemandGraph {
        multigraph: Multigraph::new(k, edges).expect("anchors are in range and ids unique"),
        intra_class,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedOutput {
    pub expander: CertifiedExpander,
    pub embedding: ConnectedEmbedding,
    pub depth: DepthReport,
    /// Host path realising each source edge (trivial for intra-class edges).
    pub edge_paths: Vec<Path>,
    pub matchings: usize,
    /// Largest per-matching edge congestion.
    pub max_matching_congestion: u32,
    /// Largest edge congestion summed over all matchings.
    pub max_total_congestion: u32,
    pub max_path_len: usize,
    pub met_routing_targets: bool,
    /// `depth / ((1 + (|V|+|E|)/k)·log2 k)`.
    pub fitted_z: f64,
}

/// Derives independent seeds for the stages of one run.
fn stage_seed(seed: u64, stage: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Embeds `g_src` into a fresh `k`-vertex cubic bipartite expander.
pub fn embed(g_src: &Graph, k: usize, seed: u64, params: &EmbedParams) -> Result<EmbedOutput, EmbedError> {
    if k < 6 || k % 2 == 1 {
        return Err(EmbedError::InvalidHostSize(k));
    }
    let expander = bipartite_expander(k, seed, &params.expander)?;
    let host = &expander.graph;
    let anchor = balanced_map(g_src.n(), k, stage_seed(seed, 1));
    let demands = demand_graph(g_src, &anchor, k);
    let matchings = matching_decomposition(&demands.multigraph);

    let mut edge_paths: Vec<Option<Path>> = vec![None; g_src.edge_count()];
    for &id in &demands.intra_class {
        let (u, _) = g_src.edges()[id];
        edge_paths[id] = Some(Path::new(vec![anchor[u]]));
    }
    let mut total_load = vec![0u32; host.edge_count()];
    let mut max_matching_congestion = 0;
    let mut met_routing_targets = true;
    for (i, matching) in matchings.iter().enumerate() {
        let pairs: Vec<(usize, usize)> = matching
            .iter()
            .map(|&id| {
                let (u, v) = g_src.edges()[id];
                (anchor[u], anchor[v])
            })
            .collect();
        let set = DemandSet::new(pairs, k)?;
        let background = params.accumulate_congestion.then_some(total_load.as_slice());
        let sol = route_matching_loaded(
            host,
            &set,
            expander.alpha(),
            stage_seed(seed, 2 + i as u64),
            &params.routing,
            background,
        )?;
        max_matching_congestion = max_matching_congestion.max(sol.max_edge_congestion);
        met_routing_targets &= sol.met_targets;
        for (t, c) in total_load.iter_mut().zip(&sol.congestion.edge) {
            *t += c;
        }
        for (&id, path) in matching.iter().zip(sol.paths) {
            edge_paths[id] = Some(path);
        }
    }
    let edge_paths: Vec<Path> = edge_paths.into_iter().map(|p| p.expect("every source edge routed")).collect();

    let mut psi: Vec<Vec<usize>> = anchor.iter().map(|&a| vec![a]).collect();
    for (id, &(u, v)) in g_src.edges().iter().enumerate() {
        for w in [u, v] {
            psi[w].extend_from_slice(edge_paths[id].vertices());
        }
    }
    for set in &mut psi {
        set.sort_unstable();
        set.dedup();
    }
    let embedding = ConnectedEmbedding {
        host: host.clone(),
        anchor,
        psi,
    };
    let per_vertex = embedding.load();
    let depth = per_vertex.iter().copied().max().unwrap_or(0);
    let scale = depth_scale(g_src.n(), g_src.edge_count(), k);
    let max_path_len = edge_paths.iter().map(Path::len).max().unwrap_or(0);
    Ok(EmbedOutput {
        depth: DepthReport {
            depth,
            per_vertex,
            bound: params.z * scale,
        },
        fitted_z: depth as f64 / scale,
        max_total_congestion: total_load.iter().copied().max().unwrap_or(0),
        expander,
        embedding,
        edge_paths,
        matchings: matchings.len(),
        max_matching_congestion,
        max_path_len,
        met_routing_targets,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The embedding does not have one image and one anchor per source vertex.
    ShapeMismatch { expected: usize, images: usize, anchors: usize },
    EmptyImage { vertex: usize },
    HostVertexOutOfRange { vertex: usize, host_vertex: usize },
    AnchorOutsideImage { vertex: usize },
    DisconnectedImage { vertex: usize },
    NotTouching { u: usize, v: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub violations: Vec<Violation>,
    pub depth: usize,
    pub per_vertex: Vec<usize>,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the definition of a connected embedding from scratch: nonempty
/// connected images containing their anchors, and touching images (sharing
/// a vertex or joined by a host edge) on every source edge.
pub fn verify_embedding(g_src: &Graph, emb: &ConnectedEmbedding) -> VerificationReport {
    let host = &emb.host;
    let n = g_src.n();
    let mut violations = Vec::new();
    if emb.psi.len() != n || emb.anchor.len() != n {
        violations.push(Violation::ShapeMismatch {
            expected: n,
            images: emb.psi.len(),
            anchors: emb.anchor.len(),
        });
    }
    let mut per_vertex = vec![0usize; host.n()];
    for (v, set) in emb.psi.iter().enumerate() {
        let mut in_range = true;
        let mut distinct = set.clone();
        distinct.sort_unstable();
        distinct.dedup();
        for &x in &distinct {
            if x >= host.n() {
                violations.push(Violation::HostVertexOutOfRange { vertex: v, host_vertex: x });
                in_range = false;
            } else {
                per_vertex[x] += 1;
            }
        }
        if set.is_empty() {
            violations.push(Violation::EmptyImage { vertex: v });
            continue;
        }
        if emb.anchor.get(v).map_or(true, |a| !distinct.contains(a)) {
            violations.push(Violation::AnchorOutsideImage { vertex: v });
        }
        if in_range && !host.induces_connected(&distinct) {
            violations.push(Violation::DisconnectedImage { vertex: v });
        }
    }
    for &(u, v) in g_src.edges() {
        let (Some(a), Some(b)) = (emb.psi.get(u), emb.psi.get(v)) else {
            continue;
        };
        if !touch(host, a, b) {
            violations.push(Violation::NotTouching { u, v });
        }
    }
    VerificationReport {
        violations,
        depth: per_vertex.iter().copied().max().unwrap_or(0),
        per_vertex,
    }
}

fn touch(host: &Graph, a: &[usize], b: &[usize]) -> bool {
    let mut in_a = vec![false; host.n()];
    for &x in a.iter().filter(|&&x| x < host.n()) {
        in_a[x] = true;
    }
    b.iter()
        .filter(|&&y| y < host.n())
        .any(|&y| in_a[y] || host.neighbors(y).iter().any(|&x| in_a[x]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn balanced_map_class_sizes() {
        let sizes = |n, k, seed| {
            let mut c = vec![0; k];
            for a in balanced_map(n, k, seed) {
                c[a] += 1;
            }
            c
        };
        assert!(sizes(10, 4, 3).iter().all(|&s| s <= 3));
        let bij = balanced_map(6, 6, 1);
        let mut sorted = bij.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
        let mut s = sizes(7, 3, 9);
        s.sort_unstable();
        assert_eq!(s, vec![2, 2, 3]);
    }

    #[test]
    fn demand_graph_cases() {
        let c4 = families::cycle(4);
        let d = demand_graph(&c4, &[0, 1, 2, 3], 4);
        let got: Vec<(usize, usize)> = d.multigraph.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
        assert_eq!(got, c4.edges());
        assert!(d.intra_class.is_empty());

        let d = demand_graph(&c4, &[0, 0, 0, 0], 6);
        assert!(d.multigraph.edges().is_empty());
        assert_eq!(d.intra_class, vec![0, 1, 2, 3]);

        let d = demand_graph(&c4, &[0, 1, 0, 1], 6);
        assert_eq!(d.multigraph.edges().len(), 4);
        assert!(d.multigraph.edges().iter().all(|e| (e.u.min(e.v), e.u.max(e.v)) == (0, 1)));
        assert_eq!(d.multigraph.max_degree(), 4);
    }

    #[test]
    fn single_edge_into_six() {
        let g = families::path(2);
        let out = embed(&g, 6, 0, &EmbedParams::default()).unwrap();
        let emb = &out.embedding;
        let path = &out.edge_paths[0];
        for v in 0..2 {
            assert!(path.vertices().iter().all(|x| emb.psi[v].contains(x)));
        }
        assert!(emb.psi[0].iter().any(|x| emb.psi[1].contains(x)));
        assert!(out.depth.depth <= 2);
        assert!(verify_embedding(&g, emb).is_valid());
    }

    #[test]
    fn edgeless_source_uses_anchors_only() {
        let g = Graph::empty(13);
        let out = embed(&g, 6, 4, &EmbedParams::default()).unwrap();
        for v in 0..13 {
            assert_eq!(out.embedding.psi[v], vec![out.embedding.anchor[v]]);
        }
        assert_eq!(out.depth.depth, 3);
    }

    #[test]
    fn rejects_bad_host_size() {
        let g = families::path(2);
        assert_eq!(embed(&g, 7, 0, &EmbedParams::default()), Err(EmbedError::InvalidHostSize(7)));
        assert_eq!(embed(&g, 4, 0, &EmbedParams::default()), Err(EmbedError::InvalidHostSize(4)));
    }

    #[test]
    fn random_cubic_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = families::random_regular(48, 3, &mut rng, 1000).unwrap();
        let params = EmbedParams::default();
        let out = embed(&g, 12, 5, &params).unwrap();
        let report = verify_embedding(&g, &out.embedding);
        assert!(report.is_valid(), "{:?}", report.violations);
        assert_eq!(report.per_vertex, out.depth.per_vertex);
        assert!(out.depth.within_bound());
        assert!((out.depth.bound - 64.0 * (1.0 + 120.0 / 12.0) * 12f64.log2()).abs() < 1e-9);
        assert_eq!(out, embed(&g, 12, 5, &params).unwrap());
        for (id, &(u, v)) in g.edges().iter().enumerate() {
            let p = &out.edge_paths[id];
            assert!(p.is_valid_in(&out.embedding.host));
            let (a, b) = (out.embedding.anchor[u], out.embedding.anchor[v]);
            assert!((p.source(), p.target()) == (a, b) || (p.source(), p.target()) == (b, a));
        }
    }

    #[test]
    fn independent_mode_also_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = families::random_regular(24, 3, &mut rng, 1000).unwrap();
        let params = EmbedParams {
            accumulate_congestion: false,
            ..EmbedParams::default()
        };
        let out = embed(&g, 6, 1, &params).unwrap();
        assert!(verify_embedding(&g, &out.embedding).is_valid());
    }

    #[test]
    fn verifier_names_disconnected_image() {
        let g = families::path(2);
        let host = families::cycle(6);
        let emb = ConnectedEmbedding {
            host,
            anchor: vec![0, 1],
            psi: vec![vec![0, 3], vec![1]],
        };
        let r = verify_embedding(&g, &emb);
        assert_eq!(r.violations, vec![Violation::DisconnectedImage { vertex: 0 }]);
    }

    #[test]
    fn verifier_detects_missing_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = families::random_regular(12, 3, &mut rng, 1000).unwrap();
        let out = embed(&g, 12, 0, &EmbedParams::default()).unwrap();
        let mut emb = out.embedding.clone();
        // find a source edge whose anchors are at distance >= 2, and shrink
        // both endpoint images to their anchors
        let host = &emb.host;
        let (u, v) = *g
            .edges()
            .iter()
            .find(|&&(u, v)| {
                let (a, b) = (emb.anchor[u], emb.anchor[v]);
                a != b && !host.has_edge(a, b)
            })
            .expect("some edge joins distant anchors");
        emb.psi[u] = vec![emb.anchor[u]];
        emb.psi[v] = vec![emb.anchor[v]];
        let r = verify_embedding(&g, &emb);
        assert!(r.violations.contains(&Violation::NotTouching { u, v }));
        assert!(!r.violations.iter().any(|x| matches!(x, Violation::DisconnectedImage { .. })));
    }

    #[test]
    fn verifier_flags_empty_and_out_of_range() {
        let g = Graph::empty(2);
        let emb = ConnectedEmbedding {
            host: families::cycle(6),
            anchor: vec![0, 9],
            psi: vec![vec![], vec![9]],
        };
        let r = verify_embedding(&g, &emb);
        assert!(r.violations.contains(&Violation::EmptyImage { vertex: 0 }));
        assert!(r.violations.contains(&Violation::HostVertexOutOfRange { vertex: 1, host_vertex: 9 }));
    }
}
