//! Cubic balanced bipartite expanders of every even order, with Cheeger
//! certificates.
//!
//! Three regimes, by order `n`:
//! * below the small-case cutoff, an explicit circulant bipartite graph;
//! * `n ≡ 0 (mod 4)`, the double cover of a spectrally certified random cubic
//!   graph on `n/2` vertices;
//! * `n ≡ 2 (mod 4)`, the order `n + 2` graph with two adjacent vertices cut
//!   out and their neighbours rewired, which loses at most a factor 5 of
//!   edge expansion.

use nalgebra::{DMatrix, SymmetricEigen};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ExpanderParams;
use crate::families;
use crate::graph::{double_cover, is_bipartite, min_odd_cycle, Bipartition, Graph};

/// Above this many vertices the spectrum is estimated by power iteration.
const DENSE_EIGEN_LIMIT: usize = 512;
/// Hard cap of the subset enumeration (masks are `u32`).
const EXACT_HARD_LIMIT: usize = 30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpanderError {
    #[error("order {0} must be even and at least 6")]
    InvalidOrder(usize),
    #[error("exact Cheeger constant refused: {n} vertices exceeds the threshold {threshold}")]
    TooLargeForExact { n: usize, threshold: usize },
    #[error("Cheeger constant undefined on {0} vertices")]
    TooSmallForCheeger(usize),
    #[error("graph is not regular")]
    NotRegular,
    #[error("no certified base expander on {m} vertices within {attempts} attempts")]
    CertificateNotReached { m: usize, attempts: usize },
    #[error("surgery input is not the double cover of a graph in the standard layout")]
    NotADoubleCover,
    #[error("surgery input covers a bipartite base; no odd cycle to cut")]
    BipartiteBase,
    #[error("surgery cannot rewire without creating a parallel edge")]
    RewiringFailed,
    #[error("constructed graph failed its structural check: {0}")]
    Structure(&'static str),
}

/// Where a Cheeger lower bound came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheegerMethod {
    /// Subset enumeration; the bound is the Cheeger constant itself.
    Exact,
    /// `(d - λ₂)/2`.
    Spectral,
    /// Spectral bound of the order `n + 2` graph divided by 5.
    SurgeryCharging,
    /// Connected graph on `n` vertices: at least `2/n`.
    Connectivity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheegerCertificate {
    pub lower_bound: f64,
    pub method: CheegerMethod,
    /// The exact value as `(cut, size)` when the method is `Exact`.
    pub exact: Option<(u64, u64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Circulant,
    DoubleCover,
    Surgery,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedExpander {
    pub graph: Graph,
    pub bipartition: Bipartition,
    pub certificate: CheegerCertificate,
    /// Largest nontrivial eigenvalue modulus of the certified base graph,
    /// which is the second eigenvalue of its double cover.
    pub lambda2: Option<f64>,
    pub construction: Construction,
}

impl CertifiedExpander {
    pub fn alpha(&self) -> f64 {
        self.certificate.lower_bound
    }
}

/// Exact Cheeger constant `min |δ(S)|/|S|` over nonempty `S` with
/// `|S| ≤ n/2`, by Gray-code enumeration of all vertex subsets.
pub fn cheeger_exact(g: &Graph, threshold: usize) -> Result<Ratio<u64>, ExpanderError> {
    cheeger_exact_witness(g, threshold).map(|(r, _)| r)
}

/// Like [`cheeger_exact`], also returning a minimising set as a bitmask.
pub fn cheeger_exact_witness(g: &Graph, threshold: usize) -> Result<(Ratio<u64>, u32), ExpanderError> {
    let n = g.n();
    if n > threshold.min(EXACT_HARD_LIMIT) {
        return Err(ExpanderError::TooLargeForExact { n, threshold });
    }
    if n < 2 {
        return Err(ExpanderError::TooSmallForCheeger(n));
    }
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &w| m | (1 << w)))
        .collect();
    let half = n / 2;
    let mut mask = 0u32;
    let mut size = 0u64;
    let mut cut = 0i64;
    let mut best: Option<(u64, u64, u32)> = None;
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        let bit = 1u32 << v;
        let deg = adj[v].count_ones() as i64;
        if mask & bit == 0 {
            let inside = (adj[v] & mask).count_ones() as i64;
            cut += deg - 2 * inside;
            mask |= bit;
            size += 1;
        } else {
            mask &= !bit;
            let inside = (adj[v] & mask).count_ones() as i64;
            cut -= deg - 2 * inside;
            size -= 1;
        }
        if size == 0 || size as usize > half {
            continue;
        }
        let c = cut as u64;
        let better = match best {
            None => true,
            Some((bc, bs, _)) => c * bs < bc * size,
        };
        if better {
            best = Some((c, size, mask));
        }
    }
    let (c, s, m) = best.expect("n >= 2 admits a singleton");
    Ok((Ratio::new(c, s), m))
}

/// Number of edges leaving the vertex set `mask`.
pub fn cut_size(g: &Graph, mask: u64) -> usize {
    g.edges()
        .iter()
        .filter(|&&(u, v)| ((mask >> u) & 1) != ((mask >> v) & 1))
        .count()
}

/// Adjacency spectrum in descending order (dense symmetric eigensolve).
pub fn adjacency_spectrum(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Second-largest adjacency eigenvalue of a regular graph.
pub fn second_eigenvalue(g: &Graph) -> Result<f64, ExpanderError> {
    let d = g.regular_degree().ok_or(ExpanderError::NotRegular)?;
    if g.n() < 2 {
        return Err(ExpanderError::TooSmallForCheeger(g.n()));
    }
    if g.n() <= DENSE_EIGEN_LIMIT {
        return Ok(adjacency_spectrum(g)[1]);
    }
    Ok(deflated_power_iteration(g, d))
}

/// Power iteration on `A + dI` restricted to the complement of the all-ones
/// vector (the top eigenvector of a regular graph).
fn deflated_power_iteration(g: &Graph, d: usize) -> f64 {
    let n = g.n();
    let shift = d as f64;
    let project = |x: &mut Vec<f64>| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    };
    let mut x: Vec<f64> = (0..n).map(|i| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5).collect();
    project(&mut x);
    let mut estimate = f64::NAN;
    for _ in 0..200_000 {
        let mut y: Vec<f64> = x.iter().map(|v| shift * v).collect();
        for &(u, v) in g.edges() {
            y[u] += x[v];
            y[v] += x[u];
        }
        let rayleigh: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        project(&mut y);
        x = y;
        if (rayleigh - estimate).abs() < 1e-12 {
            estimate = rayleigh;
            break;
        }
        estimate = rayleigh;
    }
    estimate - shift
}

/// Spectral Cheeger lower bound `(d - λ₂)/2` of a `d`-regular graph.
pub fn cheeger_spectral_bound(g: &Graph) -> Result<f64, ExpanderError> {
    let d = g.regular_degree().ok_or(ExpanderError::NotRegular)? as f64;
    Ok((d - second_eigenvalue(g)?) / 2.0)
}

/// A certified non-bipartite cubic base graph.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseExpander {
    pub graph: Graph,
    pub lambda2: f64,
    pub lambda_min: f64,
    pub attempts: usize,
}

impl BaseExpander {
    /// Second eigenvalue of the double cover: the spectrum is `±λ_i`.
    pub fn cover_lambda2(&self) -> f64 {
        self.lambda2.max(-self.lambda_min)
    }
}

/// Random connected, non-bipartite cubic graph on `m` vertices with
/// every nontrivial eigenvalue in `[-(lambda2_max - margin), lambda2_max - margin]`.
pub fn base_expander(m: usize, seed: u64, params: &ExpanderParams) -> Result<BaseExpander, ExpanderError> {
    if m < 6 || m % 2 == 1 {
        return Err(ExpanderError::InvalidOrder(m));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let limit = params.lambda2_max - params.certificate_margin;
    for attempt in 1..=params.base_attempts {
        let Some(g) = families::random_regular(m, 3, &mut rng, params.pairing_tries) else {
            continue;
        };
        if !g.is_connected() || is_bipartite(&g).is_some() {
            continue;
        }
        let spectrum = adjacency_spectrum(&g);
        let (lambda2, lambda_min) = (spectrum[1], spectrum[m - 1]);
        if lambda2 <= limit && lambda_min >= -limit {
            return Ok(BaseExpander {
                graph: g,
                lambda2,
                lambda_min,
                attempts: attempt,
            });
        }
    }
    Err(ExpanderError::CertificateNotReached {
        m,
        attempts: params.base_attempts,
    })
}

/// The explicit family: left vertex `i < n/2` is joined to right vertices
/// `((i + t) mod n/2) + n/2` for `t ∈ {-1, 0, 1}`.
pub fn circulant_bipartite(n: usize) -> Graph {
    assert!(n >= 6 && n % 2 == 0);
    let h = n / 2;
    let edges = (0..h).flat_map(|i| [h - 1, 0, 1].map(|t| (i, (i + t) % h + h)));
    Graph::new(n, edges).expect("circulant family is simple for n >= 6")
}

/// Result of cutting an edge out of a double cover.
#[derive(Clone, Debug, PartialEq)]
pub struct SurgeryOutcome {
    pub graph: Graph,
    /// The removed edge, in the input's labels.
    pub removed: (usize, usize),
    /// The two inserted edges, in the output's labels.
    pub inserted: [(usize, usize); 2],
}

/// Removes the lift `(u, v)` of the least edge on a shortest odd cycle of the
/// base, then joins the former neighbours of `u` and `v` in pairs that were
/// not already adjacent. Input must be a double cover in the layout produced
/// by [`double_cover`]; the base is read off the off-diagonal block.
pub fn surgery(cover: &Graph) -> Result<SurgeryOutcome, ExpanderError> {
    let n2 = cover.n();
    if n2 % 2 == 1 {
        return Err(ExpanderError::NotADoubleCover);
    }
    let m = n2 / 2;
    let mut base_edges = Vec::new();
    for &(a, b) in cover.edges() {
        if a >= m || b < m {
            return Err(ExpanderError::NotADoubleCover);
        }
        let (i, j) = (a, b - m);
        if i == j {
            return Err(ExpanderError::NotADoubleCover);
        }
        if i < j {
            base_edges.push((i, j));
        }
    }
    let base = Graph::new(m, base_edges).map_err(|_| ExpanderError::NotADoubleCover)?;
    if double_cover(&base) != *cover {
        return Err(ExpanderError::NotADoubleCover);
    }
    let cycle = min_odd_cycle(&base).ok_or(ExpanderError::BipartiteBase)?;
    let (a, b) = (0..cycle.len())
        .map(|i| {
            let (x, y) = (cycle[i], cycle[(i + 1) % cycle.len()]);
            (x.min(y), x.max(y))
        })
        .min()
        .unwrap();
    let (u, v) = (a, m + b);
    let others = |x: usize, skip: usize| -> Vec<usize> {
        cover.neighbors(x).iter().copied().filter(|&w| w != skip).collect()
    };
    let vs = others(u, v);
    let us = others(v, u);
    if vs.len() != 2 || us.len() != 2 {
        return Err(ExpanderError::Structure("surgery needs a cubic input"));
    }
    let pairings = [
        [(us[0], vs[0]), (us[1], vs[1])],
        [(us[0], vs[1]), (us[1], vs[0])],
    ];
    let pairing = pairings
        .into_iter()
        .find(|p| p.iter().all(|&(x, y)| !cover.has_edge(x, y)))
        .ok_or(ExpanderError::RewiringFailed)?;
    let relabel = |x: usize| x - usize::from(x > u) - usize::from(x > v);
    let mut edges: Vec<(usize, usize)> = cover
        .edges()
        .iter()
        .filter(|&&(x, y)| x != u && x != v && y != u && y != v)
        .map(|&(x, y)| (relabel(x), relabel(y)))
        .collect();
    let inserted = pairing.map(|(x, y)| (relabel(x), relabel(y)));
    edges.extend(inserted);
    let graph = Graph::new(n2 - 2, edges).map_err(|_| ExpanderError::RewiringFailed)?;
    Ok(SurgeryOutcome {
        graph,
        removed: (u, v),
        inserted,
    })
}

fn check_structure(g: &Graph) -> Result<Bipartition, ExpanderError> {
    if g.regular_degree() != Some(3) {
        return Err(ExpanderError::Structure("not 3-regular"));
    }
    if !g.is_connected() {
        return Err(ExpanderError::Structure("not connected"));
    }
    let b = is_bipartite(g).ok_or(ExpanderError::Structure("not bipartite"))?;
    if !b.is_balanced() {
        return Err(ExpanderError::Structure("bipartition not balanced"));
    }
    Ok(b)
}

fn exact_certificate(g: &Graph, threshold: usize) -> Result<CheegerCertificate, ExpanderError> {
    let r = cheeger_exact(g, threshold)?;
    Ok(CheegerCertificate {
        lower_bound: *r.numer() as f64 / *r.denom() as f64,
        method: CheegerMethod::Exact,
        exact: Some((*r.numer(), *r.denom())),
    })
}

/// Simple, cubic, balanced bipartite, connected graph on `n` vertices with
/// the strongest Cheeger certificate available at that size.
pub fn bipartite_expander(n: usize, seed: u64, params: &ExpanderParams) -> Result<CertifiedExpander, ExpanderError> {
    if n < 6 || n % 2 == 1 {
        return Err(ExpanderError::InvalidOrder(n));
    }
    let exact_ok = n <= params.exact_threshold.min(EXACT_HARD_LIMIT);
    let cutoff = params.small_case_cutoff.max(6);
    let (graph, lambda2, construction, fallback) = if n < cutoff {
        let g = circulant_bipartite(n);
        let cert = CheegerCertificate {
            lower_bound: 2.0 / n as f64,
            method: CheegerMethod::Connectivity,
            exact: None,
        };
        (g, None, Construction::Circulant, cert)
    } else if n % 4 == 0 {
        let base = base_expander(n / 2, seed, params)?;
        let cert = CheegerCertificate {
            lower_bound: (3.0 - base.cover_lambda2()) / 2.0,
            method: CheegerMethod::Spectral,
            exact: None,
        };
        (double_cover(&base.graph), Some(base.cover_lambda2()), Construction::DoubleCover, cert)
    } else {
        let base = base_expander((n + 2) / 2, seed, params)?;
        let outcome = surgery(&double_cover(&base.graph))?;
        let cert = CheegerCertificate {
            lower_bound: (3.0 - base.cover_lambda2()) / 2.0 / 5.0,
            method: CheegerMethod::SurgeryCharging,
            exact: None,
        };
        (outcome.graph, Some(base.cover_lambda2()), Construction::Surgery, cert)
    };
    let bipartition = check_structure(&graph)?;
    let certificate = if exact_ok {
        exact_certificate(&graph, params.exact_threshold)?
    } else {
        fallback
    };
    if !(certificate.lower_bound > 0.0) {
        return Err(ExpanderError::Structure("nonpositive Cheeger certificate"));
    }
    Ok(CertifiedExpander {
        graph,
        bipartition,
        certificate,
        lambda2,
        construction,
    })
}
