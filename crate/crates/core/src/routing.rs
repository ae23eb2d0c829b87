//! Routing a partial matching of demand pairs through a host graph with low
//! edge congestion.
//!
//! Paths are found by Dijkstra under edge weights `exp(β · load)`, demands
//! taken in a seeded random order. Rerouting sweeps then pull every path off
//! the currently most congested edges and reinsert it along its cheapest
//! alternative, stopping once a sweep fails to improve
//! `(max congestion, #edges at max)`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::RoutingParams;
use crate::graph::{shortest_path, Graph, Path};

/// Largest exponent fed to `exp` when weighting edges.
const MAX_EXPONENT: f64 = 600.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("host graph is disconnected")]
    Disconnected,
    #[error("demand endpoint {vertex} is not a host vertex (host has {n})")]
    EndpointOutOfRange { vertex: usize, n: usize },
    #[error("host vertex {0} appears in more than one demand endpoint")]
    RepeatedEndpoint(usize),
    #[error("expansion bound must be positive, got {0}")]
    InvalidAlpha(f64),
    #[error("background load has {got} entries, host has {expected} edges")]
    BackgroundLength { got: usize, expected: usize },
    #[error("solution was routed on a different host")]
    HostMismatch,
}

/// Demand pairs whose endpoints are pairwise distinct host vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemandSet {
    pairs: Vec<(usize, usize)>,
}

impl DemandSet {
    pub fn new(pairs: Vec<(usize, usize)>, host_n: usize) -> Result<Self, RoutingError> {
        let mut seen = vec![false; host_n];
        for &(s, t) in &pairs {
            for v in [s, t] {
                if v >= host_n {
                    return Err(RoutingError::EndpointOutOfRange { vertex: v, n: host_n });
                }
                if std::mem::replace(&mut seen[v], true) {
                    return Err(RoutingError::RepeatedEndpoint(v));
                }
            }
        }
        Ok(DemandSet { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongestionProfile {
    /// Paths through each host edge, indexed by edge id.
    pub edge: Vec<u32>,
    /// Paths through each host vertex.
    pub vertex: Vec<u32>,
}

impl CongestionProfile {
    pub fn zero(h: &Graph) -> Self {
        CongestionProfile {
            edge: vec![0; h.edge_count()],
            vertex: vec![0; h.n()],
        }
    }

    /// Recounts congestion from a list of paths.
    pub fn from_paths<'a, I>(h: &Graph, paths: I) -> Self
    where
        I: IntoIterator<Item = &'a Path>,
    {
        let mut p = Self::zero(h);
        for path in paths {
            p.add(h, path);
        }
        p
    }

    fn add(&mut self, h: &Graph, path: &Path) {
        for (a, b) in path.steps() {
            self.edge[h.edge_index(a, b).expect("path step is a host edge")] += 1;
        }
        for &v in path.vertices() {
            self.vertex[v] += 1;
        }
    }

    fn remove(&mut self, h: &Graph, path: &Path) {
        for (a, b) in path.steps() {
            self.edge[h.edge_index(a, b).unwrap()] -= 1;
        }
        for &v in path.vertices() {
            self.vertex[v] -= 1;
        }
    }

    pub fn max_edge(&self) -> u32 {
        self.edge.iter().copied().max().unwrap_or(0)
    }

    pub fn max_vertex(&self) -> u32 {
        self.vertex.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutingSolution {
    /// `paths[i]` joins `pairs[i].0` to `pairs[i].1`.
    pub paths: Vec<Path>,
    pub congestion: CongestionProfile,
    pub max_edge_congestion: u32,
    pub max_path_len: usize,
    pub target_congestion: f64,
    pub target_length: f64,
    pub met_targets: bool,
    pub sweeps_run: usize,
    host_digest: u64,
}

fn host_digest(h: &Graph) -> u64 {
    let mut s = DefaultHasher::new();
    h.hash(&mut s);
    s.finish()
}

/// Routes every demand pair through `h`. `alpha` is the host's certified
/// Cheeger lower bound, used only for the reported targets.
pub fn route_matching(
    h: &Graph,
    demands: &DemandSet,
    alpha: f64,
    seed: u64,
    params: &RoutingParams,
) -> Result<RoutingSolution, RoutingError> {
    route_matching_loaded(h, demands, alpha, seed, params, None)
}

/// As [`route_matching`], with edge weights also charged for a background
/// load left by earlier routings. The solution's congestion profile counts
/// only its own paths.
pub fn route_matching_loaded(
    h: &Graph,
    demands: &DemandSet,
    alpha: f64,
    seed: u64,
    params: &RoutingParams,
    background: Option<&[u32]>,
) -> Result<RoutingSolution, RoutingError> {
    if !(alpha > 0.0) {
        return Err(RoutingError::InvalidAlpha(alpha));
    }
    if !h.is_connected() {
        return Err(RoutingError::Disconnected);
    }
    let m = h.edge_count();
    let background: Vec<u32> = match background {
        Some(b) if b.len() != m => {
            return Err(RoutingError::BackgroundLength {
                got: b.len(),
                expected: m,
            })
        }
        Some(b) => b.to_vec(),
        None => vec![0; m],
    };
    let pairs = demands.pairs();
    // re-validate against this host
    DemandSet::new(pairs.to_vec(), h.n())?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut own = CongestionProfile::zero(h);
    let route_one = |own: &CongestionProfile, (s, t): (usize, usize)| -> Path {
        let weight = |e: usize| (params.beta * f64::from(background[e] + own.edge[e])).min(MAX_EXPONENT).exp();
        shortest_path(h, s, t, weight).expect("host is connected").0
    };

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.shuffle(&mut rng);
    let mut paths: Vec<Option<Path>> = vec![None; pairs.len()];
    for &i in &order {
        let p = route_one(&own, pairs[i]);
        own.add(h, &p);
        paths[i] = Some(p);
    }
    let mut paths: Vec<Path> = paths.into_iter().map(Option::unwrap).collect();

    let objective = |own: &CongestionProfile| -> (u32, usize) {
        let total = |e: usize| background[e] + own.edge[e];
        let max = (0..m).map(total).max().unwrap_or(0);
        (max, (0..m).filter(|&e| total(e) == max).count())
    };
    let mut current = objective(&own);
    let mut sweeps_run = 0;
    for _ in 0..params.sweeps {
        if current.0 <= 1 {
            break;
        }
        sweeps_run += 1;
        let hot: Vec<bool> = (0..m).map(|e| background[e] + own.edge[e] == current.0).collect();
        let mut through: Vec<usize> = (0..paths.len())
            .filter(|&i| paths[i].steps().any(|(a, b)| hot[h.edge_index(a, b).unwrap()]))
            .collect();
        through.shuffle(&mut rng);
        let saved_paths = paths.clone();
        let saved_own = own.clone();
        for &i in &through {
            own.remove(h, &paths[i]);
            let p = route_one(&own, pairs[i]);
            own.add(h, &p);
            paths[i] = p;
        }
        let next = objective(&own);
        if next < current {
            current = next;
        } else {
            paths = saved_paths;
            own = saved_own;
            break;
        }
    }

    let k = h.n() as f64;
    let log_k = k.log2().max(1.0);
    let target_congestion = params.c_cong / alpha * log_k;
    let target_length = params.c_len / alpha * log_k;
    let max_edge_congestion = own.max_edge();
    let max_path_len = paths.iter().map(Path::len).max().unwrap_or(0);
    Ok(RoutingSolution {
        met_targets: f64::from(max_edge_congestion) <= target_congestion && max_path_len as f64 <= target_length,
        paths,
        congestion: own,
        max_edge_congestion,
        max_path_len,
        target_congestion,
        target_length,
        sweeps_run,
        host_digest: host_digest(h),
    })
}

/// Pointwise sum of the congestion profiles of solutions routed on `h`.
pub fn accumulate_congestion(solutions: &[RoutingSolution], h: &Graph) -> Result<CongestionProfile, RoutingError> {
    let digest = host_digest(h);
    let mut total = CongestionProfile::zero(h);
    for s in solutions {
        if s.host_digest != digest {
            return Err(RoutingError::HostMismatch);
        }
        for (t, c) in total.edge.iter_mut().zip(&s.congestion.edge) {
            *t += c;
        }
        for (t, c) in total.vertex.iter_mut().zip(&s.congestion.vertex) {
            *t += c;
        }
    }
    Ok(total)
}
