//! Compiles a 2-CSP along a connected embedding into an instance on the
//! host graph, and moves assignments between the two.
//!
//! Host vertex `x` holds the tuple of values of the source variables whose
//! image contains `x` (its bag, in ascending id order). Tuples are ranked
//! little-endian in mixed radix: slot `i` of the bag contributes
//! `value * Π_{j<i} |Σ_{bag[j]}|`. An empty bag has the single value 0.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{CompileParams, Config};
use crate::csp::{Assignment, CspError, CspInstance, Relation};
use crate::embedding::{depth_scale, embed, verify_embedding, ConnectedEmbedding, EmbedError, EmbedOutput, Violation};
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("embedding is not a connected embedding of the constraint graph ({} violations)", .0.len())]
    InvalidEmbedding(Vec<Violation>),
    #[error("source edge {{{u}, {v}}} is not covered by any bag or host edge")]
    Uncovered { u: usize, v: usize },
    #[error("host vertex {0} is isolated")]
    IsolatedHostVertex(usize),
    #[error("alphabet of host vertex {0} does not fit in a machine word")]
    AlphabetOverflow(usize),
    #[error("padded form needs a uniform alphabet")]
    NonUniformAlphabet,
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Csp(#[from] CspError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("value {value} at position {position} outside alphabet of size {size}")]
    ValueOutOfRange { position: usize, value: usize, size: usize },
    #[error(
        "not a satisfying assignment: source vertex {vertex} reads {first} at host {x1} but {second} at host {x2}"
    )]
    Disagreement {
        vertex: usize,
        x1: usize,
        x2: usize,
        first: usize,
        second: usize,
    },
}

/// Bags of the embedding and the source edges each host vertex and host
/// edge is responsible for.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BagIndex {
    host: Graph,
    /// `V_x`, ascending.
    bags: Vec<Vec<usize>>,
    /// Host vertices of each source vertex's image, ascending.
    images: Vec<Vec<usize>>,
    /// `E_x`: source edge ids with both endpoints in `V_x`.
    internal: Vec<Vec<usize>>,
    /// `V_xy` per host edge id.
    shared: Vec<Vec<usize>>,
    /// `E_xy` per host edge id: source edge ids with one endpoint in each bag.
    crossing: Vec<Vec<usize>>,
}

impl BagIndex {
    pub fn host(&self) -> &Graph {
        &self.host
    }

    pub fn bag(&self, x: usize) -> &[usize] {
        &self.bags[x]
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    /// `π_x(v)`.
    pub fn position(&self, x: usize, v: usize) -> Option<usize> {
        self.bags[x].binary_search(&v).ok()
    }

    /// Host vertices whose bag contains `v`.
    pub fn representatives(&self, v: usize) -> &[usize] {
        &self.images[v]
    }

    pub fn internal(&self, x: usize) -> &[usize] {
        &self.internal[x]
    }

    pub fn shared(&self, host_edge: usize) -> &[usize] {
        &self.shared[host_edge]
    }

    pub fn crossing(&self, host_edge: usize) -> &[usize] {
        &self.crossing[host_edge]
    }

    /// `max_x d_x`.
    pub fn depth(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0)
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn contains(sorted: &[usize], v: usize) -> bool {
    sorted.binary_search(&v).is_ok()
}

/// Indexes the bags of a verified embedding of `g_src`.
pub fn build_bag_index(g_src: &Graph, emb: &ConnectedEmbedding) -> Result<BagIndex, CompileError> {
    let report = verify_embedding(g_src, emb);
    if !report.is_valid() {
        return Err(CompileError::InvalidEmbedding(report.violations));
    }
    let host = emb.host.clone();
    let images: Vec<Vec<usize>> = emb
        .psi
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut bags = vec![Vec::new(); host.n()];
    for (v, image) in images.iter().enumerate() {
        for &x in image {
            bags[x].push(v);
        }
    }
    let mut internal = vec![Vec::new(); host.n()];
    let mut covered = vec![false; g_src.edge_count()];
    for (e, &(u, v)) in g_src.edges().iter().enumerate() {
        for &x in &intersect(&images[u], &images[v]) {
            internal[x].push(e);
            covered[e] = true;
        }
    }
    let mut shared = Vec::with_capacity(host.edge_count());
    let mut crossing = Vec::with_capacity(host.edge_count());
    for &(x, y) in host.edges() {
        shared.push(intersect(&bags[x], &bags[y]));
        let mut list = Vec::new();
        for (e, &(u, v)) in g_src.edges().iter().enumerate() {
            let forward = contains(&bags[x], u) && contains(&bags[y], v);
            let backward = contains(&bags[x], v) && contains(&bags[y], u);
            if forward || backward {
                list.push(e);
                covered[e] = true;
            }
        }
        crossing.push(list);
    }
    if let Some(e) = covered.iter().position(|&c| !c) {
        let (u, v) = g_src.edges()[e];
        return Err(CompileError::Uncovered { u, v });
    }
    Ok(BagIndex {
        host,
        bags,
        images,
        internal,
        shared,
        crossing,
    })
}

/// Mixed-radix ranking of bag tuples.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleCodec {
    /// Per host vertex, the alphabet size of each bag slot.
    radices: Vec<Vec<usize>>,
    /// Per host vertex, `Π_{j<i} radix_j` for each slot.
    strides: Vec<Vec<usize>>,
    sizes: Vec<usize>,
}

impl TupleCodec {
    pub fn new(index: &BagIndex, alphabet_sizes: &[usize]) -> Result<Self, CompileError> {
        let mut radices = Vec::with_capacity(index.bags.len());
        let mut strides = Vec::with_capacity(index.bags.len());
        let mut sizes = Vec::with_capacity(index.bags.len());
        for (x, bag) in index.bags.iter().enumerate() {
            let r: Vec<usize> = bag.iter().map(|&v| alphabet_sizes[v]).collect();
            let mut s = Vec::with_capacity(r.len());
            let mut acc: usize = 1;
            for &radix in &r {
                s.push(acc);
                acc = acc.checked_mul(radix).ok_or(CompileError::AlphabetOverflow(x))?;
            }
            radices.push(r);
            strides.push(s);
            sizes.push(acc);
        }
        Ok(TupleCodec { radices, strides, sizes })
    }

    /// `|Σ̃_x|`.
    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn radices(&self, x: usize) -> &[usize] {
        &self.radices[x]
    }

    pub fn rank(&self, x: usize, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.strides[x]).map(|(t, s)| t * s).sum()
    }

    pub fn unrank(&self, x: usize, value: usize) -> Vec<usize> {
        (0..self.radices[x].len()).map(|i| self.digit(x, i, value)).collect()
    }

    /// Slot `i` of the tuple ranked `value` at host vertex `x`.
    pub fn digit(&self, x: usize, i: usize, value: usize) -> usize {
        value / self.strides[x][i] % self.radices[x][i]
    }
}

#[derive(Clone, Copy, Debug)]
enum Side {
    X,
    Y,
}

/// Where to read one source value from a pair of host values.
#[derive(Clone, Copy, Debug)]
struct Slot {
    side: Side,
    stride: usize,
    radix: usize,
}

impl Slot {
    fn read(&self, a: usize, b: usize) -> usize {
        let v = match self.side {
            Side::X => a,
            Side::Y => b,
        };
        v / self.stride % self.radix
    }
}

/// The checks a host edge relation performs.
#[derive(Debug)]
struct EdgePlan {
    equal: Vec<(Slot, Slot)>,
    /// Source relation plus the slots of its lower and higher endpoint.
    relations: Vec<(Relation, Slot, Slot)>,
}

impl EdgePlan {
    fn accepts(&self, a: usize, b: usize) -> bool {
        self.equal.iter().all(|(p, q)| p.read(a, b) == q.read(a, b))
            && self
                .relations
                .iter()
                .all(|(rel, p, q)| rel.contains(p.read(a, b), q.read(a, b)))
    }
}

/// The compiled instance together with everything needed to transport
/// assignments.
#[derive(Clone, Debug)]
pub struct CompiledInstance {
    pub phi: CspInstance,
    pub index: BagIndex,
    pub codec: TupleCodec,
    /// Host edges whose relation was stored as an explicit table.
    pub materialized: usize,
}

/// Builds the host instance `Φ` of `gamma` along `emb`.
pub fn compile(gamma: &CspInstance, emb: &ConnectedEmbedding, params: &CompileParams) -> Result<CompiledInstance, CompileError> {
    let index = build_bag_index(gamma.graph(), emb)?;
    compile_with_index(gamma, index, params)
}

pub fn compile_with_index(gamma: &CspInstance, index: BagIndex, params: &CompileParams) -> Result<CompiledInstance, CompileError> {
    let host = index.host.clone();
    if let Some(x) = (0..host.n()).find(|&x| host.degree(x) == 0) {
        return Err(CompileError::IsolatedHostVertex(x));
    }
    let codec = TupleCodec::new(&index, gamma.alphabet_sizes())?;
    let slot = |side: Side, x: usize, v: usize| {
        let i = index.position(x, v).expect("source vertex in bag");
        Slot {
            side,
            stride: codec.strides[x][i],
            radix: codec.radices[x][i],
        }
    };
    // with deduplication, E_x rides on the lowest-numbered host edge at x
    let mut internal_owner = vec![usize::MAX; host.n()];
    for (h, &(x, y)) in host.edges().iter().enumerate() {
        for z in [x, y] {
            if internal_owner[z] == usize::MAX {
                internal_owner[z] = h;
            }
        }
    }
    let src_edges = gamma.graph().edges();
    let mut relations = Vec::with_capacity(host.edge_count());
    let mut materialized = 0;
    for (h, &(x, y)) in host.edges().iter().enumerate() {
        let equal = index.shared[h]
            .iter()
            .map(|&v| (slot(Side::X, x, v), slot(Side::Y, y, v)))
            .collect();
        let mut rels = Vec::new();
        for &e in &index.crossing[h] {
            let (u, v) = src_edges[e];
            let rel = gamma.relation(e);
            if contains(&index.bags[x], u) && contains(&index.bags[y], v) {
                rels.push((rel.clone(), slot(Side::X, x, u), slot(Side::Y, y, v)));
            }
            if contains(&index.bags[x], v) && contains(&index.bags[y], u) {
                rels.push((rel.clone(), slot(Side::Y, y, u), slot(Side::X, x, v)));
            }
        }
        for (z, side) in [(x, Side::X), (y, Side::Y)] {
            if params.dedup_internal && internal_owner[z] != h {
                continue;
            }
            for &e in &index.internal[z] {
                let (u, v) = src_edges[e];
                rels.push((gamma.relation(e).clone(), slot(side, z, u), slot(side, z, v)));
            }
        }
        let plan = Arc::new(EdgePlan { equal, relations: rels });
        let (la, lb) = (codec.sizes[x], codec.sizes[y]);
        let rel = if (la as u64).saturating_mul(lb as u64) <= params.materialize_budget {
            materialized += 1;
            Relation::tabulate(la, lb, |a, b| plan.accepts(a, b))
        } else {
            Relation::from_fn(la, lb, move |a, b| plan.accepts(a, b))
        };
        relations.push(rel);
    }
    let phi = CspInstance::new(host, codec.sizes.clone(), relations)?;
    Ok(CompiledInstance {
        phi,
        index,
        codec,
        materialized,
    })
}

fn check_values(values: &[usize], sizes: &[usize]) -> Result<(), TransportError> {
    if values.len() != sizes.len() {
        return Err(TransportError::Length {
            expected: sizes.len(),
            got: values.len(),
        });
    }
    for (position, (&value, &size)) in values.iter().zip(sizes).enumerate() {
        if value >= size {
            return Err(TransportError::ValueOutOfRange { position, value, size });
        }
    }
    Ok(())
}

impl CompiledInstance {
    /// Source alphabet sizes, recovered from the codec.
    fn source_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.index.images.len()];
        for (x, bag) in self.index.bags.iter().enumerate() {
            for (&v, &r) in bag.iter().zip(&self.codec.radices[x]) {
                sizes[v] = r;
            }
        }
        sizes
    }

    /// Host assignment whose tuple at `x` lists `σ` over the bag of `x`.
    pub fn encode(&self, sigma: &Assignment) -> Result<Assignment, TransportError> {
        check_values(&sigma.0, &self.source_sizes())?;
        Ok(Assignment(
            self.index
                .bags
                .iter()
                .enumerate()
                .map(|(x, bag)| bag.iter().zip(&self.codec.strides[x]).map(|(&v, s)| sigma.0[v] * s).sum())
                .collect(),
        ))
    }

    /// Reads every source variable off all of its representatives and
    /// insists that they agree.
    pub fn decode(&self, tilde: &Assignment) -> Result<Assignment, TransportError> {
        check_values(&tilde.0, &self.codec.sizes)?;
        let mut out = Vec::with_capacity(self.index.images.len());
        for (v, reps) in self.index.images.iter().enumerate() {
            let read = |x: usize| {
                let i = self.index.position(x, v).expect("representative holds v");
                self.codec.digit(x, i, tilde.0[x])
            };
            let x1 = reps[0];
            let first = read(x1);
            for &x2 in &reps[1..] {
                let second = read(x2);
                if second != first {
                    return Err(TransportError::Disagreement {
                        vertex: v,
                        x1,
                        x2,
                        first,
                        second,
                    });
                }
            }
            out.push(first);
        }
        Ok(Assignment(out))
    }

    /// The uniform-alphabet form: every host vertex carries `d = depth`
    /// slots over `Σ`, slots past the bag are ignored by the constraints.
    pub fn padded(&self, filler: usize) -> Result<PaddedInstance, CompileError> {
        let sizes = self.source_sizes();
        let s = match sizes.first() {
            Some(&s) if sizes.iter().all(|&t| t == s) => s,
            None => 1,
            Some(_) => return Err(CompileError::NonUniformAlphabet),
        };
        let d = self.index.depth();
        let size = s.checked_pow(d as u32).ok_or(CompileError::AlphabetOverflow(0))?;
        let compact = Arc::new(self.clone());
        let mut relations = Vec::with_capacity(self.phi.graph().edge_count());
        for (h, &(x, y)) in self.phi.graph().edges().iter().enumerate() {
            let c = Arc::clone(&compact);
            let (mx, my) = (s.pow(self.index.bags[x].len() as u32), s.pow(self.index.bags[y].len() as u32));
            relations.push(Relation::from_fn(size, size, move |a, b| {
                c.phi.relation(h).contains(a % mx, b % my)
            }));
        }
        let n = self.phi.n();
        let instance = CspInstance::new(self.phi.graph().clone(), vec![size; n], relations)?;
        Ok(PaddedInstance {
            instance,
            alphabet: s,
            depth: d,
            filler: filler.min(s - 1),
            bag_sizes: self.index.bags.iter().map(Vec::len).collect(),
        })
    }
}

/// `Φ` over the uniform alphabet `Σ^d`.
#[derive(Clone, Debug)]
pub struct PaddedInstance {
    pub instance: CspInstance,
    pub alphabet: usize,
    pub depth: usize,
    pub filler: usize,
    bag_sizes: Vec<usize>,
}

impl PaddedInstance {
    /// Fills every unused slot with the filler value.
    pub fn pad(&self, compact: &Assignment) -> Assignment {
        Assignment(
            compact
                .0
                .iter()
                .zip(&self.bag_sizes)
                .map(|(&value, &d)| {
                    let low = self.alphabet.pow(d as u32);
                    let high: usize = (d..self.depth).map(|i| self.filler * self.alphabet.pow(i as u32)).sum();
                    value % low + high
                })
                .collect(),
        )
    }

    /// Drops the padding slots.
    pub fn unpad(&self, padded: &Assignment) -> Assignment {
        Assignment(
            padded
                .0
                .iter()
                .zip(&self.bag_sizes)
                .map(|(&value, &d)| value % self.alphabet.pow(d as u32))
                .collect(),
        )
    }
}

pub fn encode_assignment(sigma: &Assignment, compiled: &CompiledInstance) -> Result<Assignment, TransportError> {
    compiled.encode(sigma)
}

pub fn decode_assignment(tilde: &Assignment, compiled: &CompiledInstance) -> Result<Assignment, TransportError> {
    compiled.decode(tilde)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineMetrics {
    pub k: usize,
    pub host_vertices: usize,
    pub host_edges: usize,
    pub host_is_cubic: bool,
    pub host_is_bipartite: bool,
    pub depth: usize,
    pub depth_bound: f64,
    pub fitted_z: f64,
    /// `log2 max_x |Σ̃_x|`.
    pub alphabet_log2: f64,
    /// `log2 |Σ|^{Z·(1 + (|V|+|E|)/k)·log2 k}` with the largest source alphabet.
    pub alphabet_bound_log2: f64,
    pub alphabet_within_bound: bool,
    pub materialized_relations: usize,
    pub met_routing_targets: bool,
}

/// Wall-clock time per stage, kept apart from the reproducible metrics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub embed_ms: f64,
    pub compile_ms: f64,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub compiled: CompiledInstance,
    pub embedding: EmbedOutput,
    pub metrics: PipelineMetrics,
    pub timings: StageTimings,
}

/// Embeds the constraint graph of `gamma` into a `k`-vertex cubic bipartite
/// expander and compiles.
pub fn pipeline(gamma: &CspInstance, k: usize, seed: u64, config: &Config) -> Result<PipelineOutput, CompileError> {
    let t0 = Instant::now();
    let embedding = embed(gamma.graph(), k, seed, &config.embed)?;
    let embed_ms = t0.elapsed().as_secs_f64() * 1e3;
    let t1 = Instant::now();
    let compiled = compile(gamma, &embedding.embedding, &config.compile)?;
    let compile_ms = t1.elapsed().as_secs_f64() * 1e3;

    let host = compiled.phi.graph();
    let g = gamma.graph();
    let scale = depth_scale(g.n(), g.edge_count(), k);
    let max_sigma = gamma.alphabet_sizes().iter().copied().max().unwrap_or(1) as f64;
    let alphabet_log2 = compiled
        .codec
        .sizes
        .iter()
        .map(|&s| (s as f64).log2())
        .fold(0.0, f64::max);
    let alphabet_bound_log2 = config.embed.z * scale * max_sigma.log2();
    let metrics = PipelineMetrics {
        k,
        host_vertices: host.n(),
        host_edges: host.edge_count(),
        host_is_cubic: host.regular_degree() == Some(3),
        host_is_bipartite: embedding.expander.bipartition.is_valid_for(host),
        depth: compiled.index.depth(),
        depth_bound: embedding.depth.bound,
        fitted_z: embedding.fitted_z,
        alphabet_log2,
        alphabet_bound_log2,
        alphabet_within_bound: alphabet_log2 <= alphabet_bound_log2 + 1e-9,
        materialized_relations: compiled.materialized,
        met_routing_targets: embedding.met_routing_targets,
    };
    Ok(PipelineOutput {
        compiled,
        embedding,
        metrics,
        timings: StageTimings { embed_ms, compile_ms },
    })
}

/// Largest even `k` in `[6, k_max]` whose depth bound
/// `z·(1 + (n+m)/k)·log2 k` stays within `max_depth`.
pub fn select_host_size(n: usize, m: usize, z: f64, max_depth: f64, k_max: usize) -> Option<usize> {
    (6..=k_max)
        .rev()
        .filter(|k| k % 2 == 0)
        .find(|&k| z * depth_scale(n, m, k) <= max_depth)
}
