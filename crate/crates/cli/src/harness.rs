//! End-to-end runs and parameter sweeps.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use cspembed::compile::{pipeline, PipelineMetrics, StageTimings};
use cspembed::config::{Config, ExpanderParams, RoutingParams};
use cspembed::csp::{count_satisfying_with, is_satisfied, solve_bruteforce_with, CspInstance};
use cspembed::embedding::embed;
use cspembed::expander::bipartite_expander;
use cspembed::families;
use cspembed::routing::{route_matching, DemandSet};

use crate::{sub_seed, CliError, Stage, FORMAT_VERSION};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct E2eReport {
    pub format_version: u32,
    pub seed: u64,
    pub k: usize,
    pub gamma_vertices: usize,
    pub gamma_constraints: usize,
    pub gamma_alphabet_sizes: Vec<usize>,
    pub matchings: usize,
    pub max_matching_congestion: u32,
    pub max_total_congestion: u32,
    #[serde(flatten)]
    pub metrics: PipelineMetrics,
    pub gamma_satisfiable: bool,
    pub phi_satisfiable: bool,
    pub gamma_witness: Option<Vec<usize>>,
    pub phi_witness_decoded: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_count: Option<u128>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_count: Option<u128>,
    pub agree: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<StageTimings>,
}

/// Runs the pipeline on `gamma`, solves both sides by brute force and
/// compares. A disagreement is reported in `agree`, not as an error.
pub fn cmd_e2e(gamma: &CspInstance, k: usize, seed: u64, config: &Config, count: bool) -> Result<(E2eReport, StageTimings), CliError> {
    let out = pipeline(gamma, k, seed, config).stage("compile")?;
    let solver = &config.solver;
    let gamma_witness = solve_bruteforce_with(gamma, solver).stage("solve-gamma")?;
    let phi_witness = solve_bruteforce_with(&out.compiled.phi, solver).stage("solve-phi")?;
    let decoded = match &phi_witness {
        Some(t) => Some(out.compiled.decode(t).stage("decode")?),
        None => None,
    };
    let mut agree = gamma_witness.is_some() == phi_witness.is_some();
    if let Some(d) = &decoded {
        agree &= is_satisfied(gamma, d).stage("decode")?;
    }
    let (gamma_count, phi_count) = if count {
        let g = count_satisfying_with(gamma, solver).stage("count-gamma")?;
        let p = count_satisfying_with(&out.compiled.phi, solver).stage("count-phi")?;
        agree &= g == p;
        (Some(g), Some(p))
    } else {
        (None, None)
    };
    let report = E2eReport {
        format_version: FORMAT_VERSION,
        seed,
        k,
        gamma_vertices: gamma.n(),
        gamma_constraints: gamma.graph().edge_count(),
        gamma_alphabet_sizes: gamma.alphabet_sizes().to_vec(),
        matchings: out.embedding.matchings,
        max_matching_congestion: out.embedding.max_matching_congestion,
        max_total_congestion: out.embedding.max_total_congestion,
        metrics: out.metrics,
        gamma_satisfiable: gamma_witness.is_some(),
        phi_satisfiable: phi_witness.is_some(),
        gamma_witness: gamma_witness.map(|a| a.0),
        phi_witness_decoded: decoded.map(|a| a.0),
        gamma_count,
        phi_count,
        agree,
        timings: None,
    };
    Ok((report, out.timings))
}

/// One row of a depth sweep. The summary row leaves the run fields empty,
/// carries the maximum depth and fitted Z, and puts the configured Z in
/// `bound`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRow {
    pub row: String,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub depth: usize,
    pub bound: f64,
    pub fitted_z: f64,
    pub within_bound: bool,
}

/// Embeds a random cubic source of each order `n` into hosts of each size
/// `k`, for `seeds` consecutive seeds from `seed`.
pub fn depth_sweep(ns: &[usize], ks: &[usize], seed: u64, seeds: u64, config: &Config) -> Result<Vec<DepthRow>, CliError> {
    if let Some(n) = ns.iter().find(|&&n| n < 4 || n % 2 == 1) {
        return Err(CliError::input("parse", format!("source order {n} admits no cubic graph")));
    }
    let mut rows = Vec::new();
    for &n in ns {
        for &k in ks {
            for s in seed..seed + seeds {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(s, n as u64, 0));
                let g = families::random_regular(n, 3, &mut rng, 100_000)
                    .ok_or_else(|| CliError::failure("generate", format!("no cubic graph on {n} vertices")))?;
                let out = embed(&g, k, s, &config.embed).stage("embed")?;
                rows.push(DepthRow {
                    row: "data".into(),
                    n: Some(n),
                    k: Some(k),
                    seed: Some(s),
                    depth: out.depth.depth,
                    bound: out.depth.bound,
                    fitted_z: out.fitted_z,
                    within_bound: out.depth.within_bound(),
                });
            }
        }
    }
    rows.sort_by(|a, b| (a.n, a.k, a.seed).cmp(&(b.n, b.k, b.seed)));
    let summary = DepthRow {
        row: "summary".into(),
        n: None,
        k: None,
        seed: None,
        depth: rows.iter().map(|r| r.depth).max().unwrap_or(0),
        bound: config.embed.z,
        fitted_z: rows.iter().map(|r| r.fitted_z).fold(0.0, f64::max),
        within_bound: rows.iter().all(|r| r.within_bound),
    };
    rows.push(summary);
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CongestionRow {
    pub row: String,
    pub k: Option<usize>,
    pub trial: Option<u64>,
    pub max_edge_congestion: u32,
    pub log2_k: f64,
    /// Congestion over `log2 k`; in the summary, the least-squares slope of
    /// congestion against `log2 k` through the origin.
    pub ratio: f64,
    pub within_limit: bool,
}

/// Routes `trials` random perfect matchings through a host of each size.
pub fn congestion_sweep(
    ks: &[usize],
    trials: u64,
    seed: u64,
    expander: &ExpanderParams,
    routing: &RoutingParams,
) -> Result<Vec<CongestionRow>, CliError> {
    let mut rows = Vec::new();
    for &k in ks {
        let host = bipartite_expander(k, seed, expander).stage("expander")?;
        let log2k = (k as f64).log2();
        for trial in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, k as u64, trial));
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(&mut rng);
            let pairs = perm.chunks(2).map(|c| (c[0], c[1])).collect();
            let demands = DemandSet::new(pairs, k).stage("route")?;
            let sol = route_matching(&host.graph, &demands, host.alpha(), sub_seed(seed ^ 1, k as u64, trial), routing)
                .stage("route")?;
            let c = sol.max_edge_congestion;
            rows.push(CongestionRow {
                row: "data".into(),
                k: Some(k),
                trial: Some(trial),
                max_edge_congestion: c,
                log2_k: log2k,
                ratio: c as f64 / log2k,
                within_limit: c as f64 <= routing.c_cong * log2k,
            });
        }
    }
    rows.sort_by(|a, b| (a.k, a.trial).cmp(&(b.k, b.trial)));
    let (num, den) = rows.iter().fold((0.0, 0.0), |(n, d), r| {
        (n + r.max_edge_congestion as f64 * r.log2_k, d + r.log2_k * r.log2_k)
    });
    let summary = CongestionRow {
        row: "summary".into(),
        k: None,
        trial: None,
        max_edge_congestion: rows.iter().map(|r| r.max_edge_congestion).max().unwrap_or(0),
        log2_k: 0.0,
        ratio: if den > 0.0 { num / den } else { 0.0 },
        within_limit: rows.iter().all(|r| r.within_limit),
    };
    rows.push(summary);
    Ok(rows)
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialise");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

pub fn from_csv<T: serde::de::DeserializeOwned>(text: &str) -> Result<Vec<T>, CliError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::input("parse", e))
}
