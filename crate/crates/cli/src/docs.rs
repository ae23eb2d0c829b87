//! JSON artifacts written and read by the commands. Every top-level
//! document carries `format_version`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use cspembed::compile::{compile, CompiledInstance};
use cspembed::config::CompileParams;
use cspembed::csp::{CspInstance, CspJson};
use cspembed::embedding::{ConnectedEmbedding, Violation};
use cspembed::expander::CertifiedExpander;
use cspembed::Graph;

use crate::{read_json, read_text, CliError, Stage, FORMAT_VERSION};

fn format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphDoc {
    #[serde(default = "format_version")]
    pub format_version: u32,
    #[serde(flatten)]
    pub graph: Graph,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExpanderDoc {
    pub format_version: u32,
    pub seed: u64,
    #[serde(flatten)]
    pub expander: CertifiedExpander,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RouteDoc {
    pub format_version: u32,
    pub seed: u64,
    pub host_n: usize,
    pub alpha: f64,
    pub demands: Vec<(usize, usize)>,
    pub paths: Vec<Vec<usize>>,
    pub edge_congestion: Vec<u32>,
    pub vertex_congestion: Vec<u32>,
    pub max_edge_congestion: u32,
    pub max_path_len: usize,
    pub target_congestion: f64,
    pub target_length: f64,
    pub met_targets: bool,
    pub sweeps_run: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedDoc {
    pub format_version: u32,
    pub seed: u64,
    pub k: usize,
    pub source: Graph,
    pub embedding: ConnectedEmbedding,
    pub cheeger_lower_bound: f64,
    pub depth: usize,
    pub depth_bound: f64,
    pub fitted_z: f64,
    pub per_vertex_load: Vec<usize>,
    pub matchings: usize,
    pub max_matching_congestion: u32,
    pub max_total_congestion: u32,
    pub max_path_len: usize,
    pub met_routing_targets: bool,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    /// `phi` holds every relation as a pair list.
    Explicit,
    /// Only the recipe is stored; rebuild with the same compile settings.
    Recipe,
}

/// A compiled instance. The recipe (`gamma`, `embedding`, `dedup_internal`)
/// always reproduces `phi`; `bags` and `radices` describe the tuple codec.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompiledDoc {
    pub format_version: u32,
    pub seed: u64,
    pub k: usize,
    pub representation: Representation,
    pub dedup_internal: bool,
    pub gamma: CspJson,
    pub embedding: ConnectedEmbedding,
    pub bags: Vec<Vec<usize>>,
    pub radices: Vec<Vec<usize>>,
    pub alphabet_sizes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<CspJson>,
}

impl CompiledDoc {
    pub fn new(
        seed: u64,
        k: usize,
        gamma: &CspInstance,
        embedding: &ConnectedEmbedding,
        c: &CompiledInstance,
        dedup_internal: bool,
    ) -> Result<Self, CliError> {
        let phi = if c.materialized == c.phi.graph().edge_count() {
            CspJson::from_instance(&c.phi).ok()
        } else {
            None
        };
        Ok(CompiledDoc {
            format_version: FORMAT_VERSION,
            seed,
            k,
            representation: if phi.is_some() {
                Representation::Explicit
            } else {
                Representation::Recipe
            },
            dedup_internal,
            gamma: CspJson::from_instance(gamma).stage("compile")?,
            embedding: embedding.clone(),
            bags: c.index.bags().to_vec(),
            radices: (0..c.index.host().n()).map(|x| c.codec.radices(x).to_vec()).collect(),
            alphabet_sizes: c.codec.alphabet_sizes().to_vec(),
            phi,
        })
    }

    /// Recompiles from the recipe and checks it against the stored codec.
    pub fn rebuild(&self, budget: u64) -> Result<(CspInstance, CompiledInstance), CliError> {
        let gamma = self.gamma.to_instance().stage("parse")?;
        let params = CompileParams {
            materialize_budget: budget,
            dedup_internal: self.dedup_internal,
        };
        let c = compile(&gamma, &self.embedding, &params).stage("compile")?;
        if c.index.bags() != self.bags.as_slice() || c.codec.alphabet_sizes() != self.alphabet_sizes.as_slice() {
            return Err(CliError::input("parse", "compiled document does not match its recipe"));
        }
        Ok((gamma, c))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveDoc {
    pub format_version: u32,
    pub satisfiable: bool,
    pub assignment: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountDoc {
    pub format_version: u32,
    pub count: u128,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AssignmentDoc {
    #[serde(default = "format_version")]
    pub format_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    pub assignment: Vec<usize>,
}

/// Reads an assignment from a document with an `assignment` field (as
/// written by `solve` and `transport`) or from a bare JSON array.
pub fn read_assignment(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = read_text(path, "parse")?;
    if let Ok(values) = serde_json::from_str::<Vec<usize>>(&text) {
        return Ok(values);
    }
    let value: serde_json::Value = serde_json::from_str(&text).stage("parse")?;
    match value.get("assignment") {
        Some(a) if !a.is_null() => serde_json::from_value(a.clone()).stage("parse"),
        _ => Err(CliError::input("parse", format!("{}: no assignment", path.display()))),
    }
}

/// A CSP file: plain instance JSON or a compiled document (whose `phi` is
/// rebuilt from its recipe when not stored).
pub fn read_csp(path: &Path, budget: u64) -> Result<CspInstance, CliError> {
    let value: serde_json::Value = read_json(path, "parse")?;
    if value.get("representation").is_some() {
        let doc: CompiledDoc = serde_json::from_value(value).stage("parse")?;
        return Ok(doc.rebuild(budget)?.1.phi);
    }
    let j: CspJson = serde_json::from_value(value).stage("parse")?;
    j.to_instance().stage("parse")
}
