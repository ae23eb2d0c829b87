//! Tunable constants, gathered in one place with their defaults.
//!
//! Every struct deserialises with missing fields filled from `Default`, so a
//! config file only needs to name the values it overrides.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpanderParams {
    /// Orders below this use the explicit circulant family.
    pub small_case_cutoff: usize,
    /// Largest order for which the exact Cheeger constant is computed.
    pub exact_threshold: usize,
    /// Base graphs sampled before giving up on the spectral certificate.
    pub base_attempts: usize,
    /// Pairings tried per sample before it counts as a failed attempt.
    pub pairing_tries: usize,
    pub lambda2_max: f64,
    pub certificate_margin: f64,
}

impl Default for ExpanderParams {
    fn default() -> Self {
        ExpanderParams {
            small_case_cutoff: 12,
            exact_threshold: 24,
            base_attempts: 200,
            pairing_tries: 10_000,
            lambda2_max: 2.85,
            certificate_margin: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutingParams {
    /// Edge weight is `exp(beta * load)`.
    pub beta: f64,
    /// Maximum number of rerouting sweeps.
    pub sweeps: usize,
    pub c_cong: f64,
    pub c_len: f64,
}

impl Default for RoutingParams {
    fn default() -> Self {
        RoutingParams {
            beta: 1.0,
            sweeps: 20,
            c_cong: 8.0,
            c_len: 8.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedParams {
    /// Constant in the depth bound `Z·(1 + (|V|+|E|)/k)·log2 k`.
    pub z: f64,
    /// Later matchings see the congestion left by earlier ones.
    pub accumulate_congestion: bool,
    pub expander: ExpanderParams,
    pub routing: RoutingParams,
}

impl Default for EmbedParams {
    fn default() -> Self {
        EmbedParams {
            z: 64.0,
            accumulate_congestion: true,
            expander: ExpanderParams::default(),
            routing: RoutingParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    /// Maximum number of search nodes (value trials) before refusing.
    pub node_budget: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            node_budget: 100_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompileParams {
    /// Relations with at most this many value pairs are materialised.
    pub materialize_budget: u64,
    /// Check bag-internal source edges on one incident host edge only.
    pub dedup_internal: bool,
}

impl Default for CompileParams {
    fn default() -> Self {
        CompileParams {
            materialize_budget: 1_000_000,
            dedup_internal: false,
        }
    }
}

/// Everything a run can be configured with.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub embed: EmbedParams,
    pub solver: SolverParams,
    pub compile: CompileParams,
}
