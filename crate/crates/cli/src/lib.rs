//! Shared plumbing for the `cspembed` binary: error kinds and exit codes,
//! artifact documents, graph family specs, and the experiment harness.

pub mod commands;
pub mod docs;
pub mod harness;

use std::fmt;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cspembed::compile::{CompileError, TransportError};
use cspembed::csp::CspError;
use cspembed::embedding::EmbedError;
use cspembed::expander::ExpanderError;
use cspembed::routing::RoutingError;
use cspembed::{families, Config, Graph};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    /// An assertion or equivalence check failed.
    Failure = 1,
    Input = 2,
    Budget = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub stage: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ExitKind, stage: &str, message: impl fmt::Display) -> Self {
        CliError {
            kind,
            stage: stage.to_string(),
            message: message.to_string(),
        }
    }

    pub fn input(stage: &str, message: impl fmt::Display) -> Self {
        Self::new(ExitKind::Input, stage, message)
    }

    pub fn failure(stage: &str, message: impl fmt::Display) -> Self {
        Self::new(ExitKind::Failure, stage, message)
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

/// Maps library errors onto exit codes, tagged with the stage that raised them.
pub trait Stage<T> {
    fn stage(self, stage: &str) -> Result<T, CliError>;
}

fn csp_kind(e: &CspError) -> ExitKind {
    match e {
        CspError::BudgetExceeded(_) => ExitKind::Budget,
        _ => ExitKind::Input,
    }
}

fn expander_kind(e: &ExpanderError) -> ExitKind {
    match e {
        ExpanderError::InvalidOrder(_) | ExpanderError::TooLargeForExact { .. } => ExitKind::Input,
        ExpanderError::CertificateNotReached { .. } => ExitKind::Budget,
        _ => ExitKind::Failure,
    }
}

fn embed_kind(e: &EmbedError) -> ExitKind {
    match e {
        EmbedError::InvalidHostSize(_) => ExitKind::Input,
        EmbedError::Expander(e) => expander_kind(e),
        EmbedError::Routing(_) => ExitKind::Failure,
    }
}

macro_rules! staged {
    ($ty:ty, $kind:expr) => {
        impl<T> Stage<T> for Result<T, $ty> {
            fn stage(self, stage: &str) -> Result<T, CliError> {
                self.map_err(|e| {
                    let kind: fn(&$ty) -> ExitKind = $kind;
                    CliError::new(kind(&e), stage, &e)
                })
            }
        }
    };
}

staged!(CspError, csp_kind);
staged!(ExpanderError, expander_kind);
staged!(EmbedError, embed_kind);
staged!(RoutingError, |_| ExitKind::Input);
staged!(cspembed::graph::GraphError, |_| ExitKind::Input);
staged!(serde_json::Error, |_| ExitKind::Input);
staged!(std::io::Error, |_| ExitKind::Input);
staged!(
    TransportError,
    |e| if matches!(e, TransportError::Disagreement { .. }) { ExitKind::Failure } else { ExitKind::Input }
);
staged!(CompileError, |e| match e {
    CompileError::Embed(e) => embed_kind(e),
    CompileError::Csp(e) => csp_kind(e),
    CompileError::AlphabetOverflow(_) => ExitKind::Budget,
    _ => ExitKind::Input,
});

/// Output format for artifacts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn read_text(path: &Path, stage: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::input(stage, format!("{}: {e}", path.display())))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path, stage: &str) -> Result<T, CliError> {
    let text = read_text(path, stage)?;
    serde_json::from_str(&text).map_err(|e| CliError::input(stage, format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialise");
    s.push('\n');
    s
}

/// Loads a run configuration from JSON or TOML (by extension).
pub fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = read_text(path, "config")?;
    if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| CliError::input("config", e))
    } else {
        serde_json::from_str(&text).map_err(|e| CliError::input("config", e))
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, CliError> {
    s.trim()
        .parse()
        .map_err(|_| CliError::input("parse", format!("bad {what} `{s}`")))
}

/// Comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_num(t, what)).collect()
}

/// Builds a graph from a family spec:
/// `octahedron`, `complete:N`, `cycle:N`, `path:N`, `complete-bipartite:A,B`,
/// `multipartite:A,B,..`, `random-regular:N:D`, `gnp:N:P`.
/// Random families draw from `seed`.
pub fn graph_from_spec(spec: &str, seed: u64) -> Result<Graph, CliError> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default();
    let args: Vec<&str> = parts.collect();
    let want = |k: usize| {
        if args.len() == k {
            Ok(())
        } else {
            Err(CliError::input("parse", format!("family `{name}` takes {k} argument(s)")))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match name {
        "octahedron" => {
            want(0)?;
            Ok(families::octahedron())
        }
        "complete" | "cycle" | "path" => {
            want(1)?;
            let n: usize = parse_num(args[0], "order")?;
            if name == "cycle" && n < 3 {
                return Err(CliError::input("parse", "a cycle needs at least 3 vertices"));
            }
            Ok(match name {
                "complete" => families::complete(n),
                "cycle" => families::cycle(n),
                _ => families::path(n),
            })
        }
        "complete-bipartite" => {
            want(1)?;
            let sizes: Vec<usize> = parse_list(args[0], "part size")?;
            if sizes.len() != 2 {
                return Err(CliError::input("parse", "complete-bipartite takes A,B"));
            }
            Ok(families::complete_bipartite(sizes[0], sizes[1]))
        }
        "multipartite" => {
            want(1)?;
            Ok(families::complete_multipartite(&parse_list::<usize>(args[0], "part size")?))
        }
        "random-regular" => {
            want(2)?;
            let n = parse_num(args[0], "order")?;
            let d = parse_num(args[1], "degree")?;
            families::random_regular(n, d, &mut rng, 100_000)
                .ok_or_else(|| CliError::input("generate", format!("no {d}-regular graph on {n} vertices found")))
        }
        "gnp" => {
            want(2)?;
            let n = parse_num(args[0], "order")?;
            let p: f64 = parse_num(args[1], "probability")?;
            if !(0.0..=1.0).contains(&p) {
                return Err(CliError::input("parse", "probability outside [0, 1]"));
            }
            Ok(families::gnp(n, p, &mut rng))
        }
        _ => Err(CliError::input("parse", format!("unknown graph family `{spec}`"))),
    }
}

/// Derives independent seeds for the parts of one run.
pub fn sub_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
