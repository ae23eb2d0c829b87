//! The subcommands. Each returns the artifact text plus an optional failure
//! raised after the artifact was produced (so reports are still written).

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cspembed::compile::pipeline;
use cspembed::csp::{
    clique_instance, coloring_instance, count_satisfying_with, four_regular_coloring_instance, random_instance,
    regularize, solve_bruteforce_with, Assignment, CspInstance, CspJson,
};
use cspembed::embedding::{embed, verify_embedding};
use cspembed::expander::bipartite_expander;
use cspembed::routing::{route_matching, DemandSet};
use cspembed::{Config, Graph};

use crate::docs::{
    read_assignment, read_csp, AssignmentDoc, CompiledDoc, CountDoc, EmbedDoc, ExpanderDoc, GraphDoc, RouteDoc,
    SolveDoc,
};
use crate::harness::{cmd_e2e, congestion_sweep, depth_sweep, to_csv};
use crate::{graph_from_spec, load_config, parse_list, read_json, to_json, CliError, Format, Stage, FORMAT_VERSION};

#[derive(Parser, Debug)]
#[command(name = "cspembed", version, about = "Expander embeddings of 2-CSP instances")]
pub struct Cli {
    /// Seed for every randomised stage.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// JSON or TOML file overriding the default parameters.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Artifact format; sweeps default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a certified cubic bipartite expander.
    Expander {
        #[arg(long)]
        n: usize,
    },
    /// Route a matching through a certified host.
    Route(RouteArgs),
    /// Embed a source graph into a fresh k-vertex expander.
    Embed(EmbedArgs),
    /// Compile a CSP along an embedding into a k-vertex host.
    Compile(CompileArgs),
    /// Find a satisfying assignment by exhaustive search.
    Solve {
        #[arg(long)]
        csp: PathBuf,
    },
    /// Count satisfying assignments exactly.
    Count {
        #[arg(long)]
        csp: PathBuf,
    },
    /// Move an assignment between a CSP and its compiled instance.
    Transport(TransportArgs),
    /// Generate, compile, solve both sides and compare.
    E2e(E2eArgs),
    /// Embedding depth over a grid of source orders and host sizes.
    DepthSweep {
        /// Comma-separated source orders (random cubic graphs).
        #[arg(long)]
        n: String,
        /// Comma-separated host sizes.
        #[arg(long)]
        k: String,
        /// Number of consecutive seeds starting at --seed.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
    },
    /// Matching congestion over host sizes.
    CongestionSweep {
        #[arg(long)]
        k: String,
        #[arg(long, default_value_t = 5)]
        trials: u64,
    },
    /// Instance and graph generators.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
}

#[derive(Args, Debug)]
pub struct RouteArgs {
    /// Host written by `expander` (plain graphs carry no certificate and are refused).
    #[arg(long, conflicts_with = "k")]
    pub host: Option<PathBuf>,
    /// Build a host of this size instead.
    #[arg(long)]
    pub k: Option<usize>,
    /// JSON list of [s, t] pairs; defaults to a random perfect matching.
    #[arg(long)]
    pub demands: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GraphSource {
    /// Graph JSON file.
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
    /// Graph family spec such as `octahedron`, `complete:5`, `random-regular:24:3`.
    #[arg(long)]
    pub family: Option<String>,
}

impl GraphSource {
    fn load(&self, seed: u64) -> Result<Graph, CliError> {
        match (&self.graph, &self.family) {
            (Some(path), _) => read_json(path, "parse"),
            (None, Some(spec)) => graph_from_spec(spec, seed),
            (None, None) => Err(CliError::input("parse", "give --graph or --family")),
        }
    }
}

#[derive(Args, Debug)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[arg(long)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    #[arg(long)]
    pub gamma: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Also write pipeline metrics here.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// CSP assignment to compiled-instance assignment.
    Encode,
    /// Compiled-instance assignment back to the CSP.
    Decode,
}

#[derive(Args, Debug)]
pub struct TransportArgs {
    #[arg(long, value_enum)]
    pub direction: Direction,
    /// Document written by `compile`.
    #[arg(long)]
    pub compiled: PathBuf,
    #[arg(long)]
    pub assignment: PathBuf,
}

#[derive(Args, Debug)]
pub struct E2eArgs {
    /// CSP JSON file.
    #[arg(long, conflicts_with = "family")]
    pub gamma: Option<PathBuf>,
    /// Graph family whose q-colouring is the CSP.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub q: usize,
    /// Pad the colouring instance to a 4-regular constraint graph.
    #[arg(long)]
    pub four_regular: bool,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    /// Also count solutions on both sides.
    #[arg(long)]
    pub count: bool,
    /// Include wall-clock stage timings (makes the report run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// A graph from a family spec.
    Graph {
        #[arg(long)]
        family: String,
    },
    /// q-colouring of a graph.
    Coloring {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 3)]
        q: usize,
    },
    /// q-colouring padded to a 4-regular constraint graph.
    FourRegularColoring {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 3)]
        q: usize,
    },
    /// k-clique as a CSP over the vertices of a graph.
    Clique {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        k: usize,
    },
    /// Seeded random instance.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 3)]
        alphabet: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
    },
    /// Equivalent instance with a 3-regular constraint graph.
    Regularize {
        #[arg(long)]
        csp: PathBuf,
    },
}

/// Artifact text and a failure detected after producing it.
pub struct Artifact {
    pub text: String,
    pub failure: Option<CliError>,
}

impl Artifact {
    fn ok(text: String) -> Self {
        Artifact { text, failure: None }
    }
}

fn json_only(format: Option<Format>) -> Result<(), CliError> {
    match format {
        Some(Format::Csv) => Err(CliError::input("parse", "csv output is only available for sweeps")),
        _ => Ok(()),
    }
}

pub fn run(cli: &Cli) -> Result<Artifact, CliError> {
    let config = load_config(cli.config.as_deref())?;
    let seed = cli.seed;
    match &cli.command {
        Command::DepthSweep { n, k, seeds } => {
            let rows = depth_sweep(&parse_list(n, "order")?, &parse_list(k, "host size")?, seed, *seeds, &config)?;
            let failure = (!rows.last().is_some_and(|r| r.within_bound))
                .then(|| CliError::failure("depth-sweep", "a run exceeded the depth bound"));
            Ok(Artifact {
                text: sweep_text(&rows, cli.format)?,
                failure,
            })
        }
        Command::CongestionSweep { k, trials } => {
            let rows = congestion_sweep(
                &parse_list(k, "host size")?,
                *trials,
                seed,
                &config.embed.expander,
                &config.embed.routing,
            )?;
            let failure = (!rows.last().is_some_and(|r| r.within_limit))
                .then(|| CliError::failure("congestion-sweep", "a trial exceeded c_cong * log2 k"));
            Ok(Artifact {
                text: sweep_text(&rows, cli.format)?,
                failure,
            })
        }
        other => {
            json_only(cli.format)?;
            run_json(other, seed, &config)
        }
    }
}

fn sweep_text<T: serde::Serialize>(rows: &[T], format: Option<Format>) -> Result<String, CliError> {
    Ok(match format.unwrap_or(Format::Csv) {
        Format::Csv => to_csv(rows),
        Format::Json => to_json(&serde_json::json!({ "format_version": FORMAT_VERSION, "rows": rows })),
    })
}

fn run_json(command: &Command, seed: u64, config: &Config) -> Result<Artifact, CliError> {
    let budget = config.compile.materialize_budget;
    match command {
        Command::Expander { n } => {
            let expander = bipartite_expander(*n, seed, &config.embed.expander).stage("expander")?;
            Ok(Artifact::ok(to_json(&ExpanderDoc {
                format_version: FORMAT_VERSION,
                seed,
                expander,
            })))
        }
        Command::Route(args) => route(args, seed, config),
        Command::Embed(args) => {
            let g = args.source.load(seed)?;
            let out = embed(&g, args.k, seed, &config.embed).stage("embed")?;
            let check = verify_embedding(&g, &out.embedding);
            let failure = (!check.is_valid()).then(|| CliError::failure("verify", "embedding has violations"));
            let doc = EmbedDoc {
                format_version: FORMAT_VERSION,
                seed,
                k: args.k,
                cheeger_lower_bound: out.expander.alpha(),
                depth: out.depth.depth,
                depth_bound: out.depth.bound,
                fitted_z: out.fitted_z,
                per_vertex_load: out.depth.per_vertex,
                matchings: out.matchings,
                max_matching_congestion: out.max_matching_congestion,
                max_total_congestion: out.max_total_congestion,
                max_path_len: out.max_path_len,
                met_routing_targets: out.met_routing_targets,
                violations: check.violations,
                source: g,
                embedding: out.embedding,
            };
            Ok(Artifact {
                text: to_json(&doc),
                failure,
            })
        }
        Command::Compile(args) => {
            let gamma = read_csp(&args.gamma, budget)?;
            let out = pipeline(&gamma, args.k, seed, config).stage("compile")?;
            if let Some(path) = &args.metrics {
                let mut metrics = serde_json::to_value(&out.metrics).expect("metrics serialise");
                metrics["format_version"] = FORMAT_VERSION.into();
                metrics["seed"] = seed.into();
                std::fs::write(path, to_json(&metrics)).stage("write")?;
            }
            let doc = CompiledDoc::new(
                seed,
                args.k,
                &gamma,
                &out.embedding.embedding,
                &out.compiled,
                config.compile.dedup_internal,
            )?;
            Ok(Artifact::ok(to_json(&doc)))
        }
        Command::Solve { csp } => {
            let inst = read_csp(csp, budget)?;
            let sol = solve_bruteforce_with(&inst, &config.solver).stage("solve")?;
            Ok(Artifact::ok(to_json(&SolveDoc {
                format_version: FORMAT_VERSION,
                satisfiable: sol.is_some(),
                assignment: sol.map(|a| a.0),
            })))
        }
        Command::Count { csp } => {
            let inst = read_csp(csp, budget)?;
            let count = count_satisfying_with(&inst, &config.solver).stage("count")?;
            Ok(Artifact::ok(to_json(&CountDoc {
                format_version: FORMAT_VERSION,
                count,
            })))
        }
        Command::Transport(args) => {
            let doc: CompiledDoc = read_json(&args.compiled, "parse")?;
            let (_, c) = doc.rebuild(budget)?;
            let values = Assignment(read_assignment(&args.assignment)?);
            let (out, name) = match args.direction {
                Direction::Encode => (c.encode(&values).stage("encode")?, "encode"),
                Direction::Decode => (c.decode(&values).stage("decode")?, "decode"),
            };
            Ok(Artifact::ok(to_json(&AssignmentDoc {
                format_version: FORMAT_VERSION,
                direction: Some(name.into()),
                assignment: out.0,
            })))
        }
        Command::E2e(args) => {
            let gamma = match (&args.gamma, &args.family) {
                (Some(path), _) => read_csp(path, budget)?,
                (None, Some(spec)) => {
                    let g = graph_from_spec(spec, seed)?;
                    if args.four_regular {
                        four_regular_coloring_instance(&g, args.q).stage("generate")?
                    } else {
                        coloring_instance(&g, args.q).stage("generate")?
                    }
                }
                (None, None) => return Err(CliError::input("parse", "give --gamma or --family")),
            };
            let (mut report, timings) = cmd_e2e(&gamma, args.k, seed, config, args.count)?;
            if args.timings {
                report.timings = Some(timings);
            }
            let failure = (!report.agree).then(|| CliError::failure("equivalence", "CSP and compiled instance disagree"));
            Ok(Artifact {
                text: to_json(&report),
                failure,
            })
        }
        Command::Gen { what } => generate(what, seed, budget).map(Artifact::ok),
        Command::DepthSweep { .. } | Command::CongestionSweep { .. } => unreachable!("handled by run"),
    }
}

fn route(args: &RouteArgs, seed: u64, config: &Config) -> Result<Artifact, CliError> {
    let host = match (&args.host, args.k) {
        (Some(path), _) => {
            let value: serde_json::Value = read_json(path, "parse")?;
            if value.get("certificate").is_none() {
                return Err(CliError::input(
                    "parse",
                    "host has no Cheeger certificate; build it with the expander command",
                ));
            }
            serde_json::from_value::<ExpanderDoc>(value).stage("parse")?.expander
        }
        (None, Some(k)) => bipartite_expander(k, seed, &config.embed.expander).stage("expander")?,
        (None, None) => return Err(CliError::input("parse", "give --host or --k")),
    };
    let h = &host.graph;
    let pairs: Vec<(usize, usize)> = match &args.demands {
        Some(path) => read_json(path, "parse")?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..h.n()).collect();
            perm.shuffle(&mut rng);
            perm.chunks(2).map(|c| (c[0], c[1])).collect()
        }
    };
    let demands = DemandSet::new(pairs, h.n()).stage("parse")?;
    let sol = route_matching(h, &demands, host.alpha(), seed, &config.embed.routing).stage("route")?;
    Ok(Artifact::ok(to_json(&RouteDoc {
        format_version: FORMAT_VERSION,
        seed,
        host_n: h.n(),
        alpha: host.alpha(),
        demands: demands.pairs().to_vec(),
        paths: sol.paths.iter().map(|p| p.vertices().to_vec()).collect(),
        edge_congestion: sol.congestion.edge.clone(),
        vertex_congestion: sol.congestion.vertex.clone(),
        max_edge_congestion: sol.max_edge_congestion,
        max_path_len: sol.max_path_len,
        target_congestion: sol.target_congestion,
        target_length: sol.target_length,
        met_targets: sol.met_targets,
        sweeps_run: sol.sweeps_run,
    })))
}

fn csp_text(inst: &CspInstance) -> Result<String, CliError> {
    Ok(to_json(&CspJson::from_instance(inst).stage("write")?))
}

fn generate(what: &GenCommand, seed: u64, budget: u64) -> Result<String, CliError> {
    match what {
        GenCommand::Graph { family } => Ok(to_json(&GraphDoc {
            format_version: FORMAT_VERSION,
            graph: graph_from_spec(family, seed)?,
        })),
        GenCommand::Coloring { source, q } => csp_text(&coloring_instance(&source.load(seed)?, *q).stage("generate")?),
        GenCommand::FourRegularColoring { source, q } => {
            csp_text(&four_regular_coloring_instance(&source.load(seed)?, *q).stage("generate")?)
        }
        GenCommand::Clique { source, k } => csp_text(&clique_instance(&source.load(seed)?, *k).stage("generate")?),
        GenCommand::Random { n, p, alphabet, density } => {
            if !(0.0..=1.0).contains(p) || !(0.0..=1.0).contains(density) {
                return Err(CliError::input("parse", "probabilities must lie in [0, 1]"));
            }
            csp_text(&random_instance(*n, *p, *alphabet, *density, seed).stage("generate")?)
        }
        GenCommand::Regularize { csp } => {
            let inst = read_csp(csp, budget)?;
            csp_text(&regularize(&inst).stage("generate")?.instance)
        }
    }
}
