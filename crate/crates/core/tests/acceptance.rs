//! Acceptance criteria. Prints one `PASS`/`FAIL` line per criterion and
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cspembed::compile::{compile, pipeline};
use cspembed::config::{CompileParams, Config, EmbedParams, ExpanderParams, RoutingParams};
use cspembed::csp::{
    clique_instance, coloring_instance, count_satisfying, is_satisfied, random_instance, regularize, solve_bruteforce,
    Assignment, CspInstance,
};
use cspembed::embedding::{depth_scale, embed, verify_embedding};
use cspembed::expander::{
    bipartite_expander, cheeger_exact, cheeger_spectral_bound, second_eigenvalue, Construction,
};
use cspembed::families;
use cspembed::graph::{is_bipartite, Graph, Side};
use cspembed::routing::{route_matching, DemandSet};

fn report(id: u32, name: &str, ok: bool, detail: &str) -> bool {
    println!("{} [{id}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn first_failure(failures: &[String]) -> String {
    failures.first().map(|f| format!(", first failure: {f}")).unwrap_or_default()
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

/// Every assignment of a small instance, in lexicographic order.
fn enumerate(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut i| {
            let mut a = vec![0; sizes.len()];
            for (slot, &s) in a.iter_mut().zip(sizes).rev() {
                *slot = i % s;
                i /= s;
            }
            a
        })
        .collect()
}

fn oracle_solutions(inst: &CspInstance) -> Vec<Assignment> {
    enumerate(inst.alphabet_sizes())
        .into_iter()
        .map(Assignment)
        .filter(|a| inst.graph().edges().iter().zip(inst.relations()).all(|(&(u, v), r)| r.contains(a.0[u], a.0[v])))
        .collect()
}

fn criterion_1_expander_construction() -> bool {
    let start = Instant::now();
    let params = ExpanderParams::default();
    let mut failures = Vec::new();
    let mut min_exact_small = f64::INFINITY;
    let mut min_exact_surgery = f64::INFINITY;
    let mut runs = 0;
    for n in (6..=64).step_by(2) {
        for seed in 0..5 {
            runs += 1;
            let e = match bipartite_expander(n, seed, &params) {
                Ok(e) => e,
                Err(err) => {
                    failures.push(format!("n={n} seed={seed}: {err}"));
                    continue;
                }
            };
            let g = &e.graph;
            let balanced = e.bipartition.is_valid_for(g)
                && e.bipartition.is_balanced()
                && e.bipartition.sides().iter().filter(|&&s| s == Side::Left).count() == n / 2;
            if g.n() != n || g.regular_degree() != Some(3) || !balanced || !g.is_connected() || is_bipartite(g).is_none() {
                failures.push(format!("n={n} seed={seed}: structure"));
            }
            if n <= 22 {
                let exact = cheeger_exact(g, 24).unwrap();
                let value = *exact.numer() as f64 / *exact.denom() as f64;
                // integer comparison for alpha >= 2/n
                if n <= 20 && *exact.numer() * (n as u64) < 2 * *exact.denom() {
                    failures.push(format!("n={n} seed={seed}: exact {exact} below 2/n"));
                }
                if n <= 20 {
                    min_exact_small = min_exact_small.min(value * n as f64 / 2.0);
                }
                if n % 4 == 2 {
                    if *exact.numer() * 1000 < 15 * *exact.denom() {
                        failures.push(format!("n={n} seed={seed}: exact {exact} below 0.015"));
                    }
                    min_exact_surgery = min_exact_surgery.min(value);
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(120) {
        failures.push(format!("runtime {}", secs(elapsed)));
    }
    report(
        1,
        "expander construction",
        failures.is_empty(),
        &format!(
            "{runs} runs, min exact/(2/n) for n<=20 = {min_exact_small:.3}, min exact for n=2 mod 4 <= 22 = {min_exact_surgery:.4}, {}{}",
            secs(elapsed),
            first_failure(&failures)
        ),
    )
}

fn criterion_2_spectral_certificates() -> bool {
    let params = ExpanderParams::default();
    let mut failures = Vec::new();
    let mut worst_lambda = 0.0f64;
    let mut covers = 0;
    for n in (6..=64).step_by(2) {
        for seed in 0..5 {
            let e = bipartite_expander(n, seed, &params).unwrap();
            if e.construction != Construction::DoubleCover {
                continue;
            }
            covers += 1;
            let reported = e.lambda2.unwrap();
            // recompute on the cover itself
            let lambda = second_eigenvalue(&e.graph).unwrap();
            worst_lambda = worst_lambda.max(lambda);
            if lambda > 2.85 || (lambda - reported).abs() > 1e-9 {
                failures.push(format!("n={n} seed={seed}: lambda2 {lambda} (reported {reported})"));
            }
            if (3.0 - lambda) / 2.0 < 0.075 {
                failures.push(format!("n={n} seed={seed}: spectral bound below 0.075"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0;
    let mut max_gap = f64::NEG_INFINITY;
    while checked < 50 {
        let n = 2 * rng.gen_range(3..=8);
        let d = rng.gen_range(3..=4);
        let Some(g) = families::random_regular(n, d, &mut rng, 10_000) else {
            continue;
        };
        let exact = cheeger_exact(&g, 24).unwrap();
        let exact = *exact.numer() as f64 / *exact.denom() as f64;
        let spectral = cheeger_spectral_bound(&g).unwrap();
        max_gap = max_gap.max(spectral - exact);
        if spectral > exact + 1e-6 {
            failures.push(format!("spectral {spectral} above exact {exact}"));
        }
        checked += 1;
    }
    report(
        2,
        "spectral certificates",
        failures.is_empty() && covers > 0,
        &format!(
            "{covers} double covers, worst lambda2 {worst_lambda:.4} (bound {:.4}), 50 graphs max spectral-exact {max_gap:.4}{}",
            (3.0 - worst_lambda) / 2.0,
            first_failure(&failures)
        ),
    )
}

fn criterion_3_routing_contract() -> bool {
    let start = Instant::now();
    let params = RoutingParams::default();
    let mut failures = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut trials = 0;
    for k in [16usize, 32, 64, 128] {
        let host = bipartite_expander(k, 7, &ExpanderParams::default()).unwrap();
        let h = &host.graph;
        let limit = 8.0 * (k as f64).log2();
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        for trial in 0..30 {
            trials += 1;
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(&mut rng);
            let pairs: Vec<(usize, usize)> = perm.chunks(2).map(|c| (c[0], c[1])).collect();
            let demands = DemandSet::new(pairs.clone(), k).unwrap();
            let sol = route_matching(h, &demands, host.alpha(), trial, &params).unwrap();
            let mut edge = vec![0u32; h.edge_count()];
            let mut vertex = vec![0u32; k];
            for (path, &(s, t)) in sol.paths.iter().zip(&pairs) {
                let vs = path.vertices();
                let ends = vs.first() == Some(&s) && vs.last() == Some(&t);
                let walk = vs.windows(2).all(|w| h.has_edge(w[0], w[1]));
                if !ends || !walk {
                    failures.push(format!("k={k} trial={trial}: bad path {s}->{t}"));
                }
                for w in vs.windows(2) {
                    edge[h.edge_index(w[0], w[1]).unwrap()] += 1;
                }
                for &x in vs {
                    vertex[x] += 1;
                }
            }
            if sol.paths.len() != pairs.len() {
                failures.push(format!("k={k} trial={trial}: {} paths", sol.paths.len()));
            }
            let max = edge.iter().copied().max().unwrap_or(0);
            if edge != sol.congestion.edge || vertex != sol.congestion.vertex || max != sol.max_edge_congestion {
                failures.push(format!("k={k} trial={trial}: congestion bookkeeping"));
            }
            worst_ratio = worst_ratio.max(max as f64 / (k as f64).log2());
            if max as f64 > limit {
                failures.push(format!("k={k} trial={trial}: congestion {max} > {limit}"));
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(300) {
        failures.push(format!("runtime {}", secs(elapsed)));
    }
    report(
        3,
        "routing contract",
        failures.is_empty(),
        &format!(
            "{trials} matchings, worst congestion/log2 k = {worst_ratio:.3} (limit 8), {}{}",
            secs(elapsed),
            first_failure(&failures)
        ),
    )
}

fn criterion_4_embedding_guarantee() -> bool {
    let params = EmbedParams::default();
    let mut failures = Vec::new();
    let mut max_fitted = 0.0f64;
    let mut runs = 0;
    for n in [24usize, 48, 96] {
        for k in [6usize, 12, 24] {
            for seed in 0..30u64 {
                runs += 1;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64) << 16);
                let g = families::random_regular(n, 3, &mut rng, 10_000).unwrap();
                let out = embed(&g, k, seed, &params).unwrap();
                let check = verify_embedding(&g, &out.embedding);
                if !check.is_valid() {
                    failures.push(format!("n={n} k={k} seed={seed}: {:?}", check.violations.first()));
                }
                let scale = (1.0 + (n as f64 + 1.5 * n as f64) / k as f64) * (k as f64).log2();
                assert!((scale - depth_scale(n, g.edge_count(), k)).abs() < 1e-9);
                if check.depth as f64 > 64.0 * scale || check.depth != out.depth.depth {
                    failures.push(format!("n={n} k={k} seed={seed}: depth {}", check.depth));
                }
                max_fitted = max_fitted.max(check.depth as f64 / scale);
            }
        }
    }
    report(
        4,
        "embedding guarantee",
        failures.is_empty(),
        &format!("{runs} runs, max fitted Z = {max_fitted:.3} (Z = 64){}", first_failure(&failures)),
    )
}

/// Criteria 5 and 6 share one corpus.
fn criteria_5_and_6_compiler_equivalence_and_transport() -> bool {
    let start = Instant::now();
    let config = Config::default();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let densities = [0.3, 0.5, 0.8];
    let mut eq_failures = Vec::new();
    let mut tr_failures = Vec::new();
    let (mut cases, mut satisfiable, mut transported) = (0, 0, 0usize);
    for i in 0..500 {
        let n = rng.gen_range(1..=7);
        let s = rng.gen_range(1..=3);
        let density = densities[i % 3];
        let gamma = random_instance(n, 0.5, s, density, rng.gen()).unwrap();
        let gamma_solutions = oracle_solutions(&gamma);
        for k in [6usize, 8] {
            cases += 1;
            let seed = rng.gen();
            let out = pipeline(&gamma, k, seed, &config).unwrap();
            let c = &out.compiled;
            let phi_sat = solve_bruteforce(&c.phi).unwrap();
            let phi_count = count_satisfying(&c.phi).unwrap();
            if phi_sat.is_some() != !gamma_solutions.is_empty() || phi_count != gamma_solutions.len() as u128 {
                eq_failures.push(format!(
                    "case {i} k={k}: gamma {} solutions, phi {phi_count} (witness {})",
                    gamma_solutions.len(),
                    phi_sat.is_some()
                ));
                continue;
            }
            if gamma_solutions.is_empty() {
                continue;
            }
            satisfiable += 1;
            // encode is injective and the counts agree, so the encoded
            // solutions are all of the solutions of phi
            let mut images = Vec::with_capacity(gamma_solutions.len());
            for sigma in &gamma_solutions {
                let tilde = c.encode(sigma).unwrap();
                if !is_satisfied(&c.phi, &tilde).unwrap() {
                    tr_failures.push(format!("case {i} k={k}: encode({:?}) not a solution", sigma.0));
                }
                match c.decode(&tilde) {
                    Ok(back) if &back == sigma => {}
                    other => tr_failures.push(format!("case {i} k={k}: decode(encode) = {other:?}")),
                }
                images.push(tilde);
            }
            images.push(phi_sat.unwrap());
            for tilde in &images {
                let Ok(sigma) = c.decode(tilde) else {
                    tr_failures.push(format!("case {i} k={k}: decode failed on a solution"));
                    continue;
                };
                if !is_satisfied(&gamma, &sigma).unwrap() || &c.encode(&sigma).unwrap() != tilde {
                    tr_failures.push(format!("case {i} k={k}: encode(decode) is not the identity"));
                }
                // read every representative directly
                for v in 0..gamma.n() {
                    let reads: Vec<usize> = c
                        .index
                        .representatives(v)
                        .iter()
                        .map(|&x| c.codec.unrank(x, tilde.0[x])[c.index.position(x, v).unwrap()])
                        .collect();
                    if reads.windows(2).any(|w| w[0] != w[1]) {
                        tr_failures.push(format!("case {i} k={k}: vertex {v} reads {reads:?}"));
                    }
                }
                transported += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(600) {
        eq_failures.push(format!("runtime {}", secs(elapsed)));
    }
    let eq_ok = eq_failures.is_empty();
    let tr_ok = tr_failures.is_empty();
    println!(
        "{} [5] compiler equivalence: {cases} (gamma, k) pairs, satisfiability and counts agree in {}/{cases}, {}{}",
        if eq_ok { "PASS" } else { "FAIL" },
        cases - eq_failures.iter().filter(|f| f.starts_with("case")).count(),
        secs(elapsed),
        first_failure(&eq_failures)
    );
    println!(
        "{} [6] assignment transport: {satisfiable} satisfiable pairs, {transported} phi-solutions checked{}",
        if tr_ok { "PASS" } else { "FAIL" },
        first_failure(&tr_failures)
    );
    eq_ok && tr_ok
}

fn criterion_7_generators() -> bool {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for q in 1..=4 {
        let g = families::gnp(6, 0.6, &mut rng);
        let inst = coloring_instance(&g, q).unwrap();
        if inst.relations().iter().any(|r| r.count() != q * q - q) {
            failures.push(format!("coloring q={q}: wrong pair count"));
        }
    }
    if coloring_instance(&families::complete(2), 3).unwrap().relation(0).count() != 6 {
        failures.push("coloring q=3 is not 6 pairs".into());
    }
    let c5 = families::cycle(5);
    if solve_bruteforce(&clique_instance(&c5, 3).unwrap()).unwrap().is_some() {
        failures.push("clique(C5, 3) satisfiable".into());
    }
    if solve_bruteforce(&clique_instance(&c5, 2).unwrap()).unwrap().is_none() {
        failures.push("clique(C5, 2) unsatisfiable".into());
    }
    for k in 2..=6 {
        if clique_instance(&c5, k).unwrap().graph().edge_count() != k * (k - 1) / 2 {
            failures.push(format!("clique k={k}: constraint count"));
        }
    }
    // vertex count 2m holds when every variable already has degree >= 3
    let ready: Vec<Graph> = vec![
        families::complete(4),
        families::complete(5),
        families::octahedron(),
        families::random_regular(8, 3, &mut rng, 10_000).unwrap(),
    ];
    for g in &ready {
        let inst = coloring_instance(g, 3).unwrap();
        let reg = regularize(&inst).unwrap();
        if reg.instance.n() != 2 * g.edge_count() || reg.instance.graph().regular_degree() != Some(3) {
            failures.push(format!("regularize on n={}: {} vertices", g.n(), reg.instance.n()));
        }
        if count_satisfying(&reg.instance).unwrap() != oracle_solutions(&inst).len() as u128 {
            failures.push("regularize count on degree-ready input".into());
        }
    }
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(2..=6);
        let s = rng.gen_range(1..=3);
        let inst = random_instance(n, 0.6, s, 0.6, rng.gen()).unwrap();
        if (0..n).any(|v| inst.graph().degree(v) == 0) {
            continue;
        }
        let reg = regularize(&inst).unwrap();
        let count = oracle_solutions(&inst).len() as u128;
        if reg.instance.graph().regular_degree() != Some(3) || count_satisfying(&reg.instance).unwrap() != count {
            failures.push(format!("regularize instance {done}"));
        }
        done += 1;
    }
    report(
        7,
        "generators",
        failures.is_empty(),
        &format!("coloring, clique, 4 degree-ready + 100 random regularisations{}", first_failure(&failures)),
    )
}

fn criterion_8_end_to_end() -> bool {
    let start = Instant::now();
    let config = Config::default();
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for (name, g, expect) in [
        ("octahedron", families::octahedron(), true),
        ("K5", families::complete(5), false),
    ] {
        let gamma = coloring_instance(&g, 3).unwrap();
        let out = pipeline(&gamma, 6, 1, &config).unwrap();
        let gs = solve_bruteforce(&gamma).unwrap().is_some();
        let ps = solve_bruteforce(&out.compiled.phi).unwrap();
        if gs != expect || ps.is_some() != expect {
            failures.push(format!("{name}: gamma {gs}, phi {}", ps.is_some()));
        }
        if let Some(t) = &ps {
            let sigma = out.compiled.decode(t).unwrap();
            if !is_satisfied(&gamma, &sigma).unwrap() {
                failures.push(format!("{name}: decoded witness fails"));
            }
        }
        if !out.metrics.host_is_cubic || !out.metrics.host_is_bipartite || out.metrics.host_vertices > 6 {
            failures.push(format!("{name}: host shape"));
        }
        details.push(format!("{name} sat={} depth={}", ps.is_some(), out.metrics.depth));
    }
    // the compiler alone on the same hosts, with the materialisation budget off
    let gamma = coloring_instance(&families::octahedron(), 3).unwrap();
    let e = embed(gamma.graph(), 6, 1, &config.embed).unwrap();
    let lazy = compile(
        &gamma,
        &e.embedding,
        &CompileParams {
            materialize_budget: 0,
            ..CompileParams::default()
        },
    )
    .unwrap();
    if solve_bruteforce(&lazy.phi).unwrap().is_none() {
        failures.push("octahedron: intensional phi unsatisfiable".into());
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(30) {
        failures.push(format!("runtime {}", secs(elapsed)));
    }
    report(
        8,
        "end to end",
        failures.is_empty(),
        &format!("{}, {}{}", details.join(", "), secs(elapsed), first_failure(&failures)),
    )
}

fn main() {
    let criteria: [(&str, fn() -> bool); 7] = [
        ("[1] expander construction", criterion_1_expander_construction),
        ("[2] spectral certificates", criterion_2_spectral_certificates),
        ("[3] routing contract", criterion_3_routing_contract),
        ("[4] embedding guarantee", criterion_4_embedding_guarantee),
        ("[5-6] compiler equivalence and transport", criteria_5_and_6_compiler_equivalence_and_transport),
        ("[7] generators", criterion_7_generators),
        ("[8] end to end", criterion_8_end_to_end),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match std::panic::catch_unwind(run) {
            Ok(true) => {}
            Ok(false) => failed += 1,
            Err(_) => {
                println!("FAIL {name}: panicked");
                failed += 1;
            }
        }
    }
    println!("acceptance: {}", if failed == 0 { "all criteria passed".to_string() } else { format!("{failed} run(s) failed") });
    if failed > 0 {
        std::process::exit(1);
    }
}
