//! Instance generators: colouring, clique, degree regularisation and
//! seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Assignment, CspError, CspInstance, Relation};
use crate::families;
use crate::graph::Graph;

/// `q`-colouring of `g`: every edge carries the inequality relation.
pub fn coloring_instance(g: &Graph, q: usize) -> Result<CspInstance, CspError> {
    CspInstance::uniform(g.clone(), q, |_, _| Relation::inequality(q))
}

/// `q`-colouring of `g` padded to a 4-regular constraint graph with
/// all-accepting constraints between vertices of degree below 4.
pub fn four_regular_coloring_instance(g: &Graph, q: usize) -> Result<CspInstance, CspError> {
    if g.max_degree() > 4 {
        return Err(CspError::DegreeTooHigh(g.max_degree()));
    }
    let n = g.n();
    let mut deficit: Vec<usize> = (0..n).map(|v| 4 - g.degree(v)).collect();
    let adjacent = |u: usize, w: usize, extra: &[(usize, usize)]| {
        g.has_edge(u, w) || extra.contains(&(u.min(w), u.max(w)))
    };
    let mut extra: Vec<(usize, usize)> = Vec::new();
    while let Some(u) = (0..n).find(|&v| deficit[v] > 0) {
        // partner with the largest remaining deficit, lowest id on ties
        let w = (0..n)
            .filter(|&w| w != u && deficit[w] > 0 && !adjacent(u, w, &extra))
            .max_by(|&a, &b| deficit[a].cmp(&deficit[b]).then(b.cmp(&a)))
            .ok_or(CspError::PaddingImpossible(u))?;
        extra.push((u.min(w), u.max(w)));
        deficit[u] -= 1;
        deficit[w] -= 1;
    }
    let constraints = g
        .edges()
        .iter()
        .map(|&(u, v)| (u, v, Relation::inequality(q)))
        .chain(extra.into_iter().map(|(u, v)| (u, v, Relation::full(q, q))));
    CspInstance::from_constraints(n, vec![q; n], constraints)
}

/// `k` variables over `V(g)`, pairwise constrained to be adjacent in `g`.
pub fn clique_instance(g: &Graph, k: usize) -> Result<CspInstance, CspError> {
    let s = g.n();
    CspInstance::uniform(families::complete(k), s, |_, _| Relation::tabulate(s, s, |a, b| g.has_edge(a, b)))
}

/// Seeded random instance: `G(n, p)` constraint graph, uniform alphabet,
/// each value pair of each relation kept independently with probability
/// `pair_density`.
pub fn random_instance(
    n: usize,
    edge_probability: f64,
    alphabet_size: usize,
    pair_density: f64,
    seed: u64,
) -> Result<CspInstance, CspError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = families::gnp(n, edge_probability, &mut rng);
    let s = alphabet_size;
    let mut relations = Vec::with_capacity(g.edge_count());
    for _ in 0..g.edge_count() {
        let keep: Vec<bool> = (0..s * s).map(|_| rng.gen_bool(pair_density)).collect();
        relations.push(Relation::tabulate(s, s, |a, b| keep[a * s + b]));
    }
    CspInstance::new(g, vec![s; n], relations)
}

/// A 3-regular instance equivalent to the original, with the map back.
#[derive(Clone, Debug)]
pub struct Regularized {
    pub instance: CspInstance,
    /// Original variable of each copy.
    pub origin: Vec<usize>,
    /// The copy of each original variable that carries each of its original
    /// constraints, indexed like the original edge list.
    pub slots: Vec<(usize, usize)>,
}

impl Regularized {
    /// Reads each original variable off its first copy.
    pub fn collapse(&self, a: &Assignment, original_n: usize) -> Assignment {
        let mut out = vec![usize::MAX; original_n];
        for (copy, &v) in self.origin.iter().enumerate() {
            if out[v] == usize::MAX {
                out[v] = a.0[copy];
            }
        }
        Assignment(out)
    }

    /// Copies every original value onto all of its copies.
    pub fn lift(&self, a: &Assignment) -> Assignment {
        Assignment(self.origin.iter().map(|&v| a.0[v]).collect())
    }
}

/// Local gadget for one variable of degree `c`: number of copies, internal
/// equality edges, and which copy serves each incident original constraint.
fn gadget(c: usize) -> (usize, Vec<(usize, usize)>, Vec<usize>) {
    match c {
        1 => (
            5,
            vec![(0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4)],
            vec![0],
        ),
        2 => (4, vec![(0, 1), (1, 2), (2, 3), (0, 3), (1, 3)], vec![0, 2]),
        _ => (
            c,
            (0..c).map(|i| (i.min((i + 1) % c), i.max((i + 1) % c))).collect(),
            (0..c).collect(),
        ),
    }
}

/// Replaces every variable by a connected gadget of copies tied by equality
/// constraints so that the constraint graph becomes 3-regular. Variables of
/// degree `c ≥ 3` become a cycle of `c` copies; lower degrees use small
/// fixed gadgets. Solutions correspond one to one.
pub fn regularize(inst: &CspInstance) -> Result<Regularized, CspError> {
    let s = inst.uniform_alphabet().ok_or(CspError::NonUniformAlphabet)?;
    let g = inst.graph();
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) == 0) {
        return Err(CspError::IsolatedVariable(v));
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.n()];
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        incident[u].push(e);
        incident[v].push(e);
    }
    let mut origin = Vec::new();
    let mut constraints = Vec::new();
    // slot_of[e] = (copy for the lower endpoint, copy for the higher)
    let mut slot_of = vec![(usize::MAX, usize::MAX); g.edge_count()];
    for v in 0..g.n() {
        let (copies, internal, slots) = gadget(incident[v].len());
        let base = origin.len();
        origin.extend(std::iter::repeat(v).take(copies));
        for (a, b) in internal {
            constraints.push((base + a, base + b, Relation::equality(s)));
        }
        for (&e, &slot) in incident[v].iter().zip(&slots) {
            if g.edges()[e].0 == v {
                slot_of[e].0 = base + slot;
            } else {
                slot_of[e].1 = base + slot;
            }
        }
    }
    for (e, &(lo, hi)) in slot_of.iter().enumerate() {
        constraints.push((lo, hi, inst.relation(e).clone()));
    }
    let n = origin.len();
    let instance = CspInstance::from_constraints(n, vec![s; n], constraints)?;
    Ok(Regularized {
        instance,
        origin,
        slots: slot_of,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{count_satisfying, is_satisfied, solve_bruteforce};

    fn chromatic_at_most(g: &Graph, q: usize) -> bool {
        let n = g.n();
        (0..q.pow(n as u32)).any(|mut i| {
            let col: Vec<usize> = (0..n)
                .map(|_| {
                    let c = i % q;
                    i /= q;
                    c
                })
                .collect();
            g.edges().iter().all(|&(u, v)| col[u] != col[v])
        })
    }

    fn has_clique(g: &Graph, k: usize) -> bool {
        let n = g.n();
        (0u32..1 << n).filter(|m| m.count_ones() as usize == k).any(|m| {
            let vs: Vec<usize> = (0..n).filter(|&i| m >> i & 1 == 1).collect();
            vs.iter().enumerate().all(|(i, &a)| vs[i + 1..].iter().all(|&b| g.has_edge(a, b)))
        })
    }

    #[test]
    fn coloring_relations_and_examples() {
        let inst = coloring_instance(&families::complete(3), 3).unwrap();
        assert!(inst.relations().iter().all(|r| r.count() == 6));
        let k5 = coloring_instance(&families::complete(5), 3).unwrap();
        assert_eq!(solve_bruteforce(&k5).unwrap(), None);
        let oct = coloring_instance(&families::octahedron(), 3).unwrap();
        assert!(solve_bruteforce(&oct).unwrap().is_some());
    }

    #[test]
    fn coloring_matches_exhaustive_chromatic_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(1..=8);
            let g = families::gnp(n, rng.gen_range(0.2..0.8), &mut rng);
            for q in 1..=3 {
                let sat = solve_bruteforce(&coloring_instance(&g, q).unwrap()).unwrap().is_some();
                assert_eq!(sat, chromatic_at_most(&g, q));
            }
        }
    }

    #[test]
    fn padding_keeps_satisfiability() {
        let k5 = families::complete(5);
        let same = four_regular_coloring_instance(&k5, 3).unwrap();
        assert!(same.graph().same_as(&k5));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 50 {
            let n = rng.gen_range(6..=9);
            let g = families::gnp(n, 0.4, &mut rng);
            if g.max_degree() > 4 {
                continue;
            }
            let Ok(padded) = four_regular_coloring_instance(&g, 3) else {
                continue;
            };
            assert_eq!(padded.graph().regular_degree(), Some(4));
            for (e, &(u, v)) in padded.graph().edges().iter().enumerate() {
                if !g.has_edge(u, v) {
                    assert_eq!(padded.relation(e).count(), 9);
                }
            }
            let before = solve_bruteforce(&coloring_instance(&g, 3).unwrap()).unwrap().is_some();
            let after = solve_bruteforce(&padded).unwrap().is_some();
            assert_eq!(before, after);
            checked += 1;
        }
    }

    #[test]
    fn padding_refuses_when_stuck() {
        // a lone vertex needs four partners that do not exist
        assert!(matches!(
            four_regular_coloring_instance(&Graph::empty(3), 3),
            Err(CspError::PaddingImpossible(_))
        ));
        assert!(matches!(
            four_regular_coloring_instance(&families::complete(6), 3),
            Err(CspError::DegreeTooHigh(5))
        ));
    }

    #[test]
    fn clique_examples_and_oracle() {
        let c5 = families::cycle(5);
        assert!(solve_bruteforce(&clique_instance(&c5, 2).unwrap()).unwrap().is_some());
        assert!(solve_bruteforce(&clique_instance(&c5, 3).unwrap()).unwrap().is_none());
        assert_eq!(clique_instance(&c5, 4).unwrap().graph().edge_count(), 6);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..40 {
            let n = rng.gen_range(2..=10);
            let g = families::gnp(n, rng.gen_range(0.2..0.8), &mut rng);
            for k in 2..=4 {
                let sat = solve_bruteforce(&clique_instance(&g, k).unwrap()).unwrap().is_some();
                assert_eq!(sat, has_clique(&g, k), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn random_instance_extremes_and_determinism() {
        let full = random_instance(6, 0.7, 3, 1.0, 1).unwrap();
        assert!(full.relations().iter().all(|r| r.count() == 9));
        assert!(solve_bruteforce(&full).unwrap().is_some());
        let none = random_instance(6, 0.9, 3, 0.0, 1).unwrap();
        assert!(none.graph().edge_count() > 0);
        assert!(solve_bruteforce(&none).unwrap().is_none());
        let a = random_instance(7, 0.5, 3, 0.5, 42).unwrap();
        let b = random_instance(7, 0.5, 3, 0.5, 42).unwrap();
        assert!(a.graph().same_as(b.graph()));
        assert!(a.relations().iter().zip(b.relations()).all(|(x, y)| x.pairs() == y.pairs()));
    }

    #[test]
    fn gadgets_are_connected_and_sized() {
        for c in 1..=6 {
            let (copies, internal, slots) = gadget(c);
            let g = Graph::new(copies, internal).unwrap();
            assert!(g.is_connected());
            for v in 0..copies {
                let want = if slots.contains(&v) { 2 } else { 3 };
                assert_eq!(g.degree(v), want, "c={c} v={v}");
            }
        }
    }

    #[test]
    fn regularize_preserves_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut done = 0;
        while done < 100 {
            let n = rng.gen_range(2..=6);
            let s = rng.gen_range(1..=3);
            let inst = random_instance(n, 0.6, s, 0.6, rng.gen()).unwrap();
            let Ok(reg) = regularize(&inst) else {
                continue;
            };
            assert_eq!(reg.instance.graph().regular_degree(), Some(3));
            let count = count_satisfying(&inst).unwrap();
            assert_eq!(count, count_satisfying(&reg.instance).unwrap());
            if let Some(sol) = solve_bruteforce(&reg.instance).unwrap() {
                let back = reg.collapse(&sol, n);
                assert!(is_satisfied(&inst, &back).unwrap());
                assert!(is_satisfied(&reg.instance, &reg.lift(&back)).unwrap());
            } else {
                assert_eq!(count, 0);
            }
            done += 1;
        }
    }

    #[test]
    fn regularize_cubic_input_has_two_m_vertices() {
        let k4 = coloring_instance(&families::complete(4), 4).unwrap();
        let reg = regularize(&k4).unwrap();
        assert_eq!(reg.instance.n(), 2 * 6);
        assert_eq!(count_satisfying(&reg.instance).unwrap(), 24);
        assert_eq!(
            regularize(&CspInstance::new(Graph::empty(1), vec![2], vec![]).unwrap()).unwrap_err(),
            CspError::IsolatedVariable(0)
        );
    }
}
