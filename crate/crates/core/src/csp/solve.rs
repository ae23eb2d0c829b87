//! Exhaustive search with forward checking, per connected component.

use super::{Assignment, CspError, CspInstance};
use crate::config::SolverParams;

struct Link {
    to: usize,
    edge: usize,
    /// The owning vertex is the first coordinate of the relation.
    forward: bool,
}

struct Search<'a> {
    inst: &'a CspInstance,
    arcs: Vec<Vec<Link>>,
    order: Vec<usize>,
    domains: Vec<Vec<usize>>,
    values: Vec<usize>,
    assigned: Vec<bool>,
    trail: Vec<(usize, Vec<usize>)>,
    nodes: u64,
    budget: u64,
}

enum Mode {
    First,
    Count,
}

impl<'a> Search<'a> {
    fn new(inst: &'a CspInstance, budget: u64) -> Self {
        let n = inst.n();
        let mut arcs: Vec<Vec<Link>> = (0..n).map(|_| Vec::new()).collect();
        for (e, &(u, v)) in inst.graph().edges().iter().enumerate() {
            arcs[u].push(Link { to: v, edge: e, forward: true });
            arcs[v].push(Link { to: u, edge: e, forward: false });
        }
        Search {
            inst,
            arcs,
            order: Vec::new(),
            domains: inst.alphabet_sizes().iter().map(|&s| (0..s).collect()).collect(),
            values: vec![0; n],
            assigned: vec![false; n],
            trail: Vec::new(),
            nodes: 0,
            budget,
        }
    }

    /// Max-connectivity order: start at the lowest vertex, then repeatedly
    /// take the vertex with the most already-ordered neighbours (lowest id
    /// on ties).
    fn component_order(&self, comp: &[usize]) -> Vec<usize> {
        let n = self.inst.n();
        let mut placed = vec![false; n];
        let mut score = vec![0usize; n];
        let mut order = Vec::with_capacity(comp.len());
        for _ in 0..comp.len() {
            let &next = comp
                .iter()
                .filter(|&&v| !placed[v])
                .max_by(|&&a, &&b| score[a].cmp(&score[b]).then(b.cmp(&a)))
                .unwrap();
            placed[next] = true;
            order.push(next);
            for &w in self.inst.graph().neighbors(next) {
                score[w] += 1;
            }
        }
        order
    }

    fn allowed(&self, arc: &Link, mine: usize, theirs: usize) -> bool {
        let rel = self.inst.relation(arc.edge);
        if arc.forward {
            rel.contains(mine, theirs)
        } else {
            rel.contains(theirs, mine)
        }
    }

    /// Assigns `v = a` and prunes unassigned neighbours. Returns false on a
    /// wipe-out; the trail is left for the caller to unwind either way.
    fn assign(&mut self, v: usize, a: usize) -> bool {
        self.values[v] = a;
        self.assigned[v] = true;
        for i in 0..self.arcs[v].len() {
            let arc = &self.arcs[v][i];
            let w = arc.to;
            if self.assigned[w] {
                continue;
            }
            let kept: Vec<usize> = self.domains[w]
                .iter()
                .copied()
                .filter(|&b| self.allowed(arc, a, b))
                .collect();
            if kept.len() != self.domains[w].len() {
                let old = std::mem::replace(&mut self.domains[w], kept);
                self.trail.push((w, old));
            }
            if self.domains[w].is_empty() {
                return false;
            }
        }
        true
    }

    fn unwind(&mut self, mark: usize, v: usize) {
        while self.trail.len() > mark {
            let (w, old) = self.trail.pop().unwrap();
            self.domains[w] = old;
        }
        self.assigned[v] = false;
    }

    /// Depth-first search over `order[depth..]`. In `First` mode returns 1
    /// as soon as a solution is in `values`.
    fn run(&mut self, depth: usize, mode: &Mode) -> Result<u128, CspError> {
        if depth == self.order.len() {
            return Ok(1);
        }
        let v = self.order[depth];
        let candidates = self.domains[v].clone();
        let mut total: u128 = 0;
        for a in candidates {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(CspError::BudgetExceeded(self.budget));
            }
            let mark = self.trail.len();
            let below = if self.assign(v, a) { self.run(depth + 1, mode)? } else { 0 };
            if below > 0 && matches!(mode, Mode::First) {
                return Ok(1);
            }
            self.unwind(mark, v);
            total = total.checked_add(below).ok_or(CspError::CountOverflow)?;
        }
        Ok(total)
    }
}

/// A satisfying assignment, or `None` if the instance is unsatisfiable.
///
/// Deterministic: within each connected component the returned values are
/// the lexicographically first solution under the solver's variable order
/// (lowest vertex first, then most-constrained-by-placed-neighbours).
pub fn solve_bruteforce(inst: &CspInstance) -> Result<Option<Assignment>, CspError> {
    solve_bruteforce_with(inst, &SolverParams::default())
}

pub fn solve_bruteforce_with(inst: &CspInstance, params: &SolverParams) -> Result<Option<Assignment>, CspError> {
    let mut s = Search::new(inst, params.node_budget);
    for comp in inst.graph().components() {
        s.order = s.component_order(&comp);
        if s.run(0, &Mode::First)? == 0 {
            return Ok(None);
        }
    }
    Ok(Some(Assignment(s.values)))
}

/// Exact number of satisfying assignments.
pub fn count_satisfying(inst: &CspInstance) -> Result<u128, CspError> {
    count_satisfying_with(inst, &SolverParams::default())
}

pub fn count_satisfying_with(inst: &CspInstance, params: &SolverParams) -> Result<u128, CspError> {
    let mut s = Search::new(inst, params.node_budget);
    let mut total: u128 = 1;
    for comp in inst.graph().components() {
        s.order = s.component_order(&comp);
        let c = s.run(0, &Mode::Count)?;
        if c == 0 {
            return Ok(0);
        }
        total = total.checked_mul(c).ok_or(CspError::CountOverflow)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::{is_satisfied, Relation};
    use crate::families;
    use crate::graph::Graph;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn odometer(sizes: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
        let total: usize = sizes.iter().product();
        (0..total).map(move |mut i| {
            let mut a = vec![0; sizes.len()];
            for (slot, &s) in a.iter_mut().zip(sizes).rev() {
                *slot = i % s;
                i /= s;
            }
            a
        })
    }

    fn naive_count(inst: &CspInstance) -> u128 {
        odometer(inst.alphabet_sizes())
            .filter(|a| is_satisfied(inst, &Assignment(a.clone())).unwrap())
            .count() as u128
    }

    fn naive_first(inst: &CspInstance) -> Option<Vec<usize>> {
        odometer(inst.alphabet_sizes()).find(|a| is_satisfied(inst, &Assignment(a.clone())).unwrap())
    }

    fn neq(g: Graph, q: usize) -> CspInstance {
        CspInstance::uniform(g, q, |_, _| Relation::inequality(q)).unwrap()
    }

    #[test]
    fn small_examples() {
        assert_eq!(solve_bruteforce(&neq(families::cycle(5), 2)).unwrap(), None);
        assert_eq!(
            solve_bruteforce(&neq(families::complete(3), 3)).unwrap(),
            Some(Assignment(vec![0, 1, 2]))
        );
        assert_eq!(count_satisfying(&neq(families::path(2), 2)).unwrap(), 2);
        assert_eq!(count_satisfying(&neq(families::complete(3), 3)).unwrap(), 6);
        let free = CspInstance::new(Graph::empty(5), vec![3; 5], vec![]).unwrap();
        assert_eq!(count_satisfying(&free).unwrap(), 243);
        assert_eq!(solve_bruteforce(&free).unwrap(), Some(Assignment(vec![0; 5])));
    }

    #[test]
    fn empty_relation_is_unsatisfiable() {
        let inst = CspInstance::from_constraints(
            4,
            vec![2; 4],
            [(0, 1, Relation::full(2, 2)), (2, 3, Relation::empty(2, 2))],
        )
        .unwrap();
        assert_eq!(solve_bruteforce(&inst).unwrap(), None);
        assert_eq!(count_satisfying(&inst).unwrap(), 0);
    }

    #[test]
    fn budget_is_enforced() {
        let inst = neq(families::cycle(15), 2);
        let tight = SolverParams { node_budget: 10 };
        assert_eq!(count_satisfying_with(&inst, &tight), Err(CspError::BudgetExceeded(10)));
    }

    #[test]
    fn agrees_with_enumeration_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let g = families::gnp(n, rng.gen_range(0.2..0.9), &mut rng);
            let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
            let rels = g
                .edges()
                .iter()
                .map(|&(u, v)| {
                    let (l, r) = (sizes[u], sizes[v]);
                    let keep: Vec<bool> = (0..l * r).map(|_| rng.gen_bool(0.6)).collect();
                    Relation::tabulate(l, r, |a, b| keep[a * r + b])
                })
                .collect();
            let inst = CspInstance::new(g, sizes, rels).unwrap();
            let count = count_satisfying(&inst).unwrap();
            assert_eq!(count, naive_count(&inst));
            let sol = solve_bruteforce(&inst).unwrap();
            assert_eq!(sol.is_some(), count > 0);
            if let Some(a) = &sol {
                assert!(is_satisfied(&inst, a).unwrap());
            }
            // the search order coincides with vertex order on paths from 0
            if inst.graph().edges().iter().all(|&(u, v)| v == u + 1) && inst.graph().is_connected() {
                assert_eq!(sol.map(|a| a.0), naive_first(&inst));
            }
        }
    }

    #[test]
    fn intensional_relations_search_the_same() {
        let g = families::cycle(7);
        let ext = neq(g.clone(), 3);
        let int = CspInstance::uniform(g, 3, |_, _| Relation::from_fn(3, 3, |a, b| a != b)).unwrap();
        assert_eq!(count_satisfying(&ext).unwrap(), count_satisfying(&int).unwrap());
        assert_eq!(solve_bruteforce(&ext).unwrap(), solve_bruteforce(&int).unwrap());
    }
}
