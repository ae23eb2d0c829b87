//! Binary constraint satisfaction: instances, relations, assignments, a
//! brute-force oracle and the standard instance generators.

mod generators;
mod io;
mod solve;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

pub use generators::{
    clique_instance, coloring_instance, four_regular_coloring_instance, random_instance, regularize, Regularized,
};
pub use io::CspJson;
pub use solve::{count_satisfying, solve_bruteforce, solve_bruteforce_with, count_satisfying_with};

/// Relations larger than this many accepted pairs are never written out.
pub const SERIALIZE_PAIR_LIMIT: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CspError {
    #[error("expected {expected} {what}, got {got}")]
    Length { what: &'static str, expected: usize, got: usize },
    #[error("alphabet of variable {0} is empty")]
    EmptyAlphabet(usize),
    #[error("relation on edge {{{u}, {v}}} is {got:?}, alphabets are {expected:?}")]
    RelationShape { u: usize, v: usize, expected: (usize, usize), got: (usize, usize) },
    #[error("pair ({a}, {b}) outside a {left}x{right} relation")]
    PairOutOfRange { a: usize, b: usize, left: usize, right: usize },
    #[error("duplicate pair ({0}, {1}) in explicit relation")]
    DuplicatePair(usize, usize),
    #[error("value {value} of variable {vertex} is outside its alphabet of size {size}")]
    ValueOutOfRange { vertex: usize, value: usize, size: usize },
    #[error("search budget of {0} nodes exceeded")]
    BudgetExceeded(u64),
    #[error("solution count overflows u128")]
    CountOverflow,
    #[error("variable {0} has no constraints")]
    IsolatedVariable(usize),
    #[error("operation needs a uniform alphabet")]
    NonUniformAlphabet,
    #[error("cannot pad to 4-regular without parallel edges (stuck at vertex {0})")]
    PaddingImpossible(usize),
    #[error("maximum degree {0} exceeds 4")]
    DegreeTooHigh(usize),
    #[error("relation on edge {{{u}, {v}}} has more than {limit} pairs")]
    TooLargeToSerialize { u: usize, v: usize, limit: u64 },
    #[error("invalid constraint graph: {0}")]
    Graph(#[from] crate::graph::GraphError),
}

/// Dense accept table of a relation between two alphabets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PairTable {
    left: usize,
    right: usize,
    accept: Vec<bool>,
}

impl PairTable {
    pub fn contains(&self, a: usize, b: usize) -> bool {
        a < self.left && b < self.right && self.accept[a * self.right + b]
    }
}

type Predicate = dyn Fn(usize, usize) -> bool + Send + Sync;

/// A binary relation `C ⊆ Σ_left × Σ_right`.
#[derive(Clone)]
pub enum Relation {
    Explicit(PairTable),
    /// A pure predicate; only queried, never enumerated unless asked.
    Intensional {
        left: usize,
        right: usize,
        pred: Arc<Predicate>,
    },
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Explicit(t) => f
                .debug_struct("Explicit")
                .field("left", &t.left)
                .field("right", &t.right)
                .field("pairs", &self.pairs())
                .finish(),
            Relation::Intensional { left, right, .. } => f
                .debug_struct("Intensional")
                .field("left", left)
                .field("right", right)
                .finish_non_exhaustive(),
        }
    }
}

impl Relation {
    pub fn explicit<I>(left: usize, right: usize, pairs: I) -> Result<Self, CspError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut accept = vec![false; left * right];
        for (a, b) in pairs {
            if a >= left || b >= right {
                return Err(CspError::PairOutOfRange { a, b, left, right });
            }
            if std::mem::replace(&mut accept[a * right + b], true) {
                return Err(CspError::DuplicatePair(a, b));
            }
        }
        Ok(Relation::Explicit(PairTable { left, right, accept }))
    }

    pub fn from_fn<F>(left: usize, right: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> bool + Send + Sync + 'static,
    {
        Relation::Intensional {
            left,
            right,
            pred: Arc::new(f),
        }
    }

    /// Explicit table of a predicate.
    pub fn tabulate<F>(left: usize, right: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> bool,
    {
        let accept = (0..left * right).map(|i| f(i / right, i % right)).collect();
        Relation::Explicit(PairTable { left, right, accept })
    }

    pub fn full(left: usize, right: usize) -> Self {
        Self::tabulate(left, right, |_, _| true)
    }

    pub fn empty(left: usize, right: usize) -> Self {
        Self::tabulate(left, right, |_, _| false)
    }

    pub fn equality(size: usize) -> Self {
        Self::tabulate(size, size, |a, b| a == b)
    }

    pub fn inequality(size: usize) -> Self {
        Self::tabulate(size, size, |a, b| a != b)
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Relation::Explicit(t) => (t.left, t.right),
            Relation::Intensional { left, right, .. } => (*left, *right),
        }
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        match self {
            Relation::Explicit(t) => t.contains(a, b),
            Relation::Intensional { left, right, pred } => a < *left && b < *right && pred(a, b),
        }
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self, Relation::Explicit(_))
    }

    /// Accepted pairs in lexicographic order (enumerates the table).
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let (l, r) = self.dims();
        (0..l)
            .flat_map(|a| (0..r).map(move |b| (a, b)))
            .filter(|&(a, b)| self.contains(a, b))
            .collect()
    }

    pub fn count(&self) -> usize {
        match self {
            Relation::Explicit(t) => t.accept.iter().filter(|&&x| x).count(),
            Relation::Intensional { .. } => self.pairs().len(),
        }
    }

    /// The relation with its two coordinates swapped.
    pub fn transpose(&self) -> Self {
        match self {
            Relation::Explicit(t) => Self::tabulate(t.right, t.left, |b, a| t.contains(a, b)),
            Relation::Intensional { left, right, pred } => {
                let pred = Arc::clone(pred);
                Relation::from_fn(*right, *left, move |b, a| pred(a, b))
            }
        }
    }

    /// Explicit copy when the table has at most `budget` cells.
    pub fn materialize(&self, budget: u64) -> Option<Self> {
        let (l, r) = self.dims();
        if (l as u64).saturating_mul(r as u64) > budget {
            return None;
        }
        Some(match self {
            Relation::Explicit(_) => self.clone(),
            Relation::Intensional { pred, .. } => Self::tabulate(l, r, |a, b| pred(a, b)),
        })
    }
}

/// A value per variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub Vec<usize>);

impl Assignment {
    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

/// Constraint graph, per-variable alphabet sizes, and one relation per
/// graph edge. The relation of edge `(u, v)` (with `u < v`) is over
/// `(value of u, value of v)`.
#[derive(Clone, Debug)]
pub struct CspInstance {
    graph: Graph,
    alphabet_sizes: Vec<usize>,
    relations: Vec<Relation>,
}

impl CspInstance {
    /// `relations[i]` constrains `graph.edges()[i]`.
    pub fn new(graph: Graph, alphabet_sizes: Vec<usize>, relations: Vec<Relation>) -> Result<Self, CspError> {
        if alphabet_sizes.len() != graph.n() {
            return Err(CspError::Length {
                what: "alphabet sizes",
                expected: graph.n(),
                got: alphabet_sizes.len(),
            });
        }
        if relations.len() != graph.edge_count() {
            return Err(CspError::Length {
                what: "relations",
                expected: graph.edge_count(),
                got: relations.len(),
            });
        }
        if let Some(v) = alphabet_sizes.iter().position(|&s| s == 0) {
            return Err(CspError::EmptyAlphabet(v));
        }
        for (&(u, v), rel) in graph.edges().iter().zip(&relations) {
            let expected = (alphabet_sizes[u], alphabet_sizes[v]);
            if rel.dims() != expected {
                return Err(CspError::RelationShape {
                    u,
                    v,
                    expected,
                    got: rel.dims(),
                });
            }
        }
        Ok(CspInstance {
            graph,
            alphabet_sizes,
            relations,
        })
    }

    /// Builds from `(u, v, relation over (value of u, value of v))` triples in
    /// any orientation.
    pub fn from_constraints<I>(n: usize, alphabet_sizes: Vec<usize>, constraints: I) -> Result<Self, CspError>
    where
        I: IntoIterator<Item = (usize, usize, Relation)>,
    {
        let mut list: Vec<((usize, usize), Relation)> = constraints
            .into_iter()
            .map(|(u, v, r)| if u <= v { ((u, v), r) } else { ((v, u), r.transpose()) })
            .collect();
        list.sort_by_key(|(e, _)| *e);
        let graph = Graph::new(n, list.iter().map(|(e, _)| *e))?;
        Self::new(graph, alphabet_sizes, list.into_iter().map(|(_, r)| r).collect())
    }

    pub fn uniform(graph: Graph, size: usize, relation_for: impl Fn(usize, usize) -> Relation) -> Result<Self, CspError> {
        let relations = graph.edges().iter().map(|&(u, v)| relation_for(u, v)).collect();
        let n = graph.n();
        Self::new(graph, vec![size; n], relations)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.alphabet_sizes
    }

    /// The common alphabet size, if all variables share one.
    pub fn uniform_alphabet(&self) -> Option<usize> {
        let s = *self.alphabet_sizes.first()?;
        self.alphabet_sizes.iter().all(|&t| t == s).then_some(s)
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn relation(&self, edge: usize) -> &Relation {
        &self.relations[edge]
    }

    /// Whether the constraint on edge `{u, v}` accepts `u = a, v = b`.
    /// Unconstrained pairs are always accepted.
    pub fn allows(&self, u: usize, a: usize, v: usize, b: usize) -> bool {
        match self.graph.edge_index(u, v) {
            None => true,
            Some(e) if u < v => self.relations[e].contains(a, b),
            Some(e) => self.relations[e].contains(b, a),
        }
    }

    /// Whether every relation in the instance is held as a table.
    pub fn is_explicit(&self) -> bool {
        self.relations.iter().all(Relation::is_explicit)
    }

    /// Number of assignments, `Π |Σ_v|`, saturating.
    pub fn assignment_space(&self) -> u128 {
        self.alphabet_sizes
            .iter()
            .fold(1u128, |acc, &s| acc.saturating_mul(s as u128))
    }

    pub fn check_assignment(&self, a: &Assignment) -> Result<(), CspError> {
        if a.0.len() != self.n() {
            return Err(CspError::Length {
                what: "assignment values",
                expected: self.n(),
                got: a.0.len(),
            });
        }
        for (vertex, (&value, &size)) in a.0.iter().zip(&self.alphabet_sizes).enumerate() {
            if value >= size {
                return Err(CspError::ValueOutOfRange { vertex, value, size });
            }
        }
        Ok(())
    }
}

/// Whether `a` satisfies every constraint of `inst`.
pub fn is_satisfied(inst: &CspInstance, a: &Assignment) -> Result<bool, CspError> {
    inst.check_assignment(a)?;
    Ok(inst
        .graph
        .edges()
        .iter()
        .zip(&inst.relations)
        .all(|(&(u, v), rel)| rel.contains(a.0[u], a.0[v])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families;

    #[test]
    fn vacuous_and_simple_satisfaction() {
        let empty = CspInstance::new(Graph::empty(3), vec![2; 3], vec![]).unwrap();
        assert!(is_satisfied(&empty, &Assignment(vec![1, 0, 1])).unwrap());
        let edge = CspInstance::uniform(families::path(2), 2, |_, _| Relation::inequality(2)).unwrap();
        assert!(is_satisfied(&edge, &Assignment(vec![0, 1])).unwrap());
        assert!(!is_satisfied(&edge, &Assignment(vec![1, 1])).unwrap());
        let tri = CspInstance::uniform(families::complete(3), 3, |_, _| Relation::inequality(3)).unwrap();
        assert!(is_satisfied(&tri, &Assignment(vec![0, 1, 2])).unwrap());
    }

    #[test]
    fn out_of_range_assignment_is_rejected() {
        let edge = CspInstance::uniform(families::path(2), 2, |_, _| Relation::inequality(2)).unwrap();
        assert_eq!(
            is_satisfied(&edge, &Assignment(vec![0, 2])),
            Err(CspError::ValueOutOfRange { vertex: 1, value: 2, size: 2 })
        );
        assert!(is_satisfied(&edge, &Assignment(vec![0])).is_err());
    }

    #[test]
    fn explicit_relations_validate() {
        assert_eq!(Relation::explicit(2, 2, [(0, 1), (0, 1)]).unwrap_err(), CspError::DuplicatePair(0, 1));
        assert!(matches!(Relation::explicit(2, 2, [(2, 0)]), Err(CspError::PairOutOfRange { .. })));
        let r = Relation::explicit(2, 3, [(1, 2), (0, 0)]).unwrap();
        assert_eq!(r.pairs(), vec![(0, 0), (1, 2)]);
        assert_eq!(r.transpose().pairs(), vec![(0, 0), (2, 1)]);
    }

    #[test]
    fn orientation_is_normalised() {
        // constraint given as (1, 0): value of 1 must be less than value of 0
        let inst = CspInstance::from_constraints(2, vec![3, 3], [(1, 0, Relation::tabulate(3, 3, |a, b| a < b))]).unwrap();
        assert!(inst.allows(1, 0, 0, 2));
        assert!(inst.allows(0, 2, 1, 0));
        assert!(!inst.allows(0, 0, 1, 2));
        assert!(is_satisfied(&inst, &Assignment(vec![2, 0])).unwrap());
    }

    #[test]
    fn intensional_materialises_consistently() {
        let r = Relation::from_fn(3, 4, |a, b| (a + b) % 2 == 0);
        let t = r.materialize(12).unwrap();
        assert!(t.is_explicit());
        assert_eq!(r.pairs(), t.pairs());
        assert!(r.materialize(11).is_none());
        assert_eq!(r.transpose().pairs(), t.transpose().pairs());
    }

    #[test]
    fn relation_shape_is_checked() {
        let err = CspInstance::new(families::path(2), vec![2, 3], vec![Relation::full(2, 2)]).unwrap_err();
        assert!(matches!(err, CspError::RelationShape { .. }));
    }
}
