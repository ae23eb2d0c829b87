//! JSON form of an instance with explicit pair lists.

use serde::{Deserialize, Serialize};

use super::{CspError, CspInstance, Relation, SERIALIZE_PAIR_LIMIT};

pub const FORMAT_VERSION: u32 = 1;

fn format_version() -> u32 {
    FORMAT_VERSION
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: usize,
    pub v: usize,
    /// `[value of u, value of v]` pairs.
    pub pairs: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CspJson {
    #[serde(default = "format_version")]
    pub format_version: u32,
    pub n: usize,
    pub alphabet_sizes: Vec<usize>,
    pub edges: Vec<EdgeJson>,
}

impl CspJson {
    /// Explicit form; refuses relations with more than a million pairs.
    pub fn from_instance(inst: &CspInstance) -> Result<Self, CspError> {
        let mut edges = Vec::with_capacity(inst.graph().edge_count());
        for (rel, &(u, v)) in inst.relations().iter().zip(inst.graph().edges()) {
            let (l, r) = rel.dims();
            if !rel.is_explicit() && (l as u64).saturating_mul(r as u64) > SERIALIZE_PAIR_LIMIT {
                // a table this large may still accept few pairs; count lazily
                let mut seen = 0u64;
                for a in 0..l {
                    for b in 0..r {
                        if rel.contains(a, b) {
                            seen += 1;
                            if seen > SERIALIZE_PAIR_LIMIT {
                                return Err(CspError::TooLargeToSerialize {
                                    u,
                                    v,
                                    limit: SERIALIZE_PAIR_LIMIT,
                                });
                            }
                        }
                    }
                }
            }
            let pairs: Vec<[usize; 2]> = rel.pairs().into_iter().map(|(a, b)| [a, b]).collect();
            if pairs.len() as u64 > SERIALIZE_PAIR_LIMIT {
                return Err(CspError::TooLargeToSerialize {
                    u,
                    v,
                    limit: SERIALIZE_PAIR_LIMIT,
                });
            }
            edges.push(EdgeJson { u, v, pairs });
        }
        Ok(CspJson {
            format_version: FORMAT_VERSION,
            n: inst.n(),
            alphabet_sizes: inst.alphabet_sizes().to_vec(),
            edges,
        })
    }

    pub fn to_instance(&self) -> Result<CspInstance, CspError> {
        if self.alphabet_sizes.len() != self.n {
            return Err(CspError::Length {
                what: "alphabet sizes",
                expected: self.n,
                got: self.alphabet_sizes.len(),
            });
        }
        let mut constraints = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            if e.u >= self.n || e.v >= self.n {
                return Err(crate::graph::GraphError::VertexOutOfRange {
                    vertex: e.u.max(e.v),
                    n: self.n,
                }
                .into());
            }
            let rel = Relation::explicit(
                self.alphabet_sizes[e.u],
                self.alphabet_sizes[e.v],
                e.pairs.iter().map(|p| (p[0], p[1])),
            )?;
            constraints.push((e.u, e.v, rel));
        }
        CspInstance::from_constraints(self.n, self.alphabet_sizes.clone(), constraints)
    }
}
