//! Pebbling moves take two pebbles off a vertex and put one on a neighbor.
//! A vertex is pebblable if some move sequence ends with a pebble on it; a
//! distribution is solvable if every vertex is pebblable.
//!
//! Solvers here: an exhaustive oracle for small instances, a greedy for
//! trees, a linear scan for paths, a linear solver for bouquets, and the
//! potential bound `sum Z(x) 2^-d(x,v)` which certifies unpebblability.

mod bouquet;
mod bruteforce;
mod path;
mod potential;
mod tree;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{BouquetSpec, Graph, GraphKind};

pub use bouquet::{bouquet_is_solvable, bouquet_pebblable};
pub use bruteforce::{
    is_pebblable_bruteforce, pebblable_set_bruteforce, BruteForce, DEFAULT_STATE_CAP,
};
pub use path::{path_is_solvable, path_pebblable, path_vertex_unpebblable};
pub use potential::weight_potential;
pub use tree::{max_deliverable_tree, tree_pebblable};

thread_local! {
    static SCRATCH: std::cell::RefCell<Vec<u64>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// Runs `f` on a per-thread buffer of at least `len` words.
pub(crate) fn with_scratch<R>(len: usize, f: impl FnOnce(&mut [u64]) -> R) -> R {
    SCRATCH.with(|cell| match cell.try_borrow_mut() {
        Ok(mut buf) => {
            if buf.len() < len {
                buf.resize(len, 0);
            }
            f(&mut buf[..len])
        }
        Err(_) => f(&mut vec![0; len]),
    })
}

/// Pebble counts per vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PebbleDistribution {
    counts: Vec<u64>,
}

impl PebbleDistribution {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn zeros(n: usize) -> Self {
        Self { counts: vec![0; n] }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn into_counts(self) -> Vec<u64> {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn add_pebble(&mut self, v: usize) {
        self.counts[v] += 1;
    }

    /// Parses a comma- or whitespace-separated list of counts.
    pub fn parse(text: &str) -> Result<Self> {
        let counts = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad pebble count `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        if counts.is_empty() {
            return Err(Error::Parse("empty distribution".into()));
        }
        Ok(Self { counts })
    }

    pub(crate) fn check_len(&self, graph: &Graph) -> Result<()> {
        if self.counts.len() == graph.vertex_count() {
            Ok(())
        } else {
            Err(Error::pre(format!(
                "distribution has {} entries but the graph has {} vertices",
                self.counts.len(),
                graph.vertex_count()
            )))
        }
    }
}

impl From<Vec<u64>> for PebbleDistribution {
    fn from(counts: Vec<u64>) -> Self {
        Self::new(counts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolvabilityVerdict {
    pub solvable: bool,
    /// An unpebblable vertex; present iff the distribution is unsolvable.
    pub witness: Option<usize>,
}

impl SolvabilityVerdict {
    pub fn from_pebblable(pebblable: &[bool]) -> Self {
        let witness = pebblable.iter().position(|&p| !p);
        Self { solvable: witness.is_none(), witness }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    #[default]
    Auto,
    Bruteforce,
    Path,
    Tree,
    Bouquet,
}

impl std::str::FromStr for SolveMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "bruteforce" => Ok(Self::Bruteforce),
            "path" => Ok(Self::Path),
            "tree" => Ok(Self::Tree),
            "bouquet" => Ok(Self::Bouquet),
            _ => Err(Error::Parse(format!("unknown method `{s}`"))),
        }
    }
}

impl SolveMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Bruteforce => "bruteforce",
            Self::Path => "path",
            Self::Tree => "tree",
            Self::Bouquet => "bouquet",
        }
    }

    /// Picks the fastest exact method for the graph's shape.
    pub fn resolve(self, graph: &Graph) -> Result<Self> {
        let mismatch = |reason: &str| Error::MethodMismatch { method: self.name().into(), reason: reason.into() };
        if !graph.is_connected() {
            return Err(mismatch("graph is disconnected"));
        }
        match self {
            Self::Auto => Ok(match graph.kind() {
                GraphKind::Path => Self::Path,
                GraphKind::Complete | GraphKind::Bouquet(_) => Self::Bouquet,
                GraphKind::Adjacency(_) if graph.is_tree() => Self::Tree,
                GraphKind::Adjacency(_) => Self::Bruteforce,
            }),
            Self::Path if !graph.is_index_path() => Err(mismatch("vertices do not form the path 0-1-...-(n-1)")),
            Self::Tree if !graph.is_tree() => Err(mismatch("graph is not a tree")),
            Self::Bouquet if bouquet_view(graph).is_none() => Err(mismatch("graph is not a bouquet")),
            m => Ok(m),
        }
    }
}

/// The bouquet spec that a structured graph is labeled as, if any.
pub(crate) fn bouquet_view(graph: &Graph) -> Option<BouquetSpec> {
    match graph.kind() {
        GraphKind::Bouquet(spec) => Some(*spec),
        GraphKind::Complete => BouquetSpec::new(graph.vertex_count(), 0, 1).ok(),
        GraphKind::Path => BouquetSpec::new(graph.vertex_count(), 1, graph.vertex_count()).ok(),
        GraphKind::Adjacency(_) => None,
    }
}

/// Pebblability of every vertex with the chosen method.
pub fn pebblable_vertices(graph: &Graph, dist: &PebbleDistribution, method: SolveMethod) -> Result<Vec<bool>> {
    dist.check_len(graph)?;
    match method.resolve(graph)? {
        SolveMethod::Path => Ok(path_pebblable(dist.counts())),
        SolveMethod::Tree => tree_pebblable(graph, dist),
        SolveMethod::Bouquet => {
            let spec = bouquet_view(graph).expect("resolved to bouquet");
            bouquet_pebblable(&spec, dist)
        }
        SolveMethod::Bruteforce => pebblable_set_bruteforce(graph, dist),
        SolveMethod::Auto => unreachable!("resolve never returns Auto"),
    }
}

pub fn is_solvable(graph: &Graph, dist: &PebbleDistribution, method: SolveMethod) -> Result<SolvabilityVerdict> {
    Ok(SolvabilityVerdict::from_pebblable(&pebblable_vertices(graph, dist, method)?))
}

/// A solvability checker bound to one graph, for hot Monte-Carlo loops.
#[derive(Debug, Clone)]
pub struct Solver {
    graph: Graph,
    method: SolveMethod,
    bouquet: Option<BouquetSpec>,
}

impl Solver {
    pub fn new(graph: Graph, method: SolveMethod) -> Result<Self> {
        let method = method.resolve(&graph)?;
        let bouquet = bouquet_view(&graph);
        Ok(Self { graph, method, bouquet })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    pub fn is_solvable(&self, counts: &[u64]) -> Result<bool> {
        match self.method {
            SolveMethod::Path => Ok(path::path_solvable_fast(counts)),
            SolveMethod::Bouquet => Ok(bouquet::bouquet_solvable_fast(self.bouquet.as_ref().expect("bouquet"), counts)),
            _ => {
                let dist = PebbleDistribution::new(counts.to_vec());
                Ok(is_solvable(&self.graph, &dist, self.method)?.solvable)
            }
        }
    }
}
