//! Pebbling solvability, random pebble-distribution thresholds, multiset
//! shadow inequalities and the numerics of the hypoexponential sum
//! `Y = W1 + W2/2 + W3/4 + ...` of independent standard exponentials.
//!
//! Monte-Carlo work is split into fixed batches, each seeded from
//! `(seed, query, batch)`, so results do not depend on how many worker
//! threads run them. With the `parallel` feature (on by default) batches
//! run on rayon; without it they run in order on the calling thread.

pub mod error;
pub mod experiments;
pub mod graphs;
pub mod hypoexp;
pub mod mc;
pub mod multiset;
pub mod numeric;
pub mod pebbling;
pub mod shadow;
pub mod thresholds;

pub use error::{Error, Result};
pub use graphs::{BouquetSpec, Graph, GraphKind};
pub use mc::{Execution, McConfig};
pub use pebbling::{PebbleDistribution, SolvabilityVerdict, SolveMethod};
