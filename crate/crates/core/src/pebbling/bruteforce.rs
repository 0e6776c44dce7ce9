//! Exhaustive search over reachable distributions.

use std::collections::HashSet;

use super::PebbleDistribution;
use crate::error::{Error, Result};
use crate::graphs::Graph;

pub const DEFAULT_STATE_CAP: usize = 10_000_000;

/// Exhaustive reachability with a cap on visited states. Exceeding the cap
/// is an error, never a guess.
#[derive(Debug, Clone, Copy)]
pub struct BruteForce {
    pub state_cap: usize,
}

impl Default for BruteForce {
    fn default() -> Self {
        Self { state_cap: DEFAULT_STATE_CAP }
    }
}

enum Visited {
    /// Up to 16 vertices with at most 255 pebbles, 8 bits per vertex.
    Packed(HashSet<u128>),
    Wide(HashSet<Vec<u64>>),
}

impl Visited {
    fn for_instance(n: usize, total: u64) -> Self {
        if n <= 16 && total <= 255 {
            Self::Packed(HashSet::new())
        } else {
            Self::Wide(HashSet::new())
        }
    }

    fn insert(&mut self, state: &[u64]) -> bool {
        match self {
            Self::Packed(set) => {
                let key = state.iter().fold(0u128, |acc, &c| (acc << 8) | c as u128);
                set.insert(key)
            }
            Self::Wide(set) => set.insert(state.to_vec()),
        }
    }

    fn len(&self) -> usize {
        match self {
            Self::Packed(set) => set.len(),
            Self::Wide(set) => set.len(),
        }
    }
}

impl BruteForce {
    pub fn new(state_cap: usize) -> Self {
        Self { state_cap }
    }

    /// Depth-first walk over every distribution reachable from `start`;
    /// `visit` returns true to stop early.
    fn explore(&self, graph: &Graph, start: &[u64], mut visit: impl FnMut(&[u64]) -> bool) -> Result<()> {
        let adjacency = graph.adjacency_lists();
        let total = start.iter().sum();
        let mut seen = Visited::for_instance(start.len(), total);
        seen.insert(start);
        if visit(start) {
            return Ok(());
        }
        let mut stack = vec![start.to_vec()];
        while let Some(state) = stack.pop() {
            for (v, nbrs) in adjacency.iter().enumerate() {
                if state[v] < 2 {
                    continue;
                }
                for &u in nbrs {
                    let mut next = state.clone();
                    next[v] -= 2;
                    next[u] += 1;
                    if !seen.insert(&next) {
                        continue;
                    }
                    if seen.len() > self.state_cap {
                        return Err(Error::OracleBudget(self.state_cap));
                    }
                    if visit(&next) {
                        return Ok(());
                    }
                    stack.push(next);
                }
            }
        }
        Ok(())
    }

    pub fn is_pebblable(&self, graph: &Graph, dist: &PebbleDistribution, target: usize) -> Result<bool> {
        dist.check_len(graph)?;
        if target >= graph.vertex_count() {
            return Err(Error::pre(format!("target {target} out of range")));
        }
        let mut hit = false;
        self.explore(graph, dist.counts(), |s| {
            hit = s[target] > 0;
            hit
        })?;
        Ok(hit)
    }

    /// Most pebbles that can sit on `target` at once.
    pub fn max_at(&self, graph: &Graph, dist: &PebbleDistribution, target: usize) -> Result<u64> {
        dist.check_len(graph)?;
        if target >= graph.vertex_count() {
            return Err(Error::pre(format!("target {target} out of range")));
        }
        let mut most = 0;
        self.explore(graph, dist.counts(), |s| {
            most = most.max(s[target]);
            false
        })?;
        Ok(most)
    }

    pub fn pebblable_set(&self, graph: &Graph, dist: &PebbleDistribution) -> Result<Vec<bool>> {
        dist.check_len(graph)?;
        let n = graph.vertex_count();
        let mut reached = vec![false; n];
        let mut missing = n;
        self.explore(graph, dist.counts(), |s| {
            for (v, &c) in s.iter().enumerate() {
                if c > 0 && !reached[v] {
                    reached[v] = true;
                    missing -= 1;
                }
            }
            missing == 0
        })?;
        Ok(reached)
    }
}

pub fn is_pebblable_bruteforce(graph: &Graph, dist: &PebbleDistribution, target: usize) -> Result<bool> {
    BruteForce::default().is_pebblable(graph, dist, target)
}

pub fn pebblable_set_bruteforce(graph: &Graph, dist: &PebbleDistribution) -> Result<Vec<bool>> {
    BruteForce::default().pebblable_set(graph, dist)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_of_four() {
        let g = Graph::path(4).unwrap();
        let d: PebbleDistribution = vec![1, 0, 0, 1].into();
        assert_eq!(pebblable_set_bruteforce(&g, &d).unwrap(), vec![true, false, false, true]);
        let d: PebbleDistribution = vec![4, 0, 0, 0].into();
        assert_eq!(pebblable_set_bruteforce(&g, &d).unwrap(), vec![true, true, true, false]);
        let d: PebbleDistribution = vec![8, 0, 0, 0].into();
        assert!(is_pebblable_bruteforce(&g, &d, 3).unwrap());
    }

    #[test]
    fn cap_is_an_error() {
        let g = Graph::complete(6).unwrap();
        let d: PebbleDistribution = vec![12, 0, 0, 0, 0, 0].into();
        let r = BruteForce::new(50).pebblable_set(&Graph::path(6).unwrap(), &vec![0, 0, 0, 0, 0, 1].into());
        assert_eq!(r.unwrap(), vec![false, false, false, false, false, true]);
        assert!(matches!(BruteForce::new(50).is_pebblable(&g, &d, 5), Ok(true)));
        let far = Graph::path(6).unwrap();
        let d: PebbleDistribution = vec![31, 0, 0, 0, 0, 0].into();
        assert_eq!(BruteForce::new(20).is_pebblable(&far, &d, 5), Err(Error::OracleBudget(20)));
    }

    #[test]
    fn wide_states() {
        let g = Graph::path(3).unwrap();
        let d: PebbleDistribution = vec![300, 0, 0].into();
        assert!(is_pebblable_bruteforce(&g, &d, 2).unwrap());
    }
}
