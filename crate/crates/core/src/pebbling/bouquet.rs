//! Linear-time pebblability on bouquets.
//!
//! Moving a pebble between two non-hub clique vertices halves it for nothing,
//! since every clique vertex is adjacent to the target side already. So the
//! most the hub can collect is `Z(hub) + sum floor(t_a/2) + sum floor(Z(u)/2)`
//! where `t_a` is the greedy total at the hub end of arm `a`. Arm vertices
//! are reached as on a path, with the hub acting as one extra end fed by
//! everything except the arm itself.

use super::{PebbleDistribution, SolvabilityVerdict};
use crate::error::{Error, Result};
use crate::graphs::BouquetSpec;

struct Summary {
    /// Greedy value gathered at the hub-side end of each arm.
    arm_top: Vec<u64>,
    /// Hub total including everything.
    hub_total: u64,
    /// Hub total from the hub and arms only.
    hub_from_arms: u64,
    /// Whether some non-hub clique vertex can make a move.
    clique_mover: bool,
}

fn summarize(spec: &BouquetSpec, z: &[u64]) -> Summary {
    let body = spec.arm_body();
    let hub = spec.hub();
    let mut arm_top = Vec::with_capacity(spec.g);
    let mut delivered = 0u64;
    if body > 0 {
        for a in 0..spec.g {
            let start = spec.arm_vertex(a, 0);
            let top = z[start..start + body].iter().fold(0u64, |acc, &c| c + acc / 2);
            delivered += top / 2;
            arm_top.push(top);
        }
    }
    let clique = &z[hub + 1..];
    let clique_send: u64 = clique.iter().map(|&c| c / 2).sum();
    Summary {
        arm_top,
        hub_total: z[hub] + delivered + clique_send,
        hub_from_arms: z[hub] + delivered,
        clique_mover: clique_send > 0,
    }
}

/// Calls `f(offset, pebblable)` for each vertex of arm `a`, from the end.
fn arm_verdicts(spec: &BouquetSpec, z: &[u64], s: &Summary, a: usize, mut f: impl FnMut(usize, bool) -> bool) -> bool {
    let body = spec.arm_body();
    let start = spec.arm_vertex(a, 0);
    let arm = &z[start..start + body];
    // Hub-side chain, from the hub down; hub_side[k] is the value at offset k.
    let outside = s.hub_total - s.arm_top[a] / 2;
    super::with_scratch(body + 1, |hub_side| {
        hub_side[body] = outside;
        for k in (0..body).rev() {
            hub_side[k] = arm[k] + hub_side[k + 1] / 2;
        }
        let mut end_side = 0u64;
        for k in 0..body {
            let ok = arm[k] > 0 || end_side >= 2 || hub_side[k + 1] >= 2;
            if !f(k, ok) {
                return false;
            }
            end_side = arm[k] + end_side / 2;
        }
        true
    })
}

fn check(spec: &BouquetSpec, z: &[u64]) -> Result<()> {
    if z.len() != spec.n {
        return Err(Error::pre(format!("distribution has {} entries, bouquet has {}", z.len(), spec.n)));
    }
    Ok(())
}

pub fn bouquet_pebblable(spec: &BouquetSpec, dist: &PebbleDistribution) -> Result<Vec<bool>> {
    let z = dist.counts();
    check(spec, z)?;
    let s = summarize(spec, z);
    let hub = spec.hub();
    let mut out = vec![false; spec.n];
    for a in 0..s.arm_top.len() {
        let start = spec.arm_vertex(a, 0);
        arm_verdicts(spec, z, &s, a, |k, ok| {
            out[start + k] = ok;
            true
        });
    }
    out[hub] = s.hub_total >= 1;
    for w in hub + 1..spec.n {
        out[w] = z[w] > 0 || s.clique_mover || s.hub_from_arms >= 2;
    }
    Ok(out)
}

pub fn bouquet_is_solvable(spec: &BouquetSpec, dist: &PebbleDistribution) -> Result<SolvabilityVerdict> {
    Ok(SolvabilityVerdict::from_pebblable(&bouquet_pebblable(spec, dist)?))
}

pub(crate) fn bouquet_solvable_fast(spec: &BouquetSpec, z: &[u64]) -> bool {
    let s = summarize(spec, z);
    let hub = spec.hub();
    if s.hub_total == 0 {
        return false;
    }
    if !(s.clique_mover || s.hub_from_arms >= 2) && z[hub + 1..].contains(&0) {
        return false;
    }
    (0..s.arm_top.len()).all(|a| arm_verdicts(spec, z, &s, a, |_, ok| ok))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, g: usize, l: usize) -> BouquetSpec {
        BouquetSpec::new(n, g, l).unwrap()
    }

    #[test]
    fn clique_needs_a_mover() {
        let s = spec(4, 0, 1);
        let d: PebbleDistribution = vec![0, 1, 1, 0].into();
        assert!(!bouquet_is_solvable(&s, &d).unwrap().solvable);
        let d: PebbleDistribution = vec![0, 2, 0, 0].into();
        assert!(bouquet_is_solvable(&s, &d).unwrap().solvable);
    }

    #[test]
    fn arm_fed_from_clique() {
        // Arms of 3 vertices (2 besides the hub): vertices 0,1 | 2,3 | hub 4 | clique 5.
        let s = spec(6, 2, 3);
        let mut z = vec![0u64; 6];
        z[5] = 4;
        let p = bouquet_pebblable(&s, &z.clone().into()).unwrap();
        assert_eq!(p, vec![false, true, false, true, true, true]);
        z[5] = 8;
        assert!(bouquet_solvable_fast(&s, &z));
    }

    #[test]
    fn fast_agrees_with_full() {
        let s = spec(9, 2, 3);
        for z in [[0, 0, 4, 0, 1, 0, 0, 0, 0], [1, 1, 1, 1, 1, 1, 1, 1, 1], [5, 0, 0, 0, 0, 2, 0, 0, 3]] {
            let full = bouquet_is_solvable(&s, &z.to_vec().into()).unwrap().solvable;
            assert_eq!(full, bouquet_solvable_fast(&s, &z));
        }
    }
}
