//! Paths. Pebbles arriving from the two sides of a vertex never combine, so
//! vertex `i` is pebblable iff `Z(i) > 0` or one side alone delivers a pebble.
//! One side delivers iff `sum_j Z(j) 2^-|i-j| >= 1` over that side; the
//! greedy floor recursion `a <- Z + floor(a/2)` evaluates the same test in
//! integers.

use num_bigint::BigUint;
use num_traits::Zero;

use super::{PebbleDistribution, SolvabilityVerdict};

/// Single-vertex test by exact fixed-point sums.
pub fn path_vertex_unpebblable(counts: &[u64], i: usize) -> bool {
    assert!(i < counts.len(), "vertex {i} out of range");
    if counts[i] > 0 {
        return false;
    }
    // Left side scaled by 2^i, right side by 2^(n-1-i).
    let mut left = BigUint::zero();
    for (j, &z) in counts[..i].iter().enumerate() {
        if z > 0 {
            left += BigUint::from(z) << j;
        }
    }
    if left >= BigUint::from(1u8) << i {
        return false;
    }
    let n = counts.len();
    let mut right = BigUint::zero();
    for (j, &z) in counts.iter().enumerate().skip(i + 1) {
        if z > 0 {
            right += BigUint::from(z) << (n - 1 - j);
        }
    }
    right < BigUint::from(1u8) << (n - 1 - i)
}

/// Greedy totals flowing rightwards: `out[k] = Z(k) + floor(out[k-1]/2)`.
fn sweep(counts: impl Iterator<Item = u64>) -> Vec<u64> {
    let mut acc = 0u64;
    counts
        .map(|z| {
            acc = z + acc / 2;
            acc
        })
        .collect()
}

pub fn path_pebblable(counts: &[u64]) -> Vec<bool> {
    let n = counts.len();
    let from_left = sweep(counts.iter().copied());
    let mut from_right = sweep(counts.iter().rev().copied());
    from_right.reverse();
    (0..n)
        .map(|i| {
            counts[i] > 0
                || (i > 0 && from_left[i - 1] >= 2)
                || (i + 1 < n && from_right[i + 1] >= 2)
        })
        .collect()
}

pub fn path_is_solvable(dist: &PebbleDistribution) -> SolvabilityVerdict {
    SolvabilityVerdict::from_pebblable(&path_pebblable(dist.counts()))
}

/// Solvability only, without heap allocation after warm-up.
pub(crate) fn path_solvable_fast(counts: &[u64]) -> bool {
    const STACK: usize = 64;
    if counts.len() < STACK {
        let mut buf = [0u64; STACK];
        solvable_with(counts, &mut buf[..counts.len() + 1])
    } else {
        super::with_scratch(counts.len() + 1, |buf| solvable_with(counts, buf))
    }
}

fn solvable_with(counts: &[u64], from_right: &mut [u64]) -> bool {
    let n = counts.len();
    from_right[n] = 0;
    for i in (0..n).rev() {
        from_right[i] = counts[i] + from_right[i + 1] / 2;
    }
    let mut from_left = 0u64;
    for i in 0..n {
        if counts[i] == 0 && from_left < 2 && from_right[i + 1] < 2 {
            return false;
        }
        from_left = counts[i] + from_left / 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ends_only() {
        let d: PebbleDistribution = vec![1, 0, 0, 1].into();
        let v = path_is_solvable(&d);
        assert!(!v.solvable);
        assert!(matches!(v.witness, Some(1) | Some(2)));
        assert!(path_vertex_unpebblable(d.counts(), 1));
        assert!(!path_vertex_unpebblable(d.counts(), 3));
    }

    #[test]
    fn power_of_two_at_the_end() {
        let mut counts = vec![0u64; 10];
        counts[9] = 512;
        assert!(path_is_solvable(&counts.clone().into()).solvable);
        assert!(path_solvable_fast(&counts));
        counts[9] = 511;
        assert_eq!(path_is_solvable(&counts.clone().into()).witness, Some(0));
        assert!(path_vertex_unpebblable(&counts, 0));
    }

    #[test]
    fn fixed_point_agrees_with_sweep() {
        let cases: [&[u64]; 5] = [&[0, 3, 0, 0, 1, 0], &[2, 0, 2, 0, 2], &[0, 0, 0, 0, 0, 15], &[1], &[0, 7, 0, 0, 0, 1, 0, 2]];
        for c in cases {
            let sweep = path_pebblable(c);
            for i in 0..c.len() {
                assert_eq!(sweep[i], !path_vertex_unpebblable(c, i), "{c:?} at {i}");
            }
            assert_eq!(path_solvable_fast(c), sweep.iter().all(|&p| p));
        }
    }
}
