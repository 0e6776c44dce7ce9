#![allow(dead_code)]

use pebblex_core::mc::McRng;
use pebblex_core::{BouquetSpec, Graph};
use rand::Rng;

/// All distributions of exactly `total` pebbles on `n` vertices.
pub fn distributions(n: usize, total: u64) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, n: usize, left: u64, out: &mut Vec<Vec<u64>>) {
        if prefix.len() + 1 == n {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(prefix, n, left - c, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, total, &mut out);
    out
}

/// Every valid bouquet on at most `max_n` vertices, arms of length 1 only
/// once (they are all cliques).
pub fn small_bouquets(max_n: usize) -> Vec<BouquetSpec> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for l in 1..=n {
            for g in 0..=n {
                if let Ok(s) = BouquetSpec::new(n, g, l) {
                    if l > 1 || g == 0 {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

/// Decodes a Pruefer sequence into a labeled tree on `seq.len() + 2` vertices.
pub fn tree_from_pruefer(seq: &[usize]) -> Graph {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::new();
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    Graph::from_edges(n, &edges).unwrap()
}

/// Every labeled tree on `n` vertices.
pub fn all_trees(n: usize) -> Vec<Graph> {
    if n <= 2 {
        return vec![Graph::path(n).unwrap()];
    }
    let total = n.pow((n - 2) as u32);
    (0..total)
        .map(|code| {
            let mut c = code;
            let seq: Vec<usize> = (0..n - 2)
                .map(|_| {
                    let s = c % n;
                    c /= n;
                    s
                })
                .collect();
            tree_from_pruefer(&seq)
        })
        .collect()
}

pub fn random_tree(n: usize, rng: &mut McRng) -> Graph {
    if n <= 2 {
        return Graph::path(n).unwrap();
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    tree_from_pruefer(&seq)
}

pub fn random_bouquet(max_n: usize, rng: &mut McRng) -> BouquetSpec {
    loop {
        let n = rng.random_range(1..=max_n);
        let l = rng.random_range(1..=n);
        let g = rng.random_range(0..=n);
        if let Ok(s) = BouquetSpec::new(n, g, l) {
            return s;
        }
    }
}
