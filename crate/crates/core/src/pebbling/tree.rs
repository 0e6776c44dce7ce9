//! Greedy pebbling on trees: pull pebbles toward the root bottom-up, each
//! subtree sending `floor(t(c)/2)` to its parent.

use super::PebbleDistribution;
use crate::error::{Error, Result};
use crate::graphs::Graph;

struct Rooted {
    order: Vec<usize>,
    parent: Vec<usize>,
}

fn root_tree(graph: &Graph, root: usize) -> Result<Rooted> {
    if !graph.is_tree() {
        return Err(Error::MethodMismatch { method: "tree".into(), reason: "graph is not a tree".into() });
    }
    let n = graph.vertex_count();
    if root >= n {
        return Err(Error::pre(format!("root {root} out of range")));
    }
    let adjacency = graph.adjacency_lists();
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    parent[root] = root;
    order.push(root);
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for &u in &adjacency[v] {
            if parent[u] == usize::MAX {
                parent[u] = v;
                order.push(u);
            }
        }
    }
    Ok(Rooted { order, parent })
}

fn subtree_totals(rooted: &Rooted, counts: &[u64]) -> Vec<u64> {
    let mut down = counts.to_vec();
    for &v in rooted.order.iter().skip(1).rev() {
        let p = rooted.parent[v];
        down[p] += down[v] / 2;
    }
    down
}

/// Most pebbles that can be gathered on `root`.
pub fn max_deliverable_tree(graph: &Graph, dist: &PebbleDistribution, root: usize) -> Result<u64> {
    dist.check_len(graph)?;
    let rooted = root_tree(graph, root)?;
    Ok(subtree_totals(&rooted, dist.counts())[root])
}

/// Pebblability of every vertex in O(n), by rerooting the greedy.
pub fn tree_pebblable(graph: &Graph, dist: &PebbleDistribution) -> Result<Vec<bool>> {
    dist.check_len(graph)?;
    let rooted = root_tree(graph, 0)?;
    let down = subtree_totals(&rooted, dist.counts());
    // gathered[v]: the greedy total at v when v is the root.
    let mut gathered = vec![0u64; down.len()];
    gathered[0] = down[0];
    for &v in rooted.order.iter().skip(1) {
        let p = rooted.parent[v];
        let from_parent = gathered[p] - down[v] / 2;
        gathered[v] = down[v] + from_parent / 2;
    }
    Ok(gathered.into_iter().map(|t| t >= 1).collect())
}
