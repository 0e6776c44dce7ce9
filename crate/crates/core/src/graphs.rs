//! Undirected simple graphs: paths, cliques, bouquets and arbitrary edge lists.
//!
//! Vertices are dense indices `0..n`. Structured graphs keep an implicit
//! representation so that a bouquet with a clique of 10^5 vertices costs
//! O(n) memory; distances on them have closed forms.
//!
//! Labeling of a bouquet `B(n, g, L)`: arm `a` (for `a < g`) owns vertices
//! `a*(L-1) .. (a+1)*(L-1)`, ordered from the free end (offset 0) towards the
//! hub (offset `L-2`). The hub is `g*(L-1)`, and the remaining clique vertices
//! follow it.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graphs above this order never get an all-pairs distance table.
pub const DEFAULT_APSP_CAP: usize = 4096;

/// Parameters of the bouquet `B(n, g, L)`: `g` paths of `L` vertices and a
/// clique, one end of every path identified with one clique vertex (the hub).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BouquetSpec {
    pub n: usize,
    pub g: usize,
    pub arm_len: usize,
}

impl BouquetSpec {
    pub fn new(n: usize, g: usize, arm_len: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("bouquet needs n >= 1".into()));
        }
        if arm_len == 0 {
            return Err(Error::Construction("bouquet arms need L >= 1".into()));
        }
        let arm_vertices = g
            .checked_mul(arm_len - 1)
            .ok_or_else(|| Error::Construction("g(L-1) overflows".into()))?;
        if arm_vertices + 1 > n {
            return Err(Error::Construction(format!(
                "g(L-1)+1 = {} exceeds n = {n}",
                arm_vertices + 1
            )));
        }
        Ok(Self { n, g, arm_len })
    }

    /// Size of the clique, hub included.
    pub fn clique_size(&self) -> usize {
        self.n - self.g * (self.arm_len - 1)
    }

    pub fn hub(&self) -> usize {
        self.g * (self.arm_len - 1)
    }

    /// Non-hub vertices per arm.
    pub fn arm_body(&self) -> usize {
        self.arm_len - 1
    }

    /// Vertex at `offset` of arm `arm` (offset 0 is the free end).
    pub fn arm_vertex(&self, arm: usize, offset: usize) -> usize {
        arm * self.arm_body() + offset
    }

    pub fn locate(&self, v: usize) -> BouquetPos {
        let hub = self.hub();
        if v < hub {
            let body = self.arm_body();
            BouquetPos::Arm { arm: v / body, offset: v % body }
        } else if v == hub {
            BouquetPos::Hub
        } else {
            BouquetPos::Clique
        }
    }

    /// Distance from `v` to the hub.
    fn depth(&self, v: usize) -> u32 {
        match self.locate(v) {
            BouquetPos::Arm { offset, .. } => (self.arm_body() - offset) as u32,
            BouquetPos::Hub => 0,
            BouquetPos::Clique => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BouquetPos {
    Arm { arm: usize, offset: usize },
    Hub,
    Clique,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphKind {
    Path,
    Complete,
    Bouquet(BouquetSpec),
    Adjacency(Vec<Vec<usize>>),
}

/// An immutable undirected simple graph.
pub struct Graph {
    n: usize,
    kind: GraphKind,
    connected: bool,
    apsp_cap: usize,
    apsp: OnceLock<Option<Vec<u32>>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GraphKind::Adjacency(_) => write!(f, "Graph(edges, n={})", self.n),
            kind => write!(f, "Graph({kind:?}, n={})", self.n),
        }
    }
}

impl Clone for Graph {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            kind: self.kind.clone(),
            connected: self.connected,
            apsp_cap: self.apsp_cap,
            apsp: OnceLock::new(),
        }
    }
}

impl Graph {
    fn structured(n: usize, kind: GraphKind) -> Self {
        Self { n, kind, connected: true, apsp_cap: DEFAULT_APSP_CAP, apsp: OnceLock::new() }
    }

    pub fn path(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("path needs n >= 1".into()));
        }
        Ok(Self::structured(n, GraphKind::Path))
    }

    pub fn complete(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("clique needs n >= 1".into()));
        }
        Ok(Self::structured(n, GraphKind::Complete))
    }

    pub fn bouquet(spec: BouquetSpec) -> Result<Self> {
        let spec = BouquetSpec::new(spec.n, spec.g, spec.arm_len)?;
        Ok(Self::structured(spec.n, GraphKind::Bouquet(spec)))
    }

    /// Builds a graph from an explicit edge list on `n` vertices.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::Construction("the graph with no vertices is not allowed".into()));
        }
        let mut seen = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Construction(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::Construction(format!("loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::Construction(format!("duplicate edge ({u},{v})")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let connected = bfs(&adj, 0).iter().all(|d| d.is_some());
        Ok(Self {
            n,
            kind: GraphKind::Adjacency(adj),
            connected,
            apsp_cap: DEFAULT_APSP_CAP,
            apsp: OnceLock::new(),
        })
    }

    /// Parses `path:<n>`, `clique:<n>`, `bouquet:<n>:<g>:<L>`, or otherwise
    /// reads an edge-list file (one `u v` pair per line, 0-based).
    pub fn from_literal(literal: &str) -> Result<Self> {
        let parts: Vec<&str> = literal.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad integer `{s}` in graph literal `{literal}`")))
        };
        match parts.as_slice() {
            ["path", n] => Self::path(num(n)?),
            ["clique", n] => Self::complete(num(n)?),
            ["bouquet", n, g, l] => Self::bouquet(BouquetSpec::new(num(n)?, num(g)?, num(l)?)?),
            _ => Self::from_edge_file(Path::new(literal)),
        }
    }

    pub fn from_edge_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read graph `{}`: {e}", path.display())))?;
        Self::from_edge_list_str(&text)
    }

    pub fn from_edge_list_str(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut n = 0;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [u, v] = fields.as_slice() else {
                return Err(Error::Parse(format!("line {}: expected `u v`", lineno + 1)));
            };
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: bad vertex `{s}`", lineno + 1)))
            };
            let (u, v) = (parse(u)?, parse(v)?);
            n = n.max(u + 1).max(v + 1);
            edges.push((u, v));
        }
        Self::from_edges(n, &edges)
    }

    /// Overrides the order above which all-pairs distances are never cached.
    pub fn with_apsp_cap(mut self, cap: usize) -> Self {
        self.apsp_cap = cap;
        self.apsp = OnceLock::new();
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &GraphKind {
        &self.kind
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    pub fn bouquet_spec(&self) -> Option<BouquetSpec> {
        match self.kind {
            GraphKind::Bouquet(spec) => Some(spec),
            _ => None,
        }
    }

    pub fn edge_count(&self) -> usize {
        match &self.kind {
            GraphKind::Path => self.n - 1,
            GraphKind::Complete => self.n * (self.n - 1) / 2,
            GraphKind::Bouquet(spec) => {
                let m = spec.clique_size();
                spec.g * spec.arm_body() + m * (m - 1) / 2
            }
            GraphKind::Adjacency(adj) => adj.iter().map(Vec::len).sum::<usize>() / 2,
        }
    }

    pub fn is_tree(&self) -> bool {
        self.connected && self.edge_count() + 1 == self.n
    }

    pub fn is_path(&self) -> bool {
        match &self.kind {
            GraphKind::Path => true,
            GraphKind::Complete => self.n <= 2,
            GraphKind::Bouquet(spec) => {
                let m = spec.clique_size();
                m <= 2 && spec.g * usize::from(spec.arm_len >= 2) + m - 1 <= 2
            }
            GraphKind::Adjacency(_) => {
                self.is_tree() && (0..self.n).all(|v| self.degree(v) <= 2)
            }
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u >= self.n || v >= self.n || u == v {
            return false;
        }
        match &self.kind {
            GraphKind::Adjacency(adj) => adj[u].binary_search(&v).is_ok(),
            _ => self.distance(u, v).map(|d| d == 1).unwrap_or(false),
        }
    }

    /// True when the edges are exactly `{i, i+1}`, i.e. the vertex order
    /// walks the path.
    pub fn is_index_path(&self) -> bool {
        self.is_path() && (1..self.n).all(|i| self.has_edge(i - 1, i))
    }

    pub fn degree(&self, v: usize) -> usize {
        let mut d = 0;
        self.for_each_neighbor(v, |_| d += 1);
        d
    }

    /// Calls `f` on every neighbor of `v` in increasing order.
    pub fn for_each_neighbor(&self, v: usize, mut f: impl FnMut(usize)) {
        assert!(v < self.n, "vertex {v} out of range");
        match &self.kind {
            GraphKind::Path => {
                if v > 0 {
                    f(v - 1);
                }
                if v + 1 < self.n {
                    f(v + 1);
                }
            }
            GraphKind::Complete => (0..self.n).filter(|&u| u != v).for_each(f),
            GraphKind::Bouquet(spec) => {
                let hub = spec.hub();
                let body = spec.arm_body();
                match spec.locate(v) {
                    BouquetPos::Arm { offset, .. } => {
                        if offset > 0 {
                            f(v - 1);
                        }
                        if offset + 1 < body {
                            f(v + 1);
                        } else {
                            f(hub);
                        }
                    }
                    BouquetPos::Hub => {
                        for arm in (0..spec.g).filter(|_| body > 0) {
                            f(spec.arm_vertex(arm, body - 1));
                        }
                        (hub + 1..self.n).for_each(f);
                    }
                    BouquetPos::Clique => {
                        (hub..self.n).filter(|&u| u != v).for_each(f);
                    }
                }
            }
            GraphKind::Adjacency(adj) => adj[v].iter().copied().for_each(f),
        }
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_neighbor(v, |u| out.push(u));
        out
    }

    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|v| self.neighbors(v)).collect()
    }

    /// All edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            self.for_each_neighbor(u, |v| {
                if u < v {
                    out.push((u, v));
                }
            });
        }
        out
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::pre(format!("vertex {v} out of range for n={}", self.n)))
        }
    }

    /// Exact shortest-path distances from `v` to every vertex.
    pub fn distances_from(&self, v: usize) -> Result<Vec<u32>> {
        self.check_vertex(v)?;
        match &self.kind {
            GraphKind::Path => Ok((0..self.n).map(|u| u.abs_diff(v) as u32).collect()),
            GraphKind::Complete => Ok((0..self.n).map(|u| u32::from(u != v)).collect()),
            GraphKind::Bouquet(spec) => Ok((0..self.n).map(|u| bouquet_distance(spec, v, u)).collect()),
            GraphKind::Adjacency(adj) => {
                let dist = bfs(adj, v);
                dist.iter()
                    .enumerate()
                    .map(|(u, d)| d.ok_or(Error::Disconnected(u)))
                    .collect()
            }
        }
    }

    pub fn distance(&self, u: usize, v: usize) -> Result<u32> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        match &self.kind {
            GraphKind::Path => Ok(u.abs_diff(v) as u32),
            GraphKind::Complete => Ok(u32::from(u != v)),
            GraphKind::Bouquet(spec) => Ok(bouquet_distance(spec, u, v)),
            GraphKind::Adjacency(_) => match self.all_pairs() {
                Some(table) => {
                    let d = table[u * self.n + v];
                    if d == u32::MAX {
                        Err(Error::Disconnected(v))
                    } else {
                        Ok(d)
                    }
                }
                None => Ok(self.distances_from(u)?[v]),
            },
        }
    }

    /// Lazily built row-major distance table (`u32::MAX` for unreachable
    /// pairs), or `None` when the graph exceeds the cache cap.
    pub fn all_pairs(&self) -> Option<&[u32]> {
        self.apsp
            .get_or_init(|| {
                if self.n > self.apsp_cap {
                    return None;
                }
                let adj = self.adjacency_lists();
                let mut table = Vec::with_capacity(self.n * self.n);
                for s in 0..self.n {
                    table.extend(bfs(&adj, s).into_iter().map(|d| d.unwrap_or(u32::MAX)));
                }
                Some(table)
            })
            .as_deref()
    }

    /// Largest distance from `v`.
    pub fn eccentricity(&self, v: usize) -> Result<u32> {
        Ok(self.distances_from(v)?.into_iter().max().unwrap_or(0))
    }
}

fn bouquet_distance(spec: &BouquetSpec, u: usize, v: usize) -> u32 {
    if u == v {
        return 0;
    }
    match (spec.locate(u), spec.locate(v)) {
        (BouquetPos::Arm { arm: a, offset: i }, BouquetPos::Arm { arm: b, offset: j }) if a == b => {
            i.abs_diff(j) as u32
        }
        (BouquetPos::Clique, BouquetPos::Clique) => 1,
        _ => spec.depth(u) + spec.depth(v),
    }
}

fn bfs(adj: &[Vec<usize>], source: usize) -> Vec<Option<u32>> {
    let mut dist = vec![None; adj.len()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or(0);
        for &w in &adj[u] {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn floyd_warshall(g: &Graph) -> Vec<Vec<u32>> {
        let n = g.vertex_count();
        let inf = u32::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for (u, v) in g.edges() {
            d[u][v] = 1;
            d[v][u] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d
    }

    fn small_graphs() -> Vec<Graph> {
        let mut out = Vec::new();
        for n in 1..=8 {
            out.push(Graph::path(n).unwrap());
            out.push(Graph::complete(n).unwrap());
            for g in 0..=n {
                for l in 1..=n {
                    if let Ok(spec) = BouquetSpec::new(n, g, l) {
                        out.push(Graph::bouquet(spec).unwrap());
                    }
                }
            }
        }
        out.push(Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap());
        out.push(Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap());
        out
    }

    #[test]
    fn path_construction() {
        let p1 = Graph::path(1).unwrap();
        assert_eq!(p1.vertex_count(), 1);
        assert!(p1.edges().is_empty());
        assert_eq!(Graph::path(3).unwrap().edges(), vec![(0, 1), (1, 2)]);
        assert_eq!(Graph::path(5).unwrap().distance(0, 4).unwrap(), 4);
        assert!(matches!(Graph::path(0), Err(Error::Construction(_))));
    }

    #[test]
    fn bouquet_counts_and_degenerate_shapes() {
        let spec = BouquetSpec::new(10, 2, 4).unwrap();
        assert_eq!(spec.clique_size(), 4);
        let g = Graph::bouquet(spec).unwrap();
        assert_eq!(g.vertex_count(), 10);
        assert_eq!(g.edge_count(), 2 * 3 + 6);
        assert!(g.is_connected());

        let k5 = Graph::bouquet(BouquetSpec::new(5, 0, 1).unwrap()).unwrap();
        assert_eq!(k5.edges(), Graph::complete(5).unwrap().edges());

        let p5 = Graph::bouquet(BouquetSpec::new(5, 1, 5).unwrap()).unwrap();
        assert_eq!(p5.edges(), Graph::path(5).unwrap().edges());
        assert!(p5.is_path());

        assert!(BouquetSpec::new(5, 2, 4).is_err());
    }

    #[test]
    fn bouquet_degrees() {
        for g in small_graphs() {
            let Some(spec) = g.bouquet_spec() else { continue };
            let m = spec.clique_size();
            assert_eq!(g.degree(spec.hub()), spec.g * usize::from(spec.arm_len >= 2) + m - 1);
            for v in spec.hub() + 1..spec.n {
                assert_eq!(g.degree(v), m - 1);
            }
            if spec.arm_len >= 2 {
                for a in 0..spec.g {
                    let end = spec.arm_vertex(a, 0);
                    assert_eq!(g.degree(end), 1, "{spec:?}");
                }
            }
        }
    }

    #[test]
    fn distances_small_examples() {
        assert_eq!(Graph::path(4).unwrap().distances_from(0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(Graph::complete(4).unwrap().distances_from(2).unwrap(), vec![1, 1, 0, 1]);
        // bouquet(10,2,4): arm 0 end is vertex 0; hub is 6; clique vertices 7..10.
        let g = Graph::bouquet(BouquetSpec::new(10, 2, 4).unwrap()).unwrap();
        let d = g.distances_from(0).unwrap();
        assert_eq!(d[6], 3);
        assert_eq!(&d[7..], &[4, 4, 4]);
        assert_eq!(d[3], 6);
    }

    #[test]
    fn distances_match_floyd_warshall() {
        for g in small_graphs() {
            let fw = floyd_warshall(&g);
            let generic = Graph::from_edges(g.vertex_count(), &g.edges()).unwrap();
            for s in 0..g.vertex_count() {
                let d = g.distances_from(s).unwrap();
                assert_eq!(d, fw[s], "{g:?} from {s}");
                assert_eq!(generic.distances_from(s).unwrap(), fw[s]);
                for t in 0..g.vertex_count() {
                    assert_eq!(generic.distance(s, t).unwrap(), fw[s][t]);
                }
            }
        }
    }

    #[test]
    fn cached_distances_are_a_metric() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]).unwrap();
        let n = g.vertex_count();
        let t = g.all_pairs().unwrap();
        for i in 0..n {
            assert_eq!(t[i * n + i], 0);
            for j in 0..n {
                assert_eq!(t[i * n + j], t[j * n + i]);
                for k in 0..n {
                    assert!(t[i * n + j] <= t[i * n + k] + t[k * n + j]);
                }
            }
        }
        assert!(g.clone().with_apsp_cap(3).all_pairs().is_none());
    }

    #[test]
    fn disconnected_graph_names_unreachable_vertex() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.distances_from(0), Err(Error::Disconnected(2)));
    }

    #[test]
    fn edge_list_validation() {
        assert!(Graph::from_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(0, &[]).is_err());
        let g = Graph::from_edge_list_str("# triangle\n0 1\n1 2\n\n2 0\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert!(Graph::from_edge_list_str("0 1 2\n").is_err());
    }

    #[test]
    fn literals() {
        assert_eq!(Graph::from_literal("path:7").unwrap().vertex_count(), 7);
        assert_eq!(Graph::from_literal("clique:4").unwrap().edge_count(), 6);
        let b = Graph::from_literal("bouquet:10:2:4").unwrap();
        assert_eq!(b.bouquet_spec(), Some(BouquetSpec { n: 10, g: 2, arm_len: 4 }));
        assert!(matches!(Graph::from_literal("path:x"), Err(Error::Parse(_))));
        assert!(matches!(Graph::from_literal("/no/such/file"), Err(Error::Parse(_))));
    }
}
