//! Immutable graphs and the structural measures used as node features.

mod measures;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use crate::error::{Error, Result};

pub use measures::{
    clustering_coefficient, coreness, eigenvector_centrality, hits, pagerank, structural_features,
    StructuralFeatures, FEATURE_NAMES,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

/// Node/edge structure with dense ids `0..node_count`.
///
/// Edges are deduplicated and self-loops dropped at construction. For an
/// undirected graph every edge appears in both directions of the adjacency
/// lists, so `neighbors(v, Out) == neighbors(v, In)`.
#[derive(Clone, Debug)]
pub struct Graph {
    labels: Vec<String>,
    directed: bool,
    edges: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    und_adj: Vec<Vec<usize>>,
    self_loops_dropped: usize,
    duplicates_dropped: usize,
    msg_src: Arc<[usize]>,
    msg_dst: Arc<[usize]>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels && self.directed == other.directed && self.edges == other.edges
    }
}

/// Sort labels numerically when they are all integers, lexicographically otherwise.
fn sort_labels(labels: &mut [String]) {
    if labels.iter().all(|l| l.parse::<u64>().is_ok()) {
        labels.sort_by_key(|l| l.parse::<u64>().unwrap());
    } else {
        labels.sort();
    }
}

impl Graph {
    /// Graph over nodes labelled `"0".."n-1"`.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)], directed: bool) -> Result<Self> {
        let labels = (0..node_count).map(|i| i.to_string()).collect();
        Graph::build(labels, edges, directed)
    }

    fn build(labels: Vec<String>, raw: &[(usize, usize)], directed: bool) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::invalid("graph has no nodes"));
        }
        let mut set = BTreeSet::new();
        let mut self_loops = 0;
        let mut duplicates = 0;
        for &(u, v) in raw {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                self_loops += 1;
                continue;
            }
            let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
            if !set.insert(key) {
                duplicates += 1;
            }
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();

        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        let mut und: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(u, v) in &edges {
            out_adj[u].push(v);
            in_adj[v].push(u);
            if !directed {
                out_adj[v].push(u);
                in_adj[u].push(v);
            }
            und[u].insert(v);
            und[v].insert(u);
        }
        for a in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            a.sort_unstable();
        }
        let und_adj: Vec<Vec<usize>> = und.into_iter().map(|s| s.into_iter().collect()).collect();

        // Messages flow along edges: v aggregates over its in-neighbors.
        let mut msg_src = Vec::new();
        let mut msg_dst = Vec::new();
        for (v, ins) in in_adj.iter().enumerate() {
            for &u in ins {
                msg_src.push(u);
                msg_dst.push(v);
            }
        }

        Ok(Graph {
            labels,
            directed,
            edges,
            out_adj,
            in_adj,
            und_adj,
            self_loops_dropped: self_loops,
            duplicates_dropped: duplicates,
            msg_src: msg_src.into(),
            msg_dst: msg_dst.into(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of distinct edges (an undirected edge counts once).
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn id_of(&self, label: &str) -> Option<usize> {
        // labels are sorted, but numeric and lexicographic orders differ
        self.labels.iter().position(|l| l == label)
    }

    /// Label to id lookup table.
    pub fn id_map(&self) -> BTreeMap<&str, usize> {
        self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
    }

    pub fn self_loops_dropped(&self) -> usize {
        self.self_loops_dropped
    }

    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    /// Sorted neighbor ids of `v` in the given direction.
    pub fn neighbors(&self, v: usize, direction: Direction) -> Result<&[usize]> {
        if v >= self.node_count() {
            return Err(Error::invalid(format!("node {v} out of range 0..{}", self.node_count())));
        }
        Ok(match direction {
            Direction::Out => &self.out_adj[v],
            Direction::In => &self.in_adj[v],
        })
    }

    pub(crate) fn out_adj(&self) -> &[Vec<usize>] {
        &self.out_adj
    }

    pub(crate) fn in_adj(&self) -> &[Vec<usize>] {
        &self.in_adj
    }

    /// Neighbors in the undirected projection.
    pub fn undirected_neighbors(&self, v: usize) -> &[usize] {
        &self.und_adj[v]
    }

    /// Message-passing edge lists `(src, dst)`: every `u` in `N(v)` sends to
    /// `v`. Ordered by destination, then source.
    pub fn message_edges(&self) -> (Arc<[usize]>, Arc<[usize]>) {
        (self.msg_src.clone(), self.msg_dst.clone())
    }

    /// Size of the aggregation neighborhood of each node.
    pub fn in_degrees(&self) -> Vec<usize> {
        self.in_adj.iter().map(Vec::len).collect()
    }

    /// Relabel node `v` as `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        if perm.len() != n || perm.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::invalid("not a permutation"));
        }
        let edges: Vec<_> = self.edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
        Graph::from_edges(n, &edges, self.directed)
    }

    /// Text form accepted by [`load_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut s = String::from(if self.directed { "# directed\n" } else { "# undirected\n" });
        for &(u, v) in &self.edges {
            s.push_str(&self.labels[u]);
            s.push(' ');
            s.push_str(&self.labels[v]);
            s.push('\n');
        }
        s
    }
}

/// Parse an edge list: one `u v` pair per line, whitespace separated.
///
/// Blank lines and lines starting with `#` are skipped, except that a
/// `# directed` / `directed` header (or `undirected`) before the first edge
/// sets the orientation. Undirected is the default.
pub fn load_edge_list(source: &str) -> Result<Graph> {
    load_edge_list_with_nodes(source, std::iter::empty::<&str>())
}

/// As [`load_edge_list`], also registering `extra` node labels that may not
/// appear in any edge.
pub fn load_edge_list_with_nodes<'a>(
    source: &str,
    extra: impl IntoIterator<Item = &'a str>,
) -> Result<Graph> {
    let mut directed = false;
    let mut seen_edge = false;
    let mut pairs: Vec<(String, String)> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let header = line.trim_start_matches('#').trim();
        if !seen_edge && (header == "directed" || header == "undirected") {
            directed = header == "directed";
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match (tok.next(), tok.next(), tok.next()) {
            (Some(a), Some(b), None) => pairs.push((a.to_string(), b.to_string())),
            _ => {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected two node ids, got {line:?}"),
                })
            }
        }
        seen_edge = true;
    }

    let mut labels: BTreeSet<String> = extra.into_iter().map(str::to_string).collect();
    for (a, b) in &pairs {
        labels.insert(a.clone());
        labels.insert(b.clone());
    }
    if labels.is_empty() {
        return Err(Error::invalid("empty edge list"));
    }
    let mut labels: Vec<String> = labels.into_iter().collect();
    sort_labels(&mut labels);
    let index: BTreeMap<&str, usize> =
        labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let edges: Vec<(usize, usize)> = pairs
        .iter()
        .map(|(a, b)| (index[a.as_str()], index[b.as_str()]))
        .collect();
    Graph::build(labels, &edges, directed)
}
