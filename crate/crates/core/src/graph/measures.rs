use super::Graph;
use crate::diffcore::Tensor;
use crate::error::{Error, Result};

pub const FEATURE_NAMES: [&str; 6] = [
    "coreness",
    "pagerank",
    "hub",
    "authority",
    "eigenvector",
    "clustering",
];

const MAX_ITERATIONS: usize = 10_000;
const TOLERANCE: f64 = 1e-10;
const DAMPING: f64 = 0.85;

/// `node_count x 6` matrix, columns in [`FEATURE_NAMES`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuralFeatures {
    matrix: Tensor,
}

impl StructuralFeatures {
    pub fn from_matrix(matrix: Tensor) -> Result<Self> {
        if matrix.shape().len() != 2 || matrix.shape()[1] != FEATURE_NAMES.len() {
            return Err(Error::shape("structural_features", format!("{:?}", matrix.shape())));
        }
        Ok(StructuralFeatures { matrix })
    }

    pub fn matrix(&self) -> &Tensor {
        &self.matrix
    }

    pub fn node_count(&self) -> usize {
        self.matrix.rows()
    }

    pub fn row(&self, v: usize) -> &[f64] {
        self.matrix.row(v)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.matrix.get2(i, j)).collect()
    }

    /// CSV with header `node,coreness,...` and one row per node label.
    pub fn to_csv(&self, graph: &Graph) -> String {
        let mut s = format!("node,{}\n", FEATURE_NAMES.join(","));
        for v in 0..self.node_count() {
            s.push_str(graph.label(v));
            for x in self.row(v) {
                s.push(',');
                s.push_str(&x.to_string());
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str, graph: &Graph) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let expected = format!("node,{}", FEATURE_NAMES.join(","));
        match lines.next() {
            Some((_, h)) if h.trim() == expected => {}
            _ => return Err(Error::Parse { line: 1, msg: format!("expected header {expected:?}") }),
        }
        let ids = graph.id_map();
        let n = graph.node_count();
        let mut data = vec![0.0; n * 6];
        let mut seen = vec![false; n];
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if cols.len() != 7 {
                return Err(err(format!("expected 7 columns, got {}", cols.len())));
            }
            let v = *ids
                .get(cols[0])
                .ok_or_else(|| err(format!("unknown node {:?}", cols[0])))?;
            if seen[v] {
                return Err(err(format!("node {:?} listed twice", cols[0])));
            }
            seen[v] = true;
            for (j, c) in cols[1..].iter().enumerate() {
                data[v * 6 + j] = c.parse().map_err(|_| err(format!("bad number {c:?}")))?;
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("features missing for node {:?}", graph.label(v))));
        }
        StructuralFeatures::from_matrix(Tensor::matrix(n, 6, data)?)
    }
}

/// All six measures for every node.
pub fn structural_features(graph: &Graph) -> Result<StructuralFeatures> {
    let n = graph.node_count();
    let core = coreness(graph);
    let pr = pagerank(graph)?;
    let (hub, auth) = hits(graph)?;
    let eig = eigenvector_centrality(graph)?;
    let clust = clustering_coefficient(graph);
    let mut data = Vec::with_capacity(n * 6);
    for v in 0..n {
        data.extend_from_slice(&[core[v] as f64, pr[v], hub[v], auth[v], eig[v], clust[v]]);
    }
    StructuralFeatures::from_matrix(Tensor::matrix(n, 6, data)?)
}

/// k-core number of every node by repeated removal of a minimum-degree node,
/// on the undirected projection.
pub fn coreness(graph: &Graph) -> Vec<usize> {
    let n = graph.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| graph.undirected_neighbors(v).len()).collect();
    let mut removed = vec![false; n];
    let mut core = vec![0; n];
    let mut k = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| !removed[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("a node remains");
        k = k.max(degree[v]);
        core[v] = k;
        removed[v] = true;
        for &u in graph.undirected_neighbors(v) {
            if !removed[u] {
                degree[u] -= 1;
            }
        }
    }
    core
}

/// PageRank along edge direction, damping 0.85; nodes without out-edges
/// spread their mass uniformly.
pub fn pagerank(graph: &Graph) -> Result<Vec<f64>> {
    let n = graph.node_count();
    let out = graph.out_adj();
    let ins = graph.in_adj();
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..MAX_ITERATIONS {
        let dangling: f64 = (0..n).filter(|&u| out[u].is_empty()).map(|u| x[u]).sum();
        let base = (1.0 - DAMPING) / n as f64 + DAMPING * dangling / n as f64;
        let next: Vec<f64> = (0..n)
            .map(|v| base + DAMPING * ins[v].iter().map(|&u| x[u] / out[u].len() as f64).sum::<f64>())
            .collect();
        let delta: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if delta < TOLERANCE {
            let total: f64 = x.iter().sum();
            return Ok(x.into_iter().map(|v| v / total).collect());
        }
    }
    Err(Error::NotConverged { measure: "pagerank", iterations: MAX_ITERATIONS })
}

fn normalize_l2(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    } else {
        let u = 1.0 / (x.len() as f64).sqrt();
        x.iter_mut().for_each(|v| *v = u);
    }
}

fn l1_delta(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// HITS `(hub, authority)` scores along edge direction, each unit-L2.
pub fn hits(graph: &Graph) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = graph.node_count();
    let out = graph.out_adj();
    let ins = graph.in_adj();
    let mut hub = vec![1.0; n];
    normalize_l2(&mut hub);
    let mut auth = vec![0.0; n];
    for _ in 0..MAX_ITERATIONS {
        let mut next_auth: Vec<f64> = (0..n).map(|v| ins[v].iter().map(|&u| hub[u]).sum()).collect();
        normalize_l2(&mut next_auth);
        let mut next_hub: Vec<f64> = (0..n).map(|u| out[u].iter().map(|&v| next_auth[v]).sum()).collect();
        normalize_l2(&mut next_hub);
        let delta = l1_delta(&next_hub, &hub) + l1_delta(&next_auth, &auth);
        hub = next_hub;
        auth = next_auth;
        if delta < TOLERANCE {
            return Ok((hub, auth));
        }
    }
    Err(Error::NotConverged { measure: "hits", iterations: MAX_ITERATIONS })
}

/// Leading eigenvector of the undirected adjacency, unit-L2 and nonnegative.
///
/// Iterates with `A + I` so bipartite graphs, whose spectrum is symmetric,
/// still converge.
pub fn eigenvector_centrality(graph: &Graph) -> Result<Vec<f64>> {
    let n = graph.node_count();
    let mut x = vec![1.0; n];
    normalize_l2(&mut x);
    for _ in 0..MAX_ITERATIONS {
        let mut next: Vec<f64> = (0..n)
            .map(|v| x[v] + graph.undirected_neighbors(v).iter().map(|&u| x[u]).sum::<f64>())
            .collect();
        normalize_l2(&mut next);
        let delta = l1_delta(&next, &x);
        x = next;
        if delta < TOLERANCE {
            return Ok(x);
        }
    }
    Err(Error::NotConverged { measure: "eigenvector", iterations: MAX_ITERATIONS })
}

/// Local clustering coefficient on the undirected projection; 0 below degree 2.
pub fn clustering_coefficient(graph: &Graph) -> Vec<f64> {
    (0..graph.node_count())
        .map(|v| {
            let nb = graph.undirected_neighbors(v);
            let d = nb.len();
            if d < 2 {
                return 0.0;
            }
            let mut triangles = 0usize;
            for (i, &a) in nb.iter().enumerate() {
                let na = graph.undirected_neighbors(a);
                triangles += nb[i + 1..].iter().filter(|b| na.binary_search(b).is_ok()).count();
            }
            triangles as f64 / (d * (d - 1) / 2) as f64
        })
        .collect()
}
