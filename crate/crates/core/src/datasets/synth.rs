use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{split, Cascade, Dataset, PersonalityVector, EXTRAVERSION, NEUROTICISM};
use crate::error::{Error, Result};
use crate::graph::{structural_features, Graph};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GraphModel {
    /// Preferential attachment, `m` edges per new node.
    BarabasiAlbert { m: usize },
    /// Every pair linked independently with probability `p`.
    ErdosRenyi { p: f64 },
}

/// Parameters of the planted-personality cascade generator.
///
/// Node `v` is activated by an active neighbor with probability
/// `clamp(base_prob + w_e * E~_v - w_n * N~_v, 0, 1)`, where `E~`, `N~` are
/// extraversion and neuroticism min-max scaled to `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub graph_model: GraphModel,
    pub nodes: usize,
    pub cascades: usize,
    pub base_prob: f64,
    pub w_e: f64,
    pub w_n: f64,
    pub trait_low: f64,
    pub trait_high: f64,
    pub seeds_per_cascade: usize,
    pub val_ratio: f64,
    pub test_ratio: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            graph_model: GraphModel::BarabasiAlbert { m: 2 },
            nodes: 300,
            cascades: 200,
            base_prob: 0.1,
            w_e: 0.4,
            w_n: 0.4,
            trait_low: 20.0,
            trait_high: 80.0,
            seeds_per_cascade: 2,
            val_ratio: 0.15,
            test_ratio: 0.15,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::invalid(m));
        if self.nodes < 2 {
            return bad(format!("node count must be >= 2, got {}", self.nodes));
        }
        match self.graph_model {
            GraphModel::BarabasiAlbert { m } if m == 0 || m >= self.nodes => {
                return bad(format!("attachment count m={m} must be in 1..{}", self.nodes))
            }
            GraphModel::ErdosRenyi { p } if !(0.0..=1.0).contains(&p) => {
                return bad(format!("edge probability {p} outside [0, 1]"))
            }
            _ => {}
        }
        if self.cascades == 0 {
            return bad("cascade count must be positive".into());
        }
        if self.w_e < 0.0 || self.w_n < 0.0 || !self.base_prob.is_finite() {
            return bad("trait weights must be >= 0 and base probability finite".into());
        }
        if !(self.trait_low > 0.0 && self.trait_high > self.trait_low && self.trait_high.is_finite()) {
            return bad(format!("trait range [{}, {}] must be positive and non-empty", self.trait_low, self.trait_high));
        }
        if self.seeds_per_cascade == 0 || self.seeds_per_cascade > self.nodes {
            return bad(format!("seed count {} outside 1..={}", self.seeds_per_cascade, self.nodes));
        }
        Ok(())
    }
}

fn barabasi_albert(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let core = (m + 1).min(n);
    let mut edges = Vec::new();
    // endpoint multiset: sampling from it is degree-proportional
    let mut ends = Vec::new();
    for u in 0..core {
        for v in u + 1..core {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    for t in core..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m {
            let v = ends[rng.random_range(0..ends.len())];
            if !targets.contains(&v) {
                targets.push(v);
            }
        }
        for v in targets {
            edges.push((v, t));
            ends.extend([v, t]);
        }
    }
    edges
}

fn erdos_renyi(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn min_max(values: impl Iterator<Item = f64> + Clone) -> impl Fn(f64) -> f64 {
    let lo = values.clone().fold(f64::INFINITY, f64::min);
    let hi = values.fold(f64::NEG_INFINITY, f64::max);
    move |x| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 }
}

/// Per-node activation probability implied by the planted trait weights.
pub fn trait_activation_probs(personalities: &[PersonalityVector], base: f64, w_e: f64, w_n: f64) -> Vec<f64> {
    let e = min_max(personalities.iter().map(|p| p.traits()[EXTRAVERSION]));
    let n = min_max(personalities.iter().map(|p| p.traits()[NEUROTICISM]));
    personalities
        .iter()
        .map(|p| {
            let t = p.traits();
            (base + w_e * e(t[EXTRAVERSION]) - w_n * n(t[NEUROTICISM])).clamp(0.0, 1.0)
        })
        .collect()
}

/// One uniform draw per directed traversal `u -> v`, indexed along the
/// graph's out-adjacency lists.
#[derive(Clone, Debug)]
pub struct EdgeUniforms {
    offsets: Vec<usize>,
    draws: Vec<f64>,
}

impl EdgeUniforms {
    fn get(&self, u: usize, k: usize) -> f64 {
        self.draws[self.offsets[u] + k]
    }
}

pub fn live_edge_uniforms(graph: &Graph, rng: &mut impl Rng) -> EdgeUniforms {
    let mut offsets = Vec::with_capacity(graph.node_count() + 1);
    let mut total = 0;
    for adj in graph.out_adj() {
        offsets.push(total);
        total += adj.len();
    }
    offsets.push(total);
    let draws = (0..total).map(|_| rng.random::<f64>()).collect();
    EdgeUniforms { offsets, draws }
}

/// Independent-cascade run with pre-drawn edge uniforms: active `u` activates
/// inactive out-neighbor `v` iff its draw is below `probs[v]`. Returns the
/// adopters by round, ties within a round broken by node id.
pub fn simulate_cascade(graph: &Graph, probs: &[f64], seeds: &[usize], uniforms: &EdgeUniforms) -> Vec<usize> {
    let mut active = vec![false; graph.node_count()];
    let mut frontier: Vec<usize> = seeds.to_vec();
    frontier.sort_unstable();
    frontier.dedup();
    for &s in &frontier {
        active[s] = true;
    }
    let mut order = frontier.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &u in &frontier {
            for (k, &v) in graph.out_adj()[u].iter().enumerate() {
                if !active[v] && uniforms.get(u, k) < probs[v] {
                    active[v] = true;
                    next.push(v);
                }
            }
        }
        next.sort_unstable();
        order.extend_from_slice(&next);
        frontier = next;
    }
    order
}

fn cascade_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Sample a graph, personalities and cascades. Cascade `i` draws from its own
/// RNG stream, so changing trait weights leaves seeds and edge draws intact.
pub fn synth_generate(config: &SynthConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.nodes;
    let edges = match config.graph_model {
        GraphModel::BarabasiAlbert { m } => barabasi_albert(n, m, &mut rng),
        GraphModel::ErdosRenyi { p } => erdos_renyi(n, p, &mut rng),
    };
    let graph = Graph::from_edges(n, &edges, false)?;

    let personalities = (0..n)
        .map(|_| {
            let mut t = [0.0; 5];
            for x in &mut t {
                *x = rng.random_range(config.trait_low..config.trait_high);
            }
            PersonalityVector::new(t)
        })
        .collect::<Result<Vec<_>>>()?;
    let probs = trait_activation_probs(&personalities, config.base_prob, config.w_e, config.w_n);

    let mut cascades = Vec::with_capacity(config.cascades);
    for i in 0..config.cascades {
        let mut crng = cascade_rng(config.seed, i);
        let seeds = sample(&mut crng, n, config.seeds_per_cascade).into_vec();
        let uniforms = live_edge_uniforms(&graph, &mut crng);
        let adopters = simulate_cascade(&graph, &probs, &seeds, &uniforms);
        cascades.push(Cascade::new(format!("c{i}"), adopters)?);
    }
    if cascades.iter().all(|c| c.total_size() == 1) {
        return Err(Error::invalid("every generated cascade has size 1; raise the propagation probability"));
    }

    let features = structural_features(&graph)?;
    let tags = split(cascades.len(), config.val_ratio, config.test_ratio, config.seed)?;
    Dataset::new(graph, features, cascades, personalities, tags)
}
