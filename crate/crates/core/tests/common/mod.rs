//! Independent oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use casper::datasets::{Cascade, Dataset, PersonalityVector, Split};
use casper::diffcore::{finite_diff_check, Tape, Tensor, Var};
use casper::error::Result;
use casper::graph::{structural_features, Graph, StructuralFeatures};
use casper::models::{forward_batch, BaseModel, GateSquash, GraphContext, ModelConfig, ParameterStore};
use casper::training::{cascade_loss_var, personality_loss_var, personality_targets, total_loss_var};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random graph on `n` nodes with edge density drawn per graph.
pub fn random_graph(n: usize, directed: bool, rng: &mut ChaCha8Rng) -> Graph {
    let p = rng.random_range(0.15..0.7);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (!directed && v < u) {
                continue;
            }
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges, directed).unwrap()
}

/// Connected-ish undirected graph: a random spanning tree plus extra edges.
pub fn random_connected_graph(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Graph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for _ in 0..extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, &edges, false).unwrap()
}

pub fn permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Symmetric 0/1 adjacency of the undirected projection.
pub fn undirected_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// Core number as the largest minimum degree over all induced subgraphs
/// containing the node.
pub fn brute_coreness(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let a = undirected_matrix(g);
    let mut core = vec![0; n];
    for mask in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
        let min_deg = members.iter().map(|&v| members.iter().filter(|&&u| a[v][u]).count()).min().unwrap();
        for &v in &members {
            core[v] = core[v].max(min_deg);
        }
    }
    core
}

/// Closed neighbor pairs over all neighbor pairs, by direct enumeration.
pub fn brute_clustering(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let a = undirected_matrix(g);
    (0..n)
        .map(|v| {
            let (mut pairs, mut closed) = (0usize, 0usize);
            for x in 0..n {
                for y in x + 1..n {
                    if a[v][x] && a[v][y] {
                        pairs += 1;
                        closed += usize::from(a[x][y]);
                    }
                }
            }
            if pairs == 0 { 0.0 } else { closed as f64 / pairs as f64 }
        })
        .collect()
}

/// Power iteration on the explicit Google matrix.
pub fn dense_pagerank(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let directed = g.is_directed();
    let mut out = vec![vec![0.0; n]; n];
    for &(u, v) in g.edges() {
        out[u][v] = 1.0;
        if !directed {
            out[v][u] = 1.0;
        }
    }
    let d = 0.85;
    let mut google = vec![vec![0.0; n]; n];
    for u in 0..n {
        let deg: f64 = out[u].iter().sum();
        for v in 0..n {
            let follow = if deg > 0.0 { out[u][v] / deg } else { 1.0 / n as f64 };
            google[v][u] = d * follow + (1.0 - d) / n as f64;
        }
    }
    let mut x = vec![1.0 / n as f64; n];
    for _ in 0..20_000 {
        x = (0..n).map(|v| (0..n).map(|u| google[v][u] * x[u]).sum()).collect();
    }
    let s: f64 = x.iter().sum();
    x.iter().map(|v| v / s).collect()
}

/// Small synthetic dataset over `g` with random personalities and cascades
/// walked along graph edges.
pub fn tiny_dataset(g: Graph, cascades: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let n = g.node_count();
    let features = structural_features(&g).unwrap();
    let personalities = (0..n)
        .map(|_| {
            let mut t = [0.0; 5];
            for x in &mut t {
                *x = rng.random_range(20.0..80.0);
            }
            PersonalityVector::new(t).unwrap()
        })
        .collect();
    let mut list = Vec::new();
    for i in 0..cascades {
        let len = rng.random_range(2..=n.min(6));
        let mut order = permutation(n, rng);
        order.truncate(len);
        let c = Cascade::new(format!("c{i}"), order).unwrap();
        let j = rng.random_range(1..len);
        list.push(c.with_observed_len(j).unwrap());
    }
    let split = vec![Split::Train; cascades];
    Dataset::new(g, features, list, personalities, split).unwrap()
}

pub fn small_model(base: BaseModel, gated: bool, squash: GateSquash) -> ModelConfig {
    ModelConfig { base, gated, gate_squash: squash, layers: 2, embed_dim: 2, hidden_c: 3, hidden_p: 3, ..ModelConfig::default() }
}

/// Random perturbation of every parameter so gates and attention are active.
pub fn jitter(store: &mut ParameterStore, scale: f64, rng: &mut ChaCha8Rng) {
    for t in store.tensors_mut() {
        for x in t.data_mut() {
            *x += rng.random_range(-scale..scale);
        }
    }
}

/// `L_cas + lambda L_per` over every cascade of `data`, built on `tape`.
pub fn full_loss(
    tape: &mut Tape,
    store: &ParameterStore,
    vars: &[Var],
    ctx: &GraphContext,
    data: &Dataset,
    lambda: f64,
) -> Result<Var> {
    let bound = store.bound_from(vars.to_vec());
    let cascades: Vec<&Cascade> = data.cascades.iter().collect();
    let targets: Vec<f64> = cascades.iter().map(|c| c.total_size() as f64).collect();
    let out = forward_batch(tape, ctx, &store.config, &bound, &cascades)?;
    let l_cas = cascade_loss_var(tape, &out.sizes, &targets)?;
    let l_per = personality_loss_var(tape, out.personality, &personality_targets(data))?;
    total_loss_var(tape, l_cas, l_per, lambda)
}

/// True when central differences at `step` resolve the scalar built by
/// `build` on every coordinate of `params`, judged from function values
/// alone. Second differences at `step` and `step / 2` agree unless a kink
/// lies inside the step, and first differences at the two steps agree to
/// well under the check tolerance unless curvature or rounding dominates.
/// A nonzero first difference must also sit far above `eps * |f| / step`,
/// the quantum at which the difference of two rounded values moves.
pub fn differences_resolve<F>(params: &[Tensor], step: f64, mut build: F) -> bool
where
    F: FnMut(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut eval = |ps: &[Tensor]| {
        let mut tape = Tape::new();
        let vars: Vec<Var> = ps.iter().map(|p| tape.param(p.clone())).collect();
        let out = build(&mut tape, &vars).unwrap();
        tape.value(out).item()
    };
    let mut probe = params.to_vec();
    let f0 = eval(&probe);
    let quantum = f64::EPSILON * f0.abs() / step;
    for pi in 0..probe.len() {
        for k in 0..probe[pi].numel() {
            let orig = probe[pi].data()[k];
            let (mut d1, mut d2) = ([0.0; 2], [0.0; 2]);
            for (slot, h) in [step, step / 2.0].into_iter().enumerate() {
                probe[pi].data_mut()[k] = orig + h;
                let plus = eval(&probe);
                probe[pi].data_mut()[k] = orig - h;
                let minus = eval(&probe);
                d1[slot] = (plus - minus) / (2.0 * h);
                d2[slot] = (plus - 2.0 * f0 + minus) / (h * h);
            }
            probe[pi].data_mut()[k] = orig;
            let kink = (d2[0] - d2[1]).abs() > 1e-2 * d2[0].abs().max(d2[1].abs()) + 1e-4;
            let blurred = (d1[0] - d1[1]).abs() > 1e-5 * d1[0].abs().max(d1[1].abs()).max(1e-8);
            let coarse = d1[0] != 0.0 && d1[0].abs() < 1e5 * quantum;
            if kink || blurred || coarse {
                return false;
            }
        }
    }
    true
}

/// Worst finite-difference relative error of the full joint loss.
pub fn joint_loss_grad_error(store: &ParameterStore, ctx: &GraphContext, data: &Dataset, step: f64) -> Result<f64> {
    finite_diff_check(store.tensors(), step, |tape: &mut Tape, vars: &[Var]| full_loss(tape, store, vars, ctx, data, 1.0))
}

/// Features of the graph relabelled by `perm`, taken row-wise from `f`.
pub fn permute_rows(t: &Tensor, perm: &[usize]) -> Tensor {
    let (n, d) = (t.rows(), t.row_len());
    let mut data = vec![0.0; n * d];
    for v in 0..n {
        data[perm[v] * d..(perm[v] + 1) * d].copy_from_slice(t.row(v));
    }
    Tensor::matrix(n, d, data).unwrap()
}

pub fn permute_features(f: &StructuralFeatures, perm: &[usize]) -> StructuralFeatures {
    StructuralFeatures::from_matrix(permute_rows(f.matrix(), perm)).unwrap()
}

/// The same model with node-indexed parameters relabelled by `perm`.
pub fn permute_store(store: &ParameterStore, perm: &[usize]) -> ParameterStore {
    let named = store
        .names()
        .iter()
        .zip(store.tensors())
        .map(|(name, t)| {
            let t = if name.starts_with("embed.") { permute_rows(t, perm) } else { t.clone() };
            (name.clone(), t)
        })
        .collect();
    ParameterStore::from_parts(store.config.clone(), store.seed, store.node_count, named).unwrap()
}

/// Relabel `data` around the model's own predictions so the joint loss is
/// small. Each cascade gets the best of 24 random observed prefixes, the one
/// whose predicted size lies closest to an integer, padded to that size.
/// Every trait label is the mean prediction scaled by a factor in
/// `[0.99, 1.01]` (label 1 where the prediction is 0).
pub fn near_fit(store: &mut ParameterStore, ctx: &GraphContext, data: &mut Dataset, rng: &mut ChaCha8Rng) {
    let w = store.get_mut("head.w_pp").unwrap();
    w.data_mut().iter_mut().for_each(|x| *x = x.abs());
    let n = ctx.node_count;
    for c in &mut data.cascades {
        let mut best: Option<(f64, Vec<usize>, usize, usize)> = None;
        for _ in 0..24 {
            let order = permutation(n, rng);
            let j = rng.random_range(1..n.min(6));
            let prefix = Cascade::new(c.id.clone(), order[..j].to_vec()).unwrap().with_observed_len(j).unwrap();
            let predicted = casper::models::forward_cascade(store, ctx, &prefix).unwrap().size;
            let size = (predicted.round() as usize).clamp(j, n);
            let residual = (predicted - size as f64).abs() / size as f64;
            if best.as_ref().is_none_or(|b| residual < b.0) {
                best = Some((residual, order, j, size));
            }
        }
        let (_, order, j, size) = best.unwrap();
        *c = Cascade::new(c.id.clone(), order[..size].to_vec()).unwrap().with_observed_len(j).unwrap();
    }
    let all: Vec<usize> = (0..data.cascades.len()).collect();
    let (_, q) = casper::training::predict(store, data, ctx, &all).unwrap();
    data.personalities = (0..q.rows())
        .map(|v| {
            let mut t = [1.0; 5];
            for (x, &p) in t.iter_mut().zip(q.row(v)) {
                if p > 1e-6 {
                    *x = p * rng.random_range(0.99..1.01);
                }
            }
            PersonalityVector::new(t).unwrap()
        })
        .collect();
}

/// Gradient-check fixture on a 10-node graph: half-unit parameter jitter,
/// labels relabelled near the model's fit, redrawn until the joint loss is
/// below 1e-3 and central differences at the `1e-5` probe step resolve every
/// coordinate. Rounding noise in the loss grows with the residuals, and
/// directions whose gradient is exactly zero (softmax shifts, dead units)
/// measure that noise against the `1e-8` denominator floor, so the residuals
/// have to stay small.
pub fn gradient_fixture(
    base: BaseModel,
    gated: bool,
    squash: GateSquash,
    rng: &mut ChaCha8Rng,
) -> (ParameterStore, GraphContext, Dataset) {
    loop {
        let g = random_connected_graph(10, 8, rng);
        let mut data = tiny_dataset(g, 3, rng);
        let ctx = GraphContext::new(&data.graph, &data.features).unwrap();
        let mut store = ParameterStore::init(&small_model(base, gated, squash), &data.features, rng.random()).unwrap();
        jitter(&mut store, 0.5, rng);
        near_fit(&mut store, &ctx, &mut data, rng);
        let mut tape = Tape::new();
        let vars: Vec<Var> = store.tensors().iter().map(|t| tape.param(t.clone())).collect();
        let loss = full_loss(&mut tape, &store, &vars, &ctx, &data, 1.0).unwrap();
        if tape.value(loss).item() < 1e-3 && differences_resolve(store.tensors(), 1e-5, |t: &mut Tape, v: &[Var]| full_loss(t, &store, v, &ctx, &data, 1.0)) {
            return (store, ctx, data);
        }
    }
}
