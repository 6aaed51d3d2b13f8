use std::sync::Arc;

use super::{Activation, BaseModel, BoundParams, GateSquash, LayerVars, ModelConfig, ParameterStore};
use crate::datasets::Cascade;
use crate::diffcore::{logistic, Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::graph::{Graph, StructuralFeatures};

/// LeakyReLU slope used inside GAT attention scores.
pub const ATTENTION_SLOPE: f64 = 0.2;

/// Graph-derived constants shared by every forward pass.
#[derive(Clone, Debug)]
pub struct GraphContext {
    pub node_count: usize,
    pub src: Arc<[usize]>,
    pub dst: Arc<[usize]>,
    /// `1 / sqrt((deg_u + 1)(deg_v + 1))` per message edge.
    pub gcn_norm: Tensor,
    pub features: Tensor,
}

impl GraphContext {
    pub fn new(graph: &Graph, features: &StructuralFeatures) -> Result<Self> {
        let n = graph.node_count();
        if features.node_count() != n {
            return Err(Error::shape("graph_context", format!("{} feature rows for {n} nodes", features.node_count())));
        }
        let (src, dst) = graph.message_edges();
        let deg = graph.in_degrees();
        let norm = src
            .iter()
            .zip(dst.iter())
            .map(|(&u, &v)| 1.0 / (((deg[u] + 1) * (deg[v] + 1)) as f64).sqrt())
            .collect();
        Ok(GraphContext {
            node_count: n,
            src,
            dst,
            gcn_norm: Tensor::vector(norm),
            features: features.matrix().clone(),
        })
    }

    pub fn edge_count(&self) -> usize {
        self.src.len()
    }
}

/// Gate value for one ordered pair: `beta . (W x_u || W x_v)`, where `u` is
/// the sending neighbor. `Softmax` returns the raw score, since
/// normalization needs the whole neighborhood.
pub fn gate(x_u: &[f64], x_v: &[f64], w: &Tensor, beta: &Tensor, squash: GateSquash) -> Result<f64> {
    let (out, inp) = match *w.shape() {
        [o, i] => (o, i),
        ref s => return Err(Error::shape("gate", format!("weight {s:?}"))),
    };
    if x_u.len() != inp || x_v.len() != inp || beta.shape() != [2, out] {
        return Err(Error::shape(
            "gate",
            format!("x {} / {} with W {:?} and beta {:?}", x_u.len(), x_v.len(), w.shape(), beta.shape()),
        ));
    }
    let proj = |x: &[f64], row: usize| -> f64 {
        (0..out)
            .map(|j| beta.get2(row, j) * w.row(j).iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    };
    let raw = proj(x_u, 0) + proj(x_v, 1);
    Ok(match squash {
        GateSquash::Sigmoid => logistic(raw),
        GateSquash::Raw | GateSquash::Softmax => raw,
    })
}

/// Gate values for every message edge `[E]`.
pub fn edge_gates(tape: &mut Tape, ctx: &GraphContext, x: Var, w: Var, beta: Var, squash: GateSquash) -> Result<Var> {
    let raw = pair_scores(tape, ctx, x, w, beta)?;
    match squash {
        GateSquash::Raw => Ok(raw),
        GateSquash::Sigmoid => tape.sigmoid(raw),
        GateSquash::Softmax => tape.segment_softmax(raw, ctx.dst.clone(), ctx.node_count),
    }
}

/// `beta[0] . (W x_src) + beta[1] . (W x_dst)` per edge.
fn pair_scores(tape: &mut Tape, ctx: &GraphContext, x: Var, w: Var, beta: Var) -> Result<Var> {
    let h = tape.matmul_nt(x, w)?;
    project_pairs(tape, ctx, h, beta)
}

fn project_pairs(tape: &mut Tape, ctx: &GraphContext, h: Var, beta: Var) -> Result<Var> {
    let scores = tape.matmul_nt(h, beta)?;
    let from = tape.select_col(scores, 0)?;
    let to = tape.select_col(scores, 1)?;
    let a = tape.gather_rows(from, ctx.src.clone())?;
    let b = tape.gather_rows(to, ctx.dst.clone())?;
    tape.add(a, b)
}

/// GAT attention over each receiving node's neighborhood.
fn attention(tape: &mut Tape, ctx: &GraphContext, h: Var, att: Var) -> Result<Var> {
    let raw = project_pairs(tape, ctx, h, att)?;
    let act = tape.leaky_relu(raw, ATTENTION_SLOPE)?;
    tape.segment_softmax(act, ctx.dst.clone(), ctx.node_count)
}

fn activate(tape: &mut Tape, x: Var, act: Activation) -> Result<Var> {
    match act {
        Activation::Relu => tape.relu(x),
        Activation::Tanh => tape.tanh(x),
    }
}

/// Representations entering a layer. `s` is present for the state model.
#[derive(Clone, Copy, Debug)]
pub struct LayerState {
    pub c: Var,
    pub p: Var,
    pub s: Option<Var>,
}

/// Edge weights for the base model on one side, before gating.
fn base_weights(
    tape: &mut Tape,
    ctx: &GraphContext,
    cfg: &ModelConfig,
    layer: &LayerVars,
    h: Var,
    cascade_side: bool,
) -> Result<Var> {
    let norm = tape.constant(ctx.gcn_norm.clone());
    match cfg.base {
        BaseModel::Gcn => Ok(norm),
        BaseModel::Gat => {
            let (ac, ap) = layer.attention.ok_or_else(|| Error::invalid("GAT layer without attention vectors"))?;
            attention(tape, ctx, h, if cascade_side { ac } else { ap })
        }
        BaseModel::StateGnn => {
            let (_, scale) = layer.state.ok_or_else(|| Error::invalid("state layer without influence weights"))?;
            tape.scale_by(norm, scale)
        }
    }
}

/// Combine base weights with an optional gate: the GCN variant uses the gate
/// alone, the others multiply it into the base weight.
fn gated_weights(tape: &mut Tape, cfg: &ModelConfig, base: Var, gate: Option<Var>) -> Result<Var> {
    match (gate, cfg.base) {
        (None, _) => Ok(base),
        (Some(g), BaseModel::Gcn) => Ok(g),
        (Some(g), _) => tape.mul(g, base),
    }
}

/// `act(W x_v + W * sum_u weight_uv x_u)`.
fn combine(tape: &mut Tape, ctx: &GraphContext, x: Var, w: Var, weights: Var, act: Activation) -> Result<Var> {
    let h = tape.matmul_nt(x, w)?;
    let agg = tape.edge_aggregate(weights, h, ctx.src.clone(), ctx.dst.clone())?;
    let pre = tape.add(h, agg)?;
    activate(tape, pre, act)
}

/// Personality-side update. `c` feeds the cascade gate when gating is on.
pub fn personality_step(
    tape: &mut Tape,
    ctx: &GraphContext,
    cfg: &ModelConfig,
    layer: &LayerVars,
    c: Option<Var>,
    p: Var,
) -> Result<Var> {
    let gate = match (&layer.gate, c) {
        (Some(g), Some(c)) => Some(edge_gates(tape, ctx, c, g.w_cg, g.beta_cg, cfg.gate_squash)?),
        (Some(_), None) => return Err(Error::invalid("gated personality update needs cascade representations")),
        (None, _) => None,
    };
    let h_base = if cfg.base == BaseModel::Gat { tape.matmul_nt(p, layer.w_p)? } else { p };
    let base = base_weights(tape, ctx, cfg, layer, h_base, false)?;
    let weights = gated_weights(tape, cfg, base, gate)?;
    combine(tape, ctx, p, layer.w_p, weights, cfg.activation)
}

/// Cascade-side update (and the state update for the state model).
pub fn cascade_step(
    tape: &mut Tape,
    ctx: &GraphContext,
    cfg: &ModelConfig,
    layer: &LayerVars,
    input: &LayerState,
) -> Result<(Var, Option<Var>)> {
    let gate = match &layer.gate {
        Some(g) => Some(edge_gates(tape, ctx, input.p, g.w_pg, g.beta_pg, cfg.gate_squash)?),
        None => None,
    };
    let h_base = if cfg.base == BaseModel::Gat { tape.matmul_nt(input.c, layer.w_c)? } else { input.c };
    let base = base_weights(tape, ctx, cfg, layer, h_base, true)?;
    let edge_w = gated_weights(tape, cfg, base, gate)?;

    match (cfg.base, input.s) {
        (BaseModel::StateGnn, Some(s)) => {
            // cascade messages only leave active senders
            let s_src = tape.gather_rows(s, ctx.src.clone())?;
            let msg_w = tape.mul(edge_w, s_src)?;
            let c_next = combine(tape, ctx, input.c, layer.w_c, msg_w, cfg.activation)?;
            let (readout, _) = layer.state.ok_or_else(|| Error::invalid("state layer without influence weights"))?;
            let infl = tape.matmul_nt(input.c, readout)?;
            let infl = tape.select_col(infl, 0)?;
            let s_next = state_layer(tape, ctx, s, infl, edge_w)?;
            Ok((c_next, Some(s_next)))
        }
        (BaseModel::StateGnn, None) => Err(Error::invalid("state model layer called without states")),
        _ => Ok((combine(tape, ctx, input.c, layer.w_c, edge_w, cfg.activation)?, None)),
    }
}

/// One interleaved step of both networks.
pub fn coupled_layer(
    tape: &mut Tape,
    ctx: &GraphContext,
    cfg: &ModelConfig,
    layer: &LayerVars,
    input: &LayerState,
) -> Result<LayerState> {
    let (c, s) = cascade_step(tape, ctx, cfg, layer, input)?;
    let p = personality_step(tape, ctx, cfg, layer, Some(input.c), input.p)?;
    Ok(LayerState { c, p, s })
}

/// Activation-state update
/// `s_v' = s_v + (1 - s_v) * sigmoid(sum_u g_uv s_u infl_u)`, applied only
/// where the weighted active mass `sum_u g_uv s_u` is positive.
pub fn state_layer(tape: &mut Tape, ctx: &GraphContext, s: Var, influence: Var, edge_w: Var) -> Result<Var> {
    let n = ctx.node_count;
    let sv = tape.value(s).data().to_vec();
    if sv.len() != n {
        return Err(Error::shape("state_layer", format!("{} states for {n} nodes", sv.len())));
    }
    if let Some(bad) = sv.iter().find(|v| !(-1e-12..=1.0 + 1e-12).contains(*v)) {
        return Err(Error::invalid(format!("activation state {bad} outside [0, 1]")));
    }
    let mut mass = vec![0.0; n];
    {
        let w = tape.value(edge_w).data();
        for (e, (&u, &v)) in ctx.src.iter().zip(ctx.dst.iter()).enumerate() {
            mass[v] += w[e] * sv[u];
        }
    }
    let mask = tape.constant(Tensor::vector(mass.iter().map(|&m| if m > 0.0 { 1.0 } else { 0.0 }).collect()));

    let y = tape.mul(s, influence)?;
    let x = tape.edge_aggregate(edge_w, y, ctx.src.clone(), ctx.dst.clone())?;
    let prob = tape.sigmoid(x)?;
    let neg = tape.scale(s, -1.0)?;
    let remaining = tape.add_scalar(neg, 1.0)?;
    let upd = tape.mul(remaining, prob)?;
    let upd = tape.mul(upd, mask)?;
    tape.add(s, upd)
}

/// Layer-0 cascade input: embedding, structural features and, when the
/// model uses it, the membership flag of the observed prefix.
fn cascade_input(
    tape: &mut Tape,
    ctx: &GraphContext,
    cfg: &ModelConfig,
    bound: &BoundParams,
    membership: &[f64],
) -> Result<Var> {
    let feats = tape.constant(ctx.features.clone());
    if cfg.has_membership_slot() {
        let flag = tape.constant(Tensor::matrix(ctx.node_count, 1, membership.to_vec())?);
        tape.concat(&[bound.embed_c, feats, flag], 1)
    } else {
        tape.concat(&[bound.embed_c, feats], 1)
    }
}

fn membership(ctx: &GraphContext, cascade: &Cascade) -> Result<Vec<f64>> {
    let j = cascade
        .observed_len()
        .ok_or_else(|| Error::invalid(format!("cascade {} has no observed prefix", cascade.id)))?;
    let mut m = vec![0.0; ctx.node_count];
    for &u in &cascade.adopters()[..j] {
        if u >= ctx.node_count {
            return Err(Error::invalid(format!("cascade {} references node {u}", cascade.id)));
        }
        m[u] = 1.0;
    }
    Ok(m)
}

/// Personality network run on its own; valid only without gates, where it
/// does not depend on the cascade.
pub fn personality_branch(tape: &mut Tape, ctx: &GraphContext, cfg: &ModelConfig, bound: &BoundParams) -> Result<Vec<Var>> {
    if cfg.gated {
        return Err(Error::invalid("gated personality network depends on the cascade"));
    }
    let mut ps = vec![bound.embed_p];
    for layer in &bound.layers {
        let p = personality_step(tape, ctx, cfg, layer, None, *ps.last().unwrap())?;
        ps.push(p);
    }
    Ok(ps)
}

/// `q_hat = ReLU(W_pp p^K)`, `[n, 5]`.
pub fn personality_head(tape: &mut Tape, bound: &BoundParams, p_last: Var) -> Result<Var> {
    let z = tape.matmul_nt(p_last, bound.w_pp)?;
    tape.relu(z)
}

/// Tape handles of one cascade's forward pass.
#[derive(Clone, Debug)]
pub struct ForwardVars {
    pub c: Var,
    pub p: Var,
    pub size: Var,
    pub personality: Var,
    /// `s^0..=s^K` for the state model, empty otherwise.
    pub states: Vec<Var>,
}

/// Full K-layer forward for one cascade. `shared_p` supplies a
/// precomputed personality branch for ungated models.
pub fn forward_cascade_vars(
    tape: &mut Tape,
    ctx: &GraphContext,
    cfg: &ModelConfig,
    bound: &BoundParams,
    cascade: &Cascade,
    shared_p: Option<&[Var]>,
) -> Result<ForwardVars> {
    let member = membership(ctx, cascade)?;
    let c0 = cascade_input(tape, ctx, cfg, bound, &member)?;
    let s0 = match cfg.base {
        BaseModel::StateGnn => Some(tape.constant(Tensor::vector(member))),
        _ => None,
    };
    let mut state = LayerState { c: c0, p: bound.embed_p, s: s0 };
    let mut states: Vec<Var> = s0.into_iter().collect();
    for (k, layer) in bound.layers.iter().enumerate() {
        let (c, s) = cascade_step(tape, ctx, cfg, layer, &state)?;
        let p = match shared_p {
            Some(ps) if !cfg.gated => ps[k + 1],
            _ => personality_step(tape, ctx, cfg, layer, Some(state.c), state.p)?,
        };
        state = LayerState { c, p, s };
        if let Some(s) = s {
            states.push(s);
        }
    }

    let size = match cfg.base {
        BaseModel::StateGnn => tape.sum(state.s.expect("state model carries states"))?,
        _ => {
            let logits = tape.matmul_nt(state.c, bound.w_cp)?;
            let probs = tape.sigmoid(logits)?;
            tape.sum(probs)?
        }
    };
    let personality = personality_head(tape, bound, state.p)?;
    Ok(ForwardVars { c: state.c, p: state.p, size, personality, states })
}

/// Predicted sizes for a batch plus the batch-mean personality prediction.
#[derive(Clone, Debug)]
pub struct BatchVars {
    pub sizes: Vec<Var>,
    pub personality: Var,
}

pub fn forward_batch(
    tape: &mut Tape,
    ctx: &GraphContext,
    cfg: &ModelConfig,
    bound: &BoundParams,
    cascades: &[&Cascade],
) -> Result<BatchVars> {
    if cascades.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    if !cfg.gated {
        let ps = personality_branch(tape, ctx, cfg, bound)?;
        let personality = personality_head(tape, bound, *ps.last().unwrap())?;
        let sizes = cascades
            .iter()
            .map(|c| forward_cascade_vars(tape, ctx, cfg, bound, c, Some(&ps)).map(|f| f.size))
            .collect::<Result<Vec<_>>>()?;
        return Ok(BatchVars { sizes, personality });
    }
    let mut sizes = Vec::with_capacity(cascades.len());
    let mut total: Option<Var> = None;
    for c in cascades {
        let f = forward_cascade_vars(tape, ctx, cfg, bound, c, None)?;
        sizes.push(f.size);
        total = Some(match total {
            None => f.personality,
            Some(t) => tape.add(t, f.personality)?,
        });
    }
    let personality = if cascades.len() == 1 {
        total.unwrap()
    } else {
        tape.scale(total.unwrap(), 1.0 / cascades.len() as f64)?
    };
    Ok(BatchVars { sizes, personality })
}

/// Plain values of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardResult {
    pub c: Tensor,
    pub p: Tensor,
    pub size: f64,
    pub personality: Tensor,
    pub states: Vec<Tensor>,
}

/// Inference-only forward of one cascade.
pub fn forward_cascade(store: &ParameterStore, ctx: &GraphContext, cascade: &Cascade) -> Result<ForwardResult> {
    let mut tape = Tape::new();
    let bound = store.bind_frozen(&mut tape);
    let f = forward_cascade_vars(&mut tape, ctx, &store.config, &bound, cascade, None)?;
    Ok(ForwardResult {
        c: tape.value(f.c).clone(),
        p: tape.value(f.p).clone(),
        size: tape.value(f.size).item(),
        personality: tape.value(f.personality).clone(),
        states: f.states.iter().map(|s| tape.value(*s).clone()).collect(),
    })
}
