use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{BaseModel, ModelConfig};
use crate::diffcore::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::graph::StructuralFeatures;

/// Standard deviation of the random embedding blocks.
pub const EMBED_STD: f64 = 0.1;

/// Every trainable array of one coupled model, in a fixed order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParameterStore {
    pub config: ModelConfig,
    pub seed: u64,
    pub node_count: usize,
    names: Vec<String>,
    tensors: Vec<Tensor>,
}

/// Tape handles for one layer's parameters.
#[derive(Clone, Debug)]
pub struct LayerVars {
    pub w_c: Var,
    pub w_p: Var,
    pub gate: Option<GateVars>,
    /// GAT attention vectors `[2, d]` for the cascade and personality sides.
    pub attention: Option<(Var, Var)>,
    /// State-model influence readout `[1, d_c^k]` and edge scale `[1]`.
    pub state: Option<(Var, Var)>,
}

#[derive(Clone, Debug)]
pub struct GateVars {
    pub w_cg: Var,
    pub beta_cg: Var,
    pub w_pg: Var,
    pub beta_pg: Var,
}

/// All parameters registered on one tape.
#[derive(Clone, Debug)]
pub struct BoundParams {
    pub layers: Vec<LayerVars>,
    pub w_cp: Var,
    pub w_pp: Var,
    pub embed_c: Var,
    pub embed_p: Var,
    /// Handles in store order, for gradient collection.
    pub all: Vec<Var>,
}

fn glorot(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let a = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-a..=a)).collect();
    Tensor::matrix(rows, cols, data).expect("glorot shape")
}

fn normal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Tensor {
    let dist = Normal::new(0.0, EMBED_STD).expect("valid std");
    let data = (0..rows * cols).map(|_| dist.sample(rng)).collect();
    Tensor::matrix(rows, cols, data).expect("normal shape")
}

impl ParameterStore {
    /// Fresh parameters: weight matrices uniform on `+-sqrt(6 / (fan_in + fan_out))`,
    /// gate vectors zero, embeddings `N(0, 0.1)`.
    pub fn init(config: &ModelConfig, features: &StructuralFeatures, seed: u64) -> Result<Self> {
        config.validate()?;
        let n = features.node_count();
        if n == 0 {
            return Err(Error::shape("init_params", "no nodes"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cd = config.cascade_dims();
        let pd = config.personality_dims();
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        let mut add = |name: String, t: Tensor| {
            names.push(name);
            tensors.push(t);
        };

        for k in 0..config.layers {
            let (ci, co, pi, po) = (cd[k], cd[k + 1], pd[k], pd[k + 1]);
            add(format!("layer{k}.w_c"), glorot(co, ci, &mut rng));
            add(format!("layer{k}.w_p"), glorot(po, pi, &mut rng));
            if config.gated {
                add(format!("layer{k}.w_cg"), glorot(co, ci, &mut rng));
                add(format!("layer{k}.beta_cg"), Tensor::zeros(&[2, co]));
                add(format!("layer{k}.w_pg"), glorot(po, pi, &mut rng));
                add(format!("layer{k}.beta_pg"), Tensor::zeros(&[2, po]));
            }
            match config.base {
                BaseModel::Gat => {
                    add(format!("layer{k}.att_c"), glorot(2, co, &mut rng));
                    add(format!("layer{k}.att_p"), glorot(2, po, &mut rng));
                }
                BaseModel::StateGnn => {
                    add(format!("layer{k}.influence"), glorot(1, ci, &mut rng));
                    add(format!("layer{k}.edge_scale"), Tensor::scalar(1.0));
                }
                BaseModel::Gcn => {}
            }
        }
        add("head.w_cp".into(), glorot(1, cd[config.layers], &mut rng));
        add("head.w_pp".into(), glorot(5, pd[config.layers], &mut rng));
        add("embed.c".into(), normal(n, config.embed_dim, &mut rng));
        add("embed.p".into(), normal(n, pd[0], &mut rng));

        Ok(ParameterStore { config: config.clone(), seed, node_count: n, names, tensors })
    }

    /// Assemble a store from named tensors, checking names and shapes against
    /// a fresh layout for `config`.
    pub fn from_parts(
        config: ModelConfig,
        seed: u64,
        node_count: usize,
        named: Vec<(String, Tensor)>,
    ) -> Result<Self> {
        let layout = ParameterStore::layout(&config, node_count)?;
        if layout.len() != named.len() {
            return Err(Error::invalid(format!("expected {} parameters, got {}", layout.len(), named.len())));
        }
        for ((name, shape), (got, t)) in layout.iter().zip(&named) {
            if name != got || shape.as_slice() != t.shape() {
                return Err(Error::invalid(format!(
                    "parameter {got} {:?} does not match expected {name} {shape:?}",
                    t.shape()
                )));
            }
        }
        let (names, tensors) = named.into_iter().unzip();
        Ok(ParameterStore { config, seed, node_count, names, tensors })
    }

    /// Names and shapes a store for `config` must have.
    pub fn layout(config: &ModelConfig, node_count: usize) -> Result<Vec<(String, Vec<usize>)>> {
        let zeros = Tensor::zeros(&[node_count, crate::graph::FEATURE_NAMES.len()]);
        let store = ParameterStore::init(config, &StructuralFeatures::from_matrix(zeros)?, 0)?;
        Ok(store.names.into_iter().zip(store.tensors.into_iter().map(|t| t.shape().to_vec())).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &self.tensors[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.names.iter().position(|n| n == name).map(move |i| &mut self.tensors[i])
    }

    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(Tensor::numel).sum()
    }

    /// Register every tensor on `tape` as a trainable leaf.
    pub fn bind(&self, tape: &mut Tape) -> BoundParams {
        let all: Vec<Var> = self.tensors.iter().map(|t| tape.param(t.clone())).collect();
        self.bound_from(all)
    }

    /// Register every tensor as a constant (no gradients).
    pub fn bind_frozen(&self, tape: &mut Tape) -> BoundParams {
        let all: Vec<Var> = self.tensors.iter().map(|t| tape.constant(t.clone())).collect();
        self.bound_from(all)
    }

    /// Interpret already-registered handles (in store order) as this model's parameters.
    pub fn bound_from(&self, all: Vec<Var>) -> BoundParams {
        let var = |name: &str| all[self.names.iter().position(|n| n == name).expect(name)];
        let has = |name: &str| self.names.iter().any(|n| n == name);
        let layers = (0..self.config.layers)
            .map(|k| {
                let p = |s: &str| format!("layer{k}.{s}");
                LayerVars {
                    w_c: var(&p("w_c")),
                    w_p: var(&p("w_p")),
                    gate: has(&p("w_cg")).then(|| GateVars {
                        w_cg: var(&p("w_cg")),
                        beta_cg: var(&p("beta_cg")),
                        w_pg: var(&p("w_pg")),
                        beta_pg: var(&p("beta_pg")),
                    }),
                    attention: has(&p("att_c")).then(|| (var(&p("att_c")), var(&p("att_p")))),
                    state: has(&p("influence")).then(|| (var(&p("influence")), var(&p("edge_scale")))),
                }
            })
            .collect();
        BoundParams {
            layers,
            w_cp: var("head.w_cp"),
            w_pp: var("head.w_pp"),
            embed_c: var("embed.c"),
            embed_p: var("embed.p"),
            all,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{structural_features, Graph};

    fn features() -> StructuralFeatures {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], false).unwrap();
        structural_features(&g).unwrap()
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = ModelConfig::default();
        let a = ParameterStore::init(&cfg, &features(), 11).unwrap();
        let b = ParameterStore::init(&cfg, &features(), 11).unwrap();
        assert_eq!(a, b);
        let c = ParameterStore::init(&cfg, &features(), 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gate_vectors_start_at_zero() {
        let s = ParameterStore::init(&ModelConfig::default(), &features(), 1).unwrap();
        for (name, t) in s.names().iter().zip(s.tensors()) {
            if name.contains("beta") {
                assert!(t.data().iter().all(|&v| v == 0.0), "{name}");
            }
        }
        assert_eq!(s.get("layer0.w_c").unwrap().shape(), &[38, 39]);
        assert_eq!(s.get("layer0.beta_pg").unwrap().shape(), &[2, 38]);
        assert_eq!(s.get("head.w_pp").unwrap().shape(), &[5, 38]);
        assert_eq!(s.get("embed.c").unwrap().shape(), &[5, 32]);
    }

    #[test]
    fn weights_within_glorot_bound() {
        let s = ParameterStore::init(&ModelConfig::default(), &features(), 2).unwrap();
        let w = s.get("layer1.w_c").unwrap();
        let a = (6.0f64 / 76.0).sqrt();
        assert!(w.data().iter().all(|v| v.abs() <= a));
    }

    #[test]
    fn layout_rejects_mismatched_parts() {
        let cfg = ModelConfig::default();
        let s = ParameterStore::init(&cfg, &features(), 3).unwrap();
        let mut parts: Vec<(String, Tensor)> =
            s.names().iter().cloned().zip(s.tensors().iter().cloned()).collect();
        assert_eq!(ParameterStore::from_parts(cfg.clone(), 3, 5, parts.clone()).unwrap(), s);
        parts[0].1 = Tensor::zeros(&[1, 1]);
        assert!(ParameterStore::from_parts(cfg, 3, 5, parts).is_err());
    }
}
