//! Finite-difference check of the joint loss for every base model, with and
//! without gates, on a six-node graph.
//!
//! cargo run --release --example gradient_check

use casper::datasets::{Cascade, Dataset, PersonalityVector, Split};
use casper::diffcore::{finite_diff_check, Tape, Var};
use casper::graph::{structural_features, Graph};
use casper::models::{forward_batch, BaseModel, GraphContext, ModelConfig, ParameterStore};
use casper::training::{cascade_loss_var, personality_loss_var, personality_targets, total_loss_var};

fn main() -> casper::error::Result<()> {
    let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (5, 1), (5, 3)];
    let graph = Graph::from_edges(6, &edges, false)?;
    let features = structural_features(&graph)?;
    let personalities = (0..6)
        .map(|v| PersonalityVector::new([0.4 + 0.05 * v as f64; 5]))
        .collect::<casper::error::Result<Vec<_>>>()?;
    let cascades = vec![
        Cascade::new("a", vec![0, 1, 2])?.with_observed_len(1)?,
        Cascade::new("b", vec![3, 4, 5, 0])?.with_observed_len(2)?,
    ];
    let data = Dataset::new(graph, features, cascades, personalities, vec![Split::Train; 2])?;
    let ctx = GraphContext::new(&data.graph, &data.features)?;

    for base in [BaseModel::Gcn, BaseModel::Gat, BaseModel::StateGnn] {
        for gated in [false, true] {
            let cfg = ModelConfig { base, gated, layers: 2, embed_dim: 2, hidden_c: 3, hidden_p: 3, ..ModelConfig::default() };
            let store = ParameterStore::init(&cfg, &data.features, 1)?;
            let err = finite_diff_check(store.tensors(), 1e-5, |tape: &mut Tape, vars: &[Var]| {
                let bound = store.bound_from(vars.to_vec());
                let batch: Vec<&Cascade> = data.cascades.iter().collect();
                let sizes: Vec<f64> = batch.iter().map(|c| c.total_size() as f64).collect();
                let out = forward_batch(tape, &ctx, &cfg, &bound, &batch)?;
                let l_cas = cascade_loss_var(tape, &out.sizes, &sizes)?;
                let l_per = personality_loss_var(tape, out.personality, &personality_targets(&data))?;
                total_loss_var(tape, l_cas, l_per, 1.0)
            })?;
            println!("{:9} gated={gated:5} params={:4} max relative error {err:.2e}", base.to_string(), store.scalar_count());
        }
    }
    Ok(())
}
