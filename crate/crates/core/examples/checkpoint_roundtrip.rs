//! Save a trained model, load it back, and confirm the predictions agree
//! bit for bit.
//!
//! cargo run --release --example checkpoint_roundtrip

use casper::datasets::{synth_generate, SynthConfig};
use casper::models::{forward_cascade, load_checkpoint, save_checkpoint, BaseModel, GraphContext, ModelConfig, ParameterStore};
use casper::training::{train, TrainConfig};

fn main() -> casper::error::Result<()> {
    let mut data = synth_generate(&SynthConfig { nodes: 60, cascades: 30, ..SynthConfig::default() })?;
    data.observe(0.5)?;
    let ctx = GraphContext::new(&data.graph, &data.features)?;
    let model = ModelConfig { base: BaseModel::Gat, layers: 2, embed_dim: 8, hidden_c: 12, hidden_p: 12, ..ModelConfig::default() };
    let init = ParameterStore::init(&model, &data.features, 0)?;
    let out = train(init, &data, &ctx, &TrainConfig { max_epochs: 5, learning_rate: 5e-3, ..TrainConfig::default() })?;

    let dir = std::env::temp_dir().join("casper_checkpoint_example");
    save_checkpoint(&out.store, &dir)?;
    let loaded = load_checkpoint(&dir)?;
    println!("{} tensors, {} scalars written to {}", loaded.len(), loaded.scalar_count(), dir.display());

    let mut identical = true;
    for c in &data.cascades {
        let a = forward_cascade(&out.store, &ctx, c)?;
        let b = forward_cascade(&loaded, &ctx, c)?;
        identical &= a.size.to_bits() == b.size.to_bits() && a.personality == b.personality;
    }
    println!("predictions identical after reload: {identical}");
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
