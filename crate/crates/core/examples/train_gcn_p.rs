//! Train a personality-gated GCN on a synthetic Barabasi-Albert dataset and
//! report test metrics next to the ungated model.
//!
//! cargo run --release --example train_gcn_p -- [epochs] [seed] [learning_rate]

use std::time::Instant;

use casper::datasets::{synth_generate, Split, SynthConfig};
use casper::models::{GraphContext, ModelConfig, ParameterStore};
use casper::training::{evaluate, train, TrainConfig};

fn main() -> casper::error::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let epochs = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(30);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);
    let lr = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(5e-4);

    let mut data = synth_generate(&SynthConfig { seed, ..SynthConfig::default() })?;
    data.observe(0.5)?;
    let ctx = GraphContext::new(&data.graph, &data.features)?;
    let sizes: Vec<usize> = data.cascades.iter().map(|c| c.total_size()).collect();
    println!("cascade sizes: mean {:.2}, max {}", sizes.iter().sum::<usize>() as f64 / sizes.len() as f64, sizes.iter().max().unwrap());

    for (name, gated, lambda) in [("gcn", false, 0.0), ("gcn-p", true, 1.0)] {
        let model = ModelConfig { gated, ..ModelConfig::default() };
        let init = ParameterStore::init(&model, &data.features, seed)?;
        let cfg = TrainConfig { lambda, max_epochs: epochs, seed, learning_rate: lr, ..TrainConfig::default() };
        let start = Instant::now();
        let out = train(init, &data, &ctx, &cfg)?;
        let (cas, per) = evaluate(&out.store, &data, &ctx, Split::Test)?;
        println!(
            "{name:6} epochs={:3} best={:?} test cascade rmrse={:.4} mape={:.4} personality mape={:.4} ({:.1}s)",
            out.history.len(),
            out.best_epoch,
            cas.rmrse,
            cas.mape,
            per.mape,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
