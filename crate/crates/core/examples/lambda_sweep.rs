//! Train the gated model at several personality-loss weights and print the
//! test metrics per weight.
//!
//! cargo run --release --example lambda_sweep -- [epochs] [seed]

use casper::datasets::{synth_generate, Split, SynthConfig};
use casper::models::{GraphContext, ModelConfig, ParameterStore};
use casper::training::{evaluate, train, TrainConfig};

fn main() -> casper::error::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let epochs = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0);

    let mut data = synth_generate(&SynthConfig { seed, ..SynthConfig::default() })?;
    data.observe(0.5)?;
    let ctx = GraphContext::new(&data.graph, &data.features)?;
    let model = ModelConfig::default();

    println!("lambda   cascade_rmrse  cascade_mape  personality_mape  best_epoch");
    for lambda in [0.0, 0.01, 1.0, 100.0] {
        let init = ParameterStore::init(&model, &data.features, seed)?;
        let cfg = TrainConfig { lambda, max_epochs: epochs, learning_rate: 5e-3, seed, ..TrainConfig::default() };
        let out = train(init, &data, &ctx, &cfg)?;
        let (cas, per) = evaluate(&out.store, &data, &ctx, Split::Test)?;
        let best = out.best_epoch.map_or("-".to_string(), |e| e.to_string());
        println!("{lambda:<8} {:<14.4} {:<13.4} {:<17.4} {best}", cas.rmrse, cas.mape, per.mape);
    }
    Ok(())
}
