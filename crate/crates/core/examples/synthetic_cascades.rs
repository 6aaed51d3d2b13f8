//! Generate a planted-personality dataset and show how trait weights move
//! cascade sizes under common random numbers.
//!
//! cargo run --release --example synthetic_cascades [out-dir]

use casper::datasets::{export_dataset, synth_generate, Split, SynthConfig};

fn mean_size(cfg: &SynthConfig) -> casper::error::Result<f64> {
    let d = synth_generate(cfg)?;
    Ok(d.cascades.iter().map(|c| c.total_size() as f64).sum::<f64>() / d.cascades.len() as f64)
}

fn main() -> casper::error::Result<()> {
    let cfg = SynthConfig::default();
    let data = synth_generate(&cfg)?;
    let sizes: Vec<usize> = data.cascades.iter().map(|c| c.total_size()).collect();
    println!(
        "{} nodes, {} edges, {} cascades (train {}, val {}, test {})",
        data.graph.node_count(),
        data.graph.edge_count(),
        sizes.len(),
        data.indices(Split::Train).len(),
        data.indices(Split::Val).len(),
        data.indices(Split::Test).len()
    );
    println!(
        "size: mean {:.2}, max {}, singletons {}",
        sizes.iter().sum::<usize>() as f64 / sizes.len() as f64,
        sizes.iter().max().unwrap_or(&0),
        sizes.iter().filter(|&&s| s == 1).count()
    );

    println!("w_e   w_n   mean size");
    for (w_e, w_n) in [(0.0, 0.0), (0.4, 0.0), (0.4, 0.4), (0.0, 0.4), (0.8, 0.4)] {
        println!("{w_e:<5} {w_n:<5} {:.3}", mean_size(&SynthConfig { w_e, w_n, ..cfg.clone() })?);
    }

    if let Some(dir) = std::env::args().nth(1) {
        export_dataset(&data, dir.as_ref())?;
        println!("wrote {dir}");
    }
    Ok(())
}
