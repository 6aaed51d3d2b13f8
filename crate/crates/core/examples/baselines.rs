//! Feature-based baselines on the default synthetic dataset.
//!
//! cargo run --release --example baselines [seed]

use casper::baselines::{run_baselines, MlpConfig};
use casper::datasets::{synth_generate, Split, SynthConfig};

fn main() -> casper::error::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut data = synth_generate(&SynthConfig { seed, ..SynthConfig::default() })?;
    data.observe(0.5)?;
    for r in run_baselines(&data, &MlpConfig { seed, ..MlpConfig::default() }, Split::Test)? {
        let m = &r.metrics;
        println!("{:6} {:12} {:6} rmrse={:.4} mape={:.4}", r.name, m.task.to_string(), m.split.to_string(), m.rmrse, m.mape);
    }
    Ok(())
}
