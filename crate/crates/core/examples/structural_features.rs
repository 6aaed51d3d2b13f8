//! The six structural measures on a small hand-written graph, printed as CSV.
//!
//! cargo run --example structural_features [edge-list-file]

use casper::graph::{load_edge_list, structural_features};

const SAMPLE: &str = "\
a b
a c
b c
c d
d e
e f
f d
f g
";

fn main() -> casper::error::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => SAMPLE.to_string(),
    };
    let graph = load_edge_list(&text)?;
    let features = structural_features(&graph)?;
    print!("{}", features.to_csv(&graph));
    Ok(())
}
