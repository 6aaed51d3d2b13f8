use std::fs;
use std::path::Path;

use super::{ModelConfig, ParameterStore};
use crate::diffcore::Tensor;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";

fn tensor_file(name: &str) -> String {
    format!("{name}.f64")
}

/// Write `manifest.txt` plus one little-endian `f64` file per parameter.
pub fn save_checkpoint(store: &ParameterStore, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = String::new();
    for (k, v) in store.config.to_pairs() {
        manifest.push_str(&format!("{k}={v}\n"));
    }
    manifest.push_str(&format!("seed={}\nnode_count={}\n", store.seed, store.node_count));
    for (name, t) in store.names().iter().zip(store.tensors()) {
        let dims: Vec<String> = t.shape().iter().map(usize::to_string).collect();
        manifest.push_str(&format!("param={name} {}\n", dims.join(" ")));
        let bytes: Vec<u8> = t.data().iter().flat_map(|x| x.to_le_bytes()).collect();
        fs::write(dir.join(tensor_file(name)), bytes)?;
    }
    fs::write(dir.join(MANIFEST_FILE), manifest)?;
    Ok(())
}

/// Inverse of [`save_checkpoint`]; values come back bit for bit.
pub fn load_checkpoint(dir: &Path) -> Result<ParameterStore> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::file(&path, format!("cannot read: {e}")))?;
    let bad = |line: usize, msg: String| Error::file(&path, format!("line {line}: {msg}"));

    let mut config = ModelConfig::default();
    let mut seed = None;
    let mut node_count = None;
    let mut params = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| bad(i + 1, "expected key=value".into()))?;
        match key {
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad(i + 1, format!("bad seed {value:?}")))?),
            "node_count" => {
                node_count = Some(value.parse::<usize>().map_err(|_| bad(i + 1, format!("bad count {value:?}")))?)
            }
            "param" => {
                let mut parts = value.split_whitespace();
                let name = parts.next().ok_or_else(|| bad(i + 1, "missing parameter name".into()))?;
                let dims = parts
                    .map(|d| d.parse::<usize>().map_err(|_| bad(i + 1, format!("bad dimension {d:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                params.push((name.to_string(), dims));
            }
            _ => {
                if !config.set(key, value).map_err(|e| bad(i + 1, e.to_string()))? {
                    return Err(bad(i + 1, format!("unknown key {key:?}")));
                }
            }
        }
    }
    let seed = seed.ok_or_else(|| Error::file(&path, "missing seed"))?;
    let node_count = node_count.ok_or_else(|| Error::file(&path, "missing node_count"))?;

    let mut named = Vec::with_capacity(params.len());
    for (name, dims) in params {
        let file = dir.join(tensor_file(&name));
        let bytes = fs::read(&file).map_err(|e| Error::file(&file, format!("cannot read: {e}")))?;
        let expected: usize = dims.iter().product::<usize>() * 8;
        if bytes.len() != expected {
            return Err(Error::file(&file, format!("{} bytes, expected {expected}", bytes.len())));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        named.push((name, Tensor::new(dims, data)?));
    }
    ParameterStore::from_parts(config, seed, node_count, named)
}
