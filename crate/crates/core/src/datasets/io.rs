use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{cascades_to_text, load_cascades, Dataset, PersonalityVector, Split, TRAIT_NAMES};
use crate::error::{Error, Result};
use crate::graph::{load_edge_list_with_nodes, StructuralFeatures};

pub const EDGE_FILE: &str = "graph.edges";
pub const CASCADE_FILE: &str = "cascades.tsv";
pub const PERSONALITY_FILE: &str = "personality.csv";
pub const SPLIT_FILE: &str = "split.csv";
pub const FEATURE_FILE: &str = "features.csv";

/// Write the five dataset files into `dir`, creating it if needed.
///
/// Floats are written in shortest round-trip form, so importing the
/// directory reproduces the dataset exactly.
pub fn export_dataset(dataset: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let g = &dataset.graph;
    fs::write(dir.join(EDGE_FILE), g.to_edge_list())?;
    fs::write(dir.join(CASCADE_FILE), cascades_to_text(&dataset.cascades, g))?;

    let mut p = format!("node,{}\n", TRAIT_NAMES.join(","));
    for (v, q) in dataset.personalities.iter().enumerate() {
        p.push_str(g.label(v));
        for x in q.traits() {
            p.push(',');
            p.push_str(&x.to_string());
        }
        p.push('\n');
    }
    fs::write(dir.join(PERSONALITY_FILE), p)?;

    let mut s = String::from("cascade,split\n");
    for (c, tag) in dataset.cascades.iter().zip(&dataset.split) {
        s.push_str(&format!("{},{tag}\n", c.id));
    }
    fs::write(dir.join(SPLIT_FILE), s)?;
    fs::write(dir.join(FEATURE_FILE), dataset.features.to_csv(g))?;
    Ok(())
}

fn read(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    fs::read_to_string(&path).map_err(|e| Error::file(&path, format!("cannot read: {e}")))
}

fn in_file<T>(dir: &Path, name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::file(dir.join(name), e.to_string()))
}

fn parse_personalities(text: &str) -> Result<Vec<(String, PersonalityVector)>> {
    let mut lines = text.lines().enumerate();
    let header = format!("node,{}", TRAIT_NAMES.join(","));
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => return Err(Error::Parse { line: 1, msg: format!("expected header {header:?}") }),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(err(format!("expected 6 columns, got {}", cols.len())));
        }
        let mut t = [0.0; 5];
        for (x, c) in t.iter_mut().zip(&cols[1..]) {
            *x = c.trim().parse().map_err(|_| err(format!("bad number {c:?}")))?;
        }
        let q = PersonalityVector::new(t).map_err(|e| err(e.to_string()))?;
        out.push((cols[0].trim().to_string(), q));
    }
    Ok(out)
}

/// Read a directory written by [`export_dataset`].
pub fn import_dataset(dir: &Path) -> Result<Dataset> {
    let edges = read(dir, EDGE_FILE)?;
    let cascades = read(dir, CASCADE_FILE)?;
    let personality = read(dir, PERSONALITY_FILE)?;
    let split_text = read(dir, SPLIT_FILE)?;
    let features = read(dir, FEATURE_FILE)?;

    let labelled = in_file(dir, PERSONALITY_FILE, parse_personalities(&personality))?;
    let graph = in_file(
        dir,
        EDGE_FILE,
        load_edge_list_with_nodes(&edges, labelled.iter().map(|(l, _)| l.as_str())),
    )?;
    let n = graph.node_count();
    let ids = graph.id_map();
    let mut personalities: Vec<Option<PersonalityVector>> = vec![None; n];
    for (label, q) in &labelled {
        let v = ids[label.as_str()];
        if personalities[v].replace(*q).is_some() {
            return Err(Error::file(dir.join(PERSONALITY_FILE), format!("node {label:?} listed twice")));
        }
    }
    let personalities = personalities
        .into_iter()
        .enumerate()
        .map(|(v, q)| {
            q.ok_or_else(|| {
                Error::file(dir.join(PERSONALITY_FILE), format!("no personality for node {:?}", graph.label(v)))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let features = in_file(dir, FEATURE_FILE, StructuralFeatures::from_csv(&features, &graph))?;
    let cascades = in_file(dir, CASCADE_FILE, load_cascades(&cascades, &graph))?;

    let mut tags: HashMap<String, Split> = HashMap::new();
    for (i, line) in split_text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let (id, tag) = line.split_once(',').ok_or_else(|| {
            Error::file(dir.join(SPLIT_FILE), format!("line {}: expected `cascade,split`", i + 1))
        })?;
        let tag = in_file(dir, SPLIT_FILE, tag.trim().parse::<Split>())?;
        tags.insert(id.trim().to_string(), tag);
    }
    if tags.len() != cascades.len() {
        return Err(Error::file(
            dir.join(SPLIT_FILE),
            format!("{} split rows for {} cascades", tags.len(), cascades.len()),
        ));
    }
    let split = cascades
        .iter()
        .map(|c| {
            tags.get(&c.id)
                .copied()
                .ok_or_else(|| Error::file(dir.join(SPLIT_FILE), format!("no split for cascade {:?}", c.id)))
        })
        .collect::<Result<Vec<_>>>()?;

    Dataset::new(graph, features, cascades, personalities, split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{synth_generate, SynthConfig};

    fn tiny() -> Dataset {
        synth_generate(&SynthConfig { nodes: 30, cascades: 12, seed: 3, ..SynthConfig::default() }).unwrap()
    }

    #[test]
    fn round_trip() {
        let d = tiny();
        let dir = tempfile::tempdir().unwrap();
        export_dataset(&d, dir.path()).unwrap();
        assert_eq!(import_dataset(dir.path()).unwrap(), d);
    }

    #[test]
    fn zero_trait_is_rejected() {
        let d = tiny();
        let dir = tempfile::tempdir().unwrap();
        export_dataset(&d, dir.path()).unwrap();
        let p = dir.path().join(PERSONALITY_FILE);
        let text = fs::read_to_string(&p).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        lines[1] = format!("{},0,50,50,50,50", d.graph.label(0));
        fs::write(&p, lines.join("\n")).unwrap();
        let err = import_dataset(dir.path()).unwrap_err().to_string();
        assert!(err.contains("must be finite and > 0"), "{err}");
    }

    #[test]
    fn missing_split_file_is_named() {
        let d = tiny();
        let dir = tempfile::tempdir().unwrap();
        export_dataset(&d, dir.path()).unwrap();
        fs::remove_file(dir.path().join(SPLIT_FILE)).unwrap();
        let err = import_dataset(dir.path()).unwrap_err().to_string();
        assert!(err.contains(SPLIT_FILE), "{err}");
    }
}
