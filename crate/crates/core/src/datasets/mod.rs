//! Cascades, Big-Five personality labels, splits and the synthetic
//! personality-driven cascade generator.

mod io;
mod synth;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, StructuralFeatures};

pub use io::{export_dataset, import_dataset, CASCADE_FILE, EDGE_FILE, FEATURE_FILE, PERSONALITY_FILE, SPLIT_FILE};
pub use synth::{
    live_edge_uniforms, simulate_cascade, synth_generate, trait_activation_probs, EdgeUniforms, GraphModel,
    SynthConfig,
};

pub const TRAIT_NAMES: [&str; 5] = ["O", "C", "E", "A", "N"];
pub const EXTRAVERSION: usize = 2;
pub const NEUROTICISM: usize = 4;

/// Ordered adopters of one piece of information.
#[derive(Clone, Debug, PartialEq)]
pub struct Cascade {
    pub id: String,
    adopters: Vec<usize>,
    observed_len: Option<usize>,
    degenerate: bool,
}

impl Cascade {
    pub fn new(id: impl Into<String>, adopters: Vec<usize>) -> Result<Self> {
        let id = id.into();
        if adopters.is_empty() {
            return Err(Error::invalid(format!("cascade {id} has no adopters")));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = adopters.iter().find(|u| !seen.insert(**u)) {
            return Err(Error::invalid(format!("cascade {id}: adopter {dup} appears twice")));
        }
        Ok(Cascade { id, adopters, observed_len: None, degenerate: false })
    }

    pub fn adopters(&self) -> &[usize] {
        &self.adopters
    }

    pub fn total_size(&self) -> usize {
        self.adopters.len()
    }

    pub fn observed_len(&self) -> Option<usize> {
        self.observed_len
    }

    /// Adopters visible to the predictor; empty until a prefix is observed.
    pub fn observed(&self) -> &[usize] {
        &self.adopters[..self.observed_len.unwrap_or(0)]
    }

    /// True when the cascade has a single adopter, so no proper prefix exists.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Copy with `observed_len = max(1, floor(fraction * total_size))`.
    pub fn observe_prefix(&self, fraction: f64) -> Result<Cascade> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::invalid(format!("prefix fraction must be in (0, 1), got {fraction}")));
        }
        let n = self.total_size();
        let j = ((fraction * n as f64).floor() as usize).max(1);
        let mut c = self.clone();
        c.observed_len = Some(j);
        c.degenerate = n == 1;
        Ok(c)
    }

    /// Copy with an explicit prefix length in `1..=total_size`.
    pub fn with_observed_len(&self, j: usize) -> Result<Cascade> {
        if j == 0 || j > self.total_size() {
            return Err(Error::invalid(format!("observed length {j} outside 1..={}", self.total_size())));
        }
        let mut c = self.clone();
        c.observed_len = Some(j);
        c.degenerate = self.total_size() == 1;
        Ok(c)
    }
}

/// Strictly positive Big-Five scores in (O, C, E, A, N) order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PersonalityVector([f64; 5]);

impl PersonalityVector {
    pub fn new(traits: [f64; 5]) -> Result<Self> {
        for (name, v) in TRAIT_NAMES.iter().zip(traits) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("trait {name} must be finite and > 0, got {v}")));
            }
        }
        Ok(PersonalityVector(traits))
    }

    pub fn traits(&self) -> &[f64; 5] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(Error::invalid(format!("unknown split {other:?}"))),
        }
    }
}

/// Seeded shuffle of `n` cascades: the first `floor(n * r_val)` go to
/// validation, the next `floor(n * r_test)` to test, the rest to training.
pub fn split(n: usize, r_val: f64, r_test: f64, seed: u64) -> Result<Vec<Split>> {
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 cascades to split, got {n}")));
    }
    if r_val < 0.0 || r_test < 0.0 || r_val + r_test >= 1.0 {
        return Err(Error::invalid(format!("split ratios {r_val} + {r_test} must be >= 0 and < 1")));
    }
    let n_val = (n as f64 * r_val).floor() as usize;
    let n_test = (n as f64 * r_test).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut tags = vec![Split::Train; n];
    for (rank, &i) in order.iter().enumerate() {
        if rank < n_val {
            tags[i] = Split::Val;
        } else if rank < n_val + n_test {
            tags[i] = Split::Test;
        }
    }
    Ok(tags)
}

/// Parse `id<TAB>u1,u2,...` lines, adopters in activation order, node ids
/// given by graph label.
pub fn load_cascades(source: &str, graph: &Graph) -> Result<Vec<Cascade>> {
    let ids = graph.id_map();
    let mut seen_ids = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| err("expected `id<TAB>adopters`".into()))?;
        let id = id.trim();
        if !seen_ids.insert(id.to_string()) {
            return Err(err(format!("cascade id {id:?} repeated")));
        }
        let rest = rest.trim();
        if rest.is_empty() {
            return Err(err(format!("cascade {id} has no adopters")));
        }
        let adopters = rest
            .split(',')
            .map(|u| {
                let u = u.trim();
                ids.get(u).copied().ok_or_else(|| err(format!("unknown node id {u:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(Cascade::new(id, adopters).map_err(|e| err(e.to_string()))?);
    }
    Ok(out)
}

pub fn cascades_to_text(cascades: &[Cascade], graph: &Graph) -> String {
    let mut s = String::new();
    for c in cascades {
        s.push_str(&c.id);
        s.push('\t');
        let labels: Vec<&str> = c.adopters.iter().map(|&u| graph.label(u)).collect();
        s.push_str(&labels.join(","));
        s.push('\n');
    }
    s
}

/// Graph, node features, cascades, per-node personalities and a split.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    pub features: StructuralFeatures,
    pub cascades: Vec<Cascade>,
    pub personalities: Vec<PersonalityVector>,
    pub split: Vec<Split>,
}

impl Dataset {
    pub fn new(
        graph: Graph,
        features: StructuralFeatures,
        cascades: Vec<Cascade>,
        personalities: Vec<PersonalityVector>,
        split: Vec<Split>,
    ) -> Result<Self> {
        let n = graph.node_count();
        if features.node_count() != n {
            return Err(Error::invalid(format!("{} feature rows for {n} nodes", features.node_count())));
        }
        if personalities.len() != n {
            return Err(Error::invalid(format!("{} personalities for {n} nodes", personalities.len())));
        }
        if split.len() != cascades.len() {
            return Err(Error::invalid(format!(
                "{} split tags for {} cascades",
                split.len(),
                cascades.len()
            )));
        }
        for c in &cascades {
            if let Some(&u) = c.adopters.iter().find(|&&u| u >= n) {
                return Err(Error::invalid(format!("cascade {} references node {u}", c.id)));
            }
        }
        Ok(Dataset { graph, features, cascades, personalities, split })
    }

    /// Replace every cascade by its observed-prefix copy.
    pub fn observe(&mut self, fraction: f64) -> Result<()> {
        for c in &mut self.cascades {
            *c = c.observe_prefix(fraction)?;
        }
        Ok(())
    }

    pub fn resplit(&mut self, r_val: f64, r_test: f64, seed: u64) -> Result<()> {
        self.split = split(self.cascades.len(), r_val, r_test, seed)?;
        Ok(())
    }

    /// Indices of cascades assigned to `which`, in dataset order.
    pub fn indices(&self, which: Split) -> Vec<usize> {
        (0..self.cascades.len()).filter(|&i| self.split[i] == which).collect()
    }

    pub fn split_counts(&self) -> (usize, usize, usize) {
        let count = |s| self.split.iter().filter(|&&t| t == s).count();
        (count(Split::Train), count(Split::Val), count(Split::Test))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::load_edge_list;

    fn abc() -> Graph {
        load_edge_list("a b\nb c\n").unwrap()
    }

    #[test]
    fn cascade_lines() {
        let g = abc();
        let cs = load_cascades("c1\ta,b,c\n", &g).unwrap();
        assert_eq!(cs[0].total_size(), 3);
        assert_eq!(cs[0].observed_len(), None);
        assert!(load_cascades("c2\ta,a\n", &g).unwrap_err().to_string().contains("twice"));
        assert!(load_cascades("c3\tzz\n", &g).unwrap_err().to_string().contains("unknown node"));
        assert!(load_cascades("c4\t\n", &g).is_err());
        assert_eq!(cascades_to_text(&cs, &g), "c1\ta,b,c\n");
    }

    #[test]
    fn prefix_rule() {
        let c = Cascade::new("x", (0..10).collect()).unwrap();
        assert_eq!(c.observe_prefix(0.5).unwrap().observed_len(), Some(5));
        let c = Cascade::new("x", vec![0, 1, 2]).unwrap();
        assert_eq!(c.observe_prefix(0.1).unwrap().observed_len(), Some(1));
        let c = Cascade::new("x", vec![4]).unwrap().observe_prefix(0.5).unwrap();
        assert_eq!(c.observed_len(), Some(1));
        assert!(c.is_degenerate());
        assert!(Cascade::new("x", vec![1, 2]).unwrap().observe_prefix(1.0).is_err());
    }

    #[test]
    fn prefix_is_proper_for_larger_cascades() {
        for n in 2..40 {
            let c = Cascade::new("x", (0..n).collect()).unwrap();
            for f in [0.01, 0.3, 0.5, 0.99] {
                let j = c.observe_prefix(f).unwrap().observed_len().unwrap();
                assert!(j >= 1 && j < n, "n={n} f={f} j={j}");
            }
        }
    }

    #[test]
    fn split_sizes() {
        let count = |tags: &[Split], s| tags.iter().filter(|&&t| t == s).count();
        let t = split(99, 0.15, 0.15, 7).unwrap();
        assert_eq!((count(&t, Split::Train), count(&t, Split::Val), count(&t, Split::Test)), (71, 14, 14));
        let t = split(10, 0.2, 0.2, 7).unwrap();
        assert_eq!((count(&t, Split::Train), count(&t, Split::Val), count(&t, Split::Test)), (6, 2, 2));
        assert_eq!(split(50, 0.2, 0.1, 3).unwrap(), split(50, 0.2, 0.1, 3).unwrap());
        assert!(split(2, 0.2, 0.2, 0).is_err());
        assert!(split(10, 0.5, 0.5, 0).is_err());
    }

    #[test]
    fn personality_must_be_positive() {
        assert!(PersonalityVector::new([1.0, 2.0, 3.0, 4.0, 5.0]).is_ok());
        assert!(PersonalityVector::new([1.0, 0.0, 3.0, 4.0, 5.0]).is_err());
        assert!(PersonalityVector::new([1.0, 2.0, f64::NAN, 4.0, 5.0]).is_err());
    }
}
