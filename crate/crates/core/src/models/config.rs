use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::FEATURE_NAMES;

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($name::$variant => $text),+ })
            }
        }

        impl FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($name), " {:?}; expected one of: ", $($text, " "),+),
                        other
                    ))),
                }
            }
        }
    };
}

/// Message-passing family the gate is plugged into.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseModel {
    Gcn,
    Gat,
    /// Tracks a per-node activation probability and sums it for the size.
    StateGnn,
}

keyword_enum!(BaseModel { Gcn => "gcn", Gat => "gat", StateGnn => "stategnn" });

/// How raw gate scores become edge weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateSquash {
    Raw,
    Sigmoid,
    /// Normalized over each receiving node's neighborhood.
    Softmax,
}

keyword_enum!(GateSquash { Raw => "raw", Sigmoid => "sigmoid", Softmax => "softmax" });

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

keyword_enum!(Activation { Relu => "relu", Tanh => "tanh" });

#[derive(Clone, Debug, PartialEq)]
pub struct ModelConfig {
    pub base: BaseModel,
    /// Plug the personality/cascade gates between the two networks.
    pub gated: bool,
    pub layers: usize,
    /// Trainable embedding width per node, before the structural features.
    pub embed_dim: usize,
    pub hidden_c: usize,
    pub hidden_p: usize,
    pub gate_squash: GateSquash,
    pub activation: Activation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            base: BaseModel::Gcn,
            gated: true,
            layers: 3,
            embed_dim: 32,
            hidden_c: 38,
            hidden_p: 38,
            gate_squash: GateSquash::Sigmoid,
            activation: Activation::Relu,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::Config("layer count must be >= 1".into()));
        }
        if self.embed_dim == 0 || self.hidden_c == 0 || self.hidden_p == 0 {
            return Err(Error::Config("dimensions must be >= 1".into()));
        }
        Ok(())
    }

    /// Whether layer-0 cascade inputs carry the cascade-membership flag.
    pub fn has_membership_slot(&self) -> bool {
        self.base != BaseModel::StateGnn
    }

    /// Width of `c^0`: embedding, structural features, optional membership flag.
    pub fn cascade_input_dim(&self) -> usize {
        self.embed_dim + FEATURE_NAMES.len() + usize::from(self.has_membership_slot())
    }

    /// Width of `c^k` for `k = 0..=layers`.
    pub fn cascade_dims(&self) -> Vec<usize> {
        std::iter::once(self.cascade_input_dim())
            .chain(std::iter::repeat(self.hidden_c).take(self.layers))
            .collect()
    }

    /// Width of `p^k` for `k = 0..=layers`.
    pub fn personality_dims(&self) -> Vec<usize> {
        vec![self.hidden_p; self.layers + 1]
    }

    /// Flat `key=value` pairs under the `model.` prefix.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        [
            ("model.base", self.base.to_string()),
            ("model.gated", self.gated.to_string()),
            ("model.layers", self.layers.to_string()),
            ("model.embed_dim", self.embed_dim.to_string()),
            ("model.hidden_c", self.hidden_c.to_string()),
            ("model.hidden_p", self.hidden_p.to_string()),
            ("model.gate_squash", self.gate_squash.to_string()),
            ("model.activation", self.activation.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Apply one `model.*` key; returns `false` when the key is not a model key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let num = |v: &str| v.parse::<usize>().map_err(|_| Error::Config(format!("{key}: bad integer {v:?}")));
        match key {
            "model.base" => self.base = value.parse()?,
            "model.gated" => {
                self.gated = value.parse().map_err(|_| Error::Config(format!("{key}: bad bool {value:?}")))?
            }
            "model.layers" => self.layers = num(value)?,
            "model.embed_dim" => self.embed_dim = num(value)?,
            "model.hidden_c" => self.hidden_c = num(value)?,
            "model.hidden_p" => self.hidden_p = num(value)?,
            "model.gate_squash" => self.gate_squash = value.parse()?,
            "model.activation" => self.activation = value.parse()?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}
