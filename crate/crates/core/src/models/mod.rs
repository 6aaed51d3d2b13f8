//! Coupled cascade/personality graph networks.
//!
//! Each layer updates cascade representations `c` and personality
//! representations `p` side by side. With gating on, cascade messages along
//! `u -> v` are scaled by a gate computed from `(p_u, p_v)` and personality
//! messages by a gate computed from `(c_u, c_v)`.

mod checkpoint;
mod config;
mod forward;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint, MANIFEST_FILE};
pub use config::{Activation, BaseModel, GateSquash, ModelConfig};
pub use forward::{
    coupled_layer, edge_gates, forward_batch, forward_cascade, forward_cascade_vars, gate, personality_branch,
    personality_head, state_layer, BatchVars, ForwardResult, ForwardVars, GraphContext, LayerState,
    ATTENTION_SLOPE,
};
pub use params::{BoundParams, GateVars, LayerVars, ParameterStore, EMBED_STD};
