use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{cascade_loss_var, mape, personality_loss_var, rmrse, total_loss_var, Adam};
use crate::datasets::{Dataset, Split};
use crate::diffcore::{Tape, Tensor};
use crate::error::{Error, Result};
use crate::models::{forward_batch, forward_cascade, GraphContext, ParameterStore};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Weight of the personality loss in the joint objective.
    pub lambda: f64,
    pub max_epochs: usize,
    pub patience: usize,
    /// Cascades per optimizer step.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { learning_rate: 5e-4, lambda: 1.0, max_epochs: 100, patience: 10, batch_size: 16, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!("learning rate must be > 0, got {}", self.learning_rate)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if self.patience == 0 || self.batch_size == 0 {
            return Err(Error::Config("patience and batch size must be >= 1".into()));
        }
        Ok(())
    }

    pub fn to_pairs(&self) -> Vec<(String, String)> {
        [
            ("train.learning_rate", self.learning_rate.to_string()),
            ("train.lambda", self.lambda.to_string()),
            ("train.max_epochs", self.max_epochs.to_string()),
            ("train.patience", self.patience.to_string()),
            ("train.batch_size", self.batch_size.to_string()),
            ("train.seed", self.seed.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Apply one `train.*` key; returns `false` for keys outside this section.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let bad = || Error::Config(format!("{key}: bad value {value:?}"));
        match key {
            "train.learning_rate" => self.learning_rate = value.parse().map_err(|_| bad())?,
            "train.lambda" => self.lambda = value.parse().map_err(|_| bad())?,
            "train.max_epochs" => self.max_epochs = value.parse().map_err(|_| bad())?,
            "train.patience" => self.patience = value.parse().map_err(|_| bad())?,
            "train.batch_size" => self.batch_size = value.parse().map_err(|_| bad())?,
            "train.seed" => self.seed = value.parse().map_err(|_| bad())?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    Cascade,
    Personality,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Cascade => "cascade",
            Task::Personality => "personality",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRecord {
    pub task: Task,
    pub split: Split,
    pub epoch: Option<usize>,
    pub rmrse: f64,
    pub mape: f64,
}

/// Size predictions for `indices` and the personality prediction averaged
/// over those cascades.
pub fn predict(store: &ParameterStore, dataset: &Dataset, ctx: &GraphContext, indices: &[usize]) -> Result<(Vec<f64>, Tensor)> {
    if indices.is_empty() {
        return Err(Error::invalid("no cascades to predict"));
    }
    let mut sizes = Vec::with_capacity(indices.len());
    let mut q = Tensor::zeros(&[ctx.node_count, 5]);
    let mut summed = 0;
    for (k, &i) in indices.iter().enumerate() {
        let r = forward_cascade(store, ctx, &dataset.cascades[i])?;
        sizes.push(r.size);
        // without gates the personality branch ignores the cascade
        if store.config.gated || k == 0 {
            for (a, b) in q.data_mut().iter_mut().zip(r.personality.data()) {
                *a += b;
            }
            summed += 1;
        }
    }
    q.data_mut().iter_mut().for_each(|a| *a /= summed as f64);
    Ok((sizes, q))
}

/// Ground-truth personalities as an `[n, 5]` matrix.
pub fn personality_targets(dataset: &Dataset) -> Tensor {
    let data = dataset.personalities.iter().flat_map(|p| p.traits().iter().copied()).collect();
    Tensor::matrix(dataset.personalities.len(), 5, data).expect("five traits per node")
}

/// Cascade and personality metrics on one split.
pub fn evaluate(
    store: &ParameterStore,
    dataset: &Dataset,
    ctx: &GraphContext,
    split: Split,
) -> Result<(MetricsRecord, MetricsRecord)> {
    let idx = dataset.indices(split);
    if idx.is_empty() {
        return Err(Error::invalid(format!("split {split} is empty")));
    }
    let (sizes, q) = predict(store, dataset, ctx, &idx)?;
    let truth: Vec<f64> = idx.iter().map(|&i| dataset.cascades[i].total_size() as f64).collect();
    let q_true = personality_targets(dataset);
    let cascade = MetricsRecord { task: Task::Cascade, split, epoch: None, rmrse: rmrse(&sizes, &truth)?, mape: mape(&sizes, &truth)? };
    let personality = MetricsRecord {
        task: Task::Personality,
        split,
        epoch: None,
        rmrse: rmrse(q.data(), q_true.data())?,
        mape: mape(q.data(), q_true.data())?,
    };
    Ok((cascade, personality))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_cascade_loss: f64,
    pub train_personality_loss: f64,
    pub val_cascade_rmrse: f64,
    pub val_cascade_mape: f64,
    pub val_personality_rmrse: f64,
    pub val_personality_mape: f64,
    pub skipped_steps: usize,
}

pub const HISTORY_HEADER: &str = "epoch,train_loss,train_cascade_loss,train_personality_loss,\
val_cascade_rmrse,val_cascade_mape,val_personality_rmrse,val_personality_mape,skipped_steps";

pub fn history_to_csv(history: &[EpochRecord]) -> String {
    let mut out = format!("{HISTORY_HEADER}\n");
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.epoch,
            r.train_loss,
            r.train_cascade_loss,
            r.train_personality_loss,
            r.val_cascade_rmrse,
            r.val_cascade_mape,
            r.val_personality_rmrse,
            r.val_personality_mape,
            r.skipped_steps
        ));
    }
    out
}

/// Patience counter over a score where lower is better.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    waited: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping { patience, best: f64::INFINITY, waited: 0 }
    }

    /// Record one epoch's score. Returns `(improved, stop)`.
    pub fn observe(&mut self, score: f64) -> (bool, bool) {
        if score < self.best {
            self.best = score;
            self.waited = 0;
            (true, false)
        } else {
            self.waited += 1;
            (false, self.waited >= self.patience)
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation cascade RMRSE.
    pub store: ParameterStore,
    pub history: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub stopped_early: bool,
}

/// Minibatch Adam on `L_cas + lambda * L_per` with early stopping on the
/// validation cascade RMRSE. Falls back to the training split for model
/// selection when the validation split is empty.
pub fn train(initial: ParameterStore, dataset: &Dataset, ctx: &GraphContext, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let train_idx = dataset.indices(Split::Train);
    if train_idx.is_empty() {
        return Err(Error::invalid("no training cascades"));
    }
    let select_split = if dataset.indices(Split::Val).is_empty() { Split::Train } else { Split::Val };
    let q_true = personality_targets(dataset);
    let model_cfg = initial.config.clone();

    let mut store = initial;
    let mut best = store.clone();
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best_epoch = None;
    let mut adam = Adam::new(cfg.learning_rate, store.tensors());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order = train_idx;
    let mut history = Vec::new();
    let mut stopped_early = false;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let (mut sum_total, mut sum_cas, mut sum_per, mut skipped) = (0.0, 0.0, 0.0, 0);
        for batch in order.chunks(cfg.batch_size) {
            let cascades: Vec<_> = batch.iter().map(|&i| &dataset.cascades[i]).collect();
            let targets: Vec<f64> = cascades.iter().map(|c| c.total_size() as f64).collect();
            let mut tape = Tape::new();
            let bound = store.bind(&mut tape);
            let out = forward_batch(&mut tape, ctx, &model_cfg, &bound, &cascades)?;
            let l_cas = cascade_loss_var(&mut tape, &out.sizes, &targets)?;
            let l_per = personality_loss_var(&mut tape, out.personality, &q_true)?;
            let loss = total_loss_var(&mut tape, l_cas, l_per, cfg.lambda)?;
            let grads = tape.backward(loss)?;
            let grads: Vec<Tensor> = bound
                .all
                .iter()
                .zip(store.tensors())
                .map(|(&v, t)| grads.get_or_zeros(v, t.shape()))
                .collect();
            if !adam.step(store.tensors_mut(), &grads)? {
                skipped += 1;
            }
            let w = batch.len() as f64;
            sum_total += w * tape.value(loss).item();
            sum_cas += w * tape.value(l_cas).item();
            sum_per += w * tape.value(l_per).item();
        }
        let count = order.len() as f64;
        let (cas, per) = evaluate(&store, dataset, ctx, select_split)?;
        history.push(EpochRecord {
            epoch,
            train_loss: sum_total / count,
            train_cascade_loss: sum_cas / count,
            train_personality_loss: sum_per / count,
            val_cascade_rmrse: cas.rmrse,
            val_cascade_mape: cas.mape,
            val_personality_rmrse: per.rmrse,
            val_personality_mape: per.mape,
            skipped_steps: skipped,
        });
        let (improved, stop) = stopper.observe(cas.rmrse);
        if improved {
            best = store.clone();
            best_epoch = Some(epoch);
        }
        if stop {
            stopped_early = true;
            break;
        }
    }
    Ok(TrainOutcome { store: best, history, best_epoch, stopped_early })
}
