//! Joint objective, Adam, minibatch training with early stopping, and
//! evaluation metrics.

mod adam;
mod fit;
mod loss;

pub use adam::{Adam, BETA1, BETA2, EPSILON};
pub use fit::{
    evaluate, history_to_csv, personality_targets, predict, train, EarlyStopping, EpochRecord, MetricsRecord, Task,
    TrainConfig, TrainOutcome, HISTORY_HEADER,
};
pub use loss::{
    cascade_loss, cascade_loss_var, mape, personality_loss, personality_loss_var, rmrse, total_loss, total_loss_var,
};
