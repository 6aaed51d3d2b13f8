use crate::diffcore::{Tape, Tensor, Var};
use crate::error::{Error, Result};

fn check_targets(targets: &[f64]) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::invalid("no targets"));
    }
    if let Some(t) = targets.iter().find(|t| !(t.is_finite() && **t != 0.0)) {
        return Err(Error::invalid(format!("ground truth {t} must be finite and non-zero")));
    }
    Ok(())
}

/// Mean relative squared error `mean(((n_hat - n) / n)^2)`.
pub fn cascade_loss(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::shape("cascade_loss", format!("{} predictions for {} targets", pred.len(), target.len())));
    }
    check_targets(target)?;
    Ok(pred.iter().zip(target).map(|(p, t)| ((p - t) / t).powi(2)).sum::<f64>() / target.len() as f64)
}

/// `(1/|V|) sum_u ||(q_hat_u - q_u) / q_u||^2` over `[n, 5]` matrices.
pub fn personality_loss(pred: &Tensor, target: &Tensor) -> Result<f64> {
    if pred.shape() != target.shape() || target.shape().len() != 2 {
        return Err(Error::shape("personality_loss", format!("{:?} vs {:?}", pred.shape(), target.shape())));
    }
    check_targets(target.data())?;
    let total: f64 = pred.data().iter().zip(target.data()).map(|(p, t)| ((p - t) / t).powi(2)).sum();
    Ok(total / target.rows() as f64)
}

pub fn total_loss(cascade: f64, personality: f64, lambda: f64) -> f64 {
    cascade + lambda * personality
}

/// Tape version of [`cascade_loss`]; `pred` holds one `[1]` handle per cascade.
pub fn cascade_loss_var(tape: &mut Tape, pred: &[Var], target: &[f64]) -> Result<Var> {
    if pred.len() != target.len() {
        return Err(Error::shape("cascade_loss", format!("{} predictions for {} targets", pred.len(), target.len())));
    }
    check_targets(target)?;
    let stacked = tape.concat(pred, 0)?;
    let n = tape.constant(Tensor::vector(target.to_vec()));
    let inv = tape.constant(Tensor::vector(target.iter().map(|t| 1.0 / t).collect()));
    let diff = tape.sub(stacked, n)?;
    let rel = tape.mul(diff, inv)?;
    let sq = tape.mul(rel, rel)?;
    tape.mean(sq)
}

/// Tape version of [`personality_loss`].
pub fn personality_loss_var(tape: &mut Tape, pred: Var, target: &Tensor) -> Result<Var> {
    let shape = tape.value(pred).shape().to_vec();
    if shape != target.shape() || shape.len() != 2 {
        return Err(Error::shape("personality_loss", format!("{shape:?} vs {:?}", target.shape())));
    }
    check_targets(target.data())?;
    let q = tape.constant(target.clone());
    let inv = tape.constant(Tensor::new(shape.clone(), target.data().iter().map(|t| 1.0 / t).collect())?);
    let diff = tape.sub(pred, q)?;
    let rel = tape.mul(diff, inv)?;
    let sq = tape.mul(rel, rel)?;
    let total = tape.sum(sq)?;
    tape.scale(total, 1.0 / shape[0] as f64)
}

pub fn total_loss_var(tape: &mut Tape, cascade: Var, personality: Var, lambda: f64) -> Result<Var> {
    let weighted = tape.scale(personality, lambda)?;
    tape.add(cascade, weighted)
}

/// `sqrt(mean(((y_hat - y) / y)^2))`.
pub fn rmrse(pred: &[f64], target: &[f64]) -> Result<f64> {
    Ok(cascade_loss(pred, target)?.sqrt())
}

/// `mean(|y_hat - y| / |y|)`.
pub fn mape(pred: &[f64], target: &[f64]) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::shape("mape", format!("{} predictions for {} targets", pred.len(), target.len())));
    }
    check_targets(target)?;
    Ok(pred.iter().zip(target).map(|(p, t)| ((p - t) / t).abs()).sum::<f64>() / target.len() as f64)
}
