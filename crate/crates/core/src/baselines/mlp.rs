use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffcore::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::training::Adam;

#[derive(Clone, Debug, PartialEq)]
pub struct MlpConfig {
    pub hidden: usize,
    /// Full-batch Adam steps.
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Minimize squared relative error instead of squared error.
    pub relative: bool,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig { hidden: 32, epochs: 500, learning_rate: 1e-2, seed: 0, relative: true }
    }
}

/// Three dense layers with ReLU between them. Inputs and targets are
/// standardized with training-set statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    /// `[out, in + 1]` each; the last column is the bias.
    pub layers: Vec<Tensor>,
    x_mean: Vec<f64>,
    x_std: Vec<f64>,
    y_mean: Vec<f64>,
    y_std: Vec<f64>,
}

fn column_stats(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = rows[0].len();
    let m = rows.len() as f64;
    let mean: Vec<f64> = (0..d).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / m).collect();
    let std = (0..d)
        .map(|k| {
            let v = rows.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / m;
            if v > 1e-24 { v.sqrt() } else { 1.0 }
        })
        .collect();
    (mean, std)
}

fn with_bias(tape: &mut Tape, x: Var) -> Result<Var> {
    let rows = tape.value(x).rows();
    let ones = tape.constant(Tensor::full(&[rows, 1], 1.0));
    tape.concat(&[x, ones], 1)
}

impl Mlp {
    fn init(d_in: usize, d_out: usize, cfg: &MlpConfig, x: &[Vec<f64>], y: &[Vec<f64>]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let dims = [d_in, cfg.hidden, cfg.hidden, d_out];
        let layers = dims
            .windows(2)
            .map(|w| {
                let a = (6.0 / (w[0] + w[1]) as f64).sqrt();
                let mut data: Vec<f64> = (0..w[1] * (w[0] + 1)).map(|_| rng.random_range(-a..=a)).collect();
                for r in 0..w[1] {
                    data[r * (w[0] + 1) + w[0]] = 0.0;
                }
                Tensor::matrix(w[1], w[0] + 1, data).expect("layer shape")
            })
            .collect();
        let (x_mean, x_std) = column_stats(x);
        let (y_mean, y_std) = column_stats(y);
        Mlp { layers, x_mean, x_std, y_mean, y_std }
    }

    fn scaled_inputs(&self, rows: &[Vec<f64>]) -> Result<Tensor> {
        let d = self.x_mean.len();
        let data = rows
            .iter()
            .flat_map(|r| r.iter().enumerate().map(|(k, x)| (x - self.x_mean[k]) / self.x_std[k]))
            .collect();
        Tensor::matrix(rows.len(), d, data)
    }

    /// Predictions in target units, `[rows, out]`.
    fn forward(&self, tape: &mut Tape, weights: &[Var], x: Var) -> Result<Var> {
        let mut h = x;
        for (i, &w) in weights.iter().enumerate() {
            let hb = with_bias(tape, h)?;
            h = tape.matmul_nt(hb, w)?;
            if i + 1 < weights.len() {
                h = tape.relu(h)?;
            }
        }
        let rows = tape.value(h).rows();
        let tile = |v: &[f64]| Tensor::new(vec![rows, v.len()], v.repeat(rows));
        let std = tape.constant(tile(&self.y_std)?);
        let mean = tape.constant(tile(&self.y_mean)?);
        let scaled = tape.mul(h, std)?;
        tape.add(scaled, mean)
    }

    pub fn predict(&self, row: &[f64]) -> Vec<f64> {
        let mut tape = Tape::new();
        let x = tape.constant(self.scaled_inputs(&[row.to_vec()]).expect("row width"));
        let w: Vec<Var> = self.layers.iter().map(|t| tape.constant(t.clone())).collect();
        let out = self.forward(&mut tape, &w, x).expect("mlp forward");
        tape.value(out).data().to_vec()
    }

    /// Mean training loss of the current weights.
    pub fn loss(&self, rows: &[Vec<f64>], targets: &[Vec<f64>], relative: bool) -> Result<f64> {
        let mut tape = Tape::new();
        let w: Vec<Var> = self.layers.iter().map(|t| tape.constant(t.clone())).collect();
        let l = self.loss_var(&mut tape, &w, rows, targets, relative)?;
        Ok(tape.value(l).item())
    }

    fn loss_var(&self, tape: &mut Tape, w: &[Var], rows: &[Vec<f64>], targets: &[Vec<f64>], relative: bool) -> Result<Var> {
        let x = tape.constant(self.scaled_inputs(rows)?);
        let pred = self.forward(tape, w, x)?;
        let o = self.y_mean.len();
        let y = tape.constant(Tensor::matrix(rows.len(), o, targets.concat())?);
        let diff = tape.sub(pred, y)?;
        let diff = if relative {
            let inv = targets.iter().flatten().map(|t| 1.0 / t).collect();
            let inv = tape.constant(Tensor::matrix(rows.len(), o, inv)?);
            tape.mul(diff, inv)?
        } else {
            diff
        };
        let sq = tape.mul(diff, diff)?;
        tape.mean(sq)
    }
}

/// Train a 3-layer MLP with full-batch Adam.
pub fn fit_mlp(rows: &[Vec<f64>], targets: &[Vec<f64>], cfg: &MlpConfig) -> Result<Mlp> {
    if rows.is_empty() || rows.len() != targets.len() {
        return Err(Error::invalid(format!("MLP fit needs matching non-empty rows ({} vs {})", rows.len(), targets.len())));
    }
    let (d_in, d_out) = (rows[0].len(), targets[0].len());
    if rows.iter().any(|r| r.len() != d_in) || targets.iter().any(|t| t.len() != d_out) || cfg.hidden == 0 {
        return Err(Error::shape("fit_mlp", "ragged rows or zero width"));
    }
    if cfg.relative && targets.iter().flatten().any(|t| *t == 0.0) {
        return Err(Error::invalid("relative loss needs non-zero targets"));
    }
    let mut net = Mlp::init(d_in, d_out, cfg, rows, targets);
    let mut adam = Adam::new(cfg.learning_rate, &net.layers);
    for _ in 0..cfg.epochs {
        let mut tape = Tape::new();
        let w: Vec<Var> = net.layers.iter().map(|t| tape.param(t.clone())).collect();
        let loss = net.loss_var(&mut tape, &w, rows, targets, cfg.relative)?;
        let grads = tape.backward(loss)?;
        let g: Vec<Tensor> = w.iter().zip(&net.layers).map(|(&v, t)| grads.get_or_zeros(v, t.shape())).collect();
        adam.step(&mut net.layers, &g)?;
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{fit_linear, RIDGE};

    fn xor() -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let (a, b) = ((i % 2) as f64, ((i / 2) % 2) as f64);
            let jitter = (i as f64 * 0.61).sin() * 0.05;
            rows.push(vec![a + jitter, b - jitter]);
            y.push(vec![if (a > 0.5) != (b > 0.5) { 1.0 } else { 0.0 }]);
        }
        (rows, y)
    }

    #[test]
    fn zero_epochs_returns_init() {
        let (x, y) = xor();
        let cfg = MlpConfig { epochs: 0, relative: false, ..MlpConfig::default() };
        let net = fit_mlp(&x, &y, &cfg).unwrap();
        assert_eq!(net, Mlp::init(2, 1, &cfg, &x, &y));
    }

    #[test]
    fn beats_linear_on_xor() {
        let (x, y) = xor();
        let cfg = MlpConfig { epochs: 400, relative: false, ..MlpConfig::default() };
        let net = fit_mlp(&x, &y, &cfg).unwrap();
        let flat: Vec<f64> = y.iter().map(|t| t[0]).collect();
        let lin = fit_linear(&x, &flat, RIDGE).unwrap();
        let lin_mse = x.iter().zip(&flat).map(|(r, t)| (lin.predict(r) - t).powi(2)).sum::<f64>() / x.len() as f64;
        let mlp_mse = net.loss(&x, &y, false).unwrap();
        assert!(mlp_mse < 0.5 * lin_mse, "mlp {mlp_mse} vs linear {lin_mse}");
    }

    #[test]
    fn seeded_fit_is_reproducible() {
        let (x, y) = xor();
        let cfg = MlpConfig { epochs: 20, relative: false, seed: 7, ..MlpConfig::default() };
        assert_eq!(fit_mlp(&x, &y, &cfg).unwrap(), fit_mlp(&x, &y, &cfg).unwrap());
        assert!(fit_mlp(&x, &y, &MlpConfig { relative: true, ..cfg }).is_err());
    }
}
