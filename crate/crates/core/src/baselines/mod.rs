//! Feature-based baselines: ridge regression and a 3-layer MLP over the
//! structural measures, for cascade size (FBC) and personality (FBP).

mod linear;
mod mlp;

pub use linear::{cholesky_solve, fit_linear, LinearModel, RIDGE};
pub use mlp::{fit_mlp, Mlp, MlpConfig};

use crate::datasets::{Cascade, Dataset, Split};
use crate::error::{Error, Result};
use crate::graph::StructuralFeatures;
use crate::training::{mape, personality_targets, rmrse, MetricsRecord, Task};

/// One row of structural measures per node, in feature-file column order.
pub fn user_features(features: &StructuralFeatures) -> Vec<Vec<f64>> {
    (0..features.node_count()).map(|v| features.row(v).to_vec()).collect()
}

/// Observed prefix size followed by the mean of each structural measure
/// over the observed adopters.
pub fn cascade_features(features: &StructuralFeatures, cascade: &Cascade) -> Result<Vec<f64>> {
    let j = cascade
        .observed_len()
        .ok_or_else(|| Error::invalid(format!("cascade {} has no observed prefix", cascade.id)))?;
    if j == 0 {
        return Err(Error::invalid(format!("cascade {} has an empty prefix", cascade.id)));
    }
    let width = features.matrix().row_len();
    let mut row = vec![0.0; width + 1];
    row[0] = j as f64;
    for &u in cascade.observed() {
        for (acc, x) in row[1..].iter_mut().zip(features.row(u)) {
            *acc += x;
        }
    }
    row[1..].iter_mut().for_each(|x| *x /= j as f64);
    Ok(row)
}

/// Test metrics of one baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselineResult {
    pub name: &'static str,
    pub metrics: MetricsRecord,
}

fn record(task: Task, split: Split, pred: &[f64], truth: &[f64]) -> Result<MetricsRecord> {
    Ok(MetricsRecord { task, split, epoch: None, rmrse: rmrse(pred, truth)?, mape: mape(pred, truth)? })
}

fn cascade_rows(dataset: &Dataset, split: Split) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let idx = dataset.indices(split);
    let rows = idx
        .iter()
        .map(|&i| cascade_features(&dataset.features, &dataset.cascades[i]))
        .collect::<Result<Vec<_>>>()?;
    let sizes = idx.iter().map(|&i| dataset.cascades[i].total_size() as f64).collect();
    Ok((rows, sizes))
}

/// FBC-r, FBC-m, FBP-r and FBP-m. Cascade models train on the training
/// split and report on `eval_split`; personality models fit and report on
/// every node, matching the transductive setting of the graph models.
pub fn run_baselines(dataset: &Dataset, mlp: &MlpConfig, eval_split: Split) -> Result<Vec<BaselineResult>> {
    let (train_x, train_y) = cascade_rows(dataset, Split::Train)?;
    let (test_x, test_y) = cascade_rows(dataset, eval_split)?;
    if train_x.is_empty() || test_x.is_empty() {
        return Err(Error::invalid("baselines need non-empty training and evaluation splits"));
    }
    let mut out = Vec::new();

    let lin = fit_linear(&train_x, &train_y, RIDGE)?;
    let pred: Vec<f64> = test_x.iter().map(|r| lin.predict(r)).collect();
    out.push(BaselineResult { name: "FBC-r", metrics: record(Task::Cascade, eval_split, &pred, &test_y)? });

    let targets: Vec<Vec<f64>> = train_y.iter().map(|&y| vec![y]).collect();
    let net = fit_mlp(&train_x, &targets, mlp)?;
    let pred: Vec<f64> = test_x.iter().map(|r| net.predict(r)[0]).collect();
    out.push(BaselineResult { name: "FBC-m", metrics: record(Task::Cascade, eval_split, &pred, &test_y)? });

    let users = user_features(&dataset.features);
    let q = personality_targets(dataset);
    let truth = q.data().to_vec();
    let mut pred = vec![0.0; truth.len()];
    for t in 0..5 {
        let y: Vec<f64> = (0..users.len()).map(|v| q.get2(v, t)).collect();
        let model = fit_linear(&users, &y, RIDGE)?;
        for (v, row) in users.iter().enumerate() {
            pred[v * 5 + t] = model.predict(row);
        }
    }
    out.push(BaselineResult { name: "FBP-r", metrics: record(Task::Personality, Split::Train, &pred, &truth)? });

    let targets: Vec<Vec<f64>> = (0..users.len()).map(|v| q.row(v).to_vec()).collect();
    let net = fit_mlp(&users, &targets, mlp)?;
    let pred: Vec<f64> = users.iter().flat_map(|r| net.predict(r)).collect();
    out.push(BaselineResult { name: "FBP-m", metrics: record(Task::Personality, Split::Train, &pred, &truth)? });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{synth_generate, SynthConfig};
    use crate::graph::{structural_features, Graph};

    #[test]
    fn triangle_rows_are_identical() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], false).unwrap();
        let rows = user_features(&structural_features(&g).unwrap());
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].len(), 6);
        for r in &rows[1..] {
            for (a, b) in r.iter().zip(&rows[0]) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn prefix_means() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], false).unwrap();
        let f = structural_features(&g).unwrap();
        let single = Cascade::new("a", vec![2, 0]).unwrap().with_observed_len(1).unwrap();
        let row = cascade_features(&f, &single).unwrap();
        assert_eq!(row[0], 1.0);
        assert_eq!(&row[1..], f.row(2));

        let pair = Cascade::new("b", vec![0, 1, 3]).unwrap().with_observed_len(2).unwrap();
        let row = cascade_features(&f, &pair).unwrap();
        assert_eq!(row[0], 2.0);
        for k in 0..6 {
            assert!((row[k + 1] - (f.row(0)[k] + f.row(1)[k]) / 2.0).abs() < 1e-15);
        }
        // the two path ends are structurally identical
        let ends = Cascade::new("c", vec![0, 3]).unwrap().with_observed_len(2).unwrap();
        let row = cascade_features(&f, &ends).unwrap();
        for k in 0..6 {
            assert!((row[k + 1] - f.row(0)[k]).abs() < 1e-12);
        }
        assert!(cascade_features(&f, &Cascade::new("d", vec![1]).unwrap()).is_err());
    }

    #[test]
    fn all_four_baselines_report() {
        let mut d = synth_generate(&SynthConfig { nodes: 40, cascades: 30, seed: 2, ..SynthConfig::default() }).unwrap();
        d.observe(0.5).unwrap();
        let cfg = MlpConfig { epochs: 50, ..MlpConfig::default() };
        let res = run_baselines(&d, &cfg, Split::Test).unwrap();
        let names: Vec<_> = res.iter().map(|r| r.name).collect();
        assert_eq!(names, ["FBC-r", "FBC-m", "FBP-r", "FBP-m"]);
        assert!(res.iter().all(|r| r.metrics.rmrse.is_finite() && r.metrics.mape >= 0.0));
        assert_eq!(run_baselines(&d, &cfg, Split::Test).unwrap(), res);
    }
}
