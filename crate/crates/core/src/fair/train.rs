//! Penalized training of the predictor variants and their evaluation.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mlp::Mlp;
use super::mmd::{median_bandwidth, mmd2, mmd2_with_grad};
use crate::dataset::{Dataset, DatasetError, Split};
use crate::rng::SeedTree;

/// Points used for the median bandwidth heuristic.
const BANDWIDTH_CAP: usize = 256;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("variant {0:?} has no features")]
    EmptyFeatureSet(Variant),
    #[error(transparent)]
    Data(#[from] DatasetError),
    #[error("no training rows")]
    NoTrainingRows,
    #[error("penalty needs at least two sensitive levels per arm")]
    TooFewLevels,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    Full,
    Unaware,
    IFair,
    EpsIFair,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "Full",
            Variant::Unaware => "Unaware",
            Variant::IFair => "IFair",
            Variant::EpsIFair => "EpsIFair",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthMode {
    /// Median pairwise squared distance of pooled predictions, per epoch.
    Median,
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden_width: usize,
    pub lr: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub patience: usize,
    pub lambda_grid: Vec<f64>,
    pub seeds: Vec<u64>,
    pub bandwidth_mode: BandwidthMode,
    /// Rows drawn from each interventional training set per epoch.
    pub penalty_batch: usize,
    /// Epochs between validation checks.
    pub check_every: usize,
    pub binary_outcome: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_width: 32,
            lr: 1e-2,
            momentum: 0.9,
            epochs: 2000,
            patience: 100,
            lambda_grid: vec![0.0, 0.5, 5.0, 20.0, 60.0, 100.0],
            seeds: vec![0],
            bandwidth_mode: BandwidthMode::Median,
            penalty_batch: 128,
            check_every: 10,
            binary_outcome: false,
        }
    }
}

/// Column roles shared by all variants of one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// Every predictor column (all non-outcome vertices), in a fixed order.
    pub all: Vec<String>,
    pub sensitive: String,
    pub outcome: String,
    pub definite_nondescendants: Vec<String>,
    pub admissible: Vec<String>,
}

impl FeatureSpec {
    pub fn features(&self, variant: Variant) -> Vec<String> {
        let keep = |f: &String| match variant {
            Variant::Full | Variant::EpsIFair => true,
            Variant::Unaware => *f != self.sensitive,
            Variant::IFair => {
                self.definite_nondescendants.contains(f) || self.admissible.contains(f)
            }
        };
        self.all.iter().filter(|f| keep(f)).cloned().collect()
    }
}

/// Interventional samples for one candidate graph: `arms[r][l]` was drawn
/// under admissible assignment `r` and sensitive level `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterventionalGroup {
    pub arms: Vec<Vec<Dataset>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    fn fit(cols: &[&[f64]]) -> Self {
        let (mut mean, mut std) = (Vec::new(), Vec::new());
        for c in cols {
            let n = c.len() as f64;
            let m = c.iter().sum::<f64>() / n;
            let v = c.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
            mean.push(m);
            std.push(if v.sqrt() > 1e-12 { v.sqrt() } else { 1.0 });
        }
        Standardizer { mean, std }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairPredictor {
    pub variant: Variant,
    pub features: Vec<String>,
    pub admissible: Vec<String>,
    pub lambda: f64,
    pub seed: u64,
    pub binary_outcome: bool,
    pub x_scale: Standardizer,
    pub y_mean: f64,
    pub y_std: f64,
    pub mlp: Mlp,
    pub epochs_run: usize,
}

impl FairPredictor {
    fn design(&self, data: &Dataset) -> Result<DMatrix<f64>, DatasetError> {
        design(data, &self.features, &self.x_scale)
    }

    fn link(&self, out: f64) -> f64 {
        if self.binary_outcome {
            sigmoid(out)
        } else {
            out * self.y_std + self.y_mean
        }
    }

    /// Predictions in outcome units (probabilities in binary mode). Reads
    /// only the feature columns.
    pub fn predict(&self, data: &Dataset) -> Result<Vec<f64>, DatasetError> {
        Ok(self
            .mlp
            .predict(&self.design(data)?)
            .iter()
            .map(|&o| self.link(o))
            .collect())
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn design(
    data: &Dataset,
    features: &[String],
    scale: &Standardizer,
) -> Result<DMatrix<f64>, DatasetError> {
    let cols: Vec<&[f64]> = features
        .iter()
        .map(|f| data.column_named(f))
        .collect::<Result<_, _>>()?;
    Ok(DMatrix::from_fn(data.n(), cols.len(), |i, j| {
        (cols[j][i] - scale.mean[j]) / scale.std[j]
    }))
}

fn rows_of(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

/// `loss(obs) + λ · Σ_k w_k · D(f(sets[a_k]), f(sets[b_k]))`, where `D` is
/// MMD² (or the squared mean gap in binary mode).
#[derive(Clone, Debug)]
pub struct PenalizedObjective {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub lambda: f64,
    pub sets: Vec<DMatrix<f64>>,
    /// `(a, b, weight)` indices into `sets`.
    pub pairs: Vec<(usize, usize, f64)>,
    pub bandwidth: BandwidthMode,
    pub binary: bool,
}

impl PenalizedObjective {
    fn loss_and_dout(&self, out: &DVector<f64>) -> (f64, DVector<f64>) {
        let n = out.len() as f64;
        if self.binary {
            let mut loss = 0.0;
            let g = DVector::from_fn(out.len(), |i, _| {
                let p = sigmoid(out[i]);
                let y = self.y[i];
                loss -= y * p.max(1e-12).ln() + (1.0 - y) * (1.0 - p).max(1e-12).ln();
                (p - y) / n
            });
            (loss / n, g)
        } else {
            let r = out - &self.y;
            (r.norm_squared() / n, r * (2.0 / n))
        }
    }

    fn sigma(&self, preds: &[DVector<f64>]) -> f64 {
        match self.bandwidth {
            BandwidthMode::Fixed(s) => s,
            BandwidthMode::Median => {
                let pooled: Vec<f64> = preds.iter().flat_map(|p| p.iter().copied()).collect();
                median_bandwidth(&pooled, BANDWIDTH_CAP)
            }
        }
    }

    pub fn value(&self, mlp: &Mlp) -> f64 {
        let (loss, _) = self.loss_and_dout(&mlp.predict(&self.x));
        if self.lambda == 0.0 || self.pairs.is_empty() {
            return loss;
        }
        let preds: Vec<DVector<f64>> = self
            .sets
            .iter()
            .map(|s| {
                if self.binary {
                    mlp.predict(s).map(sigmoid)
                } else {
                    mlp.predict(s)
                }
            })
            .collect();
        let sigma = self.sigma(&preds);
        let penalty: f64 = self
            .pairs
            .iter()
            .map(|&(a, b, w)| {
                let (pa, pb) = (preds[a].as_slice(), preds[b].as_slice());
                w * if self.binary {
                    mean_gap2(pa, pb).0
                } else {
                    mmd2(pa, pb, sigma)
                }
            })
            .sum();
        loss + self.lambda * penalty
    }

    /// Objective and gradient; the bandwidth is treated as a constant.
    pub fn value_and_grad(&self, mlp: &Mlp) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; mlp.n_params()];
        let fwd = mlp.forward(&self.x);
        let (mut value, dout) = self.loss_and_dout(&fwd.output);
        mlp.backward(&self.x, &fwd, &dout, &mut grad);
        if self.lambda == 0.0 || self.pairs.is_empty() {
            return (value, grad);
        }
        let fwds: Vec<_> = self.sets.iter().map(|s| mlp.forward(s)).collect();
        let links: Vec<DVector<f64>> = fwds
            .iter()
            .map(|f| {
                if self.binary {
                    f.output.map(sigmoid)
                } else {
                    f.output.clone()
                }
            })
            .collect();
        let sigma = self.sigma(&links);
        let mut douts: Vec<DVector<f64>> = self
            .sets
            .iter()
            .map(|s| DVector::zeros(s.nrows()))
            .collect();
        for &(a, b, w) in &self.pairs {
            let (pa, pb) = (links[a].as_slice(), links[b].as_slice());
            let (v, ga, gb) = if self.binary {
                mean_gap2(pa, pb)
            } else {
                mmd2_with_grad(pa, pb, sigma)
            };
            value += self.lambda * w * v;
            for (d, g) in douts[a].iter_mut().zip(&ga) {
                *d += self.lambda * w * g;
            }
            for (d, g) in douts[b].iter_mut().zip(&gb) {
                *d += self.lambda * w * g;
            }
        }
        for ((set, fwd), mut dout) in self.sets.iter().zip(&fwds).zip(douts) {
            if self.binary {
                dout.zip_apply(&fwd.output, |d, o| {
                    let p = sigmoid(o);
                    *d *= p * (1.0 - p);
                });
            }
            mlp.backward(set, fwd, &dout, &mut grad);
        }
        (value, grad)
    }
}

/// `(mean(a) - mean(b))²` with its gradients.
fn mean_gap2(a: &[f64], b: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    let d = ma - mb;
    (
        d * d,
        vec![2.0 * d / a.len() as f64; a.len()],
        vec![-2.0 * d / b.len() as f64; b.len()],
    )
}

/// Level pairs `(i, j)`, `i < j`, of every arm of every group, weighted so
/// the penalty is a mean over groups, then arms, then pairs.
fn comparison_layout(
    groups: &[InterventionalGroup],
) -> Result<(Vec<&Dataset>, Vec<(usize, usize, f64)>), TrainError> {
    let mut sets = Vec::new();
    let mut pairs = Vec::new();
    let g_w = 1.0 / groups.len().max(1) as f64;
    for group in groups {
        let r_w = g_w / group.arms.len().max(1) as f64;
        for arm in &group.arms {
            if arm.len() < 2 {
                return Err(TrainError::TooFewLevels);
            }
            let base = sets.len();
            sets.extend(arm.iter());
            let n_pairs = arm.len() * (arm.len() - 1) / 2;
            for i in 0..arm.len() {
                for j in i + 1..arm.len() {
                    pairs.push((base + i, base + j, r_w / n_pairs as f64));
                }
            }
        }
    }
    Ok((sets, pairs))
}

/// Trains one predictor. Full, Unaware and IFair ignore `lambda` and the
/// interventional data; EpsIFair minimizes loss plus `lambda` times the mean
/// discrepancy between predictions on interventional data of different
/// sensitive levels. Parameters with the best validation objective are
/// returned.
pub fn train_predictor(
    variant: Variant,
    lambda: f64,
    obs: &Dataset,
    groups: &[InterventionalGroup],
    spec: &FeatureSpec,
    config: &TrainConfig,
    seed: u64,
) -> Result<FairPredictor, TrainError> {
    let features = spec.features(variant);
    if features.is_empty() {
        return Err(TrainError::EmptyFeatureSet(variant));
    }
    let lambda = if variant == Variant::EpsIFair {
        lambda
    } else {
        0.0
    };
    let train = obs.subset(Split::Train);
    let val = obs.subset(Split::Val);
    if train.n() == 0 {
        return Err(TrainError::NoTrainingRows);
    }
    let cols: Vec<&[f64]> = features
        .iter()
        .map(|f| train.column_named(f))
        .collect::<Result<_, _>>()?;
    let x_scale = Standardizer::fit(&cols);
    let y_train = train.column_named(&spec.outcome)?;
    let y_stats = Standardizer::fit(&[y_train]);
    let (y_mean, y_std) = if config.binary_outcome {
        (0.0, 1.0)
    } else {
        (y_stats.mean[0], y_stats.std[0])
    };
    let target = |d: &Dataset| -> Result<DVector<f64>, DatasetError> {
        Ok(DVector::from_iterator(
            d.n(),
            d.column_named(&spec.outcome)?
                .iter()
                .map(|y| (y - y_mean) / y_std),
        ))
    };

    let (sets, pairs) = if lambda > 0.0 {
        comparison_layout(groups)?
    } else {
        (Vec::new(), Vec::new())
    };
    let set_train: Vec<DMatrix<f64>> = sets
        .iter()
        .map(|d| design(&d.subset(Split::Train), &features, &x_scale))
        .collect::<Result<_, _>>()?;
    let set_val: Vec<DMatrix<f64>> = sets
        .iter()
        .map(|d| design(&d.subset(Split::Val), &features, &x_scale))
        .collect::<Result<_, _>>()?;

    let root = SeedTree::new(seed);
    let mut mlp = Mlp::init(
        features.len(),
        config.hidden_width,
        &mut root.child_str("init").rng(),
    );
    let mut batch_rng = root.child_str("batch").rng();

    let mut objective = PenalizedObjective {
        x: design(&train, &features, &x_scale)?,
        y: target(&train)?,
        lambda,
        sets: Vec::new(),
        pairs: pairs.clone(),
        bandwidth: config.bandwidth_mode,
        binary: config.binary_outcome,
    };
    let val_objective = PenalizedObjective {
        x: design(&val, &features, &x_scale)?,
        y: target(&val)?,
        lambda,
        sets: set_val,
        pairs,
        bandwidth: config.bandwidth_mode,
        binary: config.binary_outcome,
    };

    // Descent on (MSE + λ·MMD²) / (1 + λ).
    let step = config.lr / (1.0 + lambda);
    let mut params = mlp.params();
    let mut velocity = vec![0.0; params.len()];
    let mut best = (f64::INFINITY, params.clone());
    let mut since_best = 0;
    let mut epochs_run = 0;
    for epoch in 0..config.epochs {
        if lambda > 0.0 {
            objective.sets = set_train
                .iter()
                .map(|x| {
                    if x.nrows() <= config.penalty_batch {
                        x.clone()
                    } else {
                        let mut idx =
                            sample_indices(&mut batch_rng, x.nrows(), config.penalty_batch)
                                .into_vec();
                        idx.sort_unstable();
                        rows_of(x, &idx)
                    }
                })
                .collect();
        }
        let (_, grad) = objective.value_and_grad(&mlp);
        for ((p, v), g) in params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
            *v = config.momentum * *v - step * g;
            *p += *v;
        }
        mlp.set_params(&params);
        epochs_run = epoch + 1;
        if epochs_run % config.check_every.max(1) == 0 || epochs_run == config.epochs {
            let v = if val_objective.x.nrows() > 0 {
                val_objective.value(&mlp)
            } else {
                objective.value(&mlp)
            };
            if v < best.0 {
                best = (v, params.clone());
                since_best = 0;
            } else {
                since_best += config.check_every.max(1);
                if since_best >= config.patience {
                    break;
                }
            }
        }
    }
    if best.0.is_finite() {
        mlp.set_params(&best.1);
    }
    Ok(FairPredictor {
        variant,
        features,
        admissible: spec.admissible.clone(),
        lambda,
        seed,
        binary_outcome: config.binary_outcome,
        x_scale,
        y_mean,
        y_std,
        mlp,
        epochs_run,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub rmse: f64,
    /// MMD² (mean absolute gap in binary mode), averaged over admissible
    /// arms and sensitive-level pairs.
    pub mmd2: f64,
    pub lambda: f64,
    pub seed: u64,
}

/// Median pairwise squared distance of an outcome sample; the evaluation
/// bandwidth shared by every model on one problem.
pub fn eval_bandwidth(y: &[f64]) -> f64 {
    median_bandwidth(y, 1000)
}

/// RMSE on `obs_test` and the averaged unfairness over `truth[r][l]`
/// (admissible arm `r`, sensitive level `l`).
pub fn evaluate(
    model: &FairPredictor,
    outcome: &str,
    obs_test: &Dataset,
    truth: &[Vec<Dataset>],
    sigma: f64,
) -> Result<EvalRecord, TrainError> {
    let pred = model.predict(obs_test)?;
    let y = obs_test.column_named(outcome)?;
    let rmse = (pred
        .iter()
        .zip(y)
        .map(|(p, y)| (p - y) * (p - y))
        .sum::<f64>()
        / y.len().max(1) as f64)
        .sqrt();
    let mut arm_scores = Vec::new();
    for arm in truth {
        let preds: Vec<Vec<f64>> = arm
            .iter()
            .map(|d| model.predict(d))
            .collect::<Result<_, _>>()?;
        let mut scores = Vec::new();
        for i in 0..preds.len() {
            for j in i + 1..preds.len() {
                scores.push(if model.binary_outcome {
                    mean_gap2(&preds[i], &preds[j]).0.sqrt()
                } else {
                    mmd2(&preds[i], &preds[j], sigma)
                });
            }
        }
        if !scores.is_empty() {
            arm_scores.push(scores.iter().sum::<f64>() / scores.len() as f64);
        }
    }
    let mmd2 = if arm_scores.is_empty() {
        0.0
    } else {
        arm_scores.iter().sum::<f64>() / arm_scores.len() as f64
    };
    Ok(EvalRecord {
        rmse,
        mmd2,
        lambda: model.lambda,
        seed: model.seed,
    })
}

/// Training-split means of the admissible columns.
pub fn admissible_intervention_values(
    data: &Dataset,
    admissible: &[String],
) -> Result<BTreeMap<String, f64>, DatasetError> {
    let train = data.subset(Split::Train);
    let src = if train.n() > 0 { &train } else { data };
    admissible
        .iter()
        .map(|a| {
            let c = src.column_named(a)?;
            Ok((a.clone(), c.iter().sum::<f64>() / c.len() as f64))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SplitScheme;
    use rand::{Rng, SeedableRng};

    fn toy(n: usize, seed: u64, shift: f64) -> Dataset {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(0..2) as f64).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| 2.0 * a[i] + w[i] + shift + 0.1 * rng.random_range(-1.0..1.0))
            .collect();
        Dataset::new(
            vec!["A".into(), "W".into(), "Y".into()],
            vec![a, w, y],
            SplitScheme::Observational,
        )
        .unwrap()
    }

    fn spec() -> FeatureSpec {
        FeatureSpec {
            all: vec!["A".into(), "W".into()],
            sensitive: "A".into(),
            outcome: "Y".into(),
            definite_nondescendants: vec!["W".into()],
            admissible: vec![],
        }
    }

    fn clamp(d: &Dataset, a: f64) -> Dataset {
        let mut d = d.clone();
        d.column_mut(0).fill(a);
        Dataset::new(
            d.names().to_vec(),
            d.columns().to_vec(),
            SplitScheme::Interventional,
        )
        .unwrap()
    }

    fn small() -> TrainConfig {
        TrainConfig {
            epochs: 300,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn feature_sets() {
        let s = spec();
        assert_eq!(s.features(Variant::Full), ["A", "W"]);
        assert_eq!(s.features(Variant::Unaware), ["W"]);
        assert_eq!(s.features(Variant::IFair), ["W"]);
        let empty = FeatureSpec {
            definite_nondescendants: vec![],
            ..spec()
        };
        let obs = toy(100, 1, 0.0);
        assert!(matches!(
            train_predictor(Variant::IFair, 0.0, &obs, &[], &empty, &small(), 0),
            Err(TrainError::EmptyFeatureSet(Variant::IFair))
        ));
    }

    #[test]
    fn zero_lambda_matches_full() {
        let obs = toy(300, 2, 0.0);
        let full = train_predictor(Variant::Full, 0.0, &obs, &[], &spec(), &small(), 5).unwrap();
        let eps = train_predictor(Variant::EpsIFair, 0.0, &obs, &[], &spec(), &small(), 5).unwrap();
        assert_eq!(full.mlp, eps.mlp);
    }

    #[test]
    fn penalty_reduces_unfairness() {
        let obs = toy(500, 3, 0.0);
        let base = toy(500, 4, 0.0);
        let groups = [InterventionalGroup {
            arms: vec![vec![clamp(&base, 0.0), clamp(&base, 1.0)]],
        }];
        let truth = vec![vec![
            clamp(&toy(400, 5, 0.0), 0.0),
            clamp(&toy(400, 5, 0.0), 1.0),
        ]];
        let test = obs.subset(Split::Test);
        let sigma = eval_bandwidth(test.column_named("Y").unwrap());
        let cfg = small();
        let score = |lambda| {
            let m = train_predictor(Variant::EpsIFair, lambda, &obs, &groups, &spec(), &cfg, 1)
                .unwrap();
            evaluate(&m, "Y", &test, &truth, sigma).unwrap()
        };
        let (loose, tight) = (score(0.0), score(50.0));
        assert!(tight.mmd2 < loose.mmd2 / 3.0, "{loose:?} {tight:?}");
        assert!(tight.rmse > loose.rmse);
    }

    #[test]
    fn constant_predictor_scores() {
        let obs = toy(200, 6, 0.0);
        let spec = spec();
        let mut m = train_predictor(Variant::Unaware, 0.0, &obs, &[], &spec, &small(), 0).unwrap();
        let n = m.mlp.n_params();
        m.mlp.set_params(&vec![0.0; n]);
        let y = obs.column_named("Y").unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        m.y_mean = mean;
        let truth = vec![vec![clamp(&obs, 0.0), clamp(&obs, 1.0)]];
        let rec = evaluate(&m, "Y", &obs, &truth, 1.0).unwrap();
        let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
        assert!(rec.mmd2.abs() < 1e-12);
        assert!((rec.rmse - sd).abs() < 1e-9);
    }

    #[test]
    fn three_levels_give_three_pairs() {
        let d = toy(20, 1, 0.0);
        let groups = [InterventionalGroup {
            arms: vec![vec![d.clone(), d.clone(), d]],
        }];
        let (sets, pairs) = comparison_layout(&groups).unwrap();
        assert_eq!(sets.len(), 3);
        assert_eq!(pairs.len(), 3);
        assert!((pairs.iter().map(|p| p.2).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn admissible_means() {
        let d = toy(1000, 8, 0.0);
        assert!(admissible_intervention_values(&d, &[]).unwrap().is_empty());
        let m = admissible_intervention_values(&d, &["W".into()]).unwrap();
        assert!(m["W"].abs() < 0.1);
    }

    #[test]
    fn binary_mode_trains() {
        let mut obs = toy(300, 9, 0.0);
        let y: Vec<f64> = obs
            .column_named("Y")
            .unwrap()
            .iter()
            .map(|&v| (v > 1.0) as u8 as f64)
            .collect();
        obs.column_mut(2).copy_from_slice(&y);
        let cfg = TrainConfig {
            binary_outcome: true,
            ..small()
        };
        let groups = [InterventionalGroup {
            arms: vec![vec![clamp(&obs, 0.0), clamp(&obs, 1.0)]],
        }];
        let m = train_predictor(Variant::EpsIFair, 5.0, &obs, &groups, &spec(), &cfg, 0).unwrap();
        let p = m.predict(&obs).unwrap();
        assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
