use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::data::{Samples, SyntheticDataset};
use super::model::{Classifier, ModelKind};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scheduler::{RoundExecutor, RoundReport};
use crate::scoring::{cosine_similarity, QualityMode};
use crate::types::ClientId;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub model: ModelKind,
    pub hidden: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Server step size applied to the averaged update.
    pub server_lr: f64,
    pub quality: QualityMode,
    pub seed: u64,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            model: ModelKind::Softmax,
            hidden: 32,
            epochs: 2,
            batch_size: 16,
            lr: 0.05,
            server_lr: 1.0,
            quality: QualityMode::Weights,
            seed: 0,
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(Error::Config(format!("lr {} must be finite and non-negative", self.lr)));
        }
        if !(self.server_lr.is_finite() && self.server_lr >= 0.0) {
            return Err(Error::Config(format!("server_lr {} must be finite and non-negative", self.server_lr)));
        }
        if self.model == ModelKind::Mlp && self.hidden == 0 {
            return Err(Error::Config("hidden must be positive for the mlp model".into()));
        }
        Ok(())
    }
}

/// Result of one client's local training.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalUpdate {
    pub weights: Vec<f64>,
    /// `global - weights`.
    pub delta: Vec<f64>,
    pub n_samples: u64,
    pub losses: Vec<f64>,
}

/// Mini-batch gradient descent from `global` on one client's data. Returns
/// an error if the loss stops being finite.
pub fn local_train(
    model: &Classifier,
    global: &[f64],
    data: &Samples,
    epochs: usize,
    batch_size: usize,
    lr: f64,
    seed: u64,
) -> Result<LocalUpdate> {
    if global.len() != model.num_params() {
        return Err(Error::DimensionMismatch { expected: model.num_params(), actual: global.len() });
    }
    if global.iter().any(|v| !v.is_finite()) {
        return Err(Error::Trainer("non-finite global weights".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = global.to_vec();
    let mut grad = vec![0.0; w.len()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut losses = Vec::new();
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(batch_size.max(1)) {
            let loss = model.loss_grad(&w, data, batch, &mut grad);
            if !loss.is_finite() {
                return Err(Error::Trainer("local loss is not finite".into()));
            }
            losses.push(loss);
            for (wi, gi) in w.iter_mut().zip(&grad) {
                *wi -= lr * gi;
            }
        }
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Trainer("local weights diverged".into()));
    }
    let delta = global.iter().zip(&w).map(|(g, l)| g - l).collect();
    Ok(LocalUpdate { weights: w, delta, n_samples: data.len() as u64, losses })
}

/// Sample-size weights `n_k / sum(n)`.
pub fn aggregation_weights(sizes: &[u64]) -> Result<Vec<f64>> {
    let total: u64 = sizes.iter().sum();
    if total == 0 {
        return Err(Error::InvalidArgument("aggregation needs at least one sample".into()));
    }
    Ok(sizes.iter().map(|&n| n as f64 / total as f64).collect())
}

fn weighted_sum<'a>(vectors: impl Iterator<Item = &'a [f64]>, weights: &[f64]) -> Vec<f64> {
    let mut acc: Option<Vec<f64>> = None;
    for (v, &p) in vectors.zip(weights) {
        match acc.as_mut() {
            None => acc = Some(v.iter().map(|x| p * x).collect()),
            Some(a) => {
                for (ai, xi) in a.iter_mut().zip(v) {
                    *ai += p * xi;
                }
            }
        }
    }
    acc.unwrap_or_default()
}

/// Sample-weighted average of client updates, summed in list order.
pub fn weighted_delta(updates: &[(&[f64], u64)]) -> Result<Vec<f64>> {
    let dim = updates.first().map(|u| u.0.len()).ok_or(Error::InvalidArgument("no updates".into()))?;
    if let Some(bad) = updates.iter().find(|u| u.0.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, actual: bad.0.len() });
    }
    let p = aggregation_weights(&updates.iter().map(|u| u.1).collect::<Vec<_>>())?;
    Ok(weighted_sum(updates.iter().map(|u| u.0), &p))
}

/// FedAvg step `w - eta * sum(p_k * delta_k)`. An empty update list leaves
/// the model unchanged. At `eta = 1` the weighted mean of the local models
/// is returned directly, so a lone client's weights carry over exactly.
pub fn aggregate(global: &[f64], updates: &[LocalUpdate], eta: f64) -> Result<Vec<f64>> {
    if updates.is_empty() {
        return Ok(global.to_vec());
    }
    if let Some(bad) = updates.iter().find(|u| u.weights.len() != global.len()) {
        return Err(Error::DimensionMismatch { expected: global.len(), actual: bad.weights.len() });
    }
    let p = aggregation_weights(&updates.iter().map(|u| u.n_samples).collect::<Vec<_>>())?;
    let out = if eta == 1.0 {
        weighted_sum(updates.iter().map(|u| u.weights.as_slice()), &p)
    } else {
        let delta = weighted_sum(updates.iter().map(|u| u.delta.as_slice()), &p);
        global.iter().zip(&delta).map(|(w, d)| w - eta * d).collect::<Vec<_>>()
    };
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Trainer("aggregated weights are not finite".into()));
    }
    Ok(out)
}

/// Fraction of test rows whose arg-max prediction matches the label.
pub fn evaluate(model: &Classifier, params: &[f64], test: &Samples) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    let correct = (0..test.len()).filter(|&i| model.predict(params, test.row(i)) == test.labels[i]).count();
    Ok(correct as f64 / test.len() as f64)
}

/// FedAvg over a [`SyntheticDataset`], driven round by round.
#[derive(Clone, Debug)]
pub struct FedAvgTrainer {
    pub model: Classifier,
    pub config: TrainerConfig,
    dataset: SyntheticDataset,
    index: BTreeMap<ClientId, usize>,
    global: Vec<f64>,
    metric: f64,
}

impl FedAvgTrainer {
    pub fn new(dataset: SyntheticDataset, config: TrainerConfig) -> Result<Self> {
        config.validate()?;
        let model = match config.model {
            ModelKind::Softmax => Classifier::softmax(dataset.dim, dataset.classes),
            ModelKind::Mlp => Classifier::mlp(dataset.dim, dataset.classes, config.hidden),
        };
        let global = model.init(derive_seed(config.seed, 0));
        let index = dataset.clients.iter().enumerate().map(|(i, c)| (c.id.clone(), i)).collect();
        let metric = evaluate(&model, &global, &dataset.test)?;
        Ok(FedAvgTrainer { model, config, dataset, index, global, metric })
    }

    pub fn global(&self) -> &[f64] {
        &self.global
    }

    pub fn dataset(&self) -> &SyntheticDataset {
        &self.dataset
    }
}

impl RoundExecutor for FedAvgTrainer {
    fn run_round(&mut self, round: usize, participants: &[ClientId]) -> Result<RoundReport> {
        let mut ids: Vec<&ClientId> = participants.iter().collect();
        ids.sort();
        ids.dedup();

        let mut returned: Vec<(ClientId, LocalUpdate)> = Vec::with_capacity(ids.len());
        for id in ids {
            let &k = self.index.get(id).ok_or_else(|| Error::UnknownItem(id.to_string()))?;
            let seed = derive_seed(self.config.seed, ((round as u64 + 1) << 32) | k as u64);
            let data = &self.dataset.clients[k].samples;
            match local_train(
                &self.model,
                &self.global,
                data,
                self.config.epochs,
                self.config.batch_size,
                self.config.lr,
                seed,
            ) {
                Ok(u) => returned.push((id.clone(), u)),
                Err(e) => tracing::warn!(client = %id, round, error = %e, "local training failed"),
            }
        }

        let updates: Vec<LocalUpdate> = returned.iter().map(|(_, u)| u.clone()).collect();
        let next = aggregate(&self.global, &updates, self.config.server_lr)?;
        let step: Vec<f64> = self.global.iter().zip(&next).map(|(a, b)| a - b).collect();
        self.global = next;
        self.metric = evaluate(&self.model, &self.global, &self.dataset.test)?;

        let quality = returned
            .into_iter()
            .map(|(id, u)| {
                let q = match self.config.quality {
                    QualityMode::Weights => cosine_similarity(&u.weights, &self.global),
                    QualityMode::Delta => cosine_similarity(&u.delta, &step),
                };
                (id, q.unwrap_or(0.0))
            })
            .collect();
        Ok(RoundReport { quality, global_metric: self.metric })
    }

    fn metric(&self) -> f64 {
        self.metric
    }
}
