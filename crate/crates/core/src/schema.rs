//! On-disk formats: the client file (JSON) and the run configuration (TOML).

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fl_sim::{noniid_histograms, NonIidSpec, TrainerConfig};
use crate::pool_select::{Candidate, SelectionMethod};
use crate::rng::{derive_seed, stream};
use crate::scheduler::SchedulerConfig;
use crate::scoring::{
    cost, criterion, data_distribution_score, overall_score, ScoreVector, Weights, DEFAULT_HISTORY_PRIOR, NUM_CRITERIA,
};
use crate::subset_gen::SubsetGenConfig;
use crate::types::{ClientId, Histogram};

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientRecord {
    pub id: ClientId,
    pub scores: Vec<f64>,
    pub cost: u64,
    pub histogram: Histogram,
    #[serde(default = "yes")]
    pub available: bool,
    /// Overall score to use verbatim instead of weighting `scores`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClientFile {
    pub clients: Vec<ClientRecord>,
    pub n_classes: usize,
}

impl ClientFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ClientFile = serde_json::from_str(text).map_err(|e| Error::Config(format!("client file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("client file serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for c in &self.clients {
            if !seen.insert(&c.id) {
                return Err(Error::Config(format!("duplicate client id {}", c.id)));
            }
            if c.scores.len() != NUM_CRITERIA {
                return Err(Error::Config(format!(
                    "client {}: expected {NUM_CRITERIA} scores, got {}",
                    c.id,
                    c.scores.len()
                )));
            }
            if c.scores.iter().any(|s| !s.is_finite()) {
                return Err(Error::Config(format!("client {}: non-finite score", c.id)));
            }
            if c.histogram.classes() != self.n_classes {
                return Err(Error::Config(format!(
                    "client {}: histogram has {} classes, file declares {}",
                    c.id,
                    c.histogram.classes(),
                    self.n_classes
                )));
            }
            if c.score.is_some_and(|s| !s.is_finite()) {
                return Err(Error::Config(format!("client {}: non-finite score", c.id)));
            }
        }
        Ok(())
    }

    /// Stage-one candidates; the overall score is the explicit `score` when
    /// present and the weighted criterion sum otherwise.
    pub fn candidates(&self, weights: &Weights) -> Result<Vec<Candidate>> {
        self.clients
            .iter()
            .map(|c| {
                let sv = ScoreVector::from_slice(&c.scores)?;
                let score = c.score.unwrap_or_else(|| overall_score(weights, &sv));
                Ok(Candidate::new(c.id.clone(), score, c.cost, sv))
            })
            .collect()
    }

    pub fn pool(&self) -> Vec<(ClientId, Histogram)> {
        self.clients.iter().map(|c| (c.id.clone(), c.histogram.clone())).collect()
    }

    /// Clients listed in `ids`, in file order.
    pub fn restrict(&self, ids: &[ClientId]) -> ClientFile {
        let keep: BTreeSet<&ClientId> = ids.iter().collect();
        ClientFile {
            clients: self.clients.iter().filter(|c| keep.contains(&c.id)).cloned().collect(),
            n_classes: self.n_classes,
        }
    }
}

/// Builds a client file for a synthetic pool: resource criteria are drawn
/// uniformly from `[0, 1]`, the data-size criterion is the client's share
/// of the largest dataset, the distribution criterion is `1 - Nid`, and
/// quality and behavior start at the history prior.
pub fn synthetic_client_file(spec: &NonIidSpec, params: &SelectionParams) -> Result<ClientFile> {
    let histograms = noniid_histograms(spec)?;
    let weights = params.weights()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, stream::POOL));
    let largest = histograms.iter().map(Histogram::total).max().unwrap_or(1).max(1) as f64;
    let clients = histograms
        .into_iter()
        .enumerate()
        .map(|(i, h)| {
            let mut s = [0.0; NUM_CRITERIA];
            for v in s.iter_mut().take(criterion::DATA_SIZE) {
                *v = (rng.gen::<f64>() * 100.0).round() / 100.0;
            }
            s[criterion::DATA_SIZE] = h.total() as f64 / largest;
            s[criterion::DATA_DIST] = data_distribution_score(&h)?;
            s[criterion::MODEL_QUALITY] = DEFAULT_HISTORY_PRIOR;
            s[criterion::BEHAVIOR] = DEFAULT_HISTORY_PRIOR;
            let score = overall_score(&weights, &ScoreVector(s));
            Ok(ClientRecord {
                id: ClientId::from(i),
                scores: s.to_vec(),
                cost: cost(score, params.a, params.b).max(0) as u64,
                histogram: h,
                available: true,
                score: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClientFile { clients, n_classes: spec.n_classes })
}

/// Stage-one parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionParams {
    /// Cost budget; `None` keeps every client.
    pub budget: Option<u64>,
    pub min_clients: usize,
    pub thresholds: Vec<f64>,
    pub a: f64,
    pub b: f64,
    pub weights: Vec<f64>,
    pub method: SelectionMethod,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            budget: None,
            min_clients: 0,
            thresholds: vec![0.0; NUM_CRITERIA],
            a: 2.0,
            b: 5.0,
            weights: vec![1.0; NUM_CRITERIA],
            method: SelectionMethod::Greedy,
        }
    }
}

impl SelectionParams {
    pub fn weights(&self) -> Result<Weights> {
        Weights::from_slice(&self.weights).map_err(|e| Error::Config(format!("selection.weights: {e}")))
    }

    pub fn thresholds(&self) -> Result<ScoreVector> {
        ScoreVector::from_slice(&self.thresholds).map_err(|e| Error::Config(format!("selection.thresholds: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        self.weights()?;
        self.thresholds()?;
        if !(self.a.is_finite() && self.b.is_finite()) {
            return Err(Error::Config("selection.a and selection.b must be finite".into()));
        }
        Ok(())
    }
}

/// Everything `simulate` needs. Component seeds are derived from `seed`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub pool: NonIidSpec,
    pub selection: SelectionParams,
    pub scheduler: SchedulerConfig,
    pub trainer: TrainerConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.pool.validate()?;
        self.selection.validate()?;
        self.scheduler.validate()?;
        self.trainer.validate()
    }

    pub fn subsets(&self) -> &SubsetGenConfig {
        &self.scheduler.subsets
    }

    /// Copies with every component seed derived from the top-level seed.
    pub fn seeded(&self) -> RunConfig {
        let mut cfg = self.clone();
        cfg.pool.seed = derive_seed(self.seed, stream::POOL);
        cfg.scheduler.seed = derive_seed(self.seed, stream::SUBSETS);
        cfg.scheduler.subsets.solver.seed = derive_seed(self.seed, stream::SUBSETS);
        cfg.trainer.seed = derive_seed(self.seed, stream::TRAINER);
        cfg
    }
}
