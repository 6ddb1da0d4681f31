//! Per-client criterion scores, non-iid degree, overall score, cost and
//! reputation quantities.
//!
//! The eleven criteria, in order, are CPU, GPU, memory, storage, power,
//! bandwidth, connection, data size, data distribution, historical model
//! quality and behavior. Everything here is a pure function.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::Histogram;

pub const NUM_CRITERIA: usize = 11;

/// Prior used for both historical scores when a client has no task history.
pub const DEFAULT_HISTORY_PRIOR: f64 = 0.5;

/// Number of recent tasks kept in a [`ReputationRecord`] by default.
pub const DEFAULT_REPUTATION_WINDOW: usize = 10;

/// Indices into a [`ScoreVector`].
pub mod criterion {
    pub const CPU: usize = 0;
    pub const GPU: usize = 1;
    pub const MEM: usize = 2;
    pub const STORAGE: usize = 3;
    pub const POWER: usize = 4;
    pub const BANDWIDTH: usize = 5;
    pub const CONNECTION: usize = 6;
    pub const DATA_SIZE: usize = 7;
    pub const DATA_DIST: usize = 8;
    pub const MODEL_QUALITY: usize = 9;
    pub const BEHAVIOR: usize = 10;
}

/// Raw resources a client reports, in the requester's native units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResourceProfile {
    pub cpu: f64,
    pub gpu: f64,
    pub mem: f64,
    pub storage: f64,
    pub power: f64,
    pub bandwidth: f64,
    pub connection: f64,
    pub data_size: u64,
}

impl ResourceProfile {
    /// The eight raw quantities that are scored by ratio to a minimum.
    pub fn as_array(&self) -> [f64; 8] {
        [self.cpu, self.gpu, self.mem, self.storage, self.power, self.bandwidth, self.connection, self.data_size as f64]
    }

    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::InvalidArgument("resource profile fields must be non-negative".into()));
        }
        Ok(())
    }
}

/// The eleven normalized criterion scores of one client.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(pub [f64; NUM_CRITERIA]);

impl ScoreVector {
    pub fn splat(value: f64) -> Self {
        ScoreVector([value; NUM_CRITERIA])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; NUM_CRITERIA] =
            values.try_into().map_err(|_| Error::DimensionMismatch { expected: NUM_CRITERIA, actual: values.len() })?;
        Ok(ScoreVector(arr))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Component-wise `self >= other`.
    pub fn dominates(&self, other: &ScoreVector) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }
}

/// Server-chosen criterion weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Weights(pub [f64; NUM_CRITERIA]);

impl Weights {
    pub fn uniform() -> Self {
        Weights([1.0; NUM_CRITERIA])
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; NUM_CRITERIA] =
            values.try_into().map_err(|_| Error::DimensionMismatch { expected: NUM_CRITERIA, actual: values.len() })?;
        let w = Weights(arr);
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be non-negative".into()));
        }
        if self.0.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidArgument("at least one weight must be positive".into()));
        }
        Ok(())
    }
}

impl Default for Weights {
    fn default() -> Self {
        Weights::uniform()
    }
}

/// Per-task quality and behavior history of a client over its most recent
/// tasks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReputationRecord {
    pub per_task_quality: Vec<f64>,
    pub per_task_behavior: Vec<f64>,
    pub window: usize,
}

impl ReputationRecord {
    pub fn new(window: usize) -> Self {
        ReputationRecord { per_task_quality: Vec::new(), per_task_behavior: Vec::new(), window: window.max(1) }
    }

    /// Appends one finished task, evicting the oldest entry past the window.
    pub fn push_task(&mut self, q_task: f64, b_task: f64) {
        self.per_task_quality.push(q_task);
        self.per_task_behavior.push(b_task.clamp(0.0, 1.0));
        while self.per_task_quality.len() > self.window {
            self.per_task_quality.remove(0);
        }
        while self.per_task_behavior.len() > self.window {
            self.per_task_behavior.remove(0);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.per_task_quality.is_empty() && self.per_task_behavior.is_empty()
    }
}

impl Default for ReputationRecord {
    fn default() -> Self {
        ReputationRecord::new(DEFAULT_REPUTATION_WINDOW)
    }
}

/// Which parameter vector stands in for the "local model" when measuring
/// per-round model quality.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityMode {
    /// Cosine of post-training local weights against the new global weights.
    #[default]
    Weights,
    /// Cosine of the local update against the aggregated global update.
    Delta,
}

pub fn resource_ratio(raw: f64, minimum: f64) -> Result<f64> {
    if !(minimum > 0.0) {
        return Err(Error::InvalidRequirement(minimum));
    }
    if !(raw >= 0.0) {
        return Err(Error::InvalidArgument(format!("resource must be non-negative, got {raw}")));
    }
    Ok(raw / minimum)
}

/// Divides every ratio by the largest one, mapping the candidate set into (0, 1].
pub fn normalize_ratios(ratios: &[f64]) -> Result<Vec<f64>> {
    if ratios.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidArgument("ratios must be non-negative".into()));
    }
    let max = ratios.iter().copied().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return Err(Error::DegenerateNormalization);
    }
    Ok(ratios.iter().map(|r| r / max).collect())
}

/// Non-iid degree: `(max - min) / sum` of a label histogram.
pub fn nid(h: &Histogram) -> Result<f64> {
    let counts = h.counts();
    if counts.is_empty() {
        return Err(Error::InvalidHistogram("no classes"));
    }
    let total = h.total();
    if total == 0 {
        return Err(Error::InvalidHistogram("zero total"));
    }
    let max = counts.iter().max().copied().unwrap_or(0);
    let min = counts.iter().min().copied().unwrap_or(0);
    Ok((max - min) as f64 / total as f64)
}

/// Element-wise sum of a group of histograms.
pub fn sum_histograms<'a, I>(histograms: I) -> Result<Histogram>
where
    I: IntoIterator<Item = &'a Histogram>,
{
    let mut iter = histograms.into_iter();
    let first = iter.next().ok_or(Error::InvalidHistogram("empty group"))?;
    let mut acc = first.clone();
    for h in iter {
        acc.add_assign(h)?;
    }
    Ok(acc)
}

/// Non-iid degree of the data a group of clients holds together.
pub fn subset_nid<'a, I>(histograms: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a Histogram>,
{
    nid(&sum_histograms(histograms)?)
}

pub fn data_distribution_score(h: &Histogram) -> Result<f64> {
    Ok(1.0 - nid(h)?)
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Per-round model quality `q_t`: similarity of local and global parameters.
pub fn model_quality_round(local: &[f64], global: &[f64]) -> Result<f64> {
    cosine_similarity(local, global)
}

fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::NoParticipation);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Mean of per-round quality values over the rounds a client returned.
pub fn per_task_quality(round_values: &[f64]) -> Result<f64> {
    mean(round_values)
}

pub fn behavior_round(returned: bool) -> u8 {
    u8::from(returned)
}

/// Mean of per-round behavior indicators over the rounds a client was scheduled.
pub fn per_task_behavior(round_values: &[u8]) -> Result<f64> {
    if round_values.is_empty() {
        return Err(Error::NoParticipation);
    }
    Ok(round_values.iter().map(|&b| f64::from(b.min(1))).sum::<f64>() / round_values.len() as f64)
}

/// `(s_ModelQ, s_Bhvr)` from the retained per-task history; an empty
/// history yields `prior` for both.
pub fn historical_scores(record: &ReputationRecord, prior: f64) -> (f64, f64) {
    let q = mean(&record.per_task_quality).unwrap_or(prior);
    let b = mean(&record.per_task_behavior).unwrap_or(prior);
    (q, b)
}

pub fn overall_score(w: &Weights, s: &ScoreVector) -> f64 {
    w.0.iter().zip(&s.0).map(|(w, s)| w * s).sum()
}

/// Length-checked variant of [`overall_score`] for untyped inputs.
pub fn overall_score_slices(w: &[f64], s: &[f64]) -> Result<f64> {
    if w.len() != NUM_CRITERIA || s.len() != NUM_CRITERIA {
        return Err(Error::DimensionMismatch {
            expected: NUM_CRITERIA,
            actual: if w.len() != NUM_CRITERIA { w.len() } else { s.len() },
        });
    }
    Ok(w.iter().zip(s).map(|(w, s)| w * s).sum())
}

/// Linear cost `a * score + b`, truncated to an integer.
pub fn cost(score: f64, a: f64, b: f64) -> i64 {
    // Absorb representation error such as 2 * 6.5 + 5 landing at 17.999...
    (a * score + b + 1e-9).floor() as i64
}

/// Reputation for one period: per-task quality plus per-task behavior.
pub fn reputation(q_task: f64, b_task: f64) -> f64 {
    q_task + b_task
}

/// Minimum resource requirement of a task, in the same units as
/// [`ResourceProfile`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResourceRequirement {
    pub cpu: f64,
    pub gpu: f64,
    pub mem: f64,
    pub storage: f64,
    pub power: f64,
    pub bandwidth: f64,
    pub connection: f64,
    pub data_size: f64,
}

impl ResourceRequirement {
    pub fn as_array(&self) -> [f64; 8] {
        [self.cpu, self.gpu, self.mem, self.storage, self.power, self.bandwidth, self.connection, self.data_size]
    }
}

/// Everything needed to score one candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct ClientObservation {
    pub resources: ResourceProfile,
    pub histogram: Histogram,
    pub history: ReputationRecord,
}

/// Builds the eleven-component score vector for every candidate.
///
/// Resource and data-size ratios are normalized across the candidate set;
/// a criterion whose ratios are all zero is left at zero.
pub fn score_candidates(
    observations: &[ClientObservation],
    requirement: &ResourceRequirement,
) -> Result<Vec<ScoreVector>> {
    let minimums = requirement.as_array();
    let mut columns: Vec<Vec<f64>> = (0..8).map(|_| Vec::with_capacity(observations.len())).collect();
    for obs in observations {
        obs.resources.validate()?;
        for (col, (raw, min)) in obs.resources.as_array().iter().zip(minimums).enumerate() {
            columns[col].push(resource_ratio(*raw, min)?);
        }
    }
    let normalized: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| match normalize_ratios(col) {
            Ok(v) => Ok(v),
            Err(Error::DegenerateNormalization) => Ok(vec![0.0; col.len()]),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;

    observations
        .iter()
        .enumerate()
        .map(|(i, obs)| {
            let mut s = [0.0; NUM_CRITERIA];
            for (c, col) in normalized.iter().enumerate() {
                s[c] = col[i];
            }
            s[criterion::DATA_DIST] = data_distribution_score(&obs.histogram)?;
            let (q, b) = historical_scores(&obs.history, DEFAULT_HISTORY_PRIOR);
            s[criterion::MODEL_QUALITY] = q;
            s[criterion::BEHAVIOR] = b;
            Ok(ScoreVector(s))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(v: &[u64]) -> Histogram {
        Histogram::new(v.to_vec())
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn resource_ratio_examples() {
        assert_eq!(resource_ratio(4.0, 2.0).unwrap(), 2.0);
        assert_eq!(resource_ratio(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(resource_ratio(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(resource_ratio(1.0, 0.0), Err(Error::InvalidRequirement(0.0)));
        assert!(resource_ratio(1.0, -3.0).is_err());
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_ratios(&[2.0, 1.0, 4.0]).unwrap(), vec![0.5, 0.25, 1.0]);
        assert_eq!(normalize_ratios(&[3.0]).unwrap(), vec![1.0]);
        assert_eq!(normalize_ratios(&[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(normalize_ratios(&[0.0, 0.0]), Err(Error::DegenerateNormalization));
        assert_eq!(normalize_ratios(&[]), Err(Error::DegenerateNormalization));
    }

    #[test]
    fn nid_examples() {
        assert_eq!(nid(&h(&[10, 10, 10])).unwrap(), 0.0);
        assert_eq!(nid(&h(&[60, 0, 0])).unwrap(), 1.0);
        assert!(close(nid(&h(&[10, 20, 30])).unwrap(), 20.0 / 60.0));
        assert!(nid(&h(&[])).is_err());
        assert!(nid(&h(&[0, 0])).is_err());
    }

    #[test]
    fn subset_nid_examples() {
        assert_eq!(subset_nid(&[h(&[10, 0]), h(&[0, 10])]).unwrap(), 0.0);
        assert_eq!(subset_nid(&[h(&[10, 0])]).unwrap(), 1.0);
        assert_eq!(subset_nid(&[h(&[9, 1]), h(&[1, 9]), h(&[5, 5])]).unwrap(), 0.0);
        assert_eq!(subset_nid(&[h(&[1, 2]), h(&[1])]), Err(Error::DimensionMismatch { expected: 2, actual: 1 }));
    }

    #[test]
    fn model_quality_examples() {
        let v = [0.3, -1.2, 4.0];
        assert!(close(model_quality_round(&v, &v).unwrap(), 1.0));
        assert!(close(model_quality_round(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0));
        assert!(close(model_quality_round(&[1.0, 1.0], &[-1.0, -1.0]).unwrap(), -1.0));
        assert_eq!(model_quality_round(&[0.0, 0.0], &[1.0, 1.0]), Err(Error::UndefinedSimilarity));
        assert!(model_quality_round(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn per_task_averages() {
        assert!(close(per_task_quality(&[1.0, 0.5]).unwrap(), 0.75));
        assert!(close(per_task_quality(&[0.9]).unwrap(), 0.9));
        assert!(close(per_task_quality(&[0.2, 0.4, 0.6]).unwrap(), 0.4));
        assert_eq!(per_task_quality(&[]), Err(Error::NoParticipation));

        assert_eq!(behavior_round(true), 1);
        assert_eq!(behavior_round(false), 0);
        assert!(close(per_task_behavior(&[1, 1, 1, 0]).unwrap(), 0.75));
        assert_eq!(per_task_behavior(&[0]).unwrap(), 0.0);
        assert_eq!(per_task_behavior(&[1, 1]).unwrap(), 1.0);
        assert_eq!(per_task_behavior(&[]), Err(Error::NoParticipation));
    }

    #[test]
    fn historical_scores_examples() {
        let mut rec = ReputationRecord::new(10);
        rec.per_task_quality = vec![0.8, 0.6];
        rec.per_task_behavior = vec![1.0, 0.5, 0.75];
        let (q, b) = historical_scores(&rec, DEFAULT_HISTORY_PRIOR);
        assert!(close(q, 0.7));
        assert!(close(b, 0.75));

        let empty = ReputationRecord::default();
        assert_eq!(historical_scores(&empty, DEFAULT_HISTORY_PRIOR), (0.5, 0.5));
        assert_eq!(empty.window, 10);
    }

    #[test]
    fn reputation_window_evicts_oldest() {
        let mut rec = ReputationRecord::new(2);
        rec.push_task(0.1, 1.0);
        rec.push_task(0.2, 0.0);
        rec.push_task(0.3, 0.5);
        assert_eq!(rec.per_task_quality, vec![0.2, 0.3]);
        assert_eq!(rec.per_task_behavior, vec![0.0, 0.5]);
    }

    #[test]
    fn overall_score_examples() {
        assert!(close(overall_score(&Weights::uniform(), &ScoreVector::splat(0.5)), 5.5));
        let mut w = [0.0; NUM_CRITERIA];
        w[0] = 1.0;
        let mut s = [0.1; NUM_CRITERIA];
        s[0] = 0.9;
        assert!(close(overall_score(&Weights(w), &ScoreVector(s)), 0.9));
        assert_eq!(overall_score(&Weights::uniform(), &ScoreVector::splat(1.0)), 11.0);
        assert!(overall_score_slices(&[1.0; 10], &[1.0; 11]).is_err());
        assert!(Weights::from_slice(&[0.0; 11]).is_err());
    }

    #[test]
    fn cost_examples() {
        assert_eq!(cost(6.92, 2.0, 5.0), 18);
        assert_eq!(cost(4.89, 2.0, 5.0), 14);
        assert_eq!(cost(0.0, 2.0, 5.0), 5);
        assert_eq!(cost(6.5, 2.0, 5.0), 18);
    }

    #[test]
    fn cost_reproduces_every_table_row() {
        let scores = [6.92, 4.89, 6.8, 6.08, 6.9, 6.08, 3.74, 3.36, 5.26, 3.39];
        let costs = [18, 14, 18, 17, 18, 17, 12, 11, 15, 11];
        for (s, c) in scores.iter().zip(costs) {
            assert_eq!(cost(*s, 2.0, 5.0), c, "score {s}");
        }
    }

    #[test]
    fn reputation_examples() {
        assert!(close(reputation(0.9, 1.0), 1.9));
        assert_eq!(reputation(0.0, 0.0), 0.0);
        assert!(close(reputation(0.5, 0.75), 1.25));
    }

    #[test]
    fn score_candidates_normalizes_per_column() {
        let obs = |cpu: f64, hist: &[u64]| ClientObservation {
            resources: ResourceProfile {
                cpu,
                gpu: 1.0,
                mem: 8.0,
                storage: 10.0,
                power: 1.0,
                bandwidth: 50.0,
                connection: 1.0,
                data_size: hist.iter().sum(),
            },
            histogram: h(hist),
            history: ReputationRecord::default(),
        };
        let req = ResourceRequirement {
            cpu: 2.0,
            gpu: 1.0,
            mem: 4.0,
            storage: 5.0,
            power: 1.0,
            bandwidth: 10.0,
            connection: 1.0,
            data_size: 10.0,
        };
        let s = score_candidates(&[obs(4.0, &[10, 10]), obs(2.0, &[20, 0])], &req).unwrap();
        assert_eq!(s[0].0[criterion::CPU], 1.0);
        assert_eq!(s[1].0[criterion::CPU], 0.5);
        assert_eq!(s[0].0[criterion::DATA_SIZE], 1.0);
        assert_eq!(s[0].0[criterion::DATA_DIST], 1.0);
        assert_eq!(s[1].0[criterion::DATA_DIST], 0.0);
        assert_eq!(s[1].0[criterion::MODEL_QUALITY], 0.5);
        assert_eq!(s[1].0[criterion::BEHAVIOR], 0.5);
    }

    /// Enumerates every histogram with `classes` entries summing to `total`.
    fn compositions(total: u64, classes: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if prefix.len() + 1 == classes {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=total {
            prefix.push(first);
            compositions(total - first, classes, prefix, out);
            prefix.pop();
        }
    }

    #[test]
    fn nid_extremes_by_enumeration() {
        for classes in 1..=4 {
            for total in 1..=12 {
                let mut all = Vec::new();
                compositions(total, classes, &mut Vec::new(), &mut all);
                for counts in all {
                    let v = nid(&h(&counts)).unwrap();
                    assert!((0.0..=1.0).contains(&v));
                    let uniform = counts.iter().all(|c| *c == counts[0]);
                    assert_eq!(v == 0.0, uniform, "{counts:?}");
                    let max = *counts.iter().max().unwrap();
                    let min = *counts.iter().min().unwrap();
                    assert_eq!(v == 1.0, max - min == total, "{counts:?}");
                    if v == 1.0 {
                        // all mass in a single class, and some class empty
                        assert_eq!(min, 0);
                        assert_eq!(counts.iter().filter(|c| **c > 0).count(), 1);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn nid_is_scale_invariant(counts in prop::collection::vec(0u64..50, 1..8), k in 1u64..20) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let base = h(&counts);
            let a = nid(&base).unwrap();
            let b = nid(&base.scaled(k)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn subset_nid_is_nid_of_sum(groups in prop::collection::vec(prop::collection::vec(0u64..30, 4), 1..6)) {
            let hs: Vec<Histogram> = groups.iter().map(|g| h(g)).collect();
            let total: Vec<u64> = (0..4).map(|c| groups.iter().map(|g| g[c]).sum()).collect();
            prop_assume!(total.iter().sum::<u64>() > 0);
            prop_assert_eq!(subset_nid(&hs).unwrap(), nid(&h(&total)).unwrap());
        }

        #[test]
        fn overall_score_is_linear(
            w1 in prop::array::uniform11(0.0f64..3.0),
            w2 in prop::array::uniform11(0.0f64..3.0),
            s in prop::array::uniform11(0.0f64..1.0),
            alpha in 0.0f64..4.0,
        ) {
            let combo: [f64; 11] = std::array::from_fn(|i| w1[i] + alpha * w2[i]);
            let lhs = overall_score(&Weights(combo), &ScoreVector(s));
            let rhs = overall_score(&Weights(w1), &ScoreVector(s)) + alpha * overall_score(&Weights(w2), &ScoreVector(s));
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn cost_is_monotone(x in 0.0f64..20.0, dx in 0.0f64..5.0, a in 0.01f64..10.0, b in -5.0f64..5.0) {
            prop_assert!(cost(x, a, b) <= cost(x + dx, a, b));
        }

        #[test]
        fn normalize_preserves_order_and_max(ratios in prop::collection::vec(0.0f64..100.0, 1..20)) {
            prop_assume!(ratios.iter().any(|r| *r > 0.0));
            let n = normalize_ratios(&ratios).unwrap();
            prop_assert_eq!(n.iter().copied().fold(0.0, f64::max), 1.0);
            for i in 0..ratios.len() {
                for j in 0..ratios.len() {
                    if ratios[i] < ratios[j] {
                        prop_assert!(n[i] <= n[j]);
                    }
                }
            }
        }
    }
}
