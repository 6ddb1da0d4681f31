//! Initial client pool selection under a cost budget.
//!
//! Candidates are first filtered against per-criterion thresholds; the
//! survivors are then packed into the budget by one of three strategies:
//! exact dynamic programming, greedy by score/cost ratio, or a seeded random
//! order used as a baseline.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::ScoreVector;
use crate::types::ClientId;

/// Overall score held as an integer number of hundredths, so that sums are
/// exact and ties compare exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(i64);

impl Score {
    pub fn from_hundredths(v: i64) -> Self {
        Score(v)
    }

    /// Rounds to the nearest hundredth.
    pub fn from_f64(v: f64) -> Self {
        Score((v * 100.0).round() as i64)
    }

    pub fn hundredths(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}", self.as_f64())
    }
}

impl Serialize for Score {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        f64::deserialize(d).map(Score::from_f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: ClientId,
    pub score: Score,
    pub cost: u64,
    pub score_vector: ScoreVector,
}

impl Candidate {
    pub fn new(id: impl Into<ClientId>, score: f64, cost: u64, score_vector: ScoreVector) -> Self {
        Candidate { id: id.into(), score: Score::from_f64(score), cost, score_vector }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cost < 1 {
            return Err(Error::InvalidArgument(format!("candidate {} has zero cost", self.id)));
        }
        if self.score.hundredths() <= 0 {
            return Err(Error::InvalidArgument(format!("candidate {} has non-positive score", self.id)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolSelectionProblem {
    pub candidates: Vec<Candidate>,
    pub budget: u64,
    pub min_clients: usize,
    pub thresholds: ScoreVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    Dp,
    Greedy,
    Random,
}

impl fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMethod::Dp => "dp",
            SelectionMethod::Greedy => "greedy",
            SelectionMethod::Random => "random",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolSelectionResult {
    pub method: SelectionMethod,
    /// Selected ids in the order the strategy picked them.
    #[serde(rename = "selected_ids")]
    pub selected: Vec<ClientId>,
    pub total_score: f64,
    pub total_cost: u64,
    pub approx_ratio: f64,
}

impl PoolSelectionResult {
    fn from_indices(method: SelectionMethod, candidates: &[Candidate], picked: &[usize]) -> Self {
        let total: i64 = picked.iter().map(|&i| candidates[i].score.hundredths()).sum();
        PoolSelectionResult {
            method,
            selected: picked.iter().map(|&i| candidates[i].id.clone()).collect(),
            total_score: Score::from_hundredths(total).as_f64(),
            total_cost: picked.iter().map(|&i| candidates[i].cost).sum(),
            approx_ratio: 0.0,
        }
    }

    pub fn total(&self) -> Score {
        Score::from_f64(self.total_score)
    }

    /// Selected ids in ascending order.
    pub fn sorted_ids(&self) -> Vec<ClientId> {
        let mut ids = self.selected.clone();
        ids.sort();
        ids
    }
}

/// What the greedy and random strategies do when the next candidate no
/// longer fits the remaining budget.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverflowRule {
    /// Stop at the first candidate that does not fit.
    #[default]
    Stop,
    /// Skip it and keep scanning for cheaper candidates.
    SkipAndContinue,
}

/// Keeps the candidates whose every criterion score meets its threshold.
pub fn filter_candidates(candidates: &[Candidate], thresholds: &ScoreVector) -> Vec<Candidate> {
    candidates.iter().filter(|c| c.score_vector.dominates(thresholds)).cloned().collect()
}

/// Smallest budget that can always afford `min_clients` candidates: the sum
/// of the `min_clients` largest costs.
pub fn min_budget(filtered: &[Candidate], min_clients: usize) -> Result<u64> {
    if filtered.len() < min_clients {
        return Err(Error::Infeasible(format!(
            "{} candidates pass the thresholds but at least {} are required",
            filtered.len(),
            min_clients
        )));
    }
    let mut costs: Vec<u64> = filtered.iter().map(|c| c.cost).collect();
    costs.sort_unstable_by(|a, b| b.cmp(a));
    Ok(costs.iter().take(min_clients).sum())
}

/// Exact 0-1 knapsack by dynamic programming over budget, O(n·B) time.
///
/// Selected ids are reported in reconstruction order (last candidate first).
/// Among equally good packings the one using later candidates wins.
pub fn select_dp(filtered: &[Candidate], budget: u64) -> PoolSelectionResult {
    let n = filtered.len();
    let cap = budget as usize;
    let width = cap + 1;
    let mut best = vec![0_i64; width];
    // keep[i * width + w] records whether item i improved capacity w.
    let mut keep = vec![0_u64; (n * width).div_ceil(64)];

    for (i, cand) in filtered.iter().enumerate() {
        let cost = cand.cost as usize;
        if cost > cap {
            continue;
        }
        let value = cand.score.hundredths();
        for w in (cost..=cap).rev() {
            let with = best[w - cost] + value;
            if with >= best[w] {
                best[w] = with;
                let bit = i * width + w;
                keep[bit / 64] |= 1 << (bit % 64);
            }
        }
    }

    let mut picked = Vec::new();
    let mut w = cap;
    for i in (0..n).rev() {
        let bit = i * width + w;
        if keep[bit / 64] >> (bit % 64) & 1 == 1 {
            picked.push(i);
            w -= filtered[i].cost as usize;
        }
    }
    PoolSelectionResult::from_indices(SelectionMethod::Dp, filtered, &picked)
}

/// Order used by the greedy strategy: score/cost descending, then higher
/// score, then lower id.
fn greedy_order(filtered: &[Candidate]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..filtered.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&filtered[a], &filtered[b]);
        // ratio a > ratio b  <=>  score_a * cost_b > score_b * cost_a
        let lhs = i128::from(ca.score.hundredths()) * i128::from(cb.cost);
        let rhs = i128::from(cb.score.hundredths()) * i128::from(ca.cost);
        rhs.cmp(&lhs).then_with(|| cb.score.cmp(&ca.score)).then_with(|| ca.id.cmp(&cb.id))
    });
    order
}

fn accumulate(order: &[usize], filtered: &[Candidate], budget: u64, rule: OverflowRule) -> Vec<usize> {
    let mut spent = 0_u64;
    let mut picked = Vec::new();
    for &i in order {
        let cost = filtered[i].cost;
        if spent + cost <= budget {
            spent += cost;
            picked.push(i);
        } else if rule == OverflowRule::Stop {
            break;
        }
    }
    picked
}

pub fn select_greedy(filtered: &[Candidate], budget: u64) -> PoolSelectionResult {
    select_greedy_with(filtered, budget, OverflowRule::Stop)
}

pub fn select_greedy_with(filtered: &[Candidate], budget: u64, rule: OverflowRule) -> PoolSelectionResult {
    let picked = accumulate(&greedy_order(filtered), filtered, budget, rule);
    PoolSelectionResult::from_indices(SelectionMethod::Greedy, filtered, &picked)
}

/// Shuffles the candidates with a seeded generator and takes them in that
/// order until the budget runs short.
pub fn select_random(filtered: &[Candidate], budget: u64, seed: u64) -> PoolSelectionResult {
    let mut order: Vec<usize> = (0..filtered.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let picked = accumulate(&order, filtered, budget, OverflowRule::Stop);
    PoolSelectionResult::from_indices(SelectionMethod::Random, filtered, &picked)
}

/// Replays a given visiting order (ids listed first, any others afterwards
/// in input order) under the random strategy's stopping rule.
pub fn select_in_order(filtered: &[Candidate], budget: u64, order: &[ClientId]) -> Result<PoolSelectionResult> {
    let mut visit = Vec::with_capacity(filtered.len());
    for id in order {
        let pos = filtered.iter().position(|c| &c.id == id).ok_or_else(|| Error::UnknownItem(id.to_string()))?;
        if !visit.contains(&pos) {
            visit.push(pos);
        }
    }
    visit.extend((0..filtered.len()).filter(|i| !order.contains(&filtered[*i].id)));
    let picked = accumulate(&visit, filtered, budget, OverflowRule::Stop);
    Ok(PoolSelectionResult::from_indices(SelectionMethod::Random, filtered, &picked))
}

/// Relative shortfall `(optimal - achieved) / optimal`.
pub fn approximation_ratio(optimal: f64, achieved: f64) -> Result<f64> {
    if !(optimal > 0.0) {
        return Err(Error::InvalidArgument(format!("optimal total must be positive, got {optimal}")));
    }
    Ok((optimal - achieved) / optimal)
}

/// Runs all three strategies on one problem and fills in approximation
/// ratios relative to the exact optimum.
pub fn compare_methods(problem: &PoolSelectionProblem, seed: u64) -> Result<Vec<PoolSelectionResult>> {
    let filtered = filter_candidates(&problem.candidates, &problem.thresholds);
    for c in &filtered {
        c.validate()?;
    }
    let mut results = vec![
        select_dp(&filtered, problem.budget),
        select_greedy(&filtered, problem.budget),
        select_random(&filtered, problem.budget, seed),
    ];
    fill_ratios(&mut results);
    Ok(results)
}

/// Sets every result's ratio against the first DP result; a zero optimum
/// leaves ratios at zero.
pub fn fill_ratios(results: &mut [PoolSelectionResult]) {
    let optimal = results.iter().find(|r| r.method == SelectionMethod::Dp).map(|r| r.total_score).unwrap_or(0.0);
    for r in results.iter_mut() {
        r.approx_ratio = approximation_ratio(optimal, r.total_score).unwrap_or(0.0);
    }
}

/// Rounds to two decimals, the precision ratios are reported at.
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

impl PartialOrd for PoolSelectionResult {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.total_score.partial_cmp(&other.total_score)
    }
}
