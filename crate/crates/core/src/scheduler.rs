//! Scheduling periods: subsets are generated from the active pool, each
//! subset trains for one round, and per-period reputations decide which
//! clients sit out the next period.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tracing::{debug, info, warn};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream};
use crate::scoring::{behavior_round, per_task_behavior, per_task_quality, reputation, ReputationRecord};
use crate::subset_gen::{generate_subsets, random_subsets, subsets_nid, SubsetGenConfig};
use crate::types::{ClientId, Histogram};

/// Runs one training round for the clients that showed up.
pub trait RoundExecutor {
    /// `participants` excludes clients that dropped out. Clients missing
    /// from the report's `quality` map are treated as not having returned.
    fn run_round(&mut self, round: usize, participants: &[ClientId]) -> Result<RoundReport>;

    /// Current value of the global metric (e.g. test accuracy).
    fn metric(&self) -> f64;
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RoundReport {
    pub quality: BTreeMap<ClientId, f64>,
    pub global_metric: f64,
}

/// Executor that trains nothing: every participant returns with quality 1.
#[derive(Clone, Copy, Debug, Default)]
pub struct DryRun;

impl RoundExecutor for DryRun {
    fn run_round(&mut self, _round: usize, participants: &[ClientId]) -> Result<RoundReport> {
        Ok(RoundReport { quality: participants.iter().map(|id| (id.clone(), 1.0)).collect(), global_metric: 0.0 })
    }

    fn metric(&self) -> f64 {
        0.0
    }
}

/// How round participants are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Knapsack-generated subsets covering the whole pool.
    #[default]
    Scheduled,
    /// `n` clients drawn uniformly per round.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Convergence {
    pub min_delta: f64,
    /// Periods without an improvement of `min_delta` before stopping; 0 disables.
    pub patience: usize,
}

impl Default for Convergence {
    fn default() -> Self {
        Convergence { min_delta: 0.001, patience: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub reputation_threshold: f64,
    pub suspension_periods: u32,
    pub dropout_rate: f64,
    pub max_periods: usize,
    /// Hard cap on executed rounds across the task.
    pub max_rounds: Option<usize>,
    pub convergence: Convergence,
    pub policy: Policy,
    pub subsets: SubsetGenConfig,
    pub seed: u64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            reputation_threshold: 0.5,
            suspension_periods: 1,
            dropout_rate: 0.05,
            max_periods: 50,
            max_rounds: None,
            convergence: Convergence::default(),
            policy: Policy::Scheduled,
            subsets: SubsetGenConfig::default(),
            seed: 0,
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.dropout_rate) {
            return Err(Error::Config(format!("dropout_rate {} outside [0, 1]", self.dropout_rate)));
        }
        if self.suspension_periods == 0 {
            return Err(Error::Config("suspension_periods must be positive".into()));
        }
        if self.max_periods == 0 {
            return Err(Error::Config("max_periods must be positive".into()));
        }
        if self.reputation_threshold.is_nan() {
            return Err(Error::Config("reputation_threshold is NaN".into()));
        }
        if !(self.convergence.min_delta >= 0.0) {
            return Err(Error::Config("convergence.min_delta must be non-negative".into()));
        }
        self.subsets.validate()
    }
}

/// Membership and reputation of every client known to the task.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoolState {
    pub clients: BTreeMap<ClientId, Histogram>,
    pub active: BTreeSet<ClientId>,
    /// Remaining periods before re-admission.
    pub suspended: BTreeMap<ClientId, u32>,
    pub departed: BTreeSet<ClientId>,
    /// Clients known to be unavailable next period; consumed by [`update_pool`].
    pub availability: BTreeMap<ClientId, bool>,
    pub reputations: BTreeMap<ClientId, ReputationRecord>,
    /// `s_rep` from the most recent period each client was scheduled in.
    pub last_reputation: BTreeMap<ClientId, f64>,
}

impl PoolState {
    pub fn new(pool: Vec<(ClientId, Histogram)>) -> Result<Self> {
        if pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        let mut state = PoolState::default();
        for (id, h) in pool {
            if state.clients.insert(id.clone(), h).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate client id {id}")));
            }
            state.active.insert(id);
        }
        Ok(state)
    }

    pub fn active_pool(&self) -> Vec<(ClientId, Histogram)> {
        self.active.iter().map(|id| (id.clone(), self.clients[id].clone())).collect()
    }

    /// Every known client is in exactly one of active, suspended, departed.
    pub fn check_invariants(&self) -> Result<()> {
        for id in self.clients.keys() {
            let places = usize::from(self.active.contains(id))
                + usize::from(self.suspended.contains_key(id))
                + usize::from(self.departed.contains(id));
            if places != 1 {
                return Err(Error::InvalidArgument(format!("client {id} is in {places} membership sets")));
            }
        }
        Ok(())
    }

    /// Removes a client from the task for good.
    pub fn depart(&mut self, id: &ClientId) {
        self.active.remove(id);
        self.suspended.remove(id);
        if self.clients.contains_key(id) {
            self.departed.insert(id.clone());
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundOutcome {
    pub round_index: usize,
    pub period: usize,
    pub subset_index: usize,
    pub participants: Vec<ClientId>,
    pub returned: BTreeMap<ClientId, bool>,
    /// Only for participants that returned.
    pub q_t: BTreeMap<ClientId, f64>,
    pub global_metric: f64,
    pub subset_nid: f64,
}

/// Per-client period summary.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodReputation {
    pub q_task: f64,
    pub b_task: f64,
    pub s_rep: f64,
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub period: usize,
    pub outcomes: Vec<RoundOutcome>,
    pub dropped: BTreeSet<ClientId>,
    pub reputations: BTreeMap<ClientId, PeriodReputation>,
    pub stats: PeriodRecord,
}

/// Applies the end-of-period pool changes: suspended counters tick down
/// (re-admitting clients that reach zero), then clients below the
/// reputation threshold and clients flagged unavailable are suspended.
pub fn update_pool(state: &mut PoolState, config: &SchedulerConfig, period_reputation: &BTreeMap<ClientId, f64>) {
    let mut back = Vec::new();
    for (id, left) in state.suspended.iter_mut() {
        *left = left.saturating_sub(1);
        if *left == 0 {
            back.push(id.clone());
        }
    }
    for id in back {
        state.suspended.remove(&id);
        state.active.insert(id);
    }

    let mut out: Vec<(ClientId, u32)> = Vec::new();
    for id in &state.active {
        if period_reputation.get(id).is_some_and(|&s| s < config.reputation_threshold) {
            out.push((id.clone(), config.suspension_periods));
        } else if state.availability.get(id) == Some(&false) {
            out.push((id.clone(), 1));
        }
    }
    for (id, periods) in out {
        debug!(client = %id, periods, "suspend");
        state.active.remove(&id);
        state.suspended.insert(id, periods);
    }
    state.availability.clear();
}

fn draw_subsets(state: &PoolState, config: &SchedulerConfig, period: usize) -> Result<(Vec<Vec<ClientId>>, usize)> {
    let pool = state.active_pool();
    let seed = derive_seed(config.seed, derive_seed(stream::SUBSETS, period as u64));
    match config.policy {
        Policy::Scheduled => {
            let schedule = generate_subsets(&pool, &config.subsets, seed)?;
            Ok((schedule.subsets, schedule.undersized))
        }
        Policy::Random => {
            let n = config.subsets.n;
            let rounds = pool.len().div_ceil(n);
            let seed = derive_seed(config.seed, derive_seed(stream::RANDOM_POLICY, period as u64));
            Ok((random_subsets(&pool, &vec![n; rounds], seed), 0))
        }
    }
}

/// Runs one scheduling period starting at global round `first_round`,
/// executing at most `round_budget` rounds.
pub fn run_period(
    state: &mut PoolState,
    config: &SchedulerConfig,
    executor: &mut dyn RoundExecutor,
    period: usize,
    first_round: usize,
    round_budget: Option<usize>,
) -> Result<PeriodReport> {
    if state.active.is_empty() {
        return Err(Error::EmptyPool);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, derive_seed(stream::DROPOUT, period as u64)));
    let dropped: BTreeSet<ClientId> =
        state.active.iter().filter(|_| rng.gen_bool(config.dropout_rate)).cloned().collect();

    let (subsets, undersized) = draw_subsets(state, config, period)?;
    let pool = state.active_pool();
    let nids = subsets_nid(&pool, &subsets)?;

    let mut q: BTreeMap<ClientId, Vec<f64>> = BTreeMap::new();
    let mut b: BTreeMap<ClientId, Vec<u8>> = BTreeMap::new();
    let mut counts: BTreeMap<ClientId, u32> = state.active.iter().map(|id| (id.clone(), 0)).collect();
    let mut outcomes = Vec::new();

    for (t, subset) in subsets.iter().enumerate() {
        if round_budget.is_some_and(|budget| outcomes.len() >= budget) {
            break;
        }
        let round_index = first_round + outcomes.len();
        let present: Vec<ClientId> = subset.iter().filter(|id| !dropped.contains(*id)).cloned().collect();
        let report = match executor.run_round(round_index, &present) {
            Ok(r) => r,
            Err(e) => {
                warn!(round = round_index, error = %e, "round failed");
                RoundReport { quality: BTreeMap::new(), global_metric: executor.metric() }
            }
        };

        let mut returned = BTreeMap::new();
        let mut q_t = BTreeMap::new();
        for id in subset {
            *counts.get_mut(id).expect("subset drawn from active pool") += 1;
            let value = if dropped.contains(id) { None } else { report.quality.get(id).copied() };
            returned.insert(id.clone(), value.is_some());
            b.entry(id.clone()).or_default().push(behavior_round(value.is_some()));
            if let Some(v) = value {
                q_t.insert(id.clone(), v);
                q.entry(id.clone()).or_default().push(v);
            }
        }
        debug!(round = round_index, period, metric = report.global_metric, "round");
        outcomes.push(RoundOutcome {
            round_index,
            period,
            subset_index: t,
            participants: subset.clone(),
            returned,
            q_t,
            global_metric: report.global_metric,
            subset_nid: nids[t],
        });
    }

    let mut reputations = BTreeMap::new();
    for (id, behaviors) in &b {
        let b_task = per_task_behavior(behaviors)?;
        let q_task = q.get(id).map(|v| per_task_quality(v)).transpose()?.unwrap_or(0.0);
        let s_rep = reputation(q_task, b_task);
        state.reputations.entry(id.clone()).or_default().push_task(q_task, b_task);
        state.last_reputation.insert(id.clone(), s_rep);
        reputations.insert(id.clone(), PeriodReputation { q_task, b_task, s_rep, rounds: behaviors.len() });
    }

    let executed = outcomes.len();
    let stats = PeriodRecord {
        period,
        rounds: executed,
        subsets: subsets.len(),
        active: state.active.len(),
        suspended: state.suspended.len(),
        dropped: dropped.len(),
        min_selections: counts.values().copied().min().unwrap_or(0),
        max_selections: counts.values().copied().max().unwrap_or(0),
        undersized,
        mean_nid: if executed == 0 { 0.0 } else { nids[..executed].iter().sum::<f64>() / executed as f64 },
    };

    let s_reps = reputations.iter().map(|(id, r)| (id.clone(), r.s_rep)).collect();
    update_pool(state, config, &s_reps);
    Ok(PeriodReport { period, outcomes, dropped, reputations, stats })
}

/// One row of the per-round timeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub period: usize,
    pub subset_index: usize,
    pub n_participants: usize,
    pub n_returned: usize,
    pub accuracy: f64,
    pub subset_nid: f64,
}

/// Fairness summary of one period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodRecord {
    pub period: usize,
    pub rounds: usize,
    pub subsets: usize,
    pub active: usize,
    pub suspended: usize,
    pub dropped: usize,
    pub min_selections: u32,
    pub max_selections: u32,
    pub undersized: usize,
    pub mean_nid: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsTimeline {
    pub rounds: Vec<RoundRecord>,
    pub periods: Vec<PeriodRecord>,
    pub initial_metric: f64,
    pub converged: bool,
}

impl MetricsTimeline {
    pub fn final_metric(&self) -> f64 {
        self.rounds.last().map_or(self.initial_metric, |r| r.accuracy)
    }

    /// First round whose metric reaches `target`.
    pub fn rounds_to(&self, target: f64) -> Option<usize> {
        self.rounds.iter().find(|r| r.accuracy >= target).map(|r| r.round + 1)
    }

    pub fn write_rounds_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(out, &self.rounds)
    }

    pub fn write_periods_csv<W: Write>(&self, out: W) -> Result<()> {
        write_csv(out, &self.periods)
    }
}

/// Serializes rows as CSV with a header line.
pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Repeats scheduling periods until the metric stops improving, the
/// period limit is reached or the round budget is spent.
pub fn run_task(
    pool: Vec<(ClientId, Histogram)>,
    config: &SchedulerConfig,
    executor: &mut dyn RoundExecutor,
) -> Result<MetricsTimeline> {
    config.validate()?;
    let mut state = PoolState::new(pool)?;
    let mut timeline = MetricsTimeline { initial_metric: executor.metric(), ..Default::default() };
    let mut best = timeline.initial_metric;
    let mut stall = 0;

    for period in 0..config.max_periods {
        let executed = timeline.rounds.len();
        let budget = config.max_rounds.map(|m| m.saturating_sub(executed));
        if budget == Some(0) {
            break;
        }
        if state.active.is_empty() {
            if state.suspended.is_empty() {
                break;
            }
            update_pool(&mut state, config, &BTreeMap::new());
            continue;
        }
        let report = run_period(&mut state, config, executor, period, executed, budget)?;
        timeline.rounds.extend(report.outcomes.iter().map(|o| RoundRecord {
            round: o.round_index,
            period: o.period,
            subset_index: o.subset_index,
            n_participants: o.participants.len(),
            n_returned: o.returned.values().filter(|r| **r).count(),
            accuracy: o.global_metric,
            subset_nid: o.subset_nid,
        }));
        timeline.periods.push(report.stats);

        let metric = executor.metric();
        if metric >= best + config.convergence.min_delta {
            best = metric;
            stall = 0;
        } else {
            stall += 1;
        }
        if config.convergence.patience > 0 && stall >= config.convergence.patience {
            timeline.converged = true;
            info!(period, metric, "converged");
            break;
        }
    }
    Ok(timeline)
}
