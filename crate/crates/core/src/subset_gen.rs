//! Splits a client pool into per-round subsets with near-uniform combined
//! label distributions.
//!
//! Subsets are drawn one at a time from the clients not yet selected by
//! solving a multidimensional knapsack with one equal-capacity knapsack per
//! class. A skewed subset is re-solved with already-selected clients that
//! hold data for its under-filled classes; an undersized subset is topped up
//! through a complementary knapsack around its members. Every client ends up
//! in at least one and at most `x_star` subsets.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tracing::debug;

use crate::error::{Error, Result};
use crate::mkp::{self, SolverEffort};
use crate::scoring::{nid, sum_histograms};
use crate::types::{ClientId, Histogram};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubsetGenConfig {
    /// Target subset size.
    pub n: usize,
    /// Allowed deviation from `n`.
    pub delta: usize,
    /// Most subsets a client may join in one period.
    pub x_star: u32,
    /// Subsets with a larger non-iid degree get the compensation step.
    pub nid_threshold: f64,
    /// A class knapsack filled below this fraction of capacity is deficient.
    pub fill_threshold: f64,
    pub capacity_override: Option<u64>,
    pub solver: SolverEffort,
}

impl Default for SubsetGenConfig {
    fn default() -> Self {
        SubsetGenConfig {
            n: 10,
            delta: 3,
            x_star: 3,
            nid_threshold: 0.2,
            fill_threshold: 0.8,
            capacity_override: None,
            solver: SolverEffort::default(),
        }
    }
}

impl SubsetGenConfig {
    pub fn min_size(&self) -> usize {
        self.n.saturating_sub(self.delta)
    }

    pub fn max_size(&self) -> usize {
        self.n + self.delta
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.delta >= self.n {
            return Err(Error::Config(format!("need n - delta >= 1, got n={} delta={}", self.n, self.delta)));
        }
        if self.x_star < 1 {
            return Err(Error::Config("x_star must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.nid_threshold) {
            return Err(Error::Config(format!("nid_threshold {} outside [0, 1]", self.nid_threshold)));
        }
        if !(self.fill_threshold > 0.0 && self.fill_threshold <= 1.0) {
            return Err(Error::Config(format!("fill_threshold {} outside (0, 1]", self.fill_threshold)));
        }
        if self.capacity_override == Some(0) {
            return Err(Error::Config("capacity_override must be positive".into()));
        }
        Ok(())
    }
}

/// One scheduling period's subsets, in round order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetSchedule {
    pub subsets: Vec<Vec<ClientId>>,
    pub per_subset_nid: Vec<f64>,
    pub selection_counts: BTreeMap<ClientId, u32>,
    pub capacity: u64,
    /// Subsets smaller than `n - delta`; reported, not rejected.
    pub undersized: usize,
}

impl SubsetSchedule {
    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn min_count(&self) -> u32 {
        self.selection_counts.values().copied().min().unwrap_or(0)
    }

    pub fn max_count(&self) -> u32 {
        self.selection_counts.values().copied().max().unwrap_or(0)
    }

    /// Mean per-subset non-iid degree, optionally leaving out the last subset.
    pub fn mean_nid(&self, skip_last: bool) -> f64 {
        let take = if skip_last { self.per_subset_nid.len().saturating_sub(1) } else { self.per_subset_nid.len() };
        if take == 0 {
            return 0.0;
        }
        self.per_subset_nid[..take].iter().sum::<f64>() / take as f64
    }
}

/// Shared capacity of the class knapsacks: the largest class total of the
/// pool spread over `ceil(|pool| / n)` rounds, rounded up.
pub fn knapsack_capacity(pool: &[(ClientId, Histogram)], n: usize, capacity_override: Option<u64>) -> Result<u64> {
    if let Some(c) = capacity_override {
        return Ok(c.max(1));
    }
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    if n == 0 {
        return Err(Error::InvalidArgument("subset size must be positive".into()));
    }
    let totals = sum_histograms(pool.iter().map(|(_, h)| h))?;
    let biggest = totals.counts().iter().copied().max().unwrap_or(0);
    if biggest == 0 {
        return Err(Error::InvalidHistogram("pool holds no data"));
    }
    let rounds = pool.len().div_ceil(n) as u64;
    Ok(biggest.div_ceil(rounds).max(1))
}

/// Selection bookkeeping for one period.
#[derive(Clone, Debug)]
pub struct SelectionState {
    pub pool: Vec<(ClientId, Histogram)>,
    pub counts: Vec<u32>,
    pub capacity: u64,
    pub config: SubsetGenConfig,
    solver_seed: u64,
}

impl SelectionState {
    pub fn new(pool: Vec<(ClientId, Histogram)>, config: SubsetGenConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if pool.is_empty() {
            return Err(Error::EmptyPool);
        }
        let classes = pool[0].1.classes();
        let mut seen = BTreeSet::new();
        for (id, h) in &pool {
            if h.classes() != classes {
                return Err(Error::DimensionMismatch { expected: classes, actual: h.classes() });
            }
            if h.total() == 0 {
                return Err(Error::InvalidHistogram("client without data"));
            }
            if !seen.insert(id.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate client id {id}")));
            }
        }
        let capacity = knapsack_capacity(&pool, config.n, config.capacity_override)?;
        let counts = vec![0; pool.len()];
        Ok(SelectionState { pool, counts, capacity, config, solver_seed: seed })
    }

    /// Positions of clients not selected yet, in pool order.
    pub fn remaining(&self) -> Vec<usize> {
        (0..self.pool.len()).filter(|&k| self.counts[k] == 0).collect()
    }

    pub fn nid_of(&self, members: &[usize]) -> f64 {
        if members.is_empty() {
            return 1.0;
        }
        sum_histograms(members.iter().map(|&k| &self.pool[k].1)).and_then(|h| nid(&h)).unwrap_or(1.0)
    }

    fn fill_of(&self, members: &[usize]) -> Histogram {
        let mut fill = Histogram::zeros(self.pool[0].1.classes());
        for &k in members {
            fill.add_assign(&self.pool[k].1).expect("validated lengths");
        }
        fill
    }

    fn ids(&self, members: &[usize]) -> Vec<ClientId> {
        members.iter().map(|&k| self.pool[k].0.clone()).collect()
    }

    fn record(&mut self, members: &[usize]) {
        for &k in members {
            self.counts[k] += 1;
        }
    }

    /// Solves the class-knapsack instance over `mandatory` plus `candidates`
    /// with `mandatory` fixed in. Profits are sample counts with a unit
    /// bonus for never-selected clients, scaled so the bonus only breaks
    /// ties. Returns the full subset (mandatory first), or `None` when the
    /// size bounds cannot be met.
    fn solve_over(
        &mut self,
        candidates: &[usize],
        mandatory: &[usize],
        size_min: usize,
        size_max: usize,
    ) -> Result<Option<Vec<usize>>> {
        if candidates.is_empty() {
            return Ok((mandatory.len() >= size_min).then(|| mandatory.to_vec()));
        }
        let members: Vec<usize> = mandatory.iter().chain(candidates).copied().collect();
        let clients: Vec<(ClientId, Histogram)> = members.iter().map(|&k| self.pool[k].clone()).collect();
        let mut inst = mkp::build_instance(&clients, self.capacity as i64, 1, clients.len())?;
        let classes = inst.class_rows;
        inst.capacities[classes] = size_max as i64;
        inst.capacities[classes + 1] = -(size_min as i64);

        let scale = (self.config.max_size() + 1) as i64;
        for (p, &k) in inst.profits.iter_mut().zip(&members) {
            *p = *p * scale + i64::from(self.counts[k] == 0);
        }

        let fixed: BTreeSet<ClientId> = mandatory.iter().map(|&k| self.pool[k].0.clone()).collect();
        let comp = mkp::build_complementary(&inst, &fixed)?;

        self.solver_seed = self.solver_seed.wrapping_add(1);
        let effort = SolverEffort { seed: self.solver_seed, ..self.config.solver };
        let sol = mkp::solve(&comp, &effort)?;
        if !sol.feasible {
            return Ok(None);
        }
        // comp items are the candidates, in order
        let mut out = mandatory.to_vec();
        out.extend(sol.selected_indices().into_iter().map(|i| candidates[i]));
        Ok(Some(out))
    }
}

/// Re-solves a skewed subset with compensation clients added to the
/// candidate pool: clients already selected, still under `x_star`, whose
/// modal class is a deficient knapsack. Keeps the new subset only if its
/// non-iid degree is strictly lower and it still covers a new client.
pub fn improve_nid(subset: &[usize], state: &mut SelectionState) -> Result<Vec<usize>> {
    let cap = state.capacity as f64;
    let fill = state.fill_of(subset);
    let deficient: BTreeSet<usize> = fill
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, c)| (**c as f64) < state.config.fill_threshold * cap)
        .map(|(j, _)| j)
        .collect();
    if deficient.is_empty() {
        return Ok(subset.to_vec());
    }
    let compensation: Vec<usize> = (0..state.pool.len())
        .filter(|&k| {
            state.counts[k] >= 1
                && state.counts[k] < state.config.x_star
                && !subset.contains(&k)
                && state.pool[k].1.modal_class().is_some_and(|c| deficient.contains(&c))
        })
        .collect();
    if compensation.is_empty() {
        return Ok(subset.to_vec());
    }

    let mut candidates = state.remaining();
    candidates.extend(&compensation);
    let before = state.nid_of(subset);
    let max_size = state.config.max_size();
    let Some(resolved) = state.solve_over(&candidates, &[], 1, max_size)? else {
        return Ok(subset.to_vec());
    };
    let covers_new = resolved.iter().any(|&k| state.counts[k] == 0);
    let after = state.nid_of(&resolved);
    debug!(before, after, added = compensation.len(), "compensation re-solve");
    if covers_new && after < before {
        Ok(resolved)
    } else {
        Ok(subset.to_vec())
    }
}

/// Grows a subset below `n - delta` by fixing its members and packing the
/// residual capacity with eligible clients (count below `x_star`). If the
/// residual knapsacks cannot reach the minimum size, the best packing is
/// topped up one client at a time, choosing whichever keeps the combined
/// distribution most uniform.
pub fn enforce_min_size(subset: &[usize], state: &mut SelectionState) -> Result<Vec<usize>> {
    let min_size = state.config.min_size();
    if subset.len() >= min_size {
        return Ok(subset.to_vec());
    }
    let eligible: Vec<usize> =
        (0..state.pool.len()).filter(|&k| !subset.contains(&k) && state.counts[k] < state.config.x_star).collect();
    let target = min_size.min(subset.len() + eligible.len());
    let max_size = state.config.max_size();

    if let Some(full) = state.solve_over(&eligible, subset, target, max_size)? {
        return Ok(full);
    }
    let mut grown = state.solve_over(&eligible, subset, subset.len(), max_size)?.unwrap_or_else(|| subset.to_vec());
    while grown.len() < target {
        let next = eligible.iter().copied().filter(|k| !grown.contains(k)).min_by(|&a, &b| {
            let mut with_a = grown.clone();
            with_a.push(a);
            let mut with_b = grown.clone();
            with_b.push(b);
            state
                .nid_of(&with_a)
                .total_cmp(&state.nid_of(&with_b))
                .then_with(|| state.counts[a].cmp(&state.counts[b]))
                .then_with(|| a.cmp(&b))
        });
        match next {
            Some(k) => grown.push(k),
            None => break,
        }
    }
    Ok(grown)
}

/// Partitions `pool` into subsets for one scheduling period.
pub fn generate_subsets(pool: &[(ClientId, Histogram)], config: &SubsetGenConfig, seed: u64) -> Result<SubsetSchedule> {
    let mut state = SelectionState::new(pool.to_vec(), config.clone(), seed)?;
    let min_size = config.min_size();
    let max_size = config.max_size();
    let mut subsets = Vec::new();
    let mut per_subset_nid = Vec::new();
    let mut undersized = 0;

    loop {
        let remaining = state.remaining();
        if remaining.is_empty() {
            break;
        }
        let mut subset = if remaining.len() >= min_size {
            let mut s = state.solve_over(&remaining, &[], 1, max_size)?.unwrap_or_default();
            if !s.is_empty() && state.nid_of(&s) > config.nid_threshold {
                s = improve_nid(&s, &mut state)?;
            }
            if s.len() < min_size {
                s = enforce_min_size(&s, &mut state)?;
            }
            s
        } else {
            enforce_min_size(&remaining, &mut state)?
        };

        // A client too large for every knapsack still has to be scheduled.
        if !subset.iter().any(|&k| state.counts[k] == 0) {
            subset = enforce_min_size(&remaining[..1], &mut state)?;
        }

        subset.sort_unstable();
        if subset.len() < min_size {
            undersized += 1;
        }
        per_subset_nid.push(state.nid_of(&subset));
        subsets.push(state.ids(&subset));
        state.record(&subset);
        debug!(index = subsets.len(), size = subset.len(), nid = per_subset_nid.last(), "subset");
    }

    let selection_counts = state.pool.iter().map(|(id, _)| id.clone()).zip(state.counts.iter().copied()).collect();
    Ok(SubsetSchedule { subsets, per_subset_nid, selection_counts, capacity: state.capacity, undersized })
}

/// Uniformly random subsets with the given sizes (each drawn independently
/// without replacement from the pool), the comparison baseline for
/// generated schedules.
pub fn random_subsets(pool: &[(ClientId, Histogram)], sizes: &[usize], seed: u64) -> Vec<Vec<ClientId>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sizes
        .iter()
        .map(|&size| {
            let mut picked: Vec<&(ClientId, Histogram)> =
                pool.choose_multiple(&mut rng, size.min(pool.len())).collect();
            picked.sort_by(|a, b| a.0.cmp(&b.0));
            picked.into_iter().map(|(id, _)| id.clone()).collect()
        })
        .collect()
}

/// Non-iid degree of each listed subset, looked up in `pool`.
pub fn subsets_nid(pool: &[(ClientId, Histogram)], subsets: &[Vec<ClientId>]) -> Result<Vec<f64>> {
    let index: BTreeMap<&ClientId, &Histogram> = pool.iter().map(|(id, h)| (id, h)).collect();
    subsets
        .iter()
        .map(|s| {
            let hs = s
                .iter()
                .map(|id| index.get(id).copied().ok_or_else(|| Error::UnknownItem(id.to_string())))
                .collect::<Result<Vec<_>>>()?;
            nid(&sum_histograms(hs)?)
        })
        .collect()
}

/// One bar segment of a stacked per-subset class histogram.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackedBar {
    pub subset_index: usize,
    pub class: usize,
    pub client_id: ClientId,
    pub count: u64,
}

/// Flattens subsets into `(subset, class, client, count)` rows, skipping
/// zero counts.
pub fn stacked_histogram(pool: &[(ClientId, Histogram)], subsets: &[Vec<ClientId>]) -> Result<Vec<StackedBar>> {
    let index: BTreeMap<&ClientId, &Histogram> = pool.iter().map(|(id, h)| (id, h)).collect();
    let mut rows = Vec::new();
    for (t, subset) in subsets.iter().enumerate() {
        for id in subset {
            let h = index.get(id).ok_or_else(|| Error::UnknownItem(id.to_string()))?;
            for (class, &count) in h.counts().iter().enumerate() {
                if count > 0 {
                    rows.push(StackedBar { subset_index: t, class, client_id: id.clone(), count });
                }
            }
        }
    }
    Ok(rows)
}
