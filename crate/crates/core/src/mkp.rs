//! 0-1 multidimensional knapsack: instance construction, complementary
//! (residual-capacity) instances, an exact/heuristic solver and a
//! brute-force reference.
//!
//! Every constraint is stored as `row · x <= capacity`. Lower bounds on the
//! number of selected items are encoded as a row of `-1`s with a negated
//! capacity.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{ClientId, Histogram};

/// Largest instance [`brute_force`] accepts.
pub const BRUTE_FORCE_MAX_ITEMS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MkpInstance {
    pub profits: Vec<i64>,
    /// Row-major, `rows x items`.
    pub constraint_matrix: Vec<Vec<i64>>,
    pub capacities: Vec<i64>,
    pub item_ids: Vec<ClientId>,
    /// How many leading rows are per-class histogram rows.
    pub class_rows: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MkpSolution {
    pub selected: Vec<bool>,
    pub objective: i64,
    pub feasible: bool,
    pub proven_optimal: bool,
    /// Upper bound minus objective; zero when proven optimal.
    pub gap: f64,
    pub upper_bound: i64,
    pub nodes: u64,
}

impl MkpSolution {
    fn infeasible(items: usize, proven: bool, nodes: u64) -> Self {
        MkpSolution {
            selected: vec![false; items],
            objective: 0,
            feasible: false,
            proven_optimal: proven,
            gap: 0.0,
            upper_bound: 0,
            nodes,
        }
    }

    pub fn selected_indices(&self) -> Vec<usize> {
        self.selected.iter().enumerate().filter(|(_, s)| **s).map(|(i, _)| i).collect()
    }

    pub fn selected_ids(&self, instance: &MkpInstance) -> Vec<ClientId> {
        self.selected_indices().into_iter().map(|i| instance.item_ids[i].clone()).collect()
    }
}

/// Search limits for [`solve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverEffort {
    /// Instances up to this many items are searched exhaustively.
    pub exact_threshold: usize,
    /// Node budget for the exact search.
    pub node_limit: u64,
    /// Node budget for the improvement search run on larger instances.
    pub large_node_limit: u64,
    /// Subgradient iterations used to tune the Lagrangian bound.
    pub bound_iterations: usize,
    /// Seed for the local-search scan order.
    pub seed: u64,
}

impl Default for SolverEffort {
    fn default() -> Self {
        SolverEffort {
            exact_threshold: 40,
            node_limit: 2_000_000,
            large_node_limit: 50_000,
            bound_iterations: 300,
            seed: 0,
        }
    }
}

impl MkpInstance {
    pub fn items(&self) -> usize {
        self.profits.len()
    }

    pub fn rows(&self) -> usize {
        self.capacities.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.items();
        if self.item_ids.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: self.item_ids.len() });
        }
        if self.constraint_matrix.len() != self.capacities.len() {
            return Err(Error::DimensionMismatch {
                expected: self.capacities.len(),
                actual: self.constraint_matrix.len(),
            });
        }
        for row in &self.constraint_matrix {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: row.len() });
            }
        }
        if self.class_rows > self.rows() {
            return Err(Error::InvalidArgument("class_rows exceeds row count".into()));
        }
        if self.constraint_matrix[..self.class_rows].iter().flatten().any(|a| *a < 0) {
            return Err(Error::InvalidArgument("histogram rows must be non-negative".into()));
        }
        Ok(())
    }

    /// `A x <= b` on every row.
    pub fn is_feasible(&self, selected: &[bool]) -> bool {
        self.constraint_matrix
            .iter()
            .zip(&self.capacities)
            .all(|(row, cap)| row.iter().zip(selected).filter(|(_, s)| **s).map(|(a, _)| a).sum::<i64>() <= *cap)
    }

    pub fn objective(&self, selected: &[bool]) -> i64 {
        self.profits.iter().zip(selected).filter(|(_, s)| **s).map(|(p, _)| p).sum()
    }

    /// Copy restricted to the given item positions, in that order.
    pub fn restrict(&self, keep: &[usize]) -> MkpInstance {
        MkpInstance {
            profits: keep.iter().map(|&k| self.profits[k]).collect(),
            constraint_matrix: self
                .constraint_matrix
                .iter()
                .map(|row| keep.iter().map(|&k| row[k]).collect())
                .collect(),
            capacities: self.capacities.clone(),
            item_ids: keep.iter().map(|&k| self.item_ids[k].clone()).collect(),
            class_rows: self.class_rows,
        }
    }
}

/// Builds the subset-selection knapsack: one row per class with a shared
/// capacity, a row of ones bounding the subset size from above and a row of
/// minus ones bounding it from below. Profit of a client is its sample count.
pub fn build_instance(
    clients: &[(ClientId, Histogram)],
    capacity: i64,
    size_min: usize,
    size_max: usize,
) -> Result<MkpInstance> {
    let first = clients.first().ok_or(Error::EmptyPool)?;
    let classes = first.1.classes();
    for (_, h) in clients {
        if h.classes() != classes {
            return Err(Error::DimensionMismatch { expected: classes, actual: h.classes() });
        }
    }
    if capacity < 1 {
        return Err(Error::InvalidArgument(format!("capacity must be positive, got {capacity}")));
    }
    if size_min < 1 || size_min > size_max || size_max > clients.len() {
        return Err(Error::InvalidArgument(format!(
            "size bounds must satisfy 1 <= {size_min} <= {size_max} <= {}",
            clients.len()
        )));
    }

    let mut matrix: Vec<Vec<i64>> = (0..classes).map(|c| clients.iter().map(|(_, h)| h[c] as i64).collect()).collect();
    matrix.push(vec![1; clients.len()]);
    matrix.push(vec![-1; clients.len()]);
    let mut capacities = vec![capacity; classes];
    capacities.push(size_max as i64);
    capacities.push(-(size_min as i64));

    Ok(MkpInstance {
        profits: clients.iter().map(|(_, h)| h.total() as i64).collect(),
        constraint_matrix: matrix,
        capacities,
        item_ids: clients.iter().map(|(id, _)| id.clone()).collect(),
        class_rows: classes,
    })
}

/// Instance over the non-mandatory items whose capacities are what the
/// mandatory items leave free. Non-negative rows are clamped at zero and
/// non-positive rows (lower bounds) at zero from below.
pub fn build_complementary(instance: &MkpInstance, mandatory: &BTreeSet<ClientId>) -> Result<MkpInstance> {
    for id in mandatory {
        if !instance.item_ids.contains(id) {
            return Err(Error::UnknownItem(id.to_string()));
        }
    }
    let (fixed, free): (Vec<usize>, Vec<usize>) =
        (0..instance.items()).partition(|&k| mandatory.contains(&instance.item_ids[k]));

    let mut out = instance.restrict(&free);
    for (r, row) in instance.constraint_matrix.iter().enumerate() {
        let used: i64 = fixed.iter().map(|&k| row[k]).sum();
        let residual = instance.capacities[r] - used;
        out.capacities[r] = if row.iter().all(|a| *a >= 0) {
            residual.max(0)
        } else if row.iter().all(|a| *a <= 0) {
            residual.min(0)
        } else {
            residual
        };
    }
    Ok(out)
}

/// Exhaustive enumeration of all subsets. The first optimum in mask order
/// wins.
pub fn brute_force(instance: &MkpInstance) -> Result<MkpSolution> {
    instance.validate()?;
    let n = instance.items();
    if n > BRUTE_FORCE_MAX_ITEMS {
        return Err(Error::TooManyItems { items: n, max: BRUTE_FORCE_MAX_ITEMS });
    }
    let mut best: Option<(i64, u32)> = None;
    let mut selected = vec![false; n];
    for mask in 0u32..(1u32 << n) {
        for (k, s) in selected.iter_mut().enumerate() {
            *s = mask >> k & 1 == 1;
        }
        if !instance.is_feasible(&selected) {
            continue;
        }
        let value = instance.objective(&selected);
        if best.map_or(true, |(b, _)| value > b) {
            best = Some((value, mask));
        }
    }
    Ok(match best {
        Some((value, mask)) => MkpSolution {
            selected: (0..n).map(|k| mask >> k & 1 == 1).collect(),
            objective: value,
            feasible: true,
            proven_optimal: true,
            gap: 0.0,
            upper_bound: value,
            nodes: 1 << n,
        },
        None => MkpSolution::infeasible(n, true, 1 << n),
    })
}

/// Solves an instance: exact branch and bound up to
/// `effort.exact_threshold` items, otherwise greedy construction with
/// swap-based local search followed by a node-limited improvement search.
pub fn solve(instance: &MkpInstance, effort: &SolverEffort) -> Result<MkpSolution> {
    instance.validate()?;
    let n = instance.items();
    let model = Model::new(instance);

    if !model.root_can_be_feasible() {
        return Ok(MkpSolution::infeasible(n, true, 0));
    }

    let mut incumbent = model.construct();
    if let Some(sel) = incumbent.as_mut() {
        model.local_search(sel, effort.seed);
    }
    let lb = incumbent.as_ref().map_or(0, |s| model.value(s));
    let lagrange = model.lagrangian(effort.bound_iterations, lb);

    let node_limit = if n <= effort.exact_threshold { effort.node_limit } else { effort.large_node_limit };
    let mut search = Search::new(&model, &lagrange, incumbent, node_limit);
    search.run();

    let root_bound = model.root_bound(&lagrange);
    let nodes = search.nodes;
    let completed = !search.aborted;
    match search.best {
        None => Ok(MkpSolution::infeasible(n, completed, nodes)),
        Some(sel) => {
            let objective = model.value(&sel);
            let proven = completed || objective >= root_bound;
            let upper = if proven { objective } else { root_bound.max(objective) };
            Ok(MkpSolution {
                selected: sel,
                objective,
                feasible: true,
                proven_optimal: proven,
                gap: (upper - objective) as f64,
                upper_bound: upper,
                nodes,
            })
        }
    }
}

/// Column-major copy of an instance with derived search data.
struct Model<'a> {
    inst: &'a MkpInstance,
    /// `cols[k][r]`
    cols: Vec<Vec<i64>>,
    /// Rows whose coefficients are all non-negative.
    packing_rows: Vec<bool>,
    /// Rows of all ones: cardinality limits.
    count_rows: Vec<usize>,
}

impl<'a> Model<'a> {
    fn new(inst: &'a MkpInstance) -> Self {
        let m = inst.rows();
        let cols = (0..inst.items()).map(|k| (0..m).map(|r| inst.constraint_matrix[r][k]).collect()).collect();
        let packing_rows = inst.constraint_matrix.iter().map(|row| row.iter().all(|a| *a >= 0)).collect();
        let count_rows = inst
            .constraint_matrix
            .iter()
            .enumerate()
            .filter(|(_, row)| !row.is_empty() && row.iter().all(|a| *a == 1))
            .map(|(r, _)| r)
            .collect();
        Model { inst, cols, packing_rows, count_rows }
    }

    fn n(&self) -> usize {
        self.inst.items()
    }

    fn m(&self) -> usize {
        self.inst.rows()
    }

    fn value(&self, sel: &[bool]) -> i64 {
        self.inst.objective(sel)
    }

    fn loads(&self, sel: &[bool]) -> Vec<i64> {
        let mut load = vec![0; self.m()];
        for (k, s) in sel.iter().enumerate() {
            if *s {
                for (l, a) in load.iter_mut().zip(&self.cols[k]) {
                    *l += a;
                }
            }
        }
        load
    }

    fn fits(&self, load: &[i64]) -> bool {
        load.iter().zip(&self.inst.capacities).all(|(l, b)| l <= b)
    }

    /// Even taking every item with a negative coefficient, can each row be met?
    fn root_can_be_feasible(&self) -> bool {
        (0..self.m()).all(|r| {
            let best: i64 = self.inst.constraint_matrix[r].iter().map(|a| (*a).min(0)).sum();
            best <= self.inst.capacities[r]
        })
    }

    /// Profit per unit of normalized packing weight.
    fn density(&self, k: usize) -> f64 {
        let mut weight = 1e-9;
        for r in 0..self.m() {
            let cap = self.inst.capacities[r];
            if self.packing_rows[r] && cap > 0 {
                weight += self.cols[k][r] as f64 / cap as f64;
            }
        }
        self.inst.profits[k] as f64 / weight
    }

    /// Items by density descending, ties by position.
    fn density_order(&self) -> Vec<usize> {
        let dens: Vec<f64> = (0..self.n()).map(|k| self.density(k)).collect();
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| dens[b].total_cmp(&dens[a]).then(a.cmp(&b)));
        order
    }

    /// Density-ordered greedy fill on the packing rows, then a repair pass
    /// for covering rows. `None` if no feasible point was reached.
    fn construct(&self) -> Option<Vec<bool>> {
        let n = self.n();
        let m = self.m();
        let mut sel = vec![false; n];
        let mut load = vec![0_i64; m];
        let order = self.density_order();
        let packing_ok = |load: &[i64], k: usize| {
            (0..m).all(|r| !self.packing_rows[r] || load[r] + self.cols[k][r] <= self.inst.capacities[r])
        };
        for &k in &order {
            if packing_ok(&load, k) {
                sel[k] = true;
                for r in 0..m {
                    load[r] += self.cols[k][r];
                }
            }
        }
        if !self.fits(&load) {
            // Covering rows unmet: add whatever still fits the packing rows,
            // lightest first.
            let mut light = order.clone();
            light.sort_by_key(|&k| (self.cols[k].iter().map(|a| a.max(&0)).sum::<i64>(), k));
            for k in light {
                if self.fits(&load) {
                    break;
                }
                if !sel[k] && packing_ok(&load, k) {
                    sel[k] = true;
                    for r in 0..m {
                        load[r] += self.cols[k][r];
                    }
                }
            }
        }
        self.fits(&load).then_some(sel)
    }

    /// First-improvement local search over add, 1-1 swap and 1-2 swap moves.
    fn local_search(&self, sel: &mut [bool], seed: u64) {
        let n = self.n();
        let m = self.m();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut load = self.loads(sel);
        let p = &self.inst.profits;
        let apply = |load: &mut [i64], k: usize, sign: i64| {
            for r in 0..m {
                load[r] += sign * self.cols[k][r];
            }
        };

        loop {
            let mut scan: Vec<usize> = (0..n).collect();
            scan.shuffle(&mut rng);
            let mut improved = false;

            // add
            for &j in &scan {
                if sel[j] || p[j] <= 0 {
                    continue;
                }
                apply(&mut load, j, 1);
                if self.fits(&load) {
                    sel[j] = true;
                    improved = true;
                } else {
                    apply(&mut load, j, -1);
                }
            }

            // 1-1 and 1-2 swaps
            'outer: for &i in &scan {
                if !sel[i] {
                    continue;
                }
                apply(&mut load, i, -1);
                sel[i] = false;
                for (a, &j) in scan.iter().enumerate() {
                    if sel[j] || j == i {
                        continue;
                    }
                    apply(&mut load, j, 1);
                    if p[j] > p[i] && self.fits(&load) {
                        sel[j] = true;
                        improved = true;
                        continue 'outer;
                    }
                    for &l in &scan[a + 1..] {
                        if sel[l] || l == i || p[j] + p[l] <= p[i] {
                            continue;
                        }
                        apply(&mut load, l, 1);
                        if self.fits(&load) {
                            sel[j] = true;
                            sel[l] = true;
                            improved = true;
                            continue 'outer;
                        }
                        apply(&mut load, l, -1);
                    }
                    apply(&mut load, j, -1);
                }
                apply(&mut load, i, 1);
                sel[i] = true;
            }

            if !improved {
                break;
            }
        }
        debug_assert!(self.fits(&load));
    }

    /// Lagrangian dual of the linear relaxation, `min over lambda >= 0` of
    /// `lambda·b + sum_k max(0, p_k - lambda·A_k)`, approached by projected
    /// subgradient steps. Any lambda gives a valid upper bound; the best one
    /// seen is kept.
    fn lagrangian(&self, iterations: usize, lower: i64) -> Lagrange {
        let n = self.n();
        let m = self.m();
        let p = &self.inst.profits;
        // Work on rows scaled to unit magnitude; the bound is unchanged.
        let scale: Vec<f64> = (0..m)
            .map(|r| {
                let widest = self.inst.constraint_matrix[r].iter().map(|a| a.abs()).max().unwrap_or(0);
                self.inst.capacities[r].abs().max(widest).max(1) as f64
            })
            .collect();
        let b: Vec<f64> = (0..m).map(|r| self.inst.capacities[r] as f64 / scale[r]).collect();
        let cols: Vec<Vec<f64>> =
            self.cols.iter().map(|col| col.iter().zip(&scale).map(|(a, s)| *a as f64 / s).collect()).collect();
        let reduced_of = |lambda: &[f64], k: usize| -> f64 {
            p[k] as f64 - cols[k].iter().zip(lambda).map(|(a, l)| a * l).sum::<f64>()
        };
        let eval = |lambda: &[f64]| -> (f64, Vec<f64>) {
            let mut value: f64 = lambda.iter().zip(&b).map(|(l, b)| l * b).sum();
            let mut grad = b.clone();
            for k in 0..n {
                let reduced = reduced_of(lambda, k);
                if reduced > 0.0 {
                    value += reduced;
                    for (g, a) in grad.iter_mut().zip(&cols[k]) {
                        *g -= a;
                    }
                }
            }
            (value, grad)
        };

        // Start from a uniform price per unit of class weight.
        let priced: Vec<usize> = if self.inst.class_rows > 0 {
            (0..self.inst.class_rows).collect()
        } else {
            (0..m).filter(|&r| self.packing_rows[r]).collect()
        };
        let weight: f64 = (0..n).map(|k| priced.iter().map(|&r| self.cols[k][r] as f64).sum::<f64>()).sum();
        let profit: f64 = p.iter().map(|&v| v.max(0) as f64).sum();
        let mut lambda = vec![0.0; m];
        if weight > 0.0 {
            for &r in &priced {
                lambda[r] = profit / weight * scale[r];
            }
        }

        let (mut current, mut grad) = eval(&lambda);
        let (zero_value, _) = eval(&vec![0.0; m]);
        let (mut best_value, mut best_lambda) =
            if zero_value < current { (zero_value, vec![0.0; m]) } else { (current, lambda.clone()) };
        let mut theta = 1.0;
        let mut stall = 0;
        for _ in 0..iterations {
            // A row at lambda = 0 with positive slack cannot move.
            let norm: f64 =
                grad.iter().zip(&lambda).map(|(g, l)| if *l <= 0.0 && *g > 0.0 { 0.0 } else { g * g }).sum();
            if norm < 1e-12 || current - (lower as f64) < 1e-9 {
                break;
            }
            let step = theta * (current - lower as f64) / norm;
            for r in 0..m {
                lambda[r] = (lambda[r] - step * grad[r]).max(0.0);
            }
            let (value, g) = eval(&lambda);
            current = value;
            grad = g;
            if value < best_value - 1e-9 {
                best_value = value;
                best_lambda.clone_from(&lambda);
                stall = 0;
            } else {
                stall += 1;
                if stall >= 10 {
                    theta *= 0.5;
                    stall = 0;
                    lambda.clone_from(&best_lambda);
                    let (v, g) = eval(&lambda);
                    current = v;
                    grad = g;
                    if theta < 1e-4 {
                        break;
                    }
                }
            }
        }

        let reduced = (0..n).map(|k| reduced_of(&best_lambda, k)).collect();
        let constant = best_lambda.iter().zip(&b).map(|(l, b)| l * b).sum();
        Lagrange { constant, reduced }
    }

    fn root_bound(&self, lagrange: &Lagrange) -> i64 {
        let lag = lagrange.constant + lagrange.reduced.iter().map(|r| r.max(0.0)).sum::<f64>();
        let mut bound = (lag + 1e-6).floor() as i64;
        bound = bound.min(self.inst.profits.iter().map(|p| p.max(&0)).sum());
        if let Some(slots) = self.count_rows.iter().map(|&r| self.inst.capacities[r]).min() {
            let mut ps: Vec<i64> = self.inst.profits.clone();
            ps.sort_unstable_by(|a, b| b.cmp(a));
            bound = bound.min(ps.iter().take(slots.max(0) as usize).filter(|p| **p > 0).sum());
        }
        bound
    }
}

struct Lagrange {
    constant: f64,
    reduced: Vec<f64>,
}

/// Depth-first branch and bound over items in density order.
struct Search<'m, 'a> {
    model: &'m Model<'a>,
    order: Vec<usize>,
    lag_constant: f64,
    lag_reduced: Vec<f64>,
    /// `sum of max(0, reduced)` over `order[d..]`
    lag_suffix: Vec<f64>,
    /// Per depth, the most a row can still decrease: sum of negative
    /// coefficients over `order[d..]`.
    neg_suffix: Vec<Vec<i64>>,
    /// Per depth, prefix sums of the positive suffix profits sorted descending.
    top_profit: Vec<Vec<i64>>,
    node_limit: u64,
    nodes: u64,
    aborted: bool,
    best: Option<Vec<bool>>,
    best_value: i64,
    sel: Vec<bool>,
    load: Vec<i64>,
}

impl<'m, 'a> Search<'m, 'a> {
    fn new(model: &'m Model<'a>, lagrange: &Lagrange, incumbent: Option<Vec<bool>>, node_limit: u64) -> Self {
        let n = model.n();
        let m = model.m();
        let order = model.density_order();

        let mut lag_suffix = vec![0.0; n + 1];
        let mut neg_suffix = vec![vec![0_i64; m]; n + 1];
        for d in (0..n).rev() {
            let k = order[d];
            lag_suffix[d] = lag_suffix[d + 1] + lagrange.reduced[k].max(0.0);
            for r in 0..m {
                neg_suffix[d][r] = neg_suffix[d + 1][r] + model.cols[k][r].min(0);
            }
        }
        let top_profit = (0..=n)
            .map(|d| {
                let mut ps: Vec<i64> = order[d..].iter().map(|&k| model.inst.profits[k]).filter(|p| *p > 0).collect();
                ps.sort_unstable_by(|a, b| b.cmp(a));
                let mut acc = vec![0];
                for p in ps {
                    acc.push(acc.last().unwrap() + p);
                }
                acc
            })
            .collect();

        let best_value = incumbent.as_ref().map_or(i64::MIN, |s| model.value(s));
        Search {
            model,
            order,
            lag_constant: lagrange.constant,
            lag_reduced: lagrange.reduced.clone(),
            lag_suffix,
            neg_suffix,
            top_profit,
            node_limit,
            nodes: 0,
            aborted: false,
            best: incumbent,
            best_value,
            sel: vec![false; n],
            load: vec![0; m],
        }
    }

    fn run(&mut self) {
        self.visit(0, 0, 0.0);
    }

    fn visit(&mut self, depth: usize, profit: i64, lag_fixed: f64) {
        if self.aborted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.node_limit {
            self.aborted = true;
            return;
        }
        let model = self.model;
        let caps = &model.inst.capacities;

        // Can the covering rows still be met by what is left?
        if (0..model.m()).any(|r| self.load[r] + self.neg_suffix[depth][r] > caps[r]) {
            return;
        }
        if profit > self.best_value && model.fits(&self.load) {
            self.best_value = profit;
            self.best = Some(self.sel.clone());
        }
        if depth == self.order.len() {
            return;
        }

        let lag = self.lag_constant + lag_fixed + self.lag_suffix[depth];
        let mut bound = (lag + 1e-6).floor() as i64;
        let tops = &self.top_profit[depth];
        let slots = model
            .count_rows
            .iter()
            .map(|&r| caps[r] - self.load[r])
            .min()
            .unwrap_or(tops.len() as i64)
            .clamp(0, tops.len() as i64 - 1);
        bound = bound.min(profit + tops[slots as usize]);
        if bound <= self.best_value {
            return;
        }

        let k = self.order[depth];
        let col = &model.cols[k];
        let can_take = (0..model.m()).all(|r| self.load[r] + col[r] + self.neg_suffix[depth + 1][r] <= caps[r]);
        if can_take {
            self.sel[k] = true;
            for r in 0..model.m() {
                self.load[r] += col[r];
            }
            self.visit(depth + 1, profit + model.inst.profits[k], lag_fixed + self.lag_reduced[k]);
            for r in 0..model.m() {
                self.load[r] -= col[r];
            }
            self.sel[k] = false;
        }
        self.visit(depth + 1, profit, lag_fixed);
    }
}
