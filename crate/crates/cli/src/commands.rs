use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use fedsched_core::fl_sim::{make_noniid_pool, FedAvgTrainer, NonIidSpec};
use fedsched_core::pool_select::{
    fill_ratios, filter_candidates, min_budget, select_dp, select_greedy, select_in_order, select_random,
    PoolSelectionResult, SelectionMethod,
};
use fedsched_core::rng::{derive_seed, stream};
use fedsched_core::scheduler::{run_task, DryRun, MetricsTimeline, Policy, SchedulerConfig};
use fedsched_core::schema::{synthetic_client_file, ClientFile, RunConfig, SelectionParams};
use fedsched_core::scoring::{ScoreVector, Weights, NUM_CRITERIA};
use fedsched_core::subset_gen::{
    generate_subsets, random_subsets, stacked_histogram, subsets_nid, SubsetGenConfig, SubsetSchedule,
};
use fedsched_core::{ClientId, Error};
use serde::{Deserialize, Serialize};
use tracing::info;

use crate::args::{GenerateArgs, MethodArg, ReportArgs, SelectArgs, SimulateArgs, SubsetsArgs};
use crate::output::{emit, json_bytes, read, write_atomic};
use crate::Failure;

type CmdResult = Result<(), Failure>;

pub fn pool_generate(a: &GenerateArgs, seed: Option<u64>) -> CmdResult {
    let spec = NonIidSpec {
        kind: a.kind.into(),
        n_clients: a.clients,
        samples_per_client: a.samples,
        n_classes: a.classes,
        seed: seed.unwrap_or(0),
        ..Default::default()
    };
    let params = SelectionParams { a: a.a, b: a.b, ..Default::default() };
    let file = synthetic_client_file(&spec, &params)?;
    emit(a.out.as_deref(), file.to_json().as_bytes())?;
    Ok(())
}

fn load_clients(path: &Path) -> Result<ClientFile, Failure> {
    let text = read(path).map_err(Failure::Runtime)?;
    Ok(ClientFile::from_json(&text).with_context(|| format!("in {}", path.display()))?)
}

fn eleven(values: &Option<Vec<f64>>, default: f64, what: &str) -> Result<Vec<f64>, Failure> {
    match values {
        None => Ok(vec![default; NUM_CRITERIA]),
        Some(v) if v.len() == NUM_CRITERIA => Ok(v.clone()),
        Some(v) => Err(Error::InvalidArgument(format!("--{what} needs {NUM_CRITERIA} values, got {}", v.len())).into()),
    }
}

#[derive(Serialize)]
struct Comparison {
    budget: u64,
    candidates: usize,
    results: Vec<PoolSelectionResult>,
}

pub fn pool_select(a: &SelectArgs, seed: Option<u64>) -> CmdResult {
    let file = load_clients(&a.clients)?;
    let weights = Weights::from_slice(&eleven(&a.weights, 1.0, "weights")?)
        .map_err(|e| Error::InvalidArgument(format!("--weights: {e}")))?;
    let thresholds = ScoreVector::from_slice(&eleven(&a.thresholds, 0.0, "thresholds")?)?;
    let candidates = file.candidates(&weights)?;
    let filtered = filter_candidates(&candidates, &thresholds);

    if a.min_clients > 0 {
        let needed = min_budget(&filtered, a.min_clients)?;
        if a.budget < needed {
            return Err(Failure::Runtime(anyhow::anyhow!(
                "budget {} cannot guarantee {} clients; min_budget is {needed}",
                a.budget,
                a.min_clients
            )));
        }
    }

    let seed = derive_seed(seed.unwrap_or(0), stream::POOL_SELECT);
    let random = |filtered: &[_]| -> Result<PoolSelectionResult, Failure> {
        match &a.order {
            Some(order) => {
                let ids: Vec<ClientId> = order.iter().map(|s| ClientId::new(s.trim())).collect();
                Ok(select_in_order(filtered, a.budget, &ids)?)
            }
            None => Ok(select_random(filtered, a.budget, seed)),
        }
    };

    let bytes = match a.method {
        MethodArg::Dp => json_bytes(&select_dp(&filtered, a.budget)),
        MethodArg::Greedy => json_bytes(&select_greedy(&filtered, a.budget)),
        MethodArg::Random => json_bytes(&random(&filtered)?),
        MethodArg::All => {
            let mut results =
                vec![select_dp(&filtered, a.budget), select_greedy(&filtered, a.budget), random(&filtered)?];
            fill_ratios(&mut results);
            json_bytes(&Comparison { budget: a.budget, candidates: filtered.len(), results })
        }
    };
    emit(a.out.as_deref(), &bytes)?;
    Ok(())
}

fn stacked_csv(pool: &[(ClientId, fedsched_core::Histogram)], subsets: &[Vec<ClientId>]) -> Result<Vec<u8>, Failure> {
    let rows = stacked_histogram(pool, subsets)?;
    let mut buf = Vec::new();
    fedsched_core::scheduler::write_csv(&mut buf, &rows)?;
    Ok(buf)
}

#[derive(Serialize, Deserialize)]
struct Baseline {
    subsets: Vec<Vec<ClientId>>,
    per_subset_nid: Vec<f64>,
}

pub fn subsets(a: &SubsetsArgs, seed: Option<u64>) -> CmdResult {
    let file = load_clients(&a.clients)?;
    let pool = file.pool();
    let cfg = SubsetGenConfig {
        n: a.n,
        delta: a.delta,
        x_star: a.x_star,
        capacity_override: a.capacity,
        ..Default::default()
    };
    let seed = seed.unwrap_or(0);
    let schedule = generate_subsets(&pool, &cfg, derive_seed(seed, stream::SUBSETS))?;
    info!(subsets = schedule.len(), undersized = schedule.undersized, "schedule generated");
    if schedule.undersized > 0 {
        tracing::warn!(count = schedule.undersized, "subsets below n - delta");
    }

    let Some(dir) = &a.out_dir else {
        emit(None, &json_bytes(&schedule))?;
        return Ok(());
    };
    write_atomic(&dir.join("schedule.json"), &json_bytes(&schedule))?;
    write_atomic(&dir.join("stacked.csv"), &stacked_csv(&pool, &schedule.subsets)?)?;
    if a.baseline.is_some() {
        let sizes: Vec<usize> = schedule.subsets.iter().map(Vec::len).collect();
        let subsets = random_subsets(&pool, &sizes, derive_seed(seed, stream::RANDOM_POLICY));
        let per_subset_nid = subsets_nid(&pool, &subsets)?;
        write_atomic(&dir.join("random_stacked.csv"), &stacked_csv(&pool, &subsets)?)?;
        write_atomic(&dir.join("random_baseline.json"), &json_bytes(&Baseline { subsets, per_subset_nid }))?;
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct ArmSummary {
    final_accuracy: f64,
    rounds: usize,
    periods: usize,
    rounds_to_target: Option<usize>,
    min_selections: u32,
    max_selections: u32,
    mean_subset_nid: f64,
    undersized_subsets: usize,
}

impl ArmSummary {
    fn of(t: &MetricsTimeline, target: f64) -> Self {
        let nids: Vec<f64> = t.rounds.iter().map(|r| r.subset_nid).collect();
        ArmSummary {
            final_accuracy: t.final_metric(),
            rounds: t.rounds.len(),
            periods: t.periods.len(),
            rounds_to_target: t.rounds_to(target),
            min_selections: t.periods.iter().map(|p| p.min_selections).min().unwrap_or(0),
            max_selections: t.periods.iter().map(|p| p.max_selections).max().unwrap_or(0),
            mean_subset_nid: if nids.is_empty() { 0.0 } else { nids.iter().sum::<f64>() / nids.len() as f64 },
            undersized_subsets: t.periods.iter().map(|p| p.undersized).sum(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Summary {
    seed: u64,
    pool_size: usize,
    target_accuracy: f64,
    scheduled: ArmSummary,
    random: Option<ArmSummary>,
    /// Scheduled minus random final accuracy.
    margin: Option<f64>,
}

fn write_timeline(dir: &Path, arm: &str, t: &MetricsTimeline) -> Result<(), Failure> {
    let mut rounds = Vec::new();
    t.write_rounds_csv(&mut rounds)?;
    write_atomic(&dir.join(format!("{arm}.csv")), &rounds)?;
    let mut periods = Vec::new();
    t.write_periods_csv(&mut periods)?;
    write_atomic(&dir.join(format!("{arm}_periods.csv")), &periods)?;
    Ok(())
}

/// Stage one inside a simulation: keeps the selected clients when a budget
/// is configured.
fn select_pool(cfg: &RunConfig) -> Result<Option<Vec<ClientId>>, Failure> {
    let Some(budget) = cfg.selection.budget else {
        return Ok(None);
    };
    let file = synthetic_client_file(&cfg.pool, &cfg.selection)?;
    let candidates = filter_candidates(&file.candidates(&cfg.selection.weights()?)?, &cfg.selection.thresholds()?);
    if cfg.selection.min_clients > 0 {
        let needed = min_budget(&candidates, cfg.selection.min_clients)?;
        if budget < needed {
            return Err(Error::Config(format!("selection.budget {budget} is below min_budget {needed}")).into());
        }
    }
    let result = match cfg.selection.method {
        SelectionMethod::Dp => select_dp(&candidates, budget),
        SelectionMethod::Greedy => select_greedy(&candidates, budget),
        SelectionMethod::Random => select_random(&candidates, budget, derive_seed(cfg.seed, stream::POOL_SELECT)),
    };
    Ok(Some(result.sorted_ids()))
}

pub fn simulate(a: &SimulateArgs, seed: Option<u64>) -> CmdResult {
    let text = read(&a.config).map_err(Failure::Runtime)?;
    let mut cfg = RunConfig::from_toml(&text).with_context(|| format!("in {}", a.config.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(p) = a.periods {
        cfg.scheduler.max_periods = p;
    }
    cfg.validate()?;
    let cfg = cfg.seeded();

    let (mut pool, data) = make_noniid_pool(&cfg.pool)?;
    if let Some(ids) = select_pool(&cfg)? {
        pool.retain(|(id, _)| ids.contains(id));
        info!(selected = pool.len(), "stage one pool");
    }
    if pool.is_empty() {
        return Err(Failure::Runtime(anyhow::anyhow!("no client fits the selection budget")));
    }
    let pool_size = pool.len();

    let scheduled_cfg = SchedulerConfig { policy: Policy::Scheduled, ..cfg.scheduler.clone() };
    let (scheduled, random) = if a.no_train {
        (run_task(pool, &scheduled_cfg, &mut DryRun)?, None)
    } else {
        let mut trainer = FedAvgTrainer::new(data.clone(), cfg.trainer.clone())?;
        let s = run_task(pool.clone(), &scheduled_cfg, &mut trainer)?;
        let random_cfg = SchedulerConfig { policy: Policy::Random, ..cfg.scheduler.clone() };
        let mut trainer = FedAvgTrainer::new(data, cfg.trainer.clone())?;
        let r = run_task(pool, &random_cfg, &mut trainer)?;
        (s, Some(r))
    };

    write_timeline(&a.out_dir, "scheduled", &scheduled)?;
    if let Some(r) = &random {
        write_timeline(&a.out_dir, "random", r)?;
    }
    let s = ArmSummary::of(&scheduled, a.target);
    let r = random.as_ref().map(|t| ArmSummary::of(t, a.target));
    let summary = Summary {
        seed: cfg.seed,
        pool_size,
        target_accuracy: a.target,
        margin: r.as_ref().map(|r| s.final_accuracy - r.final_accuracy),
        scheduled: s,
        random: r,
    };
    write_atomic(&a.out_dir.join("summary.json"), &json_bytes(&summary))?;
    Ok(())
}

pub fn report(a: &ReportArgs) -> CmdResult {
    let mut out = String::new();
    if let Some(path) = &a.schedule {
        let schedule: SubsetSchedule = serde_json::from_str(&read(path).map_err(Failure::Runtime)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        out.push_str(&format!(
            "subsets {}  capacity {}  selections {}..{}  undersized {}\n",
            schedule.len(),
            schedule.capacity,
            schedule.min_count(),
            schedule.max_count(),
            schedule.undersized
        ));
        out.push_str(&format!(
            "mean nid {:.4} (without last {:.4})\n",
            schedule.mean_nid(false),
            schedule.mean_nid(true)
        ));
        for (t, (s, nid)) in schedule.subsets.iter().zip(&schedule.per_subset_nid).enumerate() {
            out.push_str(&format!("{t:>4}  size {:>3}  nid {nid:.4}\n", s.len()));
        }
    }
    if let Some(dir) = &a.run {
        let path = dir.join("summary.json");
        let summary: Summary = serde_json::from_str(&read(&path).map_err(Failure::Runtime)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        out.push_str(&format!("seed {}  pool {}\n", summary.seed, summary.pool_size));
        let mut arms = BTreeMap::new();
        arms.insert("scheduled", &summary.scheduled);
        if let Some(r) = &summary.random {
            arms.insert("random", r);
        }
        for (name, arm) in arms {
            out.push_str(&format!(
                "{name:<10} acc {:.4}  rounds {}  periods {}  to {:.2}: {}  selections {}..{}  nid {:.4}\n",
                arm.final_accuracy,
                arm.rounds,
                arm.periods,
                summary.target_accuracy,
                arm.rounds_to_target.map_or("-".to_string(), |r| r.to_string()),
                arm.min_selections,
                arm.max_selections,
                arm.mean_subset_nid
            ));
        }
        if let Some(m) = summary.margin {
            out.push_str(&format!("margin {m:+.4}\n"));
        }
    }
    emit(None, out.as_bytes())?;
    Ok(())
}
