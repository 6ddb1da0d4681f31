//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints a PASS/FAIL line whether or not it succeeds.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fedsched_core::fl_sim::{
    aggregate, aggregation_weights, local_train, make_noniid_pool, Classifier, FedAvgTrainer, ModelKind, NonIidSpec,
    NonIidType, Samples, TrainerConfig,
};
use fedsched_core::mkp::{self, MkpInstance, SolverEffort};
use fedsched_core::pool_select::{
    approximation_ratio, round2, select_dp, select_greedy, select_in_order, Candidate, PoolSelectionResult,
};
use fedsched_core::scheduler::{run_task, Convergence, Policy, SchedulerConfig};
use fedsched_core::scoring::ScoreVector;
use fedsched_core::subset_gen::{generate_subsets, random_subsets, subsets_nid, SubsetGenConfig};
use fedsched_core::{ClientId, Histogram};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

const TYPES: [NonIidType; 3] = [NonIidType::OneLabel, NonIidType::TwoLabels, NonIidType::ThreeLabels];

fn reference_candidates() -> Vec<Candidate> {
    let scores = [6.92, 4.89, 6.80, 6.08, 6.90, 6.08, 3.74, 3.36, 5.26, 3.39];
    let costs = [18, 14, 18, 17, 18, 17, 12, 11, 15, 11];
    scores.iter().zip(costs).enumerate().map(|(i, (&s, c))| Candidate::new(i, s, c, ScoreVector::splat(1.0))).collect()
}

fn id_set(r: &PoolSelectionResult) -> BTreeSet<ClientId> {
    r.selected.iter().cloned().collect()
}

fn ids(v: &[usize]) -> BTreeSet<ClientId> {
    v.iter().map(|&i| ClientId::from(i)).collect()
}

fn reference_instance() -> Outcome {
    let start = Instant::now();
    let cands = reference_candidates();
    let dp = select_dp(&cands, 100);
    let greedy = select_greedy(&cands, 100);
    let order: Vec<ClientId> = [2, 1, 5, 7, 6, 9].into_iter().map(ClientId::from).collect();
    let random = select_in_order(&cands, 100, &order).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    check(id_set(&dp) == ids(&[8, 5, 4, 2, 1, 0]), format!("dp picked {:?}", dp.selected))?;
    check((dp.total_score - 36.85).abs() <= 1e-9, format!("dp total {}", dp.total_score))?;
    check(dp.total_cost == 100, format!("dp cost {}", dp.total_cost))?;
    check(id_set(&greedy) == ids(&[0, 4, 2, 5, 3]), format!("greedy picked {:?}", greedy.selected))?;
    check((greedy.total_score - 32.78).abs() <= 1e-9, format!("greedy total {}", greedy.total_score))?;
    check(id_set(&random) == ids(&[2, 1, 5, 7, 6, 9]), format!("replay picked {:?}", random.selected))?;
    let g_ratio = round2(approximation_ratio(dp.total_score, greedy.total_score).map_err(|e| e.to_string())?);
    let r_ratio = round2(approximation_ratio(dp.total_score, random.total_score).map_err(|e| e.to_string())?);
    check(g_ratio == 0.11, format!("greedy ratio {g_ratio}"))?;
    check(r_ratio == 0.23, format!("random ratio {r_ratio}"))?;
    check(elapsed < Duration::from_secs(1), format!("took {elapsed:?}"))?;
    Ok(format!(
        "dp {:.2}/{} greedy {:.2} ratios {g_ratio:.2} {r_ratio:.2} in {elapsed:.2?}",
        dp.total_score, dp.total_cost, greedy.total_score
    ))
}

/// Exhaustive 0-1 knapsack optimum in hundredths.
fn knapsack_enumeration(cands: &[Candidate], budget: u64) -> i64 {
    let n = cands.len();
    let mut best = 0;
    for mask in 0u32..(1 << n) {
        let (mut cost, mut score) = (0u64, 0i64);
        for (i, c) in cands.iter().enumerate() {
            if mask >> i & 1 == 1 {
                cost += c.cost;
                score += c.score.hundredths();
            }
        }
        if cost <= budget {
            best = best.max(score);
        }
    }
    best
}

/// Exhaustive MKP optimum, `None` when nothing is feasible.
fn mkp_enumeration(inst: &MkpInstance) -> Option<i64> {
    let n = inst.profits.len();
    let mut best = None;
    for mask in 0u32..(1 << n) {
        let feasible = inst.constraint_matrix.iter().zip(&inst.capacities).all(|(row, &cap)| {
            row.iter().enumerate().filter(|(j, _)| mask >> j & 1 == 1).map(|(_, a)| a).sum::<i64>() <= cap
        });
        if feasible {
            let p: i64 = (0..n).filter(|j| mask >> j & 1 == 1).map(|j| inst.profits[j]).sum();
            best = Some(best.map_or(p, |b: i64| b.max(p)));
        }
    }
    best
}

fn knapsack_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut dp_mismatch = 0;
    for _ in 0..100 {
        let n = rng.gen_range(0..=15);
        let cands: Vec<Candidate> = (0..n)
            .map(|i| {
                Candidate::new(
                    i,
                    f64::from(rng.gen_range(0..1000)) / 100.0,
                    rng.gen_range(0..40),
                    ScoreVector::splat(1.0),
                )
            })
            .collect();
        let budget = rng.gen_range(0..150);
        let dp = select_dp(&cands, budget);
        if dp.total().hundredths() != knapsack_enumeration(&cands, budget) || dp.total_cost > budget {
            dp_mismatch += 1;
        }
    }

    let mut mkp_mismatch = 0;
    let mut feasible = 0;
    let cases = 250;
    for _ in 0..cases {
        let items = rng.gen_range(1..=15);
        let classes = rng.gen_range(2..=10);
        let pool: Vec<(ClientId, Histogram)> = (0..items)
            .map(|i| {
                let labels = rng.gen_range(1..=3.min(classes));
                let mut h = vec![0; classes];
                for _ in 0..labels {
                    h[rng.gen_range(0..classes)] += rng.gen_range(1..30);
                }
                (ClientId::from(i), Histogram::new(h))
            })
            .collect();
        let size_max = rng.gen_range(1..=items);
        let size_min = rng.gen_range(1..=size_max);
        let capacity = rng.gen_range(10..80);
        let inst = mkp::build_instance(&pool, capacity, size_min, size_max).map_err(|e| e.to_string())?;
        let solved =
            mkp::solve(&inst, &SolverEffort { seed: rng.gen(), ..Default::default() }).map_err(|e| e.to_string())?;
        let brute = mkp::brute_force(&inst).map_err(|e| e.to_string())?;
        let oracle = mkp_enumeration(&inst);
        let agree = match oracle {
            Some(best) => {
                feasible += 1;
                solved.feasible
                    && inst.is_feasible(&solved.selected)
                    && solved.objective == best
                    && brute.feasible
                    && brute.objective == best
            }
            None => !solved.feasible && !brute.feasible,
        };
        if !agree {
            mkp_mismatch += 1;
        }
    }
    let elapsed = start.elapsed();
    check(dp_mismatch == 0, format!("{dp_mismatch} dp mismatches"))?;
    check(mkp_mismatch == 0, format!("{mkp_mismatch} mkp mismatches"))?;
    check(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("dp 100/100, mkp {cases}/{cases} ({feasible} feasible) in {elapsed:.2?}"))
}

struct Run {
    kind: NonIidType,
    count_ok: bool,
    in_range: bool,
    nid_ratio: f64,
    max_nonfinal_nid: f64,
}

fn schedule_runs() -> Result<(Vec<Run>, Duration), String> {
    let start = Instant::now();
    let mut runs = Vec::new();
    for kind in TYPES {
        for seed in 0..20 {
            let spec = NonIidSpec { kind, seed, test_per_class: 0, ..Default::default() };
            let (pool, _) = make_noniid_pool(&spec).map_err(|e| e.to_string())?;
            let cfg = SubsetGenConfig { n: 10, delta: 3, x_star: 3, ..Default::default() };
            let s = generate_subsets(&pool, &cfg, seed).map_err(|e| e.to_string())?;

            let mut counts = std::collections::BTreeMap::new();
            for subset in &s.subsets {
                for id in subset {
                    *counts.entry(id.clone()).or_insert(0u32) += 1;
                }
            }
            let count_ok = pool.iter().all(|(id, _)| counts.get(id).is_some_and(|c| (1..=3).contains(c)))
                && s.subsets.iter().all(|x| x.len() <= 13);

            let nonfinal = &s.subsets[..s.len() - 1];
            let own = subsets_nid(&pool, nonfinal).map_err(|e| e.to_string())?;
            let sizes: Vec<usize> = nonfinal.iter().map(Vec::len).collect();
            let random =
                subsets_nid(&pool, &random_subsets(&pool, &sizes, 10_000 + seed)).map_err(|e| e.to_string())?;
            let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
            runs.push(Run {
                kind,
                count_ok,
                in_range: (10..=20).contains(&s.len()),
                nid_ratio: mean(&own) / mean(&random),
                max_nonfinal_nid: own.iter().copied().fold(0.0, f64::max),
            });
        }
    }
    Ok((runs, start.elapsed()))
}

fn fairness(runs: &[Run], elapsed: Duration) -> Outcome {
    let coverage_failures = runs.iter().filter(|r| !r.count_ok).count();
    check(coverage_failures == 0, format!("{coverage_failures} runs broke coverage, cap or size"))?;
    let mut detail = Vec::new();
    for kind in TYPES {
        let of_kind: Vec<&Run> = runs.iter().filter(|r| r.kind == kind).collect();
        let ok = of_kind.iter().filter(|r| r.in_range).count();
        check(ok * 10 >= of_kind.len() * 9, format!("{kind:?}: only {ok}/{} runs with 10-20 subsets", of_kind.len()))?;
        detail.push(format!("{kind:?} {ok}/{}", of_kind.len()));
    }
    check(elapsed < Duration::from_secs(120), format!("took {elapsed:?}"))?;
    Ok(format!("coverage 1..=3 and size <= 13 in all runs; 10-20 subsets: {} ({elapsed:.2?})", detail.join(", ")))
}

fn nid_quality(runs: &[Run]) -> Outcome {
    let worst = runs.iter().map(|r| r.nid_ratio).fold(0.0, f64::max);
    check(worst < 0.5, format!("worst scheduled/random Nid ratio {worst:.3}"))?;
    let type1 = runs.iter().filter(|r| r.kind == NonIidType::OneLabel).map(|r| r.max_nonfinal_nid).fold(0.0, f64::max);
    check(type1 <= 0.2, format!("type 1 non-final Nid up to {type1:.3}"))?;
    Ok(format!("worst Nid ratio {worst:.3} (< 0.5); type 1 max non-final Nid {type1:.3}"))
}

fn final_accuracy(kind: NonIidType, seed: u64, policy: Policy) -> Result<f64, String> {
    let spec = NonIidSpec { kind, seed, class_separation: 2.0, ..Default::default() };
    let (pool, data) = make_noniid_pool(&spec).map_err(|e| e.to_string())?;
    let trainer_cfg = TrainerConfig { model: ModelKind::Softmax, lr: 0.5, epochs: 10, seed, ..Default::default() };
    let mut trainer = FedAvgTrainer::new(data, trainer_cfg).map_err(|e| e.to_string())?;
    let cfg = SchedulerConfig {
        policy,
        max_rounds: Some(150),
        max_periods: 1_000,
        convergence: Convergence { patience: 0, ..Default::default() },
        seed,
        ..Default::default()
    };
    let t = run_task(pool, &cfg, &mut trainer).map_err(|e| e.to_string())?;
    check(t.rounds.len() == 150, format!("ran {} rounds", t.rounds.len()))?;
    Ok(t.final_metric())
}

fn scheduling_beats_random() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    for kind in TYPES {
        let mut pairs = Vec::new();
        for seed in 0..5 {
            pairs.push((final_accuracy(kind, seed, Policy::Scheduled)?, final_accuracy(kind, seed, Policy::Random)?));
        }
        let wins = pairs.iter().filter(|(s, r)| s > r).count();
        let margin = pairs.iter().map(|(s, r)| s - r).sum::<f64>() / pairs.len() as f64;
        if kind == NonIidType::OneLabel {
            check(wins >= 4 && margin >= 0.05, format!("type 1: {wins}/5 wins, mean margin {margin:.4}"))?;
        } else {
            check(margin >= -0.01, format!("{kind:?}: mean margin {margin:.4}"))?;
        }
        detail.push(format!("{kind:?} {wins}/5 wins, margin {:+.1} pts", margin * 100.0));
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(600), format!("took {elapsed:?}"))?;
    Ok(format!("{} ({elapsed:.2?})", detail.join("; ")))
}

fn uniform_candidates(n: usize, seed: u64) -> Vec<Candidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let score = f64::from(rng.gen_range(300..=700)) / 100.0;
            Candidate::new(i, score, (2.0 * score + 5.0).floor() as u64, ScoreVector::splat(1.0))
        })
        .collect()
}

fn best_time<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    (0..reps)
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(f());
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn complexity_trend() -> Outcome {
    let sizes = [100usize, 1_000, 10_000];
    let mut greedy = Vec::new();
    let mut dp = Vec::new();
    for &n in &sizes {
        let cands = uniform_candidates(n, n as u64);
        let budget = 5 * n as u64;
        greedy.push(best_time(15, || select_greedy(&cands, budget)));
        dp.push(best_time(if n >= 10_000 { 2 } else { 5 }, || select_dp(&cands, budget)));
    }

    // Least squares through the origin for t = k * n log n.
    let x: Vec<f64> = sizes.iter().map(|&n| n as f64 * (n as f64).ln()).collect();
    let k = x.iter().zip(&greedy).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();
    let mean = greedy.iter().sum::<f64>() / greedy.len() as f64;
    let ss_res: f64 = x.iter().zip(&greedy).map(|(a, t)| (t - k * a).powi(2)).sum();
    let ss_tot: f64 = greedy.iter().map(|t| (t - mean).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;

    let slope = ((dp[2] / dp[0]).ln()) / ((sizes[2] as f64 / sizes[0] as f64).ln());
    let ms = greedy[2] * 1e3;
    check(r2 >= 0.9, format!("greedy n log n fit R^2 {r2:.3}"))?;
    check(ms < 100.0, format!("greedy at 10k took {ms:.2} ms"))?;
    check(slope > 1.5, format!("dp log-log slope {slope:.2}"))?;
    Ok(format!(
        "greedy {:.3}/{:.3}/{:.3} ms, n log n R^2 {r2:.3}; dp {:.2}/{:.1}/{:.0} ms, slope {slope:.2}",
        greedy[0] * 1e3,
        greedy[1] * 1e3,
        ms,
        dp[0] * 1e3,
        dp[1] * 1e3,
        dp[2] * 1e3
    ))
}

fn numerical_checks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for trial in 0..40 {
        let dim = rng.gen_range(1..5);
        let classes = rng.gen_range(2..5);
        let model = if trial % 2 == 0 { Classifier::softmax(dim, classes) } else { Classifier::mlp(dim, classes, 4) };
        let params: Vec<f64> = (0..model.num_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut data = Samples::new(dim);
        for _ in 0..8 {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            data.push(&x, rng.gen_range(0..classes));
        }
        let rows: Vec<usize> = (0..data.len()).collect();
        let mut grad = vec![0.0; params.len()];
        model.loss_grad(&params, &data, &rows, &mut grad);
        let mut p = params.clone();
        let h = 1e-5;
        let (mut diff, mut norm) = (0.0, 0.0);
        for i in 0..p.len() {
            let orig = p[i];
            p[i] = orig + h;
            let up = model.loss(&p, &data);
            p[i] = orig - h;
            let down = model.loss(&p, &data);
            p[i] = orig;
            let fd = (up - down) / (2.0 * h);
            diff += (grad[i] - fd).powi(2);
            norm += grad[i].powi(2) + fd.powi(2);
        }
        worst = worst.max(diff.sqrt() / norm.sqrt().max(1e-300));
    }
    check(worst < 1e-4, format!("gradient relative error {worst:.2e}"))?;

    let mut weight_err: f64 = 0.0;
    for _ in 0..1_000 {
        let sizes: Vec<u64> = (0..rng.gen_range(1..100)).map(|_| rng.gen_range(1..10_000)).collect();
        let p = aggregation_weights(&sizes).map_err(|e| e.to_string())?;
        weight_err = weight_err.max((p.iter().sum::<f64>() - 1.0).abs());
    }
    check(weight_err <= 1e-12, format!("weights sum off by {weight_err:.2e}"))?;

    let (_, data) =
        make_noniid_pool(&NonIidSpec { n_clients: 10, seed: 1, ..Default::default() }).map_err(|e| e.to_string())?;
    for model in [Classifier::softmax(16, 10), Classifier::mlp(16, 10, 32)] {
        let global = model.init(5);
        let local =
            local_train(&model, &global, &data.clients[2].samples, 2, 16, 0.05, 17).map_err(|e| e.to_string())?;
        let next = aggregate(&global, std::slice::from_ref(&local), 1.0).map_err(|e| e.to_string())?;
        check(
            next.iter().zip(&local.weights).all(|(a, b)| a.to_bits() == b.to_bits()),
            "single-client FedAvg differs from local training",
        )?;
    }
    Ok(format!("gradient rel err {worst:.1e}; weight sum err {weight_err:.1e}; single-client FedAvg bit-exact"))
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |name: &str, outcome: Outcome| match outcome {
        Ok(detail) => println!("PASS  {name}: {detail}"),
        Err(why) => {
            failed += 1;
            println!("FAIL  {name}: {why}");
        }
    };

    report("Reference instance regression", reference_instance());
    report("Knapsack oracle equivalence", knapsack_oracles());
    match schedule_runs() {
        Ok((runs, elapsed)) => {
            report("Fairness suite", fairness(&runs, elapsed));
            report("Nid quality", nid_quality(&runs));
        }
        Err(e) => {
            report("Fairness suite", Err(e.clone()));
            report("Nid quality", Err(e));
        }
    }
    report("Scheduling beats random", scheduling_beats_random());
    report("Complexity trend", complexity_trend());
    report("Numerical checks", numerical_checks());

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
