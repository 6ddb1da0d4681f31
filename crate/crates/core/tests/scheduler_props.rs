use std::collections::{BTreeMap, BTreeSet};

use fedsched_core::fl_sim::{make_noniid_pool, NonIidSpec, NonIidType};
use fedsched_core::scheduler::{
    run_period, run_task, Convergence, DryRun, PoolState, RoundExecutor, RoundReport, SchedulerConfig,
};
use fedsched_core::scoring::{per_task_behavior, per_task_quality, reputation};
use fedsched_core::{ClientId, Histogram, Result};
use proptest::prelude::*;

fn pool(kind: NonIidType, seed: u64) -> Vec<(ClientId, Histogram)> {
    make_noniid_pool(&NonIidSpec { kind, seed, test_per_class: 1, ..Default::default() }).unwrap().0
}

/// Quality drawn from the client id so some clients fall below threshold.
struct Uneven;

impl RoundExecutor for Uneven {
    fn run_round(&mut self, round: usize, participants: &[ClientId]) -> Result<RoundReport> {
        let quality = participants
            .iter()
            .filter(|id| (id.as_str().len() + round) % 7 != 0)
            .map(|id| (id.clone(), if id.as_str().ends_with('3') { -0.9 } else { 0.7 }))
            .collect();
        Ok(RoundReport { quality, global_metric: round as f64 / 1000.0 })
    }

    fn metric(&self) -> f64 {
        0.0
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn period_invariants(seed in 0u64..500, dropout in 0.0f64..0.3, kind in 0usize..3) {
        let kind = [NonIidType::OneLabel, NonIidType::TwoLabels, NonIidType::ThreeLabels][kind];
        let cfg = SchedulerConfig { dropout_rate: dropout, seed, ..Default::default() };
        let mut state = PoolState::new(pool(kind, seed)).unwrap();
        let mut exec = Uneven;
        let mut first = 0;
        for period in 0..4 {
            let active_before: BTreeSet<ClientId> = state.active.clone();
            let suspended_before: BTreeSet<ClientId> = state.suspended.keys().cloned().collect();
            let report = run_period(&mut state, &cfg, &mut exec, period, first, None).unwrap();
            first += report.outcomes.len();

            let mut scheduled: BTreeSet<ClientId> = BTreeSet::new();
            for o in &report.outcomes {
                for id in &o.participants {
                    prop_assert!(!suspended_before.contains(id));
                    scheduled.insert(id.clone());
                    if report.dropped.contains(id) {
                        prop_assert!(!o.returned[id]);
                    }
                }
                prop_assert!(o.q_t.keys().all(|id| o.returned[id]));
            }
            prop_assert_eq!(&scheduled, &active_before);

            for (id, r) in &report.reputations {
                let rounds: Vec<_> = report.outcomes.iter().filter(|o| o.participants.contains(id)).collect();
                let b: Vec<u8> = rounds.iter().map(|o| u8::from(o.returned[id])).collect();
                let q: Vec<f64> = rounds.iter().filter_map(|o| o.q_t.get(id).copied()).collect();
                let q_task = if q.is_empty() { 0.0 } else { per_task_quality(&q).unwrap() };
                prop_assert_eq!(r.s_rep, reputation(q_task, per_task_behavior(&b).unwrap()));
            }
            state.check_invariants().unwrap();
            if state.active.is_empty() {
                break;
            }
        }
    }
}

#[test]
fn pool_is_stable_without_dropout_or_threshold() {
    let cfg = SchedulerConfig { dropout_rate: 0.0, reputation_threshold: f64::NEG_INFINITY, ..Default::default() };
    let mut state = PoolState::new(pool(NonIidType::TwoLabels, 1)).unwrap();
    let before = state.active.clone();
    let mut exec = Uneven;
    for period in 0..3 {
        run_period(&mut state, &cfg, &mut exec, period, 0, None).unwrap();
        assert_eq!(state.active, before);
        assert!(state.suspended.is_empty());
    }
}

#[test]
fn dropout_statistics_over_twenty_runs() {
    let mut rounds = Vec::new();
    let mut returned_everywhere = Vec::new();
    for seed in 0..20 {
        let cfg = SchedulerConfig { dropout_rate: 0.05, seed, ..Default::default() };
        let mut state = PoolState::new(pool(NonIidType::OneLabel, seed)).unwrap();
        let report = run_period(&mut state, &cfg, &mut DryRun, 0, 0, None).unwrap();
        rounds.push(report.outcomes.len());
        let mut b_one: BTreeMap<&ClientId, bool> = BTreeMap::new();
        for o in &report.outcomes {
            for (id, r) in &o.returned {
                let e = b_one.entry(id).or_insert(true);
                *e &= *r;
            }
        }
        returned_everywhere.push(b_one.values().filter(|v| **v).count());
    }
    assert!(rounds.iter().all(|r| (10..=20).contains(r)), "{rounds:?}");
    let mean = returned_everywhere.iter().sum::<usize>() as f64 / 20.0;
    assert!(mean >= 93.0, "mean {mean}");
    assert!((mean - 95.0).abs() < 3.0 * (100.0f64 * 0.05 * 0.95).sqrt() / 20f64.sqrt() + 0.5, "mean {mean}");
}

#[test]
fn timeline_length_matches_rounds() {
    let cfg = SchedulerConfig {
        max_periods: 3,
        convergence: Convergence { patience: 0, ..Default::default() },
        ..Default::default()
    };
    let t = run_task(pool(NonIidType::ThreeLabels, 2), &cfg, &mut DryRun).unwrap();
    assert_eq!(t.rounds.len(), t.periods.iter().map(|p| p.rounds).sum::<usize>());
    assert_eq!(t.periods.len(), 3);
}
