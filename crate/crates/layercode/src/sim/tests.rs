use rand_distr::{Distribution, Exp};

use super::engine::{seeded_stream, worker_stream, ARRIVAL_STREAM};
use super::*;

fn base_config() -> SimConfig {
    SimConfig::new(vec![1.0, 2.0], 1e-9)
}

#[test]
fn invalid_configs_rejected_before_any_event() {
    let mut cfg = base_config();
    cfg.worker_rates = vec![];
    assert!(run(&cfg).is_err());

    let mut cfg = base_config();
    cfg.worker_rates = vec![1.0, -2.0];
    assert!(run(&cfg).is_err());

    let mut cfg = base_config();
    cfg.omega = 0.9;
    assert!(run(&cfg).is_err());

    let mut cfg = base_config();
    cfg.chunks = 0;
    assert!(run(&cfg).is_err());

    let mut cfg = base_config();
    cfg.deadline = Some(0.0);
    assert!(run(&cfg).is_err());
}

#[test]
fn zero_jobs_give_empty_records() {
    let mut cfg = base_config();
    cfg.num_jobs = 0;
    let out = run(&cfg).unwrap();
    assert!(out.records.is_empty());
    assert_eq!(out.diagnostics.utilization, 0.0);
}

#[test]
fn single_job_single_worker_matches_direct_draw() {
    // Empty system, one worker, one task: D(0) is exactly the first
    // exponential service draw from the worker's dedicated stream.
    let mut cfg = SimConfig::new(vec![2.0], 1e-9);
    cfg.tasks_needed = 1;
    cfg.task_complexity = 50.0;
    cfg.num_jobs = 1;
    cfg.rng_seed = 42;
    let out = run(&cfg).unwrap();
    assert_eq!(out.records.len(), 1);
    let record = &out.records[0];
    assert_eq!(record.service_start, record.arrival_time);

    // Reference trace: the arrival epoch from stream 0, one service draw at
    // rate mu / c = 0.04 from stream 1, and the event loop's own arithmetic
    // for the completion timestamp.
    let mut arrivals = seeded_stream(42, ARRIVAL_STREAM);
    let arrival = Exp::new(1e-9).unwrap().sample(&mut arrivals);
    let mut worker = seeded_stream(42, worker_stream(0));
    let service = Exp::new(2.0 / 50.0).unwrap().sample(&mut worker);
    assert_eq!(record.arrival_time, arrival);
    let expected = (arrival + service) - arrival;
    assert_eq!(record.layer_delays, vec![Some(expected)]);
    assert_eq!(record.status, JobStatus::Completed);
}

#[test]
fn deterministic_two_worker_schedule() {
    // mu = [1, 2], k = 2, omega = 1, c = 50: the split is one task each,
    // worker 0 needs 50 time units, worker 1 needs 25; both results are
    // required, so D(0) = 50 exactly.
    let mut cfg = SimConfig::new(vec![1.0, 2.0], 1e-9);
    cfg.tasks_needed = 2;
    cfg.task_complexity = 50.0;
    cfg.num_jobs = 1;
    cfg.service_model = ServiceModel::Deterministic;
    let out = run(&cfg).unwrap();
    assert_eq!(out.records[0].layer_delays, vec![Some(50.0)]);
}

#[test]
fn layered_deterministic_hand_trace() {
    // mu = [1, 2], k = 1, omega = 2, m = 2, c = 40 (layered task cost 10).
    // Worker 1 resolves every mini-job; each purge frees worker 0 mid-task
    // and it starts the next queued task at the purge instant.
    // Layer completions land at 5, 15, 20 after service start.
    let mut cfg = SimConfig::new(vec![1.0, 2.0], 1e-9);
    cfg.tasks_needed = 1;
    cfg.omega = 2.0;
    cfg.chunks = 2;
    cfg.task_complexity = 40.0;
    cfg.num_jobs = 1;
    cfg.service_model = ServiceModel::Deterministic;
    let out = run(&cfg).unwrap();
    assert_eq!(
        out.records[0].layer_delays,
        vec![Some(5.0), Some(15.0), Some(20.0)]
    );
    // One straggler purged per mini-job: (k omega - k) * m^2 = 4.
    assert_eq!(out.diagnostics.purged_tasks, 4);
    assert_eq!(out.diagnostics.late_results, 0);
}

#[test]
fn purge_frees_worker_for_next_job() {
    // Two jobs, m = 1, k = 1, omega = 2, deterministic services 10 and 5.
    // Job 0 resolves at +5 via worker 1 and the purge frees worker 0, so
    // job 1 starts exactly at job 0's completion instant.
    let mut cfg = SimConfig::new(vec![1.0, 2.0], 100.0);
    cfg.tasks_needed = 1;
    cfg.omega = 2.0;
    cfg.task_complexity = 10.0;
    cfg.num_jobs = 2;
    cfg.rng_seed = 7;
    cfg.service_model = ServiceModel::Deterministic;
    let out = run(&cfg).unwrap();
    let [first, second] = &out.records[..] else {
        panic!("expected two records");
    };
    assert_eq!(first.layer_delays, vec![Some(5.0)]);
    // At rate 100 the second arrival lands well before +5.
    assert!(second.arrival_time < first.arrival_time + 5.0);
    assert_eq!(second.service_start, first.service_start + 5.0);
    let expected = second.service_start + 5.0 - second.arrival_time;
    assert_eq!(second.layer_delays, vec![Some(expected)]);
}

#[test]
fn non_preemptive_purge_lets_tasks_finish_late() {
    let mut cfg = SimConfig::new(vec![1.0, 2.0], 1e-9);
    cfg.tasks_needed = 1;
    cfg.omega = 2.0;
    cfg.task_complexity = 10.0;
    cfg.num_jobs = 1;
    cfg.purge_in_service = false;
    cfg.service_model = ServiceModel::Deterministic;
    let out = run(&cfg).unwrap();
    // Worker 1 resolves at +5; worker 0 runs to +10 and its result drops.
    assert_eq!(out.records[0].layer_delays, vec![Some(5.0)]);
    assert_eq!(out.diagnostics.purged_tasks, 0);
    assert_eq!(out.diagnostics.late_results, 1);
}

#[test]
fn straggler_accounting_identity() {
    // Without a deadline every mini-job emits k*omega tasks and consumes k,
    // so purged + late must equal (k*omega - k) * m^2 * jobs.
    for purge_in_service in [true, false] {
        let mut cfg = SimConfig::new(vec![5.0, 10.0, 7.0], 0.05);
        cfg.tasks_needed = 8;
        cfg.omega = 1.5;
        cfg.chunks = 2;
        cfg.task_complexity = 8.0;
        cfg.num_jobs = 40;
        cfg.rng_seed = 99;
        cfg.purge_in_service = purge_in_service;
        let out = run(&cfg).unwrap();
        let per_mini_job = cfg.tasks_per_mini_job() - cfg.tasks_needed;
        let expected = per_mini_job * 4 * 40;
        assert_eq!(
            out.diagnostics.purged_tasks + out.diagnostics.late_results,
            expected,
            "purge_in_service = {purge_in_service}"
        );
    }
}

#[test]
fn deadline_with_empty_queue_continues() {
    // The only job exceeds the deadline but nothing waits behind it.
    let mut cfg = SimConfig::new(vec![1.0], 1e-9);
    cfg.tasks_needed = 1;
    cfg.task_complexity = 50.0;
    cfg.num_jobs = 1;
    cfg.deadline = Some(0.001);
    cfg.service_model = ServiceModel::Deterministic;
    let out = run(&cfg).unwrap();
    assert_eq!(out.records[0].status, JobStatus::Completed);
    assert_eq!(out.records[0].layer_delays, vec![Some(50.0)]);
}

#[test]
fn infinite_deadline_reproduces_no_deadline_trace() {
    let mut cfg = SimConfig::new(vec![3.0, 4.0], 0.05);
    cfg.tasks_needed = 4;
    cfg.omega = 1.5;
    cfg.chunks = 2;
    cfg.task_complexity = 6.0;
    cfg.num_jobs = 100;
    cfg.rng_seed = 5;
    let without = run(&cfg).unwrap();
    cfg.deadline = Some(1e15);
    let with = run(&cfg).unwrap();
    assert_eq!(without.records, with.records);
}

#[test]
fn deadline_terminates_mid_layer_keeping_coarse_result() {
    // Single worker walks layers deterministically at 10/20/10 work units;
    // a deadline of 15 with a queued job terminates during layer 1, and the
    // layer-0 result stays released.
    let mut cfg = SimConfig::new(vec![1.0], 100.0);
    cfg.tasks_needed = 1;
    cfg.omega = 1.0;
    cfg.chunks = 2;
    cfg.task_complexity = 40.0;
    cfg.num_jobs = 2;
    cfg.rng_seed = 11;
    cfg.deadline = Some(15.0);
    cfg.service_model = ServiceModel::Deterministic;
    let out = run(&cfg).unwrap();
    let first = &out.records[0];
    assert_eq!(
        first.status,
        JobStatus::Terminated {
            last_layer: Some(0)
        }
    );
    assert_eq!(first.layer_delays[0], Some(10.0));
    assert_eq!(first.layer_delays[1], None);
    assert_eq!(first.layer_delays[2], None);
    // Termination happens exactly at expiry and the next job starts there.
    assert_eq!(out.records[1].service_start, first.service_start + 15.0);
    assert_eq!(out.diagnostics.terminated_jobs, 1);

    // Success rates are monotone nonincreasing in the layer index.
    let rates: Vec<f64> = (0..3).map(|l| success_rate(&out.records, l)).collect();
    assert_eq!(rates, vec![1.0, 0.5, 0.5]);
}

#[test]
fn identical_seeds_reproduce_bit_identical_runs() {
    let mut cfg = SimConfig::new(vec![4.0, 9.0, 5.5], 0.08);
    cfg.tasks_needed = 6;
    cfg.omega = 1.34;
    cfg.chunks = 2;
    cfg.task_complexity = 12.0;
    cfg.num_jobs = 200;
    cfg.rng_seed = 2024;
    cfg.deadline = Some(25.0);
    let first = run(&cfg).unwrap();
    let second = run(&cfg).unwrap();
    assert_eq!(first, second);

    cfg.rng_seed = 2025;
    let third = run(&cfg).unwrap();
    assert_ne!(first.records, third.records);
}

#[test]
fn arrival_stream_is_invariant_across_layering() {
    // The arrivals draw from their own seed stream, so layered and
    // unlayered runs with the same seed see identical arrival epochs.
    let mut layered = SimConfig::new(vec![4.0, 9.0], 0.05);
    layered.tasks_needed = 5;
    layered.omega = 1.2;
    layered.chunks = 2;
    layered.task_complexity = 8.0;
    layered.num_jobs = 150;
    layered.rng_seed = 31;
    let mut unlayered = layered.clone();
    unlayered.chunks = 1;
    let a = run(&layered).unwrap();
    let b = run(&unlayered).unwrap();
    let arrivals_a: Vec<f64> = a.records.iter().map(|r| r.arrival_time).collect();
    let arrivals_b: Vec<f64> = b.records.iter().map(|r| r.arrival_time).collect();
    assert_eq!(arrivals_a, arrivals_b);
}

#[test]
fn fifo_service_order_and_layer_monotonicity() {
    let mut cfg = SimConfig::new(vec![3.0, 7.0, 4.0], 0.2);
    cfg.tasks_needed = 4;
    cfg.omega = 1.25;
    cfg.chunks = 3;
    cfg.task_complexity = 9.0;
    cfg.num_jobs = 120;
    cfg.rng_seed = 8;
    let out = run(&cfg).unwrap();
    let mut last_start = 0.0;
    for record in &out.records {
        assert!(record.service_start >= last_start);
        last_start = record.service_start;
        assert!(record.service_start >= record.arrival_time);
        let mut prev = 0.0;
        for delay in record.layer_delays.iter().flatten() {
            assert!(*delay > prev);
            prev = *delay;
        }
        assert_eq!(record.status, JobStatus::Completed);
    }
}

#[test]
fn littles_law_sanity() {
    let mut cfg = SimConfig::new(vec![5.0, 10.0], 0.1);
    cfg.tasks_needed = 10;
    cfg.omega = 1.2;
    cfg.chunks = 2;
    cfg.task_complexity = 4.0;
    cfg.num_jobs = 5000;
    cfg.rng_seed = 64;
    let out = run(&cfg).unwrap();
    assert!(!out.diagnostics.overloaded);
    let n = out.records.len() as f64;
    let total_sojourn: f64 = out.records.iter().filter_map(JobRecord::final_delay).sum();
    let horizon = out
        .records
        .iter()
        .map(|r| r.arrival_time + r.final_delay().unwrap())
        .fold(0.0, f64::max);
    let time_average_in_system = total_sojourn / horizon;
    let littles = cfg.arrival_rate * (total_sojourn / n);
    let ratio = time_average_in_system / littles;
    assert!((ratio - 1.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn serial_intra_layer_is_no_faster_than_concurrent() {
    let mut concurrent = SimConfig::new(vec![2.0, 3.0, 2.5], 0.02);
    concurrent.tasks_needed = 12;
    concurrent.omega = 1.1;
    concurrent.chunks = 2;
    concurrent.task_complexity = 10.0;
    concurrent.num_jobs = 500;
    concurrent.rng_seed = 17;
    let mut serial = concurrent.clone();
    serial.intra_layer = IntraLayer::Serial;
    let fast = run(&concurrent).unwrap();
    let slow = run(&serial).unwrap();
    let mean_fast = mean_layer_delay(&fast.records, 2).unwrap();
    let mean_slow = mean_layer_delay(&slow.records, 2).unwrap();
    assert!(
        mean_slow >= mean_fast * 0.999,
        "serial {mean_slow} vs concurrent {mean_fast}"
    );
}

#[test]
fn unlayered_reduction_has_single_layer() {
    let mut cfg = SimConfig::new(vec![2.0, 3.0], 0.05);
    cfg.tasks_needed = 3;
    cfg.omega = 1.4;
    cfg.task_complexity = 5.0;
    cfg.num_jobs = 50;
    cfg.rng_seed = 3;
    assert_eq!(cfg.layer_count(), 1);
    assert_eq!(cfg.layered_task_complexity(), 5.0);
    let out = run(&cfg).unwrap();
    for record in &out.records {
        assert_eq!(record.layer_delays.len(), 1);
    }
    assert_eq!(success_rate(&out.records, 0), 1.0);
}

#[test]
fn payload_mode_verifies_codec_end_to_end() {
    let mut cfg = SimConfig::new(vec![4.0, 7.0], 0.05);
    cfg.tasks_needed = 4;
    cfg.omega = 1.5;
    cfg.chunks = 2;
    cfg.task_complexity = 8.0;
    cfg.num_jobs = 30;
    cfg.rng_seed = 13;
    cfg.payload = Some(PayloadParams {
        a_block_count: 2,
        b_block_count: 2,
        alphabet_base: 2,
        symbols_per_chunk: 4,
        inner_dim: 3,
        a_cols: 4,
        b_cols: 4,
    });
    let out = run(&cfg).unwrap();
    // Per completed job: 4 mini-job decodes + 3 layer assemblies + 1 final.
    assert_eq!(out.diagnostics.payload_checks, 30 * 8);
    assert_eq!(out.diagnostics.payload_mismatches, 0);
}

#[test]
fn payload_mode_with_terminations_still_checks_partials() {
    let mut cfg = SimConfig::new(vec![1.0], 0.5);
    cfg.tasks_needed = 2;
    cfg.omega = 1.5;
    cfg.chunks = 2;
    cfg.task_complexity = 10.0;
    cfg.num_jobs = 25;
    cfg.rng_seed = 23;
    cfg.deadline = Some(12.0);
    cfg.payload = Some(PayloadParams {
        a_block_count: 2,
        b_block_count: 1,
        alphabet_base: 2,
        symbols_per_chunk: 3,
        inner_dim: 2,
        a_cols: 2,
        b_cols: 2,
    });
    let out = run(&cfg).unwrap();
    assert!(out.diagnostics.terminated_jobs > 0);
    assert!(out.diagnostics.payload_checks > 0);
    assert_eq!(out.diagnostics.payload_mismatches, 0);
}

#[test]
fn payload_rejects_mismatched_block_grid() {
    let mut cfg = SimConfig::new(vec![4.0], 0.05);
    cfg.tasks_needed = 5;
    cfg.num_jobs = 1;
    cfg.payload = Some(PayloadParams {
        a_block_count: 2,
        b_block_count: 2,
        alphabet_base: 2,
        symbols_per_chunk: 4,
        inner_dim: 2,
        a_cols: 2,
        b_cols: 2,
    });
    assert!(matches!(run(&cfg), Err(SimError::Payload(_))));
}

#[test]
fn run_many_matches_individual_runs() {
    let mut a = SimConfig::new(vec![5.0, 6.0], 0.05);
    a.tasks_needed = 4;
    a.omega = 1.25;
    a.chunks = 2;
    a.task_complexity = 6.0;
    a.num_jobs = 60;
    a.rng_seed = 1;
    let mut b = a.clone();
    b.rng_seed = 2;
    b.omega = 1.5;
    let batch = run_many(&[a.clone(), b.clone()]).unwrap();
    let serial = run_many_serial(&[a.clone(), b.clone()]).unwrap();
    assert_eq!(batch, serial);
    assert_eq!(batch[0], run(&a).unwrap());
    assert_eq!(batch[1], run(&b).unwrap());
}

#[test]
fn overload_flagged() {
    let mut cfg = SimConfig::new(vec![1.0], 10.0);
    cfg.tasks_needed = 2;
    cfg.task_complexity = 10.0;
    cfg.num_jobs = 20;
    cfg.rng_seed = 6;
    let out = run(&cfg).unwrap();
    assert!(out.diagnostics.overloaded);
}
