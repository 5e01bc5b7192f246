//! Experiment drivers and deterministic output writers.
//!
//! Each driver pairs the layered system with its unlayered companion under
//! the same seed (and therefore the same arrival stream), gathers per-layer
//! statistics, and renders them as CSV or JSON. Output is byte-identical
//! across runs of the same spec: rows are ordered by sweep key, floats are
//! fixed to six decimals in CSV, and every file opens with a provenance
//! header naming the version, the config hash, and the seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    layer_bounds, queueing_term, service_lower_bound, AnalysisError, ArrivalProcess, ServiceStats,
};
use crate::chunking::IntMatrix;
use crate::field::modulus_for_job;
use crate::polycode::{self, CodeParams};
use crate::scheduler::WorkerProfile;
use crate::sim::{self, JobStatus, SimConfig, SimError, SimResult};
use crate::version_string;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("sweep grid is empty")]
    EmptyGrid,
}

/// Stamp identifying exactly which run produced an output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
}

impl Provenance {
    fn new(config: &SimConfig, extra: &str) -> Self {
        let canonical = format!(
            "{}|{}",
            serde_json::to_string(config).expect("config serializes"),
            extra
        );
        Provenance {
            version: version_string(),
            seed: config.rng_seed,
            config_hash: format!("{:016x}", fnv1a_64(canonical.as_bytes())),
        }
    }

    fn csv_header(&self) -> String {
        format!(
            "# version={} config_hash={} seed={}\n",
            self.version, self.config_hash, self.seed
        )
    }
}

fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Worker moments for one whole job (all `k` tasks at the unlayered
/// complexity), the inputs to the closed-form bounds.
fn full_job_profiles(config: &SimConfig) -> Vec<WorkerProfile> {
    config
        .worker_rates
        .iter()
        .enumerate()
        .map(|(id, &rate)| {
            WorkerProfile::erlang(id, rate, config.task_complexity, config.tasks_needed)
        })
        .collect()
}

fn unlayered_companion(base: &SimConfig) -> SimConfig {
    let mut cfg = base.clone();
    cfg.chunks = 1;
    cfg.payload = None;
    cfg
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// Per-layer aggregates of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub mean_delay: Vec<Option<f64>>,
    pub delay_variance: Vec<Option<f64>>,
    pub success_rate: Vec<f64>,
    pub mean_computation_time: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub provenance: Provenance,
    pub config: SimConfig,
    pub summary: RunSummary,
    pub result: SimResult,
}

/// Runs one simulation and wraps it with summary statistics.
pub fn run_simulate(config: &SimConfig) -> Result<SimulateReport, ExperimentError> {
    let result = sim::run(config)?;
    let layers = config.layer_count();
    let summary = RunSummary {
        mean_delay: (0..layers)
            .map(|l| sim::mean_layer_delay(&result.records, l))
            .collect(),
        delay_variance: (0..layers)
            .map(|l| sim::layer_delay_variance(&result.records, l))
            .collect(),
        success_rate: (0..layers)
            .map(|l| {
                if result.records.is_empty() {
                    1.0
                } else {
                    sim::success_rate(&result.records, l)
                }
            })
            .collect(),
        mean_computation_time: (0..layers)
            .map(|l| sim::mean_computation_time(&result.records, l))
            .collect(),
    };
    Ok(SimulateReport {
        provenance: Provenance::new(config, "simulate"),
        config: config.clone(),
        summary,
        result,
    })
}

impl SimulateReport {
    /// One row per job: `job_id,arrival_time,service_start,status,last_layer,
    /// d0,..,d{L-1}` with empty cells for unresolved layers.
    pub fn to_csv(&self) -> String {
        let layers = self.config.layer_count();
        let mut out = self.provenance.csv_header();
        out.push_str("job_id,arrival_time,service_start,status,last_layer");
        for l in 0..layers {
            out.push_str(&format!(",d{l}"));
        }
        out.push('\n');
        for record in &self.result.records {
            let (status, last_layer) = match record.status {
                JobStatus::Completed => ("completed", layers as i64 - 1),
                JobStatus::Terminated { last_layer } => {
                    ("terminated", last_layer.map(|l| l as i64).unwrap_or(-1))
                }
            };
            out.push_str(&format!(
                "{},{},{},{},{}",
                record.job_id,
                fmt(record.arrival_time),
                fmt(record.service_start),
                status,
                last_layer
            ));
            for delay in &record.layer_delays {
                out.push(',');
                out.push_str(&fmt_opt(*delay));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// ---------------------------------------------------------------------------
// sweep-omega
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaPoint {
    pub omega: f64,
    /// Empirical mean `D(l)` per layer.
    pub layered_mean_delay: Vec<Option<f64>>,
    pub unlayered_mean_delay: Option<f64>,
    /// Per-layer service-time lower bounds.
    pub layer_service_bounds: Vec<f64>,
    /// Per-layer mean-delay approximations (bound + empirical queueing term).
    pub layered_delay_bound: Vec<f64>,
    pub unlayered_delay_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaSweep {
    pub provenance: Provenance,
    pub layer_count: usize,
    pub points: Vec<OmegaPoint>,
}

/// For each redundancy ratio: a layered run, its seed-paired unlayered
/// companion, and the closed-form bounds with empirically estimated
/// queueing terms. Deadlines are ignored in this sweep.
pub fn sweep_omega(base: &SimConfig, grid: &[f64]) -> Result<OmegaSweep, ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    let mut configs = Vec::with_capacity(grid.len() * 2);
    for &omega in grid {
        let mut layered = base.clone();
        layered.omega = omega;
        layered.deadline = None;
        layered.payload = None;
        configs.push(layered.clone());
        configs.push(unlayered_companion(&layered));
    }
    let results = sim::run_many(&configs)?;

    let layers = base.layer_count();
    let profiles = full_job_profiles(base);
    let arrivals = ArrivalProcess::poisson(base.arrival_rate)?;
    let harmonic = service_lower_bound(&profiles)?;

    let mut points = Vec::with_capacity(grid.len());
    for (i, &omega) in grid.iter().enumerate() {
        let layered = &results[2 * i];
        let unlayered = &results[2 * i + 1];
        let layered_stats =
            ServiceStats::from_samples(&sim::service_time_samples(&layered.records))?;
        let unlayered_stats =
            ServiceStats::from_samples(&sim::service_time_samples(&unlayered.records))?;
        let bounds = layer_bounds(&profiles, base.chunks, &arrivals, &layered_stats)?;
        let unlayered_delay_bound = harmonic + queueing_term(&unlayered_stats, &arrivals)?;
        points.push(OmegaPoint {
            omega,
            layered_mean_delay: (0..layers)
                .map(|l| sim::mean_layer_delay(&layered.records, l))
                .collect(),
            unlayered_mean_delay: sim::mean_layer_delay(&unlayered.records, 0),
            layer_service_bounds: bounds.service_bounds,
            layered_delay_bound: bounds.delay_approx,
            unlayered_delay_bound,
        });
    }
    Ok(OmegaSweep {
        provenance: Provenance::new(base, &format!("sweep-omega|{grid:?}")),
        layer_count: layers,
        points,
    })
}

impl OmegaSweep {
    pub fn to_csv(&self) -> String {
        let mut out = self.provenance.csv_header();
        out.push_str("omega");
        for l in 0..self.layer_count {
            out.push_str(&format!(",mean_d{l}"));
        }
        out.push_str(",mean_unlayered");
        for l in 0..self.layer_count {
            out.push_str(&format!(",service_bound_d{l}"));
        }
        for l in 0..self.layer_count {
            out.push_str(&format!(",delay_bound_d{l}"));
        }
        out.push_str(",delay_bound_unlayered\n");
        for point in &self.points {
            out.push_str(&fmt(point.omega));
            for mean in &point.layered_mean_delay {
                out.push(',');
                out.push_str(&fmt_opt(*mean));
            }
            out.push(',');
            out.push_str(&fmt_opt(point.unlayered_mean_delay));
            for bound in &point.layer_service_bounds {
                out.push(',');
                out.push_str(&fmt(*bound));
            }
            for bound in &point.layered_delay_bound {
                out.push(',');
                out.push_str(&fmt(*bound));
            }
            out.push(',');
            out.push_str(&fmt(point.unlayered_delay_bound));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// ---------------------------------------------------------------------------
// sweep-deadline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeadlinePoint {
    pub deadline: f64,
    /// Fraction of jobs whose layer-l result completed before termination.
    pub layer_success: Vec<f64>,
    pub unlayered_success: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeadlineSweep {
    pub provenance: Provenance,
    pub layer_count: usize,
    pub points: Vec<DeadlinePoint>,
}

/// Success rate versus deadline, layered against the seed-paired unlayered
/// companion.
pub fn sweep_deadline(base: &SimConfig, grid: &[f64]) -> Result<DeadlineSweep, ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    let mut configs = Vec::with_capacity(grid.len() * 2);
    for &deadline in grid {
        let mut layered = base.clone();
        layered.deadline = Some(deadline);
        layered.payload = None;
        configs.push(layered.clone());
        configs.push(unlayered_companion(&layered));
    }
    let results = sim::run_many(&configs)?;

    let layers = base.layer_count();
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &deadline)| {
            let layered = &results[2 * i];
            let unlayered = &results[2 * i + 1];
            DeadlinePoint {
                deadline,
                layer_success: (0..layers)
                    .map(|l| sim::success_rate(&layered.records, l))
                    .collect(),
                unlayered_success: sim::success_rate(&unlayered.records, 0),
            }
        })
        .collect();
    Ok(DeadlineSweep {
        provenance: Provenance::new(base, &format!("sweep-deadline|{grid:?}")),
        layer_count: layers,
        points,
    })
}

impl DeadlineSweep {
    pub fn to_csv(&self) -> String {
        let mut out = self.provenance.csv_header();
        out.push_str("deadline");
        for l in 0..self.layer_count {
            out.push_str(&format!(",success_d{l}"));
        }
        out.push_str(",success_unlayered\n");
        for point in &self.points {
            out.push_str(&fmt(point.deadline));
            for s in &point.layer_success {
                out.push(',');
                out.push_str(&fmt(*s));
            }
            out.push(',');
            out.push_str(&fmt(point.unlayered_success));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsTable {
    pub provenance: Provenance,
    pub layer_count: usize,
    /// Per-layer lower bounds on the collaborative service time.
    pub service_bounds: Vec<f64>,
    /// Mean-delay approximations, when a queueing term was available.
    pub delay_approx: Option<Vec<f64>>,
    pub unlayered_service_bound: f64,
    pub unlayered_delay_approx: Option<f64>,
    /// Where the service second moment came from.
    pub queueing_source: String,
}

/// The closed-form table. With `calibration_jobs > 0` the queueing term uses
/// service moments estimated from a calibration run; otherwise `cs2` supplies
/// the squared coefficient of variation analytically, and with neither the
/// table carries computational bounds only.
pub fn bounds_table(
    base: &SimConfig,
    calibration_jobs: usize,
    cs2: Option<f64>,
) -> Result<BoundsTable, ExperimentError> {
    base.validate()?;
    let profiles = full_job_profiles(base);
    let arrivals = ArrivalProcess::poisson(base.arrival_rate)?;
    let harmonic = service_lower_bound(&profiles)?;

    let (stats, queueing_source) = if calibration_jobs > 0 {
        let mut cfg = base.clone();
        cfg.num_jobs = calibration_jobs;
        cfg.deadline = None;
        cfg.payload = None;
        let result = sim::run(&cfg)?;
        let stats = ServiceStats::from_samples(&sim::service_time_samples(&result.records))?;
        (Some(stats), format!("empirical({calibration_jobs} jobs)"))
    } else if let Some(cs2) = cs2 {
        let stats = ServiceStats::new(harmonic, harmonic * harmonic * (1.0 + cs2))?;
        (Some(stats), format!("cs2={cs2}"))
    } else {
        (None, "none".to_string())
    };

    let layers = base.layer_count();
    let mut table = BoundsTable {
        provenance: Provenance::new(base, &format!("bounds|{calibration_jobs}|{cs2:?}")),
        layer_count: layers,
        service_bounds: Vec::new(),
        delay_approx: None,
        unlayered_service_bound: harmonic,
        unlayered_delay_approx: None,
        queueing_source,
    };
    match stats {
        Some(stats) => {
            let bounds = layer_bounds(&profiles, base.chunks, &arrivals, &stats)?;
            table.service_bounds = bounds.service_bounds;
            table.unlayered_delay_approx = Some(harmonic + queueing_term(&stats, &arrivals)?);
            table.delay_approx = Some(bounds.delay_approx);
        }
        None => {
            // No queueing term: reuse the bound machinery with a placeholder
            // zero-variance service so only the computational column is kept.
            let placeholder = ServiceStats::new(harmonic, harmonic * harmonic)?;
            let bounds = layer_bounds(&profiles, base.chunks, &arrivals, &placeholder)?;
            table.service_bounds = bounds.service_bounds;
        }
    }
    Ok(table)
}

impl BoundsTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.provenance.csv_header();
        out.push_str(&format!("# queueing_source={}\n", self.queueing_source));
        out.push_str("layer,service_bound,delay_approx\n");
        for l in 0..self.layer_count {
            let approx = self.delay_approx.as_ref().map(|v| v[l]);
            out.push_str(&format!(
                "{},{},{}\n",
                l,
                fmt(self.service_bounds[l]),
                fmt_opt(approx)
            ));
        }
        out.push_str(&format!(
            "unlayered,{},{}\n",
            fmt(self.unlayered_service_bound),
            fmt_opt(self.unlayered_delay_approx)
        ));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// ---------------------------------------------------------------------------
// verify-codec
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodecVerification {
    pub seed: u64,
    pub trials: usize,
    /// Total decoded k-subsets compared against the integer oracle.
    pub subset_checks: u64,
    pub failures: u64,
}

impl CodecVerification {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn to_csv(&self) -> String {
        format!(
            "seed,trials,subset_checks,failures,status\n{},{},{},{},{}\n",
            self.seed,
            self.trials,
            self.subset_checks,
            self.failures,
            if self.passed() { "pass" } else { "fail" }
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Randomized codec property suite: block grids up to 3x3, redundancy in
/// {1, 1.5, 2}, dims up to 8, entries bounded so integer products stay below
/// the modulus. Every decoded k-subset must equal the direct integer product;
/// small instances check every subset, larger ones 20 random subsets.
pub fn verify_codec(seed: u64, trials: usize) -> CodecVerification {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut subset_checks = 0u64;
    let mut failures = 0u64;

    for _ in 0..trials {
        let n1 = rng.random_range(1..=3usize);
        let n2 = rng.random_range(1..=3usize);
        let omega = [1.0, 1.5, 2.0][rng.random_range(0..3usize)];
        let rows = rng.random_range(1..=8usize);
        let a_cols = rng.random_range(1..=8usize);
        let b_cols = rng.random_range(1..=8usize);
        let max_entry = 30u64;

        let k = n1 * n2;
        let num_tasks = polycode::coded_task_count(k as u64, omega);
        let modulus = modulus_for_job(rows as u64, max_entry, num_tasks).expect("small bound");
        let params = CodeParams::new(n1, n2, omega, modulus).expect("valid params");

        let a_entries: Vec<u64> = (0..rows * a_cols)
            .map(|_| rng.random_range(0..=max_entry))
            .collect();
        let b_entries: Vec<u64> = (0..rows * b_cols)
            .map(|_| rng.random_range(0..=max_entry))
            .collect();

        // Direct integer oracle, independent of the field kernels.
        let a_int = IntMatrix::new(rows, a_cols, a_entries).expect("dims");
        let b_int = IntMatrix::new(rows, b_cols, b_entries).expect("dims");
        let oracle = a_int.mul_transpose(&b_int).expect("dims");

        let a = a_int.to_field(modulus).expect("entries below modulus");
        let b = b_int.to_field(modulus).expect("entries below modulus");
        let tasks = polycode::encode(&a, &b, &params, 1.0).expect("encode");
        let results = polycode::execute_tasks(&tasks).expect("execute");

        let n = params.num_tasks();
        let subsets: Vec<Vec<usize>> = if binomial(n, k) <= 64 {
            all_subsets(n, k)
        } else {
            (0..20).map(|_| random_subset(&mut rng, n, k)).collect()
        };
        for subset in subsets {
            let chosen: Vec<_> = subset.iter().map(|&i| results[i].clone()).collect();
            subset_checks += 1;
            let decoded = match polycode::decode(&chosen, &params) {
                Ok(grid) => grid.trim(a_cols, b_cols),
                Err(_) => {
                    failures += 1;
                    continue;
                }
            };
            let ok =
                (0..a_cols).all(|i| (0..b_cols).all(|j| decoded.get(i, j) == oracle.get(i, j)));
            if !ok {
                failures += 1;
            }
        }
    }

    CodecVerification {
        seed,
        trials,
        subset_checks,
        failures,
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > 1 << 40 {
            return acc;
        }
    }
    acc
}

fn all_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, pick: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pick.len() == k {
            out.push(pick.clone());
            return;
        }
        for i in start..n {
            pick.push(i);
            rec(i + 1, n, k, pick, out);
            pick.pop();
        }
    }
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(k);
    rec(0, n, k, &mut pick, &mut out);
    out
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        indices.swap(i, j);
    }
    indices.truncate(k);
    indices
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SimConfig {
        let mut cfg = SimConfig::new(vec![5.0, 9.0], 0.05);
        cfg.tasks_needed = 4;
        cfg.omega = 1.25;
        cfg.chunks = 2;
        cfg.task_complexity = 6.0;
        cfg.num_jobs = 120;
        cfg.rng_seed = 77;
        cfg
    }

    #[test]
    fn simulate_csv_shape() {
        let report = run_simulate(&small_config()).unwrap();
        let csv = report.to_csv();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("# version=layercode-v"));
        assert_eq!(
            lines.next().unwrap(),
            "job_id,arrival_time,service_start,status,last_layer,d0,d1,d2"
        );
        assert_eq!(lines.count(), 120);
    }

    #[test]
    fn simulate_empty_run_keeps_header() {
        let mut cfg = small_config();
        cfg.num_jobs = 0;
        let report = run_simulate(&cfg).unwrap();
        let csv = report.to_csv();
        assert_eq!(csv.lines().count(), 2); // provenance + column header
    }

    #[test]
    fn outputs_are_byte_identical_across_runs() {
        let cfg = small_config();
        let a = run_simulate(&cfg).unwrap();
        let b = run_simulate(&cfg).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.to_json(), b.to_json());

        let grid = [1.0, 1.1];
        assert_eq!(
            sweep_omega(&cfg, &grid).unwrap().to_csv(),
            sweep_omega(&cfg, &grid).unwrap().to_csv()
        );
        let deadlines = [5.0, 20.0];
        assert_eq!(
            sweep_deadline(&cfg, &deadlines).unwrap().to_csv(),
            sweep_deadline(&cfg, &deadlines).unwrap().to_csv()
        );
    }

    #[test]
    fn different_specs_hash_differently() {
        let cfg = small_config();
        let mut other = cfg.clone();
        other.omega = 1.5;
        let a = run_simulate(&cfg).unwrap();
        let b = run_simulate(&other).unwrap();
        assert_ne!(a.provenance.config_hash, b.provenance.config_hash);
        // Same config, different sweep grids: still distinct.
        let s1 = sweep_omega(&cfg, &[1.0]).unwrap();
        let s2 = sweep_omega(&cfg, &[1.0, 1.1]).unwrap();
        assert_ne!(s1.provenance.config_hash, s2.provenance.config_hash);
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg = small_config();
        assert!(matches!(
            sweep_omega(&cfg, &[]),
            Err(ExperimentError::EmptyGrid)
        ));
        assert!(matches!(
            sweep_deadline(&cfg, &[]),
            Err(ExperimentError::EmptyGrid)
        ));
    }

    #[test]
    fn bounds_table_reference_values() {
        let mut cfg = SimConfig::new(vec![385.95, 650.92, 373.40, 415.75, 373.98], 0.01);
        cfg.tasks_needed = 1000;
        cfg.task_complexity = 50.0;
        cfg.chunks = 2;
        let table = bounds_table(&cfg, 0, None).unwrap();
        let base = 50_000.0 / 2200.0;
        assert!((table.service_bounds[0] - base / 4.0).abs() < 1e-9);
        assert!((table.service_bounds[1] - 3.0 * base / 4.0).abs() < 1e-9);
        assert!((table.service_bounds[2] - base).abs() < 1e-9);
        assert!((table.unlayered_service_bound - base).abs() < 1e-9);
        assert!(table.delay_approx.is_none());
        let csv = table.to_csv();
        assert!(csv.contains("5.681818"));
        assert!(csv.contains("17.045455"));
        assert!(csv.contains("22.727273"));
    }

    #[test]
    fn bounds_table_with_analytic_cs2() {
        let mut cfg = SimConfig::new(vec![10.0, 10.0], 0.01);
        cfg.tasks_needed = 5;
        cfg.task_complexity = 4.0;
        cfg.chunks = 2;
        let table = bounds_table(&cfg, 0, Some(1.0)).unwrap();
        let approx = table.delay_approx.unwrap();
        // Queueing term constant across layers.
        let q0 = approx[0] - table.service_bounds[0];
        for l in 1..3 {
            assert!((approx[l] - table.service_bounds[l] - q0).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_deadline_success_columns_monotone_in_layer() {
        let mut cfg = small_config();
        cfg.arrival_rate = 0.3;
        let sweep = sweep_deadline(&cfg, &[2.0, 6.0, 18.0]).unwrap();
        for point in &sweep.points {
            for pair in point.layer_success.windows(2) {
                assert!(pair[0] >= pair[1]);
            }
        }
    }

    #[test]
    fn codec_verification_passes_and_is_deterministic() {
        let a = verify_codec(404, 25);
        assert!(a.passed());
        assert!(a.subset_checks >= 25);
        let b = verify_codec(404, 25);
        assert_eq!(a, b);
    }
}
