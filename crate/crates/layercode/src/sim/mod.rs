//! Deterministic discrete-event simulation of the master/worker/fusion
//! pipeline.
//!
//! Jobs arrive in a Poisson stream into the master's FIFO queue; the job in
//! service walks its resolution layers in order, each layer dispatching the
//! coded tasks of its mini-jobs across the workers according to the solved
//! load split. Workers serve their queues one task at a time with
//! exponential service; the fusion node resolves a mini-job at `k` results
//! and the master purges the mini-job's outstanding tasks. An optional
//! deadline terminates a busy-queue job mid-flight, keeping whatever
//! resolutions already completed.
//!
//! Every stochastic source draws from its own counter-mode stream of the
//! run's seed (arrivals, one per worker, payload operands), so a run is a
//! pure function of its `SimConfig` and paired experiments share arrival
//! streams exactly.

mod engine;
mod payload;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunking::ChunkParams;
use crate::polycode::coded_task_count;

pub use payload::PayloadParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("scheduling failed: {0}")]
    Schedule(#[from] crate::scheduler::ScheduleError),
    #[error("payload setup failed: {0}")]
    Payload(String),
}

/// How the mini-jobs of one layer are put in flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntraLayer {
    /// All mini-jobs of the layer enqueue together (in mini-job order).
    Concurrent,
    /// The next mini-job enqueues only when the previous one resolves.
    Serial,
}

/// Per-task service-time law at the workers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceModel {
    /// Exponential with mean `task_complexity / rate` (the modeled system).
    Exponential,
    /// Exactly `task_complexity / rate`, for hand-traceable schedules.
    Deterministic,
}

/// Full description of one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Operation rates `mu_p`, one per worker (work units per time).
    pub worker_rates: Vec<f64>,
    /// Poisson job arrival rate `lambda`.
    pub arrival_rate: f64,
    /// Task results needed to resolve one mini-job (`k`).
    pub tasks_needed: u64,
    /// Redundancy ratio `omega >= 1`.
    pub omega: f64,
    /// Chunks per element (`m`); 1 disables layering.
    pub chunks: usize,
    /// Work units per task with no layering (`c`); layered tasks cost `c/m^2`.
    pub task_complexity: f64,
    /// Optional computation-time budget per job, measured from service start.
    pub deadline: Option<f64>,
    /// Number of job arrivals to simulate.
    pub num_jobs: usize,
    /// Seed for every stochastic stream of the run.
    pub rng_seed: u64,
    /// Moment-tradeoff weight for the load split.
    pub gamma: f64,
    pub intra_layer: IntraLayer,
    /// Abort in-service tasks of a resolved mini-job (preemptive purge).
    pub purge_in_service: bool,
    pub service_model: ServiceModel,
    /// Run the real codec on small operand matrices alongside the simulation.
    pub payload: Option<PayloadParams>,
}

impl SimConfig {
    /// A baseline config over the given worker rates; callers override the
    /// fields they sweep.
    pub fn new(worker_rates: Vec<f64>, arrival_rate: f64) -> Self {
        SimConfig {
            worker_rates,
            arrival_rate,
            tasks_needed: 1,
            omega: 1.0,
            chunks: 1,
            task_complexity: 1.0,
            deadline: None,
            num_jobs: 0,
            rng_seed: 0,
            gamma: 1.0,
            intra_layer: IntraLayer::Concurrent,
            purge_in_service: true,
            service_model: ServiceModel::Exponential,
            payload: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.worker_rates.is_empty() {
            return Err(SimError::InvalidConfig("no workers".into()));
        }
        if self.worker_rates.iter().any(|&r| !r.is_finite() || r <= 0.0) {
            return Err(SimError::InvalidConfig(
                "worker rates must be positive".into(),
            ));
        }
        if !self.arrival_rate.is_finite() || self.arrival_rate <= 0.0 {
            return Err(SimError::InvalidConfig(
                "arrival rate must be positive".into(),
            ));
        }
        if self.tasks_needed == 0 {
            return Err(SimError::InvalidConfig(
                "tasks_needed must be positive".into(),
            ));
        }
        if !self.omega.is_finite() || self.omega < 1.0 {
            return Err(SimError::InvalidConfig(format!(
                "omega {} must be at least 1",
                self.omega
            )));
        }
        if self.chunks == 0 {
            return Err(SimError::InvalidConfig("chunks must be positive".into()));
        }
        if !self.task_complexity.is_finite() || self.task_complexity <= 0.0 {
            return Err(SimError::InvalidConfig(
                "task complexity must be positive".into(),
            ));
        }
        if let Some(d) = self.deadline {
            if !d.is_finite() || d <= 0.0 {
                return Err(SimError::InvalidConfig("deadline must be positive".into()));
            }
        }
        if !self.gamma.is_finite() || self.gamma <= 0.0 {
            return Err(SimError::InvalidConfig("gamma must be positive".into()));
        }
        if let Some(p) = &self.payload {
            p.validate(self).map_err(SimError::Payload)?;
        }
        Ok(())
    }

    /// Number of resolution layers, `2m - 1`.
    pub fn layer_count(&self) -> usize {
        2 * self.chunks - 1
    }

    /// Work units per task once layering splits elements into `m` chunks.
    pub fn layered_task_complexity(&self) -> f64 {
        self.task_complexity / (self.chunks * self.chunks) as f64
    }

    /// Coded tasks emitted per mini-job, `round(k * omega)`.
    pub fn tasks_per_mini_job(&self) -> u64 {
        coded_task_count(self.tasks_needed, self.omega)
    }

    /// Chunk parameters implied by the payload settings, if any.
    pub fn chunk_params(&self) -> Option<ChunkParams> {
        self.payload
            .as_ref()
            .and_then(|p| ChunkParams::new(p.alphabet_base, p.symbols_per_chunk, self.chunks).ok())
    }
}

/// What happened to one job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JobStatus {
    /// All layers resolved.
    Completed,
    /// Deadline hit with a nonempty queue; `last_layer` is the highest fully
    /// resolved resolution, if any.
    Terminated { last_layer: Option<usize> },
}

/// Per-job timestamps and the delay profile `D(l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRecord {
    pub job_id: usize,
    pub arrival_time: f64,
    pub service_start: f64,
    /// `D(l)`: completion of layer `l` relative to arrival; `None` if the
    /// layer never resolved.
    pub layer_delays: Vec<Option<f64>>,
    pub status: JobStatus,
}

impl JobRecord {
    /// Delay of the final resolution, when the job completed.
    pub fn final_delay(&self) -> Option<f64> {
        self.layer_delays.last().copied().flatten()
    }

    /// Time spent computing layer `layer`: its completion relative to service
    /// start, excluding the wait in the master queue.
    pub fn computation_time(&self, layer: usize) -> Option<f64> {
        self.layer_delays[layer].map(|d| self.arrival_time + d - self.service_start)
    }
}

/// Counters kept alongside the records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Task results that arrived for an already-resolved mini-job or a
    /// finished job, dropped silently.
    pub late_results: u64,
    /// Tasks removed (queued or in service) by purging.
    pub purged_tasks: u64,
    pub terminated_jobs: u64,
    /// Mini-job decode verifications run in payload mode.
    pub payload_checks: u64,
    pub payload_mismatches: u64,
    /// Fraction of the horizon the master had a job in service.
    pub utilization: f64,
    /// Aggregate work arrives faster than the cluster's total rate; the
    /// backlog grows without bound.
    pub overloaded: bool,
}

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub records: Vec<JobRecord>,
    pub diagnostics: Diagnostics,
}

/// Runs one simulation to completion.
pub fn run(config: &SimConfig) -> Result<SimResult, SimError> {
    config.validate()?;
    engine::Engine::new(config)?.run()
}

/// Runs a batch of independent replications, in parallel when the `parallel`
/// feature is enabled. Results keep the input order.
pub fn run_many(configs: &[SimConfig]) -> Result<Vec<SimResult>, SimError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        return configs.par_iter().map(run).collect();
    }
    #[cfg(not(feature = "parallel"))]
    configs.iter().map(run).collect()
}

/// Single-threaded batch runner, independent of the `parallel` feature.
pub fn run_many_serial(configs: &[SimConfig]) -> Result<Vec<SimResult>, SimError> {
    configs.iter().map(run).collect()
}

/// Fraction of jobs whose layer-`layer` resolution completed.
pub fn success_rate(records: &[JobRecord], layer: usize) -> f64 {
    assert!(!records.is_empty(), "success rate over no records");
    let hits = records
        .iter()
        .filter(|r| r.layer_delays.get(layer).copied().flatten().is_some())
        .count();
    hits as f64 / records.len() as f64
}

/// Mean of the layer-`layer` delays over jobs that completed that layer.
pub fn mean_layer_delay(records: &[JobRecord], layer: usize) -> Option<f64> {
    let delays: Vec<f64> = records
        .iter()
        .filter_map(|r| r.layer_delays.get(layer).copied().flatten())
        .collect();
    if delays.is_empty() {
        None
    } else {
        Some(delays.iter().sum::<f64>() / delays.len() as f64)
    }
}

/// Mean per-layer computation time (service start to layer completion).
pub fn mean_computation_time(records: &[JobRecord], layer: usize) -> Option<f64> {
    let times: Vec<f64> = records
        .iter()
        .filter_map(|r| r.computation_time(layer))
        .collect();
    if times.is_empty() {
        None
    } else {
        Some(times.iter().sum::<f64>() / times.len() as f64)
    }
}

/// Population variance of the layer-`layer` delays over completing jobs.
pub fn layer_delay_variance(records: &[JobRecord], layer: usize) -> Option<f64> {
    let delays: Vec<f64> = records
        .iter()
        .filter_map(|r| r.layer_delays.get(layer).copied().flatten())
        .collect();
    if delays.is_empty() {
        return None;
    }
    let mean = delays.iter().sum::<f64>() / delays.len() as f64;
    Some(delays.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / delays.len() as f64)
}

/// Empirical per-job service times (service start to final resolution) of
/// completed jobs, the input for fitting [`crate::analysis::ServiceStats`].
pub fn service_time_samples(records: &[JobRecord]) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.status == JobStatus::Completed)
        .filter_map(|r| {
            r.final_delay()
                .map(|d| r.arrival_time + d - r.service_start)
        })
        .collect()
}

#[cfg(test)]
mod tests;
