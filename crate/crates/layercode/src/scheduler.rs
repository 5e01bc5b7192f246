//! Delay-optimal nonuniform load split across heterogeneous workers.
//!
//! Each worker advertises the first two moments of its per-job response time.
//! The closed form
//! `kappa_p = b_p / (2 gamma m_p^2) * (-1 + sqrt(1 + 4 gamma m_p^2 theta / b_p^2))`
//! with `b_p = m_p + gamma sigma_p^2` gives the real-valued task share, and
//! `theta` is solved so the shares sum to the total task count. Integer
//! allocations come from largest-fractional-part rounding, which keeps the
//! sum exact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("worker {0} must have a positive mean response time")]
    NonPositiveMean(usize),
    #[error("worker {0} has second moment below its squared mean")]
    NegativeVariance(usize),
    #[error("gamma must be positive, got {0}")]
    NonPositiveGamma(f64),
    #[error("theta must be positive, got {0}")]
    NonPositiveTheta(f64),
    #[error("no workers to split across")]
    NoWorkers,
    #[error("total task count must be positive")]
    NoTasks,
}

/// First and second response-time moments of one worker, for one whole job
/// at a given task complexity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkerProfile {
    pub worker_id: usize,
    pub mean: f64,
    pub second_moment: f64,
}

impl WorkerProfile {
    pub fn new(worker_id: usize, mean: f64, second_moment: f64) -> Result<Self, ScheduleError> {
        if !mean.is_finite() || mean <= 0.0 {
            return Err(ScheduleError::NonPositiveMean(worker_id));
        }
        if second_moment < mean * mean {
            return Err(ScheduleError::NegativeVariance(worker_id));
        }
        Ok(WorkerProfile {
            worker_id,
            mean,
            second_moment,
        })
    }

    /// Moments of a job of `k` independent exponential tasks, each with mean
    /// `task_complexity / rate` (an Erlang-k job time).
    pub fn erlang(worker_id: usize, rate: f64, task_complexity: f64, k: u64) -> Self {
        let per_task = task_complexity / rate;
        let mean = k as f64 * per_task;
        let variance = k as f64 * per_task * per_task;
        WorkerProfile {
            worker_id,
            mean,
            second_moment: variance + mean * mean,
        }
    }

    /// Moments of a job of `k` fixed-duration tasks (zero variance).
    pub fn deterministic(worker_id: usize, rate: f64, task_complexity: f64, k: u64) -> Self {
        let mean = k as f64 * task_complexity / rate;
        WorkerProfile {
            worker_id,
            mean,
            second_moment: mean * mean,
        }
    }

    #[inline]
    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean * self.mean).max(0.0)
    }

    /// The moment mix `b_p = m_p + gamma sigma_p^2`.
    #[inline]
    pub fn moment_mix(&self, gamma: f64) -> f64 {
        self.mean + gamma * self.variance()
    }
}

/// Split configuration: the moment-tradeoff weight and the task budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub gamma: f64,
    pub total_tasks: u64,
}

impl SchedulerConfig {
    pub fn new(gamma: f64, total_tasks: u64) -> Result<Self, ScheduleError> {
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(ScheduleError::NonPositiveGamma(gamma));
        }
        if total_tasks == 0 {
            return Err(ScheduleError::NoTasks);
        }
        Ok(SchedulerConfig { gamma, total_tasks })
    }
}

/// A solved allocation: the real-valued optimum, its integerization, and the
/// normalizing theta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSplit {
    pub real_kappa: Vec<f64>,
    pub int_kappa: Vec<u64>,
    pub theta: f64,
}

/// The closed-form task share of one worker at a given theta.
///
/// Strictly increasing in theta and tending to zero as theta does.
pub fn kappa_of_theta(
    profile: &WorkerProfile,
    theta: f64,
    gamma: f64,
) -> Result<f64, ScheduleError> {
    if !theta.is_finite() || theta <= 0.0 {
        return Err(ScheduleError::NonPositiveTheta(theta));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(ScheduleError::NonPositiveGamma(gamma));
    }
    let m = profile.mean;
    let b = profile.moment_mix(gamma);
    let lead = b / (2.0 * gamma * m * m);
    Ok(lead * ((1.0 + 4.0 * gamma * m * m * theta / (b * b)).sqrt() - 1.0))
}

const SUM_TOLERANCE: f64 = 1e-6;
const MAX_BISECTION_STEPS: usize = 200;

/// Solves theta so the real shares sum to the task budget, then rounds to
/// integers that sum exactly.
///
/// Bisection runs on the strictly increasing map theta -> sum kappa_p(theta);
/// rounding floors every share and hands the remaining tasks to the largest
/// fractional parts (ties to the lower worker id).
pub fn solve_split(
    profiles: &[WorkerProfile],
    config: &SchedulerConfig,
) -> Result<LoadSplit, ScheduleError> {
    if profiles.is_empty() {
        return Err(ScheduleError::NoWorkers);
    }
    if config.total_tasks == 0 {
        return Err(ScheduleError::NoTasks);
    }
    let gamma = config.gamma;
    let target = config.total_tasks as f64;
    let total_at = |theta: f64| -> Result<f64, ScheduleError> {
        profiles
            .iter()
            .map(|p| kappa_of_theta(p, theta, gamma))
            .sum()
    };

    let mut lo = 1e-12;
    let mut hi = 1.0;
    while total_at(hi)? < target {
        hi *= 2.0;
    }
    let mut theta = hi;
    for _ in 0..MAX_BISECTION_STEPS {
        theta = 0.5 * (lo + hi);
        let total = total_at(theta)?;
        if (total - target).abs() < SUM_TOLERANCE {
            break;
        }
        if total < target {
            lo = theta;
        } else {
            hi = theta;
        }
    }

    let real_kappa: Vec<f64> = profiles
        .iter()
        .map(|p| kappa_of_theta(p, theta, gamma))
        .collect::<Result<_, _>>()?;
    let int_kappa = round_to_sum(&real_kappa, config.total_tasks);
    Ok(LoadSplit {
        real_kappa,
        int_kappa,
        theta,
    })
}

/// Largest-fractional-part rounding to a fixed sum (Hamilton apportionment).
fn round_to_sum(reals: &[f64], total: u64) -> Vec<u64> {
    let mut ints: Vec<u64> = reals.iter().map(|&r| r.floor().max(0.0) as u64).collect();
    let assigned: u64 = ints.iter().sum();
    let mut remaining = total.saturating_sub(assigned);
    let mut by_fraction: Vec<usize> = (0..reals.len()).collect();
    by_fraction.sort_by(|&a, &b| {
        let fa = reals[a] - reals[a].floor();
        let fb = reals[b] - reals[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut cursor = 0;
    while remaining > 0 {
        let idx = by_fraction[cursor % by_fraction.len()];
        ints[idx] += 1;
        cursor += 1;
        remaining -= 1;
    }
    ints
}
