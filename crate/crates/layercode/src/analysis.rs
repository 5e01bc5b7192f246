//! Closed-form queueing analysis of the pipeline.
//!
//! Treats the whole cluster as a single G/G/1 server: a harmonic-mean lower
//! bound on the collaborative service time, the two-moment mean-delay
//! approximation `E[D] = E[T_s] + E[T_s] * rho/(1-rho) * (c_a^2 + c_s^2)/2`,
//! and per-layer variants where the computational term shrinks with the
//! fraction of mini-jobs a layer needs while the queueing term stays put.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chunking::mini_job_count;
use crate::scheduler::WorkerProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("no worker profiles")]
    NoWorkers,
    #[error("moments must be positive with second moment >= mean^2")]
    BadMoments,
    #[error("unstable queue: utilization {0} is not below 1")]
    UnstableQueue(f64),
    #[error("need at least one chunk")]
    NoChunks,
    #[error("no samples to estimate moments from")]
    NoSamples,
}

/// Inter-arrival moments of the job stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalProcess {
    pub mean_interarrival: f64,
    pub second_moment: f64,
}

impl ArrivalProcess {
    pub fn new(mean_interarrival: f64, second_moment: f64) -> Result<Self, AnalysisError> {
        if !mean_interarrival.is_finite()
            || mean_interarrival <= 0.0
            || second_moment < mean_interarrival * mean_interarrival
        {
            return Err(AnalysisError::BadMoments);
        }
        Ok(ArrivalProcess {
            mean_interarrival,
            second_moment,
        })
    }

    /// Poisson arrivals at `rate`: exponential gaps with mean 1/rate and
    /// squared coefficient of variation 1.
    pub fn poisson(rate: f64) -> Result<Self, AnalysisError> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(AnalysisError::BadMoments);
        }
        let mean = 1.0 / rate;
        Ok(ArrivalProcess {
            mean_interarrival: mean,
            second_moment: 2.0 * mean * mean,
        })
    }

    /// Squared coefficient of variation of the inter-arrival time.
    pub fn ca2(&self) -> f64 {
        let m = self.mean_interarrival;
        ((self.second_moment - m * m) / (m * m)).max(0.0)
    }
}

/// First two moments of the whole-job service time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServiceStats {
    pub mean_service: f64,
    pub second_moment: f64,
}

impl ServiceStats {
    pub fn new(mean_service: f64, second_moment: f64) -> Result<Self, AnalysisError> {
        if !mean_service.is_finite()
            || mean_service <= 0.0
            || second_moment < mean_service * mean_service
        {
            return Err(AnalysisError::BadMoments);
        }
        Ok(ServiceStats {
            mean_service,
            second_moment,
        })
    }

    /// Empirical moments of observed per-job service times.
    pub fn from_samples(samples: &[f64]) -> Result<Self, AnalysisError> {
        if samples.is_empty() {
            return Err(AnalysisError::NoSamples);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let second = samples.iter().map(|s| s * s).sum::<f64>() / n;
        ServiceStats::new(mean, second.max(mean * mean))
    }

    /// Squared coefficient of variation of the service time.
    pub fn cs2(&self) -> f64 {
        let m = self.mean_service;
        ((self.second_moment - m * m) / (m * m)).max(0.0)
    }

    /// Utilization against an arrival process.
    pub fn rho(&self, arrivals: &ArrivalProcess) -> f64 {
        self.mean_service / arrivals.mean_interarrival
    }
}

/// Per-layer service-time lower bounds and mean-delay approximations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerBounds {
    /// Lower bound on E[T_s^l] for each layer l.
    pub service_bounds: Vec<f64>,
    /// E[D(l)] approximation: the layer bound plus the full-job queueing term.
    pub delay_approx: Vec<f64>,
}

/// Lower bound on the collaborative service time of one job: one fictitious
/// worker whose rate is the sum of all workers' rates.
pub fn service_lower_bound(profiles: &[WorkerProfile]) -> Result<f64, AnalysisError> {
    if profiles.is_empty() {
        return Err(AnalysisError::NoWorkers);
    }
    let rate_sum: f64 = profiles.iter().map(|p| 1.0 / p.mean).sum();
    Ok(1.0 / rate_sum)
}

/// Mean queueing delay term of the two-moment approximation:
/// `E[T_s] * rho/(1-rho) * (c_a^2 + c_s^2)/2`.
pub fn queueing_term(
    service: &ServiceStats,
    arrivals: &ArrivalProcess,
) -> Result<f64, AnalysisError> {
    let rho = service.rho(arrivals);
    if rho >= 1.0 {
        return Err(AnalysisError::UnstableQueue(rho));
    }
    Ok(service.mean_service * (rho / (1.0 - rho)) * (arrivals.ca2() + service.cs2()) / 2.0)
}

/// Two-moment mean execution delay (arrival to delivery) of the unlayered
/// system: computational term plus queueing term.
pub fn kingman_delay(
    service: &ServiceStats,
    arrivals: &ArrivalProcess,
) -> Result<f64, AnalysisError> {
    Ok(service.mean_service + queueing_term(service, arrivals)?)
}

/// Per-layer bounds: the computational term scales with the cumulative
/// mini-job fraction `sum_{i<=l} J(i) / m^2`; the queueing term comes from the
/// full-job service stats and is identical across layers.
pub fn layer_bounds(
    profiles: &[WorkerProfile],
    m: usize,
    arrivals: &ArrivalProcess,
    full_service: &ServiceStats,
) -> Result<LayerBounds, AnalysisError> {
    if m == 0 {
        return Err(AnalysisError::NoChunks);
    }
    let base = service_lower_bound(profiles)?;
    let queueing = queueing_term(full_service, arrivals)?;
    let total_jobs = (m * m) as f64;
    let mut service_bounds = Vec::with_capacity(2 * m - 1);
    let mut delay_approx = Vec::with_capacity(2 * m - 1);
    let mut cumulative = 0usize;
    for layer in 0..2 * m - 1 {
        cumulative += mini_job_count(layer, m);
        let bound = (cumulative as f64 / total_jobs) * base;
        service_bounds.push(bound);
        delay_approx.push(bound + queueing);
    }
    Ok(LayerBounds {
        service_bounds,
        delay_approx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp};

    fn profile(mean: f64) -> WorkerProfile {
        WorkerProfile::new(0, mean, mean * mean).unwrap()
    }

    #[test]
    fn lower_bound_single_worker() {
        assert_eq!(service_lower_bound(&[profile(5.0)]).unwrap(), 5.0);
    }

    #[test]
    fn lower_bound_two_identical_workers() {
        let p = [profile(10.0), profile(10.0)];
        assert!((service_lower_bound(&p).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn lower_bound_five_worker_reference() {
        // E[T_p] = k c / mu_p with k = 1000, c = 50: bound = 50000 / sum(mu).
        let mus = [385.95, 650.92, 373.40, 415.75, 373.98];
        let mu_sum: f64 = mus.iter().sum();
        assert!((mu_sum - 2200.0).abs() < 1e-9);
        let profiles: Vec<WorkerProfile> =
            mus.iter().map(|&mu| profile(50_000.0 / mu)).collect();
        let bound = service_lower_bound(&profiles).unwrap();
        assert!((bound - 50_000.0 / 2200.0).abs() < 1e-9);
        assert!((bound - 22.727272727).abs() < 1e-6);
    }

    #[test]
    fn kingman_deterministic_system() {
        // Zero variation in both processes leaves only the service mean.
        let service = ServiceStats::new(4.0, 16.0).unwrap();
        let arrivals = ArrivalProcess::new(10.0, 100.0).unwrap();
        assert_eq!(kingman_delay(&service, &arrivals).unwrap(), 4.0);
    }

    #[test]
    fn kingman_light_traffic_limit() {
        let service = ServiceStats::new(1.0, 2.0).unwrap();
        let mut last = f64::MAX;
        for exponent in 1..8 {
            let arrivals = ArrivalProcess::poisson(10f64.powi(-exponent)).unwrap();
            let delay = kingman_delay(&service, &arrivals).unwrap();
            assert!(delay < last);
            last = delay;
        }
        assert!((last - 1.0).abs() < 1e-4);
    }

    #[test]
    fn kingman_reference_point() {
        // E[T_s] = 22.727, lambda = 0.01, ca2 = 1, cs2 = 0.2.
        let mean = 22.727;
        let service = ServiceStats::new(mean, mean * mean * 1.2).unwrap();
        let arrivals = ArrivalProcess::poisson(0.01).unwrap();
        let delay = kingman_delay(&service, &arrivals).unwrap();
        let rho: f64 = 22.727 / 100.0;
        let expected = mean * (1.0 + rho / (1.0 - rho) * 0.6);
        assert!((delay - expected).abs() < 1e-9);
        assert!((delay - 26.74).abs() < 0.01);
    }

    #[test]
    fn kingman_rejects_unstable_queue() {
        let service = ServiceStats::new(10.0, 200.0).unwrap();
        let arrivals = ArrivalProcess::poisson(0.2).unwrap();
        assert_eq!(
            kingman_delay(&service, &arrivals),
            Err(AnalysisError::UnstableQueue(2.0))
        );
    }

    /// Lindley-recursion M/G/1 sanity check: the approximation should land
    /// within a few percent of a brute-force waiting-time simulation.
    #[test]
    fn kingman_matches_lindley_simulation() {
        let lambda = 0.02;
        let service_mean = 20.0;
        let shape = 5usize; // Erlang-5 service, cs2 = 1/5
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let gap = Exp::new(lambda).unwrap();
        let stage = Exp::new(shape as f64 / service_mean).unwrap();
        let mut wait = 0.0f64;
        let mut total_delay = 0.0f64;
        let n = 200_000;
        for _ in 0..n {
            let service: f64 = (0..shape).map(|_| stage.sample(&mut rng)).sum();
            total_delay += wait + service;
            let arrival_gap = gap.sample(&mut rng);
            wait = (wait + service - arrival_gap).max(0.0);
        }
        let simulated = total_delay / n as f64;

        let service = ServiceStats::new(
            service_mean,
            service_mean * service_mean * (1.0 + 1.0 / shape as f64),
        )
        .unwrap();
        let arrivals = ArrivalProcess::poisson(lambda).unwrap();
        let approx = kingman_delay(&service, &arrivals).unwrap();
        // Kingman is exact for M/G/1 in expectation (it reduces to
        // Pollaczek-Khinchine), so only sampling noise separates the two.
        assert!(
            (approx - simulated).abs() / simulated < 0.03,
            "approx {approx} vs simulated {simulated}"
        );
    }

    #[test]
    fn layer_bounds_m1_reduces_to_unlayered() {
        let profiles = [profile(8.0)];
        let arrivals = ArrivalProcess::poisson(0.01).unwrap();
        let service = ServiceStats::new(8.0, 80.0).unwrap();
        let bounds = layer_bounds(&profiles, 1, &arrivals, &service).unwrap();
        assert_eq!(bounds.service_bounds.len(), 1);
        assert!((bounds.service_bounds[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn layer_bounds_m2_fractions() {
        // Cumulative mini-job fractions for m = 2 are 1/4, 3/4, 1.
        let mus = [385.95, 650.92, 373.40, 415.75, 373.98];
        let profiles: Vec<WorkerProfile> =
            mus.iter().map(|&mu| profile(50_000.0 / mu)).collect();
        let arrivals = ArrivalProcess::poisson(0.01).unwrap();
        let full = ServiceStats::new(22.7272, 22.7272f64.powi(2) * 1.2).unwrap();
        let bounds = layer_bounds(&profiles, 2, &arrivals, &full).unwrap();
        let base = 50_000.0 / 2200.0;
        let expected = [base / 4.0, 3.0 * base / 4.0, base];
        for (got, want) in bounds.service_bounds.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9);
        }
        // Reference values 5.68, 17.05, 22.73.
        assert!((bounds.service_bounds[0] - 5.6818).abs() < 1e-3);
        assert!((bounds.service_bounds[1] - 17.0454).abs() < 1e-3);
        assert!((bounds.service_bounds[2] - 22.7272).abs() < 1e-3);

        // Queueing term identical across layers; bounds nondecreasing.
        let q0 = bounds.delay_approx[0] - bounds.service_bounds[0];
        for l in 0..3 {
            let q = bounds.delay_approx[l] - bounds.service_bounds[l];
            assert!((q - q0).abs() < 1e-12);
            if l > 0 {
                assert!(bounds.service_bounds[l] > bounds.service_bounds[l - 1]);
                assert!(bounds.delay_approx[l] > bounds.delay_approx[l - 1]);
            }
        }
        // Final layer equals the unlayered bound exactly.
        assert!((bounds.service_bounds[2] - base).abs() < 1e-12);
    }

    #[test]
    fn kingman_never_below_service_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let mean = rng.random_range(0.5..20.0);
            let cs2: f64 = rng.random_range(0.0..2.0);
            let service = ServiceStats::new(mean, mean * mean * (1.0 + cs2)).unwrap();
            let arrivals = ArrivalProcess::poisson(rng.random_range(0.001..0.9 / mean)).unwrap();
            assert!(kingman_delay(&service, &arrivals).unwrap() >= mean);
        }
    }
}
