//! The event loop: a binary heap of timestamped events with deterministic
//! tie-breaking, one FIFO master queue, and per-worker task queues.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::chunking::mini_job_count;
use crate::scheduler::{solve_split, SchedulerConfig, WorkerProfile};

use super::payload::PayloadRun;
use super::{
    Diagnostics, IntraLayer, JobRecord, JobStatus, ServiceModel, SimConfig, SimError, SimResult,
};

/// Streams of the run seed: arrivals, then one per worker, then payload.
pub(super) const ARRIVAL_STREAM: u64 = 0;

pub(super) fn worker_stream(worker: usize) -> u64 {
    1 + worker as u64
}

pub(super) fn payload_stream(num_workers: usize) -> u64 {
    1 + num_workers as u64
}

pub(super) fn seeded_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    TaskCompletion { worker: usize, service_id: u64 },
    DeadlineCheck { job: usize },
    JobArrival { job: usize },
}

impl EventKind {
    /// Completions before deadline checks before arrivals at equal times.
    fn rank(&self) -> u8 {
        match self {
            EventKind::TaskCompletion { .. } => 0,
            EventKind::DeadlineCheck { .. } => 1,
            EventKind::JobArrival { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Timestamps are finite by construction.
        self.time
            .partial_cmp(&other.time)
            .expect("finite event time")
            .then(self.kind.rank().cmp(&other.kind.rank()))
            .then(self.seq.cmp(&other.seq))
    }
}

/// One coded task in flight, identified by position rather than content.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) struct TaskRef {
    pub job: usize,
    pub layer: usize,
    pub mini_job: usize,
    pub task_index: u64,
}

#[derive(Debug, Default)]
struct Worker {
    queue: VecDeque<TaskRef>,
    current: Option<TaskRef>,
    current_service_id: u64,
    next_service_id: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct MiniJobState {
    received: u64,
    resolved: bool,
}

#[derive(Debug)]
struct Job {
    arrival: f64,
    service_start: Option<f64>,
    deadline_expiry: Option<f64>,
    current_layer: usize,
    layer_done: Vec<Option<f64>>,
    minijobs: Vec<MiniJobState>,
    dispatched_minijobs: usize,
    finished: Option<JobStatus>,
}

impl Job {
    fn new(arrival: f64, layers: usize) -> Self {
        Job {
            arrival,
            service_start: None,
            deadline_expiry: None,
            current_layer: 0,
            layer_done: vec![None; layers],
            minijobs: Vec::new(),
            dispatched_minijobs: 0,
            finished: None,
        }
    }
}

pub(super) struct Engine {
    cfg: SimConfig,
    layer_total: usize,
    chunk_count: usize,
    needed: u64,
    split: Vec<u64>,
    deterministic_durations: Vec<f64>,
    service_dists: Vec<Exp<f64>>,
    arrival_dist: Exp<f64>,

    events: BinaryHeap<Reverse<Event>>,
    seq: u64,
    now: f64,
    master_queue: VecDeque<usize>,
    in_service: Option<usize>,
    jobs: Vec<Job>,
    workers: Vec<Worker>,
    arrival_rng: ChaCha8Rng,
    worker_rngs: Vec<ChaCha8Rng>,

    busy_since: Option<f64>,
    busy_total: f64,
    diag: Diagnostics,
    payload: Option<PayloadRun>,
}

impl Engine {
    pub(super) fn new(cfg: &SimConfig) -> Result<Self, SimError> {
        let num_workers = cfg.worker_rates.len();
        let task_complexity = cfg.layered_task_complexity();
        let total_tasks = cfg.tasks_per_mini_job();

        // Worker moments for the load split come from the run's own service
        // law at the per-mini-job complexity.
        let profiles: Vec<WorkerProfile> = cfg
            .worker_rates
            .iter()
            .enumerate()
            .map(|(id, &rate)| match cfg.service_model {
                ServiceModel::Exponential => {
                    WorkerProfile::erlang(id, rate, task_complexity, cfg.tasks_needed)
                }
                ServiceModel::Deterministic => {
                    WorkerProfile::deterministic(id, rate, task_complexity, cfg.tasks_needed)
                }
            })
            .collect();
        let split = solve_split(&profiles, &SchedulerConfig::new(cfg.gamma, total_tasks)?)?;

        let service_dists = cfg
            .worker_rates
            .iter()
            .map(|&rate| Exp::new(rate / task_complexity).expect("positive rate"))
            .collect();
        let deterministic_durations = cfg
            .worker_rates
            .iter()
            .map(|&rate| task_complexity / rate)
            .collect();
        let arrival_dist = Exp::new(cfg.arrival_rate).expect("positive rate");

        let worker_rngs = (0..num_workers)
            .map(|p| seeded_stream(cfg.rng_seed, worker_stream(p)))
            .collect();
        let payload = cfg
            .payload
            .as_ref()
            .map(|params| PayloadRun::new(cfg, params, task_complexity))
            .transpose()?;

        let total_rate: f64 = cfg.worker_rates.iter().sum();
        let min_service = cfg.tasks_needed as f64 * cfg.task_complexity / total_rate;
        let diag = Diagnostics {
            overloaded: cfg.arrival_rate * min_service >= 1.0,
            ..Diagnostics::default()
        };

        let mut engine = Engine {
            cfg: cfg.clone(),
            layer_total: cfg.layer_count(),
            chunk_count: cfg.chunks,
            needed: cfg.tasks_needed,
            split: split.int_kappa,
            deterministic_durations,
            service_dists,
            arrival_dist,
            events: BinaryHeap::new(),
            seq: 0,
            now: 0.0,
            master_queue: VecDeque::new(),
            in_service: None,
            jobs: Vec::with_capacity(cfg.num_jobs),
            workers: (0..num_workers).map(|_| Worker::default()).collect(),
            arrival_rng: seeded_stream(cfg.rng_seed, ARRIVAL_STREAM),
            worker_rngs,
            busy_since: None,
            busy_total: 0.0,
            diag,
            payload,
        };
        if cfg.num_jobs > 0 {
            let first = engine.arrival_dist.sample(&mut engine.arrival_rng);
            engine.schedule(first, EventKind::JobArrival { job: 0 });
        }
        Ok(engine)
    }

    pub(super) fn run(mut self) -> Result<SimResult, SimError> {
        while let Some(Reverse(event)) = self.events.pop() {
            debug_assert!(event.time >= self.now, "event order violated");
            self.now = event.time;
            match event.kind {
                EventKind::JobArrival { job } => self.on_arrival(job),
                EventKind::TaskCompletion { worker, service_id } => {
                    self.on_task_completion(worker, service_id)
                }
                EventKind::DeadlineCheck { .. } => self.check_deadline(),
            }
        }
        self.finalize()
    }

    fn schedule(&mut self, at: f64, kind: EventKind) {
        let event = Event {
            time: at,
            seq: self.seq,
            kind,
        };
        self.seq += 1;
        self.events.push(Reverse(event));
    }

    // ------------------------------------------------------------------
    // Master: arrivals, job starts, termination
    // ------------------------------------------------------------------

    fn on_arrival(&mut self, job: usize) {
        debug_assert_eq!(job, self.jobs.len());
        self.jobs.push(Job::new(self.now, self.layer_total));
        if let Some(p) = &mut self.payload {
            p.on_job_arrival();
        }
        self.master_queue.push_back(job);

        if job + 1 < self.cfg.num_jobs {
            let gap = self.arrival_dist.sample(&mut self.arrival_rng);
            self.schedule(self.now + gap, EventKind::JobArrival { job: job + 1 });
        }

        if self.in_service.is_none() {
            self.start_next_job();
        } else {
            // The queue just became (or stayed) nonempty; a job already past
            // its budget is now terminable.
            self.check_deadline();
        }
    }

    fn start_next_job(&mut self) {
        let Some(job) = self.master_queue.pop_front() else {
            return;
        };
        self.in_service = Some(job);
        if self.busy_since.is_none() {
            self.busy_since = Some(self.now);
        }
        self.jobs[job].service_start = Some(self.now);
        if let Some(d) = self.cfg.deadline {
            let expiry = self.now + d;
            self.jobs[job].deadline_expiry = Some(expiry);
            self.schedule(expiry, EventKind::DeadlineCheck { job });
        }
        self.dispatch_layer(job, 0);
    }

    fn check_deadline(&mut self) {
        let Some(job) = self.in_service else {
            return;
        };
        let Some(expiry) = self.jobs[job].deadline_expiry else {
            return;
        };
        if self.now >= expiry && !self.master_queue.is_empty() {
            self.terminate_job(job);
        }
    }

    fn terminate_job(&mut self, job: usize) {
        self.purge_job(job);
        let current = self.jobs[job].current_layer;
        let last_layer = current.checked_sub(1);
        self.diag.terminated_jobs += 1;
        self.finish_job(job, JobStatus::Terminated { last_layer });
    }

    fn finish_job(&mut self, job: usize, status: JobStatus) {
        self.jobs[job].finished = Some(status);
        self.in_service = None;
        if let Some(since) = self.busy_since.take() {
            self.busy_total += self.now - since;
        }
        if !self.master_queue.is_empty() {
            self.start_next_job();
        }
    }

    // ------------------------------------------------------------------
    // Dispatch
    // ------------------------------------------------------------------

    fn dispatch_layer(&mut self, job: usize, layer: usize) {
        let count = mini_job_count(layer, self.chunk_count);
        {
            let j = &mut self.jobs[job];
            j.current_layer = layer;
            j.minijobs = vec![MiniJobState::default(); count];
            j.dispatched_minijobs = 0;
        }
        if let Some(p) = &mut self.payload {
            p.on_layer_dispatch(job, layer);
        }
        let to_enqueue = match self.cfg.intra_layer {
            IntraLayer::Concurrent => count,
            IntraLayer::Serial => 1,
        };
        for mini_job in 0..to_enqueue {
            self.enqueue_mini_job(job, layer, mini_job);
        }
    }

    /// Appends one mini-job's coded tasks to the worker queues: worker p
    /// takes the next `split[p]` task indices, in worker order.
    fn enqueue_mini_job(&mut self, job: usize, layer: usize, mini_job: usize) {
        self.jobs[job].dispatched_minijobs += 1;
        let mut task_index = 0u64;
        for p in 0..self.workers.len() {
            for _ in 0..self.split[p] {
                self.workers[p].queue.push_back(TaskRef {
                    job,
                    layer,
                    mini_job,
                    task_index,
                });
                task_index += 1;
            }
        }
        for p in 0..self.workers.len() {
            self.try_start_worker(p);
        }
    }

    // ------------------------------------------------------------------
    // Workers
    // ------------------------------------------------------------------

    fn try_start_worker(&mut self, p: usize) {
        if self.workers[p].current.is_some() {
            return;
        }
        let Some(task) = self.workers[p].queue.pop_front() else {
            return;
        };
        let duration = match self.cfg.service_model {
            ServiceModel::Exponential => self.service_dists[p].sample(&mut self.worker_rngs[p]),
            ServiceModel::Deterministic => self.deterministic_durations[p],
        };
        let worker = &mut self.workers[p];
        let service_id = worker.next_service_id;
        worker.next_service_id += 1;
        worker.current = Some(task);
        worker.current_service_id = service_id;
        self.schedule(
            self.now + duration,
            EventKind::TaskCompletion {
                worker: p,
                service_id,
            },
        );
    }

    fn on_task_completion(&mut self, p: usize, service_id: u64) {
        let worker = &mut self.workers[p];
        let stale = match worker.current {
            Some(_) => worker.current_service_id != service_id,
            None => true,
        };
        if stale {
            // A purge already replaced or idled this worker; the completion
            // belongs to an abandoned service.
            return;
        }
        let task = worker.current.take().expect("checked above");
        // Fusion and purging react at the completion instant, before the
        // worker picks its next task; a task purged right now never starts.
        self.handle_result(task);
        self.try_start_worker(p);
        self.check_deadline();
    }

    // ------------------------------------------------------------------
    // Fusion
    // ------------------------------------------------------------------

    fn handle_result(&mut self, task: TaskRef) {
        let job = &mut self.jobs[task.job];
        if job.finished.is_some() || job.current_layer != task.layer {
            self.diag.late_results += 1;
            return;
        }
        let mini_job = &mut job.minijobs[task.mini_job];
        if mini_job.resolved {
            self.diag.late_results += 1;
            return;
        }
        if let Some(p) = &mut self.payload {
            p.on_task_result(&task);
        }
        mini_job.received += 1;
        if mini_job.received < self.needed {
            return;
        }
        mini_job.resolved = true;
        self.purge_mini_job(task.job, task.layer, task.mini_job);
        if let Some(p) = &mut self.payload {
            p.on_mini_job_resolved(&task, &mut self.diag);
        }

        let job = &self.jobs[task.job];
        if job.minijobs.iter().all(|m| m.resolved) {
            self.complete_layer(task.job);
        } else if self.cfg.intra_layer == IntraLayer::Serial
            && job.dispatched_minijobs < job.minijobs.len()
        {
            let next = job.dispatched_minijobs;
            self.enqueue_mini_job(task.job, task.layer, next);
        }
    }

    fn complete_layer(&mut self, job: usize) {
        let layer = self.jobs[job].current_layer;
        self.jobs[job].layer_done[layer] = Some(self.now);
        if let Some(p) = &mut self.payload {
            p.on_layer_complete(job, layer, &mut self.diag);
        }
        if layer + 1 == self.layer_total {
            self.finish_job(job, JobStatus::Completed);
        } else {
            self.dispatch_layer(job, layer + 1);
        }
    }

    // ------------------------------------------------------------------
    // Purging
    // ------------------------------------------------------------------

    fn purge_mini_job(&mut self, job: usize, layer: usize, mini_job: usize) {
        self.purge_matching(|t| t.job == job && t.layer == layer && t.mini_job == mini_job);
    }

    fn purge_job(&mut self, job: usize) {
        self.purge_matching(|t| t.job == job);
    }

    fn purge_matching(&mut self, matches: impl Fn(&TaskRef) -> bool) {
        let preempt = self.cfg.purge_in_service;
        let mut freed = Vec::new();
        for (p, worker) in self.workers.iter_mut().enumerate() {
            let before = worker.queue.len();
            worker.queue.retain(|t| !matches(t));
            self.diag.purged_tasks += (before - worker.queue.len()) as u64;
            if preempt {
                if let Some(current) = worker.current {
                    if matches(&current) {
                        // Abandon mid-service; the scheduled completion event
                        // goes stale via the service id.
                        worker.current = None;
                        self.diag.purged_tasks += 1;
                        freed.push(p);
                    }
                }
            }
        }
        for p in freed {
            self.try_start_worker(p);
        }
    }

    // ------------------------------------------------------------------
    // Wrap-up
    // ------------------------------------------------------------------

    fn finalize(mut self) -> Result<SimResult, SimError> {
        let records = self
            .jobs
            .iter()
            .enumerate()
            .map(|(job_id, job)| {
                let status = job.finished.expect("all jobs settle before the heap drains");
                JobRecord {
                    job_id,
                    arrival_time: job.arrival,
                    service_start: job.service_start.expect("every job starts service"),
                    layer_delays: job
                        .layer_done
                        .iter()
                        .map(|done| done.map(|t| t - job.arrival))
                        .collect(),
                    status,
                }
            })
            .collect();
        if self.now > 0.0 {
            self.diag.utilization = self.busy_total / self.now;
        }
        Ok(SimResult {
            records,
            diagnostics: self.diag,
        })
    }
}
