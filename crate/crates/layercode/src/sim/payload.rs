//! Optional end-to-end payload verification.
//!
//! In payload mode the simulator carries real (small) operand matrices
//! through the full pipeline: operands are drawn per job, chunked, each
//! mini-job encoded into coded tasks, and when the fusion counter hits `k`
//! the mini-job is decoded from exactly the task results that arrived first.
//! Decoded products are checked against direct integer chunk products, and
//! assembled resolutions against the exact integer `A^T B`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chunking::{
    decompose, mini_jobs_of_layer, resolution_assemble, ChunkParams, ChunkedOperand, IntMatrix,
    LayeredAccumulator,
};
use crate::field::modulus_for_job;
use crate::polycode::{encode, execute_task, CodeParams, CodedTask, TaskResult};

use super::engine::{payload_stream, seeded_stream, TaskRef};
use super::{Diagnostics, SimConfig, SimError};

/// Shape of the operands carried in payload mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayloadParams {
    /// Column blocks of A (`n1`); `n1 * n2` must equal the config's `k`.
    pub a_block_count: usize,
    /// Column blocks of B (`n2`).
    pub b_block_count: usize,
    /// Chunk alphabet base `q` (prime).
    pub alphabet_base: u64,
    /// Symbols per chunk `d`.
    pub symbols_per_chunk: u32,
    /// Shared row count of both operands (the inner dimension of `A^T B`).
    pub inner_dim: usize,
    pub a_cols: usize,
    pub b_cols: usize,
}

impl PayloadParams {
    pub(super) fn validate(&self, cfg: &SimConfig) -> Result<(), String> {
        if self.a_block_count * self.b_block_count != cfg.tasks_needed as usize {
            return Err(format!(
                "block grid {}x{} must match k = {}",
                self.a_block_count, self.b_block_count, cfg.tasks_needed
            ));
        }
        if self.inner_dim == 0 || self.a_cols == 0 || self.b_cols == 0 {
            return Err("payload dimensions must be positive".into());
        }
        ChunkParams::new(self.alphabet_base, self.symbols_per_chunk, cfg.chunks)
            .map_err(|e| e.to_string())?;
        Ok(())
    }
}

struct PayloadJob {
    a: ChunkedOperand,
    b: ChunkedOperand,
    /// Direct integer chunk products, the in-run reference.
    reference: BTreeMap<(usize, usize), IntMatrix>,
    expected_full: IntMatrix,
    /// Coded tasks per (layer, mini-job index).
    tasks: BTreeMap<(usize, usize), Vec<CodedTask>>,
    /// Task indices per (layer, mini-job index), in completion order.
    collected: BTreeMap<(usize, usize), Vec<u64>>,
    /// Decoded products keyed by chunk pair.
    decoded: BTreeMap<(usize, usize), IntMatrix>,
    accumulator: LayeredAccumulator,
}

pub(super) struct PayloadRun {
    params: PayloadParams,
    chunk_params: ChunkParams,
    code_params: CodeParams,
    task_complexity: f64,
    chunks: usize,
    rng: ChaCha8Rng,
    jobs: Vec<PayloadJob>,
}

impl PayloadRun {
    pub(super) fn new(
        cfg: &SimConfig,
        params: &PayloadParams,
        task_complexity: f64,
    ) -> Result<Self, SimError> {
        let chunk_params =
            ChunkParams::new(params.alphabet_base, params.symbols_per_chunk, cfg.chunks)
                .map_err(|e| SimError::Payload(e.to_string()))?;
        let max_entry = chunk_params.chunk_base() - 1;
        let modulus = modulus_for_job(
            params.inner_dim as u64,
            max_entry,
            cfg.tasks_per_mini_job(),
        )
        .map_err(|e| SimError::Payload(e.to_string()))?;
        let code_params = CodeParams::new(
            params.a_block_count,
            params.b_block_count,
            cfg.omega,
            modulus,
        )
        .map_err(|e| SimError::Payload(e.to_string()))?;
        debug_assert_eq!(code_params.num_tasks() as u64, cfg.tasks_per_mini_job());
        Ok(PayloadRun {
            params: *params,
            chunk_params,
            code_params,
            task_complexity,
            chunks: cfg.chunks,
            rng: seeded_stream(cfg.rng_seed, payload_stream(cfg.worker_rates.len())),
            jobs: Vec::new(),
        })
    }

    fn random_operand(&mut self, rows: usize, cols: usize) -> IntMatrix {
        let bound = self.chunk_params.element_bound();
        let entries = (0..rows * cols)
            .map(|_| self.rng.random_range(0..bound))
            .collect();
        IntMatrix::new(rows, cols, entries).expect("consistent dims")
    }

    pub(super) fn on_job_arrival(&mut self) {
        let a = self.random_operand(self.params.inner_dim, self.params.a_cols);
        let b = self.random_operand(self.params.inner_dim, self.params.b_cols);
        let expected_full = a.mul_transpose(&b).expect("payload dims fit");
        let a_chunks = decompose(&a, &self.chunk_params).expect("entries in range");
        let b_chunks = decompose(&b, &self.chunk_params).expect("entries in range");
        let mut reference = BTreeMap::new();
        for i in 0..self.chunks {
            for j in 0..self.chunks {
                reference.insert(
                    (i, j),
                    a_chunks
                        .chunk(i)
                        .mul_transpose(b_chunks.chunk(j))
                        .expect("chunk dims fit"),
                );
            }
        }
        let accumulator =
            LayeredAccumulator::new(self.params.a_cols, self.params.b_cols, self.chunk_params);
        self.jobs.push(PayloadJob {
            a: a_chunks,
            b: b_chunks,
            reference,
            expected_full,
            tasks: BTreeMap::new(),
            collected: BTreeMap::new(),
            decoded: BTreeMap::new(),
            accumulator,
        });
    }

    pub(super) fn on_layer_dispatch(&mut self, job: usize, layer: usize) {
        let modulus = self.code_params.modulus();
        let minijobs = mini_jobs_of_layer(layer, self.chunks).expect("layer in range");
        for (idx, mini_job) in minijobs.iter().enumerate() {
            let state = &self.jobs[job];
            let a_block = state
                .a
                .chunk(mini_job.a_chunk)
                .to_field(modulus)
                .expect("chunk digits below modulus");
            let b_block = state
                .b
                .chunk(mini_job.b_chunk)
                .to_field(modulus)
                .expect("chunk digits below modulus");
            let tasks = encode(&a_block, &b_block, &self.code_params, self.task_complexity)
                .expect("validated code params");
            self.jobs[job].tasks.insert((layer, idx), tasks);
        }
    }

    pub(super) fn on_task_result(&mut self, task: &TaskRef) {
        self.jobs[task.job]
            .collected
            .entry((task.layer, task.mini_job))
            .or_default()
            .push(task.task_index);
    }

    /// Decodes from exactly the `k` results that reached fusion first and
    /// compares against the direct integer chunk product.
    pub(super) fn on_mini_job_resolved(&mut self, task: &TaskRef, diag: &mut Diagnostics) {
        let k = self.code_params.k();
        let key = (task.layer, task.mini_job);
        let state = &self.jobs[task.job];
        let order = state.collected.get(&key).expect("results were collected");
        debug_assert!(order.len() >= k);
        let tasks = state.tasks.get(&key).expect("layer was encoded");
        let results: Vec<TaskResult> = order[..k]
            .iter()
            .map(|&idx| execute_task(&tasks[idx as usize]).expect("conformable blocks"))
            .collect();
        let decoded = crate::polycode::decode(&results, &self.code_params)
            .expect("k distinct results")
            .trim(self.params.a_cols, self.params.b_cols);
        let decoded = IntMatrix::from_field(&decoded);

        let mini_job = mini_jobs_of_layer(task.layer, self.chunks).expect("in range")[task.mini_job];
        let reference = &state.reference[&(mini_job.a_chunk, mini_job.b_chunk)];
        diag.payload_checks += 1;
        if &decoded != reference {
            diag.payload_mismatches += 1;
        }
        self.jobs[task.job]
            .decoded
            .insert((mini_job.a_chunk, mini_job.b_chunk), decoded);
    }

    /// Absorbs the completed layer from decoded products and checks the
    /// partial sum against an independently assembled resolution.
    pub(super) fn on_layer_complete(&mut self, job: usize, layer: usize, diag: &mut Diagnostics) {
        let state = &mut self.jobs[job];
        state
            .accumulator
            .absorb_layer(&state.decoded)
            .expect("all mini-jobs decoded");
        let expected =
            resolution_assemble(&state.reference, layer, &self.chunk_params).expect("reference");
        diag.payload_checks += 1;
        if state.accumulator.partial() != &expected {
            diag.payload_mismatches += 1;
        }
        if layer + 1 == self.chunk_params.layer_count() {
            // Full resolution must be the exact integer product.
            let full_ok = state
                .accumulator
                .partial()
                .entries()
                .iter()
                .zip(state.expected_full.entries())
                .all(|(&wide, &exact)| wide == exact as u128);
            diag.payload_checks += 1;
            if !full_ok {
                diag.payload_mismatches += 1;
            }
        }
    }
}
