//! Polynomial-code encoder/decoder for one mini-job.
//!
//! Operand `A` splits into `n1` column blocks and `B` into `n2`; task `t`
//! multiplies the block-polynomial evaluations
//! `X_t = sum_j A^j x_t^j` and `Y_t = sum_j B^j x_t^{j n1}` at a distinct
//! point `x_t`. The entrywise product polynomial has degree `k - 1` with
//! `k = n1 n2`, and its coefficient at `x^{j1 + j2 n1}` is `(A^{j1})^T B^{j2}`,
//! so any `k` of the `k * omega` task results interpolate the exact product.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, FieldMatrix, FieldPrime};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodeError {
    #[error("block counts must be positive")]
    EmptyBlocks,
    #[error("redundancy ratio {0} must be at least 1")]
    RedundancyTooSmall(f64),
    #[error("modulus {p} must exceed the task count {num_tasks}")]
    ModulusTooSmall { p: u64, num_tasks: u64 },
    #[error("operand modulus differs from code modulus")]
    ModulusMismatch,
    #[error("operands must share their row count, got {0} and {1}")]
    InnerDimMismatch(usize, usize),
    #[error("need {needed} task results, got {got}")]
    NotEnoughResults { needed: usize, got: usize },
    #[error("duplicate evaluation point {0}")]
    DuplicateEvalPoint(u64),
    #[error("task result shapes disagree")]
    ResultShapeMismatch,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Total coded tasks for `k` needed results at redundancy `omega`, rounded to
/// the nearest integer with ties rounded up.
pub fn coded_task_count(k: u64, omega: f64) -> u64 {
    (k as f64 * omega).round() as u64
}

/// Code geometry for one mini-job: block counts, redundancy, and the fixed
/// evaluation points `1..=num_tasks`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    n1: usize,
    n2: usize,
    omega: f64,
    k: usize,
    num_tasks: usize,
    eval_points: Vec<u64>,
    modulus: FieldPrime,
}

impl CodeParams {
    pub fn new(n1: usize, n2: usize, omega: f64, modulus: FieldPrime) -> Result<Self, CodeError> {
        if n1 == 0 || n2 == 0 {
            return Err(CodeError::EmptyBlocks);
        }
        if !omega.is_finite() || omega < 1.0 {
            return Err(CodeError::RedundancyTooSmall(omega));
        }
        let k = n1 * n2;
        let num_tasks = coded_task_count(k as u64, omega) as usize;
        debug_assert!(num_tasks >= k);
        if modulus.get() <= num_tasks as u64 {
            return Err(CodeError::ModulusTooSmall {
                p: modulus.get(),
                num_tasks: num_tasks as u64,
            });
        }
        let eval_points = (1..=num_tasks as u64).collect();
        Ok(CodeParams {
            n1,
            n2,
            omega,
            k,
            num_tasks,
            eval_points,
            modulus,
        })
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Results needed to decode, `k = n1 * n2`.
    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn num_tasks(&self) -> usize {
        self.num_tasks
    }

    #[inline]
    pub fn eval_points(&self) -> &[u64] {
        &self.eval_points
    }

    #[inline]
    pub fn modulus(&self) -> FieldPrime {
        self.modulus
    }
}

/// One coded shard of a mini-job: the two evaluated blocks a worker multiplies.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedTask {
    pub task_id: usize,
    pub eval_point: u64,
    pub x_block: FieldMatrix,
    pub y_block: FieldMatrix,
    /// Work units this task costs; carried through to the simulator.
    pub complexity: f64,
}

/// The transposed block product `(X_t)^T Y_t` a worker sends to fusion.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskResult {
    pub task_id: usize,
    pub eval_point: u64,
    pub product: FieldMatrix,
}

/// Encodes one mini-job into `num_tasks` coded tasks.
///
/// Operand columns that do not divide evenly by the block count are
/// zero-padded; [`decode`] then returns the padded product grid and
/// [`coded_mat_mul`] trims it back.
pub fn encode(
    a: &FieldMatrix,
    b: &FieldMatrix,
    params: &CodeParams,
    task_complexity: f64,
) -> Result<Vec<CodedTask>, CodeError> {
    if a.modulus() != params.modulus || b.modulus() != params.modulus {
        return Err(CodeError::ModulusMismatch);
    }
    if a.rows() != b.rows() {
        return Err(CodeError::InnerDimMismatch(a.rows(), b.rows()));
    }
    let a_blocks = split_blocks(a, params.n1);
    let b_blocks = split_blocks(b, params.n2);
    let p = params.modulus;

    let make_task = |(t, &x): (usize, &u64)| {
        // X_t = sum_j A^j x^j with Horner on the block coefficients.
        let x_block = eval_block_poly(&a_blocks, x);
        // Y_t = sum_j B^j x^{j n1}: Horner in the stride-n1 power of x.
        let x_stride = p.pow(x, params.n1 as u64);
        let y_block = eval_block_poly(&b_blocks, x_stride);
        CodedTask {
            task_id: t,
            eval_point: x,
            x_block,
            y_block,
            complexity: task_complexity,
        }
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if params.num_tasks >= 8 {
            return Ok(params
                .eval_points
                .par_iter()
                .enumerate()
                .map(make_task)
                .collect());
        }
    }
    Ok(params.eval_points.iter().enumerate().map(make_task).collect())
}

/// Computes one task's product `(X_t)^T Y_t`.
pub fn execute_task(task: &CodedTask) -> Result<TaskResult, CodeError> {
    Ok(TaskResult {
        task_id: task.task_id,
        eval_point: task.eval_point,
        product: task.x_block.mat_mul_transpose(&task.y_block)?,
    })
}

/// Executes a batch of tasks, in parallel when the feature is enabled.
pub fn execute_tasks(tasks: &[CodedTask]) -> Result<Vec<TaskResult>, CodeError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        return tasks.par_iter().map(execute_task).collect();
    }
    #[cfg(not(feature = "parallel"))]
    tasks.iter().map(execute_task).collect()
}

/// Single-threaded batch execution, independent of the `parallel` feature.
pub fn execute_tasks_serial(tasks: &[CodedTask]) -> Result<Vec<TaskResult>, CodeError> {
    tasks.iter().map(execute_task).collect()
}

/// Decodes the exact mini-job product from any `k` task results.
///
/// Results beyond the first `k` are ignored. The returned matrix covers the
/// full padded block grid (`n1 * block_cols_a` rows by `n2 * block_cols_b`
/// columns).
pub fn decode(results: &[TaskResult], params: &CodeParams) -> Result<FieldMatrix, CodeError> {
    let k = params.k;
    if results.len() < k {
        return Err(CodeError::NotEnoughResults {
            needed: k,
            got: results.len(),
        });
    }
    let used = &results[..k];
    let points: Vec<u64> = used.iter().map(|r| r.eval_point).collect();
    let basis = LagrangeBasis::build(&points, params.modulus)?;

    let block_rows = used[0].product.rows();
    let block_cols = used[0].product.cols();
    if used
        .iter()
        .any(|r| r.product.rows() != block_rows || r.product.cols() != block_cols)
    {
        return Err(CodeError::ResultShapeMismatch);
    }

    let p = params.modulus;
    let out_rows = params.n1 * block_rows;
    let out_cols = params.n2 * block_cols;
    let mut out = FieldMatrix::zeros(out_rows, out_cols, p);
    // Interpolate each entry of the block product polynomial; its degree-c
    // coefficient with c = j1 + j2 * n1 lands in block (j1, j2) of the grid.
    let mut values = vec![0u64; k];
    for r in 0..block_rows {
        for c in 0..block_cols {
            for (slot, result) in values.iter_mut().zip(used) {
                *slot = result.product.get(r, c);
            }
            let coeffs = basis.interpolate(&values, p);
            for (idx, &coeff) in coeffs.iter().enumerate() {
                let j1 = idx % params.n1;
                let j2 = idx / params.n1;
                out.set(j1 * block_rows + r, j2 * block_cols + c, coeff);
            }
        }
    }
    Ok(out)
}

/// Encode, execute every task, and decode from the first `k` results; the
/// round-trip reference path for tests and payload verification.
pub fn coded_mat_mul(
    a: &FieldMatrix,
    b: &FieldMatrix,
    params: &CodeParams,
) -> Result<FieldMatrix, CodeError> {
    let tasks = encode(a, b, params, 1.0)?;
    let results = execute_tasks(&tasks)?;
    let grid = decode(&results[..params.k], params)?;
    Ok(grid.trim(a.cols(), b.cols()))
}

/// Coefficients of the unique polynomial of degree `< points.len()` through
/// the given `(x, value)` pairs, modulo `p`.
pub fn interpolate_coefficients(
    points: &[(u64, u64)],
    modulus: FieldPrime,
) -> Result<Vec<u64>, CodeError> {
    let xs: Vec<u64> = points.iter().map(|&(x, _)| x).collect();
    let values: Vec<u64> = points.iter().map(|&(_, y)| y).collect();
    let basis = LagrangeBasis::build(&xs, modulus)?;
    Ok(basis.interpolate(&values, modulus))
}

/// Expanded Lagrange basis polynomials over a fixed point set, shared across
/// every entry interpolation of a decode.
struct LagrangeBasis {
    /// coeffs[t] holds the coefficient vector of L_t(x).
    coeffs: Vec<Vec<u64>>,
}

impl LagrangeBasis {
    fn build(points: &[u64], modulus: FieldPrime) -> Result<Self, CodeError> {
        let p = modulus;
        let k = points.len();
        for (i, &x) in points.iter().enumerate() {
            if points[..i].contains(&x) {
                return Err(CodeError::DuplicateEvalPoint(x));
            }
        }
        // Master polynomial N(x) = prod (x - x_t), built one factor at a time.
        let mut master = vec![0u64; k + 1];
        master[0] = 1 % p.get();
        let mut len = 1;
        for &x in points {
            let neg = p.sub(0, x);
            let mut next = vec![0u64; len + 1];
            for i in 0..len {
                next[i + 1] = p.add(next[i + 1], master[i]);
                next[i] = p.add(next[i], p.mul(master[i], neg));
            }
            master[..=len].copy_from_slice(&next);
            len += 1;
        }

        let mut coeffs = Vec::with_capacity(k);
        for &x in points {
            // Synthetic division: Q_t = N / (x - x_t), degree k - 1.
            let mut quotient = vec![0u64; k];
            let mut carry = master[k];
            for i in (0..k).rev() {
                quotient[i] = carry;
                carry = p.add(master[i], p.mul(carry, x));
            }
            debug_assert_eq!(carry, 0, "x_t must be a root of the master polynomial");
            // Normalize by Q_t(x_t) = prod_{s != t} (x_t - x_s).
            let mut denom = 0u64;
            for i in (0..k).rev() {
                denom = p.add(p.mul(denom, x), quotient[i]);
            }
            let scale = p.inv(denom)?;
            for q in quotient.iter_mut() {
                *q = p.mul(*q, scale);
            }
            coeffs.push(quotient);
        }
        Ok(LagrangeBasis { coeffs })
    }

    /// coefficient vector of sum_t values[t] * L_t(x).
    fn interpolate(&self, values: &[u64], modulus: FieldPrime) -> Vec<u64> {
        let k = self.coeffs.len();
        debug_assert_eq!(values.len(), k);
        let mut out = vec![0u64; k];
        for (basis, &v) in self.coeffs.iter().zip(values) {
            if v == 0 {
                continue;
            }
            for (slot, &b) in out.iter_mut().zip(basis) {
                *slot = modulus.add(*slot, modulus.mul(b, v));
            }
        }
        out
    }
}

fn split_blocks(m: &FieldMatrix, blocks: usize) -> Vec<FieldMatrix> {
    let width = m.cols().div_ceil(blocks);
    let padded = m.pad_cols(width * blocks);
    (0..blocks)
        .map(|j| padded.column_block(j * width, width).expect("in range"))
        .collect()
}

/// Horner evaluation of a block-coefficient polynomial at `x`.
fn eval_block_poly(blocks: &[FieldMatrix], x: u64) -> FieldMatrix {
    let mut acc = blocks.last().expect("nonempty").clone();
    for block in blocks.iter().rev().skip(1) {
        acc = acc.scale(x).add(block).expect("same shape");
    }
    acc
}
