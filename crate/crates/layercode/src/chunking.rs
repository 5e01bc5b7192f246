//! Digit-chunk layering of integer operands.
//!
//! An operand matrix with entries in `[0, q^{md})` splits into `m` chunk
//! matrices, chunk `i` holding digit `i` in base `q^d`. The transposed product
//! of two such operands then decomposes into `m^2` mini-job products
//! `(A_i)^T B_j`, grouped into `L = 2m - 1` resolution layers by the weight
//! exponent `(i + j) d`. Assembling the layers in order refines a coarse
//! product into the exact one; layer `L - 1` completes it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{self, FieldMatrix, FieldPrime};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChunkError {
    #[error("chunk alphabet base {0} must be prime")]
    BaseNotPrime(u64),
    #[error("chunk parameters need d >= 1 and m >= 1")]
    DegenerateParams,
    #[error("element range q^(md) = {q}^({m}*{d}) exceeds the supported 2^48")]
    RangeTooWide { q: u64, d: u32, m: usize },
    #[error("entry {0} outside the element range [0, {1})")]
    EntryOutOfRange(u64, u64),
    #[error("layer {0} out of range for {1} layers")]
    LayerOutOfRange(usize, usize),
    #[error("missing mini-job result for layer {layer}, chunk pair ({a_chunk}, {b_chunk})")]
    MissingMiniJob {
        layer: usize,
        a_chunk: usize,
        b_chunk: usize,
    },
    #[error("mini-job result shape {0}x{1} does not match {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),
    #[error("matrix dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("integer overflow while assembling (operands too wide)")]
    Overflow,
}

/// Chunking parameters: alphabet base `q` (prime), `d` symbols per chunk,
/// `m` chunks per element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChunkParams {
    q: u64,
    d: u32,
    m: usize,
}

impl ChunkParams {
    /// Validates `q` prime, `d, m >= 1`, and the element range `q^{md} <= 2^48`
    /// so assembled products fit wide-integer accumulators with guard bits to
    /// spare for inner dimensions up to 2^31.
    pub fn new(q: u64, d: u32, m: usize) -> Result<Self, ChunkError> {
        if !field::is_prime(q) {
            return Err(ChunkError::BaseNotPrime(q));
        }
        if d == 0 || m == 0 {
            return Err(ChunkError::DegenerateParams);
        }
        let mut bound: u128 = 1;
        for _ in 0..(m as u32 * d) {
            bound = bound.saturating_mul(q as u128);
            if bound > 1 << 48 {
                return Err(ChunkError::RangeTooWide { q, d, m });
            }
        }
        Ok(ChunkParams { q, d, m })
    }

    #[inline]
    pub fn base(&self) -> u64 {
        self.q
    }

    #[inline]
    pub fn symbols_per_chunk(&self) -> u32 {
        self.d
    }

    #[inline]
    pub fn chunks_per_element(&self) -> usize {
        self.m
    }

    /// Number of resolution layers, `L = 2m - 1`.
    #[inline]
    pub fn layer_count(&self) -> usize {
        2 * self.m - 1
    }

    /// One chunk digit's radix, `q^d`.
    pub fn chunk_base(&self) -> u64 {
        self.q.pow(self.d)
    }

    /// Exclusive upper bound on operand entries, `q^{md}`.
    pub fn element_bound(&self) -> u64 {
        self.chunk_base().pow(self.m as u32)
    }

    /// `q^e` as a wide integer, for weighting assembled mini-job products.
    fn weight(&self, exponent: u32) -> u128 {
        (self.q as u128).pow(exponent)
    }
}

/// Dense row-major matrix of nonnegative integers (operands, chunk digits,
/// and exact mini-job products).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<u64>) -> Result<Self, ChunkError> {
        if entries.len() != rows * cols {
            return Err(ChunkError::DimensionMismatch(format!(
                "{} entries for {}x{}",
                entries.len(),
                rows,
                cols
            )));
        }
        Ok(IntMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Exact integer `self^T * other` (shared inner dimension = rows).
    pub fn mul_transpose(&self, other: &Self) -> Result<Self, ChunkError> {
        if self.rows != other.rows {
            return Err(ChunkError::DimensionMismatch(format!(
                "transposed product needs equal row counts, got {} and {}",
                self.rows, other.rows
            )));
        }
        let mut out = IntMatrix::zeros(self.cols, other.cols);
        for i in 0..self.cols {
            for j in 0..other.cols {
                let mut acc: u128 = 0;
                for r in 0..self.rows {
                    acc += self.get(r, i) as u128 * other.get(r, j) as u128;
                }
                let v = u64::try_from(acc).map_err(|_| ChunkError::Overflow)?;
                out.set(i, j, v);
            }
        }
        Ok(out)
    }

    /// Embeds the matrix into a coded field; every entry must be below p.
    pub fn to_field(&self, modulus: FieldPrime) -> Result<FieldMatrix, ChunkError> {
        if let Some(&bad) = self.entries.iter().find(|&&e| e >= modulus.get()) {
            return Err(ChunkError::EntryOutOfRange(bad, modulus.get()));
        }
        Ok(FieldMatrix::new(self.rows, self.cols, self.entries.clone(), modulus)
            .expect("validated entries"))
    }

    /// Reads back a decoded field matrix whose residues are integer values.
    pub fn from_field(m: &FieldMatrix) -> Self {
        IntMatrix {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries().to_vec(),
        }
    }
}

/// Wide-integer matrix carrying assembled resolutions of `A^T B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WideMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u128>,
}

impl WideMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        WideMatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u128 {
        self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[u128] {
        &self.entries
    }
}

/// An integer operand split into `m` digit-chunk matrices; chunk `i` carries
/// weight `q^{id}` and every entry lies in `[0, q^d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkedOperand {
    chunks: Vec<IntMatrix>,
    rows: usize,
    cols: usize,
}

impl ChunkedOperand {
    #[inline]
    pub fn chunk(&self, i: usize) -> &IntMatrix {
        &self.chunks[i]
    }

    #[inline]
    pub fn chunk_count(&self) -> usize {
        self.chunks.len()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entrywise sum of `chunks[i] * q^{id}`; inverse of [`decompose`].
    pub fn reconstruct(&self, params: &ChunkParams) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.rows, self.cols);
        let base = params.chunk_base();
        for r in 0..self.rows {
            for c in 0..self.cols {
                let mut acc = 0u64;
                for i in (0..self.chunks.len()).rev() {
                    acc = acc * base + self.chunks[i].get(r, c);
                }
                out.set(r, c, acc);
            }
        }
        out
    }
}

/// One low-resolution product `(A_i)^T B_j`: the unit of work inside a layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MiniJob {
    pub layer: usize,
    pub a_chunk: usize,
    pub b_chunk: usize,
}

impl MiniJob {
    /// The place-value exponent of this product, `(i + j) d`.
    pub fn weight_exponent(&self, params: &ChunkParams) -> u32 {
        (self.a_chunk + self.b_chunk) as u32 * params.symbols_per_chunk()
    }
}

/// Number of mini-jobs that upgrade resolution `l-1` to `l`:
/// `J(l) = min(l + 1, 2m - 1 - l)`.
pub fn mini_job_count(layer: usize, m: usize) -> usize {
    (layer + 1).min(2 * m - 1 - layer)
}

/// Enumerates the mini-jobs of one layer: all chunk pairs with
/// `i + j = (2m - 2) - l`, ordered by descending `i`.
pub fn mini_jobs_of_layer(layer: usize, m: usize) -> Result<Vec<MiniJob>, ChunkError> {
    let layer_total = 2 * m - 1;
    if layer >= layer_total {
        return Err(ChunkError::LayerOutOfRange(layer, layer_total));
    }
    let pair_sum = (2 * m - 2) - layer;
    let mut jobs = Vec::with_capacity(mini_job_count(layer, m));
    for a_chunk in (0..m).rev() {
        if pair_sum >= a_chunk {
            let b_chunk = pair_sum - a_chunk;
            if b_chunk < m {
                jobs.push(MiniJob {
                    layer,
                    a_chunk,
                    b_chunk,
                });
            }
        }
    }
    debug_assert_eq!(jobs.len(), mini_job_count(layer, m));
    Ok(jobs)
}

/// Splits an integer matrix into base-`q^d` digit chunks, least significant
/// first.
pub fn decompose(matrix: &IntMatrix, params: &ChunkParams) -> Result<ChunkedOperand, ChunkError> {
    let bound = params.element_bound();
    let base = params.chunk_base();
    let m = params.chunks_per_element();
    let mut chunks = vec![IntMatrix::zeros(matrix.rows(), matrix.cols()); m];
    for r in 0..matrix.rows() {
        for c in 0..matrix.cols() {
            let mut v = matrix.get(r, c);
            if v >= bound {
                return Err(ChunkError::EntryOutOfRange(v, bound));
            }
            for chunk in chunks.iter_mut() {
                chunk.set(r, c, v % base);
                v /= base;
            }
        }
    }
    Ok(ChunkedOperand {
        chunks,
        rows: matrix.rows(),
        cols: matrix.cols(),
    })
}

/// Running partial sum of mini-job products, layer by layer.
///
/// After absorbing layers `0..=l` the partial matrix equals the `l`-th
/// resolution of `A^T B`.
#[derive(Debug, Clone)]
pub struct LayeredAccumulator {
    partial: WideMatrix,
    completed_layers: usize,
    params: ChunkParams,
}

impl LayeredAccumulator {
    pub fn new(rows: usize, cols: usize, params: ChunkParams) -> Self {
        LayeredAccumulator {
            partial: WideMatrix::zeros(rows, cols),
            completed_layers: 0,
            params,
        }
    }

    #[inline]
    pub fn completed_layers(&self) -> usize {
        self.completed_layers
    }

    #[inline]
    pub fn partial(&self) -> &WideMatrix {
        &self.partial
    }

    /// Absorbs every mini-job product of the next layer, each weighted by
    /// `q^{(i+j)d}`. The map is keyed by `(a_chunk, b_chunk)`.
    pub fn absorb_layer(
        &mut self,
        products: &BTreeMap<(usize, usize), IntMatrix>,
    ) -> Result<(), ChunkError> {
        let layer = self.completed_layers;
        let m = self.params.chunks_per_element();
        for job in mini_jobs_of_layer(layer, m)? {
            let product = products.get(&(job.a_chunk, job.b_chunk)).ok_or(
                ChunkError::MissingMiniJob {
                    layer,
                    a_chunk: job.a_chunk,
                    b_chunk: job.b_chunk,
                },
            )?;
            if product.rows() != self.partial.rows || product.cols() != self.partial.cols {
                return Err(ChunkError::ShapeMismatch(
                    product.rows(),
                    product.cols(),
                    self.partial.rows,
                    self.partial.cols,
                ));
            }
            let weight = self.params.weight(job.weight_exponent(&self.params));
            for (slot, &v) in self.partial.entries.iter_mut().zip(product.entries()) {
                *slot = slot
                    .checked_add(weight.checked_mul(v as u128).ok_or(ChunkError::Overflow)?)
                    .ok_or(ChunkError::Overflow)?;
            }
        }
        self.completed_layers += 1;
        Ok(())
    }
}

/// Assembles the `l`-th resolution of `A^T B` from mini-job products of
/// layers `0..=l`, keyed by `(a_chunk, b_chunk)`.
///
/// At `l = L - 1` the result equals the exact integer product.
pub fn resolution_assemble(
    results: &BTreeMap<(usize, usize), IntMatrix>,
    layer: usize,
    params: &ChunkParams,
) -> Result<WideMatrix, ChunkError> {
    let layer_total = params.layer_count();
    if layer >= layer_total {
        return Err(ChunkError::LayerOutOfRange(layer, layer_total));
    }
    let any = results
        .values()
        .next()
        .ok_or(ChunkError::MissingMiniJob {
            layer: 0,
            a_chunk: params.chunks_per_element() - 1,
            b_chunk: params.chunks_per_element() - 1,
        })?;
    let mut acc = LayeredAccumulator::new(any.rows(), any.cols(), *params);
    for _ in 0..=layer {
        acc.absorb_layer(results)?;
    }
    Ok(acc.partial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: u64) -> IntMatrix {
        IntMatrix::new(1, 1, vec![v]).unwrap()
    }

    #[test]
    fn decompose_sixteen_bit_scalar() {
        let params = ChunkParams::new(2, 8, 2).unwrap();
        let op = decompose(&scalar(0xABCD), &params).unwrap();
        assert_eq!(op.chunk(0).get(0, 0), 0xCD);
        assert_eq!(op.chunk(1).get(0, 0), 0xAB);
    }

    #[test]
    fn decompose_zero() {
        let params = ChunkParams::new(2, 8, 2).unwrap();
        let op = decompose(&scalar(0), &params).unwrap();
        assert_eq!(op.chunk(0).get(0, 0), 0);
        assert_eq!(op.chunk(1).get(0, 0), 0);
    }

    #[test]
    fn decompose_base_conversion_oracle() {
        let params = ChunkParams::new(5, 2, 3).unwrap();
        let op = decompose(&scalar(12345), &params).unwrap();
        // Base-conversion oracle: sum of chunks[i] * 25^i reproduces the value.
        let mut acc = 0u64;
        for i in 0..3 {
            acc += op.chunk(i).get(0, 0) * 25u64.pow(i as u32);
            assert!(op.chunk(i).get(0, 0) < 25);
        }
        assert_eq!(acc, 12345);
        assert_eq!(op.reconstruct(&params).get(0, 0), 12345);
    }

    #[test]
    fn decompose_rejects_out_of_range() {
        let params = ChunkParams::new(2, 8, 2).unwrap();
        assert_eq!(
            decompose(&scalar(1 << 16), &params),
            Err(ChunkError::EntryOutOfRange(1 << 16, 1 << 16))
        );
    }

    #[test]
    fn params_validation() {
        assert_eq!(ChunkParams::new(4, 8, 2), Err(ChunkError::BaseNotPrime(4)));
        assert_eq!(ChunkParams::new(2, 0, 2), Err(ChunkError::DegenerateParams));
        assert!(matches!(
            ChunkParams::new(2, 25, 2),
            Err(ChunkError::RangeTooWide { .. })
        ));
        assert_eq!(ChunkParams::new(2, 8, 2).unwrap().layer_count(), 3);
    }

    #[test]
    fn layer_profile_m2() {
        let counts: Vec<usize> = (0..3).map(|l| mini_job_count(l, 2)).collect();
        assert_eq!(counts, [1, 2, 1]);
        let middle = mini_jobs_of_layer(1, 2).unwrap();
        let pairs: Vec<(usize, usize)> = middle.iter().map(|j| (j.a_chunk, j.b_chunk)).collect();
        assert_eq!(pairs, [(1, 0), (0, 1)]);
    }

    #[test]
    fn layer_profile_m1() {
        let jobs = mini_jobs_of_layer(0, 1).unwrap();
        assert_eq!(jobs.len(), 1);
        assert_eq!((jobs[0].a_chunk, jobs[0].b_chunk), (0, 0));
        assert!(mini_jobs_of_layer(1, 1).is_err());
    }

    #[test]
    fn layer_profile_m3_brute_force() {
        // Enumerate all chunk pairs with 0 <= i, j <= 2 grouped by i + j.
        let mut by_layer = vec![0usize; 5];
        for i in 0..3usize {
            for j in 0..3usize {
                let layer = 4 - (i + j);
                by_layer[layer] += 1;
            }
        }
        assert_eq!(by_layer, [1, 2, 3, 2, 1]);
        for l in 0..5 {
            assert_eq!(mini_job_count(l, 3), by_layer[l]);
            assert_eq!(mini_jobs_of_layer(l, 3).unwrap().len(), by_layer[l]);
        }
        assert_eq!(by_layer.iter().sum::<usize>(), 9);
    }

    #[test]
    fn layer_counts_sum_to_m_squared() {
        for m in 1..=32 {
            let total: usize = (0..2 * m - 1).map(|l| mini_job_count(l, m)).sum();
            assert_eq!(total, m * m, "m = {m}");
        }
    }

    /// All mini-job products of both operands, computed by an integer triple
    /// loop on the chunk matrices.
    fn all_products(
        a: &ChunkedOperand,
        b: &ChunkedOperand,
    ) -> BTreeMap<(usize, usize), IntMatrix> {
        let mut out = BTreeMap::new();
        for i in 0..a.chunk_count() {
            for j in 0..b.chunk_count() {
                out.insert((i, j), a.chunk(i).mul_transpose(b.chunk(j)).unwrap());
            }
        }
        out
    }

    #[test]
    fn three_layer_assembly_identity() {
        // Full assembly of 16-bit operands in three layers:
        // A1^T B1 * 2^16 + (A1^T B0 + A0^T B1) * 2^8 + A0^T B0.
        let params = ChunkParams::new(2, 8, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = IntMatrix::new(3, 2, (0..6).map(|_| rng.random_range(0..1 << 16)).collect()).unwrap();
        let b = IntMatrix::new(3, 2, (0..6).map(|_| rng.random_range(0..1 << 16)).collect()).unwrap();
        let ac = decompose(&a, &params).unwrap();
        let bc = decompose(&b, &params).unwrap();
        let products = all_products(&ac, &bc);

        let full = resolution_assemble(&products, 2, &params).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expected = (products[&(1, 1)].get(i, j) as u128) << 16;
                let expected = expected
                    + (((products[&(1, 0)].get(i, j) + products[&(0, 1)].get(i, j)) as u128) << 8);
                let expected = expected + products[&(0, 0)].get(i, j) as u128;
                assert_eq!(full.get(i, j), expected);
            }
        }

        // The first resolution is the heaviest-weighted product alone.
        let coarse = resolution_assemble(&products, 0, &params).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(coarse.get(i, j), (products[&(1, 1)].get(i, j) as u128) << 16);
            }
        }
    }

    /// Schoolbook integer transposed product in i128, used as the oracle for
    /// full-resolution assembly.
    fn naive_transpose_product(a: &IntMatrix, b: &IntMatrix) -> Vec<i128> {
        let mut out = vec![0i128; a.cols() * b.cols()];
        for i in 0..a.cols() {
            for j in 0..b.cols() {
                let mut acc = 0i128;
                for r in 0..a.rows() {
                    acc += a.get(r, i) as i128 * b.get(r, j) as i128;
                }
                out[i * b.cols() + j] = acc;
            }
        }
        out
    }

    #[test]
    fn full_resolution_equals_integer_product() {
        let params = ChunkParams::new(2, 8, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let a =
                IntMatrix::new(3, 3, (0..9).map(|_| rng.random_range(0..1 << 16)).collect())
                    .unwrap();
            let b =
                IntMatrix::new(3, 3, (0..9).map(|_| rng.random_range(0..1 << 16)).collect())
                    .unwrap();
            let products = all_products(&decompose(&a, &params).unwrap(), &decompose(&b, &params).unwrap());
            let full = resolution_assemble(&products, 2, &params).unwrap();
            let oracle = naive_transpose_product(&a, &b);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(full.get(i, j) as i128, oracle[i * 3 + j]);
                }
            }
        }
    }

    #[test]
    fn monotone_refinement() {
        // resolution(l') minus resolution(l) contains only contributions with
        // smaller weight exponents (chunk pairs with i + j < (2m-2) - l).
        let params = ChunkParams::new(2, 4, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = IntMatrix::new(2, 2, (0..4).map(|_| rng.random_range(0..1 << 12)).collect()).unwrap();
        let b = IntMatrix::new(2, 2, (0..4).map(|_| rng.random_range(0..1 << 12)).collect()).unwrap();
        let products = all_products(&decompose(&a, &params).unwrap(), &decompose(&b, &params).unwrap());
        let mut previous = resolution_assemble(&products, 0, &params).unwrap();
        for l in 1..params.layer_count() {
            let current = resolution_assemble(&products, l, &params).unwrap();
            let pair_sum_floor = (2 * params.chunks_per_element() - 2) - l;
            // The delta must equal the sum of exactly this layer's products.
            for i in 0..2 {
                for j in 0..2 {
                    let delta = current.get(i, j) - previous.get(i, j);
                    let expected: u128 = mini_jobs_of_layer(l, 3)
                        .unwrap()
                        .iter()
                        .map(|job| {
                            assert_eq!(job.a_chunk + job.b_chunk, pair_sum_floor);
                            products[&(job.a_chunk, job.b_chunk)].get(i, j) as u128
                                * params.weight(job.weight_exponent(&params))
                        })
                        .sum();
                    assert_eq!(delta, expected);
                }
            }
            previous = current;
        }
    }

    #[test]
    fn missing_mini_job_is_named() {
        let params = ChunkParams::new(2, 8, 2).unwrap();
        let a = decompose(&scalar(0x1234), &params).unwrap();
        let b = decompose(&scalar(0x5678), &params).unwrap();
        let mut products = all_products(&a, &b);
        products.remove(&(0, 1));
        let err = resolution_assemble(&products, 2, &params).unwrap_err();
        assert_eq!(
            err,
            ChunkError::MissingMiniJob {
                layer: 1,
                a_chunk: 0,
                b_chunk: 1
            }
        );
    }

    #[test]
    fn decompose_round_trip_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..50 {
            let q = *[2u64, 3, 5].iter().nth(rng.random_range(0..3)).unwrap();
            let d = rng.random_range(1..4u32);
            let m = rng.random_range(1..4usize);
            let params = match ChunkParams::new(q, d, m) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let bound = params.element_bound();
            let rows = rng.random_range(1..4usize);
            let cols = rng.random_range(1..4usize);
            let entries: Vec<u64> = (0..rows * cols).map(|_| rng.random_range(0..bound)).collect();
            let m0 = IntMatrix::new(rows, cols, entries).unwrap();
            let rt = decompose(&m0, &params).unwrap().reconstruct(&params);
            assert_eq!(rt, m0);
        }
    }
}
