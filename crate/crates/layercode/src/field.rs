//! Exact arithmetic in a prime field Z_p and dense matrices over it.
//!
//! The modulus is chosen large enough that integer-valued products of the
//! coded operands are recoverable without wraparound; see [`modulus_for_job`]
//! for the selection rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("non-invertible element")]
    NonInvertible,
    #[error("matrix dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("entry {value} is not reduced modulo {modulus}")]
    EntryOutOfRange { value: u64, modulus: u64 },
    #[error("entry count {got} does not match {rows}x{cols}")]
    BadEntryCount { rows: usize, cols: usize, got: usize },
    #[error("mixed moduli: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("no prime above {0} fits in 64 bits")]
    PrimeSearchOverflow(u128),
}

/// A prime modulus, validated at construction.
///
/// Residues are machine words; all intermediate products go through 128-bit
/// arithmetic, so any prime below 2^64 is usable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldPrime(u64);

impl FieldPrime {
    /// Wraps `p` after a deterministic Miller-Rabin primality check.
    pub fn new(p: u64) -> Result<Self, FieldError> {
        if is_prime(p) {
            Ok(FieldPrime(p))
        } else {
            Err(FieldError::NotPrime(p))
        }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let p = self.0;
        let mut s = (a % p) + (b % p);
        if s >= p {
            s -= p;
        }
        s
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        let p = self.0;
        let (a, b) = (a % p, b % p);
        if a >= b {
            a - b
        } else {
            p - (b - a)
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        let p = self.0 as u128;
        ((a as u128 % p) * (b as u128 % p) % p) as u64
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        a %= self.0;
        let mut acc = 1 % self.0;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse via Fermat's little theorem.
    pub fn inv(self, a: u64) -> Result<u64, FieldError> {
        if a.is_multiple_of(self.0) {
            return Err(FieldError::NonInvertible);
        }
        Ok(self.pow(a, self.0 - 2))
    }
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &q in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    // This witness set is sufficient for every n < 2^64.
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let f = FieldPrime(n); // used only for modular ops, no primality assumed
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Smallest prime strictly greater than `bound`.
pub fn find_prime_above(bound: u64) -> Result<FieldPrime, FieldError> {
    let mut candidate = bound
        .checked_add(1)
        .ok_or(FieldError::PrimeSearchOverflow(bound as u128))?;
    if candidate <= 2 {
        return Ok(FieldPrime(2));
    }
    if candidate.is_multiple_of(2) {
        candidate += 1;
    }
    loop {
        if is_prime(candidate) {
            return Ok(FieldPrime(candidate));
        }
        candidate = candidate
            .checked_add(2)
            .ok_or(FieldError::PrimeSearchOverflow(bound as u128))?;
    }
}

/// Selects the coding modulus for a job: the smallest prime above
/// `max(inner_dim * max_entry^2, num_tasks)`.
///
/// The first term guarantees that decoded mini-job residues equal their
/// integer values (no wraparound in any entry of the chunk product); the
/// second guarantees `num_tasks` distinct nonzero evaluation points.
pub fn modulus_for_job(inner_dim: u64, max_entry: u64, num_tasks: u64) -> Result<FieldPrime, FieldError> {
    let product_bound = (inner_dim as u128) * (max_entry as u128) * (max_entry as u128);
    let bound = product_bound.max(num_tasks as u128);
    if bound > u64::MAX as u128 {
        return Err(FieldError::PrimeSearchOverflow(bound));
    }
    find_prime_above(bound as u64)
}

/// Dense row-major matrix with entries reduced modulo a shared prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
    modulus: FieldPrime,
}

impl FieldMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        entries: Vec<u64>,
        modulus: FieldPrime,
    ) -> Result<Self, FieldError> {
        if entries.len() != rows * cols {
            return Err(FieldError::BadEntryCount {
                rows,
                cols,
                got: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|&&e| e >= modulus.get()) {
            return Err(FieldError::EntryOutOfRange {
                value: bad,
                modulus: modulus.get(),
            });
        }
        Ok(FieldMatrix {
            rows,
            cols,
            entries,
            modulus,
        })
    }

    pub fn zeros(rows: usize, cols: usize, modulus: FieldPrime) -> Self {
        FieldMatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
            modulus,
        }
    }

    pub fn identity(n: usize, modulus: FieldPrime) -> Self {
        let mut m = Self::zeros(n, n, modulus);
        for i in 0..n {
            m.entries[i * n + i] = 1 % modulus.get();
        }
        m
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
    pub fn modulus(&self) -> FieldPrime {
        self.modulus
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        debug_assert!(v < self.modulus.get());
        self.entries[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    /// Copies columns `[start, start + width)` into a new matrix.
    pub fn column_block(&self, start: usize, width: usize) -> Result<Self, FieldError> {
        if start + width > self.cols {
            return Err(FieldError::DimensionMismatch(format!(
                "column block {}..{} out of 0..{}",
                start,
                start + width,
                self.cols
            )));
        }
        let mut entries = Vec::with_capacity(self.rows * width);
        for r in 0..self.rows {
            let base = r * self.cols + start;
            entries.extend_from_slice(&self.entries[base..base + width]);
        }
        Ok(FieldMatrix {
            rows: self.rows,
            cols: width,
            entries,
            modulus: self.modulus,
        })
    }

    /// Returns a copy widened to `cols` columns, new columns zero-filled.
    pub fn pad_cols(&self, cols: usize) -> Self {
        assert!(cols >= self.cols);
        let mut out = Self::zeros(self.rows, cols, self.modulus);
        for r in 0..self.rows {
            let src = r * self.cols;
            let dst = r * cols;
            out.entries[dst..dst + self.cols].copy_from_slice(&self.entries[src..src + self.cols]);
        }
        out
    }

    /// Returns the leading `rows` x `cols` sub-matrix.
    pub fn trim(&self, rows: usize, cols: usize) -> Self {
        assert!(rows <= self.rows && cols <= self.cols);
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let base = r * self.cols;
            entries.extend_from_slice(&self.entries[base..base + cols]);
        }
        FieldMatrix {
            rows,
            cols,
            entries,
            modulus: self.modulus,
        }
    }

    /// `self + other`, entrywise mod p.
    pub fn add(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_same_shape(other)?;
        let p = self.modulus;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| p.add(a, b))
            .collect();
        Ok(FieldMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
            modulus: p,
        })
    }

    /// `self * scalar`, entrywise mod p.
    pub fn scale(&self, scalar: u64) -> Self {
        let p = self.modulus;
        FieldMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&a| p.mul(a, scalar)).collect(),
            modulus: p,
        }
    }

    /// Computes `self^T * other` mod p. The shared inner dimension is the row
    /// count of both operands; the result has shape (self.cols x other.cols).
    pub fn mat_mul_transpose(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_conformable(other)?;
        let mut out = Self::zeros(self.cols, other.cols, self.modulus);
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            // Parallelism only pays off once the output is sizeable.
            if out.entries.len() >= 4096 {
                let cols = other.cols;
                out.entries
                    .par_chunks_mut(cols)
                    .enumerate()
                    .for_each(|(i, row)| mul_transpose_row(self, other, i, row));
                return Ok(out);
            }
        }
        let cols = other.cols;
        for (i, row) in out.entries.chunks_mut(cols).enumerate() {
            mul_transpose_row(self, other, i, row);
        }
        Ok(out)
    }

    /// Single-threaded `self^T * other`, independent of the `parallel` feature.
    pub fn mat_mul_transpose_serial(&self, other: &Self) -> Result<Self, FieldError> {
        self.check_conformable(other)?;
        let mut out = Self::zeros(self.cols, other.cols, self.modulus);
        let cols = other.cols;
        for (i, row) in out.entries.chunks_mut(cols).enumerate() {
            mul_transpose_row(self, other, i, row);
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch(
                self.modulus.get(),
                other.modulus.get(),
            ));
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(FieldError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn check_conformable(&self, other: &Self) -> Result<(), FieldError> {
        if self.modulus != other.modulus {
            return Err(FieldError::ModulusMismatch(
                self.modulus.get(),
                other.modulus.get(),
            ));
        }
        if self.rows != other.rows {
            return Err(FieldError::DimensionMismatch(format!(
                "transposed product needs equal row counts, got {} and {}",
                self.rows, other.rows
            )));
        }
        Ok(())
    }
}

/// Fills row `i` of the output: out[i][j] = sum_r a[r][i] * b[r][j] mod p.
fn mul_transpose_row(a: &FieldMatrix, b: &FieldMatrix, i: usize, row: &mut [u64]) {
    let p = a.modulus.get() as u128;
    for (j, slot) in row.iter_mut().enumerate() {
        let mut acc: u128 = 0;
        for r in 0..a.rows {
            let x = a.entries[r * a.cols + i] as u128;
            let y = b.entries[r * b.cols + j] as u128;
            acc = (acc + x * y) % p;
        }
        *slot = acc as u64;
    }
}
