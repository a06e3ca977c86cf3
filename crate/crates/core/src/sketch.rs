//! Oblivious subspace-embedding sketches as single-pass, mergeable,
//! turnstile-capable builders.
//!
//! A builder accumulates `P * [X, Y]` for an implicit `k x n` sketching
//! matrix `P` defined entirely by `(method, seed, k, m)`:
//!
//! - [`SketchMethod::Rad`]: dense sign matrix, entries `+-1` from the 4-wise
//!   family, rescaled by `1/sqrt(k)` at finalisation. Strongest reduction,
//!   `O(k * d)` work per row.
//! - [`SketchMethod::Srht`]: subsampled randomized Hadamard transform
//!   `P = R H_m D` with `m` the smallest power of two at or above the row
//!   hint. Entries are evaluated on demand via
//!   `H[r, c] = (-1)^popcount(r & c)`, or block-transformed with the FWHT
//!   when rows arrive in order (see [`SketchBuilder::set_srht_block_size`]).
//! - [`SketchMethod::Cw`]: input-sparsity-time bucket sketch `P = Phi D`;
//!   each row lands in one of `k` (power of two) buckets with a random sign.
//!   `O(d)` per row, unscaled.
//! - [`SketchMethod::Gram`]: the `[X, Y]^T [X, Y]` baseline. Exact but
//!   data-dependent, so it is neither oblivious nor turnstile-capable; it
//!   exists to demonstrate the conditioning blow-up the embeddings avoid.
//!
//! Linearity of the first three means disjoint row ranges can be sketched in
//! parallel with a shared seed and merged by elementwise addition, and entry
//! updates `(i, j, u)` can arrive in any order, including deletions.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::{ceil, log, sqrt};

use crate::hashing::{HashError, SketchSeed, MERSENNE_P};
use crate::linalg::DenseMatrix;

/// Default block size for the SRHT fast-transform path.
pub const DEFAULT_SRHT_BLOCK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchMethod {
    /// Dense Rademacher sign matrix.
    Rad,
    /// Subsampled randomized Hadamard transform.
    Srht,
    /// Clarkson-Woodruff bucket sketch.
    Cw,
    /// `[X,Y]^T [X,Y]` baseline (not an embedding).
    Gram,
}

impl SketchMethod {
    /// Stable one-byte tag used in the sketch file format.
    pub fn tag(self) -> u8 {
        match self {
            SketchMethod::Rad => 0,
            SketchMethod::Srht => 1,
            SketchMethod::Cw => 2,
            SketchMethod::Gram => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<SketchMethod> {
        match tag {
            0 => Some(SketchMethod::Rad),
            1 => Some(SketchMethod::Srht),
            2 => Some(SketchMethod::Cw),
            3 => Some(SketchMethod::Gram),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SketchMethod::Rad => "rad",
            SketchMethod::Srht => "srht",
            SketchMethod::Cw => "cw",
            SketchMethod::Gram => "gram",
        }
    }
}

impl fmt::Display for SketchMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How [`target_dimension`] picks `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizingPolicy {
    /// Constants calibrated empirically: `k = ceil(D ln D / eps^2)` for the
    /// dense methods (with `D` whatever column count the caller supplies)
    /// and the smallest power of two strictly above `D^2 / (20 eps^2)` for
    /// the bucket sketch. `alpha` is accepted but does not enter.
    #[default]
    Empirical,
    /// The worst-case formulas with constants set to one:
    /// `ceil((D + ln(1/alpha)) / eps^2)` for the sign matrix,
    /// `ceil(D ln(D/alpha) / eps^2)` for the transform, and the power of two
    /// strictly above `D^2 / (eps^2 alpha)` for the bucket sketch.
    AlphaStrict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SketchError {
    EpsilonOutOfRange { epsilon: f64 },
    AlphaOutOfRange { alpha: f64 },
    ZeroDimension,
    TargetDimensionZero,
    CwRequiresPowerOfTwoK { k: usize },
    SrhtRequiresRowHint,
    /// Row index exceeds what the configuration can address
    /// (`m` for the SRHT, the hash field for the sign matrix).
    RowOutOfRange { row: u64, limit: u64 },
    RowLengthMismatch { expected: usize, got: usize },
    ColumnOutOfRange { col: usize, d_total: usize },
    /// Turnstile updates are undefined for the data-dependent Gram baseline.
    TurnstileUnsupported { method: SketchMethod },
    /// The Gram baseline has no data-independent matrix to materialise.
    NotOblivious { method: SketchMethod },
    MergeIncompatible { field: &'static str },
    BlockSizeNotPowerOfTwo { block: usize },
    BlockModeUnavailable { method: SketchMethod },
    Hash(HashError),
}

impl fmt::Display for SketchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SketchError::EpsilonOutOfRange { epsilon } => {
                write!(f, "epsilon {epsilon} outside (0, 1/2]")
            }
            SketchError::AlphaOutOfRange { alpha } => write!(f, "alpha {alpha} outside (0, 1/2]"),
            SketchError::ZeroDimension => write!(f, "total column count must be at least 1"),
            SketchError::TargetDimensionZero => write!(f, "target dimension k must be at least 1"),
            SketchError::CwRequiresPowerOfTwoK { k } => {
                write!(f, "bucket sketch needs power-of-two k, got {k}")
            }
            SketchError::SrhtRequiresRowHint => {
                write!(f, "the Hadamard sketch needs an upper bound on the row count (n_hint)")
            }
            SketchError::RowOutOfRange { row, limit } => {
                write!(f, "row index {row} exceeds addressable limit {limit}")
            }
            SketchError::RowLengthMismatch { expected, got } => {
                write!(f, "row has {got} entries, builder expects {expected}")
            }
            SketchError::ColumnOutOfRange { col, d_total } => {
                write!(f, "column {col} out of range for d_total {d_total}")
            }
            SketchError::TurnstileUnsupported { method } => {
                write!(f, "{method} sketch cannot apply turnstile updates")
            }
            SketchError::NotOblivious { method } => {
                write!(f, "{method} sketch has no data-independent matrix")
            }
            SketchError::MergeIncompatible { field } => {
                write!(f, "builders differ in {field}; refusing to merge")
            }
            SketchError::BlockSizeNotPowerOfTwo { block } => {
                write!(f, "block size {block} is not a power of two")
            }
            SketchError::BlockModeUnavailable { method } => {
                write!(f, "block mode only applies to the srht sketch, not {method}")
            }
            SketchError::Hash(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SketchError {}

impl From<HashError> for SketchError {
    fn from(e: HashError) -> Self {
        SketchError::Hash(e)
    }
}

/// One additive entry update in the turnstile stream: `X[row, col] += value`.
/// Column `d_total - 1` addresses the response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateTriple {
    pub row: u64,
    pub col: usize,
    pub value: f64,
}

/// Sketch size for a requested distortion.
///
/// For the dense methods the caller decides what the column count `d_total`
/// includes (intercept, response); the formula is applied as given. For the
/// bucket sketch `d_total` is the plain variable count. `alpha` is validated
/// and recorded by callers but only enters under
/// [`SizingPolicy::AlphaStrict`].
pub fn target_dimension(
    method: SketchMethod,
    d_total: usize,
    epsilon: f64,
    alpha: f64,
) -> Result<usize, SketchError> {
    target_dimension_with(method, d_total, epsilon, alpha, SizingPolicy::Empirical)
}

pub fn target_dimension_with(
    method: SketchMethod,
    d_total: usize,
    epsilon: f64,
    alpha: f64,
    policy: SizingPolicy,
) -> Result<usize, SketchError> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(SketchError::EpsilonOutOfRange { epsilon });
    }
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(SketchError::AlphaOutOfRange { alpha });
    }
    if d_total == 0 {
        return Err(SketchError::ZeroDimension);
    }
    let d = d_total as f64;
    let e2 = epsilon * epsilon;
    let k = match (method, policy) {
        (SketchMethod::Gram, _) => d_total,
        (SketchMethod::Rad, SizingPolicy::Empirical)
        | (SketchMethod::Srht, SizingPolicy::Empirical) => ceil(d * log(d) / e2) as usize,
        (SketchMethod::Rad, SizingPolicy::AlphaStrict) => {
            ceil((d + log(1.0 / alpha)) / e2) as usize
        }
        (SketchMethod::Srht, SizingPolicy::AlphaStrict) => ceil(d * log(d / alpha) / e2) as usize,
        (SketchMethod::Cw, SizingPolicy::Empirical) => next_pow2_above(d * d / (20.0 * e2)),
        (SketchMethod::Cw, SizingPolicy::AlphaStrict) => next_pow2_above(d * d / (e2 * alpha)),
    };
    Ok(k.max(1))
}

/// Smallest power of two strictly greater than `x`.
fn next_pow2_above(x: f64) -> usize {
    let mut p = 1usize;
    while p as f64 <= x {
        p <<= 1;
    }
    p
}

/// Smallest power of two at or above `n`.
fn next_pow2_at_least(n: u64) -> u64 {
    let mut p = 1u64;
    while p < n {
        p <<= 1;
    }
    p
}

#[derive(Debug, Clone)]
struct SrhtState {
    /// Sampled Hadamard row index for each sketch row.
    sampled: Vec<u64>,
    /// Power-of-two block size for the FWHT path; 0 means per-row entries.
    block_size: usize,
    /// Sign-premultiplied rows of the block currently being filled.
    buffer: DenseMatrix,
    /// Which block the buffer covers.
    buffer_block: u64,
    buffer_dirty: bool,
}

/// Incremental accumulator for one sketch: holds the method, dimensions,
/// seed and the `k x d_total` accumulated matrix. The accumulator is exactly
/// `P * (data seen so far)` at all times; configuration and memory footprint
/// never depend on the data values.
#[derive(Debug, Clone)]
pub struct SketchBuilder {
    method: SketchMethod,
    d_total: usize,
    k: usize,
    seed: SketchSeed,
    /// Hadamard dimension; 0 for every other method.
    m: u64,
    n_hint: Option<u64>,
    acc: DenseMatrix,
    rows_seen: u64,
    srht: Option<SrhtState>,
}

impl SketchBuilder {
    /// Creates an empty builder.
    ///
    /// `k` must be a power of two for the bucket sketch; the Hadamard sketch
    /// additionally needs `n_hint`, an upper bound on the global row count,
    /// which fixes the transform size `m` (smallest power of two at or above
    /// the hint). The Gram baseline ignores `k` and accumulates a
    /// `d_total x d_total` matrix.
    pub fn new(
        method: SketchMethod,
        d_total: usize,
        k: usize,
        n_hint: Option<u64>,
        seed: SketchSeed,
    ) -> Result<Self, SketchError> {
        if d_total == 0 {
            return Err(SketchError::ZeroDimension);
        }
        if method != SketchMethod::Gram && k == 0 {
            return Err(SketchError::TargetDimensionZero);
        }
        let mut m = 0u64;
        let mut srht = None;
        match method {
            SketchMethod::Cw => {
                if !k.is_power_of_two() {
                    return Err(SketchError::CwRequiresPowerOfTwoK { k });
                }
            }
            SketchMethod::Srht => {
                let hint = n_hint.ok_or(SketchError::SrhtRequiresRowHint)?;
                if hint == 0 {
                    return Err(SketchError::SrhtRequiresRowHint);
                }
                m = next_pow2_at_least(hint);
                let mut sampled = Vec::with_capacity(k);
                for r in 0..k {
                    sampled.push(seed.bucket2(r as u64, m)?);
                }
                srht = Some(SrhtState {
                    sampled,
                    block_size: 0,
                    buffer: DenseMatrix::zeros(0, 0),
                    buffer_block: 0,
                    buffer_dirty: false,
                });
            }
            SketchMethod::Rad | SketchMethod::Gram => {}
        }
        let acc_rows = if method == SketchMethod::Gram { d_total } else { k };
        Ok(SketchBuilder {
            method,
            d_total,
            k: acc_rows,
            seed,
            m,
            n_hint,
            acc: DenseMatrix::zeros(acc_rows, d_total),
            rows_seen: 0,
            srht,
        })
    }

    pub fn method(&self) -> SketchMethod {
        self.method
    }

    pub fn d_total(&self) -> usize {
        self.d_total
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> SketchSeed {
        self.seed
    }

    /// Hadamard dimension, 0 unless this is an SRHT builder.
    pub fn hadamard_dim(&self) -> u64 {
        self.m
    }

    pub fn n_hint(&self) -> Option<u64> {
        self.n_hint
    }

    pub fn rows_seen(&self) -> u64 {
        self.rows_seen
    }

    /// Switches the SRHT builder to the blocked fast-transform path: rows
    /// are buffered in aligned blocks of `block` (a power of two) and each
    /// block is applied with one FWHT per column instead of `k` Hadamard
    /// entries per row. The resulting sketch is the same matrix product, so
    /// results agree with the per-row path to rounding error. `block = 0`
    /// returns to per-row mode.
    pub fn set_srht_block_size(&mut self, block: usize) -> Result<(), SketchError> {
        let m = self.m;
        match self.srht.as_mut() {
            None => Err(SketchError::BlockModeUnavailable { method: self.method }),
            Some(state) => {
                if block != 0 && !block.is_power_of_two() {
                    return Err(SketchError::BlockSizeNotPowerOfTwo { block });
                }
                flush_block(&mut self.acc, state);
                if block == 0 {
                    state.block_size = 0;
                    state.buffer = DenseMatrix::zeros(0, 0);
                } else {
                    let clamped = (block as u64).min(m) as usize;
                    state.block_size = clamped;
                    state.buffer = DenseMatrix::zeros(clamped, self.d_total);
                }
                state.buffer_dirty = false;
                Ok(())
            }
        }
    }

    /// Adds one data row with global index `i`:
    /// `acc += (column i of P) outer row`.
    pub fn push_row(&mut self, i: u64, row: &[f64]) -> Result<(), SketchError> {
        if row.len() != self.d_total {
            return Err(SketchError::RowLengthMismatch {
                expected: self.d_total,
                got: row.len(),
            });
        }
        match self.method {
            SketchMethod::Rad => {
                let base = self.rad_base(i)?;
                let mut signs = self.seed.sign_run(base);
                for r in 0..self.k {
                    let s = signs.next_sign();
                    let acc_row = self.acc.row_mut(r);
                    for (a, x) in acc_row.iter_mut().zip(row) {
                        *a += s * x;
                    }
                }
            }
            SketchMethod::Srht => {
                self.check_srht_row(i)?;
                let sign_d = self.seed.sign4_unchecked(i) as f64;
                let state = self.srht.as_mut().expect("srht state present");
                if state.block_size > 0 {
                    let block = i / state.block_size as u64;
                    if state.buffer_dirty && block != state.buffer_block {
                        flush_block(&mut self.acc, state);
                    }
                    if !state.buffer_dirty {
                        state.buffer_block = block;
                        state.buffer.data_mut().fill(0.0);
                        state.buffer_dirty = true;
                    }
                    let local = (i % state.block_size as u64) as usize;
                    for (b, x) in state.buffer.row_mut(local).iter_mut().zip(row) {
                        *b += sign_d * x;
                    }
                } else {
                    for r in 0..self.k {
                        let c = sign_d * hadamard_sign(state.sampled[r], i);
                        let acc_row = self.acc.row_mut(r);
                        for (a, x) in acc_row.iter_mut().zip(row) {
                            *a += c * x;
                        }
                    }
                }
            }
            SketchMethod::Cw => {
                self.check_sign_index(i)?;
                let bucket = self.seed.bucket2_unchecked(i, self.k as u64) as usize;
                let s = self.seed.sign4_unchecked(i) as f64;
                let acc_row = self.acc.row_mut(bucket);
                for (a, x) in acc_row.iter_mut().zip(row) {
                    *a += s * x;
                }
            }
            SketchMethod::Gram => {
                for a in 0..self.d_total {
                    let xa = row[a];
                    if xa == 0.0 {
                        continue;
                    }
                    let acc_row = self.acc.row_mut(a);
                    for (v, x) in acc_row.iter_mut().zip(row) {
                        *v += xa * x;
                    }
                }
            }
        }
        self.rows_seen += 1;
        Ok(())
    }

    /// Pushes every row of `data`, assigning global indices
    /// `first_index, first_index + 1, ...` in order.
    pub fn push_matrix(&mut self, first_index: u64, data: &DenseMatrix) -> Result<(), SketchError> {
        for i in 0..data.rows() {
            self.push_row(first_index + i as u64, data.row(i))?;
        }
        Ok(())
    }

    /// Applies one turnstile update; equivalent to pushing a row whose only
    /// nonzero entry is `value` at `col`.
    pub fn push_update(&mut self, t: UpdateTriple) -> Result<(), SketchError> {
        if t.col >= self.d_total {
            return Err(SketchError::ColumnOutOfRange { col: t.col, d_total: self.d_total });
        }
        match self.method {
            SketchMethod::Gram => {
                return Err(SketchError::TurnstileUnsupported { method: self.method })
            }
            SketchMethod::Rad => {
                let base = self.rad_base(t.row)?;
                let mut signs = self.seed.sign_run(base);
                for r in 0..self.k {
                    self.acc.row_mut(r)[t.col] += signs.next_sign() * t.value;
                }
            }
            SketchMethod::Srht => {
                self.check_srht_row(t.row)?;
                let sign_d = self.seed.sign4_unchecked(t.row) as f64;
                let state = self.srht.as_mut().expect("srht state present");
                let in_buffer = state.block_size > 0
                    && state.buffer_dirty
                    && t.row / state.block_size as u64 == state.buffer_block;
                if in_buffer {
                    let local = (t.row % state.block_size as u64) as usize;
                    state.buffer.row_mut(local)[t.col] += sign_d * t.value;
                } else {
                    for r in 0..self.k {
                        let h = hadamard_sign(state.sampled[r], t.row);
                        self.acc.row_mut(r)[t.col] += sign_d * h * t.value;
                    }
                }
            }
            SketchMethod::Cw => {
                self.check_sign_index(t.row)?;
                let bucket = self.seed.bucket2_unchecked(t.row, self.k as u64) as usize;
                let s = self.seed.sign4_unchecked(t.row) as f64;
                self.acc.row_mut(bucket)[t.col] += s * t.value;
            }
        }
        Ok(())
    }

    /// Combines two sketches of disjoint parts of the same stream. Requires
    /// identical configuration; the accumulators add elementwise.
    pub fn merge(mut self, mut other: SketchBuilder) -> Result<SketchBuilder, SketchError> {
        if self.method != other.method {
            return Err(SketchError::MergeIncompatible { field: "method" });
        }
        if self.k != other.k {
            return Err(SketchError::MergeIncompatible { field: "k" });
        }
        if self.d_total != other.d_total {
            return Err(SketchError::MergeIncompatible { field: "d_total" });
        }
        if self.m != other.m {
            return Err(SketchError::MergeIncompatible { field: "m" });
        }
        if self.seed.master() != other.seed.master() {
            return Err(SketchError::MergeIncompatible { field: "seed" });
        }
        self.flush_pending();
        other.flush_pending();
        for (a, b) in self.acc.data_mut().iter_mut().zip(other.acc.data()) {
            *a += *b;
        }
        self.rows_seen += other.rows_seen;
        Ok(self)
    }

    /// The sketch accumulated so far: `(1/sqrt(k))`-rescaled for the two
    /// dense embeddings, unscaled for the bucket sketch and the Gram
    /// baseline.
    pub fn finalize(&mut self) -> DenseMatrix {
        self.flush_pending();
        match self.method {
            SketchMethod::Rad | SketchMethod::Srht => self.acc.scaled(1.0 / sqrt(self.k as f64)),
            SketchMethod::Cw | SketchMethod::Gram => self.acc.clone(),
        }
    }

    fn flush_pending(&mut self) {
        if let Some(state) = self.srht.as_mut() {
            flush_block(&mut self.acc, state);
        }
    }

    /// First sign index of row `i` in the dense sign matrix; the matrix is
    /// laid out column-by-column in the 4-wise family's index space.
    fn rad_base(&self, i: u64) -> Result<u64, SketchError> {
        let k = self.k as u64;
        let limit = (MERSENNE_P - 1) / k;
        if i > limit {
            return Err(SketchError::RowOutOfRange { row: i, limit });
        }
        Ok(i * k)
    }

    fn check_srht_row(&self, i: u64) -> Result<(), SketchError> {
        if i >= self.m {
            return Err(SketchError::RowOutOfRange { row: i, limit: self.m });
        }
        Ok(())
    }

    fn check_sign_index(&self, i: u64) -> Result<(), SketchError> {
        if i >= MERSENNE_P {
            return Err(SketchError::RowOutOfRange { row: i, limit: MERSENNE_P });
        }
        Ok(())
    }
}

/// Applies the buffered SRHT block: one FWHT per column, then one scaled add
/// per sampled row. For block base `b` and Hadamard index
/// `t = t_hi * B + t_lo`, the entry factorises as
/// `H_m[t, b*B + c] = (-1)^popcount(t_hi & b) * H_B[t_lo, c]`,
/// so the length-B transform of the block provides every needed value.
fn flush_block(acc: &mut DenseMatrix, state: &mut SrhtState) {
    if !state.buffer_dirty || state.block_size == 0 {
        return;
    }
    let bsize = state.block_size;
    let d = state.buffer.cols();
    let mut scratch = vec![0.0; bsize];
    for j in 0..d {
        for i in 0..bsize {
            scratch[i] = state.buffer.get(i, j);
        }
        crate::linalg::fwht(&mut scratch).expect("block size is a power of two");
        for i in 0..bsize {
            state.buffer.set(i, j, scratch[i]);
        }
    }
    let shift = bsize.trailing_zeros();
    let mask = (bsize - 1) as u64;
    for (r, &t) in state.sampled.iter().enumerate() {
        let t_lo = (t & mask) as usize;
        let t_hi = t >> shift;
        let s = if (t_hi & state.buffer_block).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let src = state.buffer.row(t_lo);
        let dst = acc.row_mut(r);
        for (a, x) in dst.iter_mut().zip(src) {
            *a += s * x;
        }
    }
    state.buffer_dirty = false;
}

#[inline]
fn hadamard_sign(r: u64, c: u64) -> f64 {
    if (r & c).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The explicit `k x n` sketching matrix implied by `(method, seed, k, m)`,
/// scaled exactly as [`SketchBuilder::finalize`] scales its output, so that
/// `finalize(stream of rows of A) == materialize(..) * A`. Intended for
/// verification and small data; the whole point of the builders is never to
/// form this matrix at scale. The Gram baseline is data-dependent and cannot
/// be materialised.
pub fn materialize(
    method: SketchMethod,
    seed: SketchSeed,
    k: usize,
    n: u64,
    n_hint: Option<u64>,
) -> Result<DenseMatrix, SketchError> {
    if k == 0 {
        return Err(SketchError::TargetDimensionZero);
    }
    let n_us = n as usize;
    match method {
        SketchMethod::Rad => {
            let scale = 1.0 / sqrt(k as f64);
            let mut p = DenseMatrix::zeros(k, n_us);
            let limit = (MERSENNE_P - 1) / k as u64;
            for i in 0..n {
                if i > limit {
                    return Err(SketchError::RowOutOfRange { row: i, limit });
                }
                let base = i * k as u64;
                for r in 0..k {
                    let s = seed.sign4_unchecked(base + r as u64) as f64;
                    p.set(r, i as usize, s * scale);
                }
            }
            Ok(p)
        }
        SketchMethod::Srht => {
            let hint = n_hint.ok_or(SketchError::SrhtRequiresRowHint)?;
            let m = next_pow2_at_least(hint.max(1));
            if n > m {
                return Err(SketchError::RowOutOfRange { row: n, limit: m });
            }
            let scale = 1.0 / sqrt(k as f64);
            let mut p = DenseMatrix::zeros(k, n_us);
            for r in 0..k {
                let t = seed.bucket2(r as u64, m)?;
                for i in 0..n {
                    let s = seed.sign4(i)? as f64;
                    p.set(r, i as usize, scale * s * hadamard_sign(t, i));
                }
            }
            Ok(p)
        }
        SketchMethod::Cw => {
            if !k.is_power_of_two() {
                return Err(SketchError::CwRequiresPowerOfTwoK { k });
            }
            let mut p = DenseMatrix::zeros(k, n_us);
            for i in 0..n {
                let bucket = seed.bucket2(i, k as u64)? as usize;
                let s = seed.sign4(i)? as f64;
                p.set(bucket, i as usize, s);
            }
            Ok(p)
        }
        SketchMethod::Gram => Err(SketchError::NotOblivious { method }),
    }
}

/// The Gram baseline in its reporting shape: for data `[X, Y]` with
/// `d = d_total - 1` variable columns, returns `X^T [X, Y]` assembled as the
/// sum of rank-one terms `x_i^T [x_i, y_i]`, a `d x d_total` matrix.
pub fn gram_sketch(data: &DenseMatrix) -> DenseMatrix {
    let d_total = data.cols();
    let d = d_total.saturating_sub(1);
    let mut out = DenseMatrix::zeros(d, d_total);
    for i in 0..data.rows() {
        let row = data.row(i);
        for a in 0..d {
            let xa = row[a];
            if xa == 0.0 {
                continue;
            }
            let dst = out.row_mut(a);
            for (v, x) in dst.iter_mut().zip(row) {
                *v += xa * x;
            }
        }
    }
    out
}
