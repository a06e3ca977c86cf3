//! Dense numerical kernels: SVD, spectral norm, least squares, traces of
//! inverse Gram matrices, condition numbers, and the fast Walsh-Hadamard
//! transform.
//!
//! Everything that touches an inverse Gram matrix goes through the SVD;
//! `X^T X` is never formed or inverted explicitly, since squaring the
//! condition number is exactly the instability the sketches exist to avoid.
//!
//! The SVD is a Householder QR pre-pass followed by one-sided Jacobi on the
//! triangular factor. The contract is the invariant set (orthonormality,
//! reconstruction, descending singular values), not the algorithm.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use libm::{fabs, sqrt};

/// Relative cutoff under which a singular value counts as numerically zero.
pub const RANK_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    /// Input contains NaN or infinity.
    NonFiniteInput,
    /// Operand shapes do not line up.
    DimensionMismatch { expected: (usize, usize), got: (usize, usize) },
    /// Matrix is rank deficient where full rank is required.
    Singular,
    /// Walsh-Hadamard input length is not a power of two.
    LengthNotPowerOfTwo { len: usize },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NonFiniteInput => write!(f, "matrix contains non-finite entries"),
            LinalgError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected:?}, got {got:?}")
            }
            LinalgError::Singular => write!(f, "matrix is numerically rank deficient"),
            LinalgError::LengthNotPowerOfTwo { len } => {
                write!(f, "length {len} is not a power of two")
            }
        }
    }
}

impl core::error::Error for LinalgError {}

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds from a row-major buffer; the length must be `rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (rows, cols),
                got: (data.len(), 1),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = DenseMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
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
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, other.rows),
                got: (other.rows, other.cols),
            });
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = out.row_mut(i);
            for (l, &a_il) in arow.iter().enumerate() {
                if a_il == 0.0 {
                    continue;
                }
                let brow = other.row(l);
                for j in 0..brow.len() {
                    orow[j] += a_il * brow[j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.cols, 1),
                got: (x.len(), 1),
            });
        }
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for (a, b) in self.row(i).iter().zip(x) {
                acc += a * b;
            }
            out[i] = acc;
        }
        Ok(out)
    }

    /// `A^T x` without forming the transpose.
    pub fn transpose_mul_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, 1),
                got: (x.len(), 1),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &DenseMatrix,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<DenseMatrix, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.rows, self.cols),
                got: (other.rows, other.cols),
            });
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| if fabs(v) > m { fabs(v) } else { m })
    }

    /// Stacks `self` on top of `other` (column counts must match).
    pub fn vstack(&self, other: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch {
                expected: (0, self.cols),
                got: (other.rows, other.cols),
            });
        }
        let mut data = Vec::with_capacity((self.rows + other.rows) * self.cols);
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(DenseMatrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Copy of the column range `[lo, hi)`.
    pub fn columns(&self, lo: usize, hi: usize) -> DenseMatrix {
        let w = hi - lo;
        let mut out = DenseMatrix::zeros(self.rows, w);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[lo..hi]);
        }
        out
    }
}

/// Thin SVD factors `M = U diag(sigma) V^T`.
///
/// `sigma` holds all `min(rows, cols)` singular values in descending order;
/// [`SvdFactors::rank`] applies the relative cutoff [`RANK_REL_TOL`].
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactors {
    /// Number of singular values above `sigma_max * 1e-12`.
    pub fn rank(&self) -> usize {
        if self.sigma.is_empty() {
            return 0;
        }
        let cut = self.sigma[0] * RANK_REL_TOL;
        self.sigma.iter().filter(|&&s| s > cut).count()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma.last().copied().unwrap_or(0.0)
    }

    /// `U diag(sigma) V^T`, for reconstruction checks.
    pub fn reconstruct(&self) -> DenseMatrix {
        let p = self.sigma.len();
        let mut scaled = self.u.clone();
        for i in 0..scaled.rows() {
            let r = scaled.row_mut(i);
            for j in 0..p {
                r[j] *= self.sigma[j];
            }
        }
        let vt = self.v.transpose();
        scaled.matmul(&vt).expect("factor shapes agree")
    }

    /// Minimum-norm least-squares solution of `M x ~ y` via the
    /// pseudoinverse, truncated at the numerical rank.
    pub fn solve_min_norm(&self, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if y.len() != self.u.rows() {
            return Err(LinalgError::DimensionMismatch {
                expected: (self.u.rows(), 1),
                got: (y.len(), 1),
            });
        }
        let r = self.rank();
        let uty = self.u.transpose_mul_vec(y)?;
        let mut x = vec![0.0; self.v.rows()];
        for j in 0..r {
            let c = uty[j] / self.sigma[j];
            for i in 0..self.v.rows() {
                x[i] += self.v.get(i, j) * c;
            }
        }
        Ok(x)
    }
}

/// Thin singular value decomposition.
///
/// Factors satisfy `||U^T U - I|| <= 1e-10`, descending `sigma`, and
/// reconstruction within `1e-8 * ||M||`.
pub fn svd(m: &DenseMatrix) -> Result<SvdFactors, LinalgError> {
    if !m.is_finite() {
        return Err(LinalgError::NonFiniteInput);
    }
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(SvdFactors {
            u: DenseMatrix::zeros(m.rows(), 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(m.cols(), 0),
        });
    }
    if m.rows() >= m.cols() {
        svd_tall(m)
    } else {
        let f = svd_tall(&m.transpose())?;
        Ok(SvdFactors { u: f.v, sigma: f.sigma, v: f.u })
    }
}

fn svd_tall(m: &DenseMatrix) -> Result<SvdFactors, LinalgError> {
    debug_assert!(m.rows() >= m.cols());
    if m.rows() > m.cols() {
        let (q, r) = householder_qr(m);
        let inner = jacobi_svd(&r);
        let u = q.matmul(&inner.u)?;
        Ok(SvdFactors { u, sigma: inner.sigma, v: inner.v })
    } else {
        Ok(jacobi_svd(m))
    }
}

/// Householder QR of a tall matrix; returns the thin factors
/// (`Q`: rows x cols with orthonormal columns, `R`: cols x cols).
fn householder_qr(m: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let n = m.rows();
    let d = m.cols();
    let mut a = m.clone();
    // Reflector vectors, one per column, each of length n - j.
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(d);

    for j in 0..d {
        let mut norm2 = 0.0;
        for i in j..n {
            let v = a.get(i, j);
            norm2 += v * v;
        }
        let norm = sqrt(norm2);
        let ajj = a.get(j, j);
        if norm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if ajj >= 0.0 { -norm } else { norm };
        let mut v = Vec::with_capacity(n - j);
        v.push(ajj - alpha);
        for i in (j + 1)..n {
            v.push(a.get(i, j));
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let beta = 2.0 / vnorm2;
        // Apply I - beta v v^T to the trailing columns.
        for c in j..d {
            let mut dot = 0.0;
            for (t, vi) in v.iter().enumerate() {
                dot += vi * a.get(j + t, c);
            }
            let s = beta * dot;
            for (t, vi) in v.iter().enumerate() {
                let cur = a.get(j + t, c);
                a.set(j + t, c, cur - s * vi);
            }
        }
        reflectors.push(v);
    }

    let mut r = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            r.set(i, j, a.get(i, j));
        }
    }

    // Thin Q: apply reflectors in reverse order to the first d identity columns.
    let mut q = DenseMatrix::zeros(n, d);
    for j in 0..d {
        q.set(j, j, 1.0);
    }
    for j in (0..d).rev() {
        let v = &reflectors[j];
        if v.is_empty() {
            continue;
        }
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let beta = 2.0 / vnorm2;
        for c in 0..d {
            let mut dot = 0.0;
            for (t, vi) in v.iter().enumerate() {
                dot += vi * q.get(j + t, c);
            }
            let s = beta * dot;
            for (t, vi) in v.iter().enumerate() {
                let cur = q.get(j + t, c);
                q.set(j + t, c, cur - s * vi);
            }
        }
    }
    (q, r)
}

/// One-sided Jacobi SVD of a matrix with `rows >= cols`.
fn jacobi_svd(m: &DenseMatrix) -> SvdFactors {
    let n = m.rows();
    let d = m.cols();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(d);
    let tol = 1e-15;
    let max_sweeps = 64;

    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..d.saturating_sub(1) {
            for q in (p + 1)..d {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..n {
                    let x = a.get(i, p);
                    let y = a.get(i, q);
                    app += x * x;
                    aqq += y * y;
                    apq += x * y;
                }
                if apq == 0.0 || apq * apq <= tol * tol * app * aqq {
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..n {
                    let x = a.get(i, p);
                    let y = a.get(i, q);
                    a.set(i, p, c * x - s * y);
                    a.set(i, q, s * x + c * y);
                }
                for i in 0..d {
                    let x = v.get(i, p);
                    let y = v.get(i, q);
                    v.set(i, p, c * x - s * y);
                    v.set(i, q, s * x + c * y);
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    // Column norms are the singular values.
    let mut order: Vec<usize> = (0..d).collect();
    let mut sig = vec![0.0; d];
    for j in 0..d {
        let mut s2 = 0.0;
        for i in 0..n {
            let x = a.get(i, j);
            s2 += x * x;
        }
        sig[j] = sqrt(s2);
    }
    order.sort_by(|&i, &j| sig[j].partial_cmp(&sig[i]).expect("finite norms"));

    let mut u = DenseMatrix::zeros(n, d);
    let mut vv = DenseMatrix::zeros(d, d);
    let mut sigma = Vec::with_capacity(d);
    for (new_j, &old_j) in order.iter().enumerate() {
        let s = sig[old_j];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..n {
                u.set(i, new_j, a.get(i, old_j) / s);
            }
        }
        for i in 0..d {
            vv.set(i, new_j, v.get(i, old_j));
        }
    }

    // Zero singular values leave empty U columns; complete the basis so the
    // orthonormality invariant holds for every returned factor.
    complete_orthonormal(&mut u, sigma.iter().filter(|&&s| s > 0.0).count());

    SvdFactors { u, sigma, v: vv }
}

/// Fills columns `[filled, cols)` of `u` with vectors orthonormal to the rest.
fn complete_orthonormal(u: &mut DenseMatrix, filled: usize) {
    let n = u.rows();
    let d = u.cols();
    let mut have = filled;
    let mut candidate = 0usize;
    while have < d && candidate < n {
        let mut col = vec![0.0; n];
        col[candidate] = 1.0;
        // Two rounds of Gram-Schmidt against the existing columns.
        for _ in 0..2 {
            for j in 0..have {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += col[i] * u.get(i, j);
                }
                for i in 0..n {
                    col[i] -= dot * u.get(i, j);
                }
            }
        }
        let norm = sqrt(col.iter().map(|x| x * x).sum());
        if norm > 0.5 {
            for i in 0..n {
                u.set(i, have, col[i] / norm);
            }
            have += 1;
        }
        candidate += 1;
    }
}

/// Largest singular value.
pub fn spectral_norm(m: &DenseMatrix) -> Result<f64, LinalgError> {
    Ok(svd(m)?.sigma_max())
}

/// Least squares `argmin ||X b - y||` via the SVD pseudoinverse; rank
/// deficiency yields the minimum-norm solution.
pub fn ols_solve(x: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let f = svd(x)?;
    f.solve_min_norm(y)
}

/// `trace((X^T X)^{-1}) = sum sigma_i^{-2}`, from the SVD and never by
/// explicit inversion. Errors if `X` is not of full column rank.
pub fn trace_inv_gram(x: &DenseMatrix) -> Result<f64, LinalgError> {
    let f = svd(x)?;
    if f.rank() < x.cols() {
        return Err(LinalgError::Singular);
    }
    Ok(f.sigma.iter().map(|s| 1.0 / (s * s)).sum())
}

/// Condition number `sigma_max / sigma_min` over all `min(rows, cols)`
/// singular values. Errors on numerically singular input.
pub fn condition_number(x: &DenseMatrix) -> Result<f64, LinalgError> {
    let f = svd(x)?;
    if f.rank() < f.sigma.len() {
        return Err(LinalgError::Singular);
    }
    Ok(f.sigma_max() / f.sigma_min())
}

/// In-place unnormalized fast Walsh-Hadamard transform.
///
/// Applying it twice multiplies the input by its length.
pub fn fwht(v: &mut [f64]) -> Result<(), LinalgError> {
    let n = v.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(LinalgError::LengthNotPowerOfTwo { len: n });
    }
    let mut h = 1;
    while h < n {
        let mut base = 0;
        while base < n {
            for i in base..base + h {
                let x = v[i];
                let y = v[i + h];
                v[i] = x + y;
                v[i + h] = x - y;
            }
            base += 2 * h;
        }
        h *= 2;
    }
    Ok(())
}

/// Eigendecomposition `A = V diag(lambda) V^T` of a symmetric matrix by
/// cyclic two-sided Jacobi; eigenvalues descending.
pub fn sym_eig(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix), LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::DimensionMismatch {
            expected: (a.rows(), a.rows()),
            got: (a.rows(), a.cols()),
        });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFiniteInput);
    }
    let d = a.rows();
    let mut m = a.clone();
    let mut v = DenseMatrix::identity(d);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale;

    for _ in 0..100 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in (p + 1)..d {
                let x = fabs(m.get(p, q));
                if x > off {
                    off = x;
                }
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..d.saturating_sub(1) {
            for q in (p + 1)..d {
                let apq = m.get(p, q);
                if fabs(apq) <= tol * 1e-2 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / sqrt(1.0 + t * t);
                let s = c * t;
                // Rotate rows and columns p, q of the symmetric matrix.
                for i in 0..d {
                    let mip = m.get(i, p);
                    let miq = m.get(i, q);
                    m.set(i, p, c * mip - s * miq);
                    m.set(i, q, s * mip + c * miq);
                }
                for i in 0..d {
                    let mpi = m.get(p, i);
                    let mqi = m.get(q, i);
                    m.set(p, i, c * mpi - s * mqi);
                    m.set(q, i, s * mpi + c * mqi);
                }
                for i in 0..d {
                    let vip = v.get(i, p);
                    let viq = v.get(i, q);
                    v.set(i, p, c * vip - s * viq);
                    v.set(i, q, s * vip + c * viq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let lam: Vec<f64> = (0..d).map(|i| m.get(i, i)).collect();
    order.sort_by(|&i, &j| lam[j].partial_cmp(&lam[i]).expect("finite eigenvalues"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| lam[i]).collect();
    let mut vectors = DenseMatrix::zeros(d, d);
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..d {
            vectors.set(i, new_j, v.get(i, old_j));
        }
    }
    Ok((eigenvalues, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn approx(a: f64, b: f64, tol: f64) {
        assert!(fabs(a - b) <= tol, "{a} vs {b} (tol {tol})");
    }

    /// Deterministic pseudo-random fill, independent of the rand crate.
    fn fill_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        DenseMatrix::from_fn(rows, cols, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
    }

    fn orthonormality_error(u: &DenseMatrix) -> f64 {
        let g = u.transpose().matmul(u).unwrap();
        let mut worst = 0.0f64;
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(fabs(g.get(i, j) - want));
            }
        }
        worst
    }

    #[test]
    fn svd_identity() {
        let f = svd(&DenseMatrix::identity(3)).unwrap();
        for s in &f.sigma {
            approx(*s, 1.0, 1e-14);
        }
    }

    #[test]
    fn svd_diagonal_values_sorted() {
        let m = DenseMatrix::diag(&[1.0, 3.0, 2.0]);
        let f = svd(&m).unwrap();
        assert_eq!(f.sigma.len(), 3);
        approx(f.sigma[0], 3.0, 1e-14);
        approx(f.sigma[1], 2.0, 1e-14);
        approx(f.sigma[2], 1.0, 1e-14);
    }

    #[test]
    fn svd_reconstruction_and_orthogonality() {
        for (rows, cols, seed) in [(20, 4, 1u64), (7, 7, 2), (5, 9, 3), (64, 8, 4)] {
            let m = fill_matrix(rows, cols, seed);
            let f = svd(&m).unwrap();
            let recon = f.reconstruct();
            let err = recon.sub(&m).unwrap().frobenius_norm();
            assert!(err <= 1e-8 * m.frobenius_norm().max(1.0), "{rows}x{cols}: {err}");
            assert!(orthonormality_error(&f.u) <= 1e-10);
            assert!(orthonormality_error(&f.v) <= 1e-10);
            for w in f.sigma.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn svd_zero_and_rank_deficient() {
        let z = DenseMatrix::zeros(6, 3);
        let f = svd(&z).unwrap();
        assert_eq!(f.rank(), 0);
        assert!(orthonormality_error(&f.u) <= 1e-12);

        // Rank-1 matrix.
        let m = DenseMatrix::from_fn(8, 4, |i, j| (i as f64 + 1.0) * (j as f64 + 1.0));
        let f = svd(&m).unwrap();
        assert_eq!(f.rank(), 1);
        assert!(orthonormality_error(&f.u) <= 1e-10);
    }

    #[test]
    fn svd_rejects_non_finite() {
        let mut m = DenseMatrix::zeros(2, 2);
        m.set(0, 0, f64::NAN);
        assert!(matches!(svd(&m), Err(LinalgError::NonFiniteInput)));
    }

    #[test]
    fn spectral_norm_matches_power_iteration_oracle() {
        let m = fill_matrix(6, 3, 11);
        // Power iteration on M^T M as an independent oracle.
        let mut x = vec![1.0; 3];
        for _ in 0..2000 {
            let y = m.mul_vec(&x).unwrap();
            let z = m.transpose_mul_vec(&y).unwrap();
            let norm = sqrt(z.iter().map(|v| v * v).sum::<f64>());
            x = z.iter().map(|v| v / norm).collect();
        }
        let y = m.mul_vec(&x).unwrap();
        let oracle = sqrt(y.iter().map(|v| v * v).sum::<f64>());
        approx(spectral_norm(&m).unwrap(), oracle, 1e-9);
    }

    #[test]
    fn spectral_norm_trivial_cases() {
        approx(spectral_norm(&DenseMatrix::identity(4)).unwrap(), 1.0, 1e-14);
        approx(spectral_norm(&DenseMatrix::diag(&[5.0, 1.0])).unwrap(), 5.0, 1e-14);
    }

    #[test]
    fn ols_identity_and_mean() {
        let y = vec![2.0, -1.0, 0.5];
        let g = ols_solve(&DenseMatrix::identity(3), &y).unwrap();
        for (a, b) in g.iter().zip(&y) {
            approx(*a, *b, 1e-12);
        }

        let x = DenseMatrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        let g = ols_solve(&x, &[1.0, 3.0]).unwrap();
        approx(g[0], 2.0, 1e-12);
    }

    #[test]
    fn ols_matches_qr_oracle_and_normal_residual() {
        // Independent oracle: solve the 5x5 normal equations of a random
        // 50x5 system by Gaussian elimination.
        let x = fill_matrix(50, 5, 21);
        let ytrue = fill_matrix(50, 1, 22);
        let y: Vec<f64> = ytrue.data().to_vec();

        let xtx = x.transpose().matmul(&x).unwrap();
        let xty = x.transpose_mul_vec(&y).unwrap();
        let oracle = gauss_solve(&xtx, &xty);

        let g = ols_solve(&x, &y).unwrap();
        for (a, b) in g.iter().zip(&oracle) {
            approx(*a, *b, 1e-9);
        }

        // Residual orthogonality: ||X^T (X g - y)|| <= 1e-8 ||X|| ||y||.
        let r: Vec<f64> = x
            .mul_vec(&g)
            .unwrap()
            .iter()
            .zip(&y)
            .map(|(a, b)| a - b)
            .collect();
        let xtr = x.transpose_mul_vec(&r).unwrap();
        let lhs = sqrt(xtr.iter().map(|v| v * v).sum::<f64>());
        let xnorm = spectral_norm(&x).unwrap();
        let ynorm = sqrt(y.iter().map(|v| v * v).sum::<f64>());
        assert!(lhs <= 1e-8 * xnorm * ynorm);
    }

    fn gauss_solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.rows();
        let mut m = a.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if fabs(m.get(r, col)) > fabs(m.get(piv, col)) {
                    piv = r;
                }
            }
            for j in 0..n {
                let tmp = m.get(col, j);
                m.set(col, j, m.get(piv, j));
                m.set(piv, j, tmp);
            }
            rhs.swap(col, piv);
            let p = m.get(col, col);
            for r in col + 1..n {
                let f = m.get(r, col) / p;
                for j in col..n {
                    let v = m.get(r, j) - f * m.get(col, j);
                    m.set(r, j, v);
                }
                rhs[r] -= f * rhs[col];
            }
        }
        let mut x = vec![0.0; n];
        for col in (0..n).rev() {
            let mut acc = rhs[col];
            for j in col + 1..n {
                acc -= m.get(col, j) * x[j];
            }
            x[col] = acc / m.get(col, col);
        }
        x
    }

    #[test]
    fn trace_inv_gram_diag_and_oracle() {
        approx(trace_inv_gram(&DenseMatrix::identity(4)).unwrap(), 4.0, 1e-12);
        approx(trace_inv_gram(&DenseMatrix::diag(&[2.0, 1.0])).unwrap(), 1.25, 1e-12);

        // Random 30x3 against explicit inverse of the tiny Gram matrix.
        let x = fill_matrix(30, 3, 31);
        let g = x.transpose().matmul(&x).unwrap();
        let mut inv_trace = 0.0;
        for col in 0..3 {
            let mut e = vec![0.0; 3];
            e[col] = 1.0;
            let sol = gauss_solve(&g, &e);
            inv_trace += sol[col];
        }
        let got = trace_inv_gram(&x).unwrap();
        assert!(fabs(got - inv_trace) <= 1e-8 * inv_trace);
    }

    #[test]
    fn trace_inv_gram_rejects_rank_deficient() {
        let m = DenseMatrix::from_fn(5, 2, |i, _| i as f64);
        assert_eq!(trace_inv_gram(&m), Err(LinalgError::Singular));
    }

    #[test]
    fn condition_number_cases() {
        approx(condition_number(&DenseMatrix::identity(5)).unwrap(), 1.0, 1e-12);
        approx(condition_number(&DenseMatrix::diag(&[10.0, 1.0])).unwrap(), 10.0, 1e-12);

        // kappa(X^T X) = kappa(X)^2.
        let x = fill_matrix(12, 4, 41);
        let kx = condition_number(&x).unwrap();
        let kg = condition_number(&x.transpose().matmul(&x).unwrap()).unwrap();
        assert!(fabs(kg - kx * kx) <= 1e-6 * kx * kx);
    }

    #[test]
    fn fwht_trivial_vectors() {
        let mut v = [1.0, 0.0, 0.0, 0.0];
        fwht(&mut v).unwrap();
        assert_eq!(v, [1.0, 1.0, 1.0, 1.0]);

        let mut v = [1.0, 1.0, 1.0, 1.0];
        fwht(&mut v).unwrap();
        assert_eq!(v, [4.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fwht_matches_popcount_hadamard_oracle() {
        let n = 8usize;
        let m = fill_matrix(n, 1, 51);
        let x: Vec<f64> = m.data().to_vec();
        let mut fast = x.clone();
        fwht(&mut fast).unwrap();
        for r in 0..n {
            let mut acc = 0.0;
            for c in 0..n {
                let sign = if (r & c).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * x[c];
            }
            approx(fast[r], acc, 1e-12);
        }
    }

    #[test]
    fn fwht_involution_up_to_scale() {
        for p in 0..=12u32 {
            let n = 1usize << p;
            let orig = fill_matrix(n, 1, 60 + p as u64).data().to_vec();
            let mut v = orig.clone();
            fwht(&mut v).unwrap();
            fwht(&mut v).unwrap();
            for (a, b) in v.iter().zip(&orig) {
                assert!(fabs(a - b * n as f64) <= 1e-9 * n as f64);
            }
        }
    }

    #[test]
    fn fwht_rejects_bad_length() {
        let mut v = [1.0, 2.0, 3.0];
        assert!(matches!(fwht(&mut v), Err(LinalgError::LengthNotPowerOfTwo { len: 3 })));
    }

    #[test]
    fn sym_eig_recovers_spectrum() {
        let q = svd(&fill_matrix(5, 5, 71)).unwrap().u;
        let lam = [9.0, 4.0, 1.0, 0.5, 0.1];
        let a = q.matmul(&DenseMatrix::diag(&lam)).unwrap().matmul(&q.transpose()).unwrap();
        let (eig, vecs) = sym_eig(&a).unwrap();
        for (g, w) in eig.iter().zip(&lam) {
            approx(*g, *w, 1e-10);
        }
        // V diag(eig) V^T reconstructs A.
        let recon = vecs
            .matmul(&DenseMatrix::diag(&eig))
            .unwrap()
            .matmul(&vecs.transpose())
            .unwrap();
        assert!(recon.sub(&a).unwrap().frobenius_norm() <= 1e-9);
    }
}
