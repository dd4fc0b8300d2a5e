// SPDX-License-Identifier: Apache-2.0

//! Dense real linear algebra: square solves, SVD-backed pseudoinverse and
//! least squares, hat-matrix diagonal and condition estimates.
//!
//! Square systems go through a row-pivoted LU factorization written here;
//! singular value decompositions are delegated to `faer`.

use thiserror::Error;

use crate::exec;

/// Relative pivot threshold used by [`solve_square`] and [`inverse_diagonal`].
pub const PIVOT_RTOL: f64 = 1e-14;

/// Relative singular value cutoff factor: `rcut = σ_max · RCUT_FACTOR · max(rows, cols)`.
pub const RCUT_FACTOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("singular matrix: pivot {pivot:e} in column {column} below threshold {threshold:e}")]
    SingularMatrix { column: usize, pivot: f64, threshold: f64 },
    #[error("SVD did not converge within the iteration cap")]
    NoConvergence,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry in matrix or vector")]
    NonFinite,
}

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        if data.len() != rows * cols {
            return Err(NumericsError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, NumericsError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(NumericsError::DimensionMismatch("ragged rows".into()));
        }
        Self::from_row_major(r, c, rows.concat())
    }

    /// Fills an `rows x cols` matrix from `f(i, j)`; rows are built in parallel
    /// when the `parallel` feature is enabled.
    pub fn from_fn<F>(rows: usize, cols: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync + Send,
    {
        let row_data = exec::map_range(rows, |i| (0..cols).map(|j| f(i, j)).collect::<Vec<_>>());
        Self {
            rows,
            cols,
            data: row_data.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, NumericsError> {
        if self.cols != other.rows {
            return Err(NumericsError::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, NumericsError> {
        if x.len() != self.cols {
            return Err(NumericsError::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Returns a copy with row `i` removed.
    pub fn without_row(&self, i: usize) -> DenseMatrix {
        let mut data = Vec::with_capacity((self.rows - 1) * self.cols);
        for r in (0..self.rows).filter(|&r| r != i) {
            data.extend_from_slice(self.row(r));
        }
        DenseMatrix {
            rows: self.rows - 1,
            cols: self.cols,
            data,
        }
    }

    /// Returns a copy with row `i` and column `j` removed.
    pub fn without_row_col(&self, i: usize, j: usize) -> DenseMatrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for r in (0..self.rows).filter(|&r| r != i) {
            for c in (0..self.cols).filter(|&c| c != j) {
                data.push(self[(r, c)]);
            }
        }
        DenseMatrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    /// Appends one all-zero row.
    pub fn with_zero_row(&self) -> DenseMatrix {
        let mut data = self.data.clone();
        data.extend(std::iter::repeat_n(0.0, self.cols));
        DenseMatrix {
            rows: self.rows + 1,
            cols: self.cols,
            data,
        }
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Row-pivoted LU factorization `P A = L U` of a square matrix.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactors {
    /// Factorizes `a`; fails when a pivot falls below `pivot_rtol · max|A|`.
    pub fn new(a: &DenseMatrix, pivot_rtol: f64) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::DimensionMismatch(format!(
                "LU of a {}x{} matrix",
                a.rows, a.cols
            )));
        }
        let n = a.rows;
        let threshold = pivot_rtol * a.max_abs();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|r| (r, lu[r * n + k].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= threshold || pmax == 0.0 {
                return Err(NumericsError::SingularMatrix {
                    column: k,
                    pivot: pmax,
                    threshold,
                });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for c in k + 1..n {
                        lu[r * n + c] -= factor * lu[k * n + c];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let n = self.n;
        if b.len() != n {
            return Err(NumericsError::DimensionMismatch(format!(
                "rhs of length {} for a {n}x{n} system",
                b.len()
            )));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Diagonal of `A⁻¹`, one column solve per entry.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        exec::map_range(n, |j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            // dimensions match by construction
            self.solve(&e).map(|col| col[j]).unwrap_or(f64::NAN)
        })
    }
}

/// Solves a square system with row-pivoted elimination.
pub fn solve_square(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if a.rows != b.len() {
        return Err(NumericsError::DimensionMismatch(format!(
            "rhs of length {} for {} rows",
            b.len(),
            a.rows
        )));
    }
    LuFactors::new(a, PIVOT_RTOL)?.solve(b)
}

/// Diagonal of the inverse of a square matrix.
pub fn inverse_diagonal(a: &DenseMatrix) -> Result<Vec<f64>, NumericsError> {
    Ok(LuFactors::new(a, PIVOT_RTOL)?.inverse_diagonal())
}

/// Thin singular value decomposition `A = U diag(σ) Vᵀ` with σ descending.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `rows x k`, `k = min(rows, cols)`.
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    /// `cols x k`.
    pub v: DenseMatrix,
}

impl SvdFactors {
    /// `σ_max · RCUT_FACTOR · max(rows, cols)`.
    pub fn rcut(&self) -> f64 {
        let dim = self.u.rows.max(self.v.rows) as f64;
        self.sigma.first().copied().unwrap_or(0.0) * RCUT_FACTOR * dim
    }

    /// Number of singular values strictly above [`SvdFactors::rcut`].
    pub fn rank(&self) -> usize {
        let rcut = self.rcut();
        self.sigma.iter().filter(|&&s| s > rcut && s > 0.0).count()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let (m, n, k) = (self.u.rows, self.v.rows, self.sigma.len());
        DenseMatrix::from_fn(m, n, |i, j| {
            (0..k).map(|l| self.u[(i, l)] * self.sigma[l] * self.v[(j, l)]).sum()
        })
    }

    /// Moore–Penrose pseudoinverse with the [`SvdFactors::rcut`] cutoff.
    pub fn pseudoinverse(&self) -> DenseMatrix {
        let (m, n) = (self.u.rows, self.v.rows);
        let r = self.rank();
        DenseMatrix::from_fn(n, m, |i, j| {
            (0..r).map(|l| self.v[(i, l)] * self.u[(j, l)] / self.sigma[l]).sum()
        })
    }

    /// Minimum-norm least-squares solution `A⁺ b`.
    pub fn solve_least_squares(&self, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
        let (m, n) = (self.u.rows, self.v.rows);
        if b.len() != m {
            return Err(NumericsError::DimensionMismatch(format!(
                "rhs of length {} for {m} rows",
                b.len()
            )));
        }
        let r = self.rank();
        let coeffs: Vec<f64> = (0..r)
            .map(|l| (0..m).map(|i| self.u[(i, l)] * b[i]).sum::<f64>() / self.sigma[l])
            .collect();
        Ok((0..n)
            .map(|i| (0..r).map(|l| self.v[(i, l)] * coeffs[l]).sum())
            .collect())
    }

    /// `diag(U_r U_rᵀ)`, the diagonal of the orthogonal projector `A A⁺`.
    pub fn hat_diagonal(&self) -> Vec<f64> {
        let r = self.rank();
        (0..self.u.rows)
            .map(|i| (0..r).map(|l| self.u[(i, l)].powi(2)).sum())
            .collect()
    }

    /// `σ_max / σ_min`, infinite when `σ_min` falls below the cutoff.
    pub fn condition(&self) -> f64 {
        let (Some(&smax), Some(&smin)) = (self.sigma.first(), self.sigma.last()) else {
            return f64::INFINITY;
        };
        if smax == 0.0 || smin <= self.rcut() {
            f64::INFINITY
        } else {
            smax / smin
        }
    }
}

/// faer's AVX kernels can return with the upper vector register halves dirty,
/// after which every SSE instruction on this thread pays a transition penalty
/// (measured 6x on `ln`-bound loops). `vzeroupper` resets that state.
#[inline]
fn clear_upper_simd_state() {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx") {
        // SAFETY: AVX support was just checked, and no caller keeps values in
        // the upper register halves since this crate is compiled without AVX.
        unsafe { std::arch::x86_64::_mm256_zeroupper() }
    }
}

/// Thin SVD with singular values sorted in descending order.
pub fn svd(a: &DenseMatrix) -> Result<SvdFactors, NumericsError> {
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    let (m, n) = (a.rows, a.cols);
    let k = m.min(n);
    if k == 0 {
        return Ok(SvdFactors {
            u: DenseMatrix::zeros(m, 0),
            sigma: Vec::new(),
            v: DenseMatrix::zeros(n, 0),
        });
    }
    let mat = faer::Mat::<f64>::from_fn(m, n, |i, j| a[(i, j)]);
    let decomposition = mat.thin_svd();
    clear_upper_simd_state();
    let decomposition = decomposition.map_err(|_| NumericsError::NoConvergence)?;
    let (u, v) = (decomposition.U(), decomposition.V());
    let sv = decomposition.S().column_vector();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));

    let mut us = DenseMatrix::zeros(m, k);
    let mut vs = DenseMatrix::zeros(n, k);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        sigma.push(sv[src].max(0.0));
        for i in 0..m {
            us[(i, dst)] = u[(i, src)];
        }
        for j in 0..n {
            vs[(j, dst)] = v[(j, src)];
        }
    }
    Ok(SvdFactors { u: us, sigma, v: vs })
}

pub fn pseudoinverse(a: &DenseMatrix) -> Result<DenseMatrix, NumericsError> {
    Ok(svd(a)?.pseudoinverse())
}

pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, NumericsError> {
    svd(a)?.solve_least_squares(b)
}

/// Least squares for a tall matrix of full column rank via Householder QR,
/// one solution per right-hand side. Returns `None` when some `|R_ii|` falls
/// below `RCUT_FACTOR · rows · max_j |R_jj|`, leaving the caller to use the SVD.
pub fn least_squares_full_rank(a: &DenseMatrix, rhs: &[&[f64]]) -> Option<Vec<Vec<f64>>> {
    let (m, n) = (a.rows, a.cols);
    if m < n || n == 0 || rhs.iter().any(|b| b.len() != m) {
        return None;
    }
    let mut r = a.data.clone();
    let mut bs: Vec<Vec<f64>> = rhs.iter().map(|b| b.to_vec()).collect();
    for k in 0..n {
        let norm = (k..m).map(|i| r[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            return None;
        }
        let alpha = if r[k * n + k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[i * n + k]).collect();
        v[0] -= alpha;
        let vv = v.iter().map(|x| x * x).sum::<f64>();
        if vv == 0.0 {
            continue;
        }
        for j in k..n {
            let dot = (k..m).map(|i| v[i - k] * r[i * n + j]).sum::<f64>();
            let f = 2.0 * dot / vv;
            for i in k..m {
                r[i * n + j] -= f * v[i - k];
            }
        }
        for b in bs.iter_mut() {
            let dot = (k..m).map(|i| v[i - k] * b[i]).sum::<f64>();
            let f = 2.0 * dot / vv;
            for i in k..m {
                b[i] -= f * v[i - k];
            }
        }
    }
    let rmax = (0..n).map(|i| r[i * n + i].abs()).fold(0.0, f64::max);
    if (0..n).any(|i| r[i * n + i].abs() <= RCUT_FACTOR * m as f64 * rmax) {
        return None;
    }
    Some(
        bs.into_iter()
            .map(|b| {
                let mut x = vec![0.0; n];
                for i in (0..n).rev() {
                    let s = b[i] - (i + 1..n).map(|j| r[i * n + j] * x[j]).sum::<f64>();
                    x[i] = s / r[i * n + i];
                }
                x
            })
            .collect(),
    )
}

/// Diagonal of the hat matrix `H = A A⁺`.
pub fn hat_diagonal(a: &DenseMatrix) -> Result<Vec<f64>, NumericsError> {
    Ok(svd(a)?.hat_diagonal())
}

/// `σ_max / σ_min`, or `f64::INFINITY` for numerically rank-deficient input.
pub fn condition_estimate(a: &DenseMatrix) -> f64 {
    svd(a).map_or(f64::INFINITY, |f| f.condition())
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}
