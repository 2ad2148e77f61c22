//! Small dense real linear algebra for symmetric systems.
//!
//! Everything here is sized for `d <= 64`: contexts and parameters are
//! [`Vector`]s, second-moment matrices are [`SymMat`]s stored as a packed
//! upper triangle so that `M[i][j] == M[j][i]` holds structurally.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cholesky pivots at or below this value are treated as singular.
pub const PIVOT_TOL: f64 = 1e-12;

/// Relative threshold on the off-diagonal Frobenius norm ending the Jacobi sweeps.
pub const JACOBI_OFF_TOL: f64 = 1e-12;

/// Default relative cutoff separating zero modes from round-off.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

/// A dense real vector with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector (0-based).
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * s).collect())
    }

    /// `self += s * x`
    pub fn axpy(&mut self, s: f64, x: &Vector) -> Result<()> {
        check_dim(self.dim(), x.dim())?;
        for (a, b) in self.0.iter_mut().zip(&x.0) {
            *a += s * b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Real symmetric matrix stored as its packed upper triangle, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMat {
    dim: usize,
    upper: Vec<f64>,
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        SymMat {
            dim,
            upper: vec![0.0; dim * (dim + 1) / 2],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMat::zeros(dim);
        for i in 0..dim {
            let k = m.index(i, i);
            m.upper[k] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let mut m = SymMat::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            let k = m.index(i, i);
            m.upper[k] = v;
        }
        m.check_finite()?;
        Ok(m)
    }

    /// Builds from a full square matrix, reading only the upper triangle.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut m = SymMat::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            check_dim(dim, row.len())?;
            for j in i..dim {
                let k = m.index(i, j);
                m.upper[k] = row[j];
            }
        }
        m.check_finite()?;
        Ok(m)
    }

    /// Builds from a packed row-major upper triangle of length `d(d+1)/2`.
    pub fn from_upper(dim: usize, upper: Vec<f64>) -> Result<Self> {
        check_dim(dim * (dim + 1) / 2, upper.len())?;
        let m = SymMat { dim, upper };
        m.check_finite()?;
        Ok(m)
    }

    fn check_finite(&self) -> Result<()> {
        if self.upper.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(())
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.dim - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.index(i, j)]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let v = self.get(i, j);
                s += v * v;
            }
        }
        s.sqrt()
    }

    /// In-place `M += w * x x†`.
    pub fn add_outer(&mut self, x: &[f64], weight: f64) -> Result<()> {
        check_dim(self.dim, x.len())?;
        let mut k = 0;
        for i in 0..self.dim {
            let wi = weight * x[i];
            for &xj in &x[i..] {
                self.upper[k] += wi * xj;
                k += 1;
            }
        }
        Ok(())
    }

    /// Returns `M + x x†`.
    pub fn rank1_update(&self, x: &Vector) -> Result<SymMat> {
        let mut out = self.clone();
        out.add_outer(x, 1.0)?;
        Ok(out)
    }

    /// Returns `shift * I + scale * M`.
    pub fn scaled_plus_identity(&self, scale: f64, shift: f64) -> SymMat {
        let mut out = SymMat {
            dim: self.dim,
            upper: self.upper.iter().map(|v| scale * v).collect(),
        };
        for i in 0..self.dim {
            let k = out.index(i, i);
            out.upper[k] += shift;
        }
        out
    }

    pub fn sub(&self, other: &SymMat) -> Result<SymMat> {
        check_dim(self.dim, other.dim)?;
        Ok(SymMat {
            dim: self.dim,
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> SymMat {
        self.scaled_plus_identity(s, 0.0)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vector> {
        check_dim(self.dim, v.len())?;
        let out = (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect();
        Ok(Vector(out))
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigen(self).0
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L L†`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    // row-major full storage; only the lower triangle is meaningful
    l: Vec<f64>,
}

impl Cholesky {
    pub fn factor(m: &SymMat) -> Result<Self> {
        let n = m.dim();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = m.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > PIVOT_TOL) {
                return Err(Error::NotPositiveDefinite { row: j, pivot: diag });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = m.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Cholesky { dim: n, l })
    }

    /// Solves `L y = v`; `‖y‖₂² = v† M⁻¹ v`.
    pub fn forward(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, v.len())?;
        let n = self.dim;
        let mut y = v.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        Ok(y)
    }

    pub fn solve(&self, v: &[f64]) -> Result<Vector> {
        let n = self.dim;
        let mut x = self.forward(v)?;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i] * x[k];
            }
            x[i] = s / self.l[i * n + i];
        }
        Ok(Vector(x))
    }
}

/// Solves `M u = v` for symmetric positive definite `M`.
pub fn spd_solve(m: &SymMat, v: &Vector) -> Result<Vector> {
    check_dim(m.dim(), v.dim())?;
    Cholesky::factor(m)?.solve(v)
}

/// Returns `M + x x†`.
pub fn rank1_update(m: &SymMat, x: &Vector) -> Result<SymMat> {
    m.rank1_update(x)
}

/// Cyclic Jacobi eigen-decomposition.
///
/// Returns eigenvalues in ascending order with matching unit eigenvectors.
pub fn sym_eigen(m: &SymMat) -> (Vec<f64>, Vec<Vector>) {
    let n = m.dim();
    let mut a = m.to_rows();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let scale = m.frobenius_norm();
    let off_norm = |a: &[Vec<f64>]| {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i][j] * a[i][j];
                }
            }
        }
        s.sqrt()
    };

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_norm(&a) <= JACOBI_OFF_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| Vector((0..n).map(|k| v[k][i]).collect()))
        .collect();
    (values, vectors)
}

/// Eigenvalues in ascending order.
pub fn sym_eigenvalues(m: &SymMat) -> Vec<f64> {
    sym_eigen(m).0
}

/// Smallest eigenvalue strictly above `rank_tol * λ_max`.
pub fn min_nonzero_eigenvalue(m: &SymMat, rank_tol: f64) -> Result<f64> {
    if !(rank_tol > 0.0 && rank_tol < 1.0) {
        return Err(Error::config(format!("rank_tol must lie in (0, 1), got {rank_tol}")));
    }
    let values = sym_eigenvalues(m);
    let max = values.last().copied().unwrap_or(0.0);
    if !(max > 0.0) {
        return Err(Error::NoNonzeroEigenvalue);
    }
    values
        .into_iter()
        .find(|&l| l > rank_tol * max)
        .ok_or(Error::NoNonzeroEigenvalue)
}

/// Spectral norm of a symmetric matrix (largest absolute eigenvalue).
pub fn spectral_norm(m: &SymMat) -> f64 {
    sym_eigenvalues(m).into_iter().fold(0.0, |acc, l| acc.max(l.abs()))
}
