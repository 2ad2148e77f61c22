//! Per-arm sufficient statistics and the ridge estimate built from them.
//!
//! An [`ArmState`] keeps `n`, `A = Σ x x†` and `b = Σ r x` over the samples
//! recorded for one arm. The estimate solves
//!
//! ```text
//! (λ_n I + A / n) θ = b / n,    λ_n = 1 / √n
//! ```
//!
//! which is the minimizer of `(1/2n)‖r − Xθ‖² + (λ_n/2)‖θ‖²`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{check_dim, dot, Cholesky, SymMat, Vector};

/// Slack allowed on `‖x‖₂ ≤ 1` when recording.
pub const NORM_SLACK: f64 = 1e-9;

/// Ridge weight for `n` samples.
pub fn regularization(n: u64) -> f64 {
    1.0 / (n as f64).sqrt()
}

/// `λ_n I + A / n`
pub fn system_matrix(a: &SymMat, n: u64) -> SymMat {
    a.scaled_plus_identity(1.0 / n as f64, regularization(n))
}

/// Ridge solution from raw sums.
pub fn ridge_from_sums(a: &SymMat, b: &Vector, n: u64) -> Result<Vector> {
    if n == 0 {
        return Err(Error::NoData);
    }
    check_dim(a.dim(), b.dim())?;
    let rhs = b.scaled(1.0 / n as f64);
    Cholesky::factor(&system_matrix(a, n))?.solve(&rhs)
}

/// Squared confidence width `x† (λ_n I + A/n)⁻² x`.
pub fn squared_width_from_sums(a: &SymMat, n: u64, x: &[f64]) -> Result<f64> {
    if n == 0 {
        return Err(Error::NoData);
    }
    check_dim(a.dim(), x.len())?;
    let w = Cholesky::factor(&system_matrix(a, n))?.solve(x)?;
    Ok(dot(&w, &w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub theta_hat: Vector,
    pub n_used: u64,
}

impl Estimate {
    /// `x† θ̂`
    pub fn predict(&self, x: &Vector) -> Result<f64> {
        self.theta_hat.dot(x)
    }
}

pub fn predict(estimate: &Estimate, x: &Vector) -> Result<f64> {
    estimate.predict(x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmState {
    n: u64,
    a: SymMat,
    b: Vector,
    unit_norm_enforced: bool,
    // None doubles as the dirty flag
    cached: Option<Estimate>,
}

impl ArmState {
    pub fn new(dim: usize) -> Self {
        ArmState {
            n: 0,
            a: SymMat::zeros(dim),
            b: Vector::zeros(dim),
            unit_norm_enforced: true,
            cached: None,
        }
    }

    /// A state that accepts contexts with `‖x‖₂ > 1`.
    ///
    /// Needed for context families that are specified literally off the unit ball.
    pub fn without_norm_check(dim: usize) -> Self {
        ArmState {
            unit_norm_enforced: false,
            ..ArmState::new(dim)
        }
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn gram(&self) -> &SymMat {
        &self.a
    }

    pub fn moment(&self) -> &Vector {
        &self.b
    }

    pub fn is_dirty(&self) -> bool {
        self.cached.is_none()
    }

    pub fn unit_norm_enforced(&self) -> bool {
        self.unit_norm_enforced
    }

    pub fn set_unit_norm_enforced(&mut self, enforced: bool) {
        self.unit_norm_enforced = enforced;
    }

    pub fn record(&mut self, x: &Vector, reward: f64) -> Result<()> {
        check_dim(self.dim(), x.dim())?;
        if !reward.is_finite() {
            return Err(Error::NonFinite("reward"));
        }
        if self.unit_norm_enforced {
            let norm = x.norm();
            if norm > 1.0 + NORM_SLACK {
                return Err(Error::ContextNorm { norm });
            }
        }
        self.a.add_outer(x, 1.0)?;
        self.b.axpy(reward, x)?;
        self.n += 1;
        self.cached = None;
        Ok(())
    }

    /// Current ridge estimate, re-solved only if a sample arrived since the last call.
    pub fn ridge_solve(&mut self) -> Result<&Estimate> {
        if self.cached.is_none() {
            self.cached = Some(self.solve()?);
        }
        Ok(self.cached.as_ref().expect("populated above"))
    }

    /// Solves from scratch without touching the cache.
    pub fn solve(&self) -> Result<Estimate> {
        Ok(Estimate {
            theta_hat: ridge_from_sums(&self.a, &self.b, self.n)?,
            n_used: self.n,
        })
    }

    /// `sqrt(x† (λ_n I + A/n)⁻² x)`
    pub fn confidence_width(&self, x: &Vector) -> Result<f64> {
        Ok(squared_width_from_sums(&self.a, self.n, x)?.sqrt())
    }

    pub fn snapshot(&self) -> ArmSnapshot {
        ArmSnapshot {
            dim: self.dim(),
            n: self.n,
            gram_upper: self.a.upper().to_vec(),
            moment: self.b.to_vec(),
        }
    }

    pub fn from_snapshot(s: &ArmSnapshot) -> Result<Self> {
        let a = SymMat::from_upper(s.dim, s.gram_upper.clone())?;
        let b = Vector::new(s.moment.clone())?;
        check_dim(s.dim, b.dim())?;
        Ok(ArmState {
            n: s.n,
            a,
            b,
            unit_norm_enforced: true,
            cached: None,
        })
    }
}

/// Checkpoint form of an [`ArmState`].
///
/// The flat record is `[d, n, upper(A) row-major..., b...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSnapshot {
    pub dim: usize,
    pub n: u64,
    pub gram_upper: Vec<f64>,
    pub moment: Vec<f64>,
}

impl ArmSnapshot {
    pub fn to_record(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 + self.gram_upper.len() + self.moment.len());
        out.push(self.dim as f64);
        out.push(self.n as f64);
        out.extend_from_slice(&self.gram_upper);
        out.extend_from_slice(&self.moment);
        out
    }

    pub fn from_record(record: &[f64]) -> Result<Self> {
        let bad = || Error::config("malformed arm snapshot record");
        let (&d, rest) = record.split_first().ok_or_else(bad)?;
        let (&n, rest) = rest.split_first().ok_or_else(bad)?;
        if d < 0.0 || d.fract() != 0.0 || n < 0.0 || n.fract() != 0.0 {
            return Err(bad());
        }
        let dim = d as usize;
        let tri = dim * (dim + 1) / 2;
        check_dim(tri + dim, rest.len())?;
        Ok(ArmSnapshot {
            dim,
            n: n as u64,
            gram_upper: rest[..tri].to_vec(),
            moment: rest[tri..].to_vec(),
        })
    }
}
