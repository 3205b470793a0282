use rand::Rng;
use serde::{Deserialize, Serialize};

use super::select::argmax_uniform;
use crate::error::{Error, Result};

/// Ridge statistics of one arm in disjoint LinUCB: `A⁻¹` (kept directly via
/// Sherman–Morrison) and `b = Σ r·x`. `A` starts at the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinUcbArm {
    dim: usize,
    /// Row-major `dim × dim`.
    a_inv: Vec<f64>,
    b: Vec<f64>,
}

impl LinUcbArm {
    pub fn new(dim: usize) -> Self {
        let mut a_inv = vec![0.0; dim * dim];
        for i in 0..dim {
            a_inv[i * dim + i] = 1.0;
        }
        Self {
            dim,
            a_inv,
            b: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn a_inv_times(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| dot(&self.a_inv[i * self.dim..(i + 1) * self.dim], x))
            .collect()
    }

    /// Ridge estimate `θ = A⁻¹ b`.
    pub fn theta(&self) -> Vec<f64> {
        self.a_inv_times(&self.b)
    }

    pub fn ucb(&self, x: &[f64], alpha: f64) -> Result<f64> {
        self.check(x)?;
        let ax = self.a_inv_times(x);
        let width = dot(x, &ax).max(0.0).sqrt();
        Ok(dot(&self.theta(), x) + alpha * width)
    }

    pub fn update(&mut self, x: &[f64], reward: f64) -> Result<()> {
        self.check(x)?;
        let ax = self.a_inv_times(x);
        let denom = 1.0 + dot(x, &ax);
        let d = self.dim;
        // A⁻¹ is symmetric, so xᵀA⁻¹ = (A⁻¹x)ᵀ
        for i in 0..d {
            for j in 0..d {
                self.a_inv[i * d + j] -= ax[i] * ax[j] / denom;
            }
        }
        for (bi, xi) in self.b.iter_mut().zip(x) {
            *bi += reward * xi;
        }
        Ok(())
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Width {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Arm with the highest `θ_uᵀx + α·sqrt(xᵀA_u⁻¹x)`, ties uniform.
pub fn linucb_select<R: Rng + ?Sized>(arms: &[LinUcbArm], x: &[f64], alpha: f64, rng: &mut R) -> Result<usize> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Contract(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    let scores = arms.iter().map(|a| a.ucb(x, alpha)).collect::<Result<Vec<_>>>()?;
    argmax_uniform(&scores, rng)
}
