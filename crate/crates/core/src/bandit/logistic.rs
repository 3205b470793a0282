use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Online logistic regression for one arm. `weights[0]` is the intercept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogisticArm {
    weights: Vec<f64>,
}

impl LogisticArm {
    pub fn new(dim: usize) -> Self {
        Self {
            weights: vec![0.0; dim + 1],
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() + 1 != self.weights.len() {
            return Err(Error::Width {
                expected: self.weights.len() - 1,
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn logit(&self, x: &[f64]) -> f64 {
        self.weights[0] + self.weights[1..].iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        Ok(sigmoid(self.logit(x)))
    }

    /// `-r·ln σ(z) - (1-r)·ln(1-σ(z))` with `z = w·[1, x]`.
    pub fn log_loss(&self, x: &[f64], reward: f64) -> Result<f64> {
        self.check(x)?;
        let z = self.logit(x);
        // ln(1 + e^z) computed stably
        let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
        Ok(softplus - reward * z)
    }

    /// `(σ(z) - r)·[1, x]`.
    pub fn gradient(&self, x: &[f64], reward: f64) -> Result<Vec<f64>> {
        let g = self.score(x)? - reward;
        Ok(std::iter::once(g).chain(x.iter().map(|v| g * v)).collect())
    }

    pub fn update(&mut self, x: &[f64], reward: f64, learning_rate: f64) -> Result<()> {
        let grad = self.gradient(x, reward)?;
        for (w, g) in self.weights.iter_mut().zip(grad) {
            *w -= learning_rate * g;
        }
        Ok(())
    }
}
