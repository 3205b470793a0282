//! Truncated SVD by block orthogonal iteration with Rayleigh–Ritz extraction.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const SVD_TOLERANCE: f64 = 1e-8;
pub const SVD_MAX_ITERATIONS: usize = 1000;
/// Extra block columns beyond the requested rank.
const OVERSAMPLE: usize = 5;

/// Rank-`r` factors with `S ≈ W·X`, `W = U_r Σ_r` and `X = V_rᵀ`.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub w: DMatrix<f64>,
    pub x: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub iterations: usize,
}

impl SvdFactors {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.w * &self.x
    }
}

/// Sine-style distance between the column spaces of two orthonormal bases.
fn subspace_distance(prev: &DMatrix<f64>, next: &DMatrix<f64>) -> f64 {
    let projected = prev * (prev.transpose() * next);
    (next - projected).norm()
}

/// Top-`rank` singular triplets of `s`.
///
/// Iterates `V ← orth(SᵀS V)` on a block of `rank + 5` columns and, after
/// each sweep, extracts Ritz vectors from the small projection `S V`. Stops
/// when the top-`rank` Ritz subspace moves by less than [`SVD_TOLERANCE`].
/// Each column of `U` is signed so that its largest-magnitude entry is
/// positive.
pub fn truncated_svd(s: &DMatrix<f64>, rank: usize) -> Result<SvdFactors> {
    let (m, n) = s.shape();
    let k = m.min(n);
    if rank == 0 || rank > k {
        return Err(Error::Config(format!(
            "rank {rank} must be in 1..={k} for a {m}x{n} matrix"
        )));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("matrix has non-finite entries".into()));
    }
    let block = (rank + OVERSAMPLE).min(k);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let start = DMatrix::from_fn(n, block, |_, _| StandardNormal.sample(&mut rng));
    let mut basis = start.qr().q();
    let st = s.transpose();

    let mut prev: Option<DMatrix<f64>> = None;
    let mut distance = f64::INFINITY;
    for iter in 1..=SVD_MAX_ITERATIONS {
        basis = (&st * (s * &basis)).qr().q();
        let small = s * &basis;
        let svd = small.svd(false, true);
        let order = descending(svd.singular_values.as_slice());
        let vt = svd.v_t.expect("requested right singular vectors");
        let mut ritz = DMatrix::zeros(n, rank);
        for (c, &idx) in order.iter().take(rank).enumerate() {
            let coeffs = vt.row(idx).transpose();
            ritz.set_column(c, &(&basis * coeffs));
        }
        if let Some(p) = &prev {
            distance = subspace_distance(p, &ritz);
            if distance < SVD_TOLERANCE {
                return Ok(finish(s, ritz, iter));
            }
        }
        prev = Some(ritz);
    }
    Err(Error::Numeric {
        what: "truncated SVD",
        iterations: SVD_MAX_ITERATIONS,
        residual: distance,
    })
}

fn descending(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

fn finish(s: &DMatrix<f64>, mut v: DMatrix<f64>, iterations: usize) -> SvdFactors {
    let mut w = s * &v;
    let rank = v.ncols();
    let mut singular_values = Vec::with_capacity(rank);
    for c in 0..rank {
        singular_values.push(w.column(c).norm());
        let col = w.column(c);
        let (imax, _) = col
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &x)| if x.abs() > best.1 { (i, x.abs()) } else { best });
        if col[imax] < 0.0 {
            w.column_mut(c).neg_mut();
            v.column_mut(c).neg_mut();
        }
    }
    SvdFactors {
        w,
        x: v.transpose(),
        singular_values,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Best rank-r residual from the eigenvalues of SᵀS.
    fn oracle_residual(s: &DMatrix<f64>, rank: usize) -> f64 {
        let eig = (s.transpose() * s).symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev[rank..].iter().sum::<f64>().sqrt()
    }

    fn random(m: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn rank_one_recovered() {
        let u = DMatrix::from_column_slice(6, 1, &[1.0, -2.0, 0.5, 3.0, 0.0, 1.5]);
        let v = DMatrix::from_column_slice(4, 1, &[0.3, 1.0, -1.0, 2.0]);
        let s = &u * v.transpose();
        let f = truncated_svd(&s, 1).unwrap();
        assert!((&s - f.reconstruct()).norm() <= 1e-6 * s.norm());
    }

    #[test]
    fn identity_full_rank() {
        let s = DMatrix::<f64>::identity(5, 5);
        let f = truncated_svd(&s, 5).unwrap();
        assert!((&s - f.reconstruct()).norm() <= 1e-6);
    }

    #[test]
    fn matches_dense_oracle() {
        for seed in 0..5 {
            let s = random(20, 15, seed);
            let f = truncated_svd(&s, 5).unwrap();
            let got = (&s - f.reconstruct()).norm();
            let want = oracle_residual(&s, 5);
            assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn residual_nonincreasing_in_rank() {
        let s = random(12, 9, 42);
        let mut last = f64::INFINITY;
        for r in 1..=9 {
            let res = (&s - truncated_svd(&s, r).unwrap().reconstruct()).norm();
            assert!(res <= last + 1e-9);
            last = res;
        }
    }

    #[test]
    fn signs_and_orthonormality() {
        let s = random(10, 8, 7);
        let f = truncated_svd(&s, 3).unwrap();
        let gram = &f.x * f.x.transpose();
        assert!((gram - DMatrix::<f64>::identity(3, 3)).norm() < 1e-9);
        for c in 0..3 {
            let col = f.w.column(c);
            let max = col.iter().cloned().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(max > 0.0);
        }
        assert!(f.singular_values.windows(2).all(|w| w[0] >= w[1] - 1e-12));
    }

    #[test]
    fn invalid_rank() {
        let s = random(4, 3, 1);
        assert!(truncated_svd(&s, 0).is_err());
        assert!(truncated_svd(&s, 4).is_err());
    }
}
