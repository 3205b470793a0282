use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// Index of the largest score, ties broken uniformly at random. `+∞` scores
/// tie with each other. NaN scores are never chosen unless all are NaN.
pub fn argmax_uniform<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::Contract("cannot select from an empty arm set".into()));
    }
    let best = scores
        .iter()
        .copied()
        .filter(|s| !s.is_nan())
        .fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
    Ok(match ties.len() {
        0 => rng.random_range(0..scores.len()),
        1 => ties[0],
        n => ties[rng.random_range(0..n)],
    })
}

/// With probability `epsilon` a uniformly random arm, otherwise the best
/// scoring arm.
pub fn eps_greedy_select<R: Rng + ?Sized>(scores: &[f64], epsilon: f64, rng: &mut R) -> Result<usize> {
    if scores.is_empty() {
        return Err(Error::Contract("cannot select from an empty arm set".into()));
    }
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Contract(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if rng.random_bool(epsilon) {
        Ok(rng.random_range(0..scores.len()))
    } else {
        argmax_uniform(scores, rng)
    }
}

/// Online-bootstrap weight: how many times an observation is replayed.
pub fn poisson_multiplicity<R: Rng + ?Sized>(rng: &mut R) -> u32 {
    let p = Poisson::new(1.0).expect("unit rate is valid");
    let k: f64 = p.sample(rng);
    k as u32
}
