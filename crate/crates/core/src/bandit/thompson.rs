use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::select::argmax_uniform;
use super::ArmHistory;
use crate::error::{Error, Result};
use crate::seed;
use crate::tm::{BinarySample, TmConfig, TmState};

const BOOTSTRAP_STREAM: u64 = 0xb007;
const FIT_STREAM: u64 = 0xf17;

/// One arm's bootstrap fit within a round.
#[derive(Clone, Debug)]
pub struct ArmFit {
    /// History positions drawn with replacement; length equals the history.
    pub bootstrap: Vec<usize>,
    /// Seed of the freshly initialised machine.
    pub tm_seed: u64,
    /// Training steps the fresh machine received.
    pub train_steps: u64,
    pub score: f64,
    pub tm: TmState,
}

/// Everything one exact Thompson round computed.
#[derive(Clone, Debug)]
pub struct ThompsonTrace {
    pub arm: usize,
    pub scores: Vec<f64>,
    /// `None` for arms with no history (scored `+∞`).
    pub fits: Vec<Option<ArmFit>>,
}

/// Resamples `history` with replacement to its own size and trains a fresh
/// machine on the resample. Both the draw and the machine are seeded from
/// `(tm.seed, round, arm)`.
pub fn bootstrap_fit(
    history: &ArmHistory,
    tm: &TmConfig,
    epochs: usize,
    round: u64,
    arm: usize,
) -> Result<(TmState, Vec<usize>, u64)> {
    let n = history.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(tm.seed, &[BOOTSTRAP_STREAM, round, arm as u64]));
    let bootstrap: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let tm_seed = seed::derive(tm.seed, &[FIT_STREAM, round, arm as u64]);
    let mut machine = TmState::new(tm.clone().with_seed(tm_seed))?;
    let resample: Vec<BinarySample> = bootstrap.iter().map(|&i| history.samples()[i].clone()).collect();
    machine.fit(&resample, epochs)?;
    Ok((machine, bootstrap, tm_seed))
}

/// Bootstrap Thompson sampling with a full refit per arm, returning the
/// per-arm intermediate results.
pub fn thompson_step_exact_traced<R: Rng + ?Sized>(
    histories: &[ArmHistory],
    context: &BinarySample,
    tm: &TmConfig,
    epochs: usize,
    round: u64,
    rng: &mut R,
) -> Result<ThompsonTrace> {
    if context.len() != tm.num_features {
        return Err(Error::Width {
            expected: tm.num_features,
            actual: context.len(),
        });
    }
    let fits = histories
        .par_iter()
        .enumerate()
        .map(|(arm, h)| {
            if h.is_empty() {
                return Ok(None);
            }
            let (machine, bootstrap, tm_seed) = bootstrap_fit(h, tm, epochs, round, arm)?;
            Ok(Some(ArmFit {
                bootstrap,
                tm_seed,
                train_steps: machine.steps(),
                score: machine.score(context)?,
                tm: machine,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = fits
        .iter()
        .map(|f| f.as_ref().map_or(f64::INFINITY, |f| f.score))
        .collect();
    let arm = argmax_uniform(&scores, rng)?;
    Ok(ThompsonTrace { arm, scores, fits })
}

pub fn thompson_step_exact<R: Rng + ?Sized>(
    histories: &[ArmHistory],
    context: &BinarySample,
    tm: &TmConfig,
    epochs: usize,
    round: u64,
    rng: &mut R,
) -> Result<usize> {
    Ok(thompson_step_exact_traced(histories, context, tm, epochs, round, rng)?.arm)
}

/// Argmax of the per-arm scores of incrementally bootstrapped machines.
pub fn thompson_step_online<R: Rng + ?Sized>(tms: &[TmState], context: &BinarySample, rng: &mut R) -> Result<usize> {
    let scores = tms.iter().map(|t| t.score(context)).collect::<Result<Vec<_>>>()?;
    argmax_uniform(&scores, rng)
}
