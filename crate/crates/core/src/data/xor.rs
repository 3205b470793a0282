use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tabular::{ColumnKind, TabularDataset};
use crate::error::{Error, Result};

/// Noisy XOR: `num_bits` fair coin flips, clean label `x1 XOR x2` (the
/// remaining bits are distractors), emitted label flipped with probability
/// `flip_prob`. Class index equals the label value.
pub fn gen_noisy_xor(
    num_samples: usize,
    num_bits: usize,
    flip_prob: f64,
    seed: u64,
) -> Result<TabularDataset> {
    if num_bits < 2 {
        return Err(Error::Config(format!("noisy XOR needs at least 2 bits, got {num_bits}")));
    }
    if !(0.0..=0.5).contains(&flip_prob) {
        return Err(Error::Config(format!("flip probability {flip_prob} outside [0, 0.5]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(num_samples);
    let mut labels = Vec::with_capacity(num_samples);
    for _ in 0..num_samples {
        let bits: Vec<f64> = (0..num_bits)
            .map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 })
            .collect();
        let clean = (bits[0] != bits[1]) as usize;
        let flip = rng.random_bool(flip_prob);
        labels.push(clean ^ flip as usize);
        rows.push(bits);
    }
    Ok(TabularDataset {
        feature_names: (1..=num_bits).map(|i| format!("x{i}")).collect(),
        kinds: vec![ColumnKind::Numeric; num_bits],
        rows,
        labels,
        class_names: vec!["0".into(), "1".into()],
    })
}

/// The noiseless label of a noisy-XOR row.
pub fn clean_xor_label(row: &[f64]) -> usize {
    (row[0] != row[1]) as usize
}
