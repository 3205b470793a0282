use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tabular::TabularDataset;
use crate::binarizer::{fit_schema_with_kinds, BinarizationSchema};
use crate::error::{Error, Result};
use crate::tm::BinarySample;

/// How raw contexts become TM input bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextEncoder {
    /// Values are already 0/1; any nonzero value is a 1.
    Binary,
    /// One bit per feature, set when the value is `>=` the cutoff.
    Cutoff(f64),
    Thermometer(BinarizationSchema),
}

impl ContextEncoder {
    pub fn fit_thermometer(dataset: &TabularDataset, max_bits: &[usize]) -> Result<Self> {
        let schema = fit_schema_with_kinds(&dataset.columns(), max_bits, &dataset.categorical_mask())?;
        Ok(ContextEncoder::Thermometer(schema))
    }

    pub fn encode(&self, raw: &[f64]) -> Result<BinarySample> {
        match self {
            ContextEncoder::Binary => Ok(BinarySample::from_bools(
                &raw.iter().map(|&v| v != 0.0).collect::<Vec<_>>(),
            )),
            ContextEncoder::Cutoff(c) => Ok(BinarySample::from_bools(
                &raw.iter().map(|&v| v >= *c).collect::<Vec<_>>(),
            )),
            ContextEncoder::Thermometer(s) => s.transform(raw),
        }
    }
}

/// A fixed pool of (context, full reward vector) rows to stream rounds from.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditProblem {
    raw: Vec<Vec<f64>>,
    bits: Vec<BinarySample>,
    rewards: Vec<Vec<u8>>,
    num_arms: usize,
}

impl BanditProblem {
    pub fn new(raw: Vec<Vec<f64>>, rewards: Vec<Vec<u8>>, encoder: &ContextEncoder) -> Result<Self> {
        if raw.is_empty() || raw.len() != rewards.len() {
            return Err(Error::Data(format!(
                "need matching non-empty contexts and rewards, got {} and {}",
                raw.len(),
                rewards.len()
            )));
        }
        let num_arms = rewards[0].len();
        if num_arms == 0 {
            return Err(Error::Data("reward vectors are empty".into()));
        }
        let dim = raw[0].len();
        for (r, c) in rewards.iter().zip(&raw) {
            if r.len() != num_arms {
                return Err(Error::Width {
                    expected: num_arms,
                    actual: r.len(),
                });
            }
            if c.len() != dim {
                return Err(Error::Width {
                    expected: dim,
                    actual: c.len(),
                });
            }
            if r.iter().any(|&v| v > 1) {
                return Err(Error::Data("rewards must be 0 or 1".into()));
            }
        }
        let bits = raw.iter().map(|c| encoder.encode(c)).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            raw,
            bits,
            rewards,
            num_arms,
        })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn raw_dim(&self) -> usize {
        self.raw[0].len()
    }

    pub fn bit_width(&self) -> usize {
        self.bits[0].len()
    }

    pub fn rewards(&self, index: usize) -> &[u8] {
        &self.rewards[index]
    }

    /// Endless stream of rounds: each pass over the pool uses a fresh
    /// permutation drawn from `seed`.
    pub fn rounds(&self, seed: u64) -> RoundStream<'_> {
        RoundStream {
            problem: self,
            rng: ChaCha8Rng::seed_from_u64(seed),
            order: Vec::new(),
            pos: 0,
            t: 0,
        }
    }
}

/// Rewards are the one-hot of the true class, so the optimal reward is
/// always 1.
pub fn class_to_bandit(dataset: &TabularDataset, encoder: &ContextEncoder) -> Result<BanditProblem> {
    let k = dataset.num_classes();
    let rewards = dataset
        .labels
        .iter()
        .map(|&y| {
            let mut r = vec![0u8; k];
            r[y] = 1;
            r
        })
        .collect();
    BanditProblem::new(dataset.rows.clone(), rewards, encoder)
}

#[derive(Clone, Debug)]
pub struct BanditRound<'a> {
    /// 1-based round number.
    pub t: usize,
    /// Row of the underlying pool.
    pub index: usize,
    pub raw: &'a [f64],
    pub bits: &'a BinarySample,
    pub rewards: &'a [u8],
    pub optimal: u8,
}

pub struct RoundStream<'a> {
    problem: &'a BanditProblem,
    rng: ChaCha8Rng,
    order: Vec<usize>,
    pos: usize,
    t: usize,
}

impl<'a> Iterator for RoundStream<'a> {
    type Item = BanditRound<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.pos == self.order.len() {
            self.order = (0..self.problem.len()).collect();
            self.order.shuffle(&mut self.rng);
            self.pos = 0;
        }
        let index = self.order[self.pos];
        self.pos += 1;
        self.t += 1;
        let p = self.problem;
        Some(BanditRound {
            t: self.t,
            index,
            raw: &p.raw[index],
            bits: &p.bits[index],
            rewards: &p.rewards[index],
            optimal: *p.rewards[index].iter().max().unwrap(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::tabular::ColumnKind;

    fn toy() -> TabularDataset {
        TabularDataset {
            feature_names: vec!["a".into()],
            kinds: vec![ColumnKind::Numeric],
            rows: vec![vec![0.0], vec![1.0], vec![2.0]],
            labels: vec![0, 1, 2],
            class_names: vec!["p".into(), "q".into(), "r".into()],
        }
    }

    #[test]
    fn one_hot_rewards() {
        let p = class_to_bandit(&toy(), &ContextEncoder::Binary).unwrap();
        assert_eq!(p.rewards(2), &[0, 0, 1]);
        assert!(p.rounds(1).take(30).all(|r| r.optimal == 1));
    }

    #[test]
    fn rounds_cover_each_epoch_and_are_seeded() {
        let p = class_to_bandit(&toy(), &ContextEncoder::Binary).unwrap();
        let a: Vec<usize> = p.rounds(5).take(9).map(|r| r.index).collect();
        let b: Vec<usize> = p.rounds(5).take(9).map(|r| r.index).collect();
        assert_eq!(a, b);
        for epoch in a.chunks(3) {
            let mut e = epoch.to_vec();
            e.sort();
            assert_eq!(e, vec![0, 1, 2]);
        }
        let ts: Vec<usize> = p.rounds(5).take(4).map(|r| r.t).collect();
        assert_eq!(ts, vec![1, 2, 3, 4]);
    }

    #[test]
    fn encoders() {
        assert_eq!(ContextEncoder::Cutoff(75.0).encode(&[75.0, 74.0]).unwrap().bits(), vec![1, 0]);
        assert_eq!(ContextEncoder::Binary.encode(&[0.0, 1.0]).unwrap().bits(), vec![0, 1]);
        let t = ContextEncoder::fit_thermometer(&toy(), &[4]).unwrap();
        assert_eq!(t.encode(&[1.0]).unwrap().bits(), vec![1, 1, 0]);
    }

    #[test]
    fn rejects_ragged_input() {
        assert!(BanditProblem::new(vec![vec![0.0]], vec![vec![2]], &ContextEncoder::Binary).is_err());
        assert!(BanditProblem::new(
            vec![vec![0.0], vec![1.0]],
            vec![vec![1, 0], vec![1]],
            &ContextEncoder::Binary
        )
        .is_err());
        assert!(BanditProblem::new(vec![], vec![], &ContextEncoder::Binary).is_err());
    }
}
