//! Published per-dataset learner configurations and binarization budgets.

use crate::tm::TmConfig;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmPreset {
    pub name: &'static str,
    pub num_clauses: usize,
    pub threshold: u32,
    pub specificity: f64,
    pub num_state_bits: u32,
}

impl TmPreset {
    pub fn config(&self, num_features: usize) -> TmConfig {
        TmConfig::new(
            self.num_clauses,
            self.threshold,
            self.specificity,
            self.num_state_bits,
            num_features,
        )
    }
}

const fn tm(name: &'static str, n: usize, t: u32, s: f64, b: u32) -> TmPreset {
    TmPreset {
        name,
        num_clauses: n,
        threshold: t,
        specificity: s,
        num_state_bits: b,
    }
}

pub const TM_PRESETS: &[TmPreset] = &[
    tm("iris", 1200, 1000, 8.0, 10),
    tm("breast-cancer", 650, 300, 5.0, 10),
    tm("noisy-xor", 1000, 700, 5.0, 8),
    tm("adult", 1200, 800, 5.0, 8),
    tm("shuttle", 1200, 800, 5.0, 8),
    tm("covertype", 1200, 800, 5.0, 8),
    tm("simulated-article", 2000, 1500, 5.0, 10),
    tm("movielens", 4000, 3000, 8.0, 8),
    tm("mnist", 5000, 4000, 5.0, 8),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BitBudget {
    pub name: &'static str,
    pub context_dim: usize,
    pub max_bits: usize,
}

pub const BIT_BUDGETS: &[BitBudget] = &[
    BitBudget { name: "iris", context_dim: 4, max_bits: 4 },
    BitBudget { name: "breast-cancer", context_dim: 30, max_bits: 10 },
    BitBudget { name: "adult", context_dim: 15, max_bits: 10 },
    BitBudget { name: "shuttle", context_dim: 9, max_bits: 10 },
    BitBudget { name: "covertype", context_dim: 54, max_bits: 10 },
    BitBudget { name: "simulated-article", context_dim: 4, max_bits: 10 },
    BitBudget { name: "movielens", context_dim: 10, max_bits: 8 },
];

/// Pixels at or above this intensity become 1.
pub const MNIST_PIXEL_CUTOFF: i64 = 75;

/// Rank of the factorisation used for recommender contexts.
pub const RECOMMENDER_RANK: usize = 10;

pub fn tm_preset(name: &str) -> Option<&'static TmPreset> {
    TM_PRESETS.iter().find(|p| p.name == name)
}

pub fn bit_budget(name: &str) -> Option<&'static BitBudget> {
    BIT_BUDGETS.iter().find(|p| p.name == name)
}
