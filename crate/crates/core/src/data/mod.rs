//! Dataset loaders, generators, and conversion into bandit problems.

mod problem;
mod recommender;
mod svd;
mod tabular;
mod xor;

pub use problem::{class_to_bandit, BanditProblem, BanditRound, ContextEncoder, RoundStream};
pub use recommender::{load_ratings, recommender_to_bandit, RatingMatrix, RecommenderBandit};
pub use svd::{truncated_svd, SvdFactors, SVD_MAX_ITERATIONS, SVD_TOLERANCE};
pub use tabular::{load_csv, ColumnKind, CsvHints, LabelColumn, TabularDataset};
pub use xor::{clean_xor_label, gen_noisy_xor};
