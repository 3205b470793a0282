//! Tsetlin Machine learners for stochastic contextual bandits.
//!
//! The crate is organised around the learning engine in [`tm`], with
//! [`binarizer`] turning real-valued contexts into bits, [`bandit`] holding the
//! arm-selection policies, [`experiment`] running and scoring online
//! simulations, [`interpret`] extracting per-arm rules, and [`data`] providing
//! loaders and generators. [`cli`] wires everything into the command-line tool.

pub mod bandit;
pub mod binarizer;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod interpret;
pub mod presets;
pub mod seed;
pub mod tm;

pub use error::{Error, Result};
pub use tm::{BinarySample, EvalMode, TmConfig, TmState};
