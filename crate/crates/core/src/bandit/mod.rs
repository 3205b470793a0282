//! Arm-selection policies.
//!
//! Tsetlin Machine policies keep one learner per arm, trained on the binarized
//! context with the observed reward as label. The baselines (LinUCB and
//! logistic ε-greedy) work on the raw numeric context.

mod linucb;
mod logistic;
mod select;
mod thompson;
#[cfg(test)]
mod tests;

pub use linucb::{linucb_select, LinUcbArm};
pub use logistic::{sigmoid, LogisticArm};
pub use select::{argmax_uniform, eps_greedy_select, poisson_multiplicity};
pub use thompson::{
    bootstrap_fit, thompson_step_exact, thompson_step_exact_traced, thompson_step_online, ArmFit,
    ThompsonTrace,
};

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::tm::{BinarySample, TmConfig, TmState};

/// Observations `(context, reward)` of one arm, in arrival order. The reward
/// is stored as the sample label.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ArmHistory {
    observations: Vec<BinarySample>,
}

impl ArmHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, context: &BinarySample, reward: u8) -> Result<()> {
        check_reward(reward)?;
        self.observations.push(context.clone().with_label(reward));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Labeled samples, ready for training.
    pub fn samples(&self) -> &[BinarySample] {
        &self.observations
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BinarySample, u8)> {
        self.observations.iter().map(|s| (s, s.label().unwrap_or(0)))
    }
}

fn check_reward(reward: u8) -> Result<()> {
    if reward > 1 {
        return Err(Error::Contract(format!("reward must be 0 or 1, got {reward}")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    TmEpsGreedy,
    TmThompsonExact,
    TmThompsonOnline,
    Linucb,
    LogisticEpsGreedy,
}

impl PolicyKind {
    pub fn uses_tm(self) -> bool {
        matches!(
            self,
            PolicyKind::TmEpsGreedy | PolicyKind::TmThompsonExact | PolicyKind::TmThompsonOnline
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    /// Per-arm learner configuration. Its `seed` is ignored: every random
    /// stream of the policy derives from [`PolicyConfig::seed`].
    pub tm: TmConfig,
    /// Exact Thompson refits an arm only once this many rounds have passed
    /// since its last fit.
    #[serde(default = "defaults::one")]
    pub refit_interval: u64,
    /// Epochs over each bootstrap resample.
    #[serde(default = "defaults::one_usize")]
    pub fit_epochs: usize,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::learning_rate")]
    pub learning_rate: f64,
    #[serde(default)]
    pub seed: u64,
}

mod defaults {
    pub fn epsilon() -> f64 {
        0.1
    }
    pub fn one() -> u64 {
        1
    }
    pub fn one_usize() -> usize {
        1
    }
    pub fn alpha() -> f64 {
        1.0
    }
    pub fn learning_rate() -> f64 {
        0.1
    }
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind, tm: TmConfig) -> Self {
        Self {
            kind,
            epsilon: defaults::epsilon(),
            tm,
            refit_interval: 1,
            fit_epochs: 1,
            alpha: defaults::alpha(),
            learning_rate: defaults::learning_rate(),
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon {} outside [0, 1]", self.epsilon)));
        }
        if self.refit_interval == 0 {
            return Err(Error::Config("refit interval must be >= 1".into()));
        }
        if self.fit_epochs == 0 {
            return Err(Error::Config("fit epochs must be >= 1".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be > 0, got {}",
                self.learning_rate
            )));
        }
        if self.kind.uses_tm() {
            self.tm.validate()?;
        }
        Ok(())
    }
}

/// What a policy sees of a round: an opaque context id and both context
/// encodings. Rewards arrive only through [`BanditPolicy::update`].
#[derive(Clone, Copy, Debug)]
pub struct Context<'a> {
    pub id: usize,
    pub raw: &'a [f64],
    pub bits: &'a BinarySample,
}

pub trait BanditPolicy {
    fn num_arms(&self) -> usize;
    fn select(&mut self, ctx: &Context<'_>) -> Result<usize>;
    fn update(&mut self, arm: usize, ctx: &Context<'_>, reward: u8) -> Result<()>;
}

const SELECT_STREAM: u64 = 0x5e1;
const ARM_STREAM: u64 = 0xa4;
const EXACT_STREAM: u64 = 0xe4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct CachedFit {
    round: u64,
    tm: TmState,
}

/// Complete state of a running policy; serializes for checkpoints and for
/// rule extraction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    config: PolicyConfig,
    num_arms: usize,
    raw_dim: usize,
    histories: Vec<ArmHistory>,
    /// Incremental learners (ε-greedy and online Thompson).
    learners: Vec<TmState>,
    /// Latest bootstrap fits (exact Thompson).
    fits: Vec<Option<CachedFit>>,
    linucb: Vec<LinUcbArm>,
    logistic: Vec<LogisticArm>,
    rng: ChaCha8Rng,
    round: u64,
    #[serde(skip)]
    last_scores: Vec<f64>,
}

impl Policy {
    pub fn new(config: PolicyConfig, num_arms: usize, raw_dim: usize) -> Result<Self> {
        config.validate()?;
        if num_arms == 0 {
            return Err(Error::Config("need at least one arm".into()));
        }
        let kind = config.kind;
        let learners = if matches!(kind, PolicyKind::TmEpsGreedy | PolicyKind::TmThompsonOnline) {
            (0..num_arms)
                .map(|u| {
                    let s = seed::derive(config.seed, &[ARM_STREAM, u as u64]);
                    TmState::new(config.tm.clone().with_seed(s))
                })
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let fits = if kind == PolicyKind::TmThompsonExact {
            vec![None; num_arms]
        } else {
            Vec::new()
        };
        let linucb = if kind == PolicyKind::Linucb {
            vec![LinUcbArm::new(raw_dim); num_arms]
        } else {
            Vec::new()
        };
        let logistic = if kind == PolicyKind::LogisticEpsGreedy {
            vec![LogisticArm::new(raw_dim); num_arms]
        } else {
            Vec::new()
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed::derive(config.seed, &[SELECT_STREAM])),
            config,
            num_arms,
            raw_dim,
            histories: vec![ArmHistory::new(); num_arms],
            learners,
            fits,
            linucb,
            logistic,
            round: 0,
            last_scores: Vec::new(),
        })
    }

    pub fn config(&self) -> &PolicyConfig {
        &self.config
    }

    pub fn raw_dim(&self) -> usize {
        self.raw_dim
    }

    /// Number of selections made so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn histories(&self) -> &[ArmHistory] {
        &self.histories
    }

    /// Scores behind the most recent selection.
    pub fn last_scores(&self) -> &[f64] {
        &self.last_scores
    }

    /// The machine currently standing for `arm`: the incremental learner, or
    /// the latest bootstrap fit for exact Thompson. `None` for baselines and
    /// for exact-Thompson arms never fitted.
    pub fn arm_tm(&self, arm: usize) -> Option<&TmState> {
        match self.config.kind {
            PolicyKind::TmEpsGreedy | PolicyKind::TmThompsonOnline => self.learners.get(arm),
            PolicyKind::TmThompsonExact => self.fits.get(arm)?.as_ref().map(|f| &f.tm),
            _ => None,
        }
    }

    fn exact_config(&self) -> TmConfig {
        self.config
            .tm
            .clone()
            .with_seed(seed::derive(self.config.seed, &[EXACT_STREAM]))
    }

    fn check_context(&self, ctx: &Context<'_>) -> Result<()> {
        if self.config.kind.uses_tm() {
            if ctx.bits.len() != self.config.tm.num_features {
                return Err(Error::Width {
                    expected: self.config.tm.num_features,
                    actual: ctx.bits.len(),
                });
            }
        } else if ctx.raw.len() != self.raw_dim {
            return Err(Error::Width {
                expected: self.raw_dim,
                actual: ctx.raw.len(),
            });
        }
        Ok(())
    }

    fn exact_scores(&mut self, bits: &BinarySample) -> Result<Vec<f64>> {
        let tm = self.exact_config();
        let mut scores = Vec::with_capacity(self.num_arms);
        for arm in 0..self.num_arms {
            let history = &self.histories[arm];
            if history.is_empty() {
                scores.push(f64::INFINITY);
                continue;
            }
            let stale = match &self.fits[arm] {
                None => true,
                Some(f) => self.round - f.round >= self.config.refit_interval,
            };
            if stale {
                let (machine, _, _) = bootstrap_fit(history, &tm, self.config.fit_epochs, self.round, arm)?;
                self.fits[arm] = Some(CachedFit {
                    round: self.round,
                    tm: machine,
                });
            }
            scores.push(self.fits[arm].as_ref().expect("fitted above").tm.score(bits)?);
        }
        Ok(scores)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string(self)?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let policy: Policy = serde_json::from_str(&text)?;
        policy.check_consistent()?;
        Ok(policy)
    }

    fn check_consistent(&self) -> Result<()> {
        self.config.validate()?;
        let bad = |what: &str| Err(Error::Data(format!("policy state: inconsistent {what}")));
        if self.histories.len() != self.num_arms {
            return bad("histories");
        }
        if self.histories.iter().flat_map(|h| h.iter()).any(|(_, r)| r > 1) {
            return bad("rewards");
        }
        let learners = match self.config.kind {
            PolicyKind::TmEpsGreedy | PolicyKind::TmThompsonOnline => self.learners.len() == self.num_arms,
            _ => self.learners.is_empty(),
        };
        if !learners {
            return bad("learners");
        }
        if self.config.kind == PolicyKind::TmThompsonExact && self.fits.len() != self.num_arms {
            return bad("fits");
        }
        if self.config.kind == PolicyKind::Linucb
            && (self.linucb.len() != self.num_arms || self.linucb.iter().any(|a| a.dim() != self.raw_dim))
        {
            return bad("LinUCB statistics");
        }
        if self.config.kind == PolicyKind::LogisticEpsGreedy && self.logistic.len() != self.num_arms {
            return bad("logistic weights");
        }
        Ok(())
    }
}

impl BanditPolicy for Policy {
    fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn select(&mut self, ctx: &Context<'_>) -> Result<usize> {
        self.check_context(ctx)?;
        self.round += 1;
        let (scores, arm) = match self.config.kind {
            PolicyKind::TmEpsGreedy => {
                let scores = self.learners.iter().map(|t| t.score(ctx.bits)).collect::<Result<Vec<_>>>()?;
                let arm = eps_greedy_select(&scores, self.config.epsilon, &mut self.rng)?;
                (scores, arm)
            }
            PolicyKind::TmThompsonOnline => {
                let scores = self.learners.iter().map(|t| t.score(ctx.bits)).collect::<Result<Vec<_>>>()?;
                let arm = argmax_uniform(&scores, &mut self.rng)?;
                (scores, arm)
            }
            PolicyKind::TmThompsonExact => {
                let scores = self.exact_scores(ctx.bits)?;
                let arm = argmax_uniform(&scores, &mut self.rng)?;
                (scores, arm)
            }
            PolicyKind::Linucb => {
                let scores = self
                    .linucb
                    .iter()
                    .map(|a| a.ucb(ctx.raw, self.config.alpha))
                    .collect::<Result<Vec<_>>>()?;
                let arm = argmax_uniform(&scores, &mut self.rng)?;
                (scores, arm)
            }
            PolicyKind::LogisticEpsGreedy => {
                let scores = self.logistic.iter().map(|a| a.score(ctx.raw)).collect::<Result<Vec<_>>>()?;
                let arm = eps_greedy_select(&scores, self.config.epsilon, &mut self.rng)?;
                (scores, arm)
            }
        };
        self.last_scores = scores;
        Ok(arm)
    }

    fn update(&mut self, arm: usize, ctx: &Context<'_>, reward: u8) -> Result<()> {
        if arm >= self.num_arms {
            return Err(Error::Index {
                what: "arm",
                index: arm,
                limit: self.num_arms,
            });
        }
        check_reward(reward)?;
        self.check_context(ctx)?;
        self.histories[arm].push(ctx.bits, reward)?;
        match self.config.kind {
            PolicyKind::TmEpsGreedy => {
                let x = ctx.bits.clone().with_label(reward);
                self.learners[arm].train_step(&x)?;
            }
            PolicyKind::TmThompsonOnline => {
                let x = ctx.bits.clone().with_label(reward);
                for _ in 0..poisson_multiplicity(&mut self.rng) {
                    self.learners[arm].train_step(&x)?;
                }
            }
            PolicyKind::TmThompsonExact => {}
            PolicyKind::Linucb => self.linucb[arm].update(ctx.raw, reward as f64)?,
            PolicyKind::LogisticEpsGreedy => {
                self.logistic[arm].update(ctx.raw, reward as f64, self.config.learning_rate)?
            }
        }
        Ok(())
    }
}
