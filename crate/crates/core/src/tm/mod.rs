//! Two-class Tsetlin Machine.
//!
//! A machine over `o` input bits has `2o` literals: literal `k < o` is `x_k`,
//! literal `k >= o` is `¬x_{k-o}`. Each of the `n` clauses owns one two-action
//! automaton per literal. Automaton states are reported 1-based in
//! `1..=2N`; states `1..=N` exclude the literal and `N+1..=2N` include it.
//!
//! Clauses are indexed from 0 in this API. Even indices (the 1st, 3rd, ...
//! clause) vote positively, odd indices negatively.
//!
//! Internally each automaton is stored as `state - 1` in `b` bits, and the
//! include decisions of each clause are mirrored in packed bit masks so that
//! clause evaluation is a word-parallel AND over the packed input.

mod feedback;
mod sample;

pub use feedback::{type_i_feedback, type_ii_feedback, Action, FeedbackDecision, Transition};
pub use sample::BinarySample;

use rand::rngs::SmallRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use sample::words_for;

/// Hyperparameters of a single machine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TmConfig {
    /// Number of clauses `n`; must be even.
    pub num_clauses: usize,
    /// Voting margin `T`.
    pub threshold: u32,
    /// Specificity `s >= 1`.
    pub specificity: f64,
    /// Bits per automaton `b`; each automaton has `2N = 2^b` states.
    pub num_state_bits: u32,
    /// Input width `o`.
    pub num_features: usize,
    #[serde(default)]
    pub boost_true_positives: bool,
    #[serde(default)]
    pub seed: u64,
}

impl TmConfig {
    pub fn new(
        num_clauses: usize,
        threshold: u32,
        specificity: f64,
        num_state_bits: u32,
        num_features: usize,
    ) -> Self {
        Self {
            num_clauses,
            threshold,
            specificity,
            num_state_bits,
            num_features,
            boost_true_positives: false,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_boost(mut self, boost: bool) -> Self {
        self.boost_true_positives = boost;
        self
    }

    /// `N`, the number of states per action.
    pub fn states_per_action(&self) -> u32 {
        1 << (self.num_state_bits - 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_clauses == 0 || !self.num_clauses.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "number of clauses must be a positive even number, got {}",
                self.num_clauses
            )));
        }
        if self.threshold == 0 {
            return Err(Error::Config("threshold T must be positive".into()));
        }
        if !(self.specificity.is_finite() && self.specificity >= 1.0) {
            return Err(Error::Config(format!(
                "specificity must be >= 1, got {}",
                self.specificity
            )));
        }
        if !(1..=16).contains(&self.num_state_bits) {
            return Err(Error::Config(format!(
                "state bits must be in 1..=16, got {}",
                self.num_state_bits
            )));
        }
        if self.num_features == 0 {
            return Err(Error::Config("number of features must be positive".into()));
        }
        Ok(())
    }
}

/// How an empty clause (no included literals) evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Empty clauses output 1, so fresh clauses can receive Type Ia feedback.
    Learning,
    /// Empty clauses output 0 and never vote.
    Inference,
}

/// The learned model: configuration plus the `n × 2o` automaton-state matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "TmDump", try_from = "TmDump")]
pub struct TmState {
    config: TmConfig,
    /// Zero-based states (`state - 1`), row-major by clause.
    states: Vec<u16>,
    /// Per clause: `words` masks over positive literals, then `words` over negated.
    include: Vec<u64>,
    words: usize,
    steps: u64,
}

impl TmState {
    /// Every automaton starts at state `N`, the Exclude-side boundary.
    pub fn new(config: TmConfig) -> Result<Self> {
        config.validate()?;
        let n = config.num_clauses;
        let literals = 2 * config.num_features;
        let boundary = (config.states_per_action() - 1) as u16;
        let words = words_for(config.num_features);
        Ok(Self {
            states: vec![boundary; n * literals],
            include: vec![0; n * 2 * words],
            words,
            steps: 0,
            config,
        })
    }

    pub fn config(&self) -> &TmConfig {
        &self.config
    }

    pub fn num_clauses(&self) -> usize {
        self.config.num_clauses
    }

    pub fn num_literals(&self) -> usize {
        2 * self.config.num_features
    }

    /// Training steps applied so far; also the RNG substream counter.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn is_positive(clause: usize) -> bool {
        clause.is_multiple_of(2)
    }

    fn max_state(&self) -> u16 {
        (2 * self.config.states_per_action() - 1) as u16
    }

    fn check_clause(&self, clause: usize) -> Result<()> {
        if clause >= self.config.num_clauses {
            return Err(Error::Index {
                what: "clause",
                index: clause,
                limit: self.config.num_clauses,
            });
        }
        Ok(())
    }

    fn check_width(&self, x: &BinarySample) -> Result<()> {
        if x.len() != self.config.num_features {
            return Err(Error::Width {
                expected: self.config.num_features,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// 1-based state of the automaton for `literal` in `clause`.
    pub fn state(&self, clause: usize, literal: usize) -> Result<u32> {
        self.check_clause(clause)?;
        if literal >= self.num_literals() {
            return Err(Error::Index {
                what: "literal",
                index: literal,
                limit: self.num_literals(),
            });
        }
        Ok(self.states[clause * self.num_literals() + literal] as u32 + 1)
    }

    /// Overwrites one automaton with a 1-based state in `1..=2N`.
    pub fn set_state(&mut self, clause: usize, literal: usize, state: u32) -> Result<()> {
        self.state(clause, literal)?;
        let two_n = 2 * self.config.states_per_action();
        if !(1..=two_n).contains(&state) {
            return Err(Error::Contract(format!(
                "state {state} outside 1..={two_n}"
            )));
        }
        let idx = clause * self.num_literals() + literal;
        self.states[idx] = (state - 1) as u16;
        self.sync_include(clause, literal);
        Ok(())
    }

    /// 1-based states of one clause row.
    pub fn clause_states(&self, clause: usize) -> Result<Vec<u32>> {
        self.check_clause(clause)?;
        let l = self.num_literals();
        Ok(self.states[clause * l..(clause + 1) * l]
            .iter()
            .map(|&s| s as u32 + 1)
            .collect())
    }

    /// Literal indices currently included in `clause` (automaton state `> N`).
    pub fn clause_literals(&self, clause: usize) -> Result<Vec<usize>> {
        self.check_clause(clause)?;
        let o = self.config.num_features;
        let (pos, neg) = self.masks(clause);
        let mut out = Vec::new();
        for (offset, mask) in [(0, pos), (o, neg)] {
            for (w, &word) in mask.iter().enumerate() {
                let mut bits = word;
                while bits != 0 {
                    out.push(offset + w * 64 + bits.trailing_zeros() as usize);
                    bits &= bits - 1;
                }
            }
        }
        Ok(out)
    }

    #[inline]
    fn masks(&self, clause: usize) -> (&[u64], &[u64]) {
        let base = clause * 2 * self.words;
        self.include[base..base + 2 * self.words].split_at(self.words)
    }

    fn sync_include(&mut self, clause: usize, literal: usize) {
        let included = self.states[clause * self.num_literals() + literal] as u32
            >= self.config.states_per_action();
        let o = self.config.num_features;
        let (half, feature) = if literal < o { (0, literal) } else { (1, literal - o) };
        let idx = clause * 2 * self.words + half * self.words + feature / 64;
        let bit = 1u64 << (feature % 64);
        if included {
            self.include[idx] |= bit;
        } else {
            self.include[idx] &= !bit;
        }
    }

    #[inline]
    fn fires(&self, clause: usize, x: &[u64], mode: EvalMode) -> bool {
        let (pos, neg) = self.masks(clause);
        let mut empty = true;
        for ((&p, &n), &xw) in pos.iter().zip(neg).zip(x) {
            if p & !xw != 0 || n & xw != 0 {
                return false;
            }
            empty &= p | n == 0;
        }
        !empty || mode == EvalMode::Learning
    }

    /// Output of one clause: the conjunction of its included literals.
    pub fn clause_eval(&self, clause: usize, x: &BinarySample, mode: EvalMode) -> Result<bool> {
        self.check_clause(clause)?;
        self.check_width(x)?;
        Ok(self.fires(clause, x.words(), mode))
    }

    pub fn clause_outputs(&self, x: &BinarySample, mode: EvalMode) -> Result<Vec<bool>> {
        self.check_width(x)?;
        Ok((0..self.config.num_clauses)
            .map(|j| self.fires(j, x.words(), mode))
            .collect())
    }

    fn raw_vote(&self, x: &[u64], mode: EvalMode) -> i64 {
        (0..self.config.num_clauses)
            .filter(|&j| self.fires(j, x, mode))
            .map(|j| if Self::is_positive(j) { 1 } else { -1 })
            .sum()
    }

    /// Positive-clause outputs minus negative-clause outputs, unclamped.
    pub fn vote_sum(&self, x: &BinarySample, mode: EvalMode) -> Result<i64> {
        self.check_width(x)?;
        Ok(self.raw_vote(x.words(), mode))
    }

    /// Majority vote over inference-mode clauses. A tie (`v = 0`) predicts 0.
    pub fn predict(&self, x: &BinarySample) -> Result<u8> {
        Ok((self.vote_sum(x, EvalMode::Inference)? > 0) as u8)
    }

    /// Clamped vote sum mapped monotonically onto `[0, 1]`.
    pub fn score(&self, x: &BinarySample) -> Result<f64> {
        let t = self.config.threshold as i64;
        let v = self.vote_sum(x, EvalMode::Inference)?.clamp(-t, t);
        Ok((v + t) as f64 / (2 * t) as f64)
    }

    /// Probability that each clause is selected for feedback on `x`.
    pub fn feedback_probability(&self, x: &BinarySample, label: u8) -> Result<f64> {
        let t = self.config.threshold as i64;
        let v = self.vote_sum(x, EvalMode::Learning)?.clamp(-t, t);
        Ok(voting_error(t, v, label) as f64 / (2 * t) as f64)
    }

    fn clause_rng(&self, clause: usize) -> SmallRng {
        SmallRng::seed_from_u64(seed::derive(
            self.config.seed,
            &[self.steps, clause as u64],
        ))
    }

    /// One online update on a labeled sample.
    ///
    /// Each clause draws from its own RNG substream keyed by
    /// `(seed, step, clause)`, so the result does not depend on the order in
    /// which clauses are visited.
    pub fn train_step(&mut self, x: &BinarySample) -> Result<()> {
        let y = x
            .label()
            .ok_or_else(|| Error::Contract("training sample has no label".into()))?;
        self.check_width(x)?;
        let xw = x.words();
        let n = self.config.num_clauses;
        let outputs: Vec<bool> = (0..n).map(|j| self.fires(j, xw, EvalMode::Learning)).collect();
        let t = self.config.threshold as i64;
        let v: i64 = outputs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(j, _)| if Self::is_positive(j) { 1 } else { -1 })
            .sum();
        let p = voting_error(t, v.clamp(-t, t), y) as f64 / (2 * t) as f64;

        for (j, &clause_out) in outputs.iter().enumerate() {
            let mut rng = self.clause_rng(j);
            if !rand::Rng::random_bool(&mut rng, p) {
                continue;
            }
            if Self::is_positive(j) == (y == 1) {
                self.type_i(j, clause_out, x, &mut rng);
            } else if clause_out {
                self.type_ii(j, x);
            }
        }
        self.steps += 1;
        Ok(())
    }

    #[inline]
    fn literal_value(x: &BinarySample, o: usize, k: usize) -> bool {
        if k < o {
            x.get(k)
        } else {
            !x.get(k - o)
        }
    }

    fn apply(&mut self, clause: usize, k: usize, delta: i8) {
        if delta == 0 {
            return;
        }
        let idx = clause * self.num_literals() + k;
        let max = self.max_state();
        let s = self.states[idx];
        let next = if delta > 0 {
            s.saturating_add(1).min(max)
        } else {
            s.saturating_sub(1)
        };
        if next != s {
            self.states[idx] = next;
            let boundary = (self.config.states_per_action() - 1) as u16;
            // include flips only when crossing between N and N+1 (1-based)
            if (s == boundary && next == boundary + 1) || (s == boundary + 1 && next == boundary) {
                self.sync_include(clause, k);
            }
        }
    }

    fn action(&self, clause: usize, k: usize) -> Action {
        if self.states[clause * self.num_literals() + k] as u32 >= self.config.states_per_action() {
            Action::Include
        } else {
            Action::Exclude
        }
    }

    fn type_i(&mut self, clause: usize, clause_out: bool, x: &BinarySample, rng: &mut SmallRng) {
        let o = self.config.num_features;
        let s = self.config.specificity;
        let boost = self.config.boost_true_positives;
        for k in 0..2 * o {
            let literal = Self::literal_value(x, o, k);
            let d = type_i_feedback(self.action(clause, k), clause_out, literal, s, boost, rng);
            self.apply(clause, k, d.delta);
        }
    }

    fn type_ii(&mut self, clause: usize, x: &BinarySample) {
        let o = self.config.num_features;
        for k in 0..2 * o {
            let literal = Self::literal_value(x, o, k);
            let d = type_ii_feedback(self.action(clause, k), true, literal);
            self.apply(clause, k, d.delta);
        }
    }

    /// Applies `train_step` to every sample in order, `epochs` times.
    pub fn fit(&mut self, samples: &[BinarySample], epochs: usize) -> Result<()> {
        for x in samples {
            self.check_width(x)?;
            if x.label().is_none() {
                return Err(Error::Contract("training sample has no label".into()));
            }
        }
        for _ in 0..epochs {
            for x in samples {
                self.train_step(x)?;
            }
        }
        Ok(())
    }
}

/// `T - v` for `y = 1`, `T + v` for `y = 0`, with `v` already clamped.
#[inline]
fn voting_error(t: i64, v: i64, label: u8) -> i64 {
    if label == 1 {
        t - v
    } else {
        t + v
    }
}

/// Serialized form: config, training-step counter, and the 1-based state
/// matrix flattened row-major (row = clause, column = literal; columns
/// `0..o` are `x_k`, `o..2o` are `¬x_k`).
#[derive(Serialize, Deserialize)]
struct TmDump {
    config: TmConfig,
    steps: u64,
    rows: usize,
    cols: usize,
    states: Vec<u32>,
}

impl From<TmState> for TmDump {
    fn from(tm: TmState) -> Self {
        TmDump {
            rows: tm.num_clauses(),
            cols: tm.num_literals(),
            states: tm.states.iter().map(|&s| s as u32 + 1).collect(),
            steps: tm.steps,
            config: tm.config,
        }
    }
}

impl TryFrom<TmDump> for TmState {
    type Error = Error;

    fn try_from(d: TmDump) -> Result<Self> {
        let mut tm = TmState::new(d.config)?;
        if d.rows != tm.num_clauses() || d.cols != tm.num_literals() {
            return Err(Error::Data(format!(
                "state matrix is {}x{}, config implies {}x{}",
                d.rows,
                d.cols,
                tm.num_clauses(),
                tm.num_literals()
            )));
        }
        if d.states.len() != d.rows * d.cols {
            return Err(Error::Data("state matrix length does not match its shape".into()));
        }
        for (idx, &s) in d.states.iter().enumerate() {
            tm.set_state(idx / d.cols, idx % d.cols, s)
                .map_err(|e| Error::Data(e.to_string()))?;
        }
        tm.steps = d.steps;
        Ok(tm)
    }
}
