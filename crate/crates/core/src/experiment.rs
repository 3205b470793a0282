//! Online evaluation: stream rounds through a policy under bandit feedback
//! and score the result by cumulative regret.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandit::{BanditPolicy, Context, Policy, PolicyConfig};
use crate::data::BanditProblem;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    /// Row of the problem pool shown this round.
    pub context: usize,
    pub arm: usize,
    pub reward: u8,
    pub optimal: u8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTrace {
    pub records: Vec<RoundRecord>,
    pub config: Option<PolicyConfig>,
    /// Seed of the round order.
    pub seed: u64,
}

impl ExperimentTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Mean realized reward over rounds `from..` (0-based, clamped).
    pub fn mean_reward_from(&self, from: usize) -> f64 {
        let tail = &self.records[from.min(self.len())..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().map(|r| r.reward as f64).sum::<f64>() / tail.len() as f64
    }
}

/// Runs `policy` for `horizon` rounds over `problem`, with the round order
/// drawn from `seed`. The policy only ever receives the reward of the arm
/// it chose.
pub fn run_policy<P: BanditPolicy + ?Sized>(
    problem: &BanditProblem,
    policy: &mut P,
    horizon: usize,
    seed: u64,
) -> Result<Vec<RoundRecord>> {
    if policy.num_arms() != problem.num_arms() {
        return Err(Error::Config(format!(
            "policy has {} arms but the problem has {}",
            policy.num_arms(),
            problem.num_arms()
        )));
    }
    let mut records = Vec::with_capacity(horizon);
    for round in problem.rounds(seed).take(horizon) {
        let ctx = Context {
            id: round.index,
            raw: round.raw,
            bits: round.bits,
        };
        let arm = policy.select(&ctx)?;
        let reward = *round.rewards.get(arm).ok_or(Error::Index {
            what: "arm",
            index: arm,
            limit: problem.num_arms(),
        })?;
        policy.update(arm, &ctx, reward)?;
        records.push(RoundRecord {
            round: round.t,
            context: round.index,
            arm,
            reward,
            optimal: round.optimal,
        });
    }
    Ok(records)
}

fn build_policy(problem: &BanditProblem, config: &PolicyConfig) -> Result<Policy> {
    if config.kind.uses_tm() && config.tm.num_features != problem.bit_width() {
        return Err(Error::Config(format!(
            "learner expects {} input bits but contexts encode to {}",
            config.tm.num_features,
            problem.bit_width()
        )));
    }
    Policy::new(config.clone(), problem.num_arms(), problem.raw_dim())
}

/// Like [`run_experiment`], also returning the final policy state.
pub fn run_experiment_with_state(
    problem: &BanditProblem,
    config: &PolicyConfig,
    horizon: usize,
    seed: u64,
) -> Result<(ExperimentTrace, Policy)> {
    let mut policy = build_policy(problem, config)?;
    let records = run_policy(problem, &mut policy, horizon, seed)?;
    let trace = ExperimentTrace {
        records,
        config: Some(config.clone()),
        seed,
    };
    Ok((trace, policy))
}

/// One run: a fresh policy from `config` (seeded by `config.seed`) over
/// rounds ordered by `seed`.
pub fn run_experiment(
    problem: &BanditProblem,
    config: &PolicyConfig,
    horizon: usize,
    seed: u64,
) -> Result<ExperimentTrace> {
    Ok(run_experiment_with_state(problem, config, horizon, seed)?.0)
}

const STREAM_SEED: u64 = 0;
const POLICY_SEED: u64 = 1;

/// Seeds of run `run` under `master`: (round order, policy).
pub fn run_seeds(master: u64, run: usize) -> (u64, u64) {
    let base = seed::derive(master, &[run as u64]);
    (seed::derive(base, &[STREAM_SEED]), seed::derive(base, &[POLICY_SEED]))
}

/// Independent runs with seeds from [`run_seeds`], executed on up to `jobs`
/// threads (0 picks the default). Results are in run order and do not depend
/// on `jobs`.
pub fn run_many(
    problem: &BanditProblem,
    config: &PolicyConfig,
    horizon: usize,
    runs: usize,
    master_seed: u64,
    jobs: usize,
) -> Result<Vec<(ExperimentTrace, Policy)>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|run| {
                let (stream, policy) = run_seeds(master_seed, run);
                let cfg = PolicyConfig {
                    seed: policy,
                    ..config.clone()
                };
                run_experiment_with_state(problem, &cfg, horizon, stream)
            })
            .collect()
    })
}

fn running_sum(values: impl Iterator<Item = i64>) -> Vec<i64> {
    values
        .scan(0i64, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

pub fn cumulative_reward(trace: &ExperimentTrace) -> Vec<i64> {
    running_sum(trace.records.iter().map(|r| r.reward as i64))
}

pub fn cumulative_optimal(trace: &ExperimentTrace) -> Vec<i64> {
    running_sum(trace.records.iter().map(|r| r.optimal as i64))
}

/// Entry `t` is `Σ_{τ≤t} (optimal_τ − reward_τ)`.
pub fn cumulative_regret(trace: &ExperimentTrace) -> Vec<i64> {
    running_sum(trace.records.iter().map(|r| r.optimal as i64 - r.reward as i64))
}

/// Pointwise mean and standard error (sample standard deviation over
/// `sqrt(runs)`; zero for a single run) across runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub mean_cum_regret: Vec<f64>,
    pub se_cum_regret: Vec<f64>,
    pub mean_cum_reward: Vec<f64>,
    pub se_cum_reward: Vec<f64>,
}

impl Aggregate {
    pub fn horizon(&self) -> usize {
        self.mean_cum_regret.len()
    }
}

fn mean_se(curves: &[Vec<i64>]) -> (Vec<f64>, Vec<f64>) {
    let n = curves.len() as f64;
    let horizon = curves[0].len();
    let mut mean = Vec::with_capacity(horizon);
    let mut se = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let m = curves.iter().map(|c| c[t] as f64).sum::<f64>() / n;
        let s = if curves.len() > 1 {
            let var = curves.iter().map(|c| (c[t] as f64 - m).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        mean.push(m);
        se.push(s);
    }
    (mean, se)
}

pub fn aggregate_runs(traces: &[ExperimentTrace]) -> Result<Aggregate> {
    let first = traces
        .first()
        .ok_or_else(|| Error::Contract("no traces to aggregate".into()))?;
    if let Some(t) = traces.iter().find(|t| t.len() != first.len()) {
        return Err(Error::Contract(format!(
            "horizon mismatch: {} vs {}",
            first.len(),
            t.len()
        )));
    }
    let regrets: Vec<Vec<i64>> = traces.iter().map(cumulative_regret).collect();
    let rewards: Vec<Vec<i64>> = traces.iter().map(cumulative_reward).collect();
    let (mean_cum_regret, se_cum_regret) = mean_se(&regrets);
    let (mean_cum_reward, se_cum_reward) = mean_se(&rewards);
    Ok(Aggregate {
        runs: traces.len(),
        mean_cum_regret,
        se_cum_regret,
        mean_cum_reward,
        se_cum_reward,
    })
}

pub fn write_trace_csv<W: Write>(trace: &ExperimentTrace, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["round", "arm", "reward", "optimal", "cum_reward", "cum_regret"])?;
    let reward = cumulative_reward(trace);
    let regret = cumulative_regret(trace);
    for (i, r) in trace.records.iter().enumerate() {
        w.write_record([
            r.round.to_string(),
            r.arm.to_string(),
            r.reward.to_string(),
            r.optimal.to_string(),
            reward[i].to_string(),
            regret[i].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<trace output>", e))
}

pub fn write_aggregate_csv<W: Write>(agg: &Aggregate, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "round",
        "mean_cum_regret",
        "se_cum_regret",
        "mean_cum_reward",
        "se_cum_reward",
    ])?;
    for t in 0..agg.horizon() {
        w.write_record([
            (t + 1).to_string(),
            agg.mean_cum_regret[t].to_string(),
            agg.se_cum_regret[t].to_string(),
            agg.mean_cum_reward[t].to_string(),
            agg.se_cum_reward[t].to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<aggregate output>", e))
}

pub fn save_trace_csv(trace: &ExperimentTrace, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trace_csv(trace, f)
}

pub fn save_aggregate_csv(agg: &Aggregate, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_aggregate_csv(agg, f)
}
