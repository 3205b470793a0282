use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use nalgebra::DMatrix;

use super::problem::{BanditProblem, ContextEncoder};
use super::svd::{truncated_svd, SvdFactors};
use crate::error::{Error, Result};

/// A users × items interaction matrix (0 where unrated).
#[derive(Clone, Debug)]
pub struct RatingMatrix {
    pub users: Vec<String>,
    pub items: Vec<String>,
    pub values: DMatrix<f64>,
}

impl RatingMatrix {
    /// Keeps the `k` items with the most nonzero entries (ties to the earlier
    /// item), preserving column order.
    pub fn top_k_items(&self, k: usize) -> RatingMatrix {
        let counts: Vec<usize> = (0..self.values.ncols())
            .map(|c| self.values.column(c).iter().filter(|&&v| v != 0.0).count())
            .collect();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        let mut keep: Vec<usize> = order.into_iter().take(k).collect();
        keep.sort();
        RatingMatrix {
            users: self.users.clone(),
            items: keep.iter().map(|&c| self.items[c].clone()).collect(),
            values: self.values.select_columns(&keep),
        }
    }
}

/// Reads `user,item,rating` triples (header required). Ids are mapped in
/// order of first appearance; repeated pairs keep the last rating.
pub fn load_ratings(path: &Path) -> Result<RatingMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut users: Vec<String> = Vec::new();
    let mut items: Vec<String> = Vec::new();
    let mut user_ix: HashMap<String, usize> = HashMap::new();
    let mut item_ix: HashMap<String, usize> = HashMap::new();
    let mut triples = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        if rec.len() < 3 {
            return Err(Error::Data(format!("{}: expected user,item,rating", path.display())));
        }
        let rating: f64 = rec[2]
            .parse()
            .map_err(|_| Error::Data(format!("{}: bad rating {:?}", path.display(), &rec[2])))?;
        let u = *user_ix.entry(rec[0].to_string()).or_insert_with(|| {
            users.push(rec[0].to_string());
            users.len() - 1
        });
        let i = *item_ix.entry(rec[1].to_string()).or_insert_with(|| {
            items.push(rec[1].to_string());
            items.len() - 1
        });
        triples.push((u, i, rating));
    }
    if triples.is_empty() {
        return Err(Error::Data(format!("{}: no ratings", path.display())));
    }
    let mut values = DMatrix::zeros(users.len(), items.len());
    for (u, i, r) in triples {
        values[(u, i)] = r;
    }
    Ok(RatingMatrix { users, items, values })
}

/// Rank-`r` recommender bandit: context of user `i` is row `W_i`, raw reward
/// of item `j` is `W_i · X_j`, and the binary reward vector is one-hot at the
/// raw argmax (ties to the lowest item index).
#[derive(Clone, Debug)]
pub struct RecommenderBandit {
    pub factors: SvdFactors,
    pub contexts: Vec<Vec<f64>>,
    pub raw_rewards: DMatrix<f64>,
    pub rewards: Vec<Vec<u8>>,
}

impl RecommenderBandit {
    pub fn to_problem(&self, encoder: &ContextEncoder) -> Result<BanditProblem> {
        BanditProblem::new(self.contexts.clone(), self.rewards.clone(), encoder)
    }
}

pub fn recommender_to_bandit(s: &DMatrix<f64>, rank: usize) -> Result<RecommenderBandit> {
    if s.is_empty() {
        return Err(Error::Data("interaction matrix is empty".into()));
    }
    let factors = truncated_svd(s, rank)?;
    let raw_rewards = factors.reconstruct();
    let contexts = (0..factors.w.nrows())
        .map(|i| factors.w.row(i).iter().copied().collect())
        .collect();
    let rewards = (0..raw_rewards.nrows())
        .map(|i| {
            let row = raw_rewards.row(i);
            let best = (0..row.len()).fold(0, |b, j| if row[j] > row[b] { j } else { b });
            let mut r = vec![0u8; row.len()];
            r[best] = 1;
            r
        })
        .collect();
    Ok(RecommenderBandit {
        factors,
        contexts,
        raw_rewards,
        rewards,
    })
}
