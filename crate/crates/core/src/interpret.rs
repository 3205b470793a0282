//! Rule extraction: clause literal sets as a disjunctive normal form.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::tm::{BinarySample, TmState};

/// A possibly negated reference to input bit `feature` (0-based; rendered
/// 1-based as `x1`, `x2`, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub feature: usize,
    pub negated: bool,
}

impl Literal {
    pub fn pos(feature: usize) -> Self {
        Self {
            feature,
            negated: false,
        }
    }

    pub fn neg(feature: usize) -> Self {
        Self {
            feature,
            negated: true,
        }
    }

    fn name(&self) -> String {
        format!("x{}", self.feature + 1)
    }

    fn holds(&self, x: &BinarySample) -> bool {
        x.get(self.feature) != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬")?;
        }
        write!(f, "x{}", self.feature + 1)
    }
}

pub type Term = BTreeSet<Literal>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Pos,
    Neg,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnfExpression {
    terms: Vec<Term>,
}

impl DnfExpression {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in display order: shorter terms first, then by literal names
    /// compared as strings (so `x10` sorts before `x3`).
    fn sorted_terms(&self) -> Vec<&Term> {
        let mut terms: Vec<&Term> = self.terms.iter().collect();
        terms.sort_by(|a, b| compare_terms(a, b));
        terms
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<Vec<String>> = self
            .sorted_terms()
            .into_iter()
            .map(|t| t.iter().map(Literal::to_string).collect())
            .collect();
        json!({ "text": render_dnf(self), "terms": terms })
    }
}

fn compare_terms(a: &Term, b: &Term) -> Ordering {
    let key = |t: &Term| -> Vec<(String, bool)> {
        let mut k: Vec<(String, bool)> = t.iter().map(|l| (l.name(), l.negated)).collect();
        k.sort();
        k
    };
    a.len().cmp(&b.len()).then_with(|| key(a).cmp(&key(b)))
}

impl fmt::Display for DnfExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_dnf(self))
    }
}

/// The DNF of one polarity's clauses: one term per non-empty clause, simplified.
pub fn extract_dnf(tm: &TmState, polarity: Polarity) -> DnfExpression {
    let o = tm.config().num_features;
    let start = match polarity {
        Polarity::Pos => 0,
        Polarity::Neg => 1,
    };
    let terms = (start..tm.num_clauses())
        .step_by(2)
        .filter_map(|j| {
            let lits = tm.clause_literals(j).expect("clause index in range");
            (!lits.is_empty()).then(|| {
                lits.into_iter()
                    .map(|k| if k < o { Literal::pos(k) } else { Literal::neg(k - o) })
                    .collect::<Term>()
            })
        })
        .collect();
    simplify_dnf(&DnfExpression::new(terms))
}

/// The arm's rule: positive-polarity clauses as a simplified DNF.
pub fn extract_arm_dnf(tm: &TmState) -> DnfExpression {
    extract_dnf(tm, Polarity::Pos)
}

fn contradictory(term: &Term) -> bool {
    term.iter()
        .any(|l| !l.negated && term.contains(&Literal::neg(l.feature)))
}

/// Drops contradictory terms, duplicates, and terms absorbed by a subset term.
pub fn simplify_dnf(expr: &DnfExpression) -> DnfExpression {
    let mut terms: Vec<Term> = expr
        .terms
        .iter()
        .filter(|t| !contradictory(t))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    // a subset is never longer than its superset, so test against shorter terms only
    terms.sort_by_key(|t| t.len());
    let mut kept: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        if !kept.iter().any(|k| k.is_subset(&t)) {
            kept.push(t);
        }
    }
    kept.sort();
    DnfExpression::new(kept)
}

/// True iff some term's literals all hold in `x`.
pub fn dnf_eval(expr: &DnfExpression, x: &BinarySample) -> Result<bool> {
    for l in expr.terms.iter().flatten() {
        if l.feature >= x.len() {
            return Err(Error::Index {
                what: "literal feature",
                index: l.feature,
                limit: x.len(),
            });
        }
    }
    Ok(expr.terms.iter().any(|t| t.iter().all(|l| l.holds(x))))
}

/// Renders with `¬`, `∧`, `∨`; multi-literal terms are parenthesized and the
/// empty disjunction is `⊥`.
pub fn render_dnf(expr: &DnfExpression) -> String {
    if expr.terms.is_empty() {
        return "⊥".to_string();
    }
    expr.sorted_terms()
        .into_iter()
        .map(|t| match t.len() {
            0 => "⊤".to_string(),
            1 => t.iter().next().unwrap().to_string(),
            _ => format!(
                "({})",
                t.iter().map(Literal::to_string).collect::<Vec<_>>().join(" ∧ ")
            ),
        })
        .collect::<Vec<_>>()
        .join(" ∨ ")
}
