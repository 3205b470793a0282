//! Per-automaton feedback decisions for Type I and Type II feedback.
//!
//! Each decision names the transition an automaton experiences and the
//! resulting state change. Reward on Include and Penalty on Exclude both move
//! the state up; the reverse moves it down.

use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Exclude,
    Include,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    Reward,
    Inaction,
    Penalty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FeedbackDecision {
    pub transition: Transition,
    /// State change before clipping: -1, 0 or +1.
    pub delta: i8,
}

impl FeedbackDecision {
    pub const INACTION: Self = Self {
        transition: Transition::Inaction,
        delta: 0,
    };

    /// Builds the decision for a state change applied to an automaton
    /// currently performing `action`.
    #[inline]
    pub fn from_delta(action: Action, delta: i8) -> Self {
        let transition = match (action, delta.signum()) {
            (_, 0) => Transition::Inaction,
            (Action::Include, 1) | (Action::Exclude, -1) => Transition::Reward,
            _ => Transition::Penalty,
        };
        Self { transition, delta }
    }
}

/// Type I feedback for one automaton.
///
/// When both clause and literal are 1 the state is raised with probability
/// `(s-1)/s` (Type Ia, or always when `boost_true_positives`). Otherwise it is
/// lowered with probability `1/s` (Type Ib).
#[inline]
pub fn type_i_feedback<R: Rng + ?Sized>(
    action: Action,
    clause: bool,
    literal: bool,
    specificity: f64,
    boost_true_positives: bool,
    rng: &mut R,
) -> FeedbackDecision {
    if clause && literal {
        let fire = boost_true_positives || rng.random_bool((specificity - 1.0) / specificity);
        if fire {
            FeedbackDecision::from_delta(action, 1)
        } else {
            FeedbackDecision::INACTION
        }
    } else if rng.random_bool(1.0 / specificity) {
        FeedbackDecision::from_delta(action, -1)
    } else {
        FeedbackDecision::INACTION
    }
}

/// Type II feedback for one automaton: an excluded 0-valued literal in a
/// firing clause is penalized; everything else is left alone.
#[inline]
pub fn type_ii_feedback(action: Action, clause: bool, literal: bool) -> FeedbackDecision {
    if clause && !literal && action == Action::Exclude {
        FeedbackDecision::from_delta(action, 1)
    } else {
        FeedbackDecision::INACTION
    }
}
