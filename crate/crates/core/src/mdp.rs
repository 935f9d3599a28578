//! Explicit-state MDP representation and the elementary manipulations shared by
//! every solver.
//!
//! States and actions are dense indices. An action is always addressed as the
//! pair `(state, action-index)`, so action labels only matter for I/O.
//!
//! The probability/reward type is generic over [`Weight`]: iterative solvers run
//! on `Mdp<f64>`, the exact oracle on `Mdp<BigRational>`.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Num, One};
use thiserror::Error;

use crate::mec::Mec;

pub type StateId = usize;

/// Absolute tolerance on `|sum - 1|` for floating-point distributions.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Numeric type usable for probabilities and rewards.
pub trait Weight: Clone + PartialOrd + Num + fmt::Debug + fmt::Display + Send + Sync {
    /// Whether `sum` counts as a total probability of one.
    fn is_unit_sum(sum: &Self) -> bool;

    fn is_finite_value(&self) -> bool {
        true
    }
}

impl Weight for f64 {
    fn is_unit_sum(sum: &f64) -> bool {
        (sum - 1.0).abs() <= SUM_TOLERANCE
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Weight for BigRational {
    fn is_unit_sum(sum: &BigRational) -> bool {
        sum.is_one()
    }
}

/// One available action of a state: label, reward and sparse successor distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionEntry<W = f64> {
    pub label: String,
    pub reward: W,
    pub successors: Vec<(StateId, W)>,
}

impl<W> ActionEntry<W> {
    pub fn new(label: impl Into<String>, reward: W, successors: Vec<(StateId, W)>) -> Self {
        Self {
            label: label.into(),
            reward,
            successors,
        }
    }

    /// True when every successor of the action is `state` itself.
    pub fn is_self_loop(&self, state: StateId) -> bool {
        self.successors.iter().all(|&(t, _)| t == state)
    }

    pub fn successor_states(&self) -> impl Iterator<Item = StateId> + '_ {
        self.successors.iter().map(|&(t, _)| t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    NoStates,
    InitialOutOfRange { initial: StateId, num_states: usize },
    NoActions,
    NegativeReward(String),
    NonFiniteReward(String),
    ProbabilityOutOfRange { successor: StateId, probability: String },
    DistributionSum(String),
    SuccessorOutOfRange(StateId),
    DuplicateSuccessor(StateId),
}

/// A single broken invariant, with the coordinates it was found at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub state: Option<StateId>,
    pub action: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.state, self.action) {
            (Some(s), Some(a)) => write!(f, "state {s}, action {a}: ")?,
            (Some(s), None) => write!(f, "state {s}: ")?,
            _ => {}
        }
        match &self.kind {
            ViolationKind::NoStates => write!(f, "model has no states"),
            ViolationKind::InitialOutOfRange {
                initial,
                num_states,
            } => write!(f, "initial state {initial} out of range (model has {num_states} states)"),
            ViolationKind::NoActions => write!(f, "state has no available action"),
            ViolationKind::NegativeReward(r) => write!(f, "negative reward {r}"),
            ViolationKind::NonFiniteReward(r) => write!(f, "reward {r} is not finite"),
            ViolationKind::ProbabilityOutOfRange {
                successor,
                probability,
            } => write!(f, "probability {probability} of successor {successor} outside (0, 1]"),
            ViolationKind::DistributionSum(sum) => write!(f, "distribution sums to {sum}"),
            ViolationKind::SuccessorOutOfRange(t) => write!(f, "successor {t} out of range"),
            ViolationKind::DuplicateSuccessor(t) => write!(f, "successor {t} listed twice"),
        }
    }
}

/// Result of [`Mdp::validate`]; empty iff the model is well-formed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, state: Option<StateId>, action: Option<usize>, kind: ViolationKind) {
        self.violations.push(Violation {
            state,
            action,
            kind,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
    #[error("initial state {0} is not part of the end component")]
    InitialNotInComponent(StateId),
    #[error("action {action} of state {state} leaves the end component")]
    ActionLeavesComponent { state: StateId, action: usize },
    #[error("state {0} has no action inside the end component")]
    NoComponentAction(StateId),
    #[error("aperiodicity parameter must lie strictly between 0 and 1, got {0}")]
    InvalidTau(String),
    #[error("strategy covers {got} states, model has {expected}")]
    StrategyLength { expected: usize, got: usize },
    #[error("strategy picks action {action} in state {state}, which has only {available}")]
    InvalidChoice {
        state: StateId,
        action: usize,
        available: usize,
    },
}

/// Finite MDP with nonnegative state-action rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct Mdp<W = f64> {
    initial: StateId,
    actions: Vec<Vec<ActionEntry<W>>>,
}

/// A MEC-restricted model together with the index maps back into the source model.
#[derive(Debug, Clone)]
pub struct Restricted<W = f64> {
    pub mdp: Mdp<W>,
    /// `states[local]` is the original state.
    pub states: Vec<StateId>,
    /// `actions[local][i]` is the original action index of local action `i`.
    pub actions: Vec<Vec<usize>>,
}

impl<W: Weight> Mdp<W> {
    /// Builds a model without checking it; see [`Mdp::validate`].
    pub fn new(initial: StateId, actions: Vec<Vec<ActionEntry<W>>>) -> Self {
        Self { initial, actions }
    }

    /// Builds a model and rejects it unless it passes [`Mdp::validate`].
    pub fn checked(initial: StateId, actions: Vec<Vec<ActionEntry<W>>>) -> Result<Self, ModelError> {
        let mdp = Self::new(initial, actions);
        let report = mdp.validate();
        if report.is_empty() {
            Ok(mdp)
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    pub fn num_states(&self) -> usize {
        self.actions.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn actions(&self, state: StateId) -> &[ActionEntry<W>] {
        &self.actions[state]
    }

    pub fn action(&self, state: StateId, action: usize) -> &ActionEntry<W> {
        &self.actions[state][action]
    }

    pub fn num_actions_total(&self) -> usize {
        self.actions.iter().map(Vec::len).sum()
    }

    /// Iterates over all `(state, action-index, entry)` triples.
    pub fn state_actions(&self) -> impl Iterator<Item = (StateId, usize, &ActionEntry<W>)> {
        self.actions
            .iter()
            .enumerate()
            .flat_map(|(s, acts)| acts.iter().enumerate().map(move |(a, e)| (s, a, e)))
    }

    /// Same model with a different initial state.
    pub fn with_initial(&self, initial: StateId) -> Self {
        Self {
            initial,
            actions: self.actions.clone(),
        }
    }

    pub fn into_actions(self) -> Vec<Vec<ActionEntry<W>>> {
        self.actions
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.num_states();
        if n == 0 {
            report.push(None, None, ViolationKind::NoStates);
            return report;
        }
        if self.initial >= n {
            report.push(
                None,
                None,
                ViolationKind::InitialOutOfRange {
                    initial: self.initial,
                    num_states: n,
                },
            );
        }
        for (s, acts) in self.actions.iter().enumerate() {
            if acts.is_empty() {
                report.push(Some(s), None, ViolationKind::NoActions);
            }
            for (a, entry) in acts.iter().enumerate() {
                let at = (Some(s), Some(a));
                if !entry.reward.is_finite_value() {
                    report.push(at.0, at.1, ViolationKind::NonFiniteReward(entry.reward.to_string()));
                } else if entry.reward < W::zero() {
                    report.push(at.0, at.1, ViolationKind::NegativeReward(entry.reward.to_string()));
                }
                let mut sum = W::zero();
                let mut seen: Vec<StateId> = Vec::with_capacity(entry.successors.len());
                for (t, p) in &entry.successors {
                    if *t >= n {
                        report.push(at.0, at.1, ViolationKind::SuccessorOutOfRange(*t));
                    }
                    if seen.contains(t) {
                        report.push(at.0, at.1, ViolationKind::DuplicateSuccessor(*t));
                    }
                    seen.push(*t);
                    if !p.is_finite_value() || *p <= W::zero() || *p > W::one() {
                        report.push(
                            at.0,
                            at.1,
                            ViolationKind::ProbabilityOutOfRange {
                                successor: *t,
                                probability: p.to_string(),
                            },
                        );
                    }
                    sum = sum + p.clone();
                }
                if !W::is_unit_sum(&sum) {
                    report.push(at.0, at.1, ViolationKind::DistributionSum(sum.to_string()));
                }
            }
        }
        report
    }

    /// Largest state-action reward; zero for a model without positive rewards.
    pub fn max_reward(&self) -> W {
        self.state_actions()
            .map(|(_, _, e)| e.reward.clone())
            .fold(W::zero(), |m, r| if r > m { r } else { m })
    }

    /// Restricts the model to the end component `mec`, re-packing state indices
    /// densely in ascending original order.
    pub fn restrict_to_mec(&self, mec: &Mec, initial: StateId) -> Result<Restricted<W>, ModelError> {
        let states = mec.states().to_vec();
        let local = |s: StateId| states.binary_search(&s).ok();
        let init_local = local(initial).ok_or(ModelError::InitialNotInComponent(initial))?;

        let mut actions = Vec::with_capacity(states.len());
        let mut origin = Vec::with_capacity(states.len());
        for &s in &states {
            let mut acts = Vec::new();
            let mut orig = Vec::new();
            for (a, entry) in self.actions[s].iter().enumerate() {
                if !mec.contains_action(s, a) {
                    continue;
                }
                let mut succ = Vec::with_capacity(entry.successors.len());
                for (t, p) in &entry.successors {
                    let lt = local(*t).ok_or(ModelError::ActionLeavesComponent { state: s, action: a })?;
                    succ.push((lt, p.clone()));
                }
                acts.push(ActionEntry::new(entry.label.clone(), entry.reward.clone(), succ));
                orig.push(a);
            }
            if acts.is_empty() {
                return Err(ModelError::NoComponentAction(s));
            }
            actions.push(acts);
            origin.push(orig);
        }
        Ok(Restricted {
            mdp: Mdp::new(init_local, actions),
            states,
            actions: origin,
        })
    }

    /// Mixes every distribution with a self-loop: `(1 - tau)·[s] + tau·Δ(s, a, ·)`.
    /// Rewards are kept, so the gain of every state is unchanged.
    pub fn apply_aperiodicity_transform(&self, tau: W) -> Result<Self, ModelError> {
        if !(tau > W::zero() && tau < W::one()) {
            return Err(ModelError::InvalidTau(tau.to_string()));
        }
        let stay = W::one() - tau.clone();
        let actions = self
            .actions
            .iter()
            .enumerate()
            .map(|(s, acts)| {
                acts.iter()
                    .map(|entry| {
                        if entry.successors.len() == 1 && entry.successors[0].0 == s {
                            return entry.clone();
                        }
                        let mut succ: Vec<(StateId, W)> = Vec::with_capacity(entry.successors.len() + 1);
                        if !entry.successors.iter().any(|&(t, _)| t == s) {
                            succ.push((s, stay.clone()));
                        }
                        for (t, p) in &entry.successors {
                            let q = tau.clone() * p.clone();
                            if *t == s {
                                succ.push((*t, stay.clone() + q));
                            } else {
                                succ.push((*t, q));
                            }
                        }
                        ActionEntry::new(entry.label.clone(), entry.reward.clone(), succ)
                    })
                    .collect()
            })
            .collect();
        Ok(Self::new(self.initial, actions))
    }

    /// The Markov chain obtained by fixing one action per state.
    pub fn induced_chain(&self, strategy: &PositionalStrategy) -> Result<MarkovChain<W>, ModelError> {
        strategy.check(self)?;
        let mut rewards = Vec::with_capacity(self.num_states());
        let mut transitions = Vec::with_capacity(self.num_states());
        for (s, &a) in strategy.choices().iter().enumerate() {
            let entry = &self.actions[s][a];
            rewards.push(entry.reward.clone());
            transitions.push(entry.successors.clone());
        }
        Ok(MarkovChain {
            rewards,
            transitions,
        })
    }

    /// Converts every probability and reward, keeping the structure.
    pub fn try_map_weights<V, E>(&self, mut f: impl FnMut(&W) -> Result<V, E>) -> Result<Mdp<V>, E> {
        let mut actions = Vec::with_capacity(self.num_states());
        for acts in &self.actions {
            let mut out = Vec::with_capacity(acts.len());
            for entry in acts {
                let mut succ = Vec::with_capacity(entry.successors.len());
                for (t, p) in &entry.successors {
                    succ.push((*t, f(p)?));
                }
                out.push(ActionEntry {
                    label: entry.label.clone(),
                    reward: f(&entry.reward)?,
                    successors: succ,
                });
            }
            actions.push(out);
        }
        Ok(Mdp {
            initial: self.initial,
            actions,
        })
    }
}

/// Memoryless deterministic strategy: one action index per state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PositionalStrategy(Vec<usize>);

impl PositionalStrategy {
    pub fn new(choices: Vec<usize>) -> Self {
        Self(choices)
    }

    pub fn choices(&self) -> &[usize] {
        &self.0
    }

    pub fn check<W: Weight>(&self, mdp: &Mdp<W>) -> Result<(), ModelError> {
        if self.0.len() != mdp.num_states() {
            return Err(ModelError::StrategyLength {
                expected: mdp.num_states(),
                got: self.0.len(),
            });
        }
        for (s, &a) in self.0.iter().enumerate() {
            let available = mdp.actions(s).len();
            if a >= available {
                return Err(ModelError::InvalidChoice {
                    state: s,
                    action: a,
                    available,
                });
            }
        }
        Ok(())
    }
}

/// Discrete-time Markov chain with state rewards.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovChain<W = f64> {
    pub rewards: Vec<W>,
    pub transitions: Vec<Vec<(StateId, W)>>,
}

impl<W> MarkovChain<W> {
    pub fn num_states(&self) -> usize {
        self.transitions.len()
    }
}
