//! Naive value iteration for the optimal mean payoff.
//!
//! `t_n(s)` is the optimal expected `n`-step total reward and
//! `Δ_n = t_n - t_{n-1}`. For any vector `v` and the Bellman operator `T`,
//! `min(Tv - v) ≤ gain ≤ max(Tv - v)`, so the span of `Δ_n` bounds the error of
//! any estimate taken from inside `[min Δ_n, max Δ_n]`.
//!
//! Iterates are stored relative to an offset (`t_n = offset + t`), which keeps the
//! stored vector bounded while `t_n` grows linearly.

use std::time::Instant;

use thiserror::Error;

use crate::mdp::{Mdp, ModelError};
use crate::mec::{classify, Classification};
use crate::numeric::normalized_bounds;

pub const DEFAULT_MAX_ITERS: u64 = 10_000_000;
pub const DEFAULT_TAU: f64 = 0.95;

#[derive(Debug, Error)]
pub enum ViError {
    #[error("span of an empty vector")]
    EmptyVector,
    #[error("value bounds need at least one iteration")]
    NoSteps,
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("SC1 needs a communicating model; this one is multichain")]
    Multichain,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `max(v) - min(v)`.
pub fn span(v: &[f64]) -> Result<f64, ViError> {
    let (lo, hi) = min_max(v).ok_or(ViError::EmptyVector)?;
    Ok(hi - lo)
}

fn min_max(v: &[f64]) -> Option<(f64, f64)> {
    let first = *v.first()?;
    Some(v.iter().fold((first, first), |(lo, hi), &x| (lo.min(x), hi.max(x))))
}

/// Value-iteration iterate `t_n` together with `Δ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ViState {
    t: Vec<f64>,
    offset: f64,
    n: u64,
    delta: Vec<f64>,
    error_bound: f64,
}

impl ViState {
    /// `t_0 = 0`.
    pub fn new(num_states: usize) -> Self {
        Self::from_values(vec![0.0; num_states])
    }

    pub fn from_values(t: Vec<f64>) -> Self {
        Self {
            delta: vec![0.0; t.len()],
            t,
            offset: 0.0,
            n: 0,
            error_bound: 0.0,
        }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `t_n(s)`.
    pub fn value(&self, s: usize) -> f64 {
        self.offset + self.t[s]
    }

    pub fn values(&self) -> Vec<f64> {
        self.t.iter().map(|x| self.offset + x).collect()
    }

    /// `Δ_n`; all zero before the first step.
    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    /// Bound on the floating-point error of every entry of `Δ_n`.
    pub fn error_bound(&self) -> f64 {
        self.error_bound
    }

    /// Shifts the stored vector so its minimum is zero; `t_n` is unchanged up to rounding.
    pub fn normalize(&mut self) {
        if let Some((lo, _)) = min_max(&self.t) {
            self.offset += lo;
            for x in &mut self.t {
                *x -= lo;
            }
        }
    }

    /// Bellman step in place, followed by [`ViState::normalize`].
    pub fn advance(&mut self, mdp: &Mdp) {
        let mut scratch = Vec::with_capacity(self.t.len());
        self.step(mdp, &mut scratch);
        self.normalize();
    }

    fn step(&mut self, mdp: &Mdp, scratch: &mut Vec<f64>) {
        let scale = self.t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut err = 0.0f64;
        scratch.clear();
        for s in 0..mdp.num_states() {
            let mut best = f64::NEG_INFINITY;
            for e in mdp.actions(s) {
                let mut v = e.reward;
                for &(t, p) in &e.successors {
                    v += p * self.t[t];
                }
                if v > best {
                    best = v;
                }
                err = err.max((e.successors.len() + 4) as f64 * (e.reward + scale));
            }
            scratch.push(best);
        }
        for (s, &next) in scratch.iter().enumerate() {
            self.delta[s] = next - self.t[s];
        }
        std::mem::swap(&mut self.t, scratch);
        self.n += 1;
        self.error_bound = err * f64::EPSILON;
    }
}

/// One Bellman step `t_{n+1}(s) = max_a (r(s,a) + Σ Δ(s,a,s')·t_n(s'))`.
pub fn vi_step(mdp: &Mdp, state: &ViState) -> ViState {
    let mut next = state.clone();
    next.step(mdp, &mut Vec::with_capacity(mdp.num_states()));
    next
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopRule {
    /// `sp(Δ_n) < ε`; sound on communicating models.
    Sc1,
    /// `sp(Δ_{n-1}) - sp(Δ_n) < ε`; unsound.
    Sc2,
    /// `‖Δ_n - Δ_{n-1}‖∞ < ε`; unsound.
    Sc3,
}

impl StopRule {
    pub fn is_sound(self) -> bool {
        self == StopRule::Sc1
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StopRule::Sc1 => "sc1",
            StopRule::Sc2 => "sc2",
            StopRule::Sc3 => "sc3",
        }
    }
}

impl std::str::FromStr for StopRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [StopRule::Sc1, StopRule::Sc2, StopRule::Sc3]
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown criterion `{s}` (expected sc1, sc2 or sc3)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Criterion {
    pub rule: StopRule,
    pub epsilon: f64,
}

impl Criterion {
    pub fn new(rule: StopRule, epsilon: f64) -> Result<Self, ViError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(ViError::InvalidEpsilon(epsilon));
        }
        Ok(Self { rule, epsilon })
    }

    pub fn sc1(epsilon: f64) -> Result<Self, ViError> {
        Self::new(StopRule::Sc1, epsilon)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ViOptions {
    pub max_iters: u64,
    /// Aperiodicity parameter applied before SC1 runs.
    pub tau: f64,
    pub deadline: Option<Instant>,
}

impl Default for ViOptions {
    fn default() -> Self {
        Self {
            max_iters: DEFAULT_MAX_ITERS,
            tau: DEFAULT_TAU,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViResult {
    pub value: f64,
    pub iterations: u64,
    pub converged: bool,
    /// `Δ_n` at termination.
    pub delta: Vec<f64>,
    pub span: f64,
    /// Set for SC2/SC3, whose stopping decision carries no error guarantee.
    pub criterion_unsound: bool,
    /// Final iterate; lets callers resume or derive bounds.
    pub state: ViState,
}

/// SC1 check on a state, widened by the rounding error of `Δ_n`.
pub fn sc1_met(state: &ViState, epsilon: f64) -> bool {
    state.n > 0
        && span(&state.delta).is_ok_and(|sp| sp + 2.0 * state.error_bound < epsilon)
}

/// Midpoint of the range of `Δ_n`.
pub fn midpoint(state: &ViState) -> f64 {
    let (lo, hi) = min_max(&state.delta).unwrap_or((0.0, 0.0));
    (lo + hi) / 2.0
}

/// Naive value iteration.
///
/// SC1 first rejects multichain models and applies the aperiodicity transform
/// with `options.tau`; its value is the midpoint of `Δ_n`. SC2 and SC3 iterate the
/// model as given and return `t_n(init)/n`.
pub fn run_vi(mdp: &Mdp, criterion: Criterion, options: &ViOptions) -> Result<ViResult, ViError> {
    Criterion::new(criterion.rule, criterion.epsilon)?;
    let eps = criterion.epsilon;
    let transformed;
    let model = if criterion.rule == StopRule::Sc1 {
        if classify(mdp) == Classification::Multichain {
            return Err(ViError::Multichain);
        }
        transformed = mdp.apply_aperiodicity_transform(options.tau)?;
        &transformed
    } else {
        mdp
    };

    let mut state = ViState::new(model.num_states());
    let mut scratch = Vec::with_capacity(model.num_states());
    let mut prev_delta = vec![0.0; model.num_states()];
    let mut prev_span = 0.0;
    let mut converged = false;
    while state.n < options.max_iters {
        std::mem::swap(&mut prev_delta, &mut state.delta);
        state.step(model, &mut scratch);
        state.normalize();
        let sp = span(&state.delta)?;
        let stop = match criterion.rule {
            StopRule::Sc1 => sc1_met(&state, eps),
            StopRule::Sc2 => state.n >= 2 && prev_span - sp < eps,
            StopRule::Sc3 => {
                state.n >= 2
                    && state
                        .delta
                        .iter()
                        .zip(&prev_delta)
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                        < eps
            }
        };
        prev_span = sp;
        if stop {
            converged = true;
            break;
        }
        if state.n.is_multiple_of(1024) && options.deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
    }

    let value = match criterion.rule {
        StopRule::Sc1 => midpoint(&state),
        _ if state.n == 0 => 0.0,
        _ => state.value(model.initial()) / state.n as f64,
    };
    Ok(ViResult {
        value,
        iterations: state.n,
        converged,
        span: span(&state.delta)?,
        delta: state.delta.clone(),
        criterion_unsound: !criterion.rule.is_sound(),
        state,
    })
}

/// Bounds `(lo, hi) ⊆ [0, 1]` on `gain / r_max` for a model in which every state has
/// the same optimal gain, read off `Δ_n` and widened by its rounding error.
pub fn mec_value_bounds(state: &ViState, r_max: f64) -> Result<(f64, f64), ViError> {
    if state.n == 0 {
        return Err(ViError::NoSteps);
    }
    let (lo, hi) = min_max(&state.delta).ok_or(ViError::EmptyVector)?;
    if r_max <= 0.0 {
        return Ok((0.0, 0.0));
    }
    Ok(normalized_bounds(lo - state.error_bound, hi + state.error_bound, r_max))
}
