//! Two-sided value iteration for maximal reachability on models whose only end
//! components are absorbing states.
//!
//! Without other end components the iteration from above converges to the true
//! value, so the gap at the initial state is a certified error bound.

use thiserror::Error;

use crate::mdp::{Mdp, StateId};
use crate::mec::compute_mecs;
use crate::numeric::weighted_bounds;

pub const MAX_SWEEPS: u64 = 100_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum ReachError {
    #[error("target set is empty")]
    EmptyTarget,
    #[error("target state {0} out of range")]
    TargetOutOfRange(StateId),
    #[error("precision must be positive, got {0}")]
    InvalidPrecision(f64),
    #[error("model has a nontrivial end component on states {0:?}; collapse it first")]
    EndComponent(Vec<StateId>),
    #[error("no convergence within {0} sweeps")]
    SweepLimit(u64),
}

/// Per-state lower and upper bounds on the maximal reachability probability.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachResult {
    /// Midpoint of the bounds at the initial state.
    pub p: f64,
    pub lower: f64,
    pub upper: f64,
    pub sweeps: u64,
    pub bounds: ReachBounds,
}

fn is_absorbing(model: &Mdp, s: StateId) -> bool {
    model.actions(s).iter().all(|e| e.is_self_loop(s))
}

impl ReachBounds {
    /// Upper bound 1 except at absorbing non-targets (0); lower bound 0 except at targets (1).
    pub fn initial(model: &Mdp, is_target: &[bool]) -> Self {
        let n = model.num_states();
        let mut lower = vec![0.0; n];
        let mut upper = vec![1.0; n];
        for s in 0..n {
            if is_target[s] {
                lower[s] = 1.0;
            } else if is_absorbing(model, s) {
                upper[s] = 0.0;
            }
        }
        Self { lower, upper }
    }
}

/// One synchronous Bellman sweep on both bound vectors. Targets stay at 1,
/// absorbing states keep their value; bounds only ever tighten.
pub fn bellman_reach_step(model: &Mdp, is_target: &[bool], bounds: &ReachBounds) -> ReachBounds {
    let mut next = bounds.clone();
    for s in 0..model.num_states() {
        if is_target[s] || is_absorbing(model, s) {
            continue;
        }
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for e in model.actions(s) {
            let (l, u) = weighted_bounds(
                e.successors
                    .iter()
                    .map(|&(t, p)| (p, bounds.lower[t], bounds.upper[t])),
            );
            lo = lo.max(l);
            hi = hi.max(u);
        }
        next.lower[s] = bounds.lower[s].max(lo);
        next.upper[s] = bounds.upper[s].min(hi);
    }
    next
}

/// Maximal probability of reaching `target` from the initial state, to within `precision`.
pub fn interval_reach(model: &Mdp, target: &[StateId], precision: f64) -> Result<ReachResult, ReachError> {
    if !(precision > 0.0) {
        return Err(ReachError::InvalidPrecision(precision));
    }
    if target.is_empty() {
        return Err(ReachError::EmptyTarget);
    }
    let n = model.num_states();
    let mut is_target = vec![false; n];
    for &t in target {
        if t >= n {
            return Err(ReachError::TargetOutOfRange(t));
        }
        is_target[t] = true;
    }
    for mec in compute_mecs(model) {
        if mec.len() > 1 || !is_absorbing(model, mec.states()[0]) {
            return Err(ReachError::EndComponent(mec.states().to_vec()));
        }
    }

    let init = model.initial();
    let mut bounds = ReachBounds::initial(model, &is_target);
    let mut sweeps = 0;
    while bounds.upper[init] - bounds.lower[init] >= 2.0 * precision {
        if sweeps == MAX_SWEEPS {
            return Err(ReachError::SweepLimit(MAX_SWEEPS));
        }
        bounds = bellman_reach_step(model, &is_target, &bounds);
        sweeps += 1;
    }
    let (lower, upper) = (bounds.lower[init], bounds.upper[init]);
    Ok(ReachResult {
        p: (lower + upper) / 2.0,
        lower,
        upper,
        sweeps,
        bounds,
    })
}
