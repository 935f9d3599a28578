//! MEC-local value iteration.
//!
//! Every MEC is solved on its own to within `ε/2`; the normalized MEC values then
//! become `stay` probabilities of the weighted quotient, whose maximal probability
//! of reaching `s+`, scaled by `r_max`, is the gain of the initial state.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::mdp::{Mdp, ModelError};
use crate::mec::{compute_mecs, weighted_quotient, Mec, QuotientError};
use crate::reach::{interval_reach, ReachError};
use crate::vi::{run_vi, Criterion, ViError, ViOptions, DEFAULT_MAX_ITERS, DEFAULT_TAU};

#[derive(Debug, Error)]
pub enum LocalViError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Vi(#[from] ViError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Reach(#[from] ReachError),
}

#[derive(Debug, Clone, Copy)]
pub struct LocalViOptions {
    pub epsilon: f64,
    pub tau: f64,
    /// Iteration cap per MEC.
    pub max_iters: u64,
    /// Solve MECs on the rayon pool.
    pub parallel: bool,
    pub deadline: Option<Instant>,
}

impl LocalViOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            tau: DEFAULT_TAU,
            max_iters: DEFAULT_MAX_ITERS,
            parallel: false,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MecValue {
    pub mec: Mec,
    /// Approximate gain inside the MEC.
    pub w: f64,
    pub iterations: u64,
    /// `sp(Δ_n)` when the MEC's value iteration stopped.
    pub span: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalViStats {
    pub touched_states: usize,
    pub mec_iterations: u64,
    pub reach_sweeps: u64,
    /// `upper - lower` of the reachability probability at the initial state.
    pub reach_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalViResult {
    pub value: f64,
    pub per_mec: Vec<MecValue>,
    pub reach_p: f64,
    pub converged: bool,
    pub stats: LocalViStats,
}

fn solve_mec(mdp: &Mdp, mec: &Mec, criterion: Criterion, options: &ViOptions) -> Result<MecValue, LocalViError> {
    if mec.len() == 1 {
        let s = mec.states()[0];
        let w = mec
            .actions_of(s)
            .map(|a| mdp.action(s, a).reward)
            .fold(0.0, f64::max);
        return Ok(MecValue {
            mec: mec.clone(),
            w,
            iterations: 0,
            span: 0.0,
            converged: true,
        });
    }
    let restricted = mdp.restrict_to_mec(mec, mec.states()[0])?;
    let r = run_vi(&restricted.mdp, criterion, options)?;
    Ok(MecValue {
        mec: mec.clone(),
        w: r.value,
        iterations: r.iterations,
        span: r.span,
        converged: r.converged,
    })
}

pub fn local_vi(mdp: &Mdp, options: &LocalViOptions) -> Result<LocalViResult, LocalViError> {
    let eps = options.epsilon;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LocalViError::InvalidEpsilon(eps));
    }
    let stats = LocalViStats {
        touched_states: mdp.num_states(),
        ..LocalViStats::default()
    };
    let r_max = mdp.max_reward();
    if r_max == 0.0 {
        return Ok(LocalViResult {
            value: 0.0,
            per_mec: Vec::new(),
            reach_p: 0.0,
            converged: true,
            stats,
        });
    }

    let mecs = compute_mecs(mdp);
    let criterion = Criterion::sc1(eps)?;
    let vi_options = ViOptions {
        max_iters: options.max_iters,
        tau: options.tau,
        deadline: options.deadline,
    };
    let per_mec: Vec<MecValue> = if options.parallel {
        mecs.par_iter()
            .map(|mec| solve_mec(mdp, mec, criterion, &vi_options))
            .collect::<Result<_, _>>()?
    } else {
        mecs.iter()
            .map(|mec| solve_mec(mdp, mec, criterion, &vi_options))
            .collect::<Result<_, _>>()?
    };

    let f: Vec<f64> = per_mec.iter().map(|m| (m.w / r_max).clamp(0.0, 1.0)).collect();
    let quotient = weighted_quotient(mdp, &mecs, &f)?;
    let plus = quotient.plus.expect("weighted quotient has s+");
    let reach = interval_reach(&quotient.model, &[plus], eps / (2.0 * r_max))?;

    Ok(LocalViResult {
        value: r_max * reach.p,
        converged: per_mec.iter().all(|m| m.converged),
        stats: LocalViStats {
            mec_iterations: per_mec.iter().map(|m| m.iterations).sum(),
            reach_sweeps: reach.sweeps,
            reach_gap: reach.upper - reach.lower,
            ..stats
        },
        per_mec,
        reach_p: reach.p,
    })
}
