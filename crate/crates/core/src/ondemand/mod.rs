//! Simulation-guided on-demand value iteration.
//!
//! Runs are sampled through a partially explored bounded MEC quotient along the
//! actions with the highest upper bound. Reaching `s?` refines the value bounds of
//! the end component just left; visiting a node `k` times collapses the end
//! components found so far. Bounds are then propagated back along the run. The
//! bounds at the initial state are certified at every point, so an interrupted
//! run still returns a valid interval.

mod partial;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lazy::LazyModel;

pub use partial::{appear, ExploredState, Group, Node, NodeAction, PartialQuotient, Path, RefineLimits};

pub const DEFAULT_K: usize = 6;
pub const DEFAULT_MAX_EPISODES: u64 = 1_000_000;

/// Successor selection during simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// Sample by transition probability.
    Pr,
    /// Cycle through successors per state-action.
    Rr,
    /// Sample proportionally to `p · (u - l)` of the successor.
    Md,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [Heuristic::Pr, Heuristic::Rr, Heuristic::Md];

    pub fn as_str(self) -> &'static str {
        match self {
            Heuristic::Pr => "pr",
            Heuristic::Rr => "rr",
            Heuristic::Md => "md",
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Heuristic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pr" => Ok(Heuristic::Pr),
            "rr" => Ok(Heuristic::Rr),
            "md" => Ok(Heuristic::Md),
            other => Err(format!("unknown heuristic `{other}` (expected pr, rr or md)")),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OdvError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("aperiodicity parameter must lie strictly between 0 and 1, got {0}")]
    InvalidTau(f64),
    #[error("reward bound must be finite and nonnegative, got {0}")]
    InvalidRewardBound(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct OdvOptions {
    pub epsilon: f64,
    pub k: usize,
    pub heuristic: Heuristic,
    pub seed: u64,
    pub max_episodes: u64,
    pub deadline: Option<Instant>,
    pub refine: RefineLimits,
}

impl OdvOptions {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            k: DEFAULT_K,
            heuristic: Heuristic::Md,
            seed: 0,
            max_episodes: DEFAULT_MAX_EPISODES,
            deadline: None,
            refine: RefineLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdvResult {
    pub value: f64,
    /// Certified bounds `r_max·l(init) ≤ gain ≤ r_max·u(init)`.
    pub lower: f64,
    pub upper: f64,
    pub explored_states: usize,
    /// End components collapsed at termination.
    pub explored_mecs: usize,
    pub episodes: u64,
    pub converged: bool,
}

/// Bounds after one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSnapshot {
    pub episode: u64,
    pub lower: f64,
    pub upper: f64,
}

/// `r_max·(l, u)` rounded outward; the fused residual tells on which side the
/// rounded product fell.
fn scaled(r_max: f64, (l, u): (f64, f64)) -> (f64, f64) {
    let lo = r_max * l;
    let hi = r_max * u;
    let lo = if l.mul_add(r_max, -lo) < 0.0 { lo.next_down() } else { lo };
    let hi = if u.mul_add(r_max, -hi) > 0.0 { hi.next_up() } else { hi };
    (lo, hi)
}

pub fn on_demand_vi<M: LazyModel + ?Sized>(model: &M, options: &OdvOptions) -> Result<OdvResult, OdvError> {
    on_demand_vi_observed(model, options, |_| {})
}

/// [`on_demand_vi`] calling `observer` after every episode.
pub fn on_demand_vi_observed<M: LazyModel + ?Sized>(
    model: &M,
    options: &OdvOptions,
    mut observer: impl FnMut(&EpisodeSnapshot),
) -> Result<OdvResult, OdvError> {
    let eps = options.epsilon;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(OdvError::InvalidEpsilon(eps));
    }
    if options.k < 2 {
        return Err(OdvError::InvalidK(options.k));
    }
    let tau = options.refine.tau;
    if !(tau > 0.0 && tau < 1.0) {
        return Err(OdvError::InvalidTau(tau));
    }
    let r_max = model.r_max();
    if !(r_max >= 0.0 && r_max.is_finite()) {
        return Err(OdvError::InvalidRewardBound(r_max));
    }
    if r_max == 0.0 {
        return Ok(OdvResult {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            explored_states: 0,
            explored_mecs: 0,
            episodes: 0,
            converged: true,
        });
    }

    let threshold = 2.0 * eps / r_max;
    let mut limits = options.refine;
    if limits.precision <= 0.0 {
        // one refinement per group usually suffices, even for rarely visited groups
        limits.precision = threshold / 2.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut pq = PartialQuotient::new(model, r_max, limits);
    let mut episodes = 0;
    let mut converged = false;
    while episodes < options.max_episodes {
        if options.deadline.is_some_and(|d| Instant::now() >= d) {
            break;
        }
        let mut path = pq.sample_episode(options.k, options.heuristic, &mut rng);
        episodes += 1;
        match path.last() {
            Some(Node::Unknown) => {
                if let Some(&NodeAction::Stay(g)) = path.actions.last() {
                    pq.refine_group(g);
                }
            }
            Some(last) if !last.is_special() && appear(last, &path) >= options.k => {
                pq.on_the_fly_ec();
                for node in &mut path.nodes {
                    if let Node::State(i) = *node {
                        *node = pq.node_of(pq.state(i).id).expect("explored");
                    }
                }
            }
            _ => {}
        }
        pq.back_propagate(&path);

        let (l, u) = pq.init_bounds();
        let (lower, upper) = scaled(r_max, (l, u));
        observer(&EpisodeSnapshot {
            episode: episodes,
            lower,
            upper,
        });
        if u - l < threshold {
            converged = true;
            break;
        }
    }

    let (l, u) = pq.init_bounds();
    let (lower, upper) = scaled(r_max, (l, u));
    Ok(OdvResult {
        value: r_max * (u + l) / 2.0,
        lower,
        upper,
        explored_states: pq.explored_states(),
        explored_mecs: pq.live_groups().count(),
        episodes,
        converged,
    })
}
