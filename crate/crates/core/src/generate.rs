//! Parametric model families.
//!
//! * `rare-branch:n,p`: the initial state enters an `n`-state ring with
//!   probability `p` (reward 1 everywhere, gain 1) and a two-state high-reward
//!   component otherwise (rewards 10 and 8, gain 9),
//! * `mec-chain:m,k`: `m` transient states in a row, each may enter its own
//!   `k`-state cycle or skip to the next one,
//! * `grid:w,h`: strongly connected grid with slippery moves,
//! * `three-mec` and `span-trap:alpha`: the fixtures of [`crate::fixtures`].
//!
//! Every family is also a [`LazyModel`], so large instances need not be built.

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::fixtures;
use crate::lazy::LazyModel;
use crate::mdp::{ActionEntry, Mdp, StateId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorSpec {
    RareBranch { n: usize, p: f64 },
    MecChain { m: usize, k: usize },
    Grid { w: usize, h: usize },
    ThreeMec,
    SpanTrap { alpha: f64 },
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("unknown model family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` expects parameters `{expected}`, got `{got}`")]
    BadParameters {
        family: &'static str,
        expected: &'static str,
        got: String,
    },
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let params: Vec<&str> = if params.is_empty() {
            Vec::new()
        } else {
            params.split(',').map(str::trim).collect()
        };
        let bad = |family, expected| GeneratorError::BadParameters {
            family,
            expected,
            got: params.join(","),
        };
        let spec = match family.trim() {
            "rare-branch" => match params[..] {
                [n, p] => GeneratorSpec::RareBranch {
                    n: n.parse().map_err(|_| bad("rare-branch", "n,p"))?,
                    p: p.parse().map_err(|_| bad("rare-branch", "n,p"))?,
                },
                _ => return Err(bad("rare-branch", "n,p")),
            },
            "mec-chain" => match params[..] {
                [m, k] => GeneratorSpec::MecChain {
                    m: m.parse().map_err(|_| bad("mec-chain", "m,k"))?,
                    k: k.parse().map_err(|_| bad("mec-chain", "m,k"))?,
                },
                _ => return Err(bad("mec-chain", "m,k")),
            },
            "grid" => match params[..] {
                [w, h] => GeneratorSpec::Grid {
                    w: w.parse().map_err(|_| bad("grid", "w,h"))?,
                    h: h.parse().map_err(|_| bad("grid", "w,h"))?,
                },
                _ => return Err(bad("grid", "w,h")),
            },
            "three-mec" if params.is_empty() => GeneratorSpec::ThreeMec,
            "three-mec" => return Err(bad("three-mec", "")),
            "span-trap" => match params[..] {
                [a] => GeneratorSpec::SpanTrap {
                    alpha: a.parse().map_err(|_| bad("span-trap", "alpha"))?,
                },
                _ => return Err(bad("span-trap", "alpha")),
            },
            other => return Err(GeneratorError::UnknownFamily(other.to_string())),
        };
        spec.check()?;
        Ok(spec)
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::RareBranch { n, p } => write!(f, "rare-branch:{n},{p}"),
            GeneratorSpec::MecChain { m, k } => write!(f, "mec-chain:{m},{k}"),
            GeneratorSpec::Grid { w, h } => write!(f, "grid:{w},{h}"),
            GeneratorSpec::ThreeMec => write!(f, "three-mec"),
            GeneratorSpec::SpanTrap { alpha } => write!(f, "span-trap:{alpha}"),
        }
    }
}

fn state_reward_mec_chain(i: usize, j: usize) -> f64 {
    ((i * 7 + j * 3) % 11) as f64
}

fn state_reward_grid(x: usize, y: usize) -> f64 {
    ((x * 3 + y * 5) % 7) as f64
}

/// Two-point distribution, merged when both targets coincide.
fn split(a: StateId, b: StateId, pa: f64) -> Vec<(StateId, f64)> {
    if a == b {
        vec![(a, 1.0)]
    } else {
        vec![(a, pa), (b, 1.0 - pa)]
    }
}

impl GeneratorSpec {
    pub fn check(&self) -> Result<(), GeneratorError> {
        let ok = match *self {
            GeneratorSpec::RareBranch { n, p } => n >= 1 && p > 0.0 && p < 1.0,
            GeneratorSpec::MecChain { m, k } => m >= 1 && k >= 1,
            GeneratorSpec::Grid { w, h } => w >= 1 && h >= 1,
            GeneratorSpec::ThreeMec => true,
            GeneratorSpec::SpanTrap { alpha } => alpha.is_finite() && alpha >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(GeneratorError::OutOfRange(self.to_string()))
        }
    }

    pub fn num_states(&self) -> usize {
        match *self {
            GeneratorSpec::RareBranch { n, .. } => n + 3,
            GeneratorSpec::MecChain { m, k } => m + m * k,
            GeneratorSpec::Grid { w, h } => w * h,
            GeneratorSpec::ThreeMec => 6,
            GeneratorSpec::SpanTrap { .. } => 2,
        }
    }

    fn state_actions(&self, s: StateId) -> Vec<ActionEntry> {
        match *self {
            GeneratorSpec::RareBranch { n, p } => {
                if s == 0 {
                    vec![ActionEntry::new("go", 0.0, split(1, n + 1, p))]
                } else if s <= n {
                    let i = s - 1;
                    let next = 1 + (i + 1) % n;
                    let prev = 1 + (i + n - 1) % n;
                    vec![ActionEntry::new("walk", 1.0, split(next, prev, 0.5))]
                } else {
                    let reward = if s == n + 1 { 10.0 } else { 8.0 };
                    vec![ActionEntry::new("mix", reward, vec![(n + 1, 0.5), (n + 2, 0.5)])]
                }
            }
            GeneratorSpec::MecChain { m, k } => {
                if s < m {
                    let mut acts = vec![ActionEntry::new("enter", 0.0, vec![(m + s * k, 1.0)])];
                    if s + 1 < m {
                        acts.push(ActionEntry::new("skip", 0.0, vec![(s + 1, 1.0)]));
                    }
                    acts
                } else {
                    let (i, j) = ((s - m) / k, (s - m) % k);
                    let next = m + i * k + (j + 1) % k;
                    vec![ActionEntry::new("cycle", state_reward_mec_chain(i, j), split(s, next, 0.5))]
                }
            }
            GeneratorSpec::Grid { w, h } => {
                let (x, y) = (s % w, s / w);
                let r = state_reward_grid(x, y);
                let moves = [
                    ("N", y + 1 < h, s + w),
                    ("S", y > 0, s.wrapping_sub(w)),
                    ("E", x + 1 < w, s + 1),
                    ("W", x > 0, s.wrapping_sub(1)),
                ];
                let mut acts: Vec<ActionEntry> = moves
                    .iter()
                    .filter(|m| m.1)
                    .map(|&(label, _, t)| ActionEntry::new(label, r, vec![(t, 0.9), (s, 0.1)]))
                    .collect();
                if acts.is_empty() {
                    acts.push(ActionEntry::new("stay", r, vec![(s, 1.0)]));
                }
                acts
            }
            GeneratorSpec::ThreeMec => fixtures::three_mec().actions(s).to_vec(),
            GeneratorSpec::SpanTrap { alpha } => fixtures::span_trap(alpha).actions(s).to_vec(),
        }
    }
}

impl LazyModel for GeneratorSpec {
    fn initial(&self) -> StateId {
        0
    }

    fn actions(&self, state: StateId) -> Cow<'_, [ActionEntry]> {
        Cow::Owned(self.state_actions(state))
    }

    fn r_max(&self) -> f64 {
        match *self {
            GeneratorSpec::RareBranch { .. } => 10.0,
            GeneratorSpec::MecChain { m, k } => (0..m)
                .flat_map(|i| (0..k).map(move |j| state_reward_mec_chain(i, j)))
                .fold(0.0, f64::max),
            GeneratorSpec::Grid { w, h } => (0..h)
                .flat_map(|y| (0..w).map(move |x| state_reward_grid(x, y)))
                .fold(0.0, f64::max),
            GeneratorSpec::ThreeMec => 20.0,
            GeneratorSpec::SpanTrap { alpha } => alpha,
        }
    }
}

/// Materializes the whole model.
pub fn generate(spec: &GeneratorSpec) -> Mdp {
    match spec {
        GeneratorSpec::ThreeMec => fixtures::three_mec(),
        GeneratorSpec::SpanTrap { alpha } => fixtures::span_trap(*alpha),
        _ => Mdp::new(0, (0..spec.num_states()).map(|s| spec.state_actions(s)).collect()),
    }
}
