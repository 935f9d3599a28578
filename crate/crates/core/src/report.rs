//! Uniform solver front end producing a fixed-schema report.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::exact::{to_exact, to_f64, ExactError};
use crate::generate::GeneratorSpec;
use crate::local_vi::{local_vi, LocalViError, LocalViOptions};
use crate::mdp::Mdp;
use crate::ondemand::{on_demand_vi, Heuristic, OdvError, OdvOptions, DEFAULT_K, DEFAULT_MAX_EPISODES};
use crate::oracle::{exact_gain, OracleError, DEFAULT_STRATEGY_LIMIT};
use crate::text::{DocumentError, ModelDocument};
use crate::vi::{run_vi, Criterion, StopRule, ViError, ViOptions, DEFAULT_MAX_ITERS, DEFAULT_TAU};

pub const FLAG_CRITERION_UNSOUND: &str = "criterion-unsound";
pub const FLAG_NOT_CONVERGED: &str = "not-converged";
pub const FLAG_TIMEOUT: &str = "timeout";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Nvi,
    LocalVi,
    Odv,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Nvi, Algorithm::LocalVi, Algorithm::Odv, Algorithm::Oracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Nvi => "nvi",
            Algorithm::LocalVi => "local-vi",
            Algorithm::Odv => "odv",
            Algorithm::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected nvi, local-vi, odv or oracle)"))
    }
}

/// Where the model comes from. Generated models are explored lazily by `odv`.
#[derive(Debug, Clone)]
pub enum ModelSource {
    Document { name: String, document: ModelDocument },
    Generated(GeneratorSpec),
}

impl ModelSource {
    pub fn name(&self) -> String {
        match self {
            ModelSource::Document { name, .. } => name.clone(),
            ModelSource::Generated(spec) => spec.to_string(),
        }
    }

    pub fn to_mdp(&self) -> Mdp {
        match self {
            ModelSource::Document { document, .. } => document.to_mdp(),
            ModelSource::Generated(spec) => crate::generate::generate(spec),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub algorithm: Algorithm,
    pub criterion: StopRule,
    pub epsilon: f64,
    pub heuristic: Heuristic,
    pub k: usize,
    pub tau: f64,
    pub seed: u64,
    /// VI iterations (nvi, local-vi per MEC) or episodes (odv).
    pub max_iters: Option<u64>,
    pub timeout: Option<Duration>,
    pub strategy_limit: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::LocalVi,
            criterion: StopRule::Sc1,
            epsilon: 1e-6,
            heuristic: Heuristic::Md,
            k: DEFAULT_K,
            tau: DEFAULT_TAU,
            seed: 0,
            max_iters: None,
            timeout: None,
            strategy_limit: DEFAULT_STRATEGY_LIMIT,
        }
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Vi(#[from] ViError),
    #[error(transparent)]
    LocalVi(#[from] LocalViError),
    #[error(transparent)]
    Odv(#[from] OdvError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Document(#[from] DocumentError),
}

/// Every field is always serialized; `null` marks what does not apply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub algorithm: String,
    pub model: String,
    pub value: Option<f64>,
    /// Exact rational value (oracle only).
    pub exact: Option<String>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub epsilon: Option<f64>,
    pub iterations: Option<u64>,
    pub episodes: Option<u64>,
    pub explored_states: Option<usize>,
    pub explored_mecs: Option<usize>,
    pub wall_ms: f64,
    pub flags: Vec<String>,
}

impl Report {
    /// A report with nothing filled in yet.
    pub fn new(algorithm: Algorithm, model: String) -> Self {
        Self {
            algorithm: algorithm.as_str().to_owned(),
            model,
            value: None,
            exact: None,
            lower: None,
            upper: None,
            epsilon: None,
            iterations: None,
            episodes: None,
            explored_states: None,
            explored_mecs: None,
            wall_ms: 0.0,
            flags: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `key: value` lines; absent fields print as `-`.
    pub fn to_plain(&self) -> String {
        fn opt<T: fmt::Display>(v: &Option<T>) -> String {
            v.as_ref().map_or_else(|| "-".to_owned(), T::to_string)
        }
        let mut out = String::new();
        let rows = [
            ("algorithm", self.algorithm.clone()),
            ("model", self.model.clone()),
            ("value", opt(&self.value)),
            ("exact", opt(&self.exact)),
            ("lower", opt(&self.lower)),
            ("upper", opt(&self.upper)),
            ("epsilon", opt(&self.epsilon)),
            ("iterations", opt(&self.iterations)),
            ("episodes", opt(&self.episodes)),
            ("explored_states", opt(&self.explored_states)),
            ("explored_mecs", opt(&self.explored_mecs)),
            ("wall_ms", format!("{:.3}", self.wall_ms)),
            ("flags", self.flags.join(",")),
        ];
        for (k, v) in rows {
            out.push_str(&format!("{k}: {v}\n"));
        }
        out
    }
}

/// Runs the selected algorithm on `source`.
pub fn solve(source: &ModelSource, options: &SolveOptions) -> Result<Report, SolveError> {
    let start = Instant::now();
    let deadline = options.timeout.map(|t| start + t);
    let mut report = Report::new(options.algorithm, source.name());
    match options.algorithm {
        Algorithm::Nvi => {
            let mdp = source.to_mdp();
            let criterion = Criterion::new(options.criterion, options.epsilon)?;
            let vi = run_vi(
                &mdp,
                criterion,
                &ViOptions {
                    max_iters: options.max_iters.unwrap_or(DEFAULT_MAX_ITERS),
                    tau: options.tau,
                    deadline,
                },
            )?;
            report.value = Some(vi.value);
            if options.criterion.is_sound() && vi.converged {
                let lo = vi.delta.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vi.delta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                report.lower = Some(lo);
                report.upper = Some(hi);
            }
            report.epsilon = Some(options.epsilon);
            report.iterations = Some(vi.iterations);
            report.explored_states = Some(mdp.num_states());
            if vi.criterion_unsound {
                report.flags.push(FLAG_CRITERION_UNSOUND.to_owned());
            }
            if !vi.converged {
                report.flags.push(FLAG_NOT_CONVERGED.to_owned());
            }
        }
        Algorithm::LocalVi => {
            let mdp = source.to_mdp();
            let r = local_vi(
                &mdp,
                &LocalViOptions {
                    epsilon: options.epsilon,
                    tau: options.tau,
                    max_iters: options.max_iters.unwrap_or(DEFAULT_MAX_ITERS),
                    parallel: false,
                    deadline,
                },
            )?;
            report.value = Some(r.value);
            report.epsilon = Some(options.epsilon);
            report.iterations = Some(r.stats.mec_iterations + r.stats.reach_sweeps);
            report.explored_states = Some(r.stats.touched_states);
            report.explored_mecs = Some(r.per_mec.len());
            if !r.converged {
                report.flags.push(FLAG_NOT_CONVERGED.to_owned());
            }
        }
        Algorithm::Odv => {
            let mut odv = OdvOptions {
                heuristic: options.heuristic,
                k: options.k,
                seed: options.seed,
                max_episodes: options.max_iters.unwrap_or(DEFAULT_MAX_EPISODES),
                deadline,
                ..OdvOptions::new(options.epsilon)
            };
            odv.refine.tau = options.tau;
            let r = match source {
                ModelSource::Generated(spec) => on_demand_vi(spec, &odv)?,
                ModelSource::Document { document, .. } => on_demand_vi(&document.to_mdp(), &odv)?,
            };
            report.value = Some(r.value);
            report.lower = Some(r.lower);
            report.upper = Some(r.upper);
            report.epsilon = Some(options.epsilon);
            report.episodes = Some(r.episodes);
            report.explored_states = Some(r.explored_states);
            report.explored_mecs = Some(r.explored_mecs);
            if !r.converged {
                report.flags.push(FLAG_NOT_CONVERGED.to_owned());
            }
        }
        Algorithm::Oracle => {
            let exact = match source {
                ModelSource::Document { document, .. } => document.to_exact_mdp()?,
                ModelSource::Generated(spec) => to_exact(&crate::generate::generate(spec))?,
            };
            let g = exact_gain(&exact, options.strategy_limit)?;
            let v = to_f64(&g);
            report.value = Some(v);
            report.exact = Some(g.to_string());
            report.lower = Some(v);
            report.upper = Some(v);
            report.explored_states = Some(exact.num_states());
        }
    }
    let timed_out = deadline.is_some_and(|d| Instant::now() >= d);
    if timed_out && report.flags.iter().any(|f| f == FLAG_NOT_CONVERGED) {
        report.flags.push(FLAG_TIMEOUT.to_owned());
    }
    report.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}
