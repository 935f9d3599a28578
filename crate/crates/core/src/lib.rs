//! Maximal long-run average reward (mean payoff) of finite MDPs.
//!
//! Three approximate solvers share one model type:
//!
//! * [`vi::run_vi`]: naive value iteration with the sound span criterion and the
//!   two unsound criteria kept for comparison,
//! * [`local_vi::local_vi`]: per-MEC value iteration combined with certified
//!   reachability on the weighted MEC quotient,
//! * [`ondemand::on_demand_vi`]: simulation-guided anytime variant that explores the
//!   model lazily and collapses end components on the fly.
//!
//! [`oracle`] computes exact rational gains for small models and serves as ground
//! truth in the test suites.

pub mod exact;
pub mod fixtures;
pub mod generate;
pub mod graph;
pub mod lazy;
pub mod local_vi;
pub mod mdp;
pub mod mec;
pub mod numeric;
pub mod ondemand;
pub mod oracle;
pub mod random;
pub mod reach;
pub mod report;
pub mod text;
pub mod vi;

pub use generate::{generate, GeneratorSpec};
pub use lazy::LazyModel;
pub use local_vi::{local_vi, LocalViOptions, LocalViResult};
pub use mdp::{ActionEntry, MarkovChain, Mdp, ModelError, PositionalStrategy, StateId, ValidationReport, Weight};
pub use mec::{classify, compute_mecs, Classification, Mec, QuotientKind, QuotientModel};
pub use num_rational::BigRational;
pub use ondemand::{on_demand_vi, Heuristic, OdvOptions, OdvResult};
pub use reach::{interval_reach, ReachBounds, ReachResult};
pub use report::{solve, Algorithm, ModelSource, Report, SolveOptions};
pub use text::{parse_model, serialize_model, ModelDocument, ParseError};
pub use vi::{run_vi, span, vi_step, Criterion, StopRule, ViOptions, ViResult, ViState};
