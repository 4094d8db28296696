//! Optimal Bayesian coalitional manipulation of positional scoring rules.
//!
//! A coalition of `c` manipulators wants a desired candidate `d` to win but
//! only holds a probabilistic belief about how the `n` sincere voters will
//! vote. This crate samples profiles from that belief, searches for the
//! coalition ballot matrix that wins on the largest number of samples,
//! recovers explicit ballots from it, and measures the welfare loss the
//! manipulation causes.
//!
//! The modules follow the pipeline:
//!
//! * [`voting`]: rankings, profiles, scoring rules, positional summary
//!   matrices and winner determination (ties go against `d`).
//! * [`distributions`]: impartial culture, impartial anonymous culture,
//!   Mallows models and mixtures, empirical ballot pools, point masses.
//! * [`optimizer`]: sample summarization, pruning, the exact
//!   branch-and-bound solver, a brute-force oracle, closed-form strategies
//!   and sample-complexity formulas.
//! * [`matching`]: strategy-matrix validation and ballot recovery through
//!   repeated perfect matchings.
//! * [`welfare`]: regret, Monte Carlo expected regret and analytic bounds.
//! * [`experiment`]: configuration and the batch pipelines behind the CLI.

pub mod distributions;
pub mod error;
pub mod experiment;
pub mod matching;
pub mod optimizer;
pub mod rng;
pub mod voting;
pub mod welfare;

pub use error::{Error, Result};
pub use voting::{Candidate, Profile, Psm, Ranking, ScoreVector, ScoringRule, StrategyPsm};
