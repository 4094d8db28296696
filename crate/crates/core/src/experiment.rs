//! Experiment configuration and the batch pipelines behind the CLI.
//!
//! A configuration is a flat `key=value` text file; command-line flags set
//! the same keys afterwards. Every random draw comes from a labelled
//! substream of the mandatory seed, so solving, evaluation and target
//! selection never share draws and equal configurations give equal output.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use rayon::prelude::*;

use crate::distributions::{
    candidate_by_expected_rank, load_ballots, sample_profile, BallotFile, DistributionSpec,
    MallowsMixture, MallowsModel, TruncationPolicy,
};
use crate::error::{Error, Result};
use crate::matching::validate_psm;
use crate::optimizer::{
    sample_complexity_general, sample_complexity_kapproval, solve_optimal, summarize, SolveOptions,
    SolveResult,
};
use crate::rng::SeedStream;
use crate::voting::{Candidate, Profile, Psm, Ranking, ScoringRule, StrategyPsm};
use crate::welfare::{expected_regret, RegretReport};

/// Samples used to estimate expected ranks when picking a target by rank.
pub const DEFAULT_RANK_SAMPLES: usize = 10_000;

const STREAM_SOLVE: u64 = 1;
const STREAM_EVAL: u64 = 2;
const STREAM_RANK: u64 = 3;
const STREAM_BALLOTS: u64 = 4;
const STREAM_SAMPLE: u64 = 5;

/// Positional rule by name; the candidate count comes from the belief.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleSpec {
    Plurality,
    Borda,
    KApproval(usize),
    Alpha(Vec<u64>),
}

impl RuleSpec {
    pub fn build(&self, m: usize) -> Result<ScoringRule> {
        match self {
            RuleSpec::Plurality => ScoringRule::plurality(m),
            RuleSpec::Borda => ScoringRule::borda(m),
            RuleSpec::KApproval(k) => ScoringRule::k_approval(m, *k),
            RuleSpec::Alpha(alpha) => {
                if alpha.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: alpha.len(),
                    });
                }
                ScoringRule::new(alpha.clone())
            }
        }
    }
}

impl FromStr for RuleSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        match s.split_once(':') {
            None if s == "plurality" => Ok(RuleSpec::Plurality),
            None if s == "borda" => Ok(RuleSpec::Borda),
            Some(("kapproval", k)) => k
                .trim()
                .parse()
                .map(RuleSpec::KApproval)
                .map_err(|_| format!("bad k `{k}`")),
            Some(("alpha", list)) => parse_list(list).map(RuleSpec::Alpha),
            _ => Err(format!(
                "unknown rule `{s}` (plurality, borda, kapproval:K, alpha:a1,...,am)"
            )),
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::Plurality => f.write_str("plurality"),
            RuleSpec::Borda => f.write_str("borda"),
            RuleSpec::KApproval(k) => write!(f, "kapproval:{k}"),
            RuleSpec::Alpha(a) => write!(f, "alpha:{}", join(a)),
        }
    }
}

/// Belief over the sincere voters, before files are read.
#[derive(Debug, Clone, PartialEq)]
pub enum BeliefSpec {
    Ic,
    Iac,
    Mallows(f64),
    Mixture(PathBuf),
    Ballots(PathBuf),
    Point(PathBuf),
}

impl BeliefSpec {
    pub fn phi(&self) -> Option<f64> {
        match self {
            BeliefSpec::Mallows(phi) => Some(*phi),
            _ => None,
        }
    }
}

impl FromStr for BeliefSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        match s.split_once(':') {
            None if s == "ic" => Ok(BeliefSpec::Ic),
            None if s == "iac" => Ok(BeliefSpec::Iac),
            Some(("mallows", phi)) => match phi.trim().parse::<f64>() {
                Ok(v) if v > 0.0 && v <= 1.0 => Ok(BeliefSpec::Mallows(v)),
                _ => Err(format!("dispersion must be a number in (0, 1], found `{phi}`")),
            },
            Some(("mixture", path)) => Ok(BeliefSpec::Mixture(path.into())),
            Some(("ballots", path)) => Ok(BeliefSpec::Ballots(path.into())),
            Some(("point", path)) => Ok(BeliefSpec::Point(path.into())),
            _ => Err(format!(
                "unknown distribution `{s}` (ic, iac, mallows:PHI, mixture:FILE, ballots:FILE, point:FILE)"
            )),
        }
    }
}

impl fmt::Display for BeliefSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BeliefSpec::Ic => f.write_str("ic"),
            BeliefSpec::Iac => f.write_str("iac"),
            BeliefSpec::Mallows(phi) => write!(f, "mallows:{phi}"),
            BeliefSpec::Mixture(p) => write!(f, "mixture:{}", p.display()),
            BeliefSpec::Ballots(p) => write!(f, "ballots:{}", p.display()),
            BeliefSpec::Point(p) => write!(f, "point:{}", p.display()),
        }
    }
}

/// The desired candidate: an index, or the candidate with the `k`-th best
/// expected rank under the belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetSpec {
    Index(Candidate),
    Rank(usize),
}

impl FromStr for TargetSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if let Some(k) = s.strip_prefix("rank:") {
            let k: usize = k.trim().parse().map_err(|_| format!("bad rank `{k}`"))?;
            if k == 0 {
                return Err("ranks start at 1".into());
            }
            return Ok(TargetSpec::Rank(k));
        }
        s.parse()
            .map(TargetSpec::Index)
            .map_err(|_| format!("expected a candidate index or rank:K, found `{s}`"))
    }
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetSpec::Index(i) => write!(f, "{i}"),
            TargetSpec::Rank(k) => write!(f, "rank:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rule: RuleSpec,
    /// Belief the coalition solves against.
    pub dist: BeliefSpec,
    /// Distribution the strategy is evaluated on; defaults to `dist`.
    pub eval_dist: Option<BeliefSpec>,
    pub m: Option<usize>,
    pub sigma: Option<Ranking>,
    pub n: usize,
    pub c: u32,
    pub d: TargetSpec,
    pub t_solve: usize,
    pub trials: usize,
    pub seed: Option<u64>,
    pub budget_secs: Option<f64>,
    pub truncation: TruncationPolicy,
    pub timings: bool,
    pub rank_samples: usize,
    pub sweep_n: Vec<usize>,
    pub sweep_phi: Vec<f64>,
    pub sweep_d: Vec<TargetSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            rule: RuleSpec::Borda,
            dist: BeliefSpec::Ic,
            eval_dist: None,
            m: None,
            sigma: None,
            n: 100,
            c: 10,
            d: TargetSpec::Rank(1),
            t_solve: 500,
            trials: 1000,
            seed: None,
            budget_secs: None,
            truncation: TruncationPolicy::Drop,
            timings: false,
            rank_samples: DEFAULT_RANK_SAMPLES,
            sweep_n: Vec::new(),
            sweep_phi: Vec::new(),
            sweep_d: Vec::new(),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse().map_err(|_| format!("bad list entry `{tok}`"))
        })
        .collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn positive<T: FromStr + PartialOrd + Default>(s: &str) -> std::result::Result<T, String> {
    let v: T = s
        .trim()
        .parse()
        .map_err(|_| format!("bad number `{}`", s.trim()))?;
    if v <= T::default() {
        return Err("must be positive".into());
    }
    Ok(v)
}

impl ExperimentConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        let outcome: std::result::Result<(), String> = (|| {
            match key {
                "rule" => self.rule = value.parse()?,
                "dist" => self.dist = value.parse()?,
                "eval_dist" => self.eval_dist = Some(value.parse()?),
                "m" => self.m = Some(positive(value)?),
                "sigma" => self.sigma = Some(value.parse().map_err(|e: Error| e.to_string())?),
                "n" => self.n = positive(value)?,
                "c" => self.c = positive(value)?,
                "d" => self.d = value.parse()?,
                "tsolve" => self.t_solve = positive(value)?,
                "trials" => self.trials = positive(value)?,
                "seed" => {
                    self.seed = Some(value.parse().map_err(|_| format!("bad seed `{value}`"))?)
                }
                "budget_secs" => self.budget_secs = Some(positive(value)?),
                "truncation" => {
                    self.truncation = match value {
                        "drop" => TruncationPolicy::Drop,
                        "complete" | "uniform" => TruncationPolicy::UniformCompletion,
                        _ => return Err(format!("expected drop or complete, found `{value}`")),
                    }
                }
                "timings" => {
                    self.timings = value
                        .parse()
                        .map_err(|_| format!("expected true or false, found `{value}`"))?
                }
                "rank_samples" => self.rank_samples = positive(value)?,
                "sweep_n" => self.sweep_n = parse_list(value)?,
                "sweep_phi" => {
                    let phis: Vec<f64> = parse_list(value)?;
                    if let Some(bad) = phis.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
                        return Err(format!("dispersion must lie in (0, 1], found {bad}"));
                    }
                    self.sweep_phi = phis;
                }
                "sweep_d" => self.sweep_d = parse_list(value)?,
                _ => return Err("unknown key".into()),
            }
            Ok(())
        })();
        outcome.map_err(|message| Error::config(key, message))
    }

    /// Applies `key=value` lines; blank lines and `#` comments are skipped.
    pub fn apply(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                message: format!("expected key=value, found `{line}`"),
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(text)?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn seed_stream(&self) -> Result<SeedStream> {
        self.seed
            .map(SeedStream::new)
            .ok_or_else(|| Error::config("seed", "a seed is required"))
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            time_limit: self.budget_secs.map(Duration::from_secs_f64),
            ..SolveOptions::default()
        }
    }

    fn reference(&self, key: &str) -> Result<Ranking> {
        match (&self.sigma, self.m) {
            (Some(sigma), Some(m)) if sigma.len() != m => Err(Error::config(
                "sigma",
                format!("has {} candidates but m = {m}", sigma.len()),
            )),
            (Some(sigma), _) => Ok(sigma.clone()),
            (None, Some(m)) => Ok(Ranking::identity(m)),
            (None, None) => Err(Error::config(key, "set m or sigma")),
        }
    }

    /// Reads files and builds the distribution. `phi` replaces a Mallows
    /// dispersion.
    pub fn build_belief(
        &self,
        spec: &BeliefSpec,
        phi: Option<f64>,
        seed: SeedStream,
    ) -> Result<DistributionSpec> {
        let spec = match (spec, phi) {
            (BeliefSpec::Mallows(_), Some(phi)) => BeliefSpec::Mallows(phi),
            (_, Some(_)) => {
                return Err(Error::config(
                    "sweep_phi",
                    "dispersion sweeps need dist=mallows:PHI",
                ))
            }
            (spec, None) => spec.clone(),
        };
        Ok(match spec {
            BeliefSpec::Ic => DistributionSpec::ImpartialCulture {
                m: self.reference("m")?.len(),
            },
            BeliefSpec::Iac => DistributionSpec::ImpartialAnonymousCulture {
                m: self.reference("m")?.len(),
            },
            BeliefSpec::Mallows(phi) => {
                DistributionSpec::Mallows(MallowsModel::new(self.reference("m")?, phi)?)
            }
            BeliefSpec::Mixture(path) => {
                DistributionSpec::Mixture(MallowsMixture::parse(&fs::read_to_string(path)?)?)
            }
            BeliefSpec::Ballots(path) => {
                let mut rng = seed.substream(STREAM_BALLOTS).rng();
                DistributionSpec::Empirical(load_ballots(path, self.truncation, &mut rng)?)
            }
            BeliefSpec::Point(path) => DistributionSpec::PointMass(
                BallotFile::parse(&fs::read_to_string(path)?)?.complete_profile()?,
            ),
        })
    }

    /// The grid a sweep visits: dispersion, then target, then `n`.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        if self.sweep_n.is_empty() && self.sweep_phi.is_empty() && self.sweep_d.is_empty() {
            return Err(Error::config(
                "sweep_n",
                "a sweep needs at least one of sweep_n, sweep_phi, sweep_d",
            ));
        }
        let phis: Vec<Option<f64>> = if self.sweep_phi.is_empty() {
            vec![None]
        } else {
            self.sweep_phi.iter().map(|&p| Some(p)).collect()
        };
        let ds = if self.sweep_d.is_empty() {
            vec![self.d]
        } else {
            self.sweep_d.clone()
        };
        let ns = if self.sweep_n.is_empty() {
            vec![self.n]
        } else {
            self.sweep_n.clone()
        };
        let mut grid = Vec::new();
        for &phi in &phis {
            for &target in &ds {
                for &n in &ns {
                    grid.push(GridPoint { phi, target, n });
                }
            }
        }
        Ok(grid)
    }

    /// The single point described by the scalar keys.
    pub fn point(&self) -> GridPoint {
        GridPoint {
            phi: None,
            target: self.d,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    /// Replacement Mallows dispersion, if sweeping over it.
    pub phi: Option<f64>,
    pub target: TargetSpec,
    pub n: usize,
}

impl GridPoint {
    fn effective_phi(&self, cfg: &ExperimentConfig) -> Option<f64> {
        self.phi.or(cfg.dist.phi())
    }

    fn phi_label(&self, cfg: &ExperimentConfig) -> u64 {
        self.effective_phi(cfg).map_or(0, f64::to_bits)
    }
}

/// A solved strategy with everything needed to report it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub candidate: Candidate,
    pub rule: ScoringRule,
    pub result: SolveResult,
    pub ballots: Profile,
}

fn resolve_target(
    cfg: &ExperimentConfig,
    belief: &DistributionSpec,
    point: &GridPoint,
    seed: SeedStream,
) -> Result<Candidate> {
    match point.target {
        TargetSpec::Index(i) if i < belief.m() => Ok(i),
        TargetSpec::Index(i) => Err(Error::config(
            "d",
            format!("candidate {i} out of range for m = {}", belief.m()),
        )),
        TargetSpec::Rank(k) => {
            let mut rng = seed
                .substream(STREAM_RANK)
                .substream(point.phi_label(cfg))
                .rng();
            candidate_by_expected_rank(belief, k, cfg.rank_samples, &mut rng)
        }
    }
}

/// Samples `T_solve` profiles from the belief, solves, and recovers ballots.
pub fn solve_point(cfg: &ExperimentConfig, point: &GridPoint) -> Result<SolveOutput> {
    let seed = cfg.seed_stream()?;
    let belief = cfg.build_belief(&cfg.dist, point.phi, seed)?;
    let rule = cfg.rule.build(belief.m())?;
    let candidate = resolve_target(cfg, &belief, point, seed)?;
    let mut rng = seed
        .substream(STREAM_SOLVE)
        .substream(point.phi_label(cfg))
        .substream(point.n as u64)
        .rng();
    let profiles = (0..cfg.t_solve)
        .map(|_| sample_profile(&belief, point.n, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let samples = summarize(&profiles, &rule)?;
    let result = solve_optimal(&samples, cfg.c, candidate, &cfg.solve_options())?;
    let ballots = crate::matching::recover_votes(&result.strategy)?;
    Ok(SolveOutput {
        candidate,
        rule,
        result,
        ballots,
    })
}

/// Evaluates a strategy on `trials` fresh profiles from the evaluation
/// distribution.
pub fn evaluate_point(
    cfg: &ExperimentConfig,
    point: &GridPoint,
    strategy: &StrategyPsm,
) -> Result<RegretReport> {
    let seed = cfg.seed_stream()?;
    let spec = cfg.eval_dist.as_ref().unwrap_or(&cfg.dist);
    let phi = match spec {
        BeliefSpec::Mallows(_) => point.phi,
        _ => None,
    };
    let belief = cfg.build_belief(spec, phi, seed)?;
    let rule = cfg.rule.build(belief.m())?;
    let stream = seed
        .substream(STREAM_EVAL)
        .substream(point.phi_label(cfg))
        .substream(point.n as u64);
    expected_regret(&belief, point.n, strategy, &rule, cfg.trials, stream)
}

pub fn run_solve(cfg: &ExperimentConfig) -> Result<SolveOutput> {
    solve_point(cfg, &cfg.point())
}

pub fn run_evaluate(cfg: &ExperimentConfig, strategy: &StrategyPsm) -> Result<RegretReport> {
    evaluate_point(cfg, &cfg.point(), strategy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub solve: SolveOutput,
    pub report: RegretReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub phi: Option<f64>,
    pub target: TargetSpec,
    pub n: usize,
    pub outcome: std::result::Result<PointResult, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_HEADER: &str = "phi,d,n,predicted_prob,realized_prob,expected_regret,normalized_regret,bound_general,solve_time,optimal_flag,candidate,status";

impl SweepTable {
    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.outcome.is_ok())
    }

    /// CSV with a fixed header. Solve times are written only when `timings`
    /// is set, since they differ between runs.
    pub fn to_csv(&self, timings: bool) -> String {
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for row in &self.rows {
            let phi = row.phi.map_or_else(|| "NA".to_string(), format_g);
            let head = format!("{phi},{},{}", row.target, row.n);
            let line = match &row.outcome {
                Ok(p) => {
                    let time = if timings {
                        format_g(p.solve.result.solve_time.as_secs_f64())
                    } else {
                        "NA".into()
                    };
                    format!(
                        "{head},{},{},{},{},{},{time},{},{},ok",
                        format_g(p.solve.result.manipulation_probability),
                        format_g(p.report.manipulation_probability()),
                        format_g(p.report.expected_regret),
                        format_g(p.report.normalized_expected_regret),
                        format_g(p.report.bound_general),
                        p.solve.result.optimal,
                        p.solve.candidate,
                    )
                }
                Err(message) => {
                    let clean: String = message
                        .chars()
                        .map(|ch| {
                            if matches!(ch, ',' | '\n' | '"') {
                                ' '
                            } else {
                                ch
                            }
                        })
                        .collect();
                    format!("{head},NA,NA,NA,NA,NA,NA,NA,NA,error: {clean}")
                }
            };
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Runs every grid point in parallel; failures are kept in their row.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepTable> {
    cfg.seed_stream()?;
    let mut grid = cfg.grid()?;
    if cfg.sweep_phi.is_empty() {
        let phi = cfg.dist.phi();
        for point in &mut grid {
            point.phi = phi;
        }
    }
    let rows = grid
        .par_iter()
        .map(|point| {
            let outcome = solve_point(cfg, point).and_then(|solve| {
                let report = evaluate_point(cfg, point, &solve.result.strategy)?;
                Ok(PointResult { solve, report })
            });
            SweepRow {
                phi: point.phi,
                target: point.target,
                n: point.n,
                outcome: outcome.map_err(|e| e.to_string()),
            }
        })
        .collect();
    Ok(SweepTable { rows })
}

/// Draws profiles from the configured belief.
pub fn sample_profiles(cfg: &ExperimentConfig, count: usize) -> Result<Vec<Profile>> {
    let seed = cfg.seed_stream()?;
    let belief = cfg.build_belief(&cfg.dist, None, seed)?;
    let mut rng = seed.substream(STREAM_SAMPLE).rng();
    (0..count)
        .map(|_| sample_profile(&belief, cfg.n, &mut rng))
        .collect()
}

/// Sample-count formulas; the general one needs `constant`, the k-approval
/// one needs `k`.
pub fn run_complexity(
    c: u32,
    m: usize,
    k: Option<usize>,
    eps: f64,
    delta: f64,
    constant: Option<f64>,
) -> Result<String> {
    if k.is_none() && constant.is_none() {
        return Err(Error::invalid(
            "give k for k-approval, a constant for the general bound, or both",
        ));
    }
    let mut out = String::new();
    if let Some(constant) = constant {
        let t = sample_complexity_general(c, m, eps, delta, constant)?;
        out.push_str(&format!("general={t}\n"));
    }
    if let Some(k) = k {
        let t = sample_complexity_kapproval(c, k, m, eps, delta)?;
        out.push_str(&format!("kapproval={t}\n"));
    }
    Ok(out)
}

/// Reads a matrix written as one line of space-separated integers per row.
pub fn parse_psm(text: &str) -> Result<Psm> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("bad entry `{tok}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Psm::from_rows(rows)
}

/// Line sum of a valid matrix.
pub fn psm_line_sum(x: &Psm) -> Result<u32> {
    let c = if x.m() == 0 { 0 } else { x.row_sum(0) as u32 };
    if !validate_psm(x, c) {
        return Err(Error::InvalidPsm(
            "rows and columns must share one sum".into(),
        ));
    }
    Ok(c)
}

/// Interprets a matrix as a strategy for the candidate every ballot ranks
/// first.
pub fn strategy_from_psm(x: Psm) -> Result<StrategyPsm> {
    let c = psm_line_sum(&x)?;
    let d = (0..x.m())
        .find(|&i| c > 0 && x.get(i, 0) == c)
        .ok_or_else(|| {
            Error::InvalidPsm("every ballot must rank the same candidate first".into())
        })?;
    StrategyPsm::new(x, c, d)
}

/// `%g`-style formatting with six significant digits.
pub fn format_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Text report of a solve: summary lines, the strategy matrix and ballots.
pub fn format_solve(out: &SolveOutput, timings: bool) -> String {
    let r = &out.result;
    let time = if timings {
        format_g(r.solve_time.as_secs_f64())
    } else {
        "NA".into()
    };
    format!(
        "candidate={}\nrule={}\nobjective={}\nsamples={}\nalready_winning={}\nwin_probability={}\nmanipulation_probability={}\noptimal={}\npruned_fraction={}\nsolve_time={time}\nstrategy:\n{}ballots:\n{}",
        out.candidate,
        join(out.rule.alpha()),
        r.objective,
        r.samples,
        r.already_winning,
        format_g(r.win_probability),
        format_g(r.manipulation_probability),
        r.optimal,
        format_g(r.pruned_fraction()),
        r.strategy.psm(),
        crate::distributions::format_profile(&out.ballots),
    )
}

pub fn format_report(report: &RegretReport) -> String {
    format!(
        "trials={}\nrealized_prob={}\nwin_probability={}\nexpected_regret={}\nstd_error={}\nnormalized_regret={}\np_flip_to_d={}\np_flip_to_other={}\nbound_general={}\nbound_kapproval={}\n",
        report.trials,
        format_g(report.manipulation_probability()),
        format_g(report.win_probability),
        format_g(report.expected_regret),
        format_g(report.std_error),
        format_g(report.normalized_expected_regret),
        format_g(report.p_flip_to_d),
        format_g(report.p_flip_to_other),
        format_g(report.bound_general),
        report.bound_kapproval.map_or_else(|| "NA".into(), format_g),
    )
}
