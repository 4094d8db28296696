//! Optimal coalition strategies over sampled profiles.
//!
//! A belief over sincere profiles is represented by `T` sampled score
//! vectors. The solver picks the strategy matrix that makes `d` the strict
//! winner on as many of them as possible.

mod brute;
mod complexity;
mod search;
mod strategies;

use std::time::{Duration, Instant};

pub use brute::{
    brute_force_optimal, enumerate_strategies, BRUTE_FORCE_MAX_CANDIDATES,
    BRUTE_FORCE_MAX_COALITION,
};
pub use complexity::{log2_binomial, sample_complexity_general, sample_complexity_kapproval};
pub use strategies::{balanced_strategy, borda3_strategy, near_balanced_strategy, Borda3Strategy};

use crate::error::{Error, Result};
use crate::voting::{
    score_profile, strictly_wins, total_scores, Candidate, Profile, Psm, ScoreVector, ScoringRule,
    StrategyPsm,
};
use search::{SearchLimits, SlotModel};

/// Score vectors of `T` sampled sincere profiles under one rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    rule: ScoringRule,
    n: usize,
    scores: Vec<ScoreVector>,
}

impl SampleSet {
    pub fn new(rule: ScoringRule, n: usize, scores: Vec<ScoreVector>) -> Result<Self> {
        let m = rule.m();
        let cap = n as u64 * rule.top();
        for s in &scores {
            if s.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: s.len(),
                });
            }
            if s.as_slice().iter().any(|&v| v > cap) {
                return Err(Error::invalid(format!("score exceeds n * alpha_1 = {cap}")));
            }
        }
        Ok(SampleSet { rule, n, scores })
    }

    pub fn rule(&self) -> &ScoringRule {
        &self.rule
    }

    /// Sincere voters per profile.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rule.m()
    }

    /// Number of samples `T`.
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn scores(&self) -> &[ScoreVector] {
        &self.scores
    }

    /// The samples at the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> SampleSet {
        SampleSet {
            rule: self.rule.clone(),
            n: self.n,
            scores: indices.iter().map(|&t| self.scores[t].clone()).collect(),
        }
    }
}

/// Scores every profile under `rule`. All profiles must share `m` and `n`.
pub fn summarize(profiles: &[Profile], rule: &ScoringRule) -> Result<SampleSet> {
    let n = profiles.first().map_or(0, Profile::n);
    let scores = profiles
        .iter()
        .map(|p| {
            if p.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.n(),
                });
            }
            score_profile(p, rule)
        })
        .collect::<Result<Vec<_>>>()?;
    SampleSet::new(rule.clone(), n, scores)
}

/// Partition of sample indices by whether the coalition's ballots matter.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PruneResult {
    /// `d` loses whatever the coalition does.
    pub impossible: Vec<usize>,
    /// `d` wins whatever the coalition does, as long as it ranks `d` first.
    pub guaranteed: Vec<usize>,
    pub contested: Vec<usize>,
}

impl PruneResult {
    /// Share of samples removed from the search.
    pub fn pruned_fraction(&self) -> f64 {
        let total = self.impossible.len() + self.guaranteed.len() + self.contested.len();
        if total == 0 {
            return 0.0;
        }
        (self.impossible.len() + self.guaranteed.len()) as f64 / total as f64
    }
}

fn check_target(samples: &SampleSet, c: u32, d: Candidate) -> Result<()> {
    if c == 0 {
        return Err(Error::invalid("coalition size must be at least 1"));
    }
    if d >= samples.m() {
        return Err(Error::invalid(format!(
            "candidate {d} out of range for m = {}",
            samples.m()
        )));
    }
    Ok(())
}

/// Classifies each sample, comparing `d` against the strongest other
/// candidate.
pub fn prune(samples: &SampleSet, c: u32, d: Candidate) -> Result<PruneResult> {
    check_target(samples, c, d)?;
    let rule = samples.rule();
    let c = u64::from(c);
    let mut out = PruneResult::default();
    for (t, s) in samples.scores().iter().enumerate() {
        let ours = s[d] + c * rule.top();
        let rival = s.max_excluding(d);
        if ours <= c * rule.bottom() + rival {
            out.impossible.push(t);
        } else if ours > c * rule.second() + rival {
            out.guaranteed.push(t);
        } else {
            out.contested.push(t);
        }
    }
    Ok(out)
}

/// Search budget and switches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Drop impossible and guaranteed samples before searching.
    pub prune: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: None,
            node_limit: None,
            prune: true,
        }
    }
}

impl SolveOptions {
    pub fn with_time_limit(limit: Duration) -> Self {
        SolveOptions {
            time_limit: Some(limit),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub strategy: StrategyPsm,
    /// Samples on which `d` strictly wins after manipulation.
    pub objective: usize,
    /// `T`.
    pub samples: usize,
    /// Samples `d` wins without the coalition.
    pub already_winning: usize,
    pub win_probability: f64,
    pub manipulation_probability: f64,
    /// The search finished within budget, so `objective` is maximal.
    pub optimal: bool,
    pub solve_time: Duration,
    pub impossible: usize,
    pub guaranteed: usize,
    pub contested: usize,
    pub nodes: u64,
}

impl SolveResult {
    fn build(
        samples: &SampleSet,
        strategy: StrategyPsm,
        objective: usize,
        optimal: bool,
        started: Instant,
    ) -> Result<Self> {
        let already_winning = samples
            .scores()
            .iter()
            .filter(|s| strictly_wins(s, strategy.d()))
            .count();
        let t = samples.len() as f64;
        Ok(SolveResult {
            strategy,
            objective,
            samples: samples.len(),
            already_winning,
            win_probability: objective as f64 / t,
            manipulation_probability: objective.saturating_sub(already_winning) as f64 / t,
            optimal,
            solve_time: started.elapsed(),
            impossible: 0,
            guaranteed: 0,
            contested: samples.len(),
            nodes: 0,
        })
    }

    /// Share of samples decided by pruning alone.
    pub fn pruned_fraction(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        (self.impossible + self.guaranteed) as f64 / self.samples as f64
    }
}

/// Samples on which `d` strictly wins once the coalition votes `strategy`.
pub fn count_wins(samples: &SampleSet, strategy: &StrategyPsm) -> Result<usize> {
    let mut wins = 0;
    for s in samples.scores() {
        let total = total_scores(s, strategy.psm(), samples.rule())?;
        if strictly_wins(&total, strategy.d()) {
            wins += 1;
        }
    }
    Ok(wins)
}

/// Every coalition member ranks `d` first and the rest in a rotated order,
/// so each other candidate visits each lower position about equally often.
fn cyclic_strategy(m: usize, c: u32, d: Candidate) -> Result<StrategyPsm> {
    let others: Vec<Candidate> = (0..m).filter(|&i| i != d).collect();
    let mut x = Psm::zeros(m);
    x.set(d, 0, c);
    for v in 0..c as usize {
        for (slot, _) in others.iter().enumerate() {
            let who = others[(slot + v) % others.len()];
            x.set(who, slot + 1, x.get(who, slot + 1) + 1);
        }
    }
    StrategyPsm::new(x, c, d)
}

/// Maximizes the number of samples on which `d` strictly wins.
///
/// With an exhausted budget the best strategy found so far is returned with
/// `optimal = false`.
pub fn solve_optimal(
    samples: &SampleSet,
    c: u32,
    d: Candidate,
    options: &SolveOptions,
) -> Result<SolveResult> {
    check_target(samples, c, d)?;
    if samples.is_empty() {
        return Err(Error::invalid("cannot solve over zero samples"));
    }
    let started = Instant::now();
    let m = samples.m();
    let rule = samples.rule();
    if m == 1 {
        return Err(Error::invalid("need at least two candidates"));
    }

    let partition = if options.prune {
        prune(samples, c, d)?
    } else {
        PruneResult {
            contested: (0..samples.len()).collect(),
            ..PruneResult::default()
        }
    };
    let contested = samples.subset(&partition.contested);
    let others: Vec<Candidate> = (0..m).filter(|&i| i != d).collect();

    let incumbent = cyclic_strategy(m, c, d)?;
    let incumbent_wins = count_wins(&contested, &incumbent)?;

    let head = u64::from(c) * rule.top();
    let limits: Vec<Vec<i64>> = contested
        .scores()
        .iter()
        .map(|s| {
            others
                .iter()
                .map(|&i| (s[d] + head) as i64 - s[i] as i64 - 1)
                .collect()
        })
        .collect();
    let model = SlotModel::new(rule.alpha(), c);
    let outcome = search::search(
        &model,
        &limits,
        others.len(),
        incumbent_wins,
        SearchLimits {
            deadline: options.time_limit.map(|l| started + l),
            node_limit: options.node_limit,
        },
    );

    let (strategy, contested_wins) = match outcome.best {
        Some((_, rows)) => {
            let mut x = Psm::zeros(m);
            x.set(d, 0, c);
            for (row, &i) in rows.iter().zip(&others) {
                for (j, &k) in row.iter().enumerate() {
                    if k > 0 {
                        x.set(i, j, k);
                    }
                }
            }
            (StrategyPsm::new(x, c, d)?, outcome.wins)
        }
        None => (incumbent, incumbent_wins),
    };
    debug_assert_eq!(count_wins(&contested, &strategy)?, contested_wins);

    let objective = contested_wins + partition.guaranteed.len();
    let mut result = SolveResult::build(samples, strategy, objective, outcome.complete, started)?;
    result.impossible = partition.impossible.len();
    result.guaranteed = partition.guaranteed.len();
    result.contested = partition.contested.len();
    result.nodes = outcome.nodes;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use rand::Rng;

    fn borda3() -> ScoringRule {
        ScoringRule::borda(3).unwrap()
    }

    fn set(rule: ScoringRule, n: usize, scores: &[&[u64]]) -> SampleSet {
        SampleSet::new(rule, n, scores.iter().map(|s| s.to_vec().into()).collect()).unwrap()
    }

    #[test]
    fn summarize_examples() {
        let p = Profile::from_votes(vec!["0,1,2".parse().unwrap()]).unwrap();
        let s = summarize(&[p], &borda3()).unwrap();
        assert_eq!(s.scores()[0].as_slice(), &[2, 1, 0]);

        let empty = summarize(&[], &borda3()).unwrap();
        assert_eq!(empty.len(), 0);

        let rule = ScoringRule::plurality(3).unwrap();
        let p = Profile::from_votes(vec!["1,0,2".parse().unwrap()]).unwrap();
        let s = summarize(&[p.clone(), p.clone(), p], &rule).unwrap();
        assert!(s.scores().iter().all(|v| v.as_slice() == [0, 1, 0]));
    }

    #[test]
    fn summarize_rejects_mixed_sizes() {
        let one = Profile::from_votes(vec!["0,1,2".parse().unwrap()]).unwrap();
        let two = one.joined(&one).unwrap();
        assert!(summarize(&[one, two], &borda3()).is_err());
    }

    #[test]
    fn sample_set_rejects_impossible_scores() {
        let bad = SampleSet::new(borda3(), 1, vec![vec![3, 0, 0].into()]);
        assert!(bad.is_err());
    }

    #[test]
    fn prune_examples() {
        let s = set(borda3(), 5, &[&[10, 0, 0], &[0, 0, 10], &[4, 0, 2]]);
        let p = prune(&s, 2, 2).unwrap();
        assert_eq!(p.impossible, vec![0]);
        assert_eq!(p.guaranteed, vec![1]);
        assert_eq!(p.contested, vec![2]);
    }

    #[test]
    fn solve_single_sample() {
        let s = set(borda3(), 2, &[&[3, 1, 2]]);
        let r = solve_optimal(&s, 1, 2, &SolveOptions::default()).unwrap();
        assert_eq!(r.objective, 1);
        assert!(r.optimal);
        let total = total_scores(&s.scores()[0], r.strategy.psm(), s.rule()).unwrap();
        assert_eq!(total.as_slice(), &[3, 2, 4]);
    }

    #[test]
    fn solve_all_impossible() {
        let s = set(borda3(), 10, &[&[20, 0, 0], &[0, 20, 0]]);
        let r = solve_optimal(&s, 1, 2, &SolveOptions::default()).unwrap();
        assert_eq!(r.objective, 0);
        assert_eq!(r.manipulation_probability, 0.0);
    }

    #[test]
    fn solve_all_guaranteed() {
        let s = set(borda3(), 10, &[&[0, 0, 20], &[1, 0, 19]]);
        let r = solve_optimal(&s, 1, 2, &SolveOptions::default()).unwrap();
        assert_eq!(r.objective, 2);
        assert_eq!(r.win_probability, 1.0);
        assert_eq!(r.manipulation_probability, 0.0);
    }

    #[test]
    fn solve_rejects_empty() {
        let s = SampleSet::new(borda3(), 1, vec![]).unwrap();
        assert!(solve_optimal(&s, 1, 0, &SolveOptions::default()).is_err());
    }

    fn random_instance(rng: &mut impl Rng) -> (SampleSet, u32, Candidate) {
        let m = rng.random_range(2..=4);
        let mut alpha: Vec<u64> = (0..m).map(|_| rng.random_range(0..=5)).collect();
        alpha.sort_unstable_by(|a, b| b.cmp(a));
        if alpha[0] == alpha[m - 1] {
            alpha[0] += 1;
        }
        let rule = ScoringRule::new(alpha).unwrap();
        let n = rng.random_range(1..=6);
        let cap = n as u64 * rule.top();
        let t = rng.random_range(1..=15);
        let scores = (0..t)
            .map(|_| {
                (0..m)
                    .map(|_| rng.random_range(0..=cap))
                    .collect::<Vec<_>>()
                    .into()
            })
            .collect();
        let c = rng.random_range(1..=3);
        let d = rng.random_range(0..m);
        (SampleSet::new(rule, n, scores).unwrap(), c, d)
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        let mut rng = SeedStream::new(31).rng();
        for _ in 0..150 {
            let (s, c, d) = random_instance(&mut rng);
            let fast = solve_optimal(&s, c, d, &SolveOptions::default()).unwrap();
            let slow = brute_force_optimal(&s, c, d).unwrap();
            assert_eq!(fast.objective, slow.objective);
            assert_eq!(count_wins(&s, &fast.strategy).unwrap(), fast.objective);
        }
    }

    #[test]
    fn pruning_does_not_change_the_optimum() {
        let mut rng = SeedStream::new(32).rng();
        let no_prune = SolveOptions {
            prune: false,
            ..SolveOptions::default()
        };
        for _ in 0..100 {
            let (s, c, d) = random_instance(&mut rng);
            let a = solve_optimal(&s, c, d, &SolveOptions::default()).unwrap();
            let b = solve_optimal(&s, c, d, &no_prune).unwrap();
            assert_eq!(a.objective, b.objective);
        }
    }

    #[test]
    fn node_budget_returns_valid_incumbent() {
        let rule = ScoringRule::borda(6).unwrap();
        let mut rng = SeedStream::new(33).rng();
        let scores = (0..200)
            .map(|_| {
                (0..6)
                    .map(|_| rng.random_range(180..=260))
                    .collect::<Vec<u64>>()
                    .into()
            })
            .collect();
        let s = SampleSet::new(rule, 100, scores).unwrap();
        let opts = SolveOptions {
            node_limit: Some(1),
            ..SolveOptions::default()
        };
        let r = solve_optimal(&s, 10, 2, &opts).unwrap();
        assert_eq!(count_wins(&s, &r.strategy).unwrap(), r.objective);
        assert!(r.manipulation_probability <= r.win_probability);
    }

    #[test]
    fn cyclic_default_is_valid() {
        for m in 2..7 {
            for c in 1..6 {
                for d in 0..m {
                    assert!(cyclic_strategy(m, c, d).is_ok());
                }
            }
        }
    }
}
