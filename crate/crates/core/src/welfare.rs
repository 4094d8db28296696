//! Welfare loss caused by a manipulation.
//!
//! Regret compares the welfare, measured on the sincere profile alone, of the
//! sincere winner and of the winner once the coalition votes. Welfare
//! defaults to the rule's own positional score.

use rayon::prelude::*;

use crate::distributions::{all_rankings, sample_profile, DistributionSpec};
use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::voting::{
    score_profile, total_scores, winner, Candidate, Profile, Psm, Ranking, ScoringRule, StrategyPsm,
};

/// Welfare of every candidate on a sincere profile.
pub trait SocialWelfare: Sync {
    fn welfare(&self, profile: &Profile) -> Result<Vec<f64>>;
}

/// Welfare as the positional score under a fixed rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalWelfare(pub ScoringRule);

impl SocialWelfare for PositionalWelfare {
    fn welfare(&self, profile: &Profile) -> Result<Vec<f64>> {
        Ok(score_profile(profile, &self.0)?
            .as_slice()
            .iter()
            .map(|&s| s as f64)
            .collect())
    }
}

/// What the coalition did to one sincere profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub sincere_winner: Candidate,
    pub manipulated_winner: Candidate,
    pub regret: f64,
    /// Welfare of the sincere winner, the normalizer.
    pub best_welfare: f64,
}

/// Winners before and after manipulation and the welfare gap between them.
pub fn outcome(
    profile: &Profile,
    strategy: &StrategyPsm,
    rule: &ScoringRule,
    sw: &dyn SocialWelfare,
) -> Result<Outcome> {
    let d = strategy.d();
    let sincere = score_profile(profile, rule)?;
    let manipulated = total_scores(&sincere, strategy.psm(), rule)?;
    let sincere_winner = winner(&sincere, d);
    let manipulated_winner = winner(&manipulated, d);
    let w = sw.welfare(profile)?;
    Ok(Outcome {
        sincere_winner,
        manipulated_winner,
        regret: w[sincere_winner] - w[manipulated_winner],
        best_welfare: w[sincere_winner],
    })
}

/// Regret in positional score points under the rule's own welfare.
pub fn regret(profile: &Profile, strategy: &StrategyPsm, rule: &ScoringRule) -> Result<u64> {
    let d = strategy.d();
    let sincere = score_profile(profile, rule)?;
    let manipulated = total_scores(&sincere, strategy.psm(), rule)?;
    let before = winner(&sincere, d);
    let after = winner(&manipulated, d);
    Ok(sincere[before] - sincere[after])
}

/// Regret under a caller-supplied welfare measure.
pub fn regret_with(
    profile: &Profile,
    strategy: &StrategyPsm,
    rule: &ScoringRule,
    sw: &dyn SocialWelfare,
) -> Result<f64> {
    Ok(outcome(profile, strategy, rule, sw)?.regret)
}

/// Largest expected regret possible given how often the coalition turns
/// the winner into `d` and into some other candidate.
pub fn bound_general(rule: &ScoringRule, c: u32, p_flip_to_d: f64, p_flip_to_other: f64) -> f64 {
    let c = f64::from(c);
    let top = (rule.top() - rule.bottom()) as f64;
    let second = (rule.second() - rule.bottom()) as f64;
    c * (top * p_flip_to_d + second * p_flip_to_other)
}

/// Bound for the balanced strategy under k-approval with impartial culture.
pub fn bound_kapproval(c: u32, k: usize, m: usize, p_flip_to_d: f64, p_flip_to_other: f64) -> f64 {
    let ck = u64::from(c) * k as u64;
    let multiplier = ck.div_ceil(m as u64).saturating_sub(1);
    multiplier as f64 * (p_flip_to_d + p_flip_to_other)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub trials: usize,
    /// Mean regret in welfare units.
    pub expected_regret: f64,
    /// Standard error of `expected_regret`.
    pub std_error: f64,
    /// Mean of per-profile regret divided by the sincere winner's welfare.
    pub normalized_expected_regret: f64,
    /// Frequency of a non-`d` sincere winner replaced by `d`.
    pub p_flip_to_d: f64,
    /// Frequency of the winner changing to someone other than `d`.
    pub p_flip_to_other: f64,
    /// Frequency of `d` winning with the coalition.
    pub win_probability: f64,
    pub bound_general: f64,
    /// Present for k-approval rules.
    pub bound_kapproval: Option<f64>,
}

impl RegretReport {
    /// Frequency with which the coalition made `d` win.
    pub fn manipulation_probability(&self) -> f64 {
        self.p_flip_to_d
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    weight: f64,
    regret: f64,
    regret_sq: f64,
    normalized: f64,
    flip_to_d: f64,
    flip_to_other: f64,
    d_wins: f64,
}

impl Tally {
    fn add(&mut self, o: &Outcome, d: Candidate, weight: f64) {
        self.weight += weight;
        self.regret += weight * o.regret;
        self.regret_sq += weight * o.regret * o.regret;
        if o.best_welfare != 0.0 {
            self.normalized += weight * o.regret / o.best_welfare;
        }
        if o.manipulated_winner == d {
            self.d_wins += weight;
            if o.sincere_winner != d {
                self.flip_to_d += weight;
            }
        } else if o.manipulated_winner != o.sincere_winner {
            self.flip_to_other += weight;
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.weight += other.weight;
        self.regret += other.regret;
        self.regret_sq += other.regret_sq;
        self.normalized += other.normalized;
        self.flip_to_d += other.flip_to_d;
        self.flip_to_other += other.flip_to_other;
        self.d_wins += other.d_wins;
        self
    }

    fn report(&self, trials: usize, strategy: &StrategyPsm, rule: &ScoringRule) -> RegretReport {
        let w = self.weight;
        let mean = self.regret / w;
        let var = (self.regret_sq / w - mean * mean).max(0.0);
        let p_d = self.flip_to_d / w;
        let p_o = self.flip_to_other / w;
        RegretReport {
            trials,
            expected_regret: mean,
            std_error: (var / trials as f64).sqrt(),
            normalized_expected_regret: self.normalized / w,
            p_flip_to_d: p_d,
            p_flip_to_other: p_o,
            win_probability: self.d_wins / w,
            bound_general: bound_general(rule, strategy.c(), p_d, p_o),
            bound_kapproval: rule
                .approval_k()
                .map(|k| bound_kapproval(strategy.c(), k, rule.m(), p_d, p_o)),
        }
    }
}

/// Trials per independent random stream.
const CHUNK: usize = 256;

/// Monte Carlo estimate over `trials` fresh sincere profiles. Every profile
/// counts, including ones where `d` could never win.
///
/// Trials are split into fixed chunks, each with its own substream of
/// `seed`, and summed in chunk order, so the result does not depend on the
/// number of worker threads.
pub fn expected_regret(
    spec: &DistributionSpec,
    n: usize,
    strategy: &StrategyPsm,
    rule: &ScoringRule,
    trials: usize,
    seed: SeedStream,
) -> Result<RegretReport> {
    expected_regret_with(
        spec,
        n,
        strategy,
        rule,
        trials,
        seed,
        &PositionalWelfare(rule.clone()),
    )
}

pub fn expected_regret_with(
    spec: &DistributionSpec,
    n: usize,
    strategy: &StrategyPsm,
    rule: &ScoringRule,
    trials: usize,
    seed: SeedStream,
    sw: &dyn SocialWelfare,
) -> Result<RegretReport> {
    if trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }
    check_dims(spec.m(), strategy, rule)?;
    let d = strategy.d();
    let chunks = trials.div_ceil(CHUNK);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.substream(k as u64).rng();
            let len = CHUNK.min(trials - k * CHUNK);
            let mut tally = Tally::default();
            for _ in 0..len {
                let profile = sample_profile(spec, n, &mut rng)?;
                tally.add(&outcome(&profile, strategy, rule, sw)?, d, 1.0);
            }
            Ok(tally)
        })
        .collect::<Result<Vec<Tally>>>()?;
    let total = partials.into_iter().fold(Tally::default(), Tally::merge);
    Ok(total.report(trials, strategy, rule))
}

/// Largest number of profiles the exact impartial-culture average visits.
pub const EXACT_MAX_PROFILES: u64 = 2_000_000;

/// Exact expected regret under impartial culture by enumerating all
/// `(m!)^n` ordered profiles.
pub fn exact_expected_regret_ic(
    n: usize,
    strategy: &StrategyPsm,
    rule: &ScoringRule,
) -> Result<RegretReport> {
    let m = rule.m();
    check_dims(m, strategy, rule)?;
    if n == 0 {
        return Err(Error::invalid("need at least one sincere voter"));
    }
    let rankings = all_rankings(m);
    let count = (rankings.len() as u64)
        .checked_pow(n as u32)
        .filter(|&c| c <= EXACT_MAX_PROFILES)
        .ok_or_else(|| {
            Error::GuardExceeded(format!(
                "more than {EXACT_MAX_PROFILES} profiles to enumerate"
            ))
        })?;
    let sw = PositionalWelfare(rule.clone());
    let d = strategy.d();
    let mut tally = Tally::default();
    let mut digits = vec![0usize; n];
    for _ in 0..count {
        let votes: Vec<Ranking> = digits.iter().map(|&i| rankings[i].clone()).collect();
        let profile = Profile::new(m, votes)?;
        tally.add(&outcome(&profile, strategy, rule, &sw)?, d, 1.0);
        for digit in digits.iter_mut() {
            *digit += 1;
            if *digit < rankings.len() {
                break;
            }
            *digit = 0;
        }
    }
    Ok(tally.report(count as usize, strategy, rule))
}

fn check_dims(m: usize, strategy: &StrategyPsm, rule: &ScoringRule) -> Result<()> {
    for found in [strategy.m(), rule.m()] {
        if found != m {
            return Err(Error::DimensionMismatch { expected: m, found });
        }
    }
    Ok(())
}

/// A profile on which a coalition causes close to the largest possible
/// regret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorstCaseInstance {
    pub profile: Profile,
    pub rule: ScoringRule,
    pub d: Candidate,
    /// `d` first, the sincere winner last, everyone else in index order.
    pub strategy: StrategyPsm,
}

impl WorstCaseInstance {
    /// Regret the strategy causes: `c (alpha_1 - delta - xi / (m - 1))`.
    pub fn expected_regret(&self) -> f64 {
        let m = self.rule.m() as f64;
        let a = self.rule.alpha();
        let delta = a[a.len() - 1] as f64;
        let xi = (a[1] - a[a.len() - 1]) as f64;
        f64::from(self.strategy.c()) * (a[0] as f64 - delta - xi / (m - 1.0))
    }
}

/// Builds the instance for rule `(top, delta + xi, delta, ..., delta)`.
///
/// Candidate 0 is the sincere winner and candidate `m - 1` is `d`. The first
/// `c` ballots put candidate 0 first and rotate the rest so each appears
/// equally often in every lower position. The remaining `n - c` ballots
/// alternate between candidate 0 first with `d` second and the reverse,
/// with everyone else in index order.
pub fn worst_case_instance(
    n: usize,
    c: u32,
    m: usize,
    delta: u64,
    xi: u64,
    top: u64,
) -> Result<WorstCaseInstance> {
    if m < 3 {
        return Err(Error::invalid("need at least three candidates"));
    }
    let cu = c as usize;
    if c == 0 || !cu.is_multiple_of(m - 1) {
        return Err(Error::invalid(format!(
            "m - 1 = {} must divide c = {c}",
            m - 1
        )));
    }
    if n < cu || !(n - cu).is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "n - c must be even and non-negative, got n = {n}, c = {c}"
        )));
    }
    if delta == 0 || xi == 0 {
        return Err(Error::invalid("delta and xi must be positive"));
    }
    if top < delta + xi {
        return Err(Error::invalid("top score must be at least delta + xi"));
    }
    let mut alpha = vec![delta; m];
    alpha[0] = top;
    alpha[1] = delta + xi;
    let rule = ScoringRule::new(alpha)?;

    let d = m - 1;
    let tail: Vec<Candidate> = (1..m).collect();
    let mut votes = Vec::with_capacity(n);
    for v in 0..cu {
        let mut order = vec![0];
        order.extend((0..m - 1).map(|j| tail[(j + v) % (m - 1)]));
        votes.push(Ranking::new(order)?);
    }
    let rest: Vec<Candidate> = (1..m - 1).collect();
    for h in 0..n - cu {
        let mut order = if h % 2 == 0 { vec![0, d] } else { vec![d, 0] };
        order.extend(&rest);
        votes.push(Ranking::new(order)?);
    }
    let profile = Profile::new(m, votes)?;

    let mut x = Psm::zeros(m);
    x.set(d, 0, c);
    for i in 1..m - 1 {
        x.set(i, i, c);
    }
    x.set(0, m - 1, c);
    let strategy = StrategyPsm::new(x, c, d)?;
    Ok(WorstCaseInstance {
        profile,
        rule,
        d,
        strategy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::MallowsModel;
    use crate::optimizer::balanced_strategy;
    use crate::voting::psm_of_votes;

    fn votes(list: &[&str]) -> Profile {
        Profile::from_votes(list.iter().map(|v| v.parse().unwrap()).collect()).unwrap()
    }

    fn coalition(list: &[&str], d: Candidate) -> StrategyPsm {
        StrategyPsm::from_votes(&votes(list), d).unwrap()
    }

    #[test]
    fn unchanged_winner_has_no_regret() {
        let rule = ScoringRule::borda(3).unwrap();
        let p = votes(&["0,1,2", "0,1,2", "0,2,1"]);
        let x = coalition(&["2,1,0"], 2);
        assert_eq!(regret(&p, &x, &rule).unwrap(), 0);
    }

    #[test]
    fn two_voter_borda_example() {
        let rule = ScoringRule::borda(3).unwrap();
        let p = votes(&["0,2,1", "0,1,2"]);
        assert_eq!(score_profile(&p, &rule).unwrap().as_slice(), &[4, 1, 1]);
        let x = coalition(&["2,1,0", "2,1,0"], 2);
        let after = total_scores(&score_profile(&p, &rule).unwrap(), x.psm(), &rule).unwrap();
        assert_eq!(after.as_slice(), &[4, 3, 5]);
        assert_eq!(regret(&p, &x, &rule).unwrap(), 3);
    }

    #[test]
    fn regret_to_d_is_below_coalition_swing() {
        let rule = ScoringRule::borda(4).unwrap();
        let model = MallowsModel::new(Ranking::identity(4), 0.8).unwrap();
        let spec = DistributionSpec::Mallows(model);
        let x = balanced_strategy(4, 2, 3, 1).unwrap();
        let mut rng = SeedStream::new(5).rng();
        for _ in 0..500 {
            let p = sample_profile(&spec, 7, &mut rng).unwrap();
            let o = outcome(&p, &x, &rule, &PositionalWelfare(rule.clone())).unwrap();
            assert!(o.regret >= 0.0);
            if o.manipulated_winner == 1 && o.sincere_winner != 1 {
                assert!(o.regret < 3.0 * 3.0);
            }
        }
    }

    #[test]
    fn custom_welfare_is_used() {
        struct Flat;
        impl SocialWelfare for Flat {
            fn welfare(&self, p: &Profile) -> Result<Vec<f64>> {
                Ok(vec![1.0; p.m()])
            }
        }
        let rule = ScoringRule::borda(3).unwrap();
        let p = votes(&["0,2,1", "0,1,2"]);
        let x = coalition(&["2,1,0", "2,1,0"], 2);
        assert_eq!(regret_with(&p, &x, &rule, &Flat).unwrap(), 0.0);
    }

    #[test]
    fn general_bound_examples() {
        let rule = ScoringRule::borda(3).unwrap();
        assert!((bound_general(&rule, 2, 0.5, 0.25) - 2.5).abs() < 1e-12);
        assert_eq!(bound_general(&rule, 2, 0.0, 0.0), 0.0);
        let m_total = rule.total() as f64;
        assert!(bound_general(&rule, 2, 1.0, 0.0) <= 2.0 * m_total);
    }

    #[test]
    fn kapproval_bound_examples() {
        assert!((bound_kapproval(10, 1, 6, 0.3, 0.1) - 0.4).abs() < 1e-12);
        assert_eq!(bound_kapproval(2, 1, 3, 0.5, 0.5), 0.0);
        assert!((bound_kapproval(6, 2, 4, 0.5, 0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_mass_matches_single_regret() {
        let rule = ScoringRule::borda(3).unwrap();
        let p = votes(&["0,2,1", "0,1,2"]);
        let x = coalition(&["2,1,0", "2,1,0"], 2);
        let spec = DistributionSpec::PointMass(p.clone());
        let r = expected_regret(&spec, 2, &x, &rule, 10, SeedStream::new(1)).unwrap();
        assert_eq!(r.expected_regret, 3.0);
        assert_eq!(r.p_flip_to_d, 1.0);
        assert!((r.normalized_expected_regret - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_trials_rejected() {
        let rule = ScoringRule::borda(3).unwrap();
        let x = balanced_strategy(3, 2, 2, 2).unwrap();
        let spec = DistributionSpec::ImpartialCulture { m: 3 };
        assert!(expected_regret(&spec, 3, &x, &rule, 0, SeedStream::new(1)).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let rule = ScoringRule::borda(4).unwrap();
        let x = balanced_strategy(4, 2, 3, 3).unwrap();
        let spec = DistributionSpec::ImpartialCulture { m: 4 };
        let a = expected_regret(&spec, 9, &x, &rule, 1000, SeedStream::new(4)).unwrap();
        let b = expected_regret(&spec, 9, &x, &rule, 1000, SeedStream::new(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_enumeration_agrees_with_monte_carlo() {
        let rule = ScoringRule::borda(3).unwrap();
        let x = balanced_strategy(3, 2, 2, 2).unwrap();
        let exact = exact_expected_regret_ic(3, &x, &rule).unwrap();
        assert_eq!(exact.trials, 216);
        let spec = DistributionSpec::ImpartialCulture { m: 3 };
        let mc = expected_regret(&spec, 3, &x, &rule, 100_000, SeedStream::new(8)).unwrap();
        assert!(
            (mc.expected_regret - exact.expected_regret).abs() <= 3.0 * mc.std_error,
            "{} vs {} (se {})",
            mc.expected_regret,
            exact.expected_regret,
            mc.std_error
        );
    }

    #[test]
    fn kapproval_single_manipulator_counterexample() {
        // With c k <= m the bound is zero, yet a single plurality
        // manipulator can still flip a tie away from a higher-welfare
        // winner onto d.
        let rule = ScoringRule::plurality(3).unwrap();
        let x = balanced_strategy(3, 1, 3, 2).unwrap();
        let exact = exact_expected_regret_ic(3, &x, &rule).unwrap();
        assert_eq!(exact.bound_kapproval, Some(0.0));
        assert!((exact.expected_regret - 2.0 / 3.0).abs() < 1e-12);
        assert!((exact.p_flip_to_d - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(exact.p_flip_to_other, 0.0);
    }

    #[test]
    fn worst_case_small_instance() {
        let inst = worst_case_instance(4, 2, 3, 1, 1, 10).unwrap();
        assert_eq!(inst.rule.alpha(), &[10, 2, 1]);
        assert_eq!(
            score_profile(&inst.profile, &inst.rule).unwrap().as_slice(),
            &[32, 5, 15]
        );
        let r = regret(&inst.profile, &inst.strategy, &inst.rule).unwrap();
        assert_eq!(r, 17);
        assert_eq!(inst.expected_regret(), 17.0);
    }

    #[test]
    fn worst_case_balances_coalition_block() {
        let inst = worst_case_instance(10, 6, 4, 1, 1, 20).unwrap();
        let head = Profile::new(4, inst.profile.votes()[..6].to_vec()).unwrap();
        let x = psm_of_votes(&head);
        assert_eq!(x.get(0, 0), 6);
        for i in 1..4 {
            for j in 1..4 {
                assert_eq!(x.get(i, j), 2);
            }
        }
        let r = regret(&inst.profile, &inst.strategy, &inst.rule).unwrap();
        assert_eq!(r as f64, inst.expected_regret());
    }

    #[test]
    fn worst_case_ratio_approaches_full_swing() {
        let inst = worst_case_instance(4, 2, 3, 1, 1, 1000).unwrap();
        let r = regret(&inst.profile, &inst.strategy, &inst.rule).unwrap() as f64;
        let c_m = 2.0 * inst.rule.total() as f64;
        assert!(r / c_m > 0.99);
    }

    #[test]
    fn worst_case_preconditions() {
        assert!(worst_case_instance(4, 3, 3, 1, 1, 10).is_err());
        assert!(worst_case_instance(5, 2, 3, 1, 1, 10).is_err());
        assert!(worst_case_instance(1, 2, 3, 1, 1, 10).is_err());
        assert!(worst_case_instance(4, 2, 3, 0, 1, 10).is_err());
    }
}
