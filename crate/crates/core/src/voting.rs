//! Rankings, profiles, positional scoring rules and positional summary
//! matrices.
//!
//! Candidates are dense 0-based indices. Scores are integers: rules with
//! rational weights must be scaled to integers by the caller.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Index of a candidate in `0..m`.
pub type Candidate = usize;

/// A strict ranking of all `m` candidates, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ranking {
    order: Vec<Candidate>,
}

impl Ranking {
    /// Builds a ranking from an order, checking that it is a permutation of
    /// `0..order.len()`.
    pub fn new(order: Vec<Candidate>) -> Result<Self> {
        let m = order.len();
        if m == 0 {
            return Err(Error::invalid("a ranking needs at least one candidate"));
        }
        let mut seen = vec![false; m];
        for &c in &order {
            if c >= m {
                return Err(Error::invalid(format!(
                    "candidate {c} out of range for {m} candidates"
                )));
            }
            if std::mem::replace(&mut seen[c], true) {
                return Err(Error::invalid(format!("candidate {c} ranked twice")));
            }
        }
        Ok(Ranking { order })
    }

    pub(crate) fn from_order_unchecked(order: Vec<Candidate>) -> Self {
        debug_assert!(Ranking::new(order.clone()).is_ok());
        Ranking { order }
    }

    pub fn identity(m: usize) -> Self {
        Ranking {
            order: (0..m).collect(),
        }
    }

    /// Number of candidates.
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[Candidate] {
        &self.order
    }

    pub fn candidate_at(&self, position: usize) -> Candidate {
        self.order[position]
    }

    /// Position (0 = top) of `candidate`.
    pub fn position_of(&self, candidate: Candidate) -> usize {
        self.order
            .iter()
            .position(|&c| c == candidate)
            .expect("candidate not in ranking")
    }

    /// Inverse permutation: `positions()[c]` is the position of candidate `c`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (p, &c) in self.order.iter().enumerate() {
            pos[c] = p;
        }
        pos
    }

    pub fn prefers(&self, a: Candidate, b: Candidate) -> bool {
        self.position_of(a) < self.position_of(b)
    }

    pub fn reversed(&self) -> Self {
        let mut order = self.order.clone();
        order.reverse();
        Ranking { order }
    }
}

impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Ranking {
    type Err = Error;

    /// Parses `"2,0,1"` (or `"2>0>1"`).
    fn from_str(s: &str) -> Result<Self> {
        let order = s
            .split([',', '>'])
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad candidate index `{}`", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Ranking::new(order)
    }
}

/// A collection of votes over the same `m` candidates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    m: usize,
    votes: Vec<Ranking>,
}

impl Profile {
    pub fn new(m: usize, votes: Vec<Ranking>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("profile needs at least one candidate"));
        }
        if let Some(v) = votes.iter().find(|v| v.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: v.len(),
            });
        }
        Ok(Profile { m, votes })
    }

    /// Builds a profile from a non-empty list of votes, inferring `m`.
    pub fn from_votes(votes: Vec<Ranking>) -> Result<Self> {
        let m = votes
            .first()
            .map(Ranking::len)
            .ok_or_else(|| Error::invalid("cannot infer candidate count from zero votes"))?;
        Profile::new(m, votes)
    }

    pub fn empty(m: usize) -> Self {
        Profile {
            m,
            votes: Vec::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of votes.
    pub fn n(&self) -> usize {
        self.votes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }

    pub fn votes(&self) -> &[Ranking] {
        &self.votes
    }

    pub fn push(&mut self, vote: Ranking) -> Result<()> {
        if vote.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: vote.len(),
            });
        }
        self.votes.push(vote);
        Ok(())
    }

    /// Concatenates two profiles over the same candidates.
    pub fn joined(&self, other: &Profile) -> Result<Profile> {
        check_dim(self.m, other.m)?;
        let mut votes = self.votes.clone();
        votes.extend(other.votes.iter().cloned());
        Ok(Profile { m: self.m, votes })
    }
}

/// Positional scoring vector: position `j` earns `alpha[j]` points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoringRule {
    alpha: Vec<u64>,
}

impl ScoringRule {
    /// Validates that `alpha` is non-increasing and non-degenerate
    /// (`alpha[0] > alpha[m-1]`).
    pub fn new(alpha: Vec<u64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::invalid(
                "a scoring rule needs at least two positions",
            ));
        }
        if alpha.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid(format!(
                "scoring vector {alpha:?} is not non-increasing"
            )));
        }
        if alpha[0] == alpha[alpha.len() - 1] {
            return Err(Error::invalid(format!(
                "scoring vector {alpha:?} is constant"
            )));
        }
        Ok(ScoringRule { alpha })
    }

    pub fn plurality(m: usize) -> Result<Self> {
        Self::k_approval(m, 1)
    }

    pub fn k_approval(m: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= m {
            return Err(Error::invalid(format!(
                "k-approval needs 1 <= k < m, got k={k}, m={m}"
            )));
        }
        Self::new((0..m).map(|j| u64::from(j < k)).collect())
    }

    pub fn borda(m: usize) -> Result<Self> {
        Self::new((0..m as u64).rev().collect())
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[u64] {
        &self.alpha
    }

    /// Sum of all positional scores.
    pub fn total(&self) -> u64 {
        self.alpha.iter().sum()
    }

    pub fn top(&self) -> u64 {
        self.alpha[0]
    }

    pub fn second(&self) -> u64 {
        self.alpha[1]
    }

    pub fn bottom(&self) -> u64 {
        self.alpha[self.alpha.len() - 1]
    }

    /// `Some(k)` when the rule is exactly k-approval.
    pub fn approval_k(&self) -> Option<usize> {
        let k = self.alpha.iter().take_while(|&&a| a == 1).count();
        let rest_zero = self.alpha[k..].iter().all(|&a| a == 0);
        (k >= 1 && k < self.alpha.len() && rest_zero).then_some(k)
    }
}

/// Per-candidate total positional scores of one profile.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoreVector(Vec<u64>);

impl ScoreVector {
    pub fn new(scores: Vec<u64>) -> Self {
        ScoreVector(scores)
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Highest score among candidates other than `d`.
    pub fn max_excluding(&self, d: Candidate) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != d)
            .map(|(_, &s)| s)
            .max()
            .unwrap_or(0)
    }
}

impl From<Vec<u64>> for ScoreVector {
    fn from(v: Vec<u64>) -> Self {
        ScoreVector(v)
    }
}

impl std::ops::Index<Candidate> for ScoreVector {
    type Output = u64;

    fn index(&self, i: Candidate) -> &u64 {
        &self.0[i]
    }
}

/// Positional summary matrix: entry `(i, j)` counts ballots ranking
/// candidate `i` in position `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Psm {
    m: usize,
    cells: Vec<u32>,
}

impl Psm {
    pub fn zeros(m: usize) -> Self {
        Psm {
            m,
            cells: vec![0; m * m],
        }
    }

    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::invalid("empty matrix"));
        }
        let mut cells = Vec::with_capacity(m * m);
        for row in rows {
            if row.len() != m {
                return Err(Error::invalid(format!(
                    "matrix is not square: row of length {} in a {m}-row matrix",
                    row.len()
                )));
            }
            cells.extend(row);
        }
        Ok(Psm { m, cells })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.cells[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: u32) {
        self.cells[i * self.m + j] = value;
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.cells[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u32]> {
        self.cells.chunks(self.m)
    }

    pub fn row_sum(&self, i: usize) -> u64 {
        self.row(i).iter().map(|&x| u64::from(x)).sum()
    }

    pub fn col_sum(&self, j: usize) -> u64 {
        (0..self.m).map(|i| u64::from(self.get(i, j))).sum()
    }

    /// Entrywise sum.
    pub fn plus(&self, other: &Psm) -> Result<Psm> {
        check_dim(self.m, other.m)?;
        Ok(Psm {
            m: self.m,
            cells: self
                .cells
                .iter()
                .zip(&other.cells)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Matrix-vector product with the scoring vector.
    pub fn times_alpha(&self, rule: &ScoringRule) -> Result<Vec<u64>> {
        check_dim(self.m, rule.m())?;
        Ok(self
            .rows()
            .map(|row| {
                row.iter()
                    .zip(rule.alpha())
                    .map(|(&x, &a)| u64::from(x) * a)
                    .sum()
            })
            .collect())
    }
}

impl fmt::Display for Psm {
    /// One line per row, entries separated by single spaces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// A coalition strategy in normal form: `c` ballots, all ranking `d` first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StrategyPsm {
    psm: Psm,
    c: u32,
    d: Candidate,
}

impl StrategyPsm {
    /// Checks row/column sums and the `d`-first normalization.
    pub fn new(psm: Psm, c: u32, d: Candidate) -> Result<Self> {
        let m = psm.m();
        if d >= m {
            return Err(Error::invalid(format!(
                "desired candidate {d} out of range for {m} candidates"
            )));
        }
        if c == 0 {
            return Err(Error::InvalidPsm("coalition size must be positive".into()));
        }
        for i in 0..m {
            if psm.row_sum(i) != u64::from(c) || psm.col_sum(i) != u64::from(c) {
                return Err(Error::InvalidPsm(format!(
                    "row/column {i} does not sum to {c}"
                )));
            }
        }
        if psm.get(d, 0) != c {
            return Err(Error::InvalidPsm(format!(
                "candidate {d} must be ranked first by all {c} manipulators"
            )));
        }
        Ok(StrategyPsm { psm, c, d })
    }

    /// Normal-form strategy from explicit manipulator ballots.
    pub fn from_votes(votes: &Profile, d: Candidate) -> Result<Self> {
        let c = u32::try_from(votes.n()).map_err(|_| Error::invalid("too many ballots"))?;
        StrategyPsm::new(psm_of_votes(votes), c, d)
    }

    pub fn psm(&self) -> &Psm {
        &self.psm
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn d(&self) -> Candidate {
        self.d
    }

    pub fn m(&self) -> usize {
        self.psm.m()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Total positional score of each candidate in a non-empty profile.
pub fn score_profile(profile: &Profile, rule: &ScoringRule) -> Result<ScoreVector> {
    check_dim(rule.m(), profile.m())?;
    if profile.is_empty() {
        return Err(Error::invalid("cannot score an empty profile"));
    }
    let mut scores = vec![0u64; profile.m()];
    for vote in profile.votes() {
        for (&c, &a) in vote.order().iter().zip(rule.alpha()) {
            scores[c] += a;
        }
    }
    Ok(ScoreVector(scores))
}

/// Positional summary matrix of a list of votes. An empty profile gives the
/// zero matrix.
pub fn psm_of_votes(votes: &Profile) -> Psm {
    let mut psm = Psm::zeros(votes.m());
    for vote in votes.votes() {
        for (j, &c) in vote.order().iter().enumerate() {
            psm.cells[c * psm.m + j] += 1;
        }
    }
    psm
}

/// `s + X·alpha`.
pub fn total_scores(s: &ScoreVector, x: &Psm, rule: &ScoringRule) -> Result<ScoreVector> {
    check_dim(rule.m(), s.len())?;
    let added = x.times_alpha(rule)?;
    Ok(ScoreVector(
        s.0.iter().zip(added).map(|(a, b)| a + b).collect(),
    ))
}

/// Winner under maximum score. Ties go against `d`; among other tied
/// candidates the lowest index wins.
pub fn winner(scores: &ScoreVector, d: Candidate) -> Candidate {
    let top = *scores.0.iter().max().expect("empty score vector");
    let mut tied = scores
        .0
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s == top)
        .map(|(i, _)| i);
    let first = tied.next().expect("max exists");
    if first != d {
        return first;
    }
    tied.next().unwrap_or(d)
}

/// Whether `d` has a strictly higher score than every other candidate.
pub fn strictly_wins(scores: &ScoreVector, d: Candidate) -> bool {
    scores.0.len() == 1 || scores[d] > scores.max_excluding(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Ranking {
        s.parse().unwrap()
    }

    fn profile(votes: &[&str]) -> Profile {
        Profile::from_votes(votes.iter().map(|v| r(v)).collect()).unwrap()
    }

    #[test]
    fn ranking_rejects_non_permutations() {
        assert!(Ranking::new(vec![0, 0, 1]).is_err());
        assert!(Ranking::new(vec![0, 3, 1]).is_err());
        assert!(Ranking::new(vec![]).is_err());
        let v = r("2>0>1");
        assert_eq!(v.positions(), vec![1, 2, 0]);
        assert!(v.prefers(2, 1));
        assert_eq!(v.to_string(), "2,0,1");
    }

    #[test]
    fn scoring_rule_validation() {
        assert!(ScoringRule::new(vec![1, 2, 0]).is_err());
        assert!(ScoringRule::new(vec![1, 1, 1]).is_err());
        assert!(ScoringRule::new(vec![3]).is_err());
        assert_eq!(ScoringRule::borda(4).unwrap().alpha(), &[3, 2, 1, 0]);
        assert_eq!(ScoringRule::k_approval(4, 2).unwrap().approval_k(), Some(2));
        assert_eq!(ScoringRule::borda(3).unwrap().approval_k(), None);
        assert!(ScoringRule::k_approval(3, 3).is_err());
    }

    #[test]
    fn score_profile_examples() {
        let plur = ScoringRule::plurality(3).unwrap();
        let borda = ScoringRule::borda(3).unwrap();
        assert_eq!(
            score_profile(&profile(&["0,1,2"]), &plur)
                .unwrap()
                .as_slice(),
            &[1, 0, 0]
        );
        assert_eq!(
            score_profile(&profile(&["0,1,2", "1,0,2"]), &borda)
                .unwrap()
                .as_slice(),
            &[3, 3, 0]
        );
        let all: Vec<&str> = vec!["0,1,2", "0,2,1", "1,0,2", "1,2,0", "2,0,1", "2,1,0"];
        assert_eq!(
            score_profile(&profile(&all), &borda).unwrap().as_slice(),
            &[6, 6, 6]
        );
    }

    #[test]
    fn score_profile_errors() {
        let borda4 = ScoringRule::borda(4).unwrap();
        assert!(matches!(
            score_profile(&profile(&["0,1,2"]), &borda4),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(score_profile(&Profile::empty(3), &ScoringRule::borda(3).unwrap()).is_err());
    }

    #[test]
    fn psm_examples() {
        let twice = psm_of_votes(&profile(&["0,1,2", "0,1,2"]));
        assert_eq!(
            twice,
            Psm::from_rows(vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]).unwrap()
        );
        assert_eq!(psm_of_votes(&Profile::empty(3)), Psm::zeros(3));
        let mixed = psm_of_votes(&profile(&["0,1,2", "1,2,0"]));
        assert_eq!(
            mixed,
            Psm::from_rows(vec![vec![1, 0, 1], vec![1, 1, 0], vec![0, 1, 1]]).unwrap()
        );
    }

    #[test]
    fn total_scores_examples() {
        let borda = ScoringRule::borda(3).unwrap();
        let s = ScoreVector::new(vec![3, 1, 2]);
        assert_eq!(total_scores(&s, &Psm::zeros(3), &borda).unwrap(), s);
        let one = psm_of_votes(&profile(&["2,0,1"]));
        assert_eq!(
            total_scores(&ScoreVector::new(vec![0, 0, 0]), &one, &borda)
                .unwrap()
                .as_slice(),
            &[1, 0, 2]
        );
        let two = psm_of_votes(&profile(&["2,1,0", "2,1,0"]));
        assert_eq!(
            total_scores(&s, &two, &borda).unwrap().as_slice(),
            &[3, 3, 6]
        );
        assert!(total_scores(&ScoreVector::new(vec![1, 2]), &two, &borda).is_err());
    }

    #[test]
    fn winner_examples() {
        assert_eq!(winner(&ScoreVector::new(vec![3, 1, 2]), 2), 0);
        assert_eq!(winner(&ScoreVector::new(vec![4, 4, 0]), 1), 0);
        assert_eq!(winner(&ScoreVector::new(vec![4, 4, 0]), 2), 0);
        assert_eq!(winner(&ScoreVector::new(vec![0, 4, 4]), 1), 2);
        assert_eq!(winner(&ScoreVector::new(vec![1, 5, 2]), 1), 1);
    }

    #[test]
    fn strategy_psm_checks_normal_form() {
        let ok = Psm::from_rows(vec![vec![0, 1, 1], vec![0, 1, 1], vec![2, 0, 0]]).unwrap();
        assert!(StrategyPsm::new(ok.clone(), 2, 2).is_ok());
        assert!(StrategyPsm::new(ok.clone(), 2, 0).is_err());
        assert!(StrategyPsm::new(ok, 3, 2).is_err());
    }

    fn arb_profile(m: usize) -> impl Strategy<Value = Profile> {
        prop::collection::vec(Just((0..m).collect::<Vec<_>>()).prop_shuffle(), 1..12).prop_map(
            move |orders| {
                Profile::new(
                    m,
                    orders
                        .into_iter()
                        .map(Ranking::from_order_unchecked)
                        .collect(),
                )
                .unwrap()
            },
        )
    }

    fn arb_rule(m: usize) -> impl Strategy<Value = ScoringRule> {
        prop::collection::vec(0u64..6, m).prop_filter_map("degenerate", |mut a| {
            a.sort_unstable_by(|x, y| y.cmp(x));
            ScoringRule::new(a).ok()
        })
    }

    proptest! {
        #[test]
        fn scores_sum_to_n_times_total((p, rule) in (2usize..6).prop_flat_map(|m| (arb_profile(m), arb_rule(m)))) {
            let s = score_profile(&p, &rule).unwrap();
            prop_assert_eq!(s.as_slice().iter().sum::<u64>(), p.n() as u64 * rule.total());
        }

        #[test]
        fn scores_match_psm_product((p, rule) in (2usize..6).prop_flat_map(|m| (arb_profile(m), arb_rule(m)))) {
            let s = score_profile(&p, &rule).unwrap();
            let via_psm = psm_of_votes(&p).times_alpha(&rule).unwrap();
            prop_assert_eq!(s.as_slice(), via_psm.as_slice());
        }

        #[test]
        fn total_scores_is_additive((p1, p2, rule) in (2usize..6).prop_flat_map(|m| (arb_profile(m), arb_profile(m), arb_rule(m))),
                                    base in prop::collection::vec(0u64..50, 6)) {
            let m = rule.m();
            let s = ScoreVector::new(base[..m].to_vec());
            let x1 = psm_of_votes(&p1);
            let x2 = psm_of_votes(&p2);
            let at_once = total_scores(&s, &x1.plus(&x2).unwrap(), &rule).unwrap();
            let stepwise = total_scores(&total_scores(&s, &x1, &rule).unwrap(), &x2, &rule).unwrap();
            prop_assert_eq!(at_once, stepwise);
        }

        #[test]
        fn winner_never_returns_d_when_matched(scores in prop::collection::vec(0u64..5, 2..7), d in 0usize..7) {
            let d = d % scores.len();
            let s = ScoreVector::new(scores);
            let w = winner(&s, d);
            if w == d {
                prop_assert!(s[d] > s.max_excluding(d));
            } else {
                prop_assert_eq!(s[w], *s.as_slice().iter().max().unwrap());
            }
        }
    }
}
