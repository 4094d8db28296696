//! Closed-form strategies for k-approval and three-candidate Borda.

use crate::error::{Error, Result};
use crate::voting::{Candidate, Psm, StrategyPsm};

/// Every manipulator ranks `d` first. The `c(k-1)` approved slots below the
/// top go to the other candidates as evenly as possible (counts differ by at
/// most one); the remaining positions are filled round-robin.
pub fn balanced_strategy(m: usize, k: usize, c: u32, d: Candidate) -> Result<StrategyPsm> {
    if k == 0 || k >= m {
        return Err(Error::invalid(format!(
            "need 1 <= k < m, got k = {k}, m = {m}"
        )));
    }
    if d >= m {
        return Err(Error::invalid(format!(
            "candidate {d} out of range for m = {m}"
        )));
    }
    if c == 0 {
        return Err(Error::invalid("coalition size must be at least 1"));
    }
    let others: Vec<Candidate> = (0..m).filter(|&i| i != d).collect();
    let width = others.len();
    let mut x = Psm::zeros(m);
    x.set(d, 0, c);
    for v in 0..c as usize {
        // Consecutive ballots approve consecutive windows of the cycle.
        let offset = (v * (k - 1)) % width;
        for slot in 0..width {
            let who = others[(slot + offset) % width];
            x.set(who, slot + 1, x.get(who, slot + 1) + 1);
        }
    }
    StrategyPsm::new(x, c, d)
}

fn borda3_pair(d: Candidate) -> Result<(Candidate, Candidate)> {
    match d {
        0 => Ok((1, 2)),
        1 => Ok((0, 2)),
        2 => Ok((0, 1)),
        _ => Err(Error::invalid(format!(
            "candidate {d} out of range for m = 3"
        ))),
    }
}

/// Three-candidate Borda: the lower-indexed other candidate is ranked second
/// by `c/2 + 1` manipulators, the other by `c/2 - 1`.
pub fn near_balanced_strategy(c: u32, d: Candidate) -> Result<StrategyPsm> {
    if c == 0 || c % 2 == 1 {
        return Err(Error::invalid(format!(
            "coalition size must be even and positive, got {c}"
        )));
    }
    let (x_cand, y_cand) = borda3_pair(d)?;
    let mut x = Psm::zeros(3);
    x.set(d, 0, c);
    x.set(x_cand, 1, c / 2 + 1);
    x.set(x_cand, 2, c / 2 - 1);
    x.set(y_cand, 1, c / 2 - 1);
    x.set(y_cand, 2, c / 2 + 1);
    StrategyPsm::new(x, c, d)
}

/// Recommendation for three-candidate Borda with an even coalition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Borda3Strategy {
    /// The balanced strategy is known to be optimal for these `n` and `c`.
    Balanced(StrategyPsm),
    /// One of the two is optimal; evaluate both against samples.
    Ambiguous {
        balanced: StrategyPsm,
        near_balanced: StrategyPsm,
    },
}

impl Borda3Strategy {
    pub fn tag(&self) -> &'static str {
        match self {
            Borda3Strategy::Balanced(_) => "balanced",
            Borda3Strategy::Ambiguous { .. } => "ambiguous",
        }
    }

    pub fn candidates(&self) -> Vec<&StrategyPsm> {
        match self {
            Borda3Strategy::Balanced(s) => vec![s],
            Borda3Strategy::Ambiguous {
                balanced,
                near_balanced,
            } => vec![balanced, near_balanced],
        }
    }
}

/// Balanced is optimal when `n` is even and `4 | c + 2`, or `n` is odd and
/// `4 | c`; otherwise both candidates are returned.
pub fn borda3_strategy(n: usize, c: u32, d: Candidate) -> Result<Borda3Strategy> {
    if c == 0 || c % 2 == 1 {
        return Err(Error::invalid(format!(
            "coalition size must be even and positive, got {c}"
        )));
    }
    let balanced = balanced_strategy(3, 2, c, d)?;
    let settled = if n.is_multiple_of(2) {
        (c + 2).is_multiple_of(4)
    } else {
        c.is_multiple_of(4)
    };
    if settled {
        Ok(Borda3Strategy::Balanced(balanced))
    } else {
        Ok(Borda3Strategy::Ambiguous {
            balanced,
            near_balanced: near_balanced_strategy(c, d)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::recover_votes;
    use crate::voting::{psm_of_votes, ScoringRule};

    fn approvals(s: &StrategyPsm, k: usize, who: Candidate) -> u32 {
        (0..k).map(|j| s.psm().get(who, j)).sum()
    }

    #[test]
    fn two_approval_four_candidates() {
        let s = balanced_strategy(4, 2, 3, 3).unwrap();
        for who in 0..3 {
            assert_eq!(s.psm().get(who, 1), 1);
        }
    }

    #[test]
    fn plurality_only_approves_d() {
        for m in 2..6 {
            let s = balanced_strategy(m, 1, 5, 0).unwrap();
            assert_eq!(s.psm().get(0, 0), 5);
            assert!((1..m).all(|i| approvals(&s, 1, i) == 0));
        }
    }

    #[test]
    fn uneven_split() {
        let s = balanced_strategy(3, 2, 3, 2).unwrap();
        let mut split = [approvals(&s, 2, 0), approvals(&s, 2, 1)];
        split.sort_unstable();
        assert_eq!(split, [1, 2]);
    }

    #[test]
    fn approvals_differ_by_at_most_one() {
        for m in 2..8 {
            for k in 1..m {
                for c in 1..12 {
                    let s = balanced_strategy(m, k, c, m - 1).unwrap();
                    let counts: Vec<u32> = (0..m - 1).map(|i| approvals(&s, k, i)).collect();
                    let hi = *counts.iter().max().unwrap();
                    let lo = *counts.iter().min().unwrap();
                    assert!(hi - lo <= 1, "m={m} k={k} c={c} {counts:?}");
                    assert_eq!(counts.iter().sum::<u32>(), c * (k as u32 - 1));
                }
            }
        }
    }

    #[test]
    fn invalid_k() {
        assert!(balanced_strategy(3, 0, 2, 0).is_err());
        assert!(balanced_strategy(3, 3, 2, 0).is_err());
    }

    fn below_top(s: &StrategyPsm) -> Vec<u64> {
        let rule = ScoringRule::borda(3).unwrap();
        s.psm().times_alpha(&rule).unwrap()
    }

    #[test]
    fn near_balanced_totals() {
        let s = near_balanced_strategy(4, 2).unwrap();
        assert_eq!(&below_top(&s)[..2], &[3, 1]);
        let s = near_balanced_strategy(2, 2).unwrap();
        assert_eq!(&below_top(&s)[..2], &[2, 0]);
        let s = near_balanced_strategy(6, 0).unwrap();
        assert_eq!(&below_top(&s)[1..], &[4, 2]);
        assert!(near_balanced_strategy(3, 0).is_err());
    }

    #[test]
    fn near_balanced_round_trips() {
        for c in [2, 4, 6, 8] {
            for d in 0..3 {
                let s = near_balanced_strategy(c, d).unwrap();
                assert_eq!(&psm_of_votes(&recover_votes(&s).unwrap()), s.psm());
            }
        }
    }

    #[test]
    fn borda3_tags() {
        assert_eq!(borda3_strategy(3, 4, 2).unwrap().tag(), "balanced");
        assert_eq!(borda3_strategy(4, 2, 2).unwrap().tag(), "balanced");
        let both = borda3_strategy(4, 4, 2).unwrap();
        assert_eq!(both.tag(), "ambiguous");
        assert_eq!(both.candidates().len(), 2);
        assert!(borda3_strategy(3, 3, 2).is_err());
    }
}
