//! Strategy-matrix validation and ballot recovery.
//!
//! A square non-negative integer matrix whose rows and columns all sum to
//! `c` is the summary of some `c` ballots. Viewing it as a `c`-regular
//! bipartite multigraph (candidates × positions, `X[i][j]` parallel edges),
//! every perfect matching is one ballot; removing it leaves a
//! `(c-1)`-regular graph, so `c` matchings recover all ballots.

use crate::error::{Error, Result};
use crate::voting::{Candidate, Profile, Psm, Ranking, StrategyPsm};

/// True iff every row sum and every column sum equals `c`.
pub fn validate_psm(x: &Psm, c: u32) -> bool {
    let c = u64::from(c);
    (0..x.m()).all(|k| x.row_sum(k) == c && x.col_sum(k) == c)
}

/// Candidates on the left, positions on the right, with edge multiplicity
/// `X[i][j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMultigraph {
    multiplicity: Psm,
    degree: u32,
}

impl BipartiteMultigraph {
    pub fn new(x: Psm, c: u32) -> Result<Self> {
        if !validate_psm(&x, c) {
            return Err(Error::InvalidPsm(format!(
                "rows and columns must all sum to {c}"
            )));
        }
        Ok(BipartiteMultigraph {
            multiplicity: x,
            degree: c,
        })
    }

    /// Common degree of every node.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn multiplicity(&self) -> &Psm {
        &self.multiplicity
    }

    /// A perfect matching as `position -> candidate`, found with augmenting
    /// paths scanning candidates and positions in ascending order.
    pub fn perfect_matching(&self) -> Option<Vec<Candidate>> {
        let m = self.multiplicity.m();
        let mut owner: Vec<Option<Candidate>> = vec![None; m];
        for cand in 0..m {
            let mut visited = vec![false; m];
            if !self.augment(cand, &mut owner, &mut visited) {
                return None;
            }
        }
        owner.into_iter().collect()
    }

    fn augment(
        &self,
        cand: Candidate,
        owner: &mut [Option<Candidate>],
        visited: &mut [bool],
    ) -> bool {
        for pos in 0..owner.len() {
            if self.multiplicity.get(cand, pos) == 0 || visited[pos] {
                continue;
            }
            visited[pos] = true;
            let free = match owner[pos] {
                None => true,
                Some(other) => self.augment(other, owner, visited),
            };
            if free {
                owner[pos] = Some(cand);
                return true;
            }
        }
        false
    }

    /// Removes one edge per matched pair; the graph stays regular with
    /// degree one lower.
    pub fn remove_matching(&mut self, matching: &[Candidate]) {
        for (pos, &cand) in matching.iter().enumerate() {
            let current = self.multiplicity.get(cand, pos);
            debug_assert!(current > 0);
            self.multiplicity.set(cand, pos, current - 1);
        }
        self.degree -= 1;
    }
}

/// Splits a valid matrix with line sums `c` into `c` rankings whose summary
/// matrix equals it.
pub fn decompose(x: &Psm, c: u32) -> Result<Vec<Ranking>> {
    let mut graph = BipartiteMultigraph::new(x.clone(), c)?;
    let mut ballots = Vec::with_capacity(c as usize);
    while graph.degree() > 0 {
        let matching = graph.perfect_matching().ok_or_else(|| {
            Error::InvalidPsm("regular multigraph without a perfect matching".into())
        })?;
        graph.remove_matching(&matching);
        ballots.push(Ranking::from_order_unchecked(matching));
    }
    Ok(ballots)
}

/// The `c` manipulator ballots realizing a strategy.
pub fn recover_votes(strategy: &StrategyPsm) -> Result<Profile> {
    let ballots = decompose(strategy.psm(), strategy.c())?;
    Profile::new(strategy.m(), ballots)
}
