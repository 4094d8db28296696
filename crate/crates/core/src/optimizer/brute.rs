//! Exhaustive search over normal-form strategies, for small instances.

use std::time::Instant;

use super::{check_target, count_wins, SampleSet, SolveResult};
use crate::error::{Error, Result};
use crate::voting::{Candidate, Psm, StrategyPsm};

pub const BRUTE_FORCE_MAX_CANDIDATES: usize = 4;
pub const BRUTE_FORCE_MAX_COALITION: u32 = 4;

/// All strategies with `X[d][0] = c`, i.e. every `(m-1)x(m-1)` block with
/// line sums `c` placed on the other candidates and lower positions.
pub fn enumerate_strategies(m: usize, c: u32, d: Candidate) -> Result<Vec<StrategyPsm>> {
    if m > BRUTE_FORCE_MAX_CANDIDATES || c > BRUTE_FORCE_MAX_COALITION {
        return Err(Error::GuardExceeded(format!(
            "exhaustive search needs m <= {BRUTE_FORCE_MAX_CANDIDATES} and c <= {BRUTE_FORCE_MAX_COALITION}"
        )));
    }
    if d >= m || m < 2 {
        return Err(Error::invalid(format!(
            "candidate {d} out of range for m = {m}"
        )));
    }
    let k = m - 1;
    let mut blocks = Vec::new();
    let mut block = vec![vec![0u32; k]; k];
    let mut col_left = vec![c; k];
    fill(&mut block, &mut col_left, 0, 0, c, c, &mut blocks);

    let others: Vec<Candidate> = (0..m).filter(|&i| i != d).collect();
    blocks
        .into_iter()
        .map(|b| {
            let mut x = Psm::zeros(m);
            x.set(d, 0, c);
            for (r, &i) in others.iter().enumerate() {
                for (j, &count) in b[r].iter().enumerate().take(k) {
                    x.set(i, j + 1, count);
                }
            }
            StrategyPsm::new(x, c, d)
        })
        .collect()
}

fn fill(
    block: &mut [Vec<u32>],
    col_left: &mut [u32],
    row: usize,
    col: usize,
    row_left: u32,
    c: u32,
    out: &mut Vec<Vec<Vec<u32>>>,
) {
    let k = block.len();
    if row == k {
        out.push(block.to_vec());
        return;
    }
    if col + 1 == k {
        if row_left > col_left[col] {
            return;
        }
        block[row][col] = row_left;
        col_left[col] -= row_left;
        fill(block, col_left, row + 1, 0, c, c, out);
        col_left[col] += row_left;
        block[row][col] = 0;
        return;
    }
    for v in 0..=row_left.min(col_left[col]) {
        block[row][col] = v;
        col_left[col] -= v;
        fill(block, col_left, row, col + 1, row_left - v, c, out);
        col_left[col] += v;
    }
    block[row][col] = 0;
}

/// Evaluates every strategy and keeps the first maximizer.
pub fn brute_force_optimal(samples: &SampleSet, c: u32, d: Candidate) -> Result<SolveResult> {
    check_target(samples, c, d)?;
    if samples.is_empty() {
        return Err(Error::invalid("cannot solve over zero samples"));
    }
    let started = Instant::now();
    let mut best: Option<(StrategyPsm, usize)> = None;
    for strategy in enumerate_strategies(samples.m(), c, d)? {
        let wins = count_wins(samples, &strategy)?;
        if best.as_ref().is_none_or(|(_, w)| wins > *w) {
            best = Some((strategy, wins));
        }
    }
    let (strategy, wins) = best.expect("at least one strategy exists");
    SolveResult::build(samples, strategy, wins, true, started)
}
