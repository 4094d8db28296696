//! Exact branch-and-bound over normal-form strategies.
//!
//! In normal form every manipulator ranks `d` first, so a strategy only
//! matters through the points `b_i` it hands each other candidate from
//! positions `2..m`. A sample is won iff `b_i <= limit_i` for every other
//! candidate, where `limit_i = s_d + c*alpha_1 - s_i - 1`. The search assigns
//! `b_i` candidate by candidate, keeps the set of still-winnable samples as a
//! bitset, and bounds each node by the samples whose remaining candidates can
//! still absorb the remaining points. Integer realizability of a complete
//! `b` is checked exactly before it can become the incumbent.

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

/// Score structure of the below-top positions for a fixed rule and `c`.
#[derive(Debug, Clone)]
pub(crate) struct SlotModel {
    c: u32,
    /// Distinct below-top position scores, descending, with their positions
    /// (indices into `alpha`).
    groups: Vec<(u64, Vec<usize>)>,
    /// Achievable per-candidate totals, ascending.
    values: Vec<u64>,
    /// Points the coalition hands out below the top.
    total: u64,
    /// `c` times the sum of the `q` largest / smallest below-top scores.
    top_sums: Vec<u64>,
    bottom_sums: Vec<u64>,
}

impl SlotModel {
    pub(crate) fn new(alpha: &[u64], c: u32) -> Self {
        let below = &alpha[1..];
        let mut groups: Vec<(u64, Vec<usize>)> = Vec::new();
        for (offset, &v) in below.iter().enumerate() {
            match groups.last_mut() {
                Some((value, positions)) if *value == v => positions.push(offset + 1),
                _ => groups.push((v, vec![offset + 1])),
            }
        }
        let mut reachable = BTreeSet::from([0u64]);
        for _ in 0..c {
            reachable = reachable
                .iter()
                .flat_map(|&s| groups.iter().map(move |(v, _)| s + v))
                .collect();
        }
        let c64 = u64::from(c);
        let mut desc: Vec<u64> = below.to_vec();
        desc.sort_unstable_by(|a, b| b.cmp(a));
        let mut top_sums = vec![0];
        let mut bottom_sums = vec![0];
        for q in 0..desc.len() {
            top_sums.push(top_sums[q] + c64 * desc[q]);
            bottom_sums.push(bottom_sums[q] + c64 * desc[desc.len() - 1 - q]);
        }
        SlotModel {
            c,
            groups,
            values: reachable.into_iter().collect(),
            total: c64 * below.iter().sum::<u64>(),
            top_sums,
            bottom_sums,
        }
    }

    #[cfg(test)]
    pub(crate) fn values(&self) -> &[u64] {
        &self.values
    }

    /// Necessary condition: every `q` of the given totals sum to at most the
    /// `q` largest and at least the `q` smallest slot totals.
    fn spread_ok(&self, chosen: &mut [u64]) -> bool {
        chosen.sort_unstable();
        let k = chosen.len();
        let mut low = 0;
        let mut high = 0;
        for q in 1..=k {
            low += chosen[q - 1];
            high += chosen[k - q];
            if low < self.bottom_sums[q] || high > self.top_sums[q] {
                return false;
            }
        }
        true
    }

    /// Finds an integer matrix (rows: other candidates, columns: positions
    /// `1..m` as `alpha` indices) with row and column sums `c` whose row
    /// scores are exactly `b`.
    pub(crate) fn realize(&self, b: &[u64]) -> Option<Vec<Vec<u32>>> {
        let mut residual: Vec<u32> = self
            .groups
            .iter()
            .map(|(_, pos)| self.c * pos.len() as u32)
            .collect();
        let mut rows = Vec::with_capacity(b.len());
        let mut failed = HashSet::new();
        if !self.realize_rows(b, &mut residual, &mut rows, &mut failed) {
            return None;
        }
        let width = self.groups.iter().map(|(_, p)| p.len()).sum::<usize>() + 1;
        let mut matrix = vec![vec![0u32; width]; b.len()];
        for (g, (_, positions)) in self.groups.iter().enumerate() {
            // North-west corner fill of the group's columns, each of
            // capacity c.
            let mut col = 0;
            let mut room = self.c;
            for (r, grouped) in rows.iter().enumerate() {
                let mut need = grouped[g];
                while need > 0 {
                    let take = need.min(room);
                    matrix[r][positions[col]] += take;
                    need -= take;
                    room -= take;
                    if room == 0 {
                        col += 1;
                        room = self.c;
                    }
                }
            }
        }
        Some(matrix)
    }

    fn realize_rows(
        &self,
        b: &[u64],
        residual: &mut Vec<u32>,
        rows: &mut Vec<Vec<u32>>,
        failed: &mut HashSet<Vec<u32>>,
    ) -> bool {
        let row = rows.len();
        if row == b.len() {
            return true;
        }
        if failed.contains(residual) {
            return false;
        }
        let mut options = Vec::new();
        let mut scratch = vec![0u32; self.groups.len()];
        self.compositions(0, self.c, b[row], residual, &mut scratch, &mut options);
        for x in options {
            for (r, xi) in residual.iter_mut().zip(&x) {
                *r -= xi;
            }
            rows.push(x);
            if self.realize_rows(b, residual, rows, failed) {
                return true;
            }
            let x = rows.pop().expect("pushed above");
            for (r, xi) in residual.iter_mut().zip(&x) {
                *r += xi;
            }
        }
        failed.insert(residual.clone());
        false
    }

    fn compositions(
        &self,
        g: usize,
        picks: u32,
        target: u64,
        residual: &[u32],
        scratch: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        let value = self.groups[g].0;
        if g + 1 == self.groups.len() {
            if picks <= residual[g] && u64::from(picks) * value == target {
                scratch[g] = picks;
                out.push(scratch.clone());
            }
            return;
        }
        let next_max = self.groups[g + 1].0;
        let min_value = self.groups.last().expect("non-empty").0;
        for x in (0..=picks.min(residual[g])).rev() {
            let used = u64::from(x) * value;
            if used > target {
                continue;
            }
            let rest = target - used;
            let left = u64::from(picks - x);
            if rest < left * min_value || rest > left * next_max {
                continue;
            }
            scratch[g] = x;
            self.compositions(g + 1, picks - x, rest, residual, scratch, out);
        }
        scratch[g] = 0;
    }
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn popcount_and(a: &[u64], b: &[u64], c: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((x, y), z)| (x & y & z).count_ones() as usize)
        .sum()
}

fn popcount_and2(a: &[u64], b: &[u64]) -> usize {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum()
}

/// Samples whose suffix capacity reaches a threshold.
struct CapacityIndex {
    thresholds: Vec<u64>,
    sets: Vec<Vec<u64>>,
}

impl CapacityIndex {
    fn get(&self, required: u64) -> Option<&[u64]> {
        let k = self.thresholds.partition_point(|&t| t < required);
        self.sets.get(k).map(Vec::as_slice)
    }
}

pub(crate) struct SearchLimits {
    pub deadline: Option<Instant>,
    pub node_limit: Option<u64>,
}

pub(crate) struct SearchOutcome {
    /// Improved assignment (per other candidate, in caller order) and its
    /// matrix; `None` when nothing beat the incumbent.
    pub best: Option<(Vec<u64>, Vec<Vec<u32>>)>,
    pub wins: usize,
    pub complete: bool,
    pub nodes: u64,
}

struct Search<'a> {
    model: &'a SlotModel,
    order: Vec<usize>,
    value_bits: Vec<Vec<Vec<u64>>>,
    capacity: Vec<CapacityIndex>,
    alive: Vec<Vec<u64>>,
    chosen: Vec<u64>,
    best_wins: usize,
    best: Option<(Vec<u64>, Vec<Vec<u32>>)>,
    nodes: u64,
    stopped: bool,
    limits: SearchLimits,
}

/// Maximizes the number of samples won. `limits[t][i]` is the most points
/// other candidate `i` may receive for sample `t` to be won. Only strictly
/// better solutions than `incumbent_wins` are reported.
pub(crate) fn search(
    model: &SlotModel,
    limits: &[Vec<i64>],
    others: usize,
    incumbent_wins: usize,
    search_limits: SearchLimits,
) -> SearchOutcome {
    let values = &model.values;
    let lowest = values[0] as i64;
    let live: Vec<usize> = (0..limits.len())
        .filter(|&t| limits[t].iter().all(|&u| u >= lowest))
        .collect();
    let words = words_for(live.len());

    // Tightest candidates first.
    let mut order: Vec<usize> = (0..others).collect();
    let slack = |i: usize| live.iter().map(|&t| limits[t][i]).sum::<i64>();
    order.sort_by_key(|&i| (slack(i), i));

    let value_bits: Vec<Vec<Vec<u64>>> = order
        .iter()
        .map(|&i| {
            values
                .iter()
                .map(|&v| {
                    let mut bits = vec![0u64; words];
                    for (k, &t) in live.iter().enumerate() {
                        if limits[t][i] >= v as i64 {
                            bits[k / 64] |= 1 << (k % 64);
                        }
                    }
                    bits
                })
                .collect()
        })
        .collect();

    // Largest achievable total not above each limit.
    let cap = |u: i64| -> u64 {
        let k = values.partition_point(|&v| (v as i64) <= u);
        values[k - 1]
    };
    let mut suffix = vec![vec![0u64; live.len()]; others + 1];
    for level in (0..others).rev() {
        for (k, &t) in live.iter().enumerate() {
            suffix[level][k] = suffix[level + 1][k] + cap(limits[t][order[level]]);
        }
    }
    let capacity = suffix
        .iter()
        .map(|sums| {
            let mut thresholds: Vec<u64> = sums.clone();
            thresholds.sort_unstable();
            thresholds.dedup();
            let sets = thresholds
                .iter()
                .map(|&th| {
                    let mut bits = vec![0u64; words];
                    for (k, &s) in sums.iter().enumerate() {
                        if s >= th {
                            bits[k / 64] |= 1 << (k % 64);
                        }
                    }
                    bits
                })
                .collect();
            CapacityIndex { thresholds, sets }
        })
        .collect();

    let mut root = vec![0u64; words];
    for k in 0..live.len() {
        root[k / 64] |= 1 << (k % 64);
    }
    let mut alive = vec![vec![0u64; words]; others];
    alive[0] = root;

    let mut state = Search {
        model,
        order,
        value_bits,
        capacity,
        alive,
        chosen: vec![0; others],
        best_wins: incumbent_wins,
        best: None,
        nodes: 0,
        stopped: false,
        limits: search_limits,
    };
    if others > 0 && live.len() > incumbent_wins {
        state.dfs(0, 0);
    }
    SearchOutcome {
        best: state.best,
        wins: state.best_wins,
        complete: !state.stopped,
        nodes: state.nodes,
    }
}

impl Search<'_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes.is_multiple_of(1024) {
            if let Some(limit) = self.limits.node_limit {
                if self.nodes >= limit {
                    self.stopped = true;
                }
            }
            if let Some(deadline) = self.limits.deadline {
                if Instant::now() >= deadline {
                    self.stopped = true;
                }
            }
        }
        !self.stopped
    }

    fn dfs(&mut self, level: usize, used: u64) {
        if !self.tick() {
            return;
        }
        let model = self.model;
        let depth = self.order.len();
        if level + 1 == depth {
            self.leaf(used);
            return;
        }
        let remaining_after = depth - level - 1;
        let mut prefix: Vec<u64> = Vec::with_capacity(level + 1);
        let mut children: Vec<(usize, usize)> = Vec::new();
        for (vi, &v) in model.values.iter().enumerate() {
            if used + v > model.total {
                break;
            }
            let rest = model.total - used - v;
            if rest < model.bottom_sums[remaining_after] || rest > model.top_sums[remaining_after] {
                continue;
            }
            prefix.clear();
            prefix.extend_from_slice(&self.chosen[..level]);
            prefix.push(v);
            if !model.spread_ok(&mut prefix) {
                continue;
            }
            let Some(room) = self.capacity[level + 1].get(rest) else {
                continue;
            };
            let bound = popcount_and(&self.alive[level], &self.value_bits[level][vi], room);
            if bound > self.best_wins {
                children.push((bound, vi));
            }
        }
        children.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for (bound, vi) in children {
            if bound <= self.best_wins || self.stopped {
                break;
            }
            let (head, tail) = self.alive.split_at_mut(level + 1);
            for ((dst, a), b) in tail[0]
                .iter_mut()
                .zip(&head[level])
                .zip(&self.value_bits[level][vi])
            {
                *dst = a & b;
            }
            let v = model.values[vi];
            self.chosen[level] = v;
            self.dfs(level + 1, used + v);
        }
    }

    fn leaf(&mut self, used: u64) {
        let model = self.model;
        let level = self.order.len() - 1;
        let v = model.total - used;
        let Ok(vi) = model.values.binary_search(&v) else {
            return;
        };
        let wins = popcount_and2(&self.alive[level], &self.value_bits[level][vi]);
        if wins <= self.best_wins {
            return;
        }
        self.chosen[level] = v;
        let mut all = self.chosen.clone();
        if !model.spread_ok(&mut all) {
            return;
        }
        let mut b = vec![0u64; self.order.len()];
        for (lvl, &i) in self.order.iter().enumerate() {
            b[i] = self.chosen[lvl];
        }
        if let Some(matrix) = model.realize(&b) {
            self.best_wins = wins;
            self.best = Some((b, matrix));
        }
    }
}
