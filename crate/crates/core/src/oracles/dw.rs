//! Dreyfus-Wagner dynamic program over the metric closure: exact optimum
//! Steiner trees for every terminal subset at once. Steiner candidates are
//! the original vertices, which suffices on a metric closure.

use num::traits::Zero;

use crate::error::Error;
use crate::instance::MetricInstance;
use crate::rat::Rat;
use crate::Result;

pub const DEFAULT_TERMINAL_CAP: usize = 14;

/// dp[mask][v] = cheapest tree connecting the terminals in `mask` plus `v`.
pub struct SteinerTable<'a> {
    m: &'a MetricInstance,
    pub terminals: Vec<usize>,
    dp: Vec<Vec<Rat>>,
    // Reconstruction: split into (submask at v) or grown from (mask at u).
    choice: Vec<Vec<Choice>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Choice {
    Leaf,
    Split(u32),
    Grow(usize),
}

impl<'a> SteinerTable<'a> {
    pub fn build(m: &'a MetricInstance, cap: usize) -> Result<Self> {
        let terminals = m.base.terminals.clone();
        let k = terminals.len();
        if k > cap {
            return Err(Error::TerminalBound(k, cap));
        }
        let n = m.base.vertex_count;
        let full = 1u32 << k;
        let mut dp = vec![vec![Rat::zero(); n]; full as usize];
        let mut choice = vec![vec![Choice::Leaf; n]; full as usize];
        for i in 0..k {
            let mask = 1u32 << i;
            for v in 0..n {
                dp[mask as usize][v] = m.dist[terminals[i]][v].clone();
                choice[mask as usize][v] = Choice::Grow(terminals[i]);
            }
        }
        for mask in 1..full {
            if mask.count_ones() < 2 {
                continue;
            }
            let low = mask & mask.wrapping_neg();
            // Merge step: split at v into two subtrees.
            for v in 0..n {
                let mut best: Option<(Rat, u32)> = None;
                // Submasks containing the lowest terminal, proper.
                let rest = mask ^ low;
                let mut sub = rest;
                loop {
                    let s = sub | low;
                    if s != mask {
                        let cand = &dp[s as usize][v] + &dp[(mask ^ s) as usize][v];
                        if best.as_ref().map(|(b, _)| cand < *b).unwrap_or(true) {
                            best = Some((cand, s));
                        }
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & rest;
                }
                let (cost, s) = best.expect("nonempty split");
                dp[mask as usize][v] = cost;
                choice[mask as usize][v] = Choice::Split(s);
            }
            // Grow step: attach v to the best u by a closure edge. One pass
            // suffices because the closure distances are metric.
            let snapshot: Vec<Rat> = dp[mask as usize].clone();
            for v in 0..n {
                for u in 0..n {
                    if u == v {
                        continue;
                    }
                    let cand = &snapshot[u] + &m.dist[u][v];
                    if cand < dp[mask as usize][v] {
                        dp[mask as usize][v] = cand;
                        choice[mask as usize][v] = Choice::Grow(u);
                    }
                }
            }
        }
        Ok(SteinerTable {
            m,
            terminals,
            dp,
            choice,
        })
    }

    fn mask_of(&self, x: &[usize]) -> Result<u32> {
        let mut mask = 0u32;
        for &t in x {
            let i = self
                .terminals
                .iter()
                .position(|&u| u == t)
                .ok_or(Error::UnknownTerminal(t + 1))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    /// Optimum cost of a tree connecting the terminal subset `x`.
    pub fn cost(&self, x: &[usize]) -> Result<Rat> {
        if x.is_empty() {
            return Err(Error::EmptyTerminalSet);
        }
        if x.len() == 1 {
            return Ok(Rat::zero());
        }
        let anchor = x[0];
        let mask = self.mask_of(&x[1..])?;
        Ok(self.dp[mask as usize][anchor].clone())
    }

    /// Optimum tree edges (closure pairs) for the terminal subset `x`.
    pub fn tree(&self, x: &[usize]) -> Result<Vec<(usize, usize)>> {
        if x.is_empty() {
            return Err(Error::EmptyTerminalSet);
        }
        if x.len() == 1 {
            return Ok(vec![]);
        }
        let anchor = x[0];
        let mask = self.mask_of(&x[1..])?;
        let mut edges = vec![];
        self.reconstruct(mask, anchor, &mut edges);
        Ok(edges)
    }

    fn reconstruct(&self, mask: u32, v: usize, edges: &mut Vec<(usize, usize)>) {
        if mask == 0 {
            return;
        }
        match self.choice[mask as usize][v] {
            Choice::Leaf => {}
            Choice::Split(s) => {
                self.reconstruct(s, v, edges);
                self.reconstruct(mask ^ s, v, edges);
            }
            Choice::Grow(u) => {
                if u != v && !self.m.dist[u][v].is_zero() {
                    edges.push((u.min(v), u.max(v)));
                }
                if mask.count_ones() == 1 {
                    // Base case: direct closure edge from the terminal.
                    return;
                }
                self.reconstruct(mask, u, edges);
            }
        }
    }
}

/// Optimum Steiner tree over all terminals: cost plus closure-edge list.
pub fn dreyfus_wagner(m: &MetricInstance) -> Result<(Rat, Vec<(usize, usize)>)> {
    dreyfus_wagner_capped(m, DEFAULT_TERMINAL_CAP)
}

pub fn dreyfus_wagner_capped(
    m: &MetricInstance,
    cap: usize,
) -> Result<(Rat, Vec<(usize, usize)>)> {
    let table = SteinerTable::build(m, cap)?;
    let all = table.terminals.clone();
    let cost = table.cost(&all)?;
    let edges = table.tree(&all)?;
    if cfg!(debug_assertions) {
        let total: Rat = edges.iter().map(|&(u, v)| m.dist[u][v].clone()).sum();
        debug_assert_eq!(total, cost);
    }
    Ok((cost, edges))
}
