//! Independent references that deliberately avoid the merge forest: drops by
//! two plain MST computations, and random feasible laminar duals on cycle
//! instances.

use std::collections::BTreeSet;

use num::traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dual::{DualAssignment, DualKind};
use crate::error::Error;
use crate::instance::{Instance, MetricInstance};
use crate::rat::Rat;
use crate::Result;

fn kruskal_cost(dists: &[Vec<Rat>]) -> Rat {
    let k = dists.len();
    let mut pairs = vec![];
    for i in 0..k {
        for j in (i + 1)..k {
            pairs.push((dists[i][j].clone(), i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut uf: Vec<usize> = (0..k).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    let mut cost = Rat::zero();
    for (c, i, j) in pairs {
        let (a, b) = (find(&mut uf, i), find(&mut uf, j));
        if a != b {
            uf[a] = b;
            cost += c;
        }
    }
    cost
}

/// mst(G[R]) - mst(G[R]/X) by two independent MST computations.
pub fn brute_drop(m: &MetricInstance, x: &BTreeSet<usize>) -> Result<Rat> {
    let terms = &m.base.terminals;
    let tset = m.base.terminal_set();
    if x.is_empty() {
        return Err(Error::EmptyTerminalSet);
    }
    if !x.is_subset(&tset) {
        return Err(Error::NotTerminalSubset);
    }
    let k = terms.len();
    let mut full = vec![vec![Rat::zero(); k]; k];
    for i in 0..k {
        for j in 0..k {
            full[i][j] = m.dist[terms[i]][terms[j]].clone();
        }
    }
    let before = kruskal_cost(&full);
    // Contract X within the terminal distance graph: one merged node with
    // min-cost parallel edges.
    let keep: Vec<usize> = (0..k).filter(|i| !x.contains(&terms[*i])).collect();
    let kk = keep.len() + 1; // merged node last
    let mut contracted = vec![vec![Rat::zero(); kk]; kk];
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            contracted[a][b] = full[i][j].clone();
        }
        let min_to_x = (0..k)
            .filter(|i2| x.contains(&terms[*i2]))
            .map(|i2| full[i][i2].clone())
            .min()
            .unwrap();
        contracted[a][kk - 1] = min_to_x.clone();
        contracted[kk - 1][a] = min_to_x;
    }
    let after = kruskal_cost(&contracted);
    Ok(before - after)
}

/// Random feasible Dual-BCR assignment with laminar support on a unit-cost
/// cycle instance: random laminar arcs avoiding the root, greedily raised to
/// edge tightness.
pub fn random_laminar_dual(inst: &Instance, seed: u64) -> Result<DualAssignment> {
    let n = inst.vertex_count;
    // Sanity: the generator expects the cycle family layout (edges i - i+1).
    if inst.edges.len() != n {
        return Err(Error::Invalid(
            "random_laminar_dual expects a cycle instance".into(),
        ));
    }
    let root = inst.root;
    let tset = inst.terminal_set();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Positions 1..n-1 measured clockwise from the root; arcs are intervals
    // of positions, so no arc contains the root.
    let mut arcs: Vec<(usize, usize)> = vec![];
    fn gen_arcs(
        rng: &mut ChaCha8Rng,
        lo: usize,
        hi: usize,
        depth: usize,
        arcs: &mut Vec<(usize, usize)>,
    ) {
        if lo > hi || depth > 6 {
            return;
        }
        if rng.random_bool(0.7) {
            arcs.push((lo, hi));
        }
        if lo < hi && rng.random_bool(0.8) {
            let mid = rng.random_range(lo..hi);
            gen_arcs(rng, lo, mid, depth + 1, arcs);
            gen_arcs(rng, mid + 1, hi, depth + 1, arcs);
        }
    }
    gen_arcs(&mut rng, 1, n - 1, 0, &mut arcs);
    // Inner sets first so tightening respects nesting.
    arcs.sort_by_key(|&(lo, hi)| (hi - lo, lo));
    // Directed-arc loads along the cycle; arc (v, v+1) direction loads
    // forward[v], (v+1, v) loads backward[v].
    let mut forward = vec![Rat::zero(); n];
    let mut backward = vec![Rat::zero(); n];
    let mut dual = DualAssignment::new(DualKind::Bcr, Some(root));
    for (lo, hi) in arcs {
        let members: Vec<usize> = (lo..=hi).map(|p| (root + p) % n).collect();
        if !members.iter().any(|v| tset.contains(v)) {
            continue;
        }
        // Leaving arcs: from position lo backward across edge lo-1, and from
        // position hi forward across edge hi.
        let back_edge = (root + lo - 1) % n; // arc (lo, lo-1) loads backward
        let fwd_edge = (root + hi) % n;
        let cost_back = edge_cost(inst, back_edge);
        let cost_fwd = edge_cost(inst, fwd_edge);
        let slack_back = cost_back - &backward[back_edge];
        let slack_fwd = cost_fwd - &forward[fwd_edge];
        let raise = slack_back.min(slack_fwd);
        if raise.is_zero() {
            continue;
        }
        backward[back_edge] += &raise;
        forward[fwd_edge] += &raise;
        let mut key = members;
        key.sort();
        dual.add(key, raise);
    }
    Ok(dual)
}

fn edge_cost(inst: &Instance, cycle_pos: usize) -> Rat {
    let n = inst.vertex_count;
    let (u, v) = (cycle_pos, (cycle_pos + 1) % n);
    let (a, b) = (u.min(v), u.max(v));
    inst.edges
        .iter()
        .find(|e| e.u == a && e.v == b)
        .expect("cycle edge")
        .cost
        .clone()
}
