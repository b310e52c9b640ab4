//! Classical primal-dual moat growth for the undirected cut relaxation on
//! the metric closure, the rootless restriction that seeds the bidirected
//! dual, and the laminar-support value audit for cycle instances.

use std::collections::BTreeSet;

use num::traits::{Signed, Zero};

use crate::dual::{DualAssignment, DualKind};
use crate::instance::{Instance, MetricInstance};
use crate::merge::MergeForest;
use crate::rat::{format_rat, rat_int, Rat};

/// Grow the undirected dual: every part of the terminal partition (including
/// the root's) expands a moat of vertices reachable by tight edges. Exact
/// event-driven simulation over the closure's complete graph.
pub fn grow_ucr_dual(m: &MetricInstance) -> DualAssignment {
    let f = MergeForest::build(m);
    grow_ucr_dual_with_forest(m, &f)
}

pub fn grow_ucr_dual_with_forest(m: &MetricInstance, f: &MergeForest) -> DualAssignment {
    let n = m.base.vertex_count;
    let mut dual = DualAssignment::new(DualKind::Ucr, None);
    if f.terminal_order.len() < 2 {
        return dual;
    }
    // Per unordered closure pair: accumulated load.
    let mut load = vec![vec![Rat::zero(); n]; n];
    // Active moats keyed by forest set id.
    let mut moats: Vec<(usize, BTreeSet<usize>)> = f
        .terminal_order
        .iter()
        .map(|&t| (f.leaf_of(t).unwrap(), BTreeSet::from([t])))
        .collect();
    let mut t = Rat::zero();
    let mut forest_events = f.event_times();
    forest_events.push(f.t_max.clone());
    forest_events.dedup();
    let mut next_forest = 0usize;
    loop {
        let mut covered = vec![false; n];
        for (_, mo) in &moats {
            for &v in mo {
                debug_assert!(!covered[v], "moats must stay disjoint");
                covered[v] = true;
            }
        }
        let same_moat = |u: usize, v: usize, moats: &Vec<(usize, BTreeSet<usize>)>| {
            moats
                .iter()
                .any(|(_, mo)| mo.contains(&u) && mo.contains(&v))
        };
        // Next edge-tight event.
        let mut best: Option<Rat> = None;
        for u in 0..n {
            for v in (u + 1)..n {
                if same_moat(u, v, &moats) {
                    continue;
                }
                let rate = (covered[u] as i64) + (covered[v] as i64);
                if rate == 0 {
                    continue;
                }
                let slack = &m.dist[u][v] - &load[u][v];
                if slack.is_zero() {
                    continue;
                }
                let eta = &t + slack / rat_int(rate);
                if best.as_ref().map(|b| eta < *b).unwrap_or(true) {
                    best = Some(eta);
                }
            }
        }
        let forest_t = forest_events.get(next_forest).cloned();
        let t_next = match (best, &forest_t) {
            (Some(e), Some(ft)) => e.min(ft.clone()),
            (Some(e), None) => e,
            (None, Some(ft)) => ft.clone(),
            (None, None) => break,
        };
        let t_next = t_next.min(f.t_max.clone());
        let delta = &t_next - &t;
        if delta.is_positive() {
            for (_, mo) in &moats {
                let key: Vec<usize> = mo.iter().copied().collect();
                dual.add(key, delta.clone());
            }
            for u in 0..n {
                for v in (u + 1)..n {
                    if same_moat(u, v, &moats) {
                        continue;
                    }
                    let rate = (covered[u] as i64) + (covered[v] as i64);
                    if rate > 0 {
                        let add = rat_int(rate) * &delta;
                        load[u][v] += &add;
                        load[v][u] = load[u][v].clone();
                    }
                }
            }
        }
        t = t_next;
        if t == f.t_max {
            break;
        }
        // Forest merges at this time.
        if forest_t.as_ref() == Some(&t) {
            next_forest += 1;
            let active: Vec<usize> = f
                .sets
                .iter()
                .filter(|s| {
                    s.activation <= t && s.deactivation.as_ref().map(|d| &t < d).unwrap_or(true)
                })
                .map(|s| s.id)
                .collect();
            let mut new_moats: Vec<(usize, BTreeSet<usize>)> = vec![];
            for sid in active {
                let mut mo = BTreeSet::new();
                for (old_sid, old_mo) in &moats {
                    let member = f.sets[*old_sid].members[0];
                    if f.contains(sid, member) {
                        mo.extend(old_mo.iter().copied());
                    }
                }
                new_moats.push((sid, mo));
            }
            moats = new_moats;
        }
        // Expand moats over tight edges to a fixed point.
        loop {
            let mut changed = false;
            for (_, mo) in moats.iter_mut() {
                let inside: Vec<usize> = mo.iter().copied().collect();
                for &u in &inside {
                    for v in 0..n {
                        if !mo.contains(&v) && load[u][v] == m.dist[u][v] {
                            mo.insert(v);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }
    dual
}

/// Drop the variables of sets containing the root; the result is feasible
/// for the bidirected dual with value half the terminal MST cost.
pub fn restrict_rootless(y: &DualAssignment, root: usize) -> DualAssignment {
    let mut out = DualAssignment::new(DualKind::Bcr, Some(root));
    for (set, value) in &y.entries {
        if set.binary_search(&root).is_err() {
            out.add(set.clone(), value.clone());
        }
    }
    out
}

/// Verdict of the laminar-support value bound on cycle instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LaminarVerdict {
    Pass { value: Rat, bound: Rat, opt: Rat },
    Fail { value: Rat, bound: Rat, opt: Rat },
    /// Validation failures are reported as errors, not bound violations.
    NotLaminar,
    Infeasible { witness: String },
}

/// Check a laminar-support bidirected dual on a cycle instance against the
/// value bound n/2 + k. Feasibility is checked on the instance's own
/// directed edges.
pub fn audit_laminar_bound(inst: &Instance, d: &DualAssignment) -> LaminarVerdict {
    let n = inst.vertex_count;
    let k = inst.terminals.len();
    let bound = rat_int(n as i64) / rat_int(2) + rat_int(k as i64);
    let opt = rat_int((k as i64 - 1) * n as i64) / rat_int(k as i64);
    if !d.support_is_laminar() {
        return LaminarVerdict::NotLaminar;
    }
    let root = d.root.unwrap_or(inst.root);
    let tset = inst.terminal_set();
    for set in d.entries.keys() {
        if set.binary_search(&root).is_ok() || !set.iter().any(|v| tset.contains(v)) {
            return LaminarVerdict::Infeasible {
                witness: format!("domain violation on set {set:?}"),
            };
        }
    }
    for e in &inst.edges {
        for (u, v) in [(e.u, e.v), (e.v, e.u)] {
            let mut loadv = Rat::zero();
            for (set, value) in &d.entries {
                if set.binary_search(&u).is_ok() && set.binary_search(&v).is_err() {
                    loadv += value;
                }
            }
            if loadv > e.cost {
                return LaminarVerdict::Infeasible {
                    witness: format!(
                        "edge ({}, {}) load {} exceeds cost {}",
                        u + 1,
                        v + 1,
                        format_rat(&loadv),
                        format_rat(&e.cost)
                    ),
                };
            }
        }
    }
    let value = d.value();
    if value <= bound {
        LaminarVerdict::Pass { value, bound, opt }
    } else {
        LaminarVerdict::Fail { value, bound, opt }
    }
}
