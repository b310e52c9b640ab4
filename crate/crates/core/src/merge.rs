//! The time-indexed terminal partition and its laminar merge forest:
//! activation/deactivation times, merge times, the terminal MST identity,
//! drop values and drop certificates.
//!
//! The partition at time t consists of the components of the terminal graph
//! restricted to edges of cost at most 2t, so merges happen at half the
//! Kruskal thresholds. Simultaneous merges are processed as one multi-way
//! event.

use std::collections::{BTreeMap, BTreeSet};

use num::traits::Zero;

use crate::error::Error;
use crate::instance::MetricInstance;
use crate::rat::{format_rat, rat_int, Rat};
use crate::Result;

#[derive(Debug, Clone)]
pub struct ForestSet {
    pub id: usize,
    /// Sorted member terminal ids (original vertex ids).
    pub members: Vec<usize>,
    pub activation: Rat,
    /// `None` for the forest root (never deactivates).
    pub deactivation: Option<Rat>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Smallest input-order index among member terminals; used for
    /// deterministic tie-breaking.
    pub min_leaf_order: usize,
}

#[derive(Debug, Clone)]
pub struct MergeForest {
    pub sets: Vec<ForestSet>,
    pub t_max: Rat,
    /// Terminal ids in instance order.
    pub terminal_order: Vec<usize>,
    /// Root vertex id of the instance.
    pub root_vertex: usize,
    leaf_of: BTreeMap<usize, usize>,
}

impl MergeForest {
    /// Kruskal merge history of the terminal distance graph at threshold 2t.
    pub fn build(m: &MetricInstance) -> MergeForest {
        let terms = &m.base.terminals;
        let k = terms.len();
        let mut sets: Vec<ForestSet> = vec![];
        let mut leaf_of = BTreeMap::new();
        // Live set per union-find representative.
        let mut live: BTreeMap<usize, usize> = BTreeMap::new();
        let mut uf: Vec<usize> = (0..k).collect();
        fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for (i, &t) in terms.iter().enumerate() {
            sets.push(ForestSet {
                id: i,
                members: vec![t],
                activation: Rat::zero(),
                deactivation: None,
                parent: None,
                children: vec![],
                min_leaf_order: i,
            });
            leaf_of.insert(t, i);
            live.insert(i, i);
        }
        // Pairwise merge thresholds (half-distances), grouped by value.
        let mut by_time: BTreeMap<Rat, Vec<(usize, usize)>> = BTreeMap::new();
        for i in 0..k {
            for j in (i + 1)..k {
                let t = m.dist(terms[i], terms[j]) / rat_int(2);
                by_time.entry(t).or_default().push((i, j));
            }
        }
        let mut t_max = Rat::zero();
        for (time, pairs) in by_time {
            // Which current parts merge at this time: connected components of
            // the "merges now" graph over representatives.
            let mut touched: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
            let mut any = false;
            for &(i, j) in &pairs {
                let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
                if ri == rj {
                    continue;
                }
                any = true;
                adj.entry(ri).or_default().insert(rj);
                adj.entry(rj).or_default().insert(ri);
                touched.entry(ri).or_default();
                touched.entry(rj).or_default();
            }
            if !any {
                continue;
            }
            t_max = time.clone();
            // Components of the merge graph, deterministically ordered.
            let mut seen: BTreeSet<usize> = BTreeSet::new();
            let reps: Vec<usize> = touched.keys().copied().collect();
            for &start in &reps {
                if seen.contains(&start) {
                    continue;
                }
                let mut group = vec![];
                let mut stack = vec![start];
                seen.insert(start);
                while let Some(x) = stack.pop() {
                    group.push(x);
                    if let Some(ns) = adj.get(&x) {
                        for &y in ns {
                            if seen.insert(y) {
                                stack.push(y);
                            }
                        }
                    }
                }
                group.sort();
                // Multi-way merge of the sets owned by these representatives.
                let child_sets: Vec<usize> = group.iter().map(|r| live[r]).collect();
                let mut members: Vec<usize> = vec![];
                let mut min_leaf = usize::MAX;
                for &cs in &child_sets {
                    members.extend_from_slice(&sets[cs].members);
                    min_leaf = min_leaf.min(sets[cs].min_leaf_order);
                }
                members.sort();
                let new_id = sets.len();
                for &cs in &child_sets {
                    sets[cs].deactivation = Some(time.clone());
                    sets[cs].parent = Some(new_id);
                }
                sets.push(ForestSet {
                    id: new_id,
                    members,
                    activation: time.clone(),
                    deactivation: None,
                    parent: None,
                    children: child_sets.clone(),
                    min_leaf_order: min_leaf,
                });
                // Union.
                let mut root = group[0];
                for &g in group.iter().skip(1) {
                    let (a, b) = (find(&mut uf, root), find(&mut uf, g));
                    uf[a] = b;
                    root = b;
                }
                let r = find(&mut uf, root);
                for &g in &group {
                    live.remove(&g);
                }
                live.insert(r, new_id);
            }
        }
        MergeForest {
            sets,
            t_max,
            terminal_order: terms.clone(),
            root_vertex: m.base.root,
            leaf_of,
        }
    }

    pub fn leaf_of(&self, terminal: usize) -> Option<usize> {
        self.leaf_of.get(&terminal).copied()
    }

    pub fn contains(&self, set_id: usize, terminal: usize) -> bool {
        self.sets[set_id].members.binary_search(&terminal).is_ok()
    }

    pub fn has_root(&self, set_id: usize) -> bool {
        self.contains(set_id, self.root_vertex)
    }

    /// First time two terminals lie in a common part.
    pub fn merge_time(&self, s1: usize, s2: usize) -> Result<Rat> {
        let mut a = self
            .leaf_of(s1)
            .ok_or(Error::UnknownTerminal(s1 + 1))?;
        let b = self
            .leaf_of(s2)
            .ok_or(Error::UnknownTerminal(s2 + 1))?;
        if s1 == s2 {
            return Ok(Rat::zero());
        }
        // Walk up from a until the set contains s2.
        loop {
            if self.contains(a, s2) {
                return Ok(self.sets[a].activation.clone());
            }
            a = self.sets[a].parent.ok_or_else(|| {
                let _ = b;
                Error::Invalid("terminals never merge; disconnected forest".into())
            })?;
        }
    }

    /// Merge time of a whole part with an outside terminal (same for all
    /// members since the family is laminar).
    pub fn merge_time_set(&self, set_id: usize, terminal: usize) -> Result<Rat> {
        self.merge_time(self.sets[set_id].members[0], terminal)
    }

    /// Sets active (growing candidates) at time t that exclude the root.
    pub fn active_rootless_at(&self, t: &Rat) -> Vec<usize> {
        self.sets
            .iter()
            .filter(|s| {
                !self.has_root(s.id)
                    && s.activation <= *t
                    && s.deactivation.as_ref().map(|d| t < d).unwrap_or(true)
            })
            .map(|s| s.id)
            .collect()
    }

    /// Number of parts of the partition at time t.
    pub fn parts_at(&self, t: &Rat) -> usize {
        self.sets
            .iter()
            .filter(|s| {
                s.activation <= *t && s.deactivation.as_ref().map(|d| t < d).unwrap_or(true)
            })
            .count()
    }

    /// All event times (activations), ascending and deduplicated, excluding 0.
    pub fn event_times(&self) -> Vec<Rat> {
        let mut times: BTreeSet<Rat> = BTreeSet::new();
        for s in &self.sets {
            if !s.activation.is_zero() {
                times.insert(s.activation.clone());
            }
        }
        times.into_iter().collect()
    }

    /// Exact length of the activity interval clipped to [0, t_max].
    fn clipped_activity(&self, s: &ForestSet) -> Rat {
        let end = match &s.deactivation {
            Some(d) => d.clone(),
            None => self.t_max.clone(),
        };
        let end = end.min(self.t_max.clone());
        if end > s.activation {
            end - &s.activation
        } else {
            Rat::zero()
        }
    }

    /// 2 * integral of (parts(t) - 1) dt, the terminal MST cost identity.
    pub fn mst_cost_integral(&self) -> Rat {
        let total: Rat = self.sets.iter().map(|s| self.clipped_activity(s)).sum();
        rat_int(2) * (total - &self.t_max)
    }

    /// Integral of parts(t) dt (the undirected dual value identity).
    pub fn parts_integral(&self) -> Rat {
        self.sets.iter().map(|s| self.clipped_activity(s)).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let sets: Vec<serde_json::Value> = self
            .sets
            .iter()
            .map(|s| {
                serde_json::json!({
                    "id": s.id,
                    "members": s.members.iter().map(|v| v + 1).collect::<Vec<usize>>(),
                    "a": format_rat(&s.activation),
                    "d": s.deactivation.as_ref().map(format_rat),
                    "parent": s.parent,
                })
            })
            .collect();
        serde_json::json!({
            "t_max": format_rat(&self.t_max),
            "sets": sets,
        })
    }
}

/// Kruskal terminal MST over the closure distances. Returns terminal-pair
/// edges and the total cost.
pub fn terminal_mst(m: &MetricInstance) -> (Vec<(usize, usize)>, Rat) {
    let terms = &m.base.terminals;
    let k = terms.len();
    let mut pairs = vec![];
    for i in 0..k {
        for j in (i + 1)..k {
            pairs.push((m.dist(terms[i], terms[j]).clone(), i, j));
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
    let mut edges = vec![];
    let mut cost = Rat::zero();
    for (c, i, j) in pairs {
        let (a, b) = (find(&mut uf, i), find(&mut uf, j));
        if a != b {
            uf[a] = b;
            edges.push((terms[i], terms[j]));
            cost += c;
        }
    }
    (edges, cost)
}

/// drop(X) = mst(G[R]) - mst(G[R]/X) via the activity integral: twice the
/// integral of (#parts meeting X - 1).
pub fn drop_value(f: &MergeForest, x: &BTreeSet<usize>) -> Result<Rat> {
    check_terminal_subset(f, x)?;
    if x.len() <= 1 {
        return Ok(Rat::zero());
    }
    let mut total = Rat::zero();
    for s in &f.sets {
        if s.members.iter().any(|m| x.contains(m)) {
            total += f.clipped_activity(s);
        }
    }
    Ok(rat_int(2) * (total - &f.t_max))
}

fn check_terminal_subset(f: &MergeForest, x: &BTreeSet<usize>) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyTerminalSet);
    }
    for &t in x {
        if f.leaf_of(t).is_none() {
            return Err(Error::NotTerminalSubset);
        }
    }
    Ok(())
}

/// A family of |X| - 1 forest sets pairwise separating X; its value twice the
/// sum of deactivation times lower-bounds drop(X).
#[derive(Debug, Clone)]
pub struct DropCertificate {
    /// Forest set ids.
    pub sets: Vec<usize>,
    pub target: BTreeSet<usize>,
    pub value: Rat,
}

impl DropCertificate {
    pub fn separates_all_pairs(&self, f: &MergeForest) -> bool {
        let xs: Vec<usize> = self.target.iter().copied().collect();
        for (i, &a) in xs.iter().enumerate() {
            for &b in xs.iter().skip(i + 1) {
                let ok = self.sets.iter().any(|&s| {
                    let ca = f.contains(s, a);
                    let cb = f.contains(s, b);
                    ca != cb
                });
                if !ok {
                    return false;
                }
            }
        }
        true
    }
}

fn certificate_value(f: &MergeForest, sets: &[usize]) -> Rat {
    rat_int(2)
        * sets
            .iter()
            .map(|&s| {
                f.sets[s]
                    .deactivation
                    .clone()
                    .expect("certificate sets are deactivated")
            })
            .sum::<Rat>()
}

/// Maximum-value drop certificate. Without `avoid` this replays the merge
/// history (value equals drop(X) exactly); with `avoid` it searches over
/// certificates whose sets all exclude the given terminal.
pub fn max_drop_certificate(
    f: &MergeForest,
    x: &BTreeSet<usize>,
    avoid: Option<usize>,
) -> Result<DropCertificate> {
    check_terminal_subset(f, x)?;
    if let Some(a) = avoid {
        if !x.contains(&a) {
            return Err(Error::Invalid("avoid terminal must be in X".into()));
        }
        return max_certificate_avoiding(f, x, a);
    }
    if x.len() <= 1 {
        return Ok(DropCertificate {
            sets: vec![],
            target: x.clone(),
            value: Rat::zero(),
        });
    }
    // Merge replay: whenever several X-meeting parts merge, keep all but the
    // one with the largest leaf-order representative.
    let mut chosen = vec![];
    // Process internal sets by activation time; their children meeting X are
    // the merging parts.
    let mut internal: Vec<&ForestSet> = f.sets.iter().filter(|s| !s.children.is_empty()).collect();
    internal.sort_by(|a, b| a.activation.cmp(&b.activation).then(a.id.cmp(&b.id)));
    for s in internal {
        let mut meeting: Vec<usize> = s
            .children
            .iter()
            .copied()
            .filter(|&c| f.sets[c].members.iter().any(|m| x.contains(m)))
            .collect();
        if meeting.len() < 2 {
            continue;
        }
        meeting.sort_by_key(|&c| f.sets[c].min_leaf_order);
        meeting.pop();
        chosen.extend(meeting);
    }
    chosen.sort();
    let value = certificate_value(f, &chosen);
    let cert = DropCertificate {
        sets: chosen,
        target: x.clone(),
        value,
    };
    debug_assert_eq!(cert.sets.len(), x.len() - 1);
    debug_assert!(cert.separates_all_pairs(f));
    Ok(cert)
}

/// Exhaustive search over (|X|-1)-subsets of forest sets not containing
/// `avoid`. Exponential in |X|; diagnostics-scale only.
fn max_certificate_avoiding(
    f: &MergeForest,
    x: &BTreeSet<usize>,
    avoid: usize,
) -> Result<DropCertificate> {
    if x.len() <= 1 {
        return Ok(DropCertificate {
            sets: vec![],
            target: x.clone(),
            value: Rat::zero(),
        });
    }
    let candidates: Vec<usize> = f
        .sets
        .iter()
        .filter(|s| s.deactivation.is_some() && !f.contains(s.id, avoid))
        .map(|s| s.id)
        .collect();
    let need = x.len() - 1;
    let mut best: Option<DropCertificate> = None;
    let mut stack: Vec<usize> = vec![];
    search(
        f,
        x,
        &candidates,
        0,
        need,
        &mut stack,
        &mut best,
    );
    best.ok_or_else(|| Error::Invalid("no avoiding drop certificate exists".into()))
}

fn search(
    f: &MergeForest,
    x: &BTreeSet<usize>,
    candidates: &[usize],
    from: usize,
    need: usize,
    stack: &mut Vec<usize>,
    best: &mut Option<DropCertificate>,
) {
    if stack.len() == need {
        let cert = DropCertificate {
            sets: stack.clone(),
            target: x.clone(),
            value: certificate_value(f, stack),
        };
        if cert.separates_all_pairs(f)
            && best.as_ref().map(|b| cert.value > b.value).unwrap_or(true)
        {
            *best = Some(cert);
        }
        return;
    }
    if candidates.len() - from < need - stack.len() {
        return;
    }
    for i in from..candidates.len() {
        stack.push(candidates[i]);
        search(f, x, candidates, i + 1, need, stack, best);
        stack.pop();
    }
}

/// Exhaustive maximum over *all* (|X|-1)-subsets (no avoid restriction);
/// test oracle for certificate maximality.
pub fn exhaustive_max_certificate_value(f: &MergeForest, x: &BTreeSet<usize>) -> Option<Rat> {
    if x.len() <= 1 {
        return Some(Rat::zero());
    }
    let candidates: Vec<usize> = f
        .sets
        .iter()
        .filter(|s| s.deactivation.is_some())
        .map(|s| s.id)
        .collect();
    let mut best: Option<DropCertificate> = None;
    let mut stack = vec![];
    search(f, x, &candidates, 0, x.len() - 1, &mut stack, &mut best);
    best.map(|c| c.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_family, metric_closure, Family};
    use crate::rat::rat;

    fn forest_for(fam: &Family) -> (MetricInstance, MergeForest) {
        let inst = generate_family(fam).unwrap();
        let m = metric_closure(&inst);
        let f = MergeForest::build(&m);
        (m, f)
    }

    #[test]
    fn subdiv_triangle_forest() {
        let (_, f) = forest_for(&Family::SubdivTriangle);
        assert_eq!(f.t_max, rat_int(1));
        assert_eq!(f.sets.len(), 4);
        for leaf in 0..3 {
            assert_eq!(f.sets[leaf].activation, rat_int(0));
            assert_eq!(f.sets[leaf].deactivation, Some(rat_int(1)));
        }
        assert_eq!(f.sets[3].members.len(), 3);
        assert_eq!(f.sets[3].activation, rat_int(1));
        assert_eq!(f.sets[3].deactivation, None);
    }

    #[test]
    fn spider_forest_times() {
        let (_, f) = forest_for(&Family::Spider { k: 2, q: 2 });
        // Terminals: s1=0, s2=1, r=2, sbar1=3, sbar2=4; r-sbar distance 1,
        // everything else 2.
        let half = rat(1, 2);
        for t in [2usize, 3, 4] {
            let leaf = f.leaf_of(t).unwrap();
            assert_eq!(f.sets[leaf].deactivation, Some(half.clone()));
        }
        for t in [0usize, 1] {
            let leaf = f.leaf_of(t).unwrap();
            assert_eq!(f.sets[leaf].deactivation, Some(rat_int(1)));
        }
        assert_eq!(f.t_max, rat_int(1));
        // The {r, sbar1, sbar2} set is active on [1/2, 1).
        let mid = f
            .sets
            .iter()
            .find(|s| s.members == vec![2, 3, 4])
            .expect("merged root set");
        assert_eq!(mid.activation, half);
        assert_eq!(mid.deactivation, Some(rat_int(1)));
    }

    #[test]
    fn two_terminal_merge() {
        let inst = crate::instance::parse_instance(
            "nodes 2\nedge 1 2 6\nterminal 1\nterminal 2\nroot 1\n",
            crate::instance::Format::Native,
        )
        .unwrap();
        let m = metric_closure(&inst);
        let f = MergeForest::build(&m);
        assert_eq!(f.t_max, rat_int(3));
        assert_eq!(f.sets[0].deactivation, Some(rat_int(3)));
    }

    #[test]
    fn merge_times() {
        let (_, f) = forest_for(&Family::SubdivTriangle);
        assert_eq!(f.merge_time(0, 1).unwrap(), rat_int(1));
        assert_eq!(f.merge_time(0, 0).unwrap(), rat_int(0));
        let (_, f) = forest_for(&Family::Spider { k: 2, q: 2 });
        assert_eq!(f.merge_time(3, 2).unwrap(), rat(1, 2));
    }

    #[test]
    fn terminal_mst_values() {
        let (m, f) = forest_for(&Family::GapGadget);
        let (_, cost) = terminal_mst(&m);
        assert_eq!(cost, rat_int(8));
        assert_eq!(f.mst_cost_integral(), rat_int(8));

        let (m, f) = forest_for(&Family::Spider { k: 3, q: 5 });
        let (_, cost) = terminal_mst(&m);
        assert_eq!(cost, rat_int(11));
        assert_eq!(f.mst_cost_integral(), rat_int(11));

        let (m, f) = forest_for(&Family::SubdivTriangle);
        let (edges, cost) = terminal_mst(&m);
        assert_eq!(cost, rat_int(4));
        assert_eq!(edges.len(), 2);
        assert_eq!(f.mst_cost_integral(), rat_int(4));
    }

    #[test]
    fn drop_values() {
        let (_, f) = forest_for(&Family::Spider { k: 2, q: 2 });
        assert_eq!(drop_value(&f, &BTreeSet::from([0, 1])).unwrap(), rat_int(2));
        assert_eq!(drop_value(&f, &BTreeSet::from([0])).unwrap(), rat_int(0));
        let (_, f) = forest_for(&Family::SubdivTriangle);
        assert_eq!(
            drop_value(&f, &BTreeSet::from([0, 1, 2])).unwrap(),
            rat_int(4)
        );
        assert!(drop_value(&f, &BTreeSet::from([5])).is_err());
    }

    #[test]
    fn certificates() {
        let (_, f) = forest_for(&Family::Spider { k: 2, q: 2 });
        let x = BTreeSet::from([0, 1]);
        let cert = max_drop_certificate(&f, &x, None).unwrap();
        assert_eq!(cert.value, rat_int(2));
        assert_eq!(cert.sets.len(), 1);
        assert!(cert.separates_all_pairs(&f));

        let single = max_drop_certificate(&f, &BTreeSet::from([0]), None).unwrap();
        assert!(single.sets.is_empty());
        assert_eq!(single.value, rat_int(0));

        let avoiding = max_drop_certificate(&f, &x, Some(0)).unwrap();
        assert_eq!(avoiding.value, rat_int(2));
        assert!(avoiding.sets.iter().all(|&s| !f.contains(s, 0)));
    }

    #[test]
    fn observation_membership_iff_merge_before_deactivation() {
        let (_, f) = forest_for(&Family::Spider { k: 3, q: 5 });
        for s in &f.sets {
            if f.has_root(s.id) || s.deactivation.is_none() {
                continue;
            }
            let d = s.deactivation.clone().unwrap();
            let s1 = s.members[0];
            for &s2 in &f.terminal_order {
                let tm = f.merge_time(s1, s2).unwrap();
                assert_eq!(tm < d, f.contains(s.id, s2));
            }
        }
    }

    #[test]
    fn ultrametric_and_distance_bound() {
        let inst = generate_family(&Family::Random {
            n: 14,
            k: 6,
            seed: 3,
        })
        .unwrap();
        let m = metric_closure(&inst);
        let f = MergeForest::build(&m);
        let r = &m.base.terminals;
        for &a in r {
            for &b in r {
                let tab = f.merge_time(a, b).unwrap();
                assert!(m.dist(a, b) >= &(rat_int(2) * &tab));
                for &c in r {
                    let tac = f.merge_time(a, c).unwrap();
                    let tbc = f.merge_time(b, c).unwrap();
                    assert!(tac <= tab.clone().max(tbc));
                }
            }
        }
    }
}
