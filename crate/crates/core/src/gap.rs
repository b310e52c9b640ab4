//! The scale-or-contract loop: grow the bidirected dual; on root capture,
//! contract an improving component and retry; on completion emit the tree
//! assembled from the contracted components plus the final terminal MST,
//! together with the dual lower bound and their exact ratio.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num::traits::{One, Zero};

use crate::error::Error;
use crate::growth::{extract_s_tight_path, run_growth, GrowthConfig, GrowthTrace};
use crate::instance::{
    contract_terminals, metric_closure, shortest_path_edges, ContractionEntry, ContractionLog,
    Instance, MetricInstance,
};
use crate::merge::{drop_value, terminal_mst, MergeForest};
use crate::oracles::dw::{SteinerTable, DEFAULT_TERMINAL_CAP};
use crate::rat::{format_rat, rat, rat_int, Rat};
use crate::Result;

/// A connected subgraph (closure edges) connecting a terminal set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Closure-edge list in the current instance's vertex ids.
    pub edges: Vec<(usize, usize)>,
    /// Terminals connected by the component.
    pub terminals: BTreeSet<usize>,
    pub cost: Rat,
}

impl Component {
    fn from_edges(m: &MetricInstance, edges: Vec<(usize, usize)>, extra: &BTreeSet<usize>) -> Self {
        let cost = edges.iter().map(|&(u, v)| m.dist[u][v].clone()).sum();
        let tset = m.base.terminal_set();
        let mut terminals: BTreeSet<usize> = edges
            .iter()
            .flat_map(|&(u, v)| [u, v])
            .filter(|v| tset.contains(v))
            .collect();
        terminals.extend(extra.iter().copied());
        Component {
            edges,
            terminals,
            cost,
        }
    }

    /// Edges connected and X inside the vertex set.
    pub fn is_valid(&self) -> bool {
        if self.edges.is_empty() {
            return self.terminals.len() <= 1;
        }
        let mut verts: BTreeSet<usize> = BTreeSet::new();
        for &(u, v) in &self.edges {
            verts.insert(u);
            verts.insert(v);
        }
        if !self.terminals.iter().all(|t| verts.contains(t)) {
            return false;
        }
        let ids: Vec<usize> = verts.iter().copied().collect();
        let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut uf: Vec<usize> = (0..ids.len()).collect();
        fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for &(u, v) in &self.edges {
            let (a, b) = (find(&mut uf, index[&u]), find(&mut uf, index[&v]));
            uf[a] = b;
        }
        let root = find(&mut uf, 0);
        (1..ids.len()).all(|i| find(&mut uf, i) == root)
    }
}

/// 2(1 + gamma + delta) / ((1 + gamma)(1 + delta)), the certified worst-case
/// ratio of the procedure.
pub fn theorem_ratio(delta: &Rat, gamma: &Rat) -> Rat {
    let one = Rat::one();
    rat_int(2) * (&one + gamma + delta) / ((&one + gamma) * (&one + delta))
}

/// drop(X) >= (1 + gamma) * c(K), exact.
pub fn improvement_test(f: &MergeForest, k: &Component, gamma: &Rat) -> Result<bool> {
    if k.terminals.len() <= 1 {
        return Ok(false);
    }
    let drop = drop_value(f, &k.terminals)?;
    Ok(drop >= (Rat::one() + gamma) * &k.cost)
}

/// Candidate components: trace-guided ones derived from the captured tight
/// path (prefixes plus shortest attachments from contributing sets), then
/// exhaustive optima for every terminal subset of size at most h.
pub fn candidate_components(
    m: &MetricInstance,
    trace: Option<&GrowthTrace>,
    h: usize,
) -> Vec<Component> {
    let mut out: BTreeMap<Vec<usize>, Component> = BTreeMap::new();
    let mut push = |c: Component| {
        if c.terminals.len() < 2 {
            return;
        }
        let key: Vec<usize> = c.terminals.iter().copied().collect();
        match out.get(&key) {
            Some(prev) if prev.cost <= c.cost => {}
            _ => {
                out.insert(key, c);
            }
        }
    };
    if let Some(tr) = trace {
        for c in trace_guided_components(m, tr) {
            push(c);
        }
    }
    for c in exhaustive_components(m, h) {
        push(c);
    }
    out.into_values().collect()
}

fn trace_guided_components(m: &MetricInstance, tr: &GrowthTrace) -> Vec<Component> {
    let mut found = vec![];
    for (set_id, cap_time) in &tr.captured {
        let Ok(path) = extract_s_tight_path(tr, *set_id, tr.root) else {
            continue;
        };
        // Prefix split points: every vertex after the start.
        for end in 1..path.vertices.len() {
            let prefix: Vec<(usize, usize)> = path.vertices[..=end]
                .windows(2)
                .map(|w| (w[0], w[1]))
                .collect();
            let mut edges = prefix.clone();
            let mut extra = BTreeSet::new();
            extra.insert(path.vertices[0]);
            // Attach contributing sets' terminals at their first
            // contribution point on the prefix.
            let mut attached: BTreeSet<usize> = BTreeSet::new();
            for &(a, b) in &prefix {
                for (sid, amount) in tr.contributors_until(a, b, cap_time) {
                    if amount.is_zero() || attached.contains(&sid) {
                        continue;
                    }
                    let members = &tr.forest.sets[sid].members;
                    if members.contains(&path.vertices[0]) {
                        continue;
                    }
                    attached.insert(sid);
                    // Nearest member terminal to the tail of the edge.
                    let s = members
                        .iter()
                        .copied()
                        .min_by(|&x, &y| m.dist[x][a].cmp(&m.dist[y][a]).then(x.cmp(&y)))
                        .unwrap();
                    if s != a {
                        edges.push((s, a));
                    }
                    extra.insert(s);
                }
            }
            found.push(Component::from_edges(m, edges, &extra));
        }
    }
    found
}

fn exhaustive_components(m: &MetricInstance, h: usize) -> Vec<Component> {
    let terms = m.base.terminals.clone();
    let k = terms.len();
    let mut found = vec![];
    if h < 2 {
        return found;
    }
    if k <= DEFAULT_TERMINAL_CAP {
        // One full table answers every subset.
        let table = SteinerTable::build(m, DEFAULT_TERMINAL_CAP).expect("within cap");
        let full = 1u32 << k;
        for mask in 1..full {
            let size = mask.count_ones() as usize;
            if size < 2 || size > h {
                continue;
            }
            let x: Vec<usize> = (0..k)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| terms[i])
                .collect();
            let edges = table.tree(&x).expect("valid subset");
            found.push(Component::from_edges(m, edges, &x.iter().copied().collect()));
        }
    } else {
        // Too many terminals for one table: per-subset tables, ascending
        // sizes. Exponential in h; diagnostics scale.
        for size in 2..=h.min(k) {
            for_each_combination(k, size, |combo| {
                let x: Vec<usize> = combo.iter().map(|&i| terms[i]).collect();
                let sub = restrict_terminals(m, &x);
                if let Ok(table) = SteinerTable::build(&sub, size) {
                    if let Ok(edges) = table.tree(&x) {
                        found.push(Component::from_edges(m, edges, &x.iter().copied().collect()));
                    }
                }
            });
        }
    }
    found
}

/// Visit all k-choose-size index combinations in lexicographic order.
fn for_each_combination(k: usize, size: usize, mut visit: impl FnMut(&[usize])) {
    let mut combo: Vec<usize> = (0..size).collect();
    if size > k {
        return;
    }
    loop {
        visit(&combo);
        // Advance.
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if combo[i] != i + k - size {
                combo[i] += 1;
                for j in (i + 1)..size {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Same metric space with a restricted terminal list (for per-subset trees).
fn restrict_terminals(m: &MetricInstance, x: &[usize]) -> MetricInstance {
    let mut base = m.base.clone();
    base.terminals = x.to_vec();
    base.root = x[0];
    MetricInstance {
        base,
        dist: m.dist.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Ok,
    DiagnosticFail,
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub growth: GrowthConfig,
    pub gamma: Rat,
    pub h: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            growth: GrowthConfig::table1(),
            gamma: rat(774, 10_000),
            h: 6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContractionRecord {
    /// Contracted terminals, in the then-current instance's ids.
    pub terminals_current: BTreeSet<usize>,
    pub component_cost: Rat,
    pub drop_value: Rat,
}

#[derive(Debug, Clone)]
pub struct GapReport {
    pub instance: String,
    pub vertex_count: usize,
    pub edge_count: usize,
    pub terminal_count: usize,
    pub delta: Rat,
    pub gamma: Rat,
    pub h: usize,
    pub mst: Rat,
    pub status: SolveStatus,
    /// Original-graph edge indices of the returned tree (empty on failure).
    pub tree_edges: Vec<usize>,
    pub tree_cost: Option<Rat>,
    pub dual_bound: Option<Rat>,
    pub ratio: Option<Rat>,
    pub rho: Option<Rat>,
    pub contractions: Vec<ContractionRecord>,
    pub captures: usize,
    pub runtime_ms: u128,
    /// Diagnostic note when no improving component was found.
    pub failure_note: Option<String>,
}

impl GapReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "instance": self.instance,
            "n": self.vertex_count,
            "m": self.edge_count,
            "k": self.terminal_count,
            "delta": format_rat(&self.delta),
            "gamma": format_rat(&self.gamma),
            "h": self.h,
            "mst": format_rat(&self.mst),
            "tree_cost": self.tree_cost.as_ref().map(format_rat),
            "dual_bound": self.dual_bound.as_ref().map(format_rat),
            "ratio": self.ratio.as_ref().map(format_rat),
            "rho": self.rho.as_ref().map(format_rat),
            "tree_edges": self.tree_edges.clone(),
            "contractions": self.contractions.iter().map(|c| serde_json::json!({
                "X": c.terminals_current.iter().map(|v| v + 1).collect::<Vec<_>>(),
                "component_cost": format_rat(&c.component_cost),
                "drop": format_rat(&c.drop_value),
            })).collect::<Vec<_>>(),
            "captures": self.captures,
            "status": match self.status { SolveStatus::Ok => "OK", SolveStatus::DiagnosticFail => "DIAGNOSTIC-FAIL" },
            "runtime_ms": self.runtime_ms,
            "failure_note": self.failure_note,
        })
    }
}

/// The end-to-end procedure.
pub fn scale_or_contract(inst: &Instance, cfg: &SolveConfig) -> Result<GapReport> {
    let started = Instant::now();
    let m0 = metric_closure(inst);
    let (_, mst0) = terminal_mst(&m0);
    let mut report = GapReport {
        instance: "instance".into(),
        vertex_count: inst.vertex_count,
        edge_count: inst.edges.len(),
        terminal_count: inst.terminals.len(),
        delta: cfg.growth.delta.clone(),
        gamma: cfg.gamma.clone(),
        h: cfg.h,
        mst: mst0.clone(),
        status: SolveStatus::Ok,
        tree_edges: vec![],
        tree_cost: None,
        dual_bound: None,
        ratio: None,
        rho: None,
        contractions: vec![],
        captures: 0,
        runtime_ms: 0,
        failure_note: None,
    };
    if inst.terminals.len() <= 1 {
        report.tree_cost = Some(Rat::zero());
        report.dual_bound = Some(Rat::zero());
        report.ratio = Some(Rat::one());
        report.rho = Some(Rat::one());
        report.runtime_ms = started.elapsed().as_millis();
        return Ok(report);
    }

    let mut current = inst.clone();
    let mut log = ContractionLog::default();
    loop {
        if current.terminals.len() == 1 {
            let tree = assemble_tree(&log, &current, &[], inst)?;
            return finish(report, started, inst, &mst0, cfg, tree, Rat::zero());
        }
        let m = metric_closure(&current);
        let f = MergeForest::build(&m);
        let mut gcfg = cfg.growth.clone();
        gcfg.root = None;
        gcfg.halt_on_capture = true;
        let tr = run_growth(&m, &f, &gcfg)?;
        if tr.completed() {
            let (mst_edges, mst_cost) = terminal_mst(&m);
            let tree = assemble_tree(&log, &current, &mst_edges, inst)?;
            return finish(report, started, inst, &mst0, cfg, tree, mst_cost);
        }
        report.captures += 1;
        // Improving component: trace-guided candidates first, exhaustive
        // fallback otherwise; pick the largest certified gain.
        let chosen = {
            let guided = candidate_components(&m, Some(&tr), 1); // guided only
            match best_improving(&f, guided, &cfg.gamma)? {
                Some(c) => Some(c),
                None => best_improving(&f, candidate_components(&m, None, cfg.h), &cfg.gamma)?,
            }
        };
        let Some(component) = chosen else {
            report.status = SolveStatus::DiagnosticFail;
            report.failure_note = Some(format!(
                "root captured at t={} by set {:?} but no improving component found at h={}",
                format_rat(&tr.captured[0].1),
                tr.forest.sets[tr.captured[0].0]
                    .members
                    .iter()
                    .map(|v| v + 1)
                    .collect::<Vec<_>>(),
                cfg.h
            ));
            report.runtime_ms = started.elapsed().as_millis();
            return Ok(report);
        };
        // Expand the component's closure edges into base edges of the
        // current instance.
        let mut base_edges: BTreeSet<usize> = BTreeSet::new();
        for &(u, v) in &component.edges {
            for ei in shortest_path_edges(&current, u, v) {
                base_edges.insert(ei);
            }
        }
        let drop = drop_value(&f, &component.terminals)?;
        report.contractions.push(ContractionRecord {
            terminals_current: component.terminals.clone(),
            component_cost: component.cost.clone(),
            drop_value: drop.clone(),
        });
        let (next, mapping) = contract_terminals(&current, &component.terminals)?;
        log.entries.push(ContractionEntry {
            terminals: component.terminals.clone(),
            component_edges: base_edges.into_iter().collect(),
            component_cost: component.cost.clone(),
            drop_value: drop,
            mapping,
        });
        current = next;
    }
}

fn best_improving(
    f: &MergeForest,
    candidates: Vec<Component>,
    gamma: &Rat,
) -> Result<Option<Component>> {
    let mut best: Option<(Rat, Component)> = None;
    for c in candidates {
        if !improvement_test(f, &c, gamma)? {
            continue;
        }
        let gain = drop_value(f, &c.terminals)? - (Rat::one() + gamma) * &c.cost;
        let better = match &best {
            None => true,
            Some((g, prev)) => {
                gain > *g
                    || (gain == *g
                        && (c.terminals.len(), c.terminals.iter().next())
                            < (prev.terminals.len(), prev.terminals.iter().next()))
            }
        };
        if better {
            best = Some((gain, c));
        }
    }
    Ok(best.map(|(_, c)| c))
}

fn finish(
    mut report: GapReport,
    started: Instant,
    original: &Instance,
    mst0: &Rat,
    cfg: &SolveConfig,
    tree_edges: Vec<usize>,
    mst_final: Rat,
) -> Result<GapReport> {
    let tree_cost: Rat = tree_edges
        .iter()
        .map(|&ei| original.edges[ei].cost.clone())
        .sum();
    let rho = if mst0.is_zero() {
        Rat::one()
    } else {
        &mst_final / mst0
    };
    let half = rat(1, 2);
    let scaled = (Rat::one() + &cfg.growth.delta) * &half * &mst_final;
    let dual_bound = (&half * mst0).max(scaled);
    let ratio = if dual_bound.is_zero() {
        Rat::one()
    } else {
        &tree_cost / &dual_bound
    };
    report.tree_edges = tree_edges;
    report.tree_cost = Some(tree_cost);
    report.dual_bound = Some(dual_bound);
    report.ratio = Some(ratio);
    report.rho = Some(rho);
    report.runtime_ms = started.elapsed().as_millis();
    Ok(report)
}

/// Union the logged components (base edges of their instances) with the
/// final terminal MST, map everything back to original edges, take a
/// spanning tree of the union and prune non-terminal leaves.
pub fn assemble_tree(
    log: &ContractionLog,
    final_instance: &Instance,
    final_mst_pairs: &[(usize, usize)],
    original: &Instance,
) -> Result<Vec<usize>> {
    let mut chosen: BTreeSet<usize> = BTreeSet::new();
    for (level, entry) in log.entries.iter().enumerate() {
        for &ei in &entry.component_edges {
            chosen.insert(log.edge_to_original(level, ei)?);
        }
    }
    let final_level = log.entries.len();
    for &(s, t) in final_mst_pairs {
        for ei in shortest_path_edges(final_instance, s, t) {
            chosen.insert(log.edge_to_original(final_level, ei)?);
        }
    }
    // Spanning tree of the union, built cheapest-first.
    let mut edges: Vec<usize> = chosen.into_iter().collect();
    edges.sort_by(|&a, &b| {
        original.edges[a]
            .cost
            .cmp(&original.edges[b].cost)
            .then(a.cmp(&b))
    });
    let n = original.vertex_count;
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    let mut tree: Vec<usize> = vec![];
    for ei in edges {
        let e = &original.edges[ei];
        let (a, b) = (find(&mut uf, e.u), find(&mut uf, e.v));
        if a != b {
            uf[a] = b;
            tree.push(ei);
        }
    }
    let reps: BTreeSet<usize> = original
        .terminals
        .iter()
        .map(|&t| find(&mut uf, t))
        .collect();
    if reps.len() > 1 {
        return Err(Error::InconsistentMapping(
            "assembled edges do not span the terminals".into(),
        ));
    }
    // Prune non-terminal leaves.
    let tset = original.terminal_set();
    loop {
        let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
        for &ei in &tree {
            *degree.entry(original.edges[ei].u).or_insert(0) += 1;
            *degree.entry(original.edges[ei].v).or_insert(0) += 1;
        }
        let before = tree.len();
        tree.retain(|&ei| {
            let e = &original.edges[ei];
            let u_leaf = degree[&e.u] == 1 && !tset.contains(&e.u);
            let v_leaf = degree[&e.v] == 1 && !tset.contains(&e.v);
            !(u_leaf || v_leaf)
        });
        if tree.len() == before {
            break;
        }
    }
    tree.sort();
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_family, Family};

    fn solve(fam: &Family) -> GapReport {
        let inst = generate_family(fam).unwrap();
        scale_or_contract(&inst, &SolveConfig::default()).unwrap()
    }

    #[test]
    fn theorem_ratio_values() {
        assert_eq!(theorem_ratio(&Rat::zero(), &Rat::zero()), rat_int(2));
        // gamma = 0 degenerates to 2: the delta terms cancel.
        assert_eq!(theorem_ratio(&rat(858, 100_000), &Rat::zero()), rat_int(2));
        let table1 = theorem_ratio(&rat(858, 100_000), &rat(774, 10_000));
        assert!(table1 < rat(19_988, 10_000));
        assert!(table1 > rat(19_987, 10_000)); // tight, not slack
    }

    #[test]
    fn subdiv_triangle_report() {
        let r = solve(&Family::SubdivTriangle);
        assert_eq!(r.status, SolveStatus::Ok);
        assert_eq!(r.contractions.len(), 0);
        assert_eq!(r.tree_cost, Some(rat_int(4)));
        assert_eq!(r.dual_bound, Some(rat(100_858, 100_000) * rat_int(2)));
        assert_eq!(r.ratio, Some(rat_int(2) / rat(100_858, 100_000)));
        assert!(r.ratio.unwrap() <= rat(19_988, 10_000));
        assert_eq!(r.tree_edges.len(), 4);
    }

    #[test]
    fn spider_report_is_certified() {
        let r = solve(&Family::Spider { k: 3, q: 30 });
        assert_eq!(r.status, SolveStatus::Ok);
        assert!(r.ratio.clone().unwrap() <= rat(19_988, 10_000));
        let inst = generate_family(&Family::Spider { k: 3, q: 30 }).unwrap();
        let cost: Rat = r
            .tree_edges
            .iter()
            .map(|&ei| inst.edges[ei].cost.clone())
            .sum();
        assert_eq!(Some(cost.clone()), r.tree_cost);
        assert!(cost <= rat_int(36));
        // Spans all terminals.
        let mut uf: Vec<usize> = (0..inst.vertex_count).collect();
        fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        for &ei in &r.tree_edges {
            let e = &inst.edges[ei];
            let (a, b) = (find(&mut uf, e.u), find(&mut uf, e.v));
            uf[a] = b;
        }
        let reps: BTreeSet<usize> = inst.terminals.iter().map(|&t| find(&mut uf, t)).collect();
        assert_eq!(reps.len(), 1);
    }

    #[test]
    fn forced_capture_contracts_star() {
        // delta = 7/20 forces a capture on the spider; the trace-guided
        // component is the star {s1, s2, s3, r} of cost 4 with drop 6.
        let inst = generate_family(&Family::Spider { k: 3, q: 30 }).unwrap();
        let mut cfg = SolveConfig::default();
        cfg.growth.delta = rat(7, 20);
        let r = scale_or_contract(&inst, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Ok);
        assert_eq!(r.captures, 1);
        assert_eq!(r.contractions.len(), 1);
        assert_eq!(r.contractions[0].component_cost, rat_int(4));
        assert_eq!(r.contractions[0].drop_value, rat_int(6));
        assert_eq!(
            r.contractions[0].terminals_current,
            BTreeSet::from([0, 1, 2, 3])
        );
        assert!(r.ratio.unwrap() <= rat(19_988, 10_000));
    }

    #[test]
    fn candidates_and_improvement() {
        let inst = generate_family(&Family::Spider { k: 3, q: 30 }).unwrap();
        let m = metric_closure(&inst);
        let f = MergeForest::build(&m);
        let gcfg = GrowthConfig::with_delta(rat(7, 20));
        let tr = run_growth(&m, &f, &gcfg).unwrap();
        assert!(tr.halted);
        let cands = candidate_components(&m, Some(&tr), 1);
        // The star on the hub connecting {s1,s2,s3,r} at cost 4 must appear.
        let star = cands
            .iter()
            .find(|c| c.terminals == BTreeSet::from([0, 1, 2, 3]))
            .expect("star candidate");
        assert_eq!(star.cost, rat_int(4));
        assert!(star.is_valid());
        assert!(improvement_test(&f, star, &rat(774, 10_000)).unwrap());
        // A path component {s1, r} of cost 2 does not improve.
        let path = Component {
            edges: vec![(0, 3)],
            terminals: BTreeSet::from([0, 3]),
            cost: rat_int(2),
        };
        assert!(!improvement_test(&f, &path, &rat(774, 10_000)).unwrap());
        // Singleton never improves.
        let single = Component {
            edges: vec![],
            terminals: BTreeSet::from([0]),
            cost: Rat::zero(),
        };
        assert!(!improvement_test(&f, &single, &rat(774, 10_000)).unwrap());
    }

    #[test]
    fn pair_components_on_triangle() {
        let inst = generate_family(&Family::SubdivTriangle).unwrap();
        let m = metric_closure(&inst);
        let cands = candidate_components(&m, None, 2);
        assert_eq!(cands.len(), 3);
        assert!(cands.iter().all(|c| c.cost == rat_int(2)));
    }

    #[test]
    fn fan_candidate_from_figure() {
        // The component connecting {s1, r, st1, st2} through the first hub
        // at cost 4.
        let inst = generate_family(&Family::BipartiteFan { k: 2, q: 10 }).unwrap();
        let m = metric_closure(&inst);
        let cands = candidate_components(&m, None, 4);
        let x: BTreeSet<usize> = BTreeSet::from([0, 20, 21, 22]);
        let c = cands
            .iter()
            .find(|c| c.terminals == x)
            .expect("fan component");
        assert_eq!(c.cost, rat_int(4));
    }

    #[test]
    fn assemble_subdiv_triangle_mst() {
        let inst = generate_family(&Family::SubdivTriangle).unwrap();
        let m = metric_closure(&inst);
        let (mst_edges, _) = terminal_mst(&m);
        let log = ContractionLog::default();
        let tree = assemble_tree(&log, &inst, &mst_edges, &inst).unwrap();
        assert_eq!(tree.len(), 4);
        let cost: Rat = tree.iter().map(|&ei| inst.edges[ei].cost.clone()).sum();
        assert_eq!(cost, rat_int(4));
    }

    #[test]
    fn fully_contracted_instance() {
        // A forced capture can contract all terminals at once; the tree is
        // then the component alone.
        let inst = generate_family(&Family::Spider { k: 2, q: 1 }).unwrap();
        let mut cfg = SolveConfig::default();
        cfg.growth.delta = rat(3, 4);
        let r = scale_or_contract(&inst, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Ok);
        assert!(r.ratio.unwrap() <= rat(19_988, 10_000));
    }

    #[test]
    fn report_json_shape() {
        let r = solve(&Family::GapGadget);
        let j = r.to_json();
        assert_eq!(j["status"], "OK");
        assert_eq!(j["mst"], "8");
        assert_eq!(j["k"], 3);
        assert!(j["ratio"].is_string());
    }
}
