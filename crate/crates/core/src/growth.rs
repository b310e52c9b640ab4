//! Event-driven growth of the bidirected-cut dual: every active terminal set
//! grows its variable at unit rate on the set of vertices reachable by
//! delta-tight directed edges, until the terminal partition is connected or
//! the root is captured.
//!
//! Two modes share one engine. Continuous mode runs on the bidirected
//! closure graph directly: each closure edge carries two directed load
//! counters, a set loads a direction exactly when it contains the tail but
//! not the head, and the direction becomes traversable when its load reaches
//! cost/(1+delta). The moment the two penetration regions of an edge meet
//! mid-edge (tight lengths f + b = cost) is logged as an overlap-onset
//! event: from that point on an explicitly subdivided run can diverge,
//! because there sets stand on interior segment vertices. Subdivide mode
//! materializes those segments and applies the same tail-in/head-out rule to
//! them, then collapses the dual back to base vertex sets.

use std::collections::BTreeMap;

use num::traits::{One, Signed, Zero};

use crate::dual::{DualAssignment, DualKind};
use crate::error::Error;
use crate::instance::{subdivide_with_eps, epsilon_for, segment_budget, MetricInstance};
use crate::merge::MergeForest;
use crate::rat::{format_rat, rat, rat_int, Rat};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthMode {
    Continuous,
    Subdivide,
}

#[derive(Debug, Clone)]
pub struct GrowthConfig {
    pub delta: Rat,
    pub eps_prime: Rat,
    pub mode: GrowthMode,
    /// Root override; defaults to the instance root.
    pub root: Option<usize>,
    pub halt_on_capture: bool,
}

impl GrowthConfig {
    /// Defaults: delta = 0.00858, eps-prime = 1e-7, continuous mode, halt on
    /// capture.
    pub fn table1() -> Self {
        GrowthConfig {
            delta: rat(858, 100_000),
            eps_prime: rat(1, 10_000_000),
            mode: GrowthMode::Continuous,
            root: None,
            halt_on_capture: true,
        }
    }

    pub fn with_delta(delta: Rat) -> Self {
        GrowthConfig {
            delta,
            ..GrowthConfig::table1()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// A directed edge of the base graph became traversable.
    EdgeTight { from: usize, to: usize },
    /// Forward and reverse tight regions of an edge met mid-edge.
    OverlapOnset { u: usize, v: usize },
    /// New partition sets activated (their children deactivated).
    Merge { sets: Vec<usize> },
    /// The root became reachable from an active set.
    Capture { set: usize, root: usize },
    Finished,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time: Rat,
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthInterval {
    pub from: Rat,
    pub to: Rat,
    /// Reachable set (base vertices, sorted) grown during the interval.
    pub reach: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContributionSpan {
    pub set_id: usize,
    pub from: Rat,
    pub to: Rat,
}

#[derive(Debug, Clone)]
pub struct GrowthTrace {
    pub delta: Rat,
    pub mode: GrowthMode,
    pub root: usize,
    pub forest: MergeForest,
    pub base_vertex_count: usize,
    pub events: Vec<Event>,
    /// Per forest set: growth intervals with evolving reach snapshots.
    pub growth: BTreeMap<usize, Vec<GrowthInterval>>,
    /// Per directed base edge: who pumped it when.
    pub contributions: BTreeMap<(usize, usize), Vec<ContributionSpan>>,
    /// Per directed base edge: when it became traversable, if ever.
    pub tight_time: BTreeMap<(usize, usize), Rat>,
    pub captured: Vec<(usize, Rat)>,
    /// True when the run stopped before t_max.
    pub halted: bool,
    /// Time up to which the trace is complete.
    pub horizon: Rat,
    pub t_max: Rat,
    pub z: DualAssignment,
}

impl GrowthTrace {
    pub fn completed(&self) -> bool {
        !self.halted
    }

    /// Dual value and its (1+delta)-scaled companion.
    pub fn dual_value(&self) -> (Rat, Rat) {
        let v = self.z.value();
        let scaled = (Rat::one() + &self.delta) * &v;
        (v, scaled)
    }

    /// Total pump time on a directed edge by one set, truncated at `until`.
    pub fn contribution_until(&self, from: usize, to: usize, set_id: usize, until: &Rat) -> Rat {
        self.contributions
            .get(&(from, to))
            .map(|spans| {
                spans
                    .iter()
                    .filter(|s| s.set_id == set_id)
                    .map(|s| clip_len(&s.from, &s.to, until))
                    .sum()
            })
            .unwrap_or_else(Rat::zero)
    }

    /// All contributing sets of a directed edge with amounts truncated at
    /// `until`.
    pub fn contributors_until(&self, from: usize, to: usize, until: &Rat) -> BTreeMap<usize, Rat> {
        let mut out: BTreeMap<usize, Rat> = BTreeMap::new();
        if let Some(spans) = self.contributions.get(&(from, to)) {
            for s in spans {
                let len = clip_len(&s.from, &s.to, until);
                if !len.is_zero() {
                    *out.entry(s.set_id).or_insert_with(Rat::zero) += len;
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let events: Vec<serde_json::Value> = self
            .events
            .iter()
            .map(|e| {
                let (kind, detail) = match &e.kind {
                    EventKind::EdgeTight { from, to } => {
                        ("edge-tight", serde_json::json!({"from": from + 1, "to": to + 1}))
                    }
                    EventKind::OverlapOnset { u, v } => {
                        ("overlap-onset", serde_json::json!({"u": u + 1, "v": v + 1}))
                    }
                    EventKind::Merge { sets } => ("merge", serde_json::json!({"sets": sets})),
                    EventKind::Capture { set, root } => {
                        ("capture", serde_json::json!({"set": set, "root": root + 1}))
                    }
                    EventKind::Finished => ("finished", serde_json::json!({})),
                };
                serde_json::json!({"t": format_rat(&e.time), "kind": kind, "detail": detail})
            })
            .collect();
        let growth: Vec<serde_json::Value> = self
            .growth
            .iter()
            .map(|(sid, intervals)| {
                serde_json::json!({
                    "set": sid,
                    "members": self.forest.sets[*sid].members.iter().map(|v| v + 1).collect::<Vec<_>>(),
                    "intervals": intervals.iter().map(|iv| serde_json::json!({
                        "from": format_rat(&iv.from),
                        "to": format_rat(&iv.to),
                        "reach": iv.reach.iter().map(|v| v + 1).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let contributions: Vec<serde_json::Value> = self
            .contributions
            .iter()
            .map(|((a, b), spans)| {
                serde_json::json!({
                    "edge": [a + 1, b + 1],
                    "spans": spans.iter().map(|s| serde_json::json!({
                        "set": s.set_id,
                        "from": format_rat(&s.from),
                        "to": format_rat(&s.to),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        let tight: Vec<serde_json::Value> = self
            .tight_time
            .iter()
            .map(|((a, b), t)| serde_json::json!({"edge": [a + 1, b + 1], "t": format_rat(t)}))
            .collect();
        serde_json::json!({
            "delta": format_rat(&self.delta),
            "mode": match self.mode { GrowthMode::Continuous => "continuous", GrowthMode::Subdivide => "subdivide" },
            "root": self.root + 1,
            "forest": self.forest.to_json(),
            "t_max": format_rat(&self.t_max),
            "horizon": format_rat(&self.horizon),
            "halted": self.halted,
            "captures": self.captured.iter().map(|(s, t)| serde_json::json!({"set": s, "t": format_rat(t)})).collect::<Vec<_>>(),
            "events": events,
            "growth": growth,
            "contributions": contributions,
            "tight_times": tight,
            "z": self.z.to_json(),
        })
    }
}

fn clip_len(from: &Rat, to: &Rat, until: &Rat) -> Rat {
    let end = to.min(until);
    if end > from {
        end - from
    } else {
        Rat::zero()
    }
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

type Dir = (usize, usize); // (edge index, 0 = u->v, 1 = v->u)

struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(n: usize) -> Self {
        BitSet {
            words: vec![0; n.div_ceil(64)],
        }
    }
    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }
    fn get(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }
}

struct ActiveSet {
    set_id: usize,
    reach: BitSet,
    collapsed: Vec<usize>,
    interval_start: Rat,
    captured: bool,
}

struct Engine<'a> {
    forest: &'a MergeForest,
    root: usize,
    n: usize,
    n_base: usize,
    atomic: bool,
    halt_on_capture: bool,
    edge_ends: Vec<(usize, usize)>,
    target: Vec<Rat>,
    load: Vec<[Rat; 2]>,
    tight: Vec<[bool; 2]>,
    /// Per edge: whether the two penetration regions already met (log state).
    met_mid_edge: Vec<bool>,
    /// Per direction: the collapsed base directed edge it belongs to.
    collapse_dir: Vec<[(usize, usize); 2]>,
    /// Per collapsed base direction: total and tight segment counts.
    chain_total: BTreeMap<(usize, usize), usize>,
    chain_tight: BTreeMap<(usize, usize), usize>,
    tight_out: Vec<Vec<usize>>,
    active: Vec<ActiveSet>,
    // Output accumulators.
    events: Vec<Event>,
    growth: BTreeMap<usize, Vec<GrowthInterval>>,
    contributions: BTreeMap<(usize, usize), Vec<ContributionSpan>>,
    tight_time: BTreeMap<(usize, usize), Rat>,
    captured: Vec<(usize, Rat)>,
}

impl<'a> Engine<'a> {
    fn collapse(&self, reach: &BitSet) -> Vec<usize> {
        (0..self.n_base).filter(|&v| reach.get(v)).collect()
    }

    fn bfs_from(&self, members: &[usize]) -> BitSet {
        let mut reach = BitSet::new(self.n);
        let mut queue: Vec<usize> = vec![];
        for &m in members {
            if !reach.get(m) {
                reach.set(m);
                queue.push(m);
            }
        }
        while let Some(u) = queue.pop() {
            for &v in &self.tight_out[u] {
                if !reach.get(v) {
                    reach.set(v);
                    queue.push(v);
                }
            }
        }
        reach
    }

    /// Sets pumping direction d right now: the direction is in the outgoing
    /// boundary of their reachable set.
    fn pumpers(&self, d: Dir) -> Vec<usize> {
        let (e, side) = d;
        if self.tight[e][side] {
            return vec![];
        }
        let (u, v) = self.edge_ends[e];
        let (tail, head) = if side == 0 { (u, v) } else { (v, u) };
        self.active
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.captured && a.reach.get(tail) && !a.reach.get(head))
            .map(|(i, _)| i)
            .collect()
    }

    fn close_intervals(&mut self, now: &Rat, indices: Option<&[usize]>) {
        let idxs: Vec<usize> = match indices {
            Some(list) => list.to_vec(),
            // Frozen sets closed their last interval at capture time.
            None => (0..self.active.len())
                .filter(|&i| !self.active[i].captured)
                .collect(),
        };
        for i in idxs {
            let a = &mut self.active[i];
            if *now > a.interval_start {
                let list = self.growth.entry(a.set_id).or_default();
                if let Some(last) = list.last_mut() {
                    if last.to == a.interval_start && last.reach == a.collapsed {
                        last.to = now.clone();
                        a.interval_start = now.clone();
                        continue;
                    }
                }
                list.push(GrowthInterval {
                    from: a.interval_start.clone(),
                    to: now.clone(),
                    reach: a.collapsed.clone(),
                });
                a.interval_start = now.clone();
            } else {
                a.interval_start = now.clone();
            }
        }
    }

    fn record_contribution(&mut self, d: Dir, set_id: usize, from: &Rat, to: &Rat) {
        let (e, side) = d;
        let key = self.collapse_dir[e][side];
        let spans = self.contributions.entry(key).or_default();
        if let Some(last) = spans.last_mut() {
            if last.set_id == set_id && last.to == *from {
                last.to = to.clone();
                return;
            }
        }
        // Keep spans per set mergeable: search backwards for an adjacent span
        // of the same set (different sets may interleave within a batch).
        for s in spans.iter_mut().rev() {
            if s.set_id == set_id && s.to == *from {
                s.to = to.clone();
                return;
            }
            if s.to < *from {
                break;
            }
        }
        spans.push(ContributionSpan {
            set_id,
            from: from.clone(),
            to: to.clone(),
        });
    }

    /// Mark a direction tight at `now`; update the tight digraph and the
    /// collapsed chain counters, logging a collapsed edge-tight event when a
    /// base direction completes.
    fn mark_tight(&mut self, d: Dir, now: &Rat) {
        let (e, side) = d;
        if self.tight[e][side] {
            return;
        }
        self.tight[e][side] = true;
        let (u, v) = self.edge_ends[e];
        let (tail, head) = if side == 0 { (u, v) } else { (v, u) };
        self.tight_out[tail].push(head);
        let key = self.collapse_dir[e][side];
        let cnt = self.chain_tight.entry(key).or_insert(0);
        *cnt += 1;
        if *cnt == self.chain_total[&key] {
            self.tight_time.insert(key, now.clone());
            self.events.push(Event {
                time: now.clone(),
                kind: EventKind::EdgeTight {
                    from: key.0,
                    to: key.1,
                },
            });
        }
    }
}

/// Run the dual growth. The forest must come from the same metric instance.
pub fn run_growth(m: &MetricInstance, f: &MergeForest, cfg: &GrowthConfig) -> Result<GrowthTrace> {
    if m.base.terminals.len() < 2 {
        return Err(Error::TooFewTerminals(2));
    }
    if cfg.delta <= Rat::zero() {
        return Err(Error::Invalid("delta must be positive".into()));
    }
    let root = cfg.root.unwrap_or(m.base.root);
    if !m.base.is_terminal(root) {
        return Err(Error::RootNotTerminal(root + 1));
    }
    let n_base = m.base.vertex_count;
    let one_plus = Rat::one() + &cfg.delta;

    // Build the growth graph: closure pairs (continuous) or their segments.
    let mut edge_ends: Vec<(usize, usize)> = vec![];
    let mut costs: Vec<Rat> = vec![];
    let mut collapse_dir: Vec<[(usize, usize); 2]> = vec![];
    let n_total;
    let atomic;
    match cfg.mode {
        GrowthMode::Continuous => {
            for u in 0..n_base {
                for v in (u + 1)..n_base {
                    edge_ends.push((u, v));
                    costs.push(m.dist[u][v].clone());
                    collapse_dir.push([(u, v), (v, u)]);
                }
            }
            n_total = n_base;
            atomic = false;
        }
        GrowthMode::Subdivide => {
            let complete = m.to_complete_instance();
            let eps = epsilon_for(m, &cfg.eps_prime)?;
            let sg = subdivide_with_eps(&complete, &eps, segment_budget())?;
            for (si, seg) in sg.segments.iter().enumerate() {
                edge_ends.push((seg.u, seg.v));
                costs.push(seg.cost.clone());
                // Segment orientation follows the build order from e.u to e.v.
                let ei = segment_base_edge(&sg, si);
                let e = &complete.edges[ei];
                collapse_dir.push([(e.u, e.v), (e.v, e.u)]);
            }
            n_total = sg.vertex_count;
            atomic = true;
        }
    }
    let mut chain_total: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for c in &collapse_dir {
        for key in c {
            *chain_total.entry(*key).or_insert(0) += 1;
        }
    }
    let target: Vec<Rat> = costs.iter().map(|c| c / &one_plus).collect();
    let m_edges = edge_ends.len();
    let mut engine = Engine {
        forest: f,
        root,
        n: n_total,
        n_base,
        atomic,
        halt_on_capture: cfg.halt_on_capture,
        edge_ends,
        target,
        load: vec![[Rat::zero(), Rat::zero()]; m_edges],
        tight: vec![[false, false]; m_edges],
        met_mid_edge: vec![false; m_edges],
        collapse_dir,
        chain_total,
        chain_tight: BTreeMap::new(),
        tight_out: vec![vec![]; n_total],
        active: vec![],
        events: vec![],
        growth: BTreeMap::new(),
        contributions: BTreeMap::new(),
        tight_time: BTreeMap::new(),
        captured: vec![],
    };

    let t_max = f.t_max.clone();
    let mut t = Rat::zero();
    let mut halted = false;

    // Activate time-zero sets.
    let mut forest_events = f.event_times();
    forest_events.retain(|ft| ft < &t_max);
    let mut next_forest = 0usize;
    activate_sets(&mut engine, &t, root);
    detect_captures(&mut engine, &t, &mut halted);

    while !halted && t < t_max {
        // Rates and candidate times.
        let mut pumping: Vec<(Dir, Vec<usize>)> = vec![];
        let mut best: Option<Rat> = None;
        for e in 0..engine.edge_ends.len() {
            for side in 0..2 {
                let d = (e, side);
                if engine.tight[e][side] {
                    continue;
                }
                let who = engine.pumpers(d);
                if who.is_empty() {
                    continue;
                }
                let slack = &engine.target[e] - &engine.load[e][side];
                let eta = &t + slack / rat_int(who.len() as i64);
                if best.as_ref().map(|b| eta < *b).unwrap_or(true) {
                    best = Some(eta);
                }
                pumping.push((d, who));
            }
        }
        // Overlap onsets (continuous mode only): the instant forward and
        // reverse penetration meet mid-edge, logged while some active set
        // stands at both endpoints (the regime where a subdivided run can
        // start to diverge from this one).
        if !engine.atomic {
            for e in 0..engine.edge_ends.len() {
                if engine.met_mid_edge[e] || engine.tight[e][0] || engine.tight[e][1] {
                    continue;
                }
                let (u, v) = engine.edge_ends[e];
                let both = engine
                    .active
                    .iter()
                    .any(|a| !a.captured && a.reach.get(u) && a.reach.get(v));
                if !both {
                    continue;
                }
                let r0 = pumping
                    .iter()
                    .find(|(d, _)| *d == (e, 0))
                    .map(|(_, w)| w.len())
                    .unwrap_or(0);
                let r1 = pumping
                    .iter()
                    .find(|(d, _)| *d == (e, 1))
                    .map(|(_, w)| w.len())
                    .unwrap_or(0);
                if r0 + r1 == 0 {
                    continue;
                }
                let slack = &engine.target[e] - &engine.load[e][0] - &engine.load[e][1];
                if slack.is_negative() {
                    continue;
                }
                let eta = &t + slack / rat_int((r0 + r1) as i64);
                if best.as_ref().map(|b| eta < *b).unwrap_or(true) {
                    best = Some(eta);
                }
            }
        }
        let forest_t = forest_events.get(next_forest).cloned();
        let mut t_next = t_max.clone();
        if let Some(e) = best {
            t_next = t_next.min(e);
        }
        if let Some(ft) = &forest_t {
            t_next = t_next.min(ft.clone());
        }
        let delta_t = &t_next - &t;
        debug_assert!(!delta_t.is_negative());

        // Advance loads and record contributions.
        if delta_t.is_positive() {
            for (d, who) in &pumping {
                let add = rat_int(who.len() as i64) * &delta_t;
                engine.load[d.0][d.1] += &add;
                for &ai in who {
                    let set_id = engine.active[ai].set_id;
                    engine.record_contribution(*d, set_id, &t, &t_next);
                }
            }
        }
        let now = t_next;
        t = now.clone();

        // Newly tight directions and overlap states, in deterministic order.
        let mut newly_tight: Vec<Dir> = vec![];
        for e in 0..engine.edge_ends.len() {
            for side in 0..2 {
                if !engine.tight[e][side] && engine.load[e][side] == engine.target[e] {
                    newly_tight.push((e, side));
                }
            }
        }
        newly_tight.sort_by_key(|&(e, side)| {
            let key = engine.collapse_dir[e][side];
            (key, engine.edge_ends[e], side)
        });
        for d in newly_tight {
            engine.mark_tight(d, &now);
        }
        if !engine.atomic {
            for e in 0..engine.edge_ends.len() {
                if !engine.met_mid_edge[e]
                    && &engine.load[e][0] + &engine.load[e][1] >= engine.target[e]
                {
                    engine.met_mid_edge[e] = true;
                    // Only log onsets that close mid-edge; a fully tight
                    // direction is already an edge-tight event.
                    if !engine.tight[e][0] && !engine.tight[e][1] {
                        let (u, v) = engine.edge_ends[e];
                        let both = engine
                            .active
                            .iter()
                            .any(|a| !a.captured && a.reach.get(u) && a.reach.get(v));
                        if both {
                            engine.events.push(Event {
                                time: now.clone(),
                                kind: EventKind::OverlapOnset { u, v },
                            });
                        }
                    }
                }
            }
        }

        if t == t_max {
            engine.close_intervals(&t_max, None);
            break;
        }

        // Forest merges at this instant.
        if forest_t.as_ref() == Some(&t) {
            next_forest += 1;
            engine.close_intervals(&t, None);
            deactivate_merged(&mut engine, &t);
            activate_sets(&mut engine, &t, root);
        }

        // Reach closures, then interval snapshots, then captures.
        refresh_reaches(&mut engine, &t);
        detect_captures(&mut engine, &t, &mut halted);
    }

    if !halted {
        engine.close_intervals(&t_max, None);
        engine.events.push(Event {
            time: t_max.clone(),
            kind: EventKind::Finished,
        });
    }
    let horizon = if halted { t.clone() } else { t_max.clone() };

    // Assemble z from the growth intervals.
    let mut z = DualAssignment::new(DualKind::Bcr, Some(root));
    for intervals in engine.growth.values() {
        for iv in intervals {
            z.add(iv.reach.clone(), &iv.to - &iv.from);
        }
    }
    Ok(GrowthTrace {
        delta: cfg.delta.clone(),
        mode: cfg.mode,
        root,
        forest: f.clone(),
        base_vertex_count: n_base,
        events: engine.events,
        growth: engine.growth,
        contributions: engine.contributions,
        tight_time: engine.tight_time,
        captured: engine.captured,
        halted,
        horizon,
        t_max,
        z,
    })
}

fn segment_base_edge(sg: &crate::instance::SubdividedGraph, seg_idx: usize) -> usize {
    let mut count = 0;
    for (ei, inner) in sg.interior.iter().enumerate() {
        let segs = inner.len() + 1;
        if seg_idx < count + segs {
            return ei;
        }
        count += segs;
    }
    unreachable!("segment index out of range")
}

fn activate_sets(engine: &mut Engine, t: &Rat, root: usize) {
    let mut activated = vec![];
    for s in &engine.forest.sets {
        if s.activation == *t
            && s.members.binary_search(&root).is_err()
            && engine.active.iter().all(|a| a.set_id != s.id)
        {
            activated.push(s.id);
        }
    }
    activated.sort();
    if !activated.is_empty() && !t.is_zero() {
        engine.events.push(Event {
            time: t.clone(),
            kind: EventKind::Merge {
                sets: activated.clone(),
            },
        });
    }
    for sid in activated {
        let members = engine.forest.sets[sid].members.clone();
        let reach = engine.bfs_from(&members);
        let collapsed = engine.collapse(&reach);
        engine.active.push(ActiveSet {
            set_id: sid,
            reach,
            collapsed,
            interval_start: t.clone(),
            captured: false,
        });
    }
    engine.active.sort_by_key(|a| a.set_id);
}

fn deactivate_merged(engine: &mut Engine, t: &Rat) {
    engine.active.retain(|a| {
        let d = &engine.forest.sets[a.set_id].deactivation;
        match d {
            Some(d) => d > t,
            None => true,
        }
    });
}

fn refresh_reaches(engine: &mut Engine, t: &Rat) {
    for i in 0..engine.active.len() {
        if engine.active[i].captured {
            continue;
        }
        let members = engine.forest.sets[engine.active[i].set_id].members.clone();
        let reach = engine.bfs_from(&members);
        let collapsed = engine.collapse(&reach);
        if collapsed != engine.active[i].collapsed {
            engine.close_intervals(t, Some(&[i]));
            engine.active[i].reach = reach;
            engine.active[i].collapsed = collapsed;
        } else {
            engine.active[i].reach = reach;
        }
    }
}

fn detect_captures(engine: &mut Engine, t: &Rat, halted: &mut bool) {
    let root = engine.root;
    let mut hit = vec![];
    for (i, a) in engine.active.iter().enumerate() {
        if !a.captured && a.reach.get(root) {
            hit.push(i);
        }
    }
    for &i in &hit {
        let sid = engine.active[i].set_id;
        engine.events.push(Event {
            time: t.clone(),
            kind: EventKind::Capture { set: sid, root },
        });
        engine.captured.push((sid, t.clone()));
        engine.close_intervals(t, Some(&[i]));
        engine.active[i].captured = true;
    }
    if !hit.is_empty() && engine.halt_on_capture {
        engine.close_intervals(t, None);
        *halted = true;
    }
}

// ---------------------------------------------------------------------------
// Reach times and tight paths
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct TightPath {
    pub set_id: usize,
    /// Vertex sequence from a member terminal to the endpoint.
    pub vertices: Vec<usize>,
    /// Tight time per edge (parallel to vertices minus one).
    pub edge_tight_times: Vec<Rat>,
    /// First-reach time per vertex on the path.
    pub reach_times: Vec<Rat>,
}

impl TightPath {
    pub fn start(&self) -> usize {
        self.vertices[0]
    }
    pub fn end(&self) -> usize {
        *self.vertices.last().unwrap()
    }
    pub fn time(&self) -> Rat {
        self.reach_times.last().cloned().unwrap_or_else(Rat::zero)
    }
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
    pub fn cost(&self, m: &MetricInstance) -> Rat {
        self.edges().map(|(u, v)| m.dist[u][v].clone()).sum()
    }
}

/// Bottleneck reach labels from a forest set over the trace's tight-time
/// edge labels: `labels[v]` is the first time v is reachable from the set by
/// traversable edges, with deterministic predecessors.
fn minimax_labels(
    tr: &GrowthTrace,
    set_id: usize,
) -> (Vec<Option<Rat>>, Vec<Option<usize>>) {
    let n = tr.base_vertex_count;
    let members = &tr.forest.sets[set_id].members;
    let mut dist: Vec<Option<Rat>> = vec![None; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    for &s in members {
        dist[s] = Some(Rat::zero());
    }
    loop {
        let mut cur: Option<usize> = None;
        for v in 0..n {
            if done[v] || dist[v].is_none() {
                continue;
            }
            let better = match cur {
                None => true,
                Some(c) => dist[v].as_ref().unwrap() < dist[c].as_ref().unwrap(),
            };
            if better {
                cur = Some(v);
            }
        }
        let Some(u) = cur else { break };
        done[u] = true;
        let du = dist[u].clone().unwrap();
        for v in 0..n {
            if done[v] || v == u {
                continue;
            }
            let Some(tt) = tr.tight_time.get(&(u, v)) else {
                continue;
            };
            let cand = du.clone().max(tt.clone());
            let better = match &dist[v] {
                None => true,
                Some(b) => cand < *b,
            };
            if better {
                dist[v] = Some(cand);
                pred[v] = Some(u);
            }
        }
    }
    (dist, pred)
}

/// First time `v` is reachable from the forest set by delta-tight edges, or
/// `None` if it never happens before the trace horizon.
pub fn reach_time(tr: &GrowthTrace, set_id: usize, v: usize) -> Option<Rat> {
    let (dist, _) = minimax_labels(tr, set_id);
    dist[v].clone()
}

/// Reach times of every vertex from the forest set (one bottleneck sweep).
pub fn reach_labels(tr: &GrowthTrace, set_id: usize) -> Vec<Option<Rat>> {
    minimax_labels(tr, set_id).0
}

/// Extract a tight path realizing the first reach of `v` from the set: every
/// edge is delta-tight by the head's reach time and reach times are
/// nondecreasing along the path.
pub fn extract_s_tight_path(tr: &GrowthTrace, set_id: usize, v: usize) -> Result<TightPath> {
    let (dist, pred) = minimax_labels(tr, set_id);
    if dist[v].is_none() {
        return Err(Error::Unreachable(v + 1));
    }
    let mut vertices = vec![v];
    let mut cur = v;
    while let Some(p) = pred[cur] {
        vertices.push(p);
        cur = p;
    }
    vertices.reverse();
    let reach_times: Vec<Rat> = vertices
        .iter()
        .map(|&u| dist[u].clone().unwrap())
        .collect();
    let edge_tight_times: Vec<Rat> = vertices
        .windows(2)
        .map(|w| tr.tight_time[&(w[0], w[1])].clone())
        .collect();
    // Tightness sanity: head reach time dominates the edge tight time and the
    // tail reach time.
    for (i, w) in vertices.windows(2).enumerate() {
        debug_assert!(edge_tight_times[i] <= reach_times[i + 1]);
        debug_assert!(reach_times[i] <= reach_times[i + 1]);
        let _ = w;
    }
    Ok(TightPath {
        set_id,
        vertices,
        edge_tight_times,
        reach_times,
    })
}
