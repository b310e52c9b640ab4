//! Dual assignments for the cut relaxations: sparse maps from vertex sets to
//! positive rational values, plus feasibility checks and JSON encoding.

use std::collections::BTreeMap;

use num::traits::Zero;

use crate::instance::MetricInstance;
use crate::rat::{format_rat, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualKind {
    /// Sets separate terminals from other terminals (undirected relaxation).
    Ucr,
    /// Sets contain a terminal and exclude the root (bidirected relaxation).
    Bcr,
}

/// Canonical vertex-set key: sorted original vertex ids.
pub type SetKey = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualAssignment {
    pub kind: DualKind,
    /// Root vertex for bcr assignments.
    pub root: Option<usize>,
    pub entries: BTreeMap<SetKey, Rat>,
}

impl DualAssignment {
    pub fn new(kind: DualKind, root: Option<usize>) -> Self {
        DualAssignment {
            kind,
            root,
            entries: BTreeMap::new(),
        }
    }

    /// Add weight to a set, dropping zero entries.
    pub fn add(&mut self, key: SetKey, value: Rat) {
        if value.is_zero() {
            return;
        }
        let slot = self.entries.entry(key).or_insert_with(Rat::zero);
        *slot += value;
    }

    pub fn value(&self) -> Rat {
        self.entries.values().sum()
    }

    /// Support laminarity: each pair nested or disjoint.
    pub fn support_is_laminar(&self) -> bool {
        let sets: Vec<&SetKey> = self.entries.keys().collect();
        for (i, a) in sets.iter().enumerate() {
            for b in sets.iter().skip(i + 1) {
                let inter = intersect_count(a, b);
                if inter != 0 && inter != a.len() && inter != b.len() {
                    return false;
                }
            }
        }
        true
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self.kind {
            DualKind::Ucr => "ucr",
            DualKind::Bcr => "bcr",
        };
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|(set, value)| {
                serde_json::json!({
                    "set": set.iter().map(|v| v + 1).collect::<Vec<usize>>(),
                    "value": format_rat(value),
                })
            })
            .collect();
        serde_json::json!({
            "kind": kind,
            "root": self.root.map(|r| r + 1),
            "entries": entries,
        })
    }
}

fn intersect_count(a: &[usize], b: &[usize]) -> usize {
    let mut i = 0;
    let mut j = 0;
    let mut count = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

fn key_contains(key: &[usize], v: usize) -> bool {
    key.binary_search(&v).is_ok()
}

/// Outcome of a feasibility check: either feasible or a witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityVerdict {
    Feasible,
    /// Directed edge (u, v) whose constraint is violated, with load and cost.
    ViolatedEdge { u: usize, v: usize, load: Rat, cost: Rat },
    /// A support set breaks the variable domain.
    DomainViolation { set: SetKey, reason: String },
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible)
    }
}

/// Check `scale * d` against the rootless directed cut constraints over the
/// metric closure: for every directed closure edge (u, v), the scaled load of
/// sets with u inside and v outside must not exceed dist(u, v). Also enforces
/// the variable domain (every set meets R, none contains the root).
pub fn verify_dual_feasible(
    d: &DualAssignment,
    m: &MetricInstance,
    scale: &Rat,
) -> FeasibilityVerdict {
    let root = d.root.unwrap_or(m.base.root);
    let terminals = m.base.terminal_set();
    for set in d.entries.keys() {
        if key_contains(set, root) {
            return FeasibilityVerdict::DomainViolation {
                set: set.clone(),
                reason: "set contains root".into(),
            };
        }
        if !set.iter().any(|v| terminals.contains(v)) {
            return FeasibilityVerdict::DomainViolation {
                set: set.clone(),
                reason: "set contains no terminal".into(),
            };
        }
    }
    // Scan directed closure edges cheapest-first so the reported witness is
    // the tightest violated constraint.
    let n = m.base.vertex_count;
    let mut order: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (0..n).map(move |v| (u, v)))
        .filter(|(u, v)| u != v)
        .collect();
    order.sort_by(|a, b| m.dist(a.0, a.1).cmp(m.dist(b.0, b.1)).then(a.cmp(b)));
    for (u, v) in order {
        let mut load = Rat::zero();
        for (set, value) in &d.entries {
            if key_contains(set, u) && !key_contains(set, v) {
                load += value;
            }
        }
        load *= scale;
        let cost = m.dist(u, v);
        if load > *cost {
            return FeasibilityVerdict::ViolatedEdge {
                u,
                v,
                load,
                cost: cost.clone(),
            };
        }
    }
    FeasibilityVerdict::Feasible
}
