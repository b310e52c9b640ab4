//! Executable audits over growth traces: contribution ledgers, the chain
//! structure of contributing sets, the potential-function inequality, and
//! the tight-path length bound. Audits report verdicts; they never abort a
//! run.

use std::collections::{BTreeMap, BTreeSet};

use num::traits::{One, Zero};

use crate::error::Error;
use crate::gap::improvement_test;
use crate::growth::{extract_s_tight_path, GrowthTrace, TightPath};
use crate::instance::MetricInstance;
use crate::merge::MergeForest;
use crate::oracles::dw::{SteinerTable, DEFAULT_TERMINAL_CAP};
use crate::rat::{format_rat, rat, rat_int, Rat};
use crate::Result;

/// The constants of the analysis, as exact rationals.
#[derive(Debug, Clone)]
pub struct Constants {
    pub delta: Rat,
    pub gamma: Rat,
    pub eps_prime: Rat,
    pub beta: Rat,
    pub alpha: Rat,
    pub lambda: Rat,
    pub mu: Rat,
}

impl Constants {
    pub fn table1() -> Self {
        Constants {
            delta: rat(858, 100_000),
            gamma: rat(774, 10_000),
            eps_prime: rat(1, 10_000_000),
            beta: rat(7_249, 1_000),
            alpha: rat(2_081, 1_000),
            lambda: rat(2_004, 100_000),
            mu: rat(377, 1_000),
        }
    }

    /// The chain-separation constant
    /// M = (2/(1+g) - 1 - bd) / ((1+bd)^2/(1-bd) - (2/(1+g) - 1 - bd)).
    pub fn separation(&self) -> Rat {
        let one = Rat::one();
        let bd = &self.beta * &self.delta;
        let a = rat_int(2) / (&one + &self.gamma) - &one - &bd;
        let b = (&one + &bd) * (&one + &bd) / (&one - &bd) - &a;
        a / b
    }

    /// Exact identities the analysis depends on; each entry is
    /// (name, holds).
    pub fn sanity_checks(&self) -> Vec<(String, bool)> {
        let one = Rat::one();
        let m = self.separation();
        let bd = &self.beta * &self.delta;
        vec![
            (
                "separation constant within 1e-6 of 1.941792".into(),
                m >= rat(1_941_791, 1_000_000) && m <= rat(1_941_793, 1_000_000),
            ),
            (
                "(1-bd)/(1+bd) * M >= 1".into(),
                (&one - &bd) / (&one + &bd) * &m >= one.clone(),
            ),
            (
                "1/(1+gamma) - mu >= 0".into(),
                &one / (&one + &self.gamma) - &self.mu >= Rat::zero(),
            ),
            (
                "(1+delta)(1+lambda/mu) <= 1+beta*delta".into(),
                (&one + &self.delta) * (&one + &self.lambda / &self.mu) <= &one + &bd,
            ),
        ]
    }
}

/// Per-edge contribution amounts along a tight path, at the path's time.
#[derive(Debug, Clone)]
pub struct ContributionLedger {
    /// Path time t*: contributions are truncated here.
    pub t_star: Rat,
    /// Per path edge (in order): contributing set -> amount.
    pub per_edge: Vec<((usize, usize), BTreeMap<usize, Rat>)>,
}

/// Exact per-set contribution amounts for every edge of the path.
pub fn contribution_ledger(tr: &GrowthTrace, p: &TightPath) -> Result<ContributionLedger> {
    let t_star = p.time();
    let mut per_edge = vec![];
    for (a, b) in p.edges() {
        if !tr.tight_time.contains_key(&(a, b)) {
            return Err(Error::InconsistentPath(format!(
                "path edge ({}, {}) never became tight",
                a + 1,
                b + 1
            )));
        }
        let amounts = tr.contributors_until(a, b, &t_star);
        per_edge.push(((a, b), amounts));
    }
    Ok(ContributionLedger { t_star, per_edge })
}

#[derive(Debug, Clone)]
pub struct Chain {
    /// Forest set ids, innermost first (nested).
    pub sets: Vec<usize>,
    /// Common merge time with the path's start terminal.
    pub merge_time: Rat,
}

#[derive(Debug, Clone)]
pub struct ChainDecomposition {
    pub start_terminal: usize,
    pub t_star: Rat,
    pub chains: Vec<Chain>,
    /// Populated when nesting, disjointness, or M-separation fails.
    pub failure: Option<String>,
}

impl ChainDecomposition {
    pub fn is_pass(&self) -> bool {
        self.failure.is_none()
    }
}

/// Partition the sets that contributed to the path (and do not contain its
/// start terminal) into chains by their merge time with the start; verify
/// nesting, cross-chain disjointness and the M-separation.
pub fn chain_decomposition(
    tr: &GrowthTrace,
    f: &MergeForest,
    p: &TightPath,
) -> Result<ChainDecomposition> {
    let start = p.start();
    let ledger = contribution_ledger(tr, p)?;
    let mut contributing: BTreeSet<usize> = BTreeSet::new();
    for (_, amounts) in &ledger.per_edge {
        for (&sid, amount) in amounts {
            if !amount.is_zero() && !f.contains(sid, start) {
                contributing.insert(sid);
            }
        }
    }
    let mut by_merge: BTreeMap<Rat, Vec<usize>> = BTreeMap::new();
    for sid in contributing {
        let tm = f.merge_time_set(sid, start)?;
        by_merge.entry(tm).or_default().push(sid);
    }
    let mut chains = vec![];
    let mut failure: Option<String> = None;
    for (tm, mut sets) in by_merge {
        sets.sort_by_key(|&s| f.sets[s].members.len());
        // Nesting within a chain.
        for w in sets.windows(2) {
            let small = &f.sets[w[0]].members;
            let large = &f.sets[w[1]].members;
            if !small.iter().all(|m| large.binary_search(m).is_ok()) {
                failure = Some(format!(
                    "sets {:?} and {:?} share a merge time but are not nested",
                    small, large
                ));
            }
        }
        chains.push(Chain {
            sets,
            merge_time: tm,
        });
    }
    // Cross-chain disjointness and M-separation.
    let m_const = Constants {
        delta: tr.delta.clone(),
        ..Constants::table1()
    }
    .separation();
    for i in 0..chains.len() {
        for j in (i + 1)..chains.len() {
            for &a in &chains[i].sets {
                for &b in &chains[j].sets {
                    let ma = &f.sets[a].members;
                    let mb = &f.sets[b].members;
                    if ma.iter().any(|x| mb.binary_search(x).is_ok()) {
                        failure = Some(format!(
                            "chains {i} and {j} intersect on sets {:?} and {:?}",
                            ma, mb
                        ));
                    }
                }
            }
            if chains[j].merge_time <= &m_const * &chains[i].merge_time && failure.is_none() {
                failure = Some(format!(
                    "chains {i} ({}) and {j} ({}) violate M-separation",
                    format_rat(&chains[i].merge_time),
                    format_rat(&chains[j].merge_time)
                ));
            }
        }
    }
    Ok(ChainDecomposition {
        start_terminal: start,
        t_star: ledger.t_star,
        chains,
        failure,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AuditStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone)]
pub struct AuditVerdict {
    pub audit: String,
    pub status: AuditStatus,
    pub worst_witness: Option<String>,
    pub worst_ratio: Option<Rat>,
}

impl AuditVerdict {
    pub fn passed(&self) -> bool {
        self.status == AuditStatus::Pass
    }

    pub fn to_json(&self, instance: &str) -> serde_json::Value {
        serde_json::json!({
            "audit": self.audit,
            "instance": instance,
            "status": match self.status { AuditStatus::Pass => "PASS", AuditStatus::Fail => "FAIL" },
            "worst_witness": self.worst_witness,
            "worst_ratio": self.worst_ratio.as_ref().map(format_rat),
        })
    }
}

/// Potential of every vertex with respect to a chosen chain at time t*:
/// pi(v) = sum over chain sets of
/// max(0, min(t*, deactivation) - max(reach time, activation)).
pub fn potentials(
    tr: &GrowthTrace,
    f: &MergeForest,
    chain: &Chain,
    t_star: &Rat,
) -> Vec<Rat> {
    let n = tr.base_vertex_count;
    let mut pi = vec![Rat::zero(); n];
    for &sid in &chain.sets {
        let s = &f.sets[sid];
        let upper = match &s.deactivation {
            Some(d) => t_star.min(d).clone(),
            None => t_star.clone(),
        };
        let labels = crate::growth::reach_labels(tr, sid);
        for v in 0..n {
            let lower = match &labels[v] {
                Some(rt) => rt.clone().max(s.activation.clone()),
                None => continue, // unreachable: no contribution window
            };
            if upper > lower {
                pi[v] += &upper - lower;
            }
        }
    }
    pi
}

/// Check the potential inequality pi(w) - pi(v) <= zother - zchain on every
/// directed edge delta-tight by t*.
pub fn potential_audit(
    tr: &GrowthTrace,
    f: &MergeForest,
    decomp: &ChainDecomposition,
    chain_index: usize,
) -> AuditVerdict {
    let chain = &decomp.chains[chain_index];
    let t_star = &decomp.t_star;
    let pi = potentials(tr, f, chain, t_star);
    let chain_sets: BTreeSet<usize> = chain.sets.iter().copied().collect();
    let mut worst: Option<(Rat, String)> = None;
    let mut failed = false;
    for ((a, b), tt) in &tr.tight_time {
        if tt > t_star {
            continue;
        }
        let amounts = tr.contributors_until(*a, *b, t_star);
        let mut z_chain = Rat::zero();
        let mut z_other = Rat::zero();
        for (sid, amount) in amounts {
            if chain_sets.contains(&sid) {
                z_chain += amount;
            } else {
                z_other += amount;
            }
        }
        let lhs = &pi[*b] - &pi[*a];
        let rhs = &z_other - &z_chain;
        let slack = &rhs - &lhs;
        if slack < Rat::zero() {
            failed = true;
        }
        let witness = format!(
            "edge ({}, {}): pi diff {}, allowed {}",
            a + 1,
            b + 1,
            format_rat(&lhs),
            format_rat(&rhs)
        );
        if worst.as_ref().map(|(s, _)| slack < *s).unwrap_or(true) {
            worst = Some((slack, witness));
        }
    }
    AuditVerdict {
        audit: "potential".into(),
        status: if failed {
            AuditStatus::Fail
        } else {
            AuditStatus::Pass
        },
        worst_witness: worst.map(|(_, w)| w),
        worst_ratio: None,
    }
}

/// For every forest set and every vertex reached strictly before the set's
/// deactivation, the extracted tight path must satisfy
/// c(P) <= (1 + beta * delta) * reach time; additionally the contribution of
/// start-containing sets to each path edge is bounded by the reach-time
/// difference of its endpoints.
pub fn distance_bound_audit(
    tr: &GrowthTrace,
    f: &MergeForest,
    m: &MetricInstance,
    consts: &Constants,
) -> AuditVerdict {
    let bound_factor = Rat::one() + &consts.beta * &tr.delta;
    let mut worst_ratio: Option<Rat> = None;
    let mut worst_witness: Option<String> = None;
    let mut failed = false;
    for s in &f.sets {
        if f.has_root(s.id) {
            continue;
        }
        let d = match &s.deactivation {
            Some(d) => d.clone(),
            None => tr.t_max.clone(),
        };
        let labels = crate::growth::reach_labels(tr, s.id);
        for v in 0..tr.base_vertex_count {
            let Some(reach) = labels[v].clone() else {
                continue;
            };
            if reach >= d {
                continue;
            }
            let Ok(path) = extract_s_tight_path(tr, s.id, v) else {
                continue;
            };
            let cost = path.cost(m);
            if reach.is_zero() {
                // Zero-time reach means a zero-length path.
                if !cost.is_zero() {
                    failed = true;
                    worst_witness = Some(format!(
                        "set {:?} reaches {} at time 0 with positive path cost",
                        s.members, v + 1
                    ));
                }
                continue;
            }
            let ratio = &cost / &reach;
            if worst_ratio.as_ref().map(|w| ratio > *w).unwrap_or(true) {
                worst_ratio = Some(ratio.clone());
                worst_witness = Some(format!(
                    "set {:?} to vertex {}: c(P) = {}, t = {}",
                    s.members.iter().map(|x| x + 1).collect::<Vec<_>>(),
                    v + 1,
                    format_rat(&cost),
                    format_rat(&reach)
                ));
            }
            if cost > &bound_factor * &reach {
                failed = true;
            }
            // Contribution of start-containing sets per edge.
            let labels: Vec<Rat> = path.reach_times.clone();
            for (i, (a, b)) in path.edges().enumerate() {
                let mut start_contrib = Rat::zero();
                for (sid, amount) in tr.contributors_until(a, b, &reach) {
                    if f.contains(sid, path.start()) {
                        start_contrib += amount;
                    }
                }
                let allowed = &labels[i + 1] - &labels[i];
                if start_contrib > allowed {
                    failed = true;
                    worst_witness = Some(format!(
                        "edge ({}, {}): start-set contribution {} exceeds reach gap {}",
                        a + 1,
                        b + 1,
                        format_rat(&start_contrib),
                        format_rat(&allowed)
                    ));
                }
            }
        }
    }
    AuditVerdict {
        audit: "distance".into(),
        status: if failed {
            AuditStatus::Fail
        } else {
            AuditStatus::Pass
        },
        worst_witness,
        worst_ratio,
    }
}

/// Exhaustively verify local gamma-MST-optimality at component bound h:
/// returns a counterexample (X, component cost, drop) if one exists.
pub fn verify_local_optimality(
    m: &MetricInstance,
    f: &MergeForest,
    gamma: &Rat,
    h: usize,
) -> Result<Option<(BTreeSet<usize>, Rat, Rat)>> {
    let terms = m.base.terminals.clone();
    let k = terms.len();
    if k > DEFAULT_TERMINAL_CAP {
        return Err(Error::TerminalBound(k, DEFAULT_TERMINAL_CAP));
    }
    let table = SteinerTable::build(m, DEFAULT_TERMINAL_CAP)?;
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
        let cost = table.cost(&x)?;
        let xset: BTreeSet<usize> = x.iter().copied().collect();
        let comp = crate::gap::Component {
            edges: table.tree(&x)?,
            terminals: xset.clone(),
            cost: cost.clone(),
        };
        if improvement_test(f, &comp, gamma)? {
            let drop = crate::merge::drop_value(f, &xset)?;
            return Ok(Some((xset, cost, drop)));
        }
    }
    Ok(None)
}
