//! Exact LP values for the undirected and bidirected cut relaxations via
//! cutting planes: violated cuts found either by exhaustive enumeration over
//! all vertex subsets or by min-cut separation, constraints solved with the
//! exact simplex.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num::traits::{One, Zero};

use crate::error::Error;
use crate::instance::Instance;
use crate::oracles::maxflow::FlowNetwork;
use crate::oracles::simplex::{self, LpProblem};
use crate::rat::{format_rat, parse_rat, Rat};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relaxation {
    /// Cuts separate terminals from terminals (undirected edge variables).
    Ucr,
    /// Cuts contain a terminal, exclude the root (directed edge variables).
    Bcr { root: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LpSpec {
    pub relaxation: Relaxation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Violated cuts found by enumerating all vertex subsets (|V| <= 16).
    Enumerate,
    /// Violated cuts found by exact max-flow separation.
    Separate,
}

#[derive(Debug, Clone, Default)]
pub struct LpStats {
    pub pivots: usize,
    pub cuts_added: usize,
}

pub const ENUMERATE_VERTEX_CAP: usize = 16;
pub const SEPARATE_VERTEX_CAP: usize = 200;

struct CutLp<'a> {
    inst: &'a Instance,
    relaxation: Relaxation,
    /// Variable count: one per undirected edge (UCR) or per directed edge
    /// (BCR; variable 2e is u->v of canonical edge e, 2e+1 is v->u).
    nvars: usize,
}

impl<'a> CutLp<'a> {
    fn new(inst: &'a Instance, relaxation: Relaxation) -> Self {
        let m = inst.edges.len();
        let nvars = match relaxation {
            Relaxation::Ucr => m,
            Relaxation::Bcr { .. } => 2 * m,
        };
        CutLp {
            inst,
            relaxation,
            nvars,
        }
    }

    fn objective(&self) -> Vec<Rat> {
        match self.relaxation {
            Relaxation::Ucr => self.inst.edges.iter().map(|e| e.cost.clone()).collect(),
            Relaxation::Bcr { .. } => self
                .inst
                .edges
                .iter()
                .flat_map(|e| [e.cost.clone(), e.cost.clone()])
                .collect(),
        }
    }

    /// Constraint row for the cut at `inside` (boolean membership).
    fn row(&self, inside: &[bool]) -> Vec<Rat> {
        let mut row = vec![Rat::zero(); self.nvars];
        for (i, e) in self.inst.edges.iter().enumerate() {
            match self.relaxation {
                Relaxation::Ucr => {
                    if inside[e.u] != inside[e.v] {
                        row[i] = Rat::one();
                    }
                }
                Relaxation::Bcr { .. } => {
                    if inside[e.u] && !inside[e.v] {
                        row[2 * i] = Rat::one();
                    }
                    if inside[e.v] && !inside[e.u] {
                        row[2 * i + 1] = Rat::one();
                    }
                }
            }
        }
        row
    }

    fn cut_value(&self, inside: &[bool], x: &[Rat]) -> Rat {
        let mut total = Rat::zero();
        for (i, e) in self.inst.edges.iter().enumerate() {
            match self.relaxation {
                Relaxation::Ucr => {
                    if inside[e.u] != inside[e.v] && !x[i].is_zero() {
                        total += &x[i];
                    }
                }
                Relaxation::Bcr { .. } => {
                    if inside[e.u] && !inside[e.v] && !x[2 * i].is_zero() {
                        total += &x[2 * i];
                    }
                    if inside[e.v] && !inside[e.u] && !x[2 * i + 1].is_zero() {
                        total += &x[2 * i + 1];
                    }
                }
            }
        }
        total
    }

    fn mask_is_valid(&self, mask: u32) -> bool {
        let tset = self.inst.terminal_set();
        match self.relaxation {
            Relaxation::Ucr => {
                // U and its complement induce the same undirected cut; keep
                // the representative that excludes the highest vertex.
                if mask & (1 << (self.inst.vertex_count - 1)) != 0 {
                    return false;
                }
                let mut has_t = false;
                let mut misses_t = false;
                for &t in &tset {
                    if mask & (1 << t) != 0 {
                        has_t = true;
                    } else {
                        misses_t = true;
                    }
                }
                has_t && misses_t
            }
            Relaxation::Bcr { root } => {
                if mask & (1 << root) != 0 {
                    return false;
                }
                tset.iter().any(|&t| mask & (1 << t) != 0)
            }
        }
    }
}

fn mask_to_inside(mask: u32, n: usize) -> Vec<bool> {
    (0..n).map(|v| mask & (1 << v) != 0).collect()
}

/// Exact optimal value of the chosen relaxation on the instance's base graph.
pub fn lp_value(inst: &Instance, spec: &LpSpec, method: Method) -> Result<(Rat, LpStats)> {
    let n = inst.vertex_count;
    match method {
        Method::Enumerate if n > ENUMERATE_VERTEX_CAP => {
            return Err(Error::SizeBound(format!(
                "enumerate needs |V| <= {ENUMERATE_VERTEX_CAP}, got {n}"
            )))
        }
        Method::Separate if n > SEPARATE_VERTEX_CAP => {
            return Err(Error::SizeBound(format!(
                "separate needs |V| <= {SEPARATE_VERTEX_CAP}, got {n}"
            )))
        }
        _ => {}
    }
    if let Relaxation::Bcr { root } = spec.relaxation {
        if !inst.is_terminal(root) {
            return Err(Error::RootNotTerminal(root + 1));
        }
    }
    let lp = CutLp::new(inst, spec.relaxation);
    if inst.terminals.len() < 2 {
        return Ok((Rat::zero(), LpStats::default()));
    }

    // Initial cuts: singletons around the terminals.
    let mut cuts: Vec<Vec<bool>> = vec![];
    let mut cut_keys: BTreeSet<Vec<bool>> = BTreeSet::new();
    for &t in &inst.terminals {
        match spec.relaxation {
            Relaxation::Ucr => {}
            Relaxation::Bcr { root } => {
                if t == root {
                    continue;
                }
            }
        }
        let mut inside = vec![false; n];
        inside[t] = true;
        if spec.relaxation == Relaxation::Ucr && inst.terminals.len() < 2 {
            continue;
        }
        if cut_keys.insert(inside.clone()) {
            cuts.push(inside);
        }
    }
    let objective = lp.objective();
    let mut stats = LpStats::default();
    loop {
        let rows: Vec<(Vec<Rat>, Rat)> = cuts.iter().map(|c| (lp.row(c), Rat::one())).collect();
        let problem = LpProblem {
            objective: objective.clone(),
            rows,
        };
        let sol = simplex::solve(&problem)?;
        debug_assert!(simplex::verify_optimal(&problem, &sol));
        stats.pivots += sol.pivots;
        let violated = match method {
            Method::Enumerate => find_violated_enumerate(&lp, &sol.x),
            Method::Separate => find_violated_separate(&lp, &sol.x),
        };
        let mut added = false;
        for cut in violated {
            if cut_keys.insert(cut.clone()) {
                cuts.push(cut);
                stats.cuts_added += 1;
                added = true;
            }
        }
        if !added {
            return Ok((sol.value, stats));
        }
    }
}

fn find_violated_enumerate(lp: &CutLp, x: &[Rat]) -> Vec<Vec<bool>> {
    let n = lp.inst.vertex_count;
    let mut best: Option<(Rat, u32)> = None;
    for mask in 1u32..(1u32 << n) {
        if !lp.mask_is_valid(mask) {
            continue;
        }
        let inside = mask_to_inside(mask, n);
        let value = lp.cut_value(&inside, x);
        if value < Rat::one() {
            let better = match &best {
                None => true,
                Some((bv, _)) => value < *bv,
            };
            if better {
                best = Some((value, mask));
            }
        }
    }
    best.map(|(_, mask)| vec![mask_to_inside(mask, lp.inst.vertex_count)])
        .unwrap_or_default()
}

fn find_violated_separate(lp: &CutLp, x: &[Rat]) -> Vec<Vec<bool>> {
    let inst = lp.inst;
    let n = inst.vertex_count;
    let mut found = vec![];
    match lp.relaxation {
        Relaxation::Bcr { root } => {
            // Min cut from each terminal to the root over directed capacities.
            for &t in &inst.terminals {
                if t == root {
                    continue;
                }
                let mut net = FlowNetwork::new(n);
                for (i, e) in inst.edges.iter().enumerate() {
                    net.add_arc(e.u, e.v, x[2 * i].clone());
                    net.add_arc(e.v, e.u, x[2 * i + 1].clone());
                }
                let flow = net.max_flow(t, root);
                if flow < Rat::one() {
                    found.push(net.min_cut_source_side(t));
                }
            }
        }
        Relaxation::Ucr => {
            // Min terminal-separating cut equals the minimum over cuts from a
            // fixed terminal to every other terminal.
            let s0 = inst.terminals[0];
            for &t in &inst.terminals[1..] {
                let mut net = FlowNetwork::new(n);
                for (i, e) in inst.edges.iter().enumerate() {
                    net.add_arc(e.u, e.v, x[i].clone());
                    net.add_arc(e.v, e.u, x[i].clone());
                }
                let flow = net.max_flow(s0, t);
                if flow < Rat::one() {
                    found.push(net.min_cut_source_side(s0));
                }
            }
        }
    }
    found
}

// ---------------------------------------------------------------------------
// LP text export / import
// ---------------------------------------------------------------------------

fn var_names(inst: &Instance, relaxation: Relaxation) -> Vec<String> {
    let mut names = vec![];
    for e in &inst.edges {
        match relaxation {
            Relaxation::Ucr => names.push(format!("x_{}_{}", e.u + 1, e.v + 1)),
            Relaxation::Bcr { .. } => {
                names.push(format!("x_{}_{}", e.u + 1, e.v + 1));
                names.push(format!("x_{}_{}", e.v + 1, e.u + 1));
            }
        }
    }
    names
}

/// Write the full cut LP (every valid cut materialized) in LP text format.
/// Returns the number of lines written.
pub fn export_lp(inst: &Instance, spec: &LpSpec, sink: &mut dyn std::io::Write) -> Result<usize> {
    let n = inst.vertex_count;
    if n > ENUMERATE_VERTEX_CAP {
        return Err(Error::SizeBound(format!(
            "export needs |V| <= {ENUMERATE_VERTEX_CAP}, got {n}"
        )));
    }
    let lp = CutLp::new(inst, spec.relaxation);
    let names = var_names(inst, spec.relaxation);
    let objective = lp.objective();
    let mut text = String::new();
    text.push_str("Minimize\n");
    let obj_terms: Vec<String> = objective
        .iter()
        .zip(&names)
        .map(|(c, v)| format!("{} {}", format_rat(c), v))
        .collect();
    writeln!(text, " obj: {}", obj_terms.join(" + ")).unwrap();
    text.push_str("Subject To\n");
    for mask in 1u32..(1u32 << n) {
        if !lp.mask_is_valid(mask) {
            continue;
        }
        let inside = mask_to_inside(mask, n);
        let row = lp.row(&inside);
        let terms: Vec<String> = row
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| names[i].clone())
            .collect();
        let ids: Vec<String> = (0..n)
            .filter(|&v| inside[v])
            .map(|v| (v + 1).to_string())
            .collect();
        writeln!(text, " cut_{}: {} >= 1", ids.join("_"), terms.join(" + ")).unwrap();
    }
    text.push_str("Bounds\n");
    for name in &names {
        writeln!(text, " {name} >= 0").unwrap();
    }
    text.push_str("End\n");
    sink.write_all(text.as_bytes())?;
    Ok(text.lines().count())
}

/// Parse an LP text produced by `export_lp` and solve it exactly.
pub fn solve_lp_text(text: &str) -> Result<Rat> {
    enum Section {
        None,
        Objective,
        Constraints,
        Bounds,
    }
    let mut section = Section::None;
    let mut var_index: std::collections::BTreeMap<String, usize> = Default::default();
    let mut objective: Vec<Rat> = vec![];
    let mut rows: Vec<(Vec<(usize, Rat)>, Rat)> = vec![];
    let syntax = |line: usize, message: &str| Error::Syntax {
        line,
        message: message.to_string(),
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line {
            "Minimize" => {
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Constraints;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "End" => break,
            _ => {}
        }
        match section {
            Section::Objective => {
                let body = line
                    .split_once(':')
                    .ok_or_else(|| syntax(lineno, "objective needs a label"))?
                    .1;
                for term in body.split('+') {
                    let mut parts = term.split_whitespace();
                    let coeff = parts
                        .next()
                        .ok_or_else(|| syntax(lineno, "empty objective term"))?;
                    let coeff = parse_rat(coeff)?;
                    let var = parts
                        .next()
                        .ok_or_else(|| syntax(lineno, "objective term needs a variable"))?;
                    let next = var_index.len();
                    let vi = *var_index.entry(var.to_string()).or_insert(next);
                    if vi >= objective.len() {
                        objective.resize(vi + 1, Rat::zero());
                    }
                    objective[vi] = coeff;
                }
            }
            Section::Constraints => {
                let body = line
                    .split_once(':')
                    .ok_or_else(|| syntax(lineno, "constraint needs a label"))?
                    .1;
                let (lhs, rhs) = body
                    .split_once(">=")
                    .ok_or_else(|| syntax(lineno, "constraint needs >="))?;
                let rhs = parse_rat(rhs.trim())?;
                let mut terms = vec![];
                for term in lhs.split('+') {
                    let mut parts = term.split_whitespace().peekable();
                    let first = parts
                        .next()
                        .ok_or_else(|| syntax(lineno, "empty constraint term"))?;
                    let (coeff, var) = if parts.peek().is_some() {
                        (parse_rat(first)?, parts.next().unwrap().to_string())
                    } else {
                        (Rat::one(), first.to_string())
                    };
                    let vi = *var_index.get(&var).ok_or_else(|| {
                        syntax(lineno, &format!("unknown variable `{var}`"))
                    })?;
                    terms.push((vi, coeff));
                }
                rows.push((terms, rhs));
            }
            Section::Bounds | Section::None => {}
        }
    }
    let nvars = var_index.len();
    let rows: Vec<(Vec<Rat>, Rat)> = rows
        .into_iter()
        .map(|(terms, rhs)| {
            let mut row = vec![Rat::zero(); nvars];
            for (vi, c) in terms {
                row[vi] += c;
            }
            (row, rhs)
        })
        .collect();
    // Row generation: keep the working LP small, add imported rows only when
    // the current solution violates them.
    let mut active: Vec<usize> = vec![];
    let mut in_active = vec![false; rows.len()];
    loop {
        let problem = LpProblem {
            objective: objective.clone(),
            rows: active.iter().map(|&i| rows[i].clone()).collect(),
        };
        let sol = simplex::solve(&problem)?;
        debug_assert!(simplex::verify_optimal(&problem, &sol));
        // Most violated row only, to keep the working LP small.
        let mut worst: Option<(Rat, usize)> = None;
        for (i, (row, b)) in rows.iter().enumerate() {
            if in_active[i] {
                continue;
            }
            let ax: Rat = row
                .iter()
                .zip(&sol.x)
                .filter(|(a, _)| !a.is_zero())
                .map(|(a, x)| a * x)
                .sum();
            if ax < *b {
                let gap = b - ax;
                if worst.as_ref().map(|(g, _)| gap > *g).unwrap_or(true) {
                    worst = Some((gap, i));
                }
            }
        }
        match worst {
            Some((_, i)) => {
                in_active[i] = true;
                active.push(i);
            }
            None => return Ok(sol.value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_family, parse_instance, Family, Format};
    use crate::rat::{rat, rat_int};

    #[test]
    fn gap_gadget_bcr_value() {
        let inst = generate_family(&Family::GapGadget).unwrap();
        let spec = LpSpec {
            relaxation: Relaxation::Bcr { root: inst.root },
        };
        let (v, _) = lp_value(&inst, &spec, Method::Enumerate).unwrap();
        assert_eq!(v, rat(15, 2));
        let (v2, _) = lp_value(&inst, &spec, Method::Separate).unwrap();
        assert_eq!(v2, rat(15, 2));
    }

    #[test]
    fn subdiv_triangle_bcr_value() {
        let inst = generate_family(&Family::SubdivTriangle).unwrap();
        let spec = LpSpec {
            relaxation: Relaxation::Bcr { root: inst.root },
        };
        let (v, _) = lp_value(&inst, &spec, Method::Enumerate).unwrap();
        assert_eq!(v, rat_int(4));
    }

    #[test]
    fn all_terminal_cycle_values() {
        let inst = generate_family(&Family::Cycle { n: 6, k: 6 }).unwrap();
        let (u, _) = lp_value(
            &inst,
            &LpSpec {
                relaxation: Relaxation::Ucr,
            },
            Method::Enumerate,
        )
        .unwrap();
        assert_eq!(u, rat_int(3));
        let (b, _) = lp_value(
            &inst,
            &LpSpec {
                relaxation: Relaxation::Bcr { root: inst.root },
            },
            Method::Enumerate,
        )
        .unwrap();
        assert_eq!(b, rat_int(5));
    }

    #[test]
    fn export_and_reimport() {
        let inst = generate_family(&Family::SubdivTriangle).unwrap();
        let spec = LpSpec {
            relaxation: Relaxation::Bcr { root: inst.root },
        };
        let mut buf = vec![];
        let lines = export_lp(&inst, &spec, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(lines > 4);
        // 12 directed variables for the six base edges.
        assert_eq!(text.matches(">= 0").count(), 12);
        assert_eq!(solve_lp_text(&text).unwrap(), rat_int(4));
        // Byte-stable export.
        let mut buf2 = vec![];
        export_lp(&inst, &spec, &mut buf2).unwrap();
        assert_eq!(text.as_bytes(), buf2.as_slice());
    }

    #[test]
    fn two_vertex_ucr_export() {
        let inst = parse_instance(
            "nodes 2\nedge 1 2 3\nterminal 1\nterminal 2\nroot 1\n",
            Format::Native,
        )
        .unwrap();
        let mut buf = vec![];
        export_lp(
            &inst,
            &LpSpec {
                relaxation: Relaxation::Ucr,
            },
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches(">= 0").count(), 1);
        assert_eq!(text.matches("cut_").count(), 1);
        assert_eq!(solve_lp_text(&text).unwrap(), rat_int(3));
    }
}
