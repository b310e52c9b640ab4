//! Weighted Steiner tree instances: parsing, generation, metric closure,
//! contraction and subdivision.
//!
//! Vertices are 0-based internally; the text formats and all JSON output use
//! 1-based ids.

use std::collections::{BTreeMap, BTreeSet};

use num::traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::rat::{self, parse_rat, rat, rat_int, Rat};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: Rat,
}

/// An undirected graph with positive rational edge costs, a terminal set and
/// a root terminal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub vertex_count: usize,
    pub edges: Vec<Edge>,
    /// Terminal ids in input order.
    pub terminals: Vec<usize>,
    pub root: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Native,
    Stp,
}

impl Instance {
    pub fn new(
        vertex_count: usize,
        mut edges: Vec<Edge>,
        terminals: Vec<usize>,
        root: usize,
    ) -> Result<Self> {
        // Canonical form: endpoints ordered, edge list sorted. Keeps
        // equality, rendering and edge indexing stable across sources.
        for e in &mut edges {
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
        }
        edges.sort_by(|a, b| (a.u, a.v).cmp(&(b.u, b.v)));
        let inst = Instance {
            vertex_count,
            edges,
            terminals,
            root,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<()> {
        let n = self.vertex_count;
        if n == 0 {
            return Err(Error::Invalid("instance has no vertices".into()));
        }
        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.u >= n {
                return Err(Error::BadVertex(e.u + 1));
            }
            if e.v >= n {
                return Err(Error::BadVertex(e.v + 1));
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u + 1));
            }
            if e.cost <= Rat::zero() {
                return Err(Error::NonpositiveCost(e.u + 1, e.v + 1));
            }
            let key = (e.u.min(e.v), e.u.max(e.v));
            if !seen.insert(key) {
                return Err(Error::DuplicateEdge(key.0 + 1, key.1 + 1));
            }
        }
        let tset: BTreeSet<usize> = self.terminals.iter().copied().collect();
        if tset.len() != self.terminals.len() {
            return Err(Error::Invalid("duplicate terminal".into()));
        }
        for &t in &self.terminals {
            if t >= n {
                return Err(Error::BadVertex(t + 1));
            }
        }
        if !tset.contains(&self.root) {
            return Err(Error::RootNotTerminal(self.root + 1));
        }
        // Connectivity.
        let mut adj = vec![vec![]; n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        if count != n {
            return Err(Error::Disconnected);
        }
        Ok(())
    }

    pub fn terminal_set(&self) -> BTreeSet<usize> {
        self.terminals.iter().copied().collect()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        self.terminals.contains(&v)
    }

    /// Edge list as an adjacency structure with edge indices.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![vec![]; self.vertex_count];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        adj
    }
}

/// An instance together with exact all-pairs shortest-path distances.
#[derive(Debug, Clone)]
pub struct MetricInstance {
    pub base: Instance,
    pub dist: Vec<Vec<Rat>>,
}

impl MetricInstance {
    pub fn dist(&self, u: usize, v: usize) -> &Rat {
        &self.dist[u][v]
    }

    /// The complete graph on the base vertices with closure distances, as an
    /// ordinary instance (used by subdivide-mode growth).
    pub fn to_complete_instance(&self) -> Instance {
        let n = self.base.vertex_count;
        let mut edges = Vec::with_capacity(n * (n - 1) / 2);
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push(Edge {
                    u,
                    v,
                    cost: self.dist[u][v].clone(),
                });
            }
        }
        Instance {
            vertex_count: n,
            edges,
            terminals: self.base.terminals.clone(),
            root: self.base.root,
        }
    }
}

/// All-pairs shortest paths by Floyd-Warshall over exact rationals.
pub fn metric_closure(inst: &Instance) -> MetricInstance {
    let n = inst.vertex_count;
    let mut dist: Vec<Vec<Option<Rat>>> = vec![vec![None; n]; n];
    for v in 0..n {
        dist[v][v] = Some(Rat::zero());
    }
    for e in &inst.edges {
        let better = match &dist[e.u][e.v] {
            Some(d) => e.cost < *d,
            None => true,
        };
        if better {
            dist[e.u][e.v] = Some(e.cost.clone());
            dist[e.v][e.u] = Some(e.cost.clone());
        }
    }
    for k in 0..n {
        for i in 0..n {
            if i == k {
                continue;
            }
            let dik = match &dist[i][k] {
                Some(d) => d.clone(),
                None => continue,
            };
            for j in 0..n {
                let dkj = match &dist[k][j] {
                    Some(d) => d,
                    None => continue,
                };
                let cand = &dik + dkj;
                let better = match &dist[i][j] {
                    Some(d) => cand < *d,
                    None => true,
                };
                if better {
                    dist[i][j] = Some(cand);
                }
            }
        }
    }
    let dist = dist
        .into_iter()
        .map(|row| row.into_iter().map(|d| d.expect("connected")).collect())
        .collect();
    MetricInstance {
        base: inst.clone(),
        dist,
    }
}

/// Deterministic shortest path between two vertices in the base graph (ties
/// broken toward smaller predecessor ids). Returns the edge indices.
pub fn shortest_path_edges(inst: &Instance, from: usize, to: usize) -> Vec<usize> {
    let n = inst.vertex_count;
    let adj = inst.adjacency();
    let mut best: Vec<Option<Rat>> = vec![None; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n]; // (vertex, edge idx)
    best[from] = Some(Rat::zero());
    let mut done = vec![false; n];
    loop {
        let mut cur: Option<usize> = None;
        for v in 0..n {
            if done[v] || best[v].is_none() {
                continue;
            }
            match cur {
                None => cur = Some(v),
                Some(c) => {
                    if best[v].as_ref().unwrap() < best[c].as_ref().unwrap() {
                        cur = Some(v)
                    }
                }
            }
        }
        let Some(u) = cur else { break };
        done[u] = true;
        if u == to {
            break;
        }
        let du = best[u].clone().unwrap();
        for &(v, ei) in &adj[u] {
            if done[v] {
                continue;
            }
            let cand = &du + &inst.edges[ei].cost;
            let better = match &best[v] {
                None => true,
                Some(b) => cand < *b || (cand == *b && pred[v].map(|(p, _)| u < p).unwrap_or(false)),
            };
            if better {
                best[v] = Some(cand);
                pred[v] = Some((u, ei));
            }
        }
    }
    let mut path = vec![];
    let mut cur = to;
    while cur != from {
        let (p, ei) = pred[cur].expect("connected");
        path.push(ei);
        cur = p;
    }
    path.reverse();
    path
}

// ---------------------------------------------------------------------------
// Parsing and rendering
// ---------------------------------------------------------------------------

pub fn parse_instance(text: &str, format: Format) -> Result<Instance> {
    match format {
        Format::Native => parse_native(text),
        Format::Stp => parse_stp(text, None),
    }
}

/// STP parse with an optional root override (1-based id).
pub fn parse_stp_with_root(text: &str, root: Option<usize>) -> Result<Instance> {
    parse_stp(text, root)
}

fn parse_native(text: &str) -> Result<Instance> {
    let mut n: Option<usize> = None;
    let mut edges = vec![];
    let mut terminals = vec![];
    let mut root: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let kw = parts.next().unwrap();
        let syntax = |message: &str| Error::Syntax {
            line: lineno,
            message: message.to_string(),
        };
        match kw {
            "nodes" => {
                let v: usize = parts
                    .next()
                    .ok_or_else(|| syntax("nodes needs a count"))?
                    .parse()
                    .map_err(|_| syntax("bad node count"))?;
                n = Some(v);
            }
            "edge" => {
                let u: usize = parts
                    .next()
                    .ok_or_else(|| syntax("edge needs two endpoints"))?
                    .parse()
                    .map_err(|_| syntax("bad vertex id"))?;
                let v: usize = parts
                    .next()
                    .ok_or_else(|| syntax("edge needs two endpoints"))?
                    .parse()
                    .map_err(|_| syntax("bad vertex id"))?;
                let c = parts.next().ok_or_else(|| syntax("edge needs a cost"))?;
                let cost = parse_rat(c).map_err(|_| syntax("bad cost"))?;
                if u == 0 || v == 0 {
                    return Err(syntax("vertex ids are 1-based"));
                }
                edges.push(Edge {
                    u: u - 1,
                    v: v - 1,
                    cost,
                });
            }
            "terminal" => {
                let t: usize = parts
                    .next()
                    .ok_or_else(|| syntax("terminal needs an id"))?
                    .parse()
                    .map_err(|_| syntax("bad terminal id"))?;
                if t == 0 {
                    return Err(syntax("vertex ids are 1-based"));
                }
                terminals.push(t - 1);
            }
            "root" => {
                if root.is_some() {
                    return Err(syntax("duplicate root line"));
                }
                let r: usize = parts
                    .next()
                    .ok_or_else(|| syntax("root needs an id"))?
                    .parse()
                    .map_err(|_| syntax("bad root id"))?;
                if r == 0 {
                    return Err(syntax("vertex ids are 1-based"));
                }
                root = Some(r - 1);
            }
            other => {
                return Err(syntax(&format!("unknown declaration `{other}`")));
            }
        }
        if parts.next().is_some() {
            return Err(Error::Syntax {
                line: lineno,
                message: "trailing tokens".into(),
            });
        }
    }
    let n = n.ok_or_else(|| Error::Syntax {
        line: 0,
        message: "missing nodes line".into(),
    })?;
    let root = root.ok_or_else(|| Error::Syntax {
        line: 0,
        message: "missing root line".into(),
    })?;
    Instance::new(n, edges, terminals, root)
}

fn parse_stp(text: &str, root_override: Option<usize>) -> Result<Instance> {
    let mut n: Option<usize> = None;
    let mut edges = vec![];
    let mut terminals: Vec<usize> = vec![];
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let kw = parts.next().unwrap();
        let syntax = |message: &str| Error::Syntax {
            line: lineno,
            message: message.to_string(),
        };
        match kw {
            "SECTION" | "END" | "EOF" | "Edges" | "Terminals" | "33D32945" | "OBSTACLES" => {
                // Section markers and counts we do not need; `Edges`/`Terminals`
                // counts are validated implicitly by the built instance.
            }
            "Nodes" => {
                let v: usize = parts
                    .next()
                    .ok_or_else(|| syntax("Nodes needs a count"))?
                    .parse()
                    .map_err(|_| syntax("bad node count"))?;
                n = Some(v);
            }
            "E" => {
                let u: usize = parts
                    .next()
                    .ok_or_else(|| syntax("E needs endpoints"))?
                    .parse()
                    .map_err(|_| syntax("bad vertex id"))?;
                let v: usize = parts
                    .next()
                    .ok_or_else(|| syntax("E needs endpoints"))?
                    .parse()
                    .map_err(|_| syntax("bad vertex id"))?;
                let w = parts.next().ok_or_else(|| syntax("E needs a weight"))?;
                let cost = parse_rat(w).map_err(|_| syntax("bad weight"))?;
                if u == 0 || v == 0 {
                    return Err(syntax("vertex ids are 1-based"));
                }
                edges.push(Edge {
                    u: u - 1,
                    v: v - 1,
                    cost,
                });
            }
            "T" => {
                let t: usize = parts
                    .next()
                    .ok_or_else(|| syntax("T needs an id"))?
                    .parse()
                    .map_err(|_| syntax("bad terminal id"))?;
                if t == 0 {
                    return Err(syntax("vertex ids are 1-based"));
                }
                terminals.push(t - 1);
            }
            _ => {
                // Ignore header lines like `Name`, `Creator`, comments.
            }
        }
    }
    let n = n.ok_or_else(|| Error::Syntax {
        line: 0,
        message: "missing Nodes line".into(),
    })?;
    let root = match root_override {
        Some(r) => {
            if r == 0 {
                return Err(Error::BadVertex(0));
            }
            r - 1
        }
        None => *terminals.first().ok_or_else(|| Error::Syntax {
            line: 0,
            message: "no terminals".into(),
        })?,
    };
    Instance::new(n, edges, terminals, root)
}

/// Canonical native rendering: edges sorted by endpoints, terminals in stored
/// order, one root line. `parse(render(x)) == x` and rendering is idempotent.
pub fn render_native(inst: &Instance) -> String {
    let mut out = String::new();
    out.push_str(&format!("nodes {}\n", inst.vertex_count));
    let mut edges: Vec<&Edge> = inst.edges.iter().collect();
    edges.sort_by_key(|e| (e.u.min(e.v), e.u.max(e.v)));
    for e in edges {
        let (u, v) = (e.u.min(e.v), e.u.max(e.v));
        out.push_str(&format!(
            "edge {} {} {}\n",
            u + 1,
            v + 1,
            rat::format_rat(&e.cost)
        ));
    }
    for &t in &inst.terminals {
        out.push_str(&format!("terminal {}\n", t + 1));
    }
    out.push_str(&format!("root {}\n", inst.root + 1));
    out
}

// ---------------------------------------------------------------------------
// Generator families
// ---------------------------------------------------------------------------

/// Instance families used as fixtures and for randomized sweeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// Six-cycle with unit costs and three terminals: a subdivided spanning
    /// tree instance where naive dual doubling fails.
    SubdivTriangle,
    /// Hexagon with cost-2 rim edges and a center joined to alternating rim
    /// vertices at cost 1; the classic integrality-gap gadget.
    GapGadget,
    /// Star of k terminal legs plus a root leg, with q extra terminals
    /// hanging off the root.
    Spider { k: usize, q: usize },
    /// q upper terminals, each on its own leg, over a complete bipartite
    /// middle layer to the root and k lower terminals.
    BipartiteFan { k: usize, q: usize },
    /// Unit-cost n-cycle with k evenly spaced terminals.
    Cycle { n: usize, k: usize },
    /// Random connected graph with rational costs.
    Random { n: usize, k: usize, seed: u64 },
    /// Three terminals with a ladder of cheap cross edges; exercises the
    /// potential-function audit. Edge costs depend on delta.
    PotentialGadget { delta: Rat },
}

impl Family {
    pub fn parse(name: &str, params: &BTreeMap<String, String>) -> Result<Family> {
        let get_usize = |key: &str| -> Result<usize> {
            params
                .get(key)
                .ok_or_else(|| Error::BadFamilyParams {
                    family: name.into(),
                    message: format!("missing parameter `{key}`"),
                })?
                .parse()
                .map_err(|_| Error::BadFamilyParams {
                    family: name.into(),
                    message: format!("bad integer for `{key}`"),
                })
        };
        match name {
            "subdiv-triangle" => Ok(Family::SubdivTriangle),
            "gap-gadget" => Ok(Family::GapGadget),
            "spider" => Ok(Family::Spider {
                k: get_usize("k")?,
                q: get_usize("q")?,
            }),
            "bipartite-fan" => Ok(Family::BipartiteFan {
                k: get_usize("k")?,
                q: get_usize("q")?,
            }),
            "cycle" => Ok(Family::Cycle {
                n: get_usize("n")?,
                k: get_usize("k")?,
            }),
            "random" => Ok(Family::Random {
                n: get_usize("n")?,
                k: get_usize("k")?,
                seed: get_usize("seed")? as u64,
            }),
            "potential-gadget" => {
                let delta = params
                    .get("delta")
                    .map(|s| parse_rat(s))
                    .transpose()?
                    .unwrap_or_else(|| rat(858, 100_000));
                Ok(Family::PotentialGadget { delta })
            }
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

pub fn generate_family(family: &Family) -> Result<Instance> {
    match family {
        Family::SubdivTriangle => subdiv_triangle(),
        Family::GapGadget => gap_gadget(),
        Family::Spider { k, q } => spider(*k, *q),
        Family::BipartiteFan { k, q } => bipartite_fan(*k, *q),
        Family::Cycle { n, k } => cycle(*n, *k),
        Family::Random { n, k, seed } => random_instance(*n, *k, *seed),
        Family::PotentialGadget { delta } => potential_gadget(delta),
    }
}

/// Vertices: 1=s1, 2=s2, 3=r, 4=v1 (s1-r side), 5=v2 (s1-s2 side),
/// 6=v3 (s2-r side). All ids here are 1-based as in the text format.
fn subdiv_triangle() -> Result<Instance> {
    let one = rat_int(1);
    let edges = [(1, 4), (3, 4), (3, 6), (2, 6), (1, 5), (2, 5)]
        .iter()
        .map(|&(u, v)| Edge {
            u: u - 1,
            v: v - 1,
            cost: one.clone(),
        })
        .collect();
    Instance::new(6, edges, vec![0, 1, 2], 2)
}

/// Vertices: 1=s1, 2=s2, 3=r, 4=v1, 5=v2, 6=v3, 7=center. Rim edges cost 2,
/// spokes cost 1.
fn gap_gadget() -> Result<Instance> {
    let rim = [(1, 4), (4, 3), (3, 6), (6, 2), (2, 5), (5, 1)];
    let spokes = [(7, 4), (7, 5), (7, 6)];
    let mut edges: Vec<Edge> = rim
        .iter()
        .map(|&(u, v)| Edge {
            u: u - 1,
            v: v - 1,
            cost: rat_int(2),
        })
        .collect();
    edges.extend(spokes.iter().map(|&(u, v)| Edge {
        u: u - 1,
        v: v - 1,
        cost: rat_int(1),
    }));
    Instance::new(7, edges, vec![0, 1, 2], 2)
}

/// Vertices: s_1..s_k, r, sbar_1..sbar_q, center v. Unit edges s_i-v, r-v,
/// r-sbar_j. Terminals are everything except v.
fn spider(k: usize, q: usize) -> Result<Instance> {
    if k < 1 || q < 1 {
        return Err(Error::BadFamilyParams {
            family: "spider".into(),
            message: "k and q must be at least 1".into(),
        });
    }
    let n = k + 1 + q + 1;
    let root = k; // after s_1..s_k
    let center = n - 1;
    let mut edges = vec![];
    for i in 0..k {
        edges.push(Edge {
            u: i,
            v: center,
            cost: rat_int(1),
        });
    }
    edges.push(Edge {
        u: root,
        v: center,
        cost: rat_int(1),
    });
    for j in 0..q {
        edges.push(Edge {
            u: root,
            v: k + 1 + j,
            cost: rat_int(1),
        });
    }
    let terminals: Vec<usize> = (0..k + 1 + q).collect();
    Instance::new(n, edges, terminals, root)
}

/// Vertices: s_1..s_q, v_1..v_q, r, stilde_1..stilde_k. Unit edges s_j-v_j
/// and v_j-{r, stilde_i}.
fn bipartite_fan(k: usize, q: usize) -> Result<Instance> {
    if k < 1 || q < 1 {
        return Err(Error::BadFamilyParams {
            family: "bipartite-fan".into(),
            message: "k and q must be at least 1".into(),
        });
    }
    let n = 2 * q + 1 + k;
    let root = 2 * q;
    let mut edges = vec![];
    for j in 0..q {
        edges.push(Edge {
            u: j,
            v: q + j,
            cost: rat_int(1),
        });
        edges.push(Edge {
            u: q + j,
            v: root,
            cost: rat_int(1),
        });
        for i in 0..k {
            edges.push(Edge {
                u: q + j,
                v: root + 1 + i,
                cost: rat_int(1),
            });
        }
    }
    let mut terminals: Vec<usize> = (0..q).collect();
    terminals.push(root);
    terminals.extend(root + 1..root + 1 + k);
    Instance::new(n, edges, terminals, root)
}

/// Unit-cost cycle on n vertices, every (n/k)-th vertex a terminal; the
/// terminal at position 0 is the root.
fn cycle(n: usize, k: usize) -> Result<Instance> {
    if k < 2 || n < k || n % k != 0 {
        return Err(Error::BadFamilyParams {
            family: "cycle".into(),
            message: "requires k >= 2 and k | n".into(),
        });
    }
    let mut edges = vec![];
    for v in 0..n {
        edges.push(Edge {
            u: v,
            v: (v + 1) % n,
            cost: rat_int(1),
        });
    }
    let step = n / k;
    let terminals: Vec<usize> = (0..k).map(|i| i * step).collect();
    Instance::new(n, edges, terminals, 0)
}

fn random_instance(n: usize, k: usize, seed: u64) -> Result<Instance> {
    if n < 2 || k < 2 || k > n {
        return Err(Error::BadFamilyParams {
            family: "random".into(),
            message: "requires n >= 2 and 2 <= k <= n".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = vec![];
    let mut pairs = BTreeSet::new();
    let rand_cost = |rng: &mut ChaCha8Rng| {
        let p = rng.random_range(1..=60i64);
        let q = rng.random_range(1..=6i64);
        rat(p, q)
    };
    // Random spanning tree, then extra edges.
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for i in 1..n {
        let u = order[i];
        let v = order[rng.random_range(0..i)];
        pairs.insert((u.min(v), u.max(v)));
        let cost = rand_cost(&mut rng);
        edges.push(Edge { u, v, cost });
    }
    let extra = n.min(n * (n - 1) / 2 - (n - 1));
    let mut added = 0;
    let mut attempts = 0;
    while added < extra && attempts < 20 * extra + 50 {
        attempts += 1;
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if pairs.contains(&key) {
            continue;
        }
        pairs.insert(key);
        let cost = rand_cost(&mut rng);
        edges.push(Edge { u, v, cost });
        added += 1;
    }
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(&mut rng);
    let terminals: Vec<usize> = ids[..k].to_vec();
    let root = terminals[0];
    Instance::new(n, edges, terminals, root)
}

/// Vertices: 1=s, 2=start terminal, 3=r, 4..6 = first rank (a0,a1,a2),
/// 7..9 = second rank (b0,b1,b2), 10..11 = (c1,c2). Costs follow the ladder
/// pattern: s-a_i at 1 - d/2, rank cross edges at d/2, b2-c2 at d, b1-c1 at
/// 3d/2, and unit edges b0-start, c1-r, c2-r.
fn potential_gadget(delta: &Rat) -> Result<Instance> {
    if *delta <= Rat::zero() || *delta >= rat_int(2) {
        return Err(Error::BadFamilyParams {
            family: "potential-gadget".into(),
            message: "delta must be in (0, 2)".into(),
        });
    }
    let half = &*delta / rat_int(2);
    let s = 0;
    let start = 1;
    let r = 2;
    let a = [3, 4, 5];
    let b = [6, 7, 8];
    let c1 = 9;
    let c2 = 10;
    let mut edges = vec![];
    for i in 0..3 {
        edges.push(Edge {
            u: s,
            v: a[i],
            cost: rat_int(1) - half.clone(),
        });
    }
    for (u, v) in [(a[0], b[0]), (a[1], b[1]), (a[2], b[2]), (a[1], b[0]), (a[2], b[1])] {
        edges.push(Edge {
            u,
            v,
            cost: half.clone(),
        });
    }
    edges.push(Edge {
        u: b[2],
        v: c2,
        cost: delta.clone(),
    });
    edges.push(Edge {
        u: b[1],
        v: c1,
        cost: rat(3, 2) * delta,
    });
    for (u, v) in [(b[0], start), (c1, r), (c2, r)] {
        edges.push(Edge {
            u,
            v,
            cost: rat_int(1),
        });
    }
    Instance::new(11, edges, vec![s, start, r], r)
}

// ---------------------------------------------------------------------------
// Contraction
// ---------------------------------------------------------------------------

/// Contract a set of terminals into one vertex. Returns the contracted
/// instance, the vertex mapping (old id -> new id), and per new edge the
/// index of the old edge that realized it (minimum cost among parallels).
pub fn contract_terminals(inst: &Instance, x: &BTreeSet<usize>) -> Result<(Instance, Contraction)> {
    if x.is_empty() {
        return Err(Error::EmptyTerminalSet);
    }
    let tset = inst.terminal_set();
    if !x.is_subset(&tset) {
        return Err(Error::NotTerminalSubset);
    }
    let merged_old = *x.iter().min().unwrap();
    let mut vertex_map = vec![0usize; inst.vertex_count];
    let mut next = 0usize;
    for v in 0..inst.vertex_count {
        if x.contains(&v) && v != merged_old {
            continue;
        }
        vertex_map[v] = next;
        next += 1;
    }
    for &v in x.iter() {
        vertex_map[v] = vertex_map[merged_old];
    }
    let new_n = next;
    // Min-cost parallel edge reduction, remembering provenance.
    let mut best: BTreeMap<(usize, usize), (Rat, usize)> = BTreeMap::new();
    for (i, e) in inst.edges.iter().enumerate() {
        let (mut u, mut v) = (vertex_map[e.u], vertex_map[e.v]);
        if u == v {
            continue;
        }
        if u > v {
            std::mem::swap(&mut u, &mut v);
        }
        match best.get(&(u, v)) {
            Some((c, _)) if *c <= e.cost => {}
            _ => {
                best.insert((u, v), (e.cost.clone(), i));
            }
        }
    }
    let mut edges = vec![];
    let mut edge_provenance = vec![];
    for ((u, v), (cost, old_idx)) in best {
        edges.push(Edge { u, v, cost });
        edge_provenance.push(old_idx);
    }
    let mut terminals = vec![];
    let mut seen = BTreeSet::new();
    for &t in &inst.terminals {
        let nt = vertex_map[t];
        if seen.insert(nt) {
            terminals.push(nt);
        }
    }
    let root = vertex_map[inst.root];
    let contracted = Instance::new(new_n, edges, terminals, root)?;
    Ok((
        contracted,
        Contraction {
            vertex_map,
            edge_provenance,
        },
    ))
}

/// Mapping data for one contraction step.
#[derive(Debug, Clone)]
pub struct Contraction {
    /// old vertex id -> new vertex id
    pub vertex_map: Vec<usize>,
    /// new edge index -> old edge index that realized the minimum cost
    pub edge_provenance: Vec<usize>,
}

/// One entry of the contraction log kept by the scale-or-contract loop.
#[derive(Debug, Clone)]
pub struct ContractionEntry {
    /// Terminal set contracted, in the then-current instance's ids.
    pub terminals: BTreeSet<usize>,
    /// Component edges, as edge indices of the then-current instance's base
    /// graph (closure edges already expanded).
    pub component_edges: Vec<usize>,
    pub component_cost: Rat,
    pub drop_value: Rat,
    pub mapping: Contraction,
}

#[derive(Debug, Clone, Default)]
pub struct ContractionLog {
    pub entries: Vec<ContractionEntry>,
}

impl ContractionLog {
    /// Map an edge index of instance number `level` (0 = original) back to an
    /// edge index of the original instance.
    pub fn edge_to_original(&self, level: usize, edge_idx: usize) -> Result<usize> {
        let mut idx = edge_idx;
        for entry in self.entries[..level].iter().rev() {
            idx = *entry.mapping.edge_provenance.get(idx).ok_or_else(|| {
                Error::InconsistentMapping(format!("edge index {idx} out of range"))
            })?;
        }
        Ok(idx)
    }

    /// Map a vertex of the final instance back to an original vertex (the
    /// representative the contractions collapsed onto).
    pub fn final_vertex_preimage(&self, v: usize) -> usize {
        let mut cur = v;
        for entry in self.entries.iter().rev() {
            // First old vertex mapping onto cur.
            cur = entry
                .mapping
                .vertex_map
                .iter()
                .position(|&nv| nv == cur)
                .expect("total mapping");
        }
        cur
    }
}

// ---------------------------------------------------------------------------
// Subdivision
// ---------------------------------------------------------------------------

/// A graph produced by splitting every edge into equal-cost segments of cost
/// at most epsilon.
#[derive(Debug, Clone)]
pub struct SubdividedGraph {
    pub base_vertex_count: usize,
    pub epsilon: Rat,
    /// Total vertices (base vertices keep their ids, then segment vertices).
    pub vertex_count: usize,
    /// Segment edges (u, v, cost); for each base edge the segments run
    /// u = w_0, w_1, ..., w_s = v in order.
    pub segments: Vec<Edge>,
    /// Per base edge: the ordered interior vertex ids.
    pub interior: Vec<Vec<usize>>,
    /// For each vertex, `None` for base vertices or `Some((edge idx, pos))`.
    pub origin: Vec<Option<(usize, usize)>>,
}

pub const DEFAULT_SEGMENT_BUDGET: usize = 1_000_000;

/// Budget from `MOATFORGE_SEGMENT_BUDGET` or default.
pub fn segment_budget() -> usize {
    std::env::var("MOATFORGE_SEGMENT_BUDGET")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEGMENT_BUDGET)
}

/// Epsilon from the eps-prime rule: half the minimum terminal distance times
/// eps-prime.
pub fn epsilon_for(m: &MetricInstance, eps_prime: &Rat) -> Result<Rat> {
    let r = &m.base.terminals;
    if r.len() < 2 {
        return Err(Error::TooFewTerminals(2));
    }
    let mut min: Option<Rat> = None;
    for (i, &s) in r.iter().enumerate() {
        for &t in r.iter().skip(i + 1) {
            let d = m.dist(s, t);
            if min.as_ref().map(|m| d < m).unwrap_or(true) {
                min = Some(d.clone());
            }
        }
    }
    Ok(eps_prime / rat_int(2) * min.unwrap())
}

pub fn subdivide(inst: &Instance, m: &MetricInstance, eps_prime: &Rat) -> Result<SubdividedGraph> {
    let eps = epsilon_for(m, eps_prime)?;
    subdivide_with_eps(inst, &eps, segment_budget())
}

pub fn subdivide_with_eps(inst: &Instance, eps: &Rat, budget: usize) -> Result<SubdividedGraph> {
    if *eps <= Rat::zero() {
        return Err(Error::Invalid("epsilon must be positive".into()));
    }
    let mut total = 0usize;
    let mut counts = vec![];
    for e in &inst.edges {
        let c = rat::ceil_to_usize(&(&e.cost / eps)).unwrap().max(1);
        total += c;
        if total > budget {
            return Err(Error::SegmentBudget {
                need: total,
                budget,
            });
        }
        counts.push(c);
    }
    let mut vertex_count = inst.vertex_count;
    let mut segments = vec![];
    let mut interior = vec![];
    let mut origin: Vec<Option<(usize, usize)>> = vec![None; inst.vertex_count];
    for (ei, e) in inst.edges.iter().enumerate() {
        let s = counts[ei];
        let seg_cost = &e.cost / rat_int(s as i64);
        let mut inner = vec![];
        let mut prev = e.u;
        for pos in 1..s {
            let w = vertex_count;
            vertex_count += 1;
            origin.push(Some((ei, pos)));
            inner.push(w);
            segments.push(Edge {
                u: prev,
                v: w,
                cost: seg_cost.clone(),
            });
            prev = w;
        }
        segments.push(Edge {
            u: prev,
            v: e.v,
            cost: seg_cost.clone(),
        });
        interior.push(inner);
    }
    Ok(SubdividedGraph {
        base_vertex_count: inst.vertex_count,
        epsilon: eps.clone(),
        vertex_count,
        segments,
        interior,
        origin,
    })
}
