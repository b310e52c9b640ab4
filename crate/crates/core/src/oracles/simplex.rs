//! Dense exact-rational simplex (two-phase, Bland's rule) for LPs of the
//! form `min c.x  s.t.  A x >= b, x >= 0`. Small and exact; instances here
//! have at most a few hundred rows.

use num::traits::{One, Signed, Zero};

use crate::error::Error;
use crate::rat::Rat;
use crate::Result;

#[derive(Debug, Clone)]
pub struct LpProblem {
    /// Objective coefficients, one per structural variable.
    pub objective: Vec<Rat>,
    /// Constraint rows `a . x >= b`.
    pub rows: Vec<(Vec<Rat>, Rat)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: Rat,
    pub x: Vec<Rat>,
    /// Dual values, one per constraint row (nonnegative).
    pub y: Vec<Rat>,
    pub pivots: usize,
}

/// Solve the LP. Errors on infeasible or unbounded problems (valid cut LPs
/// are neither).
pub fn solve(p: &LpProblem) -> Result<LpSolution> {
    let n = p.objective.len();
    let m = p.rows.len();
    if m == 0 {
        return Ok(LpSolution {
            value: Rat::zero(),
            x: vec![Rat::zero(); n],
            y: vec![],
            pivots: 0,
        });
    }
    // Columns: structural (n) | surplus (m) | artificial (m) | rhs.
    let cols = n + 2 * m;
    let mut t: Vec<Vec<Rat>> = Vec::with_capacity(m);
    for (i, (row, b)) in p.rows.iter().enumerate() {
        let mut r = vec![Rat::zero(); cols + 1];
        if row.len() != n {
            return Err(Error::Invalid("LP row has wrong arity".into()));
        }
        r[..n].clone_from_slice(row);
        r[n + i] = -Rat::one();
        r[n + m + i] = Rat::one();
        r[cols] = b.clone();
        // Normalize rhs nonnegative so artificial start is a basis.
        if r[cols].is_negative() {
            for c in r.iter_mut() {
                *c = -c.clone();
            }
        }
        t.push(r);
    }
    let mut basis: Vec<usize> = (0..m).map(|i| n + m + i).collect();
    let mut pivots = 0usize;

    // Phase 1: minimize sum of artificials.
    let mut cost1 = vec![Rat::zero(); cols];
    for j in (n + m)..cols {
        cost1[j] = Rat::one();
    }
    run_phase(&mut t, &mut basis, &cost1, &mut pivots)?;
    let phase1: Rat = basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= n + m)
        .map(|(i, _)| t[i][cols].clone())
        .sum();
    if !phase1.is_zero() {
        return Err(Error::Invalid("LP infeasible".into()));
    }
    // Drive remaining artificials out of the basis where possible.
    for i in 0..m {
        if basis[i] >= n + m {
            if let Some(j) = (0..n + m).find(|&j| !t[i][j].is_zero()) {
                pivot(&mut t, &mut basis, i, j);
                pivots += 1;
            }
        }
    }

    // Phase 2: original objective; artificial columns pinned at zero.
    let mut cost2 = vec![Rat::zero(); cols];
    cost2[..n].clone_from_slice(&p.objective);
    run_phase2(&mut t, &mut basis, &cost2, n + m, &mut pivots)?;

    let mut x = vec![Rat::zero(); n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            x[b] = t[i][cols].clone();
        }
    }
    let value: Rat = p
        .objective
        .iter()
        .zip(&x)
        .map(|(c, xi)| c * xi)
        .sum();
    // Duals from reduced costs of the surplus columns: for surplus column
    // n+i (coefficient -1 in row i), reduced cost = y_i, so y_i = zbar_j.
    let reduced = reduced_costs(&t, &basis, &cost2);
    let y: Vec<Rat> = (0..m).map(|i| reduced[n + i].clone()).collect();
    Ok(LpSolution {
        value,
        x,
        y,
        pivots,
    })
}

fn reduced_costs(t: &[Vec<Rat>], basis: &[usize], cost: &[Rat]) -> Vec<Rat> {
    let cols = cost.len();
    let mut red = cost.to_vec();
    for (i, &b) in basis.iter().enumerate() {
        if cost[b].is_zero() {
            continue;
        }
        for j in 0..cols {
            let adj = &cost[b] * &t[i][j];
            red[j] -= adj;
        }
    }
    red
}

fn run_phase(
    t: &mut Vec<Vec<Rat>>,
    basis: &mut Vec<usize>,
    cost: &[Rat],
    pivots: &mut usize,
) -> Result<()> {
    run_phase2(t, basis, cost, cost.len(), pivots)
}

/// Simplex iterations with Bland's rule; columns at index >= `col_limit` are
/// ineligible to enter (used to pin artificials in phase 2).
fn run_phase2(
    t: &mut Vec<Vec<Rat>>,
    basis: &mut Vec<usize>,
    cost: &[Rat],
    col_limit: usize,
    pivots: &mut usize,
) -> Result<()> {
    let cols = cost.len();
    let rhs = cols;
    loop {
        let red = reduced_costs(t, basis, cost);
        let entering = (0..col_limit.min(cols)).find(|&j| red[j].is_negative());
        let Some(e) = entering else {
            return Ok(());
        };
        // Ratio test, Bland tie-break on basis variable index.
        let mut leave: Option<(usize, Rat)> = None;
        for i in 0..t.len() {
            if t[i][e].is_positive() {
                let ratio = &t[i][rhs] / &t[i][e];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((l, _)) = leave else {
            return Err(Error::Invalid("LP unbounded".into()));
        };
        pivot(t, basis, l, e);
        *pivots += 1;
    }
}

fn pivot(t: &mut Vec<Vec<Rat>>, basis: &mut Vec<usize>, row: usize, col: usize) {
    let piv = t[row][col].clone();
    for c in t[row].iter_mut() {
        *c /= &piv;
    }
    for i in 0..t.len() {
        if i == row || t[i][col].is_zero() {
            continue;
        }
        let factor = t[i][col].clone();
        for j in 0..t[i].len() {
            let adj = &factor * &t[row][j];
            t[i][j] -= adj;
        }
    }
    basis[row] = col;
}

/// Complementary-slackness verification of a solved LP: primal feasibility,
/// dual feasibility, and both slackness conditions (exact).
pub fn verify_optimal(p: &LpProblem, s: &LpSolution) -> bool {
    let n = p.objective.len();
    for xi in &s.x {
        if xi.is_negative() {
            return false;
        }
    }
    for yi in &s.y {
        if yi.is_negative() {
            return false;
        }
    }
    for ((row, b), yi) in p.rows.iter().zip(&s.y) {
        let ax: Rat = row.iter().zip(&s.x).map(|(a, x)| a * x).sum();
        if ax < *b {
            return false;
        }
        if !((&ax - b) * yi).is_zero() {
            return false;
        }
    }
    for j in 0..n {
        let ya: Rat = p.rows.iter().zip(&s.y).map(|((row, _), y)| &row[j] * y).sum();
        let slack = &p.objective[j] - &ya;
        if slack.is_negative() {
            return false;
        }
        if !(&slack * &s.x[j]).is_zero() {
            return false;
        }
    }
    true
}
