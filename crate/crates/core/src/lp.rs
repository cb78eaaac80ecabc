//! Dense two-phase simplex for small equality-form linear programs
//! `A x = b, x >= 0`. Pricing is most-negative reduced cost, falling back to
//! Bland's rule on long degenerate stretches.

use crate::error::{ElicitError, Result};

/// Entries below this magnitude are not used as pivots.
pub const PIVOT_TOL: f64 = 1e-11;
/// Largest phase-1 objective still accepted as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 100_000;
const DEGENERATE_STREAK: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible { phase1_objective: f64 },
    Unbounded,
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column holds the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize, costs: &mut [f64], value: &mut f64) {
        let piv = self.rows[r][c];
        for v in &mut self.rows[r] {
            *v /= piv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = costs[c];
        if f != 0.0 {
            for (v, p) in costs.iter_mut().zip(&pivot_row[..self.cols]) {
                *v -= f * p;
            }
            costs[c] = 0.0;
            *value -= f * pivot_row[self.cols];
        }
        self.basis[r] = c;
    }

    /// Minimizes with reduced costs `costs` over the columns allowed by
    /// `allowed`. `value` tracks `-objective`. Returns false when unbounded.
    ///
    /// Entering columns are priced by most negative reduced cost; after
    /// [`DEGENERATE_STREAK`] pivots without progress, Bland's smallest-index
    /// rule takes over until a pivot makes progress again.
    fn run(&mut self, costs: &mut [f64], value: &mut f64, allowed: &dyn Fn(usize) -> bool) -> Result<bool> {
        let mut streak = 0;
        for _ in 0..MAX_PIVOTS {
            let candidates = (0..self.cols).filter(|&j| allowed(j) && costs[j] < -PIVOT_TOL);
            let entering = if streak < DEGENERATE_STREAK {
                candidates.min_by(|&a, &b| costs[a].total_cmp(&costs[b]))
            } else {
                candidates.min()
            };
            let Some(c) = entering else {
                return Ok(true);
            };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    let better = match best {
                        None => true,
                        Some((r, bi)) => {
                            ratio < r - 1e-15 || (ratio <= r + 1e-15 && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            match best {
                None => return Ok(false),
                Some((ratio, r)) => {
                    streak = if ratio > PIVOT_TOL { 0 } else { streak + 1 };
                    self.pivot(r, c, costs, value);
                }
            }
        }
        Err(ElicitError::Numerical(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }
}

/// Maximizes `c · x` subject to `A x = b`, `x >= 0`.
///
/// Phase 1 adds one artificial variable per row and minimizes their sum; a
/// residual sum above [`FEASIBILITY_TOL`] means infeasible. Artificials left
/// in the basis at zero are pivoted out, or their rows dropped as redundant.
pub fn maximize(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpOutcome> {
    let n = c.len();
    if a.len() != b.len() {
        return Err(ElicitError::InvalidInput(format!(
            "{} constraint rows but {} right-hand sides",
            a.len(),
            b.len()
        )));
    }
    if let Some(row) = a.iter().find(|row| row.len() != n) {
        return Err(ElicitError::InvalidInput(format!(
            "constraint row has {} entries, expected {n}",
            row.len()
        )));
    }
    if a.iter().flatten().chain(b).chain(c).any(|v| !v.is_finite()) {
        return Err(ElicitError::InvalidInput("non-finite LP coefficient".into()));
    }
    let rows_n = a.len();
    let cols = n + rows_n;
    let mut rows = Vec::with_capacity(rows_n);
    for (i, (row, &bi)) in a.iter().zip(b).enumerate() {
        let sign = if bi < 0.0 { -1.0 } else { 1.0 };
        let mut t: Vec<f64> = row.iter().map(|v| sign * v).collect();
        t.resize(cols + 1, 0.0);
        t[n + i] = 1.0;
        t[cols] = sign * bi;
        rows.push(t);
    }
    let mut tab = Tableau {
        rows,
        basis: (n..cols).collect(),
        cols,
    };

    // Phase 1: minimize the sum of artificials.
    let mut costs = vec![0.0; cols];
    let mut value = 0.0;
    for row in &tab.rows {
        for j in 0..n {
            costs[j] -= row[j];
        }
        value -= row[cols];
    }
    tab.run(&mut costs, &mut value, &|_| true)?;
    let phase1 = -value;
    if phase1 > FEASIBILITY_TOL {
        return Ok(LpOutcome::Infeasible {
            phase1_objective: phase1,
        });
    }

    // Remove artificials still in the basis.
    let mut i = 0;
    while i < tab.rows.len() {
        if tab.basis[i] >= n {
            let col = (0..n).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL);
            match col {
                Some(j) => {
                    let mut dummy_costs = vec![0.0; cols];
                    let mut dummy = 0.0;
                    tab.pivot(i, j, &mut dummy_costs, &mut dummy);
                }
                None => {
                    tab.rows.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2: minimize -c · x over the original columns.
    let mut costs: Vec<f64> = (0..cols).map(|j| if j < n { -c[j] } else { 0.0 }).collect();
    let mut value = 0.0;
    for (r, &bj) in tab.basis.iter().enumerate() {
        let cb = costs[bj];
        if cb != 0.0 {
            for (cost, a) in costs.iter_mut().zip(&tab.rows[r][..cols]) {
                *cost -= cb * a;
            }
            value -= cb * tab.rows[r][cols];
        }
    }
    if !tab.run(&mut costs, &mut value, &|j| j < n)? {
        return Ok(LpOutcome::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (r, &bj) in tab.basis.iter().enumerate() {
        if bj < n {
            x[bj] = tab.rows[r][cols].max(0.0);
        }
    }
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpOutcome::Optimal { x, objective })
}

/// Feasibility of `A x = b, x >= 0`; returns a feasible point if one exists.
pub fn feasible_point(a: &[Vec<f64>], b: &[f64]) -> Result<Option<Vec<f64>>> {
    let n = a.first().map_or(0, Vec::len);
    match maximize(a, b, &vec![0.0; n])? {
        LpOutcome::Optimal { x, .. } => Ok(Some(x)),
        LpOutcome::Infeasible { .. } => Ok(None),
        LpOutcome::Unbounded => unreachable!("zero objective is bounded"),
    }
}
