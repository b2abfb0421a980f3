//! Exact rational linear algebra: rank and a two-phase tableau simplex with
//! Bland's rule.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

pub fn rank(rows: &[Vec<Q>]) -> usize {
    let mut m: Vec<Vec<Q>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = &m[i][c] / &pivot;
                for j in c..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

struct Tableau {
    /// rows × (vars + 1); the last column is the right-hand side.
    t: Vec<Vec<Q>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col].clone();
        for v in self.t[row].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i != row && !r[col].is_zero() {
                let f = r[col].clone();
                for (v, pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Maximize `cost · x` over the current feasible basis; columns where
    /// `allowed` is false never enter.
    fn optimize(&mut self, cost: &[Q], allowed: &[bool]) -> bool {
        let rhs = cost.len();
        loop {
            // reduced cost of column j: c_j - c_B · column_j
            let entering = (0..rhs).filter(|&j| allowed[j] && !self.basis.contains(&j)).find(|&j| {
                let mut red = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    red -= &cost[b] * &self.t[i][j];
                }
                red.is_positive()
            });
            let Some(col) = entering else { return true };
            let mut best: Option<(Q, usize)> = None;
            for i in 0..self.t.len() {
                if self.t[i][col].is_positive() {
                    let ratio = &self.t[i][rhs] / &self.t[i][col];
                    let better = match &best {
                        None => true,
                        Some((r, bi)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, row)) => self.pivot(row, col),
            }
        }
    }
}

/// Maximize `c · x` subject to `A x = b`, `x ≥ 0`.
pub fn maximize(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    let total = n + m;
    let mut t = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let neg = b[i].is_negative();
        let mut r: Vec<Q> = row.iter().map(|v| if neg { -v.clone() } else { v.clone() }).collect();
        r.extend((0..m).map(|k| if k == i { Q::one() } else { Q::zero() }));
        r.push(if neg { -b[i].clone() } else { b[i].clone() });
        t.push(r);
    }
    let mut tab = Tableau { t, basis: (n..total).collect() };
    let phase1: Vec<Q> = (0..total).map(|j| if j < n { Q::zero() } else { -Q::one() }).collect();
    tab.optimize(&phase1, &vec![true; total]);
    let infeasibility: Q = (0..m).filter(|&i| tab.basis[i] >= n).map(|i| tab.t[i][total].clone()).sum();
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    // drive artificial variables out of the basis; rows that cannot be are redundant
    let mut i = 0;
    while i < tab.t.len() {
        if tab.basis[i] >= n {
            match (0..n).find(|&j| !tab.t[i][j].is_zero()) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut cost: Vec<Q> = c.to_vec();
    cost.extend((0..m).map(|_| Q::zero()));
    let allowed: Vec<bool> = (0..total).map(|j| j < n).collect();
    if !tab.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (i, &bcol) in tab.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = tab.t[i][total].clone();
        }
    }
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, value }
}
