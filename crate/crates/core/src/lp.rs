//! Exact two-phase simplex method over the rationals.
//!
//! Solves `min c·x` subject to `A x = b`, `x ≥ 0` with Bland's anti-cycling rule.
//! The ℓ¹ and ℓ^∞ least-norm primitives are small linear programs of this shape, so
//! the optimum is an exact rational vertex rather than a float within tolerance.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, objective: Rational },
    Infeasible,
    Unbounded,
}

struct Tableau {
    // rows x (ncols + 1); last column is the right-hand side
    t: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.t[row][col].recip();
        for v in self.t[row].iter_mut() {
            *v *= &inv;
        }
        let prow = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row || line[col].is_zero() {
                continue;
            }
            let f = line[col].clone();
            for (v, p) in line.iter_mut().zip(&prow) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Runs simplex iterations for the cost vector `cost` restricted to `allowed` columns.
    fn optimize(&mut self, cost: &[Rational], allowed: usize) -> bool {
        loop {
            // reduced costs: c_j - c_B B^{-1} A_j
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j].clone();
                for (r, &b) in self.basis.iter().enumerate() {
                    if !self.t[r][j].is_zero() && !cost[b].is_zero() {
                        rc -= &cost[b] * &self.t[r][j];
                    }
                }
                if rc.is_negative() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.t.len() {
                let a = &self.t[r][col];
                if a.is_positive() {
                    let ratio = &self.t[r][self.ncols] / a;
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr]),
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else { return false };
            self.pivot(row, col);
        }
    }
}

/// `min c·x` s.t. `A x = b`, `x ≥ 0`. `a` is dense row-major with `c.len()` columns.
pub fn minimize(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let ncols = n + m;
    let mut t = Vec::with_capacity(m);
    for (i, row) in a.iter().enumerate() {
        let neg = b[i].is_negative();
        let mut line: Vec<Rational> = row.iter().map(|v| if neg { -v.clone() } else { v.clone() }).collect();
        line.resize(ncols + 1, Rational::zero());
        line[n + i] = Rational::from_integer(1.into());
        line[ncols] = if neg { -b[i].clone() } else { b[i].clone() };
        t.push(line);
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect(), ncols };

    let mut phase1 = vec![Rational::zero(); ncols];
    for v in phase1.iter_mut().skip(n) {
        *v = Rational::from_integer(1.into());
    }
    tab.optimize(&phase1, ncols);
    let infeas: Rational = tab.basis.iter().enumerate().filter(|(_, &bv)| bv >= n).map(|(r, _)| tab.t[r][ncols].clone()).sum();
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }
    // drive artificial variables out of the basis; drop redundant rows
    let mut r = 0;
    while r < tab.t.len() {
        if tab.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| !tab.t[r][j].is_zero()) {
                tab.pivot(r, j);
                r += 1;
            } else {
                tab.t.remove(r);
                tab.basis.remove(r);
            }
        } else {
            r += 1;
        }
    }
    let mut cost = c.to_vec();
    cost.resize(ncols, Rational::zero());
    if !tab.optimize(&cost, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.t[r][ncols].clone();
        }
    }
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { x, objective }
}
