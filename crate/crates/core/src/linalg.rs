//! Exact sparse elimination over the rationals, plus a few dense `f64` routines
//! used by the norm-minimization code.
//!
//! Sparse vectors are sorted `(index, value)` lists without explicit zeros. The
//! central object is [`ColumnReduction`]: columns are inserted one at a time and
//! reduced against earlier pivots by their lowest (largest-index) entry, keeping
//! track of how each reduced column is combined from the originals. Zero
//! columns then give a kernel basis; the pivots span the column space.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_traits::{One, Zero};

use crate::Rational;

pub type SparseVec = Vec<(usize, Rational)>;

/// `y + a * x`.
pub fn axpy(y: &[(usize, Rational)], a: &Rational, x: &[(usize, Rational)]) -> SparseVec {
    let mut out = Vec::with_capacity(y.len() + x.len());
    let (mut i, mut j) = (0, 0);
    while i < y.len() || j < x.len() {
        match (y.get(i), x.get(j)) {
            (Some((yi, yv)), Some((xi, xv))) if yi == xi => {
                let v = yv + a * xv;
                if !v.is_zero() {
                    out.push((*yi, v));
                }
                i += 1;
                j += 1;
            }
            (Some((yi, yv)), Some((xi, _))) if yi < xi => {
                out.push((*yi, yv.clone()));
                i += 1;
            }
            (Some((yi, yv)), None) => {
                out.push((*yi, yv.clone()));
                i += 1;
            }
            (_, Some((xi, xv))) => {
                out.push((*xi, a * xv));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

pub fn sparse_from_dense(values: &[Rational]) -> SparseVec {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(i, v)| (i, v.clone()))
        .collect()
}

pub fn dense_from_sparse(v: &[(usize, Rational)], len: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); len];
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

pub fn sparse_dot(a: &[(usize, Rational)], b: &[(usize, Rational)]) -> Rational {
    let (mut i, mut j) = (0, 0);
    let mut acc = Rational::zero();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Equal => {
                acc += &a[i].1 * &b[j].1;
                i += 1;
                j += 1;
            }
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
        }
    }
    acc
}

struct Pivot {
    column: SparseVec,
    combo: SparseVec,
}

/// Incremental column echelon form of a sparse rational matrix.
pub struct ColumnReduction {
    nrows: usize,
    ncols: usize,
    track: bool,
    pivots: Vec<Pivot>,
    by_low: HashMap<usize, usize>,
    kernel: Vec<SparseVec>,
}

impl ColumnReduction {
    /// Empty reduction on vectors of length `nrows`. With `track` unset, only
    /// the rank and span membership are available.
    pub fn new(nrows: usize, track: bool) -> Self {
        ColumnReduction { nrows, ncols: 0, track, pivots: Vec::new(), by_low: HashMap::new(), kernel: Vec::new() }
    }

    pub fn from_columns<I>(nrows: usize, columns: I, track: bool) -> Self
    where
        I: IntoIterator<Item = SparseVec>,
    {
        let mut r = ColumnReduction::new(nrows, track);
        for c in columns {
            r.push(c);
        }
        r
    }

    fn reduce(&self, mut v: SparseVec, mut combo: SparseVec, track: bool) -> (SparseVec, SparseVec) {
        while let Some((low, val)) = v.last() {
            let Some(&p) = self.by_low.get(low) else { break };
            let pivot = &self.pivots[p];
            let lead = &pivot.column.last().expect("pivot columns are nonzero").1;
            let factor = -(val / lead);
            v = axpy(&v, &factor, &pivot.column);
            if track {
                combo = axpy(&combo, &factor, &pivot.combo);
            }
        }
        (v, combo)
    }

    /// Inserts the next column. Returns `true` when it raised the rank.
    pub fn push(&mut self, column: SparseVec) -> bool {
        debug_assert!(column.iter().all(|(i, _)| *i < self.nrows));
        let idx = self.ncols;
        self.ncols += 1;
        let combo = if self.track { vec![(idx, Rational::one())] } else { Vec::new() };
        let (v, combo) = self.reduce(column, combo, self.track);
        match v.last() {
            Some((low, _)) => {
                self.by_low.insert(*low, self.pivots.len());
                self.pivots.push(Pivot { column: v, combo });
                true
            }
            None => {
                if self.track {
                    self.kernel.push(combo);
                }
                false
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Basis of the null space (only populated when tracking).
    pub fn kernel_basis(&self) -> &[SparseVec] {
        &self.kernel
    }

    pub fn in_span(&self, v: &[(usize, Rational)]) -> bool {
        self.reduce(v.to_vec(), Vec::new(), false).0.is_empty()
    }

    /// Some `x` with `A x = rhs`, or `None` when `rhs` is outside the column space.
    /// Requires tracking.
    pub fn solve(&self, rhs: &[(usize, Rational)]) -> Option<SparseVec> {
        assert!(self.track, "solve needs a tracked reduction");
        // Reducing rhs by pivots: rhs - sum f_p col_p = 0 means rhs = A * sum f_p combo_p.
        let (v, combo) = self.reduce(rhs.to_vec(), Vec::new(), true);
        if v.is_empty() {
            Some(combo.into_iter().map(|(i, x)| (i, -x)).collect())
        } else {
            None
        }
    }
}

/// Indices of a maximal linearly independent subset of `rows`, in input order.
pub fn independent_subset(len: usize, rows: &[SparseVec]) -> Vec<usize> {
    let mut r = ColumnReduction::new(len, false);
    rows.iter().enumerate().filter(|(_, v)| r.push((*v).clone())).map(|(i, _)| i).collect()
}

/// Dense rational matrix-vector helpers, used where matrices are tiny.
pub fn dense_mat_vec(rows: &[Vec<Rational>], x: &[Rational]) -> Vec<Rational> {
    rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Solves the square system `m x = b` exactly. `None` when singular.
pub fn solve_dense(mut m: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = m.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !m[r][c].is_zero())?;
        m.swap(c, p);
        b.swap(c, p);
        let inv = m[c][c].recip();
        for j in c..n {
            m[c][j] = &m[c][j] * &inv;
        }
        b[c] = &b[c] * &inv;
        for r in 0..n {
            if r != c && !m[r][c].is_zero() {
                let f = m[r][c].clone();
                for j in c..n {
                    let t = &f * &m[c][j];
                    m[r][j] -= t;
                }
                let t = &f * &b[c];
                b[r] -= t;
            }
        }
    }
    Some(b)
}

/// Cholesky factor `L` (row-major, lower triangular) of a symmetric positive
/// definite `n×n` matrix.
pub fn cholesky(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i * n + i] = libm::sqrt(s);
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b` given the Cholesky factor.
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

/// Eigenvalues of a symmetric `n×n` matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| m[i * n + j] * m[i * n + j]).sum();
        let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    ev
}
