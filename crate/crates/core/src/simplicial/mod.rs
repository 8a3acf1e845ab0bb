//! Finite simplicial complexes on point ids, and rational cochains on them.
//!
//! A simplex is stored once, as its ascending vertex list; a `k`-cochain is a
//! value per stored `k`-simplex, in storage order. Evaluating a cochain on an
//! arbitrary vertex ordering multiplies by the sign of the sorting permutation,
//! and tuples with a repeated vertex evaluate to zero.

mod cup;
mod prism;

pub use cup::{cup_aw, cup_shuffle};
pub use prism::{prism, FormalChain};

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;
use num_traits::{One, Zero};

use crate::linalg::SparseVec;
use crate::norms::Exponent;
use crate::{Error, FiniteMetricSpace, Rational, Result};

#[derive(Debug, Clone, Default)]
pub struct SimplicialComplex {
    levels: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    edge_scale: Option<Rational>,
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        let top = self.levels.len().max(other.levels.len());
        (0..top).all(|k| self.simplices(k) == other.simplices(k))
    }
}

impl SimplicialComplex {
    fn from_levels(mut levels: Vec<Vec<Vec<usize>>>, edge_scale: Option<Rational>) -> Self {
        while levels.last().is_some_and(|l| l.is_empty()) {
            levels.pop();
        }
        let index = levels
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        SimplicialComplex { levels, index, edge_scale }
    }

    /// Downward closure of the given vertex sets (each is sorted and deduplicated first).
    pub fn from_simplices<I>(simplices: I) -> Self
    where
        I: IntoIterator<Item = Vec<usize>>,
    {
        let mut sets: Vec<BTreeSet<Vec<usize>>> = Vec::new();
        for mut s in simplices {
            s.sort_unstable();
            s.dedup();
            if s.is_empty() {
                continue;
            }
            let k = s.len() - 1;
            if sets.len() <= k {
                sets.resize_with(k + 1, BTreeSet::new);
            }
            sets[k].insert(s);
        }
        for k in (1..sets.len()).rev() {
            let faces: Vec<Vec<usize>> = sets[k].iter().flat_map(|s| (0..s.len()).map(move |i| drop_vertex(s, i))).collect();
            sets[k - 1].extend(faces);
        }
        SimplicialComplex::from_levels(sets.into_iter().map(|s| s.into_iter().collect()).collect(), None)
    }

    /// The 1-dimensional complex of a graph on `0..n`.
    pub fn graph(n: usize, edges: &[(usize, usize)]) -> Self {
        let verts = (0..n).map(|v| vec![v]);
        let es = edges.iter().filter(|(a, b)| a != b).map(|&(a, b)| vec![a, b]);
        SimplicialComplex::from_simplices(verts.chain(es))
    }

    pub fn with_edge_scale(mut self, scale: Option<Rational>) -> Self {
        self.edge_scale = scale;
        self
    }

    /// Largest distance between the endpoints of an edge, recorded at construction
    /// from a metric space (`None` for abstract complexes).
    pub fn edge_scale(&self) -> Option<&Rational> {
        self.edge_scale.as_ref()
    }

    pub fn dim(&self) -> Option<usize> {
        self.levels.len().checked_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn simplices(&self, k: usize) -> &[Vec<usize>] {
        self.levels.get(k).map_or(&[], |l| l.as_slice())
    }

    pub fn count(&self, k: usize) -> usize {
        self.simplices(k).len()
    }

    pub fn total_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn vertices(&self) -> Vec<usize> {
        self.simplices(0).iter().map(|s| s[0]).collect()
    }

    /// Storage index of an ascending vertex list.
    pub fn position(&self, simplex: &[usize]) -> Option<usize> {
        let k = simplex.len().checked_sub(1)?;
        self.index.get(k)?.get(simplex).copied()
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        let mut s = simplex.to_vec();
        s.sort_unstable();
        self.position(&s).is_some()
    }

    /// Simplices whose vertices all satisfy `keep`.
    pub fn induced<F: Fn(usize) -> bool>(&self, keep: F) -> Self {
        let levels = self.levels.iter().map(|l| l.iter().filter(|s| s.iter().all(|&v| keep(v))).cloned().collect()).collect();
        SimplicialComplex::from_levels(levels, self.edge_scale.clone())
    }

    pub fn truncated(&self, max_dim: usize) -> Self {
        SimplicialComplex::from_levels(self.levels.iter().take(max_dim + 1).cloned().collect(), self.edge_scale.clone())
    }

    pub fn check_subcomplex_of(&self, other: &SimplicialComplex) -> Result<()> {
        for l in &self.levels {
            for s in l {
                if other.position(s).is_none() {
                    return Err(Error::NotASubcomplex { simplex: s.clone() });
                }
            }
        }
        Ok(())
    }

    /// Largest number of simplices containing one vertex.
    pub fn vertex_degree_bound(&self) -> usize {
        let mut count: HashMap<usize, usize> = HashMap::new();
        for l in &self.levels {
            for s in l {
                for &v in s {
                    *count.entry(v).or_default() += 1;
                }
            }
        }
        count.values().copied().max().unwrap_or(0)
    }

    /// Facets of the `(k+1)`-simplex `idx` with their incidence signs `(-1)^i`.
    pub fn facets(&self, k: usize, idx: usize) -> Vec<(usize, bool)> {
        let s = &self.levels[k + 1][idx];
        (0..s.len())
            .map(|i| {
                let f = drop_vertex(s, i);
                (self.position(&f).expect("complex is closed under faces"), i % 2 == 1)
            })
            .collect()
    }

    /// `δ_k` as sparse columns, one per `k`-simplex, indexed by `(k+1)`-simplices.
    pub fn coboundary_columns(&self, k: usize) -> Vec<SparseVec> {
        let mut cols: Vec<SparseVec> = vec![Vec::new(); self.count(k)];
        for row in 0..self.count(k + 1) {
            for (f, neg) in self.facets(k, row) {
                cols[f].push((row, if neg { -Rational::one() } else { Rational::one() }));
            }
        }
        cols
    }

    /// `δ_k` as sparse rows, one per `(k+1)`-simplex.
    pub fn coboundary_rows(&self, k: usize) -> Vec<SparseVec> {
        (0..self.count(k + 1))
            .map(|row| {
                let mut r: SparseVec = self
                    .facets(k, row)
                    .into_iter()
                    .map(|(f, neg)| (f, if neg { -Rational::one() } else { Rational::one() }))
                    .collect();
                r.sort_by_key(|e| e.0);
                r
            })
            .collect()
    }
}

pub(crate) fn drop_vertex(s: &[usize], i: usize) -> Vec<usize> {
    let mut f = Vec::with_capacity(s.len() - 1);
    f.extend_from_slice(&s[..i]);
    f.extend_from_slice(&s[i + 1..]);
    f
}

/// Sign of the permutation sorting `tuple`, or `None` when a vertex repeats.
pub fn sort_sign(tuple: &[usize]) -> Option<bool> {
    let mut odd = false;
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            match tuple[i].cmp(&tuple[j]) {
                core::cmp::Ordering::Equal => return None,
                core::cmp::Ordering::Greater => odd = !odd,
                core::cmp::Ordering::Less => {}
            }
        }
    }
    Some(odd)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cochain {
    degree: usize,
    values: Vec<Rational>,
}

impl Cochain {
    pub fn zero(host: &SimplicialComplex, degree: usize) -> Self {
        Cochain { degree, values: vec![Rational::zero(); host.count(degree)] }
    }

    pub fn new(host: &SimplicialComplex, degree: usize, values: Vec<Rational>) -> Result<Self> {
        let c = Cochain { degree, values };
        c.check_host(host)?;
        Ok(c)
    }

    pub fn from_fn<F: FnMut(&[usize]) -> Rational>(host: &SimplicialComplex, degree: usize, mut f: F) -> Self {
        Cochain { degree, values: host.simplices(degree).iter().map(|s| f(s)).collect() }
    }

    /// Cochain from `(simplex, value)` pairs in any vertex order; unlisted simplices are 0.
    pub fn from_entries(host: &SimplicialComplex, degree: usize, entries: &[(Vec<usize>, Rational)]) -> Result<Self> {
        let mut c = Cochain::zero(host, degree);
        for (s, v) in entries {
            if s.len() != degree + 1 {
                return Err(Error::LengthMismatch(s.len(), degree + 1));
            }
            let mut sorted = s.clone();
            sorted.sort_unstable();
            let sign = sort_sign(s).ok_or_else(|| Error::NotASubcomplex { simplex: s.clone() })?;
            let idx = host.position(&sorted).ok_or_else(|| Error::NotASubcomplex { simplex: s.clone() })?;
            c.values[idx] = if sign { -v.clone() } else { v.clone() };
        }
        Ok(c)
    }

    pub fn check_host(&self, host: &SimplicialComplex) -> Result<()> {
        let expected = host.count(self.degree);
        if self.values.len() != expected {
            return Err(Error::HostMismatch { degree: self.degree, got: self.values.len(), expected });
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Rational> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    /// Value on an ordered vertex tuple: signed for permutations, 0 on repeated
    /// vertices, `None` when the underlying set is not a simplex of `host`.
    pub fn eval(&self, host: &SimplicialComplex, tuple: &[usize]) -> Option<Rational> {
        if tuple.len() != self.degree + 1 {
            return None;
        }
        let Some(odd) = sort_sign(tuple) else { return Some(Rational::zero()) };
        let mut s = tuple.to_vec();
        s.sort_unstable();
        let v = &self.values[host.position(&s)?];
        Some(if odd { -v.clone() } else { v.clone() })
    }

    fn zip_with(&self, other: &Cochain, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Cochain> {
        if self.degree != other.degree || self.values.len() != other.values.len() {
            return Err(Error::HostMismatch { degree: other.degree, got: other.values.len(), expected: self.values.len() });
        }
        Ok(Cochain { degree: self.degree, values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Cochain) -> Result<Cochain> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, a: &Rational) -> Cochain {
        Cochain { degree: self.degree, values: self.values.iter().map(|v| v * a).collect() }
    }

    pub fn neg(&self) -> Cochain {
        Cochain { degree: self.degree, values: self.values.iter().map(|v| -v).collect() }
    }

    pub fn to_sparse(&self) -> SparseVec {
        crate::linalg::sparse_from_dense(&self.values)
    }

    pub fn from_sparse(host: &SimplicialComplex, degree: usize, v: &[(usize, Rational)]) -> Cochain {
        Cochain { degree, values: crate::linalg::dense_from_sparse(v, host.count(degree)) }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(crate::rational::to_f64).collect()
    }
}

/// `(δκ)(x₀…x_{k+1}) = Σ_i (−1)^i κ(x₀…x̂_i…x_{k+1})` on every `(k+1)`-simplex of the host.
pub fn coboundary(host: &SimplicialComplex, kappa: &Cochain) -> Result<Cochain> {
    kappa.check_host(host)?;
    let k = kappa.degree;
    let values = (0..host.count(k + 1))
        .map(|row| {
            let mut acc = Rational::zero();
            for (f, neg) in host.facets(k, row) {
                let v = &kappa.values[f];
                if neg {
                    acc -= v;
                } else {
                    acc += v;
                }
            }
            acc
        })
        .collect();
    Ok(Cochain { degree: k + 1, values })
}

/// Values of `kappa` (on `from`) on the simplices of the subcomplex `to`.
pub fn restrict(from: &SimplicialComplex, to: &SimplicialComplex, kappa: &Cochain) -> Result<Cochain> {
    kappa.check_host(from)?;
    let values = to
        .simplices(kappa.degree)
        .iter()
        .map(|s| from.position(s).map(|i| kappa.values[i].clone()).ok_or_else(|| Error::NotASubcomplex { simplex: s.clone() }))
        .collect::<Result<_>>()?;
    Ok(Cochain { degree: kappa.degree, values })
}

/// Extension by zero from a subcomplex `from` to `to`.
pub fn extend_by_zero(from: &SimplicialComplex, to: &SimplicialComplex, kappa: &Cochain) -> Result<Cochain> {
    kappa.check_host(from)?;
    let mut out = Cochain::zero(to, kappa.degree);
    for (s, v) in from.simplices(kappa.degree).iter().zip(&kappa.values) {
        let i = to.position(s).ok_or_else(|| Error::NotASubcomplex { simplex: s.clone() })?;
        out.values[i] = v.clone();
    }
    Ok(out)
}

/// Maximal edge length of a complex built on `space`.
fn measured_edge_scale(space: &FiniteMetricSpace, levels: &[Vec<Vec<usize>>]) -> Rational {
    levels.get(1).into_iter().flatten().map(|e| space.dist(e[0], e[1]).clone()).max().unwrap_or_else(Rational::zero)
}

fn subsets_up_to(points: &[usize], max_len: usize, out: &mut Vec<BTreeSet<Vec<usize>>>) {
    fn rec(points: &[usize], start: usize, max_len: usize, cur: &mut Vec<usize>, out: &mut Vec<BTreeSet<Vec<usize>>>) {
        for i in start..points.len() {
            cur.push(points[i]);
            out[cur.len() - 1].insert(cur.clone());
            if cur.len() < max_len {
                rec(points, i + 1, max_len, cur, out);
            }
            cur.pop();
        }
    }
    rec(points, 0, max_len, &mut Vec::new(), out);
}

/// `T_S`: vertex sets of size ≤ `max_dim + 1` contained in some closed `S`-ball
/// centred at a point of the space.
pub fn build_rips(space: &FiniteMetricSpace, scale: &Rational, max_dim: usize) -> Result<SimplicialComplex> {
    if *scale <= Rational::zero() {
        return Err(Error::InvalidParams("Rips scale must be positive".into()));
    }
    let mut sets = vec![BTreeSet::new(); max_dim + 1];
    let mut balls: Vec<Vec<usize>> = (0..space.len()).map(|c| space.points_within(c, scale)).collect();
    balls.sort();
    balls.dedup();
    for b in &balls {
        subsets_up_to(b, max_dim + 1, &mut sets);
    }
    let levels: Vec<Vec<Vec<usize>>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
    let e = measured_edge_scale(space, &levels);
    Ok(SimplicialComplex::from_levels(levels, Some(e)))
}

/// Flag complex of the pairs at distance ≤ `scale` (diameter condition).
pub fn build_vietoris_rips(space: &FiniteMetricSpace, scale: &Rational, max_dim: usize) -> Result<SimplicialComplex> {
    if *scale <= Rational::zero() {
        return Err(Error::InvalidParams("Rips scale must be positive".into()));
    }
    let n = space.len();
    let mut levels: Vec<Vec<Vec<usize>>> = vec![Vec::new(); max_dim + 1];
    fn rec(
        space: &FiniteMetricSpace,
        scale: &Rational,
        max_dim: usize,
        cur: &mut Vec<usize>,
        levels: &mut Vec<Vec<Vec<usize>>>,
    ) {
        levels[cur.len() - 1].push(cur.clone());
        if cur.len() > max_dim {
            return;
        }
        let last = *cur.last().expect("nonempty");
        for v in last + 1..space.len() {
            if cur.iter().all(|&u| space.dist(u, v) <= scale) {
                cur.push(v);
                rec(space, scale, max_dim, cur, levels);
                cur.pop();
            }
        }
    }
    for v in 0..n {
        rec(space, scale, max_dim, &mut vec![v], &mut levels);
    }
    for l in levels.iter_mut() {
        l.sort();
    }
    let e = measured_edge_scale(space, &levels);
    Ok(SimplicialComplex::from_levels(levels, Some(e)))
}

/// `C(y, R)`: the simplices of `complex` with every vertex in the closed ball `B(y, R)`.
pub fn ball_subcomplex(complex: &SimplicialComplex, space: &FiniteMetricSpace, y: usize, radius: &Rational) -> Result<SimplicialComplex> {
    if y >= space.len() {
        return Err(Error::InvalidPoint(y));
    }
    Ok(complex.induced(|v| space.dist(y, v) <= radius))
}

/// Nerve of the covering by all closed `R`-balls, one per point, built by
/// intersecting balls; checked against [`build_rips`] at the same scale.
pub fn nerve_of_ball_covering(space: &FiniteMetricSpace, radius: &Rational, max_dim: usize) -> Result<SimplicialComplex> {
    if *radius <= Rational::zero() {
        return Err(Error::InvalidParams("covering radius must be positive".into()));
    }
    let n = space.len();
    let words = n.div_ceil(64).max(1);
    let balls: Vec<Vec<u64>> = (0..n)
        .map(|c| {
            let mut b = vec![0u64; words];
            for p in space.points_within(c, radius) {
                b[p / 64] |= 1 << (p % 64);
            }
            b
        })
        .collect();
    let mut levels: Vec<Vec<Vec<usize>>> = vec![Vec::new(); max_dim + 1];
    let mut stack: Vec<(Vec<usize>, Vec<u64>)> = (0..n).rev().map(|v| (vec![v], balls[v].clone())).collect();
    while let Some((s, inter)) = stack.pop() {
        let last = *s.last().expect("nonempty");
        if s.len() <= max_dim {
            for v in (last + 1..n).rev() {
                let meet: Vec<u64> = inter.iter().zip(&balls[v]).map(|(a, b)| a & b).collect();
                if meet.iter().any(|w| *w != 0) {
                    let mut t = s.clone();
                    t.push(v);
                    stack.push((t, meet));
                }
            }
        }
        levels[s.len() - 1].push(s);
    }
    for l in levels.iter_mut() {
        l.sort();
    }
    let e = measured_edge_scale(space, &levels);
    let nerve = SimplicialComplex::from_levels(levels, Some(e));
    if nerve != build_rips(space, radius, max_dim)? {
        return Err(Error::NerveRipsMismatch);
    }
    Ok(nerve)
}

/// Nonincreasing exponent sequence `(p₀, …, p_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector(Vec<Exponent>);

impl ExponentVector {
    pub fn new(exponents: Vec<Exponent>) -> Result<Self> {
        if exponents.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams("exponent sequence must be nonincreasing".into()));
        }
        Ok(ExponentVector(exponents))
    }

    pub fn constant(p: Exponent, len: usize) -> Self {
        ExponentVector(vec![p; len])
    }

    pub fn get(&self, h: usize) -> Option<&Exponent> {
        self.0.get(h)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::rational::{frac, int};

    #[test]
    fn rips_on_path() {
        let p5 = generators::path(5).unwrap();
        assert_eq!(build_rips(&p5, &frac(1, 2), 2).unwrap().count(1), 0);
        let t = build_rips(&p5, &int(1), 2).unwrap();
        assert_eq!((t.count(0), t.count(1), t.count(2)), (5, 7, 3));
        assert_eq!(t.edge_scale(), Some(&int(2)));
        assert!(t.contains(&[2, 1, 0]));
        assert!(!t.contains(&[0, 3]));
        let c6 = generators::cycle(6).unwrap();
        let full = build_rips(&c6, &int(3), 5).unwrap();
        assert_eq!(full.count(5), 1);
        assert_eq!(full.total_count(), 63);
    }

    #[test]
    fn nerve_matches_rips() {
        for space in [generators::path(5).unwrap(), generators::cycle(7).unwrap(), generators::grid(3, 3).unwrap()] {
            for r in [int(1), int(2), frac(3, 2)] {
                assert_eq!(nerve_of_ball_covering(&space, &r, 3).unwrap(), build_rips(&space, &r, 3).unwrap());
            }
        }
        let pt = generators::path(1).unwrap();
        assert_eq!(nerve_of_ball_covering(&pt, &int(1), 2).unwrap().total_count(), 1);
    }

    #[test]
    fn ball_subcomplex_of_path() {
        let p5 = generators::path(5).unwrap();
        let t = build_rips(&p5, &int(1), 2).unwrap();
        let c = ball_subcomplex(&t, &p5, 2, &int(1)).unwrap();
        assert_eq!(c.vertices(), vec![1, 2, 3]);
        assert_eq!(c.simplices(2), &[vec![1, 2, 3]]);
        assert_eq!(ball_subcomplex(&t, &p5, 2, &int(0)).unwrap().total_count(), 1);
        assert_eq!(ball_subcomplex(&t, &p5, 0, &int(4)).unwrap(), t);
    }

    #[test]
    fn coboundary_examples() {
        let edge = SimplicialComplex::from_simplices([vec![0, 1]]);
        let u = Cochain::new(&edge, 0, vec![int(0), int(1)]).unwrap();
        assert_eq!(coboundary(&edge, &u).unwrap().values(), &[int(1)]);
        let tri = SimplicialComplex::from_simplices([vec![0, 1, 2]]);
        let k = Cochain::new(&tri, 1, vec![int(1); 3]).unwrap();
        assert_eq!(coboundary(&tri, &k).unwrap().values(), &[int(1)]);
        assert!(coboundary(&tri, &u).is_err());
    }

    #[test]
    fn signed_evaluation() {
        let tri = SimplicialComplex::from_simplices([vec![0, 1, 2]]);
        let k = Cochain::from_entries(&tri, 1, &[(vec![1, 0], int(3))]).unwrap();
        assert_eq!(k.eval(&tri, &[0, 1]), Some(int(-3)));
        assert_eq!(k.eval(&tri, &[1, 0]), Some(int(3)));
        assert_eq!(k.eval(&tri, &[1, 1]), Some(int(0)));
        assert_eq!(k.eval(&tri, &[0, 5]), None);
    }

    #[test]
    fn vietoris_rips_cycle() {
        let c12 = generators::cycle(12).unwrap();
        let g = build_vietoris_rips(&c12, &int(1), 2).unwrap();
        assert_eq!((g.count(1), g.count(2)), (12, 0));
        assert_eq!(g.edge_scale(), Some(&int(1)));
    }

    #[test]
    fn exponent_vectors() {
        use crate::norms::Exponent;
        assert!(ExponentVector::new(vec![Exponent::Infinity, Exponent::finite(int(2)).unwrap()]).is_ok());
        assert!(ExponentVector::new(vec![Exponent::finite(int(1)).unwrap(), Exponent::Infinity]).is_err());
    }
}
