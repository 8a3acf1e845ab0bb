//! Finite metric spaces, closed balls, (ℓ,R,S)-packings and coarse maps.
//!
//! Distances are exact rationals, so ball membership and the disjointness of
//! dilated balls are decided without rounding. Balls are closed:
//! `x ∈ B(c, r)` iff `d(c, x) ≤ r`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Add;

use num_traits::{Signed, Zero};

use crate::rational::int;
use crate::{Error, Rational, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace {
    n: usize,
    dist: Vec<Rational>,
    labels: Option<Vec<String>>,
}

impl FiniteMetricSpace {
    /// Validates a raw distance table against the metric axioms.
    pub fn new(table: Vec<Vec<Rational>>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = table.len();
        for (row, r) in table.iter().enumerate() {
            if r.len() != n {
                return Err(Error::NotSquare { row, len: r.len(), expected: n });
            }
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(Error::InvalidParams(alloc::format!("{} labels for {} points", l.len(), n)));
            }
        }
        for x in 0..n {
            if !table[x][x].is_zero() {
                return Err(Error::NonzeroDiagonal(x));
            }
            for y in 0..n {
                if table[x][y].is_negative() {
                    return Err(Error::NegativeDistance { x, y });
                }
                if table[x][y] != table[y][x] {
                    return Err(Error::AsymmetricDistance { x: x.min(y), y: x.max(y) });
                }
                if x != y && table[x][y].is_zero() {
                    return Err(Error::ZeroDistanceDistinctPoints { x: x.min(y), y: x.max(y) });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if table[x][z] > &table[x][y] + &table[y][z] {
                        return Err(Error::TriangleViolation { x, y, z });
                    }
                }
            }
        }
        let dist = table.into_iter().flatten().collect();
        Ok(FiniteMetricSpace { n, dist, labels })
    }

    /// Shortest-path metric of a connected graph with positive edge weights.
    pub fn from_weighted_edges(n: usize, edges: &[(usize, usize, Rational)], labels: Option<Vec<String>>) -> Result<Self> {
        let mut d: Vec<Vec<Option<Rational>>> = vec![vec![None; n]; n];
        for (x, row) in d.iter_mut().enumerate() {
            row[x] = Some(Rational::zero());
        }
        for (a, b, w) in edges {
            if *a >= n || *b >= n {
                return Err(Error::InvalidPoint((*a).max(*b)));
            }
            if !w.is_positive() {
                return Err(Error::InvalidParams(alloc::format!("edge {a}-{b} has nonpositive weight")));
            }
            if a == b {
                continue;
            }
            let better = d[*a][*b].as_ref().is_none_or(|cur| w < cur);
            if better {
                d[*a][*b] = Some(w.clone());
                d[*b][*a] = Some(w.clone());
            }
        }
        for k in 0..n {
            for i in 0..n {
                let Some(dik) = d[i][k].clone() else { continue };
                for j in 0..n {
                    if let Some(dkj) = &d[k][j] {
                        let via = &dik + dkj;
                        if d[i][j].as_ref().is_none_or(|cur| via < *cur) {
                            d[i][j] = Some(via);
                        }
                    }
                }
            }
        }
        let mut table = Vec::with_capacity(n);
        for row in d {
            let mut r = Vec::with_capacity(n);
            for (j, v) in row.into_iter().enumerate() {
                r.push(v.ok_or(Error::Disconnected(j))?);
            }
            table.push(r);
        }
        FiniteMetricSpace::new(table, labels)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dist(&self, x: usize, y: usize) -> &Rational {
        &self.dist[x * self.n + y]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn table(&self) -> Vec<Vec<Rational>> {
        self.dist.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn diameter(&self) -> Rational {
        self.dist.iter().max().cloned().unwrap_or_else(Rational::zero)
    }

    /// Distinct distance values, ascending (including 0).
    pub fn distance_values(&self) -> Vec<Rational> {
        let mut v = self.dist.clone();
        v.sort();
        v.dedup();
        v
    }

    pub fn min_positive_distance(&self) -> Option<Rational> {
        self.dist.iter().filter(|d| d.is_positive()).min().cloned()
    }

    fn check_point(&self, x: usize) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::InvalidPoint(x))
        }
    }

    /// Sorted ids of the points of the closed ball.
    pub fn ball_points(&self, ball: &Ball) -> Result<Vec<usize>> {
        self.check_point(ball.center)?;
        Ok(self.points_within(ball.center, &ball.radius))
    }

    pub(crate) fn points_within(&self, center: usize, radius: &Rational) -> Vec<usize> {
        (0..self.n).filter(|&x| self.dist(center, x) <= radius).collect()
    }

    /// `V(S)`: the largest number of points in a closed `S`-ball.
    pub fn ball_vertex_bound(&self, radius: &Rational) -> usize {
        (0..self.n).map(|c| self.points_within(c, radius).len()).max().unwrap_or(0)
    }

    /// Smallest `r` such that `points ⊆ B(c, r)` for some point `c`; zero for the empty set.
    pub fn enclosing_radius(&self, points: &[usize]) -> Rational {
        if points.is_empty() {
            return Rational::zero();
        }
        (0..self.n)
            .map(|c| points.iter().map(|&p| self.dist(c, p)).max().cloned().unwrap_or_else(Rational::zero))
            .min()
            .unwrap_or_else(Rational::zero)
    }

    /// Whether some closed `radius`-ball contains all of `points`.
    pub fn fits_in_ball(&self, points: &[usize], radius: &Rational) -> bool {
        (0..self.n).any(|c| points.iter().all(|&p| self.dist(c, p) <= radius))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Ball {
    pub center: usize,
    pub radius: Rational,
}

impl Ball {
    pub fn new(center: usize, radius: Rational) -> Result<Self> {
        if radius.is_negative() {
            return Err(Error::InvalidParams("negative ball radius".into()));
        }
        Ok(Ball { center, radius })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingParams {
    pub ell: Rational,
    pub rmin: Rational,
    pub rmax: Rational,
}

impl PackingParams {
    pub fn new(ell: Rational, rmin: Rational, rmax: Rational) -> Result<Self> {
        if ell < int(1) || !rmin.is_positive() || rmax < rmin {
            return Err(Error::InvalidParams("packing parameters need ell >= 1 and 0 < rmin <= rmax".into()));
        }
        Ok(PackingParams { ell, rmin, rmax })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Packing {
    pub balls: Vec<Ball>,
}

impl Packing {
    /// Radii in `[rmin, rmax]` and pairwise disjoint `ell`-dilates.
    pub fn is_admissible(&self, space: &FiniteMetricSpace, params: &PackingParams) -> bool {
        if self.balls.iter().any(|b| b.center >= space.len() || b.radius < params.rmin || b.radius > params.rmax) {
            return false;
        }
        let dilates: Vec<Vec<usize>> =
            self.balls.iter().map(|b| space.points_within(b.center, &(&b.radius * &params.ell))).collect();
        for i in 0..dilates.len() {
            for j in i + 1..dilates.len() {
                if dilates[i].iter().any(|p| dilates[j].binary_search(p).is_ok()) {
                    return false;
                }
            }
        }
        true
    }
}

/// Default bound on the number of candidate balls for the exact packing search.
pub const DEFAULT_CANDIDATE_CAP: usize = 64;

#[derive(Debug, Clone)]
struct Candidate<W> {
    ball: Ball,
    dilate: Vec<u64>,
    weight: W,
}

fn bits(points: &[usize], n: usize) -> Vec<u64> {
    let mut b = vec![0u64; n.div_ceil(64).max(1)];
    for &p in points {
        b[p / 64] |= 1 << (p % 64);
    }
    b
}

fn overlaps(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

/// Candidate balls of an (ℓ,R,S)-packing search: every center, every distance
/// value in `[rmin, rmax]` plus both endpoints. For a fixed center, radii giving
/// the same point set are merged into the smallest one (its dilate is the
/// smallest); zero-weight balls are dropped since they never change a sum.
fn candidates<W, F>(space: &FiniteMetricSpace, params: &PackingParams, weight: &F) -> Vec<Candidate<W>>
where
    W: Clone + PartialOrd + Zero,
    F: Fn(&[usize]) -> W,
{
    let mut radii: Vec<Rational> =
        space.distance_values().into_iter().filter(|d| *d >= params.rmin && *d <= params.rmax).collect();
    radii.push(params.rmin.clone());
    radii.push(params.rmax.clone());
    radii.sort();
    radii.dedup();
    let mut out: Vec<Candidate<W>> = Vec::new();
    for c in 0..space.len() {
        let mut last: Option<Vec<usize>> = None;
        for r in &radii {
            let points = space.points_within(c, r);
            if last.as_ref() == Some(&points) {
                continue;
            }
            let w = weight(&points);
            last = Some(points);
            if w <= W::zero() {
                continue;
            }
            let dilate = bits(&space.points_within(c, &(r * &params.ell)), space.len());
            out.push(Candidate { ball: Ball { center: c, radius: r.clone() }, dilate, weight: w });
        }
    }
    out.sort_by(|a, b| b.weight.partial_cmp(&a.weight).unwrap_or(core::cmp::Ordering::Equal).then(a.ball.cmp(&b.ball)));
    out
}

/// Number of candidate balls the exact search would branch over.
pub fn candidate_count<W, F>(space: &FiniteMetricSpace, params: &PackingParams, weight: F) -> usize
where
    W: Clone + PartialOrd + Zero,
    F: Fn(&[usize]) -> W,
{
    candidates(space, params, &weight).len()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingOptimum<W> {
    pub packing: Packing,
    pub total: W,
    pub candidates: usize,
}

struct Search<'a, W> {
    cands: &'a [Candidate<W>],
    conflicts: Vec<Vec<u64>>,
    best: W,
    best_set: Vec<usize>,
}

impl<W> Search<'_, W>
where
    W: Clone + PartialOrd + Add<Output = W> + Zero,
{
    /// Clique-cover bound: greedily partition the available candidates (taken in
    /// weight order) into sets of pairwise-conflicting balls; a packing picks at
    /// most one per set, so the sum of the per-set maxima bounds the remainder.
    fn bound(&self, avail: &[u64]) -> W {
        let mut cliques: Vec<(W, Vec<u64>)> = Vec::new();
        for i in iter_bits(avail) {
            let slot = cliques.iter_mut().find(|(_, members)| iter_bits(members).all(|m| get_bit(&self.conflicts[i], m)));
            match slot {
                Some((_, members)) => set_bit(members, i),
                None => {
                    let mut m = vec![0u64; avail.len()];
                    set_bit(&mut m, i);
                    cliques.push((self.cands[i].weight.clone(), m));
                }
            }
        }
        cliques.into_iter().fold(W::zero(), |acc, (w, _)| acc + w)
    }

    fn run(&mut self, avail: Vec<u64>, current: W, chosen: &mut Vec<usize>) {
        let Some(i) = iter_bits(&avail).next() else {
            if current > self.best {
                self.best = current;
                self.best_set = chosen.clone();
            }
            return;
        };
        if current.clone() + self.bound(&avail) <= self.best {
            return;
        }
        let mut with = avail.clone();
        clear_bit(&mut with, i);
        for (w, c) in with.iter_mut().zip(&self.conflicts[i]) {
            *w &= !c;
        }
        chosen.push(i);
        self.run(with, current.clone() + self.cands[i].weight.clone(), chosen);
        chosen.pop();
        let mut without = avail;
        clear_bit(&mut without, i);
        self.run(without, current, chosen);
    }
}

fn get_bit(b: &[u64], i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}
fn set_bit(b: &mut [u64], i: usize) {
    b[i / 64] |= 1 << (i % 64);
}
fn clear_bit(b: &mut [u64], i: usize) {
    b[i / 64] &= !(1 << (i % 64));
}
fn iter_bits(b: &[u64]) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        core::iter::from_fn(move || {
            if x == 0 {
                None
            } else {
                let t = x.trailing_zeros() as usize;
                x &= x - 1;
                Some(w * 64 + t)
            }
        })
    })
}

/// Packing maximizing `Σ_j weight(points of B_j)`, by branch and bound over the
/// candidate balls. The empty packing is admissible, so the optimum is ≥ 0.
pub fn enumerate_maximal_packings<W, F>(
    space: &FiniteMetricSpace,
    params: &PackingParams,
    cap: usize,
    weight: F,
) -> Result<PackingOptimum<W>>
where
    W: Clone + PartialOrd + Add<Output = W> + Zero,
    F: Fn(&[usize]) -> W,
{
    let cands = candidates(space, params, &weight);
    if cands.len() > cap {
        return Err(Error::CandidateCapExceeded { count: cands.len(), cap });
    }
    let m = cands.len();
    let words = m.div_ceil(64).max(1);
    let mut conflicts = vec![vec![0u64; words]; m];
    for i in 0..m {
        for j in i + 1..m {
            if overlaps(&cands[i].dilate, &cands[j].dilate) {
                set_bit(&mut conflicts[i], j);
                set_bit(&mut conflicts[j], i);
            }
        }
    }
    let greedy = greedy_indices(&cands);
    let greedy_total = greedy.iter().fold(W::zero(), |acc, &i| acc + cands[i].weight.clone());
    let mut search = Search { cands: &cands, conflicts, best: greedy_total, best_set: greedy };
    let mut all = vec![0u64; words];
    for i in 0..m {
        set_bit(&mut all, i);
    }
    search.run(all, W::zero(), &mut Vec::new());
    let mut balls: Vec<Ball> = search.best_set.iter().map(|&i| cands[i].ball.clone()).collect();
    balls.sort();
    Ok(PackingOptimum { packing: Packing { balls }, total: search.best, candidates: m })
}

fn greedy_indices<W>(cands: &[Candidate<W>]) -> Vec<usize> {
    let mut used: Option<Vec<u64>> = None;
    let mut picked = Vec::new();
    for (i, c) in cands.iter().enumerate() {
        let free = used.as_ref().is_none_or(|u| !overlaps(u, &c.dilate));
        if free {
            picked.push(i);
            match &mut used {
                Some(u) => u.iter_mut().zip(&c.dilate).for_each(|(a, b)| *a |= b),
                None => used = Some(c.dilate.clone()),
            }
        }
    }
    picked
}

/// Greedy admissible packing: balls in decreasing weight order, kept when their
/// dilate misses all dilates kept so far. A lower bound for the optimum.
pub fn greedy_packing<W, F>(space: &FiniteMetricSpace, params: &PackingParams, weight: F) -> PackingOptimum<W>
where
    W: Clone + PartialOrd + Add<Output = W> + Zero,
    F: Fn(&[usize]) -> W,
{
    let cands = candidates(space, params, &weight);
    let picked = greedy_indices(&cands);
    let total = picked.iter().fold(W::zero(), |acc, &i| acc + cands[i].weight.clone());
    let mut balls: Vec<Ball> = picked.iter().map(|&i| cands[i].ball.clone()).collect();
    balls.sort();
    PackingOptimum { packing: Packing { balls }, total, candidates: cands.len() }
}

/// Sum of all candidate weights: a crude upper bound for any packing.
pub fn candidate_weight_sum<W, F>(space: &FiniteMetricSpace, params: &PackingParams, weight: F) -> W
where
    W: Clone + PartialOrd + Add<Output = W> + Zero,
    F: Fn(&[usize]) -> W,
{
    candidates(space, params, &weight).into_iter().fold(W::zero(), |acc, c| acc + c.weight)
}

/// Colors points in nondecreasing distance from `origin` (ties by index); each
/// point takes the smallest color not used by an already colored point within
/// `separation`. Same-colored points end up more than `separation` apart.
pub fn greedy_ball_coloring(space: &FiniteMetricSpace, separation: &Rational, origin: usize) -> Result<Vec<usize>> {
    space.check_point(origin)?;
    if separation.is_negative() {
        return Err(Error::InvalidParams("negative separation".into()));
    }
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.sort_by(|&a, &b| space.dist(origin, a).cmp(space.dist(origin, b)).then(a.cmp(&b)));
    let mut color: Vec<Option<usize>> = vec![None; space.len()];
    for &y in &order {
        let mut used: Vec<usize> =
            (0..space.len()).filter(|&x| space.dist(x, y) <= separation).filter_map(|x| color[x]).collect();
        used.sort_unstable();
        used.dedup();
        let c = (0..).find(|c| used.binary_search(c).is_err()).expect("unbounded search");
        color[y] = Some(c);
    }
    Ok(color.into_iter().map(|c| c.expect("every point colored")).collect())
}

pub fn color_count(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |m| m + 1)
}

/// A map between the points of two finite metric spaces.
#[derive(Debug, Clone)]
pub struct CoarseMap<'a> {
    source: &'a FiniteMetricSpace,
    target: &'a FiniteMetricSpace,
    image: Vec<usize>,
}

impl<'a> CoarseMap<'a> {
    pub fn new(source: &'a FiniteMetricSpace, target: &'a FiniteMetricSpace, image: Vec<usize>) -> Result<Self> {
        if image.len() != source.len() {
            return Err(Error::InvalidParams(alloc::format!(
                "map defined on {} points, source has {}",
                image.len(),
                source.len()
            )));
        }
        if let Some(&bad) = image.iter().find(|&&y| y >= target.len()) {
            return Err(Error::InvalidPoint(bad));
        }
        Ok(CoarseMap { source, target, image })
    }

    pub fn identity(space: &'a FiniteMetricSpace) -> Self {
        CoarseMap { source: space, target: space, image: (0..space.len()).collect() }
    }

    pub fn source(&self) -> &'a FiniteMetricSpace {
        self.source
    }

    pub fn target(&self) -> &'a FiniteMetricSpace {
        self.target
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, x: usize) -> usize {
        self.image[x]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &CoarseMap<'a>) -> Result<CoarseMap<'a>> {
        if self.target != other.source {
            return Err(Error::SpaceMismatch);
        }
        Ok(CoarseMap { source: self.source, target: other.target, image: self.image.iter().map(|&y| other.image[y]).collect() })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Modulus {
    /// Smallest radius containing every image `f(B)` of a `T`-ball.
    pub forward: Rational,
    /// Smallest radius containing every preimage `f⁻¹(B')` of a `T`-ball.
    pub backward: Rational,
}

impl Modulus {
    pub fn value(&self) -> Rational {
        self.forward.clone().max(self.backward.clone())
    }
}

/// Exact coarse modulus `T'(T)` of `f`, split into its forward and preimage parts.
pub fn coarse_modulus(f: &CoarseMap<'_>, t: &Rational) -> Modulus {
    let forward = (0..f.source.len())
        .map(|x| {
            let mut img: Vec<usize> = f.source.points_within(x, t).into_iter().map(|p| f.image[p]).collect();
            img.sort_unstable();
            img.dedup();
            f.target.enclosing_radius(&img)
        })
        .max()
        .unwrap_or_else(Rational::zero);
    let backward = (0..f.target.len())
        .map(|y| {
            let ball = f.target.points_within(y, t);
            let pre: Vec<usize> = (0..f.source.len()).filter(|&x| ball.binary_search(&f.image[x]).is_ok()).collect();
            f.source.enclosing_radius(&pre)
        })
        .max()
        .unwrap_or_else(Rational::zero);
    Modulus { forward, backward }
}

/// `sup_x d(f(x), g(x))`.
pub fn map_distance(f: &CoarseMap<'_>, g: &CoarseMap<'_>) -> Result<Rational> {
    if f.source != g.source || f.target != g.target {
        return Err(Error::SpaceMismatch);
    }
    Ok((0..f.source.len()).map(|x| f.target.dist(f.image[x], g.image[x]).clone()).max().unwrap_or_else(Rational::zero))
}
