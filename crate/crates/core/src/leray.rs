//! Nested ball coverings and the double-complex staircase between a complex and
//! the nerve of its ball covering.
//!
//! Level `j` of the covering uses the balls `C(y_i, R_j)` around a fixed set of
//! centers; the nerve is always that of level 0. A bicomplex component at
//! bidegree `(h, k)` and level `j` assigns to every `h`-simplex `I` of the nerve
//! (in storage order) a `k`-cochain on the piece `U^j_I = ∩_{i∈I} C(y_i, R_j)`.
//!
//! Conventions: `d′` is the alternating Čech coboundary with restriction to the
//! smaller piece, `d″ = (−1)^h d` is the piecewise simplicial coboundary, and `r`
//! restricts from level `j` to level `j − 1`.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use hashbrown::HashMap;
use num_traits::{One, Zero};

use crate::cohomology::{classes_equal, vanishing_radius, CoboundarySolver, PoincarePair, VanishingRadius};
use crate::norms::{lp_norm, Exponent};
use crate::rational::to_f64;
use crate::simplicial::{ball_subcomplex, coboundary, cup_aw, drop_vertex, extend_by_zero, restrict, sort_sign};
use crate::{Cochain, Error, FiniteMetricSpace, Rational, Result, SimplicialComplex};

/// A covering piece together with lazily built coboundary solvers.
pub struct Piece {
    pub complex: SimplicialComplex,
    solvers: RefCell<HashMap<usize, Rc<CoboundarySolver>>>,
}

impl Piece {
    fn new(complex: SimplicialComplex) -> Self {
        Piece { complex, solvers: RefCell::new(HashMap::new()) }
    }

    pub fn solver(&self, k: usize) -> Rc<CoboundarySolver> {
        self.solvers.borrow_mut().entry(k).or_insert_with(|| Rc::new(CoboundarySolver::new(&self.complex, k))).clone()
    }
}

pub struct NestedCoverings {
    space: FiniteMetricSpace,
    complex: SimplicialComplex,
    radii: Vec<Rational>,
    max_degree: usize,
    centers: Vec<usize>,
    nerve: SimplicialComplex,
    pieces: RefCell<HashMap<(usize, usize, usize), Rc<Piece>>>,
}

/// Centers of a maximal family of pairwise disjoint closed `r`-balls, chosen greedily by index.
pub fn separated_centers(space: &FiniteMetricSpace, r: &Rational) -> Vec<usize> {
    let mut chosen: Vec<(usize, Vec<usize>)> = Vec::new();
    for c in 0..space.len() {
        let ball = space.points_within(c, r);
        if chosen.iter().all(|(_, b)| !b.iter().any(|p| ball.binary_search(p).is_ok())) {
            chosen.push((c, ball));
        }
    }
    chosen.into_iter().map(|(c, _)| c).collect()
}

/// Nested coverings with one ball per point and the radii schedule
/// `R₀ = R`, `R_{j+1} = R̃(R_j + R) + R`, where `R̃` is the vanishing radius in
/// degrees `0..=max_degree` over all centers.
pub fn build_nested_coverings(
    space: &FiniteMetricSpace,
    complex: &SimplicialComplex,
    radius: &Rational,
    levels: usize,
    max_degree: usize,
) -> Result<NestedCoverings> {
    let centers: Vec<usize> = (0..space.len()).collect();
    build_nested_coverings_with_centers(space, complex, radius, levels, max_degree, centers)
}

pub fn build_nested_coverings_with_centers(
    space: &FiniteMetricSpace,
    complex: &SimplicialComplex,
    radius: &Rational,
    levels: usize,
    max_degree: usize,
    centers: Vec<usize>,
) -> Result<NestedCoverings> {
    if *radius <= Rational::zero() {
        return Err(Error::InvalidParams("covering radius must be positive".into()));
    }
    if centers.is_empty() {
        return Err(Error::InvalidParams("a covering needs at least one center".into()));
    }
    if let Some(&bad) = centers.iter().find(|&&c| c >= space.len()) {
        return Err(Error::InvalidPoint(bad));
    }
    if let Some(v) = complex.vertices().into_iter().find(|&v| v >= space.len()) {
        return Err(Error::InvalidPoint(v));
    }
    let mut radii = vec![radius.clone()];
    for j in 0..levels {
        let probe = &radii[j] + radius;
        match vanishing_radius(space, complex, &probe, max_degree, Some(&centers), true)? {
            VanishingRadius::Found(rt) => radii.push(rt + radius),
            VanishingRadius::NotFound { cap } => {
                let (center, degree) = first_failure(space, complex, &probe, &cap, max_degree, &centers)?;
                return Err(Error::VanishingFailure { level: j, center, degree });
            }
        }
    }
    let nerve = nerve_of_centers(space, &centers, radius, max_degree + 1);
    Ok(NestedCoverings {
        space: space.clone(),
        complex: complex.clone(),
        radii,
        max_degree,
        centers,
        nerve,
        pieces: RefCell::new(HashMap::new()),
    })
}

fn first_failure(
    space: &FiniteMetricSpace,
    complex: &SimplicialComplex,
    inner_r: &Rational,
    outer_r: &Rational,
    max_degree: usize,
    centers: &[usize],
) -> Result<(usize, usize)> {
    for &y in centers {
        let pair = PoincarePair {
            inner: ball_subcomplex(complex, space, y, inner_r)?,
            outer: ball_subcomplex(complex, space, y, outer_r)?,
        };
        for d in 0..=max_degree {
            if !crate::cohomology::restriction_vanishes(&pair, d, true) {
                return Ok((y, d));
            }
        }
    }
    Ok((centers[0], 0))
}

/// Nerve of the balls `B(c, R)` for the given centers; vertex `i` is `centers[i]`.
fn nerve_of_centers(space: &FiniteMetricSpace, centers: &[usize], radius: &Rational, max_dim: usize) -> SimplicialComplex {
    let balls: Vec<Vec<usize>> = centers.iter().map(|&c| space.points_within(c, radius)).collect();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut stack: Vec<(Vec<usize>, Vec<usize>)> = (0..centers.len()).rev().map(|i| (vec![i], balls[i].clone())).collect();
    while let Some((s, inter)) = stack.pop() {
        let last = *s.last().expect("nonempty");
        if s.len() <= max_dim {
            for i in (last + 1..centers.len()).rev() {
                let meet: Vec<usize> = inter.iter().copied().filter(|p| balls[i].binary_search(p).is_ok()).collect();
                if !meet.is_empty() {
                    let mut t = s.clone();
                    t.push(i);
                    stack.push((t, meet));
                }
            }
        }
        out.push(s);
    }
    SimplicialComplex::from_simplices(out)
}

/// One homogeneous bicomplex component: a cochain per nerve simplex of dimension `h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub level: usize,
    pub h: usize,
    pub k: usize,
    pub parts: Vec<Cochain>,
}

impl Component {
    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(Cochain::is_zero)
    }

    fn values_f64(&self) -> Vec<f64> {
        self.parts.iter().flat_map(|c| c.values().iter().map(to_f64)).collect()
    }

    pub fn counting_norm(&self, p: &Exponent) -> f64 {
        lp_norm(&self.values_f64(), p)
    }

    fn same_shape(&self, other: &Component) -> Result<()> {
        if (self.level, self.h, self.k, self.parts.len()) != (other.level, other.h, other.k, other.parts.len()) {
            return Err(Error::InvalidParams("bicomplex components have different shapes".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Component) -> Result<Component> {
        self.same_shape(other)?;
        let parts = self.parts.iter().zip(&other.parts).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(Component { level: self.level, h: self.h, k: self.k, parts })
    }

    pub fn sub(&self, other: &Component) -> Result<Component> {
        self.same_shape(other)?;
        let parts = self.parts.iter().zip(&other.parts).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(Component { level: self.level, h: self.h, k: self.k, parts })
    }

    pub fn neg(&self) -> Component {
        Component { level: self.level, h: self.h, k: self.k, parts: self.parts.iter().map(Cochain::neg).collect() }
    }
}

/// A bicomplex element: components indexed by bidegree at one nesting level.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BicomplexElement {
    pub level: usize,
    pub components: BTreeMap<(usize, usize), Component>,
}

impl BicomplexElement {
    pub fn single(c: Component) -> Self {
        let mut components = BTreeMap::new();
        let level = c.level;
        components.insert((c.h, c.k), c);
        BicomplexElement { level, components }
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(Component::is_zero)
    }

    pub fn add(&self, other: &BicomplexElement) -> Result<BicomplexElement> {
        let mut out = self.clone();
        for (key, c) in &other.components {
            let merged = match out.components.get(key) {
                Some(existing) => existing.add(c)?,
                None => c.clone(),
            };
            out.components.insert(*key, merged);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &BicomplexElement) -> Result<BicomplexElement> {
        let neg = BicomplexElement {
            level: other.level,
            components: other.components.iter().map(|(k, c)| (*k, c.neg())).collect(),
        };
        self.add(&neg)
    }
}

/// `χ_i = η_i / Σ_j η_j` with `η_i` the indicator of `B(y_i, R − e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    /// For each vertex of the complex (by point id), the nonzero `(center index, χ)` pairs.
    weights: BTreeMap<usize, Vec<(usize, Rational)>>,
    ncenters: usize,
}

impl PartitionOfUnity {
    pub fn at(&self, vertex: usize) -> &[(usize, Rational)] {
        self.weights.get(&vertex).map_or(&[], |v| v.as_slice())
    }

    /// `χ_i` as a 0-cochain on `host`.
    pub fn chi(&self, host: &SimplicialComplex, i: usize) -> Cochain {
        Cochain::from_fn(host, 0, |s| {
            self.at(s[0]).iter().find(|(c, _)| *c == i).map_or_else(Rational::zero, |(_, w)| w.clone())
        })
    }

    pub fn len(&self) -> usize {
        self.ncenters
    }

    pub fn is_empty(&self) -> bool {
        self.ncenters == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToNerve,
    ToSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Embed,
    Restrict,
    InvertVertical,
    Cech,
    Epsilon,
    Vertical,
    Sample,
    Glue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub kind: StepKind,
    pub level: usize,
    pub bidegree: (usize, usize),
    /// Counting ℓ² norms of the step's input and output.
    pub input_norm: f64,
    pub output_norm: f64,
    pub output: Vec<Cochain>,
}

impl Step {
    /// `output_norm / input_norm`, or 0 for a zero input.
    pub fn constant(&self) -> f64 {
        if self.input_norm == 0.0 {
            0.0
        } else {
            self.output_norm / self.input_norm
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferWitness {
    pub direction: Direction,
    pub degree: usize,
    pub input: Cochain,
    pub output: Cochain,
    pub steps: Vec<Step>,
}

fn l2(values: &[Cochain]) -> f64 {
    let v: Vec<f64> = values.iter().flat_map(|c| c.values().iter().map(to_f64)).collect();
    lp_norm(&v, &Exponent::integer(2))
}

struct Recorder {
    steps: Vec<Step>,
}

impl Recorder {
    fn push(&mut self, kind: StepKind, c: &Component, input_norm: f64) {
        self.steps.push(Step {
            kind,
            level: c.level,
            bidegree: (c.h, c.k),
            input_norm,
            output_norm: l2(&c.parts),
            output: c.parts.clone(),
        });
    }
}

impl NestedCoverings {
    pub fn space(&self) -> &FiniteMetricSpace {
        &self.space
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn nerve(&self) -> &SimplicialComplex {
        &self.nerve
    }

    pub fn radii(&self) -> &[Rational] {
        &self.radii
    }

    pub fn levels(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn centers(&self) -> &[usize] {
        &self.centers
    }

    /// `U^j_I` for the `h`-simplex of the nerve at storage index `idx`.
    pub fn piece(&self, level: usize, h: usize, idx: usize) -> Rc<Piece> {
        let key = (level, h, idx);
        if let Some(p) = self.pieces.borrow().get(&key) {
            return p.clone();
        }
        let simplex = &self.nerve.simplices(h)[idx];
        let r = &self.radii[level];
        let ys: Vec<usize> = simplex.iter().map(|&i| self.centers[i]).collect();
        let complex = self.complex.induced(|v| ys.iter().all(|&y| self.space.dist(y, v) <= r));
        let p = Rc::new(Piece::new(complex));
        self.pieces.borrow_mut().insert(key, p.clone());
        p
    }

    fn check_level(&self, level: usize) -> Result<()> {
        if level >= self.radii.len() {
            return Err(Error::InvalidParams(alloc::format!("level {level} exceeds the {} built levels", self.levels())));
        }
        Ok(())
    }

    pub fn zero_component(&self, level: usize, h: usize, k: usize) -> Result<Component> {
        self.check_level(level)?;
        let parts = (0..self.nerve.count(h)).map(|i| Cochain::zero(&self.piece(level, h, i).complex, k)).collect();
        Ok(Component { level, h, k, parts })
    }

    /// Builds a component from a function of (nerve simplex, piece).
    pub fn component_from_fn<F>(&self, level: usize, h: usize, k: usize, mut f: F) -> Result<Component>
    where
        F: FnMut(&[usize], &SimplicialComplex) -> Cochain,
    {
        self.check_level(level)?;
        let parts = self.nerve.simplices(h).iter().enumerate().map(|(i, s)| f(s, &self.piece(level, h, i).complex)).collect();
        let c = Component { level, h, k, parts };
        self.check_component(&c)?;
        Ok(c)
    }

    fn check_component(&self, c: &Component) -> Result<()> {
        self.check_level(c.level)?;
        if c.parts.len() != self.nerve.count(c.h) {
            return Err(Error::HostMismatch { degree: c.h, got: c.parts.len(), expected: self.nerve.count(c.h) });
        }
        for (i, part) in c.parts.iter().enumerate() {
            if part.degree() != c.k {
                return Err(Error::InvalidParams("component cochain has the wrong degree".into()));
            }
            part.check_host(&self.piece(c.level, c.h, i).complex)?;
        }
        Ok(())
    }

    /// `d′ = δ_Čech`: `(d′φ)_{i₀…i_{h+1}} = Σ_m (−1)^m φ_{i₀…î_m…i_{h+1}}` restricted to the smaller piece.
    pub fn d_prime(&self, c: &Component) -> Result<Component> {
        self.check_component(c)?;
        let h1 = c.h + 1;
        let mut parts = Vec::with_capacity(self.nerve.count(h1));
        for (idx, s) in self.nerve.simplices(h1).iter().enumerate() {
            let target = self.piece(c.level, h1, idx);
            let mut acc = Cochain::zero(&target.complex, c.k);
            for m in 0..s.len() {
                let face = drop_vertex(s, m);
                let fi = self.nerve.position(&face).expect("nerve is closed under faces");
                let src = self.piece(c.level, c.h, fi);
                let r = restrict(&src.complex, &target.complex, &c.parts[fi])?;
                acc = if m % 2 == 0 { acc.add(&r)? } else { acc.sub(&r)? };
            }
            parts.push(acc);
        }
        Ok(Component { level: c.level, h: h1, k: c.k, parts })
    }

    /// `d″ = (−1)^h d` on every piece.
    pub fn d_second(&self, c: &Component) -> Result<Component> {
        self.check_component(c)?;
        let parts = c
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = coboundary(&self.piece(c.level, c.h, i).complex, p)?;
                Ok(if c.h % 2 == 1 { d.neg() } else { d })
            })
            .collect::<Result<_>>()?;
        Ok(Component { level: c.level, h: c.h, k: c.k + 1, parts })
    }

    /// `r`: restriction from level `j` to level `j − 1`.
    pub fn restrict_level(&self, c: &Component) -> Result<Component> {
        self.check_component(c)?;
        if c.level == 0 {
            return Err(Error::LevelUnderflow);
        }
        let parts = c
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| restrict(&self.piece(c.level, c.h, i).complex, &self.piece(c.level - 1, c.h, i).complex, p))
            .collect::<Result<_>>()?;
        Ok(Component { level: c.level - 1, h: c.h, k: c.k, parts })
    }

    /// `d′ + d″` on a whole element (components land at `(h+1,k)` and `(h,k+1)`).
    pub fn total_d(&self, x: &BicomplexElement) -> Result<BicomplexElement> {
        let mut out = BicomplexElement { level: x.level, components: BTreeMap::new() };
        for c in x.components.values() {
            out = out.add(&BicomplexElement::single(self.d_prime(c)?))?;
            out = out.add(&BicomplexElement::single(self.d_second(c)?))?;
        }
        Ok(out)
    }

    pub fn restrict_element(&self, x: &BicomplexElement) -> Result<BicomplexElement> {
        let mut out = BicomplexElement { level: x.level.checked_sub(1).ok_or(Error::LevelUnderflow)?, components: BTreeMap::new() };
        for (key, c) in &x.components {
            out.components.insert(*key, self.restrict_level(c)?);
        }
        Ok(out)
    }

    /// Partition of unity subordinate to the level-0 covering, with supports shrunk
    /// by the edge scale `e` of the complex: `η_i = 1_{B(y_i, R − e)}`.
    pub fn partition_of_unity(&self) -> Result<PartitionOfUnity> {
        let e = self
            .complex
            .edge_scale()
            .cloned()
            .unwrap_or_else(|| measured_edge_scale(&self.space, &self.complex));
        let shrunk = &self.radii[0] - &e;
        let mut weights = BTreeMap::new();
        for v in self.complex.vertices() {
            let support: Vec<usize> = if shrunk < Rational::zero() {
                Vec::new()
            } else {
                (0..self.centers.len()).filter(|&i| self.space.dist(self.centers[i], v) <= &shrunk).collect()
            };
            if support.is_empty() {
                return Err(Error::UncoveredVertex(v));
            }
            let w = Rational::one() / Rational::from_integer((support.len() as i64).into());
            weights.insert(v, support.into_iter().map(|i| (i, w.clone())).collect());
        }
        Ok(PartitionOfUnity { weights, ncenters: self.centers.len() })
    }

    /// `ε(φ)_I = Σ_j χ_j ⌣ φ_{jI}` at level 0, from `(h, k)` to `(h−1, k)`: a simplex `σ`
    /// of `U_I` receives `χ_j(σ₀)·φ_{jI}(σ)` for each `j` with `σ ⊆ U_{jI}`.
    pub fn epsilon(&self, pou: &PartitionOfUnity, c: &Component) -> Result<Component> {
        self.check_component(c)?;
        if c.h == 0 {
            return Err(Error::DegreeUnderflow);
        }
        if c.level != 0 {
            return Err(Error::InvalidParams("the partition-of-unity operator acts at level 0".into()));
        }
        let h = c.h - 1;
        let mut parts = Vec::with_capacity(self.nerve.count(h));
        let mut tuple = Vec::with_capacity(c.h + 1);
        for (idx, s) in self.nerve.simplices(h).iter().enumerate() {
            let target = self.piece(0, h, idx);
            let values = target
                .complex
                .simplices(c.k)
                .iter()
                .map(|sigma| {
                    let mut acc = Rational::zero();
                    for (j, w) in pou.at(sigma[0]) {
                        tuple.clear();
                        tuple.push(*j);
                        tuple.extend_from_slice(s);
                        let Some(odd) = sort_sign(&tuple) else { continue };
                        tuple.sort_unstable();
                        let Some(ji) = self.nerve.position(&tuple) else { continue };
                        let src = self.piece(0, c.h, ji);
                        let Some(pos) = src.complex.position(sigma) else { continue };
                        let v = w * &c.parts[ji].values()[pos];
                        if odd {
                            acc -= v;
                        } else {
                            acc += v;
                        }
                    }
                    acc
                })
                .collect();
            parts.push(Cochain::new(&target.complex, c.k, values)?);
        }
        Ok(Component { level: 0, h, k: c.k, parts })
    }

    fn check_degree(&self, k: usize) -> Result<()> {
        if k > self.max_degree || k > self.levels() {
            return Err(Error::DegreeOverflow { degree: k, max: self.max_degree.min(self.levels()) });
        }
        Ok(())
    }

    /// Staircase from a closed `k`-cochain of the complex to a closed `k`-cochain of the nerve.
    ///
    /// The class is placed at `(0, k)` on the highest usable level; each step
    /// restricts one level down, solves `d″b = a` piecewise with ℓ²-minimal
    /// primitives and continues with `a − (d′+d″)b = −d′b` at `(h+1, k−h−1)`.
    /// At `(k, 0)` on level 0 every piece carries a constant, which is the value of
    /// the nerve cochain on that simplex.
    pub fn transfer_to_nerve(&self, omega: &Cochain) -> Result<(Cochain, TransferWitness)> {
        let k = omega.degree();
        self.check_degree(k)?;
        omega.check_host(&self.complex)?;
        if !coboundary(&self.complex, omega)?.is_zero() {
            return Err(Error::NotClosed);
        }
        let start = if self.levels() > k { k + 1 } else { k };
        let mut rec = Recorder { steps: Vec::new() };
        let mut a = self.component_from_fn(start, 0, k, |_, piece| {
            restrict(&self.complex, piece, omega).expect("pieces are subcomplexes")
        })?;
        rec.push(StepKind::Embed, &a, l2(core::slice::from_ref(omega)));
        for h in 0..k {
            let before = l2(&a.parts);
            a = self.restrict_level(&a)?;
            rec.push(StepKind::Restrict, &a, before);
            let before = l2(&a.parts);
            let b = self.invert_vertical(&a)?;
            rec.push(StepKind::InvertVertical, &b, before);
            let before = l2(&b.parts);
            a = self.d_prime(&b)?.neg();
            rec.push(StepKind::Cech, &a, before);
            debug_assert_eq!(a.h, h + 1);
        }
        if a.level > 0 {
            let before = l2(&a.parts);
            a = self.restrict_level(&a)?;
            rec.push(StepKind::Restrict, &a, before);
        }
        let mut values = Vec::with_capacity(self.nerve.count(k));
        for (idx, part) in a.parts.iter().enumerate() {
            let mut it = part.values().iter();
            let first = it.next().cloned().unwrap_or_else(Rational::zero);
            if it.any(|v| *v != first) {
                return Err(Error::NonConstantPiece { piece: self.nerve.simplices(k)[idx].clone() });
            }
            values.push(first);
        }
        let kappa = Cochain::new(&self.nerve, k, values)?;
        let before = l2(&a.parts);
        let sampled = Component { level: 0, h: k, k: 0, parts: vec![kappa.clone()] };
        rec.push(StepKind::Sample, &sampled, before);
        debug_assert!(coboundary(&self.nerve, &kappa)?.is_zero());
        if !coboundary(&self.nerve, &kappa)?.is_zero() {
            return Err(Error::NotClosed);
        }
        let witness = TransferWitness { direction: Direction::ToNerve, degree: k, input: omega.clone(), output: kappa.clone(), steps: rec.steps };
        Ok((kappa, witness))
    }

    /// `b` with `d″b = a` on every piece (exact ℓ²-minimal primitives).
    fn invert_vertical(&self, a: &Component) -> Result<Component> {
        let sign_neg = a.h % 2 == 1;
        let mut parts = Vec::with_capacity(a.parts.len());
        for (i, part) in a.parts.iter().enumerate() {
            let piece = self.piece(a.level, a.h, i);
            let solver = piece.solver(a.k);
            let target = if sign_neg { part.neg() } else { part.clone() };
            let x = solver.min_norm_solve(&target.to_sparse()).ok_or_else(|| Error::PrimitiveFailure {
                level: a.level,
                piece: self.nerve.simplices(a.h)[i].iter().map(|&c| self.centers[c]).collect(),
            })?;
            parts.push(Cochain::from_sparse(&piece.complex, a.k - 1, &x));
        }
        Ok(Component { level: a.level, h: a.h, k: a.k - 1, parts })
    }

    /// Staircase from a closed `k`-cochain of the nerve back to the complex, using
    /// `ε` at level 0: `b = ε(a)`, `a ← a − (d′+d″)b`, until the element sits at
    /// `(0, k)`, where the local cochains agree on overlaps and glue.
    pub fn transfer_to_space(&self, kappa: &Cochain) -> Result<(Cochain, TransferWitness)> {
        let k = kappa.degree();
        self.check_degree(k)?;
        kappa.check_host(&self.nerve)?;
        if !coboundary(&self.nerve, kappa)?.is_zero() {
            return Err(Error::NotClosed);
        }
        let pou = self.partition_of_unity()?;
        let mut rec = Recorder { steps: Vec::new() };
        let mut a = self.component_from_fn(0, k, 0, |s, piece| {
            let v = kappa.values()[self.nerve.position(s).expect("nerve simplex")].clone();
            Cochain::from_fn(piece, 0, |_| v.clone())
        })?;
        rec.push(StepKind::Embed, &a, l2(core::slice::from_ref(kappa)));
        for _ in 0..k {
            let before = l2(&a.parts);
            let b = self.epsilon(&pou, &a)?;
            rec.push(StepKind::Epsilon, &b, before);
            let check = self.d_prime(&b)?;
            if check != a {
                let bad = check.parts.iter().zip(&a.parts).position(|(x, y)| x != y).unwrap_or(0);
                return Err(Error::GluingFailure { simplex: self.nerve.simplices(a.h)[bad].clone() });
            }
            let before = l2(&b.parts);
            a = self.d_second(&b)?.neg();
            rec.push(StepKind::Vertical, &a, before);
        }
        let omega = self.glue(&pou, &a)?;
        let before = l2(&a.parts);
        rec.push(StepKind::Glue, &Component { level: 0, h: 0, k, parts: vec![omega.clone()] }, before);
        let witness = TransferWitness { direction: Direction::ToSpace, degree: k, input: kappa.clone(), output: omega.clone(), steps: rec.steps };
        Ok((omega, witness))
    }

    /// Global cochain `Σ_i χ_i ⌣ a_i` from a `d′`-closed `(0, k)` component; checks that
    /// the local cochains agree wherever they overlap.
    fn glue(&self, pou: &PartitionOfUnity, a: &Component) -> Result<Cochain> {
        let k = a.k;
        let mut values = Vec::with_capacity(self.complex.count(k));
        for sigma in self.complex.simplices(k) {
            let mut common: Option<Rational> = None;
            for i in 0..self.centers.len() {
                let piece = self.piece(0, 0, i);
                if let Some(pos) = piece.complex.position(sigma) {
                    let v = &a.parts[i].values()[pos];
                    match &common {
                        None => common = Some(v.clone()),
                        Some(c) if c != v => return Err(Error::GluingFailure { simplex: sigma.clone() }),
                        _ => {}
                    }
                }
            }
            let mut acc = Rational::zero();
            for (j, w) in pou.at(sigma[0]) {
                let piece = self.piece(0, 0, *j);
                let pos = piece.complex.position(sigma).ok_or_else(|| Error::ScaleViolation { simplex: sigma.clone() })?;
                acc += w * &a.parts[*j].values()[pos];
            }
            if common.is_none() {
                return Err(Error::ScaleViolation { simplex: sigma.clone() });
            }
            values.push(acc);
        }
        Cochain::new(&self.complex, k, values)
    }

    /// Re-executes a witness and compares every recorded step.
    pub fn replay(&self, witness: &TransferWitness) -> Result<()> {
        let (_, again) = match witness.direction {
            Direction::ToNerve => self.transfer_to_nerve(&witness.input)?,
            Direction::ToSpace => self.transfer_to_space(&witness.input)?,
        };
        for (i, (a, b)) in witness.steps.iter().zip(&again.steps).enumerate() {
            if a != b {
                return Err(Error::ReplayMismatch(i));
            }
        }
        if witness.steps.len() != again.steps.len() {
            return Err(Error::ReplayMismatch(witness.steps.len().min(again.steps.len())));
        }
        if witness.output != again.output {
            return Err(Error::ReplayMismatch(witness.steps.len()));
        }
        Ok(())
    }

    /// Forward then back; compares classes on the side the class started from.
    pub fn round_trip_check(&self, z: &Cochain, direction: Direction) -> Result<(bool, TransferWitness, TransferWitness)> {
        match direction {
            Direction::ToNerve => {
                let (kappa, w1) = self.transfer_to_nerve(z)?;
                let (back, w2) = self.transfer_to_space(&kappa)?;
                Ok((classes_equal(&self.complex, &back, z)?, w1, w2))
            }
            Direction::ToSpace => {
                let (omega, w1) = self.transfer_to_space(z)?;
                let (back, w2) = self.transfer_to_nerve(&omega)?;
                Ok((classes_equal(&self.nerve, &back, z)?, w1, w2))
            }
        }
    }

    /// `[T(α ⌣ β)] = [T(α) ⌣ T(β)]` for nerve cocycles, with `T = transfer_to_space`.
    pub fn multiplicativity_check(&self, alpha: &Cochain, beta: &Cochain) -> Result<bool> {
        let prod = cup_aw(&self.nerve, alpha, beta)?;
        let (lhs, _) = self.transfer_to_space(&prod)?;
        let (ta, _) = self.transfer_to_space(alpha)?;
        let (tb, _) = self.transfer_to_space(beta)?;
        let rhs = cup_aw(&self.complex, &ta, &tb)?;
        classes_equal(&self.complex, &lhs, &rhs)
    }

    /// A nerve `k`-cochain extended by zero from the nerve to itself (for API symmetry).
    pub fn nerve_cochain(&self, k: usize, f: impl FnMut(&[usize]) -> Rational) -> Cochain {
        Cochain::from_fn(&self.nerve, k, f)
    }

    /// Embeds a piece cochain of level `j` into the whole complex by zero.
    pub fn extend_piece(&self, level: usize, h: usize, idx: usize, c: &Cochain) -> Result<Cochain> {
        extend_by_zero(&self.piece(level, h, idx).complex, &self.complex, c)
    }
}

fn measured_edge_scale(space: &FiniteMetricSpace, complex: &SimplicialComplex) -> Rational {
    complex.simplices(1).iter().map(|e| space.dist(e[0], e[1]).clone()).max().unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::betti;
    use crate::generators::{annulus, cycle, path};
    use crate::rational::int;
    use crate::simplicial::{build_rips, build_vietoris_rips};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_component(cov: &NestedCoverings, rng: &mut ChaCha8Rng, level: usize, h: usize, k: usize) -> Component {
        cov.component_from_fn(level, h, k, |_, piece| Cochain::from_fn(piece, k, |_| int(rng.gen_range(-3..=3)))).unwrap()
    }

    fn edge_coverings() -> NestedCoverings {
        let space = path(2).unwrap();
        let complex = SimplicialComplex::graph(2, &[(0, 1)]);
        build_nested_coverings(&space, &complex, &int(1), 1, 1).unwrap()
    }

    #[test]
    fn epsilon_on_single_edge() {
        let cov = edge_coverings();
        let pou = cov.partition_of_unity().unwrap();
        assert_eq!(pou.at(0), &[(0, int(1))]);
        assert_eq!(pou.at(1), &[(1, int(1))]);
        let phi = cov.component_from_fn(0, 1, 0, |_, p| Cochain::from_fn(p, 0, |_| int(1))).unwrap();
        let e = cov.epsilon(&pou, &phi).unwrap();
        assert_eq!(e.parts[0].values(), &[int(0), int(-1)]);
        assert_eq!(e.parts[1].values(), &[int(1), int(0)]);
        assert_eq!(cov.d_prime(&e).unwrap(), phi);
        let zero = cov.zero_component(0, 1, 0).unwrap();
        assert!(cov.epsilon(&pou, &zero).unwrap().is_zero());
        assert_eq!(cov.epsilon(&pou, &cov.zero_component(0, 0, 0).unwrap()), Err(Error::DegreeUnderflow));
    }

    #[test]
    fn edge_class_to_space() {
        let cov = edge_coverings();
        let kappa = cov.nerve_cochain(1, |_| int(1));
        let (omega, w) = cov.transfer_to_space(&kappa).unwrap();
        assert_eq!(omega.values(), &[int(1)]);
        cov.replay(&w).unwrap();
        let constant = cov.nerve_cochain(0, |_| int(4));
        assert_eq!(cov.transfer_to_space(&constant).unwrap().0.values(), &[int(4), int(4)]);
    }

    #[test]
    fn radii_schedule_on_path() {
        let space = path(9).unwrap();
        let complex = build_vietoris_rips(&space, &int(1), 1).unwrap();
        let cov = build_nested_coverings(&space, &complex, &int(1), 2, 1).unwrap();
        assert_eq!(cov.radii(), &[int(1), int(3), int(5)]);
        let point = path(1).unwrap();
        let pc = build_rips(&point, &int(1), 1).unwrap();
        let cov = build_nested_coverings(&point, &pc, &int(2), 2, 1).unwrap();
        assert_eq!(cov.radii(), &[int(2), int(6), int(10)]);
    }

    #[test]
    fn hollow_triangle_has_no_uniform_vanishing() {
        let space = cycle(3).unwrap();
        let hollow = SimplicialComplex::graph(3, &[(0, 1), (0, 2), (1, 2)]);
        let err = build_nested_coverings(&space, &hollow, &int(1), 1, 1).err().unwrap();
        assert!(matches!(err, Error::VanishingFailure { level: 0, degree: 1, .. }));
        let c12 = cycle(12).unwrap();
        let rim = build_vietoris_rips(&c12, &int(1), 2).unwrap();
        assert!(build_nested_coverings(&c12, &rim, &int(1), 1, 1).is_ok());
    }

    #[test]
    fn partition_of_unity_on_p5() {
        let space = path(5).unwrap();
        let complex = build_vietoris_rips(&space, &int(1), 1).unwrap();
        let cov = build_nested_coverings(&space, &complex, &int(2), 0, 0).unwrap();
        let pou = cov.partition_of_unity().unwrap();
        for v in 0..5 {
            let total: Rational = pou.at(v).iter().map(|(_, w)| w.clone()).sum();
            assert_eq!(total, int(1));
            assert!(pou.at(v).iter().all(|(_, w)| *w.denom() <= 3.into()));
        }
        assert_eq!(pou.at(0).len(), 2);
        assert_eq!(pou.at(2).len(), 3);
        let uncovered = build_nested_coverings(&space, &complex.clone().with_edge_scale(Some(int(3))), &int(2), 0, 0).unwrap();
        assert!(matches!(uncovered.partition_of_unity(), Err(Error::UncoveredVertex(_))));
    }

    #[test]
    fn bicomplex_identities() {
        let space = cycle(12).unwrap();
        let complex = build_vietoris_rips(&space, &int(1), 2).unwrap();
        let cov = build_nested_coverings(&space, &complex, &int(1), 1, 1).unwrap();
        let pou = cov.partition_of_unity().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            for (h, k) in [(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)] {
                let phi = random_component(&cov, &mut rng, 0, h, k);
                let x = BicomplexElement::single(phi.clone());
                assert!(cov.total_d(&cov.total_d(&x).unwrap()).unwrap().is_zero());
                if h >= 1 {
                    let lhs = cov
                        .epsilon(&pou, &cov.d_prime(&phi).unwrap())
                        .unwrap()
                        .add(&cov.d_prime(&cov.epsilon(&pou, &phi).unwrap()).unwrap())
                        .unwrap();
                    assert_eq!(lhs, phi);
                }
                let up = random_component(&cov, &mut rng, 1, h, k);
                let a = cov.restrict_level(&cov.d_prime(&up).unwrap()).unwrap();
                let b = cov.d_prime(&cov.restrict_level(&up).unwrap()).unwrap();
                assert_eq!(a, b);
                let a = cov.restrict_level(&cov.d_second(&up).unwrap()).unwrap();
                let b = cov.d_second(&cov.restrict_level(&up).unwrap()).unwrap();
                assert_eq!(a, b);
            }
        }
        assert_eq!(cov.restrict_level(&cov.zero_component(0, 0, 0).unwrap()), Err(Error::LevelUnderflow));
    }

    #[test]
    fn closed_global_cochain_has_no_cech_image() {
        let space = cycle(12).unwrap();
        let complex = build_vietoris_rips(&space, &int(1), 2).unwrap();
        let cov = build_nested_coverings(&space, &complex, &int(1), 1, 1).unwrap();
        let z = betti(&complex, 1).representatives.remove(0);
        let a = cov.component_from_fn(0, 0, 1, |_, p| restrict(&complex, p, &z).unwrap()).unwrap();
        assert!(cov.d_prime(&a).unwrap().is_zero());
    }

    #[test]
    fn annulus_transfers() {
        let space = annulus(12, 2).unwrap();
        let complex = build_rips(&space, &int(1), 2).unwrap();
        let cov = build_nested_coverings(&space, &complex, &int(2), 1, 1).unwrap();
        assert_eq!(cov.radii(), &[int(2), int(6)]);
        let z = betti(&complex, 1).representatives.remove(0);
        let (kappa, w) = cov.transfer_to_nerve(&z).unwrap();
        assert!(!classes_equal(cov.nerve(), &kappa, &Cochain::zero(cov.nerve(), 1)).unwrap());
        cov.replay(&w).unwrap();
        assert!(w.steps.iter().all(|s| s.constant().is_finite()));
        assert!(cov.round_trip_check(&z, Direction::ToNerve).unwrap().0);
        assert!(cov.round_trip_check(&kappa, Direction::ToSpace).unwrap().0);

        let ones = Cochain::from_fn(&complex, 0, |_| int(1));
        assert!(cov.round_trip_check(&ones, Direction::ToNerve).unwrap().0);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Cochain::from_fn(&complex, 0, |_| int(rng.gen_range(-5..=5)));
        let exact = coboundary(&complex, &u).unwrap();
        let (k0, _) = cov.transfer_to_nerve(&exact).unwrap();
        assert!(classes_equal(cov.nerve(), &k0, &Cochain::zero(cov.nerve(), 1)).unwrap());

        let unit = cov.nerve_cochain(0, |_| int(1));
        assert!(cov.multiplicativity_check(&unit, &kappa).unwrap());
        assert!(cov.multiplicativity_check(&kappa, &unit).unwrap());

        let mut tampered = w.clone();
        tampered.steps[1].output_norm += 1.0;
        assert_eq!(cov.replay(&tampered), Err(Error::ReplayMismatch(1)));
    }
}
