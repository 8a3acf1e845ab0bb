//! Exact cohomology of finite complexes, uniform vanishing, least-norm
//! primitives and discrete Poincaré constants.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{self, ColumnReduction, SparseVec};
use crate::lp::{self, LpOutcome};
use crate::norms::{counting_norm, lp_norm, Exponent};
use crate::rational::{int, to_f64};
use crate::simplicial::{ball_subcomplex, coboundary, restrict};
use crate::{Cochain, Error, FiniteMetricSpace, Rational, Result, SimplicialComplex};

/// Reductions of `δ_{k-1}` and `δ_k` on one complex, reused across many solves.
pub struct CoboundarySolver {
    degree: usize,
    cochains: usize,
    /// Columns of `δ_{k-1}`, tracked so that solutions can be read off.
    image: Option<ColumnReduction>,
    closed: Vec<SparseVec>,
}

impl CoboundarySolver {
    /// Solver for equations `δφ = ω` with `ω` of degree `k`.
    pub fn new(host: &SimplicialComplex, k: usize) -> Self {
        let image = (k > 0).then(|| ColumnReduction::from_columns(host.count(k), host.coboundary_columns(k - 1), true));
        let closed = {
            let red = ColumnReduction::from_columns(host.count(k + 1), host.coboundary_columns(k), true);
            red.kernel_basis().to_vec()
        };
        CoboundarySolver { degree: k, cochains: host.count(k), image, closed }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn rank_of_image(&self) -> usize {
        self.image.as_ref().map_or(0, ColumnReduction::rank)
    }

    /// Basis of the closed `k`-cochains.
    pub fn cocycle_basis(&self) -> &[SparseVec] {
        &self.closed
    }

    pub fn is_coboundary(&self, omega: &[(usize, Rational)]) -> bool {
        match &self.image {
            Some(r) => r.in_span(omega),
            None => omega.is_empty(),
        }
    }

    /// Some primitive of `ω`, if one exists.
    pub fn solve(&self, omega: &[(usize, Rational)]) -> Option<SparseVec> {
        match &self.image {
            Some(r) => r.solve(omega),
            None => None,
        }
    }

    /// The ℓ²-minimal primitive: a particular solution minus its projection on `ker δ_{k-1}`.
    pub fn min_norm_solve(&self, omega: &[(usize, Rational)]) -> Option<SparseVec> {
        let red = self.image.as_ref()?;
        let x0 = red.solve(omega)?;
        let kernel = red.kernel_basis();
        if kernel.is_empty() || x0.is_empty() {
            return Some(x0);
        }
        let gram: Vec<Vec<Rational>> =
            kernel.iter().map(|a| kernel.iter().map(|b| linalg::sparse_dot(a, b)).collect()).collect();
        let rhs: Vec<Rational> = kernel.iter().map(|a| linalg::sparse_dot(a, &x0)).collect();
        let coeff = linalg::solve_dense(gram, rhs).expect("kernel basis is independent");
        let mut x = x0;
        for (c, kv) in coeff.iter().zip(kernel) {
            if !c.is_zero() {
                x = linalg::axpy(&x, &-c.clone(), kv);
            }
        }
        Some(x)
    }

    pub fn cochains(&self) -> usize {
        self.cochains
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyReport {
    pub degree: usize,
    pub dim_cochains: usize,
    pub dim_cocycles: usize,
    pub dim_coboundaries: usize,
    pub betti: usize,
    /// Closed cochains whose classes form a basis of `H^k`.
    pub representatives: Vec<Cochain>,
}

/// Exact rational `H^k` with representative cocycles.
pub fn betti(host: &SimplicialComplex, k: usize) -> CohomologyReport {
    let solver = CoboundarySolver::new(host, k);
    let (representatives, dim_coboundaries) = representatives(host, k, &solver);
    let dim_cocycles = solver.closed.len();
    CohomologyReport {
        degree: k,
        dim_cochains: host.count(k),
        dim_cocycles,
        dim_coboundaries,
        betti: dim_cocycles - dim_coboundaries,
        representatives,
    }
}

fn representatives(host: &SimplicialComplex, k: usize, solver: &CoboundarySolver) -> (Vec<Cochain>, usize) {
    let mut span = ColumnReduction::new(host.count(k), false);
    if k > 0 {
        for c in host.coboundary_columns(k - 1) {
            span.push(c);
        }
    }
    let boundaries = span.rank();
    let reps = solver
        .closed
        .iter()
        .filter(|z| span.push((*z).clone()))
        .map(|z| Cochain::from_sparse(host, k, z))
        .collect();
    (reps, boundaries)
}

/// Connected components of the 1-skeleton, as a label per vertex in storage order.
pub fn components(host: &SimplicialComplex) -> Vec<usize> {
    let verts = host.vertices();
    let mut parent: Vec<usize> = (0..verts.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in host.simplices(1) {
        let a = find(&mut parent, host.position(&e[..1]).expect("vertex"));
        let b = find(&mut parent, host.position(&e[1..]).expect("vertex"));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..verts.len()).map(|i| find(&mut parent, i)).collect()
}

#[derive(Debug, Clone)]
pub struct PoincarePair {
    pub inner: SimplicialComplex,
    pub outer: SimplicialComplex,
}

impl PoincarePair {
    pub fn new(inner: SimplicialComplex, outer: SimplicialComplex) -> Result<Self> {
        inner.check_subcomplex_of(&outer)?;
        Ok(PoincarePair { inner, outer })
    }
}

/// Whether `H^j(outer) → H^j(inner)` is zero. With `reduced0`, degree 0 asks
/// instead that all vertices of `inner` lie in one component of `outer`.
pub fn restriction_vanishes(pair: &PoincarePair, j: usize, reduced0: bool) -> bool {
    if j == 0 {
        if pair.inner.is_empty() {
            return true;
        }
        if !reduced0 {
            return false;
        }
        let comp = components(&pair.outer);
        let mut labels = pair.inner.vertices().into_iter().map(|v| comp[pair.outer.position(&[v]).expect("subcomplex")]);
        let first = labels.next();
        return labels.all(|l| Some(l) == first);
    }
    let outer = betti(&pair.outer, j);
    let inner = CoboundarySolver::new(&pair.inner, j);
    outer.representatives.iter().all(|z| {
        let r = restrict(&pair.outer, &pair.inner, z).expect("pairs are validated");
        inner.is_coboundary(&r.to_sparse())
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum VanishingRadius {
    Found(Rational),
    /// No radius up to `cap` (the diameter) works.
    NotFound { cap: Rational },
}

/// Smallest `R̃ ≥ R` among `R` and the multiples of the least positive distance up
/// to the diameter such that `C(y,R) ⊆ C(y,R̃)` vanishes in degrees `0..=L` for
/// every requested center.
pub fn vanishing_radius(
    space: &FiniteMetricSpace,
    complex: &SimplicialComplex,
    radius: &Rational,
    max_degree: usize,
    centers: Option<&[usize]>,
    reduced0: bool,
) -> Result<VanishingRadius> {
    if radius.is_negative() {
        return Err(Error::InvalidParams("negative radius".into()));
    }
    let all: Vec<usize> = (0..space.len()).collect();
    let centers = centers.unwrap_or(&all);
    if let Some(&bad) = centers.iter().find(|&&c| c >= space.len()) {
        return Err(Error::InvalidPoint(bad));
    }
    let diam = space.diameter();
    let mut candidates = vec![radius.clone()];
    if let Some(step) = space.min_positive_distance() {
        let mut m = (radius / &step).floor() + Rational::one();
        loop {
            let r = &m * &step;
            if r > diam {
                break;
            }
            candidates.push(r);
            m += Rational::one();
        }
    }
    let inners: Vec<SimplicialComplex> =
        centers.iter().map(|&y| ball_subcomplex(complex, space, y, radius)).collect::<Result<_>>()?;
    'radii: for r in candidates {
        for (&y, inner) in centers.iter().zip(&inners) {
            let outer = ball_subcomplex(complex, space, y, &r)?;
            let pair = PoincarePair { inner: inner.clone(), outer };
            for j in 0..=max_degree {
                if !restriction_vanishes(&pair, j, reduced0) {
                    continue 'radii;
                }
            }
        }
        return Ok(VanishingRadius::Found(r));
    }
    Ok(VanishingRadius::NotFound { cap: diam })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrimitiveValues {
    Exact(Cochain),
    Approx(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub values: PrimitiveValues,
    /// Counting ℓ^q norm of the primitive.
    pub norm: f64,
    /// `‖δφ − ω‖_∞` (zero for exact solutions).
    pub residual: f64,
}

impl Primitive {
    pub fn to_f64(&self) -> Vec<f64> {
        match &self.values {
            PrimitiveValues::Exact(c) => c.to_f64(),
            PrimitiveValues::Approx(v) => v.clone(),
        }
    }
}

fn check_closed(host: &SimplicialComplex, omega: &Cochain) -> Result<()> {
    if !coboundary(host, omega)?.is_zero() {
        return Err(Error::NotClosed);
    }
    Ok(())
}

/// A primitive `φ` with `δφ = ω` minimizing the counting ℓ^q norm.
///
/// `q = 2` is solved exactly; `q ∈ {1, ∞}` by an exact linear program; other
/// exponents by iteratively reweighted least squares from the `q = 2` solution.
pub fn least_norm_primitive(host: &SimplicialComplex, omega: &Cochain, q: &Exponent) -> Result<Primitive> {
    omega.check_host(host)?;
    let k = omega.degree();
    if k == 0 {
        return Err(Error::DegreeOutOfRange { degree: 0, max: host.dim().unwrap_or(0) });
    }
    check_closed(host, omega)?;
    let solver = CoboundarySolver::new(host, k);
    let target = omega.to_sparse();
    let base = solver.min_norm_solve(&target).ok_or(Error::NoPrimitive)?;
    let base = Cochain::from_sparse(host, k - 1, &base);
    match q {
        _ if q.as_integer() == Some(2) => Ok(Primitive { norm: counting_norm(&base, q), values: PrimitiveValues::Exact(base), residual: 0.0 }),
        Exponent::Infinity => lp_primitive(host, omega, q, true),
        _ if q.as_integer() == Some(1) => lp_primitive(host, omega, q, false),
        _ => irls_primitive(host, omega, &base, q),
    }
}

fn lp_primitive(host: &SimplicialComplex, omega: &Cochain, q: &Exponent, sup: bool) -> Result<Primitive> {
    let k = omega.degree();
    let n = host.count(k - 1);
    let rows = host.coboundary_rows(k - 1);
    let m = rows.len();
    // variables: φ⁺ (n), φ⁻ (n), then for sup: t, slacks a (n), b (n)
    let nv = if sup { 4 * n + 1 } else { 2 * n };
    let mut a: Vec<Vec<Rational>> = Vec::with_capacity(m + if sup { 2 * n } else { 0 });
    let mut b: Vec<Rational> = Vec::new();
    for (r, row) in rows.iter().enumerate() {
        let mut line = vec![Rational::zero(); nv];
        for (j, v) in row {
            line[*j] = v.clone();
            line[n + *j] = -v.clone();
        }
        a.push(line);
        b.push(omega.values()[r].clone());
    }
    let mut c = vec![Rational::zero(); nv];
    if sup {
        let t = 2 * n;
        for i in 0..n {
            // φ_i − t + a_i = 0  and  −φ_i − t + b_i = 0
            let mut up = vec![Rational::zero(); nv];
            up[i] = int(1);
            up[n + i] = int(-1);
            up[t] = int(-1);
            up[t + 1 + i] = int(1);
            a.push(up);
            b.push(Rational::zero());
            let mut down = vec![Rational::zero(); nv];
            down[i] = int(-1);
            down[n + i] = int(1);
            down[t] = int(-1);
            down[t + 1 + n + i] = int(1);
            a.push(down);
            b.push(Rational::zero());
        }
        c[t] = int(1);
    } else {
        for v in c.iter_mut() {
            *v = int(1);
        }
    }
    match lp::minimize(&a, &b, &c) {
        LpOutcome::Optimal { x, .. } => {
            let phi: Vec<Rational> = (0..n).map(|i| &x[i] - &x[n + i]).collect();
            let phi = Cochain::new(host, k - 1, phi)?;
            Ok(Primitive { norm: counting_norm(&phi, q), values: PrimitiveValues::Exact(phi), residual: 0.0 })
        }
        LpOutcome::Infeasible => Err(Error::NoPrimitive),
        LpOutcome::Unbounded => unreachable!("norm objectives are bounded below"),
    }
}

const IRLS_FLOOR: f64 = 1e-12;
const IRLS_TOL: f64 = 1e-8;
const IRLS_MAX_ITER: usize = 500;

fn irls_primitive(host: &SimplicialComplex, omega: &Cochain, start: &Cochain, q: &Exponent) -> Result<Primitive> {
    let k = omega.degree();
    let n = host.count(k - 1);
    let rows = host.coboundary_rows(k - 1);
    let keep = linalg::independent_subset(n, &rows);
    let a: Vec<Vec<(usize, f64)>> = keep.iter().map(|&r| rows[r].iter().map(|(j, v)| (*j, to_f64(v))).collect()).collect();
    let rhs: Vec<f64> = keep.iter().map(|&r| to_f64(&omega.values()[r])).collect();
    let m = a.len();
    let qf = q.to_f64();
    let mut phi = start.to_f64();
    let scale = phi.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let mut converged = false;
    for _ in 0..IRLS_MAX_ITER {
        // minimize Σ w_i φ_i² subject to Aφ = ω, with 1/w_i = max(|φ_i|, floor)^{2−q}
        let winv: Vec<f64> = phi.iter().map(|v| libm::pow(v.abs().max(IRLS_FLOOR * scale), 2.0 - qf)).collect();
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                let (mut x, mut y) = (0, 0);
                while x < a[i].len() && y < a[j].len() {
                    match a[i][x].0.cmp(&a[j][y].0) {
                        core::cmp::Ordering::Equal => {
                            s += a[i][x].1 * a[j][y].1 * winv[a[i][x].0];
                            x += 1;
                            y += 1;
                        }
                        core::cmp::Ordering::Less => x += 1,
                        core::cmp::Ordering::Greater => y += 1,
                    }
                }
                g[i * m + j] = s;
                g[j * m + i] = s;
            }
        }
        let Some(l) = linalg::cholesky(&g, m) else { break };
        let y = linalg::cholesky_solve(&l, m, &rhs);
        let mut next = vec![0.0; n];
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row {
                next[*j] += winv[*j] * v * y[i];
            }
        }
        let change = next.iter().zip(&phi).fold(0.0f64, |s, (a, b)| s.max((a - b).abs()));
        phi = next;
        if change <= IRLS_TOL * scale {
            converged = true;
            break;
        }
    }
    let residual = residual_f64(&rows, &phi, omega);
    if !converged || residual > 1e-9 * scale {
        return Err(Error::ConvergenceFailure { q: qf, residual });
    }
    Ok(Primitive { norm: lp_norm(&phi, q), values: PrimitiveValues::Approx(phi), residual })
}

fn residual_f64(rows: &[SparseVec], phi: &[f64], omega: &Cochain) -> f64 {
    rows.iter()
        .zip(omega.values())
        .map(|(row, w)| (row.iter().map(|(j, v)| to_f64(v) * phi[*j]).sum::<f64>() - to_f64(w)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// Computed from an eigenvalue problem; exact up to floating point.
    Exact,
    /// Best ratio found by sampling; a lower bound for the constant.
    Lower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoincareEstimate {
    pub value: f64,
    pub bound: BoundKind,
    pub method: &'static str,
    pub samples: usize,
}

/// `sup_ω min{‖φ‖_q(inner) : δφ = ω|inner} / ‖ω‖_p(outer)` over nonzero closed
/// `k`-cochains `ω` of the outer complex.
pub fn poincare_constant(pair: &PoincarePair, k: usize, p: &Exponent, q: &Exponent, seed: u64) -> Result<PoincareEstimate> {
    if k == 0 {
        return Err(Error::DegreeOutOfRange { degree: 0, max: pair.outer.dim().unwrap_or(0) });
    }
    if !restriction_vanishes(pair, k, true) {
        return Err(Error::Infeasible);
    }
    let outer = CoboundarySolver::new(&pair.outer, k);
    let basis: Vec<Cochain> = outer.cocycle_basis().iter().map(|z| Cochain::from_sparse(&pair.outer, k, z)).collect();
    if basis.is_empty() {
        return Ok(PoincareEstimate { value: 0.0, bound: BoundKind::Exact, method: "empty", samples: 0 });
    }
    let inner = CoboundarySolver::new(&pair.inner, k);
    let restricted: Vec<Cochain> =
        basis.iter().map(|z| restrict(&pair.outer, &pair.inner, z)).collect::<Result<_>>()?;
    let two = Exponent::integer(2);
    if *p == two && *q == two {
        let prims: Vec<Vec<f64>> = restricted
            .iter()
            .map(|r| {
                let x = inner.min_norm_solve(&r.to_sparse()).ok_or(Error::Infeasible)?;
                Ok(Cochain::from_sparse(&pair.inner, k - 1, &x).to_f64())
            })
            .collect::<Result<_>>()?;
        let zs: Vec<Vec<f64>> = basis.iter().map(Cochain::to_f64).collect();
        let d = basis.len();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut gz = vec![0.0; d * d];
        let mut gm = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                gz[i * d + j] = dot(&zs[i], &zs[j]);
                gm[i * d + j] = dot(&prims[i], &prims[j]);
            }
        }
        let l = linalg::cholesky(&gz, d).expect("cocycle basis is independent");
        // C = L⁻¹ G_M L⁻ᵀ, computed column by column
        let mut tmp = vec![0.0; d * d];
        for j in 0..d {
            let col: Vec<f64> = (0..d).map(|i| gm[i * d + j]).collect();
            let x = forward(&l, d, &col);
            for i in 0..d {
                tmp[i * d + j] = x[i];
            }
        }
        let mut c = vec![0.0; d * d];
        for i in 0..d {
            let row: Vec<f64> = tmp[i * d..(i + 1) * d].to_vec();
            let x = forward(&l, d, &row);
            for j in 0..d {
                c[i * d + j] = x[j];
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                let s = 0.5 * (c[i * d + j] + c[j * d + i]);
                c[i * d + j] = s;
                c[j * d + i] = s;
            }
        }
        let lmax = linalg::symmetric_eigenvalues(&c, d).last().copied().unwrap_or(0.0).max(0.0);
        return Ok(PoincareEstimate { value: libm::sqrt(lmax), bound: BoundKind::Exact, method: "generalized-eigenvalue", samples: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ratio = |c: &[f64]| -> Result<f64> {
        let coeffs: Vec<Rational> =
            c.iter().map(|x| crate::rational::rationalize(*x, 1 << 20)).collect::<Result<_>>()?;
        let mut omega = Cochain::zero(&pair.outer, k);
        for (a, z) in coeffs.iter().zip(&basis) {
            omega = omega.add(&z.scale(a))?;
        }
        let denom = counting_norm(&omega, p);
        if denom == 0.0 {
            return Ok(0.0);
        }
        let r = restrict(&pair.outer, &pair.inner, &omega)?;
        let prim = least_norm_primitive(&pair.inner, &r, q)?;
        Ok(prim.norm / denom)
    };
    let d = basis.len();
    let mut best = 0.0f64;
    let mut best_c = vec![0.0; d];
    let mut samples = 0;
    for _ in 0..64 {
        let c: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = ratio(&c)?;
        samples += 1;
        if r > best {
            best = r;
            best_c = c;
        }
    }
    let mut step = 0.5;
    while step > 1e-3 {
        let mut improved = false;
        for _ in 0..4 * d {
            let c: Vec<f64> = best_c.iter().map(|x| x + step * rng.gen_range(-1.0..1.0)).collect();
            let r = ratio(&c)?;
            samples += 1;
            if r > best * (1.0 + 1e-12) {
                best = r;
                best_c = c;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok(PoincareEstimate { value: best, bound: BoundKind::Lower, method: "random-search", samples })
}

fn forward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for j in 0..i {
            s -= l[i * n + j] * y[j];
        }
        y[i] = s / l[i * n + i];
    }
    y
}

/// Whether closed cochains `z₁, z₂` are cohomologous.
pub fn classes_equal(host: &SimplicialComplex, z1: &Cochain, z2: &Cochain) -> Result<bool> {
    check_closed(host, z1)?;
    check_closed(host, z2)?;
    let diff = z1.sub(z2)?;
    if diff.is_zero() {
        return Ok(true);
    }
    Ok(CoboundarySolver::new(host, z1.degree()).is_coboundary(&diff.to_sparse()))
}

/// Basis of the exact classes `EH^k`: on a finite complex every cochain has finite
/// norm, so the forgetful map is injective and this is always empty.
pub fn exact_classes(host: &SimplicialComplex, k: usize) -> Vec<Cochain> {
    let _ = (host, k);
    Vec::new()
}

/// Basis of the exact `k`-cochains `δ(C^{k-1})` (the coboundary columns that raise the rank).
pub fn exact_subspace(host: &SimplicialComplex, k: usize) -> Vec<Cochain> {
    if k == 0 {
        return Vec::new();
    }
    let mut span = ColumnReduction::new(host.count(k), false);
    host.coboundary_columns(k - 1)
        .into_iter()
        .filter(|c| span.push(c.clone()))
        .map(|c| Cochain::from_sparse(host, k, &c))
        .collect()
}
