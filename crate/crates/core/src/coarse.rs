//! Pullback of cochains along coarse maps, the prism chain homotopy, and the
//! quasi-isometry round-trip experiment.
//!
//! Cochains of size `S` are simplicial cochains of the ball-Rips complex `T_S`;
//! a map `f` sends `T_S` simplices to `T_{S′}` simplices once `S′` bounds the
//! forward coarse modulus of `f` at `S`.

use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::cohomology::{betti, classes_equal, exact_subspace};
use crate::linalg::independent_subset;
use crate::metric::{coarse_modulus, map_distance, CoarseMap, Modulus};
use crate::norms::{lp_norm, Exponent};
use crate::simplicial::{build_rips, coboundary, prism, restrict};
use crate::{Cochain, Error, Rational, Result, SimplicialComplex};

/// `f*` with its certified scales: `T_{S′}` cochains of the target pull back to
/// `T_S` cochains of the source for `S′ ≥ forward modulus of f at S`.
#[derive(Debug, Clone)]
pub struct PullbackOperator<'a> {
    pub map: CoarseMap<'a>,
    pub source_scale: Rational,
    pub target_scale: Rational,
}

impl<'a> PullbackOperator<'a> {
    pub fn new(map: CoarseMap<'a>, source_scale: Rational) -> Self {
        let target_scale = coarse_modulus(&map, &source_scale).forward;
        PullbackOperator { map, source_scale, target_scale }
    }

    pub fn apply(&self, source: &SimplicialComplex, target: &SimplicialComplex, kappa: &Cochain) -> Result<Cochain> {
        pullback(source, target, &self.map, kappa)
    }
}

/// `(f*κ)(x₀…x_k) = κ(f x₀ … f x_k)`, zero on tuples with a repeated image.
pub fn pullback(source: &SimplicialComplex, target: &SimplicialComplex, f: &CoarseMap<'_>, kappa: &Cochain) -> Result<Cochain> {
    kappa.check_host(target)?;
    let k = kappa.degree();
    let mut tuple = Vec::with_capacity(k + 1);
    let mut values = Vec::with_capacity(source.count(k));
    for s in source.simplices(k) {
        tuple.clear();
        tuple.extend(s.iter().map(|&x| f.apply(x)));
        let v = kappa.eval(target, &tuple).ok_or_else(|| Error::ScaleViolation { simplex: s.clone() })?;
        values.push(v);
    }
    Cochain::new(source, k, values)
}

/// The prism operator `B` from `(k+1)`-cochains of `target` to `k`-cochains of
/// `source`, stored as one sparse row per source `k`-simplex:
/// `(Bκ)(Δ) = κ(b(fΔ, gΔ))` after dropping degenerate prism terms.
#[derive(Debug, Clone, PartialEq)]
pub struct PrismOperator {
    pub degree: usize,
    rows: Vec<Vec<(usize, i64)>>,
    target_len: usize,
}

impl PrismOperator {
    pub fn new(source: &SimplicialComplex, target: &SimplicialComplex, f: &CoarseMap<'_>, g: &CoarseMap<'_>, k: usize) -> Result<Self> {
        let rows = source
            .simplices(k)
            .iter()
            .map(|s| {
                let fs: Vec<usize> = s.iter().map(|&x| f.apply(x)).collect();
                let gs: Vec<usize> = s.iter().map(|&x| g.apply(x)).collect();
                prism(&fs, &gs)?
                    .oriented()
                    .terms()
                    .map(|(t, c)| target.position(t).map(|i| (i, c)).ok_or_else(|| Error::ScaleViolation { simplex: s.clone() }))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PrismOperator { degree: k, rows, target_len: target.count(k + 1) })
    }

    pub fn apply(&self, source: &SimplicialComplex, kappa: &Cochain) -> Result<Cochain> {
        if kappa.degree() != self.degree + 1 || kappa.len() != self.target_len {
            return Err(Error::HostMismatch { degree: kappa.degree(), got: kappa.len(), expected: self.target_len });
        }
        let values = self
            .rows
            .iter()
            .map(|row| {
                row.iter().fold(Rational::zero(), |acc, (i, c)| acc + &kappa.values()[*i] * Rational::from_integer((*c).into()))
            })
            .collect();
        Cochain::new(source, self.degree, values)
    }

    /// `‖Bκ‖_p / ‖κ‖_p` for counting norms (0 for `κ = 0`).
    pub fn norm_ratio(&self, source: &SimplicialComplex, kappa: &Cochain, p: &Exponent) -> Result<f64> {
        let out = self.apply(source, kappa)?;
        let den = lp_norm(&kappa.to_f64(), p);
        if den == 0.0 {
            return Ok(0.0);
        }
        Ok(lp_norm(&out.to_f64(), p) / den)
    }

    /// The largest per-row absolute coefficient sum; equals the ℓ^∞ operator norm.
    pub fn max_row_weight(&self) -> i64 {
        self.rows.iter().map(|r| r.iter().map(|(_, c)| c.abs()).sum()).max().unwrap_or(0)
    }

    /// The largest per-column absolute coefficient sum; equals the ℓ¹ operator norm.
    pub fn max_column_weight(&self) -> i64 {
        let mut cols = alloc::vec![0i64; self.target_len];
        for r in &self.rows {
            for (i, c) in r {
                cols[*i] += c.abs();
            }
        }
        cols.into_iter().max().unwrap_or(0)
    }
}

/// `Bκ` for a `(k+1)`-cochain `κ` on `target`, as a `k`-cochain on `source`.
pub fn chain_homotopy_b(
    source: &SimplicialComplex,
    target: &SimplicialComplex,
    f: &CoarseMap<'_>,
    g: &CoarseMap<'_>,
    kappa: &Cochain,
) -> Result<Cochain> {
    let k = kappa.degree().checked_sub(1).ok_or(Error::DegreeOutOfRange { degree: 0, max: usize::MAX })?;
    PrismOperator::new(source, target, f, g, k)?.apply(source, kappa)
}

/// `(δB + Bδ)κ` on the source, for a `k`-cochain `κ` on `target` (`B` on 0-cochains is 0).
pub fn homotopy_defect(
    source: &SimplicialComplex,
    target: &SimplicialComplex,
    f: &CoarseMap<'_>,
    g: &CoarseMap<'_>,
    kappa: &Cochain,
) -> Result<Cochain> {
    let bd = chain_homotopy_b(source, target, f, g, &coboundary(target, kappa)?)?;
    if kappa.degree() == 0 {
        return Ok(bd);
    }
    bd.add(&coboundary(source, &chain_homotopy_b(source, target, f, g, kappa)?)?)
}

/// Scales of the two round trips `A → B → A` and `B → A → B`.
///
/// On the `A` side classes of `T_{a_big}(A)` are pulled back by `g` to `T_{a_via}(B)`
/// and then by `f` to `T_a(A)`; the `B` side is symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct QiScales {
    pub a: Rational,
    pub a_via: Rational,
    pub a_big: Rational,
    pub b: Rational,
    pub b_via: Rational,
    pub b_big: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QiDegree {
    pub degree: usize,
    /// Ranks of `H(T_{a_big}(A)) → H(T_a(A))` and `H(T_{b_big}(B)) → H(T_b(B))`.
    pub betti_a: usize,
    pub betti_b: usize,
    /// `f*g*z ~ z|` for each class of `T_{a_big}(A)`.
    pub roundtrip_a: bool,
    /// `g*f*w ~ w|` for each class of `T_{b_big}(B)`.
    pub roundtrip_b: bool,
    /// `δ(Bz) = (g∘f)*z − z` (resp. for `f∘g`) holds exactly for every tested class.
    pub certificates: bool,
}

impl QiDegree {
    pub fn passed(&self) -> bool {
        self.betti_a == self.betti_b && self.roundtrip_a && self.roundtrip_b && self.certificates
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QiReport {
    pub scales: QiScales,
    /// `(T, modulus of f at T, modulus of g at T)` over the scales in use.
    pub tprime_table: Vec<(Rational, Modulus, Modulus)>,
    pub d_fg: Rational,
    pub d_gf: Rational,
    pub per_degree: Vec<QiDegree>,
}

impl QiReport {
    pub fn passed(&self) -> bool {
        self.per_degree.iter().all(QiDegree::passed)
    }
}

struct Side<'s> {
    small: &'s SimplicialComplex,
    via: &'s SimplicialComplex,
    big: &'s SimplicialComplex,
}

/// Rank of the restriction `H^k(big) → H^k(small)`.
fn image_rank(big: &SimplicialComplex, small: &SimplicialComplex, k: usize) -> Result<usize> {
    let exact: Vec<_> = exact_subspace(small, k).iter().map(Cochain::to_sparse).collect();
    let mut rows = exact.clone();
    for z in betti(big, k).representatives {
        rows.push(restrict(big, small, &z)?.to_sparse());
    }
    Ok(independent_subset(small.count(k), &rows).len() - exact.len())
}

/// For each class `z` of `there.big`, pulls back through `there → here → there`
/// and compares with `z` restricted to `there.small`, certifying with `B` for the
/// pair `(id, back∘forth)`.
fn round_trip_side(there: &Side<'_>, forth: &CoarseMap<'_>, back: &CoarseMap<'_>, k: usize) -> Result<(bool, bool)> {
    let id = CoarseMap::identity(forth.source());
    let composite = forth.then(back)?;
    let mut classes_ok = true;
    let mut certs_ok = true;
    for z in betti(there.big, k).representatives {
        let w = pullback(there.via, there.big, back, &z)?;
        let ffz = pullback(there.small, there.via, forth, &w)?;
        let zr = restrict(there.big, there.small, &z)?;
        classes_ok &= classes_equal(there.small, &ffz, &zr)?;
        let defect = homotopy_defect(there.small, there.big, &id, &composite, &z)?;
        certs_ok &= defect == ffz.sub(&zr)?;
    }
    Ok((classes_ok, certs_ok))
}

/// Quasi-isometry round trips between `T_{S_A}(A)` and `T_{S_B}(B)`.
///
/// The `A` side passes through `T_{fwd_f(S_A)}(B)`, so `f*` lands on `T_{S_A}(A)`,
/// and starts from classes of `T_{S_A′}(A)` with `S_A′ = max(fwd_g(fwd_f(S_A)), S_A + d(g∘f, id))`,
/// large enough for `g*` and for the prism homotopy between `id` and `g∘f`.
/// The `B` side is symmetric.
pub fn qi_invariance_experiment(
    f: &CoarseMap<'_>,
    g: &CoarseMap<'_>,
    scale_a: &Rational,
    scale_b: &Rational,
    max_degree: usize,
) -> Result<QiReport> {
    let (a, b) = (f.source(), f.target());
    if g.source() != b || g.target() != a {
        return Err(Error::SpaceMismatch);
    }
    if scale_a.is_negative() || scale_b.is_negative() {
        return Err(Error::InvalidParams("scales must be nonnegative".into()));
    }
    let gf = f.then(g)?;
    let fg = g.then(f)?;
    let d_gf = map_distance(&gf, &CoarseMap::identity(a))?;
    let d_fg = map_distance(&fg, &CoarseMap::identity(b))?;
    let a_via = coarse_modulus(f, scale_a).forward;
    let b_via = coarse_modulus(g, scale_b).forward;
    let a_big = coarse_modulus(g, &a_via).forward.max(scale_a + &d_gf);
    let b_big = coarse_modulus(f, &b_via).forward.max(scale_b + &d_fg);
    let dim = max_degree + 1;
    let xa = build_rips(a, scale_a, dim)?;
    let ya = build_rips(a, &a_big, dim)?;
    let va = build_rips(b, &a_via, dim)?;
    let xb = build_rips(b, scale_b, dim)?;
    let yb = build_rips(b, &b_big, dim)?;
    let vb = build_rips(a, &b_via, dim)?;

    let mut ts: Vec<Rational> =
        alloc::vec![scale_a.clone(), scale_b.clone(), a_via.clone(), b_via.clone(), a_big.clone(), b_big.clone()];
    ts.sort();
    ts.dedup();
    let tprime_table = ts
        .into_iter()
        .map(|t| {
            let mf = coarse_modulus(f, &t);
            let mg = coarse_modulus(g, &t);
            (t, mf, mg)
        })
        .collect();

    let side_a = Side { small: &xa, via: &va, big: &ya };
    let side_b = Side { small: &xb, via: &vb, big: &yb };
    let mut per_degree = Vec::with_capacity(max_degree + 1);
    for k in 0..=max_degree {
        let (ra, ca) = round_trip_side(&side_a, f, g, k)?;
        let (rb, cb) = round_trip_side(&side_b, g, f, k)?;
        per_degree.push(QiDegree {
            degree: k,
            betti_a: image_rank(&ya, &xa, k)?,
            betti_b: image_rank(&yb, &xb, k)?,
            roundtrip_a: ra,
            roundtrip_b: rb,
            certificates: ca && cb,
        });
    }
    Ok(QiReport {
        scales: QiScales { a: scale_a.clone(), a_via, a_big, b: scale_b.clone(), b_via, b_big },
        tprime_table,
        d_fg,
        d_gf,
        per_degree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{annulus, path};
    use crate::rational::int;
    use crate::simplicial::{cup_aw, cup_shuffle};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(host: &SimplicialComplex, k: usize, rng: &mut ChaCha8Rng) -> Cochain {
        Cochain::from_fn(host, k, |_| int(rng.gen_range(-4..=4)))
    }

    #[test]
    fn pullback_examples() {
        let p5 = path(5).unwrap();
        let p3 = path(3).unwrap();
        let t5 = build_rips(&p5, &int(1), 2).unwrap();
        let t3 = build_rips(&p3, &int(1), 2).unwrap();
        let f = CoarseMap::new(&p5, &p3, alloc::vec![0, 0, 1, 1, 2]).unwrap();
        let op = PullbackOperator::new(f.clone(), int(1));
        assert_eq!(op.target_scale, int(1));
        let kappa = Cochain::from_fn(&t3, 1, |s| int((s[0] * 10 + s[1]) as i64));
        let pulled = op.apply(&t5, &t3, &kappa).unwrap();
        assert_eq!(pulled.eval(&t5, &[1, 2]), Some(int(1)));
        assert_eq!(pulled.eval(&t5, &[0, 1]), Some(int(0)));

        let id = CoarseMap::identity(&p5);
        let k5 = Cochain::from_fn(&t5, 1, |s| int(s[1] as i64 - 7));
        assert_eq!(pullback(&t5, &t5, &id, &k5).unwrap(), k5);
        let constant = CoarseMap::new(&p5, &p3, alloc::vec![1; 5]).unwrap();
        assert!(pullback(&t5, &t3, &constant, &kappa).unwrap().is_zero());

        let far = CoarseMap::new(&p3, &p5, alloc::vec![0, 2, 4]).unwrap();
        let err = pullback(&t3, &t5, &far, &k5).err().unwrap();
        assert!(matches!(err, Error::ScaleViolation { .. }));
    }

    #[test]
    fn pullback_is_natural() {
        let p5 = path(5).unwrap();
        let p3 = path(3).unwrap();
        let t5 = build_rips(&p5, &int(1), 3).unwrap();
        let t3 = build_rips(&p3, &int(1), 3).unwrap();
        let f = CoarseMap::new(&p5, &p3, alloc::vec![0, 0, 1, 1, 2]).unwrap();
        let swap = CoarseMap::new(&p3, &p3, alloc::vec![2, 1, 0]).unwrap();
        let fs = f.then(&swap).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let k = random(&t3, 1, &mut rng);
            let l = random(&t3, 1, &mut rng);
            let lhs = coboundary(&t5, &pullback(&t5, &t3, &f, &k).unwrap()).unwrap();
            let rhs = pullback(&t5, &t3, &f, &coboundary(&t3, &k).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            // f is monotone, so the ordered product pulls back exactly
            let prod = pullback(&t5, &t3, &f, &cup_aw(&t3, &k, &l).unwrap()).unwrap();
            let sep = cup_aw(&t5, &pullback(&t5, &t3, &f, &k).unwrap(), &pullback(&t5, &t3, &f, &l).unwrap()).unwrap();
            assert_eq!(prod, sep);
            let prod = pullback(&t5, &t3, &fs, &cup_shuffle(&t3, &k, &l).unwrap()).unwrap();
            let sep = cup_shuffle(&t5, &pullback(&t5, &t3, &fs, &k).unwrap(), &pullback(&t5, &t3, &fs, &l).unwrap()).unwrap();
            assert_eq!(prod, sep);
            let two = pullback(&t5, &t3, &f, &pullback(&t3, &t3, &swap, &k).unwrap()).unwrap();
            assert_eq!(two, pullback(&t5, &t3, &fs, &k).unwrap());
        }
    }

    #[test]
    fn prism_homotopy_on_path() {
        let p5 = path(5).unwrap();
        let x = build_rips(&p5, &int(1), 3).unwrap();
        let y = build_rips(&p5, &int(2), 4).unwrap();
        let id = CoarseMap::identity(&p5);
        let shift = CoarseMap::new(&p5, &p5, alloc::vec![1, 2, 3, 4, 4]).unwrap();
        assert_eq!(map_distance(&id, &shift).unwrap(), int(1));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=2 {
            for _ in 0..30 {
                let kappa = random(&y, k, &mut rng);
                let lhs = homotopy_defect(&x, &y, &id, &shift, &kappa).unwrap();
                let rhs = pullback(&x, &y, &shift, &kappa).unwrap().sub(&pullback(&x, &y, &id, &kappa).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
        let u = random(&y, 0, &mut rng);
        let du = coboundary(&y, &u).unwrap();
        let b = chain_homotopy_b(&x, &y, &id, &shift, &du).unwrap();
        for v in 0..5 {
            assert_eq!(b.values()[v], &u.values()[shift.apply(v)] - &u.values()[v]);
        }
        let kappa = random(&y, 2, &mut rng);
        assert!(chain_homotopy_b(&x, &y, &shift, &shift, &kappa).unwrap().is_zero());
    }

    #[test]
    fn identity_experiment() {
        let a = annulus(6, 2).unwrap();
        let id = CoarseMap::identity(&a);
        let r = qi_invariance_experiment(&id, &id, &int(1), &int(1), 1).unwrap();
        assert_eq!(r.d_fg, int(0));
        assert_eq!(r.d_gf, int(0));
        assert!(r.passed());
    }

    #[test]
    fn paths_with_halving() {
        let p9 = path(9).unwrap();
        let p5 = path(5).unwrap();
        let f = CoarseMap::new(&p9, &p5, (0..9).map(|i| i / 2).collect()).unwrap();
        let g = CoarseMap::new(&p5, &p9, (0..5).map(|i| 2 * i).collect()).unwrap();
        let r = qi_invariance_experiment(&f, &g, &int(2), &int(1), 1).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.per_degree[0].betti_a, 1);
        assert_eq!(r.per_degree[1].betti_a, 0);
    }
}
