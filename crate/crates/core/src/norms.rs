//! ℓ^p, counting, graded and packing norms of cochains.
//!
//! Quantities that feed a comparison are kept exact where the exponent allows it:
//! the `p`-th power of a norm is rational for integer `p`, and ℓ^∞ norms are
//! maxima. Everything else is `f64`.

use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::metric::{
    candidate_weight_sum, color_count, enumerate_maximal_packings, greedy_ball_coloring, greedy_packing, Packing,
    PackingOptimum, PackingParams,
};
use crate::rational::{as_small_integer, pow, to_f64};
use crate::simplicial::{coboundary, ExponentVector};
use crate::{Cochain, Error, FiniteMetricSpace, Rational, Result, SimplicialComplex};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    pub fn finite(p: Rational) -> Result<Self> {
        if p < crate::rational::int(1) {
            return Err(Error::InvalidParams("exponents must be at least 1".into()));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn integer(p: u32) -> Self {
        assert!(p >= 1, "exponents must be at least 1");
        Exponent::Finite(crate::rational::int(p as i64))
    }

    /// `inf`/`infinity`, or any rational ≥ 1 accepted by [`crate::rational::parse`].
    pub fn parse(text: &str) -> Result<Self> {
        match text.trim() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            t => Exponent::finite(crate::rational::parse(t)?),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Exponent::Finite(p) => to_f64(p),
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// The exponent as a small positive integer, if it is one.
    pub fn as_integer(&self) -> Option<u32> {
        match self {
            Exponent::Finite(p) => as_small_integer(p),
            Exponent::Infinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }
}

impl core::fmt::Display for Exponent {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Exponent::Finite(p) => f.write_str(&crate::rational::format(p)),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

/// `(Σ|a|^p)^{1/p}`, the maximum for `p = ∞`, 0 on empty input.
pub fn lp_norm(values: &[f64], p: &Exponent) -> f64 {
    let m = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match p {
        Exponent::Infinity => m,
        _ if m == 0.0 => 0.0,
        Exponent::Finite(_) => {
            let pf = p.to_f64();
            if pf == 1.0 {
                return values.iter().map(|v| v.abs()).sum();
            }
            let s: f64 = values.iter().map(|v| libm::pow(v.abs() / m, pf)).sum();
            m * libm::pow(s, 1.0 / pf)
        }
    }
}

pub fn max_abs(values: &[Rational]) -> Rational {
    values.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
}

/// `Σ|a|^p` exactly.
pub fn lp_power_exact(values: &[Rational], p: u32) -> Rational {
    values.iter().map(|v| pow(&v.abs(), p)).sum()
}

/// Exact norm when it is rational for every input: `p ∈ {1, ∞}`.
pub fn lp_norm_exact(values: &[Rational], p: &Exponent) -> Option<Rational> {
    match p {
        Exponent::Infinity => Some(max_abs(values)),
        _ if p.as_integer() == Some(1) => Some(lp_power_exact(values, 1)),
        _ => None,
    }
}

pub fn lp_norm_rational(values: &[Rational], p: &Exponent) -> f64 {
    if let Some(q) = lp_norm_exact(values, p) {
        return to_f64(&q);
    }
    if p.as_integer() == Some(2) {
        return libm::sqrt(to_f64(&lp_power_exact(values, 2)));
    }
    let f: Vec<f64> = values.iter().map(to_f64).collect();
    lp_norm(&f, p)
}

/// ℓ^p norm over all canonical simplices of the host.
pub fn counting_norm(kappa: &Cochain, p: &Exponent) -> f64 {
    lp_norm_rational(kappa.values(), p)
}

#[derive(Debug, Clone, Copy)]
pub enum NormMode<'a> {
    Counting,
    Packing { space: &'a FiniteMetricSpace, params: &'a PackingParams, cap: usize },
}

/// `‖κ‖_{p_h} + ‖δκ‖_{p_{h+1}}` for a degree-`h` cochain.
pub fn graded_norm(host: &SimplicialComplex, kappa: &Cochain, pi: &ExponentVector, mode: NormMode<'_>) -> Result<f64> {
    let h = kappa.degree();
    if h + 1 >= pi.len() {
        return Err(Error::DegreeOutOfRange { degree: h, max: pi.len().saturating_sub(2) });
    }
    let d = coboundary(host, kappa)?;
    let (p0, p1) = (pi.get(h).expect("checked"), pi.get(h + 1).expect("checked"));
    match mode {
        NormMode::Counting => Ok(counting_norm(kappa, p0) + counting_norm(&d, p1)),
        NormMode::Packing { space, params, cap } => {
            let a = packing_norm(space, host, kappa, p0, params, PackingMethod::Exact { cap })?;
            let b = packing_norm(space, host, &d, p1, params, PackingMethod::Exact { cap })?;
            Ok(a.value() + b.value())
        }
    }
}

/// Largest `|κ(σ)|` over `k`-simplices `σ` of the host with every vertex in `points` (sorted).
pub fn ball_sup(host: &SimplicialComplex, kappa: &Cochain, points: &[usize]) -> Rational {
    host.simplices(kappa.degree())
        .iter()
        .zip(kappa.values())
        .filter(|(s, _)| s.iter().all(|v| points.binary_search(v).is_ok()))
        .map(|(_, v)| v.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PackingMethod {
    Exact { cap: usize },
    Greedy,
    Bounds,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PackingNorm {
    Value {
        value: f64,
        /// `Σ_j sup_{B_j}|κ|^p` for integer `p`, or the norm itself for `p = ∞`.
        exact: Option<Rational>,
        packing: Packing,
        candidates: usize,
    },
    Bounds {
        lower: f64,
        upper: f64,
    },
}

impl PackingNorm {
    /// The value, or the lower bound for [`PackingNorm::Bounds`].
    pub fn value(&self) -> f64 {
        match self {
            PackingNorm::Value { value, .. } => *value,
            PackingNorm::Bounds { lower, .. } => *lower,
        }
    }
}

fn root(x: f64, p: &Exponent) -> f64 {
    match p {
        Exponent::Infinity => x,
        _ => libm::pow(x, 1.0 / p.to_f64()),
    }
}

fn value_of<W, G>(opt: PackingOptimum<W>, p: &Exponent, exact: bool, to: G) -> PackingNorm
where
    G: Fn(&W) -> (f64, Option<Rational>),
{
    let (x, e) = to(&opt.total);
    PackingNorm::Value { value: root(x, p), exact: if exact { e } else { None }, packing: opt.packing, candidates: opt.candidates }
}

/// Packing ℓ^p norm of a cochain on a complex built from `space`.
///
/// The weight of a ball is `(ball_sup)^p`; the norm is the `p`-th root of the
/// largest total weight over admissible packings. For `p = ∞` the norm is the
/// largest ball sup over single admissible balls.
pub fn packing_norm(
    space: &FiniteMetricSpace,
    host: &SimplicialComplex,
    kappa: &Cochain,
    p: &Exponent,
    params: &PackingParams,
    method: PackingMethod,
) -> Result<PackingNorm> {
    kappa.check_host(host)?;
    if p.is_infinite() {
        return Ok(packing_norm_sup(space, host, kappa, params));
    }
    match (method, p.as_integer()) {
        (PackingMethod::Bounds, _) => {
            let lower = packing_norm(space, host, kappa, p, params, PackingMethod::Greedy)?.value();
            let counting = counting_norm(kappa, p);
            let vs = space.ball_vertex_bound(&params.rmax) as f64;
            let by_count = root(vs, p) * counting;
            let sum = match p.as_integer() {
                Some(e) => to_f64(&candidate_weight_sum(space, params, |pts: &[usize]| pow(&ball_sup(host, kappa, pts), e))),
                None => candidate_weight_sum(space, params, |pts: &[usize]| libm::pow(to_f64(&ball_sup(host, kappa, pts)), p.to_f64())),
            };
            Ok(PackingNorm::Bounds { lower, upper: by_count.min(root(sum, p)) })
        }
        (m, Some(e)) => {
            let weight = |pts: &[usize]| pow(&ball_sup(host, kappa, pts), e);
            let opt = match m {
                PackingMethod::Exact { cap } => enumerate_maximal_packings(space, params, cap, weight)?,
                _ => greedy_packing(space, params, weight),
            };
            Ok(value_of(opt, p, true, |w| (to_f64(w), Some(w.clone()))))
        }
        (m, None) => {
            let pf = p.to_f64();
            let weight = |pts: &[usize]| libm::pow(to_f64(&ball_sup(host, kappa, pts)), pf);
            let opt = match m {
                PackingMethod::Exact { cap } => enumerate_maximal_packings(space, params, cap, weight)?,
                _ => greedy_packing(space, params, weight),
            };
            Ok(value_of(opt, p, false, |w| (*w, None)))
        }
    }
}

fn packing_norm_sup(space: &FiniteMetricSpace, host: &SimplicialComplex, kappa: &Cochain, params: &PackingParams) -> PackingNorm {
    // A single ball is always an admissible packing, and the largest ball has the largest sup.
    let mut best = Rational::zero();
    let mut ball = None;
    for c in 0..space.len() {
        let pts = space.points_within(c, &params.rmax);
        let s = ball_sup(host, kappa, &pts);
        if s > best {
            best = s;
            ball = Some(crate::metric::Ball { center: c, radius: params.rmax.clone() });
        }
    }
    PackingNorm::Value {
        value: to_f64(&best),
        exact: Some(best),
        packing: Packing { balls: ball.into_iter().collect() },
        candidates: space.len(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormEquivalenceReport {
    pub p: Exponent,
    /// `packing^p` (the norm itself for `p = ∞`).
    pub packing_p: f64,
    pub counting_p: f64,
    pub packing_p_exact: Option<Rational>,
    pub counting_p_exact: Option<Rational>,
    pub v_s: usize,
    pub colors: usize,
    pub v_ls: usize,
    pub lhs_ok: bool,
    pub rhs_ok: bool,
    pub colors_ok: bool,
}

impl NormEquivalenceReport {
    pub fn passed(&self) -> bool {
        self.lhs_ok && self.rhs_ok && self.colors_ok
    }
}

/// Compares the exact packing norm at `R = S = scale` with the counting norm:
/// `packing^p ≤ V(S)·counting^p` and `counting^p ≤ N·V(S)·packing^p`, where `N`
/// is the number of colors of the greedy `ℓS`-separated coloring from point 0.
pub fn norm_equivalence_check(
    space: &FiniteMetricSpace,
    host: &SimplicialComplex,
    kappa: &Cochain,
    p: &Exponent,
    ell: &Rational,
    scale: &Rational,
    cap: usize,
) -> Result<NormEquivalenceReport> {
    let params = PackingParams::new(ell.clone(), scale.clone(), scale.clone())?;
    let packing = packing_norm(space, host, kappa, p, &params, PackingMethod::Exact { cap })?;
    let PackingNorm::Value { value, exact, .. } = packing else { unreachable!("exact method") };
    let v_s = space.ball_vertex_bound(scale);
    let sep = ell * scale;
    let colors = if space.is_empty() { 0 } else { color_count(&greedy_ball_coloring(space, &sep, 0)?) };
    let v_ls = space.ball_vertex_bound(&sep);
    let vs_q = crate::rational::int(v_s as i64);
    let nvs_q = crate::rational::int((colors * v_s) as i64);
    let (packing_p, counting_p, packing_p_exact, counting_p_exact, lhs_ok, rhs_ok);
    if p.is_infinite() || p.as_integer().is_some() {
        let pe = exact.expect("exact for integer and infinite exponents");
        let ce = match p.as_integer() {
            Some(e) => lp_power_exact(kappa.values(), e),
            None => max_abs(kappa.values()),
        };
        let (vs_f, nvs_f) = if p.is_infinite() { (crate::rational::int(1), crate::rational::int(1)) } else { (vs_q, nvs_q) };
        lhs_ok = pe <= &vs_f * &ce;
        rhs_ok = ce <= &nvs_f * &pe;
        packing_p = to_f64(&pe);
        counting_p = to_f64(&ce);
        packing_p_exact = Some(pe);
        counting_p_exact = Some(ce);
    } else {
        let pf = p.to_f64();
        packing_p = libm::pow(value, pf);
        counting_p = libm::pow(counting_norm(kappa, p), pf);
        let tol = 1e-9 * (1.0 + packing_p.max(counting_p));
        lhs_ok = packing_p <= v_s as f64 * counting_p + tol;
        rhs_ok = counting_p <= (colors * v_s) as f64 * packing_p + tol;
        packing_p_exact = None;
        counting_p_exact = None;
    }
    Ok(NormEquivalenceReport {
        p: p.clone(),
        packing_p,
        counting_p,
        packing_p_exact,
        counting_p_exact,
        v_s,
        colors,
        v_ls,
        lhs_ok,
        rhs_ok,
        colors_ok: colors <= v_ls + 1,
    })
}
