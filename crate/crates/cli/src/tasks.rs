use std::path::{Path, PathBuf};

use packcoh::coarse::qi_invariance_experiment;
use packcoh::cohomology::{
    betti, classes_equal, poincare_constant, vanishing_radius, BoundKind, PoincarePair, VanishingRadius,
};
use packcoh::leray::{build_nested_coverings, Direction, NestedCoverings, StepKind, TransferWitness};
use packcoh::metric::{CoarseMap, Modulus, PackingParams};
use packcoh::norms::{norm_equivalence_check, packing_norm, Exponent, PackingMethod, PackingNorm};
use packcoh::rational::{self, int};
use packcoh::simplicial::{ball_subcomplex, build_rips, build_vietoris_rips, coboundary};
use packcoh::{Cochain, Error, FiniteMetricSpace, Rational, SimplicialComplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::io::{self, cochain_from_json, cochain_to_json, parse_rational, rational_json};
use crate::{report, CliError, Command, ComplexArgs, ComplexKind, Context, DirectionArg, MethodArg, Outcome, Verdict};

fn exponent(s: &str) -> Result<Exponent, CliError> {
    Exponent::parse(s).map_err(|e| CliError::Input(format!("bad exponent {s:?}: {e}")))
}

fn kind_name(k: ComplexKind) -> &'static str {
    match k {
        ComplexKind::Ball => "ball",
        ComplexKind::Vr => "vr",
    }
}

fn build_complex(space: &FiniteMetricSpace, kind: ComplexKind, scale: &Rational, max_dim: usize) -> Result<SimplicialComplex, CliError> {
    Ok(match kind {
        ComplexKind::Ball => build_rips(space, scale, max_dim)?,
        ComplexKind::Vr => build_vietoris_rips(space, scale, max_dim)?,
    })
}

fn complex_from_args(space: &FiniteMetricSpace, cx: &ComplexArgs, max_dim: usize) -> Result<(SimplicialComplex, Rational), CliError> {
    let scale = parse_rational(&cx.scale)?;
    Ok((build_complex(space, cx.complex, &scale, max_dim)?, scale))
}

fn random_cochain(host: &SimplicialComplex, k: usize, rng: &mut ChaCha8Rng) -> Cochain {
    Cochain::from_fn(host, k, |_| int(rng.gen_range(-3..=3)))
}

fn counts(host: &SimplicialComplex) -> Vec<usize> {
    (0..=host.dim().unwrap_or(0)).map(|k| host.count(k)).collect()
}

/// The smallest covering radius the partition of unity accepts: the largest edge length.
fn default_radius(space: &FiniteMetricSpace, host: &SimplicialComplex, scale: &Rational) -> Rational {
    let e = host
        .edge_scale()
        .cloned()
        .unwrap_or_else(|| host.simplices(1).iter().map(|s| space.dist(s[0], s[1]).clone()).max().unwrap_or_else(|| int(0)));
    if e > int(0) {
        e
    } else {
        scale.clone()
    }
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn modulus_json(m: &Modulus) -> Value {
    json!({ "forward": rational_json(&m.forward), "backward": rational_json(&m.backward), "value": rational_json(&m.value()) })
}

pub fn dispatch(cmd: &Command, ctx: &Context) -> Result<Outcome, CliError> {
    match cmd {
        Command::Rips { scale, max_dim, complex, list } => rips(ctx, scale, *max_dim, *complex, *list),
        Command::Betti { degree, cx } => betti_task(ctx, *degree, cx),
        Command::PackingNorm { p, ell, rmin, rmax, method, degree, cochain, cap, cx } => {
            packing_task(ctx, p, ell, rmin, rmax, *method, *degree, cochain.as_ref(), *cap, cx)
        }
        Command::VanishingRadius { r, l, max_degree, cx } => vanishing_task(ctx, r, *l, *max_degree, cx),
        Command::Poincare { degree, p, q, center, inner, outer, cx } => {
            poincare_task(ctx, *degree, p, q, *center, inner.as_deref(), outer.as_deref(), cx)
        }
        Command::Transfer { degree, r, direction, levels, class, cochain, witness, cx } => {
            transfer_task(ctx, *degree, r.as_deref(), *direction, *levels, *class, cochain.as_ref(), witness.as_ref(), cx)
        }
        Command::Roundtrip { degree, r, levels, samples, cx } => roundtrip_task(ctx, *degree, r.as_deref(), *levels, *samples, cx),
        Command::Multiplicativity { r, levels, cx } => multiplicativity_task(ctx, r.as_deref(), *levels, cx),
        Command::QiExperiment { map, max_degree } => qi_task(&ctx.base.join(map), *max_degree),
        Command::NormEquivalence { p, ell, radius, degree, samples, cap, cx } => {
            norm_equivalence_task(ctx, p, ell, radius, *degree, *samples, *cap, cx)
        }
        Command::Replay { witness } => replay_task(&ctx.base.join(witness)),
        Command::Generate { spec } => {
            let space = io::generate(spec)?;
            let doc = io::space_to_json(&space);
            Ok(Outcome { summary: format!("generated {spec}: {} points", space.len()), report: doc, verdict: Verdict::Pass })
        }
        Command::Run { .. } => Err(CliError::Input("scenarios cannot nest".into())),
    }
}

fn rips(ctx: &Context, scale: &str, max_dim: usize, kind: ComplexKind, list: bool) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let s = parse_rational(scale)?;
    let host = build_complex(space, kind, &s, max_dim)?;
    let c = counts(&host);
    let euler: i64 = c.iter().enumerate().map(|(k, n)| if k % 2 == 0 { *n as i64 } else { -(*n as i64) }).sum();
    let mut report = json!({
        "task": "rips",
        "points": space.len(),
        "complex": kind_name(kind),
        "scale": rational_json(&s),
        "max_dim": max_dim,
        "edge_scale": host.edge_scale().map_or(Value::Null, rational_json),
        "counts": c,
        "euler_characteristic": euler,
    });
    if list {
        let all: Vec<Value> = (0..c.len()).map(|k| json!(host.simplices(k))).collect();
        report["simplices"] = json!(all);
    }
    let summary = format!("{} complex at scale {}: simplex counts {:?}", kind_name(kind), rational::format(&s), c);
    Ok(Outcome { report, summary, verdict: Verdict::Pass })
}

fn betti_task(ctx: &Context, degree: Option<usize>, cx: &ComplexArgs) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let degrees: Vec<usize> = match degree {
        Some(d) => vec![d],
        None => vec![0, 1],
    };
    let top = *degrees.iter().max().expect("nonempty");
    let (host, scale) = complex_from_args(space, cx, top + 1)?;
    let rows: Vec<Value> = degrees
        .iter()
        .map(|&k| {
            let r = betti(&host, k);
            json!({
                "degree": k,
                "betti": r.betti,
                "dim_cochains": r.dim_cochains,
                "dim_cocycles": r.dim_cocycles,
                "dim_coboundaries": r.dim_coboundaries,
            })
        })
        .collect();
    let bettis: Vec<u64> = rows.iter().map(|r| r["betti"].as_u64().unwrap_or(0)).collect();
    let report = json!({
        "task": "betti",
        "complex": kind_name(cx.complex),
        "scale": rational_json(&scale),
        "counts": counts(&host),
        "per_degree": rows,
    });
    let summary = format!("betti numbers in degrees {degrees:?}: {bettis:?}");
    Ok(Outcome { report, summary, verdict: Verdict::Pass })
}

fn load_or_random(ctx: &Context, host: &SimplicialComplex, degree: usize, path: Option<&PathBuf>, rng: &mut ChaCha8Rng) -> Result<Cochain, CliError> {
    match path {
        Some(p) => {
            let c = cochain_from_json(host, &io::read_json(&ctx.base.join(p))?)?;
            if c.degree() != degree {
                return Err(CliError::Input(format!("cochain has degree {}, expected {degree}", c.degree())));
            }
            Ok(c)
        }
        None => Ok(random_cochain(host, degree, rng)),
    }
}

fn packing_json(n: &PackingNorm) -> Value {
    match n {
        PackingNorm::Value { value, exact, packing, candidates } => json!({
            "norm": value,
            "exact": exact.as_ref().map_or(Value::Null, rational_json),
            "balls": packing.balls.iter().map(|b| json!({"center": b.center, "radius": rational_json(&b.radius)})).collect::<Vec<_>>(),
            "candidates": candidates,
        }),
        PackingNorm::Bounds { lower, upper } => json!({ "lower": lower, "upper": upper }),
    }
}

#[allow(clippy::too_many_arguments)]
fn packing_task(
    ctx: &Context,
    p: &str,
    ell: &str,
    rmin: &str,
    rmax: &str,
    method: MethodArg,
    degree: usize,
    cochain: Option<&PathBuf>,
    cap: usize,
    cx: &ComplexArgs,
) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let (host, scale) = complex_from_args(space, cx, degree)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let kappa = load_or_random(ctx, &host, degree, cochain, &mut rng)?;
    let pe = exponent(p)?;
    let params = PackingParams::new(parse_rational(ell)?, parse_rational(rmin)?, parse_rational(rmax)?)?;
    let m = match method {
        MethodArg::Exact => PackingMethod::Exact { cap },
        MethodArg::Greedy => PackingMethod::Greedy,
        MethodArg::Bounds => PackingMethod::Bounds,
    };
    let mut report = json!({
        "task": "packing-norm",
        "seed": ctx.seed,
        "p": pe.to_string(),
        "ell": rational_json(&params.ell),
        "rmin": rational_json(&params.rmin),
        "rmax": rational_json(&params.rmax),
        "complex": kind_name(cx.complex),
        "scale": rational_json(&scale),
        "degree": degree,
        "cochain": cochain_to_json(&host, &kappa),
    });
    match packing_norm(space, &host, &kappa, &pe, &params, m) {
        Ok(n) => {
            report["status"] = json!("ok");
            report["result"] = packing_json(&n);
            let summary = match &n {
                PackingNorm::Value { value, .. } => format!("packing l^{pe} norm = {value}"),
                PackingNorm::Bounds { lower, upper } => format!("packing l^{pe} norm in [{lower}, {upper}]"),
            };
            Ok(Outcome { report, summary, verdict: Verdict::Pass })
        }
        Err(Error::CandidateCapExceeded { count, cap }) => {
            let b = packing_norm(space, &host, &kappa, &pe, &params, PackingMethod::Bounds)?;
            report["status"] = json!("candidate-cap-exceeded");
            report["candidates"] = json!(count);
            report["cap"] = json!(cap);
            report["result"] = packing_json(&b);
            let summary = format!("{count} candidate balls exceed the cap of {cap}; reporting bounds");
            Ok(Outcome { report, summary, verdict: Verdict::CapExceeded })
        }
        Err(e) => Err(e.into()),
    }
}

fn vanishing_task(ctx: &Context, r: &str, levels: usize, max_degree: usize, cx: &ComplexArgs) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let (host, scale) = complex_from_args(space, cx, max_degree + 1)?;
    let radius = parse_rational(r)?;
    let vr = vanishing_radius(space, &host, &radius, max_degree, None, true)?;
    let (found, value) = match &vr {
        VanishingRadius::Found(x) => (true, rational_json(x)),
        VanishingRadius::NotFound { .. } => (false, Value::Null),
    };
    let schedule = match build_nested_coverings(space, &host, &radius, levels, max_degree) {
        Ok(cov) => json!({ "radii": cov.radii().iter().map(rational_json).collect::<Vec<_>>() }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let report = json!({
        "task": "vanishing-radius",
        "complex": kind_name(cx.complex),
        "scale": rational_json(&scale),
        "R": rational_json(&radius),
        "levels": levels,
        "max_degree": max_degree,
        "vanishing_radius": value,
        "schedule": schedule,
    });
    let summary = match &vr {
        VanishingRadius::Found(x) => format!("vanishing radius for R = {}: {}", rational::format(&radius), rational::format(x)),
        VanishingRadius::NotFound { cap } => format!("no vanishing radius up to the diameter {}", rational::format(cap)),
    };
    Ok(Outcome { report, summary, verdict: verdict(found) })
}

#[allow(clippy::too_many_arguments)]
fn poincare_task(
    ctx: &Context,
    degree: usize,
    p: &str,
    q: &str,
    center: usize,
    inner: Option<&str>,
    outer: Option<&str>,
    cx: &ComplexArgs,
) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let (host, scale) = complex_from_args(space, cx, degree + 1)?;
    let inner_r = inner.map(parse_rational).transpose()?.unwrap_or_else(|| scale.clone());
    let outer_r = match outer {
        Some(s) => parse_rational(s)?,
        None => match vanishing_radius(space, &host, &inner_r, degree, Some(&[center]), true)? {
            VanishingRadius::Found(x) => x,
            VanishingRadius::NotFound { cap } => cap,
        },
    };
    let pair = PoincarePair::new(ball_subcomplex(&host, space, center, &inner_r)?, ball_subcomplex(&host, space, center, &outer_r)?)?;
    let (pe, qe) = (exponent(p)?, exponent(q)?);
    let mut report = json!({
        "task": "poincare",
        "seed": ctx.seed,
        "degree": degree,
        "p": pe.to_string(),
        "q": qe.to_string(),
        "center": center,
        "inner_radius": rational_json(&inner_r),
        "outer_radius": rational_json(&outer_r),
        "inner_counts": counts(&pair.inner),
        "outer_counts": counts(&pair.outer),
    });
    match poincare_constant(&pair, degree, &pe, &qe, ctx.seed) {
        Ok(est) => {
            report["status"] = json!("ok");
            report["constant"] = json!(est.value);
            report["bound"] = json!(match est.bound {
                BoundKind::Exact => "exact",
                BoundKind::Lower => "lower",
            });
            report["method"] = json!(est.method);
            report["samples"] = json!(est.samples);
            let summary = format!("Poincare constant ({}) = {}", report["bound"].as_str().unwrap_or(""), est.value);
            Ok(Outcome { report, summary, verdict: Verdict::Pass })
        }
        Err(Error::Infeasible) => {
            report["status"] = json!("infeasible");
            Ok(Outcome { report, summary: "restriction does not vanish; no Poincare constant".into(), verdict: Verdict::Fail })
        }
        Err(e) => Err(e.into()),
    }
}

struct CoveringSetup {
    host: SimplicialComplex,
    scale: Rational,
    radius: Rational,
    levels: usize,
    max_degree: usize,
    cov: NestedCoverings,
}

fn setup_coverings(
    space: &FiniteMetricSpace,
    kind: ComplexKind,
    scale: Rational,
    r: Option<&Rational>,
    levels: usize,
    max_degree: usize,
) -> Result<CoveringSetup, CliError> {
    let host = build_complex(space, kind, &scale, max_degree + 1)?;
    let radius = r.cloned().unwrap_or_else(|| default_radius(space, &host, &scale));
    let cov = build_nested_coverings(space, &host, &radius, levels, max_degree)?;
    Ok(CoveringSetup { host, scale, radius, levels, max_degree, cov })
}

fn step_name(k: StepKind) -> &'static str {
    match k {
        StepKind::Embed => "embed",
        StepKind::Restrict => "restrict",
        StepKind::InvertVertical => "invert-d''",
        StepKind::Cech => "apply-delta",
        StepKind::Epsilon => "apply-epsilon",
        StepKind::Vertical => "apply-d",
        StepKind::Sample => "sample",
        StepKind::Glue => "glue",
    }
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::ToNerve => "to-nerve",
        Direction::ToSpace => "to-space",
    }
}

fn steps_summary(w: &TransferWitness) -> Vec<Value> {
    w.steps
        .iter()
        .map(|s| {
            json!({
                "kind": step_name(s.kind),
                "level": s.level,
                "bidegree": [s.bidegree.0, s.bidegree.1],
                "input_norm": s.input_norm,
                "output_norm": s.output_norm,
                "constant": s.constant(),
            })
        })
        .collect()
}

fn witness_json(space: &FiniteMetricSpace, kind: ComplexKind, st: &CoveringSetup, w: &TransferWitness) -> Value {
    let (input_host, output_host) = match w.direction {
        Direction::ToNerve => (&st.host, st.cov.nerve()),
        Direction::ToSpace => (st.cov.nerve(), &st.host),
    };
    let steps: Vec<Value> = w
        .steps
        .iter()
        .zip(steps_summary(w))
        .map(|(s, mut v)| {
            let parts: Vec<Vec<Value>> = s.output.iter().map(|c| c.values().iter().map(rational_json).collect()).collect();
            v["output"] = json!(parts);
            v
        })
        .collect();
    json!({
        "kind": "transfer-witness",
        "direction": direction_name(w.direction),
        "degree": w.degree,
        "space": io::space_to_json(space),
        "complex": { "kind": kind_name(kind), "scale": rational_json(&st.scale), "max_dim": st.max_degree + 1 },
        "R": rational_json(&st.radius),
        "levels": st.levels,
        "max_degree": st.max_degree,
        "input": cochain_to_json(input_host, &w.input),
        "output": cochain_to_json(output_host, &w.output),
        "steps": steps,
    })
}

#[allow(clippy::too_many_arguments)]
fn transfer_task(
    ctx: &Context,
    degree: usize,
    r: Option<&str>,
    direction: DirectionArg,
    levels: Option<usize>,
    class: usize,
    cochain: Option<&PathBuf>,
    witness_path: Option<&PathBuf>,
    cx: &ComplexArgs,
) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let r = r.map(parse_rational).transpose()?;
    let levels = levels.unwrap_or(degree.max(1));
    let st = setup_coverings(space, cx.complex, parse_rational(&cx.scale)?, r.as_ref(), levels, degree)?;
    let (source_host, target_host) = match direction {
        DirectionArg::ToNerve => (&st.host, st.cov.nerve()),
        DirectionArg::ToSpace => (st.cov.nerve(), &st.host),
    };
    let input = match cochain {
        Some(p) => cochain_from_json(source_host, &io::read_json(&ctx.base.join(p))?)?,
        None => {
            let reps = betti(source_host, degree).representatives;
            let n = reps.len();
            reps.into_iter().nth(class).ok_or_else(|| CliError::Input(format!("class {class} out of range: H^{degree} has dimension {n}")))?
        }
    };
    let (output, w) = match direction {
        DirectionArg::ToNerve => st.cov.transfer_to_nerve(&input)?,
        DirectionArg::ToSpace => st.cov.transfer_to_space(&input)?,
    };
    let trivial = classes_equal(target_host, &output, &Cochain::zero(target_host, degree))?;
    let wjson = witness_json(space, cx.complex, &st, &w);
    // reports name the witness as given, or relative to the output directory
    let (wpath, wname) = match (witness_path, &ctx.out) {
        (Some(p), _) => (Some(ctx.base.join(p)), Some(p.display().to_string())),
        (None, Some(d)) => (Some(d.join("witness.json")), Some("witness.json".to_string())),
        (None, None) => (None, None),
    };
    if let Some(p) = &wpath {
        report::write_json(p, &wjson)?;
    }
    let report = json!({
        "task": "transfer",
        "direction": direction_name(w.direction),
        "degree": degree,
        "complex": kind_name(cx.complex),
        "scale": rational_json(&st.scale),
        "R": rational_json(&st.radius),
        "radii": st.cov.radii().iter().map(rational_json).collect::<Vec<_>>(),
        "complex_counts": counts(&st.host),
        "nerve_counts": counts(st.cov.nerve()),
        "input": cochain_to_json(source_host, &input),
        "output": cochain_to_json(target_host, &output),
        "output_is_coboundary": trivial,
        "steps": steps_summary(&w),
        "witness": wname.map_or(Value::Null, Value::String),
    });
    let summary = format!(
        "transfer {} in degree {degree}: {} steps, output class {}",
        direction_name(w.direction),
        w.steps.len(),
        if trivial { "trivial" } else { "nontrivial" }
    );
    Ok(Outcome { report, summary, verdict: Verdict::Pass })
}

fn roundtrip_task(ctx: &Context, degree: Option<usize>, r: Option<&str>, levels: usize, samples: usize, cx: &ComplexArgs) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let degrees: Vec<usize> = match degree {
        Some(d) => vec![d],
        None => (0..=levels).collect(),
    };
    let max_degree = *degrees.iter().max().expect("nonempty");
    let r = r.map(parse_rational).transpose()?;
    let st = setup_coverings(space, cx.complex, parse_rational(&cx.scale)?, r.as_ref(), levels, max_degree)?;
    let nerve = st.cov.nerve();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut all_ok = true;
    let mut rows = Vec::new();
    for &k in &degrees {
        let bc = betti(&st.host, k);
        let bn = betti(nerve, k);
        let to_nerve = bc
            .representatives
            .iter()
            .map(|z| Ok(st.cov.round_trip_check(z, Direction::ToNerve)?.0))
            .collect::<Result<Vec<bool>, CliError>>()?;
        let to_space = bn
            .representatives
            .iter()
            .map(|z| Ok(st.cov.round_trip_check(z, Direction::ToSpace)?.0))
            .collect::<Result<Vec<bool>, CliError>>()?;
        let mut exact_ok = true;
        for _ in 0..samples {
            let (a, b) = if k == 0 {
                (Cochain::from_fn(&st.host, 0, |_| int(1)), Cochain::from_fn(nerve, 0, |_| int(1)))
            } else {
                (coboundary(&st.host, &random_cochain(&st.host, k - 1, &mut rng))?, coboundary(nerve, &random_cochain(nerve, k - 1, &mut rng))?)
            };
            exact_ok &= st.cov.round_trip_check(&a, Direction::ToNerve)?.0;
            exact_ok &= st.cov.round_trip_check(&b, Direction::ToSpace)?.0;
        }
        let ok = bc.betti == bn.betti && to_nerve.iter().all(|x| *x) && to_space.iter().all(|x| *x) && exact_ok;
        all_ok &= ok;
        rows.push(json!({
            "degree": k,
            "betti_complex": bc.betti,
            "betti_nerve": bn.betti,
            "classes_to_nerve": to_nerve,
            "classes_to_space": to_space,
            "exact_samples": samples,
            "exact_samples_ok": exact_ok,
            "ok": ok,
        }));
    }
    let report = json!({
        "task": "roundtrip",
        "seed": ctx.seed,
        "complex": kind_name(cx.complex),
        "scale": rational_json(&st.scale),
        "R": rational_json(&st.radius),
        "radii": st.cov.radii().iter().map(rational_json).collect::<Vec<_>>(),
        "per_degree": rows,
        "verdict": all_ok,
    });
    let summary = format!("round trips in degrees {degrees:?}: {}", if all_ok { "identity on classes" } else { "FAILED" });
    Ok(Outcome { report, summary, verdict: verdict(all_ok) })
}

fn multiplicativity_task(ctx: &Context, r: Option<&str>, levels: usize, cx: &ComplexArgs) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let r = r.map(parse_rational).transpose()?;
    let st = setup_coverings(space, cx.complex, parse_rational(&cx.scale)?, r.as_ref(), levels.max(1), 1)?;
    let nerve = st.cov.nerve();
    let h0 = betti(nerve, 0).representatives;
    let h1 = betti(nerve, 1).representatives;
    let unit = Cochain::from_fn(nerve, 0, |_| int(1));
    let mut pairs: Vec<(String, Cochain, String, Cochain)> = Vec::new();
    let named = |tag: &str, v: &[Cochain]| v.iter().enumerate().map(|(i, c)| (format!("{tag}[{i}]"), c.clone())).collect::<Vec<_>>();
    let (n0, n1) = (named("h0", &h0), named("h1", &h1));
    for (a, ca) in &n0 {
        for (b, cb) in n0.iter().chain(&n1) {
            pairs.push((a.clone(), ca.clone(), b.clone(), cb.clone()));
        }
    }
    for (b, cb) in &n1 {
        for (a, ca) in &n0 {
            pairs.push((b.clone(), cb.clone(), a.clone(), ca.clone()));
        }
    }
    for (b, cb) in n0.iter().chain(&n1) {
        pairs.push(("unit".into(), unit.clone(), b.clone(), cb.clone()));
        pairs.push((b.clone(), cb.clone(), "unit".into(), unit.clone()));
    }
    let mut rows = Vec::new();
    let mut all_ok = true;
    for (a, ca, b, cb) in &pairs {
        let ok = st.cov.multiplicativity_check(ca, cb)?;
        all_ok &= ok;
        rows.push(json!({ "left": a, "right": b, "degrees": [ca.degree(), cb.degree()], "ok": ok }));
    }
    let report = json!({
        "task": "multiplicativity",
        "complex": kind_name(cx.complex),
        "scale": rational_json(&st.scale),
        "R": rational_json(&st.radius),
        "radii": st.cov.radii().iter().map(rational_json).collect::<Vec<_>>(),
        "products": rows,
        "verdict": all_ok,
    });
    let summary = format!("{} products checked: {}", pairs.len(), if all_ok { "all multiplicative" } else { "FAILED" });
    Ok(Outcome { report, summary, verdict: verdict(all_ok) })
}

fn index_list(v: &Value, what: &str) -> Result<Vec<usize>, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::Input(format!("map {what}: {e}")))
}

fn qi_task(map: &Path, max_degree: usize) -> Result<Outcome, CliError> {
    let doc = io::read_json(map)?;
    let base = map.parent().map(PathBuf::from).unwrap_or_default();
    let field = |k: &str| doc.get(k).ok_or_else(|| CliError::Input(format!("map document needs {k:?}")));
    let a = io::space_operand(field("source")?, &base)?;
    let b = io::space_operand(field("target")?, &base)?;
    let f = CoarseMap::new(&a, &b, index_list(field("f")?, "f")?)?;
    let g = CoarseMap::new(&b, &a, index_list(field("g")?, "g")?)?;
    let sa = io::rational_from_json(field("scale_a")?)?;
    let sb = io::rational_from_json(field("scale_b")?)?;
    let r = qi_invariance_experiment(&f, &g, &sa, &sb, max_degree)?;
    let per_degree: Vec<Value> = r
        .per_degree
        .iter()
        .map(|d| {
            json!({
                "degree": d.degree,
                "betti_A": d.betti_a,
                "betti_B": d.betti_b,
                "roundtrip_A": d.roundtrip_a,
                "roundtrip_B": d.roundtrip_b,
                "certificates": d.certificates,
                "roundtrip_ok": d.passed(),
            })
        })
        .collect();
    let table: Vec<Value> = r
        .tprime_table
        .iter()
        .map(|(t, mf, mg)| json!({ "T": rational_json(t), "f": modulus_json(mf), "g": modulus_json(mg) }))
        .collect();
    let ok = r.passed();
    let report = json!({
        "task": "qi-experiment",
        "constants": { "Tprime_table": table, "d_fg": rational_json(&r.d_fg), "d_gf": rational_json(&r.d_gf) },
        "scales": {
            "A": rational_json(&r.scales.a),
            "A_via_B": rational_json(&r.scales.a_via),
            "A_classes": rational_json(&r.scales.a_big),
            "B": rational_json(&r.scales.b),
            "B_via_A": rational_json(&r.scales.b_via),
            "B_classes": rational_json(&r.scales.b_big),
        },
        "per_degree": per_degree,
        "verdict": ok,
    });
    let bettis: Vec<(usize, usize)> = r.per_degree.iter().map(|d| (d.betti_a, d.betti_b)).collect();
    let summary = format!("quasi-isometry round trips: {} (betti A/B per degree {bettis:?})", if ok { "identity" } else { "FAILED" });
    Ok(Outcome { report, summary, verdict: verdict(ok) })
}

#[allow(clippy::too_many_arguments)]
fn norm_equivalence_task(
    ctx: &Context,
    p: &str,
    ell: &str,
    radius: &str,
    degree: usize,
    samples: usize,
    cap: usize,
    cx: &ComplexArgs,
) -> Result<Outcome, CliError> {
    let space = ctx.space()?;
    let (host, scale) = complex_from_args(space, cx, degree)?;
    let pe = exponent(p)?;
    let ell = parse_rational(ell)?;
    let radius = parse_rational(radius)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut rows = Vec::new();
    let mut all_ok = true;
    for _ in 0..samples {
        let kappa = random_cochain(&host, degree, &mut rng);
        let rep = norm_equivalence_check(space, &host, &kappa, &pe, &ell, &radius, cap)?;
        all_ok &= rep.passed();
        rows.push(json!({
            "packing_p": rep.packing_p,
            "counting_p": rep.counting_p,
            "packing_p_exact": rep.packing_p_exact.as_ref().map_or(Value::Null, rational_json),
            "counting_p_exact": rep.counting_p_exact.as_ref().map_or(Value::Null, rational_json),
            "V_S": rep.v_s,
            "colors": rep.colors,
            "V_ellS": rep.v_ls,
            "lhs_ok": rep.lhs_ok,
            "rhs_ok": rep.rhs_ok,
            "colors_ok": rep.colors_ok,
        }));
    }
    let report = json!({
        "task": "norm-equivalence",
        "seed": ctx.seed,
        "p": pe.to_string(),
        "ell": rational_json(&ell),
        "radius": rational_json(&radius),
        "complex": kind_name(cx.complex),
        "scale": rational_json(&scale),
        "degree": degree,
        "samples": rows,
        "verdict": all_ok,
    });
    let summary = format!("norm equivalence on {samples} random cochains: {}", if all_ok { "holds" } else { "FAILED" });
    Ok(Outcome { report, summary, verdict: verdict(all_ok) })
}

fn replay_task(path: &Path) -> Result<Outcome, CliError> {
    let doc = io::read_json(path)?;
    let get = |k: &str| doc.get(k).ok_or_else(|| CliError::Input(format!("witness needs {k:?}")));
    let space = io::space_from_json(get("space")?)?;
    let cxdoc = get("complex")?;
    let kind = match cxdoc.get("kind").and_then(Value::as_str) {
        Some("ball") => ComplexKind::Ball,
        Some("vr") => ComplexKind::Vr,
        _ => return Err(CliError::Input("witness complex kind must be \"ball\" or \"vr\"".into())),
    };
    let scale = io::rational_from_json(cxdoc.get("scale").ok_or_else(|| CliError::Input("witness complex needs a scale".into()))?)?;
    let as_usize = |k: &str| get(k).and_then(|v| v.as_u64().map(|x| x as usize).ok_or_else(|| CliError::Input(format!("witness {k:?} must be an integer"))));
    let levels = as_usize("levels")?;
    let max_degree = as_usize("max_degree")?;
    let radius = io::rational_from_json(get("R")?)?;
    let st = setup_coverings(&space, kind, scale, Some(&radius), levels, max_degree)?;
    let direction = match get("direction")?.as_str() {
        Some("to-nerve") => Direction::ToNerve,
        Some("to-space") => Direction::ToSpace,
        _ => return Err(CliError::Input("witness direction must be \"to-nerve\" or \"to-space\"".into())),
    };
    let input_host = match direction {
        Direction::ToNerve => &st.host,
        Direction::ToSpace => st.cov.nerve(),
    };
    let input = cochain_from_json(input_host, get("input")?)?;
    let (_, w) = match direction {
        Direction::ToNerve => st.cov.transfer_to_nerve(&input)?,
        Direction::ToSpace => st.cov.transfer_to_space(&input)?,
    };
    let again = witness_json(&space, kind, &st, &w);
    let old_steps = get("steps")?.as_array().cloned().unwrap_or_default();
    let new_steps = again["steps"].as_array().cloned().unwrap_or_default();
    let mut mismatch = old_steps.iter().zip(&new_steps).position(|(a, b)| a != b);
    if mismatch.is_none() && old_steps.len() != new_steps.len() {
        mismatch = Some(old_steps.len().min(new_steps.len()));
    }
    let output_ok = get("output")? == &again["output"];
    let ok = mismatch.is_none() && output_ok;
    let report = json!({
        "task": "replay",
        "direction": direction_name(direction),
        "steps": new_steps.len(),
        "first_mismatch": mismatch,
        "output_matches": output_ok,
        "verdict": ok,
    });
    let summary = match (ok, mismatch) {
        (true, _) => format!("replay reproduced all {} steps exactly", new_steps.len()),
        (false, Some(i)) => format!("replay diverged at step {i}"),
        (false, None) => "replay reproduced the steps but not the output".into(),
    };
    Ok(Outcome { report, summary, verdict: verdict(ok) })
}
