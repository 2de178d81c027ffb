//! Acceptance suite: one PASS/FAIL line per criterion at its pinned tolerance.
//!
//! Criteria 2 and 4 are red: the transform forms of the unbounded Q-, F- and
//! P2-calculi disagree with their integral forms, and the F/P2 transforms
//! move with α. Those two are listed in `EXPECTED_RED`; the process exits
//! non-zero when any criterion lands on the other side of its expectation.

mod common;

use std::process::ExitCode;

use common::test_functions;
use qfine_core::calculi::suite::draw_trial;
use qfine_core::calculi::verify::relative_residual;
use qfine_core::calculi::{
    calculus_bounded, calculus_bounded_with, calculus_unbounded, calculus_unbounded_with, run_suite, verify_identity,
    CalculusKind, CalculusOutput, ContourParams, IdentityName, Mode, Resolvents, SuiteConfig, TrialContext,
};
use qfine_core::qlinalg::random::{random_commuting_tuple, TupleOptions};
use qfine_core::qlinalg::{s_spectrum, CommutingTuple, QOperator};
use qfine_core::slice::diff::DEFAULT_STEP;
use qfine_core::slice::{apply_diff, fueter_diagrams, DiffOp, FunctionSide, Side, SliceFunction};
use qfine_core::Quaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIMS: [usize; 4] = [1, 2, 4, 6];
const TRIALS: usize = 20;
const SEED: u64 = 2024;
const EXPECTED_RED: [u32; 2] = [2, 4];

struct Line {
    id: u32,
    title: &'static str,
    value: f64,
    tol: f64,
    details: Vec<String>,
}

impl Line {
    fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

fn trials() -> Vec<TrialContext> {
    DIMS.iter()
        .flat_map(|&dim| {
            let cfg = SuiteConfig::new(dim, TRIALS, SEED);
            (0..TRIALS).map(move |t| draw_trial(&cfg, t).unwrap())
        })
        .collect()
}

fn worst(ctxs: &[TrialContext], name: IdentityName) -> f64 {
    ctxs.iter().map(|c| verify_identity(name, c).unwrap().residual).fold(0.0, f64::max)
}

fn criterion_1(ctxs: &[TrialContext]) -> Line {
    let mut details = Vec::new();
    let mut value: f64 = 0.0;
    for name in IdentityName::ALL.into_iter().filter(|n| n.is_algebraic()) {
        let w = worst(ctxs, name);
        details.push(format!("{} {w:.2e}", name.as_str()));
        value = value.max(w);
    }
    Line { id: 1, title: "algebraic transform identities, n ∈ {1,2,4,6}, 20 tuples × 10 s", value, tol: 1e-8, details }
}

fn criterion_2(ctxs: &[TrialContext]) -> Line {
    let mut details = Vec::new();
    let mut value: f64 = 0.0;
    for (kind, name) in [
        (CalculusKind::S, IdentityName::TransformVsIntegralS),
        (CalculusKind::Q, IdentityName::TransformVsIntegralQ),
        (CalculusKind::F, IdentityName::TransformVsIntegralF),
        (CalculusKind::P2, IdentityName::TransformVsIntegralP2),
    ] {
        let w = worst(ctxs, name);
        details.push(format!("{} {w:.2e}", kind.as_str()));
        value = value.max(w);
    }
    Line { id: 2, title: "transform vs integral, unbounded S, Q, F, P2", value, tol: 1e-8, details }
}

fn criterion_3() -> Line {
    let mut value: f64 = 0.0;
    let mut details = Vec::new();
    let mut note = |label: &str, got: &QOperator, want: &QOperator| {
        let d = got.max_abs_diff(want);
        value = value.max(d);
        details.push(format!("{label} {d:.2e}"));
    };
    let q = SliceFunction::identity();
    let q2 = SliceFunction::real_poly(&[0.0, 0.0, 1.0]);
    let p = ContourParams::default();
    for (seed, n) in [(1u64, 1usize), (2, 3), (3, 6)] {
        let d = random_commuting_tuple(&mut ChaCha8Rng::seed_from_u64(seed), n, &TupleOptions::default());
        let t = &d.tuple;
        let eye = |x: f64| QOperator::scalar(n, Quaternion::real(x));
        let run = |kind, f: &SliceFunction| calculus_bounded(kind, Side::Left, f, t, &p).unwrap().op;
        note(&format!("n={n} S(q)=T"), &run(CalculusKind::S, &q), &t.realify());
        note(&format!("n={n} Q(q)=-2I"), &run(CalculusKind::Q, &q), &eye(-2.0));
        note(&format!("n={n} Q(q²)=-4T0"), &run(CalculusKind::Q, &q2), &QOperator::real(t.component(0)).scale(-4.0));
        note(&format!("n={n} F(q²)=-4I"), &run(CalculusKind::F, &q2), &eye(-4.0));
        note(&format!("n={n} P2(q)=4I"), &run(CalculusKind::P2, &q), &eye(4.0));
        let gamma = 3.2;
        let f = SliceFunction::rational(&[Quaternion::ONE], &[gamma], FunctionSide::Intrinsic).unwrap();
        let got = calculus_unbounded(CalculusKind::Q, Side::Left, &f, t, -2.9, Mode::UnboundedIntegral, &p).unwrap().op;
        let want = Resolvents::new(t).unwrap().pseudo(Quaternion::real(gamma)).unwrap().scale(2.0);
        note(&format!("n={n} Q-unbounded((s-γ)^-1)=2Q_c,γ^-1"), &got, &want);
    }
    Line { id: 3, title: "closed-form values, absolute per entry", value, tol: 1e-9, details }
}

fn criterion_4(ctxs: &[TrialContext]) -> Line {
    let mut details = Vec::new();
    let mut value: f64 = 0.0;
    for kind in CalculusKind::ALL {
        let mut w: f64 = 0.0;
        for ctx in ctxs {
            let res = Resolvents::new(&ctx.tuple).unwrap();
            // F and P2 admit α only at a double zero of f, so their f has
            // one at both α
            let fs: Vec<SliceFunction> = match kind {
                CalculusKind::F | CalculusKind::P2 => vec![double_zero_at(ctx.alpha, ctx.alpha2, ctx.gamma)],
                _ => ctx.unbounded_test_functions(kind).into_iter().map(|(_, f)| f).collect(),
            };
            for f in &fs {
                let run = |alpha| {
                    calculus_unbounded_with(kind, Side::Left, f, &res, alpha, Mode::UnboundedTransform, &ctx.params).unwrap().op
                };
                w = w.max(relative_residual(&run(ctx.alpha), &run(ctx.alpha2), &ctx.probes));
            }
        }
        details.push(format!("α-independence {} {w:.2e}", kind.as_str()));
        value = value.max(w);
    }
    for name in [IdentityName::JIndep, IdentityName::ContourIndep, IdentityName::ConstInvarianceQ, IdentityName::ConstInvarianceP2] {
        let w = worst(ctxs, name);
        details.push(format!("{} {w:.2e}", name.as_str()));
        value = value.max(w);
    }
    Line { id: 4, title: "well-posedness: α, J, contour, constant shift", value, tol: 1e-8, details }
}

/// `(s − a)²(s − b)²(s − γ)⁻⁴`, admissible for F and P2 at both `a` and `b`.
fn double_zero_at(a: f64, b: f64, gamma: f64) -> SliceFunction {
    let (p, q) = ([a * a, -2.0 * a, 1.0], [b * b, -2.0 * b, 1.0]);
    let mut num = [0.0; 5];
    for (i, x) in p.iter().enumerate() {
        for (k, y) in q.iter().enumerate() {
            num[i + k] += x * y;
        }
    }
    SliceFunction::rational(&num.map(Quaternion::real), &[gamma; 4], FunctionSide::Intrinsic).unwrap()
}

fn criterion_5(ctxs: &[TrialContext]) -> Line {
    let mut details = Vec::new();
    let mut value: f64 = 0.0;
    for name in [IdentityName::ProductDBounded, IdentityName::ProductDUnbounded, IdentityName::ProductDbar] {
        let w = worst(ctxs, name);
        details.push(format!("{} {w:.2e}", name.as_str()));
        value = value.max(w);
    }
    // f = g = q: both sides reduce to −4 T0
    let mut exact: f64 = 0.0;
    for ctx in ctxs.iter().step_by(7) {
        let mut c = ctx.clone();
        c.f = SliceFunction::identity();
        c.g = SliceFunction::identity();
        let p = &ctx.params;
        let t = &ctx.tuple;
        let q = |kind, f: &SliceFunction| calculus_bounded(kind, Side::Left, f, t, p).unwrap().op;
        let sq = q(CalculusKind::S, &c.f);
        let qq = q(CalculusKind::Q, &c.f);
        let rhs = sq.compose(&qq).add(&qq.compose(&sq)).add(&qq.compose(&t.imag().realify()).compose(&qq));
        let lhs = q(CalculusKind::Q, &c.f.mul(&c.g).unwrap());
        let want = QOperator::real(t.component(0)).scale(-4.0);
        exact = exact.max(lhs.max_abs_diff(&want)).max(rhs.max_abs_diff(&want));
    }
    details.push(format!("f=g=q vs -4T0 {exact:.2e} (tol 1e-9)"));
    let value = if exact <= 1e-9 { value } else { f64::INFINITY };
    Line { id: 5, title: "product rules D (bounded, unbounded), D̄", value, tol: 1e-8, details }
}

fn criterion_6() -> Line {
    let polys: [&[f64]; 5] = [&[0.0, 0.0, 0.0, 1.0], &[1.0, -2.0, 0.5], &[0.0, 1.0, 0.0, -0.3, 0.2], &[2.0, 0.0, 1.0, 1.0], &[-1.0, 0.5, 0.5, 0.5, 0.5, 0.1]];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut diagrams = [0.0f64; 3];
    let mut integral: f64 = 0.0;
    for c in polys {
        let f = SliceFunction::real_poly(c);
        let mut used = 0;
        while used < 50 {
            let q = Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if q.imag_norm() < 0.05 {
                continue;
            }
            for (w, r) in diagrams.iter_mut().zip(fueter_diagrams(&f, q, DEFAULT_STEP).unwrap()) {
                *w = w.max(r.norm());
            }
            if used % 5 == 0 {
                let fueter = calculus_bounded(CalculusKind::F, Side::Left, &f, &CommutingTuple::scalar(q), &ContourParams::default())
                    .unwrap()
                    .op
                    .as_scalar()
                    .unwrap();
                let fd = apply_diff(DiffOp::Delta, &f, q, DEFAULT_STEP).unwrap();
                integral = integral.max(fueter.dist(fd));
            }
            used += 1;
        }
    }
    let value = diagrams.iter().copied().fold(integral, f64::max);
    let details = vec![
        format!("Δ(Df) {:.2e}", diagrams[0]),
        format!("D²(D̄f) {:.2e}", diagrams[1]),
        format!("D(Δf) {:.2e}", diagrams[2]),
        format!("(1/2π)∮F_L ds_J f vs FD Δf {integral:.2e}"),
    ];
    Line { id: 6, title: "Fueter diagrams and integral form, 5 polynomials × 50 points", value, tol: 1e-4, details }
}

/// Largest `g_{k+1} / g_k` while `g_k` is above the tolerance, and whether
/// every circle ended below it.
fn doubling_ratio(out: &CalculusOutput, rtol: f64) -> (f64, bool) {
    let mut ratio: f64 = 0.0;
    let mut converged = true;
    for g in &out.gaps {
        converged &= g.last().is_some_and(|&x| x <= rtol);
        for w in g.windows(2) {
            if w[0] > rtol {
                ratio = ratio.max(w[1] / w[0]);
            }
        }
    }
    (ratio, converged)
}

fn criterion_7(ctxs: &[TrialContext]) -> Line {
    let mut ratio: f64 = 0.0;
    let mut all_converged = true;
    let mut integrands = 0;
    for ctx in ctxs.iter().step_by(4) {
        let res = Resolvents::new(&ctx.tuple).unwrap();
        let rtol = ctx.params.quad.rtol;
        let mut record = |out: CalculusOutput| {
            let (r, c) = doubling_ratio(&out, rtol);
            ratio = ratio.max(r);
            all_converged &= c;
            integrands += 1;
        };
        for kind in CalculusKind::ALL {
            for f in [&ctx.f, &ctx.simple_pole(), &ctx.double_pole()] {
                record(calculus_bounded_with(kind, Side::Left, f, &res, &ctx.params).unwrap());
            }
            for (_, f) in ctx.unbounded_test_functions(kind) {
                record(calculus_unbounded_with(kind, Side::Left, &f, &res, ctx.alpha, Mode::UnboundedIntegral, &ctx.params).unwrap());
                record(calculus_unbounded_with(kind, Side::Left, &f, &res, ctx.alpha, Mode::UnboundedTransform, &ctx.params).unwrap());
            }
        }
    }
    let mut cauchy: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    for tf in test_functions() {
        for _ in 0..10 {
            let q = Quaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let got = calculus_bounded(CalculusKind::S, Side::Left, &tf.f, &CommutingTuple::scalar(q), &ContourParams::default()).unwrap().op;
            let want = tf.f.evaluate(q).unwrap();
            cauchy = cauchy.max(got.as_scalar().unwrap().dist(want) / want.norm().max(1.0));
        }
    }
    let details = vec![
        format!("{integrands} integrands, worst gap ratio per doubling {ratio:.2e} (need ≤ 0.1), all below rtol: {all_converged}"),
        format!("scalar Cauchy formula {cauchy:.2e} (tol 1e-12)"),
    ];
    let value = if ratio <= 0.1 && all_converged && cauchy <= 1e-12 { ratio.max(cauchy) } else { f64::INFINITY };
    Line { id: 7, title: "quadrature health", value, tol: 0.1, details }
}

fn criterion_8() -> Line {
    let mut value: f64 = 0.0;
    let mut count = 0;
    for n in 1..=8 {
        for seed in 0..10u64 {
            let d = random_commuting_tuple(&mut ChaCha8Rng::seed_from_u64(1000 * n as u64 + seed), n, &TupleOptions::default());
            let want = d.spectrum_oracle();
            let got = s_spectrum(&d.tuple).unwrap();
            if want.spheres.len() != got.spheres.len() {
                value = f64::INFINITY;
                continue;
            }
            for (w, g) in want.spheres.iter().zip(&got.spheres) {
                value = value.max((w.center - g.center).abs()).max((w.radius - g.radius).abs());
            }
            count += 1;
        }
    }
    Line { id: 8, title: "S-spectrum vs joint eigenvalues, n ≤ 8", value, tol: 1e-9, details: vec![format!("{count} tuples")] }
}

fn criterion_9() -> Line {
    let cfg = SuiteConfig::new(3, 4, SEED);
    let a = run_suite(&cfg).unwrap().to_json();
    let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_suite(&cfg).unwrap().to_json());
    let c = run_suite(&cfg).unwrap().to_json();
    let same = a == b && a == c;
    Line {
        id: 9,
        title: "determinism: identical seed/config, byte-identical report",
        value: if same { 0.0 } else { 1.0 },
        tol: 0.0,
        details: vec![format!("{} bytes, 3 runs (one single-threaded)", a.len())],
    }
}

fn main() -> ExitCode {
    let start = std::time::Instant::now();
    let ctxs = trials();
    let lines = [
        criterion_1(&ctxs),
        criterion_2(&ctxs),
        criterion_3(),
        criterion_4(&ctxs),
        criterion_5(&ctxs),
        criterion_6(),
        criterion_7(&ctxs),
        criterion_8(),
        criterion_9(),
    ];
    let mut unexpected = 0;
    println!("\nacceptance ({} trials over n ∈ {DIMS:?}, seed {SEED})", ctxs.len());
    for l in &lines {
        let status = if l.pass() { "PASS" } else { "FAIL" };
        let expected_red = EXPECTED_RED.contains(&l.id);
        let note = if expected_red { "  [known red]" } else { "" };
        println!("{status} {}: {}: {:.3e} (tol {:.0e}){note}", l.id, l.title, l.value, l.tol);
        for d in &l.details {
            println!("       {d}");
        }
        if l.pass() == expected_red {
            unexpected += 1;
        }
    }
    println!("({:.1} s)", start.elapsed().as_secs_f64());
    if unexpected > 0 {
        println!("{unexpected} criteria differ from their expected status");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
