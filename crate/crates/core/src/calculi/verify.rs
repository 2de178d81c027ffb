//! Residual formulas for the identities of the calculi, evaluated on random
//! commuting tuples.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::calculus::{
    a_abar, a_abar_inv, calculus_bounded_with, calculus_unbounded_with, transform_operator, CalculusKind, ContourParams, Mode,
};
use super::resolvent::Resolvents;
use crate::error::{Error, Result};
use crate::qlinalg::random::{random_commuting_tuple, TupleOptions};
use crate::qlinalg::{CommutingTuple, QOperator};
use crate::quaternion::Quaternion;
use crate::slice::{FunctionSide, Side, SliceFunction};

/// Threshold for identities between resolvents.
pub const ALGEBRAIC_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IdentityName {
    Sunbou,
    #[serde(rename = "PROTQAQT_1")]
    Protqaqt1,
    #[serde(rename = "PROTQAQT_2")]
    Protqaqt2,
    Newfap,
    Reqaqt,
    #[serde(rename = "P2_TRANSFORM")]
    P2Transform,
    Frel,
    SresolventEq,
    ProductDBounded,
    ProductDUnbounded,
    ProductDbar,
    AlphaIndep,
    JIndep,
    ContourIndep,
    ConstInvarianceQ,
    #[serde(rename = "CONST_INVARIANCE_P2")]
    ConstInvarianceP2,
    TransformVsIntegralS,
    TransformVsIntegralQ,
    TransformVsIntegralF,
    #[serde(rename = "TRANSFORM_VS_INTEGRAL_P2")]
    TransformVsIntegralP2,
}

impl IdentityName {
    pub const ALL: [Self; 20] = [
        Self::Sunbou,
        Self::Protqaqt1,
        Self::Protqaqt2,
        Self::Newfap,
        Self::Reqaqt,
        Self::P2Transform,
        Self::Frel,
        Self::SresolventEq,
        Self::ProductDBounded,
        Self::ProductDUnbounded,
        Self::ProductDbar,
        Self::AlphaIndep,
        Self::JIndep,
        Self::ContourIndep,
        Self::ConstInvarianceQ,
        Self::ConstInvarianceP2,
        Self::TransformVsIntegralS,
        Self::TransformVsIntegralQ,
        Self::TransformVsIntegralF,
        Self::TransformVsIntegralP2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sunbou => "SUNBOU",
            Self::Protqaqt1 => "PROTQAQT_1",
            Self::Protqaqt2 => "PROTQAQT_2",
            Self::Newfap => "NEWFAP",
            Self::Reqaqt => "REQAQT",
            Self::P2Transform => "P2_TRANSFORM",
            Self::Frel => "FREL",
            Self::SresolventEq => "SRESOLVENT_EQ",
            Self::ProductDBounded => "PRODUCT_D_BOUNDED",
            Self::ProductDUnbounded => "PRODUCT_D_UNBOUNDED",
            Self::ProductDbar => "PRODUCT_DBAR",
            Self::AlphaIndep => "ALPHA_INDEP",
            Self::JIndep => "J_INDEP",
            Self::ContourIndep => "CONTOUR_INDEP",
            Self::ConstInvarianceQ => "CONST_INVARIANCE_Q",
            Self::ConstInvarianceP2 => "CONST_INVARIANCE_P2",
            Self::TransformVsIntegralS => "TRANSFORM_VS_INTEGRAL_S",
            Self::TransformVsIntegralQ => "TRANSFORM_VS_INTEGRAL_Q",
            Self::TransformVsIntegralF => "TRANSFORM_VS_INTEGRAL_F",
            Self::TransformVsIntegralP2 => "TRANSFORM_VS_INTEGRAL_P2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.as_str().eq_ignore_ascii_case(s))
    }

    /// Identities between resolvent operators at sample points, with no
    /// quadrature involved.
    pub fn is_algebraic(self) -> bool {
        matches!(
            self,
            Self::Sunbou
                | Self::Protqaqt1
                | Self::Protqaqt2
                | Self::Newfap
                | Self::Reqaqt
                | Self::P2Transform
                | Self::Frel
                | Self::SresolventEq
        )
    }

    /// Pass threshold: [`ALGEBRAIC_THRESHOLD`] for resolvent identities and
    /// ten times the quadrature tolerance for identities between integrals.
    pub fn threshold(self, rtol: f64) -> f64 {
        if self.is_algebraic() {
            ALGEBRAIC_THRESHOLD
        } else {
            10.0 * rtol
        }
    }
}

/// Everything one random trial needs.
#[derive(Clone, Debug)]
pub struct TrialContext {
    pub tuple: CommutingTuple,
    pub alpha: f64,
    /// A second admissible real point for α-independence.
    pub alpha2: f64,
    /// Real pole of the rational test functions.
    pub gamma: f64,
    pub samples: Vec<Quaternion>,
    /// Intrinsic polynomials of degree at most 3.
    pub f: SliceFunction,
    pub g: SliceFunction,
    /// Constant for the constant-shift invariance.
    pub c: Quaternion,
    pub j_random: Quaternion,
    pub params: ContourParams,
    /// Real `4n × 3` probe vectors for relative residuals.
    pub probes: DMatrix<f64>,
}

pub fn random_unit_imaginary<R: Rng + ?Sized>(rng: &mut R) -> Quaternion {
    loop {
        let v = Quaternion::new(0.0, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_poly<R: Rng + ?Sized>(rng: &mut R) -> SliceFunction {
    let deg = rng.random_range(1..=3);
    let mut c: Vec<f64> = (0..=deg).map(|_| rng.random_range(-1.0..1.0)).collect();
    // keep the leading coefficient away from zero
    c[deg] = if c[deg] < 0.0 { c[deg] - 0.5 } else { c[deg] + 0.5 };
    SliceFunction::real_poly(&c)
}

/// Real point in `±[lo, hi]` with the given sign.
fn signed<R: Rng + ?Sized>(rng: &mut R, sign: f64, lo: f64, hi: f64) -> f64 {
    sign * rng.random_range(lo..hi)
}

impl TrialContext {
    /// Draws a tuple with joint eigenvalue components in `[-1, 1]`, so the
    /// spectrum lies in `|z| ≤ 2`; α and γ lie on opposite sides beyond it.
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, n: usize, n_samples: usize, params: ContourParams) -> Result<Self> {
        let draw = random_commuting_tuple(rng, n, &TupleOptions::default());
        let spec = draw.spectrum_oracle();
        let tuple = draw.tuple;
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let alpha = signed(rng, sign, 2.6, 3.2);
        let alpha2 = signed(rng, sign, 3.6, 4.4);
        let gamma = signed(rng, -sign, 2.6, 3.4);
        let radius = 1.5 * spec.radius().max(0.1);
        let mut samples = Vec::with_capacity(n_samples);
        while samples.len() < n_samples {
            let theta = rng.random_range(0.0..TAU);
            let j = random_unit_imaginary(rng);
            let s = Quaternion::from_slice(radius * theta.cos(), radius * theta.sin(), j);
            if spec.distance(s) > 1e-2 && s.dist(Quaternion::real(alpha)) > 0.1 {
                samples.push(s);
            }
        }
        let f = random_poly(rng);
        let g = random_poly(rng);
        let c = Quaternion::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let j_random = random_unit_imaginary(rng);
        let probes = DMatrix::from_fn(4 * n, 3, |_, _| rng.random_range(-1.0..1.0));
        Ok(Self { tuple, alpha, alpha2, gamma, samples, f, g, c, j_random, params, probes })
    }

    /// `(s − γ)⁻¹`.
    pub fn simple_pole(&self) -> SliceFunction {
        SliceFunction::rational(&[Quaternion::ONE], &[self.gamma], FunctionSide::Intrinsic).expect("real coefficients")
    }

    /// `(s − γ)⁻²`.
    pub fn double_pole(&self) -> SliceFunction {
        SliceFunction::rational(&[Quaternion::ONE], &[self.gamma, self.gamma], FunctionSide::Intrinsic).expect("real coefficients")
    }

    /// `(s − α)² (s − γ)⁻²`, which vanishes to second order at α.
    pub fn gated(&self) -> SliceFunction {
        let a = self.alpha;
        SliceFunction::rational(&[(a * a).into(), (-2.0 * a).into(), 1.0.into()], &[self.gamma, self.gamma], FunctionSide::Intrinsic)
            .expect("real coefficients")
    }

    /// Test functions meeting the gate of `kind` for unbounded operators.
    pub fn unbounded_test_functions(&self, kind: CalculusKind) -> Vec<(&'static str, SliceFunction)> {
        match kind {
            CalculusKind::S | CalculusKind::Q => vec![
                ("(s-γ)^-1", self.simple_pole()),
                ("(s-α)^2(s-γ)^-2", self.gated()),
                ("(s-γ)^-2", self.double_pole()),
            ],
            CalculusKind::F | CalculusKind::P2 => vec![("(s-α)^2(s-γ)^-2", self.gated())],
        }
    }
}

/// `‖(L − R)V‖ / max(‖LV‖, ‖RV‖)` for the probe block `V`.
pub fn relative_residual(l: &QOperator, r: &QOperator, probes: &DMatrix<f64>) -> f64 {
    let lv = l.matrix() * probes;
    let rv = r.matrix() * probes;
    let scale = lv.norm().max(rv.norm());
    if scale == 0.0 {
        0.0
    } else {
        (lv - rv).norm() / scale
    }
}

/// `‖(L − R)V‖ / max(‖V‖, ‖RV‖)`: relative to `R`, but never below the size
/// of the identity. Used where both sides may vanish.
pub fn floor_residual(l: &QOperator, r: &QOperator, probes: &DMatrix<f64>) -> f64 {
    let rv = r.matrix() * probes;
    let scale = probes.norm().max(rv.norm());
    (l.matrix() * probes - rv).norm() / scale
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Outcome {
    pub residual: f64,
    pub nodes_used: usize,
    pub samples: usize,
}

impl Outcome {
    fn merge(&mut self, residual: f64, nodes: usize) {
        self.residual = self.residual.max(residual);
        self.nodes_used += nodes;
        self.samples += 1;
    }
}

/// Shared operators for one trial.
struct Setup<'a> {
    ctx: &'a TrialContext,
    res: Resolvents,
    res_a: Resolvents,
    a: CommutingTuple,
}

impl<'a> Setup<'a> {
    fn new(ctx: &'a TrialContext) -> Result<Self> {
        let res = Resolvents::new(&ctx.tuple)?;
        let a = transform_operator(&ctx.tuple, ctx.alpha)?;
        let res_a = Resolvents::new(&a)?;
        Ok(Self { ctx, res, res_a, a })
    }

    fn n(&self) -> usize {
        self.ctx.tuple.n()
    }

    fn scalar(&self, q: Quaternion) -> QOperator {
        QOperator::scalar(self.n(), q)
    }

    fn rel(&self, l: &QOperator, r: &QOperator) -> f64 {
        relative_residual(l, r, &self.ctx.probes)
    }

    fn bounded(&self, kind: CalculusKind, f: &SliceFunction, params: &ContourParams, out: &mut Outcome) -> Result<QOperator> {
        let r = calculus_bounded_with(kind, Side::Left, f, &self.res, params)?;
        out.nodes_used += r.nodes_used;
        Ok(r.op)
    }

    fn unbounded(&self, kind: CalculusKind, f: &SliceFunction, alpha: f64, mode: Mode, out: &mut Outcome) -> Result<QOperator> {
        let r = calculus_unbounded_with(kind, Side::Left, f, &self.res, alpha, mode, &self.ctx.params)?;
        out.nodes_used += r.nodes_used;
        Ok(r.op)
    }
}

/// Residual of the identity `name` on the trial `ctx`.
pub fn verify_identity(name: IdentityName, ctx: &TrialContext) -> Result<Outcome> {
    let st = Setup::new(ctx)?;
    let mut out = Outcome::default();
    if name.is_algebraic() {
        for (k, &s) in ctx.samples.iter().enumerate() {
            let r = algebraic_residual(name, &st, s, ctx.samples[(k + 1) % ctx.samples.len()])?;
            out.merge(r, 0);
        }
        return Ok(out);
    }
    let params = &ctx.params;
    match name {
        IdentityName::ProductDBounded | IdentityName::ProductDbar => {
            let (f, g) = (&ctx.f, &ctx.g);
            let fg = f.mul(g)?;
            let b = |k, h: &SliceFunction, o: &mut Outcome| st.bounded(k, h, params, o);
            let sf = b(CalculusKind::S, f, &mut out)?;
            let sg = b(CalculusKind::S, g, &mut out)?;
            let qf = b(CalculusKind::Q, f, &mut out)?;
            let qg = b(CalculusKind::Q, g, &mut out)?;
            let t_imag = ctx.tuple.imag().realify();
            let cross = qf.compose(&t_imag).compose(&qg);
            let (lhs, rhs) = if name == IdentityName::ProductDBounded {
                let lhs = b(CalculusKind::Q, &fg, &mut out)?;
                (lhs, sf.compose(&qg).add(&qf.compose(&sg)).add(&cross))
            } else {
                let lhs = b(CalculusKind::P2, &fg, &mut out)?;
                let pf = b(CalculusKind::P2, f, &mut out)?;
                let pg = b(CalculusKind::P2, g, &mut out)?;
                (lhs, sf.compose(&pg).add(&pf.compose(&sg)).sub(&cross))
            };
            out.merge(st.rel(&lhs, &rhs), 0);
        }
        IdentityName::ProductDUnbounded => {
            let (f, g) = (&ctx.f, &ctx.g);
            let fg = f.mul(g)?;
            let u = |k, h: &SliceFunction, o: &mut Outcome| st.unbounded(k, h, ctx.alpha, Mode::UnboundedTransform, o);
            let lhs = u(CalculusKind::Q, &fg, &mut out)?;
            let sf = u(CalculusKind::S, f, &mut out)?;
            let sg = u(CalculusKind::S, g, &mut out)?;
            let qf = u(CalculusKind::Q, f, &mut out)?;
            let qg = u(CalculusKind::Q, g, &mut out)?;
            let a_imag = st.a.imag().realify();
            let cross = a_abar_inv(&ctx.tuple, ctx.alpha).compose(&qf).compose(&a_imag).compose(&qg);
            let rhs = sf.compose(&qg).add(&qf.compose(&sg)).add(&cross);
            out.merge(st.rel(&lhs, &rhs), 0);
        }
        IdentityName::AlphaIndep => {
            let f = ctx.simple_pole();
            let a1 = st.unbounded(CalculusKind::Q, &f, ctx.alpha, Mode::UnboundedTransform, &mut out)?;
            let a2 = st.unbounded(CalculusKind::Q, &f, ctx.alpha2, Mode::UnboundedTransform, &mut out)?;
            out.merge(st.rel(&a1, &a2), 0);
        }
        IdentityName::JIndep | IdentityName::ContourIndep => {
            let other = if name == IdentityName::JIndep {
                ContourParams { j: ctx.j_random, ..*params }
            } else {
                ContourParams { margin: 2.0 * params.margin, ..*params }
            };
            for f in [&ctx.f, &ctx.simple_pole()] {
                for kind in CalculusKind::ALL {
                    let base = st.bounded(kind, f, params, &mut out)?;
                    let alt = st.bounded(kind, f, &other, &mut out)?;
                    // F of a polynomial of degree ≤ 1 vanishes, so compare against the identity's scale
                    out.merge(floor_residual(&alt, &base, &ctx.probes), 0);
                }
            }
        }
        IdentityName::ConstInvarianceQ | IdentityName::ConstInvarianceP2 => {
            let kind = if name == IdentityName::ConstInvarianceQ { CalculusKind::Q } else { CalculusKind::P2 };
            let shifted = ctx.f.add_constant(ctx.c)?;
            let base = st.bounded(kind, &ctx.f, params, &mut out)?;
            let alt = st.bounded(kind, &shifted, params, &mut out)?;
            out.merge(floor_residual(&alt, &base, &ctx.probes), 0);
        }
        IdentityName::TransformVsIntegralS
        | IdentityName::TransformVsIntegralQ
        | IdentityName::TransformVsIntegralF
        | IdentityName::TransformVsIntegralP2 => {
            let kind = match name {
                IdentityName::TransformVsIntegralS => CalculusKind::S,
                IdentityName::TransformVsIntegralQ => CalculusKind::Q,
                IdentityName::TransformVsIntegralF => CalculusKind::F,
                _ => CalculusKind::P2,
            };
            for (_, f) in ctx.unbounded_test_functions(kind) {
                let tr = st.unbounded(kind, &f, ctx.alpha, Mode::UnboundedTransform, &mut out)?;
                let int = st.unbounded(kind, &f, ctx.alpha, Mode::UnboundedIntegral, &mut out)?;
                out.merge(st.rel(&tr, &int), 0);
            }
        }
        _ => unreachable!("algebraic identities handled above"),
    }
    Ok(out)
}

fn algebraic_residual(name: IdentityName, st: &Setup<'_>, s: Quaternion, q: Quaternion) -> Result<f64> {
    let ctx = st.ctx;
    let res = &st.res;
    let p = (s - Quaternion::real(ctx.alpha)).try_inv()?;
    let pinv = p.try_inv()?;
    let abar_inv = a_abar_inv(&ctx.tuple, ctx.alpha);
    Ok(match name {
        IdentityName::Sunbou => {
            let lhs = st.res_a.s(Side::Left, p)?;
            let rhs = st.scalar(pinv).sub(&res.s(Side::Left, s)?.scale_right(pinv * pinv));
            st.rel(&lhs, &rhs)
        }
        IdentityName::Protqaqt1 => {
            let lhs = st.res_a.pseudo(p)?;
            let rhs = abar_inv.compose(&res.pseudo(s)?).scale_right(pinv * pinv);
            st.rel(&lhs, &rhs)
        }
        IdentityName::Protqaqt2 => {
            let qa = st.res_a.pseudo(p)?;
            let qt = res.pseudo(s)?;
            let lhs = qa.compose(&qa);
            let rhs = abar_inv.compose(&abar_inv).compose(&qt).compose(&qt).scale_right(pinv.powi(4));
            st.rel(&lhs, &rhs)
        }
        IdentityName::Newfap => {
            let lhs = a_abar(&ctx.tuple, ctx.alpha)?.compose(&st.res_a.f(Side::Left, p)?).scale_right(p.powi(4));
            let rhs = res.pseudo(s)?.scale_left(p * -4.0).sub(&res.f(Side::Left, s)?);
            st.rel(&lhs, &rhs)
        }
        IdentityName::Reqaqt => {
            let lhs = st.a.realify().compose(&st.res_a.pseudo(p)?).scale_right(p.powi(3));
            let rhs = res.pseudo(s)?.sub(&res.s(Side::Left, s)?.scale_right(p));
            st.rel(&lhs, &rhs)
        }
        IdentityName::P2Transform => {
            let lhs = st.res_a.p2(Side::Left, p)?.scale_right(p.powi(4));
            let qinv_p = res.pseudo(s)?.scale_right(p);
            let n = st.n();
            let s_minus_tbar = QOperator::scalar(n, s).sub(res.t_bar());
            let t0_minus_s = res.t0().sub(&QOperator::scalar(n, s));
            let rhs = res
                .p2(Side::Left, s)?
                .sub(&s_minus_tbar.compose(&qinv_p).scale(4.0))
                .add(&t0_minus_s.compose(&qinv_p).scale(4.0))
                .add(&st.scalar(p * p * 4.0));
            st.rel(&lhs, &rhs)
        }
        IdentityName::Frel => {
            let fl = res.f(Side::Left, s)?;
            let lhs = res.pseudo(s)?;
            let rhs = res.t().compose(&fl).sub(&fl.scale_right(s)).scale(0.25);
            st.rel(&lhs, &rhs)
        }
        IdentityName::SresolventEq => {
            if (s.w - q.w).hypot(s.imag_norm() - q.imag_norm()) < 1e-3 {
                return Err(Error::PreconditionViolated("s ∉ [q] required".into()));
            }
            let sr = res.s(Side::Right, s)?;
            let sl = res.s(Side::Left, q)?;
            let lhs = sr.compose(&sl);
            let d = sr.sub(&sl);
            let k = (q * q - q * (2.0 * s.w) + Quaternion::real(s.norm_sqr())).try_inv()?;
            let rhs = d.scale_right(q).sub(&d.scale_left(s.conj())).scale_right(k);
            st.rel(&lhs, &rhs)
        }
        _ => unreachable!("integral identity"),
    })
}

/// Largest relative gap between the bounded and split forms of the right
/// S-resolvent over the samples of `ctx`.
pub fn split_form_divergence(ctx: &TrialContext) -> Result<f64> {
    let res = Resolvents::new(&ctx.tuple)?;
    let mut worst: f64 = 0.0;
    for &s in &ctx.samples {
        let a = res.s(Side::Right, s)?;
        let b = res.s_right_split(s)?;
        worst = worst.max(relative_residual(&b, &a, &ctx.probes));
    }
    Ok(worst)
}
