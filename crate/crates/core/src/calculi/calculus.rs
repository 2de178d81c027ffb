use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::resolvent::Resolvents;
use crate::contour::{auto_contour, enclose_spectrum, integrate, Domain, QuadratureOptions, SliceContour};
use crate::error::{Error, Result};
use crate::qlinalg::{CommutingTuple, QOperator};
use crate::quaternion::Quaternion;
use crate::slice::{Side, SliceFunction};

/// Distance from `α` to the S-spectrum required by the unbounded calculi.
pub const ALPHA_GUARD: f64 = 1e-6;
/// Gate `|f(α)| ≤ F_ALPHA_GATE` of the F- and P2-calculi for unbounded operators.
pub const F_ALPHA_GATE: f64 = 1e-10;
/// Gate `|∂_α f(α)| ≤ DF_ALPHA_GATE` of the unbounded P2-calculus.
pub const DF_ALPHA_GATE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CalculusKind {
    S,
    Q,
    F,
    P2,
}

impl CalculusKind {
    pub const ALL: [Self; 4] = [Self::S, Self::Q, Self::F, Self::P2];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::S => "S",
            Self::Q => "Q",
            Self::F => "F",
            Self::P2 => "P2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Bounded,
    UnboundedTransform,
    UnboundedIntegral,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourParams {
    pub j: Quaternion,
    pub margin: f64,
    pub quad: QuadratureOptions,
}

impl Default for ContourParams {
    fn default() -> Self {
        Self { j: Quaternion::E1, margin: 0.5, quad: QuadratureOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct CalculusOutput {
    pub op: QOperator,
    /// Contour of the last integral evaluated; for transform modes it lies in
    /// the plane of `A = (T − α)⁻¹`.
    pub contour: SliceContour,
    pub nodes_used: usize,
    pub gaps: Vec<Vec<f64>>,
}

fn check_side(f: &SliceFunction, side: Side) -> Result<()> {
    if !f.supports(side) {
        return Err(Error::PreconditionViolated(format!(
            "f is not {} slice hyperholomorphic",
            if side == Side::Left { "left" } else { "right" }
        )));
    }
    Ok(())
}

/// The contour integral of `kind` over a given contour, without the `f(∞)`
/// term of the unbounded S-calculus.
pub fn calculus_on_contour(
    kind: CalculusKind,
    side: Side,
    f: &SliceFunction,
    res: &Resolvents,
    contour: &SliceContour,
    quad: &QuadratureOptions,
) -> Result<CalculusOutput> {
    check_side(f, side)?;
    let kernel = |s: Quaternion| -> Result<QOperator> {
        match kind {
            CalculusKind::S => res.s(side, s),
            // −1/π = (1/2π)·(−2)
            CalculusKind::Q => Ok(res.pseudo(s)?.scale(-2.0)),
            CalculusKind::F => res.f(side, s),
            CalculusKind::P2 => res.p2(side, s),
        }
    };
    let out = if contour.circles.is_empty() {
        crate::contour::Integral { value: QOperator::zeros(res.n()), nodes_used: 0, gaps: vec![] }
    } else {
        integrate(kernel, f, contour, side, quad)?
    };
    Ok(CalculusOutput { op: out.value, contour: contour.clone(), nodes_used: out.nodes_used, gaps: out.gaps })
}

/// Bounded calculus on an automatically chosen contour around `σ_S(T)`.
pub fn calculus_bounded(
    kind: CalculusKind,
    side: Side,
    f: &SliceFunction,
    t: &CommutingTuple,
    params: &ContourParams,
) -> Result<CalculusOutput> {
    calculus_bounded_with(kind, side, f, &Resolvents::new(t)?, params)
}

pub fn calculus_bounded_with(
    kind: CalculusKind,
    side: Side,
    f: &SliceFunction,
    res: &Resolvents,
    params: &ContourParams,
) -> Result<CalculusOutput> {
    check_side(f, side)?;
    let contour = auto_contour(res.spectrum(), params.margin, &f.poles(), params.j)?;
    calculus_on_contour(kind, side, f, res, &contour, &params.quad)
}

/// `A = (T − α)⁻¹` as a commuting tuple.
pub fn transform_operator(t: &CommutingTuple, alpha: f64) -> Result<CommutingTuple> {
    let res = Resolvents::new(t)?;
    transform_with(&res, alpha)
}

fn check_alpha(res: &Resolvents, alpha: f64) -> Result<()> {
    if !alpha.is_finite() || res.spectrum().distance(Quaternion::real(alpha)) <= ALPHA_GUARD {
        return Err(Error::SpectrumHit(format!("alpha = {alpha}")));
    }
    Ok(())
}

fn transform_with(res: &Resolvents, alpha: f64) -> Result<CommutingTuple> {
    check_alpha(res, alpha)?;
    let t = res.tuple();
    let n = t.n();
    let shifted = res.t().sub(&QOperator::scalar(n, Quaternion::real(alpha)));
    let inv = shifted.inverse()?;
    let comps = inv.components();
    // commutation of A's components inherits T's tolerance, scaled by |A|²
    let scale = comps.iter().map(|c| c.norm()).fold(1.0, f64::max);
    CommutingTuple::with_tol(comps, t.commutation_tol() * scale.max(1.0) * 10.0)
}

/// `A Ā = (α² − 2 α T0 + T T̄)⁻¹`, a real operator.
pub fn a_abar(t: &CommutingTuple, alpha: f64) -> Result<QOperator> {
    let m = a_abar_inv_matrix(t, alpha);
    QOperator::real(&m).inverse()
}

/// `(A Ā)⁻¹ = α² − 2 α T0 + T T̄`.
pub fn a_abar_inv(t: &CommutingTuple, alpha: f64) -> QOperator {
    QOperator::real(&a_abar_inv_matrix(t, alpha))
}

fn a_abar_inv_matrix(t: &CommutingTuple, alpha: f64) -> DMatrix<f64> {
    let n = t.n();
    t.norm_sqr_matrix() - t.component(0) * (2.0 * alpha) + DMatrix::identity(n, n) * (alpha * alpha)
}

fn gate(kind: CalculusKind, f: &SliceFunction, alpha: f64) -> Result<()> {
    if matches!(kind, CalculusKind::F | CalculusKind::P2) {
        let v = f.evaluate(Quaternion::real(alpha)).map(|v| v.norm()).unwrap_or(f64::INFINITY);
        if !(v <= F_ALPHA_GATE) {
            return Err(Error::PreconditionViolated(format!("f(α)=0 required, |f(α)| = {v:.3e}")));
        }
    }
    if kind == CalculusKind::P2 {
        let d = f.derivative_at_real(alpha).map(|v| v.norm()).unwrap_or(f64::INFINITY);
        if !(d <= DF_ALPHA_GATE) {
            return Err(Error::PreconditionViolated(format!("∂_α f(α)=0 required, |∂_α f(α)| = {d:.3e}")));
        }
    }
    Ok(())
}

/// `q² φ(q)` with the intrinsic factor on the side that keeps `φ`'s class.
fn times_q_squared(phi: &SliceFunction, side: Side) -> Result<SliceFunction> {
    let q2 = SliceFunction::real_poly(&[0.0, 0.0, 1.0]);
    match side {
        Side::Left => q2.mul(phi),
        Side::Right => phi.mul(&q2),
    }
}

/// The calculi for the (formally unbounded) operator `T` with real
/// `α ∈ ρ_S(T)`, either through `A = (T − α)⁻¹` or as an integral over the
/// boundary of an unbounded slice Cauchy domain.
pub fn calculus_unbounded(
    kind: CalculusKind,
    side: Side,
    f: &SliceFunction,
    t: &CommutingTuple,
    alpha: f64,
    mode: Mode,
    params: &ContourParams,
) -> Result<CalculusOutput> {
    let res = Resolvents::new(t)?;
    calculus_unbounded_with(kind, side, f, &res, alpha, mode, params)
}

pub fn calculus_unbounded_with(
    kind: CalculusKind,
    side: Side,
    f: &SliceFunction,
    res: &Resolvents,
    alpha: f64,
    mode: Mode,
    params: &ContourParams,
) -> Result<CalculusOutput> {
    check_side(f, side)?;
    check_alpha(res, alpha)?;
    gate(kind, f, alpha)?;
    match mode {
        Mode::Bounded => Err(Error::Invalid("bounded mode takes no α; use calculus_bounded".into())),
        Mode::UnboundedTransform => {
            let a = transform_with(res, alpha)?;
            let res_a = Resolvents::new(&a)?;
            let phi = f.compose_phi_alpha_inv(alpha);
            let g = match kind {
                CalculusKind::S | CalculusKind::Q => phi,
                CalculusKind::F | CalculusKind::P2 => times_q_squared(&phi, side)?,
            };
            let mut out = calculus_bounded_with(kind, side, &g, &res_a, params)?;
            if matches!(kind, CalculusKind::Q | CalculusKind::F) {
                out.op = a_abar(res.tuple(), alpha)?.compose(&out.op);
            }
            Ok(out)
        }
        Mode::UnboundedIntegral => {
            let f_inf = f.value_at_infinity().ok_or(Error::MissingValueAtInfinity)?;
            let mut avoid = f.poles();
            avoid.push(alpha);
            let contour = enclose_spectrum(res.spectrum(), params.margin, &avoid, Domain::Unbounded, params.j)?;
            let mut out = calculus_on_contour(kind, side, f, res, &contour, &params.quad)?;
            if kind == CalculusKind::S {
                out.op.add_assign(&QOperator::scalar(res.n(), f_inf));
            }
            Ok(out)
        }
    }
}

/// A fully specified calculus evaluation.
#[derive(Clone, Debug)]
pub struct CalculusRequest {
    pub kind: CalculusKind,
    pub mode: Mode,
    pub side: Side,
    pub f: SliceFunction,
    pub t: CommutingTuple,
    pub alpha: Option<f64>,
    pub params: ContourParams,
}

impl CalculusRequest {
    pub fn run(&self) -> Result<CalculusOutput> {
        match self.mode {
            Mode::Bounded => calculus_bounded(self.kind, self.side, &self.f, &self.t, &self.params),
            mode => {
                let alpha = self
                    .alpha
                    .ok_or_else(|| Error::PreconditionViolated("α ∈ ρ_S(T) ∩ ℝ must be given for unbounded modes".into()))?;
                calculus_unbounded(self.kind, self.side, &self.f, &self.t, alpha, mode, &self.params)
            }
        }
    }
}
