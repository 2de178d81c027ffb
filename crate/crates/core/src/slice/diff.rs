//! Cauchy-Fueter operators by central differences with one Richardson step.

use super::function::{FunctionSide, Side, SliceFunction};
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

pub const DEFAULT_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffOp {
    /// `∂0 + Σ e_i ∂_i`.
    D,
    /// `∂0 − Σ e_i ∂_i`.
    Dbar,
    /// `Σ ∂_k²`.
    Delta,
    /// `D ∘ D`.
    DSquared,
}

fn unit(k: usize) -> Quaternion {
    Quaternion::BASIS[k]
}

/// `∂_k f(q)` with Richardson extrapolation of the central difference.
pub fn partial<F: ?Sized>(f: &F, q: Quaternion, k: usize, h: f64) -> Result<Quaternion>
where
    F: Fn(Quaternion) -> Result<Quaternion>,
{
    let e = unit(k);
    let central = |h: f64| -> Result<Quaternion> { Ok((f(q + e * h)? - f(q - e * h)?) * (0.5 / h)) };
    let (coarse, fine) = (central(h)?, central(0.5 * h)?);
    Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
}

/// `∂_k² f(q)` with Richardson extrapolation of the three-point stencil.
pub fn second_partial<F: ?Sized>(f: &F, q: Quaternion, k: usize, h: f64, fq: Quaternion) -> Result<Quaternion>
where
    F: Fn(Quaternion) -> Result<Quaternion>,
{
    let e = unit(k);
    let stencil = |h: f64| -> Result<Quaternion> { Ok((f(q + e * h)? - fq * 2.0 + f(q - e * h)?) * (1.0 / (h * h))) };
    let (coarse, fine) = (stencil(h)?, stencil(0.5 * h)?);
    Ok((fine * 4.0 - coarse) * (1.0 / 3.0))
}

/// Applies `op` to an arbitrary function; imaginary units multiply partials
/// from the left for `Side::Left` and from the right for `Side::Right`.
pub fn apply_diff_fn(op: DiffOp, f: &dyn Fn(Quaternion) -> Result<Quaternion>, side: Side, q: Quaternion, h: f64) -> Result<Quaternion> {
    let first_order = |sign: f64| -> Result<Quaternion> {
        let mut acc = partial(f, q, 0, h)?;
        for i in 1..4 {
            let d = partial(f, q, i, h)?;
            acc += match side {
                Side::Left => unit(i) * d,
                Side::Right => d * unit(i),
            } * sign;
        }
        Ok(acc)
    };
    match op {
        DiffOp::D => first_order(1.0),
        DiffOp::Dbar => first_order(-1.0),
        DiffOp::Delta => {
            let fq = f(q)?;
            let mut acc = Quaternion::ZERO;
            for k in 0..4 {
                acc += second_partial(f, q, k, h, fq)?;
            }
            Ok(acc)
        }
        DiffOp::DSquared => {
            let inner = |p: Quaternion| apply_diff_fn(DiffOp::D, f, side, p, h);
            apply_diff_fn(DiffOp::D, &inner, side, q, h)
        }
    }
}

/// Applies `op` to a slice function, checking that the stencil stays clear
/// of its poles.
pub fn apply_diff(op: DiffOp, f: &SliceFunction, q: Quaternion, h: f64) -> Result<Quaternion> {
    // nested operators reach twice as far
    let reach = if op == DiffOp::DSquared { 4.0 * h } else { 2.0 * h };
    for p in f.poles() {
        let dist = q.dist(Quaternion::real(p));
        if dist <= reach {
            return Err(Error::PoleProximity { point: q.to_string(), pole: p, dist });
        }
    }
    let side = if f.side() == FunctionSide::Right { Side::Right } else { Side::Left };
    let eval = |p: Quaternion| f.evaluate(p);
    apply_diff_fn(op, &eval, side, q, h)
}

/// Pointwise values of `Δ(Df)`, `D²(D̄f)` and `D(Δf)`, all of which vanish
/// for an intrinsic slice function. The inner operator uses step `h`, the
/// outer one `10 h`, which keeps the amplified rounding error of the inner
/// differences near 1e-7.
pub fn fueter_diagrams(f: &SliceFunction, q: Quaternion, h: f64) -> Result<[Quaternion; 3]> {
    let outer = 10.0 * h;
    for p in f.poles() {
        let dist = q.dist(Quaternion::real(p));
        if dist <= 4.0 * outer + 2.0 * h {
            return Err(Error::PoleProximity { point: q.to_string(), pole: p, dist });
        }
    }
    let side = if f.side() == FunctionSide::Right { Side::Right } else { Side::Left };
    let eval = |p: Quaternion| f.evaluate(p);
    let inner = |op: DiffOp| move |p: Quaternion| apply_diff_fn(op, &eval, side, p, h);
    Ok([
        apply_diff_fn(DiffOp::Delta, &inner(DiffOp::D), side, q, outer)?,
        apply_diff_fn(DiffOp::DSquared, &inner(DiffOp::Dbar), side, q, outer)?,
        apply_diff_fn(DiffOp::D, &inner(DiffOp::Delta), side, q, outer)?,
    ])
}
