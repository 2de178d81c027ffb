//! Closed-form Cauchy kernels in the second (commutative) form.

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Distance from `s` to the sphere `[q]` below which kernels refuse.
pub const SPHERE_GUARD: f64 = 1e-10;

/// `Q_{c,s}(q) = s² − 2 q0 s + |q|²`, an element of the slice of `s`.
pub fn q_cs(s: Quaternion, q: Quaternion) -> Quaternion {
    s * s - s * (2.0 * q.w) + Quaternion::real(q.norm_sqr())
}

fn q_cs_inv(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    let gap = (s.w - q.w).hypot(s.imag_norm() - q.imag_norm());
    if gap <= SPHERE_GUARD {
        return Err(Error::SphereCollision);
    }
    q_cs(s, q).try_inv().map_err(|_| Error::SphereCollision)
}

/// `S_L⁻¹(s, q) = (s − q̄) Q_{c,s}(q)⁻¹`.
pub fn kernel_sl(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    Ok((s - q.conj()) * q_cs_inv(s, q)?)
}

/// `S_R⁻¹(s, q) = Q_{c,s}(q)⁻¹ (s − q̄)`.
pub fn kernel_sr(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    Ok(q_cs_inv(s, q)? * (s - q.conj()))
}

/// `F_L(s, q) = −4 (s − q̄) Q_{c,s}(q)⁻²`.
pub fn kernel_fl(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    let inv = q_cs_inv(s, q)?;
    Ok((s - q.conj()) * inv * inv * -4.0)
}

/// `F_R(s, q) = −4 Q_{c,s}(q)⁻² (s − q̄)`.
pub fn kernel_fr(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    let inv = q_cs_inv(s, q)?;
    Ok(inv * inv * (s - q.conj()) * -4.0)
}

/// `D S_L⁻¹(s, q) = −2 Q_{c,s}(q)⁻¹`, with `D` acting in `q`.
pub fn kernel_dsl(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    Ok(q_cs_inv(s, q)? * -2.0)
}

/// `S_R⁻¹(s, q) D = −2 Q_{c,s}(q)⁻¹`.
pub fn kernel_dsr(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    kernel_dsl(s, q)
}

/// `D̄ S_L⁻¹(s, q) = −F_L(s, q) s + q0 F_L(s, q)`.
pub fn kernel_dbar_sl(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    let f = kernel_fl(s, q)?;
    Ok(f * q.w - f * s)
}

/// `S_R⁻¹(s, q) D̄ = −s F_R(s, q) + q0 F_R(s, q)`.
pub fn kernel_dbar_sr(s: Quaternion, q: Quaternion) -> Result<Quaternion> {
    let f = kernel_fr(s, q)?;
    Ok(f * q.w - s * f)
}
