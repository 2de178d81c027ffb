//! Real quaternions, slice coordinates and the 4×4 real embeddings.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm floor below which [`Quaternion::try_inv`] reports a zero division.
pub const INV_FLOOR: f64 = 1e-300;

/// `w + x e1 + y e2 + z e3`, serialized as `[w, x, y, z]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<[f64; 4]> for Quaternion {
    fn from(c: [f64; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.to_array()
    }
}

impl From<f64> for Quaternion {
    fn from(r: f64) -> Self {
        Self::real(r)
    }
}

impl Quaternion {
    pub const ZERO: Self = Self::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Self = Self::new(1.0, 0.0, 0.0, 0.0);
    pub const E1: Self = Self::new(0.0, 1.0, 0.0, 0.0);
    pub const E2: Self = Self::new(0.0, 0.0, 1.0, 0.0);
    pub const E3: Self = Self::new(0.0, 0.0, 0.0, 1.0);
    /// `[1, e1, e2, e3]`, indexed like the tuple components.
    pub const BASIS: [Self; 4] = [Self::ONE, Self::E1, Self::E2, Self::E3];

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub const fn real(r: f64) -> Self {
        Self::new(r, 0.0, 0.0, 0.0)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Component `k` with `0 => w`, `1 => x`, and so on.
    pub fn component(self, k: usize) -> f64 {
        self.to_array()[k]
    }

    /// The vector part `q̲`.
    pub fn imag(self) -> Self {
        Self::new(0.0, self.x, self.y, self.z)
    }

    pub fn conj(self) -> Self {
        Self::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        // hypot chain avoids overflow for large components
        self.w.hypot(self.x).hypot(self.y.hypot(self.z))
    }

    pub fn imag_norm(self) -> f64 {
        self.x.hypot(self.y).hypot(self.z)
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    pub fn try_inv(self) -> Result<Self> {
        let n = self.norm();
        if !(n > INV_FLOOR) {
            return Err(Error::ZeroDivision);
        }
        // scale first so |q|² cannot underflow
        let c = self.conj() * (1.0 / n);
        Ok(c * (1.0 / n))
    }

    /// Inverse; panics on a zero argument. Use [`Self::try_inv`] on untrusted input.
    pub fn inv(self) -> Self {
        self.try_inv().expect("inverse of zero quaternion")
    }

    pub fn scale(self, r: f64) -> Self {
        Self::new(self.w * r, self.x * r, self.y * r, self.z * r)
    }

    pub fn powi(self, k: u32) -> Self {
        (0..k).fold(Self::ONE, |acc, _| acc * self)
    }

    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// `u + J v` for a unit imaginary `j`.
    pub fn from_slice(u: f64, v: f64, j: Self) -> Self {
        Self::real(u) + j * v
    }

    /// Image of the complex number `z` in the slice `ℂ_J`.
    pub fn from_complex(z: Complex64, j: Self) -> Self {
        Self::from_slice(z.re, z.im, j)
    }

    pub fn slice_decompose(self) -> SliceCoords {
        let v = self.imag_norm();
        let j = if v > 0.0 {
            let j = self.imag() * (1.0 / v);
            j * (1.0 / j.norm())
        } else {
            Self::E1
        };
        SliceCoords { u: self.w, v, j }
    }

    /// Matrix of `v ↦ q v` on `ℝ⁴ ≅ ℍ`.
    pub fn embed_left(self) -> Matrix4<f64> {
        let Self { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, -z, y, //
            y, z, w, -x, //
            z, -y, x, w,
        )
    }

    /// Matrix of `v ↦ v q` on `ℝ⁴ ≅ ℍ`.
    pub fn embed_right(self) -> Matrix4<f64> {
        let Self { w, x, y, z } = self;
        Matrix4::new(
            w, -x, -y, -z, //
            x, w, z, -y, //
            y, -z, w, x, //
            z, y, -x, w,
        )
    }
}

/// `u + J v` with `v ≥ 0`; real points get `J = e1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceCoords {
    pub u: f64,
    pub v: f64,
    pub j: Quaternion,
}

impl SliceCoords {
    pub fn reconstruct(self) -> Quaternion {
        Quaternion::from_slice(self.u, self.v, self.j)
    }

    pub fn complex(self) -> Complex64 {
        Complex64::new(self.u, self.v)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.w, self.x, self.y, self.z)
    }
}

impl Add for Quaternion {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl Neg for Quaternion {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let a = self;
        Self::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Self;
    fn mul(self, r: f64) -> Self {
        self.scale(r)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Div<f64> for Quaternion {
    type Output = Self;
    fn div(self, r: f64) -> Self {
        self.scale(1.0 / r)
    }
}
