use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stem::Stem;
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Distance to a pole below which [`SliceFunction::evaluate`] refuses.
pub const POLE_GUARD: f64 = 1e-8;

/// Which side quaternion coefficients (and imaginary units in Fueter
/// operators) act on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Class of a slice function: left or right slice hyperholomorphic, or
/// intrinsic (both, with real stem components).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionSide {
    Left,
    Right,
    Intrinsic,
}

/// `Σ_k g_k ⊗ a_k` with intrinsic complex stems `g_k` and quaternion
/// coefficients `a_k`. On the slice `ℂ_J` this has holomorphic stem
/// `α + iβ` with `α = Σ Re g_k a_k` and `β = Σ Im g_k a_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphicStem {
    pub terms: Vec<(Stem, Quaternion)>,
}

impl HolomorphicStem {
    pub fn intrinsic(stem: Stem) -> Self {
        Self { terms: vec![(stem, Quaternion::ONE)] }
    }

    pub fn is_intrinsic(&self) -> bool {
        self.terms.iter().all(|(_, a)| a.imag_norm() == 0.0)
    }

    /// `(α(u, v), β(u, v))` at `z = u + iv`.
    pub fn eval(&self, z: Complex64) -> Result<(Quaternion, Quaternion)> {
        let mut alpha = Quaternion::ZERO;
        let mut beta = Quaternion::ZERO;
        for (g, a) in &self.terms {
            let w = g.eval(z)?;
            alpha += *a * w.re;
            beta += *a * w.im;
        }
        Ok((alpha, beta))
    }

    pub fn value_at_infinity(&self) -> Option<Quaternion> {
        self.terms.iter().try_fold(Quaternion::ZERO, |acc, (g, a)| Some(acc + *a * g.value_at_infinity()?))
    }

    pub fn singular_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.terms.iter().flat_map(|(g, _)| g.singular_points()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// A slice hyperholomorphic function given by its holomorphic stem.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceFunction {
    stem: HolomorphicStem,
    side: FunctionSide,
}

/// Sums `coeffs[k] · g_k` per quaternion component into at most four terms
/// with real stems built by `stem_of`.
fn componentwise(coeffs: &[Quaternion], stem_of: impl Fn(Vec<f64>) -> Stem) -> HolomorphicStem {
    let terms = (0..4)
        .filter_map(|c| {
            let real: Vec<f64> = coeffs.iter().map(|a| a.component(c)).collect();
            real.iter().any(|&x| x != 0.0).then(|| (stem_of(real), Quaternion::BASIS[c]))
        })
        .collect();
    HolomorphicStem { terms }
}

impl SliceFunction {
    pub fn new(stem: HolomorphicStem, side: FunctionSide) -> Result<Self> {
        if side == FunctionSide::Intrinsic && !stem.is_intrinsic() {
            return Err(Error::NotIntrinsic("quaternion coefficients on an intrinsic function".into()));
        }
        Ok(Self { stem, side })
    }

    pub fn intrinsic(stem: Stem) -> Self {
        Self { stem: HolomorphicStem::intrinsic(stem), side: FunctionSide::Intrinsic }
    }

    pub fn constant(c: Quaternion) -> Self {
        let side = if c.imag_norm() == 0.0 { FunctionSide::Intrinsic } else { FunctionSide::Left };
        Self { stem: componentwise(&[c], Stem::Poly), side }
    }

    /// `q ↦ q`.
    pub fn identity() -> Self {
        Self::intrinsic(Stem::identity())
    }

    /// `Σ q^k a_k` (left) or `Σ a_k q^k` (right) with real coefficients.
    pub fn real_poly(coeffs: &[f64]) -> Self {
        Self::intrinsic(Stem::Poly(coeffs.to_vec()))
    }

    /// `Σ q^k a_k` for a left function, `Σ a_k q^k` for a right one.
    pub fn poly(coeffs: &[Quaternion], side: FunctionSide) -> Result<Self> {
        Self::new(componentwise(coeffs, Stem::Poly), side)
    }

    /// `num(q) Π (q - r_j)⁻¹` with the numerator coefficients on `side`.
    pub fn rational(num: &[Quaternion], poles: &[f64], side: FunctionSide) -> Result<Self> {
        Self::new(componentwise(num, |n| Stem::Rational { num: n, poles: poles.to_vec() }), side)
    }

    /// `exp(rate q) a` (left) or `a exp(rate q)` (right).
    pub fn exp(rate: f64, a: Quaternion, side: FunctionSide) -> Result<Self> {
        Self::new(HolomorphicStem { terms: vec![(Stem::Exp { rate }, a)] }, side)
    }

    pub fn stem(&self) -> &HolomorphicStem {
        &self.stem
    }

    pub fn side(&self) -> FunctionSide {
        self.side
    }

    pub fn is_intrinsic(&self) -> bool {
        self.stem.is_intrinsic()
    }

    /// Whether the function may be used in a calculus of the given side.
    pub fn supports(&self, side: Side) -> bool {
        match self.side {
            FunctionSide::Intrinsic => true,
            FunctionSide::Left => side == Side::Left || self.is_intrinsic(),
            FunctionSide::Right => side == Side::Right || self.is_intrinsic(),
        }
    }

    fn reading_side(&self) -> Side {
        match self.side {
            FunctionSide::Right => Side::Right,
            _ => Side::Left,
        }
    }

    pub fn value_at_infinity(&self) -> Option<Quaternion> {
        self.stem.value_at_infinity()
    }

    /// Real points excluded from the domain.
    pub fn poles(&self) -> Vec<f64> {
        self.stem.singular_points()
    }

    /// `f(u + J v)` for the complex point `z = u + iv`; `v` may be negative.
    pub fn eval_slice(&self, z: Complex64, j: Quaternion) -> Result<Quaternion> {
        let (alpha, beta) = self.stem.eval(z)?;
        Ok(match self.reading_side() {
            Side::Left => alpha + j * beta,
            Side::Right => alpha + beta * j,
        })
    }

    pub fn evaluate(&self, q: Quaternion) -> Result<Quaternion> {
        for p in self.poles() {
            let dist = q.dist(Quaternion::real(p));
            if dist <= POLE_GUARD {
                return Err(Error::PoleProximity { point: q.to_string(), pole: p, dist });
            }
        }
        let s = q.slice_decompose();
        self.eval_slice(s.complex(), s.j)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let side = match (self.side, other.side) {
            (a, b) if a == b => a,
            (FunctionSide::Intrinsic, b) => b,
            (a, FunctionSide::Intrinsic) => a,
            _ => return Err(Error::Invalid("cannot add a left and a right slice function".into())),
        };
        let mut terms = self.stem.terms.clone();
        terms.extend(other.stem.terms.iter().cloned());
        Ok(Self { stem: HolomorphicStem { terms }, side })
    }

    /// `f + c` for a constant `c`.
    pub fn add_constant(&self, c: Quaternion) -> Result<Self> {
        let side = if c.imag_norm() == 0.0 {
            FunctionSide::Intrinsic
        } else if self.side == FunctionSide::Right {
            FunctionSide::Right
        } else {
            FunctionSide::Left
        };
        self.add(&Self { stem: componentwise(&[c], Stem::Poly), side })
    }

    /// `f a` for a left function or intrinsic `f`.
    pub fn mul_right(&self, a: Quaternion) -> Result<Self> {
        self.rescale(a, Side::Left)
    }

    /// `a f` for a right function or intrinsic `f`.
    pub fn mul_left(&self, a: Quaternion) -> Result<Self> {
        self.rescale(a, Side::Right)
    }

    fn rescale(&self, a: Quaternion, side: Side) -> Result<Self> {
        let real = a.imag_norm() == 0.0;
        let new_side = match (self.side, side) {
            (_, _) if real => self.side,
            (FunctionSide::Right, Side::Left) | (FunctionSide::Left, Side::Right) => {
                return Err(Error::Invalid("scalar on the wrong side of a one-sided slice function".into()))
            }
            (_, Side::Left) => FunctionSide::Left,
            (_, Side::Right) => FunctionSide::Right,
        };
        let terms = self
            .stem
            .terms
            .iter()
            .map(|(g, b)| (g.clone(), if side == Side::Left { *b * a } else { a * *b }))
            .collect();
        Ok(Self { stem: HolomorphicStem { terms }, side: new_side })
    }

    /// Pointwise product `self · other`, allowed when one factor is intrinsic
    /// (then the product is again slice hyperholomorphic).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        let side = match (self.is_intrinsic(), other.is_intrinsic()) {
            (true, true) => FunctionSide::Intrinsic,
            (true, false) if other.side == FunctionSide::Left => FunctionSide::Left,
            (false, true) if self.side == FunctionSide::Right => FunctionSide::Right,
            _ => {
                return Err(Error::NotIntrinsic(
                    "a product of slice functions needs an intrinsic factor on the matching side".into(),
                ))
            }
        };
        let mut terms = Vec::with_capacity(self.stem.terms.len() * other.stem.terms.len());
        for (g, a) in &self.stem.terms {
            for (h, b) in &other.stem.terms {
                terms.push((Stem::Product(vec![g.clone(), h.clone()]), *a * *b));
            }
        }
        Ok(Self { stem: HolomorphicStem { terms }, side })
    }

    /// `p ↦ f(p⁻¹ + α)`, with value `f(∞)` at `p = 0`.
    pub fn compose_phi_alpha_inv(&self, alpha: f64) -> Self {
        let terms = self
            .stem
            .terms
            .iter()
            .map(|(g, a)| (Stem::PhiInv { inner: Box::new(g.clone()), alpha }, *a))
            .collect();
        Self { stem: HolomorphicStem { terms }, side: self.side }
    }

    /// `∂_u α(u, 0)` at the real point `x`: the derivative along the real axis.
    pub fn derivative_at_real(&self, x: f64) -> Result<Quaternion> {
        // Cauchy integral on a circle that stays clear of the singularities
        let gap = self.poles().iter().map(|p| (p - x).abs()).fold(1.0, f64::min);
        if gap <= POLE_GUARD {
            return Err(Error::PoleProximity { point: x.to_string(), pole: x, dist: gap });
        }
        let r = 0.5 * gap;
        const N: usize = 64;
        let mut acc = Quaternion::ZERO;
        for k in 0..N {
            let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / N as f64);
            let (alpha, beta) = self.stem.eval(x + w * r)?;
            // Re of (α + iβ) · conj(w), componentwise
            acc += alpha * w.re + beta * w.im;
        }
        Ok(acc * (1.0 / (N as f64 * r)))
    }
}

/// The Fueter-Sce first step `T_F1`: the intrinsic slice function of an
/// intrinsic stem.
pub fn fueter_tf1(stem: &HolomorphicStem) -> Result<SliceFunction> {
    if !stem.is_intrinsic() {
        return Err(Error::NotIntrinsic("stem has quaternion-valued components".into()));
    }
    Ok(SliceFunction { stem: stem.clone(), side: FunctionSide::Intrinsic })
}
