use num_complex::Complex64;

use crate::error::{Error, Result};

/// An intrinsic holomorphic function of one complex variable: real on the
/// real axis, so `g(z̄) = conj g(z)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Stem {
    /// `Σ c_k z^k`.
    Poly(Vec<f64>),
    /// `num(z) / Π_j (z - poles[j])`; repeated poles give higher order.
    Rational { num: Vec<f64>, poles: Vec<f64> },
    /// `exp(rate · z)`.
    Exp { rate: f64 },
    /// `inner(1/z + alpha)`, with the value `inner(∞)` at `z = 0`.
    PhiInv { inner: Box<Stem>, alpha: f64 },
    Product(Vec<Stem>),
}

fn horner(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Coefficients with trailing zeros removed.
fn trimmed(c: &[f64]) -> &[f64] {
    let len = c.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
    &c[..len]
}

impl Stem {
    pub fn constant(c: f64) -> Self {
        Stem::Poly(vec![c])
    }

    /// `z ↦ z`.
    pub fn identity() -> Self {
        Stem::Poly(vec![0.0, 1.0])
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        Ok(match self {
            Stem::Poly(c) => horner(c, z),
            Stem::Rational { num, poles } => {
                let den = poles.iter().fold(Complex64::new(1.0, 0.0), |acc, &r| acc * (z - r));
                horner(num, z) / den
            }
            Stem::Exp { rate } => (z * rate).exp(),
            Stem::PhiInv { inner, alpha } => {
                if z == Complex64::new(0.0, 0.0) {
                    Complex64::new(inner.value_at_infinity().ok_or(Error::MissingValueAtInfinity)?, 0.0)
                } else {
                    inner.eval(z.inv() + alpha)?
                }
            }
            Stem::Product(fs) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in fs {
                    acc *= f.eval(z)?;
                }
                acc
            }
        })
    }

    /// `lim_{z→∞} g(z)` when it exists.
    pub fn value_at_infinity(&self) -> Option<f64> {
        match self {
            Stem::Poly(c) => match trimmed(c) {
                [] => Some(0.0),
                [c0] => Some(*c0),
                _ => None,
            },
            Stem::Rational { num, poles } => {
                let num = trimmed(num);
                match num.len() {
                    0 => Some(0.0),
                    k if k - 1 < poles.len() => Some(0.0),
                    k if k - 1 == poles.len() => Some(num[k - 1]),
                    _ => None,
                }
            }
            Stem::Exp { rate } => (*rate == 0.0).then_some(1.0),
            Stem::PhiInv { inner, alpha } => {
                let v = inner.eval(Complex64::new(*alpha, 0.0)).ok()?;
                v.re.is_finite().then_some(v.re)
            }
            Stem::Product(fs) => fs.iter().map(Stem::value_at_infinity).product(),
        }
    }

    /// Finite points where the stem fails to be holomorphic. All of them are
    /// real for intrinsic stems built from these kinds.
    pub fn singular_points(&self) -> Vec<f64> {
        let mut out = match self {
            Stem::Poly(_) | Stem::Exp { .. } => vec![],
            Stem::Rational { poles, .. } => poles.clone(),
            Stem::PhiInv { inner, alpha } => {
                let mut pts: Vec<f64> =
                    inner.singular_points().into_iter().filter(|r| r != alpha).map(|r| 1.0 / (r - alpha)).collect();
                if inner.value_at_infinity().is_none() {
                    pts.push(0.0);
                }
                pts
            }
            Stem::Product(fs) => fs.iter().flat_map(Stem::singular_points).collect(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}
