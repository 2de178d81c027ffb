//! JSON descriptors of slice functions.

use serde::{Deserialize, Serialize};

use super::function::{FunctionSide, SliceFunction};
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

const F_INF_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionKind {
    Poly,
    Rational,
    Exp,
}

/// `{"kind": "poly", "coeffs": [[w,x,y,z], ...], "poles": [], "f_inf": null, "side": "intrinsic"}`.
///
/// `coeffs` are ascending polynomial coefficients; for `rational` they form
/// the numerator over `Π (q − pole)`, and for `exp` the single coefficient
/// `a` of `exp(rate q) a`. A non-null `f_inf` must match the function's
/// value at infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDescriptor {
    pub kind: FunctionKind,
    pub coeffs: Vec<Quaternion>,
    #[serde(default)]
    pub poles: Vec<f64>,
    #[serde(default)]
    pub f_inf: Option<Quaternion>,
    #[serde(default = "default_side")]
    pub side: FunctionSide,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
}

fn default_side() -> FunctionSide {
    FunctionSide::Intrinsic
}

impl FunctionDescriptor {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("function descriptor: {e}")))
    }

    pub fn to_function(&self) -> Result<SliceFunction> {
        if self.coeffs.is_empty() {
            return Err(Error::Invalid("function descriptor: empty coeffs".into()));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) || self.poles.iter().any(|p| !p.is_finite()) {
            return Err(Error::Invalid("function descriptor: non-finite entries".into()));
        }
        let f = match self.kind {
            FunctionKind::Poly => {
                if !self.poles.is_empty() {
                    return Err(Error::Invalid("function descriptor: poly takes no poles".into()));
                }
                SliceFunction::poly(&self.coeffs, self.side)?
            }
            FunctionKind::Rational => SliceFunction::rational(&self.coeffs, &self.poles, self.side)?,
            FunctionKind::Exp => {
                let rate = self.rate.ok_or_else(|| Error::Invalid("function descriptor: exp needs a rate".into()))?;
                if self.coeffs.len() != 1 {
                    return Err(Error::Invalid("function descriptor: exp takes one coefficient".into()));
                }
                SliceFunction::exp(rate, self.coeffs[0], self.side)?
            }
        };
        if let Some(given) = self.f_inf {
            match f.value_at_infinity() {
                Some(v) if v.dist(given) <= F_INF_TOL * v.norm().max(1.0) => {}
                Some(v) => return Err(Error::Invalid(format!("function descriptor: f_inf = {given}, but f(∞) = {v}"))),
                None => return Err(Error::Invalid(format!("function descriptor: f_inf = {given}, but f has no value at ∞"))),
            }
        }
        Ok(f)
    }
}
