use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::operator::QOperator;
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

pub const COMMUTATION_TOL: f64 = 1e-10;

/// `T = T0 + e1 T1 + e2 T2 + e3 T3` with pairwise commuting real components.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutingTuple {
    t: [DMatrix<f64>; 4],
    commutation_tol: f64,
}

impl CommutingTuple {
    pub fn new(t: [DMatrix<f64>; 4]) -> Result<Self> {
        Self::with_tol(t, COMMUTATION_TOL)
    }

    pub fn with_tol(t: [DMatrix<f64>; 4], commutation_tol: f64) -> Result<Self> {
        let n = t[0].nrows();
        for (k, m) in t.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "T{k} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invalid(format!("T{k} has non-finite entries")));
            }
        }
        if n == 0 {
            return Err(Error::DimensionMismatch("empty tuple".into()));
        }
        for i in 0..4 {
            for j in i + 1..4 {
                let residual = (&t[i] * &t[j] - &t[j] * &t[i]).norm();
                let scale = (t[i].norm() * t[j].norm()).max(1.0);
                if residual > commutation_tol * scale {
                    return Err(Error::CommutationViolation { i, j, residual });
                }
            }
        }
        Ok(Self { t, commutation_tol })
    }

    /// The `1 × 1` tuple of a single quaternion.
    pub fn scalar(q: Quaternion) -> Self {
        Self { t: q.to_array().map(|c| DMatrix::from_element(1, 1, c)), commutation_tol: COMMUTATION_TOL }
    }

    /// `T0 = a`, other components zero.
    pub fn real(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        Self::new([a, DMatrix::zeros(n, n), DMatrix::zeros(n, n), DMatrix::zeros(n, n)])
    }

    pub fn n(&self) -> usize {
        self.t[0].nrows()
    }

    pub fn commutation_tol(&self) -> f64 {
        self.commutation_tol
    }

    pub fn component(&self, k: usize) -> &DMatrix<f64> {
        &self.t[k]
    }

    pub fn components(&self) -> &[DMatrix<f64>; 4] {
        &self.t
    }

    /// `T T̄ = Σ T_ℓ²`.
    pub fn norm_sqr_matrix(&self) -> DMatrix<f64> {
        self.t.iter().map(|m| m * m).fold(DMatrix::zeros(self.n(), self.n()), |a, b| a + b)
    }

    pub fn realify(&self) -> QOperator {
        QOperator::from_components(&self.t)
    }

    pub fn conj(&self) -> Self {
        let [t0, t1, t2, t3] = self.t.clone();
        Self { t: [t0, -t1, -t2, -t3], commutation_tol: self.commutation_tol }
    }

    /// `T̲ = e1 T1 + e2 T2 + e3 T3`.
    pub fn imag(&self) -> Self {
        let n = self.n();
        let [_, t1, t2, t3] = self.t.clone();
        Self { t: [DMatrix::zeros(n, n), t1, t2, t3], commutation_tol: self.commutation_tol }
    }

    /// Tuple of the operator `op`, which must have commuting components.
    pub fn from_operator(op: &QOperator) -> Result<Self> {
        Self::new(op.components())
    }

    pub fn to_json(&self) -> TupleJson {
        let rows = |m: &DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        TupleJson {
            n: self.n(),
            t0: rows(&self.t[0]),
            t1: rows(&self.t[1]),
            t2: rows(&self.t[2]),
            t3: rows(&self.t[3]),
        }
    }

    pub fn from_json(j: &TupleJson) -> Result<Self> {
        let mat = |k: usize, rows: &[Vec<f64>]| -> Result<DMatrix<f64>> {
            if rows.len() != j.n || rows.iter().any(|r| r.len() != j.n) {
                return Err(Error::DimensionMismatch(format!("T{k} is not {0}x{0}", j.n)));
            }
            Ok(DMatrix::from_fn(j.n, j.n, |r, c| rows[r][c]))
        };
        Self::new([mat(0, &j.t0)?, mat(1, &j.t1)?, mat(2, &j.t2)?, mat(3, &j.t3)?])
    }
}

/// `{"n": .., "T0": [[..]], ..}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleJson {
    pub n: usize,
    #[serde(rename = "T0")]
    pub t0: Vec<Vec<f64>>,
    #[serde(rename = "T1")]
    pub t1: Vec<Vec<f64>>,
    #[serde(rename = "T2")]
    pub t2: Vec<Vec<f64>>,
    #[serde(rename = "T3")]
    pub t3: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_commuting() {
        let z = DMatrix::zeros(2, 2);
        let t1 = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let t2 = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        match CommutingTuple::new([z.clone(), t1, t2, z]) {
            Err(Error::CommutationViolation { i: 1, j: 2, residual }) => {
                // [T1, T2] = diag(1, -1)
                assert!((residual - 2f64.sqrt()).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_mismatched_dimensions() {
        let r = CommutingTuple::new([DMatrix::zeros(2, 2), DMatrix::zeros(3, 3), DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn realify_examples() {
        let id = CommutingTuple::real(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(id.realify(), QOperator::identity(3));
        let e1 = CommutingTuple::scalar(Quaternion::E1).realify();
        assert_eq!(e1.as_scalar(), Some(Quaternion::E1));
    }

    #[test]
    fn json_round_trip() {
        let t = CommutingTuple::scalar(Quaternion::new(1.0, 2.0, 0.0, -1.0));
        let s = serde_json::to_string(&t.to_json()).unwrap();
        assert_eq!(s, r#"{"n":1,"T0":[[1.0]],"T1":[[2.0]],"T2":[[0.0]],"T3":[[-1.0]]}"#);
        let back: TupleJson = serde_json::from_str(&s).unwrap();
        assert_eq!(CommutingTuple::from_json(&back).unwrap(), t);
    }
}
