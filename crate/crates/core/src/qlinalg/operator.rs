use nalgebra::{DMatrix, Matrix4};

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Condition-number cap applied by [`QOperator::inverse`].
pub const COND_CAP: f64 = 1e12;

/// A right-linear operator on `ℍⁿ` stored as its real `4n × 4n` matrix.
///
/// Vectors are laid out component-major: entries `k*n .. (k+1)*n` hold the
/// `e_k` components, so the operator `Σ e_ℓ C_ℓ` (real `C_ℓ`) is
/// `Σ embed_left(e_ℓ) ⊗ C_ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    n: usize,
    m: DMatrix<f64>,
}

impl QOperator {
    pub fn from_matrix(n: usize, m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != 4 * n || m.ncols() != 4 * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {0}x{0} realified matrix, got {1}x{2}",
                4 * n,
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self { n, m })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, m: DMatrix::zeros(4 * n, 4 * n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { n, m: DMatrix::identity(4 * n, 4 * n) }
    }

    /// Left multiplication by the scalar `q` on every entry, `L_q ⊗ I`.
    pub fn scalar(n: usize, q: Quaternion) -> Self {
        Self::kron(&q.embed_left(), &DMatrix::identity(n, n))
    }

    /// `I₄ ⊗ b`: the real operator `b` acting componentwise.
    pub fn real(b: &DMatrix<f64>) -> Self {
        Self::kron(&Matrix4::identity(), b)
    }

    /// `Σ_ℓ e_ℓ c[ℓ]` for real component matrices.
    pub fn from_components(c: &[DMatrix<f64>; 4]) -> Self {
        let n = c[0].nrows();
        let mut out = Self::zeros(n);
        for (l, cl) in c.iter().enumerate() {
            out.m += Self::kron(&Quaternion::BASIS[l].embed_left(), cl).m;
        }
        out
    }

    fn kron(a: &Matrix4<f64>, b: &DMatrix<f64>) -> Self {
        let n = b.nrows();
        let mut m = DMatrix::zeros(4 * n, 4 * n);
        for r in 0..4 {
            for c in 0..4 {
                let s = a[(r, c)];
                if s != 0.0 {
                    m.view_mut((r * n, c * n), (n, n)).copy_from(&(b * s));
                }
            }
        }
        Self { n, m }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    fn block(&self, r: usize, c: usize) -> nalgebra::DMatrixView<'_, f64> {
        self.m.view((r * self.n, c * self.n), (self.n, self.n))
    }

    /// Real components `C_ℓ` with `self = Σ e_ℓ C_ℓ`, read off the first
    /// block column. Exact for right-linear operators.
    pub fn components(&self) -> [DMatrix<f64>; 4] {
        std::array::from_fn(|k| self.block(k, 0).into_owned())
    }

    /// The scalar value of a `1 × 1` operator.
    pub fn as_scalar(&self) -> Option<Quaternion> {
        (self.n == 1).then(|| Quaternion::new(self.m[(0, 0)], self.m[(1, 0)], self.m[(2, 0)], self.m[(3, 0)]))
    }

    pub fn compose(&self, o: &Self) -> Self {
        debug_assert_eq!(self.n, o.n);
        Self { n: self.n, m: &self.m * &o.m }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { n: self.n, m: &self.m + &o.m }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { n: self.n, m: &self.m - &o.m }
    }

    pub fn scale(&self, r: f64) -> Self {
        Self { n: self.n, m: &self.m * r }
    }

    pub fn add_assign(&mut self, o: &Self) {
        self.m += &o.m;
    }

    /// `(L_q ⊗ I) · self`, i.e. `q · self`.
    pub fn scale_left(&self, q: Quaternion) -> Self {
        self.mix_blocks(&q.embed_left(), true)
    }

    /// `self · (L_q ⊗ I)`, i.e. `self · q`.
    pub fn scale_right(&self, q: Quaternion) -> Self {
        self.mix_blocks(&q.embed_left(), false)
    }

    fn mix_blocks(&self, l: &Matrix4<f64>, left: bool) -> Self {
        let n = self.n;
        let mut out = DMatrix::zeros(4 * n, 4 * n);
        for a in 0..4 {
            for c in 0..4 {
                let mut dst = out.view_mut((a * n, c * n), (n, n));
                for b in 0..4 {
                    let (coef, src) = if left { (l[(a, b)], self.block(b, c)) } else { (l[(b, c)], self.block(a, b)) };
                    if coef != 0.0 {
                        dst.zip_apply(&src, |d, s| *d += coef * s);
                    }
                }
            }
        }
        Self { n, m: out }
    }

    pub fn inverse(&self) -> Result<Self> {
        self.inverse_capped(COND_CAP)
    }

    /// Inverse via LU, refusing when the 1-norm condition estimate exceeds `cap`.
    pub fn inverse_capped(&self, cap: f64) -> Result<Self> {
        let inv = self.m.clone().lu().try_inverse().ok_or(Error::SingularOperator { cond: f64::INFINITY })?;
        let cond = norm1(&self.m) * norm1(&inv);
        if !(cond <= cap) {
            return Err(Error::SingularOperator { cond });
        }
        Ok(Self { n: self.n, m: inv })
    }

    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn dist(&self, o: &Self) -> f64 {
        (&self.m - &o.m).norm()
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        (&self.m - &o.m).amax()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().all(|x| x.is_finite())
    }

    /// `max_q ‖[self, R_q ⊗ I]‖ / ‖self‖` over the three imaginary units.
    pub fn right_linearity_defect(&self) -> f64 {
        let id = DMatrix::identity(self.n, self.n);
        let scale = self.norm().max(f64::MIN_POSITIVE);
        [Quaternion::E1, Quaternion::E2, Quaternion::E3]
            .iter()
            .map(|e| {
                let r = Self::kron(&e.embed_right(), &id);
                (&self.m * &r.m - &r.m * &self.m).norm() / scale
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max)
}
