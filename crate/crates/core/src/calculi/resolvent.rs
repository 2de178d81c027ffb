use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{s_spectrum, CommutingTuple, QOperator, SSpectrum};
use crate::quaternion::Quaternion;
use crate::slice::Side;

/// Distance to the S-spectrum below which resolvents refuse.
pub const SPECTRUM_GUARD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResolventFamily {
    /// `Q_{c,s}(T)⁻¹`.
    Pseudo,
    S,
    F,
    P2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResolventKind {
    pub family: ResolventFamily,
    pub side: Side,
}

/// Precomputed pieces of a tuple for evaluating its resolvents at many `s`.
#[derive(Clone, Debug)]
pub struct Resolvents {
    tuple: CommutingTuple,
    t: QOperator,
    t_bar: QOperator,
    t0: QOperator,
    t0_mat: DMatrix<f64>,
    p_mat: DMatrix<f64>,
    spectrum: SSpectrum,
}

impl Resolvents {
    pub fn new(tuple: &CommutingTuple) -> Result<Self> {
        let spectrum = s_spectrum(tuple)?;
        Ok(Self::with_spectrum(tuple, spectrum))
    }

    pub fn with_spectrum(tuple: &CommutingTuple, spectrum: SSpectrum) -> Self {
        Self {
            t: tuple.realify(),
            t_bar: tuple.conj().realify(),
            t0: QOperator::real(tuple.component(0)),
            t0_mat: tuple.component(0).clone(),
            p_mat: tuple.norm_sqr_matrix(),
            tuple: tuple.clone(),
            spectrum,
        }
    }

    pub fn tuple(&self) -> &CommutingTuple {
        &self.tuple
    }

    pub fn spectrum(&self) -> &SSpectrum {
        &self.spectrum
    }

    pub fn n(&self) -> usize {
        self.tuple.n()
    }

    /// Realified `T`.
    pub fn t(&self) -> &QOperator {
        &self.t
    }

    /// Realified `T̄`.
    pub fn t_bar(&self) -> &QOperator {
        &self.t_bar
    }

    /// `T0` acting componentwise.
    pub fn t0(&self) -> &QOperator {
        &self.t0
    }

    /// `Q_{c,s}(T) = s² − 2 s T0 + T T̄`.
    pub fn pseudo_operator(&self, s: Quaternion) -> QOperator {
        let n = self.n();
        QOperator::real(&self.p_mat).add(&QOperator::real(&self.t0_mat).scale_left(s * -2.0)).add(&QOperator::scalar(n, s * s))
    }

    fn check(&self, s: Quaternion) -> Result<()> {
        if self.spectrum.distance(s) <= SPECTRUM_GUARD {
            return Err(Error::SpectrumHit(format!("s = {s}")));
        }
        Ok(())
    }

    /// `Q_{c,s}(T)⁻¹`.
    pub fn pseudo(&self, s: Quaternion) -> Result<QOperator> {
        self.check(s)?;
        self.pseudo_operator(s).inverse()
    }

    /// `s I − T̄`.
    fn s_minus_tbar(&self, s: Quaternion) -> QOperator {
        QOperator::scalar(self.n(), s).sub(&self.t_bar)
    }

    /// `S_L⁻¹(s,T) = (s − T̄) Q⁻¹` or `S_R⁻¹(s,T) = Q⁻¹ (s − T̄)`.
    pub fn s(&self, side: Side, s: Quaternion) -> Result<QOperator> {
        let q = self.pseudo(s)?;
        let a = self.s_minus_tbar(s);
        Ok(match side {
            Side::Left => a.compose(&q),
            Side::Right => q.compose(&a),
        })
    }

    /// The split form `Q⁻¹ s − T̄ Q⁻¹` of the right S-resolvent. It equals
    /// [`Self::s`] with `Side::Right` only when `T̄` commutes with `Q⁻¹`,
    /// which fails for non-real `s` in general; kept for comparison.
    pub fn s_right_split(&self, s: Quaternion) -> Result<QOperator> {
        let q = self.pseudo(s)?;
        Ok(q.scale_right(s).sub(&self.t_bar.compose(&q)))
    }

    /// `F_L = −4 (s − T̄) Q⁻²` or `F_R = −4 Q⁻² (s − T̄)`.
    pub fn f(&self, side: Side, s: Quaternion) -> Result<QOperator> {
        let q = self.pseudo(s)?;
        let q2 = q.compose(&q);
        let a = self.s_minus_tbar(s);
        Ok(match side {
            Side::Left => a.compose(&q2),
            Side::Right => q2.compose(&a),
        }
        .scale(-4.0))
    }

    /// `P2_L = −F_L s + T0 F_L` or `P2_R = −s F_R + F_R T0`.
    pub fn p2(&self, side: Side, s: Quaternion) -> Result<QOperator> {
        let f = self.f(side, s)?;
        Ok(match side {
            Side::Left => self.t0.compose(&f).sub(&f.scale_right(s)),
            Side::Right => f.compose(&self.t0).sub(&f.scale_left(s)),
        })
    }

    pub fn get(&self, kind: ResolventKind, s: Quaternion) -> Result<QOperator> {
        match kind.family {
            ResolventFamily::Pseudo => self.pseudo(s),
            ResolventFamily::S => self.s(kind.side, s),
            ResolventFamily::F => self.f(kind.side, s),
            ResolventFamily::P2 => self.p2(kind.side, s),
        }
    }
}

/// `s ↦ resolvent(kind, s, T)` for a single evaluation.
pub fn resolvent(kind: ResolventKind, s: Quaternion, t: &CommutingTuple) -> Result<QOperator> {
    Resolvents::new(t)?.get(kind, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(q: Quaternion) -> Resolvents {
        Resolvents::new(&CommutingTuple::scalar(q)).unwrap()
    }

    #[test]
    fn scalar_real_point() {
        let t = 0.7;
        let r = scalar(Quaternion::real(t));
        let s = Quaternion::new(1.5, 0.3, -0.8, 0.4);
        let d = (s - Quaternion::real(t)).inv();
        let pseudo = r.pseudo(s).unwrap().as_scalar().unwrap();
        assert!((pseudo - d * d).norm() < 1e-14);
        let f = r.f(Side::Left, s).unwrap().as_scalar().unwrap();
        assert!((f - d * d * d * -4.0).norm() < 1e-14);
        let p2 = r.p2(Side::Left, s).unwrap().as_scalar().unwrap();
        assert!((p2 - d * d * 4.0).norm() < 1e-14);
        let p2r = r.p2(Side::Right, s).unwrap().as_scalar().unwrap();
        assert!((p2r - d * d * 4.0).norm() < 1e-14);
    }

    #[test]
    fn scalar_resolvents_match_kernels() {
        use crate::slice::kernels;
        let q = Quaternion::new(0.3, 1.1, -0.2, 0.5);
        let r = scalar(q);
        let s = Quaternion::new(-0.4, 0.2, 0.9, -1.3);
        let close = |a: QOperator, b: Quaternion| (a.as_scalar().unwrap() - b).norm() < 1e-13;
        assert!(close(r.s(Side::Left, s).unwrap(), kernels::kernel_sl(s, q).unwrap()));
        assert!(close(r.s(Side::Right, s).unwrap(), kernels::kernel_sr(s, q).unwrap()));
        assert!(close(r.f(Side::Left, s).unwrap(), kernels::kernel_fl(s, q).unwrap()));
        assert!(close(r.f(Side::Right, s).unwrap(), kernels::kernel_fr(s, q).unwrap()));
        assert!(close(r.p2(Side::Left, s).unwrap(), kernels::kernel_dbar_sl(s, q).unwrap()));
        assert!(close(r.p2(Side::Right, s).unwrap(), kernels::kernel_dbar_sr(s, q).unwrap()));
    }

    #[test]
    fn spectrum_hit() {
        let r = scalar(Quaternion::new(1.0, 2.0, 0.0, 0.0));
        assert!(matches!(r.pseudo(Quaternion::new(1.0, 0.0, 0.0, 2.0)), Err(Error::SpectrumHit(_))));
    }
}
