//! Random commuting tuples `T_ℓ = S D_ℓ S⁻¹` with known joint eigenvalues.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::spectrum::{SSpectrum, Sphere};
use super::tuple::CommutingTuple;
use crate::quaternion::Quaternion;

#[derive(Clone, Debug)]
pub struct TupleOptions {
    /// Joint eigenvalue components are drawn from `[-spread, spread]`.
    pub spread: f64,
    /// When set, eigenvalue magnitudes are additionally scaled by `10^k`
    /// with `k` uniform in `[0, log10_range]`.
    pub log10_range: Option<f64>,
    /// Forces `D_k = 0` for this component.
    pub zero_component: Option<usize>,
    /// Size of the perturbation `S = I + coupling·U`.
    pub coupling: f64,
}

impl Default for TupleOptions {
    fn default() -> Self {
        Self { spread: 1.0, log10_range: None, zero_component: None, coupling: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct TupleDraw {
    pub tuple: CommutingTuple,
    /// `joint[k][ℓ]` is the `k`-th diagonal entry of `D_ℓ`.
    pub joint: Vec<[f64; 4]>,
    pub s: DMatrix<f64>,
    pub s_inv: DMatrix<f64>,
}

impl TupleDraw {
    /// Spheres `(d0, |(d1, d2, d3)|)` of the joint eigenvalues.
    pub fn spectrum_oracle(&self) -> SSpectrum {
        SSpectrum::new(self.joint.iter().map(|d| Sphere { center: d[0], radius: d[1].hypot(d[2]).hypot(d[3]) }).collect())
    }

    /// The joint eigenvalues as quaternions `d0 + e1 d1 + e2 d2 + e3 d3`.
    pub fn joint_quaternions(&self) -> Vec<Quaternion> {
        self.joint.iter().map(|&d| d.into()).collect()
    }
}

pub fn random_commuting_tuple<R: Rng + ?Sized>(rng: &mut R, n: usize, opts: &TupleOptions) -> TupleDraw {
    let s_inv;
    let s = loop {
        let u = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let s = DMatrix::identity(n, n) + u * (opts.coupling / (n as f64).sqrt());
        if let Some(inv) = s.clone().try_inverse() {
            s_inv = inv;
            break s;
        }
    };
    let joint: Vec<[f64; 4]> = (0..n)
        .map(|_| {
            let mag = opts.log10_range.map_or(1.0, |r| 10f64.powf(rng.random_range(0.0..=r)));
            std::array::from_fn(|l| {
                let d = rng.random_range(-opts.spread..opts.spread) * mag;
                if opts.zero_component == Some(l) {
                    0.0
                } else {
                    d
                }
            })
        })
        .collect();
    let comps: [DMatrix<f64>; 4] = std::array::from_fn(|l| {
        let d = DMatrix::from_diagonal(&DVector::from_iterator(n, joint.iter().map(|j| j[l])));
        &s * d * &s_inv
    });
    // relative commutation error grows with the spread of the eigenvalues
    let scale = joint.iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
    let tuple = CommutingTuple::with_tol(comps, 1e-10 * scale.max(1.0)).expect("simultaneously diagonal tuple commutes");
    TupleDraw { tuple, joint, s, s_inv }
}
