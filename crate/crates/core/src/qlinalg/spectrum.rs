use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::tuple::CommutingTuple;
use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

/// Spheres closer than this (in center and radius) are one spectral sphere.
pub const MERGE_TOL: f64 = 1e-8;

/// Companion eigenvalues within this relative distance are one cluster.
/// Real points of the S-spectrum are double roots of the quadratic pencil,
/// which the eigensolver splits by about `sqrt(eps)`; the cluster mean
/// restores full accuracy.
const CLUSTER_TOL: f64 = 1e-6;

/// The axially symmetric set `[center + J radius]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: f64,
    pub radius: f64,
}

impl Sphere {
    /// Distance from `q` to the nearest point of the sphere.
    pub fn distance(&self, q: Quaternion) -> f64 {
        (q.w - self.center).hypot(q.imag_norm() - self.radius)
    }

    /// Distance from the point `(u, v)` of a slice plane to the sphere's trace
    /// `{center ± i radius}`.
    pub fn trace_distance(&self, u: f64, v: f64) -> f64 {
        (u - self.center).hypot(v.abs() - self.radius)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SSpectrum {
    pub spheres: Vec<Sphere>,
}

impl SSpectrum {
    pub fn new(mut spheres: Vec<Sphere>) -> Self {
        spheres.sort_by(|a, b| a.center.total_cmp(&b.center).then(a.radius.total_cmp(&b.radius)));
        let mut out: Vec<Sphere> = Vec::with_capacity(spheres.len());
        for s in spheres {
            let dup = out.iter().any(|o| {
                let scale = 1f64.max(o.center.abs()).max(o.radius);
                (o.center - s.center).abs() <= MERGE_TOL * scale && (o.radius - s.radius).abs() <= MERGE_TOL * scale
            });
            if !dup {
                out.push(s);
            }
        }
        Self { spheres: out }
    }

    pub fn distance(&self, q: Quaternion) -> f64 {
        self.spheres.iter().map(|s| s.distance(q)).fold(f64::INFINITY, f64::min)
    }

    /// `max |center + i radius|`, the S-spectral radius.
    pub fn radius(&self) -> f64 {
        self.spheres.iter().map(|s| s.center.hypot(s.radius)).fold(0.0, f64::max)
    }

    /// Image under `p = (s - α)⁻¹`. The point at infinity of the extended
    /// spectrum maps to 0, which is not included: matrices are bounded.
    pub fn phi_image(&self, alpha: f64) -> Self {
        Self::new(
            self.spheres
                .iter()
                .map(|s| {
                    let rho2 = (s.center - alpha).powi(2) + s.radius.powi(2);
                    Sphere { center: (s.center - alpha) / rho2, radius: s.radius / rho2 }
                })
                .collect(),
        )
    }
}

/// S-spectrum from the eigenvalues of the companion matrix `[[2T0, -P], [I, 0]]`.
pub fn s_spectrum(t: &CommutingTuple) -> Result<SSpectrum> {
    let n = t.n();
    let p = t.norm_sqr_matrix();
    let mut c = DMatrix::zeros(2 * n, 2 * n);
    c.view_mut((0, 0), (n, n)).copy_from(&(t.component(0) * 2.0));
    c.view_mut((0, n), (n, n)).copy_from(&(-p));
    c.view_mut((n, 0), (n, n)).fill_with_identity();
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenSolverFailure);
    }
    let schur = Schur::try_new(c, f64::EPSILON, 10_000).ok_or(Error::EigenSolverFailure)?;
    let eig: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    if eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenSolverFailure);
    }
    Ok(spheres_from_eigenvalues(&eig))
}

fn spheres_from_eigenvalues(eig: &[Complex64]) -> SSpectrum {
    let scale = eig.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = CLUSTER_TOL * scale;
    // single-linkage clustering by union-find
    let mut parent: Vec<usize> = (0..eig.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..eig.len() {
        for j in i + 1..eig.len() {
            if (eig[i] - eig[j]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut sums: Vec<(Complex64, usize)> = vec![(Complex64::new(0.0, 0.0), 0); eig.len()];
    for (i, z) in eig.iter().enumerate() {
        let r = root(&mut parent, i);
        sums[r].0 += z;
        sums[r].1 += 1;
    }
    let spheres = sums
        .into_iter()
        .filter(|(_, k)| *k > 0)
        .map(|(s, k)| {
            let z = s / k as f64;
            let radius = if z.im.abs() <= tol { 0.0 } else { z.im.abs() };
            Sphere { center: z.re, radius }
        })
        .collect();
    SSpectrum::new(spheres)
}
