//! Slice contours made of circles and adaptive trapezoidal quadrature of
//! `(1/2π) ∮ K(s) ds_J f(s)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{QOperator, SSpectrum};
use crate::quaternion::Quaternion;
use crate::slice::{Side, SliceFunction};

pub const DEFAULT_RTOL: f64 = 1e-10;
pub const DEFAULT_NODES_CAP: usize = 1 << 14;
pub const DEFAULT_INITIAL_NODES: usize = 32;

/// A circle in the `J`-plane, `(u, v)` being the center `u + J v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub u: f64,
    pub v: f64,
    pub r: f64,
    /// `1` counterclockwise, `-1` clockwise.
    pub orient: i8,
}

impl Circle {
    fn center(&self) -> Complex64 {
        Complex64::new(self.u, self.v)
    }

    fn mirror(&self) -> Self {
        Self { v: -self.v, ..*self }
    }
}

/// `∂(U ∩ ℂ_J)` for a slice Cauchy domain `U` bounded by circles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceContour {
    #[serde(rename = "J")]
    pub j: Quaternion,
    pub circles: Vec<Circle>,
    pub unbounded: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    /// Positively oriented circles around the spectrum.
    Bounded,
    /// The complement of small disks around the avoid points: negatively
    /// oriented circles, the spectrum and infinity outside all of them.
    Unbounded,
}

impl SliceContour {
    pub fn with_j(&self, j: Quaternion) -> Self {
        Self { j, ..self.clone() }
    }

    /// Checks the slice Cauchy domain conditions: `J` a unit imaginary,
    /// circles disjoint or nested, and the circle set symmetric under `v ↦ −v`.
    pub fn validate(&self) -> Result<()> {
        if self.j.w.abs() > 1e-12 || (self.j.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("J = {} is not a unit imaginary quaternion", self.j)));
        }
        for (i, a) in self.circles.iter().enumerate() {
            if !(a.r > 0.0) || !a.u.is_finite() || !a.v.is_finite() || a.orient.abs() != 1 {
                return Err(Error::Invalid(format!("circle {i} is degenerate")));
            }
            for b in &self.circles[i + 1..] {
                let d = (a.center() - b.center()).norm();
                let disjoint = d > a.r + b.r;
                let nested = d + a.r.min(b.r) < a.r.max(b.r);
                if !disjoint && !nested {
                    return Err(Error::Invalid(format!("circle {i} intersects another circle")));
                }
            }
            let tol = 1e-12 * (1.0 + a.u.abs() + a.v.abs() + a.r);
            let mirrored = self.circles.iter().any(|b| {
                b.orient == a.orient
                    && (b.u - a.u).abs() <= tol
                    && (b.v + a.v).abs() <= tol
                    && (b.r - a.r).abs() <= tol
            });
            if !mirrored {
                return Err(Error::Invalid(format!("circle {i} has no mirror image under v -> -v")));
            }
        }
        Ok(())
    }
}

/// Smallest circle containing both `a` and `b`.
fn enclosing(a: &Circle, b: &Circle) -> Circle {
    let d = (b.center() - a.center()).norm();
    if d + b.r <= a.r {
        return *a;
    }
    if d + a.r <= b.r {
        return *b;
    }
    let r = 0.5 * (d + a.r + b.r);
    let c = a.center() + (b.center() - a.center()) * ((r - a.r) / d);
    Circle { u: c.re, v: c.im, r, orient: a.orient }
}

/// Builds the contour of a slice Cauchy domain around `spec` (bounded) or
/// around the `avoid` points (unbounded). See [`Domain`].
pub fn enclose_spectrum(spec: &SSpectrum, margin: f64, avoid: &[f64], domain: Domain, j: Quaternion) -> Result<SliceContour> {
    if !(margin > 0.0) {
        return Err(Error::Invalid(format!("margin must be positive, got {margin}")));
    }
    let circles = match domain {
        Domain::Bounded => bounded_circles(spec, margin, avoid)?,
        Domain::Unbounded => puncture_circles(spec, margin, avoid)?,
    };
    let contour = SliceContour { j, circles, unbounded: domain == Domain::Unbounded };
    contour.validate()?;
    Ok(contour)
}

fn bounded_circles(spec: &SSpectrum, margin: f64, avoid: &[f64]) -> Result<Vec<Circle>> {
    // work in the closed upper half plane, mirror at the end
    let mut upper: Vec<Circle> =
        spec.spheres.iter().map(|s| Circle { u: s.center, v: s.radius, r: margin * (1.0 + s.radius), orient: 1 }).collect();
    loop {
        let mut changed = false;
        for c in upper.iter_mut() {
            if c.v > 0.0 && c.v <= c.r {
                *c = Circle { u: c.u, v: 0.0, r: c.v + c.r, orient: 1 };
                changed = true;
            }
        }
        'pairs: for i in 0..upper.len() {
            for k in i + 1..upper.len() {
                if (upper[i].center() - upper[k].center()).norm() <= upper[i].r + upper[k].r {
                    upper[i] = enclosing(&upper[i], &upper[k]);
                    upper.remove(k);
                    changed = true;
                    break 'pairs;
                }
            }
        }
        if !changed {
            break;
        }
    }
    upper.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.v.total_cmp(&b.v)));
    for &a in avoid {
        for c in &upper {
            // keep the avoid point well outside so the trapezoid rule converges fast
            if (Complex64::new(a, 0.0) - c.center()).norm() < 1.5 * c.r {
                return Err(Error::CannotSeparate { point: a });
            }
        }
    }
    let mut out = Vec::with_capacity(2 * upper.len());
    for c in upper {
        out.push(c);
        if c.v > 0.0 {
            out.push(c.mirror());
        }
    }
    Ok(out)
}

fn puncture_circles(spec: &SSpectrum, margin: f64, avoid: &[f64]) -> Result<Vec<Circle>> {
    let mut pts = avoid.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len());
    for (i, &a) in pts.iter().enumerate() {
        let to_spec = spec.spheres.iter().map(|s| s.trace_distance(a, 0.0)).fold(f64::INFINITY, f64::min);
        let to_other = pts.iter().enumerate().filter(|(k, _)| *k != i).map(|(_, b)| (a - b).abs()).fold(f64::INFINITY, f64::min);
        let r = margin.min(0.5 * to_spec).min(0.4 * to_other);
        if !(r > 1e-8 * (1.0 + a.abs())) {
            return Err(Error::CannotSeparate { point: a });
        }
        out.push(Circle { u: a, v: 0.0, r, orient: -1 });
    }
    Ok(out)
}

/// [`enclose_spectrum`] for bounded domains, halving `margin` until the avoid
/// points separate from the spectrum.
pub fn auto_contour(spec: &SSpectrum, margin: f64, avoid: &[f64], j: Quaternion) -> Result<SliceContour> {
    let mut m = margin;
    for _ in 0..40 {
        match enclose_spectrum(spec, m, avoid, Domain::Bounded, j) {
            Err(Error::CannotSeparate { .. }) => m *= 0.5,
            other => return other,
        }
    }
    enclose_spectrum(spec, m, avoid, Domain::Bounded, j)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    pub rtol: f64,
    pub nodes_cap: usize,
    pub initial_nodes: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { rtol: DEFAULT_RTOL, nodes_cap: DEFAULT_NODES_CAP, initial_nodes: DEFAULT_INITIAL_NODES }
    }
}

/// Values that can be integrated: quaternions and realified operators.
pub trait ContourValue: Clone + Send + Sync {
    /// Whether node evaluations are worth spreading over threads.
    const PARALLEL: bool;
    fn zero_like(&self) -> Self;
    /// `self += r · other`.
    fn add_scaled(&mut self, other: &Self, r: f64);
    /// `self · q` for `Side::Left`, `q · self` for `Side::Right`.
    fn times(&self, q: Quaternion, side: Side) -> Self;
    fn value_norm(&self) -> f64;
    fn finite(&self) -> bool;
}

impl ContourValue for Quaternion {
    const PARALLEL: bool = false;
    fn zero_like(&self) -> Self {
        Quaternion::ZERO
    }
    fn add_scaled(&mut self, other: &Self, r: f64) {
        *self += *other * r;
    }
    fn times(&self, q: Quaternion, side: Side) -> Self {
        match side {
            Side::Left => *self * q,
            Side::Right => q * *self,
        }
    }
    fn value_norm(&self) -> f64 {
        self.norm()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

impl ContourValue for QOperator {
    const PARALLEL: bool = true;
    fn zero_like(&self) -> Self {
        QOperator::zeros(self.n())
    }
    fn add_scaled(&mut self, other: &Self, r: f64) {
        self.add_assign(&other.scale(r));
    }
    fn times(&self, q: Quaternion, side: Side) -> Self {
        match side {
            Side::Left => self.scale_right(q),
            Side::Right => self.scale_left(q),
        }
    }
    fn value_norm(&self) -> f64 {
        self.norm()
    }
    fn finite(&self) -> bool {
        self.is_finite()
    }
}

#[derive(Clone, Debug)]
pub struct Integral<V> {
    pub value: V,
    pub nodes_used: usize,
    /// Per circle, the successive differences `‖I_2N − I_N‖` divided by the
    /// integrand mass `(1/N) Σ ‖term‖`.
    pub gaps: Vec<Vec<f64>>,
}

/// `(1/2π) ∮ K(s) ds_J f(s)` (left) or `(1/2π) ∮ f(s) ds_J K(s)` (right).
///
/// On each circle `s = c + r e^{Jθ}` and `ds_J = r e^{Jθ} dθ`; circles are
/// refined by node doubling until the successive difference falls below
/// `rtol` times the integrand mass.
pub fn integrate<V, K>(kernel: K, f: &SliceFunction, contour: &SliceContour, side: Side, opts: &QuadratureOptions) -> Result<Integral<V>>
where
    V: ContourValue,
    K: Fn(Quaternion) -> Result<V> + Sync,
{
    let weight = |z: Complex64, dz: Complex64| -> Result<Quaternion> {
        let fz = f.eval_slice(z, contour.j)?;
        let ds = Quaternion::from_complex(dz, contour.j);
        Ok(match side {
            Side::Left => ds * fz,
            Side::Right => fz * ds,
        })
    };
    integrate_weighted(&kernel, &weight, contour, side, opts)
}

/// Like [`integrate`] with a general scalar weight `w(z, dz)` standing for
/// `ds_J f(s)` (left) or `f(s) ds_J` (right), where `dz = s − c`.
pub fn integrate_weighted<V, K, W>(kernel: &K, weight: &W, contour: &SliceContour, side: Side, opts: &QuadratureOptions) -> Result<Integral<V>>
where
    V: ContourValue,
    K: Fn(Quaternion) -> Result<V> + Sync,
    W: Fn(Complex64, Complex64) -> Result<Quaternion> + Sync,
{
    if !(opts.rtol > 0.0) {
        return Err(Error::Invalid(format!("rtol must be positive, got {}", opts.rtol)));
    }
    let mut total: Option<V> = None;
    let mut nodes_used = 0;
    let mut gaps = Vec::with_capacity(contour.circles.len());
    for c in &contour.circles {
        let (value, used, g) = integrate_circle(kernel, weight, c, contour.j, side, opts)?;
        nodes_used += used;
        gaps.push(g);
        match total.as_mut() {
            None => total = Some(value),
            Some(t) => t.add_scaled(&value, 1.0),
        }
    }
    let value = total.ok_or_else(|| Error::Invalid("contour has no circles".into()))?;
    Ok(Integral { value, nodes_used, gaps })
}

/// Same as [`integrate_weighted`] but returns `zero` for an empty contour.
pub fn integrate_or_zero<V, K, W>(
    kernel: &K,
    weight: &W,
    contour: &SliceContour,
    side: Side,
    opts: &QuadratureOptions,
    zero: V,
) -> Result<Integral<V>>
where
    V: ContourValue,
    K: Fn(Quaternion) -> Result<V> + Sync,
    W: Fn(Complex64, Complex64) -> Result<Quaternion> + Sync,
{
    if contour.circles.is_empty() {
        return Ok(Integral { value: zero, nodes_used: 0, gaps: vec![] });
    }
    integrate_weighted(kernel, weight, contour, side, opts)
}

/// Sum of `term(θ_k)/N` over `θ_k = offset + 2πk/N`, with the mass `Σ‖term‖/N`.
fn trapezoid_sum<V, T>(term: &T, n: usize, offset: f64) -> Result<(V, f64)>
where
    V: ContourValue,
    T: Fn(f64) -> Result<V> + Sync,
{
    let theta = |k: usize| offset + std::f64::consts::TAU * k as f64 / n as f64;
    let terms: Vec<V> = if V::PARALLEL {
        (0..n).into_par_iter().map(|k| term(theta(k))).collect::<Result<_>>()?
    } else {
        (0..n).map(|k| term(theta(k))).collect::<Result<_>>()?
    };
    // ordered reduction keeps results independent of the thread count
    let mut acc = terms[0].zero_like();
    let mut mass = 0.0;
    for t in &terms {
        acc.add_scaled(t, 1.0);
        mass += t.value_norm();
    }
    let inv = 1.0 / n as f64;
    let mut out = acc.zero_like();
    out.add_scaled(&acc, inv);
    Ok((out, mass * inv))
}

fn integrate_circle<V, K, W>(
    kernel: &K,
    weight: &W,
    c: &Circle,
    j: Quaternion,
    side: Side,
    opts: &QuadratureOptions,
) -> Result<(V, usize, Vec<f64>)>
where
    V: ContourValue,
    K: Fn(Quaternion) -> Result<V> + Sync,
    W: Fn(Complex64, Complex64) -> Result<Quaternion> + Sync,
{
    let orient = c.orient as f64;
    let term = |theta: f64| -> Result<V> {
        let dz = Complex64::from_polar(c.r, theta);
        let z = c.center() + dz;
        let s = Quaternion::from_complex(z, j);
        let k = kernel(s)?;
        let w = weight(z, dz)?;
        let mut t = k.times(w, side);
        if !t.finite() {
            return Err(Error::KernelSingularity(s.to_string()));
        }
        if orient < 0.0 {
            let z = t.zero_like();
            let pos = std::mem::replace(&mut t, z);
            t.add_scaled(&pos, -1.0);
        }
        Ok(t)
    };
    let mut n = opts.initial_nodes.max(4);
    let (mut value, mut mass) = trapezoid_sum(&term, n, 0.0)?;
    let mut gaps = Vec::new();
    let mut previous = f64::NAN;
    let mut last_gap = f64::NAN;
    loop {
        if 2 * n > opts.nodes_cap {
            return Err(Error::NoConvergence { nodes: n, last: value.value_norm(), previous, gap: last_gap });
        }
        let (mid, mid_mass) = trapezoid_sum(&term, n, std::f64::consts::PI / n as f64)?;
        let mut refined = value.zero_like();
        refined.add_scaled(&value, 0.5);
        refined.add_scaled(&mid, 0.5);
        mass = 0.5 * (mass + mid_mass);
        let mut diff = refined.clone();
        diff.add_scaled(&value, -1.0);
        last_gap = diff.value_norm();
        let scale = mass.max(refined.value_norm());
        gaps.push(if scale > 0.0 { last_gap / scale } else { 0.0 });
        previous = value.value_norm();
        value = refined;
        n *= 2;
        if last_gap <= opts.rtol * scale {
            return Ok((value, n, gaps));
        }
    }
}
