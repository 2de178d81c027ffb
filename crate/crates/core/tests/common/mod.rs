//! Test-side oracles: scalar calculi from closed forms in the stem, built
//! without the library's quadrature or finite differences.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qfine_core::calculi::CalculusKind;
use qfine_core::qlinalg::random::TupleDraw;
use qfine_core::qlinalg::QOperator;
use qfine_core::slice::{FunctionSide, SliceFunction};
use qfine_core::Quaternion;

/// An intrinsic test function with its stem and stem derivative.
pub struct TestFn {
    pub name: &'static str,
    pub f: SliceFunction,
    pub g: fn(Complex64) -> Complex64,
    pub dg: fn(Complex64) -> Complex64,
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn test_functions() -> Vec<TestFn> {
    let r = |num: &[f64], poles: &[f64]| {
        let num: Vec<Quaternion> = num.iter().map(|&x| Quaternion::real(x)).collect();
        SliceFunction::rational(&num, poles, FunctionSide::Intrinsic).unwrap()
    };
    vec![
        TestFn { name: "q", f: SliceFunction::identity(), g: |z| z, dg: |_| c(1.0, 0.0) },
        TestFn { name: "q^2", f: SliceFunction::real_poly(&[0.0, 0.0, 1.0]), g: |z| z * z, dg: |z| 2.0 * z },
        TestFn {
            name: "1 - q + 0.5 q^3",
            f: SliceFunction::real_poly(&[1.0, -1.0, 0.0, 0.5]),
            g: |z| 1.0 - z + 0.5 * z * z * z,
            dg: |z| -1.0 + 1.5 * z * z,
        },
        TestFn { name: "(q - 4)^-1", f: r(&[1.0], &[4.0]), g: |z| 1.0 / (z - 4.0), dg: |z| -1.0 / ((z - 4.0) * (z - 4.0)) },
        TestFn {
            name: "q (q + 3.5)^-2",
            f: r(&[0.0, 1.0], &[-3.5, -3.5]),
            g: |z| z / ((z + 3.5) * (z + 3.5)),
            dg: |z| (3.5 - z) / ((z + 3.5) * (z + 3.5) * (z + 3.5)),
        },
        TestFn {
            name: "exp(0.7 q)",
            f: SliceFunction::exp(0.7, Quaternion::ONE, FunctionSide::Intrinsic).unwrap(),
            g: |z| (0.7 * z).exp(),
            dg: |z| 0.7 * (0.7 * z).exp(),
        },
    ]
}

fn on_slice(w: Complex64, j: Quaternion) -> Quaternion {
    Quaternion::real(w.re) + j * w.im
}

/// The scalar calculus of `kind` at `q` for the intrinsic stem `g`:
/// `S = f(q)`, `Q = Df(q)`, `F = Δf(q)`, `P2 = D̄f(q)`, each written in the
/// slice coordinates `q = u + J v`.
pub fn scalar_oracle(kind: CalculusKind, g: fn(Complex64) -> Complex64, dg: fn(Complex64) -> Complex64, q: Quaternion) -> Quaternion {
    let v = q.imag_norm();
    assert!(v > 1e-6, "oracle needs a non-real point");
    let j = q.imag() / v;
    let z = c(q.w, v);
    let (w, dw) = (g(z), dg(z));
    match kind {
        CalculusKind::S => on_slice(w, j),
        CalculusKind::Q => Quaternion::real(-2.0 * w.im / v),
        CalculusKind::P2 => on_slice(2.0 * dw, j) + Quaternion::real(2.0 * w.im / v),
        CalculusKind::F => Quaternion::real(-2.0 * dw.im / v) + j * (2.0 * dw.re / v - 2.0 * w.im / (v * v)),
    }
}

/// `S diag(values) S⁻¹` assembled componentwise.
pub fn intertwined(draw: &TupleDraw, values: &[Quaternion]) -> QOperator {
    let n = values.len();
    let comps: [DMatrix<f64>; 4] = std::array::from_fn(|l| {
        let d = DMatrix::from_fn(n, n, |r, c| if r == c { values[r].component(l) } else { 0.0 });
        &draw.s * d * &draw.s_inv
    });
    QOperator::from_components(&comps)
}

pub fn max_entry_diff(a: &QOperator, b: &QOperator) -> f64 {
    a.max_abs_diff(b)
}
