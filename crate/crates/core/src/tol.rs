//! Centralized numeric tolerance. Every approximate comparison in the crate
//! goes through these helpers so the whole suite has a single knob.

use num_complex::Complex64;

/// Global absolute tolerance.
pub const TOL: f64 = 1e-9;

/// `|a - b| < TOL`
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() < TOL
}

/// `|x| < TOL`
pub fn approx_zero(x: f64) -> bool {
    x.abs() < TOL
}

/// `|z| < TOL` for a complex value.
pub fn capprox_zero(z: Complex64) -> bool {
    z.norm() < TOL
}

/// `|a - b| < TOL` for complex values.
pub fn capprox_eq(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < TOL
}
