//! Closed-form solutions for the circle benchmark `ẋ = -sin 2x` on
//! `[0, 2π)` with uniform initial density 1.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// `(e^{2t} sin²x + e^{-2t} cos²x)^{-1}`, evaluated as
/// `(cosh 2t - sinh 2t · cos 2x)^{-1}` so that `t = 0` gives exactly 1.
pub fn exact_s1_density(x: f64, t: f64) -> f64 {
    1.0 / ((2.0 * t).cosh() - (2.0 * t).sinh() * (2.0 * x).cos())
}

/// Time-`t` flow map of `ẋ = -sin 2x`, wrapped to `[0, 2π)`.
///
/// Points move toward the stable equilibria `0` and `π` and never leave
/// their quarter period; the multiples of `π/2` are fixed.
pub fn exact_s1_flow(x: f64, t: f64) -> f64 {
    let q = x / FRAC_PI_2;
    if (q - q.round()).abs() < 1e-15 * q.abs().max(1.0) {
        return wrap(x);
    }
    let base = (x / PI).round() * PI;
    let u = x - base;
    wrap(base + ((-2.0 * t).exp() * u.tan()).atan())
}

fn wrap(x: f64) -> f64 {
    crate::particles::wrap(x, TAU)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S1Function {
    /// Transported `sin x`.
    F,
    /// Transported `cos x`.
    G,
    /// Transported `sin x cos x`.
    H,
}

/// Solutions of the transport equation with initial data `sin x`, `cos x`
/// and their product.
pub fn exact_s1_functions(which: S1Function, x: f64, t: f64) -> f64 {
    let (s, c) = x.sin_cos();
    let f = || s / (s * s + (-4.0 * t).exp() * c * c).sqrt();
    let g = || c / ((4.0 * t).exp() * s * s + c * c).sqrt();
    match which {
        S1Function::F => f(),
        S1Function::G => g(),
        S1Function::H => f() * g(),
    }
}
