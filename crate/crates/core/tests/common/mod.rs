//! Shared test oracles, independent of the library's evaluation paths.

#![allow(dead_code)]

use agglo_core::model::FluxModel;

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(f, a, fa, m, fm, flm);
        let right = simpson(f, m, fm, b, fb, frm);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
                + rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(f, a, fa, b, fb, fm);
    rec(f, a, fa, b, fb, fm, whole, tol, 48)
}

/// Quadrature oracle for Φ₊(v) = ∫₀ᵛ max{0, Φ'(s)} ds.
pub fn phi_plus_oracle(flux: &FluxModel, v: f64) -> f64 {
    adaptive_simpson(&|s| flux.phi_prime(s).max(0.0), 0.0, v, 1e-10)
}

/// Quadrature oracle for Φ₋(v) = ∫₀ᵛ min{0, Φ'(s)} ds.
pub fn phi_minus_oracle(flux: &FluxModel, v: f64) -> f64 {
    adaptive_simpson(&|s| flux.phi_prime(s).min(0.0), 0.0, v, 1e-10)
}
