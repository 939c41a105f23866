//! Manufactured steady solution used by the convergence tests and the
//! `manufactured` forcing family:
//!
//! ```text
//! psi(x, y) = x^2 (1-x)^2 y^2 (1-y)^2,   u* = curl(psi),   p* = x y - 1/4
//! ```
//!
//! `u*` is exactly divergence-free with zero boundary values; `p*` has
//! exact zero mean under midpoint sampling. The forcing fields are the
//! closed-form momentum residuals of `(u*, p*)`.

use crate::field::{PressureField, VelocityField};
use crate::grid::GridSpec;

/// q(s) = s^2 (1-s)^2 and its first four derivatives.
#[inline]
fn q0(s: f64) -> f64 {
    let t = s * (1.0 - s);
    t * t
}
#[inline]
fn q1(s: f64) -> f64 {
    2.0 * s * (1.0 - s) * (1.0 - 2.0 * s)
}
#[inline]
fn q2(s: f64) -> f64 {
    2.0 - 12.0 * s + 12.0 * s * s
}
#[inline]
fn q3(s: f64) -> f64 {
    -12.0 + 24.0 * s
}

pub fn stream(x: f64, y: f64) -> f64 {
    q0(x) * q0(y)
}

pub fn exact_u(x: f64, y: f64) -> f64 {
    q0(x) * q1(y)
}

pub fn exact_v(x: f64, y: f64) -> f64 {
    -q1(x) * q0(y)
}

pub fn exact_p(x: f64, y: f64) -> f64 {
    x * y - 0.25
}

/// x-component of `-nu lap u* + u*.grad u* + grad p*`.
pub fn forcing_u(x: f64, y: f64, nu: f64) -> f64 {
    let visc = -nu * (q2(x) * q1(y) + q0(x) * q3(y));
    let conv = q0(x) * q1(x) * (q1(y) * q1(y) - q0(y) * q2(y));
    visc + conv + y
}

/// y-component of `-nu lap u* + u*.grad u* + grad p*`.
pub fn forcing_v(x: f64, y: f64, nu: f64) -> f64 {
    let visc = nu * (q3(x) * q0(y) + q1(x) * q2(y));
    let conv = q0(y) * q1(y) * (q1(x) * q1(x) - q0(x) * q2(x));
    visc + conv + x
}

/// Forcing without the convection term (Stokes manufactured problem).
pub fn stokes_forcing_u(x: f64, y: f64, nu: f64) -> f64 {
    -nu * (q2(x) * q1(y) + q0(x) * q3(y)) + y
}

pub fn stokes_forcing_v(x: f64, y: f64, nu: f64) -> f64 {
    nu * (q3(x) * q0(y) + q1(x) * q2(y)) + x
}

pub fn exact_velocity(grid: GridSpec) -> VelocityField {
    VelocityField::from_fn(grid, exact_u, exact_v)
}

pub fn exact_pressure(grid: GridSpec) -> PressureField {
    PressureField::from_fn(grid, exact_p)
}

pub fn nse_forcing(grid: GridSpec, nu: f64) -> VelocityField {
    VelocityField::from_fn(grid, |x, y| forcing_u(x, y, nu), |x, y| forcing_v(x, y, nu))
}

pub fn stokes_forcing(grid: GridSpec, nu: f64) -> VelocityField {
    VelocityField::from_fn(
        grid,
        |x, y| stokes_forcing_u(x, y, nu),
        |x, y| stokes_forcing_v(x, y, nu),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fourth-order central difference.
    fn d1(f: impl Fn(f64) -> f64, s: f64) -> f64 {
        let h = 1e-4;
        (-f(s + 2.0 * h) + 8.0 * f(s + h) - 8.0 * f(s - h) + f(s - 2.0 * h)) / (12.0 * h)
    }

    fn d2(f: impl Fn(f64) -> f64, s: f64) -> f64 {
        let h = 1e-4;
        (-f(s + 2.0 * h) + 16.0 * f(s + h) - 30.0 * f(s) + 16.0 * f(s - h) - f(s - 2.0 * h))
            / (12.0 * h * h)
    }

    #[test]
    fn forcing_matches_momentum_residual() {
        let nu = 0.7;
        for &(x, y) in &[(0.3, 0.4), (0.61, 0.22), (0.15, 0.83), (0.5, 0.5)] {
            let lap_u = d2(|s| exact_u(s, y), x) + d2(|s| exact_u(x, s), y);
            let lap_v = d2(|s| exact_v(s, y), x) + d2(|s| exact_v(x, s), y);
            let ux = d1(|s| exact_u(s, y), x);
            let uy = d1(|s| exact_u(x, s), y);
            let vx = d1(|s| exact_v(s, y), x);
            let vy = d1(|s| exact_v(x, s), y);
            let u = exact_u(x, y);
            let v = exact_v(x, y);
            let fu = -nu * lap_u + u * ux + v * uy + y;
            let fv = -nu * lap_v + u * vx + v * vy + x;
            assert!((fu - forcing_u(x, y, nu)).abs() < 1e-9, "fu at ({x},{y})");
            assert!((fv - forcing_v(x, y, nu)).abs() < 1e-9, "fv at ({x},{y})");
            // divergence of the exact field
            assert!((ux + vy).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_fields_have_boundary_zero_and_mean_zero() {
        let grid = GridSpec::square(16).unwrap();
        let u = exact_velocity(grid);
        assert!(u.boundary_is_zero());
        let d = crate::ops::divergence(&u);
        // sampled curl is not exactly MAC-divergence-free, only O(h^2)
        assert!(d.norm_max() < 0.1);
        let p = exact_pressure(grid);
        assert!(p.mean().abs() < 1e-14);
    }
}
