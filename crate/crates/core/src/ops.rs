//! Discrete differential and convection operators on the MAC grid.
//!
//! All stencils use the uniform h^2 quadrature weight, so operator
//! adjoints are plain matrix transposes. The advection kernels are written
//! as a single coefficient enumeration evaluated in gather (forward) or
//! scatter (transpose) mode, which makes the discrete adjoint identities
//! exact rather than approximate.

use crate::error::Result;
use crate::field::{Norms, PressureField, VelocityField};

/// Componentwise 5-point Laplacian with Dirichlet reflection ghosts.
/// Output boundary faces are zero.
pub fn laplacian(f: &VelocityField) -> VelocityField {
    let grid = f.grid();
    let n = grid.nx();
    let h2 = grid.h() * grid.h();
    let mut out = VelocityField::zeros(grid);
    for j in 0..n {
        for i in 1..n {
            let c = f.u(i + 1, j) + f.u(i - 1, j) + f.u_ghost(i, j as isize + 1)
                + f.u_ghost(i, j as isize - 1)
                - 4.0 * f.u(i, j);
            *out.u_mut(i, j) = c / h2;
        }
    }
    for j in 1..n {
        for i in 0..n {
            let c = f.v_ghost(i as isize + 1, j) + f.v_ghost(i as isize - 1, j) + f.v(i, j + 1)
                + f.v(i, j - 1)
                - 4.0 * f.v(i, j);
            *out.v_mut(i, j) = c / h2;
        }
    }
    out
}

/// Cell-centered face-difference divergence.
pub fn divergence(f: &VelocityField) -> PressureField {
    let grid = f.grid();
    let n = grid.nx();
    let h = grid.h();
    let mut out = PressureField::zeros(grid);
    for j in 0..n {
        for i in 0..n {
            *out.at_mut(i, j) =
                (f.u(i + 1, j) - f.u(i, j)) / h + (f.v(i, j + 1) - f.v(i, j)) / h;
        }
    }
    out
}

/// Face-centered pressure gradient; zero on boundary faces so that
/// `<gradient(p), v> = -<p, divergence(v)>` holds exactly for fields with
/// zero boundary faces.
pub fn gradient(p: &PressureField) -> VelocityField {
    let grid = p.grid();
    let n = grid.nx();
    let h = grid.h();
    let mut out = VelocityField::zeros(grid);
    for j in 0..n {
        for i in 1..n {
            *out.u_mut(i, j) = (p.at(i, j) - p.at(i - 1, j)) / h;
        }
    }
    for j in 1..n {
        for i in 0..n {
            *out.v_mut(i, j) = (p.at(i, j) - p.at(i, j - 1)) / h;
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Gather,
    Scatter,
}

/// Shared kernel for `advect` / `advect_transpose`: enumerates the matrix
/// of `w -> vel . grad w` (centered differences, 4-point transverse
/// averages, reflection ghosts folded into real columns) and applies it or
/// its transpose.
fn advect_kernel(vel: &VelocityField, w: &VelocityField, mode: Mode) -> VelocityField {
    let grid = vel.grid();
    let n = grid.nx();
    let inv2h = 0.5 / grid.h();
    let mut out = VelocityField::zeros(grid);

    // entry: row face <- coeff * col face, both in the u component
    let uu = |row: (usize, usize), col: (usize, usize), c: f64, w: &VelocityField,
                  out: &mut VelocityField| match mode {
        Mode::Gather => *out.u_mut(row.0, row.1) += c * w.u(col.0, col.1),
        Mode::Scatter => *out.u_mut(col.0, col.1) += c * w.u(row.0, row.1),
    };
    for j in 0..n {
        for i in 1..n {
            let a = vel.u(i, j) * inv2h;
            let vbar = 0.25
                * (vel.v(i - 1, j) + vel.v(i, j) + vel.v(i - 1, j + 1) + vel.v(i, j + 1));
            let b = vbar * inv2h;
            uu((i, j), (i + 1, j), a, w, &mut out);
            uu((i, j), (i - 1, j), -a, w, &mut out);
            // +y neighbor, ghost above the top wall reflects with sign flip
            if j + 1 < n {
                uu((i, j), (i, j + 1), b, w, &mut out);
            } else {
                uu((i, j), (i, n - 1), -b, w, &mut out);
            }
            if j > 0 {
                uu((i, j), (i, j - 1), -b, w, &mut out);
            } else {
                uu((i, j), (i, 0), b, w, &mut out);
            }
        }
    }

    let vv = |row: (usize, usize), col: (usize, usize), c: f64, w: &VelocityField,
                  out: &mut VelocityField| match mode {
        Mode::Gather => *out.v_mut(row.0, row.1) += c * w.v(col.0, col.1),
        Mode::Scatter => *out.v_mut(col.0, col.1) += c * w.v(row.0, row.1),
    };
    for j in 1..n {
        for i in 0..n {
            let ubar = 0.25
                * (vel.u(i, j - 1) + vel.u(i + 1, j - 1) + vel.u(i, j) + vel.u(i + 1, j));
            let a = ubar * inv2h;
            let b = vel.v(i, j) * inv2h;
            vv((i, j), (i, j + 1), b, w, &mut out);
            vv((i, j), (i, j - 1), -b, w, &mut out);
            if i + 1 < n {
                vv((i, j), (i + 1, j), a, w, &mut out);
            } else {
                vv((i, j), (n - 1, j), -a, w, &mut out);
            }
            if i > 0 {
                vv((i, j), (i - 1, j), -a, w, &mut out);
            } else {
                vv((i, j), (0, j), a, w, &mut out);
            }
        }
    }

    if mode == Mode::Scatter {
        zero_boundary(&mut out);
    }
    out
}

fn zero_boundary(f: &mut VelocityField) {
    let n = f.grid().nx();
    for j in 0..n {
        *f.u_mut(0, j) = 0.0;
        *f.u_mut(n, j) = 0.0;
    }
    for i in 0..n {
        *f.v_mut(i, 0) = 0.0;
        *f.v_mut(i, n) = 0.0;
    }
}

/// Advective derivative `vel . grad w` with centered interpolation.
pub fn advect(vel: &VelocityField, w: &VelocityField) -> Result<VelocityField> {
    vel.grid().check_same(&w.grid())?;
    Ok(advect_kernel(vel, w, Mode::Gather))
}

/// Exact discrete transpose of [`advect`] in its second argument.
pub fn advect_transpose(vel: &VelocityField, phi: &VelocityField) -> Result<VelocityField> {
    vel.grid().check_same(&phi.grid())?;
    Ok(advect_kernel(vel, phi, Mode::Scatter))
}

/// Same bilinear kernel viewed as linear in the advecting field:
/// `grad_mult(w, vel) == advect(vel, w)`, a pointwise multiplication of
/// `vel` by the interpolated gradient of `w`.
fn grad_mult_kernel(w: &VelocityField, vel: &VelocityField, mode: Mode) -> VelocityField {
    let grid = w.grid();
    let n = grid.nx();
    let inv2h = 0.5 / grid.h();
    let mut out = VelocityField::zeros(grid);

    for j in 0..n {
        for i in 1..n {
            let dxwu = (w.u(i + 1, j) - w.u(i - 1, j)) * inv2h;
            let dywu =
                (w.u_ghost(i, j as isize + 1) - w.u_ghost(i, j as isize - 1)) * inv2h;
            let q = 0.25 * dywu;
            match mode {
                Mode::Gather => {
                    *out.u_mut(i, j) += dxwu * vel.u(i, j)
                        + q * (vel.v(i - 1, j)
                            + vel.v(i, j)
                            + vel.v(i - 1, j + 1)
                            + vel.v(i, j + 1));
                }
                Mode::Scatter => {
                    let r = vel.u(i, j);
                    *out.u_mut(i, j) += dxwu * r;
                    *out.v_mut(i - 1, j) += q * r;
                    *out.v_mut(i, j) += q * r;
                    *out.v_mut(i - 1, j + 1) += q * r;
                    *out.v_mut(i, j + 1) += q * r;
                }
            }
        }
    }
    for j in 1..n {
        for i in 0..n {
            let dywv = (w.v(i, j + 1) - w.v(i, j - 1)) * inv2h;
            let dxwv =
                (w.v_ghost(i as isize + 1, j) - w.v_ghost(i as isize - 1, j)) * inv2h;
            let q = 0.25 * dxwv;
            match mode {
                Mode::Gather => {
                    *out.v_mut(i, j) += dywv * vel.v(i, j)
                        + q * (vel.u(i, j - 1)
                            + vel.u(i + 1, j - 1)
                            + vel.u(i, j)
                            + vel.u(i + 1, j));
                }
                Mode::Scatter => {
                    let r = vel.v(i, j);
                    *out.v_mut(i, j) += dywv * r;
                    *out.u_mut(i, j - 1) += q * r;
                    *out.u_mut(i + 1, j - 1) += q * r;
                    *out.u_mut(i, j) += q * r;
                    *out.u_mut(i + 1, j) += q * r;
                }
            }
        }
    }

    if mode == Mode::Scatter {
        zero_boundary(&mut out);
    }
    out
}

/// `vel . grad w` as a pointwise operator in `vel`; identical values to
/// `advect(vel, w)`.
pub fn grad_mult(w: &VelocityField, vel: &VelocityField) -> Result<VelocityField> {
    w.grid().check_same(&vel.grid())?;
    Ok(grad_mult_kernel(w, vel, Mode::Gather))
}

/// Exact discrete transpose of [`grad_mult`] in its second argument.
pub fn grad_mult_transpose(w: &VelocityField, phi: &VelocityField) -> Result<VelocityField> {
    w.grid().check_same(&phi.grid())?;
    Ok(grad_mult_kernel(w, phi, Mode::Scatter))
}

/// Skew-symmetrized trilinear form
/// `b(v, w, phi) = 1/2 (v.grad w, phi) - 1/2 (v.grad phi, w)`.
pub fn trilinear_b(v: &VelocityField, w: &VelocityField, phi: &VelocityField) -> Result<f64> {
    v.grid().check_same(&w.grid())?;
    v.grid().check_same(&phi.grid())?;
    let cw = advect_kernel(v, w, Mode::Gather);
    let cphi = advect_kernel(v, phi, Mode::Gather);
    Ok(0.5 * cw.dot(phi) - 0.5 * cphi.dot(w))
}

/// Residual form of the convection term: `<convection_operator(v, w), phi>`
/// equals `trilinear_b(v, w, phi)` for every `phi` (including boundary-zero
/// test fields), exactly in floating point up to roundoff.
pub fn convection_operator(v: &VelocityField, w: &VelocityField) -> Result<VelocityField> {
    v.grid().check_same(&w.grid())?;
    let mut out = advect_kernel(v, w, Mode::Gather);
    let ct = advect_kernel(v, w, Mode::Scatter);
    out.scale(0.5);
    out.axpy(-0.5, &ct);
    Ok(out)
}

/// Midpoint-rule l2, energy H1 seminorm (via `<-lap f, f>`), and max norm.
pub fn norms(f: &VelocityField) -> Norms {
    let lap = laplacian(f);
    let h1_sq = -lap.dot(f);
    Norms {
        l2: f.norm_l2(),
        h1_semi: h1_sq.max(0.0).sqrt(),
        max: f.norm_max(),
    }
}

/// Pressure norms; the H1 seminorm is the l2 norm of the face gradient.
pub fn pressure_norms(p: &PressureField) -> Norms {
    Norms {
        l2: p.norm_l2(),
        h1_semi: gradient(p).norm_l2(),
        max: p.norm_max(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    #[test]
    fn laplacian_of_zero_is_zero() {
        let grid = GridSpec::square(8).unwrap();
        let z = VelocityField::zeros(grid);
        assert_eq!(laplacian(&z).norm_max(), 0.0);
    }

    #[test]
    fn laplacian_of_sine_mode() {
        // f = (sin(pi x) sin(pi y), 0) has Laplacian -2 pi^2 f; the discrete
        // operator reproduces it with O(h^2) interior error.
        let grid = GridSpec::square(64).unwrap();
        let f = VelocityField::from_fn(grid, |x, y| (PI * x).sin() * (PI * y).sin(), |_, _| 0.0);
        let lap = laplacian(&f);
        let n = grid.nx();
        let mut worst: f64 = 0.0;
        for j in 1..n - 1 {
            for i in 2..n - 1 {
                let want = -2.0 * PI * PI * f.u(i, j);
                worst = worst.max((lap.u(i, j) - want).abs());
            }
        }
        // |f''''| ~ pi^4, error ~ h^2/12 * 2 * pi^4 ~ 4e-3 at n = 64
        assert!(worst < 8e-3, "interior laplacian error {worst}");
    }

    #[test]
    fn laplacian_is_self_adjoint() {
        let grid = GridSpec::square(8).unwrap();
        let mut r = rng();
        for _ in 0..5 {
            let f = VelocityField::random(grid, &mut r);
            let g = VelocityField::random(grid, &mut r);
            let a = laplacian(&f).dot(&g);
            let b = laplacian(&g).dot(&f);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
        }
    }

    #[test]
    fn gradient_divergence_adjoint() {
        let grid = GridSpec::square(16).unwrap();
        let mut r = rng();
        for _ in 0..10 {
            let p = PressureField::random(grid, &mut r);
            let v = VelocityField::random(grid, &mut r);
            let lhs = gradient(&p).dot(&v);
            let rhs = -p.dot(&divergence(&v));
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let grid = GridSpec::square(8).unwrap();
        let p = PressureField::from_fn(grid, |_, _| 3.25);
        assert_eq!(gradient(&p).norm_max(), 0.0);
    }

    #[test]
    fn gradient_of_linear_is_one() {
        let grid = GridSpec::square(16).unwrap();
        let p = PressureField::from_fn(grid, |x, _| x);
        let g = gradient(&p);
        let n = grid.nx();
        for j in 0..n {
            for i in 1..n {
                assert!((g.u(i, j) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn divergence_of_linear_profile() {
        // u = x on interior faces gives divergence 1 in every cell away from
        // the side walls where the clipped boundary value enters.
        let grid = GridSpec::square(8).unwrap();
        let f = VelocityField::from_fn(grid, |x, _| x, |_, _| 0.0);
        let d = divergence(&f);
        let n = grid.nx();
        for j in 0..n {
            for i in 1..n - 1 {
                assert!((d.at(i, j) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn advect_matches_grad_mult() {
        let grid = GridSpec::square(16).unwrap();
        let mut r = rng();
        for _ in 0..5 {
            let vel = VelocityField::random(grid, &mut r);
            let w = VelocityField::random(grid, &mut r);
            let a = advect(&vel, &w).unwrap();
            let b = grad_mult(&w, &vel).unwrap();
            assert!(a.sub(&b).norm_max() < 1e-13 * a.norm_max().max(1.0));
        }
    }

    #[test]
    fn advect_transpose_is_adjoint() {
        let grid = GridSpec::square(12).unwrap();
        let mut r = rng();
        for _ in 0..5 {
            let vel = VelocityField::random(grid, &mut r);
            let w = VelocityField::random(grid, &mut r);
            let phi = VelocityField::random(grid, &mut r);
            let lhs = advect(&vel, &w).unwrap().dot(&phi);
            let rhs = w.dot(&advect_transpose(&vel, &phi).unwrap());
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn grad_mult_transpose_is_adjoint() {
        let grid = GridSpec::square(12).unwrap();
        let mut r = rng();
        for _ in 0..5 {
            let w = VelocityField::random(grid, &mut r);
            let vel = VelocityField::random(grid, &mut r);
            let phi = VelocityField::random(grid, &mut r);
            let lhs = grad_mult(&w, &vel).unwrap().dot(&phi);
            let rhs = vel.dot(&grad_mult_transpose(&w, &phi).unwrap());
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn trilinear_annihilation_and_skew() {
        let grid = GridSpec::square(16).unwrap();
        let mut r = rng();
        for _ in 0..10 {
            let v = VelocityField::random(grid, &mut r);
            let w = VelocityField::random(grid, &mut r);
            let phi = VelocityField::random(grid, &mut r);
            let scale = v.norm_l2() * w.norm_l2() * phi.norm_l2();
            assert!(trilinear_b(&v, &w, &w).unwrap().abs() <= 1e-12 * scale.max(1.0));
            let s = trilinear_b(&v, &w, &phi).unwrap() + trilinear_b(&v, &phi, &w).unwrap();
            assert!(s.abs() <= 1e-12 * scale.max(1.0));
        }
    }

    #[test]
    fn trilinear_zero_advecting_field() {
        let grid = GridSpec::square(8).unwrap();
        let mut r = rng();
        let w = VelocityField::random(grid, &mut r);
        let phi = VelocityField::random(grid, &mut r);
        let z = VelocityField::zeros(grid);
        assert_eq!(trilinear_b(&z, &w, &phi).unwrap(), 0.0);
        assert_eq!(convection_operator(&z, &w).unwrap().norm_max(), 0.0);
    }

    #[test]
    fn convection_pairing_identity() {
        let grid = GridSpec::square(12).unwrap();
        let mut r = rng();
        for _ in 0..10 {
            let v = VelocityField::random(grid, &mut r);
            let w = VelocityField::random(grid, &mut r);
            let phi = VelocityField::random(grid, &mut r);
            let lhs = convection_operator(&v, &w).unwrap().dot(&phi);
            let rhs = trilinear_b(&v, &w, &phi).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn convection_self_pairing_vanishes() {
        let grid = GridSpec::square(12).unwrap();
        let mut r = rng();
        let v = VelocityField::random(grid, &mut r);
        let w = VelocityField::random(grid, &mut r);
        let c = convection_operator(&v, &w).unwrap();
        assert!(c.dot(&w).abs() <= 1e-12 * c.norm_l2() * w.norm_l2());
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = VelocityField::zeros(GridSpec::square(8).unwrap());
        let b = VelocityField::zeros(GridSpec::square(16).unwrap());
        assert!(advect(&a, &b).is_err());
        assert!(trilinear_b(&a, &a, &b).is_err());
    }

    #[test]
    fn scalar_sine_l2_norm() {
        // l2 of sin(pi x) sin(pi y) sampled at cell centers: integral is 1/4,
        // so the norm approaches 1/2 with O(h^2) quadrature error.
        let grid = GridSpec::square(64).unwrap();
        let p = PressureField::from_fn(grid, |x, y| (PI * x).sin() * (PI * y).sin());
        assert!((p.norm_l2() - 0.5).abs() < 2e-4);
    }
}
