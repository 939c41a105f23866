//! Constants consumed by the decay theory: the Dirichlet-Laplacian
//! eigenvalue lambda1, the stabilization eigenvalue lambda0 of the
//! symmetrized linearization around the steady state, the coercivity
//! constant gamma1, the admissible exponential rate bound, and an
//! empirical estimate of the trilinear-form constant N.
//!
//! The symmetrized linearization is applied matrix-free: its advection
//! block is `1/2 (B + B^T)` where `B z = P conv(z, u_inf)`, with the
//! transpose expressed through the exact stencil adjoints from [`ops`].
//! That makes the Rayleigh identity
//! `<T z, z> = nu |grad z|^2 + b(z, u_inf, z)` hold at roundoff, which the
//! cross-checks rely on.

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::grid::GridSpec;
use crate::ops::{convection_operator, grad_mult_transpose, norms, trilinear_b};
use crate::saddle::{SaddleSolver, SolverSettings};
use serde::{Deserialize, Serialize};

/// Everything the verification layer needs, serialized into run manifests.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SpectralConstants {
    pub lambda1: f64,
    pub lambda0: f64,
    pub gamma1: f64,
    pub alpha_max: f64,
    pub n_estimate: f64,
    pub a1_satisfied: bool,
}

const EIG_TOL_LAMBDA1: f64 = 1e-10;
const EIG_TOL_A1: f64 = 1e-8;
const MAX_OUTER: usize = 400;

/// Smallest eigenvalue of the componentwise Dirichlet Laplacian by inverse
/// power iteration with the direct tensor inverse; relative eigen-residual
/// below 1e-10.
pub fn dirichlet_lambda1(grid: GridSpec) -> Result<f64> {
    let solver = SaddleSolver::new(grid);
    let fast = solver.projector().fast();
    let mut z = VelocityField::from_fn(grid, |x, y| x * y + 0.5, |x, y| x + y);
    let s = z.norm_l2();
    z.scale(1.0 / s);
    let mut lambda = 0.0;
    for it in 0..MAX_OUTER {
        let w = fast.solve_velocity(0.0, 1.0, &z);
        let nw = w.norm_l2();
        let mut zn = w;
        zn.scale(1.0 / nw);
        let lap = crate::ops::laplacian(&zn);
        lambda = -lap.dot(&zn);
        let mut r = lap;
        r.axpy(lambda, &zn);
        z = zn;
        if r.norm_l2() <= EIG_TOL_LAMBDA1 * lambda {
            return Ok(lambda);
        }
        let _ = it;
    }
    Err(Error::NonConvergence {
        what: "lambda1 inverse iteration",
        achieved: lambda,
        target: EIG_TOL_LAMBDA1,
        iterations: MAX_OUTER,
    })
}

/// Closed-form 5-point-stencil value `(8/h^2) sin^2(pi h / 2)`.
pub fn dirichlet_lambda1_closed_form(grid: GridSpec) -> f64 {
    let h = grid.h();
    let s = (std::f64::consts::PI * h / 2.0).sin();
    8.0 / (h * h) * s * s
}

/// Matrix-free application of the symmetrized linearization and helpers.
pub(crate) struct A1Operator<'a> {
    solver: &'a SaddleSolver,
    u_inf: &'a VelocityField,
    nu: f64,
}

impl<'a> A1Operator<'a> {
    pub fn new(solver: &'a SaddleSolver, u_inf: &'a VelocityField, nu: f64) -> Self {
        A1Operator { solver, u_inf, nu }
    }

    fn project(&self, z: &VelocityField) -> VelocityField {
        self.solver.projector().project_velocity(z)
    }

    /// `B z = P conv(z, u_inf)`.
    fn apply_b(&self, z: &VelocityField) -> VelocityField {
        let c = convection_operator(z, self.u_inf).expect("same grid");
        self.project(&c)
    }

    /// Adjoint of B on the ambient space:
    /// `B^T w = 1/2 gmT(u_inf, P w) - 1/2 gmT(P w, u_inf)`.
    fn apply_bt(&self, w: &VelocityField) -> VelocityField {
        let pw = self.project(w);
        let mut out = grad_mult_transpose(self.u_inf, &pw).expect("same grid");
        out.scale(0.5);
        out.axpy(-0.5, &grad_mult_transpose(&pw, self.u_inf).expect("same grid"));
        out
    }

    /// Symmetrized advection block `M = 1/2 P (B + B^T) P`.
    pub fn apply_m(&self, z: &VelocityField) -> VelocityField {
        let pz = self.project(z);
        let mut out = self.apply_b(&pz);
        out.axpy(1.0, &self.project(&self.apply_bt(&pz)));
        out.scale(0.5);
        out
    }

    /// `T z = nu (-P lap) z + M z` on the divergence-free subspace.
    pub fn apply_t(&self, z: &VelocityField) -> VelocityField {
        let mut out = self.solver.projector().stokes_apply(z);
        out.scale(self.nu);
        out.axpy(1.0, &self.apply_m(z));
        out
    }

    pub fn apply_s(&self, z: &VelocityField) -> VelocityField {
        self.solver.projector().stokes_apply(z)
    }

    /// Operator-norm estimate of M by plain power iteration (M is
    /// symmetric, so the dominant |eigenvalue| is the norm).
    pub fn m_norm_estimate(&self) -> f64 {
        let grid = self.solver.grid();
        let mut z = self.project(&VelocityField::from_fn(
            grid,
            |x, y| (x - 0.3) * y + 0.2,
            |x, y| x * (y - 0.6),
        ));
        let nz = z.norm_l2();
        if nz == 0.0 {
            return 0.0;
        }
        z.scale(1.0 / nz);
        let mut norm = 0.0;
        for _ in 0..40 {
            let w = self.apply_m(&z);
            let nw = w.norm_l2();
            if nw == 0.0 {
                return 0.0;
            }
            norm = nw;
            z = w;
            z.scale(1.0 / nw);
        }
        norm
    }

    /// Preconditioned CG for `op(z) = rhs` on the divergence-free
    /// subspace. Returns the solution or the signed curvature that proved
    /// the operator indefinite.
    fn pcg(
        &self,
        op: &dyn Fn(&VelocityField) -> VelocityField,
        precond: &dyn Fn(&VelocityField) -> VelocityField,
        rhs: &VelocityField,
        tol: f64,
        max_iter: usize,
    ) -> std::result::Result<VelocityField, PcgFailure> {
        let grid = self.solver.grid();
        let rhs_norm = rhs.norm_l2();
        let mut x = VelocityField::zeros(grid);
        if rhs_norm == 0.0 {
            return Ok(x);
        }
        let mut r = rhs.clone();
        let mut z = precond(&r);
        let mut q = z.clone();
        let mut rz = r.dot(&z);
        for _ in 0..max_iter {
            let aq = op(&q);
            let curv = q.dot(&aq);
            if curv <= 0.0 {
                return Err(PcgFailure::IndefiniteOperator);
            }
            let alpha = rz / curv;
            x.axpy(alpha, &q);
            r.axpy(-alpha, &aq);
            if r.norm_l2() <= tol * rhs_norm {
                return Ok(x);
            }
            z = precond(&r);
            let rz_new = r.dot(&z);
            let beta = rz_new / rz;
            rz = rz_new;
            let mut qn = z.clone();
            qn.axpy(beta, &q);
            q = qn;
        }
        Err(PcgFailure::NoConvergence)
    }

    /// Divergence-free solve of `(nu S + shift I) w = r` through one
    /// saddle solve; exact up to the Schur-CG tolerance.
    fn shifted_stokes_inverse(&self, shift: f64, r: &VelocityField) -> VelocityField {
        let settings = SolverSettings {
            tol: 1e-12,
            max_iter: 800,
            ..Default::default()
        };
        let (w, _, _) = self
            .solver
            .solve_schur(shift, self.nu, r, &settings)
            .expect("shifted Stokes solve");
        w
    }
}

enum PcgFailure {
    IndefiniteOperator,
    NoConvergence,
}

/// Minimal eigenvalue of the symmetrized linearized operator on the
/// divergence-free subspace (assumption A1), with its eigenfield
/// normalized to unit l2 norm. A negative value is a report that the
/// assumption fails, not an error.
///
/// Inverse power iteration at the certified lower-bound shift
/// `sigma <= nu lambda1 - |M| <= lambda0`; the shifted operator is solved
/// by PCG with a shifted-Stokes saddle preconditioner.
pub fn a1_eigenvalue(u_inf: &VelocityField, nu: f64) -> Result<(f64, VelocityField)> {
    let grid = u_inf.grid();
    let solver = SaddleSolver::new(grid);
    let op = A1Operator::new(&solver, u_inf, nu);
    let lambda1 = dirichlet_lambda1_closed_form(grid);

    let m_norm = op.m_norm_estimate();
    let mut sigma = nu * lambda1 - 1.1 * m_norm - 0.05 * nu * lambda1;

    // the preconditioner's Helmholtz solve lives on the full face space,
    // where nu S is only bounded below by nu lambda1; cap its shift there
    let precond_cap = 0.9 * nu * lambda1;

    'retry: for _attempt in 0..8 {
        let mut z = op.project(&VelocityField::from_fn(
            grid,
            |x, y| (x + 0.2) * (y + 0.4),
            |x, y| x - y * y,
        ));
        let nz = z.norm_l2();
        z.scale(1.0 / nz);
        let mut lambda = z.dot(&op.apply_t(&z));
        let shift = -sigma.min(precond_cap);
        let apply = |v: &VelocityField| {
            let mut out = op.apply_t(v);
            out.axpy(-sigma, v);
            out
        };
        let precond = |r: &VelocityField| op.shifted_stokes_inverse(shift, r);
        for _ in 0..MAX_OUTER {
            match op.pcg(&apply, &precond, &z, 1e-11, 600) {
                Ok(w) => {
                    let nw = w.norm_l2();
                    let mut zn = w;
                    zn.scale(1.0 / nw);
                    zn = op.project(&zn);
                    let tz = op.apply_t(&zn);
                    lambda = zn.dot(&tz);
                    let mut r = tz;
                    r.axpy(-lambda, &zn);
                    z = zn;
                    if r.norm_l2() <= EIG_TOL_A1 * lambda.abs().max(1e-30) {
                        let s = z.norm_l2();
                        z.scale(1.0 / s);
                        return Ok((lambda, z));
                    }
                }
                Err(PcgFailure::IndefiniteOperator) => {
                    // |M| was underestimated; back the shift away
                    sigma -= (lambda - sigma).abs().max(0.5 * nu * lambda1);
                    continue 'retry;
                }
                Err(PcgFailure::NoConvergence) => {
                    return Err(Error::NonConvergence {
                        what: "a1 inner PCG",
                        achieved: f64::NAN,
                        target: 1e-11,
                        iterations: 600,
                    });
                }
            }
        }
        return Err(Error::NonConvergence {
            what: "a1 inverse iteration",
            achieved: lambda,
            target: EIG_TOL_A1,
            iterations: MAX_OUTER,
        });
    }
    Err(Error::NonConvergence {
        what: "a1 shift search",
        achieved: f64::NAN,
        target: EIG_TOL_A1,
        iterations: 8,
    })
}

/// Smallest eigenvalue of the B-self-adjoint operator `B^{-1} A` (the
/// pencil `A x = theta B x` with SPD mass B) by Lanczos iteration in the
/// B inner product with full reorthogonalization. The returned value
/// satisfies `|theta - theta_exact| <= tol_abs` through the Ritz residual
/// bound `beta |y_last|`.
fn lanczos_pencil_smallest(
    start: VelocityField,
    apply_a: &dyn Fn(&VelocityField) -> VelocityField,
    apply_b: &dyn Fn(&VelocityField) -> VelocityField,
    solve_b: &dyn Fn(&VelocityField) -> VelocityField,
    purify: &dyn Fn(&VelocityField) -> VelocityField,
    tol_abs: f64,
    max_steps: usize,
    what: &'static str,
) -> Result<f64> {
    use nalgebra::DMatrix;
    let b0 = apply_b(&start);
    let nb = start.dot(&b0).max(0.0).sqrt();
    if nb == 0.0 {
        return Err(Error::InvalidParameter("lanczos start vector is zero".into()));
    }
    let mut vs = vec![start.scaled(1.0 / nb)];
    let mut bvs = vec![b0.scaled(1.0 / nb)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut beta_scale = 0.0f64;

    let ritz_smallest = |alphas: &[f64], betas: &[f64]| -> (f64, f64) {
        let m = alphas.len();
        let mut t = DMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = t.symmetric_eigen();
        let mut k = 0;
        for i in 1..m {
            if eig.eigenvalues[i] < eig.eigenvalues[k] {
                k = i;
            }
        }
        (eig.eigenvalues[k], eig.eigenvectors[(m - 1, k)].abs())
    };

    let mut theta = f64::NAN;
    for j in 0..max_steps {
        let avj = apply_a(&vs[j]);
        let alpha = vs[j].dot(&avj);
        alphas.push(alpha);
        let mut w = solve_b(&avj);
        w.axpy(-alpha, &vs[j]);
        if j > 0 {
            w.axpy(-betas[j - 1], &vs[j - 1]);
        }
        // full reorthogonalization in the B inner product, twice; keep the
        // iterate inside the constraint subspace so roundoff outside it
        // cannot masquerade as a new direction
        for _ in 0..2 {
            for i in 0..vs.len() {
                let c = w.dot(&bvs[i]);
                w.axpy(-c, &vs[i]);
            }
        }
        w = purify(&w);
        let bw = apply_b(&w);
        let beta = w.dot(&bw).max(0.0).sqrt();
        beta_scale = beta_scale.max(beta).max(alpha.abs());

        let m = alphas.len();
        if beta <= 1e-10 * beta_scale {
            // Krylov space exhausted: the tridiagonal section is exact
            let (th, _) = ritz_smallest(&alphas, &betas);
            return Ok(th);
        }
        if m >= 4 && (m % 5 == 0 || m == max_steps) {
            let (th, ylast) = ritz_smallest(&alphas, &betas);
            theta = th;
            if beta * ylast <= tol_abs {
                return Ok(th);
            }
        }
        betas.push(beta);
        vs.push(w.scaled(1.0 / beta));
        bvs.push(bw.scaled(1.0 / beta));
    }
    Err(Error::NonConvergence {
        what,
        achieved: theta,
        target: tol_abs,
        iterations: max_steps,
    })
}

/// Coercivity constant: smallest eigenvalue of the pencil `(T, S)` with
/// the H1-Gram operator S as mass. `gamma1 <= 0` is reported, not raised;
/// the caller decides whether the run may continue.
///
/// Written as `gamma1 = nu + mu_min` where `mu_min` is the smallest
/// eigenvalue of the pencil `(M, S)`. For small steady states the `(T, S)`
/// spectrum clusters within O(|u_inf|) of nu, so Lanczos runs on the
/// advection pencil directly, resolving the cluster edge at its own scale.
pub fn gamma1_constant(u_inf: &VelocityField, nu: f64) -> Result<f64> {
    let grid = u_inf.grid();
    let solver = SaddleSolver::new(grid);
    let op = A1Operator::new(&solver, u_inf, nu);
    if u_inf.norm_max() == 0.0 {
        // the advection block vanishes and the pencil is nu identically
        return Ok(nu);
    }
    let settings = SolverSettings {
        tol: 1e-13,
        max_iter: 1200,
        ..Default::default()
    };
    let s_inv = |r: &VelocityField| -> VelocityField {
        let (w, _, _) = solver
            .solve_schur(0.0, 1.0, r, &settings)
            .expect("Stokes inverse in gamma1");
        w
    };
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x67a1);
    let start = op.project(&VelocityField::random(grid, &mut rng));
    let dim = grid.interior_dof() - (grid.p_len() - 1);
    let mu_min = lanczos_pencil_smallest(
        start,
        &|z| op.apply_m(z),
        &|z| op.apply_s(z),
        &s_inv,
        &|z| op.project(z),
        1e-9 * nu,
        dim.min(400),
        "gamma1 pencil lanczos",
    )?;
    Ok(nu + mu_min)
}

/// Admissible exponential-rate bound
/// `lambda1 / (4 (1 + lambda1 kappa)) * min(nu, gamma1)`.
pub fn alpha_bound(lambda1: f64, gamma1: f64, nu: f64, kappa: f64) -> Result<f64> {
    if gamma1 <= 0.0 {
        return Err(Error::Gamma1NotPositive(gamma1));
    }
    Ok(lambda1 / (4.0 * (1.0 + lambda1 * kappa)) * nu.min(gamma1))
}

/// Activation time of the power weight:
/// `4 delta (1 + kappa lambda1) / lambda1 * max(1/nu, 1/gamma1)` for
/// `delta > 0`; the returned 0 encodes the `tau == 1` convention for
/// `delta == 0`.
pub fn t_bar(delta: f64, kappa: f64, lambda1: f64, nu: f64, gamma1: f64) -> f64 {
    if delta == 0.0 {
        0.0
    } else {
        4.0 * delta * (1.0 + kappa * lambda1) / lambda1 * (1.0 / nu).max(1.0 / gamma1)
    }
}

/// Empirical trilinear constant: max of |b(u,v,w)| over the product of H1
/// seminorms for seeded random triples. Recorded metadata only.
pub fn estimate_trilinear_n(grid: GridSpec, samples: usize, seed: u64) -> f64 {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let u = VelocityField::random(grid, &mut rng);
        let v = VelocityField::random(grid, &mut rng);
        let w = VelocityField::random(grid, &mut rng);
        let b = trilinear_b(&u, &v, &w).expect("same grid").abs();
        let den = norms(&u).h1_semi * norms(&v).h1_semi * norms(&w).h1_semi;
        if den > 0.0 {
            best = best.max(b / den);
        }
    }
    best
}

/// Smallest eigenvalue of the pencil `(T, I + kappa S)`: the predicted
/// slowest decay rate of the linearized evolution at this kappa (its
/// symmetric part; the skew advection block does not shift the field of
/// values). Used by the kappa-uniformity sweep to normalize fitted rates.
pub fn slowest_decay_rate(u_inf: &VelocityField, nu: f64, kappa: f64) -> Result<f64> {
    let grid = u_inf.grid();
    let solver = SaddleSolver::new(grid);
    let op = A1Operator::new(&solver, u_inf, nu);

    let mass = |v: &VelocityField| {
        let mut out = op.project(v);
        if kappa != 0.0 {
            out.axpy(kappa, &op.apply_s(v));
        }
        out
    };
    let mass_inv = |r: &VelocityField| -> VelocityField {
        let settings = SolverSettings {
            tol: 1e-13,
            max_iter: 1200,
            ..Default::default()
        };
        let (w, _, _) = solver
            .solve_schur(1.0, kappa, r, &settings)
            .expect("mass inverse in pencil rate");
        w
    };

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9a7e);
    let start = op.project(&VelocityField::random(grid, &mut rng));
    let dim = grid.interior_dof() - (grid.p_len() - 1);
    let lambda1 = dirichlet_lambda1_closed_form(grid);
    lanczos_pencil_smallest(
        start,
        &|z| op.apply_t(z),
        &mass,
        &mass_inv,
        &|z| op.project(z),
        1e-8 * nu * lambda1 / (1.0 + kappa * lambda1),
        dim.min(400),
        "pencil rate lanczos",
    )
}

impl SpectralConstants {
    /// Compute the full constants record for a steady state.
    pub fn compute(u_inf: &VelocityField, nu: f64, kappa: f64) -> Result<Self> {
        let grid = u_inf.grid();
        let lambda1 = dirichlet_lambda1(grid)?;
        let (lambda0, _) = a1_eigenvalue(u_inf, nu)?;
        let gamma1 = gamma1_constant(u_inf, nu)?;
        let alpha_max = if gamma1 > 0.0 {
            alpha_bound(lambda1, gamma1, nu, kappa)?
        } else {
            0.0
        };
        let n_samples = if grid.nx() <= 32 { 400 } else { 100 };
        let n_estimate = estimate_trilinear_n(grid, n_samples, 0x5eed);
        Ok(SpectralConstants {
            lambda1,
            lambda0,
            gamma1,
            alpha_max,
            n_estimate,
            a1_satisfied: lambda0 > 0.0,
        })
    }
}
