//! Linear saddle-point solves `(a I - b Lap) w + grad p = rhs`,
//! `div w = 0`, `w = 0` on the boundary.
//!
//! Primary method: conjugate gradients on the pressure Schur complement
//! `D (a I - b Lap)^{-1} G` with the Cahouet-Chabard preconditioner
//! `a (DG)^{-1} + b I`; the inner Helmholtz inverse is the direct tensor
//! solver, so the only iteration error lives in the pressure. A dense LU
//! of the full KKT system backs the `direct_sparse` method on small grids
//! and doubles as a cross-check oracle.

use crate::dense::{assemble_velocity_op, sym_eigenvalues};
use crate::error::{Error, Result};
use crate::field::{PressureField, VelocityField};
use crate::grid::GridSpec;
use crate::ops::{divergence, gradient, laplacian};
use crate::projection::Projector;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    SchurCg,
    DirectSparse,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    pub method: SolverMethod,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol: 1e-10,
            max_iter: 500,
            method: SolverMethod::SchurCg,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "solver tol must be in (0, 1), got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Coefficients and right-hand side of one saddle problem.
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    pub mass_coef: f64,
    pub stiffness_coef: f64,
    pub rhs: VelocityField,
}

impl SaddleProblem {
    pub fn new(mass_coef: f64, stiffness_coef: f64, rhs: VelocityField) -> Result<Self> {
        if !(mass_coef >= 0.0) || !(stiffness_coef >= 0.0) || mass_coef + stiffness_coef <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need a >= 0, b >= 0, a + b > 0; got a = {mass_coef}, b = {stiffness_coef}"
            )));
        }
        Ok(SaddleProblem {
            mass_coef,
            stiffness_coef,
            rhs,
        })
    }
}

/// Residuals of a completed solve, evaluated with the stencil operators
/// independently of the solver internals.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualReport {
    pub iterations: usize,
    pub momentum_residual: f64,
    pub divergence_residual: f64,
    pub converged: bool,
}

/// Saddle solver context for one grid.
pub struct SaddleSolver {
    proj: Projector,
}

impl SaddleSolver {
    pub fn new(grid: GridSpec) -> Self {
        SaddleSolver {
            proj: Projector::new(grid),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.proj.grid()
    }

    pub fn projector(&self) -> &Projector {
        &self.proj
    }

    pub fn solve(
        &self,
        prob: &SaddleProblem,
        settings: &SolverSettings,
    ) -> Result<(VelocityField, PressureField, ResidualReport)> {
        settings.validate()?;
        self.grid().check_same(&prob.rhs.grid())?;
        if !(prob.mass_coef >= 0.0) || prob.mass_coef + prob.stiffness_coef <= 0.0 {
            return Err(Error::InvalidParameter(
                "saddle coefficients must satisfy a >= 0, a + b > 0".into(),
            ));
        }
        match settings.method {
            SolverMethod::SchurCg => {
                self.solve_schur(prob.mass_coef, prob.stiffness_coef, &prob.rhs, settings)
            }
            SolverMethod::DirectSparse => {
                self.solve_direct(prob.mass_coef, prob.stiffness_coef, &prob.rhs)
            }
        }
    }

    /// Schur-CG path without the sign restriction on `a`; the eigensolvers
    /// use negative shifts that keep `a + b * lambda` positive.
    pub(crate) fn solve_schur(
        &self,
        a: f64,
        b: f64,
        rhs: &VelocityField,
        settings: &SolverSettings,
    ) -> Result<(VelocityField, PressureField, ResidualReport)> {
        let grid = self.grid();
        let fast = self.proj.fast();
        let apply_s = |p: &PressureField| -> PressureField {
            let g = gradient(p);
            let w = fast.solve_velocity(a, b, &g);
            divergence(&w)
        };
        // preconditioner for -S: b * r + a * (-DG)^{-1} r, projected mean-zero
        let precond = |r: &PressureField| -> PressureField {
            let mut out = r.clone();
            out.scale(b);
            if a != 0.0 {
                out.axpy(-a, &fast.solve_neumann(r));
            }
            out.subtract_mean();
            out
        };

        let w0 = fast.solve_velocity(a, b, rhs);
        let mut rhs_p = divergence(&w0);
        rhs_p.subtract_mean();
        let rhs_p_norm = rhs_p.norm_l2();

        let mut p = PressureField::zeros(grid);
        let mut iterations = 0;
        if rhs_p_norm > 0.0 {
            // CG on (-S) p = -rhs_p
            let mut r = rhs_p.clone();
            r.scale(-1.0);
            let mut z = precond(&r);
            let mut q = z.clone();
            let mut rz = r.dot(&z);
            let mut converged = false;
            for it in 1..=settings.max_iter {
                iterations = it;
                let mut sq = apply_s(&q);
                sq.scale(-1.0);
                sq.subtract_mean();
                let alpha = rz / q.dot(&sq);
                p.axpy(alpha, &q);
                r.axpy(-alpha, &sq);
                if r.norm_l2() <= settings.tol * rhs_p_norm {
                    converged = true;
                    break;
                }
                z = precond(&r);
                let rz_new = r.dot(&z);
                let beta = rz_new / rz;
                rz = rz_new;
                let mut qn = z.clone();
                qn.axpy(beta, &q);
                q = qn;
            }
            if !converged {
                let achieved = r.norm_l2() / rhs_p_norm;
                return Err(Error::NonConvergence {
                    what: "schur_cg",
                    achieved,
                    target: settings.tol,
                    iterations,
                });
            }
        }
        p.subtract_mean();
        let mut f = rhs.clone();
        f.axpy(-1.0, &gradient(&p));
        let w = fast.solve_velocity(a, b, &f);
        let report = self.residual_report(a, b, rhs, &w, &p, iterations, settings.tol);
        Ok((w, p, report))
    }

    fn residual_report(
        &self,
        a: f64,
        b: f64,
        rhs: &VelocityField,
        w: &VelocityField,
        p: &PressureField,
        iterations: usize,
        tol: f64,
    ) -> ResidualReport {
        let mut res = w.scaled(a);
        res.axpy(-b, &laplacian(w));
        res.axpy(1.0, &gradient(p));
        res.axpy(-1.0, rhs);
        let scale = rhs.norm_l2().max(f64::MIN_POSITIVE);
        let momentum = res.norm_l2() / scale;
        let h = self.grid().h();
        // scale-free divergence measure: h |div w| against |w|
        let wnorm = w.norm_l2();
        let div_rel = if wnorm > 0.0 {
            h * divergence(w).norm_l2() / wnorm
        } else {
            divergence(w).norm_l2()
        };
        ResidualReport {
            iterations,
            momentum_residual: momentum,
            divergence_residual: div_rel,
            converged: momentum <= 10.0 * tol.max(1e-14) && div_rel <= 10.0 * tol.max(1e-14),
        }
    }

    /// Dense LU of the full KKT system with a pressure-mean multiplier.
    /// Restricted to small grids; used as fallback and oracle.
    fn solve_direct(
        &self,
        a: f64,
        b: f64,
        rhs: &VelocityField,
    ) -> Result<(VelocityField, PressureField, ResidualReport)> {
        let grid = self.grid();
        let n = grid.nx();
        if n > 32 {
            return Err(Error::InvalidParameter(format!(
                "direct_sparse method is limited to grids <= 32, got {n}"
            )));
        }
        let nv = grid.interior_dof();
        let np = grid.p_len();
        let dim = nv + np + 1;

        let amat = assemble_velocity_op(grid, |f| {
            let mut out = f.scaled(a);
            out.axpy(-b, &laplacian(f));
            out
        });
        // D over unit velocity vectors, G = -D^T in raw coordinates
        let mut dmat = DMatrix::zeros(np, nv);
        let mut e = vec![0.0; nv];
        for k in 0..nv {
            e[k] = 1.0;
            let f = VelocityField::from_interior_vec(grid, &e);
            let d = divergence(&f);
            for (i, x) in d.values().iter().enumerate() {
                dmat[(i, k)] = *x;
            }
            e[k] = 0.0;
        }

        let mut kkt = DMatrix::zeros(dim, dim);
        kkt.view_mut((0, 0), (nv, nv)).copy_from(&amat);
        kkt.view_mut((0, nv), (nv, np)).copy_from(&(-dmat.transpose()));
        kkt.view_mut((nv, 0), (np, nv)).copy_from(&dmat);
        for i in 0..np {
            kkt[(nv + i, nv + np)] = 1.0;
            kkt[(nv + np, nv + i)] = 1.0;
        }

        let mut rhs_vec = DVector::zeros(dim);
        for (i, x) in rhs.interior_to_vec().iter().enumerate() {
            rhs_vec[i] = *x;
        }
        let lu = kkt.lu();
        let sol = lu
            .solve(&rhs_vec)
            .ok_or_else(|| Error::InvalidParameter("singular KKT system".into()))?;

        let w = VelocityField::from_interior_vec(grid, sol.as_slice()[..nv].as_ref());
        let mut p = PressureField::zeros(grid);
        for i in 0..np {
            p.values_mut()[i] = sol[nv + i];
        }
        p.subtract_mean();
        let report = self.residual_report(a, b, rhs, &w, &p, 1, 1e-12);
        Ok((w, p, report))
    }
}

/// Discrete inf-sup constant: square root of the smallest nonzero
/// eigenvalue of the pressure Schur complement `-D (-Lap)^{-1} G`, whose
/// kernel is the one-dimensional constant-pressure space.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InfSupEstimate {
    pub constant: f64,
    pub kernel_dim: usize,
}

pub fn inf_sup_estimate(grid: GridSpec) -> Result<InfSupEstimate> {
    let n = grid.nx();
    if n > 32 {
        return Err(Error::InvalidParameter(format!(
            "inf_sup_estimate is a dense computation, grids <= 32 only (got {n})"
        )));
    }
    let solver = SaddleSolver::new(grid);
    let fast = solver.proj.fast();
    let np = grid.p_len();
    let mut s = DMatrix::zeros(np, np);
    let mut e = PressureField::zeros(grid);
    for k in 0..np {
        e.values_mut()[k] = 1.0;
        let g = gradient(&e);
        let w = fast.solve_velocity(0.0, 1.0, &g);
        let col = divergence(&w);
        for (i, x) in col.values().iter().enumerate() {
            s[(i, k)] = -*x;
        }
        e.values_mut()[k] = 0.0;
    }
    let ev = sym_eigenvalues(&s);
    let tol = 1e-10 * ev[np - 1].abs().max(1.0);
    let kernel_dim = ev.iter().filter(|x| x.abs() <= tol).count();
    let smallest_nonzero = ev
        .iter()
        .find(|x| **x > tol)
        .copied()
        .ok_or_else(|| Error::InvalidParameter("schur spectrum is entirely zero".into()))?;
    Ok(InfSupEstimate {
        constant: smallest_nonzero.sqrt(),
        kernel_dim,
    })
}
