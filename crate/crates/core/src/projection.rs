//! Leray projection, Stokes operator application and the discrete H^-1
//! norm, all backed by the direct tensor solvers.

use crate::field::{PressureField, VelocityField};
use crate::grid::GridSpec;
use crate::ops::{divergence, gradient, laplacian};
use crate::poisson::FastSolver;

/// Solver context owning the eigenbases for one grid. Construction is
/// cheap (O(n^2) trigonometric evaluations); reuse it in loops anyway.
pub struct Projector {
    fast: FastSolver,
}

impl Projector {
    pub fn new(grid: GridSpec) -> Self {
        Projector {
            fast: FastSolver::new(grid),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.fast.grid()
    }

    pub fn fast(&self) -> &FastSolver {
        &self.fast
    }

    /// Leray decomposition `f = w + grad(phi)` with `div w = 0`:
    /// returns the divergence-free part and the mean-zero potential.
    pub fn project(&self, f: &VelocityField) -> (VelocityField, PressureField) {
        let d = divergence(f);
        let phi = self.fast.solve_neumann(&d);
        let mut w = f.clone();
        w.axpy(-1.0, &gradient(&phi));
        (w, phi)
    }

    /// Divergence-free part only.
    pub fn project_velocity(&self, f: &VelocityField) -> VelocityField {
        self.project(f).0
    }

    /// Stokes operator `-P Lap f`, divergence-free output.
    pub fn stokes_apply(&self, f: &VelocityField) -> VelocityField {
        let lap = laplacian(f);
        let mut neg = lap;
        neg.scale(-1.0);
        self.project_velocity(&neg)
    }

    /// `<f, (-Lap)^{-1} f>^{1/2}` with the componentwise Dirichlet
    /// Laplacian; the discrete realization of the H^-1 norm.
    pub fn h_minus1_norm(&self, f: &VelocityField) -> f64 {
        let w = self.fast.solve_velocity(0.0, 1.0, f);
        f.dot(&w).max(0.0).sqrt()
    }
}

/// One-shot convenience wrappers; prefer holding a [`Projector`] in loops.
pub fn project(f: &VelocityField) -> (VelocityField, PressureField) {
    Projector::new(f.grid()).project(f)
}

pub fn stokes_apply(f: &VelocityField) -> VelocityField {
    Projector::new(f.grid()).stokes_apply(f)
}

pub fn h_minus1_norm(f: &VelocityField) -> f64 {
    Projector::new(f.grid()).h_minus1_norm(f)
}
