//! Direct tensor-product solvers for the constant-coefficient problems on
//! the MAC grid: the componentwise velocity Helmholtz operator
//! `(a I - b Lap)` and the cell-centered Neumann Laplacian `DG`.
//!
//! The 1D factors of both operators have closed-form sine/cosine
//! eigenbases, so a solve is four small dense matrix products and one
//! pointwise division. Residuals are at roundoff level, which the decay
//! diagnostics rely on.

use crate::field::{PressureField, VelocityField};
use crate::grid::GridSpec;
use nalgebra::DMatrix;
use std::f64::consts::PI;

struct Basis1d {
    /// Orthonormal eigenvectors, one per column.
    q: DMatrix<f64>,
    /// Eigenvalues of the negative 1D second difference.
    lam: Vec<f64>,
}

/// Interior nodes i = 1..n-1 with Dirichlet values on the end nodes:
/// eigenvectors sin(k pi i h).
fn basis_dirichlet_nodes(n: usize) -> Basis1d {
    let h = 1.0 / n as f64;
    let m = n - 1;
    let mut q = DMatrix::zeros(m, m);
    let mut lam = vec![0.0; m];
    for k in 1..=m {
        let mut col = Vec::with_capacity(m);
        for i in 1..=m {
            col.push((k as f64 * PI * i as f64 * h).sin());
        }
        let nrm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (i, x) in col.iter().enumerate() {
            q[(i, k - 1)] = x / nrm;
        }
        let s = (k as f64 * PI * h / 2.0).sin();
        lam[k - 1] = 4.0 / (h * h) * s * s;
    }
    Basis1d { q, lam }
}

/// Cell centers j = 0..n-1 with odd reflection ghosts (Dirichlet wall at
/// the half-cell offset): eigenvectors sin(k pi (j+1/2) h), k = 1..=n.
fn basis_dirichlet_cells(n: usize) -> Basis1d {
    let h = 1.0 / n as f64;
    let mut q = DMatrix::zeros(n, n);
    let mut lam = vec![0.0; n];
    for k in 1..=n {
        let mut col = Vec::with_capacity(n);
        for j in 0..n {
            col.push((k as f64 * PI * (j as f64 + 0.5) * h).sin());
        }
        let nrm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (j, x) in col.iter().enumerate() {
            q[(j, k - 1)] = x / nrm;
        }
        let s = (k as f64 * PI * h / 2.0).sin();
        lam[k - 1] = 4.0 / (h * h) * s * s;
    }
    Basis1d { q, lam }
}

/// Cell centers with even reflection ghosts (zero flux): eigenvectors
/// cos(k pi (j+1/2) h), k = 0..n-1; k = 0 is the constant nullvector.
fn basis_neumann_cells(n: usize) -> Basis1d {
    let h = 1.0 / n as f64;
    let mut q = DMatrix::zeros(n, n);
    let mut lam = vec![0.0; n];
    for k in 0..n {
        let mut col = Vec::with_capacity(n);
        for j in 0..n {
            col.push((k as f64 * PI * (j as f64 + 0.5) * h).cos());
        }
        let nrm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (j, x) in col.iter().enumerate() {
            q[(j, k)] = x / nrm;
        }
        let s = (k as f64 * PI * h / 2.0).sin();
        lam[k] = 4.0 / (h * h) * s * s;
    }
    Basis1d { q, lam }
}

/// Cached eigenbases for one grid.
pub struct FastSolver {
    grid: GridSpec,
    nodes: Basis1d,
    cells_d: Basis1d,
    cells_n: Basis1d,
}

impl FastSolver {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.nx();
        FastSolver {
            grid,
            nodes: basis_dirichlet_nodes(n),
            cells_d: basis_dirichlet_cells(n),
            cells_n: basis_neumann_cells(n),
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Closed-form smallest eigenvalue of the componentwise vector
    /// Laplacian: both 1D factors contribute (4/h^2) sin^2(pi h / 2).
    pub fn lambda1_closed_form(&self) -> f64 {
        let h = self.grid.h();
        let s = (PI * h / 2.0).sin();
        8.0 / (h * h) * s * s
    }

    /// Solve `(a I - b Lap) w = rhs` componentwise. Requires
    /// `a + b * lambda > 0` for every 1D eigenvalue pair, which holds for
    /// all a >= 0, b >= 0, a + b > 0 and also for the negative shifts used
    /// by the eigensolvers (checked by debug assertion).
    pub fn solve_velocity(&self, a: f64, b: f64, rhs: &VelocityField) -> VelocityField {
        debug_assert_eq!(self.grid, rhs.grid());
        let n = self.grid.nx();
        let mut out = VelocityField::zeros(self.grid);

        // u component: (n-1) x n interior block, x-basis nodes, y-basis Dirichlet cells
        let ru = DMatrix::from_fn(n - 1, n, |i, j| rhs.u(i + 1, j));
        let wu = self.transform_solve(&ru, &self.nodes, &self.cells_d, a, b);
        for j in 0..n {
            for i in 1..n {
                *out.u_mut(i, j) = wu[(i - 1, j)];
            }
        }

        // v component: n x (n-1) interior block, x-basis Dirichlet cells, y-basis nodes
        let rv = DMatrix::from_fn(n, n - 1, |i, j| rhs.v(i, j + 1));
        let wv = self.transform_solve(&rv, &self.cells_d, &self.nodes, a, b);
        for j in 1..n {
            for i in 0..n {
                *out.v_mut(i, j) = wv[(i, j - 1)];
            }
        }
        out
    }

    fn transform_solve(
        &self,
        r: &DMatrix<f64>,
        bx: &Basis1d,
        by: &Basis1d,
        a: f64,
        b: f64,
    ) -> DMatrix<f64> {
        let mut rh = bx.q.transpose() * r * &by.q;
        for k in 0..bx.lam.len() {
            for l in 0..by.lam.len() {
                let den = a + b * (bx.lam[k] + by.lam[l]);
                debug_assert!(den > 0.0, "indefinite velocity Helmholtz shift");
                rh[(k, l)] /= den;
            }
        }
        &bx.q * rh * by.q.transpose()
    }

    /// Solve the cell-centered Neumann problem `DG phi = rhs` with the
    /// constant mode pinned to zero; the result is the mean-zero solution
    /// of the compatible system (the rhs constant mode is discarded).
    pub fn solve_neumann(&self, rhs: &PressureField) -> PressureField {
        debug_assert_eq!(self.grid, rhs.grid());
        let n = self.grid.nx();
        let r = DMatrix::from_fn(n, n, |i, j| rhs.at(i, j));
        let mut rh = self.cells_n.q.transpose() * r * &self.cells_n.q;
        for k in 0..n {
            for l in 0..n {
                let den = -(self.cells_n.lam[k] + self.cells_n.lam[l]);
                if k == 0 && l == 0 {
                    rh[(0, 0)] = 0.0;
                } else {
                    rh[(k, l)] /= den;
                }
            }
        }
        let sol = &self.cells_n.q * rh * self.cells_n.q.transpose();
        let mut out = PressureField::zeros(self.grid);
        for j in 0..n {
            for i in 0..n {
                *out.at_mut(i, j) = sol[(i, j)];
            }
        }
        out
    }

    /// Smallest admissible `a` shift: `a + b * 2*lam_min > 0` needs
    /// `a > -2 b lam_min` where lam_min is the smallest 1D eigenvalue.
    pub fn min_axis_eigenvalue(&self) -> f64 {
        self.nodes.lam[0].min(self.cells_d.lam[0])
    }
}
