//! Dense assembly helpers for the small-grid oracles and the direct
//! saddle solver. Everything here is O(dof^2) or worse and intended for
//! grids up to 32x32.

use crate::field::VelocityField;
use crate::grid::GridSpec;
use crate::projection::Projector;
use nalgebra::DMatrix;

/// Assemble the matrix of a linear velocity operator over the interior
/// face degrees of freedom by applying it to unit vectors.
pub fn assemble_velocity_op(
    grid: GridSpec,
    mut op: impl FnMut(&VelocityField) -> VelocityField,
) -> DMatrix<f64> {
    let m = grid.interior_dof();
    let mut a = DMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for k in 0..m {
        e[k] = 1.0;
        let f = VelocityField::from_interior_vec(grid, &e);
        let out = op(&f).interior_to_vec();
        for (i, x) in out.iter().enumerate() {
            a[(i, k)] = *x;
        }
        e[k] = 0.0;
    }
    a
}

/// Orthonormal basis (columns) of the discretely divergence-free subspace,
/// extracted from the eigen-decomposition of the dense Leray projector.
pub fn divergence_free_basis(grid: GridSpec, proj: &Projector) -> DMatrix<f64> {
    let p = assemble_velocity_op(grid, |f| proj.project_velocity(f));
    let sym = 0.5 * (&p + p.transpose());
    let eig = sym.symmetric_eigen();
    let m = grid.interior_dof();
    let cols: Vec<usize> = (0..m).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
    let mut v = DMatrix::zeros(m, cols.len());
    for (c, &k) in cols.iter().enumerate() {
        for r in 0..m {
            v[(r, c)] = eig.eigenvectors[(r, k)];
        }
    }
    v
}

/// Sorted eigenvalues of a symmetric matrix, ascending.
pub fn sym_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let sym = 0.5 * (a + a.transpose());
    let mut ev: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Smallest eigenvalue and eigenvector of a symmetric matrix.
pub fn sym_smallest(a: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let sym = 0.5 * (a + a.transpose());
    let eig = sym.symmetric_eigen();
    let mut k_min = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k] < eig.eigenvalues[k_min] {
            k_min = k;
        }
    }
    let v = (0..eig.eigenvectors.nrows())
        .map(|r| eig.eigenvectors[(r, k_min)])
        .collect();
    (eig.eigenvalues[k_min], v)
}

/// Smallest eigenvalue of the symmetric pencil `A x = lambda B x` with B
/// symmetric positive definite, via the Cholesky transform.
pub fn pencil_smallest(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let bsym = 0.5 * (b + b.transpose());
    let chol = bsym.cholesky().expect("pencil mass matrix not SPD");
    let l_inv = chol
        .l()
        .solve_lower_triangular(&DMatrix::identity(b.nrows(), b.ncols()))
        .expect("triangular solve failed");
    let t = &l_inv * 0.5 * (a + a.transpose()) * l_inv.transpose();
    sym_eigenvalues(&t)[0]
}
