//! Dense-assembly oracles for the iterative eigensolvers.

use kvlab_core::dense::{
    assemble_velocity_op, divergence_free_basis, pencil_smallest, sym_eigenvalues, sym_smallest,
};
use kvlab_core::field::{FlowParameters, VelocityField};
use kvlab_core::grid::GridSpec;
use kvlab_core::ops::{norms, trilinear_b};
use kvlab_core::projection::Projector;
use kvlab_core::saddle::SolverSettings;
use kvlab_core::spectral::{
    a1_eigenvalue, dirichlet_lambda1, dirichlet_lambda1_closed_form, gamma1_constant,
    slowest_decay_rate,
};
use kvlab_core::steady::{solve_steady, SteadyProblem};
use nalgebra::DMatrix;

/// Small nontrivial steady state shared by the oracle tests.
fn small_steady(grid: GridSpec, nu: f64, amp: f64) -> VelocityField {
    let f = kvlab_core::manufactured::exact_velocity(grid).scaled(amp);
    let prob = SteadyProblem {
        params: FlowParameters::new(nu, 0.0).unwrap(),
        f_inf: f,
    };
    solve_steady(&prob, &SolverSettings::default()).unwrap().u_inf
}

/// Dense T and S on the divergence-free subspace.
fn dense_t_and_s(
    grid: GridSpec,
    u_inf: &VelocityField,
    nu: f64,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let proj = Projector::new(grid);
    let v = divergence_free_basis(grid, &proj);
    let s_full = assemble_velocity_op(grid, |z| proj.stokes_apply(&proj.project_velocity(z)));
    let b_full = assemble_velocity_op(grid, |z| {
        let c = kvlab_core::ops::convection_operator(&proj.project_velocity(z), u_inf).unwrap();
        proj.project_velocity(&c)
    });
    let s_t = v.transpose() * &s_full * &v;
    let m_t = v.transpose() * 0.5 * (&b_full + b_full.transpose()) * &v;
    let t_t = nu * &s_t + m_t;
    (t_t, s_t, v)
}

#[test]
fn lambda1_against_dense_oracle() {
    let grid = GridSpec::square(16).unwrap();
    let a = assemble_velocity_op(grid, |f| {
        let mut out = kvlab_core::ops::laplacian(f);
        out.scale(-1.0);
        out
    });
    let ev = sym_eigenvalues(&a);
    let iterative = dirichlet_lambda1(grid).unwrap();
    let closed = dirichlet_lambda1_closed_form(grid);
    assert!((ev[0] - closed).abs() <= 1e-9 * closed, "dense {} vs closed {closed}", ev[0]);
    assert!((iterative - ev[0]).abs() <= 1e-9 * ev[0]);
}

#[test]
fn h_minus1_eigenfunction_identity() {
    // first eigenfunction of the u-grid Laplacian: |e1|_{-1} = |e1| / sqrt(lambda1)
    let grid = GridSpec::square(16).unwrap();
    let proj = Projector::new(grid);
    // grid eigenfunction of the u-component Laplacian:
    // u(i, j) = sin(pi i h) sin(pi (j + 1/2) h), v = 0
    let e1 = {
        let mut f = VelocityField::zeros(grid);
        let n = grid.nx();
        let h = grid.h();
        for j in 0..n {
            for i in 1..n {
                *f.u_mut(i, j) = (std::f64::consts::PI * i as f64 * h).sin()
                    * (std::f64::consts::PI * (j as f64 + 0.5) * h).sin();
            }
        }
        f
    };
    let lambda1 = dirichlet_lambda1_closed_form(grid);
    let want = e1.norm_l2() / lambda1.sqrt();
    let got = proj.h_minus1_norm(&e1);
    assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
}

#[test]
fn h_minus1_spectral_bound_random_fields() {
    let grid = GridSpec::square(16).unwrap();
    let proj = Projector::new(grid);
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let lambda1 = dirichlet_lambda1_closed_form(grid);
    for _ in 0..10 {
        let f = VelocityField::random(grid, &mut rng);
        assert!(proj.h_minus1_norm(&f) <= f.norm_l2() / lambda1.sqrt() + 1e-12);
    }
}

#[test]
fn a1_matches_dense_for_zero_and_small_states() {
    let nu = 1.0;
    for n in [8, 16] {
        let grid = GridSpec::square(n).unwrap();

        // u_inf = 0: lambda0 is the smallest Stokes eigenvalue >= lambda1
        let zero = VelocityField::zeros(grid);
        let (lam0_it, field) = a1_eigenvalue(&zero, nu).unwrap();
        let (t_t, s_t, _) = dense_t_and_s(grid, &zero, nu);
        let _ = &s_t;
        let (lam0_dense, _) = sym_smallest(&t_t);
        assert!(
            (lam0_it - lam0_dense).abs() <= 1e-7 * lam0_dense.abs(),
            "n={n}: iterative {lam0_it} vs dense {lam0_dense}"
        );
        assert!(lam0_it >= dirichlet_lambda1_closed_form(grid) - 1e-9);
        assert!((field.norm_l2() - 1.0).abs() < 1e-10);
        assert!(kvlab_core::ops::divergence(&field).norm_max() <= 1e-10 / grid.h());

        // small steady state
        let u_inf = small_steady(grid, nu, 2.0);
        let (lam_it, z) = a1_eigenvalue(&u_inf, nu).unwrap();
        let (t_t2, _, _) = dense_t_and_s(grid, &u_inf, nu);
        let (lam_dense, _) = sym_smallest(&t_t2);
        assert!(
            (lam_it - lam_dense).abs() <= 1e-7 * lam_dense.abs(),
            "n={n}: {lam_it} vs {lam_dense}"
        );

        // Rayleigh identity (xx1.3)
        let ns = norms(&z);
        let ray = nu * ns.h1_semi * ns.h1_semi + trilinear_b(&z, &u_inf, &z).unwrap();
        assert!(
            (ray - lam_it).abs() <= 1e-7 * lam_it.abs(),
            "rayleigh {ray} vs {lam_it}"
        );

        // operator-perturbation (Weyl) bound against the dense M norm
        let proj = Projector::new(grid);
        let b_full = assemble_velocity_op(grid, |w| {
            let c =
                kvlab_core::ops::convection_operator(&proj.project_velocity(w), &u_inf).unwrap();
            proj.project_velocity(&c)
        });
        let m_full = 0.5 * (&b_full + b_full.transpose());
        let ev = sym_eigenvalues(&m_full);
        let m_norm = ev[0].abs().max(ev[ev.len() - 1].abs());
        assert!(
            (lam_it - lam0_it).abs() <= m_norm + 1e-9,
            "Weyl: |{lam_it} - {lam0_it}| vs {m_norm}"
        );

        // and against the pointwise symmetrized-gradient magnitude
        let sg = max_symmetrized_gradient(&u_inf);
        assert!(
            (lam_it - lam0_it).abs() <= sg + 1e-9,
            "pointwise bound: |{lam_it} - {lam0_it}| vs {sg}"
        );
    }
}

/// Max over cells of the spectral norm of the symmetrized velocity
/// gradient, from centered differences at cell centers.
fn max_symmetrized_gradient(u: &VelocityField) -> f64 {
    let grid = u.grid();
    let n = grid.nx();
    let h = grid.h();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let ux = (u.u(i + 1, j) - u.u(i, j)) / h;
            let vy = (u.v(i, j + 1) - u.v(i, j)) / h;
            // cross terms from node-averaged differences
            let uy = (u.u_ghost(i, j as isize + 1) + u.u_ghost(i + 1, j as isize + 1)
                - u.u_ghost(i, j as isize - 1)
                - u.u_ghost(i + 1, j as isize - 1))
                / (4.0 * h);
            let vx = (u.v_ghost(i as isize + 1, j) + u.v_ghost(i as isize + 1, j + 1)
                - u.v_ghost(i as isize - 1, j)
                - u.v_ghost(i as isize - 1, j + 1))
                / (4.0 * h);
            let e12 = 0.5 * (uy + vx);
            // eigenvalues of [[ux, e12], [e12, vy]]
            let tr = 0.5 * (ux + vy);
            let det = (0.5 * (ux - vy)).powi(2) + e12 * e12;
            let r = det.sqrt();
            worst = worst.max((tr + r).abs().max((tr - r).abs()));
        }
    }
    worst
}

#[test]
fn gamma1_matches_dense_pencil_and_relations() {
    let nu = 1.0;
    for n in [8, 16] {
        let grid = GridSpec::square(n).unwrap();
        let u_inf = small_steady(grid, nu, 2.0);
        let g_it = gamma1_constant(&u_inf, nu).unwrap();
        let (t_t, s_t, _) = dense_t_and_s(grid, &u_inf, nu);
        let g_dense = pencil_smallest(&t_t, &s_t);
        assert!(
            (g_it - g_dense).abs() <= 1e-7 * g_dense.abs(),
            "n={n}: {g_it} vs {g_dense}"
        );

        // infimum property against random divergence-free samples
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let w = VelocityField::random_divergence_free(grid, &mut rng);
            let ns = norms(&w);
            let q = (nu * ns.h1_semi * ns.h1_semi + trilinear_b(&w, &u_inf, &w).unwrap())
                / (ns.h1_semi * ns.h1_semi);
            assert!(g_it <= q + 1e-9, "gamma1 {g_it} vs quotient {q}");
        }

        // lambda0 >= gamma1 * lambda1
        let (lam0, _) = a1_eigenvalue(&u_inf, nu).unwrap();
        let lambda1 = dirichlet_lambda1_closed_form(grid);
        assert!(lam0 >= g_it * lambda1 - 1e-9 * lam0.abs());
    }
}

#[test]
fn slowest_rate_matches_dense_pencil() {
    let nu = 1.0;
    let grid = GridSpec::square(8).unwrap();
    let u_inf = small_steady(grid, nu, 2.0);
    for kappa in [0.0, 0.05] {
        let rho_it = slowest_decay_rate(&u_inf, nu, kappa).unwrap();
        let (t_t, s_t, _) = dense_t_and_s(grid, &u_inf, nu);
        let m_t = DMatrix::identity(s_t.nrows(), s_t.ncols()) + kappa * &s_t;
        let rho_dense = pencil_smallest(&t_t, &m_t);
        assert!(
            (rho_it - rho_dense).abs() <= 1e-7 * rho_dense.abs(),
            "kappa={kappa}: {rho_it} vs {rho_dense}"
        );
    }
}
