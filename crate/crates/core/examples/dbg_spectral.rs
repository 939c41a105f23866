use kvlab_core::field::{FlowParameters, VelocityField};
use kvlab_core::grid::GridSpec;
use kvlab_core::saddle::SolverSettings;
use kvlab_core::spectral::{gamma1_constant, slowest_decay_rate};
use kvlab_core::steady::{solve_steady, SteadyProblem};

fn main() {
    let nu = 1.0;
    let grid = GridSpec::square(8).unwrap();
    let f = kvlab_core::manufactured::exact_velocity(grid).scaled(2.0);
    let prob = SteadyProblem {
        params: FlowParameters::new(nu, 0.0).unwrap(),
        f_inf: f,
    };
    let u_inf = solve_steady(&prob, &SolverSettings::default()).unwrap().u_inf;
    println!("|u_inf| = {:.3e}", u_inf.norm_l2());
    match gamma1_constant(&u_inf, nu) {
        Ok(g) => println!("gamma1 = {:.12}", g),
        Err(e) => println!("gamma1 error: {e}"),
    }
    for kappa in [0.0, 0.05] {
        match slowest_decay_rate(&u_inf, nu, kappa) {
            Ok(r) => println!("rate(kappa={kappa}) = {:.8}", r),
            Err(e) => println!("rate(kappa={kappa}) error: {e}"),
        }
    }
}
