use aniso_ncfem::analysis::{error_norms, error_norms_with, interpolate_pi_h};
use aniso_ncfem::cli::{run_convergence, solve_level, RunConfig};
use aniso_ncfem::element::conical_product;
use aniso_ncfem::problems::{example1, ManufacturedProblem};

fn config(beta1: f64, beta2: f64, levels: &[usize]) -> RunConfig {
    RunConfig {
        beta1,
        beta2,
        n_levels: levels.to_vec(),
        ..RunConfig::default()
    }
}

/// `|u - u_h|_{1,h} / |u - pi_h u|_{1,h}` stays bounded: the discrete solution is quasi-optimal.
#[test]
fn energy_error_is_comparable_to_interpolation_error() {
    for (b1, b2) in [(1.0, 100.0), (100.0, 1.0)] {
        let p = example1(b1, b2).unwrap();
        let cfg = config(b1, b2, &[]);
        for n in [16, 32, 64] {
            let level = solve_level(&cfg, n).unwrap();
            let pi = interpolate_pi_h(&level.mesh, &level.dofs, &|q| p.u(q));
            let (_, interp) = error_norms(&level.mesh, &level.dofs, &pi, &|q| p.u(q), &|q| p.grad_u(q)).unwrap();
            let ratio = level.report.err_h1 / interp;
            eprintln!("beta = ({b1}, {b2}) n = {n}: C_qo = {ratio:.4}");
            assert!(ratio <= 10.0, "beta = ({b1}, {b2}) n = {n}: {ratio}");
        }
    }
}

/// With a smooth exact solution the degree-4 norms are already converged in the quadrature.
#[test]
fn norms_are_insensitive_to_the_quadrature_degree() {
    let fine = conical_product(6);
    let rel = |a: f64, b: f64| (a - b).abs() / b;
    for (b1, b2) in [(1.0, 1.0), (1.0, 100.0)] {
        let p = example1(b1, b2).unwrap();
        let cfg = config(b1, b2, &[]);
        for n in [32, 64] {
            let level = solve_level(&cfg, n).unwrap();
            let (l2, h1) =
                error_norms_with(&level.mesh, &level.dofs, &level.coeffs, &|q| p.u(q), &|q| p.grad_u(q), &fine)
                    .unwrap();
            let (dl2, dh1) = (rel(level.report.err_l2, l2), rel(level.report.err_h1, h1));
            eprintln!("beta = ({b1}, {b2}) n = {n}: relative change L2 {dl2:.2e}, H1 {dh1:.2e}");
            // with contrast the exact gradient jumps inside cut sub-cells (between the circle
            // and its chord), so no fixed-degree rule is converged there; only report it
            if b1 == b2 {
                assert!(dl2 < 5e-4 && dh1 < 5e-4, "n={n}: {dl2} {dh1}");
            }
        }
    }
}

#[test]
fn equal_coefficients_recover_textbook_rates() {
    let table = run_convergence(&config(1.0, 1.0, &[16, 32, 64])).unwrap();
    let last = table.rows.last().unwrap();
    let h1 = last.order_h1.unwrap();
    let l2 = last.order_l2.unwrap();
    assert!((0.9..=1.1).contains(&h1), "H1 order {h1}");
    assert!((1.8..=2.2).contains(&l2), "L2 order {l2}");
}

#[test]
fn errors_decrease_monotonically() {
    for (b1, b2) in [(1.0, 10000.0), (10000.0, 1.0)] {
        let table = run_convergence(&config(b1, b2, &[8, 16, 32])).unwrap();
        for w in table.rows.windows(2) {
            assert!(w[1].err_l2 < w[0].err_l2);
            assert!(w[1].err_h1 < w[0].err_h1);
        }
    }
}
