//! Cross-checks against independent computations.

use approx::assert_relative_eq;
use metapop_core::compare::{asymptotic_data, validate_eps_list};
use metapop_core::correctors::chain_residuals;
use metapop_core::fd::{extract_numeric_moments, steady_state_solve, trapezoid, FdOptions, Init};
use metapop_core::hj::{branch_from, u_taylor, uniform_grid};
use metapop_core::model::{effective_fitness, growth_rate, PopState};
use metapop_core::{solve_ess, Habitat, ModelParams};
use nalgebra::{DMatrix, DVector, Matrix2};
use proptest::prelude::*;

fn mono() -> ModelParams {
    ModelParams::symmetric(1.5, 0.5, 1.0, 1.2, 1.0)
}

fn asym() -> ModelParams {
    ModelParams { r1: 1.6, r2: 1.4, ..mono() }
}

proptest! {
    #[test]
    fn fitness_is_top_eigenvalue(
        z in -3.0..3.0f64,
        n1 in 0.0..3.0f64,
        n2 in 0.0..3.0f64,
        m1 in 0.0..2.0f64,
        m2 in 0.0..2.0f64,
        r in 0.5..2.0f64,
    ) {
        let p = ModelParams { m1, m2, r2: 1.3 * r, ..ModelParams::symmetric(r, 0.7, 1.1, 0.0, 1.0) };
        let n = PopState::new(n1, n2);
        let a = growth_rate(z, n1, Habitat::One, &p) - m1;
        let d = growth_rate(z, n2, Habitat::Two, &p) - m2;
        // column j = habitat of origin
        let m = Matrix2::new(a, m2, m1, d);
        let top = m.complex_eigenvalues().iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max);
        let w = effective_fitness(z, n, &p);
        prop_assert!((w - top).abs() <= 1e-10 * (1.0 + top.abs()), "W = {w}, eig = {top}");
    }
}

/// Least-squares fit of `u(z* + s)` by `s², ..., s⁶`, from quadrature of
/// `sqrt(-W)` rather than from the series.
#[test]
fn taylor_coefficients_match_polynomial_fit() {
    for p in [mono(), asym()] {
        let ess = solve_ess(&p).unwrap();
        let z0 = ess.monomorphic_point().unwrap();
        let t = u_taylor(z0, ess.n_star, &p).unwrap();
        let half = 0.15;
        let grid = uniform_grid(z0 - half, z0 + half, 601);
        let u = branch_from(&grid, z0, ess.n_star, &p);
        let rows = grid.len();
        let x = DMatrix::from_fn(rows, 5, |i, j| (grid[i] - z0).powi(j as i32 + 2));
        let y = DVector::from_column_slice(&u);
        let coef = x.svd(true, true).solve(&y, 1e-14).unwrap();
        assert_relative_eq!(-2.0 * coef[0], t.a, max_relative = 1e-7);
        assert!((coef[1] - t.b).abs() < 1e-5, "B: fit {} vs {}", coef[1], t.b);
        assert!((coef[2] - t.c).abs() < 1e-4, "C: fit {} vs {}", coef[2], t.c);
    }
}

#[test]
fn symmetric_taylor_and_corrector_values() {
    let (t, cs) = asymptotic_data(&mono()).unwrap();
    assert_relative_eq!(t.a, 1.0 / 12f64.sqrt(), max_relative = 1e-10);
    assert!(t.b.abs() < 1e-10);
    assert_relative_eq!(t.c, -0.031_323, epsilon = 1e-6);
    assert_relative_eq!(cs.d[0], -5.0 / 12.0, epsilon = 1e-9);
    assert_relative_eq!(cs.d[1], 5.0 / 12.0, epsilon = 1e-9);
    assert_relative_eq!(cs.lambda1, 5.0 / 6.0, epsilon = 1e-9);
    assert_relative_eq!(cs.e[0], -0.499_13, epsilon = 1e-5);
    assert_relative_eq!(cs.f[0], 2.2673, epsilon = 1e-4);
    assert_relative_eq!(cs.k[0], -t.a, epsilon = 1e-9);
    assert!(chain_residuals(&cs, &t, &mono()).max_abs() < 1e-10);
}

#[test]
fn fd_steady_state_balances_and_is_positive() {
    let p = asym();
    let s = steady_state_solve(&p, &FdOptions::new(&p, 0.2).with_grid(4.0, 1201)).unwrap();
    assert!(s.n1.iter().chain(&s.n2).all(|&v| v >= 0.0));
    let h = s.h();
    assert_relative_eq!(trapezoid(&s.n1, h), s.big_n.n1, max_relative = 1e-14);
    assert_relative_eq!(trapezoid(&s.n2, h), s.big_n.n2, max_relative = 1e-14);
    // steady state => every habitat's mass budget closes
    for b in s.balance(&p) {
        assert!(b.abs() < 1e-7, "balance {b}");
    }
}

#[test]
fn fd_steady_state_independent_of_start() {
    let p = mono();
    let base = FdOptions::new(&p, 0.2).with_grid(3.5, 1001);
    let sols: Vec<_> = Init::standard(&p)
        .into_iter()
        .map(|init| steady_state_solve(&p, &base.clone().with_init(init)).unwrap())
        .collect();
    for s in &sols[1..] {
        let diff = s.n1.iter().zip(&sols[0].n1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-7, "sup diff {diff}");
    }
}

#[test]
fn fd_moments_are_symmetric_for_symmetric_habitats() {
    let p = mono();
    let s = steady_state_solve(&p, &FdOptions::new(&p, 0.2).with_grid(3.5, 1001)).unwrap();
    let m = extract_numeric_moments(&s);
    assert_relative_eq!(m.n_eps[0], m.n_eps[1], max_relative = 1e-9);
    assert_relative_eq!(m.mean[0], -m.mean[1], epsilon = 1e-9);
    assert_relative_eq!(m.variance[0], m.variance[1], max_relative = 1e-9);
}

#[test]
fn eps_lists_are_validated() {
    assert!(validate_eps_list(&[0.1, 0.05, 0.025]).is_ok());
    assert!(validate_eps_list(&[]).is_err());
    assert!(validate_eps_list(&[0.05, 0.1]).is_err());
    assert!(validate_eps_list(&[0.1, 0.1]).is_err());
    assert!(validate_eps_list(&[0.1, -0.05]).is_err());
    assert!(validate_eps_list(&[f64::NAN]).is_err());
}
