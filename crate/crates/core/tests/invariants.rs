//! Symmetries of the model checked on random parameters.

use metapop_core::compare::asymptotic_data;
use metapop_core::ess::{dimorphism_conditions, invasion_fitness, resident_equilibrium};
use metapop_core::hj::u_taylor;
use metapop_core::model::check_assumptions;
use metapop_core::{solve_ess, EssKind, ModelParams, Regime};
use proptest::prelude::*;

fn two_way() -> impl Strategy<Value = ModelParams> {
    (
        (0.8..2.0f64, 0.8..2.0f64, 0.3..1.5f64, 0.3..1.5f64),
        (0.5..2.0f64, 0.5..2.0f64, 0.1..1.2f64, 0.1..1.2f64, 0.5..1.5f64),
    )
        .prop_map(|((r1, r2, g1, g2), (kappa1, kappa2, m1, m2, theta))| ModelParams {
            r1,
            r2,
            g1,
            g2,
            kappa1,
            kappa2,
            m1,
            m2,
            theta,
        })
        .prop_filter("two-way regime", |p| check_assumptions(p).regime == Regime::TwoWay)
}

fn monomorphic() -> impl Strategy<Value = ModelParams> {
    two_way().prop_filter("monomorphic ESS", |p| !dimorphism_conditions(p).all_strict())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mirrored_habitats_mirror_the_ess(p in two_way()) {
        let e = solve_ess(&p).unwrap();
        let m = solve_ess(&p.mirrored()).unwrap();
        let mut s = e.support();
        let mut sm: Vec<f64> = m.support().iter().map(|z| -z).collect();
        s.sort_by(f64::total_cmp);
        sm.sort_by(f64::total_cmp);
        prop_assert_eq!(s.len(), sm.len());
        for (a, b) in s.iter().zip(&sm) {
            prop_assert!(close(*a, *b, 1e-8), "{a} vs {b}");
        }
        prop_assert!(close(e.n_star.n1, m.n_star.n2, 1e-8));
        prop_assert!(close(e.n_star.n2, m.n_star.n1, 1e-8));
    }

    #[test]
    fn time_rescaling_keeps_traits_and_sizes(p in two_way(), c in 0.2..5.0f64) {
        let e = solve_ess(&p).unwrap();
        let s = solve_ess(&p.time_rescaled(c)).unwrap();
        for (a, b) in e.support().iter().zip(s.support()) {
            prop_assert!(close(*a, b, 1e-8), "{a} vs {b}");
        }
        prop_assert!(close(e.n_star.n1, s.n_star.n1, 1e-8));
        prop_assert!(close(e.n_star.n2, s.n_star.n2, 1e-8));
        // u solves (u')^2 = -W, so u scales with sqrt(c)
        if let (Some(z), Some(zs)) = (e.monomorphic_point(), s.monomorphic_point()) {
            let t = u_taylor(z, e.n_star, &p).unwrap();
            let ts = u_taylor(zs, s.n_star, &p.time_rescaled(c)).unwrap();
            prop_assert!(close(ts.a, c.sqrt() * t.a, 1e-6));
        }
    }

    #[test]
    fn monomorphic_ess_resists_invasion(p in monomorphic()) {
        let e = solve_ess(&p).unwrap();
        let EssKind::Monomorphic { z_star } = e.kind else { panic!("expected a monomorphic ESS") };
        let res = resident_equilibrium(z_star, &p).unwrap();
        prop_assert!(close(res.n_eq.n1, e.n_star.n1, 1e-8));
        prop_assert!(close(res.n_eq.n2, e.n_star.n2, 1e-8));
        prop_assert!(invasion_fitness(z_star, &res, &p).abs() < 1e-8);
        for k in 0..=60 {
            let z = -p.theta - 1.0 + k as f64 * (2.0 * p.theta + 2.0) / 60.0;
            prop_assert!(invasion_fitness(z, &res, &p) <= 1e-8, "mutant {z} invades");
        }
    }

    #[test]
    fn mirrored_correctors(p in monomorphic()) {
        let (t, cs) = asymptotic_data(&p).unwrap();
        let (tm, cm) = asymptotic_data(&p.mirrored()).unwrap();
        prop_assert!(close(t.a, tm.a, 1e-7));
        prop_assert!(close(t.b, -tm.b, 1e-7));
        prop_assert!(close(t.c, tm.c, 1e-6));
        prop_assert!(close(cs.d[0], -cm.d[1], 1e-6));
        prop_assert!(close(cs.e[0], cm.e[1], 1e-6));
        prop_assert!(close(cs.k[0], cm.k[1], 1e-6));
        prop_assert!(close(cs.lambda1, cm.lambda1, 1e-6));
    }
}
