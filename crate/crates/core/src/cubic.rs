//! Closed-form minimization of the quartic `f(z; μ1, μ2)`.
//!
//! `f'(z) = 4z³ + 2(μ1 + μ2 - 2θ²) z + 2θ(μ2 - μ1)` has no quadratic term, so
//! its critical points are the roots of a depressed cubic.

use std::f64::consts::PI;

use crate::model::{quartic_f, ModelParams, MuState};

/// Real roots of `z³ + p z + q = 0`, ascending, each polished by Newton.
pub fn depressed_cubic_roots(p: f64, q: f64) -> Vec<f64> {
    let mut roots = if p == 0.0 {
        vec![(-q).cbrt()]
    } else {
        let half_q = 0.5 * q;
        let third_p = p / 3.0;
        let disc = half_q * half_q + third_p * third_p * third_p;
        if disc > 0.0 {
            // single real root; pick the cube root with no cancellation
            let s = disc.sqrt();
            let u = (-half_q - s.copysign(half_q)).cbrt();
            let v = if u != 0.0 { -third_p / u } else { 0.0 };
            vec![u + v]
        } else {
            let r = 2.0 * (-third_p).sqrt();
            let cos_arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
            let phi = cos_arg.acos();
            (0..3)
                .map(|k| r * (phi / 3.0 - 2.0 * PI * k as f64 / 3.0).cos())
                .collect()
        }
    };
    for z in roots.iter_mut() {
        for _ in 0..2 {
            let f = (*z * *z + p) * *z + q;
            let df = 3.0 * *z * *z + p;
            if df.abs() > 1e-300 {
                let step = f / df;
                if step.is_finite() {
                    *z -= step;
                }
            }
        }
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    roots
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticMin {
    /// Global minimizer.
    pub z: f64,
    pub value: f64,
    /// The other local minimum when `f` is double-welled.
    pub other: Option<(f64, f64)>,
}

/// Global minimum of `f(·; μ1, μ2)` over the real line.
pub fn quartic_min(mu: MuState, p: &ModelParams) -> QuarticMin {
    let th = p.theta;
    let cp = 0.5 * (mu.mu1 + mu.mu2 - 2.0 * th * th);
    let cq = 0.5 * th * (mu.mu2 - mu.mu1);
    let roots = depressed_cubic_roots(cp, cq);
    // with three critical points the outer two are the minima
    let minima: Vec<f64> = if roots.len() == 3 {
        vec![roots[0], roots[2]]
    } else {
        vec![roots[0]]
    };
    let mut vals: Vec<(f64, f64)> = minima.iter().map(|&z| (z, quartic_f(z, mu, p))).collect();
    vals.sort_by(|a, b| a.1.total_cmp(&b.1));
    QuarticMin {
        z: vals[0].0,
        value: vals[0].1,
        other: vals.get(1).copied(),
    }
}
