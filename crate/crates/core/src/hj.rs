//! Hamilton–Jacobi limit profile `u`, where `-|u'|² = W(z, N*)`, `max u = 0`.
//!
//! `u` is explicit: `-|∫_{z*}^{z} √(-W)|` from each ESS point (maximum
//! over points when dimorphic). Integrals are taken per grid cell by adaptive
//! Simpson, since the integrand has an `|s|` kink at every support point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ess::{Ess, EssKind, SourceSinkEss, BOUNDARY_TOL};
use crate::model::{effective_fitness, growth_rate, Habitat, ModelParams, PopState};
use crate::quadrature::cumulative_from;
use crate::series::Series;

pub const QUAD_TOL: f64 = 1e-12;
/// Largest grid value of `W` tolerated off the support.
pub const FITNESS_TOL: f64 = 1e-8;
pub const DEFAULT_POINTS: usize = 4001;
pub const DEFAULT_MARGIN: f64 = 3.0;

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { hi } else { lo + h * k as f64 }).collect()
}

/// 4001 points on `[-θ-3, θ+3]`.
pub fn default_grid(p: &ModelParams) -> Vec<f64> {
    let l = p.theta + DEFAULT_MARGIN;
    uniform_grid(-l, l, DEFAULT_POINTS)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UProfile {
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub support: Vec<f64>,
    pub n_star: PopState,
}

impl UProfile {
    pub fn max(&self) -> (f64, f64) {
        self.grid
            .iter()
            .zip(&self.u)
            .fold((f64::NEG_INFINITY, f64::NAN), |acc, (&z, &u)| if u > acc.0 { (u, z) } else { acc })
    }

    /// Linear interpolation; constant beyond the grid ends.
    pub fn at(&self, z: f64) -> f64 {
        let g = &self.grid;
        let k = g.partition_point(|&x| x < z);
        if k == 0 {
            return self.u[0];
        }
        if k >= g.len() {
            return self.u[g.len() - 1];
        }
        let t = (z - g[k - 1]) / (g[k] - g[k - 1]);
        self.u[k - 1] + t * (self.u[k] - self.u[k - 1])
    }
}

fn sqrt_neg_w(z: f64, n: PopState, p: &ModelParams) -> f64 {
    let w = effective_fitness(z, n, p);
    (-w).max(0.0).sqrt()
}

fn check_nonpositive(grid: &[f64], n: PopState, p: &ModelParams) -> Result<()> {
    for &z in grid {
        let value = effective_fitness(z, n, p);
        if value > FITNESS_TOL {
            return Err(Error::FitnessPositive { z, value });
        }
    }
    Ok(())
}

/// `-|∫_{z0}^{z} √(-W)|` on the grid.
pub fn branch_from(grid: &[f64], z0: f64, n: PopState, p: &ModelParams) -> Vec<f64> {
    cumulative_from(grid, z0, |x| sqrt_neg_w(x, n, p), QUAD_TOL)
        .into_iter()
        .map(|v| -v.abs())
        .collect()
}

pub fn u_monomorphic(grid: &[f64], ess: &Ess, p: &ModelParams) -> Result<UProfile> {
    let EssKind::Monomorphic { z_star } = ess.kind else {
        return Err(Error::InvalidInput("u_monomorphic needs a monomorphic ESS".into()));
    };
    check_nonpositive(grid, ess.n_star, p)?;
    Ok(UProfile {
        grid: grid.to_vec(),
        u: branch_from(grid, z_star, ess.n_star, p),
        support: vec![z_star],
        n_star: ess.n_star,
    })
}

pub fn u_dimorphic(grid: &[f64], ess: &Ess, p: &ModelParams) -> Result<UProfile> {
    let EssKind::Dimorphic { z_1, z_2, .. } = ess.kind else {
        return Err(Error::InvalidInput("u_dimorphic needs a dimorphic ESS".into()));
    };
    check_nonpositive(grid, ess.n_star, p)?;
    let a = branch_from(grid, z_1, ess.n_star, p);
    let b = branch_from(grid, z_2, ess.n_star, p);
    Ok(UProfile {
        grid: grid.to_vec(),
        u: a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        support: vec![z_1, z_2],
        n_star: ess.n_star,
    })
}

pub fn u_profile(grid: &[f64], ess: &Ess, p: &ModelParams) -> Result<UProfile> {
    match ess.kind {
        EssKind::Monomorphic { .. } => u_monomorphic(grid, ess, p),
        EssKind::Dimorphic { .. } => u_dimorphic(grid, ess, p),
    }
}

/// `W(z0 + s; N)` as a power series in `s`.
pub fn fitness_series(z0: f64, n: PopState, p: &ModelParams) -> Series {
    let habitat = |h: Habitat| {
        let d = z0 - p.optimum(h);
        let g = p.g(h);
        Series::quadratic(growth_rate(z0, n.get(h), h, p) - p.m(h), -2.0 * g * d, -g)
    };
    let a = habitat(Habitat::One);
    let b = habitat(Habitat::Two);
    let coupling = p.m1 * p.m2;
    if coupling == 0.0 {
        return if a.coeff(0) >= b.coeff(0) { a } else { b };
    }
    let sum = a + b;
    let diff = a - b;
    let disc = (diff * diff + Series::constant(4.0 * coupling)).sqrt();
    if sum.coeff(0) >= 0.0 {
        (sum + disc).scale(0.5)
    } else {
        // same root without cancellation
        (a * b - Series::constant(coupling)).scale(2.0) / (sum - disc)
    }
}

/// `u(z* + s) = -A/2 s² + B s³ + C s⁴ + O(s⁵)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UTaylor {
    pub z_star: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl UTaylor {
    pub fn eval(&self, z: f64) -> f64 {
        let s = z - self.z_star;
        s * s * (-0.5 * self.a + s * (self.b + s * self.c))
    }
}

/// Taylor data from the series `-W = a2 s² + a3 s³ + a4 s⁴`.
pub fn u_taylor(z_star: f64, n: PopState, p: &ModelParams) -> Result<UTaylor> {
    let w = fitness_series(z_star, n, p);
    let (a2, a3, a4) = (-w.coeff(2), -w.coeff(3), -w.coeff(4));
    if !(a2 >= 1e-12) {
        return Err(Error::DegenerateQuadratic { z: z_star, a2 });
    }
    let a = a2.sqrt();
    Ok(UTaylor {
        z_star,
        a,
        b: -a3 / (6.0 * a),
        c: a3 * a3 / (32.0 * a * a * a) - a4 / (8.0 * a),
    })
}

/// Central-difference eikonal defect `|(u')² + W|` at smooth interior points.
///
/// Points within `guard` cells of a support point, or of a switch between
/// the two branches of a dimorphic profile, are skipped.
pub fn eikonal_residual(profile: &UProfile, p: &ModelParams, guard: usize) -> f64 {
    let g = &profile.grid;
    let n = g.len();
    let branches: Vec<Vec<f64>> =
        profile.support.iter().map(|&z0| branch_from(g, z0, profile.n_star, p)).collect();
    let active: Vec<usize> = (0..n)
        .map(|k| {
            (0..branches.len())
                .max_by(|&i, &j| branches[i][k].total_cmp(&branches[j][k]))
                .unwrap_or(0)
        })
        .collect();
    let h = (g[n - 1] - g[0]) / (n - 1) as f64;
    let near_support = |z: f64| profile.support.iter().any(|&s| (z - s).abs() <= guard as f64 * h + 1e-12);
    let mut worst: f64 = 0.0;
    for k in guard.max(1)..n - guard.max(1) {
        if near_support(g[k]) {
            continue;
        }
        let lo = k.saturating_sub(guard);
        let hi = (k + guard).min(n - 1);
        if active[lo..=hi].iter().any(|&a| a != active[k]) {
            continue;
        }
        let du = (profile.u[k + 1] - profile.u[k - 1]) / (g[k + 1] - g[k - 1]);
        let w = effective_fitness(g[k], profile.n_star, p);
        worst = worst.max((du * du + w).abs());
    }
    worst
}

/// Grid indices of near-zero local maxima of `values`.
pub fn near_zero_maxima(values: &[f64], threshold: f64) -> Vec<usize> {
    let n = values.len();
    (0..n)
        .filter(|&k| {
            let left = k == 0 || values[k] >= values[k - 1];
            let right = k + 1 == n || values[k] >= values[k + 1];
            left && right && values[k] > -threshold
        })
        .collect()
}

/// Whether `{u = 0}` and `{W = 0}` coincide to within one grid cell.
pub fn zero_levels_match(profile: &UProfile, p: &ModelParams) -> bool {
    let g = &profile.grid;
    let h = (g[g.len() - 1] - g[0]) / (g.len() - 1) as f64;
    let w: Vec<f64> = g.iter().map(|&z| effective_fitness(z, profile.n_star, p)).collect();
    let zu = near_zero_maxima(&profile.u, h);
    let zw = near_zero_maxima(&w, h);
    let within = |a: &[usize], b: &[usize]| a.iter().all(|&i| b.iter().any(|&j| i.abs_diff(j) <= 1));
    !zu.is_empty() && within(&zu, &zw) && within(&zw, &zu)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalParabola {
    pub center: f64,
    /// `u₂(z) = -coefficient (z - center)²` on `[lo, hi]`.
    pub coefficient: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSinkU {
    pub u1: UProfile,
    /// Upper bound `max(-|∫_θ^z √(-W)|, -|∫_{-θ}^z √(-W)|)` for `u₂`.
    pub u2_upper: Vec<f64>,
    pub near_source: LocalParabola,
    /// Present when patch 2 is dimorphic.
    pub near_sink: Option<LocalParabola>,
    /// Set when patch 2 is monomorphic, where `u₂(θ) < 0`.
    pub u2_theta_negative: bool,
}

/// Connected set around `z0` on which `pred` holds, as grid end points.
fn component(grid: &[f64], z0: f64, pred: impl Fn(f64) -> bool) -> (f64, f64) {
    let k0 = grid.partition_point(|&z| z < z0).min(grid.len() - 1);
    let mut lo = k0;
    while lo > 0 && pred(grid[lo - 1]) {
        lo -= 1;
    }
    let mut hi = k0;
    while hi + 1 < grid.len() && pred(grid[hi + 1]) {
        hi += 1;
    }
    (grid[lo], grid[hi])
}

pub fn source_sink_u(grid: &[f64], ss: &SourceSinkEss, p: &ModelParams) -> Result<SourceSinkU> {
    if ss.con_dim_source_gap.abs() <= BOUNDARY_TOL {
        return Err(Error::DegenerateBoundary);
    }
    let th = p.theta;
    let n = ss.patch2.n_star;
    check_nonpositive(grid, n, p)?;
    let k1 = 0.5 * p.g1.sqrt();
    let u1: Vec<f64> = grid.iter().map(|&z| -k1 * (z + th) * (z + th)).collect();
    let from_sink = branch_from(grid, th, n, p);
    let from_source = branch_from(grid, -th, n, p);
    let u2_upper = from_sink.iter().zip(&from_source).map(|(a, b)| a.max(*b)).collect();

    let source_branch = |z: f64| -p.g1 * (z + th) * (z + th);
    let sink_branch = |z: f64| growth_rate(z, n.n2, Habitat::Two, p);
    let (lo, hi) = component(grid, -th, |z| source_branch(z) >= sink_branch(z));
    let near_source = LocalParabola { center: -th, coefficient: k1, lo, hi };
    let dimorphic = matches!(ss.patch2.kind, EssKind::Dimorphic { .. });
    let near_sink = dimorphic.then(|| {
        let (lo, hi) = component(grid, th, |z| sink_branch(z) >= source_branch(z));
        LocalParabola { center: th, coefficient: 0.5 * p.g2.sqrt(), lo, hi }
    });
    Ok(SourceSinkU {
        u1: UProfile { grid: grid.to_vec(), u: u1, support: vec![-th], n_star: n },
        u2_upper,
        near_source,
        near_sink,
        u2_theta_negative: !dimorphic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ess::{solve_ess, source_sink_ess};

    fn mono() -> ModelParams {
        ModelParams::symmetric(1.5, 0.5, 1.0, 1.2, 1.0)
    }

    #[test]
    fn symmetric_taylor() {
        let p = mono();
        let e = solve_ess(&p).unwrap();
        let t = u_taylor(0.0, e.n_star, &p).unwrap();
        assert!((t.a - 12f64.sqrt().recip()).abs() < 1e-8);
        assert!(t.b.abs() < 1e-8);
    }

    #[test]
    fn fitness_series_matches_function() {
        let p = ModelParams { r1: 1.6, r2: 1.4, ..mono() };
        let n = PopState::new(0.8, 0.6);
        for z0 in [-0.7, 0.1, 0.9] {
            let s = fitness_series(z0, n, &p);
            for ds in [1e-2f64, -2e-2] {
                let poly: f64 = (0..5).map(|k| s.coeff(k) * ds.powi(k as i32)).sum();
                assert!((poly - effective_fitness(z0 + ds, n, &p)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn profile_symmetric_and_peaked() {
        let p = mono();
        let e = solve_ess(&p).unwrap();
        let g = default_grid(&p);
        let prof = u_monomorphic(&g, &e, &p).unwrap();
        let n = g.len();
        for k in 0..n {
            assert!((prof.u[k] - prof.u[n - 1 - k]).abs() < 1e-10);
            assert!(prof.u[k] <= 0.0);
        }
        assert!(prof.max().0.abs() < 1e-12);
        assert!(eikonal_residual(&prof, &p, 2) < 1e-5);
        assert!(zero_levels_match(&prof, &p));
    }

    #[test]
    fn dimorphic_profile() {
        let p = ModelParams::symmetric(1.0, 1.0, 1.0, 0.5, 1.0);
        let e = solve_ess(&p).unwrap();
        let g = default_grid(&p);
        let prof = u_dimorphic(&g, &e, &p).unwrap();
        let zd = 0.9375f64.sqrt();
        assert!(prof.at(zd).abs() < 1e-6 && prof.at(-zd).abs() < 1e-6);
        assert!(eikonal_residual(&prof, &p, 2) < 1e-5);
        assert!(zero_levels_match(&prof, &p));
        // a single interior minimum between the peaks
        let inner: Vec<f64> = g.iter().zip(&prof.u).filter(|(z, _)| z.abs() < zd - 0.01).map(|(_, u)| *u).collect();
        let minima = (1..inner.len() - 1).filter(|&k| inner[k] < inner[k - 1] && inner[k] <= inner[k + 1]).count();
        assert_eq!(minima, 1);
    }

    #[test]
    fn source_sink_profiles() {
        let p = ModelParams { m2: 0.0, ..ModelParams::symmetric(1.0, 1.0, 1.0, 0.5, 1.0) };
        let ss = source_sink_ess(&p).unwrap();
        let g = default_grid(&p);
        let u = source_sink_u(&g, &ss, &p).unwrap();
        assert!(u.near_sink.is_some() && !u.u2_theta_negative);
        assert!(u.near_source.lo < -p.theta && u.near_source.hi > -p.theta);
        let t = u_taylor(-p.theta, ss.patch2.n_star, &p).unwrap();
        assert!((t.a - 1.0).abs() < 1e-14 && t.b == 0.0 && t.c == 0.0);
    }
}
