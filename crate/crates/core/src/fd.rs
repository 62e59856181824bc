//! Finite-difference reference solver for the steady state of
//!
//! `∂t n_i = ε² n_i'' + n_i R_i(z, N_i) + m_j n_j - m_i n_i`
//!
//! on `[-L, L]` with no-flux ends, by parabolic relaxation: implicit
//! diffusion (one tridiagonal solve per habitat and step), explicit reaction
//! and migration with `N_i` frozen over the step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hj::uniform_grid;
use crate::model::{check_assumptions, growth_rate, Habitat, ModelParams, PopState, Regime};
use crate::moments::MomentSummary;
use crate::par;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Init {
    /// Unit-mass Gaussian with variance 1 in both habitats.
    Gaussian { center: f64 },
    Densities { n1: Vec<f64>, n2: Vec<f64> },
}

impl Init {
    /// Centered at 0, `-θ` and `θ`.
    pub fn standard(p: &ModelParams) -> [Init; 3] {
        [
            Init::Gaussian { center: 0.0 },
            Init::Gaussian { center: -p.theta },
            Init::Gaussian { center: p.theta },
        ]
    }

    pub fn label(&self) -> String {
        match self {
            Init::Gaussian { center } => format!("gaussian@{center}"),
            Init::Densities { .. } => "custom".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdOptions {
    pub eps: f64,
    pub half_width: f64,
    pub n_pts: usize,
    pub init: Init,
    /// Convergence threshold on `sup |Δn| / Δt`.
    pub tol: f64,
    pub max_steps: usize,
    /// Fraction of `1 / max |R|` used as the time step.
    pub cfl: f64,
}

impl FdOptions {
    pub const MIN_POINTS: usize = 801;

    /// `L = θ + 3`, 4001 points, Gaussian start at 0.
    pub fn new(p: &ModelParams, eps: f64) -> Self {
        FdOptions {
            eps,
            half_width: p.theta + 3.0,
            n_pts: 4001,
            init: Init::Gaussian { center: 0.0 },
            tol: 1e-10,
            max_steps: 20_000_000,
            cfl: 0.1,
        }
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_grid(mut self, half_width: f64, n_pts: usize) -> Self {
        self.half_width = half_width;
        self.n_pts = n_pts;
        self
    }

    pub fn validate(&self, p: &ModelParams) -> Result<()> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidInput(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.half_width >= p.theta + 2.0) {
            return Err(Error::InvalidInput(format!(
                "half-width L = {} must be at least theta + 2 = {}",
                self.half_width,
                p.theta + 2.0
            )));
        }
        if self.n_pts < Self::MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "n_pts = {} is below the minimum {}",
                self.n_pts,
                Self::MIN_POINTS
            )));
        }
        if let Init::Densities { n1, n2 } = &self.init {
            if n1.len() != self.n_pts || n2.len() != self.n_pts {
                return Err(Error::InvalidInput("initial densities do not match the grid".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub z: Vec<f64>,
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    pub big_n: PopState,
    pub eps: f64,
    pub residual: f64,
    pub iterations: usize,
}

impl GridSolution {
    pub fn h(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    pub fn density(&self, habitat: Habitat) -> &[f64] {
        match habitat {
            Habitat::One => &self.n1,
            Habitat::Two => &self.n2,
        }
    }

    /// `∫ n_i R_i + m_j N_j - m_i N_i` for each habitat.
    pub fn balance(&self, p: &ModelParams) -> [f64; 2] {
        let h = self.h();
        let one = |habitat: Habitat, other: Habitat| {
            let n = self.density(habitat);
            let nn = self.big_n.get(habitat);
            let growth: Vec<f64> =
                self.z.iter().zip(n).map(|(&z, &v)| v * growth_rate(z, nn, habitat, p)).collect();
            trapezoid(&growth, h) + p.m(other) * self.big_n.get(other) - p.m(habitat) * nn
        };
        [one(Habitat::One, Habitat::Two), one(Habitat::Two, Habitat::One)]
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// Solves `(1 + 2c) x_k - c (x_{k-1} + x_{k+1}) = d_k` with reflecting ends
/// (`x_{-1} = x_1`, `x_n = x_{n-2}`), in place.
fn solve_diffusion(d: &mut [f64], c: f64, scratch: &mut [f64]) {
    let n = d.len();
    let diag = 1.0 + 2.0 * c;
    // forward sweep; row 0 has upper entry -2c, row n-1 lower entry -2c
    let mut upper = -2.0 * c / diag;
    scratch[0] = upper;
    d[0] /= diag;
    for k in 1..n {
        let lower = if k == n - 1 { -2.0 * c } else { -c };
        let denom = diag - lower * upper;
        upper = -c / denom;
        scratch[k] = upper;
        d[k] = (d[k] - lower * d[k - 1]) / denom;
    }
    for k in (0..n - 1).rev() {
        d[k] -= scratch[k] * d[k + 1];
    }
}

fn gaussian(z: &[f64], center: f64) -> Vec<f64> {
    let norm = (2.0 * std::f64::consts::PI).sqrt().recip();
    z.iter().map(|&x| norm * (-0.5 * (x - center) * (x - center)).exp()).collect()
}

/// Relaxes to the steady state; see the module docs for the scheme.
pub fn steady_state_solve(p: &ModelParams, opts: &FdOptions) -> Result<GridSolution> {
    let report = check_assumptions(p);
    if report.regime == Regime::Invalid {
        return Err(Error::Regime(report.message));
    }
    opts.validate(p)?;
    let l = opts.half_width;
    let z = uniform_grid(-l, l, opts.n_pts);
    let h = z[1] - z[0];
    let (mut n1, mut n2) = match &opts.init {
        Init::Gaussian { center } => (gaussian(&z, *center), gaussian(&z, *center)),
        Init::Densities { n1, n2 } => (n1.clone(), n2.clone()),
    };
    let eps2 = opts.eps * opts.eps;
    let m = z.len();
    // selection part of R_i, without the -κ_i N_i term
    let sel = |habitat: Habitat| -> Vec<f64> {
        z.iter().map(|&x| growth_rate(x, 0.0, habitat, p)).collect()
    };
    let (s1, s2) = (sel(Habitat::One), sel(Habitat::Two));
    let (mut next1, mut next2) = (vec![0.0; m], vec![0.0; m]);
    let mut scratch = vec![0.0; m];
    let mut residual = f64::INFINITY;
    for step in 1..=opts.max_steps {
        let big1 = trapezoid(&n1, h);
        let big2 = trapezoid(&n2, h);
        if big1 + big2 < 1e-12 {
            return Err(Error::Extinction { total: big1 + big2 });
        }
        let (c1, c2) = (p.kappa1 * big1, p.kappa2 * big2);
        let max_r = s1
            .iter()
            .map(|s| (s - c1).abs())
            .chain(s2.iter().map(|s| (s - c2).abs()))
            .fold(0.0f64, f64::max);
        let dt = opts.cfl / max_r.max(1e-12);
        for k in 0..m {
            next1[k] = n1[k] + dt * (n1[k] * (s1[k] - c1) + p.m2 * n2[k] - p.m1 * n1[k]);
            next2[k] = n2[k] + dt * (n2[k] * (s2[k] - c2) + p.m1 * n1[k] - p.m2 * n2[k]);
        }
        let c = dt * eps2 / (h * h);
        solve_diffusion(&mut next1, c, &mut scratch);
        solve_diffusion(&mut next2, c, &mut scratch);
        let mut change: f64 = 0.0;
        for k in 0..m {
            next1[k] = next1[k].max(0.0);
            next2[k] = next2[k].max(0.0);
            change = change.max((next1[k] - n1[k]).abs()).max((next2[k] - n2[k]).abs());
        }
        std::mem::swap(&mut n1, &mut next1);
        std::mem::swap(&mut n2, &mut next2);
        residual = change / dt;
        if residual < opts.tol {
            let big_n = PopState::new(trapezoid(&n1, h), trapezoid(&n2, h));
            return Ok(GridSolution { z, n1, n2, big_n, eps: opts.eps, residual, iterations: step });
        }
    }
    Err(Error::NonConvergence { iterations: opts.max_steps, residual })
}

/// Solves every option set independently (in parallel with the `parallel`
/// feature); results are in input order.
pub fn steady_state_solve_many(p: &ModelParams, opts: &[FdOptions]) -> Vec<Result<GridSolution>> {
    par::map(opts, |o| steady_state_solve(p, o))
}

/// Trapezoid mass, mean, central variance and standardized third moment.
pub fn density_moments(z: &[f64], n: &[f64]) -> (f64, f64, f64, f64) {
    let h = z[1] - z[0];
    let mass = trapezoid(n, h);
    let weighted = |f: &dyn Fn(f64) -> f64| {
        let v: Vec<f64> = z.iter().zip(n).map(|(&x, &d)| f(x) * d).collect();
        trapezoid(&v, h) / mass
    };
    let mean = weighted(&|x| x);
    let var = weighted(&|x| (x - mean).powi(2));
    let third = weighted(&|x| (x - mean).powi(3));
    (mass, mean, var, third / var.powf(1.5))
}

pub fn extract_numeric_moments(gs: &GridSolution) -> MomentSummary {
    let (a1, m1, v1, s1) = density_moments(&gs.z, &gs.n1);
    let (a2, m2, v2, s2) = density_moments(&gs.z, &gs.n2);
    MomentSummary { eps: gs.eps, n_eps: [a1, a2], mean: [m1, m2], variance: [v1, v2], skewness: [s1, s2] }
}

/// `u_{ε,i} = ε ln(√(2πε) n_{ε,i})`; NaN where `n ≤ 1e-300`.
pub fn u_from_density(gs: &GridSolution) -> [Vec<f64>; 2] {
    let eps = gs.eps;
    let scale = (2.0 * std::f64::consts::PI * eps).sqrt();
    let conv = |n: &[f64]| -> Vec<f64> {
        n.iter().map(|&v| if v > 1e-300 { eps * (scale * v).ln() } else { f64::NAN }).collect()
    };
    [conv(&gs.n1), conv(&gs.n2)]
}
