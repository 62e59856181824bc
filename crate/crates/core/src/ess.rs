//! Evolutionary stable strategies.
//!
//! A two-way ESS is either dimorphic, with support `±z^D` and equal size
//! indicators `μ1 = μ2 = μ* = m1 m2 / (4 θ² g1 g2)`, or monomorphic. The
//! monomorphic point is the unique fixed point of the decreasing map
//! `G ∘ F`, where `F(μ2) = (μ1, z̄)` solves
//! `min_z f(z; μ1, μ2) = f(z̄; μ1, μ2) = m1 m2 / (g1 g2)` and `G` returns the
//! `μ2` that puts `(μ1, z̄)` at demographic equilibrium.
//!
//! The fixed-point constructions assume `r1 - m1 > 0`; otherwise the problem
//! is solved on the habitat-exchanged parameters and mapped back.

use serde::{Deserialize, Serialize};

use crate::bisect::{expand_upper, shrink_lower, Bisection};
use crate::cubic::quartic_min;
use crate::error::{Error, Result};
use crate::model::{
    check_assumptions, effective_fitness, effective_fitness_mu, growth_rate, mu_of_n, n_of_mu,
    quartic_f, Habitat, ModelParams, MuState, PopState, Regime,
};

/// Absolute tolerance under which a dimorphism condition counts as an equality.
pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EssKind {
    Monomorphic {
        z_star: f64,
    },
    /// `weights[k][i]` is the mass at support point `k` in habitat `i`.
    Dimorphic {
        z_1: f64,
        z_2: f64,
        weights: [[f64; 2]; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ess {
    pub kind: EssKind,
    pub n_star: PopState,
    pub mu_star: MuState,
    /// Set when a dimorphism condition (or `con-dim-source`) holds with
    /// equality within [`BOUNDARY_TOL`].
    pub boundary_case: bool,
    pub conditions: Option<DimorphismConditions>,
}

impl Ess {
    pub fn support(&self) -> Vec<f64> {
        match self.kind {
            EssKind::Monomorphic { z_star } => vec![z_star],
            EssKind::Dimorphic { z_1, z_2, .. } => vec![z_1, z_2],
        }
    }

    pub fn is_monomorphic(&self) -> bool {
        matches!(self.kind, EssKind::Monomorphic { .. })
    }

    pub fn monomorphic_point(&self) -> Option<f64> {
        match self.kind {
            EssKind::Monomorphic { z_star } => Some(z_star),
            EssKind::Dimorphic { .. } => None,
        }
    }

    fn mirrored(&self) -> Ess {
        let kind = match self.kind {
            EssKind::Monomorphic { z_star } => EssKind::Monomorphic { z_star: -z_star },
            EssKind::Dimorphic { z_1, z_2, weights } => EssKind::Dimorphic {
                z_1: -z_2,
                z_2: -z_1,
                weights: [[weights[1][1], weights[1][0]], [weights[0][1], weights[0][0]]],
            },
        };
        Ess {
            kind,
            n_star: self.n_star.swapped(),
            mu_star: self.mu_star.swapped(),
            boundary_case: self.boundary_case,
            conditions: None,
        }
    }

    /// Max of `W(z, N*)` over `grid` and where it is attained.
    pub fn fitness_scan(&self, grid: &[f64], p: &ModelParams) -> (f64, f64) {
        grid.iter()
            .map(|&z| (effective_fitness(z, self.n_star, p), z))
            .fold((f64::NEG_INFINITY, f64::NAN), |acc, x| if x.0 > acc.0 { x } else { acc })
    }
}

/// `μ* = m1 m2 / (4 θ² g1 g2)`.
pub fn mu_star(p: &ModelParams) -> f64 {
    p.m1 * p.m2 / (4.0 * p.theta * p.theta * p.g1 * p.g2)
}

/// `1 - m1 m2 / (4 g1 g2 θ⁴)`; positive iff `as1:dim` holds.
pub fn as1_gap(p: &ModelParams) -> f64 {
    1.0 - mu_star(p) / (p.theta * p.theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimorphicCandidate {
    pub z_d: f64,
    pub n: PopState,
    pub mu_star: f64,
}

pub fn dimorphic_candidate(p: &ModelParams) -> Result<DimorphicCandidate> {
    let gap = as1_gap(p);
    if gap < -BOUNDARY_TOL {
        return Err(Error::NotDimorphicRegime { gap });
    }
    let ms = mu_star(p);
    let z_d = (p.theta * p.theta - ms).max(0.0).sqrt();
    let n = n_of_mu(MuState::new(ms, ms), p);
    Ok(DimorphicCandidate { z_d, n, mu_star: ms })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimorphismConditions {
    /// `1 - m1 m2 / (4 g1 g2 θ⁴)`.
    pub c1: f64,
    /// `m2 N2 + (R1(-z^D) - m1) N1`; `None` when `as1:dim` fails.
    pub c2: Option<f64>,
    /// `m1 N1 + (R2(z^D) - m2) N2`.
    pub c3: Option<f64>,
    /// `m1 N1 + (R2(-z^D) - m2) N2`, negative iff `c2 > 0`.
    pub eq7: Option<f64>,
    /// `m2 N2 + (R1(z^D) - m1) N1`, negative iff `c3 > 0`.
    pub eq8: Option<f64>,
}

impl DimorphismConditions {
    pub fn as1(&self) -> bool {
        self.c1 > 0.0
    }

    pub fn as2(&self) -> bool {
        self.c2.is_some_and(|c| c > 0.0)
    }

    pub fn as3(&self) -> bool {
        self.c3.is_some_and(|c| c > 0.0)
    }

    pub fn all_strict(&self) -> bool {
        self.c1 > BOUNDARY_TOL
            && self.c2.is_some_and(|c| c > BOUNDARY_TOL)
            && self.c3.is_some_and(|c| c > BOUNDARY_TOL)
    }

    /// Sign identities between `c2`/`eq7` and `c3`/`eq8`.
    pub fn equivalences_hold(&self) -> bool {
        let opposite = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => a.abs() < BOUNDARY_TOL || b.abs() < BOUNDARY_TOL || (a > 0.0) == (b < 0.0),
            _ => true,
        };
        opposite(self.c2, self.eq7) && opposite(self.c3, self.eq8)
    }
}

pub fn dimorphism_conditions(p: &ModelParams) -> DimorphismConditions {
    let c1 = as1_gap(p);
    let Ok(cand) = dimorphic_candidate(p) else {
        return DimorphismConditions { c1, c2: None, c3: None, eq7: None, eq8: None };
    };
    let (zd, n) = (cand.z_d, cand.n);
    let r1 = |z: f64| growth_rate(z, n.n1, Habitat::One, p) - p.m1;
    let r2 = |z: f64| growth_rate(z, n.n2, Habitat::Two, p) - p.m2;
    DimorphismConditions {
        c1,
        c2: Some(p.m2 * n.n2 + r1(-zd) * n.n1),
        c3: Some(p.m1 * n.n1 + r2(zd) * n.n2),
        eq7: Some(p.m1 * n.n1 + r2(-zd) * n.n2),
        eq8: Some(p.m2 * n.n2 + r1(zd) * n.n1),
    }
}

/// Dirac weights `ν[k][i]` of the dimorphic ESS.
pub fn dimorphic_weights(p: &ModelParams) -> Result<[[f64; 2]; 2]> {
    let cond = dimorphism_conditions(p);
    if !cond.all_strict() {
        return Err(Error::NotDimorphic(format!(
            "conditions c1 = {:.3e}, c2 = {:?}, c3 = {:?} are not all strictly positive",
            cond.c1, cond.c2, cond.c3
        )));
    }
    let cand = dimorphic_candidate(p)?;
    let (zd, n) = (cand.z_d, cand.n);
    let a = growth_rate(-zd, n.n1, Habitat::One, p) - p.m1;
    let b = growth_rate(zd, n.n2, Habitat::Two, p) - p.m2;
    let den = p.m1 * p.m2 - a * b;
    let (c2, c3) = (cond.c2.unwrap_or(0.0), cond.c3.unwrap_or(0.0));
    let first = [c3 / den * p.m2, -c3 / den * a];
    let second = [-c2 / den * b, c2 / den * p.m1];
    Ok([first, second])
}

fn require_two_way(p: &ModelParams) -> Result<()> {
    check_assumptions(p).require(Regime::TwoWay)
}

/// `F(μ2) = (μ1, z̄)`.
pub fn f_map(mu2: f64, p: &ModelParams) -> Result<(f64, f64)> {
    if !(mu2 > 0.0) {
        return Err(Error::InvalidInput(format!("F map needs mu2 > 0, got {mu2}")));
    }
    let ms = mu_star(p);
    if as1_gap(p) > 0.0 && (mu2 - ms).abs() <= 1e-14 * ms.max(1.0) {
        return Err(Error::Domain { mu_star: ms });
    }
    let target = p.m1 * p.m2 / (p.g1 * p.g2);
    let defect = |mu1: f64| Ok(quartic_min(MuState::new(mu1, mu2), p).value - target);
    // f >= μ1 μ2 everywhere, so μ1 = target / μ2 already overshoots
    let hi = target / mu2;
    let mu1 = Bisection::FULL.solve_with_signs(defect, 0.0, hi, -target, defect(hi)?)?;
    let z_bar = quartic_min(MuState::new(mu1, mu2), p).z;
    Ok((mu1, z_bar))
}

/// `G(μ1, z̄)`: the `μ2` at which `(μ1, z̄)` is a demographic equilibrium.
pub fn g_map(mu1: f64, z_bar: f64, p: &ModelParams) -> f64 {
    let x = z_bar + p.theta;
    let n1 = (p.g1 * mu1 + p.r1 - p.m1) / p.kappa1;
    (p.kappa2 * p.g1 / p.m2 * (x * x + mu1) * n1 + p.m2 - p.r2) / p.g2
}

/// The branch of `(0, ∞)` on which the monomorphic fixed point lies.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    Whole,
    BelowMuStar,
    AboveMuStar,
}

fn gf_minus_identity(mu2: f64, p: &ModelParams, branch: Branch, zd: f64) -> Result<f64> {
    match f_map(mu2, p) {
        Ok((mu1, z_bar)) => Ok(g_map(mu1, z_bar, p) - mu2),
        Err(Error::Domain { mu_star }) => {
            let z = if branch == Branch::BelowMuStar { zd } else { -zd };
            Ok(g_map(mu_star, z, p) - mu_star)
        }
        Err(e) => Err(e),
    }
}

fn monomorphic_from_mu2(mu2: f64, p: &ModelParams, cond: DimorphismConditions) -> Result<Ess> {
    let (mu1, z_star) = f_map(mu2, p)?;
    let mu = MuState::new(mu1, mu2);
    Ok(Ess {
        kind: EssKind::Monomorphic { z_star },
        n_star: n_of_mu(mu, p),
        mu_star: mu,
        boundary_case: cond.c1.abs() <= BOUNDARY_TOL,
        conditions: Some(cond),
    })
}

/// Unique monomorphic ESS, by bisection on the fixed point of `G ∘ F`.
pub fn monomorphic_ess(p: &ModelParams) -> Result<Ess> {
    require_two_way(p)?;
    if p.r1 - p.m1 <= 0.0 {
        let mut ess = monomorphic_ess(&p.mirrored())?.mirrored();
        ess.conditions = Some(dimorphism_conditions(p));
        return Ok(ess);
    }
    let cond = dimorphism_conditions(p);
    let bis = Bisection::default();
    let theta2 = p.theta * p.theta;

    if cond.c1 > BOUNDARY_TOL {
        let cand = dimorphic_candidate(p)?;
        let (ms, zd) = (cand.mu_star, cand.z_d);
        let c2 = cond.c2.unwrap_or(f64::NAN);
        let c3 = cond.c3.unwrap_or(f64::NAN);
        if c2 > BOUNDARY_TOL && c3 > BOUNDARY_TOL {
            return Err(Error::DimorphicRegime);
        }
        if c2.abs() <= BOUNDARY_TOL || c3.abs() <= BOUNDARY_TOL {
            // equality in as2:dim gives -z^D, equality in as3:dim gives z^D
            let z_star = if c2.abs() <= BOUNDARY_TOL { -zd } else { zd };
            return Ok(Ess {
                kind: EssKind::Monomorphic { z_star },
                n_star: cand.n,
                mu_star: MuState::new(ms, ms),
                boundary_case: true,
                conditions: Some(cond),
            });
        }
        let phi_below = |x: f64| gf_minus_identity(x, p, Branch::BelowMuStar, zd);
        let phi_above = |x: f64| gf_minus_identity(x, p, Branch::AboveMuStar, zd);
        let mu2 = if c3 < 0.0 {
            // as2:dim holds, as3:dim negative: fixed point in (0, μ*)
            let f_hi = g_map(ms, zd, p) - ms;
            let (lo, f_lo) = shrink_lower(phi_below, 0.0, 0.5 * ms, true, "G o F on (0, mu*)")?;
            bis.solve_with_signs(phi_below, lo, ms, f_lo, f_hi)?
        } else {
            let f_lo = g_map(ms, -zd, p) - ms;
            let (hi, f_hi) = expand_upper(phi_above, ms, ms.max(theta2), false, "G o F on (mu*, inf)")?;
            bis.solve_with_signs(phi_above, ms, hi, f_lo, f_hi)?
        };
        return monomorphic_from_mu2(mu2, p, cond);
    }

    let phi = |x: f64| gf_minus_identity(x, p, Branch::Whole, 0.0);
    let (lo, f_lo) = shrink_lower(phi, 0.0, theta2, true, "G o F near 0")?;
    let (hi, f_hi) = expand_upper(phi, lo, theta2, false, "G o F at infinity")?;
    let mu2 = bis.solve_with_signs(phi, lo, hi, f_lo, f_hi)?;
    monomorphic_from_mu2(mu2, p, cond)
}

fn dimorphic_ess(p: &ModelParams) -> Result<Ess> {
    let cand = dimorphic_candidate(p)?;
    let weights = dimorphic_weights(p)?;
    Ok(Ess {
        kind: EssKind::Dimorphic { z_1: -cand.z_d, z_2: cand.z_d, weights },
        n_star: cand.n,
        mu_star: MuState::new(cand.mu_star, cand.mu_star),
        boundary_case: false,
        conditions: Some(dimorphism_conditions(p)),
    })
}

/// The unique two-way ESS.
pub fn solve_ess(p: &ModelParams) -> Result<Ess> {
    require_two_way(p)?;
    let cond = dimorphism_conditions(p);
    if cond.all_strict() {
        return dimorphic_ess(p);
    }
    let ess = monomorphic_ess(p)?;
    // localization of the fixed point when as1:dim holds strictly
    if let (true, Some(z), Ok(cand)) = (cond.c1 > BOUNDARY_TOL, ess.monomorphic_point(), dimorphic_candidate(p)) {
        let zd = cand.z_d;
        let slack = 1e-9;
        let c2 = cond.c2.unwrap_or(0.0);
        let c3 = cond.c3.unwrap_or(0.0);
        let ok = if ess.boundary_case {
            true
        } else if c2 < -BOUNDARY_TOL {
            z > -p.theta - slack && z < -zd + slack
        } else if c3 < -BOUNDARY_TOL {
            z > zd - slack && z < p.theta + slack
        } else {
            true
        };
        if !ok {
            return Err(Error::NoRoot(format!(
                "monomorphic ESS {z} lies outside the interval predicted by the sign of as2:dim/as3:dim"
            )));
        }
    }
    Ok(ess)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidentEquilibrium {
    pub z_resident: f64,
    pub mu_eq: MuState,
    pub n_eq: PopState,
}

/// Demographic equilibrium of a monomorphic resident at `z_resident`, as the
/// fixed point of `H ∘ K`.
pub fn resident_equilibrium(z_resident: f64, p: &ModelParams) -> Result<ResidentEquilibrium> {
    require_two_way(p)?;
    if p.r1 - p.m1 <= 0.0 {
        let e = resident_equilibrium(-z_resident, &p.mirrored())?;
        return Ok(ResidentEquilibrium {
            z_resident,
            mu_eq: e.mu_eq.swapped(),
            n_eq: e.n_eq.swapped(),
        });
    }
    let no_eq = |reason: String| Error::NoEquilibrium { z_resident, reason };
    let target = p.m1 * p.m2 / (p.g1 * p.g2);
    let a = (z_resident + p.theta).powi(2);
    let b = (z_resident - p.theta).powi(2);
    // K: μ2 -> μ1 with f(z_resident; μ1, μ2) = target
    let k_map = |mu2: f64| target / (mu2 + b) - a;
    let h_map = |mu1: f64| {
        let n1 = (p.g1 * mu1 + p.r1 - p.m1) / p.kappa1;
        (p.kappa2 * p.g1 / p.m2 * (a + mu1) * n1 + p.m2 - p.r2) / p.g2
    };
    let phi = |mu2: f64| Ok(h_map(k_map(mu2)) - mu2);

    let mu1_floor = ((p.m1 - p.r1) / p.g1).max(-a);
    let lower = -b;
    let upper = if mu1_floor > -a { target / (mu1_floor + a) - b } else { f64::INFINITY };
    let bis = Bisection::default();
    let start = if upper.is_finite() { 0.5 * (upper - lower) } else { 1.0 };
    let (lo, f_lo) = shrink_lower(phi, lower, start, true, "H o K near its pole")
        .map_err(|e| no_eq(e.to_string()))?;
    let mu2 = if upper.is_finite() {
        let f_hi = h_map(mu1_floor) - upper;
        if f_hi >= 0.0 {
            return Err(no_eq(format!("H o K - id does not change sign (value {f_hi:.3e} at the upper end)")));
        }
        bis.solve_with_signs(phi, lo, upper, f_lo, f_hi)?
    } else {
        let (hi, f_hi) = expand_upper(phi, lo, 1.0, false, "H o K at infinity")
            .map_err(|e| no_eq(e.to_string()))?;
        bis.solve_with_signs(phi, lo, hi, f_lo, f_hi)?
    };
    let mu = MuState::new(k_map(mu2), mu2);
    let n = n_of_mu(mu, p);
    if n.n1 < -1e-12 || n.n2 < -1e-12 {
        return Err(no_eq(format!("negative population sizes ({}, {})", n.n1, n.n2)));
    }
    Ok(ResidentEquilibrium { z_resident, mu_eq: mu, n_eq: n })
}

/// `W_μ(z_mutant, μ^eq)`; positive iff the mutant invades.
pub fn invasion_fitness(z_mutant: f64, res: &ResidentEquilibrium, p: &ModelParams) -> f64 {
    effective_fitness_mu(z_mutant, res.mu_eq, p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSinkEss {
    pub patch1: Ess,
    pub patch2: Ess,
    /// `4 g2 θ² r2 / κ2 - m1 (r1 - m1) / κ1`; positive iff patch 2 is dimorphic.
    pub con_dim_source_gap: f64,
}

/// ESS of each patch under one-way migration (`m2 = 0`).
pub fn source_sink_ess(p: &ModelParams) -> Result<SourceSinkEss> {
    check_assumptions(p).require(Regime::SourceSink)?;
    let th = p.theta;
    let n1 = (p.r1 - p.m1) / p.kappa1;
    let inflow = p.m1 * (p.r1 - p.m1) / p.kappa1;
    let capacity = 4.0 * p.g2 * th * th * p.r2 / p.kappa2;
    let gap = capacity - inflow;
    let boundary_case = gap.abs() <= BOUNDARY_TOL;

    let (kind2, n2) = if gap > BOUNDARY_TOL {
        let alpha = p.m1 * (p.r1 - p.m1) / (4.0 * p.g2 * th * th * p.kappa1);
        let beta = p.r2 / p.kappa2 - alpha;
        (
            EssKind::Dimorphic { z_1: -th, z_2: th, weights: [[n1, alpha], [0.0, beta]] },
            alpha + beta,
        )
    } else {
        let b = p.r2 - 4.0 * p.g2 * th * th;
        let n2 = (b + (b * b + 4.0 * p.kappa2 / p.kappa1 * p.m1 * (p.r1 - p.m1)).sqrt()) / (2.0 * p.kappa2);
        (EssKind::Monomorphic { z_star: -th }, n2)
    };
    let n = PopState::new(n1, n2);
    let mu = mu_of_n(n, p);
    Ok(SourceSinkEss {
        patch1: Ess {
            kind: EssKind::Monomorphic { z_star: -th },
            n_star: n,
            mu_star: mu,
            boundary_case: false,
            conditions: None,
        },
        patch2: Ess { kind: kind2, n_star: n, mu_star: mu, boundary_case, conditions: None },
        con_dim_source_gap: gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EssSolution {
    TwoWay(Ess),
    SourceSink(SourceSinkEss),
}

/// Dispatch on the migration regime.
pub fn solve(p: &ModelParams) -> Result<EssSolution> {
    let report = check_assumptions(p);
    match report.regime {
        Regime::TwoWay => Ok(EssSolution::TwoWay(solve_ess(p)?)),
        Regime::SourceSink => Ok(EssSolution::SourceSink(source_sink_ess(p)?)),
        Regime::Invalid => Err(Error::Regime(report.message)),
    }
}

/// `f(z̄; F(μ2), μ2) - m1 m2 / (g1 g2)`, the defining defect of the F map.
pub fn f_map_defect(mu2: f64, p: &ModelParams) -> Result<f64> {
    let (mu1, z_bar) = f_map(mu2, p)?;
    Ok(quartic_f(z_bar, MuState::new(mu1, mu2), p) - p.m1 * p.m2 / (p.g1 * p.g2))
}
