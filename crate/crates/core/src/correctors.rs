//! First-order correctors around a monomorphic ESS.
//!
//! With `u_{ε,i} = u + ε v_i + ε² w_i` and `s = z - z*`:
//! `v_i = ln(N_i √A) + D_i s + E_i s²`, `w_i(z*) = F_i`, and
//! `N_{ε,i} = N_i + ε K_i + O(ε²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ess::{Ess, EssKind, SourceSinkEss, BOUNDARY_TOL};
use crate::hj::UTaylor;
use crate::model::{effective_fitness, growth_rate, Habitat, ModelParams, PopState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorSet {
    pub z_star: f64,
    pub n_star: PopState,
    pub v_offset: [f64; 2],
    pub d: [f64; 2],
    pub e: [f64; 2],
    pub f: [f64; 2],
    pub k: [f64; 2],
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// `G₂ - G₁`; not defined in the source–sink case.
    pub g_gap: Option<f64>,
}

/// The part of `K_i / N_i` that does not involve `F_i`.
fn k_moment_part(t: &UTaylor, d: f64, e: f64) -> f64 {
    let (a, b, c) = (t.a, t.b, t.c);
    7.5 * b * b / a.powi(3) + 3.0 * (c + b * d) / (a * a) + (e + 0.5 * d * d) / a
}

impl CorrectorSet {
    /// `K_i` rebuilt from `D_i, E_i, F_i`.
    pub fn k_from_components(&self, t: &UTaylor, i: usize) -> f64 {
        self.n_star.get(habitat(i)) * (k_moment_part(t, self.d[i], self.e[i]) + self.f[i])
    }
}

fn habitat(i: usize) -> Habitat {
    if i == 0 {
        Habitat::One
    } else {
        Habitat::Two
    }
}

/// `v₂(z) - v₁(z) = ln((W - R₁ + m₁) / m₂)` at the ESS population sizes.
pub fn v_gap_profile(z: f64, ess: &Ess, p: &ModelParams) -> Result<f64> {
    let n = ess.n_star;
    let value = (effective_fitness(z, n, p) - growth_rate(z, n.n1, Habitat::One, p) + p.m1) / p.m2;
    if !(value > 0.0) {
        return Err(Error::LogDomain { z, value });
    }
    Ok(value.ln())
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// The corrector chain for a monomorphic two-way ESS.
pub fn corrector_set(ess: &Ess, t: &UTaylor, p: &ModelParams) -> Result<CorrectorSet> {
    let EssKind::Monomorphic { z_star } = ess.kind else {
        return Err(Error::InvalidInput(
            "correctors are only available for a monomorphic ESS (dimorphic case not covered)".into(),
        ));
    };
    if !(p.m1 > 0.0 && p.m2 > 0.0) {
        return Err(Error::Regime("as:m fails: the corrector chain needs m1, m2 > 0".into()));
    }
    let (n1, n2) = (ess.n_star.n1, ess.n_star.n2);
    let (a, b, c) = (t.a, t.b, t.c);
    let zt = z_star + p.theta;

    let lambda1 = 2.0 * p.g1 * n1 * zt / (p.m2 * n2);
    let lambda2 = n1 * (p.g1 - a * a) / (p.m2 * n2) - 0.5 * lambda1 * lambda1;
    let lambda3 = 3.0 * b * lambda1 / (a * a) + lambda2 / a;

    // A = -κ1 K1 + m2 (N2/N1) ΔF,  A = -κ2 K2 - m1 (N1/N2) ΔF,
    // ΔF = K2/N2 - K1/N1 - λ3 - λ1 S / (2A);  returns (K1, K2, ΔF) at S = D1 + D2
    let k_at = |s: f64| {
        let lhs = 1.0 + p.m1 * n1 / (p.kappa2 * n2 * n2) + p.m2 * n2 / (p.kappa1 * n1 * n1);
        let rhs = -a / (p.kappa2 * n2) + a / (p.kappa1 * n1) - lambda3 - 0.5 * lambda1 * s / a;
        let df = rhs / lhs;
        let k1 = (p.m2 * n2 / n1 * df - a) / p.kappa1;
        let k2 = (-p.m1 * n1 / n2 * df - a) / p.kappa2;
        (k1, k2, df)
    };
    let q0 = p.m2 * n2 / n1 + p.m1 * n1 / n2;
    let q_diff = p.m2 * n2 / n1 - p.m1 * n1 / n2;
    let g_gap = |s: f64| {
        let (k1, k2, _) = k_at(s);
        let p0 = p.kappa1 * k1 - p.kappa2 * k2;
        -2.0 * a * lambda1 / q0 - lambda1 * q_diff * p0 / (q0 * q0)
    };
    // first-order terms of habitat 1's equation:
    // -6B = -2A D1 + m2 (N2/N1) (λ1 ΔF + ΔG), with D1 = (S - λ1)/2
    let defect = |s: f64| {
        let (_, _, df) = k_at(s);
        -a * (s - lambda1) + p.m2 * n2 / n1 * (lambda1 * df + g_gap(s)) + 6.0 * b
    };
    let d0 = defect(0.0);
    let coefficient = defect(1.0) - d0;
    if coefficient.abs() < 1e-12 {
        return Err(Error::SingularChain { coefficient });
    }
    let s = -d0 / coefficient;
    let d1 = 0.5 * (s - lambda1);
    let d2 = d1 + lambda1;
    let (k1, k2, df) = k_at(s);
    let p0 = p.kappa1 * k1 - p.kappa2 * k2;

    // second-order terms, with w2 - w1 eliminated:
    // -12C = -4A E1 + 6B D1 + [ρ P]₂, where ρ = m2 e^{v2-v1} / (m2 e^{v2-v1} + m1 e^{v1-v2})
    // and P = 2u'(v2' - v1') + κ1 K1 - κ2 K2
    let p1 = -2.0 * a * lambda1;
    let p2 = -4.0 * a * lambda2 + 6.0 * b * lambda1;
    let rho0 = logistic(2.0 * (n2 / n1).ln() + (p.m2 / p.m1).ln());
    let s1 = rho0 * (1.0 - rho0);
    let s2 = s1 * (1.0 - 2.0 * rho0);
    let rho1 = 2.0 * lambda1 * s1;
    let rho2 = 2.0 * lambda2 * s1 + 2.0 * lambda1 * lambda1 * s2;
    let rho_p2 = rho0 * p2 + rho1 * p1 + rho2 * p0;
    let e1 = (12.0 * c + 6.0 * b * d1 + rho_p2) / (4.0 * a);
    let e2 = e1 + lambda2;

    let f1 = k1 / n1 - k_moment_part(t, d1, e1);
    let f2 = k2 / n2 - k_moment_part(t, d2, e2);
    debug_assert!(((f2 - f1) - df).abs() < 1e-8 * (1.0 + df.abs()));
    let root_a = a.sqrt();
    Ok(CorrectorSet {
        z_star,
        n_star: ess.n_star,
        v_offset: [(n1 * root_a).ln(), (n2 * root_a).ln()],
        d: [d1, d2],
        e: [e1, e2],
        f: [f1, f2],
        k: [k1, k2],
        lambda1,
        lambda2,
        lambda3,
        g_gap: Some(g_gap(s)),
    })
}

/// Residuals of the defining relations of the chain at `z*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainResiduals {
    /// `A + κ_i K_i - m_j (N_j/N_i)(F_j - F_i)`, zeroth order, per habitat.
    pub first_order: [f64; 2],
    /// `F₂ - F₁ - (κ₁K₁ - κ₂K₂)/(m₁N₁/N₂ + m₂N₂/N₁)`.
    pub w_gap: f64,
    /// First-order Taylor terms of the first-order equation, per habitat.
    pub first_order_slope: [f64; 2],
    /// Second-order Taylor terms, per habitat.
    pub first_order_curvature: [f64; 2],
    /// `K_i` against `N_i(... + F_i)`.
    pub k_reconstruction: [f64; 2],
    /// `D₂ - D₁ - λ₁` and `E₂ - E₁ - λ₂`.
    pub gaps: [f64; 2],
    /// `G₂ - G₁` against the slope of `w₂ - w₁` at `z*`.
    pub g_gap: f64,
}

impl ChainResiduals {
    pub fn max_abs(&self) -> f64 {
        self.first_order
            .iter()
            .chain(&self.first_order_slope)
            .chain(&self.first_order_curvature)
            .chain(&self.k_reconstruction)
            .chain(&self.gaps)
            .chain([&self.w_gap, &self.g_gap])
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

pub fn chain_residuals(cs: &CorrectorSet, t: &UTaylor, p: &ModelParams) -> ChainResiduals {
    let (n1, n2) = (cs.n_star.n1, cs.n_star.n2);
    let (a, b, c) = (t.a, t.b, t.c);
    let df = cs.f[1] - cs.f[0];
    let q0 = p.m1 * n1 / n2 + p.m2 * n2 / n1;
    let p0 = p.kappa1 * cs.k[0] - p.kappa2 * cs.k[1];
    let g_gap = cs.g_gap.unwrap_or(0.0);
    let lambda1 = cs.d[1] - cs.d[0];
    let lambda2 = cs.e[1] - cs.e[0];

    // habitat i's equation expanded with e^{v_j - v_i} and w_j - w_i as series in s
    let ratio = [n2 / n1, n1 / n2];
    let mig = [p.m2, p.m1];
    let sign = [1.0, -1.0];
    let mut slope = [0.0; 2];
    let mut curv = [0.0; 2];
    let mut first = [0.0; 2];
    // w2 - w1 to second order from its closed form
    let p1 = -2.0 * a * lambda1;
    let p2 = -4.0 * a * lambda2 + 6.0 * b * lambda1;
    let q1 = (p.m2 * n2 / n1 - p.m1 * n1 / n2) * lambda1;
    let q2 = (p.m2 * n2 / n1 + p.m1 * n1 / n2) * (0.5 * lambda1 * lambda1)
        + (p.m2 * n2 / n1 - p.m1 * n1 / n2) * lambda2;
    let w0 = p0 / q0;
    let w1 = (p1 - w0 * q1) / q0;
    let w2 = (p2 - w0 * q2 - w1 * q1) / q0;
    for i in 0..2 {
        let kappa = if i == 0 { p.kappa1 } else { p.kappa2 };
        let lam1 = sign[i] * lambda1;
        let lam2 = sign[i] * lambda2;
        // e^{v_j - v_i} = ratio (1 + lam1 s + (lam2 + lam1²/2) s²)
        let e0 = ratio[i];
        let e1 = ratio[i] * lam1;
        let e2 = ratio[i] * (lam2 + 0.5 * lam1 * lam1);
        let (d0, d1s, d2s) = (sign[i] * w0, sign[i] * w1, sign[i] * w2);
        first[i] = a + kappa * cs.k[i] - mig[i] * e0 * d0;
        // -u'' = A - 6Bs - 12Cs², 2u'v_i' = 2(-As + 3Bs²)(D_i + 2E_i s)
        slope[i] = -6.0 * b - (-2.0 * a * cs.d[i] + mig[i] * (e0 * d1s + e1 * d0));
        curv[i] = -12.0 * c
            - (2.0 * (-2.0 * a * cs.e[i] + 3.0 * b * cs.d[i]) + mig[i] * (e0 * d2s + e1 * d1s + e2 * d0));
    }
    ChainResiduals {
        first_order: first,
        w_gap: df - p0 / q0,
        first_order_slope: slope,
        first_order_curvature: curv,
        k_reconstruction: [
            cs.k[0] - cs.k_from_components(t, 0),
            cs.k[1] - cs.k_from_components(t, 1),
        ],
        gaps: [cs.d[1] - cs.d[0] - cs.lambda1, cs.e[1] - cs.e[0] - cs.lambda2],
        g_gap: g_gap - w1,
    }
}

/// Habitat 1 of the source–sink case, which does not see habitat 2:
/// `v₁ ≡ ln(g₁^{1/4} N₁)`, `w₁ ≡ -√g₁/(κ₁ N₁)`, `K₁ = -√g₁/κ₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceCorrector {
    pub v1: f64,
    pub w1: f64,
    pub k1: f64,
}

pub fn source_corrector(ss: &SourceSinkEss, p: &ModelParams) -> SourceCorrector {
    let n1 = ss.patch1.n_star.n1;
    let sg = p.g1.sqrt();
    SourceCorrector { v1: (p.g1.powf(0.25) * n1).ln(), w1: -sg / (p.kappa1 * n1), k1: -sg / p.kappa1 }
}

/// Correctors in the source–sink case with a monomorphic patch 2 at `-θ`.
pub fn source_sink_correctors(ss: &SourceSinkEss, p: &ModelParams) -> Result<CorrectorSet> {
    if ss.con_dim_source_gap.abs() <= BOUNDARY_TOL {
        return Err(Error::DegenerateBoundary);
    }
    if !ss.patch2.is_monomorphic() {
        return Err(Error::InvalidInput(
            "source-sink correctors need a monomorphic patch 2 (reverse of con-dim-source)".into(),
        ));
    }
    let th = p.theta;
    let (n1, n2) = (ss.patch2.n_star.n1, ss.patch2.n_star.n2);
    let sg = p.g1.sqrt();
    let quarter = p.g1.powf(0.25);

    let SourceCorrector { v1, w1, k1 } = source_corrector(ss, p);
    // v2 = ln(m1 g1^{1/4} N1) - ln(q0 + q1 s + q2 s²), s = z + θ
    let q0 = 4.0 * p.g2 * th * th - p.r2 + p.kappa2 * n2;
    let q1 = -4.0 * p.g2 * th;
    let q2 = p.g2 - p.g1;
    let d2 = -q1 / q0;
    let e2 = -(q2 / q0 - 0.5 * q1 * q1 / (q0 * q0));
    // K2 = N2 (c + F2), F2 = w1 - N2 (√g1 + κ2 K2) / (m1 N1)
    let c = (e2 + 0.5 * d2 * d2) / sg;
    let k2 = n2 * (c + w1 - n2 * sg / (p.m1 * n1)) / (1.0 + p.kappa2 * n2 * n2 / (p.m1 * n1));
    let f2 = k2 / n2 - c;
    Ok(CorrectorSet {
        z_star: -th,
        n_star: ss.patch2.n_star,
        v_offset: [v1, (p.m1 * quarter * n1 / q0).ln()],
        d: [0.0, d2],
        e: [0.0, e2],
        f: [w1, f2],
        k: [k1, k2],
        lambda1: d2,
        lambda2: e2,
        lambda3: 0.0,
        g_gap: None,
    })
}
