//! Model parameters, growth rates and the effective fitness.
//!
//! Habitat `i` has optimum `θ_i` with `θ_1 = -θ`, `θ_2 = θ`. The effective
//! fitness `W` is the top eigenvalue of
//!
//! ```text
//! | R1 - m1    m2      |
//! | m1         R2 - m2 |
//! ```
//!
//! and `μ_i = (κ_i N_i + m_i - r_i) / g_i` re-expresses population sizes so
//! that the sign of `W` is governed by the quartic
//! `f(z) = (μ1 + (z+θ)²)(μ2 + (z-θ)²)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Habitat {
    One,
    Two,
}

impl Habitat {
    pub fn index(self) -> usize {
        match self {
            Habitat::One => 0,
            Habitat::Two => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub r1: f64,
    pub r2: f64,
    pub g1: f64,
    pub g2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub m1: f64,
    pub m2: f64,
    pub theta: f64,
}

pub const PARAM_KEYS: [&str; 9] = ["r1", "r2", "g1", "g2", "kappa1", "kappa2", "m1", "m2", "theta"];

impl ModelParams {
    /// Both habitats share `r`, `g`, `κ` and `m`.
    pub fn symmetric(r: f64, g: f64, kappa: f64, m: f64, theta: f64) -> Self {
        ModelParams {
            r1: r,
            r2: r,
            g1: g,
            g2: g,
            kappa1: kappa,
            kappa2: kappa,
            m1: m,
            m2: m,
            theta,
        }
    }

    /// Habitat exchange: swap every 1/2 pair. Under this map a trait `z`
    /// becomes `-z`.
    pub fn mirrored(&self) -> Self {
        ModelParams {
            r1: self.r2,
            r2: self.r1,
            g1: self.g2,
            g2: self.g1,
            kappa1: self.kappa2,
            kappa2: self.kappa1,
            m1: self.m2,
            m2: self.m1,
            theta: self.theta,
        }
    }

    /// Multiply all rates (`r`, `g`, `κ`, `m`) by `c`.
    pub fn time_rescaled(&self, c: f64) -> Self {
        ModelParams {
            r1: c * self.r1,
            r2: c * self.r2,
            g1: c * self.g1,
            g2: c * self.g2,
            kappa1: c * self.kappa1,
            kappa2: c * self.kappa2,
            m1: c * self.m1,
            m2: c * self.m2,
            theta: self.theta,
        }
    }

    pub fn optimum(&self, habitat: Habitat) -> f64 {
        match habitat {
            Habitat::One => -self.theta,
            Habitat::Two => self.theta,
        }
    }

    pub fn r(&self, habitat: Habitat) -> f64 {
        [self.r1, self.r2][habitat.index()]
    }

    pub fn g(&self, habitat: Habitat) -> f64 {
        [self.g1, self.g2][habitat.index()]
    }

    pub fn kappa(&self, habitat: Habitat) -> f64 {
        [self.kappa1, self.kappa2][habitat.index()]
    }

    /// Emigration rate out of `habitat`.
    pub fn m(&self, habitat: Habitat) -> f64 {
        [self.m1, self.m2][habitat.index()]
    }

    /// Checks the structural sign constraints only; regime assumptions are
    /// reported by [`check_assumptions`].
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.r1,
            self.r2,
            self.g1,
            self.g2,
            self.kappa1,
            self.kappa2,
            self.m1,
            self.m2,
            self.theta,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if self.g1 <= 0.0 || self.g2 <= 0.0 {
            return Err(Error::InvalidParams("g1, g2 must be > 0".into()));
        }
        if self.kappa1 <= 0.0 || self.kappa2 <= 0.0 {
            return Err(Error::InvalidParams("kappa1, kappa2 must be > 0".into()));
        }
        if self.m1 < 0.0 || self.m2 < 0.0 {
            return Err(Error::InvalidParams("m1, m2 must be >= 0".into()));
        }
        if self.theta <= 0.0 {
            return Err(Error::InvalidParams("theta must be > 0".into()));
        }
        Ok(())
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            let raw = map
                .get(key)
                .ok_or_else(|| Error::InvalidInput(format!("missing parameter `{key}`")))?;
            raw.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("parameter `{key}`: cannot parse `{raw}`")))
        };
        let p = ModelParams {
            r1: get("r1")?,
            r2: get("r2")?,
            g1: get("g1")?,
            g2: get("g2")?,
            kappa1: get("kappa1")?,
            kappa2: get("kappa2")?,
            m1: get("m1")?,
            m2: get("m2")?,
            theta: get("theta")?,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parse a flat `key = value` config (see [`parse_key_values`]).
    pub fn from_config_str(text: &str) -> Result<Self> {
        Self::from_map(&parse_key_values(text)?)
    }

    pub fn to_config_string(&self) -> String {
        let values = [
            self.r1,
            self.r2,
            self.g1,
            self.g2,
            self.kappa1,
            self.kappa2,
            self.m1,
            self.m2,
            self.theta,
        ];
        PARAM_KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v:.16e}\n"))
            .collect()
    }
}

/// Parse `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Later keys override earlier ones.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::InvalidInput(format!("line {}: empty key", lineno + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopState {
    pub n1: f64,
    pub n2: f64,
}

impl PopState {
    pub fn new(n1: f64, n2: f64) -> Self {
        PopState { n1, n2 }
    }

    pub fn get(&self, habitat: Habitat) -> f64 {
        [self.n1, self.n2][habitat.index()]
    }

    pub fn swapped(&self) -> Self {
        PopState { n1: self.n2, n2: self.n1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuState {
    pub mu1: f64,
    pub mu2: f64,
}

impl MuState {
    pub fn new(mu1: f64, mu2: f64) -> Self {
        MuState { mu1, mu2 }
    }

    pub fn swapped(&self) -> Self {
        MuState { mu1: self.mu2, mu2: self.mu1 }
    }
}

/// `R_i(z, N) = r_i - g_i (z - θ_i)² - κ_i N`.
pub fn growth_rate(z: f64, n: f64, habitat: Habitat, p: &ModelParams) -> f64 {
    let d = z - p.optimum(habitat);
    p.r(habitat) - p.g(habitat) * d * d - p.kappa(habitat) * n
}

/// Largest eigenvalue of `[[a, m2], [m1, b]]` with `coupling = m1 m2`.
///
/// Uses the determinant form when `a + b < 0` so that values near zero do not
/// suffer cancellation.
pub(crate) fn top_eigenvalue(a: f64, b: f64, coupling: f64) -> f64 {
    if coupling == 0.0 {
        return a.max(b);
    }
    let s = a + b;
    let d = ((a - b) * (a - b) + 4.0 * coupling).sqrt();
    if s >= 0.0 {
        0.5 * (s + d)
    } else {
        2.0 * (a * b - coupling) / (s - d)
    }
}

pub fn effective_fitness(z: f64, n: PopState, p: &ModelParams) -> f64 {
    let a = growth_rate(z, n.n1, Habitat::One, p) - p.m1;
    let b = growth_rate(z, n.n2, Habitat::Two, p) - p.m2;
    top_eigenvalue(a, b, p.m1 * p.m2)
}

/// Effective fitness in `μ` coordinates; equals `effective_fitness(z, N)` for
/// `μ = mu_of_n(N)`.
pub fn effective_fitness_mu(z: f64, mu: MuState, p: &ModelParams) -> f64 {
    let x1 = z + p.theta;
    let x2 = z - p.theta;
    let a = -p.g1 * (mu.mu1 + x1 * x1);
    let b = -p.g2 * (mu.mu2 + x2 * x2);
    top_eigenvalue(a, b, p.m1 * p.m2)
}

pub fn mu_of_n(n: PopState, p: &ModelParams) -> MuState {
    MuState {
        mu1: (p.kappa1 * n.n1 + p.m1 - p.r1) / p.g1,
        mu2: (p.kappa2 * n.n2 + p.m2 - p.r2) / p.g2,
    }
}

pub fn n_of_mu(mu: MuState, p: &ModelParams) -> PopState {
    PopState {
        n1: (p.g1 * mu.mu1 + p.r1 - p.m1) / p.kappa1,
        n2: (p.g2 * mu.mu2 + p.r2 - p.m2) / p.kappa2,
    }
}

/// `f(z; μ1, μ2) = (μ1 + (z+θ)²)(μ2 + (z-θ)²)`.
pub fn quartic_f(z: f64, mu: MuState, p: &ModelParams) -> f64 {
    let x1 = z + p.theta;
    let x2 = z - p.theta;
    (mu.mu1 + x1 * x1) * (mu.mu2 + x2 * x2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    TwoWay,
    SourceSink,
    Invalid,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::TwoWay => "two-way",
            Regime::SourceSink => "source-sink",
            Regime::Invalid => "invalid",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Name of the violated assumption (`as:r-m`, `as:m`, `as:sink`, `as:r1`
    /// or `params`), if any.
    pub violated: Option<String>,
    pub message: String,
    /// `max(r1 - m1, r2 - m2)`; must be positive.
    pub viability_margin: f64,
}

impl RegimeReport {
    pub fn require(&self, expected: Regime) -> Result<()> {
        if self.regime == expected {
            Ok(())
        } else {
            Err(Error::Regime(format!(
                "expected {expected} regime, got {}: {}",
                self.regime, self.message
            )))
        }
    }
}

pub fn check_assumptions(p: &ModelParams) -> RegimeReport {
    let viability_margin = (p.r1 - p.m1).max(p.r2 - p.m2);
    let invalid = |name: &str, message: String| RegimeReport {
        regime: Regime::Invalid,
        violated: Some(name.to_string()),
        message,
        viability_margin,
    };
    if let Err(e) = p.validate() {
        return invalid("params", e.to_string());
    }
    if viability_margin <= 0.0 {
        return invalid(
            "as:r-m",
            format!("as:r-m fails: max(r1 - m1, r2 - m2) = {viability_margin} <= 0"),
        );
    }
    match (p.m1 > 0.0, p.m2 > 0.0) {
        (true, true) => RegimeReport {
            regime: Regime::TwoWay,
            violated: None,
            message: "as:r-m and as:m hold".into(),
            viability_margin,
        },
        (false, false) => invalid("as:m", "as:m fails: m1 = m2 = 0 (no migration)".into()),
        (false, true) => invalid(
            "as:sink",
            "as:sink fails: migration only from habitat 2 to 1; swap the habitats".into(),
        ),
        (true, false) => {
            if p.r1 - p.m1 > 0.0 {
                RegimeReport {
                    regime: Regime::SourceSink,
                    violated: None,
                    message: "as:sink and as:r1 hold (m2 = 0)".into(),
                    viability_margin,
                }
            } else {
                invalid("as:r1", format!("as:r1 fails: r1 - m1 = {} <= 0", p.r1 - p.m1))
            }
        }
    }
}
