//! ε-sweeps of the finite-difference solver against the asymptotic moments.

use serde::{Deserialize, Serialize};

use crate::correctors::{corrector_set, source_sink_correctors, CorrectorSet};
use crate::error::{Error, Result};
use crate::ess::{solve, EssSolution};
use crate::fd::{extract_numeric_moments, steady_state_solve_many, FdOptions, GridSolution};
use crate::hj::{u_taylor, UTaylor};
use crate::model::ModelParams;
use crate::moments::{moment_summary, MomentSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    N,
    Mean,
    Variance,
    Skewness,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::N, Quantity::Mean, Quantity::Variance, Quantity::Skewness];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::N => "N",
            Quantity::Mean => "mean",
            Quantity::Variance => "variance",
            Quantity::Skewness => "skewness",
        }
    }

    pub fn parse(s: &str) -> Option<Quantity> {
        Quantity::ALL.into_iter().find(|q| q.name() == s)
    }

    fn of(self, m: &MomentSummary, i: usize) -> f64 {
        match self {
            Quantity::N => m.n_eps[i],
            Quantity::Mean => m.mean[i],
            Quantity::Variance => m.variance[i],
            Quantity::Skewness => m.skewness[i],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    /// 1 or 2.
    pub habitat: u8,
    pub quantity: Quantity,
    pub fd: f64,
    pub asymptotic: f64,
    pub error: f64,
    /// Error at the previous (larger) ε over the error at this ε.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub solutions: Vec<GridSolution>,
}

impl SweepTable {
    pub fn series(&self, habitat: u8, quantity: Quantity) -> Vec<SweepRow> {
        self.rows.iter().filter(|r| r.habitat == habitat && r.quantity == quantity).copied().collect()
    }
}

/// Taylor data and correctors at a monomorphic ESS (two-way or source–sink).
pub fn asymptotic_data(p: &ModelParams) -> Result<(UTaylor, CorrectorSet)> {
    match solve(p)? {
        EssSolution::TwoWay(ess) => {
            let z = ess.monomorphic_point().ok_or_else(|| {
                Error::InvalidInput("moment predictions are only available for a monomorphic ESS".into())
            })?;
            let t = u_taylor(z, ess.n_star, p)?;
            let cs = corrector_set(&ess, &t, p)?;
            Ok((t, cs))
        }
        EssSolution::SourceSink(ss) => {
            let cs = source_sink_correctors(&ss, p)?;
            let t = u_taylor(-p.theta, ss.patch2.n_star, p)?;
            Ok((t, cs))
        }
    }
}

pub fn validate_eps_list(eps: &[f64]) -> Result<()> {
    if eps.is_empty() {
        return Err(Error::InvalidInput("eps list is empty".into()));
    }
    if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidInput("eps values must be positive".into()));
    }
    if eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidInput("eps list must be strictly decreasing".into()));
    }
    Ok(())
}

/// Rows for every ε, habitat and quantity, from solved grids.
pub fn compare_rows(t: &UTaylor, cs: &CorrectorSet, solutions: &[GridSolution]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    let mut prev: Vec<Option<f64>> = vec![None; 8];
    for gs in solutions {
        let fd = extract_numeric_moments(gs);
        let asym = moment_summary(t, cs, gs.eps)?;
        for i in 0..2 {
            for (q_idx, q) in Quantity::ALL.into_iter().enumerate() {
                let (a, b) = (q.of(&fd, i), q.of(&asym, i));
                let error = (a - b).abs();
                let slot = 4 * i + q_idx;
                rows.push(SweepRow {
                    eps: gs.eps,
                    habitat: i as u8 + 1,
                    quantity: q,
                    fd: a,
                    asymptotic: b,
                    error,
                    ratio: prev[slot].map(|e| e / error),
                });
                prev[slot] = Some(error);
            }
        }
    }
    Ok(rows)
}

/// Solves at every ε (concurrently when the `parallel` feature is on) and
/// tabulates errors with Richardson ratios.
pub fn epsilon_sweep_compare(p: &ModelParams, eps: &[f64], base: &FdOptions) -> Result<SweepTable> {
    validate_eps_list(eps)?;
    let (t, cs) = asymptotic_data(p)?;
    let opts: Vec<FdOptions> = eps.iter().map(|&e| FdOptions { eps: e, ..base.clone() }).collect();
    let solutions = steady_state_solve_many(p, &opts).into_iter().collect::<Result<Vec<_>>>()?;
    let rows = compare_rows(&t, &cs, &solutions)?;
    Ok(SweepTable { rows, solutions })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_list_rules() {
        assert!(validate_eps_list(&[0.1, 0.05, 0.025]).is_ok());
        assert!(validate_eps_list(&[0.1, 0.1]).is_err());
        assert!(validate_eps_list(&[0.05, 0.1]).is_err());
        assert!(validate_eps_list(&[0.1, -0.05]).is_err());
        assert!(validate_eps_list(&[]).is_err());
    }

    #[test]
    fn dimorphic_has_no_prediction() {
        let p = ModelParams::symmetric(1.0, 1.0, 1.0, 0.5, 1.0);
        assert!(matches!(asymptotic_data(&p), Err(Error::InvalidInput(_))));
    }
}
