use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("not in the dimorphic regime: as1:dim fails (1 - m1 m2 / (4 g1 g2 theta^4) = {gap:.6e})")]
    NotDimorphicRegime { gap: f64 },

    #[error("dimorphic ESS does not exist: {0}")]
    NotDimorphic(String),

    #[error("parameters are in the dimorphic regime (as1:dim, as2:dim and as3:dim all hold)")]
    DimorphicRegime,

    #[error("F map undefined at mu2 = mu* = {mu_star:.6e}: the quartic has two global minima")]
    Domain { mu_star: f64 },

    #[error("no sign change found while bracketing {0}")]
    NoRoot(String),

    #[error("no demographic equilibrium for resident trait {z_resident}: {reason}")]
    NoEquilibrium { z_resident: f64, reason: String },

    #[error("effective fitness is positive off-support (W = {value:.3e} at z = {z})")]
    FitnessPositive { z: f64, value: f64 },

    #[error("fitness peak is flat at z = {z} (second-order coefficient {a2:.3e})")]
    DegenerateQuadratic { z: f64, a2: f64 },

    #[error("con-dim-source holds with equality; u2(theta) is not determined")]
    DegenerateBoundary,

    #[error("logarithm argument {value:.3e} is not positive at z = {z}")]
    LogDomain { z: f64, value: f64 },

    #[error("corrector chain is singular (coefficient {coefficient:.3e})")]
    SingularChain { coefficient: f64 },

    #[error("steady state not reached after {iterations} steps (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("population went extinct (N1 + N2 = {total:.3e})")]
    Extinction { total: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Failures of a numerical method, as opposed to violated preconditions.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoRoot(_)
                | Error::NoEquilibrium { .. }
                | Error::FitnessPositive { .. }
                | Error::DegenerateQuadratic { .. }
                | Error::LogDomain { .. }
                | Error::SingularChain { .. }
                | Error::NonConvergence { .. }
                | Error::Extinction { .. }
        )
    }
}
