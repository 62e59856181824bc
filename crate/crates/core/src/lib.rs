//! Two-habitat selection–mutation–migration model: ESS, Hamilton–Jacobi
//! profiles, correctors, moment approximations and a finite-difference
//! reference solver.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bisect;
pub mod compare;
pub mod correctors;
pub mod cubic;
pub mod error;
pub mod ess;
pub mod fd;
pub mod hj;
pub mod model;
pub mod moments;
pub mod par;
pub mod quadrature;
pub mod series;

pub use error::{Error, Result};
pub use ess::{solve, solve_ess, source_sink_ess, Ess, EssKind, EssSolution, SourceSinkEss};
pub use model::{Habitat, ModelParams, MuState, PopState, Regime};
