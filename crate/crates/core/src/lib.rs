//! Free stable distributions in the unified `(alpha, rho)` parameterization.
//!
//! The crate evaluates densities, distribution functions, quantiles,
//! characteristic functions and Mellin transforms of free stable laws, draws
//! samples from them, and provides the classical stable counterparts needed to
//! exercise the identities that connect the two families.
//!
//! Densities are available through two independent routes: convergent series
//! ([`series`]) and numerical inversion of the Cauchy transform along its
//! boundary curve ([`inversion`]). The [`checks`] module turns the known
//! distributional identities into executable, seeded checks.

pub mod checks;
pub mod cli;
pub mod dist;
pub mod error;
pub mod inversion;
pub mod ks;
pub mod params;
pub mod quad;
pub mod series;
pub mod specfun;

pub use dist::{FreeStable, Method, QuantileTable, RngState};
pub use error::{Error, Result};
pub use params::{BpbParams, FreeStableParams};
pub use series::SeriesEval;
pub use specfun::Complex;
