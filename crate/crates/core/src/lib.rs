//! Reduced-order model of inertial particle focusing in curved rectangular
//! ducts.
//!
//! The particle centre moves in the duct cross-section under a fitted
//! inertial lift field and the Stokes drag of the secondary (Dean) flow. This
//! crate evaluates those fields, integrates particle paths, locates and
//! classifies equilibria, and follows them as the bend radius changes.

pub mod analytics;
pub mod continuation;
pub mod contour;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod forcefield;
pub mod limit_cycle;
pub mod ode;
pub mod trajectory;

pub use dynamics::{rhs, rhs_jacobian, ModelParams, Regime};
pub use equilibria::{find_equilibria, Eigensystem, Equilibrium, Kind, SeedGrid, SolverOptions};
pub use error::{Error, Result};
pub use forcefield::{CrossSection, FieldJacobian, FieldVector};
pub use limit_cycle::{find_limit_cycle, LimitCycle, LimitCycleOptions, NoCycle};
pub use ode::{integrate, IntegrateOptions};
pub use trajectory::{Sample, TerminalReason, Trajectory};
