//! Decides and constructs blow-up point configurations for constant scalar
//! curvature Kahler gluing on model manifolds, and verifies at desk scale the
//! finite-dimensional ingredients of the construction: explicit kernel bases
//! of the Lichnerowicz operator, the rank/positive-cone admissibility
//! conditions, the Burns-Simanca ODE asymptotics, exact rational exponent
//! ledgers for the gluing radii, and per-mode biharmonic Cauchy-data matching.

pub mod admissibility;
pub mod asymptotics;
pub mod biharmonic;
pub mod error;
pub mod kernel_basis;
pub mod point_search;
pub mod rng;
pub mod simanca_ode;
pub mod simplex;

pub use error::Error;

/// Schema version stamped on every CLI report.
pub const SCHEMA_VERSION: u32 = 1;

/// Default seed used by the CLI and the deterministic test suites.
pub const DEFAULT_SEED: u64 = 0x5cc_4a11;
