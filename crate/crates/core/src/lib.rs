//! Exact fluctuation quantities for integer random walks: ladder heights, killed
//! Green functions, exit laws, and numerical checks of their asymptotics.

pub mod asymptotics;
pub mod charfn;
pub mod error;
pub mod exit;
pub mod fourier;
pub mod green;
pub mod harness;
pub mod ladder;
pub mod linalg;
pub mod stepdist;
pub mod trend;

pub use error::{Error, Result};
pub use stepdist::{DistSpec, StepDistribution};
