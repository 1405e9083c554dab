//! Correlation bounds, seesaw optimizers and channel-discrimination norms for
//! the energy-constrained prepare-and-measure scenario.

pub mod analytic;
pub mod discrimination;
pub mod error;
pub mod linalg;
pub mod quantum;
pub mod sampling;
pub mod scenario;
pub mod sdp;
pub mod seesaw;

pub use error::{Error, Result};
