//! Classical and quantum dynamics of the dissipative modified kicked rotator,
//! the phase-space (Wigner/Moyal) calculus of its friction term, and the
//! measures used to compare classical and quantum momentum marginals.

pub mod classical;
pub mod error;
pub mod measures;
pub mod moyal;
pub mod params;
pub mod quantum;
pub mod rng;
pub mod snapshot;
pub mod verify;

pub use error::{Error, Result};
pub use params::ModelParams;
