//! Driven, dissipative Tavis–Cummings model: steady states of the Lindblad
//! master equation, classical coupled-oscillator analogues, and the analysis
//! of multiphoton drive response.

mod error;

pub mod analysis;
pub mod classical;
pub mod hilbert;
pub mod model;
pub mod observables;
pub mod steady;
pub mod sweeps;

pub use error::{Error, Result};
pub use hilbert::{HilbertSpace, SparseOperator, C64};
pub use model::{Frame, Liouvillian, SystemParams};
pub use steady::DensityMatrix;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
