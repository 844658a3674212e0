//! Linear open quantum walks.
//!
//! The crate is organised bottom-up:
//!
//! - [`channel`]: a generic open-quantum-walk engine over arbitrary graphs.
//!   Kraus families are stored sparsely as per-edge internal operators and
//!   states are kept in block-diagonal form.
//! - [`linear`]: the linear walk on `N` nodes, its classical transition
//!   matrix, the exact steady state and the internal-state bookkeeping.
//! - [`equilibrium`]: closed-form statistical mechanics of the thermalized
//!   walk (temperature, partition function, energy moments, entropy, free
//!   energy, heat capacity and the energy cost of tuning the bias).
//! - [`thermalization`]: nonequilibrium analysis of trajectories, the drifting
//!   Gaussian regime, thermalization windows, the Gaussian + Boltzmann entropy
//!   approximation, entropy production and step estimates for dissipative
//!   computation.

pub mod channel;
pub mod equilibrium;
mod error;
pub mod linear;
mod numeric;
pub mod thermalization;

pub use channel::{BlockState, InternalOperator, OqwChannel, ValidationReport};
pub use equilibrium::{EnsemblePoint, Scalar, ThermoPoint};
pub use error::{Error, Result};
pub use linear::{Distribution, LinearWalkSpec};
pub use thermalization::{
    ApproxEntropyModel, ApproxEntropyParams, DqcEstimate, ErrorMetrics, GaussianProfile,
    ThermalizationWindow, TrajectoryOptions, TrajectoryRecord,
};
