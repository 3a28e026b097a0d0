//! Critical coupling of the open Dicke model with single-atom dissipation.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`qops`] builds spin-1/2 operators and Lindblad generators (column-stacked
//!    vectorization, dissipator `γ(2LρL† − L†Lρ − ρL†L)`).
//! 2. [`lindblad`] finds single-atom steady states and the two-time correlator
//!    `S_x(t)` by the quantum regression theorem.
//! 3. [`response`] turns `S_x(t)` into the static susceptibility `χ = Σ_a^R/g²`
//!    and evaluates the cavity determinant.
//! 4. [`critical`] solves `ω0² + κ² + 2 ω0 g² χ(0) = 0` for `g_c` and runs sweeps.
//!
//! [`baths`] holds the closed forms for the three bath families and [`meanfield`]
//! and [`exactn`] are independent numerical oracles.

pub mod baths;
pub mod critical;
mod error;
pub mod exactn;
mod expm;
pub mod lindblad;
pub mod meanfield;
mod ode;
pub mod qops;
mod quad;
pub mod response;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub use baths::{BathSpec, CavityParams, Mode};
pub use critical::{CriticalResult, NoTransitionReason};
pub use lindblad::{CorrelationSeries, SpinModel, SteadyState};
pub use qops::{Axis, DensityMatrix, LindbladChannel, OperatorMatrix, SuperOperator};
pub use response::Susceptibility;
