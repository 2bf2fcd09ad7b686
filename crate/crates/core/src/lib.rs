//! Reconstruction of the principal coefficient `p(x)` of the 1D wave equation
//!
//! ```text
//! ∂ₜ²u − ∂ₓ(p ∂ₓu) = F   in (0, 1) × (0, T),   p ∂ₓu = 0 on the boundary,
//! ```
//!
//! from observations of `u` on a subdomain `ω`, by minimizing a Tikhonov
//! functional with an adjoint-based fixed-point iteration.

pub mod carleman;
pub mod elliptic;
pub mod error;
pub mod mesh;
pub mod objective;
pub mod reconstruct;
pub mod synth;
mod tridiag;
pub mod wave;
pub mod window;

pub use error::{Error, Result};
pub use mesh::{Grid1D, SpaceTimeField, SpatialField, TimeGrid};
pub use reconstruct::{CoefficientSpec, IterationConfig, ReconstructionResult};
pub use wave::{ForwardModel, WaveProblem, WaveSolver};
pub use window::ObservationWindow;
