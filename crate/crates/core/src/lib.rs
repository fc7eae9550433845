//! Gaussian multipartite bound information laboratory.
//!
//! The crate builds the five-variable Gaussian distribution obtained by
//! homodyning a purification of a three-mode bound entangled state, and
//! checks its cryptographic properties with exact Gaussian information
//! theory:
//!
//! * [`gauss`]: labeled zero-mean Gaussian vectors, marginals, Schur
//!   complements, mutual information and seeded sampling.
//! * [`quantum`]: quantum covariance matrices, symplectic spectra, partial
//!   transposition and the position-homodyne map.
//! * [`bound_info`]: the two public-communication protocols, information
//!   differences, activation, the adversary decomposition and the threshold
//!   scenarios.
//! * [`sim`]: Monte Carlo execution of the protocols over a broadcast
//!   channel.
//! * [`verify`]: the invariant suite run by `gbi verify`.
//!
//! All covariance matrices use the doubled convention: a classical
//! covariance matrix (CCM) `X` describes the density `exp(-ηᵀX⁻¹η)`, so the
//! ordinary covariance is `X / 2` and the vacuum variance has CCM entry 1.

pub mod bound_info;
pub mod error;
pub mod gauss;
pub mod params;
pub mod quantum;
pub mod sim;
pub mod verify;

pub use error::{GbiError, Result};
pub use gauss::GaussianVector;
pub use params::DerivedParams;
pub use quantum::QuantumCM;

/// Labels of the five measured variables, in row order of `X`.
pub const PI_LABELS: [&str; 5] = ["A", "B", "C", "E1", "E2"];
