//! Regularized phase-space path integrals.

pub mod bridge;
pub mod dk;
pub mod fresnel;
pub mod lattice;

pub use bridge::{sample_bridge, sample_bridge_with, stratonovich_action, stratonovich_integral, BridgePath};
pub use dk::{dk_expected, dk_propagator, Estimator, MCEstimate, McConfig, SeedSpec};
pub use fresnel::{fresnel_limit, fresnel_toy};
pub use lattice::{lattice_kernel_complex, lattice_propagator, LatticeConfig, LatticeGrid};
