//! Coherent-state quantization on a truncated Fock space: Toeplitz operators and
//! symbols, the phase-space metric and canonical charts, and regularized
//! phase-space path integrals.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherent;
pub mod error;
pub mod geometry;
pub mod hilbert;
pub mod pathint;
pub mod poly;
pub mod quadrature;
pub mod roots;
pub mod scalar;
pub mod spin;
pub mod symbols;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SpaceConfig64 = hilbert::SpaceConfig<f64>;
pub type SpaceConfig32 = hilbert::SpaceConfig<f32>;
pub type StateVector64 = hilbert::StateVector<f64>;
pub type StateVector32 = hilbert::StateVector<f32>;
pub type Operator64 = hilbert::Operator<f64>;
pub type Operator32 = hilbert::Operator<f32>;
pub type Fiducial64 = coherent::Fiducial<f64>;
pub type Fiducial32 = coherent::Fiducial<f32>;
pub type CoherentLabel64 = coherent::CoherentLabel<f64>;
pub type CoherentLabel32 = coherent::CoherentLabel<f32>;
pub type SymbolFn64 = symbols::SymbolFn<f64>;
pub type SymbolFn32 = symbols::SymbolFn<f32>;
pub type MCEstimate64 = pathint::MCEstimate<f64>;
pub type MCEstimate32 = pathint::MCEstimate<f32>;
pub type SpinConfig64 = spin::SpinConfig<f64>;
pub type SpinConfig32 = spin::SpinConfig<f32>;
