//! Measurement-based composition of controlled-phase operators on weighted
//! graph states.
//!
//! The algebra layer ([`operator`], [`basis`], [`mbc`]) is generic over the
//! scalar type; [`gadgets`] and [`graph`] work in `f64`.

pub mod basis;
pub mod error;
pub mod gadgets;
pub mod graph;
pub mod mbc;
pub mod operator;
pub mod scalar;

pub use error::{Result, WgsError};
pub use scalar::Real;

pub type DiagOp2F32 = operator::DiagOp2<f32>;
pub type DiagOp2F64 = operator::DiagOp2<f64>;
pub type CanonicalFormF32 = operator::CanonicalForm<f32>;
pub type CanonicalFormF64 = operator::CanonicalForm<f64>;
pub type Ket1F32 = basis::Ket1<f32>;
pub type Ket1F64 = basis::Ket1<f64>;
pub type WeightedBasisF64 = basis::WeightedBasis<f64>;
pub type InstrumentF64 = mbc::Instrument<f64>;
