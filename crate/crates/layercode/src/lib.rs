//! Layered-resolution distributed coded matrix multiplication.
//!
//! The library has three halves that build on each other:
//!
//! * exact coded arithmetic — a prime field ([`field`]), digit-chunk layering
//!   of integer operands into resolution layers ([`chunking`]), and a
//!   polynomial-code encoder/decoder that recovers a mini-job product from
//!   any k of its coded task results ([`polycode`]);
//! * heterogeneity-aware load splitting ([`scheduler`]) and closed-form
//!   queueing bounds on the per-layer delay profile ([`analysis`]);
//! * a deterministic discrete-event simulator of the master/worker/fusion
//!   pipeline ([`sim`]) plus the experiment drivers and CSV/JSON writers
//!   behind the command-line runner ([`experiments`]).
//!
//! With the `parallel` feature (on by default) batch entry points such as
//! [`sim::run_many`] and the larger matrix kernels spread work across a rayon
//! pool; every result is bit-identical to the sequential fallback.

pub mod analysis;
pub mod chunking;
pub mod experiments;
pub mod field;
pub mod polycode;
pub mod scheduler;
pub mod sim;

/// Version tag stamped into experiment output headers.
pub fn version_string() -> String {
    format!("layercode-v{}", env!("CARGO_PKG_VERSION"))
}
