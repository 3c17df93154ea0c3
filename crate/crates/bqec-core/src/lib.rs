//! Bosonic error-correction codes built from states heralded by particle-number
//! measurements on two-mode Gaussian states.
//!
//! The crate is organized bottom-up:
//!
//! - [`specialfn`]: terminating Gauss hypergeometric sums, Hermite polynomials,
//!   and squeezing dB conversions. Every closed form downstream is built on these.
//! - [`fockspace`]: dense truncated Fock-space linear algebra (operator matrices,
//!   state vectors, PSD matrix square root, partial trace over logical indices).
//! - [`genstates`]: the heralded state family, its closed-form Fock amplitudes and
//!   characteristics, the scheme parameter maps in both directions, and a
//!   brute-force two-mode oracle used to pin sign conventions.
//! - [`channels`]: Kraus models for particle loss and dephasing, channel
//!   application/composition, and the Fock-cutoff selection rule.
//! - [`qec`]: Knill-Laflamme diagnostics, QEC matrix assembly, and the
//!   transpose-channel fidelity, plus fast equivalent evaluation paths used in
//!   parameter sweeps.
//! - [`codesearch`]: constraint solving and optimization producing codeword pairs,
//!   fidelity sweeps, relative gain, and experimental-feasibility reports.

pub mod channels;
pub mod codesearch;
pub mod fockspace;
pub mod genstates;
pub mod qec;
pub mod specialfn;

pub use channels::{ChannelKind, KrausSet};
pub use fockspace::{DensityMatrix, FockVector, OperatorMatrix, Parity};
pub use genstates::{SchemeParams, StateParams};
pub use qec::{CodePair, Provenance, QecMatrix};
