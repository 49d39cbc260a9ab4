//! Coherence distribution dynamics of qubit registers coupled to independent
//! zero-temperature Lorentzian reservoirs.
//!
//! The crate evolves multi-qubit density matrices with the exact
//! amplitude-damping solution of a Lorentzian bath (Markovian and
//! non-Markovian), then decomposes the relative entropy of coherence into
//! local, global, bipartite and tripartite parts, tracks the monogamy of
//! coherence, and fits decay rates and revivals of the resulting time series.
//!
//! Module map:
//! - [`qlinalg`]: dense complex matrices, density matrices, partial trace,
//!   dephasing and entropies.
//! - [`states`]: named register states and seeded random states.
//! - [`reservoir`]: bath parameters, the coherence amplitude `h(t)`, Kraus
//!   channels and infinite-time probes.
//! - [`coherence`]: coherence functionals, monogamy and the seven-tuple.
//! - [`analysis`]: time sweeps, decay fits, revivals and steady states.
//! - [`cli`]: config ingestion and CSV/JSON emission for the `qcoherence`
//!   binary.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod coherence;
mod error;
pub mod qlinalg;
pub mod reservoir;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
