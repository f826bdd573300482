//! Bipartite entanglement measures for small quantum states, the weighted
//! (Hamming-weight and tail-sum) monogamy inequalities built on them, closed-form
//! example families with figure sweeps, and Monte Carlo concentration experiments
//! for the linear-entropy tangle of random induced states.
//!
//! Modules:
//! - [`qstate`]: dense registers, partial trace and transpose, Hermitian spectra, Haar sampling.
//! - [`measures`]: concurrence, negativity, EOF, Tsallis, Rényi and unified entropies.
//! - [`monogamy`]: inequality reports for the base, weighted and upper-bound relations.
//! - [`catalog`]: Acín, decoherence-free and Dicke families plus sweep generators.
//! - [`concentration`]: Lubkin mean, Lipschitz probe, tangle upper bounds.
//! - [`cli`]: the `entmono` command-line front end.

// Negated float comparisons below deliberately treat NaN as out of domain.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cli;
pub mod concentration;
pub mod error;
pub mod measures;
pub mod monogamy;
pub mod numfmt;
pub mod qstate;

pub use error::{Error, Result};
