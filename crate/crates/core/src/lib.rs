//! Exact-diagonalization toolkit for the finite-size Lipkin-Meshkov-Glick
//! (LMG) model restricted to the maximal-spin Dicke sector.
//!
//! The crate is organised bottom-up:
//!
//! * [`spinspace`] builds the `S = N/2` sector and the collective spin
//!   operators as banded matrices.
//! * [`model`] assembles LMG Hamiltonians and the analytic/mean-field states.
//! * [`eigen`] holds the Hermitian eigensolver kernel (band or Householder
//!   reduction, then implicit-shift QL).
//! * [`evolve`] propagates states, evaluates projected mode solutions and the
//!   ground-state correlation function.
//! * [`spectra`] turns time series into line spectra and periodograms.
//! * [`ssb`] prepares symmetry-broken states and computes the tunnelling gaps.
//! * [`oracle`] checks sector results against the full `2^N` product space.
//!
//! Data-parallel loops go through [`par`]; with the default `parallel`
//! feature they run on rayon, otherwise sequentially.

pub mod eigen;
pub mod error;
pub mod evolve;
pub mod model;
pub mod oracle;
pub mod par;
pub mod spectra;
pub mod spinspace;
pub mod ssb;

pub use error::{LmgError, Result};
pub use num_complex::Complex64 as C64;
