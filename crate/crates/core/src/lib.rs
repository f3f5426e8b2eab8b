//! Classical amplitude-level simulation of Grover-style discrete Fourier
//! transforms that return a classical sparse spectrum.
//!
//! The crate is organised bottom-up:
//!
//! * [`dft`] holds the exact reference transforms (Fourier matrix rows, 1D and
//!   2D transforms, energy, squared inner products).
//! * [`amplitude`] simulates the index register: uniform preparation, the
//!   phase-flip plus inversion-about-the-mean iteration, and measurement.
//! * [`qdft1d`] runs the randomized Grover search for one in-window
//!   coefficient inside the residual-energy loop that collects a sparse
//!   spectrum.
//! * [`qdft2d`] applies the same loop twice over the pair-index space, once
//!   along the columns and once along the rows.
//! * [`convolution`] estimates periodic convolutions from two sparse spectra.
//! * [`io`], [`report`] and [`bench`] back the `qdft` command-line tool.
//!
//! Data-parallel loops (matrix-product transforms, Monte Carlo trial sweeps)
//! go through [`exec::Execution`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iteration otherwise.

pub mod amplitude;
pub mod bench;
pub mod convolution;
pub mod dft;
mod error;
pub mod exec;
pub mod io;
pub mod ledger;
pub mod qdft1d;
pub mod qdft2d;
pub mod report;

pub use amplitude::{AmplitudeState, MarkPredicate, RngStream};
pub use dft::{Complex, ComplexMatrix, ComplexVec};
pub use error::{Error, Result};
pub use ledger::QueryLedger;
pub use qdft1d::{QdftOptions, SparseSpectrum, ThresholdWindow};
pub use qdft2d::{PairIndex, SparseMatrixSpectrum};
