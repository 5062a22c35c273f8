//! Path following for curves known only through discrete, possibly noisy,
//! sample points.
//!
//! The pipeline is:
//!
//! 1. [`pathdata`]: load or synthesize planar samples and perturb them with
//!    seeded Gaussian noise.
//! 2. [`spectrum`]: take the DFT of `c[n] = x[n] + j y[n]` (arbitrary `N`),
//!    shift the bins to signed frequencies and truncate with a rectangular
//!    window.
//! 3. [`trigpath`]: evaluate the resulting trigonometric curve and its
//!    derivative in the latent parameter `theta`.
//! 4. [`gvf`]: build the guiding vector field on the lifted state
//!    `(x, y, theta)`; it has no zeros anywhere.
//! 5. [`sim`]: integrate `eta' = chi(eta)` with a fixed-step scheme.
//! 6. [`analysis`]: reconstruction error functionals, the mean-square
//!    error bound and its window sweep, and Monte-Carlo certification.

pub mod analysis;
mod error;
pub mod fmt;
pub mod gvf;
pub mod pathdata;
pub mod sim;
pub mod spectrum;
pub mod trigpath;

pub use error::{Error, Result};

pub use analysis::{certify, CertifyOptions, ErrorReport};
pub use gvf::{FieldSample, FieldState, GvfParams};
pub use pathdata::{NoiseSpec, PathSamples, SynthKind};
pub use sim::{Method, SimConfig, Trajectory};
pub use spectrum::{Spectrum, WindowedSpectrum};
pub use trigpath::TrigPath;

pub use num_complex::Complex64;
