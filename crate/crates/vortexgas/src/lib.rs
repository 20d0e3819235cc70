//! Statistical mechanics of point vortices on the flat 2-torus.
//!
//! The crate provides:
//!
//! - a Fourier basis and validated evaluators for the torus Green function
//!   `G` (zero-mean solution of `ΔG = δ₀ − 1`) and the Biot–Savart kernel
//!   `K = ∇⊥G` ([`spectral`]);
//! - vortex-gas configurations, the pairwise interaction Hamiltonian, and
//!   samplers for the uniform/Gaussian product measure together with its
//!   energy-conditioned (microcanonical) restriction ([`vortex`]);
//! - truncated white noise on the torus, its renormalized kinetic energy,
//!   and quadratic functionals against (mollified) Green kernels
//!   ([`white_noise`]);
//! - Heun time integration of the point-vortex dynamics with conservation
//!   monitoring and weak-form residual checks ([`dynamics`]);
//! - shell-averaged energy spectra, power-law slope fits, histograms and
//!   two-sample distances ([`spectrum`]);
//! - scripted, seeded ensemble experiments with CSV/manifest outputs
//!   ([`experiments`]).
//!
//! The inner loops (pairwise force sums, ensemble Monte Carlo) are
//! data-parallel via rayon when the default `parallel` feature is enabled;
//! disabling it yields a fully sequential build with bit-identical results.

pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod io;
pub mod spectral;
pub mod spectrum;
pub mod torus;
pub mod vortex;
pub mod white_noise;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
