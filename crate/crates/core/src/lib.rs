//! Core numerics for describing how localized wave-packet modes of a massive
//! scalar field look to uniformly accelerated observers.
//!
//! The pipeline is: build an inertial-slice wave packet ([`modes`]), expand it
//! in Rindler modes of the left and right wedge ([`modes::rindler_spectrum`]),
//! feed the spectra through the Bogolyubov coefficients connecting Minkowski
//! and Rindler quantizations ([`bogoliubov`]), assemble the resulting
//! two-mode Gaussian channel `(M, N)` including the Unruh noise integrals
//! ([`noise`], [`channel`]), and evaluate entanglement, fidelity and capacity
//! measures on the output states ([`measures`]).
//!
//! Conventions used throughout:
//! * covariance matrices are `sigma_kl = <{dX_k, dX_l}>` so the vacuum is the
//!   identity matrix;
//! * the Klein-Gordon product is taken on the `t = 0` slice with the
//!   future-directed unit normal in both Rindler wedges;
//! * Rindler frequencies are expressed in the dimensionless combination
//!   `nu = Omega / a` so that spectra are independent of the arbitrary
//!   boost-generator normalization `a`.

pub mod bogoliubov;
pub mod channel;
pub mod measures;
pub mod modes;
pub mod noise;
pub mod quadrature;
pub mod specfun;

pub(crate) mod interp;
