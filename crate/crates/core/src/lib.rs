//! Littlewood-Paley analysis of forward energy transfer for the Euler and
//! Navier-Stokes equations on the periodic torus.
//!
//! Fields are kept as exact sparse Fourier series (`SpectralField`) so that
//! triad sums at very large wavenumbers are computed without a grid. Dense
//! grids appear only for L^r quadrature and in the pseudo-spectral solver.
//!
//! Convention: `u(x) = sum_k u_hat(k) exp(i k.x)` on `[0, 2pi)^n`, and every
//! norm uses unnormalized Lebesgue measure on that box.

pub mod cascade;
pub mod constructions;
pub mod error;
pub mod evolution;
pub mod fft;
pub mod lattice_sum;
pub mod littlewood_paley;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{CVec, GridField, SpectralField, Wavevector};

/// Dyadic scale `2^q`.
pub fn lambda(q: i32) -> f64 {
    (2.0f64).powi(q)
}
