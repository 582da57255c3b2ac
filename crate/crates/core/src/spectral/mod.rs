//! Exact sparse Fourier-field algebra on the 2- and 3-torus.

mod field;
pub mod grid;
pub mod ops;

pub use field::{cvec_add, cvec_conj, cvec_norm_sq, cvec_real, cvec_scale, CVec, SpectralField, Wavevector, CZERO};
pub use grid::{analyze, evaluate, lp_norm, min_resolution, slice_sup, synthesize, GridField};
pub use ops::{
    advect, advect_at, divergence_residual, grad_inner, inner, l2_norm_exact, leray_project,
    leray_project_real, project_field, trilinear, visit_triads, volume, EXACT_TOL,
};
