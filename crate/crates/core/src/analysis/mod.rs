//! Schmidt analysis, localization measures and cross-state classification.

mod classify;
mod fourier;
mod ipr;
mod phase;
mod schmidt;

pub use classify::{classify_state, Classification, Classifier, Thresholds};
pub use fourier::{fourier_1d, fourier_2d, spectral_ipr, KGrid};
pub use ipr::{ipr_real, ipr_reciprocal, ipr_reciprocal_in};
pub use phase::{default_chi_grid, default_phi_grid, phase_diagram, CellFailure, PhaseCell, PhaseDiagram};
pub use schmidt::{schmidt_decompose, SchmidtDecomposition};
