//! Two-photon states of a qubit array coupled to a waveguide.
//!
//! The array Hamiltonian `H_mn = −iΓ₀e^{iφ|m−n|}` is built in [`model`],
//! diagonalized in the one- and two-excitation sectors by [`spectra`],
//! analysed for cross-shaped bound states in [`analysis`], and compared
//! against the long-wavelength theory in [`effective`]. Energies are in
//! units of `Γ₀ = 1`.

pub mod analysis;
pub mod effective;
pub mod error;
pub mod model;
pub mod spectra;

pub use faer::{c64, Mat, MatRef};

pub use error::{Error, Result};
pub use model::{
    build_d2_matrix, build_pair_basis, build_single_hamiltonian, build_two_excitation_hamiltonian, ArrayConfig,
    BasisMode, Chi, DiscreteLaplacian, PairBasis,
};
pub use spectra::{
    eigensolve_dense, single_particle_spectrum, solve_two_excitation, two_excitation_spectrum, ComplexSpectrum,
    TwoExcSpectrum, TwoExcState,
};
