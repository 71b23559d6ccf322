//! Continuum-limit description: the local pair-field equation, its Green's
//! function and the localization operator near a standing-wave resonance.

mod green;
mod loperator;
mod transformed;

pub use green::{
    greens_function_direct, greens_function_resonant, greens_function_series, noninteracting_eigenvalues,
    resonance_energy_ratio, short_range_g, GreensFunction, ShortRangeKernel,
};
pub use loperator::{analytic_odd_profile, build_l_operator, fit_odd_profile, solve_l, LOperator, OddProfileFit};
pub use transformed::{
    solve_transformed, solve_transformed_equation, Interaction, TransformedSolution, TransformedState,
};
