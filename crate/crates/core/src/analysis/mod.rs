//! Quantities built from a state or a trajectory: conservation-law densities,
//! Morawetz actions, commutator kernels and the singular double integrals.

pub mod besov;
pub mod densities;
pub mod erf_action;
pub mod kernels;
pub mod morawetz;
pub mod spacetime;

pub use besov::{besov_double_integral, besov_double_integral_with, half_derivative_sq, BesovEstimate, BesovMethod};
pub use densities::{densities, DensitySet, RHO_CUTOFF};
pub use erf_action::{erf_action, erf_action_terms, p1_limit, p4_limit, pressure_coefficient, ErfActionTerms};
pub use kernels::{commutator_kernel, p2_commutator_form, sym2_eigenvalues, two_point_momentum};
pub use morawetz::{
    interaction_action, interaction_action_from, interaction_commutator_form, interaction_commutator_form_from,
    morawetz_action, morawetz_action_from,
};
pub use spacetime::{
    check_monotone, correlation_density, interaction_lhs, integrate_series, spacetime_lebesgue_pow,
    density_spacetime_pow, sup_over_time, time_integral, MonotoneStats, TimeRule,
};
