//! Reference bounds, fits, eigenstate surveys and sparseness sweeps.

pub mod bounds;
pub mod fit;
pub mod quadrature;
pub mod survey;
pub mod sweep;

pub use bounds::{
    gamma_factor, i_integral_closed, i_integral_numeric, mp_entropy_numeric, mp_entropy_via_i,
    page_bound_asymptotic, page_exact, MpParams,
};
pub use fit::{
    default_linear_window, fit_exp_decay, fit_linear_slope, FitOptions, FitParameter, FitResult,
};
pub use survey::{eigenstate_ee_survey, SurveyResult};
pub use sweep::{sparseness_sweep, SaturationTolerance, SweepResult, SweepValues, SweepVerdict};
