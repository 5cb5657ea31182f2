//! Functional calculus for `Δ`: exact spectral oracle, truncated series,
//! cancellative operators and off-diagonal decay.

mod context;
mod decay;
mod gaffney;
mod ops;
mod series;
mod spectral;

pub use context::{Calculus, DEFAULT_TOL};
pub use decay::{decay_constant, exp_decay_bound, exp_decay_majorant, DECAY_RATE};
pub use gaffney::{
    apply_family, gaffney_fit, gradient_gaffney_c, weighted_gradient_norm, GaffneyFamily, GaffneyFit, GaffneyPoint,
};
pub use ops::{
    apply_molecule_operator, average, bz1_product, bz2_identity_defect, bz2_power, check_tuple, MoleculeOperator,
};
pub use series::{
    binomial_coefficients, delta_power, inv_sqrt, plus_power, reproducing_check, resolvent, resolvent_power,
    SeriesKind, SeriesOperator, SpectralBounds, SERIES_N_MAX,
};
pub use spectral::{SpectralOracle, KERNEL_TOLERANCE, ORACLE_LIMIT};
