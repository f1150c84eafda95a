//! Spectral sum rules `Z_p = Σ 1/E_nᵖ` for `-ψ'' = E Σ ψ` on an interval (and
//! the annulus through its conformal rectangle), with independent numerical
//! spectra for cross-checks.

pub mod density;
pub mod error;
pub mod expr;
pub mod kernels;
pub mod quadrature;
pub mod spectra;
pub mod sum_rules;
pub mod tail;
pub mod zero_mode;

pub use density::{density_integral, make_builtin, validate_positivity, Builtin, Density};
pub use error::{Error, Result};
pub use kernels::BoundaryCondition;
