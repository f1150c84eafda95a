use thiserror::Error;

use crate::expr::ExprError;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("coordinate {x} lies outside [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("tolerance {tol:e} not reached: estimate {value} with error {error:e}")]
    Accuracy { value: f64, error: f64, tol: f64 },

    #[error("no closed-form order-{order} kernel for {bc} boundary conditions")]
    UnsupportedKernel { bc: &'static str, order: usize },

    #[error("density is not positive: Σ({x}) = {value}")]
    NonPositive { x: f64, value: f64 },

    #[error("expression: {0}")]
    Expr(#[from] ExprError),

    #[error("eigenvalue search failed: {0}")]
    Eigen(String),

    #[error("tail fit failed: {0}")]
    Fit(String),

    #[error("no reference value for {0}")]
    Uncatalogued(String),
}

pub type Result<T> = std::result::Result<T, Error>;
