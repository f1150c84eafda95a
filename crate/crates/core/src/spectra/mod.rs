//! Numerical spectra computed independently of the sum-rule formulas.

use serde::{Deserialize, Serialize};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::kernels::BoundaryCondition;

pub mod basis;
pub mod bessel;
pub mod disk;
pub mod monodromy;
pub mod pruefer;
pub mod ritz;
mod roots;

pub use disk::disk_annulus_spectrum;
pub use ritz::{generalized_sym_eig, rayleigh_ritz};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Pruefer,
    Monodromy,
    RayleighRitz,
    Bessel,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pruefer" | "prufer" => Ok(Method::Pruefer),
            "monodromy" => Ok(Method::Monodromy),
            "rayleigh-ritz" | "ritz" | "rr" => Ok(Method::RayleighRitz),
            "bessel" => Ok(Method::Bessel),
            _ => Err(Error::Parameter(format!("unknown method '{s}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Pruefer => "pruefer",
            Method::Monodromy => "monodromy",
            Method::RayleighRitz => "rayleigh-ritz",
            Method::Bessel => "bessel",
        })
    }
}

/// A distinct eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub value: f64,
    pub multiplicity: usize,
    /// Absolute error estimate; `None` for variational upper bounds.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Ascending, zero mode excluded.
    pub levels: Vec<Level>,
    pub method: Method,
    pub zero_mode_removed: bool,
}

impl Spectrum {
    /// Number of eigenvalues counted with multiplicity.
    pub fn count(&self) -> usize {
        self.levels.iter().map(|l| l.multiplicity).sum()
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn values(&self) -> Vec<f64> {
        self.levels
            .iter()
            .flat_map(|l| std::iter::repeat_n(l.value, l.multiplicity))
            .collect()
    }

    /// Keeps the first `count` eigenvalues, trimming the multiplicity of the last level.
    pub fn truncate(&mut self, count: usize) {
        let mut left = count;
        self.levels.retain_mut(|l| {
            if left == 0 {
                return false;
            }
            l.multiplicity = l.multiplicity.min(left);
            left -= l.multiplicity;
            true
        });
    }

    /// Partial sum `Σ 1/Eᵖ` over the stored eigenvalues, largest first.
    pub fn partial_sum(&self, p: i32) -> f64 {
        self.levels
            .iter()
            .rev()
            .map(|l| l.multiplicity as f64 * l.value.powi(-p))
            .sum()
    }
}

/// First `count` nonzero eigenvalues of `−ψ″ = E Σ ψ`.
pub fn sl_spectrum(d: &Density, bc: BoundaryCondition, count: usize, method: Method) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::Parameter("count must be at least 1".into()));
    }
    match (method, bc) {
        (Method::Pruefer, BoundaryCondition::Neumann | BoundaryCondition::Dirichlet) => {
            pruefer::spectrum(d, bc, count, &pruefer::SlOptions::default())
        }
        (Method::Monodromy, BoundaryCondition::Periodic) => {
            monodromy::spectrum(d, count, &pruefer::SlOptions::default())
        }
        (Method::RayleighRitz, _) => {
            let mut s = rayleigh_ritz(d, bc, (count + 1).max(2) * 4)?;
            s.truncate(count);
            Ok(s)
        }
        _ => Err(Error::Parameter(format!(
            "method {method} does not handle {bc} ends"
        ))),
    }
}

/// Default method for a boundary condition.
pub fn default_method(bc: BoundaryCondition) -> Method {
    match bc {
        BoundaryCondition::Periodic => Method::Monodromy,
        _ => Method::Pruefer,
    }
}
