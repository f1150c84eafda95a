//! Rayleigh–Ritz in the Laplacian eigenbasis: `diag(ε) c = E S c`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::kernels::BoundaryCondition;

use super::basis::MatrixElementTable;
use super::{Level, Method, Spectrum};

/// All eigenvalues of `diag(stiffness) c = λ B c`, ascending.
pub fn generalized_sym_eig(stiffness: &[f64], mass: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = stiffness.len();
    if mass.nrows() != n || mass.ncols() != n {
        return Err(Error::Parameter(format!(
            "stiffness has {n} entries but mass is {}×{}",
            mass.nrows(),
            mass.ncols()
        )));
    }
    let chol = mass
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Eigen("mass matrix is not positive definite".into()))?;
    // C = L⁻¹ diag(ε) L⁻ᵀ
    let l = chol.l();
    let mut linv = DMatrix::identity(n, n);
    if !l.solve_lower_triangular_mut(&mut linv) {
        return Err(Error::Eigen("singular Cholesky factor".into()));
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| linv[(i, j)] * stiffness[j]);
    let mut c = &scaled * linv.transpose();
    // symmetrize roundoff
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    let mut values: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Ritz values from the first `states` basis functions; the zero mode is dropped.
pub fn rayleigh_ritz(d: &Density, bc: BoundaryCondition, states: usize) -> Result<Spectrum> {
    if states < 2 {
        return Err(Error::Parameter("Rayleigh–Ritz needs at least two states".into()));
    }
    let t = MatrixElementTable::build(d, bc, states)?;
    let mut values = generalized_sym_eig(&t.eps, &t.s)?;
    if bc.has_zero_mode() {
        values.remove(0);
    }
    Ok(Spectrum {
        levels: values
            .into_iter()
            .map(|v| Level {
                value: v,
                multiplicity: 1,
                accuracy: None,
            })
            .collect(),
        method: Method::RayleighRitz,
        zero_mode_removed: bc.has_zero_mode(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn small_cases() {
        let v = generalized_sym_eig(&[0.0, 1.0], &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(v, vec![0.0, 1.0]);
        let v = generalized_sym_eig(&[0.0, PI * PI], &(DMatrix::identity(2, 2) * 2.0)).unwrap();
        assert!(v[0].abs() < 1e-15 && (v[1] - PI * PI / 2.0).abs() < 1e-14);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(generalized_sym_eig(&[1.0, 2.0], &bad).is_err());
    }

    #[test]
    fn uniform_basis_is_exact() {
        let s = rayleigh_ritz(&Density::uniform(1.0).unwrap(), BoundaryCondition::Neumann, 50).unwrap();
        assert_eq!(s.count(), 49);
        for (n, l) in s.levels.iter().enumerate() {
            let want = ((n + 1) as f64 * PI).powi(2);
            assert!((l.value - want).abs() < 1e-10 * want);
        }
    }
}
