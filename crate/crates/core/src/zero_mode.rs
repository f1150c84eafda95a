//! Small-γ expansion `E₀(γ) = e1 γ + e2 γ² + e3 γ³ + …` of the lowest
//! eigenvalue of `(-d² + γ) ψ = E Σ ψ` when the unshifted problem has a
//! constant zero mode.
//!
//! Two routes are provided. The kernel route works with
//! `u(x) = ∫ G⁽⁰⁾(x, y) Σ(y) dy` and needs only quadrature. The matrix route
//! sums over the Laplacian eigenbasis and is truncated at a finite size.

use nalgebra::DVector;
use serde::Serialize;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::kernels::{g0_unchecked, BoundaryCondition};
use crate::quadrature::TOL_1D;
use crate::spectra::basis::{BasisTable, MatrixElementTable, Moments};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroModeExpansion {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// Basis size behind `e3`; `None` when it came from the kernel route.
    pub truncation_m: Option<usize>,
    /// Estimated error of `e3` (truncation plus quadrature).
    pub e3_error: f64,
}

/// Evaluates the truncated series `e1 γ + e2 γ² + e3 γ³`.
pub fn e0_series_eval(z: &ZeroModeExpansion, gamma: f64) -> f64 {
    gamma * (z.e1 + gamma * (z.e2 + gamma * z.e3))
}

/// Integrals of the profile against `u = G⁽⁰⁾Σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIntegrals {
    /// ∫Σ over the profile interval.
    pub mass: f64,
    /// ∫Σu = ∫∫ Σ G⁽⁰⁾ Σ.
    pub b0: f64,
    /// ∫u², equal to ∫∫ Σ G⁽¹⁾ Σ.
    pub u2: f64,
    /// ∫Σu².
    pub sigma_u2: f64,
    pub error: f64,
}

/// `u(x) = ∫ G⁽⁰⁾(x, y) Σ(y) dy`.
pub(crate) fn potential(d: &Density, bc: BoundaryCondition, x: f64) -> Result<(f64, f64)> {
    let iv = d.interval();
    let a = iv.length();
    let r = d
        .quad(1e-13)
        .integrate(|y| g0_unchecked(bc, a, x, y) * d.eval(y), iv.lo(), iv.hi(), &[x])?;
    Ok((r.value, r.error_estimate))
}

/// Integrates `g(x, Σ(x), u(x))` over the profile interval.
pub(crate) fn integrate_with_potential<G: Fn(f64, f64, f64) -> f64>(
    d: &Density,
    bc: BoundaryCondition,
    tol: f64,
    g: G,
) -> Result<(f64, f64)> {
    let iv = d.interval();
    let failure = std::cell::RefCell::new(None);
    let inner = std::cell::Cell::new(0.0_f64);
    let r = d.quad(tol).integrate(
        |x| match potential(d, bc, x) {
            Ok((u, e)) => {
                inner.set(inner.get().max(e));
                g(x, d.eval(x), u)
            }
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                f64::NAN
            }
        },
        iv.lo(),
        iv.hi(),
        &[],
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let r = r?;
    Ok((r.value, r.error_estimate + inner.get() * iv.length()))
}

pub fn kernel_integrals(d: &Density, bc: BoundaryCondition) -> Result<KernelIntegrals> {
    if !bc.has_zero_mode() {
        return Err(Error::Parameter(format!("{bc} boundary conditions have no zero mode")));
    }
    let iv = d.interval();
    let mass = d
        .quad(TOL_1D)
        .integrate(|x| d.eval(x), iv.lo(), iv.hi(), &[])?;
    let (b0, e0) = integrate_with_potential(d, bc, TOL_1D, |_, s, u| s * u)?;
    let (u2, e1) = integrate_with_potential(d, bc, TOL_1D, |_, _, u| u * u)?;
    let (su2, e2) = integrate_with_potential(d, bc, TOL_1D, |_, s, u| s * u * u)?;
    Ok(KernelIntegrals {
        mass: mass.value,
        b0,
        u2,
        sigma_u2: su2,
        error: mass.error_estimate + e0 + e1 + e2,
    })
}

/// All three coefficients from kernel integrals.
pub fn e0_coefficients_kernel(d: &Density, bc: BoundaryCondition) -> Result<ZeroModeExpansion> {
    let k = kernel_integrals(d, bc)?;
    Ok(expansion_from_integrals(d.interval().length(), &k))
}

pub(crate) fn expansion_from_integrals(a: f64, k: &KernelIntegrals) -> ZeroModeExpansion {
    let e1 = a / k.mass;
    let e2 = -e1 * e1 * k.b0 / k.mass;
    let e3 = -(2.0 * e1 * e2 * k.b0 + e1.powi(3) * k.sigma_u2 - e1 * e1 * k.u2) / k.mass;
    ZeroModeExpansion {
        e1,
        e2,
        e3,
        truncation_m: None,
        e3_error: k.error * (e1.powi(3) + e1 * e1) / k.mass,
    }
}

/// Overlaps and basis eigenvalues for the first `m` modes.
pub fn matrix_elements(d: &Density, bc: BoundaryCondition, m: usize) -> Result<MatrixElementTable> {
    MatrixElementTable::build(d, bc, m)
}

/// Mode sums entering the matrix form of the expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSums {
    /// Σ′ ⟨0|Σ|m⟩² / ε_m
    pub first: f64,
    /// Σ′ Σ′ ⟨0|Σ|m⟩⟨m|Σ|n⟩⟨n|Σ|0⟩ / (ε_m ε_n)
    pub cross: f64,
    /// Σ′ ⟨0|Σ|m⟩² / ε_m²
    pub second: f64,
}

pub fn mode_sums(t: &MatrixElementTable) -> ModeSums {
    let n = t.size;
    let v = DVector::from_fn(n, |m, _| if m == 0 { 0.0 } else { t.s[(0, m)] / t.eps[m] });
    let mut first = 0.0;
    let mut second = 0.0;
    for m in (1..n).rev() {
        first += t.s[(0, m)] * v[m];
        second += v[m] * v[m];
    }
    let cross = v.dot(&(&t.s * &v));
    ModeSums {
        first,
        cross,
        second,
    }
}

/// `e2` from the truncated mode sum (for cross-checking the kernel route).
pub fn e2_matrix(t: &MatrixElementTable, a: f64, mass: f64) -> f64 {
    let e1 = a / mass;
    -(a / mass) * e1 * e1 * mode_sums(t).first
}

fn e3_matrix(t: &MatrixElementTable, a: f64, mass: f64, e2: f64) -> f64 {
    let e1 = a / mass;
    let s = mode_sums(t);
    -(a / mass) * (2.0 * e1 * e2 * s.first + e1.powi(3) * s.cross - e1 * e1 * s.second)
}

const E3_MAX_M: usize = 2048;

/// `e1` by quadrature, `e2` from the kernel bilinear form, `e3` from the
/// truncated matrix sums starting at basis size `m` and doubling until the
/// change drops below 1e-9 (or the size cap is hit).
pub fn e0_coefficients(d: &Density, bc: BoundaryCondition, m: usize) -> Result<ZeroModeExpansion> {
    if !bc.has_zero_mode() {
        return Err(Error::Parameter(format!("{bc} boundary conditions have no zero mode")));
    }
    let a = d.interval().length();
    let iv = d.interval();
    let mass = d
        .quad(TOL_1D)
        .integrate(|x| d.eval(x), iv.lo(), iv.hi(), &[])?
        .value;
    let (b0, b0_err) = integrate_with_potential(d, bc, TOL_1D, |_, s, u| s * u)?;
    let e1 = a / mass;
    let e2 = -e1 * e1 * b0 / mass;

    let mut size = m.max(2);
    let mut basis = BasisTable::new(bc, iv, size);
    let mut moments = Moments::new(d, 2 * basis.max_k())?;
    let mut e3 = e3_matrix(&MatrixElementTable::from_moments(&basis, &moments), a, mass, e2);
    let mut change = f64::INFINITY;
    while size < E3_MAX_M.max(m) && change >= 1e-9 {
        size *= 2;
        basis = BasisTable::new(bc, iv, size);
        moments.extend(d, 2 * basis.max_k())?;
        let next = e3_matrix(&MatrixElementTable::from_moments(&basis, &moments), a, mass, e2);
        change = (next - e3).abs();
        e3 = next;
    }
    let truncation = if change.is_finite() { change / 3.0 } else { 0.0 };
    Ok(ZeroModeExpansion {
        e1,
        e2,
        e3,
        truncation_m: Some(size),
        e3_error: truncation + b0_err * e1.powi(3) / mass + moments.max_error() * size as f64,
    })
}

/// Lowest eigenvalue of the γ-shifted problem, from a Rayleigh–Ritz solve in
/// the first `m` Laplacian modes.
///
/// The largest eigenvalue of `D^{-1/2} S D^{-1/2}` with `D = diag(ε + γ)` is
/// `1/E₀`; power iteration finds it to full relative precision.
pub fn shifted_eigen_oracle(d: &Density, bc: BoundaryCondition, gamma: f64, m: usize) -> Result<f64> {
    if !(gamma > 0.0) && bc.has_zero_mode() {
        return Err(Error::Parameter(format!("shift must be positive, got {gamma}")));
    }
    let t = matrix_elements(d, bc, m)?;
    Ok(shifted_ground(&t, gamma))
}

pub(crate) fn shifted_ground(t: &MatrixElementTable, gamma: f64) -> f64 {
    let n = t.size;
    let scale = DVector::from_fn(n, |i, _| 1.0 / (t.eps[i] + gamma).sqrt());
    let mut b = t.s.clone();
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] *= scale[i] * scale[j];
        }
    }
    let mut v = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let mut mu = 0.0;
    for _ in 0..500 {
        let w = &b * &v;
        let next = v.dot(&w) / v.dot(&v);
        let norm = w.norm();
        v = w / norm;
        if (next - mu).abs() <= 1e-16 * next.abs() {
            mu = next;
            break;
        }
        mu = next;
    }
    1.0 / mu
}

/// Coefficients of `E(γ) = c1 γ + c2 γ² + c3 γ³` through three samples.
pub fn richardson_coefficients(gammas: [f64; 3], energies: [f64; 3]) -> [f64; 3] {
    // Divided differences of E/γ.
    let f: Vec<f64> = (0..3).map(|i| energies[i] / gammas[i]).collect();
    let d01 = (f[1] - f[0]) / (gammas[1] - gammas[0]);
    let d12 = (f[2] - f[1]) / (gammas[2] - gammas[1]);
    let c3 = (d12 - d01) / (gammas[2] - gammas[0]);
    let c2 = d01 - c3 * (gammas[0] + gammas[1]);
    let c1 = f[0] - c2 * gammas[0] - c3 * gammas[0] * gammas[0];
    [c1, c2, c3]
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn uniform_has_no_corrections() {
        let z = e0_coefficients_kernel(&Density::uniform(1.0).unwrap(), BoundaryCondition::Neumann).unwrap();
        assert!((z.e1 - 1.0).abs() < 1e-14);
        assert!(z.e2.abs() < 1e-14 && z.e3.abs() < 1e-14);
        let g = shifted_eigen_oracle(&Density::uniform(1.0).unwrap(), BoundaryCondition::Periodic, 0.01, 32)
            .unwrap();
        assert!((g - 0.01).abs() < 1e-17);
    }

    #[test]
    fn oscillating_coefficients() {
        let d = Density::oscillating(1.0).unwrap();
        let z = e0_coefficients_kernel(&d, BoundaryCondition::Neumann).unwrap();
        assert!((z.e1 - 0.5).abs() < 1e-13);
        assert!((z.e2 + 3.0 / (64.0 * PI * PI)).abs() < 1e-11);
        assert!((z.e3 - 9.02283596603e-5).abs() < 1e-12);
        let zm = e0_coefficients(&d, BoundaryCondition::Neumann, 512).unwrap();
        assert!((zm.e3 - z.e3).abs() < 1e-8, "{} {}", zm.e3, z.e3);
    }

    #[test]
    fn series_eval() {
        let z = ZeroModeExpansion {
            e1: 1.0,
            e2: 0.0,
            e3: 0.0,
            truncation_m: None,
            e3_error: 0.0,
        };
        assert_eq!(e0_series_eval(&z, 0.3), 0.3);
    }

    #[test]
    fn richardson_recovers_cubic() {
        let c = richardson_coefficients([0.01, 0.005, 0.0025], [0.01, 0.005, 0.0025].map(|g: f64| {
            0.5 * g - 0.2 * g * g + 0.03 * g * g * g
        }));
        assert!((c[0] - 0.5).abs() < 1e-12 && (c[1] + 0.2).abs() < 1e-9 && (c[2] - 0.03).abs() < 1e-6);
    }
}
