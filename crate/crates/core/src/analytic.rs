//! Closed-form reflection amplitudes.
//!
//! The two-atom formula comes from eliminating σ_1 and σ_2 from the
//! steady-state equations with δ_c = δ:
//!
//! ```text
//! κ_wg/(r+1) = (κ/2 − iδ) − g²[2(iδ − γ/2) + e^{2iξ}γ_L + γ_R] / [(iδ − γ/2)² − e^{2iξ}γ_Lγ_R]
//! ```
//!
//! These functions never touch the linear solver, so they can serve as an
//! independent check on it.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::solver::GAMMA;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size below which a denominator counts as a pole.
const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedFormInput {
    pub delta: f64,
    pub gamma_l: f64,
    pub gamma_r: f64,
    pub g: f64,
    pub kappa_wg: f64,
    pub kappa_sc: f64,
    pub xi: f64,
}

impl ClosedFormInput {
    pub fn from_params(params: &SystemParams, delta: f64) -> Self {
        ClosedFormInput {
            delta,
            gamma_l: params.gamma_l(),
            gamma_r: params.gamma_r(),
            g: params.g(),
            kappa_wg: params.kappa_wg(),
            kappa_sc: params.kappa_sc(),
            xi: params.xi(),
        }
    }

    fn kappa(&self) -> f64 {
        self.kappa_wg + self.kappa_sc
    }
}

/// Reflection amplitude of two chirally coupled atoms one lattice step apart.
pub fn r_two_atoms(input: &ClosedFormInput) -> Result<Complex64> {
    let atom = I * input.delta - GAMMA / 2.0;
    let e2 = Complex64::from_polar(1.0, 2.0 * input.xi);

    let denom = atom * atom - e2 * input.gamma_l * input.gamma_r;
    let denom_scale = atom.norm_sqr() + input.gamma_l.abs() * input.gamma_r.abs();
    if denom.norm() <= POLE_TOL * denom_scale {
        return Err(Error::Pole("(iδ − γ/2)² − e^{2iξ}γ_Lγ_R"));
    }
    let numer = 2.0 * atom + e2 * input.gamma_l + input.gamma_r;
    let cavity = Complex64::new(input.kappa() / 2.0, -input.delta);
    let rhs = cavity - input.g * input.g * numer / denom;
    let rhs_scale = cavity.norm() + input.g * input.g * numer.norm() / denom.norm();
    if rhs.norm() <= POLE_TOL * rhs_scale {
        return Err(Error::Pole("κ_wg/(r+1) right-hand side"));
    }
    Ok(input.kappa_wg / rhs - 1.0)
}

/// Reflection amplitude of the bare cavity, r = κ_wg/(κ/2 − iδ) − 1.
pub fn r_no_atoms(delta: f64, kappa_wg: f64, kappa_sc: f64) -> Complex64 {
    let kappa = kappa_wg + kappa_sc;
    kappa_wg / Complex64::new(kappa / 2.0, -delta) - 1.0
}

/// On-resonance two-atom reference amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceValues {
    /// Two independent atoms: 2κ_wg/(κ(1+2C)) − 1.
    pub r_ind: f64,
    /// Directional coupling at ξ = π/2: 2κ_wg/(κ(1+4C)) − 1.
    pub r_d: f64,
    /// Reciprocal coupling at ξ = π/2: 2κ_wg/(κ(1+C)) − 1.
    pub r_rec: f64,
}

pub fn reference_values(cooperativity: f64, kappa_wg: f64, kappa: f64) -> ReferenceValues {
    let base = 2.0 * kappa_wg / kappa;
    let c = cooperativity;
    ReferenceValues {
        r_ind: base / (1.0 + 2.0 * c) - 1.0,
        r_d: base / (1.0 + 4.0 * c) - 1.0,
        r_rec: base / (1.0 + c) - 1.0,
    }
}
