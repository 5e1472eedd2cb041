//! Physical parameters of the atom–cavity system and the probe.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed deviation of γ_L + γ_R from 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Rates and geometry of N equidistant atoms coupled to the cavity.
///
/// Every rate is a ratio to the total single-atom decay rate γ. Atom μ sits at
/// lattice site μ − 1, so the guided-mode phase between sites k and l is
/// ξ·|k − l|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    n_atoms: usize,
    gamma_l: f64,
    gamma_r: f64,
    g: f64,
    kappa_wg: f64,
    kappa_sc: f64,
    xi: f64,
    gamma_mhz: Option<f64>,
}

impl SystemParams {
    /// Builds a parameter set with γ_R = 1 − γ_L.
    pub fn new(n_atoms: usize, gamma_l: f64, g: f64, kappa_wg: f64, kappa_sc: f64, xi: f64) -> Self {
        SystemParams {
            n_atoms,
            gamma_l,
            gamma_r: 1.0 - gamma_l,
            g,
            kappa_wg,
            kappa_sc,
            xi: reduce_phase(xi),
            gamma_mhz: None,
        }
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }
    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }
    pub fn gamma_r(&self) -> f64 {
        self.gamma_r
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn kappa_wg(&self) -> f64 {
        self.kappa_wg
    }
    pub fn kappa_sc(&self) -> f64 {
        self.kappa_sc
    }
    /// Total cavity decay κ = κ_wg + κ_sc.
    pub fn kappa(&self) -> f64 {
        self.kappa_wg + self.kappa_sc
    }
    /// Interatomic phase ξ, reduced to [0, 2π).
    pub fn xi(&self) -> f64 {
        self.xi
    }
    pub fn gamma_mhz(&self) -> Option<f64> {
        self.gamma_mhz
    }

    pub fn with_n_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    /// Sets γ_L and γ_R = 1 − γ_L.
    pub fn with_gamma_l(mut self, gamma_l: f64) -> Self {
        self.gamma_l = gamma_l;
        self.gamma_r = 1.0 - gamma_l;
        self
    }

    /// Sets both directional rates independently. Sets that do not sum to 1
    /// fail [`validate`](Self::validate) but remain solvable, which is how
    /// the independent-atom reference (γ_L = γ_R = 0) is reached.
    pub fn with_decay_rates(mut self, gamma_l: f64, gamma_r: f64) -> Self {
        self.gamma_l = gamma_l;
        self.gamma_r = gamma_r;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_cavity(mut self, kappa_wg: f64, kappa_sc: f64) -> Self {
        self.kappa_wg = kappa_wg;
        self.kappa_sc = kappa_sc;
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = reduce_phase(xi);
        self
    }

    pub fn with_gamma_mhz(mut self, gamma_mhz: Option<f64>) -> Self {
        self.gamma_mhz = gamma_mhz;
        self
    }

    /// Single-atom cooperativity C = 4g²/(κγ).
    pub fn cooperativity(&self) -> Result<f64> {
        let kappa = self.kappa();
        if kappa <= 0.0 || !kappa.is_finite() {
            return Err(Error::Domain(format!(
                "cooperativity needs κ > 0, got κ = {kappa}"
            )));
        }
        Ok(4.0 * self.g * self.g / kappa)
    }

    /// Checks every invariant and lists the ones that fail.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let finite = [
            ("gamma_L", self.gamma_l),
            ("gamma_R", self.gamma_r),
            ("g", self.g),
            ("kappa_wg", self.kappa_wg),
            ("kappa_sc", self.kappa_sc),
            ("xi", self.xi),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                violations.push(Violation::NotFinite(name));
            }
        }
        if self.gamma_l < 0.0 {
            violations.push(Violation::Negative("gamma_L"));
        }
        if self.gamma_r < 0.0 {
            violations.push(Violation::Negative("gamma_R"));
        }
        if (self.gamma_l + self.gamma_r - 1.0).abs() > NORMALIZATION_TOL {
            violations.push(Violation::Normalization {
                sum: self.gamma_l + self.gamma_r,
            });
        }
        if self.g < 0.0 {
            violations.push(Violation::Negative("g"));
        }
        if !(self.kappa_wg > 0.0) {
            violations.push(Violation::NonPositive("kappa_wg"));
        }
        if self.kappa_sc < 0.0 {
            violations.push(Violation::Negative("kappa_sc"));
        }
        if let Some(mhz) = self.gamma_mhz {
            if !(mhz > 0.0 && mhz.is_finite()) {
                violations.push(Violation::NonPositive("gamma_mhz"));
            }
        }
        ValidationReport { violations }
    }

    /// Returns `self` if it validates, otherwise the report as an error.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.is_ok() {
            Ok(self)
        } else {
            Err(Error::InvalidParams(report))
        }
    }
}

impl fmt::Display for SystemParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={}, γ_L={}, γ_R={}, g={}, κ_wg={}, κ_sc={}, ξ={}",
            self.n_atoms, self.gamma_l, self.gamma_r, self.g, self.kappa_wg, self.kappa_sc, self.xi
        )
    }
}

fn reduce_phase(xi: f64) -> f64 {
    let r = xi.rem_euclid(TAU);
    // rem_euclid may round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotFinite(&'static str),
    Negative(&'static str),
    NonPositive(&'static str),
    Normalization { sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotFinite(name) => write!(f, "{name} is not finite"),
            Violation::Negative(name) => write!(f, "{name} < 0"),
            Violation::NonPositive(name) => write!(f, "{name} ≤ 0"),
            Violation::Normalization { sum } => {
                write!(f, "gamma_L+gamma_R ≠ 1 (sum = {sum})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Probe settings: detunings δ = ω − ω_a and δ_c = ω − ω_c, input amplitude.
///
/// The cavity detuning follows δ unless explicitly decoupled with
/// [`with_cavity_detuning`](Self::with_cavity_detuning).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveParams {
    delta: f64,
    delta_c: f64,
    locked: bool,
    a_in: Complex64,
}

impl DriveParams {
    pub fn new(delta: f64) -> Self {
        DriveParams {
            delta,
            delta_c: delta,
            locked: true,
            a_in: Complex64::new(1.0, 0.0),
        }
    }

    /// Decouples the cavity detuning from the probe detuning.
    pub fn with_cavity_detuning(mut self, delta_c: f64) -> Self {
        self.delta_c = delta_c;
        self.locked = false;
        self
    }

    pub fn with_input(mut self, a_in: Complex64) -> Self {
        self.a_in = a_in;
        self
    }

    /// Moves the probe; a locked cavity detuning moves with it.
    pub fn at_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        if self.locked {
            self.delta_c = delta;
        }
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn delta_c(&self) -> f64 {
        self.delta_c
    }
    pub fn is_locked(&self) -> bool {
        self.locked
    }
    pub fn a_in(&self) -> Complex64 {
        self.a_in
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn moderate(n: usize) -> SystemParams {
        SystemParams::new(n, 0.5, 20.0, 100.0, 300.0, PI)
    }

    #[test]
    fn moderate_coupling_set_validates() {
        assert!(moderate(2).validate().is_ok());
    }

    #[test]
    fn unnormalized_rates_are_reported() {
        let p = moderate(2).with_decay_rates(0.7, 0.5);
        let report = p.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("gamma_L+gamma_R ≠ 1"));
        assert!(matches!(p.validated(), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn empty_cavity_is_legal() {
        assert!(moderate(0).with_g(7.0).validate().is_ok());
    }

    #[test]
    fn bad_cavity_rates_are_reported() {
        let report = moderate(1).with_cavity(0.0, -1.0).validate();
        assert_eq!(
            report.violations,
            vec![Violation::NonPositive("kappa_wg"), Violation::Negative("kappa_sc")]
        );
        assert!(!moderate(1).with_g(f64::NAN).validate().is_ok());
    }

    #[test]
    fn cooperativity_values() {
        assert_eq!(moderate(2).cooperativity().unwrap(), 4.0);
        let strong = moderate(2).with_g(50.0);
        assert_eq!(strong.cooperativity().unwrap(), 25.0);
        assert_eq!(moderate(2).with_g(0.0).cooperativity().unwrap(), 0.0);
        assert!(matches!(
            moderate(2).with_cavity(0.0, 0.0).cooperativity(),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn xi_is_reduced() {
        let p = moderate(2).with_xi(-PI / 2.0);
        assert!((p.xi() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(moderate(2).with_xi(TAU).xi(), 0.0);
        assert_eq!(moderate(2).with_xi(-1e-300).xi(), 0.0);
    }

    #[test]
    fn drive_lock() {
        let d = DriveParams::new(0.3);
        assert_eq!(d.delta_c(), 0.3);
        assert_eq!(d.at_delta(-1.0).delta_c(), -1.0);
        let free = d.with_cavity_detuning(2.0).at_delta(-1.0);
        assert!(!free.is_locked());
        assert_eq!(free.delta_c(), 2.0);
    }

    proptest::proptest! {
        #[test]
        fn cooperativity_scales_quadratically(g in 0.0f64..100.0, s in 0.0f64..10.0) {
            let p = moderate(1).with_g(g);
            let c = p.cooperativity().unwrap();
            let cs = p.with_g(g * s).cooperativity().unwrap();
            proptest::prop_assert!((cs - s * s * c).abs() <= 1e-12 * (1.0 + cs));
        }
    }
}
