//! Time-domain relaxation of the equations of motion, used as an
//! independent check on the linear steady-state solve.
//!
//! The derivative is evaluated from the equations of motion with explicit
//! left- and right-moving guided fields (suffix/prefix sums over the chain),
//! never from the assembled steady-state matrix. Integration is classical
//! fixed-step RK4 from zero amplitudes. Because the system is linear with a
//! constant drive, one RK4 step is an affine map `x ↦ A x + c`; the map is
//! extracted once and then composed with itself, so after k compositions the
//! state is exactly the RK4 iterate at t = 2^k·dt. This reaches the long
//! times needed by weakly damped subradiant modes in a few dozen matrix
//! products.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};
use crate::solver::{chain_sites, site_phase, SteadyState, GAMMA};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxOptions {
    /// Step size; `None` picks 1e-3 / max(κ, γ, g, |δ|, |δ_c|).
    pub dt: Option<f64>,
    /// Convergence threshold on ‖x(2t) − x(t)‖₂.
    pub tol: f64,
    /// Give up once the integrated time exceeds this (units of 1/γ).
    pub t_max: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            dt: None,
            tol: 1e-9,
            t_max: 1e12,
        }
    }
}

/// Right-hand side of the weak-excitation equations of motion.
struct EquationsOfMotion {
    delta: f64,
    delta_c: f64,
    kappa: f64,
    drive: Complex64,
    g: f64,
    gamma_l: f64,
    gamma_r: f64,
    /// e^{ik_s x_μ} per atom.
    phases: Vec<Complex64>,
}

impl EquationsOfMotion {
    fn new(params: &SystemParams, drive: &DriveParams, sites: &[usize]) -> Self {
        EquationsOfMotion {
            delta: drive.delta(),
            delta_c: drive.delta_c(),
            kappa: params.kappa(),
            drive: params.kappa_wg().sqrt() * drive.a_in(),
            g: params.g(),
            gamma_l: params.gamma_l(),
            gamma_r: params.gamma_r(),
            phases: sites.iter().map(|&s| site_phase(params.xi(), s)).collect(),
        }
    }

    fn dim(&self) -> usize {
        self.phases.len() + 1
    }

    fn derivative(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.phases.len();
        let a = x[0];
        let sigma = &x[1..];

        let cavity_source: Complex64 = sigma
            .iter()
            .zip(&self.phases)
            .map(|(s, p)| p.conj() * s)
            .sum();
        out[0] = (I * self.delta_c - self.kappa / 2.0) * a - I * self.g * cavity_source + self.drive;

        // left-movers reaching atom μ were emitted by atoms ν > μ
        let mut left = vec![Complex64::new(0.0, 0.0); n];
        let mut acc = Complex64::new(0.0, 0.0);
        for mu in (0..n).rev() {
            left[mu] = self.phases[mu].conj() * acc;
            acc += self.phases[mu] * sigma[mu];
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for mu in 0..n {
            let right = self.phases[mu] * acc;
            acc += self.phases[mu].conj() * sigma[mu];
            out[mu + 1] = (I * self.delta - GAMMA / 2.0) * sigma[mu]
                - self.gamma_l * left[mu]
                - self.gamma_r * right
                - I * self.g * self.phases[mu] * a;
        }
    }

    fn rk4_step(&self, x: &[Complex64], h: f64) -> Vec<Complex64> {
        let dim = x.len();
        let mut k1 = vec![Complex64::new(0.0, 0.0); dim];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let shifted = |k: &[Complex64], scale: f64| -> Vec<Complex64> {
            x.iter().zip(k).map(|(xi, ki)| xi + ki * scale).collect()
        };
        self.derivative(x, &mut k1);
        self.derivative(&shifted(&k1, h / 2.0), &mut k2);
        self.derivative(&shifted(&k2, h / 2.0), &mut k3);
        self.derivative(&shifted(&k3, h), &mut k4);
        (0..dim)
            .map(|i| x[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
            .collect()
    }
}

fn default_dt(params: &SystemParams, drive: &DriveParams) -> f64 {
    let fastest = [
        params.kappa(),
        GAMMA,
        params.g(),
        drive.delta().abs(),
        drive.delta_c().abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    1e-3 / fastest
}

/// Plain RK4 trajectory: state after `steps` steps of size `dt` from zero.
pub fn integrate(params: &SystemParams, drive: &DriveParams, dt: f64, steps: usize) -> Vec<Complex64> {
    let eom = EquationsOfMotion::new(params, drive, &chain_sites(params.n_atoms()));
    let mut x = vec![Complex64::new(0.0, 0.0); eom.dim()];
    for _ in 0..steps {
        x = eom.rk4_step(&x, dt);
    }
    x
}

/// One RK4 step written as `x ↦ A x + c`, probed column by column.
fn affine_step(eom: &EquationsOfMotion, h: f64) -> (DMatrix<Complex64>, Vec<Complex64>) {
    let dim = eom.dim();
    let zero = vec![Complex64::new(0.0, 0.0); dim];
    let offset = eom.rk4_step(&zero, h);
    let mut propagator = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..dim {
        let mut unit = zero.clone();
        unit[j] = Complex64::new(1.0, 0.0);
        let image = eom.rk4_step(&unit, h);
        for i in 0..dim {
            propagator[(i, j)] = image[i] - offset[i];
        }
    }
    (propagator, offset)
}

pub fn relax_time_domain(params: &SystemParams, drive: &DriveParams, opts: &RelaxOptions) -> Result<SteadyState> {
    relax_time_domain_at_sites(params, drive, &chain_sites(params.n_atoms()), opts)
}

pub fn relax_time_domain_at_sites(
    params: &SystemParams,
    drive: &DriveParams,
    sites: &[usize],
    opts: &RelaxOptions,
) -> Result<SteadyState> {
    let eom = EquationsOfMotion::new(params, drive, sites);
    let h = opts.dt.unwrap_or_else(|| default_dt(params, drive));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("relaxation step must be positive, got {h}")));
    }

    let (mut propagator, offset) = affine_step(&eom, h);

    let mut state = DVector::from_vec(offset);
    let mut t = h;
    let mut quiet = 0;
    let mut change = f64::INFINITY;
    while t <= opts.t_max {
        let next = &propagator * &state + &state;
        change = (&next - &state).norm();
        state = next;
        propagator = &propagator * &propagator;
        t *= 2.0;
        if !change.is_finite() {
            break;
        }
        if change < opts.tol {
            quiet += 1;
            if quiet == 2 {
                let sigma = state.iter().skip(1).copied().collect();
                return SteadyState::from_amplitudes(state[0], sigma, params.kappa_wg(), drive.a_in());
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NotConverged { t, residual: change })
}
