//! Weak-excitation steady state of the cavity mode and atomic dipoles.
//!
//! Unknowns are ordered (a, σ_1, …, σ_N) with atoms by ascending position.
//! Setting the time derivatives of the input–output equations of motion to
//! zero gives the dense linear system `M x = rhs` with
//!
//! ```text
//! M[0][0]   = iδ_c − κ/2
//! M[μ][μ]   = iδ − γ/2
//! M[0][μ]   = −ig e^{−ik_s x_μ}          M[μ][0] = −ig e^{+ik_s x_μ}
//! M[μ][ν]   = −γ_L e^{ik_s(x_ν − x_μ)}   (ν > μ, left-moving photons)
//! M[μ][ν]   = −γ_R e^{ik_s(x_μ − x_ν)}   (ν < μ, right-moving photons)
//! rhs       = (−√κ_wg a_in, 0, …, 0)
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};

/// Total single-atom decay rate; every other rate is measured against it.
pub const GAMMA: f64 = 1.0;

/// 1-norm condition estimate above which the system is treated as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    /// (N+1)×(N+1); index 0 is the cavity mode.
    pub matrix: DMatrix<Complex64>,
    pub rhs: DVector<Complex64>,
}

impl LinearSystem {
    pub fn n_atoms(&self) -> usize {
        self.rhs.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub a: Complex64,
    pub sigma: Vec<Complex64>,
    /// Reflection amplitude r = √κ_wg a / a_in − 1.
    pub r: Complex64,
    /// R = |r|².
    pub reflectivity: f64,
}

impl SteadyState {
    /// Derives r and R from the intracavity amplitude.
    pub fn from_amplitudes(a: Complex64, sigma: Vec<Complex64>, kappa_wg: f64, a_in: Complex64) -> Result<Self> {
        if a_in == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("reflection amplitude needs a_in ≠ 0".into()));
        }
        let r = kappa_wg.sqrt() * a / a_in - 1.0;
        Ok(SteadyState {
            a,
            sigma,
            r,
            reflectivity: r.norm_sqr(),
        })
    }
}

/// e^{i ξ·site}: guided-mode phase of lattice site `site` relative to site 0.
pub fn site_phase(xi: f64, site: usize) -> Complex64 {
    Complex64::from_polar(1.0, xi * site as f64)
}

/// Lattice sites 0..N for the atoms of `params`.
pub fn chain_sites(n: usize) -> Vec<usize> {
    (0..n).collect()
}

pub fn build_linear_system(params: &SystemParams, drive: &DriveParams) -> LinearSystem {
    build_linear_system_at_sites(params, drive, &chain_sites(params.n_atoms()))
}

/// Builds the system for atoms occupying the given lattice sites, ignoring
/// `params.n_atoms()`. Sites must be strictly increasing.
pub fn build_linear_system_at_sites(
    params: &SystemParams,
    drive: &DriveParams,
    sites: &[usize],
) -> LinearSystem {
    assert!(
        sites.windows(2).all(|w| w[0] < w[1]),
        "atom sites must be strictly increasing: {sites:?}"
    );
    let n = sites.len();
    let dim = n + 1;
    let xi = params.xi();
    let g = params.g();
    let atom_diag = I * drive.delta() - GAMMA / 2.0;

    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    m[(0, 0)] = I * drive.delta_c() - params.kappa() / 2.0;
    for (mu, &site_mu) in sites.iter().enumerate() {
        let phase = site_phase(xi, site_mu);
        m[(0, mu + 1)] = -I * g * phase.conj();
        m[(mu + 1, 0)] = -I * g * phase;
        m[(mu + 1, mu + 1)] = atom_diag;
        for (nu, &site_nu) in sites.iter().enumerate() {
            if nu > mu {
                m[(mu + 1, nu + 1)] = -params.gamma_l() * site_phase(xi, site_nu - site_mu);
            } else if nu < mu {
                m[(mu + 1, nu + 1)] = -params.gamma_r() * site_phase(xi, site_mu - site_nu);
            }
        }
    }

    let mut rhs = DVector::<Complex64>::zeros(dim);
    rhs[0] = -params.kappa_wg().sqrt() * drive.a_in();
    LinearSystem { matrix: m, rhs }
}

fn norm_1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves the system by LU with partial pivoting.
pub fn solve_steady_state(sys: &LinearSystem, params: &SystemParams, drive: &DriveParams) -> Result<SteadyState> {
    let singular = |condition: f64| Error::Singular {
        condition,
        context: format!("{params}, δ={}, δ_c={}", drive.delta(), drive.delta_c()),
    };
    let lu = sys.matrix.clone().lu();
    let inverse = lu.try_inverse().ok_or_else(|| singular(f64::INFINITY))?;
    let condition = norm_1(&sys.matrix) * norm_1(&inverse);
    if !(condition <= CONDITION_LIMIT) {
        return Err(singular(condition));
    }
    let x = lu.solve(&sys.rhs).ok_or_else(|| singular(f64::INFINITY))?;
    let sigma = x.iter().skip(1).copied().collect();
    SteadyState::from_amplitudes(x[0], sigma, params.kappa_wg(), drive.a_in())
}

pub fn steady_state(params: &SystemParams, drive: &DriveParams) -> Result<SteadyState> {
    solve_steady_state(&build_linear_system(params, drive), params, drive)
}

pub fn steady_state_at_sites(params: &SystemParams, drive: &DriveParams, sites: &[usize]) -> Result<SteadyState> {
    solve_steady_state(&build_linear_system_at_sites(params, drive, sites), params, drive)
}

pub fn reflection_amplitude(params: &SystemParams, drive: &DriveParams) -> Result<Complex64> {
    steady_state(params, drive).map(|s| s.r)
}

/// R = |r|² for the chain of `params.n_atoms()` atoms.
pub fn reflectivity(params: &SystemParams, drive: &DriveParams) -> Result<f64> {
    steady_state(params, drive).map(|s| s.reflectivity)
}
