//! Detuning sweeps, on-resonance (ξ, γ_L) maps and spectral features.

mod features;
pub mod figures;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::r_no_atoms;
use crate::error::{Error, Result};
use crate::params::{DriveParams, SystemParams};
use crate::solver::reflectivity;

pub use features::{find_features, golden_section_min, Feature, FeatureKind};

/// Default detuning window for dip work, in units of γ.
pub const DIP_WINDOW: (f64, f64) = (-3.0, 3.0);
pub const DIP_GRID_POINTS: usize = 4001;
/// Smallest prominence (in R) that counts as a feature.
pub const DEFAULT_PROMINENCE: f64 = 1e-3;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let span = hi - lo;
            let last = (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + span * i as f64 / last })
                .collect()
        }
    }
}

/// Reflectivity sampled on an increasing detuning grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub params: SystemParams,
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub features: Vec<Feature>,
}

impl Spectrum {
    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// Fills `features` from [`find_features`].
    pub fn with_features(mut self, prominence_min: f64) -> Result<Self> {
        self.features = find_features(&self, prominence_min)?;
        Ok(self)
    }

    pub fn dips(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(|f| f.kind == FeatureKind::Dip)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn sweep_delta(params: &SystemParams, delta_min: f64, delta_max: f64, n_points: usize) -> Result<Spectrum> {
    if n_points < 2 {
        return Err(Error::Domain(format!("a sweep needs at least 2 points, got {n_points}")));
    }
    if !(delta_min < delta_max) {
        return Err(Error::Domain(format!(
            "sweep window [{delta_min}, {delta_max}] is empty"
        )));
    }
    sweep_grid(params, linspace(delta_min, delta_max, n_points))
}

/// Evaluates R on an arbitrary strictly increasing grid.
pub fn sweep_grid(params: &SystemParams, deltas: Vec<f64>) -> Result<Spectrum> {
    let params = params.validated()?;
    if !deltas.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Domain("detuning grid must be strictly increasing".into()));
    }
    let evaluated: Vec<Result<f64>> = deltas
        .par_iter()
        .map(|&delta| reflectivity(&params, &DriveParams::new(delta)))
        .collect();
    let mut values = Vec::with_capacity(deltas.len());
    for (index, (value, &delta)) in evaluated.into_iter().zip(&deltas).enumerate() {
        values.push(value.map_err(|e| Error::AtGridPoint {
            index,
            delta,
            source: Box::new(e),
        })?);
    }
    Ok(Spectrum {
        params,
        deltas,
        values,
        features: Vec::new(),
    })
}

/// On-resonance reflectivity over a (ξ, γ_L) grid; `values[i][j]` belongs to
/// `xi_grid[i]`, `gamma_l_grid[j]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Map2D {
    pub params: SystemParams,
    pub xi_grid: Vec<f64>,
    pub gamma_l_grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Map2D {
    /// (ξ, γ_L, R) of the largest entry; the first one wins ties.
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (f64::NAN, f64::NAN, f64::NEG_INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.2 {
                    best = (self.xi_grid[i], self.gamma_l_grid[j], v);
                }
            }
        }
        best
    }
}

pub fn sweep_2d(template: &SystemParams, xi_grid: &[f64], gamma_l_grid: &[f64]) -> Result<Map2D> {
    if xi_grid.is_empty() || gamma_l_grid.is_empty() {
        return Err(Error::Domain("map grids must be nonempty".into()));
    }
    let cells: Vec<(f64, f64)> = xi_grid
        .iter()
        .flat_map(|&xi| gamma_l_grid.iter().map(move |&gl| (xi, gl)))
        .collect();
    let evaluated: Vec<Result<f64>> = cells
        .par_iter()
        .map(|&(xi, gamma_l)| {
            let p = template.with_xi(xi).with_gamma_l(gamma_l).validated()?;
            reflectivity(&p, &DriveParams::new(0.0))
        })
        .collect();
    let mut flat = Vec::with_capacity(cells.len());
    for (value, &(xi, gamma_l)) in evaluated.into_iter().zip(&cells) {
        flat.push(value.map_err(|e| Error::AtMapCell {
            xi,
            gamma_l,
            source: Box::new(e),
        })?);
    }
    let values = flat.chunks(gamma_l_grid.len()).map(<[f64]>::to_vec).collect();
    Ok(Map2D {
        params: *template,
        xi_grid: xi_grid.to_vec(),
        gamma_l_grid: gamma_l_grid.to_vec(),
        values,
    })
}

/// Refined dip detunings for a chain of `n_coupled` atoms sharing the other
/// parameters of `params`, on the default dip grid.
pub fn dip_detunings(params: &SystemParams, n_coupled: usize) -> Result<Vec<f64>> {
    if n_coupled < 2 {
        return Err(Error::Domain(format!(
            "dips need at least 2 coupled atoms, got {n_coupled}"
        )));
    }
    let p = params.with_n_atoms(n_coupled);
    let spectrum = sweep_delta(&p, DIP_WINDOW.0, DIP_WINDOW.1, DIP_GRID_POINTS)?
        .with_features(DEFAULT_PROMINENCE)?;
    let dips: Vec<f64> = spectrum.dips().map(|f| f.delta).collect();
    if dips.is_empty() {
        return Err(Error::NoDipFound { n_coupled });
    }
    Ok(dips)
}

/// Full width at half maximum of the atom-induced excess reflectivity
/// R(δ) − R_cavity(δ), measured between the outermost half-height crossings.
///
/// The window scales with the single-atom linewidth γ(1 + C).
pub fn overall_width(params: &SystemParams) -> Result<f64> {
    let params = params.validated()?;
    let half_window = 20.0 * (1.0 + params.cooperativity()?);
    let excess = |delta: f64| -> Result<f64> {
        let bare = r_no_atoms(delta, params.kappa_wg(), params.kappa_sc()).norm_sqr();
        Ok(reflectivity(&params, &DriveParams::new(delta))? - bare)
    };
    let spectrum = sweep_delta(&params, -half_window, half_window, 20001)?;
    let grid = &spectrum.deltas;
    let values: Vec<f64> = grid
        .iter()
        .zip(&spectrum.values)
        .map(|(&d, &r)| r - r_no_atoms(d, params.kappa_wg(), params.kappa_sc()).norm_sqr())
        .collect();
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::Domain("no atom-induced reflectivity to measure".into()));
    }
    let half = peak / 2.0;
    let first = values.iter().position(|&v| v >= half).unwrap_or(0);
    let last = values.iter().rposition(|&v| v >= half).unwrap_or(grid.len() - 1);
    if first == 0 || last == grid.len() - 1 {
        return Err(Error::Domain("half-maximum crossing lies outside the sweep window".into()));
    }
    let level = |d: f64| excess(d).map(|v| v - half);
    let left = features::bisect_crossing(&level, grid[first - 1], grid[first])?;
    let right = features::bisect_crossing(&level, grid[last], grid[last + 1])?;
    Ok(right - left)
}
