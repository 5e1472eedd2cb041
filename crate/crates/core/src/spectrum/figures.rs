//! Parameter sets and grids for the standard reflectivity figures.
//!
//! | id       | content                                                        |
//! |----------|----------------------------------------------------------------|
//! | `fig2`   | on-resonance R over ξ ∈ [0, 2π], γ_L ∈ [0, 1], C = 4           |
//! | `fig3`   | N = 2 spectra at C = 25, 4, 1 with single-atom, empty-cavity and γ_L = 0.8 comparisons |
//! | `fig3_2` | N = 2 spectra at γ_L = 1 for ξ away from nπ and (n + ½)π        |
//! | `fig4`   | N = 3…6 spectra at γ_L = 1, ξ = 0, C = 4                        |

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{linspace, sweep_2d, sweep_delta, Map2D, Spectrum, DEFAULT_PROMINENCE};
use crate::error::{Error, Result};
use crate::params::SystemParams;

pub const KAPPA_WG: f64 = 100.0;
pub const KAPPA_SC: f64 = 300.0;
/// g = 20γ with κ = 400γ gives C = 4.
pub const G_C4: f64 = 20.0;
/// Display scale quoted for rubidium, 2π × 6 MHz.
pub const GAMMA_MHZ: f64 = TAU * 6.0;

/// The C = 4 reference system with `n` atoms, γ_L = 1 and ξ = 0.
pub fn reference_system(n: usize) -> SystemParams {
    SystemParams::new(n, 1.0, G_C4, KAPPA_WG, KAPPA_SC, 0.0).with_gamma_mhz(Some(GAMMA_MHZ))
}

pub const FIG2_XI_POINTS: usize = 161;
/// Even count so that γ_L = ½ is not sampled: at (ξ = nπ, γ_L = ½, δ = 0) the
/// pair has an undamped dark state and the steady state is not unique.
pub const FIG2_GAMMA_L_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig3_2,
    Fig4,
}

impl FigureId {
    pub const ALL: [FigureId; 4] = [FigureId::Fig2, FigureId::Fig3, FigureId::Fig3_2, FigureId::Fig4];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig3_2 => "fig3_2",
            FigureId::Fig4 => "fig4",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownFigure(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CurveData {
    Spectrum(Spectrum),
    Map(Map2D),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureCurve {
    /// File-name stem, unique within a figure.
    pub name: String,
    pub label: String,
    pub params: SystemParams,
    pub data: CurveData,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureData {
    pub id: FigureId,
    pub description: &'static str,
    pub curves: Vec<FigureCurve>,
}

fn spectrum_curve(name: &str, label: String, params: SystemParams, window: f64, points: usize) -> Result<FigureCurve> {
    let spectrum = sweep_delta(&params, -window, window, points)?.with_features(DEFAULT_PROMINENCE)?;
    Ok(FigureCurve {
        name: name.to_string(),
        label,
        params,
        data: CurveData::Spectrum(spectrum),
        notes: Vec::new(),
    })
}

pub fn figure_data(id: FigureId) -> Result<FigureData> {
    match id {
        FigureId::Fig2 => {
            let params = reference_system(2);
            let map = sweep_2d(
                &params,
                &linspace(0.0, TAU, FIG2_XI_POINTS),
                &linspace(0.0, 1.0, FIG2_GAMMA_L_POINTS),
            )?;
            Ok(FigureData {
                id,
                description: "on-resonance reflectivity over (xi, gamma_L), N=2, (kappa_wg, kappa_sc, g)=(100,300,20), C=4",
                curves: vec![FigureCurve {
                    name: "fig2_map".into(),
                    label: "R(delta=0) over xi and gamma_L".into(),
                    params,
                    data: CurveData::Map(map),
                    notes: vec!["gamma_L grid has an even point count and skips gamma_L=0.5, where xi=n*pi is an undamped dark-state point".into()],
                }],
            })
        }
        FigureId::Fig3 => {
            let base = reference_system(2);
            let window = 15.0;
            let points = 6001;
            let curves = vec![
                spectrum_curve("fig3_n2_g50", "N=2, (kappa,g)=(400,50), C=25".into(), base.with_g(50.0), window, points)?,
                spectrum_curve("fig3_n2_g20", "N=2, (kappa,g)=(400,20), C=4".into(), base, window, points)?,
                spectrum_curve("fig3_n2_g10", "N=2, (kappa,g)=(400,10), C=1".into(), base.with_g(10.0), window, points)?,
                spectrum_curve("fig3_n1_g20", "single atom, (kappa,g)=(400,20)".into(), base.with_n_atoms(1), window, points)?,
                spectrum_curve(
                    "fig3_n0",
                    "no atoms, (kappa,g)=(400,0)".into(),
                    base.with_n_atoms(0).with_g(0.0),
                    window,
                    points,
                )?,
                spectrum_curve(
                    "fig3_n2_gl08",
                    "N=2, gamma_L=0.8, (kappa,g)=(400,20)".into(),
                    base.with_gamma_l(0.8),
                    window,
                    points,
                )?,
            ];
            Ok(FigureData {
                id,
                description: "reflectivity spectra at gamma_L=1, xi=0, kappa_sc=3*kappa_wg",
                curves,
            })
        }
        FigureId::Fig3_2 => {
            let base = reference_system(2);
            let mut curves = Vec::new();
            for eighths in [1, 2, 3, 5, 6, 7] {
                let xi = eighths as f64 * PI / 8.0;
                let mut curve = spectrum_curve(
                    &format!("fig3_2_xi{eighths}pi8"),
                    format!("N=2, gamma_L=1, xi={eighths}pi/8"),
                    base.with_xi(xi),
                    5.0,
                    4001,
                )?;
                curve
                    .notes
                    .push("xi values are representative choices away from n*pi and (n+1/2)*pi".into());
                curves.push(curve);
            }
            Ok(FigureData {
                id,
                description: "asymmetric spectra for xi away from n*pi and (n+1/2)*pi, gamma_L=1, C=4",
                curves,
            })
        }
        FigureId::Fig4 => {
            let curves = (3..=6)
                .map(|n| {
                    spectrum_curve(
                        &format!("fig4_n{n}"),
                        format!("N={n}, gamma_L=1, xi=0, C=4"),
                        reference_system(n),
                        3.0,
                        4001,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FigureData {
                id,
                description: "multiple dips for N=3..6 at gamma_L=1, xi=0, C=4",
                curves,
            })
        }
    }
}

pub fn figure_data_by_name(name: &str) -> Result<FigureData> {
    figure_data(name.parse()?)
}
