use thiserror::Error;

use crate::params::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(ValidationReport),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular steady-state system (condition estimate {condition:.3e}) at {context}")]
    Singular { condition: f64, context: String },

    #[error("pole in closed form: {0} vanishes")]
    Pole(&'static str),

    #[error("time-domain relaxation did not converge by t = {t:.3e}/γ (last change {residual:.3e})")]
    NotConverged { t: f64, residual: f64 },

    #[error("spectrum is empty")]
    EmptySpectrum,

    #[error("no reflectivity dip found for {n_coupled} coupled atoms")]
    NoDipFound { n_coupled: usize },

    #[error("protocol extinguished: herald probability {probability:.3e} at measurement {measurement}")]
    ProtocolExtinguished { probability: f64, measurement: usize },

    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid register: {0}")]
    InvalidRegister(String),

    #[error("unknown figure id `{0}` (expected fig2, fig3, fig3_2 or fig4)")]
    UnknownFigure(String),

    #[error("map cell ξ = {xi}, γ_L = {gamma_l}: {source}")]
    AtMapCell {
        xi: f64,
        gamma_l: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("grid point {index} (δ = {delta}): {source}")]
    AtGridPoint {
        index: usize,
        delta: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerical core (singular system, pole,
    /// non-convergence), as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Singular { .. } | Error::Pole(_) | Error::NotConverged { .. } => true,
            Error::AtGridPoint { source, .. } | Error::AtMapCell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub fn is_extinguished(&self) -> bool {
        match self {
            Error::ProtocolExtinguished { .. } => true,
            Error::AtGridPoint { source, .. } | Error::AtMapCell { source, .. } => {
                source.is_extinguished()
            }
            _ => false,
        }
    }
}
