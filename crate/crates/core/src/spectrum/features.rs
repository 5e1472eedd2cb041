use serde::Serialize;

use super::Spectrum;
use crate::error::{Error, Result};
use crate::params::DriveParams;
use crate::solver::reflectivity;

/// Location tolerance of the golden-section refinement, units of γ.
pub const LOCATION_TOL: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Dip,
    Peak,
}

impl FeatureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Dip => "dip",
            FeatureKind::Peak => "peak",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feature {
    pub kind: FeatureKind,
    pub delta: f64,
    pub value: f64,
    pub prominence: f64,
    /// Full width at half prominence.
    pub width: f64,
}

/// Minimizes `f` on `[a, b]` by golden-section search until the bracket is
/// shorter than `tol`. Returns the best abscissa and its value.
pub fn golden_section_min<F>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Root of `f` between `a` and `b`, which must straddle a sign change.
pub(crate) fn bisect_crossing<F>(f: &F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (a, b);
    let mut f_lo = f(lo)?;
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-12 * (1.0 + lo.abs()) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if (f_mid >= 0.0) == (f_lo >= 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Height of an extremum above (dip) or below (peak) the lower of the two
/// surrounding reference levels, scanning outwards until the curve passes
/// the extremum again or the grid ends.
fn prominence(values: &[f64], i: usize, extremum: f64, kind: FeatureKind) -> f64 {
    // work on a curve where the feature is always a dip
    let s = match kind {
        FeatureKind::Dip => 1.0,
        FeatureKind::Peak => -1.0,
    };
    let v = |j: usize| s * values[j];
    let e = s * extremum;
    let mut left = e;
    for j in (0..i).rev() {
        if v(j) < e {
            break;
        }
        left = left.max(v(j));
    }
    let mut right = e;
    for j in i + 1..values.len() {
        if v(j) < e {
            break;
        }
        right = right.max(v(j));
    }
    left.min(right) - e
}

/// Locates dips and peaks of a sampled spectrum.
///
/// Grid extrema are refined by golden-section search on the continuous
/// reflectivity, kept if their prominence reaches `prominence_min`, and
/// measured at half prominence. Results are sorted by detuning.
pub fn find_features(spec: &Spectrum, prominence_min: f64) -> Result<Vec<Feature>> {
    if spec.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    let xs = &spec.deltas;
    let vs = &spec.values;
    let curve = |delta: f64| reflectivity(&spec.params, &DriveParams::new(delta));

    let mut found = Vec::new();
    for i in 1..xs.len().saturating_sub(1) {
        let kind = if vs[i] < vs[i - 1] && vs[i] <= vs[i + 1] {
            FeatureKind::Dip
        } else if vs[i] > vs[i - 1] && vs[i] >= vs[i + 1] {
            FeatureKind::Peak
        } else {
            continue;
        };
        // refinement can only deepen a feature, so grid prominence is a lower
        // bound up to the refinement gain; skip obvious ripple cheaply
        if prominence(vs, i, vs[i], kind) < 0.5 * prominence_min {
            continue;
        }
        let sign = match kind {
            FeatureKind::Dip => 1.0,
            FeatureKind::Peak => -1.0,
        };
        let (delta, signed) =
            golden_section_min(|d| curve(d).map(|r| sign * r), xs[i - 1], xs[i + 1], LOCATION_TOL)?;
        let mut value = sign * signed;
        let mut delta = delta;
        if sign * vs[i] < signed {
            // the grid point itself is better than the refined bracket interior
            delta = xs[i];
            value = vs[i];
        }
        let prom = prominence(vs, i, value, kind);
        if prom < prominence_min {
            continue;
        }
        let level = value + sign * prom / 2.0;
        let above = |d: f64| curve(d).map(|r| sign * (r - level));

        let left = match (0..i).rev().find(|&j| sign * (vs[j] - level) >= 0.0) {
            Some(j) => {
                let inner = if j + 1 < i { xs[j + 1] } else { delta.max(xs[j]) };
                bisect_crossing(&above, xs[j], inner)?
            }
            None => xs[0],
        };
        let right = match (i + 1..xs.len()).find(|&j| sign * (vs[j] - level) >= 0.0) {
            Some(j) => {
                let inner = if j > i + 1 { xs[j - 1] } else { delta.min(xs[j]) };
                bisect_crossing(&above, inner, xs[j])?
            }
            None => xs[xs.len() - 1],
        };
        found.push(Feature {
            kind,
            delta,
            value,
            prominence: prom,
            width: right - left,
        });
    }
    found.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    Ok(found)
}
