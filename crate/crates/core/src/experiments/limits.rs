use serde::Serialize;

use super::scan::ScanResult;
use crate::classical::{classify_integrability, mu_average, Integrability, LiouvilleOptions};
use crate::microlocal::Observable;
use crate::model::SymbolModel;
use crate::util::least_squares;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Normalized Liouville average on the critical level.
    Liouville,
    /// Point mass at the critical point.
    Dirac,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Target {
    pub kind: TargetKind,
    pub value: f64,
}

/// `mu(a)` on `{p = e_c}`, refused when a critical point makes the measure divergent.
pub fn liouville_target(model: &SymbolModel, a: &Observable, e_c: f64) -> Result<Target> {
    for cp in model.critical_points_at(e_c) {
        if cp.kind != crate::model::CriticalKind::Min && classify_integrability(cp, model) != Integrability::Integrable {
            return Err(Error::Hypothesis(format!(
                "Liouville target rejected: the measure diverges at the critical point ({}, {})",
                cp.x0, cp.xi0
            )));
        }
    }
    let opts = LiouvilleOptions { allow_critical: true, ..LiouvilleOptions::default() };
    Ok(Target { kind: TargetKind::Liouville, value: mu_average(model, a, e_c, &opts)? })
}

/// `a(z_0)` for the unique critical point on the level.
pub fn dirac_target(model: &SymbolModel, a: &Observable, e_c: f64) -> Result<Target> {
    match model.critical_points_at(e_c).as_slice() {
        [cp] => Ok(Target { kind: TargetKind::Dirac, value: a.eval(cp.x0, cp.xi0) }),
        [] => Err(Error::Hypothesis(format!("no critical point at energy {e_c}"))),
        many => Err(Error::config(format!("{} critical points at energy {e_c}; the point-mass target is ambiguous", many.len()))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioPoint {
    pub h: f64,
    pub ratio: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub observable: String,
    pub target: Target,
    pub points: Vec<RatioPoint>,
    pub gap_at_hmin: f64,
    /// `gamma` in `|ratio - target| ~ c h^gamma`.
    pub trend_exponent: Option<f64>,
    /// The gap shrinks as `h` decreases.
    pub converging: bool,
}

/// Compare `Upsilon_a / Upsilon` for observable `index` against `target`.
pub fn ratio_limit(scan: &ScanResult, index: usize, target: Target) -> Result<RatioReport> {
    let label = scan
        .observables
        .get(index)
        .ok_or_else(|| Error::config(format!("scan has no observable #{index}")))?;
    ratio_limit_points(label, &scan.ratios(index), target)
}

/// Ratio limit from `(h, ratio)` pairs, e.g. read back from a scan table.
pub fn ratio_limit_points(label: &str, ratios: &[(f64, f64)], target: Target) -> Result<RatioReport> {
    let mut points: Vec<RatioPoint> = ratios
        .iter()
        .filter(|(_, r)| r.is_finite())
        .map(|&(h, ratio)| RatioPoint { h, ratio, gap: (ratio - target.value).abs() })
        .collect();
    points.sort_by(|a, b| b.h.total_cmp(&a.h));
    let last = points.last().ok_or_else(|| Error::numerical("no usable rows for the ratio limit"))?;
    let gap_at_hmin = last.gap;
    let usable: Vec<&RatioPoint> = points.iter().filter(|p| p.gap > 0.0).collect();
    let trend_exponent = if usable.len() >= 2 {
        let design: Vec<Vec<f64>> = usable.iter().map(|p| vec![1.0, p.h.ln()]).collect();
        let y: Vec<f64> = usable.iter().map(|p| p.gap.ln()).collect();
        least_squares(&design, &y).map(|c| c[1])
    } else {
        None
    };
    let converging = trend_exponent.is_some_and(|g| g > 0.0) || (usable.len() < 2 && gap_at_hmin == 0.0);
    Ok(RatioReport { observable: label.to_string(), target, points, gap_at_hmin, trend_exponent, converging })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog_entry;

    #[test]
    fn targets() {
        let a = Observable::parse("exp(-x^2-xi^2)").unwrap();
        let quad = catalog_entry("quad-max").unwrap().model;
        assert_eq!(dirac_target(&quad, &a, 0.0).unwrap().value, 1.0);
        assert!(matches!(liouville_target(&quad, &a, 0.0), Err(Error::Hypothesis(_))));
        let two = catalog_entry("two-max").unwrap().model;
        assert!(matches!(dirac_target(&two, &a, 4.0 / 27.0), Err(Error::Config(_))));
        let radial = catalog_entry("radial-deg").unwrap().model;
        let r = liouville_target(&radial, &Observable::parse("exp(-x^2)").unwrap(), 0.0).unwrap();
        assert!(r.value > 0.0 && r.value < 1.0);
        let k3 = catalog_entry("pseudo-k3").unwrap().model;
        assert!(liouville_target(&k3, &a, 0.0).is_err());
    }

    #[test]
    fn trend_of_synthetic_ratios() {
        use crate::experiments::scan::{ObservableStats, ScanRow};
        use crate::microlocal::Quantization;
        let row = |h: f64| ScanRow {
            h,
            d_used: 5.0,
            upsilon: 10.0,
            count: 10,
            points: 100,
            max_residual: 0.0,
            boundary_tie: false,
            fallback: false,
            observables: vec![ObservableStats {
                label: "a".into(),
                upsilon_a: 0.0,
                ratio: 1.0 - 0.3 * h.sqrt(),
                nu_min: 0.0,
                nu_max: 0.0,
                nu_nearest: 0.0,
                max_gap: None,
            }],
            warnings: vec![],
            error: None,
        };
        let scan = ScanResult {
            model: "m".into(),
            e_c: 0.0,
            d: 5.0,
            quantization: Quantization::Weyl,
            observables: vec!["a".into()],
            rows: [0.1, 0.01, 0.001].into_iter().map(row).collect(),
        };
        let rep = ratio_limit(&scan, 0, Target { kind: TargetKind::Explicit, value: 1.0 }).unwrap();
        assert!((rep.trend_exponent.unwrap() - 0.5).abs() < 1e-10);
        assert!(rep.converging);
        assert!((rep.gap_at_hmin - 0.3 * 0.001f64.sqrt()).abs() < 1e-12);
        let unit = ratio_limit_points("1", &[(0.1, 1.0), (0.01, 1.0)], Target { kind: TargetKind::Dirac, value: 1.0 }).unwrap();
        assert_eq!(unit.gap_at_hmin, 0.0);
        assert!(unit.converging && unit.trend_exponent.is_none());
    }
}
