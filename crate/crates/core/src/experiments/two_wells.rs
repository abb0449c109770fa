use serde::Serialize;

use super::solve::{solve_window, SolverOptions};
use crate::microlocal::{Observable, Quantization, WindowMeasures};
use crate::model::{catalog_entry, CriticalKind};
use crate::quantize::DENSE_LIMIT;
use crate::{Error, Result};

/// Width parameter `s` of the bumps `exp(-((x - x0)^2 + (xi - xi0)^2) / s)`.
const BUMP_SCALE: f64 = 0.0225;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSplit {
    pub j: usize,
    pub lambda: f64,
    pub left: f64,
    pub right: f64,
    /// `left / (left + right)`.
    pub split: f64,
    /// Mass of a bump on the level set away from both maxima.
    pub away: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoWellsRow {
    pub h: f64,
    pub pairs: Vec<PairSplit>,
    pub aggregate_split: f64,
    pub aggregate_away: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoWellsReport {
    pub critical_energy: f64,
    pub maxima: Vec<f64>,
    pub away_point: (f64, f64),
    pub rows: Vec<TwoWellsRow>,
}

fn bump(x0: f64, xi0: f64) -> Result<Observable> {
    Observable::parse(&format!("exp(-({:?}) * ((x - ({x0:?}))^2 + (xi - ({xi0:?}))^2))", 1.0 / BUMP_SCALE))
}

/// Localized masses at the two symmetric maxima of `x^2 (x^2 - 1)^2`.
pub fn two_wells_experiment(h_values: &[f64], d: f64) -> Result<TwoWellsReport> {
    let model = catalog_entry("two-max").ok_or_else(|| Error::config("two-max model missing"))?.model;
    let mut maxima: Vec<&crate::model::CriticalPoint> =
        model.critical_points.iter().filter(|c| c.kind == CriticalKind::Max).collect();
    maxima.sort_by(|a, b| a.x0.total_cmp(&b.x0));
    let (left, right) = match maxima.as_slice() {
        [l, r] if (l.critical_energy - r.critical_energy).abs() < 1e-12 => (*l, *r),
        _ => return Err(Error::Hypothesis("two-max does not have two maxima on one level".into())),
    };
    let e_c = left.critical_energy;
    let away = (0.0, (e_c - model.potential().map_or(0.0, |v| v.eval(0.0))).sqrt());
    let bumps = [bump(left.x0, 0.0)?, bump(right.x0, 0.0)?, bump(away.0, away.1)?];
    let opts = SolverOptions::default();
    let rows = h_values
        .iter()
        .map(|&h| match two_wells_row(&model, e_c, d, h, &opts, &bumps) {
            Ok(r) => r,
            Err(e) => TwoWellsRow { h, pairs: vec![], aggregate_split: f64::NAN, aggregate_away: f64::NAN, error: Some(e.to_string()) },
        })
        .collect();
    Ok(TwoWellsReport { critical_energy: e_c, maxima: vec![left.x0, right.x0], away_point: away, rows })
}

fn two_wells_row(
    model: &crate::model::SymbolModel,
    e_c: f64,
    d: f64,
    h: f64,
    opts: &SolverOptions,
    bumps: &[Observable; 3],
) -> Result<TwoWellsRow> {
    let solved = solve_window(model, e_c, d, h, opts)?;
    let q = if solved.points() > DENSE_LIMIT { Quantization::AntiWick } else { Quantization::Weyl };
    let m = WindowMeasures::new(&solved.window, Some(solved.phase_box), q)?;
    let [l, r, a] = [m.records(&bumps[0])?, m.records(&bumps[1])?, m.records(&bumps[2])?];
    let pairs: Vec<PairSplit> = l
        .iter()
        .zip(&r)
        .zip(&a)
        .map(|((l, r), a)| PairSplit {
            j: l.j,
            lambda: l.lambda,
            left: l.nu(),
            right: r.nu(),
            split: l.nu() / (l.nu() + r.nu()),
            away: a.nu(),
        })
        .collect();
    let total = |f: &dyn Fn(&PairSplit) -> f64| pairs.iter().map(f).sum::<f64>();
    let sum_l = total(&|p| p.left);
    let sum_r = total(&|p| p.right);
    Ok(TwoWellsRow {
        h,
        aggregate_split: sum_l / (sum_l + sum_r),
        aggregate_away: total(&|p| p.away) / pairs.len().max(1) as f64,
        pairs,
        error: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_forces_even_split() {
        let rep = two_wells_experiment(&[0.05, 0.02], 5.0).unwrap();
        assert!((rep.critical_energy - 4.0 / 27.0).abs() < 1e-12);
        for row in &rep.rows {
            assert!(row.error.is_none(), "{:?}", row.error);
            assert!(!row.pairs.is_empty());
            assert!((row.aggregate_split - 0.5).abs() < 1e-3, "{}", row.aggregate_split);
            for p in &row.pairs {
                assert!((p.split - 0.5).abs() < 1e-3);
            }
        }
    }
}
