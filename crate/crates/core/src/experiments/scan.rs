use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::solve::{solve_window, SolvedWindow, SolverOptions};
use crate::cli::expr::Routing;
use crate::microlocal::{upsilon, Observable, Quantization, WindowMeasures};
use crate::model::SymbolModel;
use crate::quantize::{Boundary, DENSE_LIMIT};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub model: SymbolModel,
    pub e_c: f64,
    pub d: f64,
    pub h_values: Vec<f64>,
    pub observables: Vec<Observable>,
    pub quantization: Quantization,
    pub solver: SolverOptions,
}

/// `h` values spaced geometrically from `h_max` down to `h_min`, inclusive.
pub fn geometric_h(h_max: f64, h_min: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![h_max];
    }
    let r = (h_min / h_max).ln() / (count - 1) as f64;
    (0..count).map(|i| if i + 1 == count { h_min } else { h_max * (r * i as f64).exp() }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObservableStats {
    pub label: String,
    pub upsilon_a: f64,
    /// `Upsilon_a / Upsilon`.
    pub ratio: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    /// `nu_j(a)` for the eigenvalue closest to the critical energy.
    pub nu_nearest: f64,
    /// Largest Weyl/anti-Wick gap when both values exist.
    pub max_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub h: f64,
    /// Window half-width actually used after any tie retry.
    pub d_used: f64,
    pub upsilon: f64,
    pub count: usize,
    pub points: usize,
    pub max_residual: f64,
    pub boundary_tie: bool,
    /// Anti-Wick values stand in for Weyl values that were unavailable.
    pub fallback: bool,
    pub observables: Vec<ObservableStats>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl ScanRow {
    fn failed(h: f64, d: f64, e: &Error) -> Self {
        Self {
            h,
            d_used: d,
            upsilon: f64::NAN,
            count: 0,
            points: 0,
            max_residual: f64::NAN,
            boundary_tie: false,
            fallback: false,
            observables: Vec::new(),
            warnings: Vec::new(),
            error: Some(e.to_string()),
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub model: String,
    pub e_c: f64,
    pub d: f64,
    pub quantization: Quantization,
    pub observables: Vec<String>,
    pub rows: Vec<ScanRow>,
}

/// Solve and measure every `h`; failures are recorded per row.
pub fn run_scan(cfg: &ScanConfig) -> ScanResult {
    let rows = cfg
        .h_values
        .par_iter()
        .map(|&h| match scan_row(cfg, h) {
            Ok(r) => r,
            Err(e) => ScanRow::failed(h, cfg.d, &e),
        })
        .collect();
    ScanResult {
        model: cfg.model.name.clone(),
        e_c: cfg.e_c,
        d: cfg.d,
        quantization: cfg.quantization,
        observables: cfg.observables.iter().map(|o| o.label().to_string()).collect(),
        rows,
    }
}

pub fn scan_row(cfg: &ScanConfig, h: f64) -> Result<ScanRow> {
    let solved = solve_window(&cfg.model, cfg.e_c, cfg.d, h, &cfg.solver)?;
    measure_row(&solved, &cfg.observables, cfg.quantization)
}

/// Measure observables on a solved window.
pub fn measure_row(solved: &SolvedWindow, observables: &[Observable], quantization: Quantization) -> Result<ScanRow> {
    let w = &solved.window;
    let radial = w.grid.boundary() == Boundary::Radial;
    let needs_fallback = quantization == Quantization::Weyl
        && !radial
        && w.grid.len() > DENSE_LIMIT
        && observables.iter().any(|o| o.routing() == Routing::General);
    let q = if needs_fallback { Quantization::Both } else { quantization };
    let measures = WindowMeasures::new(w, Some(solved.phase_box), q)?;
    let total = upsilon(w);
    let nearest = w
        .pairs
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1.value - w.critical_energy).abs().total_cmp(&(b.1.value - w.critical_energy).abs()))
        .map(|(j, _)| j);
    let mut stats = Vec::with_capacity(observables.len());
    let mut fallback = false;
    let mut warnings = w.warnings.clone();
    for a in observables {
        let recs = measures.records(a)?;
        fallback |= recs.iter().any(|r| r.nu_weyl.is_none() && r.nu_antiwick.is_some()) && quantization != Quantization::AntiWick;
        if let Some(r) = recs.iter().find(|r| r.husimi_mass.is_some_and(|m| m < crate::quantize::MASS_FLOOR)) {
            warnings.push(format!("Husimi mass {:.4} below floor for j = {}", r.husimi_mass.unwrap_or(0.0), r.j));
        }
        let nus: Vec<f64> = recs.iter().map(|r| r.nu()).collect();
        let weighted: Vec<f64> = recs.iter().map(|r| r.weight as f64 * r.nu()).collect();
        let upsilon_a = crate::util::pairwise_sum(&weighted);
        stats.push(ObservableStats {
            label: a.label().to_string(),
            upsilon_a,
            ratio: if total > 0.0 { upsilon_a / total } else { f64::NAN },
            nu_min: nus.iter().copied().fold(f64::NAN, f64::min),
            nu_max: nus.iter().copied().fold(f64::NAN, f64::max),
            nu_nearest: nearest.map_or(f64::NAN, |j| nus[j]),
            max_gap: recs.iter().filter_map(|r| r.gap).reduce(f64::max),
        });
    }
    Ok(ScanRow {
        h: w.h,
        d_used: w.d,
        upsilon: total,
        count: w.len(),
        points: w.grid.len(),
        max_residual: if w.is_empty() { 0.0 } else { w.max_residual() },
        boundary_tie: w.has_boundary_tie(),
        fallback,
        observables: stats,
        warnings,
        error: None,
    })
}

impl ScanResult {
    /// `(h, Upsilon)` for rows that succeeded.
    pub fn fit_rows(&self) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.ok()).map(|r| (r.h, r.upsilon)).collect()
    }

    /// `(h, Upsilon_a / Upsilon)` for observable `index`.
    pub fn ratios(&self, index: usize) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.ok()).filter_map(|r| r.observables.get(index).map(|o| (r.h, o.ratio))).collect()
    }

    pub fn smallest_h_row(&self) -> Option<&ScanRow> {
        self.rows.iter().filter(|r| r.ok()).min_by(|a, b| a.h.total_cmp(&b.h))
    }

    /// CSV with `# key=value` metadata lines before the header.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# model={}\n# e_c={}\n# d={}\n", self.model, self.e_c, self.d));
        out.push_str(&format!("# quantization={}\n", self.quantization.name()));
        for (i, o) in self.observables.iter().enumerate() {
            out.push_str(&format!("# a{i}={o}\n"));
        }
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["h".to_string(), "upsilon".to_string()];
        for i in 0..self.observables.len() {
            for col in ["upsilon_a", "ratio", "nu_min", "nu_max", "nu_nearest", "max_gap"] {
                header.push(format!("a{i}_{col}"));
            }
        }
        header.extend(["count", "points", "d_used", "max_residual", "boundary_tie", "fallback", "error"].map(String::from));
        wtr.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec = vec![r.h.to_string(), r.upsilon.to_string()];
            for i in 0..self.observables.len() {
                match r.observables.get(i) {
                    Some(o) => {
                        rec.extend([o.upsilon_a, o.ratio, o.nu_min, o.nu_max, o.nu_nearest].map(|v| v.to_string()));
                        rec.push(o.max_gap.map_or(String::new(), |g| g.to_string()));
                    }
                    None => rec.extend(std::iter::repeat_n(String::new(), 6)),
                }
            }
            rec.extend([
                r.count.to_string(),
                r.points.to_string(),
                r.d_used.to_string(),
                format!("{:e}", r.max_residual),
                r.boundary_tie.to_string(),
                r.fallback.to_string(),
                r.error.clone().unwrap_or_default(),
            ]);
            wtr.write_record(&rec).map_err(csv_err)?;
        }
        let body = wtr.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        out.push_str(&String::from_utf8_lossy(&body));
        Ok(out)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// A scan CSV read back: metadata and named columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanTable {
    pub metadata: BTreeMap<String, String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ScanTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = BTreeMap::new();
        let mut body = String::new();
        for line in text.lines() {
            match line.strip_prefix('#') {
                Some(meta) => {
                    if let Some((k, v)) = meta.trim().split_once('=') {
                        metadata.insert(k.trim().to_string(), v.trim().to_string());
                    }
                }
                None => {
                    body.push_str(line);
                    body.push('\n');
                }
            }
        }
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        let columns = rdr.headers().map_err(csv_err)?.iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|r| r.iter().map(String::from).collect()).map_err(csv_err))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Self { metadata, columns, rows })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::config(format!("scan table has no column '{name}'")))?;
        self.rows
            .iter()
            .map(|r| {
                let s = r.get(i).map(String::as_str).unwrap_or("");
                if s.is_empty() {
                    Ok(f64::NAN)
                } else {
                    s.parse::<f64>().map_err(|_| Error::config(format!("bad number '{s}' in column '{name}'")))
                }
            })
            .collect()
    }

    /// `(h, Upsilon)` rows with a finite count.
    pub fn fit_rows(&self) -> Result<Vec<(f64, f64)>> {
        let h = self.column("h")?;
        let u = self.column("upsilon")?;
        Ok(h.into_iter().zip(u).filter(|(_, u)| u.is_finite()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog_entry;

    fn config(name: &str, h: Vec<f64>) -> ScanConfig {
        let e = catalog_entry(name).unwrap();
        ScanConfig {
            model: e.model,
            e_c: e.critical_energy,
            d: 5.0,
            h_values: h,
            observables: vec![Observable::parse("x^2").unwrap(), Observable::parse("1").unwrap()],
            quantization: Quantization::Weyl,
            solver: SolverOptions::default(),
        }
    }

    #[test]
    fn geometric_grid_endpoints() {
        let h = geometric_h(0.1, 0.001, 12);
        assert_eq!(h.len(), 12);
        assert_eq!((h[0], h[11]), (0.1, 0.001));
        assert!(h.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn scan_is_ordered_and_csv_round_trips() {
        let cfg = config("deg-max", vec![0.05, 0.02, 0.1]);
        let res = run_scan(&cfg);
        assert_eq!(res.rows.iter().map(|r| r.h).collect::<Vec<_>>(), vec![0.05, 0.02, 0.1]);
        for r in &res.rows {
            assert!(r.ok(), "{:?}", r.error);
            assert!(r.upsilon >= 1.0);
            assert!((r.observables[1].ratio - 1.0).abs() < 1e-8);
        }
        let table = ScanTable::parse(&res.to_csv().unwrap()).unwrap();
        assert_eq!(table.metadata["model"], "deg-max");
        assert_eq!(table.metadata["a0"], "x^2");
        assert_eq!(table.fit_rows().unwrap(), res.fit_rows());
        let again = run_scan(&cfg);
        assert_eq!(again.to_csv().unwrap(), res.to_csv().unwrap());
    }

    #[test]
    fn failed_rows_are_recorded() {
        let cfg = config("harmonic", vec![0.05, 2.0]);
        let res = run_scan(&cfg);
        assert!(res.rows[0].ok());
        assert!(res.rows[1].error.is_some());
        assert_eq!(res.fit_rows().len(), 1);
    }
}
