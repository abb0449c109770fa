use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::fit::{fit_scaling, fixed_fit, FitResult};
use super::limits::{dirac_target, liouville_target, ratio_limit, Target};
use super::scaling::{candidate_laws, dominant_law, LawOrigin, ScalingLaw};
use super::scan::{geometric_h, run_scan, ScanConfig, ScanResult};
use super::solve::{solve_window, SolvedWindow, SolverOptions};
use super::two_wells::two_wells_experiment;
use crate::classical::{
    classify_integrability, flow_pullback, levelset_connected, liouville_volume, phase_space_area, Integrability,
    LiouvilleOptions,
};
use crate::eig::{count_in, default_eps_lambda, eigs_in_window};
use crate::microlocal::{Observable, Quantization, WindowMeasures};
use crate::model::{catalog_entry, CatalogEntry, PhasePoint, SymbolModel};
use crate::quantize::{build_schrodinger, schrodinger_grid, GridPolicy, OperatorForm};
use crate::util::{gauss_legendre, least_squares};
use crate::{Error, Result};

pub const SCENARIOS: &[&str] = &[
    "harmonic-weyl",
    "critical-exponent-k2",
    "log-law-k1",
    "dirac-concentration-1d",
    "liouville-limit-2d",
    "pseudo-concentration-k3",
    "property-suite",
    "two-wells",
];

const GAUSSIAN: &str = "exp(-x^2-xi^2)";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: String,
    pub passed: bool,
}

impl Check {
    fn new(name: &str, value: f64, expected: impl Into<String>, passed: bool) -> Self {
        Self { name: name.into(), value, expected: expected.into(), passed }
    }

    fn within(name: &str, value: f64, center: f64, tol: f64) -> Self {
        Self::new(name, value, format!("{center} ± {tol}"), (value - center).abs() <= tol)
    }

    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, format!("<= {bound}"), value <= bound)
    }

    fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, format!(">= {bound}"), value >= bound)
    }

    fn flag(name: &str, ok: bool, expected: &str) -> Self {
        Self::new(name, f64::from(u8::from(ok)), expected, ok)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    /// Non-gating scenarios always report `passed = true`.
    pub gating: bool,
    pub passed: bool,
    pub checks: Vec<Check>,
    /// Informational measurements outside the pass/fail decision.
    pub diagnostics: Vec<Check>,
    pub config: Value,
    pub details: Value,
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

struct Outcome {
    checks: Vec<Check>,
    diagnostics: Vec<Check>,
    config: Value,
    details: Value,
}

/// Run a named scenario.
pub fn run_scenario(name: &str) -> Result<ScenarioReport> {
    let start = Instant::now();
    let out = match name {
        "harmonic-weyl" => harmonic_weyl()?,
        "critical-exponent-k2" => critical_exponent_k2()?,
        "log-law-k1" => log_law_k1()?,
        "dirac-concentration-1d" => dirac_concentration()?,
        "liouville-limit-2d" => liouville_limit()?,
        "pseudo-concentration-k3" => pseudo_concentration()?,
        "property-suite" => property_suite()?,
        "two-wells" => two_wells()?,
        other => return Err(Error::config(format!("unknown scenario '{other}' (known: {})", SCENARIOS.join(", ")))),
    };
    let gating = name != "two-wells";
    let passed = !gating || out.checks.iter().all(|c| c.passed);
    Ok(ScenarioReport {
        name: name.into(),
        gating,
        passed,
        checks: out.checks,
        diagnostics: out.diagnostics,
        config: out.config,
        details: out.details,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

fn entry(name: &str) -> Result<CatalogEntry> {
    catalog_entry(name).ok_or_else(|| Error::config(format!("unknown model '{name}'")))
}

fn obs(text: &str) -> Result<Observable> {
    Observable::parse(text)
}

fn scan(model: &SymbolModel, e_c: f64, h_values: Vec<f64>, observables: Vec<Observable>) -> ScanResult {
    run_scan(&ScanConfig {
        model: model.clone(),
        e_c,
        d: 5.0,
        h_values,
        observables,
        quantization: Quantization::Weyl,
        solver: SolverOptions::default(),
    })
}

fn first_error(scan: &ScanResult) -> Result<()> {
    match scan.rows.iter().find_map(|r| r.error.as_ref().map(|e| (r.h, e))) {
        Some((h, e)) => Err(Error::numerical(format!("scan row h = {h} failed: {e}"))),
        None => Ok(()),
    }
}

fn fit_of(scan: &ScanResult, model: &SymbolModel, e_c: f64) -> Result<FitResult> {
    fit_scaling(&scan.fit_rows(), &candidate_laws(model, e_c))
}

/// Least-squares slope of `log y` against `log h`.
fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let usable: Vec<&(f64, f64)> = points.iter().filter(|(h, y)| *h > 0.0 && *y > 0.0 && y.is_finite()).collect();
    if usable.len() < 2 {
        return None;
    }
    let design: Vec<Vec<f64>> = usable.iter().map(|(h, _)| vec![1.0, h.ln()]).collect();
    let y: Vec<f64> = usable.iter().map(|(_, y)| y.ln()).collect();
    least_squares(&design, &y).map(|c| c[1])
}

fn scan_config(model: &str, e_c: f64, h: &[f64], observables: &[&str]) -> Value {
    json!({ "model": model, "e_c": e_c, "d": 5.0, "h": h, "observables": observables, "solver": SolverOptions::default() })
}

fn harmonic_weyl() -> Result<Outcome> {
    let m = entry("harmonic")?.model;
    let h = vec![0.04, 0.02, 0.01, 0.005];
    let res = scan(&m, 1.0, h.clone(), vec![obs("1")?]);
    first_error(&res)?;
    let count_dev = res.rows.iter().map(|r| (r.upsilon - 5.0).abs()).fold(0.0, f64::max);
    let mut rel = 0.0f64;
    for &hh in &h {
        let w = solve_window(&m, 1.0, 5.0, hh, &SolverOptions::default())?;
        for p in &w.window.pairs {
            let j = ((p.value / hh - 1.0) / 2.0).round();
            let exact = (2.0 * j + 1.0) * hh;
            rel = rel.max((p.value - exact).abs() / exact);
        }
    }
    Ok(Outcome {
        checks: vec![Check::within("max |upsilon - 5|", count_dev, 0.0, 1.0), Check::at_most("eigenvalue relative error", rel, 1e-4)],
        diagnostics: vec![],
        config: scan_config("harmonic", 1.0, &h, &["1"]),
        details: json!({ "scan": res }),
    })
}

fn fit_checks(prefix: &str, fit: &FitResult) -> Vec<Check> {
    vec![
        Check::new(&format!("{prefix}alpha_hat"), fit.alpha_hat, "free fit", true),
        Check::new(&format!("{prefix}beta_hat"), fit.beta_hat as f64, "free fit", true),
    ]
}

fn critical_exponent_k2() -> Result<Outcome> {
    let e = entry("deg-max")?;
    let h = geometric_h(0.1, 1e-3, 12);
    let res = scan(&e.model, e.critical_energy, h.clone(), vec![]);
    first_error(&res)?;
    let fit = fit_of(&res, &e.model, e.critical_energy)?;
    let deep_h = geometric_h(1e-2, 1e-4, 12);
    let deep = scan(&e.model, e.critical_energy, deep_h.clone(), vec![]);
    first_error(&deep)?;
    let deep_fit = fit_of(&deep, &e.model, e.critical_energy)?;
    let mut diagnostics = fit_checks("h in [1e-4, 1e-2]: ", &deep_fit);
    diagnostics.push(Check::new("alpha with beta = 0", fit.alpha_by_beta[0], "h in [1e-3, 1e-1]", true));
    Ok(Outcome {
        checks: vec![
            Check::within("alpha_hat", fit.alpha_hat, -0.25, 0.05),
            Check::new("beta_hat", fit.beta_hat as f64, "0", fit.beta_hat == 0),
        ],
        diagnostics,
        config: scan_config("deg-max", e.critical_energy, &h, &[]),
        details: json!({ "fit": fit, "scan": res, "deep_fit": deep_fit, "deep_scan": deep }),
    })
}

fn log_law_k1() -> Result<Outcome> {
    let h = geometric_h(0.1, 1e-3, 12);
    let log_law = ScalingLaw { alpha: 0.0, beta: 1, coefficient: None, origin: LawOrigin::SchrodingerCritical };
    let mut fits = Vec::new();
    let mut scans = Vec::new();
    for name in ["quad-max", "quad-max-steep"] {
        let e = entry(name)?;
        let res = scan(&e.model, e.critical_energy, h.clone(), vec![]);
        first_error(&res)?;
        fits.push((fit_of(&res, &e.model, e.critical_energy)?, fixed_fit(&res.fit_rows(), &log_law)));
        scans.push(res);
    }
    let ratio = fits[0].1.coefficient / fits[1].1.coefficient;
    let quad = &fits[0].0;
    let e = entry("quad-max")?;
    let deep = scan(&e.model, 0.0, geometric_h(1e-2, 1e-4, 12), vec![]);
    first_error(&deep)?;
    let deep_fit = fit_of(&deep, &e.model, 0.0)?;
    Ok(Outcome {
        checks: vec![
            Check::new("beta_hat", quad.beta_hat as f64, "1", quad.beta_hat == 1),
            Check::within("alpha_hat", quad.alpha_hat, 0.0, 0.05),
            Check::within("|log h| coefficient ratio", ratio, 2.0, 0.4),
        ],
        diagnostics: fit_checks("h in [1e-4, 1e-2]: ", &deep_fit),
        config: json!({ "models": ["quad-max", "quad-max-steep"], "e_c": 0.0, "d": 5.0, "h": h }),
        details: json!({
            "fit": quad,
            "steep_fit": fits[1].0,
            "log_coefficients": [fits[0].1.coefficient, fits[1].1.coefficient],
            "scans": scans,
            "deep_fit": deep_fit,
        }),
    })
}

fn dirac_concentration() -> Result<Outcome> {
    let e = entry("quad-max")?;
    let topo = levelset_connected(&e.model, e.critical_energy, 1024)?;
    let h = geometric_h(0.1, 1e-3, 12);
    let a = obs(GAUSSIAN)?;
    let res = scan(&e.model, e.critical_energy, h.clone(), vec![a.clone(), obs("x^2")?]);
    first_error(&res)?;
    let target = dirac_target(&e.model, &a, e.critical_energy)?;
    let deviation: Vec<(f64, f64)> = res
        .rows
        .iter()
        .map(|r| {
            let o = &r.observables[0];
            (r.h, (o.nu_min - target.value).abs().max((o.nu_max - target.value).abs()))
        })
        .collect();
    let last = res.smallest_h_row().ok_or_else(|| Error::numerical("empty scan"))?;
    let dev_min = deviation.iter().find(|(h, _)| *h == last.h).map_or(f64::NAN, |d| d.1);
    let trend = loglog_slope(&deviation).unwrap_or(f64::NAN);
    let ratio = ratio_limit(&res, 0, target)?;
    Ok(Outcome {
        checks: vec![
            Check::flag("level set connected", topo.connected, "connected"),
            Check::at_most("max_j |nu_j(a) - a(0,0)| at h = 1e-3", dev_min, 0.15),
            Check::new("deviation trend exponent", trend, "> 0", trend > 0.0),
            Check::at_most("second moment at nearest eigenpair", last.observables[1].nu_nearest, 0.05),
        ],
        diagnostics: vec![Check::new("ratio gap at h = 1e-3", ratio.gap_at_hmin, "", true)],
        config: scan_config("quad-max", e.critical_energy, &h, &[GAUSSIAN, "x^2"]),
        details: json!({ "topology": topo, "deviation": deviation, "ratio": ratio, "scan": res }),
    })
}

fn liouville_limit() -> Result<Outcome> {
    let e = entry("radial-deg")?;
    let a = obs("exp(-x^2)")?;
    let h = geometric_h(0.1, 1e-2, 8);
    let target = liouville_target(&e.model, &a, e.critical_energy)?;
    let res = scan(&e.model, e.critical_energy, h.clone(), vec![a]);
    first_error(&res)?;
    let report = ratio_limit(&res, 0, target)?;
    let law = dominant_law(&e.model, e.critical_energy);
    Ok(Outcome {
        checks: vec![Check::at_most("|ratio - mu(a)| at h = 1e-2", report.gap_at_hmin, 0.10)],
        diagnostics: vec![Check::new("mu(a)", target.value, "Liouville quadrature", true)],
        config: scan_config("radial-deg", e.critical_energy, &h, &["exp(-x^2)"]),
        details: json!({ "ratio": report, "law": law, "scan": res }),
    })
}

fn pseudo_concentration() -> Result<Outcome> {
    let e = entry("pseudo-k3")?;
    let cps = e.model.critical_points_at(e.critical_energy);
    let class = cps.first().map(|c| classify_integrability(c, &e.model));
    let a = obs(GAUSSIAN)?;
    let h: Vec<f64> = (0..8).map(|i| 0.08 / f64::powi(2.0, i)).collect();
    let res = scan(&e.model, e.critical_energy, h.clone(), vec![a.clone()]);
    first_error(&res)?;
    let fit = fit_of(&res, &e.model, e.critical_energy)?;
    let law = dominant_law(&e.model, e.critical_energy);
    let alpha = fit.alpha_by_beta[law.beta as usize];
    let target = Target { kind: super::limits::TargetKind::Dirac, value: a.eval(cps[0].x0, cps[0].xi0) };
    let report = ratio_limit(&res, 0, target)?;
    let trend = report.trend_exponent.unwrap_or(f64::NAN);
    let mut diagnostics = fit_checks("", &fit);
    diagnostics.push(Check::new("largest grid", res.rows.iter().map(|r| r.points).max().unwrap_or(0) as f64, "<= 4096", true));
    Ok(Outcome {
        checks: vec![
            Check::flag("classified non-integrable", class == Some(Integrability::NonIntegrable), "non_integrable"),
            Check::within("alpha under the predicted law", alpha, -1.0 / 3.0, 0.07),
            Check::at_most("|ratio - a(0,0)| at smallest h", report.gap_at_hmin, 0.15),
            Check::new("ratio trend exponent", trend, "> 0", trend > 0.0),
        ],
        diagnostics,
        config: scan_config("pseudo-k3", e.critical_energy, &h, &[GAUSSIAN]),
        details: json!({ "fit": fit, "law": law, "ratio": report, "scan": res }),
    })
}

fn property_suite() -> Result<Outcome> {
    let mut checks = Vec::new();
    let mut details = serde_json::Map::new();
    let one = obs("1")?;
    let positives = [obs(GAUSSIAN)?, obs("x^2")?, obs("(x - xi)^2")?];
    let windows = [("harmonic", 1.0, 0.01), ("deg-max", 0.0, 0.01), ("quad-max", 1.0, 0.01), ("radial-deg", 0.0, 0.05), ("pseudo-k3", 0.0, 0.01)];
    let (mut unit_dev, mut aw_min, mut pairs) = (0.0f64, f64::INFINITY, 0usize);
    for (name, e_c, h) in windows {
        let m = entry(name)?.model;
        let w = solve_window(&m, e_c, 5.0, h, &SolverOptions::default())?;
        let meas = WindowMeasures::new(&w.window, Some(w.phase_box), Quantization::Both)?;
        for r in meas.records(&one)? {
            unit_dev = unit_dev.max((r.nu() - 1.0).abs());
            pairs += 1;
        }
        for a in &positives {
            for r in meas.records(a)? {
                if let Some(v) = r.nu_antiwick {
                    aw_min = aw_min.min(v);
                }
            }
        }
    }
    checks.push(Check::at_most("(a) max |nu(1) - 1|", unit_dev, 1e-8));
    checks.push(Check::at_least("(b) min anti-Wick value of a >= 0", aw_min, 0.0));
    details.insert("unit_pairs".into(), json!(pairs));

    let quad = entry("quad-max")?.model;
    let hs = [0.04, 0.02, 0.01, 0.005];
    let solver = SolverOptions { tolerance: Some(1e-4), ..SolverOptions::default() };
    let a = obs(GAUSSIAN)?;
    let (mut gaps, mut egorov) = (Vec::new(), Vec::new());
    for &h in &hs {
        let w = solve_window(&quad, 1.0, 5.0, h, &solver)?;
        let meas = WindowMeasures::new(&w.window, Some(w.phase_box), Quantization::Both)?;
        let gap = meas.records(&a)?.iter().filter_map(|r| r.gap).fold(0.0, f64::max);
        gaps.push((h, gap));
        egorov.push((h, egorov_defect(&quad, &w, &meas, &a, 0.5)?));
    }
    let gap_slope = loglog_slope(&gaps).unwrap_or(f64::NAN);
    let egorov_slope = loglog_slope(&egorov).unwrap_or(f64::NAN);
    checks.push(Check::at_least("(c) Weyl/anti-Wick gap slope", gap_slope, 0.8));
    checks.push(Check::at_least("(d) Egorov defect slope, t = 0.5", egorov_slope, 0.8));
    details.insert("gaps".into(), json!(gaps));
    details.insert("egorov".into(), json!(egorov));

    let mut coarea = 0.0f64;
    for (name, e1, e2) in [("deg-max", 0.1, 0.4), ("quad-max", -0.2, -0.05), ("harmonic", 0.5, 1.5)] {
        let m = entry(name)?.model;
        let (nodes, weights) = gauss_legendre(24);
        let (c, r) = (0.5 * (e1 + e2), 0.5 * (e2 - e1));
        let mut integral = 0.0;
        for (t, w) in nodes.iter().zip(&weights) {
            integral += w * r * liouville_volume(&m, c + r * t, &LiouvilleOptions::default())?.value;
        }
        let area = phase_space_area(&m, e1, e2, 2000)?;
        coarea = coarea.max((integral - area).abs() / area);
    }
    checks.push(Check::at_most("(e) coarea relative error", coarea, 0.01));

    let mut mismatches = 0usize;
    for (name, e_c, h) in [("harmonic", 1.0, 0.01), ("deg-max", 0.0, 0.005), ("quad-max", 0.0, 0.002), ("two-max", 4.0 / 27.0, 0.01)] {
        let v = entry(name)?.model.potential().cloned().ok_or_else(|| Error::numerical("potential expected"))?;
        let eps = default_eps_lambda(5.0, h);
        let top = e_c + 5.0 * h;
        let grid = schrodinger_grid(&v, h, top + 1.0, top, &GridPolicy::new(4, 1e-5))?;
        let op = build_schrodinger(&v, h, grid, 4, top)?;
        let w = eigs_in_window(&op, e_c, 5.0, eps)?;
        if let OperatorForm::Banded(t) = &op.form {
            let (lo, hi) = w.interval;
            if count_in(t, lo, hi) != w.len() {
                mismatches += 1;
            }
        }
    }
    checks.push(Check::at_most("(f) Sturm/window count mismatches", mismatches as f64, 0.0));

    let grid: Vec<f64> = geometric_h(0.1, 1e-3, 12);
    let power = fit_scaling(&grid.iter().map(|&h| (h, 3.0 * h.powf(-0.25))).collect::<Vec<_>>(), &[])?;
    let log = fit_scaling(&grid.iter().map(|&h| (h, 2.0 * h.ln().abs())).collect::<Vec<_>>(), &[])?;
    let synthetic = (power.alpha_hat + 0.25).abs().max(log.alpha_hat.abs());
    let betas_ok = power.beta_hat == 0 && log.beta_hat == 1;
    checks.push(Check::new("(g) synthetic fit alpha error", synthetic, "<= 0.01 with exact beta", synthetic <= 0.01 && betas_ok));
    Ok(Outcome {
        checks,
        diagnostics: vec![],
        config: json!({ "windows": windows, "slope_model": "quad-max", "slope_energy": 1.0, "slope_h": hs, "t": 0.5 }),
        details: Value::Object(details),
    })
}

/// `max_j |nu_j(a o Phi_t) - nu_j(a)|` under the anti-Wick quantization.
fn egorov_defect(model: &SymbolModel, w: &SolvedWindow, meas: &WindowMeasures, a: &Observable, t: f64) -> Result<f64> {
    let frame = meas.frame().ok_or_else(|| Error::numerical("anti-Wick frame missing"))?;
    let points: Vec<PhasePoint> = frame.points().collect();
    let pulled = flow_pullback(model, a, t, &points)?;
    let plain: Vec<f64> = points.iter().map(|z| a.eval(z.x, z.xi)).collect();
    let defect = meas
        .husimi()
        .iter()
        .map(|q| (q.integrate(&pulled.values) - q.integrate(&plain)).abs())
        .fold(0.0, f64::max);
    if w.window.is_empty() {
        return Err(Error::numerical("empty window for the Egorov check"));
    }
    Ok(defect)
}

fn two_wells() -> Result<Outcome> {
    let h = geometric_h(0.05, 0.01, 6);
    let rep = two_wells_experiment(&h, 5.0)?;
    let split = rep.rows.iter().filter(|r| r.error.is_none()).map(|r| (r.aggregate_split - 0.5).abs()).fold(0.0, f64::max);
    let away: Vec<(f64, f64)> = rep.rows.iter().map(|r| (r.h, r.aggregate_away)).collect();
    Ok(Outcome {
        checks: vec![Check::at_most("max |aggregate split - 0.5|", split, 1e-3)],
        diagnostics: vec![Check::new("away-bump mass trend exponent", loglog_slope(&away).unwrap_or(f64::NAN), "> 0 expected", true)],
        config: json!({ "model": "two-max", "d": 5.0, "h": h }),
        details: json!({ "report": rep }),
    })
}
