use serde::{Deserialize, Serialize};

use super::{cauchy_bound, CriticalKind, Family, LeadingForm, PhaseBox, PhasePolynomial, SymbolModel};
use crate::Result;

/// Default confinement margin: `max(1, 10 d h_max)` energy units.
pub fn default_eps0(d: f64, h_max: f64) -> f64 {
    (10.0 * d * h_max).max(1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub hypothesis: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub energy: f64,
    pub eps0: f64,
    /// `p^{-1}([E_c - eps0, E_c + eps0])` lies inside the box.
    pub confinement: bool,
    /// Number of critical points on the level `E_c`.
    pub critical_count: usize,
    /// Potential families: the leading form `V_{2k}` is definite.
    pub extremum_definite: Option<bool>,
    /// Phase family: unique critical point with homogeneous leading order `k > 2`.
    pub homogeneous_order: Option<bool>,
    /// Phase family: `grad p_k != 0` on the zero set of `p_k` on the unit circle.
    pub real_principal: Option<bool>,
    pub violations: Vec<Violation>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn fail(&mut self, hypothesis: &str, detail: impl Into<String>) {
        self.violations.push(Violation { hypothesis: hypothesis.into(), detail: detail.into() });
    }
}

/// Check confinement and the critical-point hypotheses at energy `e_c`.
pub fn check_hypotheses(model: &SymbolModel, e_c: f64, bx: PhaseBox, eps0: f64) -> Result<HypothesisReport> {
    let critical = model.critical_points_at(e_c);
    let mut report = HypothesisReport {
        energy: e_c,
        eps0,
        confinement: true,
        critical_count: critical.len(),
        extremum_definite: None,
        homogeneous_order: None,
        real_principal: None,
        violations: Vec::new(),
    };
    let level = e_c + eps0;
    match &model.family {
        Family::Schrodinger1d { potential } | Family::Radial2d { potential } => {
            let radial = matches!(model.family, Family::Radial2d { .. });
            let tag = if radial { "H1 (radial)" } else { "H1" };
            let deg = potential.degree();
            if deg == 0 || potential.leading_coefficient() < 0.0 || deg % 2 == 1 {
                report.confinement = false;
                report.fail(tag, format!("V = {potential} does not tend to +infinity"));
            } else {
                let q = potential.shift_constant(-level);
                let b = cauchy_bound(&q) + 1.0;
                let roots = q.real_roots(if radial { 0.0 } else { -b }, b)?;
                let lo = if radial { 0.0 } else { bx.x.0 };
                if let Some(r) = roots.iter().find(|&&r| (!radial && r <= lo) || r >= bx.x.1) {
                    report.confinement = false;
                    report.fail(tag, format!("V reaches E_c + eps0 = {level} at x = {r}, outside the box"));
                }
                for end in [bx.x.0, bx.x.1].iter().filter(|&&e| !radial || e > 0.0) {
                    if potential.eval(*end) <= level {
                        report.confinement = false;
                        report.fail(tag, format!("V({end}) = {} <= E_c + eps0", potential.eval(*end)));
                    }
                }
            }
            if critical.is_empty() {
                report.fail("H2", format!("no critical point at energy {e_c}"));
            }
            let definite = critical.iter().all(|c| matches!(c.kind, CriticalKind::Max | CriticalKind::Min));
            report.extremum_definite = Some(definite && !critical.is_empty());
            for c in critical.iter().filter(|c| !matches!(c.kind, CriticalKind::Max | CriticalKind::Min)) {
                report.fail("H2", format!("critical point x0 = {} has odd order {}; V_2k not definite", c.x0, c.order));
            }
        }
        Family::Phase1d { symbol } => {
            check_phase_confinement(symbol, bx, level, &mut report);
            match critical.as_slice() {
                [] => {
                    report.homogeneous_order = Some(false);
                    report.fail("A2", format!("no critical point at energy {e_c}"));
                }
                [c] => {
                    report.homogeneous_order = Some(c.order > 2);
                    if c.order <= 2 {
                        report.fail("A2", format!("leading order k = {} is not > 2", c.order));
                    }
                    if let LeadingForm::Phase(form) = &c.leading_form {
                        let ok = real_principal(form, &mut report);
                        report.real_principal = Some(ok);
                    }
                }
                many => {
                    report.homogeneous_order = Some(false);
                    report.fail("A2", format!("{} critical points on the level {e_c}; expected one", many.len()));
                }
            }
        }
    }
    Ok(report)
}

fn check_phase_confinement(symbol: &PhasePolynomial, bx: PhaseBox, level: f64, report: &mut HypothesisReport) {
    const EDGE_SAMPLES: usize = 4096;
    let mut min_edge = f64::INFINITY;
    for i in 0..=EDGE_SAMPLES {
        let t = i as f64 / EDGE_SAMPLES as f64;
        let x = bx.x.0 + t * (bx.x.1 - bx.x.0);
        let xi = bx.xi.0 + t * (bx.xi.1 - bx.xi.0);
        for v in [symbol.eval(x, bx.xi.0), symbol.eval(x, bx.xi.1), symbol.eval(bx.x.0, xi), symbol.eval(bx.x.1, xi)] {
            min_edge = min_edge.min(v);
        }
    }
    if min_edge <= level {
        report.confinement = false;
        report.fail("A1", format!("symbol drops to {min_edge} <= E_c + eps0 = {level} on the box boundary"));
    }
    let top = symbol.homogeneous_part(symbol.degree());
    let min_top = (0..3600)
        .map(|i| top.on_circle(std::f64::consts::TAU * i as f64 / 3600.0))
        .fold(f64::INFINITY, f64::min);
    if min_top <= 0.0 {
        report.confinement = false;
        report.fail("A1", format!("top-degree part {top} is not positive definite"));
    }
}

/// `grad p_k` bounded away from zero on `{p_k = 0} ∩ S^1`.
fn real_principal(form: &PhasePolynomial, report: &mut HypothesisReport) -> bool {
    const SAMPLES: usize = 7200;
    const GRAD_FLOOR: f64 = 1e-6;
    let dt = std::f64::consts::TAU / SAMPLES as f64;
    let f = |t: f64| form.on_circle(t);
    let mut zeros = Vec::new();
    for i in 0..SAMPLES {
        let (a, b) = (i as f64 * dt, (i + 1) as f64 * dt);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            zeros.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..80 {
                let m = 0.5 * (lo + hi);
                if f(m) * fa > 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            zeros.push(0.5 * (lo + hi));
        } else {
            // tangential zeros show up as small local minima of |p_k|
            let fm = f(a - dt).abs();
            if fa.abs() < fm && fa.abs() < fb.abs() && fa.abs() < 1e-6 {
                zeros.push(a);
            }
        }
    }
    let mut ok = true;
    for t in zeros {
        let (gx, gxi) = form.gradient(t.cos(), t.sin());
        let g = gx.hypot(gxi);
        if g < GRAD_FLOOR {
            ok = false;
            report.fail("A3", format!("grad p_k = {g:e} at angle {t:.6} on the zero set"));
        }
    }
    ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{catalog_entry, Polynomial1D};

    fn sch_box(model: &SymbolModel, e: f64, eps0: f64) -> PhaseBox {
        model.sublevel_box(e + eps0).unwrap().padded(0.25)
    }

    #[test]
    fn fig1_potential_passes() {
        let m = catalog_entry("deg-max").unwrap().model;
        let r = check_hypotheses(&m, 0.0, sch_box(&m, 0.0, 1.0), 1.0).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.extremum_definite, Some(true));
    }

    #[test]
    fn inverted_double_well_fails_confinement() {
        let m = SymbolModel::schrodinger("neg", Polynomial1D::new(vec![-1.0, 0.0, 2.0, 0.0, -1.0])).unwrap();
        let bx = PhaseBox { x: (-3.0, 3.0), xi: (-3.0, 3.0) };
        let r = check_hypotheses(&m, 0.0, bx, 1.0).unwrap();
        assert!(!r.confinement);
        assert!(r.violations.iter().any(|v| v.hypothesis == "H1"));
    }

    #[test]
    fn harmonic_passes_and_negative_leading_fails() {
        let m = catalog_entry("harmonic").unwrap().model;
        let r = check_hypotheses(&m, 0.0, sch_box(&m, 0.0, 1.0), 1.0).unwrap();
        assert!(r.confinement && r.passed());
        for deg in [4usize, 6, 8] {
            let v = Polynomial1D::new(vec![0.0, 0.0, 1.0]).add(&Polynomial1D::monomial(deg, -0.01));
            let m = SymbolModel::schrodinger("bad", v).unwrap();
            let bx = PhaseBox { x: (-2.0, 2.0), xi: (-2.0, 2.0) };
            let r = check_hypotheses(&m, 0.0, bx, 1.0).unwrap();
            assert!(!r.confinement, "degree {deg}");
        }
    }

    #[test]
    fn worked_phase_symbol_passes_all() {
        let m = catalog_entry("pseudo-k3").unwrap().model;
        let bx = m.sublevel_box(1.0).unwrap().padded(0.5);
        let r = check_hypotheses(&m, 0.0, bx, 1.0).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(r.real_principal, Some(true));
        assert_eq!(r.homogeneous_order, Some(true));
    }

    #[test]
    fn pseudo_k4_satisfies_real_principal() {
        let m = catalog_entry("pseudo-k4").unwrap().model;
        let bx = m.sublevel_box(1.0).unwrap().padded(0.5);
        let r = check_hypotheses(&m, 0.0, bx, 1.0).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn degenerate_cubic_fails_real_principal() {
        // p_3 = x^3 has a degenerate zero at x = 0 on the circle
        let p = PhasePolynomial::from_triples(&[(3, 0, 1.0), (4, 0, 1.0), (0, 4, 1.0), (0, 3, 0.0)]);
        let m = SymbolModel::phase("deg", p).unwrap();
        let bx = m.sublevel_box(1.0).unwrap().padded(0.5);
        let r = check_hypotheses(&m, 0.0, bx, 1.0).unwrap();
        assert!(r.violations.iter().any(|v| v.hypothesis == "A3"), "{r:?}");
    }
}
