use serde::{Deserialize, Serialize};

use super::{Family, PhaseBox, PhasePolynomial, Polynomial1D, SymbolModel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    Max,
    Min,
    Saddle,
    NonExtremalHomogeneous,
}

/// Leading nonvanishing Taylor form at a critical point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadingForm {
    /// `V_{2k}` as a polynomial in `x - x0` (a single monomial in 1D).
    Potential(Polynomial1D),
    /// Homogeneous part of `p` in `(x - x0, xi - xi0)`.
    Phase(PhasePolynomial),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x0: f64,
    pub xi0: f64,
    pub kind: CriticalKind,
    /// Degree of the leading form: `2k` for potential extrema, `k` for
    /// homogeneous phase-space singularities.
    pub order: u32,
    pub leading_form: LeadingForm,
    pub critical_energy: f64,
}

impl CriticalPoint {
    /// `k` in the potential expansion `V = E_c + V_{2k} + ...`, when the order is even.
    pub fn potential_k(&self) -> Option<u32> {
        match self.leading_form {
            LeadingForm::Potential(_) if self.order.is_multiple_of(2) => Some(self.order / 2),
            _ => None,
        }
    }
}

const ORDER_TOL: f64 = 1e-9;
const GRADIENT_TOL: f64 = 1e-12;

/// All critical points of the symbol inside the search box.
pub fn find_critical_points(model: &SymbolModel, search_box: PhaseBox) -> Result<Vec<CriticalPoint>> {
    match &model.family {
        Family::Schrodinger1d { potential } => potential_critical_points(potential, search_box.x, false),
        Family::Radial2d { potential } => {
            let lo = search_box.x.0.max(0.0);
            potential_critical_points(potential, (lo, search_box.x.1.max(lo + 1.0)), true)
        }
        Family::Phase1d { symbol } => phase_critical_points(symbol, search_box),
    }
}

fn potential_critical_points(v: &Polynomial1D, (a, b): (f64, f64), radial: bool) -> Result<Vec<CriticalPoint>> {
    if v.degree() < 2 {
        return Err(Error::config("potential must have degree >= 2"));
    }
    let dv = v.derivative();
    let mut roots = dv.real_roots(a, b)?;
    if radial && !roots.iter().any(|r| r.abs() < 1e-12) && dv.eval(0.0).abs() <= GRADIENT_TOL {
        roots.insert(0, 0.0);
    }
    let mut out = Vec::new();
    for x0 in roots {
        if dv.eval(x0).abs() > GRADIENT_TOL * (1.0 + dv.coefficients().iter().map(|c| c.abs()).sum::<f64>()) {
            return Err(Error::numerical(format!("root isolation left |V'({x0})| too large")));
        }
        let order = v
            .vanishing_order_at(x0, ORDER_TOL)
            .ok_or_else(|| Error::numerical("constant potential has no isolated critical point"))?;
        let coeff = v.taylor_at(x0).coefficients()[order];
        let kind = match (order % 2, coeff > 0.0) {
            (0, true) => CriticalKind::Min,
            (0, false) => CriticalKind::Max,
            _ => CriticalKind::Saddle,
        };
        out.push(CriticalPoint {
            x0,
            xi0: 0.0,
            kind,
            order: order as u32,
            leading_form: LeadingForm::Potential(Polynomial1D::monomial(order, coeff)),
            critical_energy: v.eval(x0),
        });
    }
    Ok(out)
}

fn classify_phase(symbol: &PhasePolynomial, x0: f64, xi0: f64) -> Result<CriticalPoint> {
    let taylor = symbol.taylor_at(x0, xi0).cleaned(1e-13);
    let order = taylor
        .lowest_degree_from(2, ORDER_TOL)
        .ok_or_else(|| Error::numerical("symbol is constant near a critical point"))?;
    let form = taylor.homogeneous_part(order).cleaned(ORDER_TOL);
    const SAMPLES: usize = 3600;
    let (mut pos, mut neg) = (false, false);
    for i in 0..SAMPLES {
        let v = form.on_circle(std::f64::consts::TAU * (i as f64 + 0.5) / SAMPLES as f64);
        pos |= v > 0.0;
        neg |= v < 0.0;
    }
    let kind = match (pos, neg, order) {
        (true, false, _) => CriticalKind::Min,
        (false, true, _) => CriticalKind::Max,
        (_, _, 2) => CriticalKind::Saddle,
        _ => CriticalKind::NonExtremalHomogeneous,
    };
    Ok(CriticalPoint {
        x0,
        xi0,
        kind,
        order,
        leading_form: LeadingForm::Phase(form),
        critical_energy: symbol.eval(x0, xi0),
    })
}

fn phase_critical_points(symbol: &PhasePolynomial, search: PhaseBox) -> Result<Vec<CriticalPoint>> {
    if symbol.degree() < 2 {
        return Err(Error::config("symbol must have degree >= 2"));
    }
    let points = match symbol.as_split() {
        Some((f, g)) => {
            let rx = if f.degree() >= 1 { f.derivative().real_roots(search.x.0, search.x.1)? } else { vec![0.0] };
            let rxi = if g.degree() >= 1 { g.derivative().real_roots(search.xi.0, search.xi.1)? } else { vec![0.0] };
            let mut pts = Vec::new();
            for &x in &rx {
                for &xi in &rxi {
                    pts.push((x, xi));
                }
            }
            pts
        }
        None => subdivide_gradient_roots(symbol, search)?,
    };
    points.into_iter().map(|(x, xi)| classify_phase(symbol, x, xi)).collect()
}

/// Zeros of the gradient of a non-separable symbol by interval subdivision
/// followed by Newton refinement.
fn subdivide_gradient_roots(symbol: &PhasePolynomial, search: PhaseBox) -> Result<Vec<(f64, f64)>> {
    let px = symbol.d_dx();
    let pxi = symbol.d_dxi();
    let pxx = px.d_dx();
    let pxxi = px.d_dxi();
    let pxixi = pxi.d_dxi();
    const MIN_WIDTH: f64 = 1e-3;
    let mut stack = vec![search];
    let mut found: Vec<(f64, f64)> = Vec::new();
    let mut visited = 0usize;
    while let Some(cell) = stack.pop() {
        visited += 1;
        if visited > 4_000_000 {
            return Err(Error::numerical("critical point subdivision did not converge"));
        }
        let (a, b) = px.range_on(cell.x, cell.xi);
        let (c, d) = pxi.range_on(cell.x, cell.xi);
        if a > 0.0 || b < 0.0 || c > 0.0 || d < 0.0 {
            continue;
        }
        let wx = cell.x.1 - cell.x.0;
        let wxi = cell.xi.1 - cell.xi.0;
        if wx.max(wxi) > MIN_WIDTH {
            let mx = 0.5 * (cell.x.0 + cell.x.1);
            let mxi = 0.5 * (cell.xi.0 + cell.xi.1);
            for x in [(cell.x.0, mx), (mx, cell.x.1)] {
                for xi in [(cell.xi.0, mxi), (mxi, cell.xi.1)] {
                    stack.push(PhaseBox { x, xi });
                }
            }
            continue;
        }
        let mut z = (0.5 * (cell.x.0 + cell.x.1), 0.5 * (cell.xi.0 + cell.xi.1));
        for _ in 0..300 {
            let g = (px.eval(z.0, z.1), pxi.eval(z.0, z.1));
            let (h11, h12, h22) = (pxx.eval(z.0, z.1), pxxi.eval(z.0, z.1), pxixi.eval(z.0, z.1));
            let det = h11 * h22 - h12 * h12;
            if det.abs() < 1e-300 {
                break;
            }
            let dz = ((h22 * g.0 - h12 * g.1) / det, (h11 * g.1 - h12 * g.0) / det);
            z = (z.0 - dz.0, z.1 - dz.1);
            if dz.0.abs().max(dz.1.abs()) < 1e-17 {
                break;
            }
        }
        let slack = 2.0 * MIN_WIDTH;
        let inside = z.0 >= cell.x.0 - slack && z.0 <= cell.x.1 + slack && z.1 >= cell.xi.0 - slack && z.1 <= cell.xi.1 + slack;
        let grad = px.eval(z.0, z.1).hypot(pxi.eval(z.0, z.1));
        if inside && grad <= GRADIENT_TOL && !found.iter().any(|f| (f.0 - z.0).hypot(f.1 - z.1) < 1e-5) {
            found.push(z);
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog_entry;

    #[test]
    fn fig1_critical_points() {
        let m = catalog_entry("deg-max").unwrap().model;
        let cps = &m.critical_points;
        assert_eq!(cps.len(), 3, "{cps:?}");
        let s = (2.0f64 / 3.0).sqrt();
        let center = cps.iter().find(|c| c.x0.abs() < 1e-9).unwrap();
        assert_eq!(center.kind, CriticalKind::Max);
        assert_eq!(center.order, 4);
        assert_eq!(center.potential_k(), Some(2));
        assert_eq!(center.critical_energy, 0.0);
        for c in cps.iter().filter(|c| c.x0.abs() > 1e-9) {
            assert!((c.x0.abs() - s).abs() < 1e-12);
            assert_eq!(c.kind, CriticalKind::Min);
            assert_eq!(c.order, 2);
        }
    }

    #[test]
    fn harmonic_minimum() {
        let m = catalog_entry("harmonic").unwrap().model;
        assert_eq!(m.critical_points.len(), 1);
        let c = &m.critical_points[0];
        assert_eq!((c.kind, c.order, c.critical_energy), (CriticalKind::Min, 2, 0.0));
    }

    #[test]
    fn worked_phase_symbol() {
        let m = catalog_entry("pseudo-k3").unwrap().model;
        let at0 = m.critical_points_at(0.0);
        assert_eq!(at0.len(), 1);
        let c = at0[0];
        assert_eq!(c.kind, CriticalKind::NonExtremalHomogeneous);
        assert_eq!(c.order, 3);
        assert_eq!(c.leading_form, LeadingForm::Phase(PhasePolynomial::from_triples(&[(3, 0, 1.0), (0, 3, -1.0)])));
        // the other critical points sit strictly below E_c = 0
        assert_eq!(m.critical_points.len(), 4);
    }

    #[test]
    fn subdivision_matches_split_path() {
        let p = PhasePolynomial::from_triples(&[(3, 0, 1.0), (0, 3, -1.0), (4, 0, 1.0), (0, 4, 1.0)]);
        let search = PhaseBox { x: (-1.3, 1.1), xi: (-1.2, 1.4) };
        let mut pts = subdivide_gradient_roots(&p, search).unwrap();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        assert_eq!(pts.len(), 4, "{pts:?}");
        assert!((pts[0].0 + 0.75).abs() < 1e-9 && pts[0].1.abs() < 1e-5);
        for (x, xi) in pts {
            let (gx, gxi) = p.gradient(x, xi);
            assert!(gx.hypot(gxi) <= 1e-12);
        }
    }

    #[test]
    fn mixed_term_saddle() {
        let m = SymbolModel::phase("xy", PhasePolynomial::from_triples(&[(1, 1, 1.0), (4, 0, 1.0), (0, 4, 1.0)])).unwrap();
        let c = m.critical_points.iter().find(|c| c.x0.abs() < 1e-6 && c.xi0.abs() < 1e-6).unwrap();
        assert_eq!(c.kind, CriticalKind::Saddle);
        assert_eq!(c.order, 2);
    }
}
