//! Classical symbols, their critical points and the modelling hypotheses.
//!
//! Symbols are polynomials so that derivatives, Taylor forms and the order
//! of a degenerate critical point are exact.

mod catalog;
mod critical;
mod hypotheses;
pub mod phase;
pub mod poly;

use serde::{Deserialize, Serialize};

pub use catalog::{catalog, catalog_entry, model_from_spec, CatalogEntry};
pub use critical::{find_critical_points, CriticalKind, CriticalPoint, LeadingForm};
pub use hypotheses::{check_hypotheses, default_eps0, HypothesisReport, Violation};
pub use phase::{PhasePolynomial, PhaseTerm};
pub use poly::Polynomial1D;

use crate::{Error, Result};

/// A point `(x, xi)` of the phase plane.
///
/// For radial models `x` is the radius `|x|` and `xi` the momentum norm `|xi|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub xi: f64,
}

impl PhasePoint {
    pub const fn new(x: f64, xi: f64) -> Self {
        Self { x, xi }
    }
}

/// Axis-aligned phase-space box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseBox {
    pub x: (f64, f64),
    pub xi: (f64, f64),
}

impl PhaseBox {
    pub fn contains(&self, z: PhasePoint) -> bool {
        z.x >= self.x.0 && z.x <= self.x.1 && z.xi >= self.xi.0 && z.xi <= self.xi.1
    }

    pub fn padded(&self, fraction: f64) -> Self {
        let pad = |(a, b): (f64, f64)| {
            let c = 0.5 * (a + b);
            let w = 0.5 * (b - a) * (1.0 + fraction);
            (c - w, c + w)
        };
        Self { x: pad(self.x), xi: pad(self.xi) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `xi^2 + V(x)` on the line.
    Schrodinger1d { potential: Polynomial1D },
    /// `|xi|^2 + V(|x|)` on the plane; `potential` is a polynomial in `r`.
    Radial2d { potential: Polynomial1D },
    /// General polynomial symbol `p(x, xi)` on the line.
    Phase1d { symbol: PhasePolynomial },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolModel {
    pub name: String,
    pub family: Family,
    pub critical_points: Vec<CriticalPoint>,
}

impl SymbolModel {
    /// Build a model and locate its critical points in the default search box.
    pub fn new(name: impl Into<String>, family: Family) -> Result<Self> {
        let mut model = Self { name: name.into(), family, critical_points: Vec::new() };
        let search = model.default_search_box();
        model.critical_points = find_critical_points(&model, search)?;
        Ok(model)
    }

    pub fn schrodinger(name: impl Into<String>, potential: Polynomial1D) -> Result<Self> {
        Self::new(name, Family::Schrodinger1d { potential })
    }

    pub fn radial(name: impl Into<String>, potential: Polynomial1D) -> Result<Self> {
        Self::new(name, Family::Radial2d { potential })
    }

    pub fn phase(name: impl Into<String>, symbol: PhasePolynomial) -> Result<Self> {
        Self::new(name, Family::Phase1d { symbol })
    }

    pub fn dimension(&self) -> usize {
        match self.family {
            Family::Radial2d { .. } => 2,
            _ => 1,
        }
    }

    /// The potential of the Schrödinger and radial families.
    pub fn potential(&self) -> Option<&Polynomial1D> {
        match &self.family {
            Family::Schrodinger1d { potential } | Family::Radial2d { potential } => Some(potential),
            Family::Phase1d { .. } => None,
        }
    }

    /// The full symbol as a phase polynomial (radial models use `(r, |xi|)`).
    pub fn symbol(&self) -> PhasePolynomial {
        match &self.family {
            Family::Schrodinger1d { potential } | Family::Radial2d { potential } => {
                PhasePolynomial::split(potential, &Polynomial1D::monomial(2, 1.0))
            }
            Family::Phase1d { symbol } => symbol.clone(),
        }
    }

    /// Critical points whose critical value is `energy`.
    pub fn critical_points_at(&self, energy: f64) -> Vec<&CriticalPoint> {
        self.critical_points
            .iter()
            .filter(|c| (c.critical_energy - energy).abs() <= 1e-10 * (1.0 + energy.abs()))
            .collect()
    }

    fn default_search_box(&self) -> PhaseBox {
        match &self.family {
            Family::Schrodinger1d { potential } => {
                let b = cauchy_bound(&potential.derivative());
                PhaseBox { x: (-b, b), xi: (0.0, 0.0) }
            }
            Family::Radial2d { potential } => {
                let b = cauchy_bound(&potential.derivative());
                PhaseBox { x: (0.0, b), xi: (0.0, 0.0) }
            }
            Family::Phase1d { symbol } => match symbol.as_split() {
                Some((f, g)) => {
                    let bx = cauchy_bound(&f.derivative());
                    let bxi = cauchy_bound(&g.derivative());
                    PhaseBox { x: (-bx, bx), xi: (-bxi, bxi) }
                }
                None => PhaseBox { x: (-4.0, 4.0), xi: (-4.0, 4.0) },
            },
        }
    }

    /// Bounding box of the sublevel set `{p <= energy}`.
    ///
    /// Errors with a hypothesis violation when the sublevel set is unbounded.
    pub fn sublevel_box(&self, energy: f64) -> Result<PhaseBox> {
        match &self.family {
            Family::Schrodinger1d { potential } | Family::Radial2d { potential } => {
                let radial = matches!(self.family, Family::Radial2d { .. });
                let (lo, hi) = sublevel_interval(potential, energy, radial)?;
                let vmin = global_min(potential, radial)?;
                let pmax = (energy - vmin).max(0.0).sqrt();
                Ok(PhaseBox { x: (lo, hi), xi: (-pmax, pmax) })
            }
            Family::Phase1d { symbol } => match symbol.as_split() {
                Some((f, g)) => {
                    let fmin = global_min(&f, false)?;
                    let gmin = global_min(&g, false)?;
                    let x = sublevel_interval(&f, energy - gmin, false)?;
                    let xi = sublevel_interval(&g, energy - fmin, false)?;
                    Ok(PhaseBox { x, xi })
                }
                None => sampled_sublevel_box(symbol, energy),
            },
        }
    }

    /// Minimum of the symbol over phase space.
    pub fn symbol_min(&self) -> Result<f64> {
        match &self.family {
            Family::Schrodinger1d { potential } => global_min(potential, false),
            Family::Radial2d { potential } => global_min(potential, true),
            Family::Phase1d { symbol } => match symbol.as_split() {
                Some((f, g)) => Ok(global_min(&f, false)? + global_min(&g, false)?),
                None => {
                    let m = self
                        .critical_points
                        .iter()
                        .map(|c| c.critical_energy)
                        .fold(f64::INFINITY, f64::min);
                    if m.is_finite() {
                        Ok(m)
                    } else {
                        Err(Error::Hypothesis("symbol has no critical point; not confining".into()))
                    }
                }
            },
        }
    }
}

/// Exact value of the symbol at a phase point.
pub fn eval_symbol(model: &SymbolModel, z: PhasePoint) -> f64 {
    match &model.family {
        Family::Schrodinger1d { potential } => z.xi * z.xi + potential.eval(z.x),
        Family::Radial2d { potential } => z.xi * z.xi + potential.eval(z.x.abs()),
        Family::Phase1d { symbol } => symbol.eval(z.x, z.xi),
    }
}

/// Cauchy bound: every real root of `p` lies in `[-b, b]`.
pub fn cauchy_bound(p: &Polynomial1D) -> f64 {
    let c = p.coefficients();
    let lead = p.leading_coefficient();
    if p.degree() == 0 || lead == 0.0 {
        return 1.0;
    }
    1.0 + c[..c.len() - 1].iter().map(|a| (a / lead).abs()).fold(0.0, f64::max)
}

/// Global minimum of a polynomial over the line (or the half-line for radial).
pub(crate) fn global_min(p: &Polynomial1D, half_line: bool) -> Result<f64> {
    if p.degree() == 0 {
        return Ok(p.eval(0.0));
    }
    if p.leading_coefficient() < 0.0 || (!half_line && p.degree() % 2 == 1) {
        return Err(Error::Hypothesis(format!("polynomial {p} is unbounded below")));
    }
    let b = cauchy_bound(&p.derivative()).max(1.0);
    let lo = if half_line { 0.0 } else { -b };
    let mut m = p.eval(lo);
    if p.degree() >= 2 {
        for c in p.derivative().real_roots(lo, b)? {
            m = m.min(p.eval(c));
        }
    }
    Ok(m)
}

/// Outermost interval containing `{p <= level}`.
pub(crate) fn sublevel_interval(p: &Polynomial1D, level: f64, half_line: bool) -> Result<(f64, f64)> {
    if p.degree() == 0 || p.leading_coefficient() < 0.0 || (!half_line && p.degree() % 2 == 1) {
        return Err(Error::Hypothesis(format!("sublevel set of {p} at {level} is unbounded")));
    }
    let q = p.shift_constant(-level);
    let b = cauchy_bound(&q) + 1.0;
    let roots = q.real_roots(if half_line { 0.0 } else { -b }, b)?;
    match (roots.first(), roots.last()) {
        (Some(&lo), Some(&hi)) => Ok((if half_line { 0.0 } else { lo }, hi)),
        _ if q.eval(0.0) <= 0.0 => Err(Error::numerical("sublevel interval without boundary roots")),
        _ => Err(Error::config(format!("sublevel set of {p} at {level} is empty"))),
    }
}

fn sampled_sublevel_box(symbol: &PhasePolynomial, energy: f64) -> Result<PhaseBox> {
    const B: f64 = 8.0;
    const M: usize = 512;
    let step = 2.0 * B / M as f64;
    let mut bx = (f64::INFINITY, f64::NEG_INFINITY);
    let mut bxi = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=M {
        let x = -B + i as f64 * step;
        for j in 0..=M {
            let xi = -B + j as f64 * step;
            if symbol.eval(x, xi) <= energy {
                if i == 0 || j == 0 || i == M || j == M {
                    return Err(Error::Hypothesis(format!(
                        "sublevel set {{p <= {energy}}} reaches the sampling boundary"
                    )));
                }
                bx = (bx.0.min(x), bx.1.max(x));
                bxi = (bxi.0.min(xi), bxi.1.max(xi));
            }
        }
    }
    if !bx.0.is_finite() {
        return Err(Error::config(format!("sublevel set at {energy} is empty")));
    }
    Ok(PhaseBox { x: (bx.0 - step, bx.1 + step), xi: (bxi.0 - step, bxi.1 + step) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_symbol_examples() {
        let h = catalog_entry("harmonic").unwrap().model;
        assert_eq!(eval_symbol(&h, PhasePoint::new(0.0, 0.0)), 0.0);
        let fig1 = catalog_entry("deg-max").unwrap().model;
        assert_eq!(eval_symbol(&fig1, PhasePoint::new(1.0, 0.0)), 0.0);
        assert_eq!(eval_symbol(&fig1, PhasePoint::new(-1.0, 0.0)), 0.0);
        let p3 = catalog_entry("pseudo-k3").unwrap().model;
        assert_eq!(eval_symbol(&p3, PhasePoint::new(1.0, 1.0)), 2.0);
    }

    #[test]
    fn sublevel_box_of_harmonic() {
        let h = catalog_entry("harmonic").unwrap().model;
        let b = h.sublevel_box(4.0).unwrap();
        assert!((b.x.0 + 2.0).abs() < 1e-12 && (b.x.1 - 2.0).abs() < 1e-12);
        assert!((b.xi.1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_potential_rejected() {
        let m = SymbolModel::schrodinger("w", Polynomial1D::new(vec![-1.0, 0.0, 2.0, 0.0, -1.0])).unwrap();
        assert!(matches!(m.sublevel_box(0.0), Err(Error::Hypothesis(_))));
    }
}
