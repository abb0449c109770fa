use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Observable;
use crate::eig::{EigenPair, EigenWindow};
use crate::model::PhaseBox;
use crate::quantize::{husimi, weyl_expectations, Boundary, CoherentFrame, Grid1D, Husimi};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantization {
    Weyl,
    AntiWick,
    Both,
}

impl Quantization {
    pub fn name(self) -> &'static str {
        match self {
            Self::Weyl => "weyl",
            Self::AntiWick => "antiwick",
            Self::Both => "both",
        }
    }

    fn weyl(self) -> bool {
        self != Self::AntiWick
    }

    fn antiwick(self) -> bool {
        self != Self::Weyl
    }
}

impl std::str::FromStr for Quantization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weyl" => Ok(Self::Weyl),
            "antiwick" | "anti-wick" => Ok(Self::AntiWick),
            "both" => Ok(Self::Both),
            other => Err(Error::config(format!("unknown quantization '{other}' (weyl, antiwick, both)"))),
        }
    }
}

/// `nu_j(a)` for one eigenpair under both quantizations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MicrolocalRecord {
    pub j: usize,
    pub lambda: f64,
    pub weight: u32,
    pub channel: Option<u32>,
    pub h: f64,
    pub observable: String,
    /// Absent when the Weyl route is unavailable for this grid size or geometry.
    pub nu_weyl: Option<f64>,
    pub nu_antiwick: Option<f64>,
    pub husimi_mass: Option<f64>,
    /// `|nu_weyl - nu_antiwick|` when both are present.
    pub gap: Option<f64>,
}

impl MicrolocalRecord {
    /// Weyl value when available, anti-Wick otherwise.
    pub fn nu(&self) -> f64 {
        self.nu_weyl.or(self.nu_antiwick).unwrap_or(f64::NAN)
    }
}

/// Per-window cache of Husimi densities, reused across observables.
pub struct WindowMeasures<'a> {
    window: &'a EigenWindow,
    quantization: Quantization,
    frame: Option<CoherentFrame>,
    densities: Vec<Husimi>,
}

impl<'a> WindowMeasures<'a> {
    /// `phase_box` is the region covered by the coherent-state lattice; it
    /// is required for anti-Wick values on line grids.
    pub fn new(window: &'a EigenWindow, phase_box: Option<PhaseBox>, quantization: Quantization) -> Result<Self> {
        let mut frame = None;
        let mut densities = Vec::new();
        if quantization.antiwick() && window.grid.boundary() != Boundary::Radial && !window.is_empty() {
            let bx = phase_box.ok_or_else(|| Error::config("anti-Wick values need a phase-space box"))?;
            let f = CoherentFrame::new(window.h, bx)?;
            densities = husimi(&window.vectors(), &f, &window.grid);
            frame = Some(f);
        }
        Ok(Self { window, quantization, frame, densities })
    }

    pub fn window(&self) -> &EigenWindow {
        self.window
    }

    pub fn frame(&self) -> Option<&CoherentFrame> {
        self.frame.as_ref()
    }

    pub fn husimi(&self) -> &[Husimi] {
        &self.densities
    }

    pub fn records(&self, a: &Observable) -> Result<Vec<MicrolocalRecord>> {
        let w = self.window;
        let weyl = if self.quantization.weyl() { weyl_values(&w.vectors(), a, w.h, &w.grid)? } else { None };
        let antiwick: Option<Vec<f64>> = self.frame.as_ref().map(|f| {
            let values: Vec<f64> = f.points().map(|z| a.eval(z.x, z.xi)).collect();
            self.densities.par_iter().map(|q| q.integrate(&values)).collect()
        });
        Ok(w
            .pairs
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let nu_weyl = weyl.as_ref().map(|v| v[j]);
                let nu_antiwick = antiwick.as_ref().map(|v| v[j]);
                record(j, p, w.h, a, nu_weyl, nu_antiwick, self.densities.get(j).map(|q| q.mass))
            })
            .collect())
    }

    /// `sum weight_j nu_j(a)`.
    pub fn upsilon_a(&self, a: &Observable) -> Result<f64> {
        let recs = self.records(a)?;
        Ok(crate::util::pairwise_sum(&recs.iter().map(|r| r.weight as f64 * r.nu()).collect::<Vec<_>>()))
    }
}

fn record(
    j: usize,
    p: &EigenPair,
    h: f64,
    a: &Observable,
    nu_weyl: Option<f64>,
    nu_antiwick: Option<f64>,
    husimi_mass: Option<f64>,
) -> MicrolocalRecord {
    let gap = nu_weyl.zip(nu_antiwick).map(|(x, y)| (x - y).abs());
    MicrolocalRecord {
        j,
        lambda: p.value,
        weight: p.weight,
        channel: p.channel,
        h,
        observable: a.label().to_string(),
        nu_weyl,
        nu_antiwick,
        husimi_mass,
        gap,
    }
}

fn weyl_values(vectors: &[&[num_complex::Complex64]], a: &Observable, h: f64, grid: &Grid1D) -> Result<Option<Vec<f64>>> {
    match weyl_expectations(vectors, a, h, grid) {
        Ok(v) => Ok(Some(v)),
        Err(Error::Unsupported(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Record for a single eigenpair; anti-Wick only when a frame is supplied.
pub fn nu(pair: &EigenPair, j: usize, a: &Observable, h: f64, grid: &Grid1D, frame: Option<&CoherentFrame>) -> Result<MicrolocalRecord> {
    let nu_weyl = weyl_values(&[&pair.vector], a, h, grid)?.map(|v| v[0]);
    let aw = frame.filter(|_| grid.boundary() != Boundary::Radial).map(|f| crate::quantize::antiwick_value(&pair.vector, a, f, grid));
    Ok(record(j, pair, h, a, nu_weyl, aw.map(|v| v.value), aw.map(|v| v.husimi_mass)))
}

/// Weighted eigenvalue count of the window.
pub fn upsilon(window: &EigenWindow) -> f64 {
    window.weighted_count() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::{default_eps_lambda, eigs_in_window};
    use crate::model::catalog_entry;
    use crate::quantize::{build_schrodinger, schrodinger_grid, GridPolicy};

    fn window(name: &str, e_c: f64, h: f64) -> (EigenWindow, PhaseBox) {
        let m = catalog_entry(name).unwrap().model;
        let v = m.potential().unwrap().clone();
        let top = e_c + 5.0 * h;
        let grid = schrodinger_grid(&v, h, top + 1.0, top, &GridPolicy::new(4, 1e-6)).unwrap();
        let op = build_schrodinger(&v, h, grid, 4, top).unwrap();
        let w = eigs_in_window(&op, e_c, 4.5, default_eps_lambda(4.5, h)).unwrap();
        (w, m.sublevel_box(top + 0.5).unwrap().padded(0.2))
    }

    #[test]
    fn unit_observable_and_parity() {
        let (w, bx) = window("quad-max", 0.0, 0.02);
        let m = WindowMeasures::new(&w, Some(bx), Quantization::Both).unwrap();
        for r in m.records(&Observable::constant(1.0)).unwrap() {
            assert!((r.nu_weyl.unwrap() - 1.0).abs() < 1e-8);
            assert!((r.nu_antiwick.unwrap() - 1.0).abs() < 1e-3);
        }
        for r in m.records(&Observable::parse("x").unwrap()).unwrap() {
            assert!(r.nu_weyl.unwrap().abs() < 1e-6, "{r:?}");
        }
        assert_eq!(m.upsilon_a(&Observable::constant(1.0)).unwrap(), upsilon(&w));
    }

    #[test]
    fn antiwick_is_nonnegative_and_linear() {
        let (w, bx) = window("deg-max", 0.0, 0.02);
        let m = WindowMeasures::new(&w, Some(bx), Quantization::Both).unwrap();
        let a = Observable::parse("exp(-x^2 - xi^2)").unwrap();
        let b = Observable::parse("x^2*xi^2").unwrap();
        let c = Observable::parse("3*exp(-x^2 - xi^2) - 2*x^2*xi^2").unwrap();
        let (ra, rb, rc) = (m.records(&a).unwrap(), m.records(&b).unwrap(), m.records(&c).unwrap());
        for ((x, y), z) in ra.iter().zip(&rb).zip(&rc) {
            assert!(x.nu_antiwick.unwrap() >= -1e-10 && y.nu_antiwick.unwrap() >= -1e-10);
            assert!((3.0 * x.nu_weyl.unwrap() - 2.0 * y.nu_weyl.unwrap() - z.nu_weyl.unwrap()).abs() < 1e-10);
            assert!((3.0 * x.nu_antiwick.unwrap() - 2.0 * y.nu_antiwick.unwrap() - z.nu_antiwick.unwrap()).abs() < 1e-10);
            assert!(x.gap.unwrap() < 0.1);
        }
    }

    #[test]
    fn harmonic_ground_state_antiwick_value() {
        // ground state of x^2 + xi^2 is the coherent state at the origin, and
        // its anti-Wick value for exp(-x^2 - xi^2) is 1 / (1 + 2h)
        let h = 0.02;
        let (w, bx) = {
            let m = catalog_entry("harmonic").unwrap().model;
            let v = m.potential().unwrap().clone();
            let grid = schrodinger_grid(&v, h, 1.0, 0.5, &GridPolicy::new(4, 1e-8)).unwrap();
            let op = build_schrodinger(&v, h, grid, 4, 0.5).unwrap();
            (crate::eig::eigs_in_window(&op, h, 0.5, 1e-6).unwrap(), m.sublevel_box(1.0).unwrap().padded(0.5))
        };
        assert_eq!(w.len(), 1);
        let m = WindowMeasures::new(&w, Some(bx), Quantization::Both).unwrap();
        let r = &m.records(&Observable::parse("exp(-x^2 - xi^2)").unwrap()).unwrap()[0];
        assert!((r.nu_antiwick.unwrap() - 1.0 / (1.0 + 2.0 * h)).abs() < 1e-4, "{r:?}");
        // Weyl value: the Wigner function of the ground state is a Gaussian of variance h/2
        assert!((r.nu_weyl.unwrap() - 1.0 / (1.0 + h)).abs() < 1e-4, "{r:?}");
    }
}
