use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::Grid1D;
use crate::microlocal::Observable;
use crate::model::{PhaseBox, PhasePoint};
use crate::{Error, Result};

/// Husimi mass below which the lattice is reported as not covering the state.
pub const MASS_FLOOR: f64 = 0.999;

/// Lattice of coherent states `(pi h)^{-1/4} exp(-(y - X)^2 / 2h + i Xi (y - X) / h)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoherentFrame {
    pub h: f64,
    /// Position standard deviation `sqrt(h/2)`.
    pub width: f64,
    /// Lattice spacing `sqrt(h)/4` in both variables.
    pub spacing: f64,
    x_nodes: Vec<f64>,
    xi_nodes: Vec<f64>,
}

fn nodes(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let a = (lo / step).floor() as i64;
    let b = (hi / step).ceil() as i64;
    (a..=b).map(|k| k as f64 * step).collect()
}

impl CoherentFrame {
    /// Lattice aligned with the origin covering `bx`.
    pub fn new(h: f64, bx: PhaseBox) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config(format!("h must be positive, got {h}")));
        }
        let spacing = h.sqrt() / 4.0;
        Ok(Self {
            h,
            width: (h / 2.0).sqrt(),
            spacing,
            x_nodes: nodes(bx.x.0, bx.x.1, spacing),
            xi_nodes: nodes(bx.xi.0, bx.xi.1, spacing),
        })
    }

    pub fn len(&self) -> usize {
        self.x_nodes.len() * self.xi_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice points in the order used by [`Husimi::weights`].
    pub fn points(&self) -> impl Iterator<Item = PhasePoint> + '_ {
        self.x_nodes.iter().flat_map(move |&x| self.xi_nodes.iter().map(move |&xi| PhasePoint::new(x, xi)))
    }

    /// Truncation radius of each coherent state in position.
    pub fn cutoff(&self) -> f64 {
        6.0 * self.h.sqrt()
    }

    /// Coherent state sampled on the grid, scaled to unit discrete norm
    /// `sum |v_i|^2 = 1` when the continuum state is unit in `L^2`.
    pub fn coherent_state(&self, center: PhasePoint, grid: &Grid1D) -> Vec<Complex64> {
        let h = self.h;
        let norm = (std::f64::consts::PI * h).powf(-0.25) * grid.dx().sqrt();
        grid.points()
            .iter()
            .map(|&y| {
                let d = y - center.x;
                Complex64::from_polar(norm * (-d * d / (2.0 * h)).exp(), center.xi * d / h)
            })
            .collect()
    }
}

/// Husimi density of one state on a frame lattice, pre-multiplied by the
/// cell weight `dX dXi / (2 pi h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Husimi {
    pub weights: Vec<f64>,
    pub mass: f64,
}

impl Husimi {
    pub fn covered(&self) -> bool {
        self.mass >= MASS_FLOOR
    }

    /// `sum a(z) Q(z) dz / (2 pi h)` for symbol values tabulated on the lattice.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        crate::util::pairwise_sum(&self.weights.iter().zip(values).map(|(w, a)| w * a).collect::<Vec<_>>())
    }

    pub fn expectation(&self, obs: &Observable, frame: &CoherentFrame) -> f64 {
        let values: Vec<f64> = frame.points().map(|z| obs.eval(z.x, z.xi)).collect();
        self.integrate(&values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AntiWickValue {
    pub value: f64,
    pub husimi_mass: f64,
    pub covered: bool,
}

/// Husimi densities of unit grid vectors.
///
/// The overlaps are computed on a subsampled grid that still resolves every
/// frequency present in `conj(coherent state) * psi`.
pub fn husimi(vectors: &[&[Complex64]], frame: &CoherentFrame, grid: &Grid1D) -> Vec<Husimi> {
    let h = frame.h;
    let dx = grid.dx();
    let xi_reach = frame.xi_nodes.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let bandwidth = 2.0 * xi_reach / h + 8.5 / h.sqrt();
    let target = 0.8 * std::f64::consts::TAU / bandwidth;
    let stride = ((target / dx).floor() as usize).max(1);
    let sub_dx = stride as f64 * dx;
    let cell = frame.spacing * frame.spacing / (std::f64::consts::TAU * h);
    let amp = (std::f64::consts::PI * h).powf(-0.25) * sub_dx / dx.sqrt();
    let n_xi = frame.xi_nodes.len();
    let nv = vectors.len();
    let xi0 = frame.xi_nodes.first().copied().unwrap_or(0.0);
    let dxi = frame.spacing;
    let cutoff = frame.cutoff();

    let rows: Vec<Vec<f64>> = frame
        .x_nodes
        .par_iter()
        .map(|&x_c| {
            let mut acc = vec![Complex64::new(0.0, 0.0); n_xi * nv];
            let first = ((x_c - cutoff - grid.point(0)) / dx).ceil().max(0.0) as usize;
            let first = first.div_ceil(stride) * stride;
            let mut i = first;
            while i < grid.len() {
                let d = grid.point(i) - x_c;
                if d > cutoff {
                    break;
                }
                let g = amp * (-d * d / (2.0 * h)).exp();
                let mut t = Complex64::from_polar(g, -xi0 * d / h);
                let w = Complex64::from_polar(1.0, -dxi * d / h);
                for j in 0..n_xi {
                    let slot = &mut acc[j * nv..(j + 1) * nv];
                    for (a, v) in slot.iter_mut().zip(vectors) {
                        *a += t * v[i];
                    }
                    t *= w;
                }
                i += stride;
            }
            acc.iter().map(|z| z.norm_sqr() * cell).collect()
        })
        .collect();

    (0..nv)
        .map(|k| {
            let weights: Vec<f64> = rows.iter().flat_map(|row| (0..n_xi).map(move |j| row[j * nv + k])).collect();
            let mass = crate::util::pairwise_sum(&weights);
            Husimi { weights, mass }
        })
        .collect()
}

/// Anti-Wick expectation `<Op^AW(a) psi, psi>` of a unit grid vector.
pub fn antiwick_value(psi: &[Complex64], obs: &Observable, frame: &CoherentFrame, grid: &Grid1D) -> AntiWickValue {
    let q = husimi(&[psi], frame, grid).pop().expect("one vector in, one density out");
    AntiWickValue { value: q.expectation(obs, frame), husimi_mass: q.mass, covered: q.covered() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_and_grid(h: f64) -> (CoherentFrame, Grid1D) {
        let bx = PhaseBox { x: (-1.5, 1.5), xi: (-1.5, 1.5) };
        (CoherentFrame::new(h, bx).unwrap(), Grid1D::dirichlet(-2.5, 2.5, 4000).unwrap())
    }

    #[test]
    fn coherent_states_are_unit() {
        let (frame, grid) = frame_and_grid(0.01);
        for z in [PhasePoint::new(0.0, 0.0), PhasePoint::new(0.3, -0.7)] {
            let v = frame.coherent_state(z, &grid);
            let norm: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-6, "{norm}");
        }
    }

    #[test]
    fn unit_symbol_gives_total_mass() {
        let (frame, grid) = frame_and_grid(0.01);
        let v = frame.coherent_state(PhasePoint::new(0.2, 0.4), &grid);
        let r = antiwick_value(&v, &Observable::constant(1.0), &frame, &grid);
        assert!((r.value - 1.0).abs() < 1e-3 && r.covered, "{r:?}");
    }

    #[test]
    fn gaussian_overlap_oracle() {
        // Q(z) = exp(-|z|^2 / 2h) for the coherent state at the origin, so
        // the anti-Wick value of exp(-x^2 - xi^2) is 1 / (1 + 2h).
        let obs = Observable::parse("exp(-x^2 - xi^2)").unwrap();
        let mut last = f64::INFINITY;
        for h in [0.005, 0.01, 0.02, 0.04] {
            let (frame, grid) = frame_and_grid(h);
            let v = frame.coherent_state(PhasePoint::new(0.0, 0.0), &grid);
            let r = antiwick_value(&v, &obs, &frame, &grid);
            assert!((r.value - 1.0 / (1.0 + 2.0 * h)).abs() < 1e-6, "h={h}: {}", r.value);
            assert!(r.value < last && r.value > 0.0 && r.value < 1.0);
            last = r.value;
        }
    }

    #[test]
    fn lattice_not_covering_is_flagged() {
        let h = 0.01;
        let frame = CoherentFrame::new(h, PhaseBox { x: (-0.2, 0.2), xi: (-0.2, 0.2) }).unwrap();
        let grid = Grid1D::dirichlet(-2.5, 2.5, 4000).unwrap();
        let v = frame.coherent_state(PhasePoint::new(1.0, 0.0), &grid);
        let r = antiwick_value(&v, &Observable::constant(1.0), &frame, &grid);
        assert!(!r.covered);
    }
}
