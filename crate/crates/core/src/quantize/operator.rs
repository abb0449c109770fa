use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::grid::{max_spacing, points_per_wavelength, Boundary, Grid1D};
use crate::model::{global_min, sublevel_interval, Polynomial1D};
use crate::{Error, Result};

/// Real symmetric band matrix; `bands[k][i]` is entry `(i, i + k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymBanded {
    bands: Vec<Vec<f64>>,
}

impl SymBanded {
    pub fn new(bands: Vec<Vec<f64>>) -> Result<Self> {
        let n = bands.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(Error::config("band matrix needs a nonempty diagonal"));
        }
        for (k, b) in bands.iter().enumerate() {
            if b.len() + k != n {
                return Err(Error::config(format!("band {k} has length {}, expected {}", b.len(), n - k)));
            }
        }
        Ok(Self { bands })
    }

    pub fn tridiagonal(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        Self::new(vec![diag, off])
    }

    pub fn dim(&self) -> usize {
        self.bands[0].len()
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    pub fn diag(&self) -> &[f64] {
        &self.bands[0]
    }

    pub fn band(&self, k: usize) -> &[f64] {
        &self.bands[k]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        let k = b - a;
        if k < self.bands.len() {
            self.bands[k][a]
        } else {
            0.0
        }
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            for k in 1..self.bands.len() {
                if i + k < n {
                    r += self.bands[k][i].abs();
                }
                if i >= k {
                    r += self.bands[k][i - k].abs();
                }
            }
            lo = lo.min(self.bands[0][i] - r);
            hi = hi.max(self.bands[0][i] + r);
        }
        (lo, hi)
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.dim();
        let mut out: Vec<Complex64> = v.iter().zip(&self.bands[0]).map(|(x, d)| x * d).collect();
        for (k, band) in self.bands.iter().enumerate().skip(1) {
            for i in 0..n - k {
                out[i] += v[i + k] * band[i];
                out[i + k] += v[i] * band[i];
            }
        }
        out
    }
}

/// Dense complex Hermitian matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// `max |A - A*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.n;
        let mut d: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                d = d.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        d
    }

    /// Replace `A` by `(A + A*) / 2`; returns the defect removed.
    pub fn symmetrize(&mut self) -> f64 {
        let defect = self.hermiticity_defect();
        let n = self.n;
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (self.get(i, j) + self.get(j, i).conj());
                self.set(i, j, v);
                self.set(j, i, v.conj());
            }
        }
        defect
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.data.chunks_exact(self.n).map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }
}

#[derive(Clone, Debug)]
pub enum OperatorForm {
    /// Real symmetric band matrix (tridiagonal for bandwidth 1).
    Banded(SymBanded),
    /// `diag(multiplier_x) + IDFT diag(multiplier_xi) DFT` on a periodic grid.
    Split { multiplier_x: Vec<f64>, multiplier_xi: Vec<f64> },
    Dense(HermitianMatrix),
}

/// Self-adjoint grid realization of a semiclassical operator.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub form: OperatorForm,
    pub h: f64,
    pub grid: Grid1D,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        match &self.form {
            OperatorForm::Banded(b) => b.apply(v),
            OperatorForm::Dense(m) => m.apply(v),
            OperatorForm::Split { multiplier_x, multiplier_xi } => {
                let n = v.len();
                let mut planner = FftPlanner::new();
                let mut w = v.to_vec();
                planner.plan_fft_forward(n).process(&mut w);
                for (c, g) in w.iter_mut().zip(multiplier_xi) {
                    *c *= g / n as f64;
                }
                planner.plan_fft_inverse(n).process(&mut w);
                w.iter().zip(v).zip(multiplier_x).map(|((a, b), f)| a + b * f).collect()
            }
        }
    }

    /// Dense Hermitian matrix of the operator.
    pub fn to_dense(&self) -> HermitianMatrix {
        let n = self.dim();
        match &self.form {
            OperatorForm::Dense(m) => m.clone(),
            OperatorForm::Banded(b) => HermitianMatrix::from_fn(n, |i, j| Complex64::new(b.get(i, j), 0.0)),
            OperatorForm::Split { multiplier_x, multiplier_xi } => {
                let row = circulant_row(multiplier_xi);
                let mut m = HermitianMatrix::from_fn(n, |i, j| row[(i + n - j) % n]);
                for (i, f) in multiplier_x.iter().enumerate() {
                    let d = m.get(i, i);
                    m.set(i, i, d + f);
                }
                m.symmetrize();
                m
            }
        }
    }
}

/// `c(d) = (1/N) sum_k g_k exp(2 pi i k d / N)`.
pub(crate) fn circulant_row(multiplier: &[f64]) -> Vec<Complex64> {
    let n = multiplier.len();
    let mut c: Vec<Complex64> = multiplier.iter().map(|&g| Complex64::new(g / n as f64, 0.0)).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut c);
    c
}

/// Finite-difference realization of `-h^2 d^2/dx^2 + V` with Dirichlet ends.
///
/// `window_top` is the highest energy the caller will resolve; the grid must
/// keep 16 points per local wavelength up to that energy.
pub fn build_schrodinger(v: &Polynomial1D, h: f64, grid: Grid1D, fd_order: u32, window_top: f64) -> Result<DiscreteOperator> {
    if grid.boundary() != Boundary::Dirichlet {
        return Err(Error::config("Schrodinger operators use a Dirichlet grid"));
    }
    check_h(h)?;
    check_resolution(v, h, &grid, window_top, false)?;
    let dx = grid.dx();
    let s = h * h / (dx * dx);
    let n = grid.len();
    let pot: Vec<f64> = grid.points().iter().map(|&x| v.eval(x)).collect();
    let bands = match fd_order {
        2 => vec![pot.iter().map(|p| 2.0 * s + p).collect(), vec![-s; n - 1]],
        4 => vec![
            pot.iter().map(|p| 2.5 * s + p).collect(),
            vec![-4.0 / 3.0 * s; n - 1],
            vec![s / 12.0; n - 2],
        ],
        other => return Err(Error::config(format!("fd_order must be 2 or 4, got {other}"))),
    };
    Ok(DiscreteOperator { form: OperatorForm::Banded(SymBanded::new(bands)?), h, grid })
}

/// Angular-momentum channel `m` of the 2D radial operator `-h^2 Delta + V(r)`.
///
/// Finite volumes on cell centres `r_i`, symmetrized by the weight `sqrt(r)`,
/// so the unknowns are `u = sqrt(r) psi` and `sum |u_i|^2` is the probability.
pub fn build_radial_channel(v: &Polynomial1D, h: f64, grid: Grid1D, m: u32, window_top: f64) -> Result<DiscreteOperator> {
    if grid.boundary() != Boundary::Radial {
        return Err(Error::config("radial channels use a radial grid"));
    }
    check_h(h)?;
    check_resolution(v, h, &grid, window_top, true)?;
    let dx = grid.dx();
    let s = h * h / (dx * dx);
    let n = grid.len();
    let m2 = (m as f64) * (m as f64);
    let diag = (0..n)
        .map(|i| {
            let r = grid.point(i);
            2.0 * s + v.eval(r) + h * h * m2 / (r * r)
        })
        .collect();
    let off = (0..n - 1)
        .map(|i| {
            let (a, b) = (grid.point(i), grid.point(i + 1));
            -s * (a + 0.5 * dx) / (a * b).sqrt()
        })
        .collect();
    Ok(DiscreteOperator { form: OperatorForm::Banded(SymBanded::tridiagonal(diag, off)?), h, grid })
}

/// Weyl quantization `f(x) + g(hD)` of a split symbol on a periodic grid.
///
/// `level` is the highest energy whose classical momenta must be representable.
pub fn build_split(f: &Polynomial1D, g: &Polynomial1D, h: f64, grid: Grid1D, level: f64) -> Result<DiscreteOperator> {
    if grid.boundary() != Boundary::Periodic {
        return Err(Error::config("split operators use a periodic grid"));
    }
    check_h(h)?;
    if !g.is_zero() && g.degree() >= 1 {
        let reach = momentum_reach(f, g, level)?;
        if reach > grid.momentum_cutoff(h) {
            return Err(Error::config(format!(
                "classical momentum {reach} at energy {level} exceeds the grid cutoff {}",
                grid.momentum_cutoff(h)
            )));
        }
    }
    let multiplier_x = grid.points().iter().map(|&x| f.eval(x)).collect();
    let multiplier_xi = grid.momenta(h).iter().map(|&k| g.eval(k)).collect();
    Ok(DiscreteOperator { form: OperatorForm::Split { multiplier_x, multiplier_xi }, h, grid })
}

fn momentum_reach(f: &Polynomial1D, g: &Polynomial1D, level: f64) -> Result<f64> {
    let fmin = global_min(f, false)?;
    let (a, b) = sublevel_interval(g, level - fmin, false)?;
    Ok(a.abs().max(b.abs()))
}

fn check_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("h must be positive and finite, got {h}")))
    }
}

fn check_resolution(v: &Polynomial1D, h: f64, grid: &Grid1D, window_top: f64, radial: bool) -> Result<()> {
    let vmin = global_min(v, radial)?;
    let limit = max_spacing(h, window_top - vmin);
    if grid.dx() > limit * (1.0 + 1e-12) {
        return Err(Error::config(format!(
            "grid spacing {} exceeds the resolution limit {limit} (16 points per wavelength)",
            grid.dx()
        )));
    }
    Ok(())
}

/// Accuracy-driven grid choice for Schrödinger-type operators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridPolicy {
    pub fd_order: u32,
    /// Target absolute eigenvalue error from the finite-difference dispersion.
    pub tolerance: f64,
    /// Fractional padding of the confinement interval.
    pub padding: f64,
    /// Explicit point count overriding the accuracy rule.
    pub points: Option<usize>,
    /// Explicit box overriding the confinement interval.
    pub interval: Option<(f64, f64)>,
}

impl GridPolicy {
    pub fn new(fd_order: u32, tolerance: f64) -> Self {
        Self { fd_order, tolerance, padding: 0.25, points: None, interval: None }
    }
}

/// Dirichlet grid covering `{V <= level}` padded by the policy, resolving
/// energies up to `window_top`.
pub fn schrodinger_grid(v: &Polynomial1D, h: f64, level: f64, window_top: f64, policy: &GridPolicy) -> Result<Grid1D> {
    let (a, b) = match policy.interval {
        Some(i) => i,
        None => {
            let (lo, hi) = sublevel_interval(v, level, false)?;
            let c = 0.5 * (lo + hi);
            let w = 0.5 * (hi - lo) * (1.0 + policy.padding);
            (c - w, c + w)
        }
    };
    let kinetic = window_top - global_min(v, false)?;
    let n = match policy.points {
        Some(n) => n,
        None => {
            let dx = std::f64::consts::TAU * h
                / (points_per_wavelength(policy.fd_order, kinetic, policy.tolerance) * kinetic.max(1.0).sqrt());
            (((b - a) / dx).ceil() as usize).saturating_sub(1).max(super::grid::MIN_POINTS)
        }
    };
    Grid1D::dirichlet(a, b, n)
}

/// Radial grid on `(0, R]` with `R` the padded radius of `{V <= level}`.
pub fn radial_grid(v: &Polynomial1D, h: f64, level: f64, window_top: f64, policy: &GridPolicy) -> Result<Grid1D> {
    let r_max = match policy.interval {
        Some((_, b)) => b,
        None => sublevel_interval(v, level, true)?.1 * (1.0 + policy.padding),
    };
    let kinetic = window_top - global_min(v, true)?;
    let n = match policy.points {
        Some(n) => n,
        None => {
            let dx = std::f64::consts::TAU * h
                / (points_per_wavelength(2, kinetic, policy.tolerance) * kinetic.max(1.0).sqrt());
            ((r_max / dx).ceil() as usize).max(super::grid::MIN_POINTS)
        }
    };
    Grid1D::radial(r_max, n)
}

/// Periodic grid for `f(x) + g(xi)`: the x-range of `{p <= level}` padded by
/// `padding`, and the smallest power of two whose momentum cutoff covers the
/// padded momentum range.
pub fn split_grid(f: &Polynomial1D, g: &Polynomial1D, h: f64, level: f64, padding: f64) -> Result<Grid1D> {
    let gmin = global_min(g, false)?;
    let (lo, hi) = sublevel_interval(f, level - gmin, false)?;
    let c = 0.5 * (lo + hi);
    let w = 0.5 * (hi - lo) * (1.0 + padding);
    let length = 2.0 * w;
    let reach = momentum_reach(f, g, level)? * (1.0 + padding);
    let mut n = super::grid::MIN_POINTS;
    while std::f64::consts::PI * h * n as f64 / length < reach {
        n *= 2;
    }
    Grid1D::periodic(c - w, c + w, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> Polynomial1D {
        Polynomial1D::new(vec![0.0, 0.0, 1.0])
    }

    #[test]
    fn schrodinger_diagonal() {
        let g = Grid1D::dirichlet(-4.0, 4.0, 999).unwrap();
        let op = build_schrodinger(&harmonic(), 0.05, g, 2, 1.0).unwrap();
        let OperatorForm::Banded(b) = &op.form else { panic!() };
        let s = 0.05f64.powi(2) / g.dx().powi(2);
        for i in [0, 500, 998] {
            assert!((b.diag()[i] - (2.0 * s + g.point(i).powi(2))).abs() < 1e-12);
        }
    }

    #[test]
    fn resolution_policy_rejects_coarse_grid() {
        let g = Grid1D::dirichlet(-4.0, 4.0, 99).unwrap();
        assert!(matches!(build_schrodinger(&harmonic(), 0.01, g, 2, 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn split_without_momentum_part_is_diagonal() {
        let f = Polynomial1D::new(vec![0.0, 0.0, 0.0, 1.0, 1.0]);
        let g = Polynomial1D::zero();
        let grid = Grid1D::periodic(-2.0, 2.0, 32).unwrap();
        let op = build_split(&f, &g, 0.1, grid, 1.0).unwrap();
        let m = op.to_dense();
        for i in 0..32 {
            for j in 0..32 {
                let expect = if i == j { f.eval(grid.point(i)) } else { 0.0 };
                assert!((m.get(i, j) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn split_apply_matches_dense() {
        let f = Polynomial1D::new(vec![0.0, 0.0, 0.0, 1.0, 1.0]);
        let g = Polynomial1D::new(vec![0.0, 0.0, 0.0, -1.0, 1.0]);
        let grid = split_grid(&f, &g, 0.05, 1.0, 0.5).unwrap();
        let op = build_split(&f, &g, 0.05, grid, 1.0).unwrap();
        let dense = op.to_dense();
        assert!(dense.hermiticity_defect() <= 1e-12);
        let v: Vec<Complex64> = (0..grid.len()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let a = op.apply(&v);
        let b = dense.apply(&v);
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn aliasing_guard() {
        let f = Polynomial1D::new(vec![0.0, 0.0, 1.0]);
        let g = Polynomial1D::new(vec![0.0, 0.0, 1.0]);
        let grid = Grid1D::periodic(-3.0, 3.0, 16).unwrap();
        assert!(build_split(&f, &g, 0.01, grid, 1.0).is_err());
    }
}
