use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Zero values at `x_min` and `x_max`; interior nodes only.
    Dirichlet,
    /// Period `x_max - x_min`, nodes `x_min + i dx`.
    Periodic,
    /// Half-line `(0, x_max]` with cell centres `(i + 1/2) dx`.
    Radial,
}

/// Uniform one-dimensional grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
    boundary: Boundary,
}

pub const MIN_POINTS: usize = 16;

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::config(format!("grid interval [{x_min}, {x_max}] is empty or not finite")));
        }
        if n < MIN_POINTS {
            return Err(Error::config(format!("grid needs at least {MIN_POINTS} points, got {n}")));
        }
        if boundary == Boundary::Periodic && !n.is_power_of_two() {
            return Err(Error::config(format!("periodic grid size {n} is not a power of two")));
        }
        if boundary == Boundary::Radial && x_min != 0.0 {
            return Err(Error::config("radial grid must start at r = 0"));
        }
        Ok(Self { x_min, x_max, n, boundary })
    }

    pub fn dirichlet(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::new(x_min, x_max, n, Boundary::Dirichlet)
    }

    pub fn periodic(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        Self::new(x_min, x_max, n, Boundary::Periodic)
    }

    pub fn radial(r_max: f64, n: usize) -> Result<Self> {
        Self::new(0.0, r_max, n, Boundary::Radial)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => self.length() / (self.n + 1) as f64,
            Boundary::Periodic | Boundary::Radial => self.length() / self.n as f64,
        }
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        let dx = self.dx();
        match self.boundary {
            Boundary::Dirichlet => self.x_min + (i + 1) as f64 * dx,
            Boundary::Periodic => self.x_min + i as f64 * dx,
            Boundary::Radial => (i as f64 + 0.5) * dx,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    /// Number of momentum samples used by Fourier representations: `N` on a
    /// periodic grid, `2N` otherwise so that offsets `i - j` never wrap.
    pub fn frequency_count(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.n,
            _ => 2 * self.n,
        }
    }

    /// Momenta `xi_k = 2 pi h k / (M dx)` in FFT order.
    pub fn momenta(&self, h: f64) -> Vec<f64> {
        let m = self.frequency_count();
        let step = std::f64::consts::TAU * h / (m as f64 * self.dx());
        (0..m)
            .map(|k| {
                let kk = if k < m / 2 { k as f64 } else { k as f64 - m as f64 };
                step * kk
            })
            .collect()
    }

    /// Largest representable momentum `pi h / dx`.
    pub fn momentum_cutoff(&self, h: f64) -> f64 {
        std::f64::consts::PI * h / self.dx()
    }
}

/// Largest admissible spacing: 16 points per local de Broglie wavelength.
pub fn max_spacing(h: f64, kinetic: f64) -> f64 {
    std::f64::consts::TAU * h / (16.0 * kinetic.max(1.0).sqrt())
}

/// Points per wavelength that keep the finite-difference dispersion error of
/// a kinetic energy `kinetic` below `tolerance`.
pub fn points_per_wavelength(fd_order: u32, kinetic: f64, tolerance: f64) -> f64 {
    let t = kinetic.max(1.0);
    let tol = tolerance.max(f64::EPSILON);
    let ppw = match fd_order {
        2 => std::f64::consts::TAU * (t / (12.0 * tol)).sqrt(),
        _ => std::f64::consts::TAU * (t / (90.0 * tol)).powf(0.25),
    };
    ppw.max(16.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacings() {
        let d = Grid1D::dirichlet(0.0, 1.0, 99).unwrap();
        assert!((d.dx() - 0.01).abs() < 1e-15);
        assert!((d.point(0) - 0.01).abs() < 1e-15);
        assert!((d.point(98) - 0.99).abs() < 1e-12);
        let p = Grid1D::periodic(-1.0, 1.0, 64).unwrap();
        assert!((p.dx() - 2.0 / 64.0).abs() < 1e-15);
        assert_eq!(p.point(0), -1.0);
        let r = Grid1D::radial(1.0, 100).unwrap();
        assert!((r.point(0) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid1D::periodic(0.0, 1.0, 48).is_err());
        assert!(Grid1D::dirichlet(0.0, 1.0, 8).is_err());
        assert!(Grid1D::dirichlet(1.0, 0.0, 32).is_err());
    }

    #[test]
    fn momenta_are_symmetric_fft_order() {
        let g = Grid1D::periodic(0.0, 1.0, 16).unwrap();
        let m = g.momenta(1.0);
        assert_eq!(m[0], 0.0);
        assert!((m[1] - std::f64::consts::TAU).abs() < 1e-12);
        assert!((m[8] + 8.0 * std::f64::consts::TAU).abs() < 1e-12);
    }
}
