use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{Boundary, Grid1D};
use super::operator::{DiscreteOperator, HermitianMatrix, OperatorForm};
use crate::cli::expr::Routing;
use crate::microlocal::Observable;
use crate::{Error, Result};

/// Largest grid for which general (non-split) Weyl quantities are formed.
pub const DENSE_LIMIT: usize = 4096;

const HERMITICITY_ABORT: f64 = 1e-8;

fn check_supported(obs: &Observable, grid: &Grid1D) -> Result<()> {
    if grid.boundary() == Boundary::Radial && obs.routing() != Routing::PositionOnly {
        return Err(Error::Unsupported(format!(
            "observable '{obs}' depends on xi; radial channels only quantize functions of r"
        )));
    }
    Ok(())
}

fn momentum_row(obs: &Observable, grid: &Grid1D, h: f64) -> Vec<f64> {
    grid.momenta(h).iter().map(|&k| obs.momentum_part(k)).collect()
}

/// Dense Weyl quantization of `a` on the grid.
///
/// The kernel is `K_ij = (1/M) sum_k a((x_i + x_j)/2, xi_k) exp(i xi_k (x_i - x_j)/h)`.
pub fn build_weyl_observable(obs: &Observable, h: f64, grid: Grid1D) -> Result<DiscreteOperator> {
    check_supported(obs, &grid)?;
    let n = grid.len();
    if n > DENSE_LIMIT {
        return Err(Error::Unsupported(format!("dense Weyl quantization is limited to N <= {DENSE_LIMIT}")));
    }
    let m = grid.frequency_count();
    let mut k = HermitianMatrix::zeros(n);
    match obs.routing() {
        Routing::PositionOnly | Routing::MomentumOnly | Routing::Split => {
            if obs.routing() != Routing::PositionOnly {
                let row = super::operator::circulant_row(&momentum_row(obs, &grid, h));
                for i in 0..n {
                    for j in 0..n {
                        k.set(i, j, row[(i + m - j) % m]);
                    }
                }
            }
            if obs.routing() != Routing::MomentumOnly {
                for i in 0..n {
                    let d = k.get(i, i);
                    k.set(i, i, d + obs.position_part(grid.point(i)));
                }
            }
        }
        Routing::General => {
            let momenta = grid.momenta(h);
            let ifft = FftPlanner::new().plan_fft_inverse(m);
            let x0 = grid.point(0);
            let dx = grid.dx();
            let mut row = vec![Complex64::new(0.0, 0.0); m];
            for s in 0..2 * n - 1 {
                let mid = x0 + 0.5 * s as f64 * dx;
                for (r, &xi) in row.iter_mut().zip(&momenta) {
                    *r = Complex64::new(obs.eval(mid, xi) / m as f64, 0.0);
                }
                ifft.process(&mut row);
                let lo = s.saturating_sub(n - 1);
                let hi = s.min(n - 1);
                for i in lo..=hi {
                    let j = s - i;
                    k.set(i, j, row[(i + m - j) % m]);
                }
            }
        }
    }
    let defect = k.symmetrize();
    if defect > HERMITICITY_ABORT {
        return Err(Error::numerical(format!("Weyl matrix Hermiticity defect {defect:e} exceeds {HERMITICITY_ABORT:e}")));
    }
    Ok(DiscreteOperator { form: OperatorForm::Dense(k), h, grid })
}

/// `<Op^w(a) v, v>` for each unit vector, without forming the matrix.
pub fn weyl_expectations(vectors: &[&[Complex64]], obs: &Observable, h: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    check_supported(obs, grid)?;
    let n = grid.len();
    if vectors.iter().any(|v| v.len() != n) {
        return Err(Error::config("vector length does not match the grid"));
    }
    let mut out = vec![0.0; vectors.len()];
    if let Some(c) = obs.as_constant() {
        for (o, v) in out.iter_mut().zip(vectors) {
            *o = c * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
        return Ok(out);
    }
    let routing = obs.routing();
    if routing != Routing::MomentumOnly && routing != Routing::General {
        let f: Vec<f64> = grid.points().iter().map(|&x| obs.position_part(x)).collect();
        for (o, v) in out.iter_mut().zip(vectors) {
            *o += v.iter().zip(&f).map(|(z, a)| a * z.norm_sqr()).sum::<f64>();
        }
    }
    if routing == Routing::MomentumOnly || routing == Routing::Split {
        let m = grid.frequency_count();
        let g = momentum_row(obs, grid, h);
        let fft = FftPlanner::new().plan_fft_forward(m);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (o, v) in out.iter_mut().zip(vectors) {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            buf[..n].copy_from_slice(v);
            fft.process(&mut buf);
            *o += buf.iter().zip(&g).map(|(z, a)| a * z.norm_sqr()).sum::<f64>() / m as f64;
        }
    }
    if routing == Routing::General {
        if n > DENSE_LIMIT {
            return Err(Error::Unsupported(format!("general Weyl expectations are limited to N <= {DENSE_LIMIT}")));
        }
        general_expectations(vectors, obs, h, grid, &mut out);
    }
    Ok(out)
}

fn general_expectations(vectors: &[&[Complex64]], obs: &Observable, h: f64, grid: &Grid1D, out: &mut [f64]) {
    let n = grid.len();
    let m = grid.frequency_count();
    let momenta = grid.momenta(h);
    let ifft = FftPlanner::new().plan_fft_inverse(m);
    // indices where any vector is non-negligible
    let mut lo = n;
    let mut hi = 0;
    for v in vectors {
        let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        for (i, z) in v.iter().enumerate() {
            if z.norm() > 1e-10 * peak {
                lo = lo.min(i);
                hi = hi.max(i);
            }
        }
    }
    if lo > hi {
        return;
    }
    let x0 = grid.point(0);
    let dx = grid.dx();
    let mut row = vec![0.0; m];
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for s in 2 * lo..=2 * hi {
        let mid = x0 + 0.5 * s as f64 * dx;
        for (r, &xi) in row.iter_mut().zip(&momenta) {
            *r = obs.eval(mid, xi);
        }
        let i_lo = lo.max(s.saturating_sub(hi));
        let i_hi = hi.min(s - lo);
        for (o, v) in out.iter_mut().zip(vectors) {
            buf.iter_mut().for_each(|b| *b = Complex64::new(0.0, 0.0));
            for i in i_lo..=i_hi {
                let j = s - i;
                buf[(i + m - j) % m] += v[i].conj() * v[j];
            }
            ifft.process(&mut buf);
            *o += row.iter().zip(&buf).map(|(a, c)| a * c.re).sum::<f64>() / m as f64;
        }
    }
}
