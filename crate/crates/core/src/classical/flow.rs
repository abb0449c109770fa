use rayon::prelude::*;
use serde::Serialize;

use crate::microlocal::Observable;
use crate::model::{eval_symbol, Family, PhasePoint, PhasePolynomial, Polynomial1D, SymbolModel};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// Velocity Verlet composed into a fourth-order symmetric scheme.
    Verlet,
    Rk4,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowMap {
    pub t: f64,
    pub stepper: Stepper,
    pub dt: f64,
    /// Largest `|p(Phi_s z) - p(z)|` seen along any trajectory.
    pub energy_drift: f64,
    pub endpoints: Vec<PhasePoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Pullback {
    pub values: Vec<f64>,
    pub flow: FlowMap,
}

const DRIFT_TOL: f64 = 1e-6;
const MAX_HALVINGS: u32 = 12;

enum Vector {
    Schrodinger(Polynomial1D),
    General { px: PhasePolynomial, pxi: PhasePolynomial },
}

impl Vector {
    fn step(&self, z: PhasePoint, dt: f64) -> PhasePoint {
        match self {
            Self::Schrodinger(dv) => {
                let verlet = |z: PhasePoint, dt: f64| {
                    let xi = z.xi - 0.5 * dt * dv.eval(z.x);
                    let x = z.x + 2.0 * dt * xi;
                    PhasePoint::new(x, xi - 0.5 * dt * dv.eval(x))
                };
                // fourth-order symmetric triple jump: still symplectic and reversible
                let w1 = 1.0 / (2.0 - 2f64.cbrt());
                let w0 = 1.0 - 2.0 * w1;
                verlet(verlet(verlet(z, w1 * dt), w0 * dt), w1 * dt)
            }
            Self::General { px, pxi } => {
                let f = |z: PhasePoint| (pxi.eval(z.x, z.xi), -px.eval(z.x, z.xi));
                let add = |z: PhasePoint, k: (f64, f64), s: f64| PhasePoint::new(z.x + s * k.0, z.xi + s * k.1);
                let k1 = f(z);
                let k2 = f(add(z, k1, 0.5 * dt));
                let k3 = f(add(z, k2, 0.5 * dt));
                let k4 = f(add(z, k3, dt));
                PhasePoint::new(
                    z.x + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
                    z.xi + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
                )
            }
        }
    }
}

/// Integrate the Hamiltonian flow of the model's symbol for time `t`.
pub fn flow(model: &SymbolModel, t: f64, points: &[PhasePoint]) -> Result<FlowMap> {
    let (field, stepper, scale) = match &model.family {
        Family::Schrodinger1d { potential } => {
            let dv = potential.derivative();
            let d2 = dv.derivative();
            let top = points.iter().map(|&z| eval_symbol(model, z)).fold(f64::NEG_INFINITY, f64::max);
            let reach = match model.sublevel_box(top) {
                Ok(bx) => bx.x.0.abs().max(bx.x.1.abs()),
                Err(_) => points.iter().map(|z| z.x.abs()).fold(1.0, f64::max),
            };
            let curvature = sampled_max(|x| d2.eval(x).abs(), -reach, reach);
            // small oscillations of x'' = -2 V'(x) have frequency sqrt(2 |V''|)
            (Vector::Schrodinger(dv), Stepper::Verlet, (2.0 * curvature).sqrt().max(1e-3))
        }
        Family::Phase1d { symbol } => {
            let px = symbol.d_dx();
            let pxi = symbol.d_dxi();
            let (hxx, hxxi, hxixi) = (px.d_dx(), px.d_dxi(), pxi.d_dxi());
            let reach = points.iter().map(|z| z.x.abs().max(z.xi.abs())).fold(1.0, f64::max) * 1.5;
            let mut hess: f64 = 0.0;
            for i in 0..=64 {
                for j in 0..=64 {
                    let x = -reach + 2.0 * reach * i as f64 / 64.0;
                    let xi = -reach + 2.0 * reach * j as f64 / 64.0;
                    let (a, b, c) = (hxx.eval(x, xi), hxxi.eval(x, xi), hxixi.eval(x, xi));
                    hess = hess.max((a * a + 2.0 * b * b + c * c).sqrt());
                }
            }
            (Vector::General { px, pxi }, Stepper::Rk4, hess.max(1e-3))
        }
        Family::Radial2d { .. } => {
            return Err(Error::Unsupported("Hamiltonian flow for radial models".into()));
        }
    };
    if t == 0.0 {
        return Ok(FlowMap { t, stepper, dt: 0.0, energy_drift: 0.0, endpoints: points.to_vec() });
    }
    // a power of two, so nearby point sets (e.g. a reversed flow) share the step
    let mut dt = 2f64.powi((1e-3 * std::f64::consts::TAU / scale).log2().floor() as i32);
    for _ in 0..=MAX_HALVINGS {
        let steps = (t.abs() / dt).ceil().max(1.0) as usize;
        let h = t / steps as f64;
        let runs: Vec<(PhasePoint, f64, f64)> = points
            .par_iter()
            .map(|&z| {
                let e0 = eval_symbol(model, z);
                let mut w = z;
                let mut drift: f64 = 0.0;
                for _ in 0..steps {
                    w = field.step(w, h);
                    drift = drift.max((eval_symbol(model, w) - e0).abs());
                }
                (w, drift, e0)
            })
            .collect();
        let within = runs.iter().all(|&(_, d, e0)| d <= DRIFT_TOL * (1.0 + e0.abs()));
        if within {
            let energy_drift = runs.iter().map(|r| r.1).fold(0.0, f64::max);
            return Ok(FlowMap { t, stepper, dt: h.abs(), energy_drift, endpoints: runs.into_iter().map(|r| r.0).collect() });
        }
        dt *= 0.5;
    }
    let worst = DRIFT_TOL * 2f64.powi(-(MAX_HALVINGS as i32));
    Err(Error::numerical(format!(
        "{stepper:?} flow to t = {t}: energy drift above {DRIFT_TOL:e} (1 + |E|) down to dt = {:e} (halving factor {worst:e})",
        dt * 2.0
    )))
}

/// Values of `a o Phi_t` at the given points.
pub fn flow_pullback(model: &SymbolModel, a: &Observable, t: f64, points: &[PhasePoint]) -> Result<Pullback> {
    let flow = flow(model, t, points)?;
    let values = flow.endpoints.iter().map(|z| a.eval(z.x, z.xi)).collect();
    Ok(Pullback { values, flow })
}

fn sampled_max(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (0..=1024).map(|i| f(a + (b - a) * i as f64 / 1024.0)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog_entry;

    fn ring(r: f64, n: usize) -> Vec<PhasePoint> {
        (0..n)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / n as f64;
                PhasePoint::new(r * t.cos(), r * t.sin())
            })
            .collect()
    }

    #[test]
    fn zero_time_is_identity() {
        let m = catalog_entry("quad-max").unwrap().model;
        let a = Observable::parse("x^2 + x*xi").unwrap();
        let pts = ring(0.7, 9);
        let pb = flow_pullback(&m, &a, 0.0, &pts).unwrap();
        for (v, z) in pb.values.iter().zip(&pts) {
            assert_eq!(*v, a.eval(z.x, z.xi));
        }
    }

    #[test]
    fn harmonic_period_returns_to_start() {
        let m = catalog_entry("harmonic").unwrap().model;
        let a = Observable::parse("x + 2*xi^3").unwrap();
        let pts = ring(1.0, 16);
        let pb = flow_pullback(&m, &a, std::f64::consts::PI, &pts).unwrap();
        for (v, z) in pb.values.iter().zip(&pts) {
            assert!((v - a.eval(z.x, z.xi)).abs() < 1e-6, "{v}");
        }
        // quarter period: (x, xi) -> (xi, -x) for x' = 2 xi, xi' = -2 x
        let q = flow(&m, std::f64::consts::FRAC_PI_4, &pts).unwrap();
        for (w, z) in q.endpoints.iter().zip(&pts) {
            assert!((w.x - z.xi).abs() < 1e-6 && (w.xi + z.x).abs() < 1e-6);
        }
    }

    #[test]
    fn constant_observable_is_invariant() {
        let m = catalog_entry("deg-max").unwrap().model;
        let pb = flow_pullback(&m, &Observable::constant(1.0), 3.0, &ring(0.5, 5)).unwrap();
        assert!(pb.values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn verlet_is_reversible() {
        let m = catalog_entry("quad-max").unwrap().model;
        let pts = ring(0.8, 12);
        let fwd = flow(&m, 2.5, &pts).unwrap();
        let back = flow(&m, -2.5, &fwd.endpoints).unwrap();
        for (w, z) in back.endpoints.iter().zip(&pts) {
            assert!((w.x - z.x).abs() < 1e-9 && (w.xi - z.xi).abs() < 1e-9, "{w:?} {z:?}");
        }
    }

    #[test]
    fn rk4_conserves_the_symbol() {
        let m = catalog_entry("pseudo-k3").unwrap().model;
        let f = flow(&m, 1.0, &ring(0.6, 8)).unwrap();
        assert_eq!(f.stepper, Stepper::Rk4);
        assert!(f.energy_drift <= DRIFT_TOL * 2.0);
    }
}
