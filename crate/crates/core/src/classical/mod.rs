//! Liouville measures, level-set geometry and Hamiltonian transport.

mod flow;
mod levelset;
mod liouville;
mod marching;

pub use flow::{flow, flow_pullback, FlowMap, Pullback, Stepper};
pub use levelset::{levelset_connected, LevelSetTopology};
pub use liouville::{
    classify_integrability, energy_surface, liouville_integral, liouville_volume, mu_average, Branch, EnergySurface1D,
    Integrability, LiouvilleOptions, LiouvilleResult, MomentumSign,
};

use rayon::prelude::*;

use crate::model::{eval_symbol, Family, PhasePoint, SymbolModel};
use crate::{Error, Result};

/// Area of `{e1 <= p <= e2}` by counting lattice cell centres.
pub fn phase_space_area(model: &SymbolModel, e1: f64, e2: f64, resolution: usize) -> Result<f64> {
    if matches!(model.family, Family::Radial2d { .. }) {
        return Err(Error::Unsupported("lattice area for radial models".into()));
    }
    let bx = model.sublevel_box(e2)?.padded(0.05);
    let n = resolution.max(2);
    let (dx, dxi) = ((bx.x.1 - bx.x.0) / n as f64, (bx.xi.1 - bx.xi.0) / n as f64);
    let count: usize = (0..n)
        .into_par_iter()
        .map(|j| {
            let xi = bx.xi.0 + (j as f64 + 0.5) * dxi;
            (0..n)
                .filter(|&i| {
                    let p = eval_symbol(model, PhasePoint::new(bx.x.0 + (i as f64 + 0.5) * dx, xi));
                    p >= e1 && p <= e2
                })
                .count()
        })
        .sum();
    Ok(count as f64 * dx * dxi)
}
