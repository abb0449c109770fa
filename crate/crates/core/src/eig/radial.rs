use rayon::prelude::*;

use super::window::{default_eps_lambda, eigenpairs_in, window_interval, EigenWindow};
use crate::model::Polynomial1D;
use crate::quantize::{build_radial_channel, radial_grid, GridPolicy};
use crate::Result;

#[derive(Clone, Copy, Debug)]
pub struct RadialOptions {
    pub policy: GridPolicy,
    /// Last angular momentum tried before giving up with a warning.
    pub m_max: u32,
    /// The grid covers `{V <= E_c + d h + level_margin}`.
    pub level_margin: f64,
    pub eps_lambda: Option<f64>,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self { policy: GridPolicy::new(2, 1e-4), m_max: 100_000, level_margin: 1.0, eps_lambda: None }
    }
}

/// Window eigenpairs of `-h^2 Delta + V(|x|)` in the plane, merged over
/// angular momentum channels (weight 2 for `m >= 1`).
pub fn radial_windows(v: &Polynomial1D, h: f64, e_c: f64, d: f64, options: &RadialOptions) -> Result<EigenWindow> {
    let (a, b) = window_interval(e_c, d, h);
    let eps_lambda = options.eps_lambda.unwrap_or_else(|| default_eps_lambda(d, h));
    let grid = radial_grid(v, h, b + options.level_margin, b, &options.policy)?;
    let r = grid.points();
    let base: Vec<f64> = r.iter().map(|&x| v.eval(x)).collect();
    let floor = |m: u32| {
        let c = h * h * (m as f64) * (m as f64);
        r.iter().zip(&base).map(|(x, p)| p + c / (x * x)).fold(f64::INFINITY, f64::min)
    };
    let mut warnings = Vec::new();
    let stop = (0..=options.m_max).find(|&m| floor(m) > b + eps_lambda);
    let last = match stop {
        Some(m) => m,
        None => {
            warnings.push(format!(
                "angular momentum truncated at m_max = {}: the effective potential still reaches the window",
                options.m_max
            ));
            options.m_max + 1
        }
    };
    let channels: Vec<_> = (0..last)
        .into_par_iter()
        .map(|m| {
            let op = build_radial_channel(v, h, grid, m, b)?;
            let mut pairs = eigenpairs_in(&op, a, b, eps_lambda)?;
            for p in &mut pairs {
                p.weight = if m == 0 { 1 } else { 2 };
                p.channel = Some(m);
            }
            Ok(pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs: Vec<_> = channels.into_iter().flatten().collect();
    pairs.sort_by(|p, q| p.value.total_cmp(&q.value).then(p.channel.cmp(&q.channel)));
    Ok(EigenWindow { critical_energy: e_c, d, h, interval: (a, b), eps_lambda, pairs, grid, warnings })
}
