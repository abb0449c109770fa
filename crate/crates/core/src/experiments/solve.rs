use serde::Serialize;

use crate::eig::{default_eps_lambda, eigs_in_window, radial_windows, EigenWindow, RadialOptions};
use crate::microlocal::Observable;
use crate::model::{Family, PhaseBox, SymbolModel};
use crate::quantize::{
    build_schrodinger, build_split, build_weyl_observable, schrodinger_grid, split_grid, Grid1D, GridPolicy,
};
use crate::{Error, Result};

/// Discretization and window-solving choices shared by scans and scenarios.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverOptions {
    pub fd_order: u32,
    /// Eigenvalue dispersion target; defaults to `min(1e-5, eps_lambda / 10)`.
    pub tolerance: Option<f64>,
    pub points: Option<usize>,
    pub interval: Option<(f64, f64)>,
    /// Fractional padding of the sublevel box used for the grid.
    pub padding: Option<f64>,
    /// Grids cover `{p <= E_c + d h + level_margin}`.
    pub level_margin: f64,
    pub m_max: u32,
    /// Retry with `d (1 +- 0.01)` when an eigenvalue ties a window edge.
    pub tie_retry: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            fd_order: 4,
            tolerance: None,
            points: None,
            interval: None,
            padding: None,
            level_margin: 1.0,
            m_max: 100_000,
            tie_retry: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolvedWindow {
    pub window: EigenWindow,
    /// Phase-space region for coherent-state lattices.
    pub phase_box: PhaseBox,
    pub d_requested: f64,
}

impl SolvedWindow {
    pub fn points(&self) -> usize {
        self.window.grid.len()
    }
}

/// Window eigenpairs of the model's quantization at one `h`, retrying with a
/// perturbed `d` on a boundary tie.
pub fn solve_window(model: &SymbolModel, e_c: f64, d: f64, h: f64, opts: &SolverOptions) -> Result<SolvedWindow> {
    let first = solve_once(model, e_c, d, h, opts)?;
    if !opts.tie_retry || !first.window.has_boundary_tie() {
        return Ok(first);
    }
    let mut last = first;
    for factor in [1.01, 0.99] {
        let mut w = solve_once(model, e_c, d * factor, h, opts)?;
        if !w.window.has_boundary_tie() {
            w.d_requested = d;
            return Ok(w);
        }
        last = w;
    }
    let mut w = last;
    w.d_requested = d;
    w.window.warnings.push(format!("boundary tie persists after perturbing d = {d} by 1%"));
    Ok(w)
}

fn solve_once(model: &SymbolModel, e_c: f64, d: f64, h: f64, opts: &SolverOptions) -> Result<SolvedWindow> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::config(format!("h must lie in (0, 1), got {h}")));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::config(format!("d must be positive, got {d}")));
    }
    let eps = default_eps_lambda(d, h);
    let top = e_c + d * h;
    let level = top + opts.level_margin;
    let tolerance = opts.tolerance.unwrap_or((0.1 * eps).min(1e-5));
    let policy = GridPolicy {
        fd_order: opts.fd_order,
        tolerance,
        padding: opts.padding.unwrap_or(0.25),
        points: opts.points,
        interval: opts.interval,
    };
    let window = match &model.family {
        Family::Schrodinger1d { potential } => {
            let grid = schrodinger_grid(potential, h, level, top, &policy)?;
            let op = build_schrodinger(potential, h, grid, opts.fd_order, top)?;
            eigs_in_window(&op, e_c, d, eps)?
        }
        Family::Radial2d { potential } => {
            let ro = RadialOptions { policy, m_max: opts.m_max, level_margin: opts.level_margin, eps_lambda: Some(eps) };
            radial_windows(potential, h, e_c, d, &ro)?
        }
        Family::Phase1d { symbol } => {
            let padding = opts.padding.unwrap_or(0.5);
            let op = match symbol.as_split() {
                Some((f, g)) => {
                    let grid = match opts.points {
                        Some(n) => {
                            let (a, b) = opts.interval.unwrap_or(model.sublevel_box(level)?.padded(padding).x);
                            Grid1D::periodic(a, b, n)?
                        }
                        None => split_grid(&f, &g, h, level, padding)?,
                    };
                    build_split(&f, &g, h, grid, level)?
                }
                None => {
                    let bx = model.sublevel_box(level)?.padded(padding);
                    let (a, b) = opts.interval.unwrap_or(bx.x);
                    let reach = bx.xi.0.abs().max(bx.xi.1.abs());
                    let n = match opts.points {
                        Some(n) => n,
                        None => {
                            let mut n = crate::quantize::MIN_POINTS;
                            while std::f64::consts::PI * h * n as f64 / (b - a) < reach {
                                n *= 2;
                            }
                            n
                        }
                    };
                    let grid = Grid1D::periodic(a, b, n)?;
                    build_weyl_observable(&Observable::from_phase_polynomial(symbol), h, grid)?
                }
            };
            eigs_in_window(&op, e_c, d, eps)?
        }
    };
    let phase_box = husimi_box(model, top, h)?;
    Ok(SolvedWindow { window, phase_box, d_requested: d })
}

/// Sublevel box at the window top, widened by five coherent-state widths.
fn husimi_box(model: &SymbolModel, top: f64, h: f64) -> Result<PhaseBox> {
    let bx = model.sublevel_box(top)?;
    let w = 5.0 * h.sqrt();
    let mut out = PhaseBox { x: (bx.x.0 - w, bx.x.1 + w), xi: (bx.xi.0 - w, bx.xi.1 + w) };
    if matches!(model.family, Family::Radial2d { .. }) {
        out.x.0 = 0.0;
    }
    Ok(out)
}
