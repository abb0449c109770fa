use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::marching::{phase_lattice, Lattice};
use crate::microlocal::Observable;
use crate::model::{cauchy_bound, CriticalKind, CriticalPoint, Family, PhaseBox, PhasePolynomial, Polynomial1D, SymbolModel};
use crate::util::{gauss_legendre, pairwise_sum};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrability {
    Integrable,
    NonIntegrable,
    LogarithmicBorderline,
}

/// Whether the Liouville measure is locally integrable near a critical point.
pub fn classify_integrability(cp: &CriticalPoint, model: &SymbolModel) -> Integrability {
    match &model.family {
        Family::Schrodinger1d { .. } => Integrability::NonIntegrable,
        Family::Radial2d { .. } => Integrability::Integrable,
        Family::Phase1d { .. } => {
            let two_n = 2 * model.dimension() as u32;
            match cp.order.cmp(&two_n) {
                std::cmp::Ordering::Less => Integrability::Integrable,
                std::cmp::Ordering::Equal => Integrability::LogarithmicBorderline,
                std::cmp::Ordering::Greater => Integrability::NonIntegrable,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumSign {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Branch {
    pub interval: (f64, f64),
    pub sign: MomentumSign,
}

/// The energy curve `xi^2 + V(x) = E` as graphs over the allowed intervals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySurface1D {
    pub energy: f64,
    pub branches: Vec<Branch>,
    pub turning_points: Vec<f64>,
}

/// Branch decomposition of the energy curve of a Schrödinger model.
pub fn energy_surface(v: &Polynomial1D, e: f64) -> Result<EnergySurface1D> {
    let intervals = allowed_intervals(v, e, false)?;
    let mut turning_points: Vec<f64> = intervals.iter().flat_map(|&(a, b)| [a, b]).collect();
    turning_points.dedup();
    let branches = intervals
        .iter()
        .flat_map(|&interval| {
            [MomentumSign::Positive, MomentumSign::Negative].map(|sign| Branch { interval, sign })
        })
        .collect();
    Ok(EnergySurface1D { energy: e, branches, turning_points })
}

/// Maximal open intervals where `V < E`, with `[0, ...)` allowed on the half-line.
fn allowed_intervals(v: &Polynomial1D, e: f64, half_line: bool) -> Result<Vec<(f64, f64)>> {
    let q = v.shift_constant(-e);
    let b = cauchy_bound(&q) + 1.0;
    let lo = if half_line { 0.0 } else { -b };
    let mut knots = vec![lo];
    knots.extend(q.real_roots(lo, b)?.into_iter().filter(|&r| r > lo));
    knots.push(b);
    knots.dedup();
    let out: Vec<(f64, f64)> = knots
        .windows(2)
        .filter(|w| q.eval(0.5 * (w[0] + w[1])) < 0.0)
        .map(|w| (w[0], w[1]))
        .collect();
    if out.iter().any(|&(a, z)| (!half_line && a == lo) || z == b) {
        return Err(Error::Hypothesis(format!("energy surface at E = {e} is unbounded")));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub struct LiouvilleOptions {
    /// Probe divergence at a critical level instead of rejecting it.
    pub allow_critical: bool,
    /// Marching-squares lattice size for general phase symbols.
    pub lattice: usize,
}

impl Default for LiouvilleOptions {
    fn default() -> Self {
        Self { allow_critical: false, lattice: 2048 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LiouvilleResult {
    pub energy: f64,
    /// `+inf` when the measure is not integrable.
    pub value: f64,
    pub divergent: bool,
    pub error_estimate: f64,
    /// Successive dyadic shell ratios measured toward singular points.
    pub shell_ratios: Vec<f64>,
}

impl LiouvilleResult {
    pub fn is_finite(&self) -> bool {
        !self.divergent
    }
}

const SHELLS: usize = 5;
const RATIO_FRACTION: f64 = 0.99;

/// `int a dLvol` over `{p = E}`, with `dLvol = dsigma / |grad p|`.
pub fn liouville_integral(model: &SymbolModel, a: &Observable, e: f64, opts: &LiouvilleOptions) -> Result<LiouvilleResult> {
    let critical = model.critical_points_at(e);
    let singular: Vec<&CriticalPoint> = critical
        .iter()
        .copied()
        .filter(|c| !(matches!(model.family, Family::Radial2d { .. })) && !is_isolated_minimum(c))
        .collect();
    if !singular.is_empty() && !opts.allow_critical {
        return Err(Error::config(format!(
            "E = {e} is a critical value; pass allow_critical to probe divergence"
        )));
    }
    match &model.family {
        Family::Schrodinger1d { potential } => schrodinger_integral(potential, a, e, &singular),
        Family::Radial2d { potential } => radial_integral(potential, a, e),
        Family::Phase1d { symbol } => phase_integral(model, symbol, a, e, &singular, opts),
    }
}

/// The energy-surface volume `int dLvol`.
pub fn liouville_volume(model: &SymbolModel, e: f64, opts: &LiouvilleOptions) -> Result<LiouvilleResult> {
    liouville_integral(model, &Observable::constant(1.0), e, opts)
}

/// Average of `a` against the normalized Liouville measure.
pub fn mu_average(model: &SymbolModel, a: &Observable, e: f64, opts: &LiouvilleOptions) -> Result<f64> {
    let vol = liouville_volume(model, e, opts)?;
    if !vol.is_finite() {
        return Err(Error::Hypothesis(format!("Liouville measure at E = {e} is not integrable")));
    }
    if !(vol.value > 0.0) {
        return Err(Error::Hypothesis(format!("energy surface at E = {e} has zero volume")));
    }
    if a.as_constant() == Some(1.0) {
        return Ok(1.0);
    }
    let num = liouville_integral(model, a, e, opts)?;
    if !num.is_finite() {
        return Err(Error::Hypothesis(format!("a dLvol at E = {e} is not integrable")));
    }
    Ok(num.value / vol.value)
}

fn is_isolated_minimum(c: &CriticalPoint) -> bool {
    c.kind == CriticalKind::Min
}

fn shell_ratio_ok(ratios: &[f64], predicted: f64) -> bool {
    ratios.len() >= SHELLS - 1 && ratios.iter().all(|&r| r >= RATIO_FRACTION * predicted)
}

fn schrodinger_integral(v: &Polynomial1D, a: &Observable, e: f64, singular: &[&CriticalPoint]) -> Result<LiouvilleResult> {
    let fold = |x: f64, xi: f64| a.eval(x, xi) + a.eval(x, -xi);
    let mut shell_ratios = Vec::new();
    let mut divergent = false;
    for c in singular {
        let k = c.order as f64 / 2.0;
        let predicted = 2f64.powf(k - 1.0);
        let delta = shell_radius(v, e, c.x0);
        let shells: Vec<f64> = (0..SHELLS)
            .map(|j| {
                let (inner, outer) = (delta * 0.5f64.powi(j as i32 + 1), delta * 0.5f64.powi(j as i32));
                [-1.0, 1.0]
                    .iter()
                    .map(|&side| {
                        gl_integrate(inner, outer, 32, |s| {
                            let x = c.x0 + side * s;
                            let gap = e - v.eval(x);
                            if gap > 0.0 {
                                fold(x, gap.sqrt()) / (2.0 * gap.sqrt())
                            } else {
                                0.0
                            }
                        })
                    })
                    .sum()
            })
            .collect();
        let ratios: Vec<f64> = shells.windows(2).map(|w| w[1] / w[0]).collect();
        divergent |= shell_ratio_ok(&ratios, predicted);
        shell_ratios.extend(ratios);
    }
    if divergent {
        return Ok(LiouvilleResult { energy: e, value: f64::INFINITY, divergent, error_estimate: 0.0, shell_ratios });
    }
    let singular_x: Vec<f64> = singular.iter().map(|c| c.x0).collect();
    let intervals = allowed_intervals(v, e, false)?;
    let eval = |n: usize| -> f64 {
        let parts: Vec<f64> = intervals
            .iter()
            .map(|&(x1, x2)| {
                let sing = |x: f64| singular_x.iter().any(|s| (s - x).abs() <= 1e-9 * (1.0 + x.abs()));
                interval_integral(v, e, x1, x2, sing(x1), sing(x2), n, &fold)
            })
            .collect();
        pairwise_sum(&parts)
    };
    let (value, error_estimate) = refine(eval, 64, 1 << 14);
    Ok(LiouvilleResult { energy: e, value, divergent, error_estimate, shell_ratios })
}

/// Distance over which a critical point's leading term dominates: a small
/// fraction of the distance to the nearest other turning point.
fn shell_radius(v: &Polynomial1D, e: f64, x0: f64) -> f64 {
    let q = v.shift_constant(-e);
    let b = cauchy_bound(&q) + 1.0;
    let nearest = q
        .real_roots(-b, b)
        .unwrap_or_default()
        .into_iter()
        .map(|r| (r - x0).abs())
        .filter(|&d| d > 1e-9)
        .fold(1.0f64, f64::min);
    1e-2 * nearest
}

fn gl_integrate(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gauss_legendre(n);
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * nodes.iter().zip(&weights).map(|(t, w)| w * f(c + r * t)).sum::<f64>()
}

/// Doubling refinement until two successive values agree to 1e-13 relative.
fn refine(eval: impl Fn(usize) -> f64, start: usize, max: usize) -> (f64, f64) {
    let mut n = start;
    let mut prev = eval(n);
    loop {
        n *= 2;
        let next = eval(n);
        let err = (next - prev).abs();
        if err <= 1e-13 * next.abs().max(1e-300) || n >= max {
            return (next, err);
        }
        prev = next;
    }
}

/// `int f(x, xi) / (2 xi) dx` over `(x1, x2)` with `xi = sqrt(E - V)`.
#[allow(clippy::too_many_arguments)]
fn interval_integral(
    v: &Polynomial1D,
    e: f64,
    x1: f64,
    x2: f64,
    singular_left: bool,
    singular_right: bool,
    n: usize,
    fold: &(impl Fn(f64, f64) -> f64 + Sync),
) -> f64 {
    let q = v.shift_constant(-e);
    if !singular_left && !singular_right {
        // x = c - R cos(theta): E - V = R^2 sin^2(theta) Q(x), Gauss-Chebyshev in theta
        let r = q.deflate(x1).deflate(x2);
        let (c, half) = (0.5 * (x1 + x2), 0.5 * (x2 - x1));
        let terms: Vec<f64> = (0..n)
            .map(|j| {
                let theta = (j as f64 + 0.5) * PI / n as f64;
                let x = c - half * theta.cos();
                let rq = r.eval(x).max(0.0).sqrt();
                let xi = half * theta.sin() * rq;
                fold(x, xi) / (2.0 * rq)
            })
            .collect();
        return PI / n as f64 * pairwise_sum(&terms);
    }
    let mid = 0.5 * (x1 + x2);
    let half_integral = |end: f64, towards: f64, singular: bool| -> f64 {
        if singular {
            graded_integral(end, towards, n, |x| {
                let gap = e - v.eval(x);
                if gap > 0.0 {
                    fold(x, gap.sqrt()) / (2.0 * gap.sqrt())
                } else {
                    0.0
                }
            })
        } else {
            // x = end + s u^2 toward `towards`: E - V = u^2 |Q1(x)|
            let r = q.deflate(end);
            let s = (towards - end).signum();
            let umax = (towards - end).abs().sqrt();
            gl_integrate(0.0, umax, n.min(512), |u| {
                let x = end + s * u * u;
                let rq = r.eval(x).abs().sqrt();
                fold(x, u * rq) / rq
            })
        }
    };
    half_integral(x1, mid, singular_left) + half_integral(x2, mid, singular_right)
}

/// Geometrically graded Gauss-Legendre panels accumulating at `end`.
fn graded_integral(end: f64, far: f64, n: usize, f: impl Fn(f64) -> f64 + Sync) -> f64 {
    let len = far - end;
    let panels = 40 + n.trailing_zeros() as usize * 4;
    let order = 16;
    let parts: Vec<f64> = (0..panels)
        .map(|j| {
            let (p, q) = (end + 0.5f64.powi(j as i32 + 1) * len, end + 0.5f64.powi(j as i32) * len);
            gl_integrate(p.min(q), p.max(q), order, &f)
        })
        .collect();
    pairwise_sum(&parts)
}

fn radial_integral(v: &Polynomial1D, a: &Observable, e: f64) -> Result<LiouvilleResult> {
    let intervals = allowed_intervals(v, e, true)?;
    let eval = |n: usize| -> f64 {
        let parts: Vec<f64> = intervals
            .iter()
            .map(|&(r1, r2)| {
                let (c, half) = (0.5 * (r1 + r2), 0.5 * (r2 - r1));
                gl_integrate(0.0, PI, n, |theta| {
                    let r = c - half * theta.cos();
                    let rho = (e - v.eval(r)).max(0.0).sqrt();
                    r * a.eval(r, rho) * half * theta.sin()
                })
            })
            .collect();
        2.0 * PI * PI * pairwise_sum(&parts)
    };
    let (value, error_estimate) = refine(eval, 64, 1 << 12);
    Ok(LiouvilleResult { energy: e, value, divergent: false, error_estimate, shell_ratios: Vec::new() })
}

fn phase_integral(
    model: &SymbolModel,
    symbol: &PhasePolynomial,
    a: &Observable,
    e: f64,
    singular: &[&CriticalPoint],
    opts: &LiouvilleOptions,
) -> Result<LiouvilleResult> {
    let px = symbol.d_dx();
    let pxi = symbol.d_dxi();
    let density = |x: f64, xi: f64| a.eval(x, xi) / px.eval(x, xi).hypot(pxi.eval(x, xi));
    let mut shell_ratios = Vec::new();
    let mut divergent = false;
    for c in singular {
        let predicted = 2f64.powi(c.order as i32 - 2);
        let delta = 1e-2;
        let shells: Vec<f64> = (0..SHELLS)
            .map(|j| polar_shell(symbol, &density, e, (c.x0, c.xi0), delta * 0.5f64.powi(j as i32 + 1), delta * 0.5f64.powi(j as i32)))
            .collect();
        let ratios: Vec<f64> = shells.windows(2).map(|w| w[1] / w[0]).collect();
        divergent |= shell_ratio_ok(&ratios, predicted);
        shell_ratios.extend(ratios);
    }
    if divergent {
        return Ok(LiouvilleResult { energy: e, value: f64::INFINITY, divergent, error_estimate: 0.0, shell_ratios });
    }
    let bx = model.sublevel_box(e)?.padded(0.1);
    let fine = lattice_integral(symbol, &density, e, bx, opts.lattice);
    let coarse = lattice_integral(symbol, &density, e, bx, opts.lattice / 2);
    Ok(LiouvilleResult { energy: e, value: fine, divergent, error_estimate: (fine - coarse).abs(), shell_ratios })
}

/// `int_{r_in}^{r_out} r sum_{p(z0 + r e_theta) = E} a / |d_theta p| dr` (coarea in polar coordinates).
fn polar_shell(
    symbol: &PhasePolynomial,
    density: &(impl Fn(f64, f64) -> f64 + Sync),
    e: f64,
    z0: (f64, f64),
    r_in: f64,
    r_out: f64,
) -> f64 {
    const ANGLES: usize = 4096;
    let px = symbol.d_dx();
    let pxi = symbol.d_dxi();
    let point = |r: f64, t: f64| (z0.0 + r * t.cos(), z0.1 + r * t.sin());
    let g = |r: f64, t: f64| {
        let (x, xi) = point(r, t);
        symbol.eval(x, xi) - e
    };
    let dt = std::f64::consts::TAU / ANGLES as f64;
    gl_integrate(r_in, r_out, 24, |r| {
        let mut sum = 0.0;
        for i in 0..ANGLES {
            let (t0, t1) = (i as f64 * dt + 1e-7, (i + 1) as f64 * dt + 1e-7);
            let (g0, g1) = (g(r, t0), g(r, t1));
            if g0 * g1 >= 0.0 {
                continue;
            }
            let (mut lo, mut hi, mut glo) = (t0, t1, g0);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                let gm = g(r, m);
                if gm * glo > 0.0 {
                    lo = m;
                    glo = gm;
                } else {
                    hi = m;
                }
            }
            let t = 0.5 * (lo + hi);
            let (x, xi) = point(r, t);
            // d/dtheta p = grad p . r (-sin, cos)
            let dtheta = r * (-t.sin() * px.eval(x, xi) + t.cos() * pxi.eval(x, xi));
            let grad = px.eval(x, xi).hypot(pxi.eval(x, xi));
            sum += density(x, xi) * grad / dtheta.abs();
        }
        r * sum
    })
}

/// Marching-squares trapezoid rule for `int f dsigma` over `{p = E}`, where
/// `f = a / |grad p|` is supplied as `density`.
fn lattice_integral(symbol: &PhasePolynomial, density: &(impl Fn(f64, f64) -> f64 + Sync), e: f64, bx: PhaseBox, n: usize) -> f64 {
    let lattice: Lattice = phase_lattice(|x, xi| symbol.eval(x, xi) - e, bx, n);
    let rows: Vec<f64> = (0..lattice.cells())
        .into_par_iter()
        .map(|j| {
            let mut acc = Vec::new();
            lattice.row_segments(j, |p, q| {
                let len = (q.0 - p.0).hypot(q.1 - p.1);
                acc.push(0.5 * len * (density(p.0, p.1) + density(q.0, q.1)));
            });
            pairwise_sum(&acc)
        })
        .collect();
    pairwise_sum(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::phase_space_area;
    use crate::model::catalog_entry;
    use proptest::prelude::*;

    fn model(name: &str) -> SymbolModel {
        catalog_entry(name).unwrap().model
    }

    fn opts() -> LiouvilleOptions {
        LiouvilleOptions::default()
    }

    #[test]
    fn harmonic_volume_is_pi() {
        let m = model("harmonic");
        for e in [0.3, 1.0, 7.0] {
            let r = liouville_volume(&m, e, &opts()).unwrap();
            assert!((r.value - PI).abs() < 1e-12, "{}", r.value);
        }
    }

    #[test]
    fn harmonic_x_squared_average() {
        let m = model("harmonic");
        let a = Observable::parse("x^2").unwrap();
        assert!((mu_average(&m, &a, 1.0, &opts()).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(mu_average(&m, &Observable::constant(1.0), 1.0, &opts()).unwrap(), 1.0);
        let odd = Observable::parse("x^3 + x*xi^2").unwrap();
        assert!(mu_average(&m, &odd, 1.0, &opts()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn critical_level_needs_opt_in() {
        let m = model("deg-max");
        assert!(matches!(liouville_volume(&m, 0.0, &opts()), Err(Error::Config(_))));
    }

    #[test]
    fn degenerate_maximum_diverges() {
        let m = model("deg-max");
        let o = LiouvilleOptions { allow_critical: true, ..opts() };
        let r = liouville_volume(&m, 0.0, &o).unwrap();
        assert!(r.divergent && r.value.is_infinite(), "{r:?}");
        for ratio in &r.shell_ratios {
            assert!((ratio - 2.0).abs() < 0.02, "{ratio}");
        }
    }

    #[test]
    fn quadratic_maximum_diverges_logarithmically() {
        let m = model("quad-max");
        let o = LiouvilleOptions { allow_critical: true, ..opts() };
        let r = liouville_volume(&m, 0.0, &o).unwrap();
        assert!(r.divergent);
        // an observable vanishing to second order at the saddle is integrable
        let a = Observable::parse("x^2").unwrap();
        let s = liouville_integral(&m, &a, 0.0, &o).unwrap();
        assert!(!s.divergent && s.value.is_finite());
        // oracle: int x^2 / sqrt(x^2 - x^4) over |x| < 1 on both branches = 2 * 2 * 1/2
        assert!((s.value - 2.0).abs() < 1e-9, "{}", s.value);
    }

    #[test]
    fn radial_degenerate_maximum_is_finite() {
        let m = model("radial-deg");
        let r = liouville_volume(&m, 0.0, &opts()).unwrap();
        assert!(!r.divergent);
        // 2 pi^2 int_0^1 r dr = pi^2, since -r^4 + r^6 < 0 exactly on (0, 1)
        assert!((r.value - PI * PI).abs() < 1e-10, "{}", r.value);
        let lower = liouville_volume(&m, -0.05, &opts()).unwrap();
        // independent oracle: midpoint rule on the indicator of V < E
        let v = |r: f64| -r.powi(4) + r.powi(6);
        let n = 2_000_000;
        let oracle: f64 =
            2.0 * PI * PI * (0..n).map(|i| (i as f64 + 0.5) * 1.5 / n as f64).filter(|&r| v(r) < -0.05).map(|r| r * 1.5 / n as f64).sum::<f64>();
        assert!((lower.value - oracle).abs() < 1e-5, "{} {oracle}", lower.value);
    }

    #[test]
    fn classification() {
        let deg = model("deg-max");
        let cp = deg.critical_points_at(0.0)[0].clone();
        assert_eq!(classify_integrability(&cp, &deg), Integrability::NonIntegrable);
        let rad = model("radial-deg");
        let cp = rad.critical_points_at(0.0)[0].clone();
        assert_eq!(classify_integrability(&cp, &rad), Integrability::Integrable);
        let k3 = model("pseudo-k3");
        let cp = k3.critical_points_at(0.0)[0].clone();
        assert_eq!(classify_integrability(&cp, &k3), Integrability::NonIntegrable);
    }

    #[test]
    fn pseudo_k3_diverges_with_ratio_two() {
        let m = model("pseudo-k3");
        let o = LiouvilleOptions { allow_critical: true, lattice: 256 };
        let r = liouville_volume(&m, 0.0, &o).unwrap();
        assert!(r.divergent, "{r:?}");
    }

    #[test]
    fn phase_lattice_matches_quadrature_for_split_harmonic() {
        // x^2 + xi^2 written as a general phase symbol
        let p = PhasePolynomial::from_triples(&[(2, 0, 1.0), (0, 2, 1.0), (1, 1, 0.0)]);
        let m = SymbolModel::phase("circle", p).unwrap();
        let r = liouville_volume(&m, 1.0, &opts()).unwrap();
        assert!((r.value - PI).abs() < 1e-5, "{}", r.value);
        let a = Observable::parse("xi^2").unwrap();
        assert!((mu_average(&m, &a, 1.0, &opts()).unwrap() - 0.5).abs() < 1e-5);
    }

    #[test]
    fn refinement_stays_within_error_estimate() {
        let m = model("deg-max");
        let a = Observable::parse("exp(x) + xi^2").unwrap();
        let r = liouville_integral(&m, &a, 0.3, &opts()).unwrap();
        assert!(r.error_estimate < 1e-10 * r.value.abs());
    }

    #[test]
    fn coarea_consistency() {
        for (name, e1, e2) in [("deg-max", 0.1, 0.4), ("quad-max", -0.2, -0.05), ("harmonic", 0.5, 1.5)] {
            let m = model(name);
            let (nodes, weights) = gauss_legendre(24);
            let (c, h) = (0.5 * (e1 + e2), 0.5 * (e2 - e1));
            let integral: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(t, w)| w * h * liouville_volume(&m, c + h * t, &opts()).unwrap().value)
                .sum();
            let area = phase_space_area(&m, e1, e2, 2000).unwrap();
            assert!((integral - area).abs() < 0.01 * area, "{name}: {integral} vs {area}");
        }
    }

    #[test]
    fn energy_surface_branches() {
        let v = Polynomial1D::new(vec![0.0, 0.0, -1.0, 0.0, 1.0]);
        let s = energy_surface(&v, -0.1).unwrap();
        assert_eq!(s.branches.len(), 4);
        for b in &s.branches {
            let (a, z) = b.interval;
            assert!(v.eval(0.5 * (a + z)) < -0.1);
            assert!((v.eval(a) + 0.1).abs() < 1e-12 && (v.eval(z) + 0.1).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn mu_average_is_linear_and_monotone(c1 in -2.0f64..2.0, c2 in -2.0f64..2.0, e in 0.05f64..0.8) {
            let m = model("deg-max");
            let a = Observable::parse("x^2").unwrap();
            let b = Observable::parse("xi^2").unwrap();
            let combo = Observable::parse(&format!("({c1:?})*x^2 + ({c2:?})*xi^2")).unwrap();
            let (ma, mb) = (mu_average(&m, &a, e, &opts()).unwrap(), mu_average(&m, &b, e, &opts()).unwrap());
            let mc = mu_average(&m, &combo, e, &opts()).unwrap();
            prop_assert!((mc - (c1 * ma + c2 * mb)).abs() < 1e-10);
            // x^2 <= x^2 + xi^2 pointwise
            let sum = Observable::parse("x^2 + xi^2").unwrap();
            prop_assert!(ma <= mu_average(&m, &sum, e, &opts()).unwrap() + 1e-14);
        }
    }
}
