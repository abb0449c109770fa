use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::band::{bisect_eigenvalues, count_in, inverse_iteration};
use super::dense::{ql_eigenvalues, tridiagonalize};
use crate::quantize::{DiscreteOperator, Grid1D, OperatorForm, SymBanded, DENSE_LIMIT};
use crate::{Error, Result};

/// Eigenvalue accuracy used for window membership: `1e-2 d h`.
pub fn default_eps_lambda(d: f64, h: f64) -> f64 {
    1e-2 * d * h
}

/// The closed window `[E_c - d h, E_c + d h]`.
pub fn window_interval(e_c: f64, d: f64, h: f64) -> (f64, f64) {
    (e_c - d * h, e_c + d * h)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenPair {
    pub value: f64,
    #[serde(skip)]
    pub vector: Vec<Complex64>,
    pub residual: f64,
    /// 1 for simple 1D eigenvalues and `m = 0`; 2 for radial channels `m >= 1`.
    pub weight: u32,
    /// Angular momentum of the radial channel the pair came from.
    pub channel: Option<u32>,
    /// Eigenvalue within `eps_lambda` of a window edge.
    pub boundary_tie: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenWindow {
    pub critical_energy: f64,
    pub d: f64,
    pub h: f64,
    pub interval: (f64, f64),
    pub eps_lambda: f64,
    pub pairs: Vec<EigenPair>,
    #[serde(skip)]
    pub grid: Grid1D,
    pub warnings: Vec<String>,
}

impl EigenWindow {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Count with multiplicity weights.
    pub fn weighted_count(&self) -> u64 {
        self.pairs.iter().map(|p| p.weight as u64).sum()
    }

    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn vectors(&self) -> Vec<&[Complex64]> {
        self.pairs.iter().map(|p| p.vector.as_slice()).collect()
    }

    pub fn has_boundary_tie(&self) -> bool {
        self.pairs.iter().any(|p| p.boundary_tie)
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// Largest `|<psi_i, psi_j> - delta_ij|` among pairs of the same channel.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.pairs.iter().enumerate() {
            for b in &self.pairs[i..] {
                if a.channel != b.channel {
                    continue;
                }
                let dot: Complex64 = a.vector.iter().zip(&b.vector).map(|(x, y)| x.conj() * y).sum();
                let target = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).norm());
            }
        }
        worst
    }
}

fn residual(op: &DiscreteOperator, v: &[Complex64], lambda: f64) -> f64 {
    op.apply(v).iter().zip(v).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenpairs of `op` with eigenvalues in the closed interval `[a, b]`.
pub fn eigenpairs_in(op: &DiscreteOperator, a: f64, b: f64, eps_lambda: f64) -> Result<Vec<EigenPair>> {
    if !(a <= b) {
        return Err(Error::config(format!("empty window [{a}, {b}]")));
    }
    let (values, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = match &op.form {
        OperatorForm::Banded(m) => banded_pairs(m, a, b, eps_lambda)?,
        OperatorForm::Split { .. } | OperatorForm::Dense(_) => {
            if op.dim() > DENSE_LIMIT {
                return Err(Error::Unsupported(format!(
                    "dense eigensolver is limited to {DENSE_LIMIT} points, got {}",
                    op.dim()
                )));
            }
            dense_pairs(op, a, b, eps_lambda)?
        }
    };
    let pairs: Vec<EigenPair> = values
        .into_par_iter()
        .zip(vectors)
        .map(|(value, vector)| {
            let residual = residual(op, &vector, value);
            let boundary_tie = (value - a).abs() <= eps_lambda || (value - b).abs() <= eps_lambda;
            EigenPair { value, vector, residual, weight: 1, channel: None, boundary_tie }
        })
        .collect();
    if let Some(p) = pairs.iter().find(|p| !(p.residual <= eps_lambda)) {
        return Err(Error::numerical(format!(
            "eigenpair at {} has residual {:e} above eps_lambda = {eps_lambda:e}",
            p.value, p.residual
        )));
    }
    Ok(pairs)
}

type Pairs = (Vec<f64>, Vec<Vec<Complex64>>);

fn banded_pairs(m: &SymBanded, a: f64, b: f64, eps_lambda: f64) -> Result<Pairs> {
    let first = super::band::sturm_count(m, a);
    let count = count_in(m, a, b);
    let values: Vec<f64> = (first..first + count)
        .into_par_iter()
        .flat_map_iter(|j| bisect_eigenvalues(m, j, j + 1))
        .collect();
    let vectors = inverse_iteration(m, &values, eps_lambda)?
        .into_iter()
        .map(|(v, _)| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
        .collect();
    Ok((values, vectors))
}

fn dense_pairs(op: &DiscreteOperator, a: f64, b: f64, eps_lambda: f64) -> Result<Pairs> {
    let t = tridiagonalize(op.to_dense());
    let all = ql_eigenvalues(&t.diag, &t.off)?;
    let values: Vec<f64> = all.into_iter().filter(|&v| v >= a && v <= b).collect();
    let tri = SymBanded::tridiagonal(t.diag.clone(), t.off.clone())?;
    let z = inverse_iteration(&tri, &values, eps_lambda)?;
    let vectors = z
        .into_par_iter()
        .map(|(z, _)| {
            let mut y = t.back_transform(&z);
            normalize_phase(&mut y);
            y
        })
        .collect();
    Ok((values, vectors))
}

/// Unit norm, with the largest component real and positive.
fn normalize_phase(y: &mut [Complex64]) {
    let norm = y.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let k = (0..y.len()).max_by(|&i, &j| y[i].norm().total_cmp(&y[j].norm())).unwrap_or(0);
    if norm > 0.0 && !y.is_empty() {
        let phase = y[k].conj() / y[k].norm().max(f64::MIN_POSITIVE) / norm;
        y.iter_mut().for_each(|c| *c *= phase);
    }
}

/// All eigenpairs in the closed window `[E_c - d h, E_c + d h]`, with `h`
/// taken from the operator.
pub fn eigs_in_window(op: &DiscreteOperator, e_c: f64, d: f64, eps_lambda: f64) -> Result<EigenWindow> {
    let interval = window_interval(e_c, d, op.h);
    let pairs = eigenpairs_in(op, interval.0, interval.1, eps_lambda)?;
    Ok(EigenWindow {
        critical_energy: e_c,
        d,
        h: op.h,
        interval,
        eps_lambda,
        pairs,
        grid: op.grid,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::{sturm_count, tridiagonalize};
    use crate::model::{catalog_entry, Family, Polynomial1D};
    use crate::quantize::{build_schrodinger, build_split, schrodinger_grid, split_grid, GridPolicy};

    fn potential(name: &str) -> Polynomial1D {
        match catalog_entry(name).unwrap().model.family {
            Family::Schrodinger1d { potential } | Family::Radial2d { potential } => potential,
            Family::Phase1d { .. } => unreachable!(),
        }
    }

    fn schrodinger(v: &Polynomial1D, h: f64, top: f64, fd: u32, tol: f64) -> DiscreteOperator {
        let grid = schrodinger_grid(v, h, top + 1.0, top, &GridPolicy::new(fd, tol)).unwrap();
        build_schrodinger(v, h, grid, fd, top).unwrap()
    }

    #[test]
    fn harmonic_sturm_count_below_point_one() {
        let v = potential("harmonic");
        let op = schrodinger(&v, 0.01, 0.2, 2, 1e-4);
        let OperatorForm::Banded(m) = &op.form else { panic!() };
        assert_eq!(sturm_count(m, 0.1), 5);
    }

    #[test]
    fn harmonic_window_matches_closed_form() {
        let v = potential("harmonic");
        let h = 0.01;
        // d = 4.5 keeps both edges away from the levels h(2j + 1)
        let op = schrodinger(&v, h, 1.1, 4, 1e-6);
        let w = eigs_in_window(&op, 1.0, 4.5, default_eps_lambda(4.5, h)).unwrap();
        assert_eq!(w.len(), 4);
        for (p, j) in w.pairs.iter().zip(48..) {
            assert!((p.value - h * (2 * j + 1) as f64).abs() < 1e-4, "{} vs level {j}", p.value);
        }
        assert!(w.orthogonality_defect() < 1e-8);
        assert!(!w.has_boundary_tie());
    }

    #[test]
    fn harmonic_window_at_d5_flags_ties() {
        let v = potential("harmonic");
        let op = schrodinger(&v, 0.01, 1.1, 4, 1e-6);
        let w = eigs_in_window(&op, 1.0, 5.0, default_eps_lambda(5.0, 0.01)).unwrap();
        // levels sit exactly on both edges; which side they land on is
        // decided by the discretization error
        assert!(w.has_boundary_tie());
        assert!((5..=6).contains(&w.len()));
        assert!(w.pairs.iter().filter(|p| p.boundary_tie).count() >= 1);
    }

    #[test]
    fn empty_window_between_levels() {
        let v = potential("harmonic");
        let op = schrodinger(&v, 0.01, 1.1, 2, 1e-4);
        let w = eigs_in_window(&op, 1.0, 0.5, 1e-4).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn box_spectrum() {
        // V = 0 on [0, 1] with Dirichlet ends: discrete levels
        // 4 (h/dx)^2 sin^2(pi j / 2(N + 1)), close to (h pi j)^2
        let v = Polynomial1D::new(vec![0.0]);
        let (h, n) = (0.02, 2000);
        let grid = Grid1D::dirichlet(0.0, 1.0, n).unwrap();
        let s = (h / grid.dx()).powi(2);
        let op = build_schrodinger(&v, h, grid, 2, 1.0).unwrap();
        let pairs = eigenpairs_in(&op, 0.0, 0.1, 1e-6).unwrap();
        let expect: Vec<f64> = (1..)
            .map(|j| 4.0 * s * (std::f64::consts::PI * j as f64 / (2.0 * (n + 1) as f64)).sin().powi(2))
            .take_while(|&e| e <= 0.1)
            .collect();
        assert_eq!(pairs.len(), expect.len());
        for (j, (p, e)) in pairs.iter().zip(&expect).enumerate() {
            assert!((p.value - e).abs() < 1e-12, "{} {e}", p.value);
            let continuum = (h * std::f64::consts::PI * (j + 1) as f64).powi(2);
            assert!((p.value - continuum).abs() < 1e-3 * continuum);
        }
    }

    #[test]
    fn deg_max_counts_agree() {
        let v = potential("deg-max");
        let h = 0.01;
        let op = schrodinger(&v, h, 0.05, 2, 1e-4);
        let OperatorForm::Banded(m) = &op.form else { panic!() };
        let w = eigs_in_window(&op, 0.0, 5.0, default_eps_lambda(5.0, h)).unwrap();
        let sturm = sturm_count(m, 0.05f64.next_up()) - sturm_count(m, -0.05);
        assert!(w.len().abs_diff(sturm) <= 1);
        assert!(w.orthogonality_defect() < 1e-8);
    }

    #[test]
    fn even_potential_gives_definite_parity() {
        let v = potential("quad-max");
        let h = 0.02;
        let grid = Grid1D::dirichlet(-2.0, 2.0, 1999).unwrap();
        let op = build_schrodinger(&v, h, grid, 2, 1.0).unwrap();
        let w = eigs_in_window(&op, 0.0, 5.0, default_eps_lambda(5.0, h)).unwrap();
        assert!(!w.is_empty());
        for p in &w.pairs {
            let n = p.vector.len();
            let even: f64 = (0..n).map(|i| (p.vector[i] - p.vector[n - 1 - i]).norm_sqr()).sum::<f64>().sqrt();
            let odd: f64 = (0..n).map(|i| (p.vector[i] + p.vector[n - 1 - i]).norm_sqr()).sum::<f64>().sqrt();
            assert!(even.min(odd) <= 1e-6, "{even} {odd}");
        }
    }

    #[test]
    fn dense_path_matches_banded() {
        let v = potential("quad-max");
        let h = 0.05;
        let grid = Grid1D::dirichlet(-2.0, 2.0, 400).unwrap();
        let op = build_schrodinger(&v, h, grid, 2, 1.0).unwrap();
        let dense = DiscreteOperator { form: OperatorForm::Dense(op.to_dense()), h, grid: op.grid };
        let eps = default_eps_lambda(5.0, h);
        let a = eigs_in_window(&op, 0.0, 5.0, eps).unwrap();
        let b = eigs_in_window(&dense, 0.0, 5.0, eps).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.pairs.iter().zip(&b.pairs) {
            assert!((p.value - q.value).abs() < 1e-10);
            let overlap: Complex64 = p.vector.iter().zip(&q.vector).map(|(x, y)| x.conj() * y).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-8);
        }
        assert!(b.orthogonality_defect() < 1e-8);
    }

    #[test]
    fn split_harmonic_is_exact_up_to_aliasing() {
        // x^2 + xi^2 on a periodic grid: levels h (2 j + 1)
        let f = Polynomial1D::new(vec![0.0, 0.0, 1.0]);
        let h = 0.02;
        let grid = split_grid(&f, &f, h, 2.0, 0.5).unwrap();
        let op = build_split(&f, &f, h, grid, 2.0).unwrap();
        let w = eigs_in_window(&op, 1.0, 4.5, default_eps_lambda(4.5, h)).unwrap();
        assert_eq!(w.len(), 4);
        for (p, j) in w.pairs.iter().zip(23..) {
            assert!((p.value - h * (2 * j + 1) as f64).abs() < 1e-9, "{}", p.value);
        }
        assert!(w.orthogonality_defect() < 1e-8);
    }

    #[test]
    #[ignore]
    fn householder_timing() {
        let n: usize = std::env::var("N").ok().and_then(|s| s.parse().ok()).unwrap_or(2048);
        let f = Polynomial1D::new(vec![0.0, 0.0, 1.0]);
        let grid = Grid1D::periodic(-4.0, 4.0, n).unwrap();
        let op = build_split(&f, &f, 0.01, grid, 1.0).unwrap();
        let t0 = std::time::Instant::now();
        let t = tridiagonalize(op.to_dense());
        eprintln!("n={n} tridiagonalize {:?}", t0.elapsed());
        let ev = crate::eig::ql_eigenvalues(&t.diag, &t.off).unwrap();
        eprintln!("ql {:?} {}", t0.elapsed(), ev[0]);
    }
}
