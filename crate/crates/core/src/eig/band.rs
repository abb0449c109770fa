use crate::quantize::SymBanded;
use crate::{Error, Result};

fn pivot_floor(a: &SymBanded) -> f64 {
    let (lo, hi) = a.gershgorin();
    f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0))
}

/// Number of eigenvalues of a symmetric tridiagonal matrix strictly below `e`.
///
/// Exact-zero pivots are nudged to `-pivmin`, as in LAPACK's bisection.
pub fn sturm_count(t: &SymBanded, e: f64) -> usize {
    if t.bandwidth() != 1 {
        return inertia_below(t, e);
    }
    let pivmin = pivot_floor(t);
    let diag = t.diag();
    let off = t.band(1);
    let mut count = 0;
    let mut q = diag[0] - e;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        q = diag[i] - e - off[i - 1] * off[i - 1] / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Negative inertia of `A - e I` for a symmetric band matrix via `L D L^T`.
pub fn inertia_below(a: &SymBanded, e: f64) -> usize {
    let n = a.dim();
    let p = a.bandwidth();
    let pivmin = pivot_floor(a);
    // l[j * p + (k - 1)] = L_{j, j-k}
    let mut l = vec![0.0; n * p.max(1)];
    let mut d = vec![0.0; n];
    let mut count = 0;
    for i in 0..n {
        let mut di = a.diag()[i] - e;
        for k in 1..=p.min(i) {
            let lik = l[i * p + k - 1];
            di -= lik * lik * d[i - k];
        }
        if di.abs() < pivmin {
            di = -pivmin;
        }
        if di < 0.0 {
            count += 1;
        }
        d[i] = di;
        for j in i + 1..=(i + p).min(n - 1) {
            let mut s = a.band(j - i)[i];
            for c in j.saturating_sub(p)..i {
                s -= l[j * p + (j - c) - 1] * l[i * p + (i - c) - 1] * d[c];
            }
            l[j * p + (j - i) - 1] = s / di;
        }
    }
    count
}

/// Count of eigenvalues in the closed interval `[a, b]`.
pub fn count_in(t: &SymBanded, a: f64, b: f64) -> usize {
    sturm_count(t, b.next_up()).saturating_sub(sturm_count(t, a))
}

/// Eigenvalues with indices `first..last` (ascending order), bisected to
/// machine precision.
pub fn bisect_eigenvalues(t: &SymBanded, first: usize, last: usize) -> Vec<f64> {
    let (glo, ghi) = t.gershgorin();
    let scale = glo.abs().max(ghi.abs()).max(1.0);
    let pad = 2.0 * f64::EPSILON * scale + pivot_floor(t);
    (first..last)
        .map(|j| {
            let mut lo = glo - pad;
            let mut hi = ghi + pad;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                    break;
                }
                if sturm_count(t, mid) <= j {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// LU factorization with partial pivoting of `A - shift I` for a band matrix.
struct BandLu {
    n: usize,
    p: usize,
    /// Row `c` of `U`: entries for columns `c ..= c + 2p`.
    upper: Vec<f64>,
    /// Multipliers of step `c` for rows `c + 1 ..= c + p`.
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    fn new(a: &SymBanded, shift: f64) -> Self {
        let n = a.dim();
        let p = a.bandwidth();
        let w = 2 * p + 1;
        let norm = a.gershgorin().0.abs().max(a.gershgorin().1.abs()).max(1.0);
        let tiny = f64::EPSILON * norm;
        // working rows keyed by their first stored column
        let mut rows: Vec<(usize, Vec<f64>)> = (0..n)
            .map(|i| {
                let start = i.saturating_sub(p);
                let mut r = vec![0.0; w + p];
                for j in start..=(i + p).min(n - 1) {
                    let v = if i == j { a.diag()[i] - shift } else { a.get(i, j) };
                    r[j - start] = v;
                }
                (start, r)
            })
            .collect();
        let mut upper = vec![0.0; n * w];
        let mut lower = vec![0.0; n * p.max(1)];
        let mut pivots = vec![0; n];
        let rebase = |row: &mut (usize, Vec<f64>), c: usize| {
            let shift = c - row.0;
            if shift > 0 {
                row.1.rotate_left(shift);
                let len = row.1.len();
                row.1[len - shift..].iter_mut().for_each(|v| *v = 0.0);
                row.0 = c;
            }
        };
        for c in 0..n {
            let last = (c + p).min(n - 1);
            for r in c..=last {
                rebase(&mut rows[r], c);
            }
            let piv = (c..=last).max_by(|&x, &y| rows[x].1[0].abs().total_cmp(&rows[y].1[0].abs())).unwrap_or(c);
            rows.swap(c, piv);
            pivots[c] = piv;
            if rows[c].1[0].abs() < tiny {
                rows[c].1[0] = if rows[c].1[0] < 0.0 { -tiny } else { tiny };
            }
            let pivot_row = rows[c].1.clone();
            for r in c + 1..=last {
                let m = rows[r].1[0] / pivot_row[0];
                lower[c * p + (r - c - 1)] = m;
                if m != 0.0 {
                    for (x, y) in rows[r].1.iter_mut().zip(&pivot_row) {
                        *x -= m * y;
                    }
                }
                rows[r].1[0] = 0.0;
            }
            upper[c * w..(c + 1) * w].copy_from_slice(&pivot_row[..w]);
        }
        Self { n, p, upper, lower, pivots }
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, p, w) = (self.n, self.p, 2 * self.p + 1);
        for c in 0..n {
            b.swap(c, self.pivots[c]);
            let bc = b[c];
            for r in c + 1..=(c + p).min(n - 1) {
                b[r] -= self.lower[c * p + (r - c - 1)] * bc;
            }
        }
        for c in (0..n).rev() {
            let row = &self.upper[c * w..(c + 1) * w];
            let mut s = b[c];
            for k in 1..w {
                if c + k < n {
                    s -= row[k] * b[c + k];
                }
            }
            b[c] = s / row[0];
        }
    }
}

fn start_vector(n: usize, seed: usize) -> Vec<f64> {
    // deterministic, irregular, nonzero everywhere
    let phi = 0.618_033_988_749_894_9;
    (0..n)
        .map(|i| {
            let t = ((i as f64 + 1.0) * phi * (seed as f64 + 1.0) + 0.5 * seed as f64).fract();
            0.5 + t
        })
        .collect()
}

fn residual(a: &SymBanded, x: &[f64], lambda: f64) -> f64 {
    let n = a.dim();
    let mut r: Vec<f64> = x.iter().zip(a.diag()).map(|(v, d)| (d - lambda) * v).collect();
    for k in 1..=a.bandwidth() {
        let band = a.band(k);
        for i in 0..n - k {
            r[i] += band[i] * x[i + k];
            r[i + k] += band[i] * x[i];
        }
    }
    r.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn orthogonalize(x: &mut [f64], against: &[&Vec<f64>]) {
    for q in against {
        let dot: f64 = x.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(q.iter()).for_each(|(a, b)| *a -= dot * b);
    }
}

/// Sign convention: the largest-magnitude component is positive.
pub(crate) fn fix_sign(x: &mut [f64]) {
    let k = (0..x.len()).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap_or(0);
    if x.get(k).is_some_and(|v| *v < 0.0) {
        x.iter_mut().for_each(|v| *v = -*v);
    }
}

pub(crate) const MAX_RESTARTS: usize = 50;

/// Eigenvectors for accurate eigenvalues by shifted inverse iteration, with
/// reorthogonalization inside clusters. Returns `(vector, residual)` pairs.
pub fn inverse_iteration(a: &SymBanded, eigenvalues: &[f64], tolerance: f64) -> Result<Vec<(Vec<f64>, f64)>> {
    let n = a.dim();
    let (glo, ghi) = a.gershgorin();
    let norm = glo.abs().max(ghi.abs()).max(1.0);
    let cluster = 1e-3 * norm;
    let floor = 64.0 * f64::EPSILON * norm;
    let mut out: Vec<(Vec<f64>, f64)> = Vec::with_capacity(eigenvalues.len());
    for (idx, &lambda) in eigenvalues.iter().enumerate() {
        let lu = BandLu::new(a, lambda);
        let neighbours: Vec<usize> =
            (0..idx).filter(|&j| (eigenvalues[j] - lambda).abs() <= cluster).collect();
        let mut best: Option<(Vec<f64>, f64)> = None;
        'restarts: for restart in 0..MAX_RESTARTS {
            let mut x = start_vector(n, idx * MAX_RESTARTS + restart);
            {
                let against: Vec<&Vec<f64>> = neighbours.iter().map(|&j| &out[j].0).collect();
                orthogonalize(&mut x, &against);
            }
            if normalize(&mut x) == 0.0 {
                continue;
            }
            let mut last = f64::INFINITY;
            for _ in 0..8 {
                lu.solve(&mut x);
                {
                    let against: Vec<&Vec<f64>> = neighbours.iter().map(|&j| &out[j].0).collect();
                    orthogonalize(&mut x, &against);
                }
                if !(normalize(&mut x) > 0.0) || x.iter().any(|v| !v.is_finite()) {
                    continue 'restarts;
                }
                let r = residual(a, &x, lambda);
                if best.as_ref().is_none_or(|b| r < b.1) {
                    best = Some((x.clone(), r));
                }
                if r <= floor || r > 0.5 * last {
                    break;
                }
                last = r;
            }
            if best.as_ref().is_some_and(|b| b.1 <= tolerance) {
                break;
            }
        }
        match best {
            Some((mut x, r)) if r <= tolerance => {
                fix_sign(&mut x);
                out.push((x, r));
            }
            _ => {
                return Err(Error::numerical(format!(
                    "inverse iteration for eigenvalue {lambda} did not converge after {MAX_RESTARTS} restarts"
                )))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn laplacian(n: usize) -> SymBanded {
        SymBanded::tridiagonal(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    fn exact_laplacian(n: usize, j: usize) -> f64 {
        let t = std::f64::consts::PI * (j + 1) as f64 / (2.0 * (n + 1) as f64);
        4.0 * t.sin().powi(2)
    }

    #[test]
    fn gershgorin_extremes() {
        let t = laplacian(50);
        let (lo, hi) = t.gershgorin();
        assert_eq!(sturm_count(&t, lo - 1.0), 0);
        assert_eq!(sturm_count(&t, hi + 1.0), 50);
    }

    #[test]
    fn bisection_matches_closed_form() {
        let t = laplacian(100);
        let ev = bisect_eigenvalues(&t, 0, 100);
        for (j, v) in ev.iter().enumerate() {
            assert!((v - exact_laplacian(100, j)).abs() < 1e-13, "{j}");
        }
    }

    #[test]
    fn pentadiagonal_inertia_matches_dense_count() {
        // A = T^2 for the Laplacian T: eigenvalues are squares of T's
        let n = 40;
        let t = laplacian(n);
        let a = SymBanded::new(vec![
            (0..n).map(|i| if i == 0 || i == n - 1 { 5.0 } else { 6.0 }).collect(),
            vec![-4.0; n - 1],
            vec![1.0; n - 2],
        ])
        .unwrap();
        let ev: Vec<f64> = bisect_eigenvalues(&t, 0, n).iter().map(|v| v * v).collect();
        for e in [0.01, 0.5, 3.0, 9.0, 15.9] {
            let expect = ev.iter().filter(|&&v| v < e).count();
            assert_eq!(inertia_below(&a, e), expect, "e={e}");
        }
    }

    #[test]
    fn inverse_iteration_vectors() {
        let t = laplacian(200);
        let ev = bisect_eigenvalues(&t, 10, 14);
        let vecs = inverse_iteration(&t, &ev, 1e-10).unwrap();
        for (k, (v, r)) in vecs.iter().enumerate() {
            assert!(*r < 1e-12);
            for (l, (w, _)) in vecs.iter().enumerate() {
                let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
                let e = if k == l { 1.0 } else { 0.0 };
                assert!((dot - e).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn band_lu_solves() {
        let n = 30;
        let a = SymBanded::new(vec![
            (0..n).map(|i| (i as f64 * 0.3).sin()).collect(),
            (0..n - 1).map(|i| 1.0 + (i as f64).cos()).collect(),
            (0..n - 2).map(|i| 0.5 * (i as f64 * 0.7).sin()).collect(),
        ])
        .unwrap();
        let x: Vec<f64> = (0..n).map(|i| i as f64 - 7.5).collect();
        let mut b = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                b[i] += (a.get(i, j) - if i == j { 0.25 } else { 0.0 }) * x[j];
            }
        }
        BandLu::new(&a, 0.25).solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-9, "{u} vs {v}");
        }
    }

    proptest! {
        #[test]
        fn sturm_count_is_monotone(diag in prop::collection::vec(-5.0f64..5.0, 20),
                                   off in prop::collection::vec(0.1f64..2.0, 19),
                                   mut es in prop::collection::vec(-10.0f64..10.0, 8)) {
            let t = SymBanded::tridiagonal(diag, off).unwrap();
            es.sort_by(f64::total_cmp);
            let counts: Vec<usize> = es.iter().map(|&e| sturm_count(&t, e)).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
