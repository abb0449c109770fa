use num_complex::Complex64;

use crate::quantize::HermitianMatrix;
use crate::{Error, Result};

/// Unitary reduction `A = (Q D) T (Q D)^*` of a Hermitian matrix to a real
/// symmetric tridiagonal `T`.
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    /// Nonnegative subdiagonal of `T`.
    pub off: Vec<f64>,
    phases: Vec<Complex64>,
    /// Householder reflectors `I - beta v v^*` acting on indices `k + 1 ..`.
    reflectors: Vec<(f64, Vec<Complex64>)>,
}

/// Householder tridiagonalization. The pending rank-2 update of each step
/// is applied in the same sweep that forms the next matrix-vector product.
pub fn tridiagonalize(mut a: HermitianMatrix) -> Tridiagonal {
    let n = a.dim();
    let data = a.data_mut();
    let at = |i: usize, j: usize| i * n + j;
    let mut diag = vec![0.0; n];
    let mut sub = vec![Complex64::new(0.0, 0.0); n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(1));
    // pending update A -= v w^* + w v^*, both supported on indices >= start
    let mut pending: Option<(usize, Vec<Complex64>, Vec<Complex64>)> = None;
    for k in 0..n {
        if let Some((start, v, w)) = &pending {
            for i in k..n {
                let (vi, wi) = (v[i - start], w[i - start]);
                let (vk, wk) = (v[k - start], w[k - start]);
                data[at(i, k)] -= vi * wk.conj() + wi * vk.conj();
            }
        }
        diag[k] = data[at(k, k)].re;
        if k + 1 == n {
            break;
        }
        let m = n - k - 1;
        let x: Vec<Complex64> = (k + 1..n).map(|i| data[at(i, k)]).collect();
        let tail: f64 = x[1..].iter().map(|c| c.norm_sqr()).sum();
        let (beta, v) = if tail == 0.0 {
            sub[k] = x[0];
            (0.0, vec![Complex64::new(0.0, 0.0); m])
        } else {
            let norm = (x[0].norm_sqr() + tail).sqrt();
            let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
            let alpha = -phase * norm;
            let mut v = x.clone();
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            sub[k] = alpha;
            (2.0 / vv, v)
        };
        // sweep the trailing block: apply the pending update, accumulate p = A v
        let mut p = vec![Complex64::new(0.0, 0.0); m];
        let base = k + 1;
        for i in base..n {
            let row = &mut data[at(i, base)..at(i, i) + 1];
            if let Some((start, pv, pw)) = &pending {
                let off = base - start;
                let (vi, wi) = (pv[i - start], pw[i - start]);
                let (pv, pw) = (&pv[off..off + row.len()], &pw[off..off + row.len()]);
                for ((a, vj), wj) in row.iter_mut().zip(pv).zip(pw) {
                    *a -= vi * wj.conj() + wi * vj.conj();
                }
            }
            if beta != 0.0 {
                let li = i - base;
                let vi = v[li];
                let (lower, d) = row.split_at(li);
                let mut acc = d[0] * vi;
                for ((a, vj), pj) in lower.iter().zip(&v[..li]).zip(&mut p[..li]) {
                    acc += a * vj;
                    *pj += a.conj() * vi;
                }
                p[li] += acc;
            }
        }
        if beta != 0.0 {
            p.iter_mut().for_each(|c| *c *= beta);
            let vp: Complex64 = v.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
            let kk = 0.5 * beta * vp;
            let w: Vec<Complex64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
            pending = Some((base, v.clone(), w));
        } else {
            pending = None;
        }
        reflectors.push((beta, v));
    }
    let mut phases = vec![Complex64::new(1.0, 0.0); n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(1) {
        let r = sub[k].norm();
        off[k] = r;
        phases[k + 1] = if r > 0.0 { phases[k] * sub[k] / r } else { phases[k] };
    }
    Tridiagonal { diag, off, phases, reflectors }
}

impl Tridiagonal {
    /// Map an eigenvector of `T` to one of the original matrix.
    pub fn back_transform(&self, z: &[f64]) -> Vec<Complex64> {
        let mut y: Vec<Complex64> = z.iter().zip(&self.phases).map(|(a, d)| d * *a).collect();
        for (k, (beta, v)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut y[k + 1..];
            let s: Complex64 = v.iter().zip(tail.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() * *beta;
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= s * vi;
            }
        }
        y
    }
}

/// All eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL,
/// sorted ascending.
pub fn ql_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::numerical("QL iteration did not converge"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eig::band::bisect_eigenvalues;
    use crate::quantize::SymBanded;

    fn test_matrix(n: usize) -> HermitianMatrix {
        let mut m = HermitianMatrix::from_fn(n, |i, j| {
            let (a, b) = (i as f64, j as f64);
            Complex64::new((0.3 * a + 0.7 * b).sin() + (0.7 * a + 0.3 * b).sin(), (a - b) * 0.1 * (a * b * 0.01).cos())
        });
        m.symmetrize();
        m
    }

    #[test]
    fn ql_matches_bisection() {
        let diag: Vec<f64> = (0..60).map(|i| (i as f64 * 0.37).sin() * 3.0).collect();
        let off: Vec<f64> = (0..59).map(|i| 0.5 + (i as f64 * 0.11).cos().abs()).collect();
        let ql = ql_eigenvalues(&diag, &off).unwrap();
        let t = SymBanded::tridiagonal(diag, off).unwrap();
        let bi = bisect_eigenvalues(&t, 0, 60);
        for (a, b) in ql.iter().zip(&bi) {
            assert!((a - b).abs() < 1e-12, "{a} {b}");
        }
    }

    #[test]
    fn tridiagonalization_preserves_spectrum_and_vectors() {
        let n = 40;
        let a = test_matrix(n);
        let t = tridiagonalize(a.clone());
        let trace: f64 = (0..n).map(|i| a.get(i, i).re).sum();
        assert!((t.diag.iter().sum::<f64>() - trace).abs() < 1e-10);
        let frob: f64 = a.data().iter().map(|c| c.norm_sqr()).sum();
        let tf: f64 = t.diag.iter().map(|d| d * d).sum::<f64>() + 2.0 * t.off.iter().map(|e| e * e).sum::<f64>();
        assert!((frob - tf).abs() < 1e-9 * frob);
        // eigenvector of T maps to one of A
        let tb = SymBanded::tridiagonal(t.diag.clone(), t.off.clone()).unwrap();
        let ev = bisect_eigenvalues(&tb, 5, 6);
        let z = crate::eig::band::inverse_iteration(&tb, &ev, 1e-10).unwrap();
        let y = t.back_transform(&z[0].0);
        let ay = a.apply(&y);
        let r: f64 = ay.iter().zip(&y).map(|(u, v)| (u - v * ev[0]).norm_sqr()).sum::<f64>().sqrt();
        assert!(r < 1e-10, "residual {r}");
    }

    #[test]
    fn already_tridiagonal_input() {
        let n = 6;
        let a = HermitianMatrix::from_fn(n, |i, j| match i.abs_diff(j) {
            0 => Complex64::new(2.0, 0.0),
            1 => Complex64::new(0.0, if i > j { 1.0 } else { -1.0 }),
            _ => Complex64::new(0.0, 0.0),
        });
        let t = tridiagonalize(a);
        let ev = ql_eigenvalues(&t.diag, &t.off).unwrap();
        for (j, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12);
        }
    }
}
