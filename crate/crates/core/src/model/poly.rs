use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Real polynomial in one variable; `coefficients[i]` multiplies `x^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polynomial1D {
    coefficients: Vec<f64>,
}

impl Polynomial1D {
    pub fn new(mut coefficients: Vec<f64>) -> Self {
        while coefficients.len() > 1 && coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(0.0);
        }
        Self { coefficients }
    }

    pub fn zero() -> Self {
        Self::new(vec![0.0])
    }

    pub fn monomial(degree: usize, coeff: f64) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[degree] = coeff;
        Self::new(c)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|&c| c == 0.0)
    }

    /// Degree of the polynomial; the zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading_coefficient(&self) -> f64 {
        *self.coefficients.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coefficients.len() == 1 {
            return Self::zero();
        }
        Self::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Coefficients of `p(x0 + u)` as a polynomial in `u`.
    pub fn taylor_at(&self, x0: f64) -> Self {
        // Repeated synthetic division by (x - x0).
        let mut c = self.coefficients.clone();
        let n = c.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                c[j] += x0 * c[j + 1];
            }
        }
        Self::new(c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coefficients.len().max(other.coefficients.len());
        Self::new(
            (0..n)
                .map(|i| {
                    self.coefficients.get(i).copied().unwrap_or(0.0)
                        + other.coefficients.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coefficients.iter().map(|c| c * s).collect())
    }

    pub fn shift_constant(&self, delta: f64) -> Self {
        let mut c = self.coefficients.clone();
        c[0] += delta;
        Self::new(c)
    }

    /// Polynomial in `x` equal to `p(s * x)`.
    pub fn rescale_argument(&self, s: f64) -> Self {
        Self::new(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| c * s.powi(i as i32))
                .collect(),
        )
    }

    /// Divide by `(x - root)`, dropping the remainder.
    pub fn deflate(&self, root: f64) -> Self {
        let n = self.coefficients.len();
        if n == 1 {
            return Self::zero();
        }
        let mut q = vec![0.0; n - 1];
        let mut carry = 0.0;
        for i in (1..n).rev() {
            carry = self.coefficients[i] + carry * root;
            q[i - 1] = carry;
        }
        Self::new(q)
    }

    /// Index of the first nonvanishing Taylor coefficient at `x0` beyond the constant.
    ///
    /// Coefficients below `tol * scale` are treated as zero, where `scale` is the
    /// largest Taylor coefficient magnitude.
    pub fn vanishing_order_at(&self, x0: f64, tol: f64) -> Option<usize> {
        let t = self.taylor_at(x0);
        let scale = t.coefficients.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
        t.coefficients
            .iter()
            .enumerate()
            .skip(1)
            .find(|(_, c)| c.abs() > tol * scale)
            .map(|(i, _)| i)
    }

    /// All real roots in `[a, b]`, sorted, multiple roots reported once.
    ///
    /// Isolation is recursive: between consecutive roots of the derivative the
    /// polynomial is monotone, so each sign change brackets exactly one root,
    /// which is refined by bisection. Derivative roots at which the polynomial
    /// itself vanishes are multiple roots.
    pub fn real_roots(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::config(format!("invalid root search interval [{a}, {b}]")));
        }
        if self.is_zero() {
            return Err(Error::numerical("root isolation of the zero polynomial"));
        }
        self.roots_rec(a, b)
    }

    fn roots_rec(&self, a: f64, b: f64) -> Result<Vec<f64>> {
        let deg = self.degree();
        if deg == 0 {
            return Ok(Vec::new());
        }
        if deg == 1 {
            let r = -self.coefficients[0] / self.coefficients[1];
            return Ok(if (a..=b).contains(&r) { vec![r] } else { Vec::new() });
        }
        let crit = self.derivative().roots_rec(a, b)?;
        let scale = self.magnitude_on(a, b);
        let zero_tol = 1e-13 * scale;
        let mut knots = Vec::with_capacity(crit.len() + 2);
        knots.push(a);
        knots.extend(crit.iter().copied().filter(|&c| c > a && c < b));
        knots.push(b);
        let mut roots = Vec::new();
        for (i, &c) in knots.iter().enumerate() {
            if self.eval(c).abs() <= zero_tol {
                roots.push(c);
            }
            if i + 1 < knots.len() {
                let (lo, hi) = (c, knots[i + 1]);
                let (flo, fhi) = (self.eval(lo), self.eval(hi));
                if flo.abs() > zero_tol && fhi.abs() > zero_tol && flo.signum() != fhi.signum() {
                    roots.push(self.bisect(lo, hi)?);
                }
            }
        }
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (1.0 + y.abs()));
        Ok(roots)
    }

    fn magnitude_on(&self, a: f64, b: f64) -> f64 {
        let r = a.abs().max(b.abs()).max(1.0);
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * r.powi(i as i32))
            .sum::<f64>()
            .max(f64::MIN_POSITIVE)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64) -> Result<f64> {
        let flo = self.eval(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.eval(mid);
            if fm == 0.0 {
                return Ok(mid);
            }
            if fm.signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let r = 0.5 * (lo + hi);
        if (hi - lo) > 1e-12 * (1.0 + r.abs()) {
            return Err(Error::numerical(format!(
                "root bisection did not converge on [{lo}, {hi}]"
            )));
        }
        Ok(r)
    }
}

impl fmt::Display for Polynomial1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coefficients.iter().enumerate() {
            if c == 0.0 && self.coefficients.len() > 1 {
                continue;
            }
            if !first {
                write!(f, " {} ", if c < 0.0 { '-' } else { '+' })?;
            } else if c < 0.0 {
                write!(f, "-")?;
            }
            let m = c.abs();
            match i {
                0 => write!(f, "{m}")?,
                1 => write!(f, "{m}*x")?,
                _ => write!(f, "{m}*x^{i}")?,
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn roots_of_fig1_gradient() {
        // V = -x^4 + x^6, V' = -4x^3 + 6x^5 = 2x^3(3x^2 - 2).
        let dv = Polynomial1D::new(vec![0.0, 0.0, 0.0, -4.0, 0.0, 6.0]);
        let roots = dv.real_roots(-2.0, 2.0).unwrap();
        let s = (2.0f64 / 3.0).sqrt();
        assert_eq!(roots.len(), 3, "{roots:?}");
        assert!((roots[0] + s).abs() < 1e-12);
        assert!(roots[1].abs() < 1e-12);
        assert!((roots[2] - s).abs() < 1e-12);
        for r in roots {
            assert!(dv.eval(r).abs() <= 1e-12);
        }
    }

    #[test]
    fn double_root_without_sign_change() {
        let p = Polynomial1D::new(vec![1.0, -2.0, 1.0]); // (x-1)^2
        let roots = p.real_roots(-3.0, 3.0).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn taylor_and_order() {
        let v = Polynomial1D::new(vec![0.0, 0.0, -1.0, 0.0, 1.0]);
        let x0 = (0.5f64).sqrt();
        let t = v.taylor_at(x0);
        assert!((t.coefficients()[0] + 0.25).abs() < 1e-14);
        assert!(t.coefficients()[1].abs() < 1e-14);
        assert_eq!(v.vanishing_order_at(x0, 1e-10), Some(2));
        let v6 = Polynomial1D::new(vec![0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0]);
        assert_eq!(v6.vanishing_order_at(0.0, 1e-12), Some(4));
    }

    #[test]
    fn deflate_removes_root() {
        let p = Polynomial1D::new(vec![-6.0, 11.0, -6.0, 1.0]); // (x-1)(x-2)(x-3)
        let q = p.deflate(1.0);
        assert_eq!(q.coefficients(), &[6.0, -5.0, 1.0]);
    }

    proptest! {
        #[test]
        fn eval_at_zero_and_derivative_degree(c in prop::collection::vec(-5.0f64..5.0, 2..8)) {
            let mut c = c;
            if *c.last().unwrap() == 0.0 { *c.last_mut().unwrap() = 1.0; }
            let p = Polynomial1D::new(c.clone());
            prop_assert_eq!(p.eval(0.0), c[0]);
            prop_assert_eq!(p.derivative().degree(), p.degree() - 1);
        }

        #[test]
        fn taylor_reexpansion_reproduces(c in prop::collection::vec(-3.0f64..3.0, 1..7),
                                         x0 in -1.5f64..1.5, u in -1.0f64..1.0) {
            let p = Polynomial1D::new(c);
            let t = p.taylor_at(x0);
            let scale = 1.0 + p.coefficients().iter().map(|c| c.abs()).sum::<f64>() * 20.0;
            prop_assert!((t.eval(u) - p.eval(x0 + u)).abs() <= 1e-12 * scale);
        }
    }
}
