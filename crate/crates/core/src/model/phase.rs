use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::poly::Polynomial1D;

/// One monomial `coeff * x^dx * xi^dxi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseTerm {
    pub dx: u32,
    pub dxi: u32,
    pub coeff: f64,
}

/// Real polynomial on phase space `(x, xi)`.
///
/// Terms are kept merged by exponent pair and sorted, so structurally equal
/// polynomials compare equal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePolynomial {
    terms: Vec<PhaseTerm>,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl PhasePolynomial {
    pub fn new(terms: impl IntoIterator<Item = PhaseTerm>) -> Self {
        let mut merged: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for t in terms {
            *merged.entry((t.dx, t.dxi)).or_insert(0.0) += t.coeff;
        }
        Self {
            terms: merged
                .into_iter()
                .filter(|(_, c)| *c != 0.0)
                .map(|((dx, dxi), coeff)| PhaseTerm { dx, dxi, coeff })
                .collect(),
        }
    }

    /// Build from `(dx, dxi, coeff)` triples.
    pub fn from_triples(triples: &[(u32, u32, f64)]) -> Self {
        Self::new(triples.iter().map(|&(dx, dxi, coeff)| PhaseTerm { dx, dxi, coeff }))
    }

    /// `f(x) + g(xi)`.
    pub fn split(f: &Polynomial1D, g: &Polynomial1D) -> Self {
        let fx = f.coefficients().iter().enumerate().map(|(i, &c)| PhaseTerm { dx: i as u32, dxi: 0, coeff: c });
        let gxi = g.coefficients().iter().enumerate().map(|(i, &c)| PhaseTerm { dx: 0, dxi: i as u32, coeff: c });
        Self::new(fx.chain(gxi))
    }

    pub fn terms(&self) -> &[PhaseTerm] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.dx + t.dxi).max().unwrap_or(0)
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff * x.powi(t.dx as i32) * xi.powi(t.dxi as i32))
            .sum()
    }

    pub fn d_dx(&self) -> Self {
        Self::new(self.terms.iter().filter(|t| t.dx > 0).map(|t| PhaseTerm {
            dx: t.dx - 1,
            dxi: t.dxi,
            coeff: t.coeff * t.dx as f64,
        }))
    }

    pub fn d_dxi(&self) -> Self {
        Self::new(self.terms.iter().filter(|t| t.dxi > 0).map(|t| PhaseTerm {
            dx: t.dx,
            dxi: t.dxi - 1,
            coeff: t.coeff * t.dxi as f64,
        }))
    }

    pub fn gradient(&self, x: f64, xi: f64) -> (f64, f64) {
        let mut gx = 0.0;
        let mut gxi = 0.0;
        for t in &self.terms {
            if t.dx > 0 {
                gx += t.coeff * t.dx as f64 * x.powi(t.dx as i32 - 1) * xi.powi(t.dxi as i32);
            }
            if t.dxi > 0 {
                gxi += t.coeff * t.dxi as f64 * x.powi(t.dx as i32) * xi.powi(t.dxi as i32 - 1);
            }
        }
        (gx, gxi)
    }

    /// Re-expansion `p(x0 + u, xi0 + v)` as a polynomial in `(u, v)`.
    pub fn taylor_at(&self, x0: f64, xi0: f64) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            for i in 0..=t.dx {
                for j in 0..=t.dxi {
                    let c = t.coeff
                        * binomial(t.dx, i)
                        * binomial(t.dxi, j)
                        * x0.powi((t.dx - i) as i32)
                        * xi0.powi((t.dxi - j) as i32);
                    out.push(PhaseTerm { dx: i, dxi: j, coeff: c });
                }
            }
        }
        Self::new(out)
    }

    /// Terms of total degree exactly `k`.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        Self::new(self.terms.iter().copied().filter(|t| t.dx + t.dxi == k))
    }

    /// Lowest total degree `>= min_degree` whose homogeneous part has a
    /// coefficient above `tol` relative to the largest coefficient.
    pub fn lowest_degree_from(&self, min_degree: u32, tol: f64) -> Option<u32> {
        let scale = self.terms.iter().fold(0.0f64, |m, t| m.max(t.coeff.abs())).max(1.0);
        self.terms
            .iter()
            .filter(|t| t.dx + t.dxi >= min_degree && t.coeff.abs() > tol * scale)
            .map(|t| t.dx + t.dxi)
            .min()
    }

    /// Drop coefficients below `tol` relative to the largest one.
    pub fn cleaned(&self, tol: f64) -> Self {
        let scale = self.terms.iter().fold(0.0f64, |m, t| m.max(t.coeff.abs())).max(1.0);
        Self::new(self.terms.iter().copied().filter(|t| t.coeff.abs() > tol * scale))
    }

    /// Decompose as `f(x) + g(xi)` when no mixed monomial is present.
    ///
    /// The constant term is attributed to `f`.
    pub fn as_split(&self) -> Option<(Polynomial1D, Polynomial1D)> {
        if self.terms.iter().any(|t| t.dx > 0 && t.dxi > 0) {
            return None;
        }
        let mut f = vec![0.0; self.degree() as usize + 1];
        let mut g = vec![0.0; self.degree() as usize + 1];
        for t in &self.terms {
            if t.dxi == 0 {
                f[t.dx as usize] += t.coeff;
            } else {
                g[t.dxi as usize] += t.coeff;
            }
        }
        Some((Polynomial1D::new(f), Polynomial1D::new(g)))
    }

    /// Value on the unit circle at angle `theta`.
    pub fn on_circle(&self, theta: f64) -> f64 {
        self.eval(theta.cos(), theta.sin())
    }

    /// Conservative enclosure of the range over a box, by interval monomials.
    pub fn range_on(&self, x: (f64, f64), xi: (f64, f64)) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for t in &self.terms {
            let (a, b) = ipow(x, t.dx);
            let (c, d) = ipow(xi, t.dxi);
            let prods = [a * c, a * d, b * c, b * d];
            let mut mlo = prods.iter().copied().fold(f64::INFINITY, f64::min);
            let mut mhi = prods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if t.coeff < 0.0 {
                std::mem::swap(&mut mlo, &mut mhi);
            }
            lo += t.coeff * mlo;
            hi += t.coeff * mhi;
        }
        (lo, hi)
    }
}

fn ipow((a, b): (f64, f64), n: u32) -> (f64, f64) {
    if n == 0 {
        return (1.0, 1.0);
    }
    let (pa, pb) = (a.powi(n as i32), b.powi(n as i32));
    if n % 2 == 1 {
        (pa, pb)
    } else if a <= 0.0 && b >= 0.0 {
        (0.0, pa.max(pb))
    } else {
        (pa.min(pb), pa.max(pb))
    }
}

impl fmt::Display for PhasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let sign = if t.coeff < 0.0 { "-" } else if i > 0 { "+" } else { "" };
            if i > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            write!(f, "{}", t.coeff.abs())?;
            match t.dx {
                0 => {}
                1 => write!(f, "*x")?,
                n => write!(f, "*x^{n}")?,
            }
            match t.dxi {
                0 => {}
                1 => write!(f, "*xi")?,
                n => write!(f, "*xi^{n}")?,
            }
        }
        Ok(())
    }
}
