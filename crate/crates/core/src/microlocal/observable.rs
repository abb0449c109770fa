use std::fmt;

use crate::cli::expr::{self, Compiled, Expr, Routing};
use crate::model::{PhaseBox, PhasePolynomial};
use crate::Result;

/// A real phase-space observable `a(x, xi)` with its quantization routing.
#[derive(Clone, Debug)]
pub struct Observable {
    expr: Expr,
    compiled: Compiled,
    routing: Routing,
    parts: Option<(Compiled, Compiled)>,
    label: String,
}

impl Observable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut obs = Self::from_expr(expr::parse(text)?);
        obs.label = text.trim().to_string();
        Ok(obs)
    }

    pub fn from_expr(expr: Expr) -> Self {
        let routing = expr.routing();
        let parts = match routing {
            Routing::Split => expr.split_parts().map(|(f, g)| (Compiled::new(&f), Compiled::new(&g))),
            _ => None,
        };
        Self { compiled: Compiled::new(&expr), label: expr.to_string(), expr, routing, parts }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_expr(Expr::Num(c))
    }

    pub fn from_phase_polynomial(p: &PhasePolynomial) -> Self {
        let mut acc: Option<Expr> = None;
        for t in p.terms() {
            let mut e = Expr::Num(t.coeff);
            if t.dx > 0 {
                e = Expr::Mul(Box::new(e), Box::new(Expr::Pow(Box::new(Expr::X), t.dx)));
            }
            if t.dxi > 0 {
                e = Expr::Mul(Box::new(e), Box::new(Expr::Pow(Box::new(Expr::Xi), t.dxi)));
            }
            acc = Some(match acc {
                None => e,
                Some(a) => Expr::Add(Box::new(a), Box::new(e)),
            });
        }
        Self::from_expr(acc.unwrap_or(Expr::Num(0.0)))
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn routing(&self) -> Routing {
        self.routing
    }

    #[inline]
    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        self.compiled.eval(x, xi)
    }

    /// Position part `f` of a split observable (the whole symbol when position-only).
    pub fn position_part(&self, x: f64) -> f64 {
        match (&self.parts, self.routing) {
            (Some((f, _)), _) => f.eval(x, 0.0),
            (None, Routing::PositionOnly) => self.compiled.eval(x, 0.0),
            _ => 0.0,
        }
    }

    /// Momentum part `g` of a split observable (the whole symbol when momentum-only).
    pub fn momentum_part(&self, xi: f64) -> f64 {
        match (&self.parts, self.routing) {
            (Some((_, g)), _) => g.eval(0.0, xi),
            (None, Routing::MomentumOnly) => self.compiled.eval(0.0, xi),
            _ => 0.0,
        }
    }

    /// The constant value when the observable does not depend on `x` or `xi`.
    pub fn as_constant(&self) -> Option<f64> {
        (!self.expr.uses_x() && !self.expr.uses_xi()).then(|| self.expr.eval(0.0, 0.0))
    }

    /// Sup and inf on a 512 x 512 lattice over the box.
    pub fn sampled_range(&self, bx: PhaseBox) -> (f64, f64) {
        const M: usize = 512;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..M {
            let x = bx.x.0 + (bx.x.1 - bx.x.0) * i as f64 / (M - 1) as f64;
            for j in 0..M {
                let xi = bx.xi.0 + (bx.xi.1 - bx.xi.0) * j as f64 / (M - 1) as f64;
                let v = self.eval(x, xi);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phase_polynomial_round_trip() {
        let p = PhasePolynomial::from_triples(&[(3, 0, 1.0), (4, 0, 1.0), (0, 3, -1.0), (0, 4, 1.0)]);
        let o = Observable::from_phase_polynomial(&p);
        assert_eq!(o.routing(), Routing::Split);
        for (x, xi) in [(0.2, 0.7), (-1.1, 0.4)] {
            assert!((o.eval(x, xi) - p.eval(x, xi)).abs() < 1e-12);
            assert!((o.position_part(x) + o.momentum_part(xi) - p.eval(x, xi)).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_detection() {
        assert_eq!(Observable::parse("2*3").unwrap().as_constant(), Some(6.0));
        assert_eq!(Observable::parse("x").unwrap().as_constant(), None);
    }
}
