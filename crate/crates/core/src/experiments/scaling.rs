use serde::Serialize;

use crate::model::{CriticalKind, CriticalPoint, Family, SymbolModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawOrigin {
    RegularWeyl,
    SchrodingerCritical,
    HomogeneousCritical,
}

impl LawOrigin {
    pub fn label(self) -> &'static str {
        match self {
            Self::RegularWeyl => "regular",
            Self::SchrodingerCritical => "schrodinger-critical",
            Self::HomogeneousCritical => "homogeneous-critical",
        }
    }
}

/// `Upsilon(h) ~ c h^alpha |log h|^beta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingLaw {
    pub alpha: f64,
    pub beta: u8,
    pub coefficient: Option<f64>,
    pub origin: LawOrigin,
}

impl ScalingLaw {
    /// Shape `h^alpha |log h|^beta` without the coefficient.
    pub fn shape(&self, h: f64) -> f64 {
        h.powf(self.alpha) * h.ln().abs().powi(self.beta as i32)
    }

    /// Whether this law grows at least as fast as `other` as `h -> 0`.
    pub fn dominates(&self, other: &ScalingLaw) -> bool {
        const TIE: f64 = 1e-12;
        self.alpha < other.alpha - TIE || ((self.alpha - other.alpha).abs() <= TIE && self.beta >= other.beta)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawBranch {
    Regular,
    Critical,
}

/// Predicted window-count law for one contribution in dimension `n`.
pub fn predict_scaling(model: &SymbolModel, cp: Option<&CriticalPoint>, branch: LawBranch) -> ScalingLaw {
    let n = model.dimension() as f64;
    let regular = ScalingLaw { alpha: 1.0 - n, beta: 0, coefficient: None, origin: LawOrigin::RegularWeyl };
    let cp = match (branch, cp) {
        (LawBranch::Regular, _) | (_, None) => return regular,
        (LawBranch::Critical, Some(cp)) => cp,
    };
    match model.family {
        Family::Schrodinger1d { .. } | Family::Radial2d { .. } => {
            let k = (cp.order / 2).max(1) as f64;
            let alpha = -n + n / 2.0 + n / (2.0 * k);
            let exponent = n * (k + 1.0) / (2.0 * k);
            let integral = (exponent - exponent.round()).abs() < 1e-12;
            let beta = u8::from(cp.kind == CriticalKind::Max && integral && model.dimension() % 2 == 1);
            ScalingLaw { alpha, beta, coefficient: None, origin: LawOrigin::SchrodingerCritical }
        }
        Family::Phase1d { .. } => {
            let k = cp.order as f64;
            let ratio = 2.0 * n / k;
            let beta = u8::from(cp.kind != CriticalKind::Min && (ratio - ratio.round()).abs() < 1e-12);
            ScalingLaw { alpha: ratio - n, beta, coefficient: None, origin: LawOrigin::HomogeneousCritical }
        }
    }
}

/// Candidate laws at `e_c`: the regular law and one per critical point on the level.
pub fn candidate_laws(model: &SymbolModel, e_c: f64) -> Vec<ScalingLaw> {
    let mut laws = vec![predict_scaling(model, None, LawBranch::Regular)];
    for cp in model.critical_points_at(e_c) {
        let law = predict_scaling(model, Some(cp), LawBranch::Critical);
        if !laws.contains(&law) {
            laws.push(law);
        }
    }
    laws
}

/// The fastest-growing candidate at `e_c`.
pub fn dominant_law(model: &SymbolModel, e_c: f64) -> ScalingLaw {
    candidate_laws(model, e_c)
        .into_iter()
        .reduce(|best, l| if l.dominates(&best) && l != best { l } else { best })
        .expect("the regular law is always a candidate")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{catalog_entry, Polynomial1D};

    fn law(name: &str) -> ScalingLaw {
        let e = catalog_entry(name).unwrap();
        dominant_law(&e.model, e.critical_energy)
    }

    #[test]
    fn catalog_laws() {
        let deg = law("deg-max");
        assert_eq!((deg.alpha, deg.beta, deg.origin), (-0.25, 0, LawOrigin::SchrodingerCritical));
        let quad = law("quad-max");
        assert_eq!((quad.alpha, quad.beta), (0.0, 1));
        let k3 = law("pseudo-k3");
        assert!((k3.alpha + 1.0 / 3.0).abs() < 1e-15 && k3.beta == 0);
        let k4 = law("pseudo-k4");
        assert_eq!((k4.alpha, k4.beta), (-0.5, 0));
        let radial = law("radial-deg");
        assert_eq!((radial.alpha, radial.origin), (-1.0, LawOrigin::RegularWeyl));
        assert_eq!(law("harmonic").alpha, 0.0);
        assert_eq!(law("harmonic").beta, 0);
    }

    #[test]
    fn radial_critical_branch_is_subdominant() {
        let e = catalog_entry("radial-deg").unwrap();
        let cp = e.model.critical_points_at(0.0)[0];
        let c = predict_scaling(&e.model, Some(cp), LawBranch::Critical);
        assert_eq!((c.alpha, c.beta), (-0.5, 0));
    }

    #[test]
    fn homogeneous_k2_gets_a_log() {
        let m = SymbolModel::phase(
            "k2",
            crate::model::PhasePolynomial::from_triples(&[(2, 0, 1.0), (0, 2, -1.0), (4, 0, 1.0), (0, 4, 1.0)]),
        )
        .unwrap();
        let l = dominant_law(&m, 0.0);
        assert_eq!((l.alpha, l.beta), (0.0, 1));
    }

    #[test]
    fn sextic_maximum() {
        let m = SymbolModel::schrodinger("k3", Polynomial1D::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0])).unwrap();
        let l = dominant_law(&m, 0.0);
        assert!((l.alpha + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(l.beta, 0);
    }
}
