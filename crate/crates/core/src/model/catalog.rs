use super::{PhasePolynomial, Polynomial1D, SymbolModel};
use crate::{Error, Result};

/// A named built-in model with the critical energy it is meant to be probed at.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub model: SymbolModel,
    pub description: &'static str,
    pub critical_energy: f64,
}

const NAMES: &[&str] = &[
    "harmonic",
    "deg-max",
    "quad-max",
    "quad-max-steep",
    "two-max",
    "radial-deg",
    "radial-harmonic",
    "pseudo-k3",
    "pseudo-k4",
];

pub fn catalog() -> Vec<CatalogEntry> {
    NAMES.iter().map(|n| catalog_entry(n).expect("catalog entries are valid")).collect()
}

pub fn catalog_entry(name: &str) -> Option<CatalogEntry> {
    let p = |c: &[f64]| Polynomial1D::new(c.to_vec());
    let (model, description, critical_energy) = match name {
        "harmonic" => (SymbolModel::schrodinger(name, p(&[0.0, 0.0, 1.0])), "V = x^2", 0.0),
        "deg-max" => (
            SymbolModel::schrodinger(name, p(&[0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0])),
            "V = -x^4 + x^6, degenerate maximum (k = 2) at the origin",
            0.0,
        ),
        "quad-max" => (
            SymbolModel::schrodinger(name, p(&[0.0, 0.0, -1.0, 0.0, 1.0])),
            "V = -x^2 + x^4, nondegenerate maximum with |V''(0)| = 2",
            0.0,
        ),
        "quad-max-steep" => (
            SymbolModel::schrodinger(name, p(&[0.0, 0.0, -4.0, 0.0, 16.0])),
            "V = -4x^2 + 16x^4, nondegenerate maximum with |V''(0)| = 8",
            0.0,
        ),
        "two-max" => (
            SymbolModel::schrodinger(name, p(&[0.0, 0.0, 1.0, 0.0, -2.0, 0.0, 1.0])),
            "V = x^2 (x^2 - 1)^2, two symmetric maxima at x = ±1/sqrt(3)",
            4.0 / 27.0,
        ),
        "radial-deg" => (
            SymbolModel::radial(name, p(&[0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0])),
            "2D radial V = -r^4 + r^6, degenerate maximum at the origin",
            0.0,
        ),
        "radial-harmonic" => (SymbolModel::radial(name, p(&[0.0, 0.0, 1.0])), "2D radial V = r^2", 0.0),
        "pseudo-k3" => (
            SymbolModel::phase(
                name,
                PhasePolynomial::from_triples(&[(3, 0, 1.0), (4, 0, 1.0), (0, 3, -1.0), (0, 4, 1.0)]),
            ),
            "p = x^3 - xi^3 + x^4 + xi^4, homogeneous cubic singularity (k = 3)",
            0.0,
        ),
        "pseudo-k4" => (
            SymbolModel::phase(
                name,
                PhasePolynomial::from_triples(&[(4, 0, 1.0), (6, 0, 1.0), (0, 4, -1.0), (0, 6, 1.0)]),
            ),
            "p = x^4 - xi^4 + x^6 + xi^6, homogeneous quartic singularity (k = 4)",
            0.0,
        ),
        _ => return None,
    };
    Some(CatalogEntry { model: model.ok()?, description, critical_energy })
}

/// A catalog name or an inline model:
/// `poly1d:c0,c1,...` (potential coefficients in ascending order),
/// `radial:c0,c1,...` (radial potential in `r`) or
/// `phase:i:j:c,...` (terms `c x^i xi^j`).
pub fn model_from_spec(spec: &str) -> Result<SymbolModel> {
    let spec = spec.trim();
    if let Some(e) = catalog_entry(spec) {
        return Ok(e.model);
    }
    let (kind, body) = spec
        .split_once(':')
        .ok_or_else(|| Error::config(format!("unknown model '{spec}' (see `models list`, or use poly1d:/radial:/phase:)")))?;
    let number = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::config(format!("bad coefficient '{t}' in model '{spec}'")));
    let coefficients = || body.split(',').map(number).collect::<Result<Vec<f64>>>();
    match kind {
        "poly1d" => SymbolModel::schrodinger(spec, Polynomial1D::new(coefficients()?)),
        "radial" => SymbolModel::radial(spec, Polynomial1D::new(coefficients()?)),
        "phase" => {
            let mut triples = Vec::new();
            for term in body.split(',') {
                let parts: Vec<&str> = term.split(':').collect();
                let [i, j, c] = parts.as_slice() else {
                    return Err(Error::config(format!("phase term '{term}' must be i:j:c")));
                };
                let power = |t: &str| t.trim().parse::<u32>().map_err(|_| Error::config(format!("bad power '{t}' in '{term}'")));
                triples.push((power(i)?, power(j)?, number(c)?));
            }
            SymbolModel::phase(spec, PhasePolynomial::from_triples(&triples))
        }
        other => Err(Error::config(format!("unknown model family '{other}' (poly1d, radial, phase)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inline_models() {
        let m = model_from_spec("poly1d:0,0,-1,0,1").unwrap();
        assert_eq!(m.potential(), catalog_entry("quad-max").unwrap().model.potential());
        let r = model_from_spec("radial:0,0,1").unwrap();
        assert_eq!(r.dimension(), 2);
        let p = model_from_spec("phase:3:0:1,4:0:1,0:3:-1,0:4:1").unwrap();
        assert_eq!(p.symbol(), catalog_entry("pseudo-k3").unwrap().model.symbol());
        assert_eq!(model_from_spec("harmonic").unwrap().name, "harmonic");
        for bad in ["nope", "poly1d:1,x", "phase:1:2", "cubic:1,2"] {
            assert!(matches!(model_from_spec(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn every_entry_has_a_critical_point_at_its_energy() {
        for e in catalog() {
            assert!(
                !e.model.critical_points_at(e.critical_energy).is_empty(),
                "{} has no critical point at {}",
                e.model.name,
                e.critical_energy
            );
        }
    }

    #[test]
    fn two_max_has_two_maxima_at_four_27ths() {
        let e = catalog_entry("two-max").unwrap();
        let at = e.model.critical_points_at(4.0 / 27.0);
        assert_eq!(at.len(), 2);
        for c in at {
            assert!((c.x0.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        }
    }
}
