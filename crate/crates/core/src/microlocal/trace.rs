use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Test function for the smoothed trace `sum phi((lambda_j - E_c)/h)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    Gaussian { sigma: f64 },
    /// 1 on `[-d, d]`, smooth monotone roll-off to 0 over `rolloff`.
    SmoothedIndicator { d: f64, rolloff: f64 },
}

const TAIL_TOL: f64 = 1e-8;

fn smooth_step(t: f64) -> f64 {
    let f = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        f(t) / (f(t) + f(1.0 - t))
    }
}

impl TestFunction {
    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            Self::Gaussian { sigma } => (-s * s / (2.0 * sigma * sigma)).exp(),
            Self::SmoothedIndicator { d, rolloff } => smooth_step((d + rolloff - s.abs()) / rolloff),
        }
    }

    /// Upper bound on the fraction of `int phi` carried by `|s| > reach`.
    pub fn tail_fraction(&self, reach: f64) -> f64 {
        match *self {
            Self::Gaussian { sigma } => {
                // erfc(u) <= exp(-u^2) / (u sqrt(pi))
                let u = reach / (sigma * std::f64::consts::SQRT_2);
                if u <= 0.0 {
                    1.0
                } else {
                    ((-u * u).exp() / (u * std::f64::consts::PI.sqrt())).min(1.0)
                }
            }
            Self::SmoothedIndicator { d, rolloff } => {
                if reach >= d + rolloff {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Gaussian { sigma } => sigma > 0.0 && sigma.is_finite(),
            Self::SmoothedIndicator { d, rolloff } => d > 0.0 && rolloff > 0.0 && (d + rolloff).is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid test function {self:?}")))
        }
    }
}

/// `gamma(E_c, h, phi) = sum_j w_j phi((lambda_j - E_c)/h)` over the weighted
/// eigenvalues within `eps` of `E_c`.
pub fn smoothed_trace(spectrum: &[(f64, u32)], e_c: f64, h: f64, phi: TestFunction, eps: f64) -> Result<f64> {
    phi.validate()?;
    let tail = phi.tail_fraction(eps / h);
    if tail >= TAIL_TOL {
        return Err(Error::config(format!(
            "spectral range eps = {eps} is too narrow for {phi:?} at h = {h}: tail mass {tail:e}; widen eps"
        )));
    }
    let terms: Vec<f64> = spectrum
        .iter()
        .filter(|(l, _)| (l - e_c).abs() <= eps)
        .map(|&(l, w)| w as f64 * phi.eval((l - e_c) / h))
        .collect();
    Ok(crate::util::pairwise_sum(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(h: f64, top: f64) -> Vec<(f64, u32)> {
        (0..).map(|j| (h * (2 * j + 1) as f64, 1)).take_while(|&(l, _)| l <= top).collect()
    }

    #[test]
    fn gaussian_on_harmonic_spectrum() {
        let h = 0.01;
        let g = smoothed_trace(&harmonic(h, 2.0), 1.0, h, TestFunction::Gaussian { sigma: 1.0 }, 0.2).unwrap();
        // oracle: offsets are odd multiples of h, so the sum is 2 sum_k exp(-(2k+1)^2 / 2)
        let oracle: f64 = 2.0 * (0..20).map(|k| (-((2 * k + 1) as f64).powi(2) / 2.0).exp()).sum::<f64>();
        assert!((g - oracle).abs() < 1e-12);
        assert!((g - (2.0 * std::f64::consts::PI).sqrt() / 2.0).abs() < 0.02);
    }

    #[test]
    fn empty_spectrum_is_zero() {
        let g = smoothed_trace(&[(5.0, 1)], 1.0, 0.01, TestFunction::Gaussian { sigma: 1.0 }, 0.1).unwrap();
        assert_eq!(g, 0.0);
    }

    #[test]
    fn narrow_range_is_rejected() {
        let r = smoothed_trace(&harmonic(0.01, 2.0), 1.0, 0.01, TestFunction::Gaussian { sigma: 1.0 }, 0.03);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn smoothed_indicator_brackets_the_count() {
        let h = 0.01;
        let spec = harmonic(h, 2.0);
        let (d, roll) = (4.5, 1.0);
        let g = smoothed_trace(&spec, 1.0, h, TestFunction::SmoothedIndicator { d, rolloff: roll }, 0.1).unwrap();
        let inside = spec.iter().filter(|(l, _)| ((l - 1.0) / h).abs() <= d).count() as f64;
        let band = spec.iter().filter(|(l, _)| { let s = ((l - 1.0) / h).abs(); s > d && s < d + roll }).count() as f64;
        assert!(g >= inside - 1e-12 && g <= inside + band + 1e-12);
    }
}
