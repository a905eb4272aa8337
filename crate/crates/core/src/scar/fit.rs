use super::ladder::BSLadder;
use super::width::WidthSample;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// α near 1/3.
    Superscar,
    /// α near 1/2.
    OrdinaryScar,
    Indeterminate,
}

impl Classification {
    /// Within `max(0.05, 2·err)` of exactly one of 1/3 and 1/2.
    pub fn of(alpha: f64, err: f64) -> Self {
        let tol = 0.05_f64.max(2.0 * err);
        let near_third = (alpha - 1.0 / 3.0).abs() <= tol;
        let near_half = (alpha - 0.5).abs() <= tol;
        match (near_third, near_half) {
            (true, false) => Classification::Superscar,
            (false, true) => Classification::OrdinaryScar,
            _ => Classification::Indeterminate,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Superscar => "superscar",
            Classification::OrdinaryScar => "ordinary-scar",
            Classification::Indeterminate => "indeterminate",
        }
    }
}

/// `σ = c · (n + ν/4)^{−α}` fitted as a straight line in log–log space.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ScalingFit {
    /// `(n + ν/4, σ)` pairs.
    pub points: Vec<(f64, f64)>,
    pub ns: Vec<usize>,
    pub alpha: f64,
    pub alpha_err: f64,
    pub prefactor: f64,
    pub classification: Classification,
}

impl ScalingFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.prefactor * x.powf(-self.alpha)
    }
}

/// Unweighted least squares on `(ln(n + ν/4), ln σ)`.
pub fn scaling_fit(samples: &[WidthSample], ladder: &BSLadder) -> Result<ScalingFit> {
    scaling_fit_weighted(samples, ladder, None)
}

/// Weighted least squares; `weights` apply to the log residuals.
pub fn scaling_fit_weighted(samples: &[WidthSample], ladder: &BSLadder, weights: Option<&[f64]>) -> Result<ScalingFit> {
    let mut sorted: Vec<&WidthSample> = samples.iter().collect();
    sorted.sort_by_key(|s| s.n);
    if sorted.len() < 4 {
        return Err(Error::Contract(format!("a scaling fit needs at least 4 samples, got {}", sorted.len())));
    }
    if let Some(bad) = sorted.iter().find(|s| !(s.sigma > 0.0 && s.sigma.is_finite())) {
        return Err(Error::Data(format!("non-positive width {} at n = {}", bad.sigma, bad.n)));
    }
    let xs: Vec<f64> = sorted.iter().map(|s| ladder.quantum_number(s.n)).collect();
    if xs.iter().any(|x| *x <= 0.0) {
        return Err(Error::Contract("n + ν/4 must be positive".into()));
    }
    if xs[xs.len() - 1] < 2.0 * xs[0] {
        return Err(Error::Contract(format!(
            "n + ν/4 spans only {:.3}..{:.3}; need at least a factor 2",
            xs[0],
            xs[xs.len() - 1]
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = sorted.iter().map(|s| s.sigma.ln()).collect();
    let w: Vec<f64> = match weights {
        Some(w) if w.len() == lx.len() => w.to_vec(),
        Some(w) => return Err(Error::Contract(format!("{} weights for {} samples", w.len(), lx.len()))),
        None => vec![1.0; lx.len()],
    };
    let sw: f64 = w.iter().sum();
    let mx = w.iter().zip(&lx).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = w.iter().zip(&ly).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&lx).map(|(a, x)| a * (x - mx).powi(2)).sum();
    let sxy: f64 = w.iter().zip(lx.iter().zip(&ly)).map(|(a, (x, y))| a * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let n = lx.len() as f64;
    let rss: f64 = w.iter().zip(lx.iter().zip(&ly)).map(|(a, (x, y))| a * (y - intercept - slope * x).powi(2)).sum();
    let alpha_err = (rss / (n - 2.0) / sxx).sqrt();
    let alpha = -slope;
    Ok(ScalingFit {
        points: xs.iter().copied().zip(sorted.iter().map(|s| s.sigma)).collect(),
        ns: sorted.iter().map(|s| s.n).collect(),
        alpha,
        alpha_err,
        prefactor: intercept.exp(),
        classification: Classification::of(alpha, alpha_err),
    })
}

#[cfg(test)]
mod tests {
    use super::super::ladder::bs_ladder;
    use super::*;

    fn sample(n: usize, sigma: f64) -> WidthSample {
        WidthSample { n, sigma, r: vec![], variance: vec![], weight: vec![] }
    }

    #[test]
    fn exact_power_law() {
        let l = bs_ladder(3.5, 2, 3..=12).unwrap();
        let s: Vec<_> = (3..=12).map(|n| sample(n, 0.7 * l.quantum_number(n).powf(-1.0 / 3.0))).collect();
        let f = scaling_fit(&s, &l).unwrap();
        assert!((f.alpha - 1.0 / 3.0).abs() < 1e-12);
        assert!((f.prefactor - 0.7).abs() < 1e-12);
        assert_eq!(f.classification, Classification::Superscar);
    }

    #[test]
    fn preconditions() {
        let l = bs_ladder(3.5, 2, 3..=20).unwrap();
        let three: Vec<_> = (3..6).map(|n| sample(n, 1.0)).collect();
        assert!(scaling_fit(&three, &l).is_err());
        let narrow: Vec<_> = (3..7).map(|n| sample(n, 1.0)).collect();
        assert!(scaling_fit(&narrow, &l).is_err());
        let mut bad: Vec<_> = (3..12).map(|n| sample(n, 1.0)).collect();
        bad[2].sigma = 0.0;
        assert!(matches!(scaling_fit(&bad, &l), Err(Error::Data(_))));
    }

    #[test]
    fn classification_bands() {
        assert_eq!(Classification::of(0.35, 0.01), Classification::Superscar);
        assert_eq!(Classification::of(0.52, 0.01), Classification::OrdinaryScar);
        assert_eq!(Classification::of(0.42, 0.01), Classification::Indeterminate);
        assert_eq!(Classification::of(0.42, 0.1), Classification::Indeterminate);
    }
}
