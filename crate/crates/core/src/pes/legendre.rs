//! Legendre-series potentials `V(R, θ) = Σ_λ P_λ(cos θ) v_λ(R)`.

use super::spline::CubicSpline;
use super::Derivs;
use crate::units::EnergyUnit;
use crate::{Error, Result};

/// `P_λ(x)`, `P'_λ(x)`, `P''_λ(x)` for λ = 0..=lmax (derivatives in x).
pub fn legendre_table(x: f64, lmax: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; lmax + 1];
    let mut dp = vec![0.0; lmax + 1];
    let mut ddp = vec![0.0; lmax + 1];
    p[0] = 1.0;
    if lmax >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for n in 1..lmax {
        let nf = n as f64;
        p[n + 1] = ((2.0 * nf + 1.0) * x * p[n] - nf * p[n - 1]) / (nf + 1.0);
        // P'_{n+1} = P'_{n-1} + (2n+1) P_n, and likewise one order up
        dp[n + 1] = dp[n - 1] + (2.0 * nf + 1.0) * p[n];
        ddp[n + 1] = ddp[n - 1] + (2.0 * nf + 1.0) * dp[n];
    }
    (p, dp, ddp)
}

/// Closed-form radial contribution.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticForm {
    /// `c`
    Constant { c: f64 },
    /// `Σ_k c_k R^k`
    Polynomial { coeffs: Vec<f64> },
    /// `a·exp(−b (R − r0))`
    Exponential { a: f64, b: f64, r0: f64 },
    /// `c / R^n`
    InversePower { c: f64, n: f64 },
    /// `d (1 − exp(−a (R − re)))² − d`
    Morse { d: f64, a: f64, re: f64 },
}

impl AnalyticForm {
    pub fn name(&self) -> &'static str {
        match self {
            AnalyticForm::Constant { .. } => "constant",
            AnalyticForm::Polynomial { .. } => "polynomial",
            AnalyticForm::Exponential { .. } => "exponential",
            AnalyticForm::InversePower { .. } => "inverse-power",
            AnalyticForm::Morse { .. } => "morse",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            AnalyticForm::Constant { c } => vec![*c],
            AnalyticForm::Polynomial { coeffs } => coeffs.clone(),
            AnalyticForm::Exponential { a, b, r0 } => vec![*a, *b, *r0],
            AnalyticForm::InversePower { c, n } => vec![*c, *n],
            AnalyticForm::Morse { d, a, re } => vec![*d, *a, *re],
        }
    }

    pub fn from_name(name: &str, p: &[f64]) -> std::result::Result<Self, String> {
        let want = |k: usize| {
            if p.len() == k {
                Ok(())
            } else {
                Err(format!("form `{name}` takes {k} parameters, got {}", p.len()))
            }
        };
        Ok(match name {
            "constant" => {
                want(1)?;
                AnalyticForm::Constant { c: p[0] }
            }
            "polynomial" => {
                if p.is_empty() {
                    return Err("form `polynomial` needs at least one coefficient".into());
                }
                AnalyticForm::Polynomial { coeffs: p.to_vec() }
            }
            "exponential" => {
                want(3)?;
                AnalyticForm::Exponential { a: p[0], b: p[1], r0: p[2] }
            }
            "inverse-power" => {
                want(2)?;
                AnalyticForm::InversePower { c: p[0], n: p[1] }
            }
            "morse" => {
                want(3)?;
                AnalyticForm::Morse { d: p[0], a: p[1], re: p[2] }
            }
            other => return Err(format!("unknown analytic form `{other}`")),
        })
    }

    fn eval3(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            AnalyticForm::Constant { c } => (c, 0.0, 0.0),
            AnalyticForm::Polynomial { ref coeffs } => {
                let (mut v, mut d, mut dd) = (0.0, 0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    dd = dd * r + 2.0 * d;
                    d = d * r + v;
                    v = v * r + c;
                }
                (v, d, dd)
            }
            AnalyticForm::Exponential { a, b, r0 } => {
                let e = a * (-b * (r - r0)).exp();
                (e, -b * e, b * b * e)
            }
            AnalyticForm::InversePower { c, n } => {
                let v = c * r.powf(-n);
                (v, -n * v / r, n * (n + 1.0) * v / (r * r))
            }
            AnalyticForm::Morse { d, a, re } => {
                let e = (-a * (r - re)).exp();
                let v = d * (1.0 - e) * (1.0 - e) - d;
                let dv = 2.0 * d * a * e * (1.0 - e);
                let ddv = 2.0 * d * a * a * e * (2.0 * e - 1.0);
                (v, dv, ddv)
            }
        }
    }
}

/// One radial coefficient `v_λ(R)`, either tabulated (natural cubic spline)
/// or a sum of analytic forms (e.g. short-range + long-range parts).
#[derive(Debug, Clone, PartialEq)]
pub enum RadialTerm {
    Table(CubicSpline),
    Analytic(Vec<AnalyticForm>),
}

impl RadialTerm {
    /// Raw (file-unit) value and R-derivatives.
    pub fn eval3(&self, r: f64) -> (f64, f64, f64) {
        match self {
            RadialTerm::Table(s) => s.eval3(r),
            RadialTerm::Analytic(forms) => forms.iter().fold((0.0, 0.0, 0.0), |acc, f| {
                let (v, d, dd) = f.eval3(r);
                (acc.0 + v, acc.1 + d, acc.2 + dd)
            }),
        }
    }

    fn r_range(&self) -> Option<(f64, f64)> {
        match self {
            RadialTerm::Table(s) => Some(s.range()),
            RadialTerm::Analytic(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LegendreSeries {
    terms: Vec<RadialTerm>,
    unit: EnergyUnit,
}

impl LegendreSeries {
    /// `terms[λ]` holds `v_λ`; Λ is `terms.len() - 1`.
    pub fn new(terms: Vec<RadialTerm>, unit: EnergyUnit) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Data("Legendre series needs at least the λ = 0 term".into()));
        }
        Ok(Self { terms, unit })
    }

    pub fn lambda_max(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn terms(&self) -> &[RadialTerm] {
        &self.terms
    }

    pub fn unit(&self) -> EnergyUnit {
        self.unit
    }

    /// Intersection of the tabulated R ranges, if any term is tabulated.
    pub fn table_range(&self) -> Option<(f64, f64)> {
        self.terms.iter().filter_map(RadialTerm::r_range).fold(None, |acc, (a, b)| match acc {
            None => Some((a, b)),
            Some((lo, hi)) => Some((lo.max(a), hi.min(b))),
        })
    }

    pub(crate) fn derivs(&self, r: f64, theta: f64) -> Derivs {
        let (s, x) = theta.sin_cos();
        let (p, dp, ddp) = legendre_table(x, self.lambda_max());
        let mut out = Derivs::default();
        for (l, term) in self.terms.iter().enumerate() {
            let (v, dv, ddv) = term.eval3(r);
            // θ-derivatives of P_λ(cos θ)
            let pt = -s * dp[l];
            let ptt = s * s * ddp[l] - x * dp[l];
            out.v += p[l] * v;
            out.v_r += p[l] * dv;
            out.v_rr += p[l] * ddv;
            out.v_t += pt * v;
            out.v_tt += ptt * v;
            out.v_rt += pt * dv;
        }
        out.scaled(self.unit.to_hartree())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_low_orders() {
        let x = 0.3;
        let (p, dp, ddp) = legendre_table(x, 3);
        assert!((p[2] - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        assert!((p[3] - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
        assert!((dp[3] - 0.5 * (15.0 * x * x - 3.0)).abs() < 1e-14);
        assert!((ddp[3] - 15.0 * x).abs() < 1e-14);
        assert!((ddp[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_endpoints() {
        let (p, _, _) = legendre_table(1.0, 9);
        assert!(p.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let (p, _, _) = legendre_table(-1.0, 9);
        for (l, v) in p.iter().enumerate() {
            assert!((v - if l % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_form_derivatives() {
        let f = AnalyticForm::Polynomial { coeffs: vec![1.0, -2.0, 0.5, 0.25] };
        let r = 1.7;
        let (v, d, dd) = f.eval3(r);
        assert!((v - (1.0 - 2.0 * r + 0.5 * r * r + 0.25 * r * r * r)).abs() < 1e-14);
        assert!((d - (-2.0 + r + 0.75 * r * r)).abs() < 1e-14);
        assert!((dd - (1.0 + 1.5 * r)).abs() < 1e-14);
    }

    #[test]
    fn morse_minimum() {
        let f = AnalyticForm::Morse { d: 0.1, a: 1.2, re: 3.0 };
        let (v, d, dd) = f.eval3(3.0);
        assert!((v + 0.1).abs() < 1e-15);
        assert!(d.abs() < 1e-15);
        assert!((dd - 2.0 * 0.1 * 1.44).abs() < 1e-14);
    }
}
