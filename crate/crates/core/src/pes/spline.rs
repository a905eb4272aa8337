//! C² piecewise-cubic interpolation.

use crate::{Error, Result};

/// Cubic spline through `(x_i, y_i)` with either natural (`y'' = 0`) or
/// clamped (prescribed `y'`) end conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    m: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
enum Ends {
    Natural,
    Clamped(f64, f64),
}

impl CubicSpline {
    pub fn natural(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        Self::build(x, y, Ends::Natural)
    }

    pub fn clamped(x: Vec<f64>, y: Vec<f64>, d_start: f64, d_end: f64) -> Result<Self> {
        Self::build(x, y, Ends::Clamped(d_start, d_end))
    }

    fn build(x: Vec<f64>, y: Vec<f64>, ends: Ends) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::Data(format!("spline: {} abscissae vs {} values", n, y.len())));
        }
        if n < 2 {
            return Err(Error::Data("spline needs at least two knots".into()));
        }
        if let Some(i) = (1..n).find(|&i| !(x[i] > x[i - 1])) {
            return Err(Error::Data(format!("spline abscissae not increasing at index {i}")));
        }
        // tridiagonal system for the knot second derivatives
        let mut sub = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            sub[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            sup[i] = h1 / 6.0;
            rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        }
        match ends {
            Ends::Natural => {
                diag[0] = 1.0;
                diag[n - 1] = 1.0;
            }
            Ends::Clamped(d0, dn) => {
                let h0 = x[1] - x[0];
                diag[0] = h0 / 3.0;
                sup[0] = h0 / 6.0;
                rhs[0] = (y[1] - y[0]) / h0 - d0;
                let hn = x[n - 1] - x[n - 2];
                sub[n - 1] = hn / 6.0;
                diag[n - 1] = hn / 3.0;
                rhs[n - 1] = dn - (y[n - 1] - y[n - 2]) / hn;
            }
        }
        // Thomas algorithm
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
        }
        Ok(Self { x, y, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    /// Value, first and second derivative. Outside the knot range the end
    /// cubic is continued.
    pub fn eval3(&self, t: f64) -> (f64, f64, f64) {
        let n = self.x.len();
        let i = match self.x.partition_point(|&xi| xi <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let dd = a * m0 + b * m1;
        (v, d, dd)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval3(t).0
    }
}
