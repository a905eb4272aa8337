//! Pseudo-arclength continuation of a periodic-orbit family in energy.
//!
//! The family is the zero set of `F(ψ, P_ψ, E) = P_E(ψ, P_ψ) − (ψ, P_ψ)`,
//! a curve in the scaled space `y = (ψ, P_ψ/p_s, E/e_s)`. Its tangent is
//! the cross product of the two rows of `∂F/∂y`; the corrector is Newton on
//! `F` plus the hyperplane orthogonal to the predictor tangent. A fold in
//! `E` along the curve is the saddle–node bifurcation, where the reduced
//! monodromy has a double unit multiplier (`tr M = 2`).

use super::orbit::{find_periodic_orbit, loop_action, OrbitOptions, Stability};
use super::section::SectionPoint;
use super::Dynamics;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContinuationOptions {
    pub e_start: f64,
    pub guess: SectionPoint,
    /// Initial direction of travel in energy (sign only).
    pub e_direction: f64,
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub max_points: usize,
    /// Stop when the branch leaves `[e_min, e_max]`.
    pub e_min: f64,
    pub e_max: f64,
    pub p_scale: f64,
    pub e_scale: f64,
    pub tol: f64,
    pub max_corrector: usize,
    /// Relative energy step for ∂P/∂E.
    pub fd_energy: f64,
}

impl ContinuationOptions {
    pub fn new(e_start: f64, guess: SectionPoint, e_min: f64, e_max: f64) -> Self {
        Self {
            e_start,
            guess,
            e_direction: -1.0,
            ds: 0.05,
            ds_min: 1e-5,
            ds_max: 0.2,
            max_points: 400,
            e_min,
            e_max,
            p_scale: 1.0,
            e_scale: 2e-4,
            tol: 1e-10,
            max_corrector: 12,
            fd_energy: 1e-7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BranchPoint {
    pub energy: f64,
    pub section: SectionPoint,
    pub trace: f64,
    pub det: f64,
    pub stability: Stability,
    pub period: f64,
    /// Loop action `∮ p·dq`.
    pub action: f64,
    /// Arclength in the scaled coordinates.
    pub arclength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Bifurcation {
    pub energy: f64,
    pub section: SectionPoint,
    pub trace: f64,
    /// Index of the last branch point before the fold.
    pub after_point: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ContinuationResult {
    pub points: Vec<BranchPoint>,
    pub bifurcation: Option<Bifurcation>,
    /// Energy where the stable side reaches |tr M| = 2 again.
    pub stability_loss: Option<f64>,
    /// Why the scan stopped early, if it did.
    pub failure: Option<String>,
}

type Vec3 = [f64; 3];

struct Eval {
    f: [f64; 2],
    jac: [Vec3; 2],
    trace: f64,
    det: f64,
    period: f64,
}

struct Tracker<'a> {
    dyn_: &'a Dynamics,
    opts: &'a ContinuationOptions,
}

impl Tracker<'_> {
    fn unscale(&self, y: &Vec3) -> (SectionPoint, f64) {
        (SectionPoint::new(y[0], y[1] * self.opts.p_scale), y[2] * self.opts.e_scale)
    }

    fn eval(&self, y: &Vec3) -> Result<Eval> {
        let (z, e) = self.unscale(y);
        let (q, dp, period) = self.dyn_.poincare_jacobian(z, e)?;
        let de = self.opts.fd_energy * e.abs().max(1e-6);
        let qp = self.dyn_.poincare(z, e + de)?;
        let qm = self.dyn_.poincare(z, e - de)?;
        let ps = self.opts.p_scale;
        let es = self.opts.e_scale;
        // rows of ∂F/∂y with F scaled like y
        let f = [q.psi - z.psi, (q.p_psi - z.p_psi) / ps];
        let dfe = [(qp.psi - qm.psi) / (2.0 * de) * es, (qp.p_psi - qm.p_psi) / (2.0 * de) * es / ps];
        let jac = [
            [dp[0][0] - 1.0, dp[0][1] * ps, dfe[0]],
            [dp[1][0] / ps, dp[1][1] - 1.0, dfe[1]],
        ];
        let trace = dp[0][0] + dp[1][1];
        let det = dp[0][0] * dp[1][1] - dp[0][1] * dp[1][0];
        Ok(Eval { f, jac, trace, det, period })
    }

    /// Newton on `F = 0`, `t·(y − y_p) = 0`.
    fn correct(&self, y_pred: &Vec3, t: &Vec3) -> Result<(Vec3, Eval)> {
        let mut y = *y_pred;
        let mut history = Vec::new();
        for _ in 0..self.opts.max_corrector {
            let ev = self.eval(&y)?;
            let r = ev.f[0].abs().max(ev.f[1].abs());
            history.push(r);
            if r <= self.opts.tol {
                return Ok((y, ev));
            }
            let c = dot(t, &sub(&y, y_pred));
            let a = [ev.jac[0], ev.jac[1], *t];
            let dy = solve3(&a, &[-ev.f[0], -ev.f[1], -c]).ok_or_else(|| crate::Error::NoConvergence {
                iterations: history.len(),
                residuals: history.clone(),
            })?;
            for i in 0..3 {
                y[i] += dy[i];
            }
        }
        Err(crate::Error::NoConvergence { iterations: history.len(), residuals: history })
    }

    fn point(&self, y: &Vec3, ev: &Eval, arclength: f64) -> BranchPoint {
        let (z, e) = self.unscale(y);
        let action = self.dyn_.lift(z, e).map(|x| loop_action(self.dyn_, &x, ev.period)).unwrap_or(f64::NAN);
        BranchPoint {
            energy: e,
            section: z,
            trace: ev.trace,
            det: ev.det,
            stability: Stability::from_trace(ev.trace, 1e-6),
            period: ev.period,
            action,
            arclength,
        }
    }

    /// Solves along the chord from `y0` (tangent `t0`) for arclength `s`.
    fn at(&self, y0: &Vec3, t0: &Vec3, s: f64) -> Result<(Vec3, Eval)> {
        let pred = [y0[0] + s * t0[0], y0[1] + s * t0[1], y0[2] + s * t0[2]];
        self.correct(&pred, t0)
    }

    /// Bisection in arclength for a root of `q(Eval)` between `0` and `s1`.
    fn locate(&self, y0: &Vec3, t0: &Vec3, s1: f64, q: impl Fn(&Eval) -> f64, q0: f64) -> Option<(Vec3, Eval)> {
        let (mut lo, mut hi) = (0.0, s1);
        let mut best = None;
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let (y, ev) = self.at(y0, t0, mid).ok()?;
            let v = q(&ev);
            if v.signum() == q0.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
            best = Some((y, ev));
            if hi - lo < 1e-12 {
                break;
            }
        }
        best
    }
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: Vec3) -> Vec3 {
    let n = dot(&a, &a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn solve3(a: &[Vec3; 3], b: &Vec3) -> Option<Vec3> {
    let m = nalgebra::Matrix3::from_fn(|i, j| a[i][j]);
    let v = nalgebra::Vector3::new(b[0], b[1], b[2]);
    let x = m.lu().solve(&v)?;
    Some([x[0], x[1], x[2]])
}

/// Follows the family from `opts.guess` at `opts.e_start`, locating the
/// saddle–node fold and the energy where the stable side loses stability.
/// A failure part-way returns the points found so far with a marker.
pub fn continue_branch(dyn_: &Dynamics, opts: &ContinuationOptions) -> Result<ContinuationResult> {
    let orbit_opts = OrbitOptions { tol: opts.tol, ..OrbitOptions::default() };
    let po = find_periodic_orbit(dyn_, opts.guess, opts.e_start, &orbit_opts)?;
    let tr = Tracker { dyn_, opts };
    let mut y = [po.section.psi, po.section.p_psi / opts.p_scale, opts.e_start / opts.e_scale];
    let mut ev = tr.eval(&y)?;
    let mut t = normalize(cross(&ev.jac[0], &ev.jac[1]));
    if t[2] * opts.e_direction < 0.0 {
        t = [-t[0], -t[1], -t[2]];
    }
    let mut arclength = 0.0;
    let mut points = vec![tr.point(&y, &ev, 0.0)];
    let mut bifurcation = None;
    let mut stability_loss = None;
    let mut failure = None;
    let mut ds = opts.ds;

    while points.len() < opts.max_points {
        let (y1, ev1) = match tr.at(&y, &t, ds) {
            Ok(v) => v,
            Err(e) => {
                ds *= 0.5;
                if ds < opts.ds_min {
                    failure = Some(format!("corrector failed at E = {} hartree: {e}", y[2] * opts.e_scale));
                    break;
                }
                continue;
            }
        };
        // a corrector that wanders far from the predictor has jumped branches
        let pred = [y[0] + ds * t[0], y[1] + ds * t[1], y[2] + ds * t[2]];
        let drift = sub(&y1, &pred);
        if dot(&drift, &drift).sqrt() > 0.5 * ds && ds > opts.ds_min {
            ds *= 0.5;
            continue;
        }
        let mut t1 = normalize(cross(&ev1.jac[0], &ev1.jac[1]));
        if dot(&t1, &t) < 0.0 {
            t1 = [-t1[0], -t1[1], -t1[2]];
        }
        // a sharp turn means the step jumped across something; retry smaller
        if dot(&t1, &t) < 0.9 && ds > opts.ds_min {
            ds *= 0.5;
            continue;
        }
        if bifurcation.is_none() && t1[2] * t[2] < 0.0 {
            let q0 = ev.trace - 2.0;
            if let Some((yb, evb)) = tr.locate(&y, &t, ds, |e| e.trace - 2.0, q0) {
                let (z, e) = tr.unscale(&yb);
                bifurcation = Some(Bifurcation { energy: e, section: z, trace: evb.trace, after_point: points.len() - 1 });
            }
        }
        if bifurcation.is_some() && stability_loss.is_none() && (ev.trace.abs() - 2.0) * (ev1.trace.abs() - 2.0) < 0.0 && ev.trace.abs() < 2.0 {
            let q0 = ev.trace.abs() - 2.0;
            if let Some((yl, _)) = tr.locate(&y, &t, ds, |e| e.trace.abs() - 2.0, q0) {
                stability_loss = Some(yl[2] * opts.e_scale);
            }
        }
        arclength += ds;
        y = y1;
        ev = ev1;
        t = t1;
        points.push(tr.point(&y, &ev, arclength));
        let e = y[2] * opts.e_scale;
        if e < opts.e_min || e > opts.e_max {
            break;
        }
        ds = (ds * 1.3).min(opts.ds_max);
    }
    Ok(ContinuationResult { points, bifurcation, stability_loss, failure })
}
