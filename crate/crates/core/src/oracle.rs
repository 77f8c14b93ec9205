//! Brute-force two-dimensional evaluation of the operator straight from its
//! defining double integral, in polar coordinates around `x = r e_1`.
//!
//! Nothing here goes through the hypergeometric reduction: the angular
//! integral is summed by a private Gauss-Legendre rule on geometric panels.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::params::FracParams;
use crate::profile::RadialProfile;
use crate::quadrature::{
    integrate_adaptive_points, integrate_start_singular_dist, pv_limit, Estimate, QuadratureSpec,
};
use crate::radial_operator::psi_p;

/// Nodes per angular panel.
pub const ANGULAR_NODES: usize = 24;

/// Exclusion widths `10^(-1-k/2)`, `k = 0..10`.
pub fn exclusion_schedule() -> Vec<f64> {
    (0..=10).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect()
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// `n`-point rule from Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(m + h * x))
            .sum::<f64>()
            * h
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(ANGULAR_NODES))
}

/// `A(rho) = int_0^{2 pi} (1 - 2 rho cos t + rho^2)^(-(2+sp)/2) dt`.
pub fn angular_integral(rho: f64, sp: f64, rule: &GaussLegendre) -> f64 {
    let gap = (1.0 - rho).abs();
    let expo = 0.5 * (2.0 + sp);
    let f = |t: f64| {
        let h = (0.5 * t).sin();
        (gap * gap + 4.0 * rho * h * h).powf(-expo)
    };
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b = gap.min(0.5);
    while a < PI {
        let end = if b > 0.75 * PI { PI } else { b };
        total += rule.integrate(a, end, f);
        a = end;
        b = 2.0 * end;
    }
    2.0 * total
}

struct Direct<'a> {
    f: &'a RadialProfile,
    r: f64,
    p: f64,
    sp: f64,
    fr: f64,
    rule: &'a GaussLegendre,
}

impl Direct<'_> {
    /// `Psi(f(r) - f(r rho)) rho A(rho)`.
    fn integrand(&self, rho: f64) -> Result<f64> {
        if rho == 0.0 {
            return Ok(0.0);
        }
        let d = self.fr - self.f.eval(self.r * rho)?;
        let v = psi_p(d, self.p) * rho * angular_integral(rho, self.sp, self.rule);
        if !v.is_finite() {
            return Err(Error::Integrand { x: rho, value: v });
        }
        Ok(v)
    }

    /// Radial breakpoints `b / r` inside `(lo, hi)`.
    fn cuts(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.f
            .breakpoints()
            .iter()
            .map(|&b| b / self.r)
            .filter(|&c| c > lo && c < hi)
            .collect()
    }

    fn panels(&self, lo: f64, hi: f64, toward: Option<f64>) -> Vec<f64> {
        let mut pts = vec![lo, hi];
        pts.extend(self.cuts(lo, hi));
        if let Some(c) = toward {
            // geometric grading toward the excluded annulus
            let span = hi - lo;
            let mut d = (c - lo).abs().min((c - hi).abs());
            while d < span {
                let x = if c <= lo { c + d } else { c - d };
                if x > lo && x < hi {
                    pts.push(x);
                }
                d *= 2.0;
            }
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// The integral over `|1 - rho| >= delta`.
    fn truncated(&self, delta: f64, spec: &QuadratureSpec<f64>) -> Result<Estimate<f64>> {
        let far = 4.0;
        let lam0 = 1.0 + self.f.origin_exponent().min(0.0) * (self.p - 1.0);
        let head = if lam0 < 0.0 {
            integrate_start_singular_dist(
                |rho: f64, _| {
                    if rho == 0.0 {
                        return Ok(0.0);
                    }
                    Ok(self.integrand(rho)? * rho.powf(-lam0))
                },
                0.0,
                0.5,
                lam0,
                spec,
            )?
        } else {
            integrate_adaptive_points(|rho| self.integrand(rho), &self.panels(0.0, 0.5, None), spec)?
        };
        let inner = integrate_adaptive_points(
            |rho| self.integrand(rho),
            &self.panels(0.5, 1.0 - delta, Some(1.0)),
            spec,
        )?;
        let outer = integrate_adaptive_points(
            |rho| self.integrand(rho),
            &self.panels(1.0 + delta, far, Some(1.0)),
            spec,
        )?;
        // rho = far / sigma on the tail
        let growth = self.f.tail_exponent().max(0.0) * (self.p - 1.0);
        let lam_t = self.sp - 1.0 - growth;
        let tail_f = |sigma: f64| -> Result<f64> {
            if sigma == 0.0 {
                return Ok(0.0);
            }
            Ok(self.integrand(far / sigma)? * far / (sigma * sigma))
        };
        let tail_cuts: Vec<f64> = self.cuts(far, f64::INFINITY).iter().map(|&c| far / c).collect();
        let tail = if lam_t < 0.0 {
            integrate_start_singular_dist(|s: f64, _| Ok(tail_f(s)? * s.powf(-lam_t)), 0.0, 1.0, lam_t, spec)?
        } else {
            let mut pts = vec![0.0, 1.0];
            pts.extend(tail_cuts);
            pts.sort_by(f64::total_cmp);
            integrate_adaptive_points(tail_f, &pts, spec)?
        };
        let total = head.estimate() + inner.estimate() + outer.estimate() + tail.estimate();
        Ok(total.scale(2.0 * self.r.powf(-self.sp)))
    }
}

/// Principal value of `2 int Psi_p(f(r) - f(|y|)) / |r e_1 - y|^(2+sp) dy` over the plane.
pub fn operator_direct_2d(
    f: &RadialProfile,
    r: f64,
    s: f64,
    p: f64,
    spec: &QuadratureSpec<f64>,
) -> Result<Estimate<f64>> {
    let params = FracParams::new(2, s, p)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::domain("operator_direct_2d", format!("radius {r} must be positive")));
    }
    f.check_admissible(&params)?;
    let bps = f.breakpoints();
    if bps.iter().any(|&b| (b - r).abs() < 1e-6 * r) {
        return Err(Error::domain("operator_direct_2d", format!("r = {r} sits on a breakpoint")));
    }
    let direct = Direct {
        f,
        r,
        p,
        sp: params.sp(),
        fr: f.eval(r)?,
        rule: default_rule(),
    };
    let gap = bps.iter().map(|&b| (b / r - 1.0).abs()).fold(f64::INFINITY, f64::min);
    let schedule = exclusion_schedule();
    let shrink = if schedule[0] > 0.5 * gap { 0.5 * gap / schedule[0] } else { 1.0 };
    let deltas: Vec<f64> = schedule.iter().map(|&d| d * shrink).collect();
    let values: Vec<Estimate<f64>> = deltas
        .par_iter()
        .map(|&d| direct.truncated(d, spec))
        .collect::<Result<_>>()?;
    if values.iter().all(|v| v.value == values[0].value) {
        return Ok(values[0]);
    }
    let mut it = values.into_iter();
    let pv_spec = QuadratureSpec {
        pv_epsilons: deltas,
        ..spec.clone()
    };
    let lim = pv_limit(|_| it.next().ok_or_else(|| Error::domain("operator_direct_2d", "schedule")), &pv_spec)?;
    Ok(Estimate::new(lim.value, lim.err_est))
}

/// `C(beta)` at `N = 2` from the defining integral at `x = e_1`.
pub fn c_beta_direct_2d(s: f64, p: f64, beta: f64, spec: &QuadratureSpec<f64>) -> Result<Estimate<f64>> {
    let params = FracParams::new(2, s, p)?;
    if params.is_log_case() {
        return Err(Error::domain("c_beta_direct_2d", "ps = 2 is the logarithmic case"));
    }
    if !params.beta_admissible(beta) {
        let (lo, hi) = params.beta_interval();
        return Err(Error::domain("c_beta_direct_2d", format!("beta = {beta} outside ({lo}, {hi})")));
    }
    if beta == 0.0 {
        return Ok(Estimate::new(0.0, 0.0));
    }
    operator_direct_2d(&RadialProfile::power(beta), 1.0, s, p, spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        let g = GaussLegendre::new(10);
        let v = g.integrate(-1.0, 2.0, |x| x.powi(19));
        assert!((v - (2f64.powi(20) - 1.0) / 20.0).abs() < 1e-9);
        let w: f64 = GaussLegendre::new(24).weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn angular_against_trapezoid() {
        // periodic analytic integrand: the trapezoid rule converges geometrically
        for &(rho, sp) in &[(0.0, 1.0), (0.5, 0.7), (1.3, 1.5), (0.9, 0.4)] {
            let n = 4000;
            let expo = 0.5 * (2.0 + sp);
            let trap: f64 = (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    (1.0 - 2.0 * rho * t.cos() + rho * rho).powf(-expo)
                })
                .sum::<f64>()
                * 2.0
                * PI
                / n as f64;
            let a = angular_integral(rho, sp, default_rule());
            assert!((a - trap).abs() < 1e-11 * trap, "rho {rho}: {a} vs {trap}");
        }
    }

    #[test]
    fn constant_and_zero() {
        let spec = QuadratureSpec::default();
        let v = operator_direct_2d(&RadialProfile::constant(2.0), 1.0, 0.5, 3.0, &spec).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(c_beta_direct_2d(0.5, 3.0, 0.0, &spec).unwrap().value, 0.0);
        assert!(c_beta_direct_2d(0.5, 4.0, -0.1, &spec).unwrap_err().is_domain());
        assert!(c_beta_direct_2d(0.5, 2.0, 5.0, &spec).unwrap_err().is_domain());
    }
}
