//! The fractional p-Laplacian of a radial profile through its 1-D reduction.
//!
//! Points `y` with `|y| = r rho` (inner) and `|y| = r / rho` (outer) are both
//! mapped onto `rho in (0, 1)`; the angular integral is `K`, closed in `G`.
//! The principal value sums the two integrands, whose leading singular parts
//! cancel at `rho = 1`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundamental::c_beta_with;
use crate::kernel::KernelEvaluator;
use crate::params::FracParams;
use crate::profile::{ln_rho, RadialProfile};
use crate::quadrature::{
    integrate_adaptive_points, integrate_endpoint_singular_dist, integrate_log_toward,
    integrate_start_singular_dist, pv_limit, Estimate, QuadratureSpec,
};
use crate::report::{Report, ReportRow};

/// Relative distance from a breakpoint below which the principal value is refused.
pub const GUARD_BAND: f64 = 1e-6;

/// Relative tolerance of [`verify_fundamental_identity`].
pub const FUNDAMENTAL_TOL: f64 = 1e-3;

/// Tolerance of [`verify_log_harmonic`] relative to `r^-sp`.
pub const LOG_HARMONIC_TOL: f64 = 1e-5;

/// Agreement factor between the folded and extrapolated principal values.
pub const DUAL_PATH_FACTOR: f64 = 3.0;

/// `|t|^(p-2) t`.
#[inline]
pub fn psi_p(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum OperatorMode {
    Truncated { eps: f64 },
    PrincipalValue,
}

/// The principal value recomputed by extrapolating truncations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub value: f64,
    pub err_est: f64,
    pub agrees: bool,
}

/// Operator value at one radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorValue {
    pub value: f64,
    pub err_est: f64,
    pub r: f64,
    pub mode: OperatorMode,
    pub cross_check: Option<CrossCheck>,
}

struct Setup<'a> {
    f: &'a RadialProfile,
    r: f64,
    ke: &'a KernelEvaluator,
    n: f64,
    ps: f64,
    p: f64,
}

impl<'a> Setup<'a> {
    fn new(f: &'a RadialProfile, r: f64, ke: &'a KernelEvaluator) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::domain("radial operator", format!("radius {r} must be positive")));
        }
        let params = ke.params();
        f.check_admissible(params)?;
        Ok(Self {
            f,
            r,
            ke,
            n: params.n_f64(),
            ps: params.sp(),
            p: params.p(),
        })
    }

    fn prefactor(&self) -> f64 {
        self.ke.prefactor() * self.r.powf(-self.ps)
    }

    /// Inner images `b / r` of breakpoints below `r` and outer images `r / b` above it.
    fn splits(&self) -> (Vec<f64>, Vec<f64>) {
        let mut inner = Vec::new();
        let mut outer = Vec::new();
        for b in self.f.breakpoints() {
            if b < self.r {
                inner.push(b / self.r);
            } else if b > self.r {
                outer.push(self.r / b);
            }
        }
        outer.sort_by(f64::total_cmp);
        (inner, outer)
    }

    fn lambda_inner(&self) -> f64 {
        let g0 = self.f.origin_exponent().min(0.0);
        self.n - 1.0 + g0 * (self.p - 1.0)
    }

    fn lambda_outer(&self) -> f64 {
        self.ps - 1.0 - self.f.tail_exponent().max(0.0) * (self.p - 1.0)
    }

    fn inner_term(&self, rho: f64, u: f64) -> Result<f64> {
        if rho == 0.0 {
            return Ok(0.0);
        }
        let d = self.f.differences(self.r, rho, u);
        if d.inward == 0.0 {
            return Ok(0.0);
        }
        Ok(psi_p(d.inward, self.p) * rho.powf(self.n - 1.0) * self.ke.g_rho(rho, u)?)
    }

    fn outer_term(&self, rho: f64, u: f64) -> Result<f64> {
        if rho == 0.0 {
            return Ok(0.0);
        }
        let d = self.f.differences(self.r, rho, u);
        if d.outward == 0.0 {
            return Ok(0.0);
        }
        Ok(psi_p(d.outward, self.p) * rho.powf(self.ps - 1.0) * self.ke.g_rho(rho, u)?)
    }

    /// `Psi(f(r) - f(r rho)) rho^(N-1) + Psi(f(r) - f(r/rho)) rho^(ps-1)`, without `G`.
    fn combined(&self, rho: f64, u: f64) -> f64 {
        if rho == 0.0 {
            return 0.0;
        }
        let d = self.f.differences(self.r, rho, u);
        let tau = ln_rho(rho, u);
        if d.inward != 0.0 {
            let ratio = -d.second / d.inward;
            if ratio > -1.0 {
                // second image equals -(1 + ratio) times the first
                // near ratio = -1 the images themselves are more accurate than their sum
                let log_ratio = if ratio < -0.5 && d.outward * d.inward < 0.0 {
                    (-d.outward / d.inward).ln()
                } else {
                    ratio.ln_1p()
                };
                let expo = (self.ps - self.n) * tau + (self.p - 1.0) * log_ratio;
                if expo.abs() < 1.0 {
                    return -psi_p(d.inward, self.p) * rho.powf(self.n - 1.0) * expo.exp_m1();
                }
            }
        }
        psi_p(d.inward, self.p) * rho.powf(self.n - 1.0)
            + psi_p(d.outward, self.p) * rho.powf(self.ps - 1.0)
    }

    fn check_guard_band(&self) -> Result<()> {
        for b in self.f.breakpoints() {
            if (self.r - b).abs() < GUARD_BAND * self.r {
                return Err(Error::precondition(
                    "frac_plap_radial_pv",
                    format!(
                        "r = {} lies within {GUARD_BAND:e} r of breakpoint {b}; use the truncated (J_eps) mode",
                        self.r
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Folded principal value, before the prefactor.
    fn folded_pv(&self, spec: &QuadratureSpec<f64>) -> Result<Estimate<f64>> {
        let (inner, outer) = self.splits();
        let mut cuts: Vec<f64> = inner.into_iter().chain(outer).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pts = vec![0.0];
        pts.extend(cuts);
        if *pts.last().expect("nonempty") < 0.5 {
            pts.push(0.5);
        }
        let lambda_left = self.lambda_inner().min(self.lambda_outer());
        let lambda_right = self.p - self.ps - 1.0;
        let full = |rho: f64, u: f64| -> Result<f64> {
            let c = self.combined(rho, u);
            if c == 0.0 {
                return Ok(0.0);
            }
            Ok(c * self.ke.g_rho(rho, u)?)
        };
        let mut total = Estimate::zero();
        // first panel, possibly singular at rho = 0
        let first = if lambda_left < 0.0 {
            integrate_start_singular_dist(
                |rho, _| full(rho, 1.0 - rho).map(|v| v * rho.powf(-lambda_left)),
                0.0,
                pts[1],
                lambda_left,
                spec,
            )?
        } else {
            integrate_adaptive_points(|rho| full(rho, 1.0 - rho), &pts[..2], spec)?
        };
        total = total + first.estimate();
        if pts.len() > 2 {
            let mid = integrate_adaptive_points(|rho| full(rho, 1.0 - rho), &pts[1..], spec)?;
            total = total + mid.estimate();
        }
        // (1 - rho)^lambda_right singularity; H = u^(1+ps) G
        let x_hi = *pts.last().expect("nonempty");
        let near = integrate_endpoint_singular_dist(
            |rho, u| {
                if u == 0.0 {
                    return Ok(0.0);
                }
                let c = self.combined(rho, u);
                if c == 0.0 {
                    return Ok(0.0);
                }
                Ok(c * self.ke.h_rho(rho, u)? * u.powf(-self.p))
            },
            x_hi,
            1.0,
            lambda_right,
            spec,
        )?;
        Ok(total + near.estimate())
    }

    /// One side of the truncated operator, before the prefactor.
    fn truncated_side(
        &self,
        cuts: &[f64],
        delta: f64,
        lambda_left: f64,
        term: &dyn Fn(f64, f64) -> Result<f64>,
        spec: &QuadratureSpec<f64>,
    ) -> Result<Estimate<f64>> {
        let upper = 1.0 - delta;
        let mut pts = vec![0.0];
        pts.extend(cuts.iter().copied().filter(|&c| c < upper));
        let mut last = *pts.last().expect("nonempty");
        if last < 0.5 && upper > 0.5 {
            pts.push(0.5);
            last = 0.5;
        }
        let log_tail = last < upper && delta < 0.25 * (1.0 - last);
        if !log_tail {
            pts.push(upper);
        }
        let mut total = Estimate::zero();
        let first = if lambda_left < 0.0 {
            integrate_start_singular_dist(
                |rho, _| term(rho, 1.0 - rho).map(|v| v * rho.powf(-lambda_left)),
                0.0,
                pts[1],
                lambda_left,
                spec,
            )?
        } else {
            integrate_adaptive_points(|rho| term(rho, 1.0 - rho), &pts[..2], spec)?
        };
        total = total + first.estimate();
        if pts.len() > 2 {
            let mid = integrate_adaptive_points(|rho| term(rho, 1.0 - rho), &pts[1..], spec)?;
            total = total + mid.estimate();
        }
        if log_tail {
            let tail = integrate_log_toward(|rho, u| term(rho, u), last, 1.0, delta, spec)?;
            total = total + tail.estimate();
        }
        Ok(total)
    }

    fn truncated(&self, eps: f64, spec: &QuadratureSpec<f64>) -> Result<Estimate<f64>> {
        let (inner_cuts, outer_cuts) = self.splits();
        let inner = self.truncated_side(
            &inner_cuts,
            eps / self.r,
            self.lambda_inner(),
            &|rho, u| self.inner_term(rho, u),
            spec,
        )?;
        let outer = self.truncated_side(
            &outer_cuts,
            eps / (self.r + eps),
            self.lambda_outer(),
            &|rho, u| self.outer_term(rho, u),
            spec,
        )?;
        Ok((inner + outer).scale(self.prefactor()))
    }
}

/// Truncated operator `J_eps f(r)`: the integral over `||y| - r| >= eps`.
pub fn frac_plap_radial_jeps(
    f: &RadialProfile,
    r: f64,
    eps: f64,
    ke: &KernelEvaluator,
    spec: &QuadratureSpec<f64>,
) -> Result<OperatorValue> {
    let setup = Setup::new(f, r, ke)?;
    if !(eps > 0.0 && eps < r) {
        return Err(Error::domain(
            "frac_plap_radial_jeps",
            format!("eps = {eps} must lie in (0, r = {r})"),
        ));
    }
    let e = setup.truncated(eps, spec)?;
    Ok(OperatorValue {
        value: e.value,
        err_est: e.err_est,
        r,
        mode: OperatorMode::Truncated { eps },
        cross_check: None,
    })
}

/// `lim_{eps -> 0} J_eps f(r)` by extrapolation over `spec.pv_epsilons` (scaled by `r`).
pub fn pv_by_extrapolation(
    f: &RadialProfile,
    r: f64,
    ke: &KernelEvaluator,
    spec: &QuadratureSpec<f64>,
) -> Result<Estimate<f64>> {
    let setup = Setup::new(f, r, ke)?;
    // keep every truncation inside the piece containing r
    let gap = f
        .breakpoints()
        .iter()
        .map(|&b| (b - r).abs())
        .fold(r, f64::min);
    let largest = spec.pv_epsilons[0] * r;
    let shrink = if largest > 0.5 * gap { 0.5 * gap / largest } else { 1.0 };
    let scaled = QuadratureSpec {
        pv_epsilons: spec.pv_epsilons.iter().map(|&e| e * r * shrink).collect(),
        ..spec.clone()
    };
    let lim = pv_limit(|eps| setup.truncated(eps, spec), &scaled)?;
    Ok(Estimate::new(lim.value, lim.err_est))
}

/// Principal value `(-Delta_p)^s f` at radius `r`.
pub fn frac_plap_radial_pv(
    f: &RadialProfile,
    r: f64,
    ke: &KernelEvaluator,
    spec: &QuadratureSpec<f64>,
) -> Result<OperatorValue> {
    let setup = Setup::new(f, r, ke)?;
    setup.check_guard_band()?;
    let e = setup.folded_pv(spec)?.scale(setup.prefactor());
    let cross_check = if spec.dual_path {
        let x = pv_by_extrapolation(f, r, ke, spec)?;
        let agrees = (x.value - e.value).abs() <= DUAL_PATH_FACTOR * (x.err_est + e.err_est);
        Some(CrossCheck {
            value: x.value,
            err_est: x.err_est,
            agrees,
        })
    } else {
        None
    };
    Ok(OperatorValue {
        value: e.value,
        err_est: e.err_est,
        r,
        mode: OperatorMode::PrincipalValue,
        cross_check,
    })
}

/// Principal values at several radii, evaluated in parallel and returned in input order.
pub fn pv_at_radii(
    f: &RadialProfile,
    radii: &[f64],
    ke: &KernelEvaluator,
    spec: &QuadratureSpec<f64>,
) -> Result<Vec<OperatorValue>> {
    radii
        .par_iter()
        .map(|&r| frac_plap_radial_pv(f, r, ke, spec))
        .collect()
}

fn cross_check_flags(values: &[OperatorValue]) -> Vec<String> {
    values
        .iter()
        .filter_map(|v| match &v.cross_check {
            Some(c) if !c.agrees => Some(format!(
                "dual_path_disagreement at r = {}: folded {} vs extrapolated {}",
                v.r, v.value, c.value
            )),
            _ => None,
        })
        .collect()
}

/// Checks `(-Delta_p)^s |x|^beta = C(beta) |x|^(beta(p-1)-sp)` at each radius.
pub fn verify_fundamental_identity(
    params: &FracParams,
    beta: f64,
    radii: &[f64],
    spec: &QuadratureSpec<f64>,
) -> Result<Report> {
    if params.is_log_case() {
        return Err(Error::domain(
            "verify_fundamental_identity",
            "ps = N is the logarithmic case; use verify_log_harmonic",
        ));
    }
    if !params.beta_admissible(beta) {
        let (lo, hi) = params.beta_interval();
        return Err(Error::domain(
            "verify_fundamental_identity",
            format!("beta = {beta} outside ({lo}, {hi})"),
        ));
    }
    let ke = KernelEvaluator::new(params)?;
    let cb = c_beta_with(&ke, beta, spec)?;
    let mut floor_c: f64 = 0.0;
    for b in [beta - 0.1, beta + 0.1] {
        if params.beta_admissible(b) {
            floor_c = floor_c.max(c_beta_with(&ke, b, spec)?.value.abs() * 1e-3);
        }
    }
    let near_zero = cb.value == 0.0 || cb.value.abs() <= 10.0 * cb.err_est;
    let profile = RadialProfile::power(beta);
    let values = pv_at_radii(&profile, radii, &ke, spec)?;
    let expo = params.rhs_exponent(beta);
    let rows = values
        .iter()
        .map(|v| {
            let scale = v.r.powf(expo);
            let expected = cb.value * scale;
            let floor = floor_c * scale;
            let diff = (v.value - expected).abs();
            if near_zero {
                let tol = (10.0 * (v.err_est + cb.err_est * scale)).max(floor);
                ReportRow {
                    r: v.r,
                    value: v.value,
                    err_est: v.err_est,
                    reference: expected,
                    residual: diff,
                    tolerance: tol,
                    pass: diff <= tol,
                }
            } else {
                let residual = diff / expected.abs().max(floor);
                ReportRow {
                    r: v.r,
                    value: v.value,
                    err_est: v.err_est,
                    reference: expected,
                    residual,
                    tolerance: FUNDAMENTAL_TOL,
                    pass: residual < FUNDAMENTAL_TOL,
                }
            }
        })
        .collect();
    let mut report = Report::new("fundamental", *params)
        .with_parameter("beta", beta)
        .with_parameter("c_beta", cb.value)
        .with_parameter("c_beta_err_est", cb.err_est)
        .with_parameter("rhs_exponent", expo)
        .with_rows(rows);
    if near_zero {
        report.flags.push("c_beta_near_zero: absolute residuals".to_string());
    }
    report.flags.extend(cross_check_flags(&values));
    Ok(report)
}

/// Checks `(-Delta_p)^s ln|x| = 0` away from the origin when `ps = N`.
pub fn verify_log_harmonic(
    params: &FracParams,
    radii: &[f64],
    spec: &QuadratureSpec<f64>,
) -> Result<Report> {
    if !params.is_log_case() {
        return Err(Error::domain(
            "verify_log_harmonic",
            format!("needs ps = N, got ps = {} and N = {}", params.sp(), params.n()),
        ));
    }
    let ke = KernelEvaluator::new(params)?;
    let values = pv_at_radii(&RadialProfile::log(), radii, &ke, spec)?;
    let rows = values
        .iter()
        .map(|v| {
            let scale = v.r.powf(-params.sp());
            let residual = v.value.abs() / scale;
            ReportRow {
                r: v.r,
                value: v.value,
                err_est: v.err_est,
                reference: 0.0,
                residual,
                tolerance: LOG_HARMONIC_TOL,
                pass: residual < LOG_HARMONIC_TOL,
            }
        })
        .collect();
    let mut report = Report::new("log", *params).with_rows(rows);
    report.flags.extend(cross_check_flags(&values));
    Ok(report)
}
