//! Auxiliary barrier functions, their sufficient thresholds, and numerical
//! checks of the sign or comparison inequalities they satisfy.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fundamental::c_beta_with;
use crate::kernel::KernelEvaluator;
use crate::params::FracParams;
use crate::profile::{smooth_cutoff, Piece, PieceKind, RadialProfile};
use crate::quadrature::{integrate_adaptive_points, integrate_start_singular_dist, QuadratureSpec};
use crate::radial_operator::{frac_plap_radial_pv, OperatorValue, GUARD_BAND};
use crate::report::{Report, ReportRow, Verdict};

/// Relative distance kept between a sample radius and any breakpoint.
pub const SAMPLE_GUARD: f64 = 1e-4;

/// Tolerated spread of the normalized cutoff supremum across radii.
pub const CUTOFF_SCALING_TOL: f64 = 0.05;

/// Doubling cap for the log-barrier `kappa`.
pub const KAPPA_MAX: f64 = 1_048_576.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BarrierKind {
    PhiEps,
    PsiEps,
    ThetaEps,
    LogBarrier,
    Cutoff,
    Supersolution,
}

impl BarrierKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BarrierKind::PhiEps => "phi_eps",
            BarrierKind::PsiEps => "psi_eps",
            BarrierKind::ThetaEps => "theta_eps",
            BarrierKind::LogBarrier => "log_barrier",
            BarrierKind::Cutoff => "cutoff",
            BarrierKind::Supersolution => "supersolution",
        }
    }
}

/// Which side of the bound the operator must lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    AtMost,
    AtLeast,
}

/// Per-sample outcome of a barrier inequality check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierCheckReport {
    pub barrier_kind: BarrierKind,
    pub params: FracParams,
    pub parameters: BTreeMap<String, f64>,
    pub direction: Direction,
    pub sample_radii: Vec<f64>,
    /// `None` where the principal value could not be computed.
    pub operator_values: Vec<Option<OperatorValue>>,
    pub errors: Vec<Option<String>>,
    pub bound_values: Vec<f64>,
    pub verdicts: Vec<bool>,
    pub aggregate: Verdict,
}

impl BarrierCheckReport {
    pub fn passed(&self) -> bool {
        self.aggregate.passed()
    }

    pub fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    /// Largest operator value over the computed samples.
    pub fn max_value(&self) -> Option<f64> {
        self.operator_values
            .iter()
            .flatten()
            .map(|v| v.value)
            .reduce(f64::max)
    }

    /// Flattens into the generic [`Report`] layout; the residual is the signed margin.
    pub fn to_report(&self) -> Report {
        let rows = self
            .sample_radii
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let bound = self.bound_values[i];
                let (value, err_est) = match &self.operator_values[i] {
                    Some(v) => (v.value, v.err_est),
                    None => (f64::NAN, f64::NAN),
                };
                let margin = match self.direction {
                    Direction::AtMost => value - bound,
                    Direction::AtLeast => bound - value,
                };
                ReportRow {
                    r,
                    value,
                    err_est,
                    reference: bound,
                    residual: margin,
                    tolerance: slack(err_est),
                    pass: self.verdicts[i],
                }
            })
            .collect();
        let mut report = Report::new(self.barrier_kind.as_str(), self.params).with_rows(rows);
        report.parameters = self.parameters.clone();
        report.flags = self
            .errors
            .iter()
            .zip(&self.sample_radii)
            .filter_map(|(e, r)| e.as_ref().map(|e| format!("r = {r}: {e}")))
            .collect();
        report
    }
}

fn slack(err_est: f64) -> f64 {
    3.0 * err_est
}

fn require_subcritical(params: &FracParams, op: &'static str) -> Result<()> {
    if params.n_f64() <= params.sp() {
        return Err(Error::domain(op, format!("requires N > ps, got N = {}, ps = {}", params.n(), params.sp())));
    }
    Ok(())
}

fn require_beta(params: &FracParams, beta: f64, op: &'static str) -> Result<()> {
    let (lo, hi) = params.beta_interval();
    if !(beta > lo && beta < hi) {
        return Err(Error::domain(op, format!("beta = {beta} outside ({lo}, {hi})")));
    }
    Ok(())
}

/// `eps^beta` on `[0, eps)`, `|x|^beta` beyond.
pub fn make_phi_eps(params: &FracParams, beta: f64, eps: f64) -> Result<RadialProfile> {
    require_subcritical(params, "make_phi_eps")?;
    require_beta(params, beta, "make_phi_eps")?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain("make_phi_eps", format!("eps = {eps} must lie in (0, 1)")));
    }
    RadialProfile::new(vec![
        Piece {
            start: 0.0,
            kind: PieceKind::Constant { value: eps.powf(beta) },
        },
        Piece {
            start: eps,
            kind: PieceKind::Power {
                coeff: 1.0,
                exponent: beta,
                offset: 0.0,
            },
        },
    ])
}

/// `C(beta) + 2 alpha_N (1 - x)^-(N+sp) x^(beta(p-1)+N)` at `x = eps / r`.
pub fn phi_eps_sufficient_expression(params: &FracParams, alpha: f64, c_beta: f64, beta: f64, x: f64) -> f64 {
    let n = params.n_f64();
    c_beta + 2.0 * alpha * (1.0 - x).powf(-(n + params.sp())) * x.powf(beta * (params.p() - 1.0) + n)
}

/// The `eps0` in `(0, r)` below which the φ_ε sign condition is guaranteed.
pub fn phi_eps_threshold(params: &FracParams, beta: f64, r: f64, spec: &QuadratureSpec<f64>) -> Result<f64> {
    require_subcritical(params, "phi_eps_threshold")?;
    require_beta(params, beta, "phi_eps_threshold")?;
    if !(r > 1.0) {
        return Err(Error::domain("phi_eps_threshold", format!("r = {r} must exceed 1")));
    }
    let ke = KernelEvaluator::new(params)?;
    let c = c_beta_with(&ke, beta, spec)?.value;
    if !(c < 0.0) {
        return Err(Error::domain(
            "phi_eps_threshold",
            format!("C(beta) = {c} is not negative at beta = {beta}"),
        ));
    }
    let alpha = ke.alpha();
    let x = bisect_increasing(|x| phi_eps_sufficient_expression(params, alpha, c, beta, x), 0.0, 1.0);
    Ok(x * r)
}

/// Root of an increasing function negative at `lo` and positive at `hi`, to 1e-10 relative.
fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-10 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `r_eps = r (eps / (1 + eps 2^beta))^(-1/beta)`.
pub fn psi_r_eps(beta: f64, eps: f64, r: f64) -> f64 {
    r * (eps / (1.0 + eps * 2f64.powf(beta))).powf(-1.0 / beta)
}

/// Largest `eps` with `r_eps < r/2`.
pub fn psi_eps_max(beta: f64) -> f64 {
    2f64.powf(beta) / (1.0 - 4f64.powf(beta))
}

/// `r_eps^beta` on `[0, r_eps]`, `|x|^beta` up to `2r`, `(2r)^beta` beyond.
pub fn make_psi_eps(params: &FracParams, beta: f64, eps: f64, r: f64) -> Result<RadialProfile> {
    require_subcritical(params, "make_psi_eps")?;
    require_beta(params, beta, "make_psi_eps")?;
    if beta >= 0.0 {
        return Err(Error::domain("make_psi_eps", format!("beta = {beta} must be negative")));
    }
    if !(r > 1.0) || !(eps > 0.0) {
        return Err(Error::domain("make_psi_eps", format!("need eps > 0 and r > 1, got eps = {eps}, r = {r}")));
    }
    let r_eps = psi_r_eps(beta, eps, r);
    if !(r_eps < 0.5 * r) {
        return Err(Error::precondition(
            "make_psi_eps",
            format!("r_eps = {r_eps} >= r/2; eps must be below {}", psi_eps_max(beta)),
        ));
    }
    RadialProfile::new(vec![
        Piece {
            start: 0.0,
            kind: PieceKind::Constant { value: r_eps.powf(beta) },
        },
        Piece {
            start: r_eps,
            kind: PieceKind::Power {
                coeff: 1.0,
                exponent: beta,
                offset: 0.0,
            },
        },
        Piece {
            start: 2.0 * r,
            kind: PieceKind::Constant {
                value: (2.0 * r).powf(beta),
            },
        },
    ])
}

/// `D_N` from the ψ_ε estimate: the far-field integral over `|z| > 4`, rescaled by
/// `2^(sp - beta(p-1))` so that the bound reads `(D_N + ...) r^(beta(p-1)-sp)`.
pub fn psi_dn_constant(ke: &KernelEvaluator, beta: f64, spec: &QuadratureSpec<f64>) -> Result<f64> {
    let params = *ke.params();
    require_beta(&params, beta, "psi_dn_constant")?;
    let p = params.p();
    let ps = params.sp();
    let base = (1.0 - 4f64.powf(beta)).abs().powf(p - 1.0);
    // sigma = 1/rho maps (4, inf) onto (0, 1/4)
    let core = move |sigma: f64| -> Result<f64> {
        let g = base - (1.0 - sigma.powf(-beta)).abs().powf(p - 1.0);
        Ok(g * ke.g_rho(sigma, 1.0 - sigma)?)
    };
    let lambda = ps - 1.0;
    let i = if lambda < 0.0 {
        integrate_start_singular_dist(|sigma: f64, _| core(sigma), 0.0, 0.25, lambda, spec)?
    } else {
        integrate_adaptive_points(|sigma: f64| Ok(core(sigma)? * sigma.powf(lambda)), &[0.0, 0.25], spec)?
    };
    let half_sphere = 2.0 * std::f64::consts::PI * ke.alpha();
    Ok(half_sphere * i.value * 2f64.powf(ps - beta * (p - 1.0)))
}

/// The `eps0` below which `D_N + alpha_N (eps/(1+eps 2^beta))^-(p-1+N/beta) <= 0`,
/// capped by [`psi_eps_max`].
pub fn psi_eps_threshold(params: &FracParams, beta: f64, spec: &QuadratureSpec<f64>) -> Result<f64> {
    require_subcritical(params, "psi_eps_threshold")?;
    require_beta(params, beta, "psi_eps_threshold")?;
    if beta >= 0.0 {
        return Err(Error::domain("psi_eps_threshold", format!("beta = {beta} must be negative")));
    }
    let ke = KernelEvaluator::new(params)?;
    let dn = psi_dn_constant(&ke, beta, spec)?;
    if !(dn < 0.0) {
        return Err(Error::domain("psi_eps_threshold", format!("D_N = {dn} is not negative")));
    }
    let e = -(params.p() - 1.0) - params.n_f64() / beta;
    let x = (-dn / ke.alpha()).powf(1.0 / e);
    let cap = psi_eps_max(beta);
    let w = x * 2f64.powf(beta);
    Ok(if w < 1.0 { (x / (1.0 - w)).min(cap) } else { cap })
}

/// `m` on `[0, eps)`, `m (R^beta - |x|^beta) / (R^beta - eps^beta)` on `[eps, R)`, 0 beyond.
pub fn make_theta_eps(params: &FracParams, beta: f64, eps: f64, big_r: f64, m: f64) -> Result<RadialProfile> {
    if params.n_f64() >= params.sp() {
        return Err(Error::domain(
            "make_theta_eps",
            format!("requires N < ps, got N = {}, ps = {}", params.n(), params.sp()),
        ));
    }
    let bs = params.beta_star();
    if !(beta > 0.0 && beta < bs) {
        return Err(Error::domain("make_theta_eps", format!("beta = {beta} outside (0, {bs})")));
    }
    if !(eps > 0.0 && eps < 1.0 && big_r > 1.0 && m > 0.0) {
        return Err(Error::domain(
            "make_theta_eps",
            format!("need 0 < eps < 1 < R and m > 0, got eps = {eps}, R = {big_r}, m = {m}"),
        ));
    }
    let rb = big_r.powf(beta);
    let d = rb - eps.powf(beta);
    RadialProfile::new(vec![
        Piece {
            start: 0.0,
            kind: PieceKind::Constant { value: m },
        },
        Piece {
            start: eps,
            kind: PieceKind::Power {
                coeff: -m / d,
                exponent: beta,
                offset: m * rb / d,
            },
        },
        Piece {
            start: big_r,
            kind: PieceKind::Constant { value: 0.0 },
        },
    ])
}

/// The `eps0` below which `2 alpha_N eps^N / (1 - eps/R)^(N+sp) - C(beta) < 0`, capped at 1.
pub fn theta_eps_threshold(params: &FracParams, beta: f64, big_r: f64, spec: &QuadratureSpec<f64>) -> Result<f64> {
    let ke = KernelEvaluator::new(params)?;
    let c = c_beta_with(&ke, beta, spec)?.value;
    if !(c > 0.0) {
        return Err(Error::domain("theta_eps_threshold", format!("C(beta) = {c} is not positive")));
    }
    let n = params.n_f64();
    let alpha = ke.alpha();
    let expr = |e: f64| 2.0 * alpha * e.powf(n) / (1.0 - e / big_r).powf(n + params.sp()) - c;
    let hi = big_r.min(1.0);
    if expr(hi) < 0.0 {
        return Ok(hi);
    }
    Ok(bisect_increasing(expr, 0.0, hi))
}

/// `phi_r(x) = log R - log eps + kappa zeta_eps` on `B_eps`, `log R - log|x|` outside.
pub fn make_log_barrier(params: &FracParams, eps: f64, kappa: f64, big_r: f64) -> Result<RadialProfile> {
    if !params.is_log_case() {
        return Err(Error::domain("make_log_barrier", format!("requires ps = N, got ps = {}", params.sp())));
    }
    if !(eps > 0.0 && eps < 1.0 && big_r > 1.0 && kappa > 0.0) {
        return Err(Error::domain(
            "make_log_barrier",
            format!("need 0 < eps < 1 < R and kappa > 0, got eps = {eps}, R = {big_r}, kappa = {kappa}"),
        ));
    }
    let base = big_r.ln() - eps.ln();
    RadialProfile::new(vec![
        Piece {
            start: 0.0,
            kind: PieceKind::Constant { value: base + kappa },
        },
        Piece {
            start: 0.5 * eps,
            kind: PieceKind::SmoothCutoff {
                amplitude: kappa,
                radius: eps,
                offset: base,
            },
        },
        Piece {
            start: eps,
            kind: PieceKind::Log {
                coeff: -1.0,
                offset: big_r.ln(),
            },
        },
    ])
}

/// `h(x) = 4 pi alpha_N |x|^(-N-sp) int_0^eps F(rho) rho^(N-1) K(rho/|x|) drho` with
/// `F = (ln|x| - ln rho)^(p-1) - (ln|x| - ln eps + kappa zeta_eps(rho))^(p-1)`.
pub fn log_barrier_h(ke: &KernelEvaluator, eps: f64, kappa: f64, x: f64, spec: &QuadratureSpec<f64>) -> Result<f64> {
    let params = *ke.params();
    if !(x > eps) {
        return Err(Error::domain("log_barrier_h", format!("|x| = {x} must exceed eps = {eps}")));
    }
    let n = params.n_f64();
    let p = params.p();
    let lx = x.ln();
    let le = eps.ln();
    let f = |rho: f64| -> Result<f64> {
        if rho == 0.0 {
            return Ok(0.0);
        }
        let zeta = smooth_cutoff(rho / eps);
        let a = (lx - rho.ln()).powf(p - 1.0);
        let b = (lx - le + kappa * zeta).powf(p - 1.0);
        Ok((a - b) * rho.powf(n - 1.0) * ke.k_eval(rho / x)?)
    };
    let i = integrate_adaptive_points(f, &[0.0, 0.5 * eps, eps], spec)?;
    Ok(ke.prefactor() * x.powf(-n - params.sp()) * i.value)
}

/// Smallest `kappa = 2^k` with `h <= 0` at every radius; errors beyond [`KAPPA_MAX`].
pub fn find_log_barrier_kappa(
    ke: &KernelEvaluator,
    eps: f64,
    radii: &[f64],
    spec: &QuadratureSpec<f64>,
) -> Result<f64> {
    let mut kappa = 1.0;
    while kappa <= KAPPA_MAX {
        let worst = radii
            .par_iter()
            .map(|&x| log_barrier_h(ke, eps, kappa, x, spec))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if worst <= 0.0 {
            return Ok(kappa);
        }
        kappa *= 2.0;
    }
    Err(Error::Convergence {
        branch: "find_log_barrier_kappa",
        reason: format!("h stays positive up to kappa = {KAPPA_MAX}"),
    })
}

/// `m mu(|x| / R)`.
pub fn make_cutoff(m: f64, big_r: f64) -> Result<RadialProfile> {
    if !(m > 0.0 && big_r > 0.0) {
        return Err(Error::domain("make_cutoff", format!("need m > 0 and R > 0, got m = {m}, R = {big_r}")));
    }
    RadialProfile::new(vec![
        Piece {
            start: 0.0,
            kind: PieceKind::Constant { value: m },
        },
        Piece {
            start: 0.5 * big_r,
            kind: PieceKind::SmoothCutoff {
                amplitude: m,
                radius: big_r,
                offset: 0.0,
            },
        },
        Piece {
            start: big_r,
            kind: PieceKind::Constant { value: 0.0 },
        },
    ])
}

/// The supersolution `(1+|x|)^-kappa` with its exponent and scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Supersolution {
    pub q: f64,
    /// `sp / (q - p + 1)`.
    pub kappa: f64,
    /// `C(-kappa)`.
    pub c_neg_kappa: f64,
    /// `C(-kappa)^(1/(q-p+1))`.
    pub scale: f64,
    pub profile: RadialProfile,
}

pub fn make_supersolution(params: &FracParams, q: f64, spec: &QuadratureSpec<f64>) -> Result<Supersolution> {
    require_subcritical(params, "make_supersolution")?;
    let crit = params
        .critical_q()
        .ok_or_else(|| Error::domain("make_supersolution", "no critical exponent for N <= ps"))?;
    if !(q > crit) {
        return Err(Error::domain(
            "make_supersolution",
            format!("q = {q} is not above the critical exponent {crit}"),
        ));
    }
    let p = params.p();
    let kappa = params.sp() / (q - p + 1.0);
    let ke = KernelEvaluator::new(params)?;
    let c = c_beta_with(&ke, -kappa, spec)?.value;
    if !(c > 0.0) {
        return Err(Error::Accuracy {
            value: c,
            err_est: f64::NAN,
            subdivisions: 0,
        });
    }
    Ok(Supersolution {
        q,
        kappa,
        c_neg_kappa: c,
        scale: c.powf(1.0 / (q - p + 1.0)),
        profile: RadialProfile::shifted_power(-kappa),
    })
}

/// `n` radii log-uniform in `(r_in, r_out)`, pushed away from every breakpoint.
pub fn sample_radii(profile: &RadialProfile, r_in: f64, r_out: f64, n: usize) -> Vec<f64> {
    let bps = profile.breakpoints();
    let ratio = r_out / r_in;
    (0..n)
        .map(|j| {
            let mut r = r_in * ratio.powf((j as f64 + 0.5) / n as f64);
            for &b in &bps {
                if (r - b).abs() < SAMPLE_GUARD * b {
                    let side = if r < b { -1.0 } else { 1.0 };
                    r = b * (1.0 + side * 2.0 * SAMPLE_GUARD);
                }
            }
            r
        })
        .collect()
}

/// Checks `PV f(r) <= bound(r)` (or `>=`) at the given radii, within `3 err_est`.
#[allow(clippy::too_many_arguments)]
pub fn barrier_check_at(
    kind: BarrierKind,
    profile: &RadialProfile,
    radii: &[f64],
    bound: &(dyn Fn(f64) -> f64 + Sync),
    direction: Direction,
    ke: &KernelEvaluator,
    spec: &QuadratureSpec<f64>,
) -> Result<BarrierCheckReport> {
    let outcomes: Vec<Result<OperatorValue>> = radii
        .par_iter()
        .map(|&r| frac_plap_radial_pv(profile, r, ke, spec))
        .collect();
    if let Some(Err(first)) = outcomes.iter().find(|o| o.is_err()) {
        if outcomes.iter().all(|o| o.is_err()) {
            return Err(first.clone());
        }
    }
    let bound_values: Vec<f64> = radii.iter().map(|&r| bound(r)).collect();
    let verdicts: Vec<bool> = outcomes
        .iter()
        .zip(&bound_values)
        .map(|(o, &b)| match o {
            Ok(v) => match direction {
                Direction::AtMost => v.value <= b + slack(v.err_est),
                Direction::AtLeast => v.value >= b - slack(v.err_est),
            },
            Err(_) => false,
        })
        .collect();
    let aggregate = Verdict::from_bool(!verdicts.is_empty() && verdicts.iter().all(|&v| v));
    let (operator_values, errors) = outcomes
        .into_iter()
        .map(|o| match o {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(e.to_string())),
        })
        .unzip();
    Ok(BarrierCheckReport {
        barrier_kind: kind,
        params: *ke.params(),
        parameters: BTreeMap::new(),
        direction,
        sample_radii: radii.to_vec(),
        operator_values,
        errors,
        bound_values,
        verdicts,
        aggregate,
    })
}

/// [`barrier_check_at`] on `n_samples` log-uniform radii of the open annulus.
#[allow(clippy::too_many_arguments)]
pub fn barrier_sign_check(
    kind: BarrierKind,
    profile: &RadialProfile,
    annulus: (f64, f64),
    n_samples: usize,
    bound: &(dyn Fn(f64) -> f64 + Sync),
    direction: Direction,
    ke: &KernelEvaluator,
    spec: &QuadratureSpec<f64>,
) -> Result<BarrierCheckReport> {
    let (r_in, r_out) = annulus;
    if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) || n_samples == 0 {
        return Err(Error::domain(
            "barrier_sign_check",
            format!("annulus ({r_in}, {r_out}) with {n_samples} samples"),
        ));
    }
    let radii = sample_radii(profile, r_in, r_out, n_samples);
    debug_assert!(radii.iter().all(|&r| r > r_in && r < r_out));
    debug_assert!(SAMPLE_GUARD > GUARD_BAND);
    barrier_check_at(kind, profile, &radii, bound, direction, ke, spec)
}

/// `PV (1+r)^-kappa >= C(-kappa) (1+r)^(-kappa q)` at each radius.
pub fn supercritical_check(
    params: &FracParams,
    q: f64,
    radii: &[f64],
    ke: &KernelEvaluator,
    spec: &QuadratureSpec<f64>,
) -> Result<BarrierCheckReport> {
    let sup = make_supersolution(params, q, spec)?;
    let (kappa, c) = (sup.kappa, sup.c_neg_kappa);
    let identity = kappa * (params.p() - 1.0) + params.sp() - kappa * q;
    if identity.abs() > 1e-14 {
        return Err(Error::Accuracy {
            value: identity,
            err_est: 0.0,
            subdivisions: 0,
        });
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::domain("supercritical_check", "radii must be positive and nonempty"));
    }
    let bound = move |r: f64| c * (1.0 + r).powf(-kappa * q);
    Ok(
        barrier_check_at(BarrierKind::Supersolution, &sup.profile, radii, &bound, Direction::AtLeast, ke, spec)?
            .with_parameter("q", q)
            .with_parameter("kappa", kappa)
            .with_parameter("c_neg_kappa", c)
            .with_parameter("scale", sup.scale),
    )
}

/// Outcome of the cutoff R-scaling check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffScaling {
    /// `(R, sup_r PV R^ps / m^(p-1))`.
    pub normalized_sups: Vec<(f64, f64)>,
    /// `max / min - 1` of the normalized suprema.
    pub spread: f64,
    pub checks: Vec<BarrierCheckReport>,
    pub aggregate: Verdict,
}

/// Runs the cutoff bound `PV <= C m^(p-1) / R^ps` on `B_R` for every `R`, with `C`
/// calibrated at the first `R`, and compares the normalized suprema.
pub fn cutoff_scaling_check(
    ke: &KernelEvaluator,
    m: f64,
    radii_r: &[f64],
    n_samples: usize,
    spec: &QuadratureSpec<f64>,
) -> Result<CutoffScaling> {
    if radii_r.is_empty() {
        return Err(Error::domain("cutoff_scaling_check", "no R values"));
    }
    let params = *ke.params();
    let ps = params.sp();
    let mp = m.powf(params.p() - 1.0);
    let mut sups = Vec::new();
    let mut checks = Vec::new();
    let mut calibration = None;
    for &big_r in radii_r {
        let profile = make_cutoff(m, big_r)?;
        let radii = sample_radii(&profile, 0.02 * big_r, 0.98 * big_r, n_samples);
        let values: Vec<f64> = radii
            .par_iter()
            .map(|&r| frac_plap_radial_pv(&profile, r, ke, spec).map(|v| v.value))
            .collect::<Result<_>>()?;
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) * big_r.powf(ps) / mp;
        let c = *calibration.get_or_insert(1.05 * sup);
        let bound = move |_: f64| c * mp / big_r.powf(ps);
        checks.push(
            barrier_check_at(BarrierKind::Cutoff, &profile, &radii, &bound, Direction::AtMost, ke, spec)?
                .with_parameter("m", m)
                .with_parameter("R", big_r)
                .with_parameter("C", c),
        );
        sups.push((big_r, sup));
    }
    let lo = sups.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let hi = sups.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let spread = hi / lo - 1.0;
    let ok = lo > 0.0 && spread < CUTOFF_SCALING_TOL && checks.iter().all(|c| c.passed());
    Ok(CutoffScaling {
        normalized_sups: sups,
        spread,
        checks,
        aggregate: Verdict::from_bool(ok),
    })
}
