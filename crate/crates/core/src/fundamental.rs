//! The constant `C(beta)` with `(-Delta_p)^s |x|^beta = C(beta) |x|^(beta(p-1)-sp)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelEvaluator;
use crate::params::FracParams;
use crate::quadrature::{
    integrate_adaptive_points, integrate_endpoint_singular_dist, integrate_start_singular_dist,
    QuadratureSpec,
};
use crate::radial_operator::psi_p;

/// `|beta|` below which `C(beta)` is returned as an exact zero.
pub const BETA_ZERO_TOL: f64 = 1e-10;

/// Relative distance to `beta*` below which `C(beta)` is returned as an exact zero.
pub const BETA_STAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Zero,
    Positive,
    Negative,
}

impl Sign {
    /// Sign of a computed value, `Zero` only for exact zeros.
    pub fn of(x: f64) -> Self {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Zero => "zero",
            Sign::Positive => "positive",
            Sign::Negative => "negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CBetaResult {
    pub beta: f64,
    pub value: f64,
    pub err_est: f64,
    pub predicted_sign: Sign,
    /// `beta(p-1) - sp`.
    pub rhs_exponent: f64,
}

fn check_beta(params: &FracParams, beta: f64, op: &'static str) -> Result<()> {
    if params.is_log_case() {
        return Err(Error::domain(
            op,
            "ps = N is the logarithmic case; the fundamental solution is ln|x|",
        ));
    }
    if !params.beta_admissible(beta) {
        let (lo, hi) = params.beta_interval();
        return Err(Error::domain(op, format!("beta = {beta} outside ({lo}, {hi})")));
    }
    Ok(())
}

fn exact_zero(params: &FracParams, beta: f64) -> bool {
    let bs = params.beta_star();
    beta.abs() < BETA_ZERO_TOL || (beta - bs).abs() < BETA_STAR_TOL * bs.abs().max(1.0)
}

/// The sign of `C(beta)` from the analytic chart.
pub fn c_beta_sign(params: &FracParams, beta: f64) -> Result<Sign> {
    check_beta(params, beta, "c_beta_sign")?;
    if exact_zero(params, beta) {
        return Ok(Sign::Zero);
    }
    let bs = params.beta_star();
    if bs.min(0.0) < beta && beta < bs.max(0.0) {
        Ok(Sign::Positive)
    } else {
        Ok(Sign::Negative)
    }
}

/// `C(beta)` for `params`.
pub fn c_beta(params: &FracParams, beta: f64, spec: &QuadratureSpec<f64>) -> Result<CBetaResult> {
    let ke = KernelEvaluator::new(params)?;
    c_beta_with(&ke, beta, spec)
}

/// `C(beta)` reusing a prepared kernel.
///
/// `4 pi alpha_N int_0^1 Psi(1 - rho^beta) [rho^(N-1) - rho^(ps-beta(p-1)-1)] G(rho^2) drho`,
/// split at `1/2` with endpoint substitutions on both panels.
pub fn c_beta_with(ke: &KernelEvaluator, beta: f64, spec: &QuadratureSpec<f64>) -> Result<CBetaResult> {
    let params = *ke.params();
    check_beta(&params, beta, "c_beta")?;
    let predicted_sign = c_beta_sign(&params, beta)?;
    let rhs_exponent = params.rhs_exponent(beta);
    if exact_zero(&params, beta) {
        return Ok(CBetaResult {
            beta,
            value: 0.0,
            err_est: 0.0,
            predicted_sign,
            rhs_exponent,
        });
    }
    let n = params.n_f64();
    let p = params.p();
    let ps = params.sp();
    let gap = ps - n - beta * (p - 1.0);
    // Psi(1 - rho^beta) times the bracket, both written through expm1
    let core = move |rho: f64, tau: f64| -> f64 {
        let d = -(beta * tau).exp_m1();
        let bracket = -rho.powf(n - 1.0) * (gap * tau).exp_m1();
        psi_p(d, p) * bracket
    };
    // the same product times rho^extra, through logarithms where the factors overflow
    let core_scaled = move |rho: f64, tau: f64, extra: f64| -> f64 {
        let direct = core(rho, tau) * rho.powf(extra);
        if direct.is_finite() || tau == f64::NEG_INFINITY {
            return direct;
        }
        let sign = (beta * tau).signum() * (gap * tau).signum();
        let log_mag = (p - 1.0) * ln_abs_expm1(beta * tau) + (n - 1.0 + extra) * tau + ln_abs_expm1(gap * tau);
        sign * log_mag.exp()
    };
    let lambda_left = (n - 1.0 + beta.min(0.0) * (p - 1.0)).min(ps - 1.0 - beta.max(0.0) * (p - 1.0));
    let lambda_right = p - ps - 1.0;
    let left = if lambda_left < 0.0 {
        integrate_start_singular_dist(
            |rho: f64, _| {
                if rho == 0.0 {
                    return Ok(0.0);
                }
                Ok(core_scaled(rho, rho.ln(), -lambda_left) * ke.g_rho(rho, 1.0 - rho)?)
            },
            0.0,
            0.5,
            lambda_left,
            spec,
        )?
    } else {
        integrate_adaptive_points(
            |rho: f64| {
                if rho == 0.0 {
                    return Ok(0.0);
                }
                Ok(core_scaled(rho, rho.ln(), 0.0) * ke.g_rho(rho, 1.0 - rho)?)
            },
            &[0.0, 0.5],
            spec,
        )?
    };
    let right = integrate_endpoint_singular_dist(
        |rho: f64, u: f64| {
            if u == 0.0 {
                return Ok(0.0);
            }
            Ok(core(rho, (-u).ln_1p()) * ke.h_rho(rho, u)? * u.powf(-p))
        },
        0.5,
        1.0,
        lambda_right,
        spec,
    )?;
    let pre = ke.prefactor();
    Ok(CBetaResult {
        beta,
        value: pre * (left.value + right.value),
        err_est: pre * (left.err_est + right.err_est),
        predicted_sign,
        rhs_exponent,
    })
}

/// `C(beta)` at every grid point, in parallel, preserving order; errors stay per entry.
pub fn c_beta_sweep(
    params: &FracParams,
    grid: &[f64],
    spec: &QuadratureSpec<f64>,
) -> Vec<Result<CBetaResult>> {
    let ke = match KernelEvaluator::new(params) {
        Ok(ke) => ke,
        Err(e) => return grid.iter().map(|_| Err(e.clone())).collect(),
    };
    grid.par_iter().map(|&b| c_beta_with(&ke, b, spec)).collect()
}

/// `ln |e^x - 1|`.
fn ln_abs_expm1(x: f64) -> f64 {
    if x > 1.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().abs().ln()
    }
}

/// Number of interior grid points used to bracket the zeros.
const ZERO_GRID: usize = 48;

/// Locates the two zeros of `C` on the admissible interval by bracketing and bisection.
///
/// Returns them in increasing order.
pub fn c_beta_zeros(params: &FracParams, spec: &QuadratureSpec<f64>) -> Result<(f64, f64)> {
    if params.is_log_case() {
        return Err(Error::domain("c_beta_zeros", "ps = N has no power-law fundamental solution"));
    }
    let ke = KernelEvaluator::new(params)?;
    let (lo, hi) = params.beta_interval();
    let grid: Vec<f64> = (0..ZERO_GRID)
        .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / ZERO_GRID as f64)
        .collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&b| c_beta_with(&ke, b, spec).map(|c| c.value))
        .collect::<Result<_>>()?;
    let table: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    let mut roots = Vec::new();
    for (i, &(b, v)) in table.iter().enumerate() {
        if v == 0.0 {
            roots.push(b);
            continue;
        }
        if let Some(&(b2, v2)) = table.get(i + 1) {
            if v2 != 0.0 && (v > 0.0) != (v2 > 0.0) {
                roots.push(bisect(&ke, spec, b, v, b2)?);
            }
        }
    }
    if roots.len() != 2 {
        return Err(Error::Bracketing {
            reason: format!("expected two sign changes of C(beta), found {}", roots.len()),
            table,
        });
    }
    Ok((roots[0].min(roots[1]), roots[0].max(roots[1])))
}

fn bisect(ke: &KernelEvaluator, spec: &QuadratureSpec<f64>, mut a: f64, va: f64, mut b: f64) -> Result<f64> {
    let positive_at_a = va > 0.0;
    while b - a > 1e-12 * a.abs().max(b.abs()).max(1.0) {
        let m = 0.5 * (a + b);
        let vm = c_beta_with(ke, m, spec)?.value;
        if vm == 0.0 {
            return Ok(m);
        }
        if (vm > 0.0) == positive_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec<f64> {
        QuadratureSpec::default()
    }

    #[test]
    fn exact_zero_at_origin() {
        let p = FracParams::new(2, 0.5, 1.5).unwrap();
        let r = c_beta(&p, 0.0, &spec()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.predicted_sign, Sign::Zero);
        assert_eq!(r.rhs_exponent, -0.75);
    }

    #[test]
    fn chart() {
        let p = FracParams::new(3, 0.5, 2.0).unwrap();
        assert_eq!(c_beta_sign(&p, -1.0).unwrap(), Sign::Positive);
        assert_eq!(c_beta_sign(&p, -2.5).unwrap(), Sign::Negative);
        assert_eq!(c_beta_sign(&p, 0.5).unwrap(), Sign::Negative);
        assert_eq!(c_beta_sign(&p, -2.0).unwrap(), Sign::Zero);
        let q = FracParams::new(2, 0.75, 4.0).unwrap();
        assert_eq!(c_beta_sign(&q, 0.2).unwrap(), Sign::Positive);
        assert_eq!(c_beta_sign(&q, 0.5).unwrap(), Sign::Negative);
        assert_eq!(c_beta_sign(&q, -0.2).unwrap(), Sign::Negative);
    }

    #[test]
    fn domain_errors() {
        let p = FracParams::new(3, 0.5, 2.0).unwrap();
        assert!(c_beta(&p, -3.0, &spec()).unwrap_err().is_domain());
        assert!(c_beta(&p, 1.0, &spec()).unwrap_err().is_domain());
        let l = FracParams::new(2, 0.5, 4.0).unwrap();
        assert!(c_beta(&l, -0.1, &spec()).unwrap_err().is_domain());
    }

    #[test]
    fn middle_row_positive() {
        let p = FracParams::new(2, 0.5, 2.0).unwrap();
        let r = c_beta(&p, -0.5, &spec()).unwrap();
        assert!(r.value > 10.0 * r.err_est);
    }

    #[test]
    fn zeros_n3() {
        let p = FracParams::new(3, 0.5, 2.0).unwrap();
        let (a, b) = c_beta_zeros(&p, &spec()).unwrap();
        assert!((a + 2.0).abs() < 1e-6, "{a}");
        assert!(b.abs() < 1e-6, "{b}");
    }

    #[test]
    fn sweep_preserves_order() {
        let p = FracParams::new(2, 0.5, 2.0).unwrap();
        let grid = [-0.5, 0.0, 9.0, 0.3];
        let out = c_beta_sweep(&p, &grid, &spec());
        assert_eq!(out.len(), 4);
        assert_eq!(out[0].as_ref().unwrap().beta, -0.5);
        assert_eq!(out[1].as_ref().unwrap().value, 0.0);
        assert!(out[2].is_err());
        assert_eq!(out[3].as_ref().unwrap().predicted_sign, Sign::Negative);
    }

    #[test]
    fn continuity_under_refinement() {
        let p = FracParams::new(2, 0.5, 3.0).unwrap();
        let d = |h: f64| {
            let a = c_beta(&p, -0.3, &spec()).unwrap().value;
            let b = c_beta(&p, -0.3 + h, &spec()).unwrap().value;
            (a - b).abs()
        };
        let (d1, d2) = (d(1e-2), d(1e-3));
        assert!(d2 < 0.2 * d1);
    }
}
