//! The angular kernel `K(rho)` obtained by integrating `|e_1 - rho z|^-(N+ps)`
//! over the sphere, both by direct quadrature and in hypergeometric closed form.

use crate::error::{Error, Result};
use crate::params::FracParams;
use crate::quadrature::{integrate_adaptive_points, QuadratureSpec};
use crate::specfun::{gamma, GKernel};

/// Distance from `rho = 1` inside which `K` is refused.
pub const K_SINGULAR_BAND: f64 = 1e-12;

/// `alpha_N = pi^((N-3)/2) / Gamma((N-1)/2)`; `4 pi alpha_N` is the operator prefactor.
pub fn alpha_n(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("alpha_n", format!("dimension N = {n} < 2")));
    }
    let nf = f64::from(n);
    Ok(std::f64::consts::PI.powf(0.5 * (nf - 3.0)) / gamma(0.5 * (nf - 1.0))?)
}

/// `K(rho) = int_0^pi sin^(N-2)(t) / (1 - 2 rho cos t + rho^2)^((N+ps)/2) dt` by adaptive quadrature.
pub fn k_theta(rho: f64, params: &FracParams) -> Result<f64> {
    let spec = QuadratureSpec {
        rel_tol: 1e-12,
        abs_tol: 0.0,
        max_subdivisions: 4000,
        ..QuadratureSpec::default()
    };
    k_theta_with(rho, params, &spec)
}

/// [`k_theta`] with an explicit quadrature policy.
pub fn k_theta_with(rho: f64, params: &FracParams, spec: &QuadratureSpec<f64>) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::domain("k_theta", format!("rho = {rho} must be finite and >= 0")));
    }
    let gap = (1.0 - rho).abs();
    if gap < K_SINGULAR_BAND {
        return Err(Error::domain("k_theta", format!("rho = {rho} too close to 1")));
    }
    let sin_pow = f64::from(params.n()) - 2.0;
    let expo = 0.5 * (params.n_f64() + params.sp());
    let f = |t: f64| {
        let h = (0.5 * t).sin();
        // 1 - 2 rho cos t + rho^2 written without cancellation
        let d = gap * gap + 4.0 * rho * h * h;
        Ok(t.sin().powf(sin_pow) / d.powf(expo))
    };
    // panels resolve the peak of width |1 - rho| at t = 0
    let mut pts = vec![0.0];
    let mut t = gap.min(1.0);
    while t < std::f64::consts::PI {
        pts.push(t);
        t *= 2.0;
    }
    pts.push(std::f64::consts::PI);
    if pts.len() > 2 && pts[pts.len() - 2] > 0.9 * std::f64::consts::PI {
        pts.remove(pts.len() - 2);
    }
    // sqrt substitution on the first panel, t = v^2
    let first = pts[1];
    let mut g = f;
    let head = integrate_adaptive_points(
        |v: f64| Ok(2.0 * v * g(v * v)?),
        &[0.0, first.sqrt()],
        spec,
    )?;
    let tail = integrate_adaptive_points(&mut g, &pts[1..], spec)?;
    Ok(head.value + tail.value)
}

/// Optional behaviour of [`KernelEvaluator`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KernelOptions {
    /// Replace `ps` by `ps (1 + 1e-9)` so the connection formula never hits the
    /// logarithmic branch; a debug aid for cross-checking that branch.
    pub perturb_integer_ps: bool,
}

/// Prepared closed-form kernel for fixed `(N, s, p)`.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    params: FracParams,
    alpha: f64,
    h_limit: f64,
    g: GKernel,
    theta_spec: QuadratureSpec<f64>,
}

impl KernelEvaluator {
    pub fn new(params: &FracParams) -> Result<Self> {
        Self::with_options(params, KernelOptions::default())
    }

    pub fn with_options(params: &FracParams, options: KernelOptions) -> Result<Self> {
        let ps = if options.perturb_integer_ps {
            params.sp() * (1.0 + 1e-9)
        } else {
            params.sp()
        };
        let g = GKernel::with_ps(params.n(), ps)?;
        let h_limit = g.h_limit()?;
        Ok(Self {
            params: *params,
            alpha: alpha_n(params.n())?,
            h_limit,
            g,
            theta_spec: QuadratureSpec {
                rel_tol: 1e-12,
                abs_tol: 0.0,
                max_subdivisions: 4000,
                ..QuadratureSpec::default()
            },
        })
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }

    /// `alpha_N`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `4 pi alpha_N`.
    pub fn prefactor(&self) -> f64 {
        4.0 * std::f64::consts::PI * self.alpha
    }

    /// `lim_{rho -> 1-} (1 - rho)^(1+ps) G(rho^2)`.
    pub fn h_limit(&self) -> f64 {
        self.h_limit
    }

    /// The `ps` actually used by the closed form (differs only when perturbed).
    pub fn ps(&self) -> f64 {
        self.g.ps()
    }

    /// `G(rho^2)` from `rho` and `u = 1 - rho`.
    #[inline]
    pub fn g_rho(&self, rho: f64, u: f64) -> Result<f64> {
        self.g.g_rho(rho, u)
    }

    /// `H(rho)` from `rho` and `u = 1 - rho`.
    #[inline]
    pub fn h_rho(&self, rho: f64, u: f64) -> Result<f64> {
        self.g.h_rho(rho, u)
    }

    /// `K(rho)` from the closed form; refuses `|rho - 1| < 1e-12`.
    pub fn k_eval(&self, rho: f64) -> Result<f64> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::domain("K_eval", format!("rho = {rho} must be finite and >= 0")));
        }
        if (rho - 1.0).abs() < K_SINGULAR_BAND {
            return Err(Error::domain(
                "K_eval",
                format!("rho = {rho} lies within {K_SINGULAR_BAND:e} of the singularity at 1"),
            ));
        }
        if rho < 1.0 {
            self.g.g_rho(rho, 1.0 - rho)
        } else {
            let inv = 1.0 / rho;
            let g = self.g.g_rho(inv, (rho - 1.0) / rho)?;
            Ok(g * rho.powf(-(self.params.n_f64() + self.g.ps())))
        }
    }

    /// `K(rho)` by direct quadrature.
    pub fn k_theta(&self, rho: f64) -> Result<f64> {
        k_theta_with(rho, &self.params, &self.theta_spec)
    }
}

/// `K(rho)` from the closed form using a prepared evaluator.
pub fn k_eval(rho: f64, evaluator: &KernelEvaluator) -> Result<f64> {
    evaluator.k_eval(rho)
}
