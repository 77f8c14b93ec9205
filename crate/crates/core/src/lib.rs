//! Fundamental solutions of the fractional p-Laplacian for radial functions.
//!
//! The operator `(-Delta_p)^s f(x) = 2 PV int Psi_p(f(x) - f(y)) / |x - y|^(N+sp) dy`
//! is reduced for radial `f` to a one-dimensional integral against the kernel
//! `K(rho)`, evaluated in closed form through `2F1`. On top of that sit the
//! constant `C(beta)` of `|x|^beta`, the logarithmic case `ps = N`, the
//! barrier functions built from them, and an independent two-dimensional
//! brute-force oracle.
//!
//! The special functions and quadrature are generic over [`Real`]; the
//! operator-level modules work in `f64`.

pub mod barriers;
pub mod cli;
pub mod error;
pub mod fundamental;
pub mod kernel;
pub mod oracle;
pub mod params;
pub mod profile;
pub mod quadrature;
pub mod radial_operator;
pub mod report;
pub mod scalar;
pub mod specfun;

pub use error::{Error, Result};
pub use fundamental::{c_beta, c_beta_sign, c_beta_sweep, c_beta_zeros, CBetaResult, Sign};
pub use kernel::{alpha_n, k_theta, KernelEvaluator};
pub use params::FracParams;
pub use profile::{PieceKind, RadialProfile};
pub use radial_operator::{frac_plap_radial_jeps, frac_plap_radial_pv, OperatorValue};
pub use report::{Report, Verdict};
pub use scalar::Real;

/// Quadrature policy in double precision.
pub type Spec = quadrature::QuadratureSpec<f64>;

/// Value with error estimate in double precision.
pub type Estimate = quadrature::Estimate<f64>;
