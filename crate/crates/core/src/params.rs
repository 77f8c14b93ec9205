use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance used to decide that `ps == N` (the logarithmic case).
pub const LOG_CASE_TOL: f64 = 1e-12;

/// Dimension and operator parameters `(N, s, p)` of `(-Delta_p)^s` on `R^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FracParams {
    n: u32,
    s: f64,
    p: f64,
}

impl FracParams {
    /// Validates `N >= 2`, `0 < s < 1` and `p > 1`.
    pub fn new(n: u32, s: f64, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(
                "FracParams",
                format!("dimension N = {n} must be at least 2"),
            ));
        }
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::domain(
                "FracParams",
                format!("s = {s} must lie in (0, 1)"),
            ));
        }
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::domain(
                "FracParams",
                format!("p = {p} must be finite and greater than 1"),
            ));
        }
        Ok(Self { n, s, p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn n_f64(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The product `sp`.
    pub fn sp(&self) -> f64 {
        self.s * self.p
    }

    /// True when `ps` equals `N` up to [`LOG_CASE_TOL`].
    pub fn is_log_case(&self) -> bool {
        (self.sp() - self.n_f64()).abs() < LOG_CASE_TOL
    }

    /// The nontrivial zero `(ps - N) / (p - 1)` of the fundamental constant.
    pub fn beta_star(&self) -> f64 {
        (self.sp() - self.n_f64()) / (self.p - 1.0)
    }

    /// Open interval `(-N/(p-1), ps/(p-1))` of exponents with a finite operator.
    pub fn beta_interval(&self) -> (f64, f64) {
        let q = self.p - 1.0;
        (-self.n_f64() / q, self.sp() / q)
    }

    /// True when `beta` lies strictly inside [`Self::beta_interval`].
    pub fn beta_admissible(&self, beta: f64) -> bool {
        let (lo, hi) = self.beta_interval();
        beta > lo && beta < hi
    }

    /// Exponent `beta(p-1) - sp` of the power-law right-hand side.
    pub fn rhs_exponent(&self, beta: f64) -> f64 {
        beta * (self.p - 1.0) - self.sp()
    }

    /// Critical exponent `N(p-1)/(N-ps)` for supersolutions; only for `N > ps`.
    pub fn critical_q(&self) -> Option<f64> {
        let gap = self.n_f64() - self.sp();
        (gap > LOG_CASE_TOL).then(|| self.n_f64() * (self.p - 1.0) / gap)
    }

    /// Exponent of the singular behaviour `u^lambda` at `rho = 1` of the folded integrands.
    pub fn near_one_exponent(&self) -> f64 {
        self.p * (1.0 - self.s) - 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates() {
        assert!(FracParams::new(1, 0.5, 2.0).is_err());
        assert!(FracParams::new(2, 0.0, 2.0).is_err());
        assert!(FracParams::new(2, 1.0, 2.0).is_err());
        assert!(FracParams::new(2, 0.5, 1.0).is_err());
        assert!(FracParams::new(2, 0.5, f64::NAN).is_err());
        assert!(FracParams::new(3, 0.5, 3.0).is_ok());
    }

    #[test]
    fn derived_quantities() {
        let p = FracParams::new(3, 0.5, 3.0).unwrap();
        assert_eq!(p.sp(), 1.5);
        assert_eq!(p.beta_star(), -0.75);
        assert_eq!(p.beta_interval(), (-1.5, 0.75));
        assert_eq!(p.critical_q(), Some(4.0));
        assert!(!p.is_log_case());
        let l = FracParams::new(2, 0.5, 4.0).unwrap();
        assert!(l.is_log_case());
        assert_eq!(l.critical_q(), None);
    }
}
