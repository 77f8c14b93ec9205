//! Gamma, Beta, digamma and the Gauss hypergeometric function, plus the
//! hypergeometric composite `G(t)` that closes the angular kernel and its
//! regularisation `H(rho) = (1 - rho)^(1+ps) G(rho^2)`.
//!
//! `2F1` is summed directly for `t <= 1/2`. Above that the `1 - t`
//! connection formula is used, switching to the logarithmic form when
//! `c - a - b` is (numerically) an integer.

use crate::error::{Error, Result};
use crate::params::FracParams;
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Largest argument for which `Gamma` is finite in `f64`.
pub const GAMMA_OVERFLOW: f64 = 171.624_376_956_302_7;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Integer tolerance used to select the logarithmic connection formula.
pub const LOG_BRANCH_TOL: f64 = 1e-9;

const MAX_SERIES_TERMS: usize = 100_000;

fn is_nonpositive_integer<T: Real>(x: T) -> bool {
    x <= T::zero() && x == x.round()
}

/// `sin(pi x)` with exact argument reduction, accurate near the integers.
fn sinpi<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    let r = x - two * (x / two).round();
    // r in [-1, 1]; fold to [-1/2, 1/2] using sin(pi (1 - r)) = sin(pi r)
    let half = T::lit(0.5);
    let r = if r > half {
        T::one() - r
    } else if r < -half {
        -T::one() - r
    } else {
        r
    };
    (T::PI() * r).sin()
}

/// `cos(pi x)` with exact argument reduction.
fn cospi<T: Real>(x: T) -> T {
    sinpi(x + T::lit(0.5))
}

fn lanczos_sum<T: Real>(z: T) -> T {
    // z is the shifted argument x - 1
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::count(i));
    }
    acc
}

/// Euler's Gamma function.
///
/// Lanczos approximation (g = 7, nine terms) for `x >= 1/2`, reflection below.
pub fn gamma<T: Real>(x: T) -> Result<T> {
    if x.is_nan() {
        return Err(Error::domain("gamma", "NaN argument"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::domain(
            "gamma",
            format!("pole at non-positive integer {x}"),
        ));
    }
    if x.as_f64() > GAMMA_OVERFLOW {
        return Err(Error::Range {
            op: "gamma",
            arg: x.as_f64(),
            threshold: GAMMA_OVERFLOW,
        });
    }
    if x < T::lit(0.5) {
        let s = sinpi(x);
        let g = gamma(T::one() - x)?;
        return Ok(T::PI() / (s * g));
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    let half_pow = t.powf((z + T::lit(0.5)) / T::lit(2.0));
    let sqrt_two_pi = (T::lit(2.0) * T::PI()).sqrt();
    Ok(sqrt_two_pi * half_pow * (half_pow * (-t).exp()) * lanczos_sum(z))
}

/// `ln |Gamma(x)|` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> Result<T> {
    if !(x > T::zero()) {
        return Err(Error::domain(
            "ln_gamma",
            format!("argument {x} must be positive"),
        ));
    }
    if x < T::lit(0.5) {
        let s = sinpi(x).abs();
        return Ok((T::PI() / s).ln() - ln_gamma(T::one() - x)?);
    }
    let z = x - T::one();
    let t = z + T::lit(LANCZOS_G + 0.5);
    let half_ln_two_pi = T::lit(0.5) * (T::lit(2.0) * T::PI()).ln();
    Ok(half_ln_two_pi + (z + T::lit(0.5)) * t.ln() - t + lanczos_sum(z).ln())
}

/// Reciprocal Gamma; zero at the poles of Gamma and beyond the overflow threshold.
pub fn rgamma<T: Real>(x: T) -> T {
    if is_nonpositive_integer(x) || x.as_f64() > GAMMA_OVERFLOW {
        return T::zero();
    }
    if x < T::lit(0.5) {
        // 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
        return match gamma(T::one() - x) {
            Ok(g) => sinpi(x) * g / T::PI(),
            Err(_) => T::nan(),
        };
    }
    match gamma(x) {
        Ok(g) => T::one() / g,
        Err(_) => T::zero(),
    }
}

/// Euler Beta function `B(a, b)` for `a, b > 0`.
///
/// Uses the direct Gamma ratio while it cannot overflow and log-space otherwise.
pub fn beta<T: Real>(a: T, b: T) -> Result<T> {
    if !(a > T::zero()) || !(b > T::zero()) {
        return Err(Error::domain(
            "beta",
            format!("arguments must be positive, got ({a}, {b})"),
        ));
    }
    if (a + b).as_f64() < 150.0 {
        return Ok(gamma(a)? * gamma(b)? / gamma(a + b)?);
    }
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// Digamma `psi(x) = Gamma'(x) / Gamma(x)`.
pub fn digamma<T: Real>(x: T) -> Result<T> {
    if x.is_nan() || is_nonpositive_integer(x) {
        return Err(Error::domain("digamma", format!("pole at {x}")));
    }
    if x < T::zero() {
        // psi(x) = psi(1 - x) - pi / tan(pi x)
        return Ok(digamma(T::one() - x)? - T::PI() * cospi(x) / sinpi(x));
    }
    let mut x = x;
    let mut acc = T::zero();
    while x < T::lit(10.0) {
        acc = acc - T::one() / x;
        x = x + T::one();
    }
    let inv2 = T::one() / (x * x);
    // Bernoulli tail: -1/12 x^-2 + 1/120 x^-4 - 1/252 x^-6 + 1/240 x^-8 - 1/132 x^-10 + 691/32760 x^-12
    let tail = inv2
        * (T::lit(-1.0 / 12.0)
            + inv2
                * (T::lit(1.0 / 120.0)
                    + inv2
                        * (T::lit(-1.0 / 252.0)
                            + inv2
                                * (T::lit(1.0 / 240.0)
                                    + inv2 * (T::lit(-1.0 / 132.0) + inv2 * T::lit(691.0 / 32760.0))))));
    Ok(acc + x.ln() - T::lit(0.5) / x + tail)
}

/// Parameters `(a, b; c)` of the Gauss hypergeometric function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> HyperParams<T> {
    pub fn new(a: T, b: T, c: T) -> Result<Self> {
        if is_nonpositive_integer(c) {
            return Err(Error::domain(
                "hyp2f1",
                format!("c = {c} is a non-positive integer"),
            ));
        }
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::domain("hyp2f1", "non-finite parameter"));
        }
        Ok(Self { a, b, c })
    }

    /// The parameters of `G(t)` for dimension `n` and product `ps`.
    pub fn for_kernel(n: u32, ps: T) -> Result<Self> {
        let nn = T::lit(f64::from(n));
        let two = T::lit(2.0);
        Self::new((nn + ps) / two, (ps + two) / two, nn / two)
    }
}

fn series_tol<T: Real>() -> T {
    T::lit(1e-16).max(T::epsilon() * T::lit(0.5))
}

/// Plain Gauss series `sum (a)_n (b)_n / ((c)_n n!) z^n`.
fn gauss_series<T: Real>(a: T, b: T, c: T, z: T, branch: &'static str) -> Result<T> {
    let tol = series_tol::<T>();
    let mut sum = T::one();
    let mut term = T::one();
    for n in 0..MAX_SERIES_TERMS {
        let nf = T::count(n);
        let num = (a + nf) * (b + nf);
        let den = (c + nf) * (nf + T::one());
        term = term * num / den * z;
        sum = sum + term;
        if term == T::zero() {
            return Ok(sum);
        }
        let shrinking = (num * z).abs() < den.abs();
        if shrinking && term.abs() < tol * sum.abs() {
            return Ok(sum);
        }
        if !term.is_finite() {
            break;
        }
    }
    Err(Error::Convergence {
        branch,
        reason: format!(
            "series for 2F1({a}, {b}; {c}; {z}) did not converge within {MAX_SERIES_TERMS} terms"
        ),
    })
}

/// Decomposition `F(a, b; c; 1 - w) = w^exponent * singular + regular` for `0 <= w <= 1/2`.
///
/// In the logarithmic branches the `ln w` terms live in `regular`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearOne<T> {
    pub exponent: T,
    pub singular: T,
    pub regular: T,
}

impl<T: Real> NearOne<T> {
    pub fn value(&self, w: T) -> T {
        if self.singular == T::zero() {
            return self.regular;
        }
        w.powf(self.exponent) * self.singular + self.regular
    }
}

#[derive(Debug, Clone)]
enum Connection<T> {
    /// `c - a - b` not an integer.
    Generic { s: T, a1: T, a2: T },
    /// `c - a - b = -m`, `m >= 1`.
    LogNegative {
        m: usize,
        sing_coeff: T,
        finite: Vec<T>,
        log_coeff: T,
    },
    /// `c - a - b = m >= 0`.
    LogNonNegative {
        m: usize,
        finite_coeff: T,
        finite: Vec<T>,
        log_coeff: T,
    },
}

/// A `2F1` evaluator with the connection coefficients prepared once.
#[derive(Debug, Clone)]
pub struct Hyp2F1<T> {
    hp: HyperParams<T>,
    terminating: bool,
    connection: Connection<T>,
}

fn pochhammer_ratio_list<T: Real>(a: T, b: T, c: T, len: usize) -> Vec<T> {
    // (a)_n (b)_n / (n! (c)_n), n = 0..len
    let mut out = Vec::with_capacity(len);
    let mut coef = T::one();
    for n in 0..len {
        out.push(coef);
        let nf = T::count(n);
        coef = coef * (a + nf) * (b + nf) / ((nf + T::one()) * (c + nf));
    }
    out
}

impl<T: Real> Hyp2F1<T> {
    pub fn new(hp: HyperParams<T>) -> Result<Self> {
        let HyperParams { a, b, c } = hp;
        let terminating = is_nonpositive_integer(a) || is_nonpositive_integer(b);
        let s = c - a - b;
        let m_f = s.round();
        let connection = if (s - m_f).abs().as_f64() < LOG_BRANCH_TOL {
            let m = m_f.abs().to_usize().ok_or_else(|| {
                Error::domain("hyp2f1", format!("c - a - b = {s} too large"))
            })?;
            if m_f < T::zero() {
                let mt = T::count(m);
                let gc = gamma(c)?;
                let sing_coeff = gamma(mt)? * gc * rgamma(a) * rgamma(b);
                let finite = pochhammer_ratio_list(a - mt, b - mt, T::one() - mt, m);
                let sign = if m % 2 == 0 { T::one() } else { -T::one() };
                let log_coeff = -sign * gc * rgamma(a - mt) * rgamma(b - mt);
                Connection::LogNegative {
                    m,
                    sing_coeff,
                    finite,
                    log_coeff,
                }
            } else {
                let mt = T::count(m);
                let gc = gamma(c)?;
                let finite_coeff = if m == 0 {
                    T::zero()
                } else {
                    gamma(mt)? * gc * rgamma(a + mt) * rgamma(b + mt)
                };
                let finite = pochhammer_ratio_list(a, b, T::one() - mt, m);
                let log_coeff = -gc * rgamma(a) * rgamma(b);
                Connection::LogNonNegative {
                    m,
                    finite_coeff,
                    finite,
                    log_coeff,
                }
            }
        } else {
            let gc = gamma(c)?;
            let a1 = gc * gamma(s)? * rgamma(c - a) * rgamma(c - b);
            let a2 = gc * gamma(-s)? * rgamma(a) * rgamma(b);
            Connection::Generic { s, a1, a2 }
        };
        Ok(Self {
            hp,
            terminating,
            connection,
        })
    }

    pub fn params(&self) -> HyperParams<T> {
        self.hp
    }

    /// `F(a, b; c; t)` for `0 <= t < 1`.
    pub fn eval(&self, t: T) -> Result<T> {
        if !(t >= T::zero()) || t >= T::one() {
            return Err(Error::domain(
                "hyp2f1",
                format!("t = {t} outside [0, 1)"),
            ));
        }
        if t == T::zero() {
            return Ok(T::one());
        }
        let HyperParams { a, b, c } = self.hp;
        if self.terminating || t <= T::lit(0.5) {
            return gauss_series(a, b, c, t, "direct series");
        }
        let w = T::one() - t;
        Ok(self.near_one(w)?.value(w))
    }

    /// Connection-formula pieces at `w = 1 - t`, `0 <= w <= 1/2`.
    pub fn near_one(&self, w: T) -> Result<NearOne<T>> {
        if !(w >= T::zero()) || w > T::lit(0.5) {
            return Err(Error::domain(
                "hyp2f1",
                format!("connection formula needs 0 <= 1 - t <= 1/2, got {w}"),
            ));
        }
        let HyperParams { a, b, c } = self.hp;
        match &self.connection {
            Connection::Generic { s, a1, a2 } => {
                let s = *s;
                let f1 = if *a1 == T::zero() {
                    T::zero()
                } else {
                    gauss_series(a, b, T::one() - s, w, "1-t connection, regular part")?
                };
                let f2 = gauss_series(c - a, c - b, T::one() + s, w, "1-t connection, singular part")?;
                Ok(NearOne {
                    exponent: s,
                    singular: *a2 * f2,
                    regular: *a1 * f1,
                })
            }
            Connection::LogNegative {
                m,
                sing_coeff,
                finite,
                log_coeff,
            } => {
                let mut fin = T::zero();
                let mut wp = T::one();
                for coef in finite {
                    fin = fin + *coef * wp;
                    wp = wp * w;
                }
                let regular = if *log_coeff == T::zero() {
                    T::zero()
                } else {
                    *log_coeff
                        * log_series(a, b, *m, w, "logarithmic 1-t connection (c-a-b = -m)")?
                };
                Ok(NearOne {
                    exponent: -T::count(*m),
                    singular: *sing_coeff * fin,
                    regular,
                })
            }
            Connection::LogNonNegative {
                m,
                finite_coeff,
                finite,
                log_coeff,
            } => {
                let mut fin = T::zero();
                let mut wp = T::one();
                for coef in finite {
                    fin = fin + *coef * wp;
                    wp = wp * w;
                }
                let mt = T::count(*m);
                let sign = if m % 2 == 0 { T::one() } else { -T::one() };
                let log_part = if *log_coeff == T::zero() {
                    T::zero()
                } else {
                    *log_coeff
                        * sign
                        * w.powi(*m as i32)
                        * log_series(a + mt, b + mt, *m, w, "logarithmic 1-t connection (c-a-b = m)")?
                };
                Ok(NearOne {
                    exponent: T::zero(),
                    singular: T::zero(),
                    regular: *finite_coeff * fin + log_part,
                })
            }
        }
    }
}

/// `sum_n (a)_n (b)_n / (n! (n+m)!) w^n [ln w - psi(n+1) - psi(n+m+1) + psi(a+n) + psi(b+n)]`.
fn log_series<T: Real>(a: T, b: T, m: usize, w: T, branch: &'static str) -> Result<T> {
    let degenerate = |e: Error| Error::Convergence {
        branch,
        reason: format!("digamma pole for a = {a}, b = {b}: {e}"),
    };
    let ln_w = w.ln();
    let mut psi_n1 = T::lit(-EULER_GAMMA);
    let mut psi_nm1 = T::lit(-EULER_GAMMA);
    for k in 1..=m {
        psi_nm1 = psi_nm1 + T::one() / T::count(k);
    }
    let mut psi_a = digamma(a).map_err(degenerate)?;
    let mut psi_b = digamma(b).map_err(degenerate)?;
    let mut coef = T::one();
    for k in 1..=m {
        coef = coef / T::count(k);
    }
    if w == T::zero() {
        return Ok(coef * (ln_w - psi_n1 - psi_nm1 + psi_a + psi_b));
    }
    let tol = series_tol::<T>();
    let mut sum = T::zero();
    let mut wp = T::one();
    for n in 0..MAX_SERIES_TERMS {
        let term = coef * wp * (ln_w - psi_n1 - psi_nm1 + psi_a + psi_b);
        sum = sum + term;
        let nf = T::count(n);
        let num = (a + nf) * (b + nf);
        let den = (nf + T::one()) * (nf + T::count(m) + T::one());
        let shrinking = (num * w).abs() < den.abs();
        if n > 0 && shrinking && term.abs() < tol * sum.abs() {
            return Ok(sum);
        }
        if coef == T::zero() {
            return Ok(sum);
        }
        coef = coef * num / den;
        wp = wp * w;
        psi_n1 = psi_n1 + T::one() / (nf + T::one());
        psi_nm1 = psi_nm1 + T::one() / (nf + T::count(m) + T::one());
        psi_a = psi_a + T::one() / (a + nf);
        psi_b = psi_b + T::one() / (b + nf);
        if !sum.is_finite() {
            break;
        }
    }
    Err(Error::Convergence {
        branch,
        reason: format!("logarithmic series did not converge (a = {a}, b = {b}, m = {m}, w = {w})"),
    })
}

/// Gauss hypergeometric function `2F1(a, b; c; t)` for `0 <= t < 1`.
pub fn hyp2f1<T: Real>(hp: HyperParams<T>, t: T) -> Result<T> {
    Hyp2F1::new(hp)?.eval(t)
}

/// Prepared evaluator for `G(t) = B((N-1)/2, 1/2) 2F1((N+ps)/2, (ps+2)/2; N/2; t)`
/// and its regularisation `H`.
#[derive(Debug, Clone)]
pub struct GKernel {
    n: u32,
    ps: f64,
    beta_const: f64,
    hyp: Hyp2F1<f64>,
}

/// `rho` above which `G(rho^2)` switches to the connection formula.
const RHO_SWITCH: f64 = std::f64::consts::FRAC_1_SQRT_2;

impl GKernel {
    pub fn new(params: &FracParams) -> Result<Self> {
        Self::with_ps(params.n(), params.sp())
    }

    /// Builds the kernel for an explicit `ps` (used by the perturbation fallback).
    pub fn with_ps(n: u32, ps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("G", format!("dimension N = {n} < 2")));
        }
        let beta_const = beta(0.5 * (f64::from(n) - 1.0), 0.5)?;
        let hyp = Hyp2F1::new(HyperParams::for_kernel(n, ps)?)?;
        Ok(Self {
            n,
            ps,
            beta_const,
            hyp,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn ps(&self) -> f64 {
        self.ps
    }

    /// `B((N-1)/2, 1/2)`, the value `G(0)`.
    pub fn g0(&self) -> f64 {
        self.beta_const
    }

    /// `G(t)` for `0 <= t < 1`.
    pub fn g(&self, t: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::domain("G", format!("t = {t} outside [0, 1)")));
        }
        Ok(self.beta_const * self.hyp.eval(t)?)
    }

    /// `G(rho^2)` given `rho` and `u = 1 - rho` (both supplied so `u` keeps full precision).
    pub fn g_rho(&self, rho: f64, u: f64) -> Result<f64> {
        if rho <= RHO_SWITCH {
            return Ok(self.beta_const * self.hyp.eval(rho * rho)?);
        }
        if !(u > 0.0) {
            return Err(Error::domain("G", "rho = 1 is outside the domain of G(rho^2)"));
        }
        Ok(self.h_rho(rho, u)? / u.powf(1.0 + self.ps))
    }

    /// `H(rho)` given `rho` and `u = 1 - rho`; finite on `[0, 1]`.
    pub fn h_rho(&self, rho: f64, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain("H", format!("rho = {rho} outside [0, 1]")));
        }
        let e = 1.0 + self.ps;
        if rho <= RHO_SWITCH {
            return Ok(u.powf(e) * self.beta_const * self.hyp.eval(rho * rho)?);
        }
        let w = u * (2.0 - u);
        let near = self.hyp.near_one(w)?;
        // w^(c-a-b) u^(1+ps) = (2-u)^(-1-ps) since c - a - b = -1 - ps
        let sing = near.singular * (2.0 - u).powf(-e);
        let reg = if u == 0.0 { 0.0 } else { u.powf(e) * near.regular };
        Ok(self.beta_const * (sing + reg))
    }

    /// `H(rho) = (1 - rho)^(1+ps) G(rho^2)`.
    pub fn h(&self, rho: f64) -> Result<f64> {
        self.h_rho(rho, 1.0 - rho)
    }

    /// `lim_{rho -> 1-} H(rho)` from the connection formula.
    pub fn h_limit(&self) -> Result<f64> {
        self.h_rho(1.0, 0.0)
    }
}

/// `G(t)` for the kernel of `params`.
pub fn g_eval(t: f64, params: &FracParams) -> Result<f64> {
    GKernel::new(params)?.g(t)
}

/// `H(rho)` for the kernel of `params`; at `rho = 1` returns the limit value.
pub fn h_eval(rho: f64, params: &FracParams) -> Result<f64> {
    GKernel::new(params)?.h(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn gamma_reference_values() {
        assert!(rel(gamma(1.0_f64).unwrap(), 1.0) < 1e-15);
        assert!(rel(gamma(0.5_f64).unwrap(), std::f64::consts::PI.sqrt()) < 1e-14);
        assert!(rel(gamma(5.0_f64).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma(1e-3_f64).unwrap(), 999.423_772_484_595_5) < 1e-13);
        assert!(rel(gamma(170.0_f64).unwrap(), 4.269_068_009_004_705e304) < 1e-12);
        assert!(rel(gamma(-0.5_f64).unwrap(), -2.0 * std::f64::consts::PI.sqrt()) < 1e-14);
    }

    #[test]
    fn gamma_errors() {
        assert!(matches!(gamma(0.0_f64), Err(Error::Domain { .. })));
        assert!(matches!(gamma(-3.0_f64), Err(Error::Domain { .. })));
        match gamma(172.0_f64) {
            Err(Error::Range { threshold, .. }) => assert_eq!(threshold, GAMMA_OVERFLOW),
            other => panic!("expected range error, got {other:?}"),
        }
    }

    #[test]
    fn gamma_single_precision() {
        let g = gamma(4.5_f32).unwrap();
        assert!((g - 11.631_728_f32).abs() < 1e-4);
    }

    #[test]
    fn beta_values() {
        assert!(rel(beta(1.0_f64, 1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(beta(0.5_f64, 0.5).unwrap(), std::f64::consts::PI) < 1e-14);
        assert!(rel(beta(2.0_f64, 3.0).unwrap(), 1.0 / 12.0) < 1e-14);
        assert!(beta(0.0_f64, 1.0).is_err());
        assert!(beta(200.0_f64, 300.0).unwrap() > 0.0);
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for &x in &[0.1_f64, 0.7, 1.5, 3.3, 12.0, 50.5] {
            assert!((ln_gamma(x).unwrap() - gamma(x).unwrap().ln()).abs() < 1e-13 * x.max(1.0));
        }
    }

    #[test]
    fn digamma_values() {
        assert!((digamma(1.0_f64).unwrap() + EULER_GAMMA).abs() < 1e-14);
        // psi(1/2) = -gamma - 2 ln 2
        let expect = -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert!((digamma(0.5_f64).unwrap() - expect).abs() < 1e-14);
        assert!((digamma(-0.5_f64).unwrap() - 0.036_489_973_978_576_52).abs() < 1e-13);
        assert!(digamma(-2.0_f64).is_err());
    }

    #[test]
    fn hyp2f1_identities() {
        let hp = HyperParams::new(1.0, 1.0, 2.0).unwrap();
        assert_eq!(hyp2f1(hp, 0.0).unwrap(), 1.0);
        assert!(rel(hyp2f1(hp, 0.5).unwrap(), 2.0 * std::f64::consts::LN_2) < 1e-14);
        // F(1,1;2;t) = -ln(1-t)/t exercises the log branch with m = 0
        for &t in &[0.6, 0.9, 0.999] {
            let exact = -(1.0_f64 - t).ln() / t;
            assert!(rel(hyp2f1(hp, t).unwrap(), exact) < 1e-13, "t = {t}");
        }
        let hp = HyperParams::new(1.5, 2.3, 2.3).unwrap();
        assert!(rel(hyp2f1(hp, 0.2).unwrap(), 1.397_542_485_937_368_6) < 1e-14);
        assert!(rel(hyp2f1(hp, 0.95).unwrap(), 0.05_f64.powf(-1.5)) < 1e-12);
    }

    #[test]
    fn hyp2f1_terminating_polynomial() {
        // F(-2, b; c; t) = 1 - 2bt/c + b(b+1)t^2/(c(c+1))
        let (b, c, t) = (1.5, 2.5, 0.8);
        let hp = HyperParams::new(-2.0, b, c).unwrap();
        let exact = 1.0 - 2.0 * b * t / c + b * (b + 1.0) * t * t / (c * (c + 1.0));
        assert!(rel(hyp2f1(hp, t).unwrap(), exact) < 1e-14);
    }

    #[test]
    fn hyp2f1_domain() {
        assert!(HyperParams::new(1.0, 1.0, -2.0).is_err());
        let hp = HyperParams::new(1.0, 1.0, 2.0).unwrap();
        assert!(hyp2f1(hp, 1.0).is_err());
        assert!(hyp2f1(hp, -0.1).is_err());
    }

    #[test]
    fn log_branch_positive_m() {
        // c - a - b = 1: F(1/2, 1/2; 2; t) compared against the direct series at t = 0.5 + 0
        let hp = HyperParams::new(0.5, 0.5, 2.0).unwrap();
        let h = Hyp2F1::new(hp).unwrap();
        let t = 0.5_f64;
        let series = gauss_series(0.5, 0.5, 2.0, t, "test").unwrap();
        let near = h.near_one(1.0 - t).unwrap().value(1.0 - t);
        assert!(rel(near, series) < 1e-13);
    }

    #[test]
    fn connection_matches_series_at_switch() {
        // Both routes are valid at t = 1/2; exercise generic and log-negative branches.
        for &(a, b, c) in &[(2.25, 1.75, 1.5), (1.5, 1.5, 1.0), (2.0, 2.0, 1.0), (3.0, 2.5, 1.5)] {
            let hp = HyperParams::new(a, b, c).unwrap();
            let h = Hyp2F1::new(hp).unwrap();
            let series = gauss_series(a, b, c, 0.5, "test").unwrap();
            let near = h.near_one(0.5).unwrap().value(0.5);
            assert!(rel(near, series) < 1e-12, "({a},{b},{c}): {near} vs {series}");
        }
    }

    #[test]
    fn g_at_zero_is_beta() {
        let p = FracParams::new(2, 0.5, 2.0).unwrap();
        assert!(rel(g_eval(0.0, &p).unwrap(), std::f64::consts::PI) < 1e-14);
        let p = FracParams::new(3, 0.5, 3.0).unwrap();
        assert!(rel(g_eval(0.0, &p).unwrap(), 2.0) < 1e-14);
        assert!(g_eval(1.0, &p).is_err());
    }

    #[test]
    fn h_at_zero_and_limit() {
        let p = FracParams::new(2, 0.5, 2.0).unwrap();
        assert!(rel(h_eval(0.0, &p).unwrap(), std::f64::consts::PI) < 1e-14);
        let lim = h_eval(1.0, &p).unwrap();
        // closed form: B(1/2,1/2) 2^-(1+ps) Gamma(N/2) Gamma(1+ps) / (Gamma((N+ps)/2) Gamma((ps+2)/2))
        let ps = 1.0;
        let closed = std::f64::consts::PI * 2f64.powf(-1.0 - ps) * gamma(1.0).unwrap() * gamma(1.0 + ps).unwrap()
            / (gamma(1.5).unwrap() * gamma(1.5).unwrap());
        assert!(rel(lim, closed) < 1e-13);
        assert!(lim.is_finite() && lim > 0.0);
    }
}
