//! Piecewise-analytic radial profiles `f(r)`, `r = |x|`, with differences
//! evaluated without cancellation where the piece allows it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::FracParams;

/// Relative continuity tolerance at breakpoints.
pub const CONTINUITY_TOL: f64 = 1e-12;

/// Smooth nonincreasing cutoff: 1 on `[0, 1/2]`, 0 on `[1, inf)`, `C^inf` in between.
pub fn smooth_cutoff(t: f64) -> f64 {
    if t <= 0.5 {
        return 1.0;
    }
    if t >= 1.0 {
        return 0.0;
    }
    let u = 2.0 * t - 1.0;
    let g = |x: f64| if x <= 0.0 { 0.0 } else { (-1.0 / x).exp() };
    let left = g(1.0 - u);
    left / (left + g(u))
}

/// `mu(t0) - mu(t1)` for `t1 = t0 + dt`, both inside the transition band, without
/// cancellation; `None` when the pair is far apart or leaves the band.
fn cutoff_difference(t0: f64, dt: f64) -> Option<f64> {
    let v0 = 2.0 * t0 - 1.0;
    let delta = 2.0 * dt;
    let v1 = v0 + delta;
    if !(v0 > 0.0 && v0 < 1.0 && v1 > 0.0 && v1 < 1.0) {
        return None;
    }
    // mu = 1 / (1 + e^phi) with phi(v) = 1/(1-v) - 1/v
    let phi = |v: f64| 1.0 / (1.0 - v) - 1.0 / v;
    let dphi = delta * (1.0 / ((1.0 - v0) * (1.0 - v1)) + 1.0 / (v0 * v1));
    if dphi.abs() > 1.0 {
        return None;
    }
    let one_minus_mu0 = 1.0 / (1.0 + (-phi(v0)).exp());
    let mu1 = 1.0 / (1.0 + phi(v1).exp());
    Some(one_minus_mu0 * mu1 * dphi.exp_m1())
}

/// `ln rho` from whichever of `rho` and `u = 1 - rho` carries more precision.
#[inline]
pub fn ln_rho(rho: f64, u: f64) -> f64 {
    if rho < 0.5 {
        rho.ln()
    } else {
        (-u).ln_1p()
    }
}

/// One analytic formula of a [`RadialProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceKind {
    Constant { value: f64 },
    /// `coeff * r^exponent + offset`
    Power { coeff: f64, exponent: f64, offset: f64 },
    /// `coeff * ln r + offset`
    Log { coeff: f64, offset: f64 },
    /// `offset + amplitude * mu(r / radius)` with `mu` = [`smooth_cutoff`]
    SmoothCutoff { amplitude: f64, radius: f64, offset: f64 },
    /// `coeff * (shift + r)^exponent`
    ShiftedPower { coeff: f64, shift: f64, exponent: f64 },
}

impl PieceKind {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            PieceKind::Constant { value } => value,
            PieceKind::Power { coeff, exponent, offset } => {
                if coeff == 0.0 {
                    offset
                } else {
                    coeff * r.powf(exponent) + offset
                }
            }
            PieceKind::Log { coeff, offset } => coeff * r.ln() + offset,
            PieceKind::SmoothCutoff { amplitude, radius, offset } => {
                offset + amplitude * smooth_cutoff(r / radius)
            }
            PieceKind::ShiftedPower { coeff, shift, exponent } => coeff * (shift + r).powf(exponent),
        }
    }

    /// Sum of the absolute values of the terms making up `eval(r)`, the scale for rounding.
    fn magnitude(&self, r: f64) -> f64 {
        match *self {
            PieceKind::Constant { value } => value.abs(),
            PieceKind::Power { coeff, exponent, offset } => (coeff * r.powf(exponent)).abs() + offset.abs(),
            PieceKind::Log { coeff, offset } => (coeff * r.ln()).abs() + offset.abs(),
            PieceKind::SmoothCutoff { amplitude, offset, .. } => amplitude.abs() + offset.abs(),
            PieceKind::ShiftedPower { .. } => self.eval(r).abs(),
        }
    }

    fn scaled(&self, c: f64) -> Self {
        match *self {
            PieceKind::Constant { value } => PieceKind::Constant { value: c * value },
            PieceKind::Power { coeff, exponent, offset } => PieceKind::Power {
                coeff: c * coeff,
                exponent,
                offset: c * offset,
            },
            PieceKind::Log { coeff, offset } => PieceKind::Log {
                coeff: c * coeff,
                offset: c * offset,
            },
            PieceKind::SmoothCutoff { amplitude, radius, offset } => PieceKind::SmoothCutoff {
                amplitude: c * amplitude,
                radius,
                offset: c * offset,
            },
            PieceKind::ShiftedPower { coeff, shift, exponent } => PieceKind::ShiftedPower {
                coeff: c * coeff,
                shift,
                exponent,
            },
        }
    }

    /// `f(r) - f(r rho)` with `tau = ln rho`, `u = 1 - rho`; `None` when no stable form exists.
    fn diff_inward(&self, r: f64, tau: f64, u: f64) -> Option<f64> {
        match *self {
            PieceKind::Constant { .. } => Some(0.0),
            PieceKind::Power { coeff, exponent, .. } => {
                Some(-coeff * r.powf(exponent) * (exponent * tau).exp_m1())
            }
            PieceKind::Log { coeff, .. } => Some(-coeff * tau),
            PieceKind::ShiftedPower { coeff, shift, exponent } => {
                let a = shift + r;
                Some(-coeff * a.powf(exponent) * (exponent * (-r * u / a).ln_1p()).exp_m1())
            }
            PieceKind::SmoothCutoff { amplitude, radius, .. } => {
                let t0 = r / radius;
                cutoff_difference(t0, -t0 * u).map(|d| amplitude * d)
            }
        }
    }

    /// `f(r) - f(r / rho)`.
    fn diff_outward(&self, r: f64, tau: f64, u: f64, rho: f64) -> Option<f64> {
        match *self {
            PieceKind::Constant { .. } => Some(0.0),
            PieceKind::Power { coeff, exponent, .. } => {
                Some(-coeff * r.powf(exponent) * (-exponent * tau).exp_m1())
            }
            PieceKind::Log { coeff, .. } => Some(coeff * tau),
            PieceKind::ShiftedPower { coeff, shift, exponent } => {
                let a = shift + r;
                Some(-coeff * a.powf(exponent) * (exponent * (r * u / (rho * a)).ln_1p()).exp_m1())
            }
            PieceKind::SmoothCutoff { amplitude, radius, .. } => {
                let t0 = r / radius;
                cutoff_difference(t0, t0 * u / rho).map(|d| amplitude * d)
            }
        }
    }

    /// `2 f(r) - f(r rho) - f(r / rho)`.
    fn second_difference(&self, r: f64, tau: f64, u: f64, rho: f64) -> Option<f64> {
        match *self {
            PieceKind::Constant { .. } | PieceKind::Log { .. } => Some(0.0),
            PieceKind::Power { coeff, exponent, .. } => {
                let sh = (0.5 * exponent * tau).sinh();
                Some(-4.0 * coeff * r.powf(exponent) * sh * sh)
            }
            PieceKind::ShiftedPower { coeff, shift, exponent } => {
                let a = shift + r;
                let x1 = r * u / a;
                let x2 = x1 / rho;
                let phi = |x: f64| binomial_remainder(exponent, x);
                // (1-x1)^g + (1+x2)^g - 2 = phi(-x1) + phi(x2) + g (x2 - x1), x2 - x1 = r u^2 / (rho a)
                let lin = exponent * r * u * u / (rho * a);
                Some(-coeff * a.powf(exponent) * (phi(-x1) + phi(x2) + lin))
            }
            PieceKind::SmoothCutoff { .. } => None,
        }
    }
}

/// `(1 + x)^g - 1 - g x`, accurate for small `x`.
fn binomial_remainder(g: f64, x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut term = g * x;
        let mut sum = 0.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= (g - kf) / (kf + 1.0) * x;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        (g * x.ln_1p()).exp_m1() - g * x
    }
}

/// A formula valid on `[start, next start)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Piece {
    pub start: f64,
    pub kind: PieceKind,
}

/// A continuous piecewise-analytic function of `r >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pieces: Vec<Piece>,
}

impl RadialProfile {
    /// Checks that the first piece starts at 0, starts increase, and values agree at breakpoints.
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        let Some(first) = pieces.first() else {
            return Err(Error::domain("RadialProfile", "no pieces"));
        };
        if first.start != 0.0 {
            return Err(Error::domain("RadialProfile", "first piece must start at 0"));
        }
        for w in pieces.windows(2) {
            if !(w[1].start > w[0].start) || !w[1].start.is_finite() {
                return Err(Error::domain(
                    "RadialProfile",
                    format!("breakpoints must increase: {} then {}", w[0].start, w[1].start),
                ));
            }
            let b = w[1].start;
            let left = w[0].kind.eval(b);
            let right = w[1].kind.eval(b);
            let scale = w[0]
                .kind
                .magnitude(b)
                .max(w[1].kind.magnitude(b))
                .max(f64::MIN_POSITIVE);
            if !((left - right).abs() <= CONTINUITY_TOL * scale) {
                return Err(Error::domain(
                    "RadialProfile",
                    format!("discontinuity at r = {b}: {left} vs {right}"),
                ));
            }
        }
        for (i, piece) in pieces.iter().enumerate() {
            if let PieceKind::Log { .. } = piece.kind {
                if i == 0 && pieces.len() > 1 {
                    return Err(Error::domain("RadialProfile", "a log piece at the origin must be the only piece"));
                }
            }
            if let PieceKind::SmoothCutoff { radius, .. } = piece.kind {
                if !(radius > 0.0) {
                    return Err(Error::domain("RadialProfile", "cutoff radius must be positive"));
                }
            }
            if let PieceKind::ShiftedPower { shift, .. } = piece.kind {
                if !(shift + piece.start > 0.0) {
                    return Err(Error::domain("RadialProfile", "shifted power base must stay positive"));
                }
            }
        }
        Ok(Self { pieces })
    }

    /// `|x|^beta`.
    pub fn power(beta: f64) -> Self {
        Self::single(PieceKind::Power {
            coeff: 1.0,
            exponent: beta,
            offset: 0.0,
        })
    }

    /// `ln |x|`.
    pub fn log() -> Self {
        Self::single(PieceKind::Log { coeff: 1.0, offset: 0.0 })
    }

    pub fn constant(value: f64) -> Self {
        Self::single(PieceKind::Constant { value })
    }

    /// `(1 + |x|)^exponent`.
    pub fn shifted_power(exponent: f64) -> Self {
        Self::single(PieceKind::ShiftedPower {
            coeff: 1.0,
            shift: 1.0,
            exponent,
        })
    }

    fn single(kind: PieceKind) -> Self {
        Self {
            pieces: vec![Piece { start: 0.0, kind }],
        }
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Interior breakpoints (piece starts other than 0).
    pub fn breakpoints(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| p.start).collect()
    }

    fn piece_index(&self, r: f64) -> usize {
        self.pieces.partition_point(|p| p.start <= r).saturating_sub(1)
    }

    /// `f(r)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::domain("RadialProfile::eval", format!("radius {r} must be >= 0")));
        }
        Ok(self.eval_unchecked(r))
    }

    #[inline]
    fn eval_unchecked(&self, r: f64) -> f64 {
        self.pieces[self.piece_index(r)].kind.eval(r)
    }

    /// `c * f`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    start: p.start,
                    kind: p.kind.scaled(c),
                })
                .collect(),
        }
    }

    /// The differences `(f(r) - f(r rho), f(r) - f(r / rho), 2 f(r) - f(r rho) - f(r / rho))`
    /// for `0 < rho < 1` with `u = 1 - rho` supplied exactly.
    pub fn differences(&self, r: f64, rho: f64, u: f64) -> Differences {
        let i = self.piece_index(r);
        let inner = r * rho;
        let outer = r / rho;
        let same_in = self.piece_index(inner) == i;
        let same_out = self.piece_index(outer) == i;
        let kind = &self.pieces[i].kind;
        let tau = ln_rho(rho, u);
        let fr = || kind.eval(r);
        let d_in = if same_in {
            kind.diff_inward(r, tau, u)
        } else {
            None
        }
        .unwrap_or_else(|| fr() - self.eval_unchecked(inner));
        let d_out = if same_out {
            kind.diff_outward(r, tau, u, rho)
        } else {
            None
        }
        .unwrap_or_else(|| fr() - self.eval_unchecked(outer));
        let second = if same_in && same_out {
            kind.second_difference(r, tau, u, rho)
        } else {
            None
        }
        .unwrap_or(d_in + d_out);
        Differences {
            inward: d_in,
            outward: d_out,
            second,
        }
    }

    /// `f(r) - f(r rho)` for any `rho >= 0`.
    pub fn diff_inward(&self, r: f64, rho: f64) -> f64 {
        if rho > 0.0 && rho < 1.0 {
            return self.differences(r, rho, 1.0 - rho).inward;
        }
        self.eval_unchecked(r) - self.eval_unchecked(r * rho)
    }

    /// Exponent `gamma0` with `f(r) - f(0+) ~ r^gamma0` singular behaviour at the origin;
    /// 0 for profiles bounded there.
    pub fn origin_exponent(&self) -> f64 {
        match self.pieces[0].kind {
            PieceKind::Power { coeff, exponent, .. } if coeff != 0.0 && exponent < 0.0 => exponent,
            _ => 0.0,
        }
    }

    /// True when the profile has a logarithmic singularity at the origin.
    pub fn log_at_origin(&self) -> bool {
        matches!(self.pieces[0].kind, PieceKind::Log { coeff, .. } if coeff != 0.0)
    }

    /// Growth exponent at infinity (0 for bounded or logarithmic tails).
    pub fn tail_exponent(&self) -> f64 {
        let last = self.pieces.last().expect("profile has at least one piece");
        match last.kind {
            PieceKind::Power { coeff, exponent, .. } | PieceKind::ShiftedPower { coeff, exponent, .. }
                if coeff != 0.0 && exponent > 0.0 =>
            {
                exponent
            }
            _ => 0.0,
        }
    }

    /// True when the tail grows logarithmically.
    pub fn log_tail(&self) -> bool {
        let last = self.pieces.last().expect("profile has at least one piece");
        matches!(last.kind, PieceKind::Log { coeff, .. } if coeff != 0.0)
    }

    /// Refuses tails too heavy for the operator to converge.
    pub fn check_admissible(&self, params: &FracParams) -> Result<()> {
        let growth = self.tail_exponent();
        let limit = params.sp() / (params.p() - 1.0);
        if growth >= limit {
            return Err(Error::domain(
                "RadialProfile",
                format!("tail growth r^{growth} is not integrable against the kernel (needs < {limit})"),
            ));
        }
        let origin = self.origin_exponent();
        let lower = -params.n_f64() / (params.p() - 1.0);
        if origin <= lower {
            return Err(Error::domain(
                "RadialProfile",
                format!("origin singularity r^{origin} is not locally integrable (needs > {lower})"),
            ));
        }
        Ok(())
    }
}

/// First and second differences of a profile along a radial ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Differences {
    pub inward: f64,
    pub outward: f64,
    pub second: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cutoff_difference_stable() {
        for &t0 in &[0.55, 0.7, 0.93] {
            let naive = smooth_cutoff(t0) - smooth_cutoff(t0 + 1e-3);
            let d = cutoff_difference(t0, 1e-3).unwrap();
            assert!((d - naive).abs() < 1e-10 * naive.abs(), "{d} vs {naive}");
            // difference quotients settle to -mu'(t0)
            let q1 = cutoff_difference(t0, 1e-9).unwrap() / 1e-9;
            let q2 = cutoff_difference(t0, -1e-12).unwrap() / -1e-12;
            assert!((q1 - q2).abs() < 1e-7 * q2.abs(), "{q1} vs {q2}");
        }
        assert!(cutoff_difference(0.45, 0.1).is_none());
        assert!(cutoff_difference(0.6, 0.3).is_none());
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(smooth_cutoff(0.0), 1.0);
        assert_eq!(smooth_cutoff(0.5), 1.0);
        assert_eq!(smooth_cutoff(1.0), 0.0);
        assert!((smooth_cutoff(0.75) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for k in 0..=200 {
            let v = smooth_cutoff(0.5 + 0.5 * k as f64 / 200.0);
            assert!(v <= prev + 1e-16);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_profiles() {
        let pc = |start, value| Piece {
            start,
            kind: PieceKind::Constant { value },
        };
        assert!(RadialProfile::new(vec![]).is_err());
        assert!(RadialProfile::new(vec![pc(0.5, 1.0)]).is_err());
        assert!(RadialProfile::new(vec![pc(0.0, 1.0), pc(1.0, 2.0)]).is_err());
        assert!(RadialProfile::new(vec![pc(0.0, 1.0), pc(1.0, 1.0), pc(1.0, 1.0)]).is_err());
        assert!(RadialProfile::new(vec![pc(0.0, 1.0), pc(1.0, 1.0)]).is_ok());
        assert!(RadialProfile::power(1.0).eval(-1.0).is_err());
    }

    #[test]
    fn tail_admissibility() {
        let p = FracParams::new(2, 0.5, 3.0).unwrap();
        assert!(RadialProfile::power(0.8).check_admissible(&p).is_err());
        assert!(RadialProfile::power(0.7).check_admissible(&p).is_ok());
        assert!(RadialProfile::power(-1.0).check_admissible(&p).is_err());
    }

    #[test]
    fn piecewise_eval() {
        let prof = RadialProfile::new(vec![
            Piece {
                start: 0.0,
                kind: PieceKind::Constant { value: 2.0 },
            },
            Piece {
                start: 0.5,
                kind: PieceKind::Power {
                    coeff: 1.0,
                    exponent: -1.0,
                    offset: 0.0,
                },
            },
        ])
        .unwrap();
        assert_eq!(prof.eval(0.2).unwrap(), 2.0);
        assert_eq!(prof.eval(0.5).unwrap(), 2.0);
        assert_eq!(prof.eval(4.0).unwrap(), 0.25);
        assert_eq!(prof.breakpoints(), vec![0.5]);
    }

    proptest! {
        #[test]
        fn stable_differences_match_naive(r in 0.2f64..5.0, rho in 0.05f64..0.9, beta in -1.5f64..1.5) {
            for prof in [RadialProfile::power(beta), RadialProfile::log(), RadialProfile::shifted_power(beta)] {
                let d = prof.differences(r, rho, 1.0 - rho);
                let f = |x: f64| prof.eval(x).unwrap();
                let scale = f(r).abs() + f(r * rho).abs() + f(r / rho).abs() + 1e-300;
                prop_assert!((d.inward - (f(r) - f(r * rho))).abs() <= 1e-12 * scale);
                prop_assert!((d.outward - (f(r) - f(r / rho))).abs() <= 1e-12 * scale);
                prop_assert!((d.second - (2.0 * f(r) - f(r * rho) - f(r / rho))).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn second_difference_small_u(r in 0.2f64..5.0, k in 4i32..12, beta in -1.5f64..1.5) {
            // 2f(r) - f(r rho) - f(r/rho) ~ -(r d/dr)^2 f(r) tau^2 for tiny u
            let u = 10f64.powi(-k);
            let rho = 1.0 - u;
            let tau = (-u).ln_1p();
            let d = RadialProfile::power(beta).differences(r, rho, u);
            let expect = -beta * beta * r.powf(beta) * tau * tau;
            prop_assert!((d.second - expect).abs() <= 1e-6 * expect.abs() + 1e-300);
            let sp = RadialProfile::shifted_power(beta).differences(r, rho, u);
            let g = |x: f64| (1.0 + x).powf(beta);
            // (r d/dr)^2 g = r g' + r^2 g''
            let rg1 = r * beta * (1.0 + r).powf(beta - 1.0);
            let r2g2 = r * r * beta * (beta - 1.0) * (1.0 + r).powf(beta - 2.0);
            let expect = -(rg1 + r2g2) * tau * tau;
            prop_assert!((sp.second - expect).abs() <= 1e-5 * expect.abs() + 1e-12 * g(r) * u);
        }
    }
}
