//! Adaptive Gauss-Kronrod integration, endpoint-singular substitutions and
//! principal-value extrapolation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerances and budgets shared by every integration in the crate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureSpec<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_subdivisions: usize,
    /// Exponent of the initial panel grading toward a singular endpoint.
    pub grading_exponent: T,
    /// Truncation radii for principal-value extrapolation, strictly decreasing.
    pub pv_epsilons: Vec<T>,
    /// Recompute principal values by an independent path and report both.
    pub dual_path: bool,
}

impl<T: Real> Default for QuadratureSpec<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)),
            abs_tol: T::lit(1e-14),
            max_subdivisions: 2000,
            grading_exponent: T::lit(2.0),
            pv_epsilons: [1e-2, 1e-3, 1e-4, 1e-5, 1e-6].iter().map(|&e| T::lit(e)).collect(),
            dual_path: false,
        }
    }
}

impl<T: Real> QuadratureSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero()) {
            return Err(Error::domain("QuadratureSpec", "rel_tol must be positive"));
        }
        if !(self.abs_tol >= T::zero()) {
            return Err(Error::domain("QuadratureSpec", "abs_tol must be non-negative"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("QuadratureSpec", "max_subdivisions must be positive"));
        }
        if !(self.grading_exponent >= T::one()) {
            return Err(Error::domain("QuadratureSpec", "grading_exponent must be at least 1"));
        }
        if self.pv_epsilons.len() < 3 {
            return Err(Error::domain("QuadratureSpec", "need at least three pv_epsilons"));
        }
        let ok = self.pv_epsilons.iter().all(|&e| e > T::zero())
            && self.pv_epsilons.windows(2).all(|w| w[1] < w[0]);
        if !ok {
            return Err(Error::domain(
                "QuadratureSpec",
                "pv_epsilons must be positive and strictly decreasing",
            ));
        }
        Ok(())
    }

    /// Same spec with a different relative tolerance.
    pub fn with_rel_tol(&self, rel_tol: T) -> Self {
        Self {
            rel_tol,
            ..self.clone()
        }
    }
}

/// Value and error estimate of an integral or limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub err_est: T,
}

impl<T: Real> Estimate<T> {
    pub fn new(value: T, err_est: T) -> Self {
        Self { value, err_est }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    pub fn scale(self, c: T) -> Self {
        Self::new(self.value * c, self.err_est * c.abs())
    }
}

impl<T: Real> std::ops::Add for Estimate<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.err_est + rhs.err_est)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral<T> {
    pub value: T,
    pub err_est: T,
    pub subdivisions: usize,
    pub evaluations: usize,
}

impl<T: Real> Integral<T> {
    pub fn estimate(&self) -> Estimate<T> {
        Estimate::new(self.value, self.err_est)
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_584,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    err: T,
    floor: T,
}

fn checked<T: Real, F: FnMut(T) -> Result<T>>(f: &mut F, x: T) -> Result<T> {
    let v = f(x)?;
    if !v.is_finite() {
        return Err(Error::Integrand {
            x: x.as_f64(),
            value: v.as_f64(),
        });
    }
    Ok(v)
}

/// One 21-point Kronrod panel with the embedded 10-point Gauss error estimate.
fn kronrod21<T: Real, F: FnMut(T) -> Result<T>>(f: &mut F, a: T, b: T) -> Result<Segment<T>> {
    let half = T::lit(0.5);
    let centr = half * (a + b);
    let hlgth = half * (b - a);
    let dhlgth = hlgth.abs();
    let fc = checked(f, centr)?;
    let mut resg = T::zero();
    let mut resk = T::lit(WGK[10]) * fc;
    let mut resabs = resk.abs();
    let mut fv1 = [T::zero(); 10];
    let mut fv2 = [T::zero(); 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let absc = hlgth * T::lit(XGK[jtw]);
        let f1 = checked(f, centr - absc)?;
        let f2 = checked(f, centr + absc)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg = resg + T::lit(WG[j]) * (f1 + f2);
        resk = resk + T::lit(WGK[jtw]) * (f1 + f2);
        resabs = resabs + T::lit(WGK[jtw]) * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let absc = hlgth * T::lit(XGK[jtwm1]);
        let f1 = checked(f, centr - absc)?;
        let f2 = checked(f, centr + absc)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk = resk + T::lit(WGK[jtwm1]) * (f1 + f2);
        resabs = resabs + T::lit(WGK[jtwm1]) * (f1.abs() + f2.abs());
    }
    let reskh = resk * half;
    let mut resasc = T::lit(WGK[10]) * (fc - reskh).abs();
    for j in 0..10 {
        resasc = resasc + T::lit(WGK[j]) * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * hlgth;
    resabs = resabs * dhlgth;
    resasc = resasc * dhlgth;
    let mut err = ((resk - resg) * hlgth).abs();
    if resasc != T::zero() && err != T::zero() {
        let ratio = (T::lit(200.0) * err / resasc).powf(T::lit(1.5));
        err = resasc * ratio.min(T::one());
    }
    let eps50 = T::lit(50.0) * T::epsilon();
    let mut floor = T::zero();
    if resabs > T::min_positive_value() / eps50 {
        floor = eps50 * resabs;
        err = err.max(floor);
    }
    Ok(Segment {
        a,
        b,
        value,
        err,
        floor,
    })
}

#[derive(Debug, PartialEq)]
struct Pending {
    err: f64,
    idx: usize,
}

impl Eq for Pending {}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        // largest error first; ties broken toward the oldest segment
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn tolerance<T: Real>(value: T, spec: &QuadratureSpec<T>) -> T {
    spec.abs_tol.max(spec.rel_tol * value.abs())
}

fn sum_segments<T: Real>(segs: &[Segment<T>]) -> (T, T) {
    let mut order: Vec<usize> = (0..segs.len()).collect();
    order.sort_by(|&i, &j| segs[i].a.as_f64().total_cmp(&segs[j].a.as_f64()));
    let mut value = T::zero();
    let mut err = T::zero();
    for i in order {
        value = value + segs[i].value;
        err = err + segs[i].err;
    }
    (value, err)
}

/// Adaptive integration over consecutive panels `points[0] < points[1] < ...`.
///
/// Returns the best estimate together with a convergence flag instead of failing.
fn adaptive_core<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    points: &[T],
    spec: &QuadratureSpec<T>,
) -> Result<(Integral<T>, bool)> {
    spec.validate()?;
    let mut segs: Vec<Segment<T>> = Vec::with_capacity(points.len() + 16);
    for w in points.windows(2) {
        if w[1] > w[0] {
            segs.push(kronrod21(&mut f, w[0], w[1])?);
        }
    }
    let mut evaluations = 21 * segs.len();
    if segs.is_empty() {
        return Ok((
            Integral {
                value: T::zero(),
                err_est: T::zero(),
                subdivisions: 0,
                evaluations: 0,
            },
            true,
        ));
    }
    let mut heap: BinaryHeap<Pending> = segs
        .iter()
        .enumerate()
        .map(|(idx, s)| Pending {
            err: s.err.as_f64(),
            idx,
        })
        .collect();
    let mut value: T = segs.iter().fold(T::zero(), |acc, s| acc + s.value);
    let mut err: T = segs.iter().fold(T::zero(), |acc, s| acc + s.err);
    let mut floor: T = segs.iter().fold(T::zero(), |acc, s| acc + s.floor);
    let mut subdivisions = 0;
    let mut converged = false;
    loop {
        if err <= tolerance(value, spec) || err <= T::lit(2.0) * floor {
            converged = true;
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            break;
        }
        let Some(top) = heap.pop() else {
            break;
        };
        let seg = segs[top.idx];
        let mid = T::lit(0.5) * (seg.a + seg.b);
        let width = seg.b - seg.a;
        let scale = seg.a.abs().max(seg.b.abs()).max(T::min_positive_value());
        if !(mid > seg.a && mid < seg.b) || width <= T::lit(100.0) * T::epsilon() * scale {
            // cannot be refined further; leave it out of the queue
            continue;
        }
        let left = kronrod21(&mut f, seg.a, mid)?;
        let right = kronrod21(&mut f, mid, seg.b)?;
        evaluations += 42;
        subdivisions += 1;
        value = value - seg.value + left.value + right.value;
        err = err - seg.err + left.err + right.err;
        floor = floor - seg.floor + left.floor + right.floor;
        segs[top.idx] = left;
        heap.push(Pending {
            err: left.err.as_f64(),
            idx: top.idx,
        });
        segs.push(right);
        heap.push(Pending {
            err: right.err.as_f64(),
            idx: segs.len() - 1,
        });
    }
    let (value, err_est) = sum_segments(&segs);
    if !converged {
        converged = err_est <= tolerance(value, spec);
    }
    Ok((
        Integral {
            value,
            err_est,
            subdivisions,
            evaluations,
        },
        converged,
    ))
}

fn finish<T: Real>(res: (Integral<T>, bool)) -> Result<Integral<T>> {
    let (integral, converged) = res;
    if converged {
        Ok(integral)
    } else {
        Err(Error::Accuracy {
            value: integral.value.as_f64(),
            err_est: integral.err_est.as_f64(),
            subdivisions: integral.subdivisions,
        })
    }
}

fn check_interval<T: Real>(a: T, b: T, op: &'static str) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(op, "interval endpoints must be finite"));
    }
    if b < a {
        return Err(Error::domain(op, format!("reversed interval [{a}, {b}]")));
    }
    Ok(())
}

/// `int_a^b f` by adaptive 21-point Gauss-Kronrod with deterministic bisection.
pub fn integrate_adaptive<T: Real, F: FnMut(T) -> Result<T>>(
    f: F,
    a: T,
    b: T,
    spec: &QuadratureSpec<T>,
) -> Result<Integral<T>> {
    check_interval(a, b, "integrate_adaptive")?;
    finish(adaptive_core(f, &[a, b], spec)?)
}

/// Like [`integrate_adaptive`] but starting from the given increasing breakpoints.
pub fn integrate_adaptive_points<T: Real, F: FnMut(T) -> Result<T>>(
    f: F,
    points: &[T],
    spec: &QuadratureSpec<T>,
) -> Result<Integral<T>> {
    if points.len() < 2 {
        return Err(Error::domain("integrate_adaptive_points", "need at least two points"));
    }
    for w in points.windows(2) {
        check_interval(w[0], w[1], "integrate_adaptive_points")?;
    }
    finish(adaptive_core(f, points, spec)?)
}

/// Best-effort variant returning the estimate even when the tolerance was not met.
pub fn integrate_best_effort<T: Real, F: FnMut(T) -> Result<T>>(
    f: F,
    points: &[T],
    spec: &QuadratureSpec<T>,
) -> Result<(Integral<T>, bool)> {
    if points.len() < 2 {
        return Err(Error::domain("integrate_best_effort", "need at least two points"));
    }
    adaptive_core(f, points, spec)
}

fn graded_points<T: Real>(end: T, spec: &QuadratureSpec<T>) -> Vec<T> {
    // clusters panels toward t = 0, where the substituted endpoint sits
    let n = 4;
    (0..=n)
        .map(|j| end * (T::count(j) / T::count(n)).powf(spec.grading_exponent))
        .collect()
}

fn singular_exponent_check<T: Real>(lambda: T, op: &'static str) -> Result<T> {
    if !(lambda > -T::one()) {
        return Err(Error::domain(
            op,
            format!("endpoint exponent {lambda} must exceed -1"),
        ));
    }
    Ok(T::one() / (T::one() + lambda))
}

/// `int_a^b f(x, b - x) (b - x)^lambda dx` for `lambda > -1` via `b - x = t^(1/(1+lambda))`.
///
/// The second argument of `f_regular` is the exact distance to `b`.
pub fn integrate_endpoint_singular_dist<T: Real, F: FnMut(T, T) -> Result<T>>(
    mut f_regular: F,
    a: T,
    b: T,
    lambda: T,
    spec: &QuadratureSpec<T>,
) -> Result<Integral<T>> {
    check_interval(a, b, "integrate_endpoint_singular")?;
    let k = singular_exponent_check(lambda, "integrate_endpoint_singular")?;
    let end = (b - a).powf(T::one() / k);
    let g = |t: T| {
        let d = t.powf(k);
        Ok(k * f_regular(b - d, d)?)
    };
    finish(adaptive_core(g, &graded_points(end, spec), spec)?)
}

/// `int_a^b f_regular(x) (b - x)^lambda dx` for `lambda > -1`.
pub fn integrate_endpoint_singular<T: Real, F: FnMut(T) -> Result<T>>(
    mut f_regular: F,
    a: T,
    b: T,
    lambda: T,
    spec: &QuadratureSpec<T>,
) -> Result<Integral<T>> {
    integrate_endpoint_singular_dist(|x, _| f_regular(x), a, b, lambda, spec)
}

/// `int_a^b f(x, x - a) (x - a)^lambda dx` for `lambda > -1`, singular at the left end.
pub fn integrate_start_singular_dist<T: Real, F: FnMut(T, T) -> Result<T>>(
    mut f_regular: F,
    a: T,
    b: T,
    lambda: T,
    spec: &QuadratureSpec<T>,
) -> Result<Integral<T>> {
    check_interval(a, b, "integrate_start_singular")?;
    let k = singular_exponent_check(lambda, "integrate_start_singular")?;
    let end = (b - a).powf(T::one() / k);
    let g = |t: T| {
        let d = t.powf(k);
        Ok(k * f_regular(a + d, d)?)
    };
    finish(adaptive_core(g, &graded_points(end, spec), spec)?)
}

/// `int_a^b f(x) dx` with `x = b - e^v`, resolving a near-endpoint scale `b - a`
/// that spans many decades; `f` receives `(x, b - x)`.
pub fn integrate_log_toward<T: Real, F: FnMut(T, T) -> Result<T>>(
    mut f: F,
    a: T,
    b: T,
    stop: T,
    spec: &QuadratureSpec<T>,
) -> Result<Integral<T>> {
    // integrates over x in [a, b - stop]
    check_interval(a, b, "integrate_log_toward")?;
    if !(stop > T::zero()) || stop >= b - a {
        return Err(Error::domain(
            "integrate_log_toward",
            format!("cut-off {stop} must lie in (0, {})", b - a),
        ));
    }
    let v0 = stop.ln();
    let v1 = (b - a).ln();
    let g = |v: T| {
        let d = v.exp();
        Ok(f(b - d, d)? * d)
    };
    let n = ((v1 - v0) / T::lit(2.0)).ceil().to_usize().unwrap_or(1).clamp(1, 64);
    let pts: Vec<T> = (0..=n)
        .map(|j| v0 + (v1 - v0) * T::count(j) / T::count(n))
        .collect();
    finish(adaptive_core(g, &pts, spec)?)
}

/// Principal-value limit of a truncated family `J(eps)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvLimit<T> {
    pub value: T,
    pub err_est: T,
    /// The sampled `(eps, J(eps))` pairs.
    pub table: Vec<(T, T)>,
}

/// Best even-column entry of Wynn's epsilon table built from `seq`.
pub fn wynn_epsilon<T: Real>(seq: &[T]) -> T {
    let n = seq.len();
    assert!(n > 0, "wynn_epsilon needs at least one term");
    let mut best = seq[n - 1];
    let mut prev: Vec<T> = vec![T::zero(); n + 1];
    let mut cur: Vec<T> = seq.to_vec();
    let mut k = 0usize;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            let scale = cur[j].abs().max(cur[j + 1].abs());
            if d.abs() <= T::lit(10.0) * T::epsilon() * scale || d == T::zero() {
                // converged column; nothing more to extract
                if k % 2 == 0 {
                    return cur[cur.len() - 1];
                }
                return best;
            }
            next.push(prev[j + 1] + T::one() / d);
        }
        k += 1;
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            best = cur[cur.len() - 1];
        }
    }
    best
}

/// Extrapolates `lim_{eps -> 0} J(eps)` over `spec.pv_epsilons` with Wynn's epsilon algorithm.
///
/// `err_est` is the spread between the extrapolants with and without the
/// smallest radius, plus the largest quadrature error of the samples.
pub fn pv_limit<T: Real, F: FnMut(T) -> Result<Estimate<T>>>(
    mut j: F,
    spec: &QuadratureSpec<T>,
) -> Result<PvLimit<T>> {
    spec.validate()?;
    let mut table = Vec::with_capacity(spec.pv_epsilons.len());
    let mut quad_err = T::zero();
    for &eps in &spec.pv_epsilons {
        let e = j(eps)?;
        if !e.value.is_finite() {
            return Err(Error::Integrand {
                x: eps.as_f64(),
                value: e.value.as_f64(),
            });
        }
        quad_err = quad_err.max(e.err_est);
        table.push((eps, e.value));
    }
    let values: Vec<T> = table.iter().map(|&(_, v)| v).collect();
    let n = values.len();
    let diffs: Vec<T> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let scale = values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let noise = T::lit(1e3) * (quad_err + T::epsilon() * scale);
    let m = diffs.len();
    if m >= 2 && diffs[m - 1] > diffs[m - 2] && diffs[m - 1] > noise {
        let growing = m < 3 || diffs[m - 2] > diffs[m - 3];
        if growing {
            return Err(Error::Divergence {
                table: table.iter().map(|&(e, v)| (e.as_f64(), v.as_f64())).collect(),
            });
        }
    }
    let full = wynn_epsilon(&values);
    let partial = wynn_epsilon(&values[..n - 1]);
    let spread = (full - partial).abs();
    Ok(PvLimit {
        value: full,
        err_est: spread + quad_err,
        table,
    })
}
