use fracplap::specfun::{hyp2f1, GKernel, HyperParams};
use fracplap::FracParams;
use num_bigint::BigInt;

/// Exact rational `num / den`.
#[derive(Clone, Copy)]
struct Q(i64, i64);

impl Q {
    fn f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

const DIGITS: usize = 60;

/// Partial sums of the Gauss series in fixed point with `DIGITS` decimals,
/// stopped once a term falls below `10^-(DIGITS-10)` while shrinking.
fn series_fixed_point(a: Q, b: Q, c: Q, z: Q) -> f64 {
    let scale = BigInt::from(10).pow(DIGITS as u32);
    let cutoff = BigInt::from(10).pow(10);
    let mut term = scale.clone();
    let mut sum = scale.clone();
    for n in 0i64..200_000 {
        // (a+n)(b+n) z / ((c+n)(n+1)), each factor as an exact fraction
        let num = (a.0 + n * a.1) * (b.0 + n * b.1) * z.0 * c.1;
        let den = (c.0 + n * c.1) * (n + 1) * a.1 * b.1 * z.1;
        term = term * num / den;
        sum += &term;
        let ratio_small = (num.abs() as f64) < (den.abs() as f64);
        if ratio_small && term.magnitude() < cutoff.magnitude() {
            return to_f64(&sum);
        }
    }
    panic!("oracle series did not converge");
}

fn to_f64(x: &BigInt) -> f64 {
    let digits = x.to_string();
    let (sign, body) = match digits.strip_prefix('-') {
        Some(rest) => ("-", rest.to_string()),
        None => ("", digits),
    };
    let body = format!("{body:0>width$}", width = DIGITS + 1);
    let split = body.len() - DIGITS;
    format!("{sign}{}.{}", &body[..split], &body[split..])
        .parse()
        .unwrap()
}

fn check(a: Q, b: Q, c: Q, z: Q, tol: f64) {
    let hp = HyperParams::new(a.f64(), b.f64(), c.f64()).unwrap();
    let got = hyp2f1(hp, z.f64()).unwrap();
    let want = series_fixed_point(a, b, c, z);
    let rel = ((got - want) / want).abs();
    assert!(
        rel < tol,
        "2F1({}, {}; {}; {}) = {got}, oracle {want}, rel {rel:e}",
        a.f64(),
        b.f64(),
        c.f64(),
        z.f64()
    );
}

#[test]
fn binomial_case_against_series() {
    check(Q(5, 2), Q(3, 2), Q(3, 2), Q(9, 10), 1e-12);
    let closed = 0.1f64.powf(-2.5);
    let want = series_fixed_point(Q(5, 2), Q(3, 2), Q(3, 2), Q(9, 10));
    assert!(((want - closed) / closed).abs() < 1e-14);
}

#[test]
fn integer_gap_log_branch_against_series() {
    // c - a - b = -2, the logarithmic connection branch
    check(Q(3, 2), Q(3, 2), Q(1, 1), Q(9, 10), 1e-11);
    check(Q(3, 2), Q(3, 2), Q(1, 1), Q(19, 20), 1e-11);
}

#[test]
fn kernel_parameters_against_series() {
    // (N + ps)/2, (ps + 2)/2, N/2 for a few (N, ps)
    let cases = [
        (Q(11, 8), Q(11, 8), Q(1, 1)),   // N = 2, ps = 0.75
        (Q(2, 1), Q(3, 2), Q(3, 2)),     // N = 3, ps = 1
        (Q(29, 10), Q(19, 10), Q(3, 2)), // N = 3, ps = 1.8
        (Q(23, 8), Q(15, 8), Q(2, 1)),   // N = 4, ps = 1.75
    ];
    for (a, b, c) in cases {
        for z in [Q(1, 4), Q(16, 25), Q(81, 100), Q(19, 20)] {
            check(a, b, c, z, 1e-11);
        }
    }
}

#[test]
fn g_matches_beta_times_series() {
    let params = FracParams::new(3, 0.5, 2.0).unwrap();
    let g = GKernel::new(&params).unwrap();
    for z in [Q(1, 10), Q(1, 2), Q(9, 10)] {
        let want = 2.0 * series_fixed_point(Q(2, 1), Q(3, 2), Q(3, 2), z);
        let got = g.g(z.f64()).unwrap();
        assert!(((got - want) / want).abs() < 1e-11, "G({}) = {got} vs {want}", z.f64());
    }
}
