use fracplap::barriers::{make_cutoff, make_phi_eps, make_theta_eps};
use fracplap::quadrature::{pv_limit, Estimate};
use fracplap::{c_beta, c_beta_sign, frac_plap_radial_pv, FracParams, KernelEvaluator, RadialProfile, Sign, Spec};
use proptest::prelude::*;

fn subcritical() -> impl Strategy<Value = FracParams> {
    (2u32..=4, 0.1f64..0.9, 1.3f64..4.0)
        .prop_filter_map("needs N > ps", |(n, s, p)| {
            FracParams::new(n, s, p).ok().filter(|q| q.sp() < f64::from(n) - 0.05)
        })
}

fn supercritical() -> impl Strategy<Value = FracParams> {
    (0.6f64..0.95, 3.0f64..6.0).prop_filter_map("needs ps > 2", |(s, p)| {
        FracParams::new(2, s, p).ok().filter(|q| q.sp() > 2.2)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn amplitude_homogeneity(params in subcritical(), frac in 0.15f64..0.85, c in 0.2f64..5.0, r in 0.3f64..4.0) {
        let (lo, _) = params.beta_interval();
        let beta = lo * frac;
        let spec = Spec::default();
        let ke = KernelEvaluator::new(&params).unwrap();
        let f = RadialProfile::power(beta);
        let base = frac_plap_radial_pv(&f, r, &ke, &spec).unwrap();
        let scaled = frac_plap_radial_pv(&f.scaled(c), r, &ke, &spec).unwrap();
        let want = c.powf(params.p() - 1.0) * base.value;
        prop_assert!((scaled.value - want).abs() <= 1e-9 * want.abs().max(1e-300), "{} vs {want}", scaled.value);
    }

    #[test]
    fn chart_agrees_with_quadrature(params in subcritical(), frac in 0.02f64..0.98) {
        let (lo, hi) = params.beta_interval();
        let beta = lo + (hi - lo) * frac;
        let c = c_beta(&params, beta, &Spec::default()).unwrap();
        if c.value.abs() > 10.0 * c.err_est {
            let computed = Sign::of(c.value);
            prop_assert_eq!(computed, c_beta_sign(&params, beta).unwrap(), "beta = {}, value = {}", beta, c.value);
        }
    }

    #[test]
    fn phi_below_power(params in subcritical(), frac in 0.1f64..0.9, eps in 0.01f64..0.99, x in 0.001f64..10.0) {
        let (lo, _) = params.beta_interval();
        let beta = (lo * frac).min(-1e-3);
        let phi = make_phi_eps(&params, beta, eps).unwrap();
        prop_assert!(phi.eval(x).unwrap() <= x.powf(beta) * (1.0 + 1e-15));
        if x >= eps {
            prop_assert_eq!(phi.eval(x).unwrap(), x.powf(beta));
        }
    }

    #[test]
    fn theta_nonincreasing(params in supercritical(), frac in 0.05f64..0.95, eps in 0.01f64..0.9, big_r in 1.1f64..10.0, a in 0.0f64..12.0, b in 0.0f64..12.0) {
        let beta = frac * params.beta_star();
        let theta = make_theta_eps(&params, beta, eps, big_r, 1.0).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let t_lo = theta.eval(lo).unwrap();
        let t_hi = theta.eval(hi).unwrap();
        prop_assert!(t_hi <= t_lo + 1e-15);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&t_hi));
    }

    #[test]
    fn cutoff_bounded_and_monotone(m in 0.1f64..10.0, big_r in 0.5f64..8.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let mu = make_cutoff(m, big_r).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let u_lo = mu.eval(lo * big_r).unwrap();
        let u_hi = mu.eval(hi * big_r).unwrap();
        prop_assert!(u_hi <= u_lo);
        prop_assert!(u_lo <= m && u_hi >= 0.0);
    }

    #[test]
    fn pv_limit_stable_under_dropping_largest(c in -5.0f64..5.0, a in -3.0f64..3.0, e in 0.3f64..1.5) {
        let spec = Spec::default();
        let full = pv_limit(|x: f64| Ok(Estimate::new(c + a * x.powf(e), 0.0)), &spec).unwrap();
        let dropped = Spec { pv_epsilons: spec.pv_epsilons[1..].to_vec(), ..spec.clone() };
        let part = pv_limit(|x: f64| Ok(Estimate::new(c + a * x.powf(e), 0.0)), &dropped).unwrap();
        let tol = 2.0 * full.err_est.max(part.err_est) + 1e-12 * c.abs().max(1.0);
        prop_assert!((full.value - part.value).abs() <= tol, "{} vs {}", full.value, part.value);
    }
}

#[test]
fn steep_singularity_at_low_p_matches_c_beta() {
    let params = FracParams::new(2, 0.4, 1.3).unwrap();
    let ke = KernelEvaluator::new(&params).unwrap();
    let spec = Spec::default();
    for frac in [0.7, 0.8, 0.9] {
        let beta = params.beta_interval().0 * frac;
        let c = c_beta(&params, beta, &spec).unwrap();
        let f = RadialProfile::power(beta);
        for r in [0.3, 1.0, 3.0] {
            let v = frac_plap_radial_pv(&f, r, &ke, &spec).unwrap();
            let want = c.value * r.powf(params.rhs_exponent(beta));
            assert!(((v.value - want) / want).abs() < 1e-8, "beta={beta} r={r}: {} vs {want}", v.value);
        }
    }
}
