//! Oracle tests for the normal primitives. The reference values here come
//! from independent routes: adaptive Simpson integration of the density,
//! the classical tail expansion, and high-precision quadrature of the
//! conditional-normal integral (frozen constants).

use hc_core::normal::{
    bivariate_exceedance, cdf, pdf, quantile, sf, sf_quantile, BivariateTailQuery,
};
use proptest::prelude::*;

/// Adaptive Simpson integral of f over [a, b], independent of the
/// quadrature used inside the library.
fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth > 40 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)
        }
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 0)
}

fn cdf_oracle(t: f64) -> f64 {
    if t >= 0.0 {
        0.5 + simpson(&pdf, 0.0, t, 1e-14)
    } else {
        0.5 - simpson(&pdf, t, 0.0, 1e-14)
    }
}

#[test]
fn cdf_matches_integration_oracle() {
    for i in -40..=40 {
        let t = i as f64 * 0.2;
        let got = cdf(t).unwrap().value();
        let want = cdf_oracle(t);
        assert!((got - want).abs() < 1e-12, "t={t}: {got} vs {want}");
    }
}

#[test]
fn cdf_half_at_zero() {
    assert_eq!(cdf(0.0).unwrap().value(), 0.5);
    assert_eq!(sf(0.0).unwrap().value(), 0.5);
}

#[test]
fn reflection_identities() {
    let t = 1.7;
    let lhs = cdf(t).unwrap().value();
    let rhs = 1.0 - cdf(-t).unwrap().value();
    assert!((lhs - rhs).abs() < 1e-15);
    // sf(t) = cdf(-t), relatively
    let a = sf(3.0).unwrap().value();
    let b = cdf(-3.0).unwrap().value();
    assert!((a - b).abs() / a < 1e-13);
}

#[test]
fn known_quantile_point() {
    let got = cdf(1.959964).unwrap().value();
    assert!((got - 0.975).abs() < 1e-6);
}

#[test]
fn far_tail_matches_asymptotic_expansion() {
    // phi(t)/t * (1 - 1/t^2 + 3/t^4) at t = 8
    let t: f64 = 8.0;
    let asym = pdf(t) / t * (1.0 - 1.0 / (t * t) + 3.0 / (t * t * t * t));
    let got = sf(t).unwrap().value();
    assert!((got - asym).abs() / asym < 0.01, "{got} vs {asym}");
    assert!((got - 6.22e-16).abs() / 6.22e-16 < 0.01);
}

#[test]
fn quantile_examples() {
    assert_eq!(quantile(0.5).unwrap(), 0.0);
    assert!((quantile(0.975).unwrap() - 1.9599639845400542).abs() < 1e-6);
    // upper-tail quantile at 2^-8
    assert!((sf_quantile(1.0 / 256.0).unwrap() - 2.6600674686174597).abs() < 1e-3);
    assert!((sf_quantile(0.01).unwrap() - 2.3263478740408411).abs() < 1e-9);
}

#[test]
fn quantile_round_trip_accuracy() {
    for p in [1e-12, 1e-8, 1e-4, 0.01, 0.3, 0.5, 0.77, 0.999, 1.0 - 1e-9] {
        let x = quantile(p).unwrap();
        assert!(
            (cdf(x).unwrap().value() - p).abs() <= 1e-12,
            "p={p}, x={x}"
        );
    }
}

#[test]
fn domain_errors() {
    assert!(cdf(f64::NAN).is_err());
    assert!(sf(f64::INFINITY).is_err());
    assert!(quantile(0.0).is_err());
    assert!(quantile(1.0).is_err());
    assert!(quantile(-0.2).is_err());
    assert!(BivariateTailQuery::new(2.0, 1.5).is_err());
    assert!(BivariateTailQuery::new(f64::NAN, 0.5).is_err());
}

#[test]
fn bivariate_trivial_cases() {
    let s2 = sf(2.0).unwrap().value();
    let ind = bivariate_exceedance(BivariateTailQuery::new(2.0, 0.0).unwrap())
        .unwrap()
        .value();
    assert!((ind - s2 * s2).abs() < 1e-15);
    let com = bivariate_exceedance(BivariateTailQuery::new(2.0, 1.0).unwrap())
        .unwrap()
        .value();
    assert!((com - s2).abs() < 1e-15);
    let anti = bivariate_exceedance(BivariateTailQuery::new(2.0, -1.0).unwrap())
        .unwrap()
        .value();
    assert_eq!(anti, 0.0);
}

#[test]
fn bivariate_frozen_oracle_values() {
    // (t, rho, P(X>t, Y>t)) from 40-digit quadrature
    let cases = [
        (2.0, 0.5, 0.0040529462351629797),
        (1.0, -0.3, 0.010317044874034601),
        (3.0, 0.8, 0.00037209239626781636),
        (5.0, 0.9999, 2.7826533257325341e-7),
        (0.0, 0.5, 1.0 / 3.0), // closed form: 1/4 + asin(rho)/(2 pi)
        (4.0, 0.99999, 3.1432475084460504e-5),
        (6.0, 0.99999, 9.7574783208152941e-10),
    ];
    for (t, rho, want) in cases {
        let got = bivariate_exceedance(BivariateTailQuery::new(t, rho).unwrap())
            .unwrap()
            .value();
        assert!(
            (got - want).abs() <= 1e-10 && (got - want).abs() / want < 1e-9,
            "t={t} rho={rho}: {got} vs {want}"
        );
    }
}

#[test]
fn bivariate_monotone_in_rho() {
    for t in [0.0, 1.0, 2.5, 4.0] {
        let mut prev = -1.0;
        for i in 0..=20 {
            let rho = -1.0 + i as f64 * 0.1;
            let p = bivariate_exceedance(BivariateTailQuery::new(t, rho).unwrap())
                .unwrap()
                .value();
            assert!(p >= prev - 1e-12, "t={t} rho={rho}");
            prev = p;
        }
    }
}

#[test]
fn near_comonotone_tail_asymptote() {
    // 1 - P(X>t | Y>t) ~ t sqrt(1-rho) / sqrt(pi) as t^2 (1-rho) -> 0
    for t in [4.0, 5.0, 6.0] {
        for one_minus_rho in [1e-4, 1e-5] {
            let q = BivariateTailQuery::new(t, 1.0 - one_minus_rho).unwrap();
            let joint = bivariate_exceedance(q).unwrap().value();
            let cond_gap = 1.0 - joint / sf(t).unwrap().value();
            let predicted = t * one_minus_rho.sqrt() / std::f64::consts::PI.sqrt();
            let ratio = cond_gap / predicted;
            assert!(
                (0.85..=1.15).contains(&ratio),
                "t={t} 1-rho={one_minus_rho}: ratio {ratio}"
            );
        }
    }
}

proptest! {
    #[test]
    fn cdf_sf_sum_to_one(t in -37.0f64..37.0) {
        let s = cdf(t).unwrap().value() + sf(t).unwrap().value();
        prop_assert!((s - 1.0).abs() < 1e-13);
    }

    // Round trip through the tail that carries the precision: cdf below the
    // median, sf above. (Near t = 8 the value 1 - cdf(t) is at the f64 ulp
    // scale, so the one-sided composition is the representable statement.)
    #[test]
    fn quantile_inverts_cdf(t in -8.0f64..8.0) {
        let back = if t <= 0.0 {
            quantile(cdf(t).unwrap().value()).unwrap()
        } else {
            sf_quantile(sf(t).unwrap().value()).unwrap()
        };
        prop_assert!((back - t).abs() < 1e-9, "t={}, back={}", t, back);
    }

    #[test]
    fn cdf_monotone(a in -20.0f64..20.0, d in 0.0f64..5.0) {
        prop_assert!(cdf(a + d).unwrap().value() >= cdf(a).unwrap().value());
    }
}
