//! Simulator validation: hand-computed embedding spectra, determinism,
//! marginal and covariance checks against the dense-factorization oracle.

use hc_core::cov::AutocovSpec;
use hc_core::gp::{embed, simulate_cholesky, simulate_paths, write_paths_csv, GaussianPath};

fn sample_lag_cov(paths: &[GaussianPath], k: usize) -> f64 {
    let n = paths[0].values.len();
    let mut acc = 0.0;
    let mut cnt = 0usize;
    for p in paths {
        for i in 0..n - k {
            acc += p.values[i] * p.values[i + k];
            cnt += 1;
        }
    }
    acc / cnt as f64
}

#[test]
fn toy_embedding_spectrum_by_hand() {
    // n=4, alpha=1, alpha0=1: covariances (1, 0.75, 0.5, 0.25), m=8.
    // Hand DFT of the symmetric row (1,.75,.5,.25,0,.25,.5,.75):
    // eigenvalues (4, 1+1/sqrt(2), 0, 1-1/sqrt(2), 0, 1-1/sqrt(2), 0, 1+1/sqrt(2)).
    let spec = AutocovSpec::new(4, 1.0, 1.0).unwrap();
    let report = embed(&spec).unwrap();
    assert_eq!(report.m, 8);
    let want = [
        4.0,
        1.0 + std::f64::consts::FRAC_1_SQRT_2,
        0.0,
        1.0 - std::f64::consts::FRAC_1_SQRT_2,
        0.0,
        1.0 - std::f64::consts::FRAC_1_SQRT_2,
        0.0,
        1.0 + std::f64::consts::FRAC_1_SQRT_2,
    ];
    for (got, want) in report.eigenvalues.iter().zip(want) {
        assert!((got - want).abs() < 1e-12, "{got} vs {want}");
    }
    assert!(report.exact);
    assert!(report.clipped_mass == 0.0);
    assert!(report.min_eigenvalue > -1e-12);
}

#[test]
fn eigenvalue_sum_is_trace() {
    for (n, a, a0) in [(16, 0.5, 0.1), (100, 1.0, 0.5), (64, 2.0, 1.0)] {
        let spec = AutocovSpec::new(n, a, a0).unwrap();
        let report = embed(&spec).unwrap();
        let sum: f64 = report.eigenvalues.iter().sum();
        // after clipping the spectrum is rescaled so the mean stays 1
        assert!(
            (sum - report.m as f64).abs() < 1e-6 * report.m as f64,
            "n={n} a={a}: sum {sum} vs m {}",
            report.m
        );
    }
}

#[test]
fn indefinite_family_is_flagged() {
    // alpha = 2 at this length range is not embeddable exactly
    let spec = AutocovSpec::new(4096, 2.0, 1.0).unwrap();
    let report = embed(&spec).unwrap();
    assert!(!report.exact);
    assert!(report.clipped_mass > 0.0);
    assert!(report.eigenvalues.iter().all(|&l| l >= 0.0));
}

#[test]
fn scalar_case() {
    let spec = AutocovSpec::new(1, 0.5, 0.1).unwrap();
    let paths = simulate_paths(&spec, 4, 9).unwrap();
    assert_eq!(paths.len(), 4);
    for p in &paths {
        assert_eq!(p.values.len(), 1);
        assert!(p.values[0].is_finite());
    }
    let chol = simulate_cholesky(&spec, 3, 9).unwrap();
    assert_eq!(chol.len(), 3);
}

#[test]
fn empty_and_deterministic() {
    let spec = AutocovSpec::new(32, 0.5, 0.1).unwrap();
    assert!(simulate_paths(&spec, 0, 1).unwrap().is_empty());
    let a = simulate_paths(&spec, 5, 123).unwrap();
    let b = simulate_paths(&spec, 5, 123).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.values, y.values);
        assert_eq!(x.seed_tag.replicate, y.seed_tag.replicate);
    }
    // a prefix of a longer run is identical
    let c = simulate_paths(&spec, 10, 123).unwrap();
    for (x, y) in a.iter().zip(&c) {
        assert_eq!(x.values, y.values);
    }
    let d = simulate_paths(&spec, 5, 124).unwrap();
    assert_ne!(a[0].values, d[0].values);
}

#[test]
fn marginals_standard_normal() {
    let spec = AutocovSpec::new(64, 0.5, 0.1).unwrap();
    let paths = simulate_paths(&spec, 4000, 5).unwrap();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut cnt = 0usize;
    for p in &paths {
        for &v in &p.values {
            s1 += v;
            s2 += v * v;
            cnt += 1;
        }
    }
    let mean = s1 / cnt as f64;
    let var = s2 / cnt as f64 - mean * mean;
    // values within a path are heavily correlated; the effective count is
    // about paths * n^(1-kappa), use that for the error bars
    let eff = 4000.0 * 64f64.powf(0.8);
    assert!(mean.abs() < 4.0 / eff.sqrt(), "mean {mean}");
    assert!((var - 1.0).abs() < 8.0 / eff.sqrt(), "var {var}");
}

#[test]
fn covariance_matches_target() {
    let spec = AutocovSpec::new(64, 0.5, 0.1).unwrap();
    let paths = simulate_paths(&spec, 20_000, 11).unwrap();
    for k in 0..16 {
        let got = sample_lag_cov(&paths, k);
        let want = spec.rho(k as i64);
        assert!((got - want).abs() < 0.03, "lag {k}: {got} vs {want}");
    }
}

#[test]
fn cholesky_pair_correlation() {
    // n=2 with rho(1)=0.5: alpha=1, n^(-alpha0)=0.5 -> alpha0=1
    let spec = AutocovSpec::new(2, 1.0, 1.0).unwrap();
    assert!((spec.rho(1) - 0.5).abs() < 1e-15);
    let paths = simulate_cholesky(&spec, 100_000, 3).unwrap();
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for p in &paths {
        sxy += p.values[0] * p.values[1];
        sxx += p.values[0] * p.values[0];
        syy += p.values[1] * p.values[1];
    }
    let corr = sxy / (sxx * syy).sqrt();
    assert!((corr - 0.5).abs() < 0.01, "corr {corr}");
}

#[test]
fn cholesky_and_circulant_agree() {
    let spec = AutocovSpec::new(16, 0.5, 0.2).unwrap();
    let a = simulate_paths(&spec, 20_000, 21).unwrap();
    let b = simulate_cholesky(&spec, 20_000, 22).unwrap();
    for k in 0..8 {
        let ca = sample_lag_cov(&a, k);
        let cb = sample_lag_cov(&b, k);
        assert!((ca - cb).abs() < 0.05, "lag {k}: {ca} vs {cb}");
    }
}

#[test]
fn cholesky_size_cap() {
    let spec = AutocovSpec::new(4096, 0.5, 0.1).unwrap();
    assert!(simulate_cholesky(&spec, 1, 0).is_err());
}

#[test]
fn csv_export_format() {
    let spec = AutocovSpec::new(4, 0.5, 0.1).unwrap();
    let paths = simulate_paths(&spec, 2, 77).unwrap();
    let mut buf = Vec::new();
    write_paths_csv(&paths, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "# n=4 alpha=0.5 alpha0=0.1 seed=77");
    for line in lines {
        let vals: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals.len(), 4);
    }
    assert_eq!(text.lines().count(), 3);
}
