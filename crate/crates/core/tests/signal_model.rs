//! Signal parametrization, boundary math, and injection audits.

use hc_core::cov::AutocovSpec;
use hc_core::gp::{GaussianPath, SeedTag};
use hc_core::signal::{
    boundary_curve, derive_params, detection_boundary, inject_ndd_signal, inject_signals,
    write_boundary_csv, DerivedSignalParams, NDDConfig, Placement, Sign, SignalSpec,
};
use proptest::prelude::*;

fn zero_path(n: usize, alpha: f64, alpha0: f64) -> GaussianPath {
    GaussianPath {
        values: vec![0.0; n],
        spec: AutocovSpec::new(n, alpha, alpha0).unwrap(),
        seed_tag: SeedTag {
            master_seed: 0,
            replicate: 0,
        },
    }
}

#[test]
fn derived_params_hand_example() {
    let acov = AutocovSpec::new(1 << 16, 0.5, 0.1).unwrap();
    let sig = SignalSpec::new(0.6, 0.35).unwrap();
    let p = derive_params(&acov, &sig).unwrap();
    assert!((p.kappa - 0.2).abs() < 1e-12);
    assert!((p.beta_prime - 0.48).abs() < 1e-12);
    assert!((p.r_prime - 0.28).abs() < 1e-12);
    assert_eq!(p.count, 320);
    assert!((p.nu - 2.4921).abs() < 1e-4, "nu {}", p.nu);
    assert!((p.xi - 0.32).abs() < 1e-12);
    // sqrt(2 r' log n) = sqrt(2 r log N)
    let via_n = (2.0 * p.r_prime * (acov.n() as f64).ln()).sqrt();
    let via_eff = (2.0 * sig.r() * p.effective_n.ln()).sqrt();
    assert!((via_n - via_eff).abs() < 1e-12);
}

#[test]
fn independence_collapse() {
    let acov = AutocovSpec::new(1 << 10, 0.5, 0.0).unwrap();
    let sig = SignalSpec::new(0.7, 0.4).unwrap();
    let p = derive_params(&acov, &sig).unwrap();
    assert_eq!(p.beta_prime, 0.7);
    assert_eq!(p.r_prime, 0.4);
    assert_eq!(p.effective_n, 1024.0);
    let q = DerivedSignalParams::independent_scale(1 << 10, &sig);
    assert_eq!(p.nu, q.nu);
    assert_eq!(p.count, q.count);
}

#[test]
fn degenerate_regime_rejected() {
    let acov = AutocovSpec::new(256, 1.0, 1.5).unwrap();
    let sig = SignalSpec::new(0.6, 0.3).unwrap();
    assert!(derive_params(&acov, &sig).is_err());
}

#[test]
fn signal_spec_range_checks() {
    assert!(SignalSpec::new(0.5, 0.3).is_err());
    assert!(SignalSpec::new(1.0, 0.3).is_err());
    assert!(SignalSpec::new(0.6, 0.0).is_err());
    assert!(SignalSpec::new(0.6, 1.0).is_err());
}

#[test]
fn boundary_values() {
    assert!((detection_boundary(0.6).unwrap() - 0.10).abs() < 1e-15);
    // both branches agree at 3/4
    let left = 0.75 - 0.5;
    let s = 1.0 - 0.25f64.sqrt();
    assert!((left - s * s).abs() < 1e-15);
    assert!((detection_boundary(0.75).unwrap() - 0.25).abs() < 1e-15);
    let eps = 1e-6;
    let lo = detection_boundary(0.75 - eps).unwrap();
    let hi = detection_boundary(0.75 + eps).unwrap();
    assert!((hi - lo).abs() < 10.0 * eps);
    assert!(detection_boundary(0.5).is_err());
    assert!(detection_boundary(1.0).is_err());
}

#[test]
fn boundary_curve_scaling() {
    let grid = [0.6, 0.75];
    let pts = boundary_curve(0.2, &grid).unwrap();
    assert!((pts[0].beta_prime - 0.48).abs() < 1e-12);
    assert!((pts[0].r_prime - 0.08).abs() < 1e-12);
    let pts6 = boundary_curve(0.6, &grid).unwrap();
    assert!((pts6[1].beta_prime - 0.30).abs() < 1e-12);
    assert!((pts6[1].r_prime - 0.10).abs() < 1e-12);
    // kappa = 0 leaves the classical curve unchanged
    let pts0 = boundary_curve(0.0, &grid).unwrap();
    assert_eq!(pts0[0].beta_prime, 0.6);
    assert_eq!(pts0[0].r, pts0[0].r_prime);
    // reference rows carry r = 1 and r' = 1 - kappa
    let last = pts.last().unwrap();
    assert_eq!(last.r, 1.0);
    assert!((last.r_prime - 0.8).abs() < 1e-12);

    let mut buf = Vec::new();
    write_boundary_csv(&pts, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("kappa,beta,r,beta_prime,r_prime\n"));
    assert_eq!(text.lines().count(), 1 + pts.len());
}

#[test]
fn inject_zero_count_and_zero_amplitude() {
    let path = zero_path(64, 0.5, 0.1);
    let sig = SignalSpec::new(0.6, 0.35).unwrap();
    let mut params = derive_params(&path.spec, &sig).unwrap();
    params.count = 0;
    let out = inject_signals(&path, &params, 1, Placement::Uniform);
    assert_eq!(out.values, path.values);
    assert_eq!(out.realized_count(), 0);

    let mut params2 = derive_params(&path.spec, &sig).unwrap();
    params2.nu = 0.0;
    params2.count = 5;
    let out2 = inject_signals(&path, &params2, 1, Placement::Uniform);
    assert_eq!(out2.values, path.values);
    assert!(out2.realized_count() >= 1 && out2.realized_count() <= 5);
}

#[test]
fn inject_full_config_audit() {
    let acov = AutocovSpec::new(1 << 16, 0.5, 0.1).unwrap();
    let sig = SignalSpec::new(0.6, 0.35).unwrap();
    let params = derive_params(&acov, &sig).unwrap();
    let path = zero_path(1 << 16, 0.5, 0.1);
    let out = inject_signals(&path, &params, 42, Placement::Uniform);
    let ones = out.realized_count();
    assert!(ones <= 320 && ones > 300, "realized {ones}");
    for (v, &on) in out.values.iter().zip(&out.indicator) {
        if on {
            assert!((v - params.nu).abs() < 1e-15);
        } else {
            assert_eq!(*v, 0.0);
        }
    }
}

#[test]
fn blockwise_placement_fills_whole_blocks() {
    let acov = AutocovSpec::new(4096, 2.0, 1.0).unwrap(); // kappa = 0.5, block len 64
    let sig = SignalSpec::new(0.6, 0.35).unwrap();
    let params = derive_params(&acov, &sig).unwrap();
    let path = zero_path(4096, 2.0, 1.0);
    let out = inject_signals(&path, &params, 7, Placement::Blockwise);
    let block_len = 64;
    let want_blocks = (4096f64.powf(params.xi)).round() as usize;
    assert_eq!(out.realized_count(), want_blocks * block_len);
    for b in 0..4096 / block_len {
        let blk = &out.indicator[b * block_len..(b + 1) * block_len];
        assert!(blk.iter().all(|&x| x) || blk.iter().all(|&x| !x));
    }
}

#[test]
fn ndd_amplitude_hand_value() {
    let cfg = NDDConfig::new(4.0, 2.0, Sign::Plus).unwrap();
    // n=2^10, alpha0=0.5: 2 sqrt(4 * 2^-5 * log 2^10) = 1.86158
    let amp = cfg.amplitude(1 << 10, 0.5);
    assert!((amp - 2.0 * (0.125 * 1024f64.ln()).sqrt()).abs() < 1e-12);
    assert!((amp - 1.8616).abs() < 1e-3, "amp {amp}");
    let thr = NDDConfig::new(4.0, 1.0, Sign::Plus).unwrap().threshold(1 << 10, 0.5);
    assert!((thr - 0.9308).abs() < 1e-3, "thr {thr}");
}

#[test]
fn ndd_injection_sites_and_signs() {
    let path = zero_path(32, 0.5, 0.5);
    let cfg = NDDConfig::new(4.0, 2.0, Sign::Plus).unwrap();
    let out = inject_ndd_signal(&path, &cfg, &[5]).unwrap();
    assert_eq!(out.realized_count(), 1);
    assert!(out.values[5] > 0.0);
    let neg = NDDConfig::new(4.0, 2.0, Sign::Minus).unwrap();
    let out_neg = inject_ndd_signal(&path, &neg, &[5]).unwrap();
    assert_eq!(out_neg.values[5], -out.values[5]);

    assert!(inject_ndd_signal(&path, &cfg, &[]).is_err());
    let all: Vec<usize> = (0..32).collect();
    assert!(inject_ndd_signal(&path, &cfg, &all).is_err());
    assert!(inject_ndd_signal(&path, &cfg, &[32]).is_err());
}

#[test]
fn ndd_config_checks() {
    assert!(NDDConfig::new(0.9, 1.0, Sign::Plus).is_err());
    assert!(NDDConfig::new(4.0, 0.5, Sign::Plus).is_err());
    assert!(NDDConfig::new(4.0, 4.0, Sign::Plus).is_err());
}

proptest! {
    #[test]
    fn boundary_monotone(a in 0.51f64..0.98, d in 0.001f64..0.02) {
        let b = (a + d).min(0.999);
        let ra = detection_boundary(a).unwrap();
        let rb = detection_boundary(b).unwrap();
        prop_assert!(rb > ra);
        prop_assert!(ra > 0.0 && ra < 1.0);
    }

    #[test]
    fn injection_changes_at_most_count_entries(seed in 0u64..1000, count in 0usize..40) {
        let path = zero_path(256, 0.5, 0.1);
        let sig = SignalSpec::new(0.6, 0.35).unwrap();
        let mut params = derive_params(&path.spec, &sig).unwrap();
        params.count = count;
        let out = inject_signals(&path, &params, seed, Placement::Uniform);
        let changed = out.values.iter().filter(|&&v| v != 0.0).count();
        prop_assert!(changed <= count);
        prop_assert_eq!(changed, out.realized_count());
        for &v in out.values.iter().filter(|&&v| v != 0.0) {
            prop_assert!((v - params.nu).abs() < 1e-15);
        }
    }
}
