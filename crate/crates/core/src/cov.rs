//! The truncated-power autocovariance family: for a series of length n,
//! rho(k) = max(0, 1 - |k|^alpha * n^(-alpha0)). Correlations stay near 1
//! out to lag ~n^kappa with kappa = alpha0/alpha, then hit exactly zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutocovSpec {
    n: usize,
    alpha: f64,
    alpha0: f64,
}

impl AutocovSpec {
    /// alpha0 = 0 is allowed and means i.i.d. noise (every nonzero lag has
    /// correlation zero).
    pub fn new(n: usize, alpha: f64, alpha0: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Domain("series length must be >= 1".into()));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        if !(alpha0 >= 0.0) || !alpha0.is_finite() {
            return Err(Error::Domain(format!(
                "alpha0 must be nonnegative, got {alpha0}"
            )));
        }
        Ok(AutocovSpec { n, alpha, alpha0 })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    /// Dependence exponent: correlations persist out to lag ~n^kappa.
    #[inline]
    pub fn kappa(&self) -> f64 {
        self.alpha0 / self.alpha
    }

    /// Effective number of independent blocks, n^(1-kappa). Meaningful for
    /// kappa < 1.
    pub fn effective_n(&self) -> f64 {
        (self.n as f64).powf(1.0 - self.kappa())
    }

    /// Smallest lag k with rho(k) = 0.
    pub fn support_len(&self) -> u64 {
        if self.alpha0 == 0.0 {
            return 1;
        }
        let guess = (self.n as f64).powf(self.kappa());
        let mut k = (guess.floor() as u64).max(1).saturating_sub(2);
        while self.rho(k as i64) > 0.0 {
            k += 1;
        }
        k
    }

    /// Autocorrelation at integer lag k; symmetric, 1 at k = 0, zero from
    /// support_len on.
    #[inline]
    pub fn rho(&self, k: i64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        let scale = (self.n as f64).powf(-self.alpha0);
        (1.0 - (k.unsigned_abs() as f64).powf(self.alpha) * scale).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        // n=2^10, alpha=0.5, alpha0=0.1: n^(-alpha0) = 2^(-1), support n^0.2 = 4
        let spec = AutocovSpec::new(1024, 0.5, 0.1).unwrap();
        assert_eq!(spec.rho(0), 1.0);
        assert!((spec.rho(1) - 0.5).abs() < 1e-15);
        assert_eq!(spec.rho(4), 0.0);
        assert!(spec.rho(3) > 0.0);
        assert_eq!(spec.support_len(), 4);
        assert!((spec.kappa() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn symmetry_and_monotonicity() {
        let spec = AutocovSpec::new(4096, 2.0, 1.0).unwrap();
        let mut prev = 1.0;
        for k in 0..200i64 {
            assert_eq!(spec.rho(k), spec.rho(-k));
            let r = spec.rho(k);
            assert!(r <= prev + 1e-15);
            prev = r;
        }
        assert_eq!(spec.rho(spec.support_len() as i64), 0.0);
        assert!(spec.rho(spec.support_len() as i64 - 1) > 0.0);
    }

    #[test]
    fn independence_case() {
        let spec = AutocovSpec::new(100, 1.0, 0.0).unwrap();
        assert_eq!(spec.kappa(), 0.0);
        assert_eq!(spec.support_len(), 1);
        assert_eq!(spec.rho(1), 0.0);
        assert_eq!(spec.effective_n(), 100.0);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(AutocovSpec::new(0, 1.0, 0.5).is_err());
        assert!(AutocovSpec::new(10, 0.0, 0.5).is_err());
        assert!(AutocovSpec::new(10, 1.0, -0.1).is_err());
        assert!(AutocovSpec::new(10, f64::NAN, 0.5).is_err());
    }
}
