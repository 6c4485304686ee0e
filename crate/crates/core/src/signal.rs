//! Signal-side math: the sparsity/strength parametrization, its rescaling
//! under dependence, the detection boundary, and signal injection for the
//! detector experiments.
//!
//! Under dependence exponent kappa the series behaves like N = n^(1-kappa)
//! independent blocks, so a sparsity/strength pair (beta, r) defined
//! against N maps to effective exponents beta' = beta(1-kappa) and
//! r' = r(1-kappa) against n.

use serde::{Deserialize, Serialize};
use std::io::Write as IoWrite;

use crate::cov::AutocovSpec;
use crate::error::{Error, Result};
use crate::gp::{GaussianPath, SeedTag};
use crate::rng::CounterRng;

const INJECT_SALT: u64 = 0x5349_474e; // distinct stream namespace for placement draws

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    beta: f64,
    r: f64,
}

impl SignalSpec {
    pub fn new(beta: f64, r: f64) -> Result<Self> {
        if !(beta > 0.5 && beta < 1.0) {
            return Err(Error::Domain(format!(
                "beta must lie in (1/2, 1), got {beta}"
            )));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
        }
        Ok(SignalSpec { beta, r })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn r(&self) -> f64 {
        self.r
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivedSignalParams {
    pub kappa: f64,
    pub n: usize,
    /// Effective sample size n^(1-kappa).
    pub effective_n: f64,
    /// Signal amplitude sqrt(2 r log N) = sqrt(2 r' log n).
    pub nu: f64,
    /// Signal count, nearest integer to n^(1-beta').
    pub count: usize,
    pub beta_prime: f64,
    pub r_prime: f64,
    /// (1-beta)(1-kappa): exponent of the signal count.
    pub xi: f64,
}

pub fn derive_params(acov: &AutocovSpec, sig: &SignalSpec) -> Result<DerivedSignalParams> {
    let kappa = acov.kappa();
    if kappa >= 1.0 {
        return Err(Error::DegenerateRegime(format!(
            "signal scaling undefined for kappa = {kappa}"
        )));
    }
    let n = acov.n();
    let nf = n as f64;
    let beta_prime = sig.beta * (1.0 - kappa);
    let r_prime = sig.r * (1.0 - kappa);
    let xi = (1.0 - sig.beta) * (1.0 - kappa);
    let nu = (2.0 * r_prime * nf.ln()).sqrt();
    let count = nf.powf(1.0 - beta_prime).round() as usize;
    Ok(DerivedSignalParams {
        kappa,
        n,
        effective_n: acov.effective_n(),
        nu,
        count,
        beta_prime,
        r_prime,
        xi,
    })
}

impl DerivedSignalParams {
    /// Parameters read against n directly (amplitude sqrt(2 r log n),
    /// count round(n^(1-beta))), regardless of the noise dependence. This
    /// is the calibration the max-classifier comparison uses.
    pub fn independent_scale(n: usize, sig: &SignalSpec) -> Self {
        let nf = n as f64;
        DerivedSignalParams {
            kappa: 0.0,
            n,
            effective_n: nf,
            nu: (2.0 * sig.r * nf.ln()).sqrt(),
            count: nf.powf(1.0 - sig.beta).round() as usize,
            beta_prime: sig.beta,
            r_prime: sig.r,
            xi: 1.0 - sig.beta,
        }
    }
}

/// The sparse-detection boundary r*(beta): detection is asymptotically
/// possible above it, impossible below.
pub fn detection_boundary(beta: f64) -> Result<f64> {
    if !(beta > 0.5 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "beta must lie in (1/2, 1), got {beta}"
        )));
    }
    Ok(if beta <= 0.75 {
        beta - 0.5
    } else {
        let s = 1.0 - (1.0 - beta).sqrt();
        s * s
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundaryPoint {
    pub kappa: f64,
    pub beta: f64,
    pub r: f64,
    pub beta_prime: f64,
    pub r_prime: f64,
}

/// Boundary curve in the dependence-adjusted coordinates, followed by the
/// reference level r' = 1 - kappa (emitted as the r = 1 line).
pub fn boundary_curve(kappa: f64, beta_grid: &[f64]) -> Result<Vec<BoundaryPoint>> {
    if !(0.0..1.0).contains(&kappa) {
        return Err(Error::Domain(format!(
            "kappa must lie in [0, 1), got {kappa}"
        )));
    }
    let shrink = 1.0 - kappa;
    let mut out = Vec::with_capacity(2 * beta_grid.len());
    for &beta in beta_grid {
        let r = detection_boundary(beta)?;
        out.push(BoundaryPoint {
            kappa,
            beta,
            r,
            beta_prime: shrink * beta,
            r_prime: shrink * r,
        });
    }
    for &beta in beta_grid {
        out.push(BoundaryPoint {
            kappa,
            beta,
            r: 1.0,
            beta_prime: shrink * beta,
            r_prime: shrink,
        });
    }
    Ok(out)
}

pub fn write_boundary_csv<W: IoWrite>(points: &[BoundaryPoint], out: &mut W) -> std::io::Result<()> {
    writeln!(out, "kappa,beta,r,beta_prime,r_prime")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{}",
            p.kappa, p.beta, p.r, p.beta_prime, p.r_prime
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    /// Sorted uniform draws mapped to nearest indices (duplicates collapse).
    Uniform,
    /// Fill round(n^xi) randomly chosen whole blocks of length
    /// floor(n^kappa); the worst-case clustered arrangement.
    Blockwise,
}

#[derive(Debug, Clone)]
pub struct ContaminatedPath {
    pub values: Vec<f64>,
    pub indicator: Vec<bool>,
    pub base_seed_tag: SeedTag,
}

impl ContaminatedPath {
    pub fn realized_count(&self) -> usize {
        self.indicator.iter().filter(|b| **b).count()
    }
}

pub fn inject_signals(
    path: &GaussianPath,
    params: &DerivedSignalParams,
    seed: u64,
    placement: Placement,
) -> ContaminatedPath {
    let n = path.values.len();
    let mut rng = CounterRng::for_stream(seed, INJECT_SALT);
    let mut indicator = vec![false; n];
    match placement {
        Placement::Uniform => {
            for _ in 0..params.count {
                let u = rng.next_uniform();
                let idx = (n as f64 * u).round().clamp(1.0, n as f64) as usize - 1;
                indicator[idx] = true;
            }
        }
        Placement::Blockwise => {
            let block_len = ((n as f64).powf(params.kappa).floor() as usize).max(1);
            let n_blocks = n.div_ceil(block_len);
            let want = ((n as f64).powf(params.xi).round() as usize)
                .max(1)
                .min(n_blocks);
            // partial Fisher-Yates over block indices
            let mut ids: Vec<usize> = (0..n_blocks).collect();
            for i in 0..want {
                let j = i + (rng.next_u64() as usize) % (n_blocks - i);
                ids.swap(i, j);
            }
            for &b in &ids[..want] {
                let lo = b * block_len;
                let hi = ((b + 1) * block_len).min(n);
                for flag in &mut indicator[lo..hi] {
                    *flag = true;
                }
            }
        }
    }
    let values = path
        .values
        .iter()
        .zip(&indicator)
        .map(|(&v, &on)| if on { v + params.nu } else { v })
        .collect();
    ContaminatedPath {
        values,
        indicator,
        base_seed_tag: path.seed_tag,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
    /// Independent random sign per site, drawn from the given seed.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NDDConfig {
    pub r_ndd: f64,
    pub c: f64,
    pub sign: Sign,
}

impl NDDConfig {
    pub fn new(r_ndd: f64, c: f64, sign: Sign) -> Result<Self> {
        if !(r_ndd > 1.0) {
            return Err(Error::Domain(format!("r_ndd must exceed 1, got {r_ndd}")));
        }
        if !(1.0 <= c && c < r_ndd) {
            return Err(Error::Domain(format!(
                "test constant must satisfy 1 <= C < r_ndd, got C={c}, r_ndd={r_ndd}"
            )));
        }
        Ok(NDDConfig { r_ndd, c, sign })
    }

    /// |nu'| = 2 sqrt(r_ndd * n^(-alpha0) * log n).
    pub fn amplitude(&self, n: usize, alpha0: f64) -> f64 {
        let nf = n as f64;
        2.0 * (self.r_ndd * nf.powf(-alpha0) * nf.ln()).sqrt()
    }

    /// Detection threshold 2 sqrt(C * n^(-alpha0) * log n).
    pub fn threshold(&self, n: usize, alpha0: f64) -> f64 {
        let nf = n as f64;
        2.0 * (self.c * nf.powf(-alpha0) * nf.ln()).sqrt()
    }
}

/// Add the small NDD perturbation at the given zero-based sites.
pub fn inject_ndd_signal(
    path: &GaussianPath,
    cfg: &NDDConfig,
    sites: &[usize],
) -> Result<ContaminatedPath> {
    let n = path.values.len();
    if sites.is_empty() || sites.len() >= n {
        return Err(Error::Domain(format!(
            "site count must lie in [1, n-1], got {} for n={n}",
            sites.len()
        )));
    }
    let amp = cfg.amplitude(n, path.spec.alpha0());
    let mut values = path.values.clone();
    let mut indicator = vec![false; n];
    let mut rng = match cfg.sign {
        Sign::Random { seed } => Some(CounterRng::for_stream(seed, INJECT_SALT)),
        _ => None,
    };
    for &i in sites {
        if i >= n {
            return Err(Error::Domain(format!("site {i} out of range for n={n}")));
        }
        let s = match cfg.sign {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
            Sign::Random { .. } => {
                if rng.as_mut().unwrap().next_u64() & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        values[i] += s * amp;
        indicator[i] = true;
    }
    Ok(ContaminatedPath {
        values,
        indicator,
        base_seed_tag: path.seed_tag,
    })
}
