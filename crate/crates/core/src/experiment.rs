//! Monte Carlo harness: seeded error-rate experiments for the three
//! detectors, the null-distribution summary table, and the asymptotic-behavior
//! numerical checks (variance scaling of the exceedance count, conditional
//! exceedance clumping, detector comparisons, null quantiles).
//!
//! Replicates run concurrently but every statistic is a pure function of
//! (config, master_seed, replicate index), and aggregation happens in a
//! fixed order over the per-replicate records, so reports are byte-stable
//! across thread counts.

use rayon::prelude::*;
use serde::Serialize;
use std::time::Instant;

use crate::cov::AutocovSpec;
use crate::detect::{self, HCGrid, LevelSpec, Mode};
use crate::error::{Error, Result};
use crate::gp::PathSimulator;
use crate::normal;
use crate::rng;
use crate::signal::{
    derive_params, inject_ndd_signal, inject_signals, ContaminatedPath, DerivedSignalParams,
    NDDConfig, Placement, SignalSpec,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Work cap for a single experiment (replicates x series length).
const WORK_CAP: u64 = 1 << 34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DetectorKind {
    Hc { mode: Mode, resolution: usize },
    Max,
    Ndd { c: f64 },
}

impl DetectorKind {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorKind::Hc { .. } => "hc",
            DetectorKind::Max => "max",
            DetectorKind::Ndd { .. } => "ndd",
        }
    }
}

/// How the sparse-signal amplitude and count are read: against the
/// effective sample size n^(1-kappa), or against n directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignalScaling {
    Dependent,
    Independent,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub acov: AutocovSpec,
    /// Sparse signal for the alternative; absent means null-only (unless
    /// ndd_signal is given).
    pub sig: Option<SignalSpec>,
    /// Small-perturbation signal for the alternative, one uniformly random
    /// site per replicate.
    pub ndd_signal: Option<NDDConfig>,
    pub detector: DetectorKind,
    /// Applied to the detector's working statistic (normalized HC, sample
    /// max, or max absolute difference).
    pub threshold: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub placement: Placement,
    pub signal_scaling: SignalScaling,
}

impl ExperimentConfig {
    pub fn null_only(
        acov: AutocovSpec,
        detector: DetectorKind,
        threshold: f64,
        reps: usize,
        master_seed: u64,
    ) -> Self {
        ExperimentConfig {
            acov,
            sig: None,
            ndd_signal: None,
            detector,
            threshold,
            reps,
            master_seed,
            placement: Placement::Uniform,
            signal_scaling: SignalScaling::Dependent,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EmbeddingFlags {
    pub m: usize,
    pub exact: bool,
    pub clipped_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub type1_rate: f64,
    pub type2_rate: Option<f64>,
    pub null_mean: f64,
    pub null_sd: f64,
    pub null_stats: Vec<f64>,
    pub alt_stats: Option<Vec<f64>>,
    pub realized_signal_counts: Vec<usize>,
    pub embedding: EmbeddingFlags,
    pub runtime_secs: f64,
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1) as f64).sqrt())
}

enum Alternative {
    None,
    Sparse(DerivedSignalParams, Placement),
    Ndd(NDDConfig),
}

fn statistic(detector: &DetectorKind, grid: Option<&HCGrid>, data: &[f64]) -> Result<f64> {
    match detector {
        DetectorKind::Hc { .. } => Ok(detect::hc_statistic(data, grid.unwrap())?.hc_normalized),
        DetectorKind::Max => Ok(data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        DetectorKind::Ndd { .. } => Ok(data
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)),
    }
}

/// Run one seeded experiment. Null replicate j draws its path from stream
/// 2j, the alternative from stream 2j+1; the two rate estimates are
/// independent.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let started = Instant::now();
    if cfg.reps < 1 {
        return Err(Error::Domain("reps must be >= 1".into()));
    }
    if !cfg.threshold.is_finite() {
        return Err(Error::Domain("threshold must be finite".into()));
    }
    if cfg.reps as u64 * cfg.acov.n() as u64 > WORK_CAP {
        return Err(Error::Resource(format!(
            "reps x n = {} exceeds the work cap {WORK_CAP}; no replicates were run",
            cfg.reps as u64 * cfg.acov.n() as u64
        )));
    }
    let grid = match cfg.detector {
        DetectorKind::Hc { mode, resolution } => {
            Some(HCGrid::with_resolution(&cfg.acov, mode, resolution)?)
        }
        DetectorKind::Ndd { c } if c < 1.0 => {
            return Err(Error::Domain(format!("test constant must be >= 1, got {c}")))
        }
        _ => None,
    };
    let alternative = if let Some(ndd) = &cfg.ndd_signal {
        Alternative::Ndd(*ndd)
    } else if let Some(sig) = &cfg.sig {
        let params = match cfg.signal_scaling {
            SignalScaling::Dependent => derive_params(&cfg.acov, sig)?,
            SignalScaling::Independent => {
                DerivedSignalParams::independent_scale(cfg.acov.n(), sig)
            }
        };
        Alternative::Sparse(params, cfg.placement)
    } else {
        Alternative::None
    };

    let sim = PathSimulator::new(cfg.acov)?;
    let n = cfg.acov.n();
    let seed = cfg.master_seed;
    let inject_base = rng::mix64(seed ^ 0x494e_4a45_4354);

    struct Rep {
        null_stat: f64,
        alt_stat: Option<f64>,
        realized: Option<usize>,
    }

    let reps: Vec<Rep> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|j| -> Result<Rep> {
            let null_path = sim.path_for_stream(seed, 2 * j);
            let null_stat = statistic(&cfg.detector, grid.as_ref(), &null_path)?;
            let (alt_stat, realized) = match &alternative {
                Alternative::None => (None, None),
                Alternative::Sparse(params, placement) => {
                    let base = crate::gp::GaussianPath {
                        values: sim.path_for_stream(seed, 2 * j + 1),
                        spec: cfg.acov,
                        seed_tag: crate::gp::SeedTag {
                            master_seed: seed,
                            replicate: 2 * j + 1,
                        },
                    };
                    let contaminated: ContaminatedPath =
                        inject_signals(&base, params, inject_base.wrapping_add(j), *placement);
                    let stat = statistic(&cfg.detector, grid.as_ref(), &contaminated.values)?;
                    (Some(stat), Some(contaminated.realized_count()))
                }
                Alternative::Ndd(ndd) => {
                    let base = crate::gp::GaussianPath {
                        values: sim.path_for_stream(seed, 2 * j + 1),
                        spec: cfg.acov,
                        seed_tag: crate::gp::SeedTag {
                            master_seed: seed,
                            replicate: 2 * j + 1,
                        },
                    };
                    let mut site_rng =
                        rng::CounterRng::for_stream(inject_base.wrapping_add(j), 0);
                    let site = (site_rng.next_u64() % n as u64) as usize;
                    let contaminated = inject_ndd_signal(&base, ndd, &[site])?;
                    let stat = statistic(&cfg.detector, grid.as_ref(), &contaminated.values)?;
                    (Some(stat), Some(contaminated.realized_count()))
                }
            };
            Ok(Rep {
                null_stat,
                alt_stat,
                realized,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let null_stats: Vec<f64> = reps.iter().map(|r| r.null_stat).collect();
    let alt_stats: Option<Vec<f64>> = if matches!(alternative, Alternative::None) {
        None
    } else {
        Some(reps.iter().map(|r| r.alt_stat.unwrap()).collect())
    };
    let realized_signal_counts: Vec<usize> =
        reps.iter().filter_map(|r| r.realized).collect();

    let type1_rate = null_stats
        .iter()
        .filter(|&&s| s >= cfg.threshold)
        .count() as f64
        / cfg.reps as f64;
    let type2_rate = alt_stats.as_ref().map(|alts| {
        alts.iter().filter(|&&s| s < cfg.threshold).count() as f64 / cfg.reps as f64
    });
    let (null_mean, null_sd) = mean_sd(&null_stats);
    let report = sim.report();
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        type1_rate,
        type2_rate,
        null_mean,
        null_sd,
        null_stats,
        alt_stats,
        realized_signal_counts,
        embedding: EmbeddingFlags {
            m: report.m,
            exact: report.exact,
            clipped_fraction: report.clipped_mass / report.spectral_mass.max(f64::MIN_POSITIVE),
        },
        runtime_secs: started.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Table1Row {
    pub n: usize,
    pub kappa: f64,
    pub mean: f64,
    pub sd: f64,
    pub reps: usize,
    /// Set when reps < 2 and the SD is not estimable.
    pub degenerate: bool,
}

/// Null mean and SD of the normalized HC statistic per series length.
pub fn table1_summary(
    ns: &[usize],
    alpha: f64,
    alpha0: f64,
    reps: usize,
    master_seed: u64,
) -> Result<Vec<Table1Row>> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let acov = AutocovSpec::new(n, alpha, alpha0)?;
        let cfg = ExperimentConfig::null_only(
            acov,
            DetectorKind::Hc {
                mode: Mode::Signed,
                resolution: detect::DEFAULT_RESOLUTION,
            },
            f64::MAX,
            reps,
            master_seed,
        );
        let report = run_experiment(&cfg)?;
        rows.push(Table1Row {
            n,
            kappa: acov.kappa(),
            mean: report.null_mean,
            sd: report.null_sd,
            reps,
            degenerate: reps < 2,
        });
    }
    Ok(rows)
}

pub fn write_table1_csv<W: std::io::Write>(
    rows: &[Table1Row],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "n,kappa,reps,mean,sd,degenerate")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n, r.kappa, r.reps, r.mean, r.sd, r.degenerate
        )?;
    }
    Ok(())
}

/// The centered exceedance count at level t with its dependence-adjusted
/// scale sqrt(n^(kappa+1) Phi(t) Phi_bar(t)).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CenteredExceedance {
    pub t: f64,
    pub delta: f64,
    pub scale: f64,
}

pub fn centered_exceedance(data: &[f64], t: f64, spec: &AutocovSpec) -> CenteredExceedance {
    let n = data.len() as f64;
    let sf = normal::sf_raw(t);
    let count = data.iter().filter(|&&x| x > t).count() as f64;
    CenteredExceedance {
        t,
        delta: count - n * sf,
        scale: (n.powf(spec.kappa() + 1.0) * (1.0 - sf) * sf).sqrt(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceScalingRow {
    pub n: usize,
    /// Sample variance of the centered exceedance count.
    pub var: f64,
    /// E[delta^(2 nu)] / scale^(2 nu) for nu = 1..nu_max.
    pub moment_ratios: Vec<f64>,
    /// var / (n^min(kappa+1, 2) * exp(-t^2/2)).
    pub var_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarianceScalingReport {
    pub kappa: f64,
    pub t: f64,
    pub reps: usize,
    pub rows: Vec<VarianceScalingRow>,
    /// Log-log regression slope of var against n; the dependence theory
    /// puts it at min(kappa+1, 2).
    pub slope: f64,
}

pub fn variance_scaling_check(
    alpha: f64,
    alpha0: f64,
    ns: &[usize],
    t: f64,
    reps: usize,
    nu_max: usize,
    master_seed: u64,
) -> Result<VarianceScalingReport> {
    if nu_max < 1 || nu_max > 2 {
        return Err(Error::Domain(format!(
            "moment order must be 1 or 2, got {nu_max}"
        )));
    }
    if ns.is_empty() || reps < 2 {
        return Err(Error::Domain("need at least one n and two replicates".into()));
    }
    let mut rows = Vec::with_capacity(ns.len());
    let mut kappa = 0.0;
    for &n in ns {
        let spec = AutocovSpec::new(n, alpha, alpha0)?;
        kappa = spec.kappa();
        let paths = crate::gp::simulate_paths(&spec, reps, master_seed)?;
        let exceed: Vec<CenteredExceedance> = paths
            .iter()
            .map(|p| centered_exceedance(&p.values, t, &spec))
            .collect();
        let deltas: Vec<f64> = exceed.iter().map(|e| e.delta).collect();
        let (mean, sd) = mean_sd(&deltas);
        let var = sd * sd + mean * mean; // second moment about the theoretical center
        let scale = exceed[0].scale;
        let mut moment_ratios = Vec::with_capacity(nu_max);
        for nu in 1..=nu_max {
            let moment =
                deltas.iter().map(|d| d.powi(2 * nu as i32)).sum::<f64>() / reps as f64;
            moment_ratios.push(moment / scale.powi(2 * nu as i32));
        }
        let nf = n as f64;
        let thm_scale = nf.powf((kappa + 1.0).min(2.0)) * (-0.5 * t * t).exp();
        rows.push(VarianceScalingRow {
            n,
            var,
            moment_ratios,
            var_ratio: var / thm_scale,
        });
    }
    // least-squares slope of log var vs log n
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.var.ln()).collect();
    let xm = xs.iter().sum::<f64>() / xs.len() as f64;
    let ym = ys.iter().sum::<f64>() / ys.len() as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    Ok(VarianceScalingReport {
        kappa,
        t,
        reps,
        rows,
        slope: sxy / sxx,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionalExceedanceReport {
    pub t: f64,
    pub q: f64,
    /// floor(n^(kappa - eps)) consecutive indices.
    pub m_small: usize,
    /// ceil(n^kappa) consecutive indices.
    pub m_full: usize,
    pub conditioning_hits: usize,
    pub paths_used: usize,
    /// P(X_i > t for all i < m_small | X_1 > t).
    pub p_small: f64,
    pub p_full: f64,
}

/// Estimate how far past a crossing the exceedance run persists: over
/// m ~ n^(kappa-eps) indices it should stay near 1, over ~n^kappa it
/// visibly decays. Simulates in batches until 500 conditioning hits.
pub fn conditional_exceedance_check(
    acov: &AutocovSpec,
    q: f64,
    eps: f64,
    master_seed: u64,
) -> Result<ConditionalExceedanceReport> {
    let kappa = acov.kappa();
    if kappa <= 0.0 || kappa >= 1.0 {
        return Err(Error::DegenerateRegime(format!(
            "conditional exceedance check needs 0 < kappa < 1, got {kappa}"
        )));
    }
    if (q - (1.0 - kappa)).abs() < 1e-12 {
        return Err(Error::Domain(
            "q exactly at the boundary level 1 - kappa is refused".into(),
        ));
    }
    if !(eps > 0.0 && eps < kappa) {
        return Err(Error::Domain(format!(
            "eps must lie in (0, kappa), got {eps}"
        )));
    }
    let n = acov.n();
    let nf = n as f64;
    let level = LevelSpec::new(q, n)?;
    let m_small = (nf.powf(kappa - eps).floor() as usize).clamp(1, n);
    let m_full = (nf.powf(kappa).ceil() as usize).clamp(1, n);

    const TARGET_HITS: usize = 500;
    const BATCH: usize = 200;
    const MAX_PATHS: usize = 100_000;

    let sim = PathSimulator::new(*acov)?;
    let mut hits = 0usize;
    let mut ok_small = 0usize;
    let mut ok_full = 0usize;
    let mut paths_used = 0usize;
    let mut stream = 0u64;
    while hits < TARGET_HITS && paths_used < MAX_PATHS {
        let batch: Vec<(Vec<f64>, Vec<f64>)> = (stream..stream + (BATCH as u64 / 2))
            .into_par_iter()
            .map(|s| sim.transform(master_seed, s))
            .collect();
        stream += BATCH as u64 / 2;
        for (re, im) in &batch {
            for path in [re, im] {
                paths_used += 1;
                if path[0] > level.t {
                    hits += 1;
                    if path[1..m_small].iter().all(|&x| x > level.t) {
                        ok_small += 1;
                    }
                    if path[1..m_full].iter().all(|&x| x > level.t) {
                        ok_full += 1;
                    }
                }
            }
        }
    }
    if hits < 50 {
        return Err(Error::Domain(format!(
            "only {hits} conditioning events in {paths_used} paths at t = {:.3}; choose a smaller q",
            level.t
        )));
    }
    Ok(ConditionalExceedanceReport {
        t: level.t,
        q,
        m_small,
        m_full,
        conditioning_hits: hits,
        paths_used,
        p_small: ok_small as f64 / hits as f64,
        p_full: ok_full as f64 / hits as f64,
    })
}

#[derive(Debug, Clone, Serialize)]
pub enum ComparisonScenario {
    /// The tiny-perturbation regime: NDD detects amplitudes that are
    /// polynomially small while HC cannot distinguish them from noise.
    HcVsNdd {
        acov: AutocovSpec,
        ndd: NDDConfig,
        hc_threshold: f64,
        reps: usize,
        master_seed: u64,
    },
    /// Above the classical boundary the max classifier keeps detecting,
    /// with or without dependence.
    HcVsMax {
        acov: AutocovSpec,
        sig: SignalSpec,
        hc_threshold: f64,
        reps: usize,
        master_seed: u64,
    },
}

/// Paired experiments demonstrating the detector separations.
pub fn detector_comparison(
    scenario: &ComparisonScenario,
) -> Result<(ExperimentReport, ExperimentReport)> {
    match scenario {
        ComparisonScenario::HcVsNdd {
            acov,
            ndd,
            hc_threshold,
            reps,
            master_seed,
        } => {
            let ndd_cfg = ExperimentConfig {
                acov: *acov,
                sig: None,
                ndd_signal: Some(*ndd),
                detector: DetectorKind::Ndd { c: ndd.c },
                threshold: ndd.threshold(acov.n(), acov.alpha0()),
                reps: *reps,
                master_seed: *master_seed,
                placement: Placement::Uniform,
                signal_scaling: SignalScaling::Dependent,
            };
            let hc_cfg = ExperimentConfig {
                detector: DetectorKind::Hc {
                    mode: Mode::Signed,
                    resolution: detect::DEFAULT_RESOLUTION,
                },
                threshold: *hc_threshold,
                ..ndd_cfg.clone()
            };
            Ok((run_experiment(&ndd_cfg)?, run_experiment(&hc_cfg)?))
        }
        ComparisonScenario::HcVsMax {
            acov,
            sig,
            hc_threshold,
            reps,
            master_seed,
        } => {
            let max_cfg = ExperimentConfig {
                acov: *acov,
                sig: Some(*sig),
                ndd_signal: None,
                detector: DetectorKind::Max,
                threshold: (2.0 * (acov.n() as f64).ln()).sqrt(),
                reps: *reps,
                master_seed: *master_seed,
                placement: Placement::Uniform,
                signal_scaling: SignalScaling::Independent,
            };
            let hc_cfg = ExperimentConfig {
                detector: DetectorKind::Hc {
                    mode: Mode::Signed,
                    resolution: detect::DEFAULT_RESOLUTION,
                },
                threshold: *hc_threshold,
                signal_scaling: SignalScaling::Dependent,
                ..max_cfg.clone()
            };
            Ok((run_experiment(&max_cfg)?, run_experiment(&hc_cfg)?))
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NullQuantileReport {
    pub p: f64,
    pub value: f64,
    pub reps: usize,
    /// Spread of the order-statistic confidence range.
    pub half_width: f64,
}

/// Empirical p-quantile of the normalized HC statistic under the null.
pub fn null_quantile(
    acov: &AutocovSpec,
    reps: usize,
    p: f64,
    master_seed: u64,
) -> Result<NullQuantileReport> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1), got {p}")));
    }
    if (reps as f64) * (1.0 - p) < 20.0 {
        return Err(Error::Domain(format!(
            "insufficient tail mass: reps * (1 - p) = {} < 20",
            reps as f64 * (1.0 - p)
        )));
    }
    let cfg = ExperimentConfig::null_only(
        *acov,
        DetectorKind::Hc {
            mode: Mode::Signed,
            resolution: detect::DEFAULT_RESOLUTION,
        },
        f64::MAX,
        reps,
        master_seed,
    );
    let report = run_experiment(&cfg)?;
    let mut stats = report.null_stats;
    stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = (p * (reps - 1) as f64).round() as usize;
    let spread = 1.96 * (reps as f64 * p * (1.0 - p)).sqrt();
    let lo = idx.saturating_sub(spread.ceil() as usize);
    let hi = (idx + spread.ceil() as usize).min(reps - 1);
    Ok(NullQuantileReport {
        p,
        value: stats[idx],
        reps,
        half_width: 0.5 * (stats[hi] - stats[lo]),
    })
}

/// Batch-table CSV row for a collection of experiment reports.
pub fn write_batch_csv<W: std::io::Write>(
    reports: &[ExperimentReport],
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(
        out,
        "n,kappa,alpha,alpha0,beta,r,detector,threshold,reps,type1,type2,null_mean,null_sd,seed"
    )?;
    for rep in reports {
        let c = &rep.config;
        let (beta, r) = match &c.sig {
            Some(s) => (s.beta().to_string(), s.r().to_string()),
            None => (String::new(), String::new()),
        };
        let type2 = rep
            .type2_rate
            .map(|v| v.to_string())
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.acov.n(),
            c.acov.kappa(),
            c.acov.alpha(),
            c.acov.alpha0(),
            beta,
            r,
            c.detector.name(),
            c.threshold,
            c.reps,
            rep.type1_rate,
            type2,
            rep.null_mean,
            rep.null_sd,
            c.master_seed
        )?;
    }
    Ok(())
}
