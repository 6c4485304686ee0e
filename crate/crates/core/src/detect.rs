//! Detectors: the higher-criticism statistic, the max classifier, the
//! neighbor-difference detector, and the block-constancy diagnostics.

use serde::Serialize;

use crate::cov::AutocovSpec;
use crate::error::{Error, Result};
use crate::normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    /// Maximize Z(t) itself.
    Signed,
    /// Maximize |Z(t)|.
    Absolute,
}

/// Evaluation grid for the HC supremum over the level window [-t_n, t_n]
/// with t_n the upper quantile at tail probability n^(kappa-1). Data values
/// falling inside the window are additionally evaluated on both sides of
/// their jump at evaluation time.
#[derive(Debug, Clone)]
pub struct HCGrid {
    pub t_n: f64,
    pub mode: Mode,
    pub kappa: f64,
    pub candidate_levels: Vec<f64>,
    /// Evaluate both one-sided limits at every in-window data value in
    /// addition to the fixed candidate levels. Set by the default
    /// constructor; custom grids evaluate exactly the levels given.
    pub include_data_levels: bool,
}

pub const DEFAULT_RESOLUTION: usize = 512;

impl HCGrid {
    pub fn with_resolution(spec: &AutocovSpec, mode: Mode, resolution: usize) -> Result<Self> {
        let kappa = spec.kappa();
        if kappa >= 1.0 {
            return Err(Error::DegenerateRegime(format!(
                "HC grid undefined for kappa = {kappa}"
            )));
        }
        let n = spec.n() as f64;
        let tail = n.powf(kappa - 1.0);
        let t_n = normal::sf_quantile(tail)?;
        let resolution = resolution.max(2);
        let step = 2.0 * t_n / (resolution - 1) as f64;
        let candidate_levels = (0..resolution)
            .map(|i| -t_n + step * i as f64)
            .collect();
        Ok(HCGrid {
            t_n,
            mode,
            kappa,
            candidate_levels,
            include_data_levels: true,
        })
    }

    pub fn custom(t_n: f64, mode: Mode, kappa: f64, candidate_levels: Vec<f64>) -> Result<Self> {
        if candidate_levels.is_empty() {
            return Err(Error::Domain("candidate level set is empty".into()));
        }
        Ok(HCGrid {
            t_n,
            mode,
            kappa,
            candidate_levels,
            include_data_levels: false,
        })
    }
}

pub fn default_grid(spec: &AutocovSpec) -> Result<HCGrid> {
    HCGrid::with_resolution(spec, Mode::Signed, DEFAULT_RESOLUTION)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HCResult {
    pub hc: f64,
    /// n^(-kappa/2) * hc.
    pub hc_normalized: f64,
    /// Level attaining the supremum.
    pub argmax_t: f64,
    pub mode: Mode,
}

#[inline]
fn z_score(count: usize, n: usize, t: f64) -> f64 {
    let sf = normal::sf_raw(t);
    let cdf = 1.0 - sf;
    (count as f64 - n as f64 * sf) / (n as f64 * cdf * sf).sqrt()
}

/// The HC statistic: sup over candidate levels (and both one-sided limits
/// at each in-window data value) of the standardized exceedance excess
/// Z(t) = (#{X_i > t} - n Phi_bar(t)) / sqrt(n Phi(t) Phi_bar(t)).
pub fn hc_statistic(data: &[f64], grid: &HCGrid) -> Result<HCResult> {
    let n = data.len();
    if n == 0 {
        return Err(Error::Domain("empty data".into()));
    }
    let in_window = |t: f64| t >= -grid.t_n && t <= grid.t_n;
    if !grid.candidate_levels.iter().any(|&t| in_window(t)) {
        return Err(Error::Domain(format!(
            "all candidate levels fall outside [-{0}, {0}]",
            grid.t_n
        )));
    }

    let mut sorted = data.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // #{X_i > t}
    let strict = |t: f64| n - sorted.partition_point(|&x| x <= t);
    // #{X_i >= t}: the left limit of the count's step at a data value
    let weak = |t: f64| n - sorted.partition_point(|&x| x < t);

    let mut best = f64::NEG_INFINITY;
    let mut best_z = 0.0;
    let mut best_t = f64::NAN;
    let mut consider = |z: f64, t: f64| {
        let keyed = match grid.mode {
            Mode::Signed => z,
            Mode::Absolute => z.abs(),
        };
        if keyed > best {
            best = keyed;
            best_z = z;
            best_t = t;
        }
    };

    for &t in &grid.candidate_levels {
        if in_window(t) {
            consider(z_score(strict(t), n, t), t);
        }
    }
    if grid.include_data_levels {
        for &x in &sorted {
            if x > -grid.t_n && x < grid.t_n {
                consider(z_score(strict(x), n, x), x);
                consider(z_score(weak(x), n, x), x);
            }
        }
    }

    let hc = match grid.mode {
        Mode::Signed => best_z,
        Mode::Absolute => best_z.abs(),
    };
    Ok(HCResult {
        hc,
        hc_normalized: hc * (n as f64).powf(-grid.kappa / 2.0),
        argmax_t: best_t,
        mode: grid.mode,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Detection {
    pub signal: bool,
    pub statistic: f64,
    pub threshold: f64,
}

/// Declare a signal when the sample maximum exceeds sqrt(2 log n).
pub fn max_classifier(data: &[f64]) -> Result<Detection> {
    if data.is_empty() {
        return Err(Error::Domain("empty data".into()));
    }
    let statistic = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = (2.0 * (data.len() as f64).ln()).sqrt();
    Ok(Detection {
        signal: statistic > threshold,
        statistic,
        threshold,
    })
}

/// Neighbor-difference detector: a signal makes one first difference jump
/// while the smooth strongly dependent noise keeps |Y_{i+1} - Y_i| of
/// order n^(-alpha0/2).
pub fn ndd_detect(data: &[f64], alpha0: f64, c: f64) -> Result<Detection> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Domain(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    if !(c >= 1.0) {
        return Err(Error::Domain(format!("test constant must be >= 1, got {c}")));
    }
    let statistic = data
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max);
    let nf = n as f64;
    let threshold = 2.0 * (c * nf.powf(-alpha0) * nf.ln()).sqrt();
    Ok(Detection {
        signal: statistic > threshold,
        statistic,
        threshold,
    })
}

/// Consecutive blocks of a fixed length covering 1..n; the last block may
/// be short.
#[derive(Debug, Clone)]
pub struct BlockPartition {
    pub lambda: Option<f64>,
    pub block_len: usize,
    pub b: usize,
    pub starts: Vec<usize>,
}

impl BlockPartition {
    /// Block length floor(n^lambda).
    pub fn new(n: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Domain(format!(
                "block exponent must lie in (0, 1), got {lambda}"
            )));
        }
        let len = ((n as f64).powf(lambda).floor() as usize).max(1);
        let mut part = Self::from_block_len(n, len)?;
        part.lambda = Some(lambda);
        Ok(part)
    }

    pub fn from_block_len(n: usize, block_len: usize) -> Result<Self> {
        if n == 0 || block_len == 0 {
            return Err(Error::Domain("n and block length must be positive".into()));
        }
        let b = n.div_ceil(block_len);
        let starts = (0..b).map(|j| j * block_len).collect();
        Ok(BlockPartition {
            lambda: None,
            block_len,
            b,
            starts,
        })
    }

    pub fn blocks<'a>(&'a self, n: usize) -> impl Iterator<Item = std::ops::Range<usize>> + 'a {
        self.starts
            .iter()
            .map(move |&s| s..(s + self.block_len).min(n))
    }
}

/// Whether the exceedance indicators 1[X_i > t] are constant within every
/// block, plus the mean over blocks of the fraction of entries agreeing
/// with the block's first entry.
pub fn block_constancy(data: &[f64], t: f64, part: &BlockPartition) -> Result<(bool, f64)> {
    let n = data.len();
    if part.starts.last().map_or(true, |&s| s >= n) && n != 0 && part.b * part.block_len < n {
        return Err(Error::Domain("partition shorter than data".into()));
    }
    if n == 0 {
        return Err(Error::Domain("empty data".into()));
    }
    let mut all_constant = true;
    let mut agreement_sum = 0.0;
    let mut blocks = 0usize;
    for range in part.blocks(n) {
        if range.is_empty() {
            continue;
        }
        let leader = data[range.start] > t;
        let len = range.len();
        let agree = data[range.clone()]
            .iter()
            .filter(|&&x| (x > t) == leader)
            .count();
        if agree != len {
            all_constant = false;
        }
        agreement_sum += agree as f64 / len as f64;
        blocks += 1;
    }
    Ok((all_constant, agreement_sum / blocks as f64))
}

/// A threshold of the form t = sqrt(2 q log n).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LevelSpec {
    pub q: f64,
    pub t: f64,
}

impl LevelSpec {
    pub fn new(q: f64, n: usize) -> Result<Self> {
        if !(q > 0.0) {
            return Err(Error::Domain(format!("q must be positive, got {q}")));
        }
        Ok(LevelSpec {
            q,
            t: (2.0 * q * (n as f64).ln()).sqrt(),
        })
    }
}

pub fn level_exceedance(data: &[f64], level: &LevelSpec) -> bool {
    data.iter().any(|&x| x > level.t)
}

/// JSON-serializable detector outcome.
#[derive(Debug, Clone, Serialize)]
pub struct DetectorRecord {
    pub detector: String,
    pub statistic: f64,
    pub normalized: f64,
    pub threshold: f64,
    pub decision: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmax_t: Option<f64>,
}
