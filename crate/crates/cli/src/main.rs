//! hcdep: command-line front end for the hc-core library.
//!
//! Every run is fully determined by its resolved configuration and the
//! explicit --seed; outputs are written atomically and echo the resolved
//! configuration so results can be audited and reproduced byte for byte.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use hc_core::cov::AutocovSpec;
use hc_core::detect::{
    hc_statistic, max_classifier, ndd_detect, DetectorRecord, HCGrid, Mode, DEFAULT_RESOLUTION,
};
use hc_core::experiment::{
    conditional_exceedance_check, null_quantile, run_experiment, table1_summary,
    variance_scaling_check, write_table1_csv, DetectorKind, ExperimentConfig, SignalScaling,
};
use hc_core::gp::{simulate_paths, write_paths_csv};
use hc_core::normal::{self, BivariateTailQuery};
use hc_core::signal::{boundary_curve, write_boundary_csv, NDDConfig, Placement, Sign, SignalSpec};

#[derive(Parser)]
#[command(name = "hcdep", version, about = "Signal detection under strongly dependent noise")]
struct Cli {
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker thread hint. Cannot change any result, only the runtime.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate null noise paths and write them as CSV.
    Simulate(SimulateArgs),
    /// Run one detector on a series read from a file.
    Detect(DetectArgs),
    /// Monte Carlo error-rate experiment; writes a JSON report.
    Mc(McArgs),
    /// Null mean/SD of the normalized statistic per series length.
    Table1(Table1Args),
    /// Detection boundary curves over a kappa list.
    Boundary(BoundaryArgs),
    /// Numerical diagnostics.
    #[command(subcommand)]
    Check(CheckCmd),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    /// Number of paths.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Series file: one value per line (commas also accepted).
    #[arg(long)]
    input: Option<PathBuf>,
    /// hc | max | ndd
    #[arg(long)]
    detector: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    /// signed | absolute
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    refinement: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Test constant for the ndd detector.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Strength of the small-perturbation alternative (enables it).
    #[arg(long)]
    r_ndd: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// hc | max | ndd
    #[arg(long)]
    detector: Option<String>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    refinement: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    /// uniform | blockwise
    #[arg(long)]
    placement: Option<String>,
    /// dependent | independent amplitude scaling
    #[arg(long)]
    scaling: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Table1Args {
    /// Series lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundaryArgs {
    /// Dependence exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    kappa: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Log-log slope of the exceedance-count variance against n.
    VarianceSlope(VarianceSlopeArgs),
    /// Persistence of an exceedance run past a crossing.
    Conditional(ConditionalArgs),
    /// Joint upper tail of an equicorrelated normal pair.
    Bivariate(BivariateArgs),
    /// Empirical null quantile of the normalized statistic.
    Quantile(QuantileArgs),
}

#[derive(Args)]
struct VarianceSlopeArgs {
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    nu_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConditionalArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    /// Level exponent: t = sqrt(2 q log n).
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BivariateArgs {
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct QuantileArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flat config-file namespace shared by all subcommands; each subcommand
/// reads only the keys it understands. Unknown keys are an error.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    ns: Option<Vec<usize>>,
    alpha: Option<f64>,
    alpha0: Option<f64>,
    beta: Option<f64>,
    r: Option<f64>,
    r_ndd: Option<f64>,
    c: Option<f64>,
    q: Option<f64>,
    eps: Option<f64>,
    t: Option<f64>,
    rho: Option<f64>,
    p: Option<f64>,
    kappa: Option<Vec<f64>>,
    detector: Option<String>,
    mode: Option<String>,
    placement: Option<String>,
    scaling: Option<String>,
    refinement: Option<usize>,
    threshold: Option<f64>,
    reps: Option<usize>,
    nu_max: Option<usize>,
    seed: Option<u64>,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
}

enum CliError {
    /// Bad configuration or a domain error from the library: exit 1.
    Usage(Vec<String>),
    /// Out-of-budget work: exit 2.
    Resource(String),
}

impl From<hc_core::Error> for CliError {
    fn from(e: hc_core::Error) -> Self {
        match e {
            hc_core::Error::Resource(msg) => CliError::Resource(msg),
            other => CliError::Usage(vec![other.to_string()]),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(vec![e.to_string()])
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(vec![msg.into()])
}

/// Accumulates validation failures so one run reports every violation.
#[derive(Default)]
struct Validator {
    errors: Vec<String>,
}

impl Validator {
    fn require<T: Copy>(&mut self, value: Option<T>, key: &str) -> Option<T> {
        if value.is_none() {
            self.errors.push(format!("{key} is required"));
        }
        value
    }

    fn check(&mut self, ok: bool, msg: &str) {
        if !ok {
            self.errors.push(msg.to_string());
        }
    }

    fn finish(self) -> Result<(), CliError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(self.errors))
        }
    }
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| usage(format!("cannot read config file {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| usage(format!("config file: {e}")))
        }
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_series(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read input {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for tok in text.split(|ch: char| ch == ',' || ch.is_whitespace()) {
        if tok.is_empty() {
            continue;
        }
        let v: f64 = tok
            .parse()
            .map_err(|_| usage(format!("input contains a non-numeric token '{tok}'")))?;
        values.push(v);
    }
    Ok(values)
}

fn parse_mode(s: &str, v: &mut Validator) -> Mode {
    match s {
        "signed" => Mode::Signed,
        "absolute" => Mode::Absolute,
        other => {
            v.check(false, &format!("mode must be signed or absolute, got '{other}'"));
            Mode::Signed
        }
    }
}

fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serialization cannot fail");
    bytes.push(b'\n');
    bytes
}

fn run_simulate(args: SimulateArgs, file: &FileConfig) -> Result<(), CliError> {
    let mut v = Validator::default();
    let n = v.require(args.n.or(file.n), "n");
    let alpha = v.require(args.alpha.or(file.alpha), "alpha");
    let alpha0 = v.require(args.alpha0.or(file.alpha0), "alpha0");
    let reps = args.reps.or(file.reps).unwrap_or(100);
    let seed = v.require(args.seed.or(file.seed), "seed");
    let out = args.out.or_else(|| file.out.clone());
    v.check(out.is_some(), "out is required");
    v.check(reps >= 1, "reps must be at least 1");
    v.finish()?;

    let spec = AutocovSpec::new(n.unwrap(), alpha.unwrap(), alpha0.unwrap())?;
    let paths = simulate_paths(&spec, reps, seed.unwrap())?;
    let mut buf = Vec::new();
    write_paths_csv(&paths, &mut buf).map_err(CliError::from)?;
    write_atomic(&out.unwrap(), &buf)
}

fn run_detect(args: DetectArgs, file: &FileConfig) -> Result<(), CliError> {
    let mut v = Validator::default();
    let input = args.input.or_else(|| file.input.clone());
    v.check(input.is_some(), "input is required");
    let detector = args
        .detector
        .or_else(|| file.detector.clone())
        .unwrap_or_else(|| "hc".into());
    let mode_str = args
        .mode
        .or_else(|| file.mode.clone())
        .unwrap_or_else(|| "signed".into());
    let mode = parse_mode(&mode_str, &mut v);
    let refinement = args.refinement.or(file.refinement).unwrap_or(DEFAULT_RESOLUTION);
    let alpha = args.alpha.or(file.alpha);
    let alpha0 = args.alpha0.or(file.alpha0);
    let c = args.c.or(file.c).unwrap_or(2.0);
    let out = args.out.or_else(|| file.out.clone());
    v.check(out.is_some(), "out is required");
    match detector.as_str() {
        "hc" => {
            v.check(alpha.is_some(), "alpha is required for the hc detector");
            v.check(alpha0.is_some(), "alpha0 is required for the hc detector");
        }
        "max" => {}
        "ndd" => {
            v.check(alpha0.is_some(), "alpha0 is required for the ndd detector");
            v.check(c >= 1.0, "c must be at least 1");
        }
        other => v.check(false, &format!("detector must be hc, max or ndd, got '{other}'")),
    }
    v.finish()?;

    let data = read_series(&input.unwrap())?;
    let threshold = args.threshold.or(file.threshold);
    let record = match detector.as_str() {
        "hc" => {
            let spec = AutocovSpec::new(data.len(), alpha.unwrap(), alpha0.unwrap())?;
            let grid = HCGrid::with_resolution(&spec, mode, refinement)?;
            let res = hc_statistic(&data, &grid)?;
            let threshold = threshold.unwrap_or(2.2);
            DetectorRecord {
                detector: "hc".into(),
                statistic: res.hc,
                normalized: res.hc_normalized,
                threshold,
                decision: res.hc_normalized >= threshold,
                argmax_t: Some(res.argmax_t),
            }
        }
        "max" => {
            let d = max_classifier(&data)?;
            let threshold = threshold.unwrap_or(d.threshold);
            DetectorRecord {
                detector: "max".into(),
                statistic: d.statistic,
                normalized: d.statistic,
                threshold,
                decision: d.statistic > threshold,
                argmax_t: None,
            }
        }
        _ => {
            let d = ndd_detect(&data, alpha0.unwrap(), c)?;
            let threshold = threshold.unwrap_or(d.threshold);
            DetectorRecord {
                detector: "ndd".into(),
                statistic: d.statistic,
                normalized: d.statistic,
                threshold,
                decision: d.statistic > threshold,
                argmax_t: None,
            }
        }
    };
    let mut value = serde_json::to_value(&record).expect("serialization cannot fail");
    value.as_object_mut().unwrap().insert(
        "config".into(),
        serde_json::json!({
            "detector": detector,
            "n": data.len(),
            "alpha": alpha,
            "alpha0": alpha0,
            "mode": mode_str,
            "refinement": refinement,
            "c": c,
        }),
    );
    write_atomic(&out.unwrap(), &json_bytes(&value))
}

fn run_mc(args: McArgs, file: &FileConfig) -> Result<(), CliError> {
    let mut v = Validator::default();
    let n = v.require(args.n.or(file.n), "n");
    let alpha = v.require(args.alpha.or(file.alpha), "alpha");
    let alpha0 = v.require(args.alpha0.or(file.alpha0), "alpha0");
    let beta = args.beta.or(file.beta);
    let r = args.r.or(file.r);
    let r_ndd = args.r_ndd.or(file.r_ndd);
    let c = args.c.or(file.c).unwrap_or(2.0);
    let detector = args
        .detector
        .or_else(|| file.detector.clone())
        .unwrap_or_else(|| "hc".into());
    let mode_str = args
        .mode
        .or_else(|| file.mode.clone())
        .unwrap_or_else(|| "signed".into());
    let mode = parse_mode(&mode_str, &mut v);
    let refinement = args.refinement.or(file.refinement).unwrap_or(DEFAULT_RESOLUTION);
    let reps = args.reps.or(file.reps).unwrap_or(100);
    let seed = v.require(args.seed.or(file.seed), "seed");
    let out = args.out.or_else(|| file.out.clone());
    v.check(out.is_some(), "out is required");
    v.check(reps >= 1, "reps must be at least 1");
    if let Some(b) = beta {
        v.check(b > 0.5 && b < 1.0, "beta must lie in (1/2, 1)");
    }
    if let Some(r) = r {
        v.check(r > 0.0 && r < 1.0, "r must lie in (0, 1)");
    }
    v.check(
        beta.is_some() == r.is_some(),
        "beta and r must be given together",
    );
    v.check(
        !(beta.is_some() && r_ndd.is_some()),
        "beta/r and r_ndd are mutually exclusive alternatives",
    );
    if r_ndd.is_some() || detector == "ndd" {
        v.check(c >= 1.0, "c must be at least 1");
    }
    if let Some(rn) = r_ndd {
        v.check(rn > c, "r_ndd must exceed c");
    }
    let placement = match args
        .placement
        .or_else(|| file.placement.clone())
        .unwrap_or_else(|| "uniform".into())
        .as_str()
    {
        "uniform" => Placement::Uniform,
        "blockwise" => Placement::Blockwise,
        other => {
            v.check(false, &format!("placement must be uniform or blockwise, got '{other}'"));
            Placement::Uniform
        }
    };
    let scaling = match args
        .scaling
        .or_else(|| file.scaling.clone())
        .unwrap_or_else(|| "dependent".into())
        .as_str()
    {
        "dependent" => SignalScaling::Dependent,
        "independent" => SignalScaling::Independent,
        other => {
            v.check(false, &format!("scaling must be dependent or independent, got '{other}'"));
            SignalScaling::Dependent
        }
    };
    let kind = match detector.as_str() {
        "hc" => DetectorKind::Hc {
            mode,
            resolution: refinement,
        },
        "max" => DetectorKind::Max,
        "ndd" => DetectorKind::Ndd { c },
        other => {
            v.check(false, &format!("detector must be hc, max or ndd, got '{other}'"));
            DetectorKind::Max
        }
    };
    v.finish()?;

    let acov = AutocovSpec::new(n.unwrap(), alpha.unwrap(), alpha0.unwrap())?;
    let nf = acov.n() as f64;
    let threshold = args.threshold.or(file.threshold).unwrap_or(match kind {
        DetectorKind::Hc { .. } => 2.2,
        DetectorKind::Max => (2.0 * nf.ln()).sqrt(),
        DetectorKind::Ndd { c } => 2.0 * (c * nf.powf(-acov.alpha0()) * nf.ln()).sqrt(),
    });
    let sig = match (beta, r) {
        (Some(b), Some(r)) => Some(SignalSpec::new(b, r)?),
        _ => None,
    };
    let ndd_signal = match r_ndd {
        Some(rn) => Some(NDDConfig::new(rn, c, Sign::Plus)?),
        None => None,
    };
    let cfg = ExperimentConfig {
        acov,
        sig,
        ndd_signal,
        detector: kind,
        threshold,
        reps,
        master_seed: seed.unwrap(),
        placement,
        signal_scaling: scaling,
    };
    let mut report = run_experiment(&cfg)?;
    // wall time varies between runs; zero it so equal configs give equal files
    report.runtime_secs = 0.0;
    let value = serde_json::to_value(&report).expect("serialization cannot fail");
    write_atomic(&out.unwrap(), &json_bytes(&value))
}

/// CSV outputs echo their resolved configuration in a leading comment line.
fn csv_with_config(config: &serde_json::Value, body: Vec<u8>) -> Vec<u8> {
    let mut out = format!("# config: {config}\n").into_bytes();
    out.extend(body);
    out
}

fn run_table1(args: Table1Args, file: &FileConfig) -> Result<(), CliError> {
    let mut v = Validator::default();
    let ns = args
        .ns
        .or_else(|| file.ns.clone())
        .unwrap_or_else(|| vec![1 << 10, 1 << 12, 1 << 14, 1 << 16]);
    let alpha = args.alpha.or(file.alpha).unwrap_or(0.5);
    let alpha0 = args.alpha0.or(file.alpha0).unwrap_or(0.1);
    let reps = args.reps.or(file.reps).unwrap_or(100);
    let seed = v.require(args.seed.or(file.seed), "seed");
    let out = args.out.or_else(|| file.out.clone());
    v.check(out.is_some(), "out is required");
    v.check(!ns.is_empty(), "ns must not be empty");
    v.check(reps >= 1, "reps must be at least 1");
    v.finish()?;

    let rows = table1_summary(&ns, alpha, alpha0, reps, seed.unwrap())?;
    let mut body = Vec::new();
    write_table1_csv(&rows, &mut body).map_err(CliError::from)?;
    let config = serde_json::json!({
        "ns": ns, "alpha": alpha, "alpha0": alpha0, "reps": reps, "seed": seed.unwrap(),
    });
    write_atomic(&out.unwrap(), &csv_with_config(&config, body))
}

fn run_boundary(args: BoundaryArgs, file: &FileConfig) -> Result<(), CliError> {
    let mut v = Validator::default();
    let kappas = args
        .kappa
        .or_else(|| file.kappa.clone())
        .unwrap_or_else(|| vec![0.0, 0.2, 0.4, 0.6]);
    let out = args.out.or_else(|| file.out.clone());
    v.check(out.is_some(), "out is required");
    v.check(!kappas.is_empty(), "kappa list must not be empty");
    v.finish()?;

    let betas: Vec<f64> = (0..99).map(|i| 0.505 + 0.005 * i as f64).collect();
    let mut points = Vec::new();
    for &k in &kappas {
        points.extend(boundary_curve(k, &betas)?);
    }
    let mut body = Vec::new();
    write_boundary_csv(&points, &mut body).map_err(CliError::from)?;
    let config = serde_json::json!({ "kappa": kappas, "beta_grid": [0.505, 0.995, 0.005] });
    write_atomic(&out.unwrap(), &csv_with_config(&config, body))
}

#[derive(Serialize)]
struct CheckOutput<C: Serialize, R: Serialize> {
    config: C,
    report: R,
}

fn write_check<C: Serialize, R: Serialize>(
    out: PathBuf,
    config: C,
    report: R,
) -> Result<(), CliError> {
    let value =
        serde_json::to_value(&CheckOutput { config, report }).expect("serialization cannot fail");
    write_atomic(&out, &json_bytes(&value))
}

fn run_check(cmd: CheckCmd, file: &FileConfig) -> Result<(), CliError> {
    match cmd {
        CheckCmd::VarianceSlope(args) => {
            let mut v = Validator::default();
            let ns = args
                .ns
                .or_else(|| file.ns.clone())
                .unwrap_or_else(|| (8..=14).map(|p| 1usize << p).collect());
            let alpha = v.require(args.alpha.or(file.alpha), "alpha");
            let alpha0 = v.require(args.alpha0.or(file.alpha0), "alpha0");
            let t = args.t.or(file.t).unwrap_or(1.0);
            let reps = args.reps.or(file.reps).unwrap_or(2000);
            let nu_max = args.nu_max.or(file.nu_max).unwrap_or(1);
            let seed = v.require(args.seed.or(file.seed), "seed");
            let out = args.out.or_else(|| file.out.clone());
            v.check(out.is_some(), "out is required");
            v.finish()?;
            let report = variance_scaling_check(
                alpha.unwrap(),
                alpha0.unwrap(),
                &ns,
                t,
                reps,
                nu_max,
                seed.unwrap(),
            )?;
            let config = serde_json::json!({
                "ns": ns, "alpha": alpha.unwrap(), "alpha0": alpha0.unwrap(),
                "t": t, "reps": reps, "nu_max": nu_max, "seed": seed.unwrap(),
            });
            write_check(out.unwrap(), config, report)
        }
        CheckCmd::Conditional(args) => {
            let mut v = Validator::default();
            let n = v.require(args.n.or(file.n), "n");
            let alpha = v.require(args.alpha.or(file.alpha), "alpha");
            let alpha0 = v.require(args.alpha0.or(file.alpha0), "alpha0");
            let q = v.require(args.q.or(file.q), "q");
            let eps = v.require(args.eps.or(file.eps), "eps");
            let seed = v.require(args.seed.or(file.seed), "seed");
            let out = args.out.or_else(|| file.out.clone());
            v.check(out.is_some(), "out is required");
            v.finish()?;
            let acov = AutocovSpec::new(n.unwrap(), alpha.unwrap(), alpha0.unwrap())?;
            let report =
                conditional_exceedance_check(&acov, q.unwrap(), eps.unwrap(), seed.unwrap())?;
            let config = serde_json::json!({
                "n": acov.n(), "alpha": acov.alpha(), "alpha0": acov.alpha0(),
                "q": q.unwrap(), "eps": eps.unwrap(), "seed": seed.unwrap(),
            });
            write_check(out.unwrap(), config, report)
        }
        CheckCmd::Bivariate(args) => {
            let mut v = Validator::default();
            let t = v.require(args.t.or(file.t), "t");
            let rho = v.require(args.rho.or(file.rho), "rho");
            let out = args.out.or_else(|| file.out.clone());
            v.check(out.is_some(), "out is required");
            v.finish()?;
            let (t, rho) = (t.unwrap(), rho.unwrap());
            let joint = normal::bivariate_exceedance(BivariateTailQuery { t, rho })?.value();
            let marginal = normal::sf(t)?.value();
            let report = serde_json::json!({
                "joint": joint,
                "marginal": marginal,
                "conditional": joint / marginal,
            });
            write_check(out.unwrap(), serde_json::json!({ "t": t, "rho": rho }), report)
        }
        CheckCmd::Quantile(args) => {
            let mut v = Validator::default();
            let n = v.require(args.n.or(file.n), "n");
            let alpha = v.require(args.alpha.or(file.alpha), "alpha");
            let alpha0 = v.require(args.alpha0.or(file.alpha0), "alpha0");
            let p = v.require(args.p.or(file.p), "p");
            let reps = args.reps.or(file.reps).unwrap_or(400);
            let seed = v.require(args.seed.or(file.seed), "seed");
            let out = args.out.or_else(|| file.out.clone());
            v.check(out.is_some(), "out is required");
            v.finish()?;
            let acov = AutocovSpec::new(n.unwrap(), alpha.unwrap(), alpha0.unwrap())?;
            let report = null_quantile(&acov, reps, p.unwrap(), seed.unwrap())?;
            let config = serde_json::json!({
                "n": acov.n(), "alpha": acov.alpha(), "alpha0": acov.alpha0(),
                "p": p.unwrap(), "reps": reps, "seed": seed.unwrap(),
            });
            write_check(out.unwrap(), config, report)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file = load_file_config(cli.config.as_deref())?;
    if let Some(threads) = cli.threads {
        // a hint only; results never depend on the pool size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.cmd {
        Cmd::Simulate(args) => run_simulate(args, &file),
        Cmd::Detect(args) => run_detect(args, &file),
        Cmd::Mc(args) => run_mc(args, &file),
        Cmd::Table1(args) => run_table1(args, &file),
        Cmd::Boundary(args) => run_boundary(args, &file),
        Cmd::Check(cmd) => run_check(cmd, &file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    if std::env::var_os("HCDEP_SEED").is_some() {
        eprintln!("error: HCDEP_SEED is not honored; pass the seed explicitly with --seed");
        return ExitCode::from(1);
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(errors)) => {
            for e in errors {
                eprintln!("error: {e}");
            }
            ExitCode::from(1)
        }
        Err(CliError::Resource(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
