//! Command-line front end.
//!
//! Every command writes one CSV table: a `#` metadata line that records the
//! full configuration, a header row, then data rows with 12 significant
//! digits. `validate` instead prints one PASS/FAIL line per check.
//!
//! Exit codes: 0 on success, 1 on numerical failure or a failed validation,
//! 2 on configuration errors.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::capacity::{
    channel_capacity, mutual_information, snr, sweep_capacity_vs_lambda, sweep_capacity_vs_sigma, sweep_mi_vs_mux,
    OptimizerSpec, SweepTable,
};
use crate::error::Error;
use crate::mc_oracle::{empirical_entropy, ks_distance, sample_hybrid, sample_moments, HistogramSpec, SampleSpec};
use crate::noise_model::{noise_entropy, tabulate_noise, HybridNoise, NoiseParams, TruncationPolicy};
use crate::quadrature::{integrate_pieces, noise_support, QuadratureSpec, DEFAULT_TAIL_MASS};
use crate::signal_model::{received_entropy, DensityMode, TransmitEstimate};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const DEFAULT_SIGMAS: [f64; 5] = [5.0, 10.0, 15.0, 20.0, 25.0];
const DEFAULT_SEED: u64 = 42;
const DEFAULT_SAMPLES: usize = 1_000_000;
const HISTOGRAM_BINS: usize = 512;

#[derive(Debug, Parser)]
#[command(
    name = "qcnoise",
    version,
    about = "Hybrid Poisson-Gaussian noise, entropies and channel capacity"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Tabulate f_Z and -f_Z log2 f_Z over the noise support.
    NoisePdf,
    /// Differential entropies h(Z) and h(Y).
    Entropy,
    /// I(X;Y) at one transmit estimate.
    MutualInfo,
    /// Capacity: I(X;Y) maximized over the transmit estimate.
    Capacity,
    /// I(X;Y) on a uniform grid of transmit estimates over [0, 2pi].
    SweepMi,
    /// Capacity and SNR across a list of sigma (or lambda) values.
    SweepCapacity,
    /// Cross-check the analytic model against Monte-Carlo samples.
    Validate,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::NoisePdf => "noise-pdf",
            Command::Entropy => "entropy",
            Command::MutualInfo => "mutual-info",
            Command::Capacity => "capacity",
            Command::SweepMi => "sweep-mi",
            Command::SweepCapacity => "sweep-capacity",
            Command::Validate => "validate",
        }
    }
}

/// Flags shared by all commands. Unset flags fall back to the config file,
/// then to built-in defaults.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// Poisson rate of the shot-noise count.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Mean of the Gaussian component.
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Standard deviation of the Gaussian component.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Transmit point estimate, in [0, 2pi].
    #[arg(long = "mu-x", global = true)]
    pub mu_x: Option<f64>,
    /// Output density mode: normalized or paper-literal.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Number of Poisson mixture terms kept.
    #[arg(long = "trunc-n", global = true)]
    pub trunc_n: Option<u32>,
    /// Keep the zero-count mixture term.
    #[arg(long = "include-zero", global = true)]
    pub include_zero: Option<bool>,
    /// Grid points (table rows, or the optimizer grid for capacity commands).
    #[arg(long, global = true)]
    pub points: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys as the long flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Comma-separated sigma values for sweep-capacity.
    #[arg(long, global = true, value_delimiter = ',')]
    pub sigmas: Option<Vec<f64>>,
    /// Comma-separated lambda values for sweep-capacity (replaces the sigma sweep).
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Monte-Carlo sample count for validate.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub mu_x: Option<f64>,
    pub mode: Option<String>,
    pub trunc_n: Option<u32>,
    pub include_zero: Option<bool>,
    pub points: Option<usize>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub sigmas: Option<Vec<f64>>,
    pub lambdas: Option<Vec<f64>>,
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sweep {
    Sigma,
    Lambda,
}

/// Fully resolved and validated configuration for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: NoiseParams,
    pub est: TransmitEstimate,
    pub mode: DensityMode,
    pub points: usize,
    pub qspec: QuadratureSpec,
    pub seed: u64,
    pub samples: usize,
    pub output_path: Option<PathBuf>,
    pub sweep: Sweep,
    pub sweep_values: Vec<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical { op: &'static str, source: Error },
    ValidationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } | CliError::ValidationFailed(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical { op, source } => write!(f, "{op} failed: {source}"),
            CliError::ValidationFailed(n) => write!(f, "{n} validation check(s) failed"),
        }
    }
}

fn config_err(e: Error) -> CliError {
    match e {
        Error::InvalidParams { field, reason } => CliError::Config(format!("{field}: {reason}")),
        other => CliError::Config(other.to_string()),
    }
}

/// Parameter and input errors surface as configuration errors; everything
/// else is a numerical failure of `op`.
fn numerical(op: &'static str) -> impl Fn(Error) -> CliError {
    move |e| match e {
        Error::InvalidParams { .. } | Error::DegenerateInput(_) => config_err(e),
        source => CliError::Numerical { op, source },
    }
}

impl RunConfig {
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => load_config(path)?,
            None => FileConfig::default(),
        };
        let lambda = flags.lambda.or(file.lambda).unwrap_or(5.0);
        let mu = flags.mu.or(file.mu).unwrap_or(0.0);
        let sigma = flags.sigma.or(file.sigma).unwrap_or(15.0);
        let mu_x = flags.mu_x.or(file.mu_x).unwrap_or(PI);
        let default_mode = match command {
            Command::SweepCapacity => DensityMode::Normalized,
            _ => DensityMode::PaperLiteral,
        };
        let mode = match flags.mode.clone().or(file.mode) {
            Some(s) => s
                .parse::<DensityMode>()
                .map_err(|_| CliError::Config(format!("mode: expected normalized or paper-literal, got {s:?}")))?,
            None => default_mode,
        };
        let trunc_n = flags.trunc_n.or(file.trunc_n).unwrap_or(100);
        let include_zero = flags.include_zero.or(file.include_zero).unwrap_or(true);
        let trunc = TruncationPolicy::fixed(trunc_n).with_zero_term(include_zero);
        let params = NoiseParams::with_truncation(lambda, mu, sigma, trunc).map_err(config_err)?;
        let est = TransmitEstimate::new(mu_x).map_err(config_err)?;

        let default_points = match command {
            Command::NoisePdf => 2001,
            Command::SweepMi => 65,
            _ => OptimizerSpec::default().grid_points,
        };
        let points = flags.points.or(file.points).unwrap_or(default_points);
        if points < 2 {
            return Err(CliError::Config(format!("points: need at least 2, got {points}")));
        }
        let base = QuadratureSpec::default();
        let tol = flags.tol.or(file.tol).unwrap_or(base.rel_tol);
        let qspec = QuadratureSpec::new(tol, base.abs_tol.min(tol), base.max_subdivisions).map_err(|e| match e {
            Error::InvalidParams { reason, .. } => CliError::Config(format!("tol: {reason}")),
            other => config_err(other),
        })?;
        let seed = flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
        let samples = flags.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES);
        if samples == 0 {
            return Err(CliError::Config("samples: need at least one sample".into()));
        }

        let sigmas = flags.sigmas.clone().or(file.sigmas);
        let lambdas = flags.lambdas.clone().or(file.lambdas);
        let (sweep, sweep_values) = match (sigmas, lambdas) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("sigmas/lambdas: give at most one sweep list".into()));
            }
            (None, Some(l)) => (Sweep::Lambda, l),
            (Some(s), None) => (Sweep::Sigma, s),
            (None, None) => (Sweep::Sigma, DEFAULT_SIGMAS.to_vec()),
        };

        let output_path = flags.out.clone().or(file.out);
        Ok(RunConfig {
            command,
            params,
            est,
            mode,
            points,
            qspec,
            seed,
            samples,
            output_path,
            sweep,
            sweep_values,
        })
    }

    /// The `#` line written ahead of every table.
    pub fn metadata_line(&self) -> String {
        let p = &self.params;
        let mut s = format!(
            "# qcnoise {VERSION} command={} lambda={} mu={} sigma={} mu_x={} mode={} trunc_n={} include_zero={} points={} tol={} seed={}",
            self.command.as_str(),
            fmt_g(p.lambda),
            fmt_g(p.mu),
            fmt_g(p.sigma),
            fmt_g(self.est.mu_x()),
            self.mode,
            match p.trunc.mode {
                crate::noise_model::Truncation::FixedTerms(n) => n.to_string(),
                crate::noise_model::Truncation::TailBound(eps) => format!("tail:{}", fmt_g(eps)),
            },
            p.trunc.include_zero_term,
            self.points,
            fmt_g(self.qspec.rel_tol),
            self.seed,
        );
        if self.command == Command::SweepCapacity {
            let name = match self.sweep {
                Sweep::Sigma => "sigmas",
                Sweep::Lambda => "lambdas",
            };
            let list: Vec<String> = self.sweep_values.iter().map(|&v| fmt_g(v)).collect();
            let _ = write!(s, " {name}={}", list.join(","));
        }
        if self.command == Command::Validate {
            let _ = write!(s, " samples={}", self.samples);
        }
        s
    }
}

fn load_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("config: {}: {}", path.display(), e.message())))
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed.
pub fn fmt_g(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table under construction.
struct Table {
    text: String,
}

impl Table {
    fn new(cfg: &RunConfig, header: &[&str]) -> Self {
        let mut text = cfg.metadata_line();
        text.push('\n');
        text.push_str(&header.join(","));
        text.push('\n');
        Table { text }
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Config(format!("out: cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // A closed downstream pipe (e.g. `| head`) is not an error.
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(CliError::Config(format!("out: cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

/// Runs one resolved configuration and writes its output.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.command == Command::Validate {
        return validate(cfg);
    }
    let table = build_table(cfg)?;
    emit(cfg, &table.text)
}

fn build_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = &cfg.params;
    let q = &cfg.qspec;
    match cfg.command {
        Command::NoisePdf => {
            let tab = tabulate_noise(p, cfg.points, q).map_err(numerical("tabulate_noise"))?;
            let mut t = Table::new(cfg, &["z", "f_Z", "neg_fZ_log2_fZ"]);
            for i in 0..tab.len() {
                t.row(&[
                    fmt_g(tab.abscissae[i]),
                    fmt_g(tab.densities[i]),
                    fmt_g(tab.entropy_integrand[i]),
                ]);
            }
            Ok(t)
        }
        Command::Entropy => {
            let hz = noise_entropy(p, q).map_err(numerical("noise_entropy"))?;
            let hy = received_entropy(cfg.est, p, q, cfg.mode).map_err(numerical("received_entropy"))?;
            let mut t = Table::new(cfg, &["quantity", "bits"]);
            t.row(&["h_Z".into(), fmt_g(hz)]);
            t.row(&["h_Y".into(), fmt_g(hy)]);
            Ok(t)
        }
        Command::MutualInfo => {
            let mi = mutual_information(cfg.est, p, q, cfg.mode).map_err(numerical("mutual_information"))?;
            let mut t = Table::new(cfg, &["mu_x", "mi_bits"]);
            t.row(&[fmt_g(cfg.est.mu_x()), fmt_g(mi)]);
            Ok(t)
        }
        Command::Capacity => {
            let ospec = optimizer(cfg);
            let cap = channel_capacity(p, q, &ospec, cfg.mode).map_err(numerical("channel_capacity"))?;
            let est = TransmitEstimate::new(cap.mu_x_star).map_err(numerical("channel_capacity"))?;
            let s = snr(est, p, q).map_err(numerical("snr"))?;
            let mut t = Table::new(
                cfg,
                &[
                    "mu_x_star",
                    "capacity_bits",
                    "grid_argmax",
                    "grid_capacity_bits",
                    "snr",
                    "non_unimodal",
                ],
            );
            t.row(&[
                fmt_g(cap.mu_x_star),
                fmt_g(cap.capacity_bits),
                fmt_g(cap.grid_argmax),
                fmt_g(cap.grid_capacity_bits),
                fmt_g(s),
                cap.non_unimodal.to_string(),
            ]);
            Ok(t)
        }
        Command::SweepMi => {
            let curve = sweep_mi_vs_mux(p, q, cfg.points, cfg.mode).map_err(numerical("sweep_mi_vs_mux"))?;
            let mut t = Table::new(cfg, &["mu_x", "mi_bits"]);
            for row in &curve.rows {
                t.row(&[fmt_g(row.mu_x), fmt_g(row.mi_bits)]);
            }
            Ok(t)
        }
        Command::SweepCapacity => {
            let table = sweep_table(cfg)?;
            let mut t = Table::new(cfg, &["x", "capacity_bits", "snr", "sigma", "lambda", "mu_x_star"]);
            for r in &table.rows {
                t.row(&[
                    fmt_g(r.x),
                    fmt_g(r.capacity_bits),
                    fmt_g(r.snr),
                    fmt_g(r.sigma),
                    fmt_g(r.lambda),
                    fmt_g(r.mu_x_star),
                ]);
            }
            Ok(t)
        }
        Command::Validate => unreachable!("validate prints its own report"),
    }
}

fn optimizer(cfg: &RunConfig) -> OptimizerSpec {
    OptimizerSpec {
        grid_points: cfg.points,
        ..OptimizerSpec::default()
    }
}

fn sweep_table(cfg: &RunConfig) -> Result<SweepTable, CliError> {
    let ospec = optimizer(cfg);
    match cfg.sweep {
        Sweep::Sigma => sweep_capacity_vs_sigma(&cfg.params, &cfg.sweep_values, &cfg.qspec, &ospec, cfg.mode)
            .map_err(numerical("sweep_capacity_vs_sigma")),
        Sweep::Lambda => sweep_capacity_vs_lambda(&cfg.params, &cfg.sweep_values, &cfg.qspec, &ospec, cfg.mode)
            .map_err(numerical("sweep_capacity_vs_lambda")),
    }
}

/// One validation outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// Monte-Carlo cross-checks of the configured noise model.
///
/// Samples follow the normalized truncated model, so analytic references are
/// normalized by the kept mass before comparison.
pub fn validation_checks(cfg: &RunConfig) -> Result<Vec<Check>, CliError> {
    let p = &cfg.params;
    let q = &cfg.qspec;
    let noise = HybridNoise::new(p).map_err(config_err)?;
    let support = noise_support(p, DEFAULT_TAIL_MASS).map_err(numerical("noise_support"))?;
    let mut checks = Vec::new();

    let pieces = support.breakpoints(p.sigma, 4096);
    let mass = integrate_pieces(|z| noise.pdf(z), &pieces, q)
        .map_err(numerical("normalization"))?
        .value;
    let expected_mass = noise.mass();
    checks.push(Check {
        name: "normalization",
        pass: (mass - expected_mass).abs() <= 1e-9,
        detail: format!("integral {} vs kept mixture mass {}", fmt_g(mass), fmt_g(expected_mass)),
    });

    let samples = sample_hybrid(
        p,
        &SampleSpec {
            n_samples: cfg.samples,
            seed: cfg.seed,
        },
    )
    .map_err(numerical("sample_hybrid"))?;
    let n = samples.len() as f64;

    let (m_ref, v_ref) = noise
        .moments_by_quadrature(q)
        .map_err(numerical("moments_by_quadrature"))?;
    let (m, v) = sample_moments(&samples);
    let mean_tol = 5.0 * (v_ref / n).sqrt();
    checks.push(Check {
        name: "mean",
        pass: (m - m_ref).abs() <= mean_tol,
        detail: format!(
            "sample {} vs model {} (tol {})",
            fmt_g(m),
            fmt_g(m_ref),
            fmt_g(mean_tol)
        ),
    });
    let var_tol = 0.02 * v_ref;
    checks.push(Check {
        name: "variance",
        pass: (v - v_ref).abs() <= var_tol,
        detail: format!("sample {} vs model {} (tol {})", fmt_g(v), fmt_g(v_ref), fmt_g(var_tol)),
    });

    let ks = ks_distance(&samples, p, q).map_err(numerical("ks_distance"))?;
    let ks_tol = 2.0 / n.sqrt();
    checks.push(Check {
        name: "ks_distance",
        pass: ks < ks_tol,
        detail: format!("D = {} (tol {})", fmt_g(ks), fmt_g(ks_tol)),
    });

    let h = noise.entropy(q).map_err(numerical("noise_entropy"))?;
    let h_norm = h / expected_mass + expected_mass.log2();
    let hspec = HistogramSpec::new(HISTOGRAM_BINS, support).map_err(config_err)?;
    let checks_entropy = match empirical_entropy(&samples, &hspec) {
        Ok(est) => Check {
            name: "entropy",
            pass: (est.bits - h_norm).abs() <= 0.03,
            detail: format!(
                "histogram {} vs quadrature {} bits (tol 0.03)",
                fmt_g(est.bits),
                fmt_g(h_norm)
            ),
        },
        Err(e @ Error::InsufficientCoverage { .. }) => Check {
            name: "entropy",
            pass: false,
            detail: e.to_string(),
        },
        Err(e) => return Err(numerical("empirical_entropy")(e)),
    };
    checks.push(checks_entropy);
    Ok(checks)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let checks = validation_checks(cfg)?;
    let mut report = cfg.metadata_line();
    report.push('\n');
    for c in &checks {
        report.push_str(&c.to_string());
        report.push('\n');
    }
    emit(cfg, &report)?;
    match checks.iter().filter(|c| !c.pass).count() {
        0 => Ok(()),
        failed => Err(CliError::ValidationFailed(failed)),
    }
}

/// Parses `args`, runs the command, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let outcome = RunConfig::resolve(cli.command, &cli.flags).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcnoise: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(command: Command, flags: Flags) -> Result<RunConfig, CliError> {
        RunConfig::resolve(command, &flags)
    }

    #[test]
    fn formats_twelve_significant_digits() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(-0.0), "0");
        assert_eq!(fmt_g(5.0), "5");
        assert_eq!(fmt_g(PI), "3.14159265359");
        assert_eq!(fmt_g(-1.5e-7), "-1.5e-07");
        assert_eq!(fmt_g(1e-5), "1e-05");
        assert_eq!(fmt_g(1e-4), "0.0001");
        assert_eq!(fmt_g(123456789012.0), "123456789012");
        assert_eq!(fmt_g(1234567890123.0), "1.23456789012e+12");
        assert_eq!(fmt_g(0.1 + 0.2), "0.3");
        assert_eq!(fmt_g(1e300), "1e+300");
    }

    #[test]
    fn defaults() {
        let cfg = resolve(Command::NoisePdf, Flags::default()).unwrap();
        assert_eq!(cfg.params, NoiseParams::reference());
        assert_eq!(cfg.est.mu_x(), PI);
        assert_eq!(cfg.mode, DensityMode::PaperLiteral);
        assert_eq!(cfg.points, 2001);
        assert_eq!(cfg.seed, 42);
        assert_eq!(resolve(Command::SweepMi, Flags::default()).unwrap().points, 65);
        let sc = resolve(Command::SweepCapacity, Flags::default()).unwrap();
        assert_eq!(sc.mode, DensityMode::Normalized);
        assert_eq!(sc.points, 256);
        assert_eq!(sc.sweep_values, DEFAULT_SIGMAS.to_vec());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "lambda = 2.0\nsigma = 4.0\nmu-x = 1.0\nmode = \"normalized\"\n").unwrap();
        let flags = Flags {
            sigma: Some(9.0),
            config: Some(path),
            ..Flags::default()
        };
        let cfg = resolve(Command::Entropy, flags).unwrap();
        assert_eq!(cfg.params.lambda, 2.0);
        assert_eq!(cfg.params.sigma, 9.0);
        assert_eq!(cfg.est.mu_x(), 1.0);
        assert_eq!(cfg.mode, DensityMode::Normalized);
    }

    #[test]
    fn config_errors_name_the_field() {
        let bad = |flags: Flags| match resolve(Command::Entropy, flags) {
            Err(CliError::Config(msg)) => msg,
            other => panic!("expected config error, got {other:?}"),
        };
        assert!(bad(Flags {
            sigma: Some(-1.0),
            ..Flags::default()
        })
        .starts_with("sigma"));
        assert!(bad(Flags {
            mu_x: Some(7.0),
            ..Flags::default()
        })
        .starts_with("mu_x"));
        assert!(bad(Flags {
            mode: Some("odd".into()),
            ..Flags::default()
        })
        .starts_with("mode"));
        assert!(bad(Flags {
            points: Some(1),
            ..Flags::default()
        })
        .starts_with("points"));
        assert!(bad(Flags {
            tol: Some(0.0),
            ..Flags::default()
        })
        .starts_with("tol"));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "lamda = 2.0\n").unwrap();
        let msg = bad(Flags {
            config: Some(path),
            ..Flags::default()
        });
        assert!(msg.contains("lamda"), "{msg}");
    }

    #[test]
    fn metadata_records_configuration() {
        let cfg = resolve(
            Command::SweepCapacity,
            Flags {
                seed: Some(7),
                ..Flags::default()
            },
        )
        .unwrap();
        let line = cfg.metadata_line();
        assert!(line.starts_with(&format!("# qcnoise {VERSION} command=sweep-capacity")));
        for key in [
            "lambda=5",
            "mu=0",
            "sigma=15",
            "mode=normalized",
            "seed=7",
            "sigmas=5,10,15,20,25",
        ] {
            assert!(line.contains(key), "{line}");
        }
    }

    #[test]
    fn noise_pdf_table_shape() {
        let cfg = resolve(
            Command::NoisePdf,
            Flags {
                points: Some(11),
                ..Flags::default()
            },
        )
        .unwrap();
        let t = build_table(&cfg).unwrap();
        let lines: Vec<&str> = t.text.lines().collect();
        assert_eq!(lines.len(), 13);
        assert!(lines[0].starts_with('#'));
        assert_eq!(lines[1], "z,f_Z,neg_fZ_log2_fZ");
    }

    #[test]
    fn normalized_at_zero_estimate_is_a_config_error() {
        let flags = Flags {
            mu_x: Some(0.0),
            mode: Some("normalized".into()),
            ..Flags::default()
        };
        let cfg = resolve(Command::Entropy, flags).unwrap();
        assert!(matches!(build_table(&cfg), Err(CliError::Config(_))));
    }
}
