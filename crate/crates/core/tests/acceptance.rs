//! Acceptance gate: every criterion at its stated tolerance and time budget.
//!
//! Runs as a plain binary (`harness = false`) so each criterion prints one
//! PASS/FAIL line regardless of output capture. Exits non-zero if any fails.

use std::f64::consts::{E, PI, TAU};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcnoise::capacity::{channel_capacity, sweep_capacity_vs_sigma, OptimizerSpec, SweepTable};
use qcnoise::mc_oracle::{empirical_entropy, ks_distance, sample_hybrid, sample_moments, HistogramSpec, SampleSpec};
use qcnoise::noise_model::{
    hybrid_moments, hybrid_pdf, moment_by_quadrature, noise_entropy, tabulate_noise, HybridNoise, NoiseParams,
    TruncationPolicy,
};
use qcnoise::quadrature::{integrate_pieces, noise_support, QuadratureSpec, DEFAULT_TAIL_MASS};
use qcnoise::signal_model::{bloch_angles, bloch_theta, received_entropy, DensityMode, RabiConfig, TransmitEstimate};
use qcnoise::Error;

const SEED: u64 = 42;
const SIGMAS: [f64; 5] = [5.0, 10.0, 15.0, 20.0, 25.0];

type Outcome = Result<(bool, String), Error>;

struct Gate {
    failed: usize,
}

impl Gate {
    fn check(&mut self, id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let pass = ok && in_time;
        if !pass {
            self.failed += 1;
        }
        let timing = format!(
            "{:.2?} of {:.1?}{}",
            elapsed,
            budget,
            if in_time { "" } else { " OVER BUDGET" }
        );
        println!(
            "{} {id:>2} {name}: {detail} [{timing}]",
            if pass { "PASS" } else { "FAIL" }
        );
    }
}

fn reference() -> NoiseParams {
    NoiseParams::reference()
}

fn truncation_equivalence() -> Outcome {
    let p100 = reference();
    let p1000 = NoiseParams::with_truncation(5.0, 0.0, 15.0, TruncationPolicy::fixed(1000))?;
    let grid = tabulate_noise(&p100, 2001, &QuadratureSpec::default())?.abscissae;
    let mut worst = 0.0f64;
    for &z in &grid {
        worst = worst.max((hybrid_pdf(z, &p100)? - hybrid_pdf(z, &p1000)?).abs());
    }
    Ok((
        worst <= 1e-12,
        format!(
            "max |f(N=100) - f(N=1000)| = {worst:.3e} over {} points (tol 1e-12)",
            grid.len()
        ),
    ))
}

fn normalization() -> Outcome {
    let spec = QuadratureSpec::default();
    let mass = |params: &NoiseParams| -> Result<f64, Error> {
        let noise = HybridNoise::new(params)?;
        let support = noise_support(params, DEFAULT_TAIL_MASS)?;
        Ok(integrate_pieces(|z| noise.pdf(z), &support.breakpoints(params.sigma, 4096), &spec)?.value)
    };
    let with_zero = mass(&reference())?;
    let exact = NoiseParams::with_truncation(5.0, 0.0, 15.0, TruncationPolicy::fixed(100).with_zero_term(false))?;
    let without_zero = mass(&exact)?;
    let target = 1.0 - (-5.0f64).exp();
    let (d1, d2) = ((with_zero - 1.0).abs(), (without_zero - target).abs());
    Ok((
        d1 <= 1e-9 && d2 <= 1e-9,
        format!("|mass - 1| = {d1:.2e}, zero term excluded |mass - (1 - e^-5)| = {d2:.2e} (tol 1e-9)"),
    ))
}

fn gaussian_limit() -> Outcome {
    let p = NoiseParams::new(1e-12, 0.0, 15.0)?;
    let h = noise_entropy(&p, &QuadratureSpec::default())?;
    let exact = 0.5 * (2.0 * PI * E * 225.0).log2();
    let d = (h - exact).abs();
    Ok((
        d <= 1e-3,
        format!("h(Z) = {h:.6} vs {exact:.6} bits, diff {d:.2e} (tol 1e-3)"),
    ))
}

fn moment_oracle() -> Outcome {
    let p = reference();
    let spec = QuadratureSpec::default();
    let (mean, var) = hybrid_moments(&p)?;
    let exact = mean == 5.0 && var == 230.0;
    let m1 = moment_by_quadrature(&p, 1, &spec)?;
    let m2 = moment_by_quadrature(&p, 2, &spec)?;
    let (dq1, dq2) = ((m1 - 5.0).abs(), (m2 - 255.0).abs());
    let samples = sample_hybrid(&p, &SampleSpec::new(1_000_000, SEED)?)?;
    let (sm, sv) = sample_moments(&samples);
    let (dm, dv) = ((sm - 5.0).abs(), (sv - 230.0).abs() / 230.0);
    Ok((
        exact && dq1 <= 1e-5 && dq2 <= 1e-5 && dm <= 0.1 && dv <= 0.02,
        format!(
            "analytic ({mean}, {var}); quadrature E[Z] err {dq1:.1e}, E[Z^2] err {dq2:.1e} (tol 1e-5); \
             MC mean {sm:.4} (tol 0.1), var {sv:.2} rel err {dv:.4} (tol 0.02)"
        ),
    ))
}

fn distribution_oracle() -> Outcome {
    let p = reference();
    let samples = sample_hybrid(&p, &SampleSpec::new(1_000_000, SEED)?)?;
    let d = ks_distance(&samples, &p, &QuadratureSpec::default())?;
    Ok((d < 0.002, format!("KS distance {d:.5} with 1e6 samples (tol 0.002)")))
}

fn entropy_oracle() -> Outcome {
    let p = reference();
    let h = noise_entropy(&p, &QuadratureSpec::default())?;
    let samples = sample_hybrid(&p, &SampleSpec::new(1_000_000, SEED)?)?;
    let hspec = HistogramSpec::new(512, noise_support(&p, DEFAULT_TAIL_MASS)?)?;
    let est = empirical_entropy(&samples, &hspec)?;
    let d = (est.bits - h).abs();
    Ok((
        d <= 0.03,
        format!(
            "histogram {:.4} vs quadrature {h:.4} bits, diff {d:.4} (tol 0.03)",
            est.bits
        ),
    ))
}

fn strictly(values: &[f64], increasing: bool) -> bool {
    values
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

fn fmt_list(values: impl Iterator<Item = f64>) -> String {
    values.map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
}

fn capacity_sweep(mode: DensityMode) -> Result<SweepTable, Error> {
    sweep_capacity_vs_sigma(
        &reference(),
        &SIGMAS,
        &QuadratureSpec::default(),
        &OptimizerSpec::default(),
        mode,
    )
}

fn trend_vs_snr(table: &SweepTable) -> Outcome {
    let rows = table.by_snr();
    let caps: Vec<f64> = rows.iter().map(|r| r.capacity_bits).collect();
    Ok((
        strictly(&caps, true),
        format!(
            "{} mode, by SNR [{}]: capacity [{}] strictly increasing",
            table.mode,
            fmt_list(rows.iter().map(|r| r.snr)),
            fmt_list(caps.iter().copied())
        ),
    ))
}

fn trend_vs_sigma(table: &SweepTable) -> Outcome {
    let caps: Vec<f64> = table.rows.iter().map(|r| r.capacity_bits).collect();
    Ok((
        strictly(&caps, false),
        format!(
            "{} mode, sigma 5..25: capacity [{}] strictly decreasing",
            table.mode,
            fmt_list(caps.iter().copied())
        ),
    ))
}

fn optimizer_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let qspec = QuadratureSpec::default();
    let ospec = OptimizerSpec::default();
    let mut worst_shift = 0.0f64;
    let mut worst_drop = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for i in 0..20 {
        let lambda = rng.random_range(0.0..=10.0);
        let sigma = rng.random_range(1.0..=30.0);
        let params = NoiseParams::new(lambda, 0.0, sigma)?;
        let cap = channel_capacity(&params, &qspec, &ospec, DensityMode::PaperLiteral)?;
        let shift = (cap.mu_x_star - cap.grid_argmax).abs() / cap.grid_step;
        let drop = cap.grid_capacity_bits - cap.capacity_bits;
        worst_shift = worst_shift.max(shift);
        worst_drop = worst_drop.max(drop);
        if shift > 1.0 || drop > 1e-9 {
            bad.push(format!("#{i} (lambda {lambda:.3}, sigma {sigma:.3})"));
        }
    }
    Ok((
        bad.is_empty(),
        format!(
            "20 random sets: max |refined - grid argmax| = {worst_shift:.3} cells (tol 1), \
             max grid - refined = {worst_drop:.2e} bits (tol 1e-9){}",
            if bad.is_empty() {
                String::new()
            } else {
                format!("; violations: {}", bad.join(", "))
            }
        ),
    ))
}

fn scaling_identity() -> Outcome {
    let p = reference();
    let spec = QuadratureSpec::default();
    let est = TransmitEstimate::new(PI)?;
    let literal = received_entropy(est, &p, &spec, DensityMode::PaperLiteral)?;
    let normalized = received_entropy(est, &p, &spec, DensityMode::Normalized)?;
    let c = PI * TAU * HybridNoise::new(&p)?.mass();
    let predicted = c * normalized - c * c.log2();
    let d = (literal - predicted).abs();
    Ok((
        d <= 1e-6,
        format!("h_literal {literal:.9} vs c*h_norm - c*log2(c) {predicted:.9}, diff {d:.2e} bits (tol 1e-6)"),
    ))
}

fn bloch_domain() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut configs = Vec::with_capacity(10_100);
    for _ in 0..10_000 {
        let omega_g = rng.random_range(0.1..10.0);
        let ratio: f64 = rng.random_range(0.01..=1.0);
        let t = rng.random_range(0.0..20.0);
        configs.push(RabiConfig::new(ratio * omega_g, omega_g, t)?);
    }
    // Points on the singular set: zero half-phase and Omega = Omega_g.
    for k in 0..50 {
        let omega_g = 0.5 + 0.1 * k as f64;
        configs.push(RabiConfig::new(0.7 * omega_g, omega_g, TAU * (k % 4) as f64 / omega_g)?);
        configs.push(RabiConfig::new(omega_g, omega_g, 0.3 + 0.01 * k as f64)?);
    }
    let mut singular = 0;
    let mut mismatches = 0;
    for cfg in &configs {
        let theta = bloch_theta(cfg);
        if !(0.0..=TAU).contains(&theta) {
            mismatches += 1;
            continue;
        }
        let expected =
            (0.5 * cfg.omega_g() * cfg.t()).sin().abs() <= 1e-12 || (1.0 - cfg.omega() / cfg.omega_g()).abs() <= 1e-12;
        let raised = matches!(bloch_angles(cfg), Err(Error::Singularity(_)));
        singular += usize::from(expected);
        if raised != expected {
            mismatches += 1;
        }
    }
    Ok((
        mismatches == 0,
        format!(
            "{} configs ({singular} singular): {mismatches} violations of theta range or Singularity rule",
            configs.len()
        ),
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let run = |name: &str| -> Result<Vec<u8>, Error> {
        let path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qcnoise"))
            .args(["sweep-capacity", "--seed", "42", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| Error::DegenerateInput(format!("spawn: {e}")))?;
        if !status.success() {
            return Err(Error::DegenerateInput(format!("sweep-capacity exited with {status}")));
        }
        std::fs::read(&path).map_err(|e| Error::DegenerateInput(e.to_string()))
    };
    let a = run("first.csv")?;
    let b = run("second.csv")?;
    Ok((
        a == b && !a.is_empty(),
        format!("two sweep-capacity runs: {} bytes, identical = {}", a.len(), a == b),
    ))
}

fn main() -> ExitCode {
    let mut gate = Gate { failed: 0 };
    let secs = Duration::from_secs;

    gate.check(1, "truncation equivalence", secs(1), truncation_equivalence);
    gate.check(2, "normalization", secs(1), normalization);
    gate.check(3, "Gaussian limit", secs(1), gaussian_limit);
    gate.check(4, "moment oracle", secs(10), moment_oracle);
    gate.check(5, "distribution oracle", secs(30), distribution_oracle);
    gate.check(6, "entropy oracle", secs(30), entropy_oracle);

    // Criteria 7 and 8 share one sweep and one budget.
    let start = Instant::now();
    let sweep = capacity_sweep(DensityMode::Normalized);
    let shared = start.elapsed();
    let budget = secs(120).saturating_sub(shared);
    match &sweep {
        Ok(table) => {
            gate.check(7, "capacity increases with SNR", budget, || trend_vs_snr(table));
            gate.check(8, "capacity decreases with noise power", budget, || {
                trend_vs_sigma(table)
            });
        }
        Err(e) => {
            let msg = e.to_string();
            gate.check(7, "capacity increases with SNR", budget, || {
                Err(Error::DegenerateInput(msg.clone()))
            });
            gate.check(8, "capacity decreases with noise power", budget, || {
                Err(Error::DegenerateInput(msg))
            });
        }
    }
    println!("     (shared sigma sweep took {shared:.2?})");
    if let Ok(literal) = capacity_sweep(DensityMode::PaperLiteral) {
        let caps = fmt_list(literal.rows.iter().map(|r| r.capacity_bits));
        println!("INFO  paper-literal mode, sigma 5..25: capacity [{caps}] (not a density; trend reverses)");
    }

    gate.check(9, "optimizer consistency", secs(300), optimizer_consistency);
    gate.check(10, "entropy scaling identity", secs(30), scaling_identity);
    gate.check(11, "Bloch-angle domain", secs(1), bloch_domain);
    gate.check(12, "CLI determinism", secs(120), determinism);

    println!("{} of 12 criteria passed", 12 - gate.failed);
    if gate.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
