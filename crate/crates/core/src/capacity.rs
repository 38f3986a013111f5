//! Mutual information, capacity and the parameter sweeps built on them.
//!
//! `I(X;Y) = h(Y) - h(Z)`, the noise being independent of the transmit
//! signal. Capacity is the maximum of `I` over the point estimate `mu_x` in
//! `[0, 2pi]`, found by a coarse grid followed by golden-section refinement of
//! the cell pair around the grid argmax.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise_model::{hybrid_moments, HybridNoise, NoiseParams};
use crate::quadrature::QuadratureSpec;
use crate::signal_model::{DensityMode, ReceivedSignal, TransmitEstimate, WINDOW};

/// Golden-ratio conjugate `(sqrt 5 - 1) / 2`.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSpec {
    pub grid_points: usize,
    pub refine_tol: f64,
    pub max_refine_iters: usize,
}

impl OptimizerSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 8 {
            return Err(Error::invalid(
                "grid_points",
                format!("need at least 8, got {}", self.grid_points),
            ));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol.is_finite()) {
            return Err(Error::invalid("refine_tol", "must be positive and finite"));
        }
        Ok(())
    }

    /// Spacing of the coarse grid over `[0, 2pi]`.
    pub fn grid_step(&self) -> f64 {
        WINDOW / (self.grid_points - 1) as f64
    }

    pub fn grid_abscissa(&self, k: usize) -> f64 {
        if k + 1 == self.grid_points {
            WINDOW
        } else {
            WINDOW * k as f64 / (self.grid_points - 1) as f64
        }
    }
}

impl Default for OptimizerSpec {
    fn default() -> Self {
        OptimizerSpec {
            grid_points: 256,
            refine_tol: 1e-6,
            max_refine_iters: 200,
        }
    }
}

/// `mu_x -> I(X;Y)` for a fixed noise model, with `h(Z)` computed once.
#[derive(Debug, Clone)]
pub struct MutualInformation {
    noise: HybridNoise,
    noise_entropy: f64,
    spec: QuadratureSpec,
    mode: DensityMode,
}

impl MutualInformation {
    pub fn new(params: &NoiseParams, spec: &QuadratureSpec, mode: DensityMode) -> Result<Self> {
        let noise = HybridNoise::new(params)?;
        let noise_entropy = noise.entropy(spec)?;
        Ok(MutualInformation {
            noise,
            noise_entropy,
            spec: *spec,
            mode,
        })
    }

    pub fn mode(&self) -> DensityMode {
        self.mode
    }

    /// `h(Z)` in bits.
    pub fn noise_entropy(&self) -> f64 {
        self.noise_entropy
    }

    /// `h(Y)` in bits at `mu_x`.
    pub fn received_entropy(&self, mu_x: f64) -> Result<f64> {
        let est = TransmitEstimate::new(mu_x)?;
        ReceivedSignal::new(self.noise.clone(), est, self.mode)?.entropy(&self.spec)
    }

    pub fn at(&self, mu_x: f64) -> Result<f64> {
        Ok(self.received_entropy(mu_x)? - self.noise_entropy)
    }
}

pub fn mutual_information(
    est: TransmitEstimate,
    params: &NoiseParams,
    spec: &QuadratureSpec,
    mode: DensityMode,
) -> Result<f64> {
    MutualInformation::new(params, spec, mode)?.at(est.mu_x())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub mode: DensityMode,
    pub mu_x_star: f64,
    pub capacity_bits: f64,
    /// Every `(mu_x, I)` evaluated, sorted by `mu_x`.
    pub mi_curve: Vec<(f64, f64)>,
    pub evaluations: usize,
    pub grid_argmax: f64,
    pub grid_capacity_bits: f64,
    pub grid_step: f64,
    pub noise_entropy_bits: f64,
    /// Set when the refined optimum sits on an interior edge of its bracket,
    /// which hints that the grid missed a separate peak.
    pub non_unimodal: bool,
}

pub fn channel_capacity(
    params: &NoiseParams,
    qspec: &QuadratureSpec,
    ospec: &OptimizerSpec,
    mode: DensityMode,
) -> Result<CapacityResult> {
    ospec.validate()?;
    let mi = MutualInformation::new(params, qspec, mode)?;
    maximize(&mi, ospec)
}

fn maximize(mi: &MutualInformation, ospec: &OptimizerSpec) -> Result<CapacityResult> {
    // mu_x = 0 has no normalized density.
    let first = match mi.mode {
        DensityMode::PaperLiteral => 0,
        DensityMode::Normalized => 1,
    };
    let grid: Vec<f64> = (first..ospec.grid_points).map(|k| ospec.grid_abscissa(k)).collect();
    let values = grid.par_iter().map(|&x| mi.at(x)).collect::<Result<Vec<f64>>>()?;

    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    let grid_argmax = grid[best];
    let grid_capacity = values[best];

    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let mut curve: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    let (mut x_star, mut c_star) = (grid_argmax, grid_capacity);
    let mut non_unimodal = false;

    if hi > lo {
        let mut eval = |x: f64| -> Result<f64> {
            let v = mi.at(x)?;
            curve.push((x, v));
            if v > c_star {
                x_star = x;
                c_star = v;
            }
            Ok(v)
        };
        let (a, b) = golden_section_max(&mut eval, lo, hi, ospec.refine_tol, ospec.max_refine_iters)?;
        let at_interior_edge = |edge: f64| edge > 0.0 && edge < WINDOW;
        non_unimodal = (a == lo && at_interior_edge(lo) && x_star < lo + ospec.refine_tol)
            || (b == hi && at_interior_edge(hi) && x_star > hi - ospec.refine_tol);
    }

    let evaluations = curve.len();
    curve.sort_by(|p, q| p.0.total_cmp(&q.0));
    Ok(CapacityResult {
        mode: mi.mode,
        mu_x_star: x_star,
        capacity_bits: c_star,
        mi_curve: curve,
        evaluations,
        grid_argmax,
        grid_capacity_bits: grid_capacity,
        grid_step: ospec.grid_step(),
        noise_entropy_bits: mi.noise_entropy,
        non_unimodal,
    })
}

/// Shrinks `[lo, hi]` around a maximum of `f` until narrower than `tol`.
/// Ties keep the left point. Returns the final bracket.
pub fn golden_section_max<F>(f: &mut F, lo: f64, hi: f64, tol: f64, max_iters: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..max_iters {
        if b - a <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok((a, b))
}

/// `mu_Y / sigma_Z`.
pub fn snr(est: TransmitEstimate, params: &NoiseParams, spec: &QuadratureSpec) -> Result<f64> {
    let noise = HybridNoise::new(params)?;
    let variance = if params.trunc.include_zero_term {
        hybrid_moments(params)?.1
    } else {
        noise.moments_by_quadrature(spec)?.1
    };
    let mean = ReceivedSignal::new(noise, est, DensityMode::PaperLiteral)?.mean(spec)?;
    Ok(mean / variance.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiPoint {
    pub mu_x: f64,
    pub mi_bits: f64,
    /// `mu_x = 0` in normalized mode, where the value is the limit from above.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiCurve {
    pub mode: DensityMode,
    pub rows: Vec<MiPoint>,
}

impl MiCurve {
    pub fn max(&self) -> Option<MiPoint> {
        self.rows.iter().copied().fold(None, |acc, p| match acc {
            Some(b) if b.mi_bits >= p.mi_bits => Some(b),
            _ => Some(p),
        })
    }
}

/// `I(X;Y)` on a uniform `mu_x` grid over `[0, 2pi]`.
pub fn sweep_mi_vs_mux(
    params: &NoiseParams,
    qspec: &QuadratureSpec,
    n_points: usize,
    mode: DensityMode,
) -> Result<MiCurve> {
    if n_points < 2 {
        return Err(Error::invalid(
            "points",
            format!("need at least 2 grid points, got {n_points}"),
        ));
    }
    let mi = MutualInformation::new(params, qspec, mode)?;
    let rows = (0..n_points)
        .into_par_iter()
        .map(|k| {
            let mu_x = if k + 1 == n_points {
                WINDOW
            } else {
                WINDOW * k as f64 / (n_points - 1) as f64
            };
            let degenerate = mu_x == 0.0 && mode == DensityMode::Normalized;
            // The normalized density does not depend on mu_x.
            let at = if degenerate { WINDOW } else { mu_x };
            Ok(MiPoint {
                mu_x,
                mi_bits: mi.at(at)?,
                degenerate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MiCurve { mode, rows })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Sigma,
    Lambda,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::Sigma => "sigma",
            SweepVariable::Lambda => "lambda",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub capacity_bits: f64,
    pub snr: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub mu_x_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub variable: SweepVariable,
    pub mode: DensityMode,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows re-ordered by increasing SNR.
    pub fn by_snr(&self) -> Vec<SweepRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| a.snr.total_cmp(&b.snr));
        rows
    }
}

fn check_increasing(field: &'static str, values: &[f64], positive: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(field, "sweep needs at least one value"));
    }
    if values
        .iter()
        .any(|v| !v.is_finite() || (positive && *v <= 0.0) || *v < 0.0)
    {
        return Err(Error::invalid(field, "sweep values must be finite and in range"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(field, "sweep values must be strictly increasing"));
    }
    Ok(())
}

fn sweep(
    variable: SweepVariable,
    models: Vec<(f64, NoiseParams)>,
    qspec: &QuadratureSpec,
    ospec: &OptimizerSpec,
    mode: DensityMode,
) -> Result<SweepTable> {
    ospec.validate()?;
    let rows = models
        .into_par_iter()
        .map(|(x, params)| {
            let cap = channel_capacity(&params, qspec, ospec, mode)?;
            let snr = snr(TransmitEstimate::new(cap.mu_x_star)?, &params, qspec)?;
            Ok(SweepRow {
                x,
                capacity_bits: cap.capacity_bits,
                snr,
                sigma: params.sigma,
                lambda: params.lambda,
                mu_x_star: cap.mu_x_star,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { variable, mode, rows })
}

/// Capacity for each `sigma`, other noise parameters taken from `base`.
pub fn sweep_capacity_vs_sigma(
    base: &NoiseParams,
    sigma_values: &[f64],
    qspec: &QuadratureSpec,
    ospec: &OptimizerSpec,
    mode: DensityMode,
) -> Result<SweepTable> {
    check_increasing("sigmas", sigma_values, true)?;
    let models = sigma_values
        .iter()
        .map(|&sigma| {
            Ok((
                sigma,
                NoiseParams::with_truncation(base.lambda, base.mu, sigma, base.trunc)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    sweep(SweepVariable::Sigma, models, qspec, ospec, mode)
}

/// Capacity for each `lambda`, other noise parameters taken from `base`.
pub fn sweep_capacity_vs_lambda(
    base: &NoiseParams,
    lambda_values: &[f64],
    qspec: &QuadratureSpec,
    ospec: &OptimizerSpec,
    mode: DensityMode,
) -> Result<SweepTable> {
    check_increasing("lambdas", lambda_values, false)?;
    let models = lambda_values
        .iter()
        .map(|&lambda| {
            Ok((
                lambda,
                NoiseParams::with_truncation(lambda, base.mu, base.sigma, base.trunc)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    sweep(SweepVariable::Lambda, models, qspec, ospec, mode)
}
