//! Hybrid classical-quantum noise `Z = N1 + N2` with `N1 ~ Poisson(lambda)`
//! and `N2 ~ Normal(mu, sigma^2)`.
//!
//! The density of `Z` is the Poisson-weighted mixture of shifted Gaussians
//!
//! ```text
//! f_Z(z) = sum_n  e^{-lambda} lambda^n / n!  *  phi((z - n - mu) / sigma) / sigma
//! ```
//!
//! truncated to a finite range of `n`. The sum is evaluated in log space with
//! a max shift so far-tail arguments stay finite.
//!
//! Whether the `n = 0` term is part of the sum is a switch on
//! [`TruncationPolicy`]. With it (the default) `f_Z` is a proper density;
//! without it the mixture starts at `n = 1` and carries mass `1 - e^{-lambda}`.

use std::f64::consts::{LN_2, PI};

use libm::{erfc, lgamma};

use crate::error::{Error, Result};
use crate::quadrature::{gaussian_reach, integrate_pieces, Interval, QuadratureSpec, DEFAULT_TAIL_MASS};

/// Upper bound on initial quadrature pieces across a support.
pub(crate) const MAX_PIECES: usize = 4096;

/// How many Poisson terms the mixture keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Terms up to and including `n = N`.
    FixedTerms(u32),
    /// Smallest `N` whose Poisson upper tail beyond `N` is at most `epsilon`.
    TailBound(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub mode: Truncation,
    pub include_zero_term: bool,
}

impl TruncationPolicy {
    pub fn fixed(terms: u32) -> Self {
        TruncationPolicy {
            mode: Truncation::FixedTerms(terms),
            include_zero_term: true,
        }
    }

    pub fn tail_bound(epsilon: f64) -> Self {
        TruncationPolicy {
            mode: Truncation::TailBound(epsilon),
            include_zero_term: true,
        }
    }

    /// The same policy with the `n = 0` term switched on or off.
    pub fn with_zero_term(mut self, include: bool) -> Self {
        self.include_zero_term = include;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Truncation::FixedTerms(0) => Err(Error::invalid("trunc_n", "need at least one term")),
            Truncation::TailBound(eps) if !(eps > 0.0 && eps < 1.0) => {
                Err(Error::invalid("tail_bound", format!("must lie in (0, 1), got {eps}")))
            }
            _ => Ok(()),
        }
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy::fixed(100)
    }
}

/// Full parameterization of the hybrid noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub lambda: f64,
    pub mu: f64,
    pub sigma: f64,
    pub trunc: TruncationPolicy,
}

impl NoiseParams {
    pub fn new(lambda: f64, mu: f64, sigma: f64) -> Result<Self> {
        Self::with_truncation(lambda, mu, sigma, TruncationPolicy::default())
    }

    pub fn with_truncation(lambda: f64, mu: f64, sigma: f64, trunc: TruncationPolicy) -> Result<Self> {
        let params = NoiseParams {
            lambda,
            mu,
            sigma,
            trunc,
        };
        params.validate()?;
        Ok(params)
    }

    /// `lambda = 5`, `mu = 0`, `sigma = 15`, first 100 Poisson terms plus `n = 0`.
    pub fn reference() -> Self {
        NoiseParams {
            lambda: 5.0,
            mu: 0.0,
            sigma: 15.0,
            trunc: TruncationPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                format!("must be finite and >= 0, got {}", self.lambda),
            ));
        }
        if !self.mu.is_finite() {
            return Err(Error::invalid("mu", "must be finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("must be finite and > 0, got {}", self.sigma),
            ));
        }
        self.trunc.validate()
    }
}

/// `e^{-lambda} lambda^n / n!`, computed through `ln Gamma(n + 1)`.
pub fn poisson_pmf(n: u64, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(
            "lambda",
            format!("must be finite and >= 0, got {lambda}"),
        ));
    }
    Ok(ln_poisson(n, lambda).exp())
}

fn ln_poisson(n: u64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let n = n as f64;
    n * lambda.ln() - lambda - lgamma(n + 1.0)
}

pub fn gaussian_pdf(t: f64, mu: f64, sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::invalid("sigma", format!("must be finite and > 0, got {sigma}")));
    }
    let u = (t - mu) / sigma;
    Ok((-0.5 * u * u).exp() / (sigma * (2.0 * PI).sqrt()))
}

pub(crate) fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(a < N(0,1) < b)` without cancellation in either tail.
pub(crate) fn std_normal_mass(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    if a >= 0.0 {
        0.5 * (erfc(a * r) - erfc(b * r))
    } else if b <= 0.0 {
        0.5 * (erfc(-b * r) - erfc(-a * r))
    } else {
        1.0 - 0.5 * erfc(-a * r) - 0.5 * erfc(b * r)
    }
}

/// `-f log2 f` given `ln f`, with `0 log 0 = 0`.
pub(crate) fn neg_plog2p_from_ln(ln_f: f64) -> f64 {
    if ln_f == f64::NEG_INFINITY {
        0.0
    } else {
        -ln_f.exp() * ln_f / LN_2
    }
}

/// `-f log2 f`, with `0 log 0 = 0`.
pub(crate) fn neg_plog2p(f: f64) -> f64 {
    if f > 0.0 {
        -f * f.log2()
    } else {
        0.0
    }
}

/// The mixture with its Poisson log-weights resolved once.
///
/// Every density-level operation in the crate goes through this type so the
/// weights are not recomputed per evaluation.
#[derive(Debug, Clone)]
pub struct HybridNoise {
    params: NoiseParams,
    first: u64,
    log_weights: Vec<f64>,
    weights: Vec<f64>,
    ln_norm: f64,
}

impl HybridNoise {
    pub fn new(params: &NoiseParams) -> Result<Self> {
        params.validate()?;
        let first = if params.trunc.include_zero_term { 0 } else { 1 };
        let top = if params.lambda == 0.0 {
            if first == 1 {
                return Err(Error::DegenerateInput(
                    "lambda = 0 without the zero-count term leaves no probability mass".into(),
                ));
            }
            0
        } else {
            match params.trunc.mode {
                Truncation::FixedTerms(n) => u64::from(n),
                Truncation::TailBound(eps) => poisson_tail_index(params.lambda, eps),
            }
            .max(first)
        };
        let log_weights: Vec<f64> = (first..=top).map(|n| ln_poisson(n, params.lambda)).collect();
        let weights = log_weights.iter().map(|lw| lw.exp()).collect();
        Ok(HybridNoise {
            params: *params,
            first,
            log_weights,
            weights,
            ln_norm: (params.sigma * (2.0 * PI).sqrt()).ln(),
        })
    }

    pub fn params(&self) -> &NoiseParams {
        &self.params
    }

    /// Index of the first mixture term (0 or 1).
    pub fn first_term(&self) -> u64 {
        self.first
    }

    /// Index of the last mixture term.
    pub fn last_term(&self) -> u64 {
        self.first + self.log_weights.len() as u64 - 1
    }

    /// Sum of the kept Poisson weights, which is the total mass of `f_Z`.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        let mu = self.params.mu;
        (self.first..).map(move |n| n as f64 + mu)
    }

    pub fn log_pdf(&self, z: f64) -> f64 {
        let inv_sigma = 1.0 / self.params.sigma;
        let exponent = |lw: f64, c: f64| {
            let u = (z - c) * inv_sigma;
            lw - 0.5 * u * u
        };
        let max = self
            .log_weights
            .iter()
            .zip(self.centers())
            .map(|(&lw, c)| exponent(lw, c))
            .fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = self
            .log_weights
            .iter()
            .zip(self.centers())
            .map(|(&lw, c)| (exponent(lw, c) - max).exp())
            .sum();
        max + sum.ln() - self.ln_norm
    }

    pub fn pdf(&self, z: f64) -> f64 {
        self.log_pdf(z).exp()
    }

    /// Closed-form distribution function `sum_n w_n Phi((z - n - mu) / sigma)`,
    /// not normalized by [`HybridNoise::mass`].
    pub fn cdf_closed_form(&self, z: f64) -> f64 {
        let s = self.params.sigma;
        self.weights
            .iter()
            .zip(self.centers())
            .map(|(w, c)| w * std_normal_cdf((z - c) / s))
            .sum()
    }

    /// `integral_{y - width}^{y} f_Z(u) du`, exactly, via Gaussian CDF differences.
    pub fn window_mass(&self, y: f64, width: f64) -> f64 {
        let s = self.params.sigma;
        self.weights
            .iter()
            .zip(self.centers())
            .map(|(w, c)| w * std_normal_mass((y - width - c) / s, (y - c) / s))
            .sum()
    }

    /// See [`crate::quadrature::noise_support`].
    pub fn support(&self, tail_mass: f64) -> Result<Interval> {
        let k = gaussian_reach(tail_mass)?;
        let s = self.params.sigma;
        let lo = self.params.mu + self.first as f64 - k * s;
        let hi = self.params.mu + self.last_term() as f64 + k * s;
        Interval::new(lo, hi)
    }

    /// Quadrature breakpoints over `iv`, one piece per standard deviation.
    pub(crate) fn pieces(&self, iv: Interval) -> Vec<f64> {
        iv.breakpoints(self.params.sigma, MAX_PIECES)
    }

    pub fn entropy(&self, spec: &QuadratureSpec) -> Result<f64> {
        let iv = self.support(DEFAULT_TAIL_MASS)?;
        let est = integrate_pieces(|z| neg_plog2p_from_ln(self.log_pdf(z)), &self.pieces(iv), spec)?;
        Ok(est.value)
    }

    /// `integral z^k f_Z(z) dz` over the truncated support.
    pub fn raw_moment(&self, k: u32, spec: &QuadratureSpec) -> Result<f64> {
        let iv = self.support(DEFAULT_TAIL_MASS)?;
        let est = integrate_pieces(|z| z.powi(k as i32) * self.pdf(z), &self.pieces(iv), spec)?;
        Ok(est.value)
    }

    /// Mean and variance of the normalized density, by quadrature.
    pub fn moments_by_quadrature(&self, spec: &QuadratureSpec) -> Result<(f64, f64)> {
        let m0 = self.raw_moment(0, spec)?;
        let m1 = self.raw_moment(1, spec)? / m0;
        let m2 = self.raw_moment(2, spec)? / m0;
        Ok((m1, m2 - m1 * m1))
    }
}

/// Smallest `n >= lambda` with `P(N > n) <= eps` for `N ~ Poisson(lambda)`,
/// using `P(N > n) <= p(n+1) / (1 - lambda / (n + 2))`.
fn poisson_tail_index(lambda: f64, eps: f64) -> u64 {
    let ln_eps = eps.ln();
    let mut n = lambda.ceil() as u64;
    loop {
        let ratio = lambda / (n as f64 + 2.0);
        let bound = ln_poisson(n + 1, lambda) - (1.0 - ratio).ln();
        if ratio < 1.0 && bound <= ln_eps {
            return n;
        }
        n += 1;
    }
}

pub fn hybrid_log_pdf(z: f64, params: &NoiseParams) -> Result<f64> {
    Ok(HybridNoise::new(params)?.log_pdf(z))
}

pub fn hybrid_pdf(z: f64, params: &NoiseParams) -> Result<f64> {
    Ok(HybridNoise::new(params)?.pdf(z))
}

/// Analytic mean and variance of the untruncated model: `(lambda + mu, lambda + sigma^2)`.
///
/// The variance is the ordinary `E[Z^2] - E[Z]^2`.
pub fn hybrid_moments(params: &NoiseParams) -> Result<(f64, f64)> {
    params.validate()?;
    if !params.trunc.include_zero_term {
        return Err(Error::UnsupportedMode("analytic moments"));
    }
    Ok((params.lambda + params.mu, params.lambda + params.sigma * params.sigma))
}

/// Raw moment `integral z^k f_Z(z) dz` for `k` in `{1, 2}`.
pub fn moment_by_quadrature(params: &NoiseParams, k: u32, spec: &QuadratureSpec) -> Result<f64> {
    if !(1..=2).contains(&k) {
        return Err(Error::invalid("k", format!("moment order must be 1 or 2, got {k}")));
    }
    HybridNoise::new(params)?.raw_moment(k, spec)
}

/// Differential entropy `h(Z)` in bits.
pub fn noise_entropy(params: &NoiseParams, spec: &QuadratureSpec) -> Result<f64> {
    HybridNoise::new(params)?.entropy(spec)
}

/// `f_Z` and `-f_Z log2 f_Z` sampled on a uniform grid over the noise support.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    pub support: Interval,
    pub abscissae: Vec<f64>,
    pub densities: Vec<f64>,
    pub entropy_integrand: Vec<f64>,
    /// Trapezoidal mass of the table.
    pub total_mass: f64,
    /// Adaptive-quadrature mass over the same support.
    pub quadrature_mass: f64,
}

impl TabulatedDensity {
    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }
}

pub(crate) fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

pub fn tabulate_noise(params: &NoiseParams, n_points: usize, spec: &QuadratureSpec) -> Result<TabulatedDensity> {
    if n_points < 2 {
        return Err(Error::invalid(
            "points",
            format!("need at least 2 grid points, got {n_points}"),
        ));
    }
    let noise = HybridNoise::new(params)?;
    let support = noise.support(DEFAULT_TAIL_MASS)?;
    let step = support.width() / (n_points - 1) as f64;
    let abscissae: Vec<f64> = (0..n_points)
        .map(|i| {
            if i + 1 == n_points {
                support.hi()
            } else {
                support.lo() + step * i as f64
            }
        })
        .collect();
    let log_densities: Vec<f64> = abscissae.iter().map(|&z| noise.log_pdf(z)).collect();
    let densities: Vec<f64> = log_densities.iter().map(|l| l.exp()).collect();
    let entropy_integrand = log_densities.iter().map(|&l| neg_plog2p_from_ln(l)).collect();
    let total_mass = trapezoid(&abscissae, &densities);
    let quadrature_mass = integrate_pieces(|z| noise.pdf(z), &noise.pieces(support), spec)?.value;
    Ok(TabulatedDensity {
        support,
        abscissae,
        densities,
        entropy_integrand,
        total_mass,
        quadrature_mass,
    })
}
