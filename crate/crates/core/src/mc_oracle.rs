//! Seeded Monte-Carlo sampler and the statistics used to check the analytic
//! pipeline against it.
//!
//! Samples are produced in fixed-size chunks. Chunk `i` draws from its own
//! ChaCha8 stream `i` under the user seed, so the output depends only on
//! `(params, seed, n_samples)` and never on how many threads ran.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise_model::{HybridNoise, NoiseParams};
use crate::quadrature::{gauss_legendre10, integrate, Interval, QuadratureSpec, DEFAULT_TAIL_MASS};

/// Samples per independent substream.
pub const CHUNK: usize = 1 << 16;

/// Largest rate sampled by CDF inversion.
const INVERSION_MAX_RATE: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSpec {
    pub n_samples: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(n_samples: usize, seed: u64) -> Result<Self> {
        if n_samples == 0 {
            return Err(Error::invalid("samples", "need at least one sample"));
        }
        Ok(SampleSpec { n_samples, seed })
    }
}

/// Generator for substream `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

enum CountSampler {
    Inversion(f64),
    Library(Poisson<f64>),
}

impl CountSampler {
    fn new(lambda: f64) -> Result<Self> {
        if lambda <= INVERSION_MAX_RATE {
            Ok(CountSampler::Inversion(lambda))
        } else {
            Poisson::new(lambda)
                .map(CountSampler::Library)
                .map_err(|e| Error::invalid("lambda", e.to_string()))
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> u64 {
        match self {
            CountSampler::Inversion(lambda) => {
                let u: f64 = rng.random();
                let mut k = 0u64;
                let mut p = (-lambda).exp();
                let mut cdf = p;
                while u > cdf && p > 0.0 {
                    k += 1;
                    p *= lambda / k as f64;
                    cdf += p;
                }
                k
            }
            CountSampler::Library(dist) => dist.sample(rng) as u64,
        }
    }
}

/// Draws `Poisson(lambda) + Normal(mu, sigma^2)` samples.
///
/// Counts outside the kept mixture range are redrawn, so the samples follow
/// the truncated model normalized to unit mass. Without the zero-count term
/// this is plain rejection of zero draws.
pub fn sample_hybrid(params: &NoiseParams, spec: &SampleSpec) -> Result<Vec<f64>> {
    let noise = HybridNoise::new(params)?;
    if spec.n_samples == 0 {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    let (first, last) = (noise.first_term(), noise.last_term());
    let counts = CountSampler::new(params.lambda)?;
    let (mu, sigma) = (params.mu, params.sigma);

    let n_chunks = spec.n_samples.div_ceil(CHUNK);
    let chunks: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(spec.n_samples - c * CHUNK);
            let mut rng = substream(spec.seed, c as u64);
            (0..len)
                .map(|_| {
                    let n = loop {
                        let n = counts.draw(&mut rng);
                        if (first..=last).contains(&n) {
                            break n;
                        }
                    };
                    let g: f64 = rng.sample(StandardNormal);
                    n as f64 + mu + sigma * g
                })
                .collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Sample mean and unbiased variance.
pub fn sample_moments(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = if samples.len() > 1 { ss / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// Normalized distribution function of the noise, built by cumulative
/// quadrature of its density.
///
/// Knots sit a quarter standard deviation apart; a value between knots adds a
/// 10-point Gauss-Legendre piece to the cumulative sum at the left knot.
#[derive(Debug, Clone)]
pub struct ModelCdf {
    noise: HybridNoise,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl ModelCdf {
    pub fn new(params: &NoiseParams, spec: &QuadratureSpec) -> Result<Self> {
        let noise = HybridNoise::new(params)?;
        let support = noise.support(DEFAULT_TAIL_MASS)?;
        let knots = support.breakpoints(0.25 * params.sigma, 1 << 16);
        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(0.0);
        let mut acc = 0.0;
        for w in knots.windows(2) {
            acc += integrate(|z| noise.pdf(z), Interval::new(w[0], w[1])?, spec)?.value;
            cumulative.push(acc);
        }
        Ok(ModelCdf {
            noise,
            knots,
            cumulative,
            total: acc,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = (self.knots[0], self.knots[self.knots.len() - 1]);
        if x <= lo {
            return 0.0;
        }
        if x >= hi {
            return 1.0;
        }
        let j = self.knots.partition_point(|&k| k <= x) - 1;
        let piece = gauss_legendre10(|z| self.noise.pdf(z), self.knots[j], x);
        ((self.cumulative[j] + piece) / self.total).min(1.0)
    }
}

/// Kolmogorov-Smirnov statistic between `samples` and the model distribution.
pub fn ks_distance(samples: &[f64], params: &NoiseParams, spec: &QuadratureSpec) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(Error::invalid("samples", format!("non-finite sample {bad}")));
    }
    let cdf = ModelCdf::new(params, spec)?;
    let mut sorted = samples.to_vec();
    sorted.par_sort_unstable_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let d = sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf.eval(x);
            let above = (i as f64 + 1.0) / n - f;
            let below = f - i as f64 / n;
            above.max(below)
        })
        .reduce(|| 0.0, f64::max);
    Ok(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramSpec {
    pub n_bins: usize,
    pub range: Interval,
}

impl HistogramSpec {
    pub fn new(n_bins: usize, range: Interval) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::invalid("n_bins", format!("need at least 2 bins, got {n_bins}")));
        }
        Ok(HistogramSpec { n_bins, range })
    }

    pub fn bin_width(&self) -> f64 {
        self.range.width() / self.n_bins as f64
    }
}

/// Plug-in entropy estimate with the diagnostics needed to judge it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramEntropy {
    pub bits: f64,
    pub bin_width: f64,
    pub outside: usize,
    pub occupied_bins: usize,
    /// All in-range samples landed in one bin; `bits` is then just `log2(bin_width)`.
    pub degenerate: bool,
}

/// `-sum p_i log2(p_i / width)` over histogram bins.
///
/// Biased upward by roughly `O(width^2)` from binning and by
/// `(bins - 1) / (2 n ln 2)` from finite counts.
pub fn empirical_entropy(samples: &[f64], hspec: &HistogramSpec) -> Result<HistogramEntropy> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    let width = hspec.bin_width();
    let lo = hspec.range.lo();
    let mut counts = vec![0usize; hspec.n_bins];
    let mut outside = 0;
    for &x in samples {
        if !hspec.range.contains(x) {
            outside += 1;
            continue;
        }
        let idx = (((x - lo) / width) as usize).min(hspec.n_bins - 1);
        counts[idx] += 1;
    }
    // More than 0.1% outside the range.
    if outside * 1000 > samples.len() {
        return Err(Error::InsufficientCoverage {
            outside,
            total: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let bits = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * (p / width).log2()
        })
        .sum();
    let occupied_bins = counts.iter().filter(|&&c| c > 0).count();
    Ok(HistogramEntropy {
        bits,
        bin_width: width,
        outside,
        occupied_bins,
        degenerate: occupied_bins == 1,
    })
}
