//! Received signal under the point-estimate transmit model.
//!
//! The transmit signal is represented only by its mean `mu_x` in `[0, 2pi]`,
//! and the received density is
//!
//! ```text
//! f_Y(y) = mu_x * integral_0^{2pi} f_Z(y - t) dt
//! ```
//!
//! which has total mass `2pi * mu_x * mass(f_Z)`. [`DensityMode::PaperLiteral`]
//! keeps that scaling; [`DensityMode::Normalized`] divides it out. The window
//! integral is exact: each Gaussian component integrates to a difference of
//! normal CDFs.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::noise_model::{neg_plog2p, HybridNoise, NoiseParams};
use crate::quadrature::{integrate_pieces, Interval, QuadratureSpec, DEFAULT_TAIL_MASS};

/// Width of the transmit window `[0, 2pi]`.
pub const WINDOW: f64 = TAU;

/// Tolerance used by the angle maps for grazing domain edges and singular sets.
pub const ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DensityMode {
    /// `f_Y` divided by its total mass.
    Normalized,
    /// `f_Y` exactly as the point-estimate formula gives it.
    PaperLiteral,
}

impl DensityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DensityMode::Normalized => "normalized",
            DensityMode::PaperLiteral => "paper-literal",
        }
    }
}

impl fmt::Display for DensityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DensityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(DensityMode::Normalized),
            "paper-literal" | "paper_literal" | "literal" => Ok(DensityMode::PaperLiteral),
            other => Err(Error::invalid(
                "mode",
                format!("expected `normalized` or `paper-literal`, got `{other}`"),
            )),
        }
    }
}

/// Point estimate of the transmit signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitEstimate {
    mu_x: f64,
}

impl TransmitEstimate {
    pub fn new(mu_x: f64) -> Result<Self> {
        if !(0.0..=WINDOW).contains(&mu_x) {
            return Err(Error::invalid("mu_x", format!("must lie in [0, 2pi], got {mu_x}")));
        }
        Ok(TransmitEstimate { mu_x })
    }

    pub fn mu_x(&self) -> f64 {
        self.mu_x
    }
}

/// `f_Y` for one transmit estimate, noise model and mode.
#[derive(Debug, Clone)]
pub struct ReceivedSignal {
    noise: HybridNoise,
    mu_x: f64,
    mode: DensityMode,
    scale: f64,
}

impl ReceivedSignal {
    pub fn new(noise: HybridNoise, est: TransmitEstimate, mode: DensityMode) -> Result<Self> {
        let scale = match mode {
            DensityMode::PaperLiteral => est.mu_x,
            DensityMode::Normalized => {
                if est.mu_x == 0.0 {
                    return Err(Error::DegenerateInput("normalized received density at mu_x = 0".into()));
                }
                1.0 / (WINDOW * noise.mass())
            }
        };
        Ok(ReceivedSignal {
            noise,
            mu_x: est.mu_x,
            mode,
            scale,
        })
    }

    pub fn mode(&self) -> DensityMode {
        self.mode
    }

    pub fn mu_x(&self) -> f64 {
        self.mu_x
    }

    pub fn noise(&self) -> &HybridNoise {
        &self.noise
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.scale * self.noise.window_mass(y, WINDOW)
    }

    /// Noise support widened by the transmit window.
    pub fn support(&self) -> Result<Interval> {
        let z = self.noise.support(DEFAULT_TAIL_MASS)?;
        Interval::new(z.lo(), z.hi() + WINDOW)
    }

    fn pieces(&self) -> Result<Vec<f64>> {
        Ok(self.noise.pieces(self.support()?))
    }

    /// Total mass of `f_Y` by quadrature.
    pub fn mass(&self, spec: &QuadratureSpec) -> Result<f64> {
        Ok(integrate_pieces(|y| self.pdf(y), &self.pieces()?, spec)?.value)
    }

    /// `h(Y)` in bits.
    pub fn entropy(&self, spec: &QuadratureSpec) -> Result<f64> {
        if self.scale == 0.0 {
            return Ok(0.0);
        }
        Ok(integrate_pieces(|y| neg_plog2p(self.pdf(y)), &self.pieces()?, spec)?.value)
    }

    /// Mean of the normalized density; independent of `mu_x` and mode.
    pub fn mean(&self, spec: &QuadratureSpec) -> Result<f64> {
        if self.mu_x == 0.0 {
            return Err(Error::DegenerateInput("received mean at mu_x = 0".into()));
        }
        let pieces = self.pieces()?;
        let g = |y: f64| self.noise.window_mass(y, WINDOW);
        let m0 = integrate_pieces(g, &pieces, spec)?.value;
        let m1 = integrate_pieces(|y| y * g(y), &pieces, spec)?.value;
        Ok(m1 / m0)
    }
}

pub fn received_pdf(y: f64, est: TransmitEstimate, params: &NoiseParams, mode: DensityMode) -> Result<f64> {
    Ok(ReceivedSignal::new(HybridNoise::new(params)?, est, mode)?.pdf(y))
}

pub fn received_entropy(
    est: TransmitEstimate,
    params: &NoiseParams,
    spec: &QuadratureSpec,
    mode: DensityMode,
) -> Result<f64> {
    ReceivedSignal::new(HybridNoise::new(params)?, est, mode)?.entropy(spec)
}

pub fn received_mean(est: TransmitEstimate, params: &NoiseParams, spec: &QuadratureSpec) -> Result<f64> {
    ReceivedSignal::new(HybridNoise::new(params)?, est, DensityMode::PaperLiteral)?.mean(spec)
}

/// Drive parameters of a two-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RabiConfig {
    omega: f64,
    omega_g: f64,
    t: f64,
}

impl RabiConfig {
    pub fn new(omega: f64, omega_g: f64, t: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::invalid("omega", format!("must be finite and > 0, got {omega}")));
        }
        if !(omega_g >= omega && omega_g.is_finite()) {
            return Err(Error::invalid(
                "omega_g",
                format!("must be finite and >= omega, got {omega_g}"),
            ));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::invalid("t", format!("must be finite and >= 0, got {t}")));
        }
        Ok(RabiConfig { omega, omega_g, t })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn omega_g(&self) -> f64 {
        self.omega_g
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// `Omega / Omega_g`, in `(0, 1]`.
    pub fn ratio(&self) -> f64 {
        self.omega / self.omega_g
    }

    /// `sin(Omega_g t / 2)`.
    pub fn half_phase_sin(&self) -> f64 {
        (0.5 * self.omega_g * self.t).sin()
    }

    /// True on the set where the azimuth map divides by zero.
    pub fn is_singular(&self) -> bool {
        self.half_phase_sin().abs() <= ANGLE_TOL || (1.0 - self.ratio()).abs() <= ANGLE_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

fn clamp_unit(function: &'static str, x: f64) -> Result<f64> {
    if x.abs() <= 1.0 {
        Ok(x)
    } else if x.abs() <= 1.0 + ANGLE_TOL {
        Ok(x.signum())
    } else {
        Err(Error::OutOfDomain { function, value: x })
    }
}

/// Elevation `theta = 2 arccos((Omega / Omega_g) sin(Omega_g t / 2))`, in `[0, 2pi]`.
pub fn bloch_theta(cfg: &RabiConfig) -> f64 {
    let arg = (cfg.ratio() * cfg.half_phase_sin()).clamp(-1.0, 1.0);
    2.0 * arg.acos()
}

/// Azimuth as a function of elevation,
///
/// ```text
/// psi(theta) = -arcsin( sqrt(1 - c) / (sqrt(1 - r^2) * c) ),   c = cos^2(theta/2) / r^2
/// ```
///
/// with `r = Omega / Omega_g`. Here `c` equals `sin^2(Omega_g t / 2)`, so the
/// square root in the numerator is `|cos(Omega_g t / 2)|`.
pub fn psi(theta: f64, ratio: f64) -> Result<f64> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid(
            "ratio",
            format!("Omega / Omega_g must lie in (0, 1], got {ratio}"),
        ));
    }
    let half = (0.5 * theta).cos();
    let c = half * half / (ratio * ratio);
    let radicand = 1.0 - c;
    let numerator = if radicand >= 0.0 {
        radicand.sqrt()
    } else if radicand >= -ANGLE_TOL {
        0.0
    } else {
        return Err(Error::OutOfDomain {
            function: "sqrt in psi",
            value: radicand,
        });
    };
    let denominator = ((1.0 - ratio) * (1.0 + ratio)).sqrt() * c;
    if denominator <= ANGLE_TOL * ANGLE_TOL {
        return Err(Error::Singularity(format!(
            "psi denominator vanishes (theta = {theta}, ratio = {ratio})"
        )));
    }
    let arg = clamp_unit("arcsin in psi", numerator / denominator)?;
    Ok(-arg.asin())
}

/// Elevation and azimuth of the qubit restricted to one parameter.
pub fn bloch_angles(cfg: &RabiConfig) -> Result<BlochAngles> {
    let theta = bloch_theta(cfg);
    if cfg.is_singular() {
        return Err(Error::Singularity(format!(
            "sin(Omega_g t / 2) = {:e}, Omega / Omega_g = {} (theta = {theta})",
            cfg.half_phase_sin(),
            cfg.ratio()
        )));
    }
    // Off the singular set a vanishing denominator only means the arcsin
    // argument overflowed, so it is reported as a domain error.
    let phi = psi(theta, cfg.ratio()).map_err(|e| match e {
        Error::Singularity(_) => Error::OutOfDomain {
            function: "arcsin in psi",
            value: f64::INFINITY,
        },
        other => other,
    })?;
    Ok(BlochAngles { theta, phi })
}

/// Tunnelling splitting `delta` and energy bias `epsilon`, not both zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkingPoint {
    delta: f64,
    epsilon: f64,
}

impl WorkingPoint {
    pub fn new(delta: f64, epsilon: f64) -> Result<Self> {
        if !delta.is_finite() || !epsilon.is_finite() {
            return Err(Error::invalid("working_point", "delta and epsilon must be finite"));
        }
        if delta == 0.0 && epsilon == 0.0 {
            return Err(Error::invalid("working_point", "delta and epsilon cannot both be zero"));
        }
        Ok(WorkingPoint { delta, epsilon })
    }
}

/// `arctan(delta / epsilon)` resolved by quadrant, in `(-pi, pi]`.
pub fn working_point(wp: &WorkingPoint) -> f64 {
    let a = wp.delta.atan2(wp.epsilon);
    if a == -PI {
        PI
    } else {
        a
    }
}
