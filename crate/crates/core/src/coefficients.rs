//! Transmission and reflection coefficients of the parabolic barrier.
//!
//! Three routes are provided: the closed form `T = [1 + tanh(pi eps)] / 2`,
//! the sinh-kernel integral `T = 1/2 + (1/2pi) Int_0^inf sin(eps xi)/sinh(xi/2) dxi`,
//! and the running integral of the Wigner profile over positive trajectory
//! energies. The last one converges only conditionally, so it is reported
//! together with a trailing moving average over one oscillation period.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::{profile_value, ScaledEnergy, TrajectoryEnergy};
use crate::quadrature::{self, trapezoid_estimate, QuadratureConfig};

/// Default eta spacing of [`partial_weight`].
pub const DEFAULT_ETA_SPACING: f64 = 0.01;

/// Below this `|xi|` the sinh kernel is replaced by its Taylor expansion.
const TAYLOR_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientPair {
    pub transmission: f64,
    pub reflection: f64,
}

impl CoefficientPair {
    pub fn closed(eps: ScaledEnergy) -> Self {
        Self {
            transmission: transmission_closed(eps),
            reflection: reflection(eps),
        }
    }
}

/// `1 / (1 + exp(-2 pi eps))`, evaluated as `[1 + tanh(pi eps)] / 2`.
pub fn transmission_closed(eps: ScaledEnergy) -> f64 {
    0.5 * (1.0 + (PI * eps.value()).tanh())
}

/// `R = 1 - T`.
pub fn reflection(eps: ScaledEnergy) -> f64 {
    1.0 - transmission_closed(eps)
}

/// `sin(eps xi) / sinh(xi / 2)`, with the limit `2 eps` at the origin.
fn sinh_kernel(eps: f64, xi: f64) -> f64 {
    if xi.abs() < TAYLOR_RADIUS {
        let xi2 = xi * xi;
        2.0 * eps * (1.0 - xi2 * (eps * eps / 6.0 + 1.0 / 24.0))
    } else {
        (eps * xi).sin() / (0.5 * xi).sinh()
    }
}

/// `T` from the half-line sinh-kernel integral.
///
/// The integrand is even in `xi`, so the half-line integral is taken as half
/// of the symmetric trapezoid sum.
pub fn transmission_integral(eps: ScaledEnergy, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    let e = eps.value();
    if e == 0.0 {
        return Ok(0.5);
    }
    let step = cfg.step_for(e.abs());
    let full = trapezoid_estimate(|xi| sinh_kernel(e, xi), cfg.xi_max, step, 0.0);
    // T = 1/2 + full / (4 pi).
    let scaled = quadrature::Estimate {
        value: full.value / (4.0 * PI),
        change: full.change / (4.0 * PI),
    };
    let half_integral = quadrature::check(scaled, cfg.tolerance)?.value;
    Ok(0.5 + half_integral)
}

/// Which half of the trajectory-energy line is accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfLine {
    /// `eta in [0, lambda]`: trajectories above the barrier top (transmission).
    Above,
    /// `eta in [-lambda, 0]`: reflected trajectories (reflection).
    Below,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialWeightTrace {
    pub lambda_grid: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub averaged: Vec<f64>,
}

impl PartialWeightTrace {
    pub fn len(&self) -> usize {
        self.lambda_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda_grid.is_empty()
    }

    /// Averaged value at the largest cutoff.
    pub fn final_average(&self) -> f64 {
        self.averaged.last().copied().unwrap_or(0.0)
    }

    /// Re-averages the cumulative trace with a different trailing window.
    pub fn with_window(mut self, window: usize) -> Result<Self> {
        check_window(window)?;
        self.averaged = trailing_mean(&self.cumulative, window);
        Ok(self)
    }
}

fn check_window(window: usize) -> Result<()> {
    if window == 0 {
        Err(Error::Parameter(
            "averaging window must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

/// Mean of `values[k + 1 - window ..= k]` for every `k` (shorter at the start).
pub fn trailing_mean(values: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    values
        .iter()
        .enumerate()
        .map(|(k, _)| {
            let start = (k + 1).saturating_sub(window);
            let slice = &values[start..=k];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Oscillation period of a trace, in samples.
///
/// The period is read off the zero crossings of the last half of the trace
/// minus its mean; two consecutive crossings are half a period apart. Returns
/// `None` when fewer than three crossings are found.
pub fn estimate_period(values: &[f64]) -> Option<usize> {
    let tail = &values[values.len() / 2..];
    if tail.len() < 4 {
        return None;
    }
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let crossings: Vec<usize> = tail
        .windows(2)
        .enumerate()
        .filter(|(_, w)| {
            let (a, b) = (w[0] - mean, w[1] - mean);
            (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0)
        })
        .map(|(i, _)| i)
        .collect();
    if crossings.len() < 3 {
        return None;
    }
    let first = crossings[0] as f64;
    let last = crossings[crossings.len() - 1] as f64;
    let half_period = (last - first) / (crossings.len() - 1) as f64;
    Some(((2.0 * half_period).round() as usize).max(1))
}

/// Running half-line weight `Int_0^lambda W_eps(eta) deta` on the default eta spacing.
pub fn partial_weight(
    eps: ScaledEnergy,
    lambda_max: f64,
    cfg: &QuadratureConfig,
    window: usize,
) -> Result<PartialWeightTrace> {
    let samples = default_samples(lambda_max)?;
    partial_weight_on(eps, HalfLine::Above, lambda_max, samples, cfg, window)
}

/// Number of samples giving spacing close to [`DEFAULT_ETA_SPACING`].
pub fn default_samples(lambda_max: f64) -> Result<usize> {
    check_lambda(lambda_max)?;
    Ok((lambda_max / DEFAULT_ETA_SPACING).ceil() as usize + 1)
}

fn check_lambda(lambda_max: f64) -> Result<()> {
    if lambda_max.is_finite() && lambda_max > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "lambda_max must be positive, got {lambda_max}"
        )))
    }
}

/// Running weight on either half-line with `samples` equally spaced cutoffs
/// from 0 to `lambda_max`.
///
/// `cumulative[k]` is the trapezoid integral of the profile between 0 and the
/// k-th cutoff (towards negative eta for [`HalfLine::Below`]); `averaged` is its
/// trailing mean over `window` samples.
pub fn partial_weight_on(
    eps: ScaledEnergy,
    side: HalfLine,
    lambda_max: f64,
    samples: usize,
    cfg: &QuadratureConfig,
    window: usize,
) -> Result<PartialWeightTrace> {
    check_lambda(lambda_max)?;
    check_window(window)?;
    if samples < 2 {
        return Err(Error::Parameter(
            "partial weight needs at least 2 samples".into(),
        ));
    }
    cfg.validate()?;
    let lambda_grid = crate::profile::uniform_grid(0.0, lambda_max, samples);
    let sign = match side {
        HalfLine::Above => 1.0,
        HalfLine::Below => -1.0,
    };
    let values = lambda_grid
        .par_iter()
        .map(|&l| profile_value(eps, TrajectoryEnergy::new(sign * l)?, cfg))
        .collect::<Result<Vec<_>>>()?;

    let mut cumulative = Vec::with_capacity(samples);
    let mut total = 0.0;
    cumulative.push(total);
    for k in 1..samples {
        let width = lambda_grid[k] - lambda_grid[k - 1];
        total += 0.5 * width * (values[k] + values[k - 1]);
        cumulative.push(total);
    }
    let averaged = trailing_mean(&cumulative, window);
    Ok(PartialWeightTrace {
        lambda_grid,
        cumulative,
        averaged,
    })
}

/// [`partial_weight_on`] with the averaging window set to one estimated
/// oscillation period of the cumulative trace.
pub fn partial_weight_auto(
    eps: ScaledEnergy,
    side: HalfLine,
    lambda_max: f64,
    samples: usize,
    cfg: &QuadratureConfig,
) -> Result<PartialWeightTrace> {
    let trace = partial_weight_on(eps, side, lambda_max, samples, cfg, 1)?;
    let window = estimate_period(&trace.cumulative).unwrap_or(trace.len());
    trace.with_window(window)
}
