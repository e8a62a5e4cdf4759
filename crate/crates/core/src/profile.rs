//! The Fourier kernel `w_eps(tau)` and the Wigner profile `W_eps(eta)`.
//!
//! The profile is the Fourier integral of the kernel over `tau in (-2, 2)`.
//! The kernel has an inverse square-root divergence and a logarithmic phase
//! singularity at both endpoints, so the integral is never evaluated in `tau`.
//! With `tau = 2 tanh(xi / 2)` it becomes
//!
//! ```text
//! W_eps(eta) = 1/(2 pi) * Integral sech(xi/2) cos(2 eta tanh(xi/2) - eps xi) dxi
//! ```
//!
//! over the whole real line, which is smooth and decays like `exp(-|xi|/2)`.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{self, Estimate, QuadratureConfig};

/// Dimensionless eigenvalue `E / (hbar Omega)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ScaledEnergy(f64);

impl ScaledEnergy {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon.is_finite() {
            Ok(Self(epsilon))
        } else {
            Err(Error::Domain(format!(
                "scaled energy must be finite, got {epsilon}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::ops::Neg for ScaledEnergy {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// Dimensionless classical energy `H(x, p) / (hbar Omega)` of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TrajectoryEnergy(f64);

impl TrajectoryEnergy {
    pub fn new(eta: f64) -> Result<Self> {
        if eta.is_finite() {
            Ok(Self(eta))
        } else {
            Err(Error::Domain(format!(
                "trajectory energy must be finite, got {eta}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::ops::Neg for TrajectoryEnergy {
    type Output = Self;
    fn neg(self) -> Self {
        Self(-self.0)
    }
}

/// A kernel sample `w_eps(tau)` with `|tau| < 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub tau: f64,
    pub value: Complex64,
}

/// The coordinate `xi = ln[(2 + tau) / (2 - tau)]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SubstitutedCoordinate(pub f64);

impl SubstitutedCoordinate {
    pub fn xi(self) -> f64 {
        self.0
    }

    /// Maps back to `tau = 2 tanh(xi / 2)`.
    pub fn tau(self) -> f64 {
        tau_of_xi(self.0)
    }
}

fn check_open_interval(tau: f64) -> Result<()> {
    if tau.is_finite() && tau.abs() < 2.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "tau = {tau} lies outside the open interval (-2, 2)"
        )))
    }
}

/// `w_eps(tau) = (1/pi) (4 - tau^2)^(-1/2) exp[-i eps ln((2 + tau)/(2 - tau))]`.
pub fn kernel_weight(eps: ScaledEnergy, tau: f64) -> Result<Complex64> {
    check_open_interval(tau)?;
    let modulus = FRAC_1_PI / (4.0 - tau * tau).sqrt();
    let phase = -eps.value() * xi_of_tau(tau)?.xi();
    Ok(Complex64::from_polar(modulus, phase))
}

pub fn kernel_point(eps: ScaledEnergy, tau: f64) -> Result<KernelPoint> {
    Ok(KernelPoint {
        tau,
        value: kernel_weight(eps, tau)?,
    })
}

/// Closed-form `dw/dtau = w * (tau - 4 i eps) / (4 - tau^2)`.
pub fn kernel_derivative(eps: ScaledEnergy, tau: f64) -> Result<Complex64> {
    let w = kernel_weight(eps, tau)?;
    let factor = Complex64::new(tau, -4.0 * eps.value()) / (4.0 - tau * tau);
    Ok(w * factor)
}

/// Forward substitution `xi = ln[(2 + tau)/(2 - tau)] = 2 artanh(tau / 2)`.
pub fn xi_of_tau(tau: f64) -> Result<SubstitutedCoordinate> {
    check_open_interval(tau)?;
    // Odd by construction, so the kernel is exactly Hermitian in tau.
    Ok(SubstitutedCoordinate(
        (2.0 * (0.5 * tau.abs()).atanh()).copysign(tau),
    ))
}

/// Inverse substitution `tau = 2 tanh(xi / 2)`.
pub fn tau_of_xi(xi: f64) -> f64 {
    2.0 * (0.5 * xi).tanh()
}

/// `(sech(xi/2), tanh(xi/2))` from a single exponential.
#[inline]
fn sech_tanh_half(xi: f64) -> (f64, f64) {
    let e = (-0.5 * xi.abs()).exp();
    let e2 = e * e;
    let denom = 1.0 / (1.0 + e2);
    let sech = 2.0 * e * denom;
    let tanh = (1.0 - e2) * denom;
    (sech, tanh.copysign(xi))
}

/// Profile value and its first two eta-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileDerivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

const RE: usize = 0;
const IM: usize = 1;
const D1: usize = 2;
const D2: usize = 3;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Terms {
    Value,
    WithDerivatives,
}

/// Sum of the profile integrands on a lattice. Components by index: value,
/// imaginary residue, first derivative, second derivative. All are scaled by
/// `1/(2 pi)` but not yet by the step.
fn lattice(eps: f64, eta: f64, nodes: impl Iterator<Item = f64>, terms: Terms) -> [f64; 4] {
    let mut acc = [0.0; 4];
    for xi in nodes {
        let (sech, tanh) = sech_tanh_half(xi);
        let phase = 2.0 * eta * tanh - eps * xi;
        let (sin, cos) = phase.sin_cos();
        acc[RE] += sech * cos;
        acc[IM] += sech * sin;
        if terms == Terms::WithDerivatives {
            acc[D1] -= sech * 2.0 * tanh * sin;
            acc[D2] -= sech * 4.0 * tanh * tanh * cos;
        }
    }
    acc.map(|v| v / (2.0 * PI))
}

/// Coarse (step `h`) and fine (step `h/2`) sums of every component.
fn estimates(
    eps: ScaledEnergy,
    eta: TrajectoryEnergy,
    cfg: &QuadratureConfig,
    offset: f64,
    terms: Terms,
) -> Result<[Estimate; 4]> {
    cfg.validate()?;
    let (eps, eta) = (eps.value(), eta.value());
    let step = cfg.step_for(eta.abs() + eps.abs());
    let fine = 0.5 * step;
    let (coarse_sum, fine_sum) = if offset == 0.0 {
        // Even fine nodes are the coarse lattice.
        let n = (cfg.xi_max / fine).floor() as i64;
        let n_even = n / 2;
        let even = lattice(eps, eta, (-n_even..=n_even).map(|k| k as f64 * step), terms);
        let n_odd = (n + 1) / 2;
        let odd = lattice(
            eps,
            eta,
            (-n_odd..n_odd).map(|k| (k as f64 + 0.5) * step),
            terms,
        );
        let mut combined = [0.0; 4];
        for i in 0..4 {
            combined[i] = (even[i] + odd[i]) * fine;
        }
        (even.map(|v| v * step), combined)
    } else {
        let shifted = |h: f64| {
            let n = ((cfg.xi_max / h) - offset).floor() as i64;
            lattice(
                eps,
                eta,
                (-n - 1..=n).map(move |k| (k as f64 + offset) * h),
                terms,
            )
            .map(|v| v * h)
        };
        (shifted(step), shifted(fine))
    };
    let mut out = [Estimate {
        value: 0.0,
        change: 0.0,
    }; 4];
    for i in 0..4 {
        out[i] = Estimate {
            value: fine_sum[i],
            change: (fine_sum[i] - coarse_sum[i]).abs(),
        };
    }
    Ok(out)
}

fn checked_value(parts: &[Estimate; 4], tolerance: f64) -> Result<f64> {
    let value = quadrature::check(parts[RE], tolerance)?;
    let residue = parts[IM].value.abs();
    if residue > tolerance {
        return Err(Error::Accuracy {
            change: residue,
            tolerance,
        });
    }
    Ok(value.value)
}

/// `W_eps(eta)` from the xi-form integral on the trapezoid lattice of `cfg`.
pub fn profile_value(
    eps: ScaledEnergy,
    eta: TrajectoryEnergy,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let parts = estimates(eps, eta, cfg, 0.0, Terms::Value)?;
    checked_value(&parts, cfg.tolerance)
}

/// `W_eps(eta)` on the midpoint lattice, which shares no node with the one used
/// by [`profile_value`]. Used where two independent evaluations are compared.
pub fn profile_value_midpoint(
    eps: ScaledEnergy,
    eta: TrajectoryEnergy,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let parts = estimates(eps, eta, cfg, 0.5, Terms::Value)?;
    checked_value(&parts, cfg.tolerance)
}

/// `(W, dW/deta, d2W/deta2)` by differentiating under the integral sign.
pub fn profile_derivatives(
    eps: ScaledEnergy,
    eta: TrajectoryEnergy,
    cfg: &QuadratureConfig,
) -> Result<ProfileDerivatives> {
    let parts = estimates(eps, eta, cfg, 0.0, Terms::WithDerivatives)?;
    let value = checked_value(&parts, cfg.tolerance)?;
    let first = quadrature::check(parts[D1], cfg.tolerance)?.value;
    let second = quadrature::check(parts[D2], cfg.tolerance)?.value;
    Ok(ProfileDerivatives {
        value,
        first,
        second,
    })
}

/// Sampled profile on an increasing eta grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerProfile {
    pub epsilon: ScaledEnergy,
    pub eta_grid: Vec<TrajectoryEnergy>,
    pub values: Vec<f64>,
    pub d1: Option<Vec<f64>>,
    pub d2: Option<Vec<f64>>,
}

impl WignerProfile {
    /// Evaluates the profile (and optionally its derivatives) at every grid point.
    pub fn sample(
        eps: ScaledEnergy,
        eta_grid: Vec<TrajectoryEnergy>,
        derivatives: bool,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        if eta_grid.windows(2).any(|w| w[0].value() >= w[1].value()) {
            return Err(Error::Parameter(
                "eta grid must be strictly increasing".into(),
            ));
        }
        cfg.validate()?;
        if derivatives {
            let triples = eta_grid
                .par_iter()
                .map(|&eta| profile_derivatives(eps, eta, cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(Self {
                epsilon: eps,
                values: triples.iter().map(|t| t.value).collect(),
                d1: Some(triples.iter().map(|t| t.first).collect()),
                d2: Some(triples.iter().map(|t| t.second).collect()),
                eta_grid,
            })
        } else {
            let values = eta_grid
                .par_iter()
                .map(|&eta| profile_value(eps, eta, cfg))
                .collect::<Result<Vec<_>>>()?;
            Ok(Self {
                epsilon: eps,
                eta_grid,
                values,
                d1: None,
                d2: None,
            })
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `n` equally spaced values from `min` to `max` inclusive; `n = 1` yields `[min]`.
pub fn uniform_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let span = max - min;
            let last = (n - 1) as f64;
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        max
                    } else {
                        min + span * (k as f64 / last)
                    }
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(v: f64) -> ScaledEnergy {
        ScaledEnergy::new(v).unwrap()
    }

    fn t(v: f64) -> TrajectoryEnergy {
        TrajectoryEnergy::new(v).unwrap()
    }

    #[test]
    fn newtypes_reject_non_finite() {
        assert!(ScaledEnergy::new(f64::NAN).is_err());
        assert!(ScaledEnergy::new(f64::INFINITY).is_err());
        assert!(TrajectoryEnergy::new(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn kernel_at_origin_is_one_over_two_pi() {
        for eps in [0.0, 7.3, -2.0] {
            let w = kernel_weight(e(eps), 0.0).unwrap();
            assert_abs_diff_eq!(w.re, 1.0 / (2.0 * PI), epsilon = 1e-16);
            assert_eq!(w.im, 0.0);
        }
    }

    #[test]
    fn kernel_at_eps_one_tau_one() {
        // (1 / (pi sqrt 3)) exp(-i ln 3), evaluated independently.
        let amp = 1.0 / (PI * 3f64.sqrt());
        let ln3 = 3f64.ln();
        let w = kernel_weight(e(1.0), 1.0).unwrap();
        assert_abs_diff_eq!(w.re, amp * ln3.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(w.im, -amp * ln3.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(w.re, 0.0834, epsilon = 5e-4);
        assert_abs_diff_eq!(w.im, -0.1637, epsilon = 5e-4);
    }

    #[test]
    fn kernel_rejects_endpoints() {
        for tau in [2.0, -2.0, 2.5, f64::NAN] {
            assert!(matches!(kernel_weight(e(0.1), tau), Err(Error::Domain(_))));
        }
        assert!(xi_of_tau(2.0).is_err());
    }

    #[test]
    fn substitution_endpoints() {
        assert_eq!(xi_of_tau(0.0).unwrap().xi(), 0.0);
        assert_eq!(tau_of_xi(0.0), 0.0);
        assert!(xi_of_tau(2.0 - 1e-15).unwrap().xi() > 35.0);
        assert!(xi_of_tau(-2.0 + 1e-15).unwrap().xi() < -35.0);
    }

    #[test]
    fn sech_tanh_matches_std() {
        for xi in [-40.0, -3.0, -0.1, 0.0, 1e-8, 0.5, 7.0, 60.0] {
            let (s, th) = sech_tanh_half(xi);
            assert_abs_diff_eq!(s, 1.0 / (0.5 * xi).cosh(), epsilon = 1e-15);
            assert_abs_diff_eq!(th, (0.5 * xi).tanh(), epsilon = 1e-15);
        }
    }

    #[test]
    fn profile_at_origin_is_one() {
        let cfg = QuadratureConfig::default();
        let w = profile_value(e(0.0), t(0.0), &cfg).unwrap();
        assert_abs_diff_eq!(w, 1.0, epsilon = cfg.tolerance);
    }

    #[test]
    fn profile_even_at_zero_energy() {
        let cfg = QuadratureConfig::default();
        let a = profile_value(e(0.0), t(2.5), &cfg).unwrap();
        let b = profile_value(e(0.0), t(-2.5), &cfg).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
    }

    #[test]
    fn profile_mirror_symmetry() {
        let cfg = QuadratureConfig::default();
        let a = profile_value(e(-0.4), t(-1.0), &cfg).unwrap();
        let b = profile_value(e(0.4), t(1.0), &cfg).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn midpoint_lattice_reproduces_profile() {
        let cfg = QuadratureConfig::default();
        for (eps, eta) in [(0.0, 0.0), (-0.4, 1.3), (2.0, -4.5)] {
            let a = profile_value(e(eps), t(eta), &cfg).unwrap();
            let b = profile_value_midpoint(e(eps), t(eta), &cfg).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    // Raw tau-space quadrature with Gauss-Chebyshev nodes absorbs the inverse
    // square root; only meaningful at eps = 0 where no phase singularity exists.
    #[test]
    fn chebyshev_oracle_at_zero_energy() {
        let cfg = QuadratureConfig::default();
        let n = 400;
        for eta in [0.3, 1.7, -3.2] {
            let sum: f64 = (1..=n)
                .map(|k| {
                    let theta = (2 * k - 1) as f64 * PI / (2 * n) as f64;
                    (eta * 2.0 * theta.cos()).cos()
                })
                .sum();
            // Integral over (-2, 2) of cos(eta tau)/sqrt(4 - tau^2) = pi J0(2 eta).
            let oracle = sum / n as f64;
            let w = profile_value(e(0.0), t(eta), &cfg).unwrap();
            assert_abs_diff_eq!(w, oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn derivative_of_zero_energy_profile_vanishes_at_origin() {
        let d = profile_derivatives(e(0.0), t(0.0), &QuadratureConfig::default()).unwrap();
        assert_abs_diff_eq!(d.first, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d.value, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let cfg = QuadratureConfig::default();
        let h = 1e-4;
        for (eps, eta) in [(-0.4, 0.7), (1.0, -2.0), (0.0, 3.3), (2.5, 5.0)] {
            // Pin one step so all evaluations share the same lattice.
            let cfg = cfg.with_step(quadrature::default_step(f64::abs(eta) + h + f64::abs(eps)));
            let d = profile_derivatives(e(eps), t(eta), &cfg).unwrap();
            let w = |x: f64| profile_value(e(eps), t(x), &cfg).unwrap();
            let fd1 = (w(eta + h) - w(eta - h)) / (2.0 * h);
            let fd2 = (w(eta + h) - 2.0 * w(eta) + w(eta - h)) / (h * h);
            assert_abs_diff_eq!(d.first, fd1, epsilon = 1e-6);
            assert_abs_diff_eq!(d.second, fd2, epsilon = 1e-6);
        }
    }

    #[test]
    fn sample_requires_increasing_grid() {
        let grid = vec![t(0.0), t(0.0)];
        assert!(WignerProfile::sample(e(0.0), grid, false, &QuadratureConfig::default()).is_err());
    }

    #[test]
    fn sample_with_derivatives() {
        let grid: Vec<_> = uniform_grid(-1.0, 1.0, 5).into_iter().map(t).collect();
        let p = WignerProfile::sample(e(0.2), grid, true, &QuadratureConfig::default()).unwrap();
        assert_eq!(p.len(), 5);
        assert_eq!(p.d1.as_ref().unwrap().len(), 5);
        assert_eq!(p.d2.as_ref().unwrap().len(), 5);
        assert!(p.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn uniform_grid_endpoints() {
        assert_eq!(uniform_grid(-3.0, 3.0, 61)[30], 0.0);
        assert_eq!(uniform_grid(1.0, 2.0, 1), vec![1.0]);
        let g = uniform_grid(-6.0, 6.0, 25);
        assert_eq!(g[0], -6.0);
        assert_eq!(g[24], 6.0);
        assert_eq!(g[12], 0.0);
    }
}
