//! Residual checks of the exact identities satisfied by the kernel, the
//! profile, and the masked phase-space Wigner functions.
//!
//! Every check produces a [`ResidualReport`]; [`run_suite`] assembles the
//! standard collection used by the command-line `validate` subcommand.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::coefficients::{partial_weight_auto, HalfLine};
use crate::error::{Error, Result};
use crate::phasespace::{trajectory_energy, wigner_masked, PhaseSpacePoint, Side};
use crate::profile::{
    kernel_derivative, kernel_weight, profile_derivatives, profile_value, profile_value_midpoint,
    uniform_grid, ScaledEnergy, TrajectoryEnergy,
};
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub label: String,
    pub points: Vec<String>,
    pub residuals: Vec<f64>,
    pub max_abs: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ResidualReport {
    pub fn new(
        label: impl Into<String>,
        points: Vec<String>,
        residuals: Vec<f64>,
        tolerance: f64,
    ) -> Self {
        let max_abs =
            residuals.iter().fold(
                0.0f64,
                |m, r| {
                    if r.is_nan() {
                        f64::NAN
                    } else {
                        m.max(r.abs())
                    }
                },
            );
        Self {
            label: label.into(),
            points,
            residuals,
            max_abs,
            tolerance,
            // NaN compares false, so a NaN residual fails.
            passed: max_abs <= tolerance,
        }
    }
}

fn label_eps_eta(eps: f64, eta: f64) -> String {
    format!("eps={eps};eta={eta}")
}

/// `eta W'' + W' - 4 (eps - eta) W` from the quadrature derivatives.
pub fn residual_profile_ode(
    eps: ScaledEnergy,
    eta: TrajectoryEnergy,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(profile_ode_terms(eps, eta, cfg)?.0)
}

/// Residual and the scale `1 + |W| + |W'| + |W''|` it is measured against.
fn profile_ode_terms(
    eps: ScaledEnergy,
    eta: TrajectoryEnergy,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let d = profile_derivatives(eps, eta, cfg)?;
    let (e, n) = (eps.value(), eta.value());
    let residual = n * d.second + d.first - 4.0 * (e - n) * d.value;
    let scale = 1.0 + d.value.abs() + d.first.abs() + d.second.abs();
    Ok((residual, scale))
}

/// Relative ODE residuals over every `(eps, eta)` pair.
pub fn check_profile_ode(
    energies: &[f64],
    etas: &[f64],
    cfg: &QuadratureConfig,
    tolerance: f64,
) -> Result<ResidualReport> {
    let pairs: Vec<(f64, f64)> = energies
        .iter()
        .flat_map(|&e| etas.iter().map(move |&n| (e, n)))
        .collect();
    let residuals = pairs
        .par_iter()
        .map(|&(e, n)| {
            let (r, scale) =
                profile_ode_terms(ScaledEnergy::new(e)?, TrajectoryEnergy::new(n)?, cfg)?;
            Ok(r / scale)
        })
        .collect::<Result<Vec<_>>>()?;
    let points = pairs.iter().map(|&(e, n)| label_eps_eta(e, n)).collect();
    Ok(ResidualReport::new(
        "profile_ode",
        points,
        residuals,
        tolerance,
    ))
}

fn kernel_residual(eps: ScaledEnergy, tau: f64, w: Complex64, dw: Complex64) -> Complex64 {
    let i = Complex64::i();
    i * (4.0 - tau * tau) * dw - (i * tau + 4.0 * eps.value()) * w
}

/// `i (4 - tau^2) w' - (i tau + 4 eps) w` with `w'` from central differences of step `h`.
pub fn residual_kernel_ode(eps: ScaledEnergy, tau: f64, h: f64) -> Result<Complex64> {
    if !(h > 0.0 && tau.abs() + h < 2.0) {
        return Err(Error::Domain(format!(
            "central difference at tau = {tau} with step {h} leaves (-2, 2)"
        )));
    }
    let w = kernel_weight(eps, tau)?;
    let dw = (kernel_weight(eps, tau + h)? - kernel_weight(eps, tau - h)?) / (2.0 * h);
    Ok(kernel_residual(eps, tau, w, dw))
}

/// Same residual with the closed-form derivative; zero up to rounding.
pub fn residual_kernel_ode_analytic(eps: ScaledEnergy, tau: f64) -> Result<Complex64> {
    let w = kernel_weight(eps, tau)?;
    let dw = kernel_derivative(eps, tau)?;
    Ok(kernel_residual(eps, tau, w, dw))
}

/// Observed convergence order of the finite-difference kernel residual when
/// `h` is halved.
pub fn kernel_fd_order(eps: ScaledEnergy, tau: f64, h: f64) -> Result<f64> {
    let coarse = residual_kernel_ode(eps, tau, h)?.norm();
    let fine = residual_kernel_ode(eps, tau, 0.5 * h)?.norm();
    Ok((coarse / fine).log2())
}

/// `2 pi w_eps(0)`, which equals the integral of the profile over all eta.
pub fn check_normalization(eps: ScaledEnergy) -> f64 {
    let w = kernel_weight(eps, 0.0).expect("tau = 0 is interior");
    2.0 * PI * w.re
}

/// Windowed running weight of the profile over `[-lambda, lambda]`.
pub fn weight_normalization(
    eps: ScaledEnergy,
    lambda_max: f64,
    samples: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let above = partial_weight_auto(eps, HalfLine::Above, lambda_max, samples, cfg)?;
    let below = partial_weight_auto(eps, HalfLine::Below, lambda_max, samples, cfg)?;
    Ok(above.final_average() + below.final_average())
}

/// `max |W_{-eps}(-eta) - W_eps(eta)|` over the grid.
///
/// The mirrored value is computed on the midpoint lattice so the two sides of
/// the comparison share no quadrature node.
pub fn check_symmetry(
    eps: ScaledEnergy,
    etas: &[f64],
    cfg: &QuadratureConfig,
    tolerance: f64,
) -> Result<ResidualReport> {
    let residuals = etas
        .par_iter()
        .map(|&n| {
            let eta = TrajectoryEnergy::new(n)?;
            let direct = profile_value(eps, eta, cfg)?;
            let mirrored = profile_value_midpoint(-eps, -eta, cfg)?;
            Ok(mirrored - direct)
        })
        .collect::<Result<Vec<_>>>()?;
    let points = etas
        .iter()
        .map(|&n| label_eps_eta(eps.value(), n))
        .collect();
    Ok(ResidualReport::new(
        format!("symmetry(eps={})", eps.value()),
        points,
        residuals,
        tolerance,
    ))
}

/// Residual of `P dW/dX + X dW/dP = 0` by central differences of step `h`.
pub fn residual_liouville(
    eps: ScaledEnergy,
    pt: PhaseSpacePoint,
    side: Side,
    cfg: &QuadratureConfig,
    h: f64,
) -> Result<f64> {
    if h.is_nan() || h <= 0.0 || (pt.p - pt.x).abs() <= 10.0 * h {
        return Err(Error::Domain(format!(
            "point ({}, {}) lies within 10h of the separatrix (h = {h})",
            pt.x, pt.p
        )));
    }
    let w = |x: f64, p: f64| wigner_masked(eps, PhaseSpacePoint::new(x, p), side, cfg);
    let dwdx = (w(pt.x + h, pt.p)? - w(pt.x - h, pt.p)?) / (2.0 * h);
    let dwdp = (w(pt.x, pt.p + h)? - w(pt.x, pt.p - h)?) / (2.0 * h);
    Ok(pt.p * dwdx + pt.x * dwdp)
}

/// `1 + |dW/deta| (|X| + |P|)`, the scale of the Liouville residual.
pub fn liouville_scale(
    eps: ScaledEnergy,
    pt: PhaseSpacePoint,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let d = profile_derivatives(eps, trajectory_energy(pt), cfg)?;
    Ok(1.0 + d.first.abs() * (pt.x.abs() + pt.p.abs()))
}

/// Default point set for the Liouville check: a 10 x 5 lattice that keeps
/// clear of the separatrix.
pub fn liouville_points() -> Vec<PhaseSpacePoint> {
    let xs = uniform_grid(-2.9, 2.9, 10);
    let ps = uniform_grid(-2.7, 2.7, 5);
    ps.iter()
        .flat_map(|&p| xs.iter().map(move |&x| PhaseSpacePoint::new(x, p)))
        .collect()
}

/// Scaled Liouville residuals, each on the side whose mask is one at the point.
pub fn check_liouville(
    eps: ScaledEnergy,
    points: &[PhaseSpacePoint],
    cfg: &QuadratureConfig,
    h: f64,
    tolerance: f64,
) -> Result<ResidualReport> {
    let residuals = points
        .par_iter()
        .map(|&pt| {
            let side = if pt.p > pt.x { Side::Left } else { Side::Right };
            let r = residual_liouville(eps, pt, side, cfg, h)?;
            Ok(r / liouville_scale(eps, pt, cfg)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = points
        .iter()
        .map(|pt| format!("eps={};X={};P={}", eps.value(), pt.x, pt.p))
        .collect();
    Ok(ResidualReport::new(
        format!("liouville(eps={})", eps.value()),
        labels,
        residuals,
        tolerance,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Ode,
    Kernel,
    Symmetry,
    Normalization,
    Liouville,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "ode" => Suite::Ode,
            "kernel" => Suite::Kernel,
            "symmetry" => Suite::Symmetry,
            "normalization" => Suite::Normalization,
            "liouville" => Suite::Liouville,
            other => return Err(Error::Parameter(format!("unknown suite '{other}'"))),
        })
    }
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

/// Pass thresholds of the standard suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative residual of the profile ODE.
    pub profile: f64,
    /// Absolute residual of the kernel ODE with the closed-form derivative.
    pub kernel: f64,
    /// Relative residual `|r| / |w|` of the finite-difference kernel ODE.
    pub kernel_fd: f64,
    /// Allowed deviation of the observed differencing order from 2.
    pub kernel_order: f64,
    pub symmetry: f64,
    /// `|2 pi w(0) - 1|`; the identity is exact.
    pub normalization: f64,
    /// Deviation of the windowed full-line weight from 1.
    pub normalization_weight: f64,
    /// Scaled Liouville residual.
    pub liouville: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            profile: 1e-6,
            kernel: 1e-12,
            kernel_fd: 1e-6,
            kernel_order: 0.25,
            symmetry: 1e-10,
            normalization: 0.0,
            normalization_weight: 0.05,
            liouville: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub energies: Vec<f64>,
    pub cfg: QuadratureConfig,
    pub tolerances: Tolerances,
    /// Cutoff of the windowed normalization cross-check; `None` skips it.
    pub weight_lambda: Option<f64>,
}

/// Energies at which the standard suite runs.
pub const SUITE_ENERGIES: [f64; 7] = [-2.0, -1.0, -0.4, 0.0, 0.4, 1.0, 2.0];

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            energies: SUITE_ENERGIES.to_vec(),
            cfg: QuadratureConfig::default(),
            tolerances: Tolerances::default(),
            weight_lambda: Some(50.0),
        }
    }
}

/// Step of the finite-difference kernel and Liouville checks.
pub const KERNEL_FD_STEP: f64 = 1e-5;
pub const KERNEL_ORDER_STEP: f64 = 1e-2;
pub const LIOUVILLE_STEP: f64 = 2.5e-4;

/// 20 interior kernel abscissae in `[-1.9, 1.9]`.
pub fn kernel_points() -> Vec<f64> {
    uniform_grid(-1.9, 1.9, 20)
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Vec<ResidualReport>> {
    opts.cfg.validate()?;
    let tol = &opts.tolerances;
    let energies = opts
        .energies
        .iter()
        .map(|&e| ScaledEnergy::new(e))
        .collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::new();

    if suite.includes(Suite::Ode) {
        let etas = uniform_grid(-5.0, 5.0, 51);
        reports.push(check_profile_ode(
            &opts.energies,
            &etas,
            &opts.cfg,
            tol.profile,
        )?);
    }

    if suite.includes(Suite::Kernel) {
        let taus = kernel_points();
        let mut labels = Vec::new();
        let mut analytic = Vec::new();
        let mut fd = Vec::new();
        for &eps in &energies {
            for &tau in &taus {
                labels.push(format!("eps={};tau={tau}", eps.value()));
                analytic.push(residual_kernel_ode_analytic(eps, tau)?.norm());
                let w = kernel_weight(eps, tau)?.norm();
                fd.push(residual_kernel_ode(eps, tau, KERNEL_FD_STEP)?.norm() / w);
            }
        }
        reports.push(ResidualReport::new(
            "kernel_ode",
            labels.clone(),
            analytic,
            tol.kernel,
        ));
        reports.push(ResidualReport::new(
            "kernel_ode_fd",
            labels,
            fd,
            tol.kernel_fd,
        ));

        let mut labels = Vec::new();
        let mut orders = Vec::new();
        for &eps in &energies {
            for tau in [-1.5, 0.5, 1.5] {
                labels.push(format!("eps={};tau={tau}", eps.value()));
                orders.push(kernel_fd_order(eps, tau, KERNEL_ORDER_STEP)? - 2.0);
            }
        }
        reports.push(ResidualReport::new(
            "kernel_fd_order",
            labels,
            orders,
            tol.kernel_order,
        ));
    }

    if suite.includes(Suite::Symmetry) {
        let etas = uniform_grid(-6.0, 6.0, 25);
        for &eps in &energies {
            reports.push(check_symmetry(eps, &etas, &opts.cfg, tol.symmetry)?);
        }
    }

    if suite.includes(Suite::Normalization) {
        let labels = energies
            .iter()
            .map(|e| format!("eps={}", e.value()))
            .collect();
        let residuals = energies
            .iter()
            .map(|&e| check_normalization(e) - 1.0)
            .collect();
        reports.push(ResidualReport::new(
            "normalization",
            labels,
            residuals,
            tol.normalization,
        ));
        if let Some(lambda) = opts.weight_lambda {
            let eps = ScaledEnergy::new(0.0)?;
            let samples = crate::coefficients::default_samples(lambda)?;
            let total = weight_normalization(eps, lambda, samples, &opts.cfg)?;
            reports.push(ResidualReport::new(
                "normalization_weight",
                vec![format!("eps=0;lambda={lambda}")],
                vec![total - 1.0],
                tol.normalization_weight,
            ));
        }
    }

    if suite.includes(Suite::Liouville) {
        let points = liouville_points();
        for &eps in &energies {
            reports.push(check_liouville(
                eps,
                &points,
                &opts.cfg,
                LIOUVILLE_STEP,
                tol.liouville,
            )?);
        }
    }

    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: f64) -> ScaledEnergy {
        ScaledEnergy::new(v).unwrap()
    }

    fn t(v: f64) -> TrajectoryEnergy {
        TrajectoryEnergy::new(v).unwrap()
    }

    #[test]
    fn report_pass_rule() {
        let r = ResidualReport::new("x", vec!["a".into(), "b".into()], vec![1e-3, -2e-3], 2e-3);
        assert_eq!(r.max_abs, 2e-3);
        assert!(r.passed);
        let r = ResidualReport::new("x", vec!["a".into()], vec![f64::NAN], 1.0);
        assert!(!r.passed);
    }

    #[test]
    fn ode_residual_at_origin() {
        let r = residual_profile_ode(e(0.0), t(0.0), &QuadratureConfig::default()).unwrap();
        assert!(r.abs() < 1e-9, "{r}");
    }

    #[test]
    fn ode_residual_below_barrier() {
        let r = residual_profile_ode(e(-0.4), t(0.7), &QuadratureConfig::default()).unwrap();
        assert!(r.abs() < 1e-8, "{r}");
    }

    #[test]
    fn kernel_fd_residual_examples() {
        let r = residual_kernel_ode(e(1.0), 0.5, 1e-5).unwrap();
        assert!(r.norm() < 1e-9, "{r}");
        let w = kernel_weight(e(-0.4), 1.9).unwrap().norm();
        let r = residual_kernel_ode(e(-0.4), 1.9, 1e-6).unwrap();
        assert!(r.norm() / w < 1e-6, "{}", r.norm() / w);
        assert!(residual_kernel_ode(e(0.0), 1.99, 0.02).is_err());
    }

    #[test]
    fn analytic_kernel_residual_vanishes_at_origin() {
        for eps in [-3.0, -0.4, 0.0, 0.4, 1.0, 5.7] {
            assert_eq!(
                residual_kernel_ode_analytic(e(eps), 0.0).unwrap(),
                Complex64::new(0.0, 0.0)
            );
        }
    }

    #[test]
    fn fd_order_is_two() {
        let order = kernel_fd_order(e(1.0), 0.5, 1e-2).unwrap();
        assert!((order - 2.0).abs() < 0.1, "{order}");
    }

    #[test]
    fn normalization_is_exact() {
        assert_eq!(check_normalization(e(0.0)), 1.0);
        assert_eq!(check_normalization(e(5.7)), 1.0);
    }

    #[test]
    fn symmetry_report() {
        let cfg = QuadratureConfig::default();
        let etas = uniform_grid(-6.0, 6.0, 25);
        let r = check_symmetry(e(0.0), &etas, &cfg, 1e-12).unwrap();
        assert!(r.passed, "{}", r.max_abs);
        let r = check_symmetry(e(0.4), &etas, &cfg, 1e-10).unwrap();
        assert!(r.passed, "{}", r.max_abs);
        let r = check_symmetry(e(0.4), &etas, &cfg, 0.0).unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn liouville_examples() {
        let cfg = QuadratureConfig::default();
        let h = LIOUVILLE_STEP;
        for (eps, x, p) in [(-0.4, 2.0, 2.5), (0.3, -1.0, 0.2)] {
            let pt = PhaseSpacePoint::new(x, p);
            let r = residual_liouville(e(eps), pt, Side::Left, &cfg, h).unwrap();
            let scale = liouville_scale(e(eps), pt, &cfg).unwrap();
            assert!(r.abs() < 1e-5 * scale, "{r} vs {scale}");
        }
        let on = PhaseSpacePoint::new(1.0, 1.0);
        assert!(matches!(
            residual_liouville(e(0.0), on, Side::Left, &cfg, h),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn liouville_point_set_avoids_separatrix() {
        let pts = liouville_points();
        assert_eq!(pts.len(), 50);
        assert!(pts
            .iter()
            .all(|pt| (pt.p - pt.x).abs() > 10.0 * LIOUVILLE_STEP));
    }

    #[test]
    fn suite_parsing() {
        assert_eq!("ode".parse::<Suite>().unwrap(), Suite::Ode);
        assert!("nope".parse::<Suite>().is_err());
    }
}
