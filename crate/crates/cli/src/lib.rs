//! Command-line frontend: deterministic CSV and text emitters for transmission
//! sweeps, Wigner profiles, phase-space grids, partial-weight traces and the
//! validation suite.
//!
//! Exit codes: 0 success, 1 computation failure, 2 malformed arguments,
//! 3 validation found a failing check.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use barrier_wigner::coefficients::{
    default_samples, estimate_period, partial_weight_on, HalfLine, PartialWeightTrace,
};
use barrier_wigner::phasespace::{evaluate_grid, GridSpec, Side};
use barrier_wigner::profile::{uniform_grid, ScaledEnergy, TrajectoryEnergy, WignerProfile};
use barrier_wigner::validation::{run_suite, ResidualReport, Suite, SuiteOptions, Tolerances};
use barrier_wigner::{transmission_closed, transmission_integral, QuadratureConfig};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_COMPUTATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "barrier-wigner",
    version,
    about = "Wigner functions and transmission coefficients of the parabolic barrier"
)]
struct Cli {
    #[command(flatten)]
    quadrature: QuadratureArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct QuadratureArgs {
    /// Truncation half-width of the xi integrals
    #[arg(long, global = true, allow_negative_numbers = true)]
    xi_max: Option<f64>,

    /// Fixed trapezoid spacing (default: chosen per evaluation point)
    #[arg(long, global = true, allow_negative_numbers = true)]
    xi_step: Option<f64>,

    /// Target absolute accuracy of every quadrature
    #[arg(long, global = true, allow_negative_numbers = true)]
    tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transmission and reflection coefficients
    #[command(allow_negative_numbers = true)]
    Transmit {
        /// Single scaled energy
        #[arg(long, conflicts_with_all = ["eps_min", "eps_max", "steps"])]
        eps: Option<f64>,
        #[arg(long, default_value_t = -3.0)]
        eps_min: f64,
        #[arg(long, default_value_t = 3.0)]
        eps_max: f64,
        /// Number of sweep points
        #[arg(long, default_value_t = 601)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wigner profile W(eta) and optionally its derivatives
    #[command(allow_negative_numbers = true)]
    Profile {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        eta_min: f64,
        #[arg(long)]
        eta_max: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        derivatives: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Masked Wigner function on a phase-space grid
    #[command(allow_negative_numbers = true)]
    Grid {
        #[arg(long, default_value_t = -0.4)]
        eps: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
        #[arg(long, default_value_t = -3.5)]
        x_min: f64,
        #[arg(long, default_value_t = 3.5)]
        x_max: f64,
        #[arg(long, default_value_t = -3.5)]
        p_min: f64,
        #[arg(long, default_value_t = 3.5)]
        p_max: f64,
        #[arg(long, default_value_t = 201)]
        nx: usize,
        #[arg(long, default_value_t = 201)]
        np: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Running Wigner weight of above-barrier trajectories
    #[command(allow_negative_numbers = true)]
    Weight {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        lambda_max: f64,
        /// Number of cutoffs (default: spacing 0.01)
        #[arg(long)]
        samples: Option<usize>,
        /// Averaging window in samples (default: one estimated oscillation period)
        #[arg(long)]
        window: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual checks of the exact identities
    #[command(allow_negative_numbers = true)]
    Validate {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Relative residual threshold of the profile ODE
        #[arg(long)]
        tol_profile: Option<f64>,
        /// Threshold of the kernel ODE with the closed-form derivative
        #[arg(long)]
        tol_kernel: Option<f64>,
        #[arg(long)]
        tol_symmetry: Option<f64>,
        #[arg(long)]
        tol_normalization: Option<f64>,
        /// Threshold of the windowed full-line weight cross-check
        #[arg(long)]
        tol_weight: Option<f64>,
        #[arg(long)]
        tol_liouville: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Integral,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SideArg {
    Left,
    Right,
    Full,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
            SideArg::Full => Side::Full,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Ode,
    Kernel,
    Symmetry,
    Normalization,
    Liouville,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Ode => Suite::Ode,
            SuiteArg::Kernel => Suite::Kernel,
            SuiteArg::Symmetry => Suite::Symmetry,
            SuiteArg::Normalization => Suite::Normalization,
            SuiteArg::Liouville => Suite::Liouville,
        }
    }
}

/// Formats with 17 significant digits; positional notation for moderate
/// magnitudes, scientific otherwise.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..16).contains(&exp) {
        let decimals = (16 - exp) as usize;
        format!("{v:.decimals$}")
    } else {
        sci
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        let message = Cli::command()
            .error(ErrorKind::ValueValidation, message.into())
            .render()
            .to_string();
        Self {
            code: EXIT_USAGE,
            message,
        }
    }

    fn computation(err: barrier_wigner::Error) -> Self {
        Self {
            code: EXIT_COMPUTATION,
            message: format!("error: {err}\n"),
        }
    }

    fn io(path: &Path, err: std::io::Error) -> Self {
        Self {
            code: EXIT_COMPUTATION,
            message: format!("error: cannot write {}: {err}\n", path.display()),
        }
    }
}

fn finite(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Failure::usage(format!("--{name} must be finite, got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::usage(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Failure::usage(format!(
            "--{name} must be non-negative, got {v}"
        )))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize, Failure> {
    if v >= min {
        Ok(v)
    } else {
        Err(Failure::usage(format!(
            "--{name} must be at least {min}, got {v}"
        )))
    }
}

fn ordered(lo_name: &str, lo: f64, hi_name: &str, hi: f64) -> Result<(), Failure> {
    finite(lo_name, lo)?;
    finite(hi_name, hi)?;
    if lo < hi {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "--{lo_name} ({lo}) must be smaller than --{hi_name} ({hi})"
        )))
    }
}

fn energy(v: f64) -> Result<ScaledEnergy, Failure> {
    ScaledEnergy::new(finite("eps", v)?).map_err(Failure::computation)
}

fn quadrature_config(args: &QuadratureArgs) -> Result<QuadratureConfig, Failure> {
    let mut cfg = match args.tolerance {
        Some(t) => QuadratureConfig::with_tolerance(positive("tolerance", t)?),
        None => QuadratureConfig::default(),
    };
    if let Some(x) = args.xi_max {
        cfg = cfg.with_xi_max(positive("xi-max", x)?);
    }
    if let Some(h) = args.xi_step {
        cfg = cfg.with_step(positive("xi-step", h)?);
    }
    cfg.validate().map_err(|e| Failure::usage(e.to_string()))?;
    Ok(cfg)
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn dispatch<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_OK
            };
            let text = err.render().to_string();
            let sink: &mut dyn Write = if code == EXIT_OK { stdout } else { stderr };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match run(cli, stdout) {
        Ok(code) => code,
        Err(failure) => {
            let _ = stderr.write_all(failure.message.as_bytes());
            failure.code
        }
    }
}

fn run(cli: Cli, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = quadrature_config(&cli.quadrature)?;
    match cli.command {
        Command::Transmit {
            eps,
            eps_min,
            eps_max,
            steps,
            method,
            out,
        } => {
            let energies = match eps {
                Some(e) => vec![finite("eps", e)?],
                None => {
                    at_least("steps", steps, 1)?;
                    if steps > 1 {
                        ordered("eps-min", eps_min, "eps-max", eps_max)?;
                    } else {
                        finite("eps-min", eps_min)?;
                    }
                    uniform_grid(eps_min, eps_max, steps)
                }
            };
            let csv = transmit_csv(&energies, method, &cfg)?;
            emit(out.as_deref(), &csv, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Profile {
            eps,
            eta_min,
            eta_max,
            samples,
            derivatives,
            out,
        } => {
            let eps = energy(eps)?;
            at_least("samples", samples, 1)?;
            if samples > 1 {
                ordered("eta-min", eta_min, "eta-max", eta_max)?;
            } else {
                finite("eta-min", eta_min)?;
            }
            let grid = uniform_grid(eta_min, eta_max, samples)
                .into_iter()
                .map(TrajectoryEnergy::new)
                .collect::<Result<Vec<_>, _>>()
                .map_err(Failure::computation)?;
            let profile = WignerProfile::sample(eps, grid, derivatives, &cfg)
                .map_err(Failure::computation)?;
            emit(out.as_deref(), &profile_csv(&profile), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Grid {
            eps,
            side,
            x_min,
            x_max,
            p_min,
            p_max,
            nx,
            np,
            out,
        } => {
            let eps = energy(eps)?;
            ordered("x-min", x_min, "x-max", x_max)?;
            ordered("p-min", p_min, "p-max", p_max)?;
            at_least("nx", nx, 1)?;
            at_least("np", np, 1)?;
            let spec = GridSpec {
                x_range: (x_min, x_max),
                p_range: (p_min, p_max),
                nx,
                np,
                side: side.into(),
            };
            let grid = evaluate_grid(eps, &spec, &cfg).map_err(Failure::computation)?;
            let mut csv = String::from("X,P,W\n");
            for (i, row) in grid.values.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{},{},{}",
                        fmt_f64(grid.x_nodes[j]),
                        fmt_f64(grid.p_nodes[i]),
                        fmt_f64(*v)
                    );
                }
            }
            emit(out.as_deref(), &csv, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Weight {
            eps,
            lambda_max,
            samples,
            window,
            out,
        } => {
            let eps = energy(eps)?;
            positive("lambda-max", lambda_max)?;
            let samples = match samples {
                Some(n) => at_least("samples", n, 2)?,
                None => default_samples(lambda_max).map_err(|e| Failure::usage(e.to_string()))?,
            };
            if let Some(w) = window {
                at_least("window", w, 1)?;
            }
            let trace = partial_weight_on(eps, HalfLine::Above, lambda_max, samples, &cfg, 1)
                .map_err(Failure::computation)?;
            let window = window
                .or_else(|| estimate_period(&trace.cumulative))
                .unwrap_or(trace.len());
            let trace = trace.with_window(window).map_err(Failure::computation)?;
            emit(out.as_deref(), &weight_csv(&trace), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Validate {
            suite,
            tol_profile,
            tol_kernel,
            tol_symmetry,
            tol_normalization,
            tol_weight,
            tol_liouville,
            out,
        } => {
            let mut tolerances = Tolerances::default();
            let overrides = [
                ("tol-profile", tol_profile, &mut tolerances.profile),
                ("tol-kernel", tol_kernel, &mut tolerances.kernel),
                ("tol-symmetry", tol_symmetry, &mut tolerances.symmetry),
                (
                    "tol-normalization",
                    tol_normalization,
                    &mut tolerances.normalization,
                ),
                (
                    "tol-weight",
                    tol_weight,
                    &mut tolerances.normalization_weight,
                ),
                ("tol-liouville", tol_liouville, &mut tolerances.liouville),
            ];
            for (name, value, slot) in overrides {
                if let Some(v) = value {
                    *slot = non_negative(name, v)?;
                }
            }
            let opts = SuiteOptions {
                cfg,
                tolerances,
                ..SuiteOptions::default()
            };
            let reports = run_suite(suite.into(), &opts).map_err(Failure::computation)?;
            if let Some(path) = out.as_deref() {
                write_atomic(path, &validation_csv(&reports))?;
            }
            emit(None, &validation_table(&reports), stdout)?;
            Ok(if reports.iter().all(|r| r.passed) {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            })
        }
    }
}

fn transmit_csv(
    energies: &[f64],
    method: Method,
    cfg: &QuadratureConfig,
) -> Result<String, Failure> {
    let mut csv = String::from(match method {
        Method::Both => "epsilon,T,R,T_integral,abs_diff\n",
        _ => "epsilon,T,R\n",
    });
    for &e in energies {
        let eps = energy(e)?;
        let closed = transmission_closed(eps);
        let line = match method {
            Method::Closed => format!(
                "{},{},{}",
                fmt_f64(e),
                fmt_f64(closed),
                fmt_f64(1.0 - closed)
            ),
            Method::Integral => {
                let t = transmission_integral(eps, cfg).map_err(Failure::computation)?;
                format!("{},{},{}", fmt_f64(e), fmt_f64(t), fmt_f64(1.0 - t))
            }
            Method::Both => {
                let t = transmission_integral(eps, cfg).map_err(Failure::computation)?;
                format!(
                    "{},{},{},{},{}",
                    fmt_f64(e),
                    fmt_f64(closed),
                    fmt_f64(1.0 - closed),
                    fmt_f64(t),
                    fmt_f64((t - closed).abs())
                )
            }
        };
        csv.push_str(&line);
        csv.push('\n');
    }
    Ok(csv)
}

fn profile_csv(profile: &WignerProfile) -> String {
    let mut csv = String::new();
    match (&profile.d1, &profile.d2) {
        (Some(d1), Some(d2)) => {
            csv.push_str("eta,W,dW,d2W\n");
            for k in 0..profile.len() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt_f64(profile.eta_grid[k].value()),
                    fmt_f64(profile.values[k]),
                    fmt_f64(d1[k]),
                    fmt_f64(d2[k])
                );
            }
        }
        _ => {
            csv.push_str("eta,W\n");
            for (eta, w) in profile.eta_grid.iter().zip(&profile.values) {
                let _ = writeln!(csv, "{},{}", fmt_f64(eta.value()), fmt_f64(*w));
            }
        }
    }
    csv
}

fn weight_csv(trace: &PartialWeightTrace) -> String {
    let mut csv = String::from("lambda,cumulative,averaged\n");
    for k in 0..trace.len() {
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_f64(trace.lambda_grid[k]),
            fmt_f64(trace.cumulative[k]),
            fmt_f64(trace.averaged[k])
        );
    }
    csv
}

fn validation_csv(reports: &[ResidualReport]) -> String {
    let mut csv = String::from("check,point,residual,tolerance,passed\n");
    for r in reports {
        for (point, residual) in r.points.iter().zip(&r.residuals) {
            let ok = residual.abs() <= r.tolerance;
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                r.label,
                point,
                fmt_f64(*residual),
                fmt_f64(r.tolerance),
                ok
            );
        }
    }
    csv
}

fn validation_table(reports: &[ResidualReport]) -> String {
    let mut text = format!(
        "{:<28} {:>6} {:>12} {:>12}  {}\n",
        "check", "points", "max_abs", "tolerance", "result"
    );
    for r in reports {
        let _ = writeln!(
            text,
            "{:<28} {:>6} {:>12.3e} {:>12.3e}  {}",
            r.label,
            r.residuals.len(),
            r.max_abs,
            r.tolerance,
            if r.passed { "pass" } else { "FAIL" }
        );
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    let _ = writeln!(text, "{passed}/{} checks passed", reports.len());
    text
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(path) => write_atomic(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io(Path::new("<stdout>"), e)),
    }
}

/// Writes through a temporary file in the target directory, then renames it.
fn write_atomic(path: &Path, text: &str) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::io(path, e))?;
    tmp.write_all(text.as_bytes())
        .map_err(|e| Failure::io(path, e))?;
    tmp.persist(path).map_err(|e| Failure::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.5), "0.50000000000000000");
        assert_eq!(fmt_f64(-3.0), "-3.0000000000000000");
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(1e-7), "9.9999999999999995e-8");
        assert_eq!(fmt_f64(123.25), "123.25000000000000");
        for v in [0.1, 1.0 / 3.0, -2.5e-3, 6.02e23, 3.5e-6, 0.958576] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }
}
