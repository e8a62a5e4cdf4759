//! Scaled phase space, the separatrix `P = X`, and the masked Wigner functions.
//!
//! Everything inside this module works with `X = x sqrt(M Omega / hbar)` and
//! `P = p / sqrt(M hbar Omega)`, in which the trajectory energy is
//! `eta = (P^2 - X^2) / 2` and the separatrix `p = M Omega x` becomes `P = X`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::profile::{profile_value, ScaledEnergy, TrajectoryEnergy};
use crate::quadrature::QuadratureConfig;

/// Mass, barrier steepness `Omega` and reduced Planck constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierParams {
    pub mass: f64,
    pub steepness: f64,
    pub hbar: f64,
}

impl BarrierParams {
    pub fn new(mass: f64, steepness: f64, hbar: f64) -> Result<Self> {
        let params = Self {
            mass,
            steepness,
            hbar,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mass", self.mass),
            ("steepness", self.steepness),
            ("hbar", self.hbar),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// `H(x, p) = p^2 / 2M - M Omega^2 x^2 / 2`.
    pub fn hamiltonian(&self, x: f64, p: f64) -> f64 {
        p * p / (2.0 * self.mass) - 0.5 * self.mass * self.steepness * self.steepness * x * x
    }

    /// `E / (hbar Omega)`.
    pub fn scaled_energy(&self, energy: f64) -> Result<ScaledEnergy> {
        ScaledEnergy::new(energy / (self.hbar * self.steepness))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpacePoint {
    pub x: f64,
    pub p: f64,
}

impl PhaseSpacePoint {
    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    /// Point reflection `(X, P) -> (-X, -P)`.
    pub fn reflected(self) -> Self {
        Self {
            x: -self.x,
            p: -self.p,
        }
    }
}

/// Physical `(x, p)` to scaled `(X, P)`.
pub fn scale_point(params: &BarrierParams, x: f64, p: f64) -> Result<PhaseSpacePoint> {
    params.validate()?;
    let length = (params.mass * params.steepness / params.hbar).sqrt();
    let momentum = (params.mass * params.hbar * params.steepness).sqrt();
    Ok(PhaseSpacePoint {
        x: x * length,
        p: p / momentum,
    })
}

/// `eta = (P^2 - X^2) / 2`.
pub fn trajectory_energy(pt: PhaseSpacePoint) -> TrajectoryEnergy {
    // Finite inputs give a finite result unless the squares overflow.
    TrajectoryEnergy::new(0.5 * (pt.p * pt.p - pt.x * pt.x))
        .unwrap_or_else(|_| panic!("trajectory energy overflow at {pt:?}"))
}

/// Position of a point relative to the separatrix `P = X`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatrixSide {
    Above,
    Below,
    On,
}

pub fn classify_side(pt: PhaseSpacePoint) -> SeparatrixSide {
    if pt.p > pt.x {
        SeparatrixSide::Above
    } else if pt.p < pt.x {
        SeparatrixSide::Below
    } else {
        SeparatrixSide::On
    }
}

/// Scattering boundary condition selected by the Heaviside mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Particle incident from the left: support above the separatrix.
    Left,
    /// Particle incident from the right: support below the separatrix.
    Right,
    /// No mask.
    Full,
}

impl Side {
    /// Mask weight at a point; `1/2` on the separatrix itself.
    pub fn mask(self, pt: PhaseSpacePoint) -> f64 {
        match (self, classify_side(pt)) {
            (Side::Full, _) => 1.0,
            (_, SeparatrixSide::On) => 0.5,
            (Side::Left, SeparatrixSide::Above) | (Side::Right, SeparatrixSide::Below) => 1.0,
            _ => 0.0,
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            "full" => Ok(Side::Full),
            other => Err(Error::Parameter(format!("unknown side '{other}'"))),
        }
    }
}

/// Masked Wigner function of the eigenstate `eps` at a scaled point.
pub fn wigner_masked(
    eps: ScaledEnergy,
    pt: PhaseSpacePoint,
    side: Side,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    // Keep the computation even where the mask is zero so the quadrature
    // contract (and its errors) do not depend on the side.
    let value = profile_value(eps, trajectory_energy(pt), cfg)?;
    Ok(apply_mask(value, side.mask(pt)))
}

#[inline]
fn apply_mask(value: f64, mask: f64) -> f64 {
    if mask == 0.0 {
        0.0
    } else {
        value * mask
    }
}

/// Rectangular lattice description. Nodes on each axis are equally spaced and
/// include both interval ends; a single node sits at the lower end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_range: (f64, f64),
    pub p_range: (f64, f64),
    pub nx: usize,
    pub np: usize,
    pub side: Side,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.np == 0 {
            return Err(Error::Parameter(
                "grid resolutions must be at least 1".into(),
            ));
        }
        for (name, (lo, hi)) in [("x", self.x_range), ("p", self.p_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Parameter(format!(
                    "{name} range [{lo}, {hi}] must be finite and non-degenerate"
                )));
            }
        }
        Ok(())
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        crate::profile::uniform_grid(self.x_range.0, self.x_range.1, self.nx)
    }

    pub fn p_nodes(&self) -> Vec<f64> {
        crate::profile::uniform_grid(self.p_range.0, self.p_range.1, self.np)
    }
}

/// Masked Wigner values; `values[i][j]` sits at `(X_j, P_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_range: (f64, f64),
    pub p_range: (f64, f64),
    pub nx: usize,
    pub np: usize,
    pub side: Side,
    pub x_nodes: Vec<f64>,
    pub p_nodes: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl PhaseSpaceGrid {
    pub fn point(&self, row: usize, col: usize) -> PhaseSpacePoint {
        PhaseSpacePoint::new(self.x_nodes[col], self.p_nodes[row])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Serial,
    #[default]
    Parallel,
}

pub fn evaluate_grid(
    eps: ScaledEnergy,
    spec: &GridSpec,
    cfg: &QuadratureConfig,
) -> Result<PhaseSpaceGrid> {
    evaluate_grid_with(eps, spec, cfg, Parallelism::default())
}

/// Evaluates the masked Wigner function on every lattice node.
///
/// The profile is computed once per distinct bit pattern of `eta`.
pub fn evaluate_grid_with(
    eps: ScaledEnergy,
    spec: &GridSpec,
    cfg: &QuadratureConfig,
    parallelism: Parallelism,
) -> Result<PhaseSpaceGrid> {
    spec.validate()?;
    cfg.validate()?;
    let x_nodes = spec.x_nodes();
    let p_nodes = spec.p_nodes();

    let mut distinct: Vec<u64> = p_nodes
        .iter()
        .flat_map(|&p| {
            x_nodes.iter().map(move |&x| {
                trajectory_energy(PhaseSpacePoint::new(x, p))
                    .value()
                    .to_bits()
            })
        })
        .collect();
    distinct.sort_unstable();
    distinct.dedup();

    let eval = |bits: &u64| -> Result<(u64, f64)> {
        let eta = TrajectoryEnergy::new(f64::from_bits(*bits))?;
        Ok((*bits, profile_value(eps, eta, cfg)?))
    };
    let computed: Vec<(u64, f64)> = match parallelism {
        Parallelism::Serial => distinct.iter().map(eval).collect::<Result<_>>()?,
        Parallelism::Parallel => distinct.par_iter().map(eval).collect::<Result<_>>()?,
    };
    let cache: HashMap<u64, f64> = computed.into_iter().collect();

    let values = p_nodes
        .iter()
        .map(|&p| {
            x_nodes
                .iter()
                .map(|&x| {
                    let pt = PhaseSpacePoint::new(x, p);
                    let bits = trajectory_energy(pt).value().to_bits();
                    apply_mask(cache[&bits], spec.side.mask(pt))
                })
                .collect()
        })
        .collect();

    Ok(PhaseSpaceGrid {
        x_range: spec.x_range,
        p_range: spec.p_range,
        nx: spec.nx,
        np: spec.np,
        side: spec.side,
        x_nodes,
        p_nodes,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn e(v: f64) -> ScaledEnergy {
        ScaledEnergy::new(v).unwrap()
    }

    #[test]
    fn scaling_examples() {
        let unit = BarrierParams::new(1.0, 1.0, 1.0).unwrap();
        assert_eq!(
            scale_point(&unit, 1.0, 1.0).unwrap(),
            PhaseSpacePoint::new(1.0, 1.0)
        );
        let a = BarrierParams::new(2.0, 0.5, 1.0).unwrap();
        assert_eq!(
            scale_point(&a, 1.0, 0.0).unwrap(),
            PhaseSpacePoint::new(1.0, 0.0)
        );
        let b = BarrierParams::new(1.0, 4.0, 1.0).unwrap();
        assert_eq!(
            scale_point(&b, 0.0, 2.0).unwrap(),
            PhaseSpacePoint::new(0.0, 1.0)
        );
    }

    #[test]
    fn scaled_energy_matches_hamiltonian() {
        let params = BarrierParams::new(1.7, 0.3, 0.9).unwrap();
        for (x, p) in [(0.4, -1.2), (3.0, 2.0), (-0.1, 0.0)] {
            let pt = scale_point(&params, x, p).unwrap();
            let expect = params.hamiltonian(x, p) / (params.hbar * params.steepness);
            assert_abs_diff_eq!(trajectory_energy(pt).value(), expect, epsilon = 1e-13);
        }
    }

    #[test]
    fn rejects_non_positive_params() {
        assert!(BarrierParams::new(0.0, 1.0, 1.0).is_err());
        assert!(BarrierParams::new(1.0, -1.0, 1.0).is_err());
        assert!(BarrierParams::new(1.0, 1.0, f64::NAN).is_err());
        let bad = BarrierParams {
            mass: 1.0,
            steepness: 1.0,
            hbar: 0.0,
        };
        assert!(scale_point(&bad, 0.0, 0.0).is_err());
    }

    #[test]
    fn trajectory_energy_examples() {
        assert_eq!(
            trajectory_energy(PhaseSpacePoint::new(0.0, 1.0)).value(),
            0.5
        );
        assert_eq!(
            trajectory_energy(PhaseSpacePoint::new(1.0, 1.0)).value(),
            0.0
        );
        assert_eq!(
            trajectory_energy(PhaseSpacePoint::new(2.0, 0.0)).value(),
            -2.0
        );
    }

    #[test]
    fn classification() {
        assert_eq!(
            classify_side(PhaseSpacePoint::new(0.0, 1.0)),
            SeparatrixSide::Above
        );
        assert_eq!(
            classify_side(PhaseSpacePoint::new(1.0, 0.0)),
            SeparatrixSide::Below
        );
        assert_eq!(
            classify_side(PhaseSpacePoint::new(1.0, 1.0)),
            SeparatrixSide::On
        );
    }

    #[test]
    fn masked_values() {
        let cfg = QuadratureConfig::default();
        let below = PhaseSpacePoint::new(2.5, 2.0);
        assert_eq!(
            wigner_masked(e(-0.4), below, Side::Left, &cfg).unwrap(),
            0.0
        );
        let above = PhaseSpacePoint::new(2.0, 2.5);
        let expect = profile_value(e(-0.4), TrajectoryEnergy::new(1.125).unwrap(), &cfg).unwrap();
        assert_eq!(
            wigner_masked(e(-0.4), above, Side::Left, &cfg).unwrap(),
            expect
        );
        let pt = PhaseSpacePoint::new(1.0, 2.0);
        assert_eq!(
            wigner_masked(e(0.3), pt, Side::Left, &cfg).unwrap(),
            wigner_masked(e(0.3), pt.reflected(), Side::Right, &cfg).unwrap()
        );
    }

    #[test]
    fn separatrix_splits_in_half() {
        let cfg = QuadratureConfig::default();
        let pt = PhaseSpacePoint::new(0.7, 0.7);
        let full = wigner_masked(e(0.2), pt, Side::Full, &cfg).unwrap();
        assert_eq!(
            wigner_masked(e(0.2), pt, Side::Left, &cfg).unwrap(),
            0.5 * full
        );
        assert_eq!(
            wigner_masked(e(0.2), pt, Side::Right, &cfg).unwrap(),
            0.5 * full
        );
    }

    #[test]
    fn single_node_grid_matches_pointwise() {
        let cfg = QuadratureConfig::default();
        let spec = GridSpec {
            x_range: (-1.0, 2.0),
            p_range: (0.5, 1.0),
            nx: 1,
            np: 1,
            side: Side::Left,
        };
        let grid = evaluate_grid(e(-0.4), &spec, &cfg).unwrap();
        let direct =
            wigner_masked(e(-0.4), PhaseSpacePoint::new(-1.0, 0.5), Side::Left, &cfg).unwrap();
        assert_eq!(grid.values, vec![vec![direct]]);
    }

    #[test]
    fn masks_sum_to_full_grid() {
        let cfg = QuadratureConfig::default();
        let make = |side| GridSpec {
            x_range: (-3.0, 3.0),
            p_range: (-3.0, 3.0),
            nx: 21,
            np: 21,
            side,
        };
        let left = evaluate_grid(e(-0.4), &make(Side::Left), &cfg).unwrap();
        let right = evaluate_grid(e(-0.4), &make(Side::Right), &cfg).unwrap();
        let full = evaluate_grid(e(-0.4), &make(Side::Full), &cfg).unwrap();
        for i in 0..21 {
            for j in 0..21 {
                assert_eq!(left.values[i][j] + right.values[i][j], full.values[i][j]);
            }
        }
    }

    #[test]
    fn serial_and_parallel_grids_identical() {
        let cfg = QuadratureConfig::default();
        let spec = GridSpec {
            x_range: (-2.0, 2.0),
            p_range: (-1.0, 3.0),
            nx: 9,
            np: 7,
            side: Side::Right,
        };
        let a = evaluate_grid_with(e(0.6), &spec, &cfg, Parallelism::Serial).unwrap();
        let b = evaluate_grid_with(e(0.6), &spec, &cfg, Parallelism::Parallel).unwrap();
        let bits = |g: &PhaseSpaceGrid| -> Vec<u64> {
            g.values.iter().flatten().map(|v| v.to_bits()).collect()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.values.len(), 7);
        assert!(a.values.iter().all(|row| row.len() == 9));
    }

    #[test]
    fn grid_rejects_degenerate_specs() {
        let cfg = QuadratureConfig::default();
        let mut spec = GridSpec {
            x_range: (1.0, 1.0),
            p_range: (0.0, 1.0),
            nx: 2,
            np: 2,
            side: Side::Full,
        };
        assert!(evaluate_grid(e(0.0), &spec, &cfg).is_err());
        spec.x_range = (0.0, 1.0);
        spec.nx = 0;
        assert!(evaluate_grid(e(0.0), &spec, &cfg).is_err());
    }

    #[test]
    fn side_parsing() {
        assert_eq!("left".parse::<Side>().unwrap(), Side::Left);
        assert_eq!("full".parse::<Side>().unwrap(), Side::Full);
        assert!("up".parse::<Side>().is_err());
    }
}
