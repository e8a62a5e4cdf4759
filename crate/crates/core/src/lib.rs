//! Wigner phase-space description of tunnelling through a parabolic barrier.
//!
//! An energy eigenstate of the inverted harmonic oscillator
//! `H = p^2 / 2M - M Omega^2 x^2 / 2` has a Wigner function that is constant
//! along classical trajectories, so it depends on phase space only through the
//! trajectory energy `eta = H / (hbar Omega)`, masked by a step function on one
//! side of the separatrix. The crate evaluates
//!
//! * the Fourier kernel and the profile `W_eps(eta)` ([`profile`]),
//! * transmission and reflection coefficients, both in closed form and as the
//!   Wigner weight of above-barrier trajectories ([`coefficients`]),
//! * masked Wigner functions on phase-space grids ([`phasespace`]),
//! * residuals of the identities these objects satisfy ([`validation`]).

pub mod coefficients;
pub mod error;
pub mod phasespace;
pub mod profile;
pub mod quadrature;
pub mod validation;

pub use coefficients::{
    partial_weight, reflection, transmission_closed, transmission_integral, CoefficientPair,
    HalfLine, PartialWeightTrace,
};
pub use error::{Error, Result};
pub use phasespace::{
    classify_side, evaluate_grid, scale_point, trajectory_energy, wigner_masked, BarrierParams,
    GridSpec, PhaseSpaceGrid, PhaseSpacePoint, SeparatrixSide, Side,
};
pub use profile::{
    kernel_weight, profile_derivatives, profile_value, tau_of_xi, xi_of_tau, KernelPoint,
    ProfileDerivatives, ScaledEnergy, SubstitutedCoordinate, TrajectoryEnergy, WignerProfile,
};
pub use quadrature::{integrate_decaying, QuadratureConfig};
pub use validation::{ResidualReport, Suite, SuiteOptions};
