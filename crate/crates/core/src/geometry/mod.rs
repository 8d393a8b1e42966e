//! Discretized smooth metric measure spaces with boundary.
//!
//! Spaces live on flat boxes; a pointwise conformal factor σ changes the
//! metric to `e^{2σ/(m+n-2)}` times the flat one and the weight to
//! `φ − mσ/(m+n−2)`. Energies on changed spaces are evaluated on the base
//! at `e^{σ/2} w`; a second, direct assembly from the curvature of the
//! changed metric exists only to check that law.

mod conformal;
mod curvature;
pub(crate) mod energy;
mod fields;
mod grid;
mod space;

pub use conformal::{conformal_change, conformal_energy, conformal_law_residual, direct_energy};
pub(crate) use conformal::direct_form;
pub use curvature::{gromov_mean_curvature, weighted_laplacian, weighted_scalar_curvature};
pub use energy::EnergyParts;
pub use fields::{BoundaryField, ScalarField};
pub use grid::{Face, Grid, Side, Topology};
pub use space::{build_space, MeasureSpace, MAX_PHI_OVER_M};
