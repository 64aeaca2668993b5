//! Eckart body frame for the quantum three-body problem.
//!
//! The crate builds the Eckart frame from mass-scaled Jacobi vectors and an
//! equilibrium geometry, converts between Eckart internal variables
//! `(f1, f2, tau)` and Jacobi-bond variables `(r1, r2, cos theta)`, evaluates
//! the vibrational, Coriolis and rotational coefficient fields of the
//! kinetic-energy operator, and diagonalizes the vibrational Hamiltonian in
//! the zero angular momentum sector.
//!
//! Conventions used throughout:
//!
//! - Jacobi vectors: `r1 = R3 - R2`, `r2 = CM23 - R1`.
//! - Mass scaling stores `sqrt(mu) * r`, so the kinetic energy is
//!   `-(1/2)(Laplacian_1 + Laplacian_2)` in the stored coordinates.
//! - Equilibrium moments are labelled `I1 = y1^2 + y2^2 >= I2 = x1^2 + x2^2`.
//! - `e3 = e1 x e2`, and `phi` in `[0, pi]` so that `sin(phi) >= 0`.
//! - Units: hbar = 1, masses and lengths in whatever consistent units the
//!   caller chooses.

pub mod check;
pub mod config;
pub mod equilibrium;
pub mod error;
pub mod frame;
pub mod geometry;
pub mod hamiltonian;
pub mod internal;
pub mod kinetic;
pub mod spectral;

pub use equilibrium::{degeneracy_check, principal_moments, EquilibriumGeometry, DEFAULT_EPS_DEG};
pub use error::{Error, Result};
pub use frame::{
    area_diagnostic, build_frame, eckart_residual, eckart_vectors, frame_oracle, EckartFrame, EckartVectors,
    OracleFrame,
};
pub use geometry::{jacobi_from_lab, JacobiPair, MassTriple, ReducedMasses, Scaling, Vec3};
pub use hamiltonian::{
    combined_jacobi_coefficients, coriolis_b3, coriolis_c, coriolis_c_numeric, coriolis_operator_coefficients,
    h0_coefficients, rigid_rotational_tensor, rotational_tensor, u_inverse, CoriolisCoefficients, CoriolisOperator,
    H0Coefficients, H0Pairing, InverseInertiaTensor, JacobiCombinedCoefficients,
};
pub use internal::{
    eckart_from_jacobi, eckart_parameter, equal_moment_branch, rigid_body_limit, InternalCoordsEckart,
    InternalCoordsJacobi,
};
pub use spectral::{CoordinateSystem, GridSpec, ModelPotential, PotentialKind, RadialStencil, SpectrumResult};
