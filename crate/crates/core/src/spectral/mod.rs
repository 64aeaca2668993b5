//! Lowest `J = 0` levels of the vibrational Hamiltonian on a grid.

pub mod eigen;
pub mod legendre;
pub mod operator;
pub mod potential;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hamiltonian::H0Pairing;

pub use eigen::{lowest_eigenpairs, EigenOptions, EigenSolution, LinearOperator, Preconditioner, SolverMethod};
pub use operator::{
    build_h0_matrix, build_h0_matrix_with, radial_block_matrix, second_derivative, CoordinateSystem, GridSpec,
    H0Operator, RadialStencil, SeparablePreconditioner,
};
pub use potential::{ModelPotential, PotentialKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub grid: GridSpec,
    /// `||H v - lambda v|| / ||v||` for each eigenvalue.
    pub residual_norms: Vec<f64>,
    pub dimension: usize,
    pub method: SolverMethod,
    pub iterations: usize,
}

/// Builds the operator and returns its `opts.k` lowest eigenvalues.
pub fn compute_spectrum(
    grid: &GridSpec,
    pot: &ModelPotential,
    moments: (f64, f64),
    pairing: H0Pairing,
    opts: &EigenOptions,
) -> Result<SpectrumResult> {
    let op = build_h0_matrix_with(grid, pot, moments, pairing)?;
    let use_dense = op.dim() <= opts.dense_limit && !opts.force_iterative;
    let pre = if use_dense { None } else { Some(SeparablePreconditioner::new(&op)) };
    let sol = lowest_eigenpairs(&op, pre.as_ref().map(|p| p as &dyn Preconditioner), opts)?;
    Ok(SpectrumResult {
        eigenvalues: sol.values,
        grid: *grid,
        residual_norms: sol.residuals,
        dimension: op.dim(),
        method: sol.method,
        iterations: sol.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub rho: f64,
    pub jacobi: SpectrumResult,
    pub eckart: SpectrumResult,
    pub max_relative_difference: f64,
}

/// Compares the Jacobi-form spectrum with the equal-moment Eckart-form one
/// (`I1 = I2 = rho^2`). `eckart_pot` must be the same physical potential
/// read in Eckart lengths, e.g. `jacobi_pot.rescaled(1.0 / rho)`.
pub fn spectrum_equivalence_check(
    jacobi_grid: &GridSpec,
    eckart_grid: &GridSpec,
    rho: f64,
    jacobi_pot: &ModelPotential,
    eckart_pot: &ModelPotential,
    opts: &EigenOptions,
) -> Result<EquivalenceReport> {
    let jg = GridSpec { coordinate_system: CoordinateSystem::Jacobi, ..*jacobi_grid };
    let eg = GridSpec { coordinate_system: CoordinateSystem::Eckart, ..*eckart_grid };
    let i = rho * rho;
    let jacobi = compute_spectrum(&jg, jacobi_pot, (1.0, 1.0), H0Pairing::AsPrinted, opts)?;
    let eckart = compute_spectrum(&eg, eckart_pot, (i, i), H0Pairing::AsPrinted, opts)?;
    let max_relative_difference = jacobi
        .eigenvalues
        .iter()
        .zip(&eckart.eigenvalues)
        .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    Ok(EquivalenceReport { rho, jacobi, eckart, max_relative_difference })
}

/// Eckart grid matching a Jacobi grid under `f = rho r`.
pub fn eckart_grid_for(jacobi_grid: &GridSpec, rho: f64) -> GridSpec {
    GridSpec {
        r_max_1: jacobi_grid.r_max_1 * rho,
        r_max_2: jacobi_grid.r_max_2 * rho,
        coordinate_system: CoordinateSystem::Eckart,
        ..*jacobi_grid
    }
}
