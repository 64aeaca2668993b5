//! Grid discretization of the vibrational Hamiltonian for `J = 0`.
//!
//! With `psi = u / (q1 q2)` and a normalized Legendre basis in `tau` the
//! operator acting on `u` is
//!
//! ```text
//! sum_i -(a_i/2) u_qiqi + (1/2)(c1/q1^2 + c2/q2^2) l(l+1) u + U u
//! ```
//!
//! and is symmetric in the plain Euclidean inner product. Vectors are laid
//! out as `index = l * (n1 n2) + i1 * n2 + i2`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::{LinearOperator, Preconditioner};
use super::legendre::{gauss_legendre, transform};
use super::potential::ModelPotential;
use crate::error::{Error, Result};
use crate::hamiltonian::H0Pairing;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateSystem {
    /// Grid in `(f1, f2, tau)`; moments and pairing enter the coefficients.
    Eckart,
    /// Grid in `(r1, r2, cos theta)` with unit coefficients.
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialStencil {
    /// `(1, -2, 1) / h^2`, second order.
    ThreePoint,
    /// `(-1, 16, -30, 16, -1) / (12 h^2)` with odd reflection through both
    /// Dirichlet ends, fourth order.
    #[default]
    FivePoint,
}

fn default_stencil() -> RadialStencil {
    RadialStencil::FivePoint
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_r1: usize,
    pub n_r2: usize,
    pub r_max_1: f64,
    pub r_max_2: f64,
    pub n_tau: usize,
    pub coordinate_system: CoordinateSystem,
    #[serde(default = "default_stencil")]
    pub stencil: RadialStencil,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_r1: 120,
            n_r2: 120,
            r_max_1: 12.0,
            r_max_2: 12.0,
            n_tau: 16,
            coordinate_system: CoordinateSystem::Jacobi,
            stencil: RadialStencil::FivePoint,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_r1 < 8 || self.n_r2 < 8 {
            return Err(Error::InvalidGrid(format!(
                "radial point counts ({}, {}) must be at least 8",
                self.n_r1, self.n_r2
            )));
        }
        if self.n_tau < 4 {
            return Err(Error::InvalidGrid(format!("n_tau = {} must be at least 4", self.n_tau)));
        }
        for r in [self.r_max_1, self.r_max_2] {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidGrid(format!("r_max = {r} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.n_r1 * self.n_r2 * self.n_tau
    }

    /// Interior points `j h`, `j = 1..=n`, `h = r_max / (n + 1)`.
    pub fn radial_points(n: usize, r_max: f64) -> Vec<f64> {
        let h = r_max / (n + 1) as f64;
        (1..=n).map(|j| j as f64 * h).collect()
    }
}

/// Symmetric banded matrix with up to two off-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Banded {
    pub diag: Vec<f64>,
    pub off1: Vec<f64>,
    pub off2: Vec<f64>,
}

impl Banded {
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut m = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diag));
        for i in 0..n.saturating_sub(1) {
            m[(i, i + 1)] = self.off1[i];
            m[(i + 1, i)] = self.off1[i];
        }
        for i in 0..n.saturating_sub(2) {
            m[(i, i + 2)] = self.off2[i];
            m[(i + 2, i)] = self.off2[i];
        }
        m
    }
}

/// Second-derivative matrix on `n` interior points of `(0, r_max)` with
/// Dirichlet ends.
pub fn second_derivative(n: usize, r_max: f64, stencil: RadialStencil) -> Banded {
    let h = r_max / (n + 1) as f64;
    match stencil {
        RadialStencil::ThreePoint => {
            let s = 1.0 / (h * h);
            Banded { diag: vec![-2.0 * s; n], off1: vec![s; n - 1], off2: vec![0.0; n - 2] }
        }
        RadialStencil::FivePoint => {
            let s = 1.0 / (12.0 * h * h);
            let mut diag = vec![-30.0 * s; n];
            // ghost values u(-h) = -u(h) and u(r_max + h) = -u(r_max - h)
            diag[0] += s;
            diag[n - 1] += s;
            Banded { diag, off1: vec![16.0 * s; n - 1], off2: vec![-s; n - 2] }
        }
    }
}

/// Dense radial matrix `-(1/2) u'' + (l(l+1)/(2 r^2) + v(r)) u` for a single
/// degree of freedom.
pub fn radial_block_matrix(
    n: usize,
    r_max: f64,
    stencil: RadialStencil,
    l: usize,
    v: impl Fn(f64) -> f64,
) -> DMatrix<f64> {
    let d2 = second_derivative(n, r_max, stencil).dense();
    let r = GridSpec::radial_points(n, r_max);
    let ll = (l * (l + 1)) as f64;
    let mut m = d2 * -0.5;
    for (i, ri) in r.iter().enumerate() {
        m[(i, i)] += 0.5 * ll / (ri * ri) + v(*ri);
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
enum PotentialSamples {
    /// `U(q1, q2)` per radial point.
    Diagonal(Vec<f64>),
    /// `U(q1, q2, tau_k)` stored as `k * (n1 n2) + i1 n2 + i2`.
    Quadrature { values: Vec<f64>, transform: DMatrix<f64> },
}

/// The assembled operator; application is read-only and parallel over
/// angular blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct H0Operator {
    pub grid: GridSpec,
    pub q1: Vec<f64>,
    pub q2: Vec<f64>,
    /// Radial prefactors `a_i`.
    pub radial: [f64; 2],
    /// Angular prefactors `c_i`.
    pub angular: [f64; 2],
    d1: Banded,
    d2: Banded,
    potential: PotentialSamples,
    /// `tau`-averaged potential per radial point.
    mean_potential: Vec<f64>,
}

/// Builds the Jacobi-form operator or the Eckart-form one with moments
/// `(I1, I2)` and the default radial pairing.
pub fn build_h0_matrix(grid: &GridSpec, pot: &ModelPotential, moments: (f64, f64)) -> Result<H0Operator> {
    build_h0_matrix_with(grid, pot, moments, H0Pairing::default())
}

pub fn build_h0_matrix_with(
    grid: &GridSpec,
    pot: &ModelPotential,
    moments: (f64, f64),
    pairing: H0Pairing,
) -> Result<H0Operator> {
    grid.validate()?;
    pot.validate()?;
    let (radial, angular) = match grid.coordinate_system {
        CoordinateSystem::Jacobi => ([1.0, 1.0], [1.0, 1.0]),
        CoordinateSystem::Eckart => {
            let (i1, i2) = moments;
            if !(i1 > 0.0 && i2 > 0.0 && i1.is_finite() && i2.is_finite()) {
                return Err(Error::InvalidInput(format!("moments ({i1}, {i2}) must be positive")));
            }
            pairing.weights(i1, i2)
        }
    };
    let q1 = GridSpec::radial_points(grid.n_r1, grid.r_max_1);
    let q2 = GridSpec::radial_points(grid.n_r2, grid.r_max_2);
    let (n1, n2, nt) = (grid.n_r1, grid.n_r2, grid.n_tau);
    let (tau, w) = gauss_legendre(nt);

    let (potential, mean_potential) = if pot.is_tau_independent() {
        let mut v = vec![0.0; n1 * n2];
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                v[i1 * n2 + i2] = pot.sample(q1[i1], q2[i2], 0.0)?;
            }
        }
        (PotentialSamples::Diagonal(v.clone()), v)
    } else {
        let mut values = vec![0.0; nt * n1 * n2];
        let mut mean = vec![0.0; n1 * n2];
        for k in 0..nt {
            for i1 in 0..n1 {
                for i2 in 0..n2 {
                    let u = pot.sample(q1[i1], q2[i2], tau[k])?;
                    values[k * n1 * n2 + i1 * n2 + i2] = u;
                    mean[i1 * n2 + i2] += 0.5 * w[k] * u;
                }
            }
        }
        (PotentialSamples::Quadrature { values, transform: transform(nt) }, mean)
    };

    Ok(H0Operator {
        grid: *grid,
        d1: second_derivative(n1, grid.r_max_1, grid.stencil),
        d2: second_derivative(n2, grid.r_max_2, grid.stencil),
        q1,
        q2,
        radial,
        angular,
        potential,
        mean_potential,
    })
}

impl H0Operator {
    fn block(&self) -> usize {
        self.grid.n_r1 * self.grid.n_r2
    }

    fn apply_kinetic_block(&self, l: usize, x: &[f64], y: &mut [f64]) {
        let (n1, n2) = (self.grid.n_r1, self.grid.n_r2);
        let ll = (l * (l + 1)) as f64;
        let (a1, a2) = (-0.5 * self.radial[0], -0.5 * self.radial[1]);
        for i1 in 0..n1 {
            let cent1 = 0.5 * self.angular[0] * ll / (self.q1[i1] * self.q1[i1]);
            for i2 in 0..n2 {
                let idx = i1 * n2 + i2;
                let mut acc = (a1 * self.d1.diag[i1] + a2 * self.d2.diag[i2]) * x[idx];
                if i1 >= 1 {
                    acc += a1 * self.d1.off1[i1 - 1] * x[idx - n2];
                }
                if i1 + 1 < n1 {
                    acc += a1 * self.d1.off1[i1] * x[idx + n2];
                }
                if i1 >= 2 {
                    acc += a1 * self.d1.off2[i1 - 2] * x[idx - 2 * n2];
                }
                if i1 + 2 < n1 {
                    acc += a1 * self.d1.off2[i1] * x[idx + 2 * n2];
                }
                if i2 >= 1 {
                    acc += a2 * self.d2.off1[i2 - 1] * x[idx - 1];
                }
                if i2 + 1 < n2 {
                    acc += a2 * self.d2.off1[i2] * x[idx + 1];
                }
                if i2 >= 2 {
                    acc += a2 * self.d2.off2[i2 - 2] * x[idx - 2];
                }
                if i2 + 2 < n2 {
                    acc += a2 * self.d2.off2[i2] * x[idx + 2];
                }
                let cent2 = 0.5 * self.angular[1] * ll / (self.q2[i2] * self.q2[i2]);
                y[idx] = acc + (cent1 + cent2) * x[idx];
            }
        }
    }

    /// Separable part used by the preconditioner: radial matrices for one
    /// angular block with the reference potentials `v1`, `v2`.
    fn separable_blocks(&self, l: usize, v1: &[f64], v2: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let ll = (l * (l + 1)) as f64;
        let build = |d: &Banded, q: &[f64], a: f64, c: f64, v: &[f64]| {
            let mut m = d.dense() * (-0.5 * a);
            for i in 0..q.len() {
                m[(i, i)] += 0.5 * c * ll / (q[i] * q[i]) + v[i];
            }
            m
        };
        (
            build(&self.d1, &self.q1, self.radial[0], self.angular[0], v1),
            build(&self.d2, &self.q2, self.radial[1], self.angular[1], v2),
        )
    }
}

impl LinearOperator for H0Operator {
    fn dim(&self) -> usize {
        self.grid.dimension()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nb = self.block();
        y.par_chunks_mut(nb).enumerate().for_each(|(l, yb)| self.apply_kinetic_block(l, &x[l * nb..(l + 1) * nb], yb));
        match &self.potential {
            PotentialSamples::Diagonal(v) => {
                y.par_chunks_mut(nb).zip(x.par_chunks(nb)).for_each(|(yb, xb)| {
                    for ((y, x), u) in yb.iter_mut().zip(xb).zip(v) {
                        *y += u * x;
                    }
                });
            }
            PotentialSamples::Quadrature { values, transform: t } => {
                let nt = self.grid.n_tau;
                // weighted values at each node, scaled by U
                let nodes: Vec<Vec<f64>> = (0..nt)
                    .into_par_iter()
                    .map(|k| {
                        let mut w = vec![0.0; nb];
                        for l in 0..nt {
                            let c = t[(k, l)];
                            for (w, x) in w.iter_mut().zip(&x[l * nb..(l + 1) * nb]) {
                                *w += c * x;
                            }
                        }
                        for (w, u) in w.iter_mut().zip(&values[k * nb..(k + 1) * nb]) {
                            *w *= u;
                        }
                        w
                    })
                    .collect();
                y.par_chunks_mut(nb).enumerate().for_each(|(l, yb)| {
                    for (k, w) in nodes.iter().enumerate() {
                        let c = t[(k, l)];
                        for (y, w) in yb.iter_mut().zip(w) {
                            *y += c * w;
                        }
                    }
                });
            }
        }
    }
}

/// Exact inverse of `(H_sep - sigma)` where `H_sep` keeps the kinetic and
/// centrifugal terms and replaces the potential by an additive fit
/// `v1(q1) + v2(q2)` of its `tau` average. Applied per angular block by
/// diagonalizing the two radial matrices.
pub struct SeparablePreconditioner {
    n1: usize,
    n2: usize,
    blocks: Vec<(DMatrix<f64>, Vec<f64>, DMatrix<f64>, Vec<f64>)>,
    sigma: f64,
}

impl SeparablePreconditioner {
    pub fn new(op: &H0Operator) -> Self {
        let (n1, n2, nt) = (op.grid.n_r1, op.grid.n_r2, op.grid.n_tau);
        let w = &op.mean_potential;
        let (mut c1, mut c2) = (0, 0);
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                if w[i1 * n2 + i2] < w[c1 * n2 + c2] {
                    (c1, c2) = (i1, i2);
                }
            }
        }
        let v1: Vec<f64> = (0..n1).map(|i| w[i * n2 + c2]).collect();
        let v2: Vec<f64> = (0..n2).map(|j| w[c1 * n2 + j] - w[c1 * n2 + c2]).collect();
        let blocks: Vec<_> = (0..nt)
            .into_par_iter()
            .map(|l| {
                let (b1, b2) = op.separable_blocks(l, &v1, &v2);
                let e1 = SymmetricEigen::new(b1);
                let e2 = SymmetricEigen::new(b2);
                (
                    e1.eigenvectors,
                    e1.eigenvalues.as_slice().to_vec(),
                    e2.eigenvectors,
                    e2.eigenvalues.as_slice().to_vec(),
                )
            })
            .collect();
        let lowest = blocks
            .iter()
            .map(|(_, l1, _, l2)| {
                l1.iter().copied().fold(f64::INFINITY, f64::min) + l2.iter().copied().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min);
        let sigma = lowest - 0.1 * lowest.abs().max(1.0);
        Self { n1, n2, blocks, sigma }
    }

    /// Lowest eigenvalues of the separable reference operator.
    pub fn reference_levels(&self, count: usize) -> Vec<(usize, usize, usize, f64)> {
        let mut all = Vec::new();
        for (l, (_, l1, _, l2)) in self.blocks.iter().enumerate() {
            let mut i1s: Vec<usize> = (0..l1.len()).collect();
            i1s.sort_by(|&a, &b| l1[a].total_cmp(&l1[b]));
            let mut i2s: Vec<usize> = (0..l2.len()).collect();
            i2s.sort_by(|&a, &b| l2[a].total_cmp(&l2[b]));
            for &i in i1s.iter().take(count) {
                for &j in i2s.iter().take(count) {
                    all.push((l, i, j, l1[i] + l2[j]));
                }
            }
        }
        all.sort_by(|a, b| a.3.total_cmp(&b.3));
        all.truncate(count);
        all
    }
}

impl Preconditioner for SeparablePreconditioner {
    fn apply(&self, r: &[f64], out: &mut [f64]) {
        let nb = self.n1 * self.n2;
        out.par_chunks_mut(nb).enumerate().for_each(|(l, ob)| {
            let (q1, l1, q2, l2) = &self.blocks[l];
            // row-major block: R[i1][i2] -> nalgebra column-major R^T
            let rt = DMatrix::from_column_slice(self.n2, self.n1, &r[l * nb..(l + 1) * nb]);
            let mut s = q2.transpose() * rt * q1;
            for i1 in 0..self.n1 {
                for i2 in 0..self.n2 {
                    s[(i2, i1)] /= l1[i1] + l2[i2] - self.sigma;
                }
            }
            let back = q2 * s * q1.transpose();
            ob.copy_from_slice(back.as_slice());
        });
    }

    fn initial_block(&self, b: usize) -> Option<Vec<Vec<f64>>> {
        let nb = self.n1 * self.n2;
        let total = nb * self.blocks.len();
        Some(
            self.reference_levels(b)
                .into_iter()
                .map(|(l, i, j, _)| {
                    let (q1, _, q2, _) = &self.blocks[l];
                    let mut v = vec![0.0; total];
                    for i1 in 0..self.n1 {
                        for i2 in 0..self.n2 {
                            v[l * nb + i1 * self.n2 + i2] = q1[(i1, i)] * q2[(i2, j)];
                        }
                    }
                    v
                })
                .collect(),
        )
    }
}
