//! Lowest eigenpairs of a symmetric operator.
//!
//! Small problems are solved densely. Larger ones use a block Davidson
//! iteration with thick restart and full reorthogonalization; with the
//! identity preconditioner the search space is the block Krylov space of a
//! restarted block Lanczos run.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

pub trait Preconditioner: Sync {
    /// Approximates `(A - sigma)^-1 r` for a fixed shift below the spectrum.
    fn apply(&self, r: &[f64], out: &mut [f64]);

    /// Optional starting block of `b` vectors.
    fn initial_block(&self, _b: usize) -> Option<Vec<Vec<f64>>> {
        None
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let v = self * DVector::from_column_slice(x);
        y.copy_from_slice(v.as_slice());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Dense,
    Davidson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenOptions {
    pub k: usize,
    /// Bound on `||A v - lambda v|| / ||v||` for every returned pair.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub dense_limit: usize,
    /// Block size is `k + block_extra`.
    pub block_extra: usize,
    pub force_iterative: bool,
}

impl EigenOptions {
    pub fn new(k: usize) -> Self {
        Self { k, tol: 1e-8, max_iter: 500, seed: 42, dense_limit: 2000, block_extra: 4, force_iterative: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub method: SolverMethod,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    if a.len() > 1 << 14 {
        // ordered partial sums keep the result independent of scheduling
        let partial: Vec<f64> = a
            .par_chunks(4096)
            .zip(b.par_chunks(4096))
            .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
            .collect();
        partial.iter().sum()
    } else {
        a.iter().zip(b).map(|(p, q)| p * q).sum()
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_iter_mut().with_min_len(4096).zip(x.par_iter()).for_each(|(y, x)| *y += alpha * x);
}

fn scale(alpha: f64, x: &mut [f64]) {
    x.par_iter_mut().with_min_len(4096).for_each(|v| *v *= alpha);
}

fn residual_norm(op: &dyn LinearOperator, v: &[f64], lambda: f64) -> f64 {
    let mut av = vec![0.0; v.len()];
    op.apply(v, &mut av);
    axpy(-lambda, v, &mut av);
    norm(&av) / norm(v)
}

/// Validates `k` and dispatches to the dense or iterative path.
pub fn lowest_eigenpairs(
    op: &dyn LinearOperator,
    precond: Option<&dyn Preconditioner>,
    opts: &EigenOptions,
) -> Result<EigenSolution> {
    let n = op.dim();
    if opts.k == 0 || opts.k > n {
        return Err(Error::InvalidInput(format!("k = {} must lie in 1..={n}", opts.k)));
    }
    if n <= opts.dense_limit && !opts.force_iterative {
        dense(op, opts)
    } else {
        davidson(op, precond, opts)
    }
}

fn dense(op: &dyn LinearOperator, opts: &EigenOptions) -> Result<EigenSolution> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order[..opts.k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<Vec<f64>> =
        order[..opts.k].iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
    finish(op, values, vectors, SolverMethod::Dense, 0, opts.tol)
}

fn finish(
    op: &dyn LinearOperator,
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    method: SolverMethod,
    iterations: usize,
    tol: f64,
) -> Result<EigenSolution> {
    let residuals: Vec<f64> = values.iter().zip(&vectors).map(|(&l, v)| residual_norm(op, v, l)).collect();
    let worst = residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    if !(worst <= tol) {
        return Err(Error::NoConvergence { iterations, worst_residual: worst, residuals });
    }
    Ok(EigenSolution { values, vectors, residuals, method, iterations })
}

/// Orthogonalizes `v` against `basis` twice and normalizes it. Returns
/// `false` when nothing independent remains.
fn orthonormalize_against(basis: &[Vec<f64>], v: &mut [f64]) -> bool {
    let n0 = norm(v);
    if n0 == 0.0 || !n0.is_finite() {
        return false;
    }
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.par_iter().map(|b| dot(b, v)).collect();
        for (b, c) in basis.iter().zip(coeffs) {
            axpy(-c, b, v);
        }
    }
    let n1 = norm(v);
    if n1 <= 1e-10 * n0 {
        return false;
    }
    scale(1.0 / n1, v);
    true
}

fn davidson(
    op: &dyn LinearOperator,
    precond: Option<&dyn Preconditioner>,
    opts: &EigenOptions,
) -> Result<EigenSolution> {
    let n = op.dim();
    let k = opts.k;
    let b = (k + opts.block_extra).min(n);
    let max_basis = (3 * b).max(b + 2).min(n);
    let target = 0.1 * opts.tol;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start = precond.and_then(|p| p.initial_block(b)).unwrap_or_default();

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut gram = DMatrix::<f64>::zeros(0, 0);

    let push =
        |basis: &mut Vec<Vec<f64>>, images: &mut Vec<Vec<f64>>, gram: &mut DMatrix<f64>, mut v: Vec<f64>| -> bool {
            if !orthonormalize_against(basis, &mut v) {
                return false;
            }
            let mut av = vec![0.0; n];
            op.apply(&v, &mut av);
            let m = basis.len();
            let col: Vec<f64> = basis.par_iter().map(|u| dot(u, &av)).collect();
            let diag = dot(&v, &av);
            let mut g = gram.clone().resize(m + 1, m + 1, 0.0);
            for i in 0..m {
                g[(i, m)] = col[i];
                g[(m, i)] = col[i];
            }
            g[(m, m)] = diag;
            *gram = g;
            basis.push(v);
            images.push(av);
            true
        };

    for v in start.into_iter().take(b) {
        if v.len() == n {
            push(&mut basis, &mut images, &mut gram, v);
        }
    }
    let mut attempts = 0;
    while basis.len() < b && attempts < 10 * b {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        push(&mut basis, &mut images, &mut gram, v);
        attempts += 1;
    }

    let mut last_residuals = vec![f64::INFINITY; k];
    for iter in 0..opts.max_iter {
        let m = basis.len();
        let eig = SymmetricEigen::new(gram.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
        let nb = b.min(m);
        let thetas: Vec<f64> = order[..nb].iter().map(|&i| eig.eigenvalues[i]).collect();

        let combine = |vecs: &Vec<Vec<f64>>, col: usize| -> Vec<f64> {
            let y = eig.eigenvectors.column(order[col]);
            let mut out = vec![0.0; n];
            out.par_chunks_mut(4096).enumerate().for_each(|(c, chunk)| {
                let off = c * 4096;
                let len = chunk.len();
                for (j, v) in vecs.iter().enumerate() {
                    let w = y[j];
                    for (o, x) in chunk.iter_mut().zip(&v[off..off + len]) {
                        *o += w * x;
                    }
                }
            });
            out
        };
        let ritz: Vec<Vec<f64>> = (0..nb).map(|i| combine(&basis, i)).collect();
        let ritz_images: Vec<Vec<f64>> = (0..nb).map(|i| combine(&images, i)).collect();
        let residual_vecs: Vec<Vec<f64>> = (0..nb)
            .map(|i| {
                let mut r = ritz_images[i].clone();
                axpy(-thetas[i], &ritz[i], &mut r);
                r
            })
            .collect();
        let res_norms: Vec<f64> = residual_vecs.iter().map(|r| norm(r)).collect();
        last_residuals = res_norms[..k.min(nb)].to_vec();

        if nb >= k && res_norms[..k].iter().all(|&r| r <= target) {
            return finish(op, thetas[..k].to_vec(), ritz[..k].to_vec(), SolverMethod::Davidson, iter + 1, opts.tol);
        }

        let corrections: Vec<Vec<f64>> = (0..nb)
            .filter(|&i| res_norms[i] > target)
            .map(|i| match precond {
                Some(p) => {
                    let mut t = vec![0.0; n];
                    p.apply(&residual_vecs[i], &mut t);
                    t
                }
                None => residual_vecs[i].clone(),
            })
            .collect();

        if basis.len() + corrections.len() > max_basis {
            basis.clear();
            images.clear();
            gram = DMatrix::zeros(0, 0);
            for v in ritz {
                push(&mut basis, &mut images, &mut gram, v);
            }
        }
        let before = basis.len();
        for t in corrections {
            if basis.len() >= max_basis {
                break;
            }
            push(&mut basis, &mut images, &mut gram, t);
        }
        if basis.len() == before {
            // stagnated: inject a random direction
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if !push(&mut basis, &mut images, &mut gram, v) {
                break;
            }
        }
    }
    let worst = last_residuals.iter().fold(0.0f64, |m, &r| m.max(r));
    Err(Error::NoConvergence { iterations: opts.max_iter, worst_residual: worst, residuals: last_residuals })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diagonal(Vec<f64>);

    impl LinearOperator for Diagonal {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for ((y, x), d) in y.iter_mut().zip(x).zip(&self.0) {
                *y = d * x;
            }
        }
    }

    fn random_symmetric(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        (&a + a.transpose()) * 0.5
    }

    #[test]
    fn diagonal_operator_dense_and_iterative() {
        let d = Diagonal((1..=300).map(|i| i as f64).collect());
        for force in [false, true] {
            let mut o = EigenOptions::new(5);
            o.force_iterative = force;
            let s = lowest_eigenpairs(&d, None, &o).unwrap();
            for (i, v) in s.values.iter().enumerate() {
                assert!((v - (i + 1) as f64).abs() < 1e-10, "{:?}", s.values);
            }
            assert!(s.residuals.iter().all(|&r| r <= 1e-8));
        }
    }

    #[test]
    fn iterative_matches_dense_on_random_matrix() {
        let m = random_symmetric(500, 7);
        let mut o = EigenOptions::new(6);
        let dense = lowest_eigenpairs(&m, None, &o).unwrap();
        assert_eq!(dense.method, SolverMethod::Dense);
        o.force_iterative = true;
        o.max_iter = 5000;
        let it = lowest_eigenpairs(&m, None, &o).unwrap();
        assert_eq!(it.method, SolverMethod::Davidson);
        for (a, b) in dense.values.iter().zip(&it.values) {
            assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn degenerate_eigenvalues_are_all_found() {
        let mut d: Vec<f64> = vec![3.0, 5.0, 5.0, 5.0, 7.0, 7.0, 7.0];
        d.extend((0..400).map(|i| 8.0 + i as f64 * 0.01));
        let mut o = EigenOptions::new(7);
        o.force_iterative = true;
        let s = lowest_eigenpairs(&Diagonal(d.clone()), None, &o).unwrap();
        for (a, b) in s.values.iter().zip(&d) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_k_rejected() {
        let d = Diagonal(vec![1.0, 2.0]);
        assert!(lowest_eigenpairs(&d, None, &EigenOptions::new(0)).is_err());
        assert!(lowest_eigenpairs(&d, None, &EigenOptions::new(3)).is_err());
    }

    #[test]
    fn iteration_cap_reports_residuals() {
        let m = random_symmetric(400, 8);
        let mut o = EigenOptions::new(4);
        o.force_iterative = true;
        o.max_iter = 2;
        match lowest_eigenpairs(&m, None, &o) {
            Err(Error::NoConvergence { residuals, iterations, .. }) => {
                assert_eq!(iterations, 2);
                assert_eq!(residuals.len(), 4);
            }
            other => panic!("expected no-convergence, got {other:?}"),
        }
    }
}
