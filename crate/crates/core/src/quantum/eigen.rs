//! Dense diagonalization of small grids: the reference the propagation
//! machinery is checked against.

use super::field::WaveField;
use super::hamiltonian::Hamiltonian;
use crate::{Error, Result};
use ndarray::Array2;

/// Largest grid (points) accepted by [`diagonalize_small`].
pub const MAX_DENSE_POINTS: usize = 4096;

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    /// Unit-norm real eigenfields, in the order of `values`.
    pub vectors: Vec<WaveField>,
}

/// The `k` lowest eigenpairs, with `|Hψ − Eψ| ≤ 1e-8` verified.
pub fn diagonalize_small(ham: &Hamiltonian, k: usize) -> Result<Eigenpairs> {
    let g = ham.grid;
    let n = g.len();
    if n > MAX_DENSE_POINTS {
        return Err(Error::Contract(format!("{n} grid points exceed the dense limit {MAX_DENSE_POINTS}")));
    }
    let eig = ham.dense().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = 1.0 / g.cell().sqrt();
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::new();
    for &i in order.iter().take(k) {
        let e = eig.eigenvalues[i];
        let col = eig.eigenvectors.column(i);
        let re = Array2::from_shape_fn((g.n_r, g.n_theta), |(j, m)| col[j * g.n_theta + m] * scale);
        let f = WaveField::real(g, ham.hbar, re);
        let hf = ham.apply(&f);
        let res = (&hf.re - &(&f.re * e)).iter().map(|v| v * v).sum::<f64>() * g.cell();
        residuals.push(res.sqrt());
        values.push(e);
        vectors.push(f);
    }
    if residuals.iter().any(|r| *r > 1e-8) {
        return Err(Error::NoConvergence { iterations: 1, residuals });
    }
    Ok(Eigenpairs { values, vectors })
}
