//! Discretised single-patch Hamiltonian and its ordered eigenbasis.
//!
//! For a patch of side `n` the operator acts on the `n * n` lexicographically
//! ordered sites. The diagonal carries the potential plus `4 * kinetic`, and
//! each pair of horizontally or vertically adjacent sites is coupled by
//! `-kinetic`. Couplings that would leave the patch are dropped (Dirichlet
//! boundary), so the last site of a row is not coupled to the first site of
//! the next row.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::imggrid::ImageGrid;

/// Components with magnitude at or below this are skipped when fixing signs.
const SIGN_EPS: f64 = 1e-12;

/// Dense symmetric `n^2 x n^2` operator for one patch.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianMatrix {
    side: usize,
    kinetic: f64,
    entries: DMatrix<f64>,
}

impl HamiltonianMatrix {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dim(&self) -> usize {
        self.side * self.side
    }

    pub fn kinetic(&self) -> f64 {
        self.kinetic
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace()
    }

    /// Row-major copy of the entries.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `H * v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| (0..dim).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect()
    }
}

/// Builds the operator for `potential` (row-major, length `side^2`).
pub fn build_hamiltonian(potential: &[f64], side: usize, kinetic: f64) -> Result<HamiltonianMatrix> {
    let dim = side * side;
    if side == 0 || potential.len() != dim {
        return Err(Error::NotSquare {
            len: potential.len(),
            side,
        });
    }
    if !(kinetic.is_finite() && kinetic > 0.0) {
        return Err(Error::InvalidKinetic(kinetic));
    }
    if let Some(index) = potential.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }

    let mut entries = DMatrix::zeros(dim, dim);
    for (i, &v) in potential.iter().enumerate() {
        entries[(i, i)] = v + 4.0 * kinetic;
        let col = i % side;
        if col + 1 < side {
            entries[(i, i + 1)] = -kinetic;
            entries[(i + 1, i)] = -kinetic;
        }
        if i + side < dim {
            entries[(i, i + side)] = -kinetic;
            entries[(i + side, i)] = -kinetic;
        }
    }
    Ok(HamiltonianMatrix { side, kinetic, entries })
}

/// Eigenpairs sorted by ascending energy.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis {
    dim: usize,
    energies: Vec<f64>,
    // vector k occupies vectors[k * dim..(k + 1) * dim]
    vectors: Vec<f64>,
}

impl EigenBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    #[inline]
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.dim..(k + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.vectors.chunks_exact(self.dim)
    }

    /// Largest `|<v_i, v_j> - delta_ij|`.
    pub fn gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                let dot: f64 = self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    /// Largest `||H v_k - E_k v_k||_inf / (1 + |E_k|)` over all pairs.
    pub fn max_relative_residual(&self, h: &HamiltonianMatrix) -> f64 {
        let mut worst = 0.0f64;
        for (k, &e) in self.energies.iter().enumerate() {
            let v = self.vector(k);
            let hv = h.apply(v);
            let r = hv.iter().zip(v).map(|(a, b)| (a - e * b).abs()).fold(0.0, f64::max);
            worst = worst.max(r / (1.0 + e.abs()));
        }
        worst
    }

    /// Lays the eigenvectors out as `side x side` tiles in energy order,
    /// each min-max stretched to `[0, 255]`, separated by one-pixel gutters.
    pub fn tiles(&self) -> Result<ImageGrid> {
        let side = (self.dim as f64).sqrt().round() as usize;
        if side * side != self.dim {
            return Err(Error::NotSquare { len: self.dim, side });
        }
        let per_row = side; // side tiles per row, side rows of tiles
        let extent = per_row * (side + 1) - 1;
        let mut pixels = vec![0.0; extent * extent];
        for (k, v) in self.vectors().enumerate() {
            let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
                (lo.min(x), hi.max(x))
            });
            let span = if hi > lo { hi - lo } else { 1.0 };
            let top = (k / per_row) * (side + 1);
            let left = (k % per_row) * (side + 1);
            for (i, &x) in v.iter().enumerate() {
                pixels[(top + i / side) * extent + left + i % side] = 255.0 * (x - lo) / span;
            }
        }
        ImageGrid::new(extent, extent, pixels)
    }
}

/// Full eigendecomposition with ascending energies and a deterministic sign:
/// the first component with magnitude above `1e-12` is positive.
pub fn eigendecompose(h: &HamiltonianMatrix) -> Result<EigenBasis> {
    let dim = h.dim();
    let eig = SymmetricEigen::try_new(h.entries.clone(), f64::EPSILON, 100 * dim.max(1))
        .ok_or(Error::EigenNoConvergence { dim })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));

    let mut energies = Vec::with_capacity(dim);
    let mut vectors = Vec::with_capacity(dim * dim);
    for &k in &order {
        energies.push(eig.eigenvalues[k]);
        let column = eig.eigenvectors.column(k);
        let flip = column.iter().find(|x| x.abs() > SIGN_EPS).is_some_and(|&x| x < 0.0);
        if flip {
            vectors.extend(column.iter().map(|x| -x));
        } else {
            vectors.extend(column.iter().copied());
        }
    }
    Ok(EigenBasis { dim, energies, vectors })
}
