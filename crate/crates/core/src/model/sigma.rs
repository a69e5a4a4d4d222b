//! The diffusion factor σ: symbolic columns and their grid samples.

use serde::{Deserialize, Serialize};

use crate::discretize::Grid;
use crate::symbolic::{parse_vector_field, SymbolicError, VectorField};

/// Columns of σ written in the vector-field grammar, e.g. `["d1", "x1*d2"]`
/// for `L₁ = ∂_x`, `L₂ = x∂_y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaSpec {
    pub columns: Vec<String>,
    /// Declared upper bound λ₀ on the eigenvalues of `a = σσᵀ`.
    pub bound: f64,
}

impl SigmaSpec {
    pub fn new(columns: &[&str], bound: f64) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), bound }
    }

    pub fn fields(&self, dim: usize) -> Result<Vec<VectorField>, SymbolicError> {
        self.columns.iter().map(|c| parse_vector_field(c, dim)).collect()
    }
}

/// σ sampled at every full-grid node (boundary included), stored as a
/// row-major `d × n` block per node.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaField {
    dim: usize,
    columns: usize,
    values: Vec<f64>,
    bound: f64,
}

impl SigmaField {
    pub fn from_fn(grid: &Grid, columns: usize, bound: f64, f: impl Fn(&[f64]) -> Vec<Vec<f64>>) -> Self {
        let dim = grid.dim();
        let mut values = Vec::with_capacity(grid.num_full() * dim * columns);
        for q in 0..grid.num_full() {
            let m = f(&grid.full_coords(q));
            assert_eq!(m.len(), dim, "sigma rows must match the dimension");
            for row in &m {
                assert_eq!(row.len(), columns, "sigma row has the wrong number of columns");
                values.extend_from_slice(row);
            }
        }
        Self { dim, columns, values, bound }
    }

    pub fn from_fields(grid: &Grid, fields: &[VectorField], bound: f64) -> Self {
        Self::from_fn(grid, fields.len(), bound, |x| {
            let cols: Vec<Vec<f64>> = fields.iter().map(|f| f.eval_f64(x)).collect();
            (0..x.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect()
        })
    }

    pub fn from_spec(grid: &Grid, spec: &SigmaSpec) -> Result<Self, SymbolicError> {
        Ok(Self::from_fields(grid, &spec.fields(grid.dim())?, spec.bound))
    }

    /// The same constant matrix at every node.
    pub fn constant(grid: &Grid, matrix: Vec<Vec<f64>>, bound: f64) -> Self {
        let columns = matrix.first().map_or(0, Vec::len);
        Self::from_fn(grid, columns, bound, |_| matrix.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn num_nodes(&self) -> usize {
        if self.dim * self.columns == 0 {
            0
        } else {
            self.values.len() / (self.dim * self.columns)
        }
    }

    /// The `d × n` block at full node `q`, row-major.
    pub fn matrix(&self, q: usize) -> &[f64] {
        let b = self.dim * self.columns;
        &self.values[q * b..(q + 1) * b]
    }

    pub fn entry(&self, q: usize, i: usize, k: usize) -> f64 {
        self.values[q * self.dim * self.columns + i * self.columns + k]
    }

    /// `a = σσᵀ` at full node `q`, padded to 2×2.
    pub fn diffusion(&self, q: usize) -> [[f64; 2]; 2] {
        let mut a = [[0.0; 2]; 2];
        for i in 0..self.dim {
            for j in 0..self.dim {
                a[i][j] = (0..self.columns).map(|k| self.entry(q, i, k) * self.entry(q, j, k)).sum();
            }
        }
        a
    }

    /// Largest eigenvalue of `a` at node `q`.
    pub fn max_eigenvalue(&self, q: usize) -> f64 {
        let a = self.diffusion(q);
        if self.dim == 1 {
            return a[0][0];
        }
        let (tr, det) = (a[0][0] + a[1][1], a[0][0] * a[1][1] - a[0][1] * a[1][0]);
        0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::SpatialDomain;

    #[test]
    fn grushin_sampling() {
        let g = Grid::new(&SpatialDomain::rectangle([-1.0, 1.0], [-1.0, 1.0], 3, 3)).unwrap();
        let s = SigmaField::from_spec(&g, &SigmaSpec::new(&["d1", "x1*d2"], 1.0)).unwrap();
        assert_eq!((s.dim(), s.columns(), s.num_nodes()), (2, 2, 25));
        let q = g.full_index([0, 2]);
        assert_eq!(g.full_coords(q), vec![-1.0, 0.0]);
        assert_eq!(s.matrix(q), &[1.0, 0.0, 0.0, -1.0]);
        assert_eq!(s.diffusion(q), [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(s.max_eigenvalue(g.full_index([2, 2])), 1.0);
    }
}
