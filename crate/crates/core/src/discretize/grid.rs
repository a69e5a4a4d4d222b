//! Uniform box grids with homogeneous Dirichlet boundary nodes.

use serde::{Deserialize, Serialize};

use super::DiscretizeError;

/// Axis-aligned box in one or two dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialDomain {
    /// `[lower, upper]` per axis.
    pub extent: Vec<[f64; 2]>,
    /// Interior node count per axis.
    pub resolution: Vec<usize>,
}

impl SpatialDomain {
    pub fn interval(lower: f64, upper: f64, nodes: usize) -> Self {
        Self { extent: vec![[lower, upper]], resolution: vec![nodes] }
    }

    pub fn rectangle(x: [f64; 2], y: [f64; 2], nx: usize, ny: usize) -> Self {
        Self { extent: vec![x, y], resolution: vec![nx, ny] }
    }

    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    /// Violated invariants, as human-readable messages.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        let d = self.dim();
        if d != 1 && d != 2 {
            out.push(format!("dimension must be 1 or 2, got {d}"));
        }
        if self.resolution.len() != d {
            out.push(format!("resolution has {} entries for {d} axes", self.resolution.len()));
        }
        for (a, &n) in self.resolution.iter().enumerate() {
            if n < 3 {
                out.push(format!("axis {} has {n} interior nodes (need >= 3)", a + 1));
            }
        }
        for (a, [lo, hi]) in self.extent.iter().enumerate() {
            if !(hi - lo > 0.0) || !lo.is_finite() || !hi.is_finite() {
                out.push(format!("axis {} extent [{lo}, {hi}] has no positive length", a + 1));
            }
        }
        out
    }
}

/// Node layout derived from a [`SpatialDomain`]. Full-grid indices include
/// the boundary layer; interior unknowns are numbered with x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    n: Vec<usize>,
    h: Vec<f64>,
}

impl Grid {
    pub fn new(domain: &SpatialDomain) -> Result<Self, DiscretizeError> {
        let problems = domain.check();
        if !problems.is_empty() {
            return Err(DiscretizeError::InvalidDomain(problems.join("; ")));
        }
        let lower: Vec<f64> = domain.extent.iter().map(|e| e[0]).collect();
        let upper: Vec<f64> = domain.extent.iter().map(|e| e[1]).collect();
        let n = domain.resolution.clone();
        let h = (0..n.len()).map(|a| (upper[a] - lower[a]) / (n[a] + 1) as f64).collect();
        Ok(Self { lower, upper, n, h })
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn spacing(&self) -> &[f64] {
        &self.h
    }

    pub fn interior_counts(&self) -> &[usize] {
        &self.n
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    pub fn num_interior(&self) -> usize {
        self.n.iter().product()
    }

    pub fn num_full(&self) -> usize {
        self.n.iter().map(|k| k + 2).product()
    }

    /// Volume of one grid cell, which is also the quadrature weight of a node.
    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    /// Full-grid multi-index of a full-grid linear index.
    pub fn full_multi(&self, idx: usize) -> [usize; 2] {
        match self.dim() {
            1 => [idx, 0],
            _ => {
                let w = self.n[0] + 2;
                [idx % w, idx / w]
            }
        }
    }

    pub fn full_index(&self, m: [usize; 2]) -> usize {
        match self.dim() {
            1 => m[0],
            _ => m[0] + (self.n[0] + 2) * m[1],
        }
    }

    /// Interior unknown index of a full-grid multi-index, `None` on the boundary.
    pub fn interior_of(&self, m: [usize; 2]) -> Option<usize> {
        for a in 0..self.dim() {
            if m[a] == 0 || m[a] > self.n[a] {
                return None;
            }
        }
        Some(match self.dim() {
            1 => m[0] - 1,
            _ => (m[0] - 1) + self.n[0] * (m[1] - 1),
        })
    }

    /// Full-grid multi-index of interior unknown `p`.
    pub fn interior_multi(&self, p: usize) -> [usize; 2] {
        match self.dim() {
            1 => [p + 1, 0],
            _ => [p % self.n[0] + 1, p / self.n[0] + 1],
        }
    }

    pub fn coords_of_multi(&self, m: [usize; 2]) -> Vec<f64> {
        (0..self.dim()).map(|a| self.lower[a] + m[a] as f64 * self.h[a]).collect()
    }

    pub fn interior_coords(&self, p: usize) -> Vec<f64> {
        self.coords_of_multi(self.interior_multi(p))
    }

    pub fn full_coords(&self, idx: usize) -> Vec<f64> {
        self.coords_of_multi(self.full_multi(idx))
    }

    /// Coordinates of every interior node, in unknown order.
    pub fn interior_points(&self) -> Vec<Vec<f64>> {
        (0..self.num_interior()).map(|p| self.interior_coords(p)).collect()
    }

    /// Interior unknowns whose full stencil (distance `margin` in every
    /// axis direction) stays inside the interior.
    pub fn deep_interior(&self, margin: usize) -> Vec<usize> {
        (0..self.num_interior())
            .filter(|&p| {
                let m = self.interior_multi(p);
                (0..self.dim()).all(|a| m[a] > margin && m[a] + margin <= self.n[a])
            })
            .collect()
    }

    /// Quadrature-weighted inner product over interior nodes.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.cell_volume() * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.inner(u, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_and_interior_are_disjoint() {
        let g = Grid::new(&SpatialDomain::rectangle([0.0, 1.0], [-1.0, 1.0], 4, 3)).unwrap();
        let mut interior = 0;
        for idx in 0..g.num_full() {
            if let Some(p) = g.interior_of(g.full_multi(idx)) {
                interior += 1;
                assert_eq!(g.full_index(g.interior_multi(p)), idx);
            }
        }
        assert_eq!(interior, g.num_interior());
        assert_eq!(g.num_full(), 6 * 5);
    }

    #[test]
    fn spacing_is_uniform() {
        let g = Grid::new(&SpatialDomain::interval(0.0, 1.0, 3)).unwrap();
        assert_eq!(g.spacing(), &[0.25]);
        assert_eq!(g.interior_coords(0), vec![0.25]);
        assert_eq!(g.full_coords(4), vec![1.0]);
    }

    #[test]
    fn rejects_bad_domains() {
        assert!(Grid::new(&SpatialDomain::interval(0.0, 1.0, 2)).is_err());
        assert!(Grid::new(&SpatialDomain::interval(1.0, 1.0, 8)).is_err());
        let three = SpatialDomain { extent: vec![[0.0, 1.0]; 3], resolution: vec![4; 3] };
        assert!(Grid::new(&three).is_err());
    }
}
