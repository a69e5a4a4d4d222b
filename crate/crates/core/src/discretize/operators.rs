//! Divergence-form and first-order grid operators built from a sampled σ.

use serde::{Deserialize, Serialize};

use super::{DiscretizeError, Grid, SparseMatrix};
use crate::model::SigmaField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    DivergenceForm,
    /// Zero-based column index of σ.
    FirstOrder(usize),
    Mass,
}

impl OperatorKind {
    pub fn label(&self) -> String {
        match self {
            Self::DivergenceForm => "divergence_form".into(),
            Self::FirstOrder(k) => format!("first_order_L{}", k + 1),
            Self::Mass => "mass".into(),
        }
    }
}

/// A sparse operator acting on interior-node values.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOperator {
    pub kind: OperatorKind,
    pub matrix: SparseMatrix,
}

impl DiscreteOperator {
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(u)
    }

    pub fn to_triplet_text(&self) -> String {
        self.matrix.to_triplet_text(&self.kind.label())
    }
}

fn check_sigma(sigma: &SigmaField, grid: &Grid) -> Result<(), DiscretizeError> {
    if sigma.dim() != grid.dim() || sigma.num_nodes() != grid.num_full() {
        return Err(DiscretizeError::DimensionMismatch(format!(
            "sigma sampled on {} nodes in dimension {}, grid has {} nodes in dimension {}",
            sigma.num_nodes(),
            sigma.dim(),
            grid.num_full(),
            grid.dim()
        )));
    }
    if let Some(node) = (0..sigma.num_nodes()).find(|&q| sigma.matrix(q).iter().any(|v| !v.is_finite())) {
        return Err(DiscretizeError::NonFinite { node, coords: grid.full_coords(node) });
    }
    Ok(())
}

/// Assembles `L_h ≈ ∂ᵢ((aᵢⱼ + eps_visc δᵢⱼ)∂ⱼ)` with `a = σσᵀ`.
///
/// The matrix is minus the stiffness matrix of the cellwise energy
/// `¼ Σ_corners ∇_q uᵀ a_q ∇_q u`, where the corner gradient `∇_q` uses the
/// two cell edges meeting at corner `q` and `a_q` is sampled at that corner.
/// In 1D this is the face-averaged three-point stencil.
pub fn assemble_divergence(sigma: &SigmaField, grid: &Grid, eps_visc: f64) -> Result<DiscreteOperator, DiscretizeError> {
    if !(eps_visc >= 0.0) || !eps_visc.is_finite() {
        return Err(DiscretizeError::InvalidViscosity(eps_visc));
    }
    check_sigma(sigma, grid)?;
    let d = grid.dim();
    let h = grid.spacing();
    let tol = 1e-12 * sigma.bound().max(1.0);
    let mut diff = Vec::with_capacity(grid.num_full());
    for q in 0..grid.num_full() {
        let mut a = sigma.diffusion(q);
        for (i, row) in a.iter_mut().enumerate().take(d) {
            row[i] += eps_visc;
        }
        let min_eig = if d == 1 {
            a[0][0]
        } else {
            let (tr, det) = (a[0][0] + a[1][1], a[0][0] * a[1][1] - a[0][1] * a[1][0]);
            0.5 * (tr - ((tr * tr - 4.0 * det).max(0.0)).sqrt())
        };
        if min_eig < -tol {
            return Err(DiscretizeError::NotPsd { node: q, coords: grid.full_coords(q), min_eigenvalue: min_eig });
        }
        diff.push(a);
    }

    let counts = grid.interior_counts();
    let corner_weight = 1.0 / (1usize << d) as f64;
    let cells: Vec<[usize; 2]> = match d {
        1 => (0..=counts[0]).map(|i| [i, 0]).collect(),
        _ => (0..=counts[1]).flat_map(|j| (0..=counts[0]).map(move |i| [i, j])).collect(),
    };
    let mut upper: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
    for cell in cells {
        for corner in 0..(1usize << d) {
            let bit = |a: usize| (corner >> a) & 1;
            let node = [cell[0] + bit(0), cell[1] + if d == 2 { bit(1) } else { 0 }];
            // Edge along axis `a` through this corner: (lo, hi) full multi-indices.
            let grad: Vec<[([usize; 2], f64); 2]> = (0..d)
                .map(|a| {
                    let (mut lo, mut hi) = (node, node);
                    lo[a] = cell[a];
                    hi[a] = cell[a] + 1;
                    [(lo, -1.0 / h[a]), (hi, 1.0 / h[a])]
                })
                .collect();
            let a_q = diff[grid.full_index(node)];
            for (a, ga) in grad.iter().enumerate() {
                for (b, gb) in grad.iter().enumerate() {
                    let coef = corner_weight * a_q[a][b];
                    if coef == 0.0 {
                        continue;
                    }
                    for &(ma, ca) in ga {
                        let Some(p) = grid.interior_of(ma) else { continue };
                        for &(mb, cb) in gb {
                            let Some(r) = grid.interior_of(mb) else { continue };
                            *upper.entry((p.min(r), p.max(r))).or_insert(0.0) += coef * ca * cb;
                        }
                    }
                }
            }
        }
    }
    let mut triplets = Vec::with_capacity(2 * upper.len());
    for ((p, r), v) in upper {
        // Off-diagonal pairs were accumulated from both (p,r) and (r,p).
        if p == r {
            triplets.push((p, p, -v));
        } else {
            triplets.push((p, r, -0.5 * v));
            triplets.push((r, p, -0.5 * v));
        }
    }
    let n = grid.num_interior();
    Ok(DiscreteOperator { kind: OperatorKind::DivergenceForm, matrix: SparseMatrix::from_triplets(n, n, triplets) })
}

/// Centered-difference `L_k = Σᵢ σᵢₖ ∂ᵢ`; neighbours on the boundary carry the
/// zero Dirichlet value.
pub fn assemble_first_order(sigma: &SigmaField, column: usize, grid: &Grid) -> Result<DiscreteOperator, DiscretizeError> {
    check_sigma(sigma, grid)?;
    if column >= sigma.columns() {
        return Err(DiscretizeError::DimensionMismatch(format!(
            "column {column} requested, sigma has {} columns",
            sigma.columns()
        )));
    }
    let h = grid.spacing();
    let n = grid.num_interior();
    let mut t = Vec::new();
    for p in 0..n {
        let m = grid.interior_multi(p);
        let q = grid.full_index(m);
        for (axis, &step) in h.iter().enumerate() {
            let c = sigma.entry(q, axis, column) / (2.0 * step);
            if c == 0.0 {
                continue;
            }
            let (mut fwd, mut bwd) = (m, m);
            fwd[axis] += 1;
            bwd[axis] -= 1;
            if let Some(r) = grid.interior_of(fwd) {
                t.push((p, r, c));
            }
            if let Some(r) = grid.interior_of(bwd) {
                t.push((p, r, -c));
            }
        }
    }
    Ok(DiscreteOperator { kind: OperatorKind::FirstOrder(column), matrix: SparseMatrix::from_triplets(n, n, t) })
}

/// Diagonal quadrature-weight matrix.
pub fn assemble_mass(grid: &Grid) -> DiscreteOperator {
    DiscreteOperator { kind: OperatorKind::Mass, matrix: SparseMatrix::identity(grid.num_interior()).scale(grid.cell_volume()) }
}

/// Every operator a time stepper needs for one (σ, grid, viscosity) triple.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub divergence: DiscreteOperator,
    pub first_order: Vec<DiscreteOperator>,
    /// Transposes of `first_order`, used for `div_h(σ g) = −Σ_k L_kᵀ g_k`.
    pub first_order_t: Vec<SparseMatrix>,
}

impl OperatorSet {
    pub fn assemble(sigma: &SigmaField, grid: &Grid, eps_visc: f64) -> Result<Self, DiscretizeError> {
        let divergence = assemble_divergence(sigma, grid, eps_visc)?;
        let first_order = (0..sigma.columns())
            .map(|k| assemble_first_order(sigma, k, grid))
            .collect::<Result<Vec<_>, _>>()?;
        let first_order_t = first_order.iter().map(|op| op.matrix.transpose()).collect();
        Ok(Self { divergence, first_order, first_order_t })
    }

    pub fn columns(&self) -> usize {
        self.first_order.len()
    }

    /// `σᵀ∇u` as one vector per column.
    pub fn gradients(&self, u: &[f64]) -> Vec<Vec<f64>> {
        self.first_order.iter().map(|op| op.apply(u)).collect()
    }

    /// Adds `div_h(σ g)` to `out`, given one nodal field `g_k` per column.
    pub fn add_divergence_of(&self, g: &[Vec<f64>], out: &mut [f64]) {
        let mut tmp = vec![0.0; out.len()];
        for (gt, gk) in self.first_order_t.iter().zip(g) {
            gt.mul_vec_into(gk, &mut tmp);
            out.iter_mut().zip(&tmp).for_each(|(o, t)| *o -= t);
        }
    }
}
