//! Sine transforms and spectral Bessel-potential norms on box grids.

use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{DiscretizeError, Grid};

/// Symbol used for `(1 + |κ|²)^η`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralSymbol {
    /// Physical wavenumber `κ = kπ/ℓ` per axis.
    #[default]
    Continuous,
    /// Eigenvalues `(4/h²) sin²(kπh/2ℓ)` of the discrete Dirichlet Laplacian.
    /// The resulting form is Markovian, so it decreases under truncations
    /// such as `v ↦ (v − c)⁺`.
    Discrete,
}

/// Type-I discrete sine transform `X_k = Σₙ xₙ sin(πkn/(N+1))`, k, n = 1..N.
pub struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl SineTransform {
    pub fn new(n: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        Self { n, fft }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Transforms `x` in place (length `N`).
    pub fn apply(&self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        let m = 2 * (n + 1);
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        for (i, &v) in x.iter().enumerate() {
            buf[i + 1].re = v;
            buf[m - 1 - i].re = -v;
        }
        self.fft.process(&mut buf);
        for (k, out) in x.iter_mut().enumerate() {
            *out = -0.5 * buf[k + 1].im;
        }
    }
}

/// Precomputed transforms and symbols for one grid.
pub struct FractionalNorm {
    counts: Vec<usize>,
    transforms: Vec<SineTransform>,
    /// `|κ|²` per spectral index, in interior-node order.
    wavenumber_sq: Vec<f64>,
    /// Squared coefficient normalisation `Π_axis (2/ℓ)·h²`.
    scale: f64,
}

impl FractionalNorm {
    pub fn new(grid: &Grid, symbol: SpectralSymbol) -> Self {
        let counts = grid.interior_counts().to_vec();
        let lengths = grid.lengths();
        let h = grid.spacing();
        let per_axis: Vec<Vec<f64>> = (0..grid.dim())
            .map(|a| {
                (1..=counts[a])
                    .map(|k| {
                        let kappa = k as f64 * std::f64::consts::PI / lengths[a];
                        match symbol {
                            SpectralSymbol::Continuous => kappa * kappa,
                            SpectralSymbol::Discrete => {
                                let s = (0.5 * kappa * h[a]).sin();
                                4.0 * s * s / (h[a] * h[a])
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        let wavenumber_sq = match grid.dim() {
            1 => per_axis[0].clone(),
            _ => per_axis[1].iter().flat_map(|ky| per_axis[0].iter().map(move |kx| kx + ky)).collect(),
        };
        let scale = (0..grid.dim()).map(|a| 2.0 / lengths[a] * h[a] * h[a]).product();
        let transforms = counts.iter().map(|&n| SineTransform::new(n)).collect();
        Self { counts, transforms, wavenumber_sq, scale }
    }

    /// Sine coefficients `v̂_k = ∫ v e_k` (trapezoid quadrature), in
    /// interior-node order.
    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        let mut c = values.to_vec();
        let nx = self.counts[0];
        for row in c.chunks_mut(nx) {
            self.transforms[0].apply(row);
        }
        if self.counts.len() == 2 {
            let ny = self.counts[1];
            let mut col = vec![0.0; ny];
            for i in 0..nx {
                for j in 0..ny {
                    col[j] = c[i + nx * j];
                }
                self.transforms[1].apply(&mut col);
                for j in 0..ny {
                    c[i + nx * j] = col[j];
                }
            }
        }
        let s = self.scale.sqrt();
        c.iter_mut().for_each(|v| *v *= s);
        c
    }

    /// `Σ_k (1 + |κ_k|²)^η |v̂_k|²`.
    pub fn norm_sq(&self, values: &[f64], eta: f64) -> Result<f64, DiscretizeError> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(DiscretizeError::EtaOutOfRange(eta));
        }
        if values.len() != self.wavenumber_sq.len() {
            return Err(DiscretizeError::DimensionMismatch(format!(
                "field has {} values, grid has {} interior nodes",
                values.len(),
                self.wavenumber_sq.len()
            )));
        }
        let c = self.coefficients(values);
        Ok(c.iter().zip(&self.wavenumber_sq).map(|(v, k2)| (1.0 + k2).powf(eta) * v * v).sum())
    }
}

/// One-shot `‖v‖²_{H^η}` with the continuous symbol.
pub fn fractional_norm(values: &[f64], eta: f64, grid: &Grid) -> Result<f64, DiscretizeError> {
    FractionalNorm::new(grid, SpectralSymbol::Continuous).norm_sq(values, eta)
}
