use std::f64::consts::PI;

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wave-vector grid for the Fourier maps, `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KGrid {
    /// `k_j = πj/N`, `j = 0..N-1`: the standing-wave half range.
    #[default]
    HalfRange,
    /// `k_j = 2πj/N`: a full period, on which the transform is unitary up to `N`.
    FullPeriod,
}

impl KGrid {
    pub fn wavevectors(&self, n: usize) -> Vec<f64> {
        let step = match self {
            KGrid::HalfRange => PI / n as f64,
            KGrid::FullPeriod => 2.0 * PI / n as f64,
        };
        (0..n).map(|j| step * j as f64).collect()
    }
}

fn phases(n: usize, grid: KGrid) -> Vec<Vec<c64>> {
    // e^{-i k_j s} for 1-based site s
    grid.wavevectors(n)
        .iter()
        .map(|&k| (1..=n).map(|s| c64::new((k * s as f64).cos(), -(k * s as f64).sin())).collect())
        .collect()
}

/// `|Σ_n e^{-ikn} ψ_mn|²` along row `m` (1-based) on the chosen grid.
pub fn fourier_1d(psi: MatRef<'_, c64>, m: usize, grid: KGrid) -> Result<Vec<f64>> {
    let n = psi.ncols();
    if m == 0 || m > psi.nrows() {
        return Err(Error::SiteOutOfRange { index: m, n: psi.nrows() });
    }
    let row = psi.row(m - 1);
    Ok(phases(n, grid)
        .iter()
        .map(|ph| ph.iter().zip(row.iter()).map(|(p, z)| p * z).sum::<c64>().norm_sqr())
        .collect())
}

/// `|Σ_mn e^{-i kx m - i ky n} ψ_mn|²`, indexed `[kx][ky]`.
pub fn fourier_2d(psi: MatRef<'_, c64>, grid: KGrid) -> Mat<f64> {
    let (rows, cols) = (psi.nrows(), psi.ncols());
    let pr = phases(rows, grid);
    let pc = phases(cols, grid);
    let fr = Mat::from_fn(rows, rows, |k, s| pr[k][s]);
    let fc = Mat::from_fn(cols, cols, |s, k| pc[k][s]);
    let t = &fr * psi * &fc;
    Mat::from_fn(rows, cols, |i, j| t[(i, j)].norm_sqr())
}

/// Inverse participation ratio of a density after normalizing it to unit sum.
pub fn spectral_ipr(density: &[f64]) -> f64 {
    let total: f64 = density.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    density.iter().map(|d| (d / total).powi(2)).sum()
}
