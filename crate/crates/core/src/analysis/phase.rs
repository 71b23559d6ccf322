use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{Classifier, Thresholds};
use crate::error::{Error, Result};
use crate::model::{ArrayConfig, Chi};
use crate::spectra::solve_two_excitation;

/// 21 phases evenly spaced on `[0.01, π]`.
pub fn default_phi_grid() -> Vec<f64> {
    let (lo, hi, n) = (0.01, PI, 21);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// `0`, 13 log-spaced values on `[10⁻¹, 10³]`, then the hard-core limit.
pub fn default_chi_grid() -> Vec<Chi> {
    let mut out = vec![Chi::Finite(0.0)];
    out.extend((0..13).map(|i| Chi::Finite(10f64.powf(-1.0 + i as f64 / 3.0))));
    out.push(Chi::Infinite);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub cross: usize,
    pub total: usize,
    /// States left out of the cross count because their residual was too large.
    pub skipped: usize,
    /// States in an exactly degenerate eigenspace, whose shape is not unique
    /// and which are therefore never counted as cross.
    pub degenerate: usize,
}

impl PhaseCell {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.cross as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub phi: f64,
    pub chi: Chi,
    pub message: String,
}

/// Fraction of cross-shaped two-excitation states over a (φ, χ) grid.
/// Rows follow `phi_grid`, columns follow `chi_grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub n_qubits: usize,
    pub thresholds: Thresholds,
    pub phi_grid: Vec<f64>,
    pub chi_grid: Vec<Chi>,
    pub cells: Vec<Vec<Option<PhaseCell>>>,
    pub failures: Vec<CellFailure>,
}

impl PhaseDiagram {
    pub fn fraction(&self, row: usize, col: usize) -> Option<f64> {
        self.cells[row][col].as_ref().map(PhaseCell::fraction)
    }

    pub fn fractions(&self) -> Vec<Vec<Option<f64>>> {
        self.cells.iter().map(|r| r.iter().map(|c| c.as_ref().map(PhaseCell::fraction)).collect()).collect()
    }

    pub fn max_fraction(&self) -> Option<f64> {
        self.cells.iter().flatten().flatten().map(PhaseCell::fraction).reduce(f64::max)
    }

    pub fn succeeded(&self) -> usize {
        self.cells.iter().flatten().filter(|c| c.is_some()).count()
    }

    pub fn cell_count(&self) -> usize {
        self.phi_grid.len() * self.chi_grid.len()
    }
}

fn solve_cell(n: usize, phi: f64, chi: Chi, classifier: &Classifier) -> Result<PhaseCell> {
    let cfg = ArrayConfig::new(n, phi, chi)?;
    let solved = solve_two_excitation(&cfg)?;
    let mut cell = PhaseCell { cross: 0, total: solved.states.len(), skipped: 0, degenerate: 0 };
    for state in &solved.states {
        if !state.is_reliable() {
            cell.skipped += 1;
            continue;
        }
        if !state.is_unique() {
            cell.degenerate += 1;
            continue;
        }
        if classifier.classify(state.psi.as_ref())?.is_cross {
            cell.cross += 1;
        }
    }
    Ok(cell)
}

/// Sweeps the grid with `jobs` worker threads. Failed cells are recorded,
/// never fatal; the result does not depend on `jobs`.
pub fn phase_diagram(
    n: usize,
    phi_grid: &[f64],
    chi_grid: &[Chi],
    thresholds: Thresholds,
    jobs: usize,
) -> Result<PhaseDiagram> {
    if phi_grid.is_empty() || chi_grid.is_empty() {
        return Err(Error::InvalidConfig("phase diagram grids must be nonempty".into()));
    }
    if n < 2 {
        return Err(Error::InvalidConfig(format!("phase diagram needs N >= 2, got {n}")));
    }
    let classifier = Classifier::new(n, thresholds)?;
    let keys: Vec<(usize, usize)> =
        (0..phi_grid.len()).flat_map(|i| (0..chi_grid.len()).map(move |j| (i, j))).collect();
    let run = || -> Vec<Result<PhaseCell>> {
        keys.par_iter().map(|&(i, j)| solve_cell(n, phi_grid[i], chi_grid[j], &classifier)).collect()
    };
    let results = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?
        .install(run);

    let mut cells = vec![vec![None; chi_grid.len()]; phi_grid.len()];
    let mut failures = Vec::new();
    for (&(i, j), result) in keys.iter().zip(results) {
        match result {
            Ok(cell) => cells[i][j] = Some(cell),
            Err(e) => failures.push(CellFailure { phi: phi_grid[i], chi: chi_grid[j], message: e.to_string() }),
        }
    }
    Ok(PhaseDiagram {
        n_qubits: n,
        thresholds,
        phi_grid: phi_grid.to_vec(),
        chi_grid: chi_grid.to_vec(),
        cells,
        failures,
    })
}
