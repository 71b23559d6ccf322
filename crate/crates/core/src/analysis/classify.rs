use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use super::ipr::{ipr_real, ipr_reciprocal_in};
use super::schmidt::schmidt_decompose;
use crate::error::Result;
use crate::model::DiscreteLaplacian;
use crate::spectra::TwoExcState;

/// Cross-state selection thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Lower bound on the real-space IPR of the localized factor and on the
    /// standing-wave IPR of the free factor.
    pub ipr_min: f64,
    /// Upper bound on every singular value beyond the leading two.
    pub sv_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { ipr_min: 0.12, sv_max: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Descending, normalized so that `Σ s² = 1`.
    pub singular_values: Vec<f64>,
    pub psi_loc: Vec<c64>,
    pub psi_free: Vec<c64>,
    pub ipr_loc_real: f64,
    pub ipr_free_recip: f64,
    /// `max(s₃, s₄, …)`.
    pub residual_weight: f64,
    pub is_cross: bool,
    /// Three leading singular values coincide; roles cannot be assigned.
    pub indeterminate: bool,
}

/// Classifies amplitudes on a fixed array size, caching the standing-wave basis.
#[derive(Debug, Clone)]
pub struct Classifier {
    thresholds: Thresholds,
    waves: Mat<f64>,
}

impl Classifier {
    pub fn new(n: usize, thresholds: Thresholds) -> Result<Self> {
        Ok(Classifier { thresholds, waves: DiscreteLaplacian::new(n)?.standing_waves() })
    }

    pub fn thresholds(&self) -> Thresholds {
        self.thresholds
    }

    pub fn classify(&self, psi: MatRef<'_, c64>) -> Result<Classification> {
        let mut schmidt = schmidt_decompose(psi)?;
        let total: f64 = schmidt.singular_values.iter().map(|s| s * s).sum::<f64>().sqrt();
        if total > 0.0 {
            for s in &mut schmidt.singular_values {
                *s /= total;
            }
        }
        let indeterminate = schmidt.is_degenerate();
        let (a, b) = schmidt.pair_factors();
        let (ra, rb) = (ipr_real(&a), ipr_real(&b));
        let (psi_loc, psi_free, ipr_loc_real) = if ra >= rb { (a, b, ra) } else { (b, a, rb) };
        let ipr_free_recip = ipr_reciprocal_in(&self.waves, &psi_free);
        let residual_weight = schmidt.remainder();
        let t = self.thresholds;
        let is_cross = !indeterminate
            && ipr_loc_real > t.ipr_min
            && ipr_free_recip > t.ipr_min
            && residual_weight < t.sv_max;
        Ok(Classification {
            singular_values: schmidt.singular_values,
            psi_loc,
            psi_free,
            ipr_loc_real,
            ipr_free_recip,
            residual_weight,
            is_cross,
            indeterminate,
        })
    }
}

pub fn classify_state(state: &TwoExcState, thresholds: Thresholds) -> Result<Classification> {
    Classifier::new(state.n_sites(), thresholds)?.classify(state.psi.as_ref())
}
