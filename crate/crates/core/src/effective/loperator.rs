use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::model::DiscreteLaplacian;
use crate::spectra::{eigensolve_dense_real, ComplexSpectrum};

/// Localization operator `𝓛 = 2a·diag(u₀)·(∂² − κ²)⁻¹·diag(u₀)·∂²`,
/// `a = 1/k₀²`, acting on the diagonal cross-section of the pair field.
/// Its eigenvalues are detunings `δε` in units of `Γ₀`.
#[derive(Debug, Clone)]
pub struct LOperator {
    pub n_sites: usize,
    pub kappa: f64,
    pub n0: usize,
    pub matrix: Mat<f64>,
}

pub fn build_l_operator(n: usize, kappa: f64, n0: usize) -> Result<LOperator> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidConfig(format!("cutoff kappa must be positive, got {kappa}")));
    }
    if n0 < 2 || n0 > n {
        return Err(Error::InvalidConfig(format!("standing-wave index n0 = {n0} outside 2..={n}")));
    }
    let lap = DiscreteLaplacian::new(n)?;
    let l = lap.matrix();
    let u0 = lap.standing_wave(n0);
    let k0 = lap.wavevector(n0);
    let a = 1.0 / (k0 * k0);
    let shifted = Mat::from_fn(n, n, |i, j| l[(i, j)] - if i == j { kappa * kappa } else { 0.0 });
    let rhs = Mat::from_fn(n, n, |i, j| u0[i] * l[(i, j)]);
    let solved = shifted.partial_piv_lu().solve(&rhs);
    let matrix = Mat::from_fn(n, n, |i, j| 2.0 * a * u0[i] * solved[(i, j)]);
    Ok(LOperator { n_sites: n, kappa, n0, matrix })
}

/// Eigenpairs of `𝓛` ordered by `|δε|` ascending (ties by real part).
pub fn solve_l(op: &LOperator) -> Result<ComplexSpectrum> {
    let spec = eigensolve_dense_real(op.matrix.as_ref())?;
    let mut order: Vec<usize> = (0..spec.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (spec.eigenvalues[i], spec.eigenvalues[j]);
        a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)).then(i.cmp(&j))
    });
    Ok(spec.permuted(&order))
}

/// Odd profile `(x − c)·θ(x₀ − |x − c|)` on sites `1..=N`, normalized.
///
/// Below one site the support is clamped to the nearest neighbours of the
/// centre, which leaves the discrete derivative of a point peak.
pub fn analytic_odd_profile(x0: f64, center: f64, n: usize) -> Result<Vec<f64>> {
    if !(x0 > 0.0) || x0 >= n as f64 / 2.0 {
        return Err(Error::InvalidConfig(format!("x0 = {x0} must lie in (0, N/2) for N = {n}")));
    }
    if !(1.0..=n as f64).contains(&center) {
        return Err(Error::InvalidConfig(format!("profile centre {center} outside 1..={n}")));
    }
    let reach = x0.max(1.0);
    let mut v: Vec<f64> = (1..=n)
        .map(|x| {
            let s = x as f64 - center;
            if s.abs() <= reach + 1e-12 {
                s
            } else {
                0.0
            }
        })
        .collect();
    let norm = v.iter().map(|z| z * z).sum::<f64>().sqrt();
    for z in &mut v {
        *z /= norm;
    }
    Ok(v)
}

/// Best-matching analytic support half-width for a real profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddProfileFit {
    pub x0: f64,
    pub overlap: f64,
}

/// Scans every distinct support width of [`analytic_odd_profile`] around
/// `center` and keeps the one with the largest normalized overlap.
pub fn fit_odd_profile(profile: &[f64], center: f64) -> Result<OddProfileFit> {
    let n = profile.len();
    let norm = profile.iter().map(|z| z * z).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidConfig("cannot fit a zero profile".into()));
    }
    let mut widths: Vec<f64> = (1..=n).map(|x| (x as f64 - center).abs()).filter(|&d| d >= 1.0 - 1e-12).collect();
    widths.sort_by(f64::total_cmp);
    widths.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut best: Option<OddProfileFit> = None;
    for x0 in widths.into_iter().filter(|&w| w < n as f64 / 2.0) {
        let model = analytic_odd_profile(x0, center, n)?;
        let overlap = model.iter().zip(profile).map(|(a, b)| a * b).sum::<f64>().abs() / norm;
        if best.map_or(true, |b| overlap > b.overlap) {
            best = Some(OddProfileFit { x0, overlap });
        }
    }
    best.ok_or_else(|| Error::InvalidConfig(format!("no admissible support width around {center}")))
}
