use faer::linalg::solvers::Solve;
use faer::Mat;

use super::transformed::project_off_zero_modes;
use crate::error::{Error, Result};
use crate::model::DiscreteLaplacian;

/// Relative distance to a noninteracting pole below which a solve is refused.
const RESONANCE_TOL: f64 = 1e-6;

/// Two-particle Green's function `G(x, y; x′, y′)` of the free transformed operator.
#[derive(Debug, Clone)]
pub struct GreensFunction {
    /// 1-based source sites `(x′, y′)`.
    pub source: (usize, usize),
    pub energy_ratio: f64,
    /// `values[(x − 1, y − 1)] = G(x, y)`.
    pub values: Mat<f64>,
    /// Residual of the defining equation on the zero-mode complement.
    pub residual: f64,
}

impl GreensFunction {
    /// `|⟨G, other⟩| / (‖G‖‖other‖)`.
    pub fn overlap(&self, other: &GreensFunction) -> f64 {
        let dot: f64 = (0..self.values.ncols())
            .flat_map(|j| (0..self.values.nrows()).map(move |i| (i, j)))
            .map(|(i, j)| self.values[(i, j)] * other.values[(i, j)])
            .sum();
        dot.abs() / (self.values.norm_l2() * other.values.norm_l2())
    }
}

fn check_source(n: usize, source: (usize, usize)) -> Result<()> {
    for index in [source.0, source.1] {
        if index == 0 || index > n {
            return Err(Error::SiteOutOfRange { index, n });
        }
    }
    Ok(())
}

/// Poles `1/λ_p + 1/λ_q` of the free operator, `p, q ≥ 2`.
pub fn noninteracting_eigenvalues(n: usize) -> Result<Vec<f64>> {
    let lap = DiscreteLaplacian::new(n)?;
    let mut out: Vec<f64> = (2..=n)
        .flat_map(|p| (p..=n).map(move |q| (p, q)))
        .map(|(p, q)| 1.0 / lap.eigenvalue(p) + 1.0 / lap.eigenvalue(q))
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn check_resonance(n: usize, energy_ratio: f64) -> Result<()> {
    if !energy_ratio.is_finite() {
        return Err(Error::InvalidConfig(format!("energy ratio must be finite, got {energy_ratio}")));
    }
    let nearest = noninteracting_eigenvalues(n)?
        .into_iter()
        .min_by(|a, b| (a - energy_ratio).abs().total_cmp(&(b - energy_ratio).abs()));
    if let Some(eig) = nearest {
        if (eig - energy_ratio).abs() <= RESONANCE_TOL * eig.abs().max(1.0) {
            return Err(Error::NearResonance { energy_ratio, eigenvalue: eig });
        }
    }
    Ok(())
}

/// `(∂ₓ² + ∂ᵧ²)G − λ∂ₓ²∂ᵧ²G`, without projection.
fn apply_operator(l: &Mat<f64>, g: &Mat<f64>, energy_ratio: f64) -> Mat<f64> {
    l * g + g * l - (l * g * l) * faer::Scale(energy_ratio)
}

fn projected_delta(n: usize, source: (usize, usize)) -> Mat<f64> {
    let mut delta = Mat::<f64>::zeros(n, n);
    delta[(source.0 - 1, source.1 - 1)] = 1.0;
    project_off_zero_modes(&delta)
}

fn residual(l: &Mat<f64>, g: &Mat<f64>, energy_ratio: f64, source: (usize, usize)) -> f64 {
    let n = g.nrows();
    let r = project_off_zero_modes(&apply_operator(l, g, energy_ratio)) - projected_delta(n, source);
    r.norm_l2()
}

/// Dense LU solve of `[(∂ₓ² + ∂ᵧ²) − λ∂ₓ²∂ᵧ²]G = Pδ` on the `N²` grid, `λ = ε/(φΓ₀)`.
///
/// The operator vanishes on the constant-mode directions, so they are
/// shifted by a positive constant before factorization. The right-hand
/// side has no component there, hence neither has the solution.
pub fn greens_function_direct(n: usize, energy_ratio: f64, source: (usize, usize)) -> Result<GreensFunction> {
    check_source(n, source)?;
    check_resonance(n, energy_ratio)?;
    let lap = DiscreteLaplacian::new(n)?;
    let l = lap.matrix();
    let pe = 1.0 / n as f64;
    // shift 3 keeps A₀ + 3 away from zero on the constant-mode block (A₀ ∈ [−2, 0] there)
    let shift = 3.0;
    let id = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let dim = n * n;
    let op = Mat::<f64>::from_fn(dim, dim, |r, c| {
        let (x, y) = (r / n, r % n);
        let (xp, yp) = (c / n, c % n);
        let kin = l[(x, xp)] * id(y, yp) + id(x, xp) * l[(y, yp)] - energy_ratio * l[(x, xp)] * l[(y, yp)];
        let perp = pe * id(y, yp) + id(x, xp) * pe - pe * pe;
        kin + shift * perp
    });
    let rhs_mat = projected_delta(n, source);
    let rhs = Mat::<f64>::from_fn(dim, 1, |r, _| rhs_mat[(r / n, r % n)]);
    let sol = op.partial_piv_lu().solve(&rhs);
    let values = Mat::from_fn(n, n, |x, y| sol[(x * n + y, 0)]);
    if values.norm_l2().is_nan() || !values.norm_l2().is_finite() {
        return Err(Error::NearResonance { energy_ratio, eigenvalue: f64::NAN });
    }
    let residual = residual(l, &values, energy_ratio, source);
    Ok(GreensFunction { source, energy_ratio, values, residual })
}

/// Full eigenfunction expansion over all standing-wave pairs `n, m ≥ 2`:
/// `G = Σ u_n(x)u_n(x′)u_m(y)u_m(y′) / (λ_n + λ_m − λλ_nλ_m)`.
pub fn greens_function_series(n: usize, energy_ratio: f64, source: (usize, usize)) -> Result<GreensFunction> {
    check_source(n, source)?;
    check_resonance(n, energy_ratio)?;
    let lap = DiscreteLaplacian::new(n)?;
    let u = lap.standing_waves();
    let lam: Vec<f64> = (1..=n).map(|j| lap.eigenvalue(j)).collect();
    let (xs, ys) = (source.0 - 1, source.1 - 1);
    let coeff = Mat::from_fn(n, n, |p, q| {
        if p == 0 || q == 0 {
            0.0
        } else {
            u[(xs, p)] * u[(ys, q)] / (lam[p] + lam[q] - energy_ratio * lam[p] * lam[q])
        }
    });
    let values = &u * &coeff * u.transpose();
    let residual = residual(lap.matrix(), &values, energy_ratio, source);
    Ok(GreensFunction { source, energy_ratio, values, residual })
}

/// Energy ratio `−2/k₀²` of the pair resonance of standing wave `n0`.
pub fn resonance_energy_ratio(n: usize, n0: usize) -> Result<f64> {
    if n0 < 2 || n0 > n {
        return Err(Error::InvalidConfig(format!("standing-wave index n0 = {n0} outside 2..={n}")));
    }
    let k0 = DiscreteLaplacian::new(n)?.wavevector(n0);
    Ok(-2.0 / (k0 * k0))
}

/// Separable approximation near the resonance of mode `n0`:
/// `(a/δ)[u₀(x)u₀(x′)g(y, y′) + u₀(y)u₀(y′)g(x, x′)]`, with `a = 1/k₀²`
/// and `δ = λ + 2/k₀²` the detuning in units of `φΓ₀`.
pub fn greens_function_resonant(
    n: usize,
    energy_ratio: f64,
    n0: usize,
    n_min: usize,
    source: (usize, usize),
) -> Result<GreensFunction> {
    check_source(n, source)?;
    let detuning = energy_ratio - resonance_energy_ratio(n, n0)?;
    if detuning == 0.0 {
        return Err(Error::ZeroDetuning);
    }
    let lap = DiscreteLaplacian::new(n)?;
    let k0 = lap.wavevector(n0);
    let a = 1.0 / (k0 * k0);
    let u0 = lap.standing_wave(n0);
    let g = short_range_g(n, n_min, source.1)?.matrix;
    let (xs, ys) = (source.0 - 1, source.1 - 1);
    let pref = a / detuning;
    let values = Mat::from_fn(n, n, |x, y| pref * (u0[x] * u0[xs] * g[(y, ys)] + u0[y] * u0[ys] * g[(x, xs)]));
    let residual = residual(lap.matrix(), &values, energy_ratio, source);
    Ok(GreensFunction { source, energy_ratio, values, residual })
}

/// Truncated kernel `g(y, y′) = Σ_{m ≥ n_min} u_m(y)u_m(y′)/k_m²` with an
/// exponential fit `amplitude·e^{−κ|y−y′|}` of the row at the reference site.
#[derive(Debug, Clone)]
pub struct ShortRangeKernel {
    pub n_min: usize,
    /// 1-based row used for the fit.
    pub reference: usize,
    pub matrix: Mat<f64>,
    pub kappa_fit: f64,
    pub amplitude: f64,
}

impl ShortRangeKernel {
    /// Continuum short-range form `(1/2κ)e^{−κ|y−y′|}`.
    pub fn continuum(kappa: f64, separation: f64) -> f64 {
        (-kappa * separation).exp() / (2.0 * kappa)
    }
}

pub fn short_range_g(n: usize, n_min: usize, reference: usize) -> Result<ShortRangeKernel> {
    if n_min <= 1 || n_min >= n {
        return Err(Error::InvalidConfig(format!("n_min = {n_min} must satisfy 1 < n_min < N = {n}")));
    }
    check_source(n, (reference, reference))?;
    let lap = DiscreteLaplacian::new(n)?;
    let u = lap.standing_waves();
    let weight: Vec<f64> = (1..=n)
        .map(|m| {
            if m < n_min {
                0.0
            } else {
                let k = lap.wavevector(m);
                1.0 / (k * k)
            }
        })
        .collect();
    let matrix = Mat::from_fn(n, n, |y, yp| (0..n).map(|m| u[(y, m)] * u[(yp, m)] * weight[m]).sum::<f64>());

    // least squares of log|g| against separation 1..=⌊N/4⌋ on the reference row
    let r = reference - 1;
    let max_sep = (n / 4).max(1);
    let samples: Vec<(f64, f64)> = (0..n)
        .filter_map(|y| {
            let d = y.abs_diff(r);
            let v = matrix[(y, r)].abs();
            (d >= 1 && d <= max_sep && v > 0.0).then(|| (d as f64, v.ln()))
        })
        .collect();
    let (kappa_fit, amplitude) = if samples.len() < 2 {
        (f64::NAN, f64::NAN)
    } else {
        let m = samples.len() as f64;
        let sx: f64 = samples.iter().map(|s| s.0).sum();
        let sy: f64 = samples.iter().map(|s| s.1).sum();
        let sxx: f64 = samples.iter().map(|s| s.0 * s.0).sum();
        let sxy: f64 = samples.iter().map(|s| s.0 * s.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let intercept = (sy - slope * sx) / m;
        (-slope, intercept.exp())
    };
    Ok(ShortRangeKernel { n_min, reference, matrix, kappa_fit, amplitude })
}
