//! Dense non-Hermitian spectra and the polariton dispersion.

use std::cmp::Ordering;

use faer::{c64, Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{build_single_hamiltonian, build_two_excitation_hamiltonian, ArrayConfig, PairBasis};

/// Residual above which a state is treated as unreliable by downstream analysis.
pub const STATE_RESIDUAL_LIMIT: f64 = 1e-6;

/// Eigenvalues closer than this times `‖M‖` are treated as exactly degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-11;

/// Eigenpairs of a dense complex matrix, with per-pair residuals `‖Mv − εv‖`.
///
/// Eigenvectors are unit-norm columns with their first significant component
/// made real and positive.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<c64>,
    pub eigenvectors: Mat<c64>,
    pub residuals: Vec<f64>,
    /// Frobenius norm of the decomposed matrix.
    pub matrix_norm: f64,
}

impl ComplexSpectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvector(&self, i: usize) -> Vec<c64> {
        self.eigenvectors.col(i).iter().copied().collect()
    }

    pub fn trace(&self) -> c64 {
        self.eigenvalues.iter().sum()
    }

    /// Indices whose residual exceeds `1e-8·‖M‖`, i.e. numerically defective pairs.
    pub fn suspect_pairs(&self) -> Vec<usize> {
        let limit = 1e-8 * self.matrix_norm.max(1.0);
        (0..self.len()).filter(|&i| self.residuals[i] > limit).collect()
    }

    /// Reorders the eigenpairs by a permutation of indices.
    pub fn permuted(&self, order: &[usize]) -> ComplexSpectrum {
        let n = self.eigenvectors.nrows();
        ComplexSpectrum {
            eigenvalues: order.iter().map(|&i| self.eigenvalues[i]).collect(),
            eigenvectors: Mat::from_fn(n, order.len(), |r, c| self.eigenvectors[(r, order[c])]),
            residuals: order.iter().map(|&i| self.residuals[i]).collect(),
            matrix_norm: self.matrix_norm,
        }
    }
}

fn frobenius(m: MatRef<'_, c64>) -> f64 {
    let mut acc = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc += m[(i, j)].norm_sqr();
        }
    }
    acc.sqrt()
}

fn fix_phase(v: &mut [c64]) {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return;
    }
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-10 * scale) {
        let phase = lead.conj() / lead.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

fn lexicographic(a: &[c64], b: &[c64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

/// Full eigendecomposition of a dense complex matrix, sorted by (Re, Im) ascending.
pub fn eigensolve_dense(m: MatRef<'_, c64>) -> Result<ComplexSpectrum> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidConfig(format!("matrix must be square, got {}x{}", n, m.ncols())));
    }
    for j in 0..n {
        for i in 0..n {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidConfig(format!("non-finite matrix entry at ({i}, {j})")));
            }
        }
    }
    if n == 0 {
        return Ok(ComplexSpectrum {
            eigenvalues: vec![],
            eigenvectors: Mat::zeros(0, 0),
            residuals: vec![],
            matrix_norm: 0.0,
        });
    }
    let evd = m.eigen().map_err(|_| Error::NoConvergence(n))?;
    let u = evd.U();
    let s = evd.S();

    let mut pairs: Vec<(c64, Vec<c64>)> = (0..n)
        .map(|j| {
            let mut v: Vec<c64> = u.col(j).iter().copied().collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 0.0 {
                for z in &mut v {
                    *z /= norm;
                }
            }
            fix_phase(&mut v);
            (s[j], v)
        })
        .collect();
    if pairs.iter().any(|(e, _)| !e.re.is_finite() || !e.im.is_finite()) {
        return Err(Error::NoConvergence(n));
    }
    pairs.sort_by(|(ea, va), (eb, vb)| {
        ea.re.total_cmp(&eb.re).then(ea.im.total_cmp(&eb.im)).then_with(|| lexicographic(va, vb))
    });

    let eigenvectors = Mat::from_fn(n, n, |i, j| pairs[j].1[i]);
    let mv = m * &eigenvectors;
    let residuals = (0..n)
        .map(|j| {
            let e = pairs[j].0;
            (0..n).map(|i| (mv[(i, j)] - eigenvectors[(i, j)] * e).norm_sqr()).sum::<f64>().sqrt()
        })
        .collect();
    Ok(ComplexSpectrum {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        eigenvectors,
        residuals,
        matrix_norm: frobenius(m),
    })
}

/// Real-matrix convenience wrapper around [`eigensolve_dense`].
pub fn eigensolve_dense_real(m: MatRef<'_, f64>) -> Result<ComplexSpectrum> {
    let c = Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0));
    eigensolve_dense(c.as_ref())
}

pub fn single_particle_spectrum(cfg: &ArrayConfig) -> Result<ComplexSpectrum> {
    let h = build_single_hamiltonian(cfg)?;
    eigensolve_dense(h.as_ref())
}

/// A two-excitation eigenstate: average pair energy `ε` (the operator
/// eigenvalue is `2ε`) and the symmetric amplitude matrix `ψ` normalized to
/// `Σ|ψ_mn|² = 1`.
#[derive(Debug, Clone)]
pub struct TwoExcState {
    pub energy: c64,
    pub psi: Mat<c64>,
    /// Pair-basis residual `‖M c − 2ε c‖` of the unit coefficient vector.
    pub residual: f64,
    /// Number of eigenvalues (this one included) within round-off of `2ε`.
    /// Above 1 the eigenvector is an arbitrary member of its eigenspace.
    pub multiplicity: usize,
}

impl TwoExcState {
    pub fn n_sites(&self) -> usize {
        self.psi.nrows()
    }

    pub fn is_reliable(&self) -> bool {
        self.residual <= STATE_RESIDUAL_LIMIT
    }

    /// The spatial shape is fixed by the Hamiltonian, not by the solver's basis choice.
    pub fn is_unique(&self) -> bool {
        self.multiplicity == 1
    }
}

fn multiplicities(eigenvalues: &[c64], matrix_norm: f64) -> Vec<usize> {
    let tol = DEGENERACY_REL_TOL * matrix_norm.max(1.0);
    eigenvalues
        .iter()
        .map(|a| eigenvalues.iter().filter(|b| (*a - **b).norm() <= tol).count())
        .collect()
}

/// Solved two-excitation problem together with the basis it was solved in.
#[derive(Debug, Clone)]
pub struct TwoExcSpectrum {
    pub basis: PairBasis,
    pub spectrum: ComplexSpectrum,
    pub states: Vec<TwoExcState>,
}

pub fn solve_two_excitation(cfg: &ArrayConfig) -> Result<TwoExcSpectrum> {
    cfg.validate_two_excitation()?;
    let basis = PairBasis::new(cfg.n_qubits, cfg.basis_mode())?;
    let m = build_two_excitation_hamiltonian(cfg, &basis)?;
    let spectrum = eigensolve_dense(m.as_ref())?;
    let mult = multiplicities(&spectrum.eigenvalues, spectrum.matrix_norm);
    let states = (0..spectrum.len())
        .map(|j| {
            let coeffs = spectrum.eigenvector(j);
            let mut psi = basis.unfold(&coeffs);
            let norm = psi.norm_l2();
            if norm > 0.0 {
                psi = psi * faer::Scale(c64::new(1.0 / norm, 0.0));
            }
            TwoExcState {
                energy: spectrum.eigenvalues[j] * 0.5,
                psi,
                residual: spectrum.residuals[j],
                multiplicity: mult[j],
            }
        })
        .collect();
    Ok(TwoExcSpectrum { basis, spectrum, states })
}

pub fn two_excitation_spectrum(cfg: &ArrayConfig) -> Result<Vec<TwoExcState>> {
    Ok(solve_two_excitation(cfg)?.states)
}

/// Average energies `(ε_n + ε_m)/2` over unordered single-particle pairs `n ≤ m`,
/// sorted by (Re, Im).
pub fn noninteracting_pair_spectrum(cfg: &ArrayConfig) -> Result<Vec<c64>> {
    cfg.validate_two_excitation()?;
    let single = single_particle_spectrum(cfg)?.eigenvalues;
    let mut out = Vec::with_capacity(single.len() * (single.len() + 1) / 2);
    for i in 0..single.len() {
        for j in i..single.len() {
            out.push((single[i] + single[j]) * 0.5);
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Groups values sorted by real part into clusters separated by gaps wider
/// than `min_gap`. Returns `(start, end)` index ranges.
pub fn real_part_clusters(sorted: &[c64], min_gap: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if sorted.is_empty() {
        return out;
    }
    let mut start = 0;
    for i in 1..sorted.len() {
        if sorted[i].re - sorted[i - 1].re > min_gap {
            out.push((start, i));
            start = i;
        }
    }
    out.push((start, sorted.len()));
    out
}

fn check_phase(phi: f64) -> Result<()> {
    if !phi.is_finite() || phi == 0.0 {
        return Err(Error::InvalidConfig(format!("dispersion needs a finite nonzero phase, got {phi}")));
    }
    Ok(())
}

/// Infinite-array polariton dispersion `ε(k)/Γ₀ = sin φ / (cos k − cos φ)`.
pub fn exact_dispersion(k: f64, phi: f64) -> Result<f64> {
    check_phase(phi)?;
    let denom = k.cos() - phi.cos();
    if denom.abs() < 1e-12 {
        return Err(Error::LightLine { k, phi });
    }
    Ok(phi.sin() / denom)
}

/// Lower-branch approximation `ε(k)/Γ₀ ≈ −2φ/k²`, valid for `φ ≪ k ≪ 1`.
pub fn approx_dispersion(k: f64, phi: f64) -> Result<f64> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::InvalidConfig(format!("approximate dispersion needs phi > 0, got {phi}")));
    }
    if k == 0.0 {
        return Err(Error::ZeroWavevector);
    }
    Ok(-2.0 * phi / (k * k))
}

/// Inverse of [`approx_dispersion`]: `k = √(2φ/|ε|)`.
pub fn approx_wavevector(energy: f64, phi: f64) -> Result<f64> {
    if !(phi > 0.0) || !(energy < 0.0) {
        return Err(Error::InvalidConfig(format!("need phi > 0 and energy < 0, got phi={phi}, energy={energy}")));
    }
    Ok((2.0 * phi / energy.abs()).sqrt())
}

/// Noninteracting pair dispersion `ε(kx, ky)/Γ₀ ≈ −φ(1/kx² + 1/ky²)`.
pub fn pair_dispersion(kx: f64, ky: f64, phi: f64) -> f64 {
    -phi * (1.0 / (kx * kx) + 1.0 / (ky * ky))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VelocityAxis {
    X,
    Y,
    /// `kx == ky`: both components equal.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub kx: f64,
    pub ky: f64,
    pub axis: VelocityAxis,
}

/// Uniform wave-vector grid `k_i = i·k_max/points`, `i = 1..=points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    pub k_max: f64,
    pub points: usize,
}

impl ContourGrid {
    pub fn spacing(&self) -> f64 {
        self.k_max / self.points as f64
    }

    pub fn k(&self, i: usize) -> f64 {
        (i + 1) as f64 * self.spacing()
    }
}

/// Grid points lying on the pair isoenergy contour at average energy `energy`.
///
/// A point is on the contour when the contour level is crossed between it and
/// its `+x` or `+y` neighbour. Each point is labelled by the axis of the
/// dominant group-velocity component.
pub fn isoenergy_contour(energy: f64, phi: f64, grid: ContourGrid) -> Result<Vec<ContourPoint>> {
    if !(energy < 0.0) {
        return Err(Error::InvalidConfig(format!("isoenergy contour needs energy < 0, got {energy}")));
    }
    if !(phi > 0.0) || grid.points < 2 || !(grid.k_max > 0.0) {
        return Err(Error::InvalidConfig("isoenergy contour needs phi > 0 and a nontrivial grid".into()));
    }
    let p = grid.points;
    let level = |i: usize, j: usize| pair_dispersion(grid.k(i), grid.k(j), phi) - energy;
    let mut out = Vec::new();
    for i in 0..p {
        for j in 0..p {
            let here = level(i, j);
            let crosses = |other: f64| here == 0.0 || (here < 0.0) != (other < 0.0);
            let on = (i + 1 < p && crosses(level(i + 1, j)))
                || (j + 1 < p && crosses(level(i, j + 1)))
                || (i > 0 && crosses(level(i - 1, j)))
                || (j > 0 && crosses(level(i, j - 1)));
            if on {
                let (kx, ky) = (grid.k(i), grid.k(j));
                // |∂ε/∂k_a| = 2φ/k_a³: the smaller wave vector dominates
                let axis = match kx.partial_cmp(&ky).unwrap() {
                    Ordering::Less => VelocityAxis::X,
                    Ordering::Greater => VelocityAxis::Y,
                    Ordering::Equal => VelocityAxis::Both,
                };
                out.push(ContourPoint { kx, ky, axis });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Chi;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_matrix() {
        let mut m = Mat::<c64>::zeros(2, 2);
        m[(0, 0)] = c64::new(1.0, 2.0);
        m[(1, 1)] = c64::new(3.0, 0.0);
        let s = eigensolve_dense(m.as_ref()).unwrap();
        assert_abs_diff_eq!((s.eigenvalues[0] - c64::new(1.0, 2.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((s.eigenvalues[1] - c64::new(3.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert!(s.residuals.iter().all(|&r| r < 1e-14));
    }

    #[test]
    fn two_sites_in_phase() {
        let cfg = ArrayConfig::new(2, 0.0, Chi::Infinite).unwrap();
        let s = single_particle_spectrum(&cfg).unwrap();
        assert_abs_diff_eq!((s.eigenvalues[0] - c64::new(0.0, -2.0)).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.eigenvalues[1].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut m = Mat::<c64>::zeros(2, 2);
        m[(0, 1)] = c64::new(f64::NAN, 0.0);
        assert!(eigensolve_dense(m.as_ref()).is_err());
        let rect = Mat::<c64>::zeros(2, 3);
        assert!(eigensolve_dense(rect.as_ref()).is_err());
    }

    #[test]
    fn sorted_and_phase_fixed() {
        let cfg = ArrayConfig::new(9, 0.4, Chi::Infinite).unwrap();
        let s = single_particle_spectrum(&cfg).unwrap();
        for w in s.eigenvalues.windows(2) {
            assert!(w[0].re < w[1].re || (w[0].re == w[1].re && w[0].im <= w[1].im));
        }
        for j in 0..s.len() {
            let v = s.eigenvector(j);
            let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
            let lead = v.iter().find(|z| z.norm() > 1e-8).unwrap();
            assert!(lead.re > 0.0);
            assert_abs_diff_eq!(lead.im, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn hard_core_two_sites() {
        let cfg = ArrayConfig::new(2, 0.0, Chi::Infinite).unwrap();
        let states = two_excitation_spectrum(&cfg).unwrap();
        assert_eq!(states.len(), 1);
        assert_abs_diff_eq!((states[0].energy - c64::new(0.0, -1.0)).norm(), 0.0, epsilon = 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!((states[0].psi[(0, 1)] - c64::new(h, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!((states[0].psi[(1, 0)] - c64::new(h, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(states[0].psi[(0, 0)], c64::new(0.0, 0.0));
    }

    #[test]
    fn noninteracting_pairs_of_two_sites() {
        let cfg = ArrayConfig::new(2, 0.0, Chi::Finite(0.0)).unwrap();
        let pairs = noninteracting_pair_spectrum(&cfg).unwrap();
        let expected = [c64::new(0.0, -2.0), c64::new(0.0, -1.0), c64::new(0.0, 0.0)];
        assert_eq!(pairs.len(), 3);
        for (p, e) in pairs.iter().zip(expected) {
            assert_abs_diff_eq!((p - e).norm(), 0.0, epsilon = 1e-12);
        }
        let cfg = ArrayConfig::new(12, 0.3, Chi::Finite(0.0)).unwrap();
        assert_eq!(noninteracting_pair_spectrum(&cfg).unwrap().len(), 78);
    }

    #[test]
    fn chi_zero_matches_pair_sums() {
        // interacting solver at chi = 0 against single-particle pair sums
        let cfg = ArrayConfig::new(6, 0.7, Chi::Finite(0.0)).unwrap();
        let pairs = noninteracting_pair_spectrum(&cfg).unwrap();
        let states = two_excitation_spectrum(&cfg).unwrap();
        for s in &states {
            let d = pairs.iter().map(|p| (p - s.energy).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-9, "state {} has no pair partner ({d})", s.energy);
        }
    }

    #[test]
    fn two_excitation_states_are_normalized_eigenvectors() {
        let cfg = ArrayConfig::new(7, 0.2, Chi::Infinite).unwrap();
        let solved = solve_two_excitation(&cfg).unwrap();
        let h = build_single_hamiltonian(&cfg).unwrap();
        for s in &solved.states {
            assert_abs_diff_eq!(s.psi.norm_l2(), 1.0, epsilon = 1e-12);
            // (Hψ + ψH) off the diagonal equals 2εψ
            let lhs = &h * &s.psi + &s.psi * &h;
            for i in 0..7 {
                assert_eq!(s.psi[(i, i)], c64::new(0.0, 0.0));
                for j in 0..7 {
                    assert_eq!(s.psi[(i, j)], s.psi[(j, i)]);
                    if i != j {
                        assert!((lhs[(i, j)] - s.psi[(i, j)] * (s.energy * 2.0)).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn exact_dispersion_values() {
        let e = exact_dispersion(0.1, 0.01).unwrap();
        let direct = 0.01f64.sin() / (0.1f64.cos() - 0.01f64.cos());
        assert_eq!(e, direct);
        assert_abs_diff_eq!(e, -2.022, epsilon = 5e-4);
        let edge = exact_dispersion(std::f64::consts::PI, 0.01).unwrap();
        assert_abs_diff_eq!(edge, -0.0050, epsilon = 5e-5);
        assert!(matches!(exact_dispersion(0.01, 0.01), Err(Error::LightLine { .. })));
        assert!(matches!(exact_dispersion(-0.3, 0.3), Err(Error::LightLine { .. })));
        assert!(exact_dispersion(0.1, 0.0).is_err());
    }

    #[test]
    fn approx_dispersion_values() {
        assert_abs_diff_eq!(approx_dispersion(0.1, 0.01).unwrap(), -2.0, epsilon = 1e-12);
        assert!(matches!(approx_dispersion(0.0, 0.01), Err(Error::ZeroWavevector)));
        assert!(approx_dispersion(0.1, 0.0).is_err());
        let k = approx_wavevector(-2.57, 0.05).unwrap();
        assert_abs_diff_eq!(k, 0.197, epsilon = 1e-3);
        assert_abs_diff_eq!(k / (std::f64::consts::PI / 51.0), 3.2, epsilon = 0.05);
    }

    #[test]
    fn approximation_band() {
        // leading corrections: φ²/(k² − φ²) from the pole shift, ~k²/12 from the band curvature
        for phi in [1e-3, 1e-2] {
            let mut k = 3.0 * phi;
            while k <= 0.3 {
                let ex = exact_dispersion(k, phi).unwrap();
                let ap = approx_dispersion(k, phi).unwrap();
                let err = ((ex - ap) / ex).abs();
                let bound = phi * phi / (k * k - phi * phi) + k * k / 6.0;
                assert!(err <= bound, "phi={phi} k={k} err={err}");
                if k >= 6.0 * phi {
                    assert!(err < 0.03, "phi={phi} k={k} err={err}");
                }
                k += 0.001;
            }
        }
    }

    #[test]
    fn contour_asymptote_and_symmetry() {
        let phi = 0.05;
        let energy = -2.57;
        let grid = ContourGrid { k_max: 1.0, points: 400 };
        let pts = isoenergy_contour(energy, phi, grid).unwrap();
        assert!(!pts.is_empty());
        let k_min = (phi / energy.abs()).sqrt();
        assert_abs_diff_eq!(k_min, 0.139, epsilon = 1e-3);
        let dk = grid.spacing();
        for p in &pts {
            assert!(p.kx > k_min - dk && p.ky > k_min - dk);
            let back = pts.iter().find(|q| q.kx == p.ky && q.ky == p.kx).expect("swap symmetric");
            let swapped = match p.axis {
                VelocityAxis::X => VelocityAxis::Y,
                VelocityAxis::Y => VelocityAxis::X,
                VelocityAxis::Both => VelocityAxis::Both,
            };
            assert_eq!(back.axis, swapped);
            if p.ky > 3.0 * p.kx {
                assert_eq!(p.axis, VelocityAxis::X);
            }
        }
        // the branch along k_y -> large approaches k_x = k_min
        let far: Vec<_> = pts.iter().filter(|p| p.ky > 0.9).collect();
        assert!(far.iter().all(|p| (p.kx - k_min).abs() < 3.0 * dk));
    }

    #[test]
    fn empty_contour_is_not_an_error() {
        // far below the reachable energies on this grid
        let pts = isoenergy_contour(-1e6, 0.05, ContourGrid { k_max: 1.0, points: 50 }).unwrap();
        assert!(pts.is_empty());
        assert!(isoenergy_contour(1.0, 0.05, ContourGrid { k_max: 1.0, points: 50 }).is_err());
    }

    #[test]
    fn clusters_split_on_gaps() {
        let v = [c64::new(0.0, 0.0), c64::new(0.1, 0.0), c64::new(2.0, 0.0), c64::new(2.05, 0.0)];
        assert_eq!(real_part_clusters(&v, 0.5), vec![(0, 2), (2, 4)]);
    }
}
