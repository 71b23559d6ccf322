use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DiscreteLaplacian;

/// Eigenstate of the local two-photon field equation
/// `(1 − D)(∂ₓ² + ∂ᵧ²)𝓔 = λ ∂ₓ²∂ᵧ² 𝓔`, `λ = ε/(φΓ₀)`, radiative decay neglected.
#[derive(Debug, Clone)]
pub struct TransformedState {
    pub energy_ratio: f64,
    /// Symmetric field amplitude `𝓔(x, y)`, normalized to `Σ𝓔² = 1`.
    pub field: Mat<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interaction {
    /// Keep the `δ_{x,y}` term (rows with `x = y` removed from the left side).
    On,
    /// Free pair propagation only.
    Off,
}

#[derive(Debug, Clone)]
pub struct TransformedSolution {
    pub n_sites: usize,
    pub phase: f64,
    pub states: Vec<TransformedState>,
    /// Dimension of the removed null space of `∂ₓ²∂ᵧ²` within the symmetric sector.
    pub deflated: usize,
}

impl TransformedSolution {
    pub fn energy(&self, i: usize) -> f64 {
        self.states[i].energy_ratio * self.phase
    }
}

/// Solves the transformed equation at phase `phi` with the interaction term on.
pub fn solve_transformed_equation(n: usize, phi: f64) -> Result<TransformedSolution> {
    solve_transformed(n, phi, Interaction::On)
}

/// Generalized eigenproblem `A·vec(𝓔) = λ·B·vec(𝓔)` with `A = (1 − D)(∂ₓ² + ∂ᵧ²)`
/// and `B = ∂ₓ²∂ᵧ²`, restricted to symmetric fields.
///
/// Both sides are projected off `span{e⊗u, u⊗e}` (`e` the constant zero mode),
/// where `B` vanishes and the eigenvalues would be infinite. On the
/// complement, in the standing-wave product basis, `A₀ = diag(α)` with
/// `α = λ_p + λ_q` and `B = diag(β)` with `β = λ_p λ_q > 0`, while `1 − D`
/// becomes `W = 1 − F Fᵀ` with `F[a][x] = s_a(x, x)`. Substituting
/// `d = α c` turns the problem into `W d = λ (β/α) d`, a symmetric-definite
/// pencil because `β/α < 0`, which is then solved as an ordinary symmetric
/// eigenproblem.
pub fn solve_transformed(n: usize, phi: f64, interaction: Interaction) -> Result<TransformedSolution> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::InvalidConfig(format!("transformed equation needs phi > 0, got {phi}")));
    }
    if n < 2 {
        return Err(Error::EmptyDeflation(n));
    }
    let lap = DiscreteLaplacian::new(n)?;
    let waves = lap.standing_waves();
    let lam: Vec<f64> = (1..=n).map(|j| lap.eigenvalue(j)).collect();

    // symmetric product modes (p, q), 0-based mode indices 1 <= p <= q < n
    let modes: Vec<(usize, usize)> = (1..n).flat_map(|p| (p..n).map(move |q| (p, q))).collect();
    let dim = modes.len();
    if dim == 0 {
        return Err(Error::EmptyDeflation(n));
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    let alpha: Vec<f64> = modes.iter().map(|&(p, q)| lam[p] + lam[q]).collect();
    let weight: Vec<f64> = modes.iter().map(|&(p, q)| -lam[p] * lam[q] / (lam[p] + lam[q])).collect();

    let mut kernel = Mat::<f64>::zeros(dim, dim);
    for a in 0..dim {
        kernel[(a, a)] = 1.0;
    }
    if interaction == Interaction::On {
        let diag_trace = Mat::from_fn(dim, n, |a, x| {
            let (p, q) = modes[a];
            let s = waves[(x, p)] * waves[(x, q)];
            if p == q {
                s
            } else {
                sqrt2 * s
            }
        });
        kernel = kernel - &diag_trace * diag_trace.transpose();
    }
    let inv_sqrt_w: Vec<f64> = weight.iter().map(|w| 1.0 / w.sqrt()).collect();
    let scaled = Mat::from_fn(dim, dim, |a, b| kernel[(a, b)] * inv_sqrt_w[a] * inv_sqrt_w[b]);
    let evd = scaled.self_adjoint_eigen(Side::Lower).map_err(|_| Error::NoConvergence(dim))?;
    let (vecs, vals) = (evd.U(), evd.S());

    // K y = μ y with λ = −μ; μ ascending so iterate backwards for ascending λ
    let states = (0..dim)
        .rev()
        .map(|j| {
            let energy_ratio = -vals[j];
            let mut coeff = Mat::<f64>::zeros(n, n);
            for (a, &(p, q)) in modes.iter().enumerate() {
                let c = vecs[(a, j)] * inv_sqrt_w[a] / alpha[a];
                if p == q {
                    coeff[(p, p)] = c;
                } else {
                    coeff[(p, q)] = c / sqrt2;
                    coeff[(q, p)] = c / sqrt2;
                }
            }
            let field = &waves * &coeff * waves.transpose();
            TransformedState { energy_ratio, field: normalize_sign(field) }
        })
        .collect();
    Ok(TransformedSolution { n_sites: n, phase: phi, states, deflated: n })
}

fn normalize_sign(mut m: Mat<f64>) -> Mat<f64> {
    let norm = m.norm_l2();
    if norm == 0.0 {
        return m;
    }
    let mut lead = 0.0;
    'outer: for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)].abs() > 1e-8 * norm {
                lead = m[(i, j)];
                break 'outer;
            }
        }
    }
    let s = if lead < 0.0 { -1.0 / norm } else { 1.0 / norm };
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            m[(i, j)] *= s;
        }
    }
    m
}

impl TransformedState {
    /// Two-excitation amplitude `ψ ∝ ∂²𝓔∂²`, normalized.
    pub fn reconstruct_psi(&self, lap: &DiscreteLaplacian) -> Mat<f64> {
        let l = lap.matrix();
        let psi = l * &self.field * l;
        let norm = psi.norm_l2();
        if norm == 0.0 {
            psi
        } else {
            psi * faer::Scale(1.0 / norm)
        }
    }

    /// Norm of `(1 − D)(∂ₓ² + ∂ᵧ²)𝓔 − λ ∂ₓ²∂ᵧ²𝓔` after projecting out the
    /// zero-mode directions, evaluated directly on the site grid.
    pub fn deflated_residual(&self, lap: &DiscreteLaplacian, interaction: Interaction) -> f64 {
        let l = lap.matrix();
        let e = &self.field;
        let n = e.nrows();
        let mut lhs = l * e + e * l;
        if interaction == Interaction::On {
            for x in 0..n {
                lhs[(x, x)] = 0.0;
            }
        }
        let r = lhs - (l * e * l) * faer::Scale(self.energy_ratio);
        project_off_zero_modes(&r).norm_l2()
    }
}

/// `R − PR − RP + PRP` with `P` the projector on the constant vector.
pub(crate) fn project_off_zero_modes(r: &Mat<f64>) -> Mat<f64> {
    let (rows, cols) = (r.nrows(), r.ncols());
    let col_mean: Vec<f64> = (0..cols).map(|j| (0..rows).map(|i| r[(i, j)]).sum::<f64>() / rows as f64).collect();
    let row_mean: Vec<f64> = (0..rows).map(|i| (0..cols).map(|j| r[(i, j)]).sum::<f64>() / cols as f64).collect();
    let all: f64 = col_mean.iter().sum::<f64>() / cols as f64;
    Mat::from_fn(rows, cols, |i, j| r[(i, j)] - col_mean[j] - row_mean[i] + all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn noninteracting_matches_pair_dispersion() {
        let n = 9;
        let sol = solve_transformed(n, 0.01, Interaction::Off).unwrap();
        let lap = DiscreteLaplacian::new(n).unwrap();
        let mut expected: Vec<f64> = (2..=n)
            .flat_map(|p| (p..=n).map(move |q| (p, q)))
            .map(|(p, q)| {
                let (a, b) = (lap.eigenvalue(p), lap.eigenvalue(q));
                (a + b) / (a * b)
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        assert_eq!(sol.states.len(), expected.len());
        assert_eq!(sol.deflated, n);
        for (s, e) in sol.states.iter().zip(&expected) {
            assert!((s.energy_ratio - e).abs() <= 1e-8 * e.abs());
        }
    }

    #[test]
    fn fields_symmetric_and_satisfy_equation() {
        let n = 8;
        let lap = DiscreteLaplacian::new(n).unwrap();
        for mode in [Interaction::On, Interaction::Off] {
            let sol = solve_transformed(n, 0.02, mode).unwrap();
            for s in &sol.states {
                assert_abs_diff_eq!(s.field.norm_l2(), 1.0, epsilon = 1e-12);
                for i in 0..n {
                    for j in 0..n {
                        assert_abs_diff_eq!(s.field[(i, j)], s.field[(j, i)], epsilon = 1e-12);
                    }
                }
                let r = s.deflated_residual(&lap, mode);
                assert!(r < 1e-9 * (1.0 + s.energy_ratio.abs()), "residual {r} at λ={}", s.energy_ratio);
            }
        }
    }

    #[test]
    fn sorted_ascending() {
        let sol = solve_transformed_equation(7, 0.01).unwrap();
        for w in sol.states.windows(2) {
            assert!(w[0].energy_ratio <= w[1].energy_ratio);
        }
        assert_abs_diff_eq!(sol.energy(0), sol.states[0].energy_ratio * 0.01);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(solve_transformed_equation(1, 0.01), Err(Error::EmptyDeflation(1))));
        assert!(solve_transformed_equation(5, 0.0).is_err());
    }

    #[test]
    fn projection_removes_constant_directions() {
        let r = Mat::from_fn(4, 4, |i, j| 1.0 + i as f64 + 2.0 * j as f64);
        let p = project_off_zero_modes(&r);
        assert!(p.norm_l2() < 1e-12);
    }
}
