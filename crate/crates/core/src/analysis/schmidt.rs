use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

/// Relative tolerance below which the three leading singular values count as equal.
const DEGENERACY_TOL: f64 = 1e-6;

/// Singular value decomposition `ψ = U S Vᴴ` of a two-excitation amplitude.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Descending, nonnegative.
    pub singular_values: Vec<f64>,
    pub left: Mat<c64>,
    pub right: Mat<c64>,
}

pub fn schmidt_decompose(psi: MatRef<'_, c64>) -> Result<SchmidtDecomposition> {
    let svd = psi.svd().map_err(|_| Error::SvdFailed(psi.nrows(), psi.ncols()))?;
    let s = svd.S();
    let k = psi.nrows().min(psi.ncols());
    Ok(SchmidtDecomposition {
        singular_values: (0..k).map(|i| s[i].re).collect(),
        left: svd.U().to_owned(),
        right: svd.V().to_owned(),
    })
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> Mat<c64> {
        let (m, n) = (self.left.nrows(), self.right.nrows());
        let mut out = Mat::<c64>::zeros(m, n);
        for (r, &s) in self.singular_values.iter().enumerate() {
            for j in 0..n {
                let v = self.right[(j, r)].conj() * s;
                for i in 0..m {
                    out[(i, j)] += self.left[(i, r)] * v;
                }
            }
        }
        out
    }

    /// Largest singular value beyond the leading two (0 if there are none).
    pub fn remainder(&self) -> f64 {
        self.singular_values.iter().skip(2).copied().fold(0.0, f64::max)
    }

    pub fn is_degenerate(&self) -> bool {
        let s = &self.singular_values;
        if s.len() < 3 || s[0] == 0.0 {
            return false;
        }
        (s[0] - s[2]).abs() <= DEGENERACY_TOL * s[0]
    }

    /// Unit vectors `a`, `b` with `ψ ≈ c·(a bᵀ + b aᵀ)` on the leading
    /// two-dimensional singular subspace.
    ///
    /// The individual singular vectors are not usable for this: for a pure
    /// `a bᵀ + b aᵀ` with orthogonal equal-norm factors the two leading
    /// singular values coincide and any rotation of `(a, b)` is a valid pair.
    /// The factors are instead recovered as the two linear forms whose
    /// product is the 2x2 quadratic form of `ψ` restricted to that subspace.
    pub fn pair_factors(&self) -> (Vec<c64>, Vec<c64>) {
        let n = self.left.nrows();
        if self.singular_values.len() < 2 || n < 2 {
            let v: Vec<c64> = self.left.col(0).iter().copied().collect();
            return (v.clone(), v);
        }
        let u2 = self.left.subcols(0, 2);
        // M = U₂ᴴ ψ conj(U₂) = S₂ V₂ᴴ conj(U₂)
        let mut m = [[c64::new(0.0, 0.0); 2]; 2];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                let mut acc = c64::new(0.0, 0.0);
                for i in 0..n {
                    acc += self.right[(i, a)].conj() * u2[(i, b)].conj();
                }
                *entry = acc * self.singular_values[a];
            }
        }
        let m11 = m[0][0];
        let m22 = m[1][1];
        let m12 = (m[0][1] + m[1][0]) * 0.5;
        let scale = m11.norm().max(m22.norm()).max(m12.norm());
        let (alpha, beta) = if scale == 0.0 || (m11.norm() <= 1e-14 * scale && m22.norm() <= 1e-14 * scale) {
            ([c64::new(1.0, 0.0), c64::new(0.0, 0.0)], [c64::new(0.0, 0.0), c64::new(1.0, 0.0)])
        } else if m11.norm() >= m22.norm() {
            let (tp, tm) = quadratic_roots(m11, m12, m22);
            ([c64::new(1.0, 0.0), -tp], [c64::new(1.0, 0.0), -tm])
        } else {
            let (sp, sm) = quadratic_roots(m22, m12, m11);
            ([-sp, c64::new(1.0, 0.0)], [-sm, c64::new(1.0, 0.0)])
        };
        let lift = |c: [c64; 2]| -> Vec<c64> {
            let mut v: Vec<c64> = (0..n).map(|i| u2[(i, 0)] * c[0] + u2[(i, 1)] * c[1]).collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for z in &mut v {
                *z /= norm;
            }
            v
        };
        (lift(alpha), lift(beta))
    }
}

/// Roots of `p t² + 2 q t + r = 0` (requires `p ≠ 0`).
fn quadratic_roots(p: c64, q: c64, r: c64) -> (c64, c64) {
    let disc = (q * q - p * r).sqrt();
    // pick the sign that avoids cancellation, then use Vieta for the other root
    let big = if (-q + disc).norm() >= (-q - disc).norm() { -q + disc } else { -q - disc };
    if big.norm() == 0.0 {
        return (c64::new(0.0, 0.0), c64::new(0.0, 0.0));
    }
    let t1 = big / p;
    let t2 = r / big;
    (t1, t2)
}
