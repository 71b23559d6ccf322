use faer::{c64, Mat};

use crate::model::DiscreteLaplacian;

/// Real-space inverse participation ratio `Σ|v_x|⁴` of a unit vector.
pub fn ipr_real(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum()
}

/// Inverse participation ratio over the standing-wave basis of the discrete
/// Laplacian of size `v.len()`.
pub fn ipr_reciprocal(v: &[c64]) -> f64 {
    if v.len() < 2 {
        return ipr_real(v);
    }
    let waves = DiscreteLaplacian::new(v.len()).expect("size checked").standing_waves();
    ipr_reciprocal_in(&waves, v)
}

/// Same as [`ipr_reciprocal`] with a precomputed orthogonal basis (columns).
pub fn ipr_reciprocal_in(basis: &Mat<f64>, v: &[c64]) -> f64 {
    (0..basis.ncols())
        .map(|j| {
            let c: c64 = v.iter().enumerate().map(|(x, z)| z * basis[(x, j)]).sum();
            c.norm_sqr() * c.norm_sqr()
        })
        .sum()
}
