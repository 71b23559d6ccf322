//! Model definition: array parameters and the matrices built from them.
//!
//! Site labels are 1-based (`1..=N`) wherever they appear in the public API
//! (pair lists, source positions); matrix storage is 0-based as usual.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use faer::{c64, Mat};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// On-site interaction strength. `Infinite` selects the hard-core operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chi {
    Finite(f64),
    Infinite,
}

impl Chi {
    pub fn is_infinite(&self) -> bool {
        matches!(self, Chi::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Chi::Finite(v) => Some(v),
            Chi::Infinite => None,
        }
    }
}

impl fmt::Display for Chi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Chi::Finite(v) => write!(f, "{v}"),
            Chi::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Chi {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") || t.eq_ignore_ascii_case("infinity") {
            return Ok(Chi::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("cannot parse chi from {s:?}")))?;
        if v.is_infinite() && v > 0.0 {
            return Ok(Chi::Infinite);
        }
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::InvalidConfig(format!("chi must be >= 0 or inf, got {s}")));
        }
        Ok(Chi::Finite(v))
    }
}

impl Serialize for Chi {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match *self {
            Chi::Finite(v) => serializer.serialize_f64(v),
            Chi::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Chi {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Chi::from_str(&v.to_string()).map_err(serde::de::Error::custom),
            Raw::Text(s) => Chi::from_str(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Physical parameters of the qubit array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub n_qubits: usize,
    /// Interqubit optical phase (radians).
    pub phase: f64,
    /// Single-qubit radiative decay rate; the energy unit.
    pub gamma0: f64,
    pub chi: Chi,
}

impl ArrayConfig {
    /// Builds a validated config with `gamma0 = 1`.
    pub fn new(n_qubits: usize, phase: f64, chi: Chi) -> Result<Self> {
        let cfg = ArrayConfig { n_qubits, phase, gamma0: 1.0, chi };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn hard_core(n_qubits: usize, phase: f64) -> Result<Self> {
        Self::new(n_qubits, phase, Chi::Infinite)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 1 {
            return Err(Error::InvalidConfig("n_qubits must be at least 1".into()));
        }
        if !self.phase.is_finite() {
            return Err(Error::InvalidConfig(format!("phase must be finite, got {}", self.phase)));
        }
        if !(self.gamma0 > 0.0) || !self.gamma0.is_finite() {
            return Err(Error::InvalidConfig(format!("gamma0 must be positive, got {}", self.gamma0)));
        }
        if let Chi::Finite(v) = self.chi {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("chi must be >= 0 or inf, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn validate_two_excitation(&self) -> Result<()> {
        self.validate()?;
        if self.n_qubits < 2 {
            return Err(Error::InvalidConfig("two-excitation solves need n_qubits >= 2".into()));
        }
        Ok(())
    }

    pub fn basis_mode(&self) -> BasisMode {
        if self.chi.is_infinite() {
            BasisMode::HardCore
        } else {
            BasisMode::FiniteChi
        }
    }
}

/// Single-excitation Hamiltonian `H[m][n] = -i Γ₀ exp(iφ|m-n|)`.
///
/// Complex symmetric but not Hermitian; the anti-Hermitian part carries the
/// collective radiative decay.
pub fn build_single_hamiltonian(cfg: &ArrayConfig) -> Result<Mat<c64>> {
    cfg.validate()?;
    let n = cfg.n_qubits;
    let coupling: Vec<c64> = (0..n)
        .map(|d| {
            let arg = cfg.phase * d as f64;
            c64::new(0.0, -cfg.gamma0) * c64::new(arg.cos(), arg.sin())
        })
        .collect();
    Ok(Mat::from_fn(n, n, |i, j| coupling[i.abs_diff(j)]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BasisMode {
    /// `m < n` only; double occupation is excluded.
    HardCore,
    /// `m <= n`; doubly occupied sites carry the interaction energy.
    FiniteChi,
}

impl BasisMode {
    pub fn name(&self) -> &'static str {
        match self {
            BasisMode::HardCore => "hard-core",
            BasisMode::FiniteChi => "finite-chi",
        }
    }
}

/// Symmetrized two-excitation basis, lexicographically ordered 1-based pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBasis {
    mode: BasisMode,
    n: usize,
    pairs: Vec<(usize, usize)>,
    lookup: Vec<Option<usize>>,
}

impl PairBasis {
    pub fn new(n: usize, mode: BasisMode) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("pair basis needs N >= 2, got {n}")));
        }
        let mut pairs = Vec::with_capacity(n * (n + 1) / 2);
        let mut lookup = vec![None; n * n];
        for m in 1..=n {
            let start = if mode == BasisMode::HardCore { m + 1 } else { m };
            for k in start..=n {
                let row = pairs.len();
                lookup[(m - 1) * n + (k - 1)] = Some(row);
                lookup[(k - 1) * n + (m - 1)] = Some(row);
                pairs.push((m, k));
            }
        }
        Ok(PairBasis { mode, n, pairs, lookup })
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Row of the unordered pair `{m, n}` (1-based labels), if it is in the basis.
    pub fn index_of(&self, m: usize, n: usize) -> Option<usize> {
        if m == 0 || n == 0 || m > self.n || n > self.n {
            return None;
        }
        self.lookup[(m - 1) * self.n + (n - 1)]
    }

    /// Site-space components `(i, j, weight)` (0-based) of basis vector `row`.
    fn components(&self, row: usize) -> [(usize, usize, f64); 2] {
        let (m, n) = self.pairs[row];
        if m == n {
            [(m - 1, m - 1, 1.0), (0, 0, 0.0)]
        } else {
            let w = std::f64::consts::FRAC_1_SQRT_2;
            [(m - 1, n - 1, w), (n - 1, m - 1, w)]
        }
    }

    /// Expands basis coefficients into the full symmetric `N x N` amplitude matrix.
    pub fn unfold(&self, coefficients: &[c64]) -> Mat<c64> {
        let mut psi = Mat::<c64>::zeros(self.n, self.n);
        for (row, &c) in coefficients.iter().enumerate() {
            for (i, j, w) in self.components(row) {
                if w != 0.0 {
                    psi[(i, j)] = c * w;
                }
            }
        }
        psi
    }

    /// Inverse of [`PairBasis::unfold`] for symmetric matrices.
    pub fn fold(&self, psi: faer::MatRef<'_, c64>) -> Vec<c64> {
        (0..self.dim())
            .map(|row| {
                self.components(row)
                    .iter()
                    .filter(|c| c.2 != 0.0)
                    .map(|&(i, j, w)| psi[(i, j)] * w)
                    .sum()
            })
            .collect()
    }
}

/// Matrix of `ψ ↦ Hψ + ψH (+ χ diag ψ)` on the symmetrized pair basis.
///
/// Its eigenvalues are the pair energies `2ε`. In hard-core mode the
/// `-2 diag[diag Hψ]` term only acts on the excluded diagonal rows, so the
/// operator is the free propagation restricted to `m ≠ n`.
pub fn build_two_excitation_hamiltonian(cfg: &ArrayConfig, basis: &PairBasis) -> Result<Mat<c64>> {
    cfg.validate_two_excitation()?;
    if basis.mode() != cfg.basis_mode() {
        return Err(Error::BasisMismatch { basis: basis.mode().name(), chi: cfg.chi.to_string() });
    }
    if basis.n_sites() != cfg.n_qubits {
        return Err(Error::InvalidConfig(format!(
            "basis has {} sites but config has {}",
            basis.n_sites(),
            cfg.n_qubits
        )));
    }
    let h = build_single_hamiltonian(cfg)?;
    let chi = cfg.chi.finite().unwrap_or(0.0);
    let site_element = |i: usize, j: usize, k: usize, l: usize| -> c64 {
        let mut v = c64::new(0.0, 0.0);
        if j == l {
            v += h[(i, k)];
        }
        if i == k {
            v += h[(j, l)];
        }
        if i == j && i == k && j == l {
            v += c64::new(chi, 0.0);
        }
        v
    };
    let comps: Vec<_> = (0..basis.dim()).map(|r| basis.components(r)).collect();
    Ok(Mat::from_fn(basis.dim(), basis.dim(), |a, b| {
        let mut acc = c64::new(0.0, 0.0);
        for &(i, j, wa) in &comps[a] {
            if wa == 0.0 {
                continue;
            }
            for &(k, l, wb) in &comps[b] {
                if wb == 0.0 {
                    continue;
                }
                let e = site_element(i, j, k, l);
                if e != c64::new(0.0, 0.0) {
                    acc += e * (wa * wb);
                }
            }
        }
        acc
    }))
}

/// Discrete second derivative with reflecting ends:
/// `½·tridiag(1, -2, 1)` with corner diagonal entries `-½`.
///
/// Its eigenvectors are the standing waves `u_n(x) ∝ cos(k_n (x - ½))`,
/// `k_n = π(n-1)/N`, with eigenvalues `cos k_n - 1`.
#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    size: usize,
    matrix: Mat<f64>,
}

impl DiscreteLaplacian {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("discrete Laplacian needs N >= 2, got {n}")));
        }
        let matrix = Mat::from_fn(n, n, |i, j| {
            if i == j {
                if i == 0 || i == n - 1 {
                    -0.5
                } else {
                    -1.0
                }
            } else if i.abs_diff(j) == 1 {
                0.5
            } else {
                0.0
            }
        });
        Ok(DiscreteLaplacian { size: n, matrix })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    /// `k_j = π(j-1)/N` for 1-based mode index `j`.
    pub fn wavevector(&self, j: usize) -> f64 {
        PI * (j as f64 - 1.0) / self.size as f64
    }

    /// Eigenvalue `cos k_j - 1` of mode `j` (1-based); mode 1 is the zero mode.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        // cos k - 1 = -2 sin²(k/2), without cancellation for small k
        let s = (0.5 * self.wavevector(j)).sin();
        -2.0 * s * s
    }

    /// Unit-norm standing wave of mode `j` (1-based), sampled at sites `1..=N`.
    pub fn standing_wave(&self, j: usize) -> Vec<f64> {
        let n = self.size;
        let k = self.wavevector(j);
        let c = if j == 1 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        (1..=n).map(|x| c * (k * (x as f64 - 0.5)).cos()).collect()
    }

    /// Orthogonal matrix whose column `j-1` is `standing_wave(j)`.
    pub fn standing_waves(&self) -> Mat<f64> {
        let cols: Vec<Vec<f64>> = (1..=self.size).map(|j| self.standing_wave(j)).collect();
        Mat::from_fn(self.size, self.size, |x, j| cols[j][x])
    }

    /// Site positions (1-based, possibly half-integer) of the nodes of mode `j`.
    pub fn nodes(&self, j: usize) -> Vec<f64> {
        if j <= 1 {
            return Vec::new();
        }
        let n = self.size as f64;
        let k = self.wavevector(j);
        (0..j - 1).map(|m| 0.5 + (PI / 2.0 + m as f64 * PI) / k).filter(|&x| x <= n).collect()
    }
}

pub fn build_d2_matrix(n: usize) -> Result<DiscreteLaplacian> {
    DiscreteLaplacian::new(n)
}

pub fn build_pair_basis(n: usize, mode: BasisMode) -> Result<PairBasis> {
    PairBasis::new(n, mode)
}
