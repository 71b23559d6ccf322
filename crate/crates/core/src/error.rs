use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pair basis mode {basis} does not match interaction chi = {chi}")]
    BasisMismatch { basis: &'static str, chi: String },

    #[error("eigensolver failed to converge for a {0}x{0} matrix")]
    NoConvergence(usize),

    #[error("singular value decomposition failed for a {0}x{1} matrix")]
    SvdFailed(usize, usize),

    #[error("dispersion is singular at k = {k}, phi = {phi} (cos k = cos phi)")]
    LightLine { k: f64, phi: f64 },

    #[error("approximate dispersion is undefined at k = 0")]
    ZeroWavevector,

    #[error("site index {index} out of range 1..={n}")]
    SiteOutOfRange { index: usize, n: usize },

    #[error("deflated transformed problem is empty for N = {0}")]
    EmptyDeflation(usize),

    #[error("Green's function system is resonant: energy ratio {energy_ratio} is within tolerance of eigenvalue {eigenvalue}")]
    NearResonance { energy_ratio: f64, eigenvalue: f64 },

    #[error("resonant Green's function needs a nonzero detuning")]
    ZeroDetuning,
}

pub type Result<T> = std::result::Result<T, Error>;
