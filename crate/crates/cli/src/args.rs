//! Command-line surface. Every option is optional so that only flags the
//! user actually passed take part in the configuration merge.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use qls_core::analysis::KGrid;
use qls_core::Chi;
use serde::Serialize;

use crate::config::{parse_via_serde, EffectiveOp, GreenMethod, Sector, VectorSelection};

#[derive(Debug, Parser)]
#[command(name = "qls", version, about = "Two-photon spectra and localization in waveguide-coupled qubit arrays")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One- or two-excitation spectrum with eigenvectors.
    Spectrum(SpectrumArgs),
    /// Schmidt classification of every two-excitation state.
    Classify(ClassifyArgs),
    /// Cross-state fraction over a (phi, chi) grid.
    PhaseDiagram(PhaseDiagramArgs),
    /// Row and 2D Fourier maps of one two-excitation state.
    Fourier(FourierArgs),
    /// Two-photon Green's function of the long-wavelength equation.
    Green(GreenArgs),
    /// Transformed equation, localization operator, kernel and odd profiles.
    Effective(EffectiveArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Named parameter set: fig1, fig2d, fig3, fig4, figS2, figS3, figS4.
    #[arg(long)]
    pub preset: Option<String>,
    /// Flat JSON file keyed by flag names; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn sector(s: &str) -> Result<Sector, String> {
    parse_via_serde(s)
}

fn k_grid(s: &str) -> Result<KGrid, String> {
    parse_via_serde(s)
}

fn green_method(s: &str) -> Result<GreenMethod, String> {
    parse_via_serde(s)
}

fn effective_op(s: &str) -> Result<EffectiveOp, String> {
    parse_via_serde(s)
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// Number of qubits.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Interqubit phase in radians.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// On-site interaction in units of Γ₀, or `inf` for hard-core photons.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<Chi>,
    /// `1`, `2`, or `pairs` (noninteracting pair energies).
    #[arg(long, value_parser = sector)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector: Option<Sector>,
    /// Eigenvectors to write: all, none, or comma-separated 0-based indices.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<VectorSelection>,
    /// Write all selected eigenvectors into one indexed file.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub bundle: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<Chi>,
    /// Minimum IPR of the localized factor (real space) and free factor (standing waves).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ipr_min: Option<f64>,
    /// Maximum weight of any singular value beyond the leading two.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sv_max: Option<f64>,
    /// Amplitudes to write: cross, all, none, or 0-based indices.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<VectorSelection>,
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub bundle: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PhaseDiagramArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Comma-separated phases (rows).
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_grid: Option<Vec<f64>>,
    /// Comma-separated interactions (columns); `inf` allowed.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_grid: Option<Vec<Chi>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ipr_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sv_max: Option<f64>,
    /// Worker threads; defaults to QLS_JOBS, else 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct FourierArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<Chi>,
    /// 0-based state index; otherwise the cross state nearest the target energy.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_im: Option<f64>,
    /// Comma-separated 1-based rows to transform.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<usize>>,
    /// `half-range` (k = πj/N) or `full-period` (k = 2πj/N).
    #[arg(long, value_parser = k_grid)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<KGrid>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ipr_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sv_max: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GreenArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Energy in units of φΓ₀.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_ratio: Option<f64>,
    /// 1-based source site x′.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_x: Option<usize>,
    /// 1-based source site y′.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_y: Option<usize>,
    /// `direct`, `series`, or `resonant`.
    #[arg(long, value_parser = green_method)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<GreenMethod>,
    /// Resonant standing-wave index.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
    /// Lowest mode of the short-range kernel (resonant method); defaults to n0 + 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EffectiveArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// `transformed`, `L`, `kernel`, or `profile`.
    #[arg(long, value_parser = effective_op)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<EffectiveOp>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Phase for the transformed equation.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    /// Keep the contact term in the transformed equation (true/false).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interaction: Option<bool>,
    /// Momentum cutoff of the localization operator.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Resonant standing-wave index.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
    /// Lowest mode of the short-range kernel.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    /// 1-based kernel row used for the exponential fit.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<usize>,
    /// 1-based localization-operator eigenstate written as a profile.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state_index: Option<usize>,
    /// Number of odd eigenstates compared with the analytic profile.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub odd_states: Option<usize>,
    /// Profile centre; defaults to the node of the resonant wave nearest the middle.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    /// Eigenvectors to write: all, none, or 0-based indices.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vectors: Option<VectorSelection>,
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub bundle: bool,
}
