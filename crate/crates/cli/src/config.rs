//! Per-command configuration, named presets and the layered merge
//! `defaults < preset < config file < flags`.
//!
//! Every layer is a flat JSON object keyed by flag name, so a resolved
//! configuration written to a manifest can be fed back with `--config`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use qls_core::analysis::{default_chi_grid, default_phi_grid, KGrid, Thresholds};
use qls_core::Chi;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    #[serde(rename = "1")]
    Single,
    #[serde(rename = "2")]
    Pair,
    /// Noninteracting pair energies `(ε_n + ε_m)/2`.
    #[serde(rename = "pairs")]
    Pairs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenMethod {
    Direct,
    Series,
    Resonant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EffectiveOp {
    #[serde(rename = "transformed")]
    Transformed,
    #[serde(rename = "L")]
    L,
    #[serde(rename = "kernel")]
    Kernel,
    #[serde(rename = "profile")]
    Profile,
}

/// Which eigenvector files to write.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum VectorSelection {
    All,
    None,
    /// Only states classified as cross-shaped (classification commands).
    Cross,
    /// Explicit 0-based state indices.
    Indices(Vec<usize>),
}

impl VectorSelection {
    pub fn selects(&self, index: usize, is_cross: bool) -> bool {
        match self {
            VectorSelection::All => true,
            VectorSelection::None => false,
            VectorSelection::Cross => is_cross,
            VectorSelection::Indices(v) => v.contains(&index),
        }
    }
}

impl FromStr for VectorSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "all" => Ok(VectorSelection::All),
            "none" => Ok(VectorSelection::None),
            "cross" => Ok(VectorSelection::Cross),
            list => list
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad vector selection {s:?}")))
                .collect::<Result<Vec<_>, _>>()
                .map(VectorSelection::Indices),
        }
    }
}

impl fmt::Display for VectorSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorSelection::All => f.write_str("all"),
            VectorSelection::None => f.write_str("none"),
            VectorSelection::Cross => f.write_str("cross"),
            VectorSelection::Indices(v) => {
                let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl TryFrom<String> for VectorSelection {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<VectorSelection> for String {
    fn from(v: VectorSelection) -> String {
        v.to_string()
    }
}

/// Parses a command-line value through the type's JSON string form.
pub fn parse_via_serde<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SpectrumConfig {
    pub n: usize,
    pub phi: f64,
    pub chi: Chi,
    pub sector: Sector,
    pub vectors: VectorSelection,
    pub bundle: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            n: 51,
            phi: 0.05,
            chi: Chi::Infinite,
            sector: Sector::Pair,
            vectors: VectorSelection::All,
            bundle: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClassifyConfig {
    pub n: usize,
    pub phi: f64,
    pub chi: Chi,
    pub ipr_min: f64,
    pub sv_max: f64,
    pub vectors: VectorSelection,
    pub bundle: bool,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        ClassifyConfig {
            n: 51,
            phi: 0.05,
            chi: Chi::Infinite,
            ipr_min: t.ipr_min,
            sv_max: t.sv_max,
            vectors: VectorSelection::Cross,
            bundle: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct PhaseDiagramConfig {
    pub n: usize,
    pub phi_grid: Vec<f64>,
    pub chi_grid: Vec<Chi>,
    pub ipr_min: f64,
    pub sv_max: f64,
    pub jobs: usize,
}

impl Default for PhaseDiagramConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        PhaseDiagramConfig {
            n: 25,
            phi_grid: default_phi_grid(),
            chi_grid: default_chi_grid(),
            ipr_min: t.ipr_min,
            sv_max: t.sv_max,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FourierConfig {
    pub n: usize,
    pub phi: f64,
    pub chi: Chi,
    /// Explicit 0-based state index; otherwise the cross state nearest the target energy.
    pub state: Option<usize>,
    pub target_re: f64,
    pub target_im: f64,
    /// 1-based rows to transform; empty means the edge row and the centre row.
    pub rows: Vec<usize>,
    pub k_grid: KGrid,
    pub ipr_min: f64,
    pub sv_max: f64,
}

impl Default for FourierConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        FourierConfig {
            n: 51,
            phi: 0.05,
            chi: Chi::Infinite,
            state: None,
            target_re: -2.57,
            target_im: -0.54,
            rows: Vec::new(),
            k_grid: KGrid::default(),
            ipr_min: t.ipr_min,
            sv_max: t.sv_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GreenConfig {
    pub n: usize,
    /// `ε/(φΓ₀)`.
    pub energy_ratio: f64,
    pub source_x: usize,
    pub source_y: usize,
    pub method: GreenMethod,
    pub n0: usize,
    /// Lowest kernel mode for the resonant form; 0 means `n0 + 1`.
    pub n_min: usize,
}

impl Default for GreenConfig {
    fn default() -> Self {
        GreenConfig { n: 31, energy_ratio: -194.0, source_x: 25, source_y: 8, method: GreenMethod::Direct, n0: 2, n_min: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EffectiveConfig {
    pub op: EffectiveOp,
    pub n: usize,
    pub phi: f64,
    pub interaction: bool,
    pub kappa: f64,
    pub n0: usize,
    pub n_min: usize,
    /// 1-based site of the kernel row.
    pub reference: usize,
    /// 1-based eigenstate of `𝓛` written as a profile.
    pub state_index: usize,
    /// Number of odd states compared with the analytic profile.
    pub odd_states: usize,
    /// Node position for the analytic profile; 0 means the node of `u₀` nearest the centre.
    pub center: f64,
    pub vectors: VectorSelection,
    pub bundle: bool,
}

impl Default for EffectiveConfig {
    fn default() -> Self {
        EffectiveConfig {
            op: EffectiveOp::L,
            n: 31,
            phi: 0.01,
            interaction: true,
            kappa: 0.1,
            n0: 2,
            n_min: 4,
            reference: 8,
            state_index: 3,
            odd_states: 3,
            center: 0.0,
            vectors: VectorSelection::None,
            bundle: false,
        }
    }
}

/// Replaces "derive from other fields" placeholders by concrete values so
/// the materialized configuration has no implicit defaults left.
pub trait Finalize {
    fn finalize(&mut self) -> Result<(), CliError> {
        Ok(())
    }
}

impl Finalize for SpectrumConfig {}
impl Finalize for ClassifyConfig {}

impl Finalize for PhaseDiagramConfig {
    fn finalize(&mut self) -> Result<(), CliError> {
        if self.jobs == 0 {
            return Err(CliError::config("jobs must be at least 1"));
        }
        Ok(())
    }
}

impl Finalize for FourierConfig {
    fn finalize(&mut self) -> Result<(), CliError> {
        if self.rows.is_empty() {
            self.rows = vec![1, self.n.div_ceil(2)];
        }
        Ok(())
    }
}

impl Finalize for GreenConfig {
    fn finalize(&mut self) -> Result<(), CliError> {
        if self.n_min == 0 {
            self.n_min = self.n0 + 1;
        }
        Ok(())
    }
}

impl Finalize for EffectiveConfig {
    fn finalize(&mut self) -> Result<(), CliError> {
        if self.center == 0.0 {
            let lap = qls_core::DiscreteLaplacian::new(self.n)?;
            let mid = (self.n as f64 + 1.0) / 2.0;
            self.center = lap
                .nodes(self.n0)
                .into_iter()
                .min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()))
                .map(|x| if (x - x.round()).abs() < 1e-9 { x.round() } else { x })
                .ok_or_else(|| CliError::config(format!("standing wave n0 = {} has no node", self.n0)))?;
        }
        Ok(())
    }
}

pub const PRESETS: [&str; 7] = ["fig1", "fig2d", "fig3", "fig4", "figS2", "figS3", "figS4"];

/// Caption parameters of each figure, restricted to the keys a command understands.
pub fn preset(command: &str, name: &str) -> Option<Value> {
    let fig1 = json!({ "n": 51, "phi": 0.05, "chi": "inf" });
    let v = match (command, name) {
        ("spectrum", "fig1") => json!({ "n": 51, "phi": 0.05, "chi": "inf", "sector": "2", "vectors": "none" }),
        ("classify", "fig1") => fig1,
        ("fourier", "fig1" | "fig3") => {
            json!({ "n": 51, "phi": 0.05, "chi": "inf", "target-re": -2.57, "target-im": -0.54, "rows": [1, 26] })
        }
        ("phase-diagram", "fig2d") => json!({
            "n": 25,
            "phi-grid": default_phi_grid(),
            "chi-grid": default_chi_grid(),
        }),
        ("green", "figS3") => {
            json!({ "n": 31, "energy-ratio": -194.0, "source-x": 25, "source-y": 8, "method": "direct" })
        }
        ("effective", "fig4") => json!({ "op": "L", "n": 31, "kappa": 0.1, "n0": 2, "state-index": 3 }),
        ("effective", "figS2") => json!({ "op": "kernel", "n": 31, "n0": 3, "n-min": 4, "reference": 8 }),
        ("effective", "figS4") => json!({ "op": "profile", "n": 31, "kappa": 0.1, "n0": 2, "odd-states": 3 }),
        _ => return None,
    };
    Some(v)
}

fn as_object(v: Value, origin: &str) -> Result<Map<String, Value>, CliError> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::config(format!("{origin} must be a flat JSON object"))),
    }
}

/// Merges the layers over `C::default()`.
pub fn resolve<C>(
    command: &str,
    preset_name: Option<&str>,
    config_file: Option<&Path>,
    flags: Value,
) -> Result<(C, Value), CliError>
where
    C: Serialize + DeserializeOwned + Default + Finalize,
{
    resolve_from(command, C::default(), preset_name, config_file, flags)
}

/// Merges the layers over `base` and deserializes into the command's config
/// type. Returns the typed config together with its materialized JSON form.
pub fn resolve_from<C>(
    command: &str,
    base: C,
    preset_name: Option<&str>,
    config_file: Option<&Path>,
    flags: Value,
) -> Result<(C, Value), CliError>
where
    C: Serialize + DeserializeOwned + Finalize,
{
    let mut merged = as_object(serde_json::to_value(base).expect("defaults serialize"), "defaults")?;
    let mut layers = Vec::new();
    if let Some(name) = preset_name {
        let v = preset(command, name).ok_or_else(|| {
            CliError::config(format!("preset {name:?} does not apply to `{command}` (known presets: {})", PRESETS.join(", ")))
        })?;
        layers.push((v, format!("preset {name}")));
    }
    if let Some(path) = config_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config file {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("config file {} is not valid JSON: {e}", path.display())))?;
        layers.push((v, format!("config file {}", path.display())));
    }
    layers.push((flags, "command-line flags".to_string()));
    for (layer, origin) in layers {
        for (k, v) in as_object(layer, &origin)? {
            if !merged.contains_key(&k) {
                return Err(CliError::config(format!("unknown key {k:?} in {origin} for `{command}`")));
            }
            merged.insert(k, v);
        }
    }
    let mut typed: C = serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::config(format!("invalid configuration for `{command}`: {e}")))?;
    typed.finalize()?;
    let materialized = serde_json::to_value(&typed).expect("config serializes");
    Ok((typed, materialized))
}
