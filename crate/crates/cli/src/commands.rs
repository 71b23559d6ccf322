//! Command bodies and the shared run wrapper that handles configuration,
//! output bookkeeping and the manifest.

use std::path::Path;
use std::time::Instant;

use qls_core::analysis::{fourier_1d, fourier_2d, phase_diagram, spectral_ipr, Classifier, Thresholds};
use qls_core::effective::{
    analytic_odd_profile, build_l_operator, fit_odd_profile, greens_function_direct, greens_function_resonant,
    greens_function_series, resonance_energy_ratio, short_range_g, solve_l, solve_transformed, Interaction,
    ShortRangeKernel,
};
use qls_core::spectra::noninteracting_pair_spectrum;
use qls_core::{c64, single_particle_spectrum, solve_two_excitation, ArrayConfig, DiscreteLaplacian, Mat};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Common;
use crate::config::{
    resolve_from, ClassifyConfig, EffectiveConfig, EffectiveOp, Finalize, FourierConfig, GreenConfig, GreenMethod,
    PhaseDiagramConfig, Sector, SpectrumConfig,
};
use crate::error::CliError;
use crate::output::{
    complex_bundle_csv, complex_matrix_csv, real_bundle_csv, real_matrix_csv, table_csv, CellFailureRecord, OutputSet,
    RunManifest, MANIFEST_FILE,
};

pub const CONFIG_FILE: &str = "config.json";

/// Result of a command body.
#[derive(Debug, Default)]
pub struct Outcome {
    pub summary: Vec<String>,
    pub failures: Vec<CellFailureRecord>,
    /// Set when too few sweep cells succeeded; outputs are kept.
    pub partial: Option<String>,
}

/// Resolves the configuration, runs `body`, and writes `config.json` and
/// the manifest. A failing body leaves no outputs behind.
pub fn execute<C, F>(command: &str, base: C, common: &Common, flags: Value, body: F) -> Result<RunManifest, CliError>
where
    C: Serialize + DeserializeOwned + Finalize,
    F: FnOnce(&C, &mut OutputSet) -> Result<Outcome, CliError>,
{
    let (cfg, materialized) =
        resolve_from::<C>(command, base, common.preset.as_deref(), common.config.as_deref(), flags)?;
    let start = Instant::now();
    let mut set = OutputSet::new(&common.out).map_err(|e| CliError::config(format!("{e:#}")))?;
    let _ = std::fs::remove_file(common.out.join(MANIFEST_FILE));
    set.write_json(CONFIG_FILE, &materialized)?;
    let outcome = body(&cfg, &mut set)?;
    let outputs = set.commit();
    let manifest = RunManifest {
        command: command.to_string(),
        preset: common.preset.clone(),
        config: materialized,
        version: env!("CARGO_PKG_VERSION").to_string(),
        duration_seconds: start.elapsed().as_secs_f64(),
        outputs,
        failures: outcome.failures,
    };
    manifest.save(&common.out)?;
    for line in &outcome.summary {
        println!("{line}");
    }
    match outcome.partial {
        Some(msg) => Err(CliError::partial(msg)),
        None => Ok(manifest),
    }
}

fn state_file(dir: &str, i: usize) -> String {
    format!("{dir}/state_{i:04}.csv")
}

#[derive(Serialize)]
struct EigenRecord {
    index: usize,
    re: f64,
    im: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    multiplicity: Option<usize>,
}

fn write_complex_states(
    set: &mut OutputSet,
    dir: &str,
    bundle: bool,
    states: &[(usize, Mat<c64>)],
) -> Result<(), CliError> {
    if bundle {
        let text = complex_bundle_csv(states.iter().map(|(i, m)| (*i, m)));
        set.write(&format!("{dir}.csv"), text.as_bytes())?;
    } else {
        for (i, m) in states {
            set.write(&state_file(dir, *i), complex_matrix_csv(m).as_bytes())?;
        }
    }
    Ok(())
}

fn write_real_states(set: &mut OutputSet, dir: &str, bundle: bool, states: &[(usize, Mat<f64>)]) -> Result<(), CliError> {
    if bundle {
        let text = real_bundle_csv(states.iter().map(|(i, m)| (*i, m)));
        set.write(&format!("{dir}.csv"), text.as_bytes())?;
    } else {
        for (i, m) in states {
            set.write(&state_file(dir, *i), real_matrix_csv(m).as_bytes())?;
        }
    }
    Ok(())
}

fn column(v: &[c64]) -> Mat<c64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

fn real_column(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

pub fn spectrum(cfg: &SpectrumConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let array = ArrayConfig::new(cfg.n, cfg.phi, cfg.chi)?;
    let mut records = Vec::new();
    let mut vectors = Vec::new();
    match cfg.sector {
        Sector::Single => {
            let spec = single_particle_spectrum(&array)?;
            for (i, e) in spec.eigenvalues.iter().enumerate() {
                records.push(EigenRecord { index: i, re: e.re, im: e.im, residual: Some(spec.residuals[i]), multiplicity: None });
                if cfg.vectors.selects(i, false) {
                    vectors.push((i, column(&spec.eigenvector(i))));
                }
            }
        }
        Sector::Pair => {
            let solved = solve_two_excitation(&array)?;
            for (i, s) in solved.states.into_iter().enumerate() {
                records.push(EigenRecord {
                    index: i,
                    re: s.energy.re,
                    im: s.energy.im,
                    residual: Some(s.residual),
                    multiplicity: Some(s.multiplicity),
                });
                if cfg.vectors.selects(i, false) {
                    vectors.push((i, s.psi));
                }
            }
        }
        Sector::Pairs => {
            for (i, e) in noninteracting_pair_spectrum(&array)?.iter().enumerate() {
                records.push(EigenRecord { index: i, re: e.re, im: e.im, residual: None, multiplicity: None });
            }
        }
    }
    set.write_json("eigenvalues.json", &records)?;
    write_complex_states(set, "states", cfg.bundle, &vectors)?;
    Ok(Outcome { summary: vec![format!("{} eigenvalues", records.len())], ..Outcome::default() })
}

#[derive(Serialize)]
struct StateClassification {
    index: usize,
    re: f64,
    im: f64,
    /// Leading six, normalized to unit quadratic sum.
    singular_values: Vec<f64>,
    ipr_loc_real: f64,
    ipr_free_recip: f64,
    residual_weight: f64,
    is_cross: bool,
    indeterminate: bool,
    multiplicity: usize,
    reliable: bool,
}

#[derive(Serialize)]
struct ClassificationReport {
    total: usize,
    cross: usize,
    cross_fraction: f64,
    states: Vec<StateClassification>,
}

fn thresholds(ipr_min: f64, sv_max: f64) -> Result<Thresholds, CliError> {
    if !ipr_min.is_finite() || !sv_max.is_finite() {
        return Err(CliError::config("thresholds must be finite"));
    }
    Ok(Thresholds { ipr_min, sv_max })
}

pub fn classify(cfg: &ClassifyConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let array = ArrayConfig::new(cfg.n, cfg.phi, cfg.chi)?;
    let classifier = Classifier::new(cfg.n, thresholds(cfg.ipr_min, cfg.sv_max)?)?;
    let solved = solve_two_excitation(&array)?;
    let mut states = Vec::with_capacity(solved.states.len());
    let mut amplitudes = Vec::new();
    let mut factors = Vec::new();
    for (i, s) in solved.states.iter().enumerate() {
        let c = classifier.classify(s.psi.as_ref())?;
        // an eigenvector inside a degenerate eigenspace has no definite shape
        let is_cross = c.is_cross && s.is_reliable() && s.is_unique();
        if cfg.vectors.selects(i, is_cross) {
            amplitudes.push((i, s.psi.clone()));
            let n = cfg.n;
            factors.push((i, Mat::from_fn(n, 2, |x, j| if j == 0 { c.psi_loc[x] } else { c.psi_free[x] })));
        }
        states.push(StateClassification {
            index: i,
            re: s.energy.re,
            im: s.energy.im,
            singular_values: c.singular_values.iter().take(6).copied().collect(),
            ipr_loc_real: c.ipr_loc_real,
            ipr_free_recip: c.ipr_free_recip,
            residual_weight: c.residual_weight,
            is_cross,
            indeterminate: c.indeterminate,
            multiplicity: s.multiplicity,
            reliable: s.is_reliable(),
        });
    }
    let cross = states.iter().filter(|s| s.is_cross).count();
    let total = states.len();
    let report = ClassificationReport { total, cross, cross_fraction: cross as f64 / total as f64, states };
    set.write_json("classification.json", &report)?;
    write_complex_states(set, "states", cfg.bundle, &amplitudes)?;
    write_complex_states(set, "factors", cfg.bundle, &factors)?;
    Ok(Outcome {
        summary: vec![format!("cross fraction {:.6} ({cross}/{total})", report.cross_fraction)],
        ..Outcome::default()
    })
}

/// Fraction of cells that must succeed for a sweep to count as complete.
pub const SWEEP_SUCCESS_FRACTION: f64 = 0.9;

pub fn phase(cfg: &PhaseDiagramConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let t = thresholds(cfg.ipr_min, cfg.sv_max)?;
    let diagram = phase_diagram(cfg.n, &cfg.phi_grid, &cfg.chi_grid, t, cfg.jobs)?;
    let fractions = diagram.fractions();
    let mut csv = String::new();
    for row in &fractions {
        let cells: Vec<String> = row.iter().map(|f| crate::output::fmt_float(f.unwrap_or(f64::NAN))).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    set.write("fractions.csv", csv.as_bytes())?;
    set.write_json("phase_diagram.json", &diagram)?;
    let failures: Vec<CellFailureRecord> = diagram
        .failures
        .iter()
        .map(|f| CellFailureRecord { phi: f.phi, chi: f.chi.to_string(), message: f.message.clone() })
        .collect();
    let (ok, total) = (diagram.succeeded(), diagram.cell_count());
    let partial = ((ok as f64) < SWEEP_SUCCESS_FRACTION * total as f64)
        .then(|| format!("only {ok} of {total} sweep cells succeeded"));
    let max = diagram.max_fraction().unwrap_or(f64::NAN);
    Ok(Outcome {
        summary: vec![format!("{ok}/{total} cells, max cross fraction {max:.6}")],
        failures,
        partial,
    })
}

pub fn fourier(cfg: &FourierConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let array = ArrayConfig::new(cfg.n, cfg.phi, cfg.chi)?;
    for &r in &cfg.rows {
        if r == 0 || r > cfg.n {
            return Err(CliError::config(format!("row {r} outside 1..={}", cfg.n)));
        }
    }
    let solved = solve_two_excitation(&array)?;
    let target = c64::new(cfg.target_re, cfg.target_im);
    let (index, is_cross) = match cfg.state {
        Some(i) => {
            if i >= solved.states.len() {
                return Err(CliError::config(format!("state {i} outside 0..{}", solved.states.len())));
            }
            let classifier = Classifier::new(cfg.n, thresholds(cfg.ipr_min, cfg.sv_max)?)?;
            let s = &solved.states[i];
            (i, classifier.classify(s.psi.as_ref())?.is_cross && s.is_reliable() && s.is_unique())
        }
        None => {
            let classifier = Classifier::new(cfg.n, thresholds(cfg.ipr_min, cfg.sv_max)?)?;
            let mut best: Option<(usize, f64)> = None;
            for (i, s) in solved.states.iter().enumerate() {
                if !s.is_reliable() || !s.is_unique() {
                    continue;
                }
                let d = (s.energy - target).norm();
                if best.is_some_and(|(_, bd)| bd <= d) {
                    continue;
                }
                if classifier.classify(s.psi.as_ref())?.is_cross {
                    best = Some((i, d));
                }
            }
            let (i, _) = best.ok_or_else(|| CliError::config("no cross-classified state to transform"))?;
            (i, true)
        }
    };
    let state = &solved.states[index];
    let ks = cfg.k_grid.wavevectors(cfg.n);
    let mut rows = Vec::new();
    for &r in &cfg.rows {
        let density = fourier_1d(state.psi.as_ref(), r, cfg.k_grid)?;
        let ipr = spectral_ipr(&density);
        let table = table_csv(&["k", "density"], ks.iter().zip(&density).map(|(k, d)| vec![*k, *d]));
        set.write(&format!("row_{r:03}.csv"), table.as_bytes())?;
        rows.push(json!({ "row": r, "reciprocal_ipr": ipr }));
    }
    set.write("map_2d.csv", real_matrix_csv(&fourier_2d(state.psi.as_ref(), cfg.k_grid)).as_bytes())?;
    set.write("psi.csv", complex_matrix_csv(&state.psi).as_bytes())?;
    let report = json!({
        "state": index,
        "re": state.energy.re,
        "im": state.energy.im,
        "distance_to_target": (state.energy - target).norm(),
        "is_cross": is_cross,
        "rows": rows,
    });
    set.write_json("fourier.json", &report)?;
    Ok(Outcome {
        summary: vec![format!("state {index} at {:.6}{:+.6}i", state.energy.re, state.energy.im)],
        ..Outcome::default()
    })
}

pub fn green(cfg: &GreenConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let source = (cfg.source_x, cfg.source_y);
    let g = match cfg.method {
        GreenMethod::Direct => greens_function_direct(cfg.n, cfg.energy_ratio, source)?,
        GreenMethod::Series => greens_function_series(cfg.n, cfg.energy_ratio, source)?,
        GreenMethod::Resonant => greens_function_resonant(cfg.n, cfg.energy_ratio, cfg.n0, cfg.n_min, source)?,
    };
    set.write("green.csv", real_matrix_csv(&g.values).as_bytes())?;
    let report = json!({
        "source": [g.source.0, g.source.1],
        "energy_ratio": g.energy_ratio,
        "residual": g.residual,
        "resonance_energy_ratio": resonance_energy_ratio(cfg.n, cfg.n0)?,
    });
    set.write_json("green.json", &report)?;
    Ok(Outcome { summary: vec![format!("residual {:.3e}", g.residual)], ..Outcome::default() })
}

fn odd_parity(v: &[f64], center: f64) -> f64 {
    // Σ v(x)v(2c − x) over sites whose mirror image is a site
    let n = v.len();
    let mut acc = 0.0;
    for x in 1..=n {
        let m = 2.0 * center - x as f64;
        if (m - m.round()).abs() < 1e-9 && m >= 1.0 && m <= n as f64 {
            acc += v[x - 1] * v[m.round() as usize - 1];
        }
    }
    acc / v.iter().map(|z| z * z).sum::<f64>()
}

pub fn effective(cfg: &EffectiveConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    match cfg.op {
        EffectiveOp::Transformed => transformed(cfg, set),
        EffectiveOp::L => l_operator(cfg, set),
        EffectiveOp::Kernel => kernel(cfg, set),
        EffectiveOp::Profile => profiles(cfg, set),
    }
}

fn transformed(cfg: &EffectiveConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let interaction = if cfg.interaction { Interaction::On } else { Interaction::Off };
    let sol = solve_transformed(cfg.n, cfg.phi, interaction)?;
    let lap = DiscreteLaplacian::new(cfg.n)?;
    let mut records = Vec::new();
    let mut fields = Vec::new();
    let mut psis = Vec::new();
    for (i, s) in sol.states.iter().enumerate() {
        records.push(json!({
            "index": i,
            "energy_ratio": s.energy_ratio,
            "energy": sol.energy(i),
            "residual": s.deflated_residual(&lap, interaction),
        }));
        if cfg.vectors.selects(i, false) {
            fields.push((i, s.field.clone()));
            psis.push((i, s.reconstruct_psi(&lap)));
        }
    }
    set.write_json("transformed.json", &json!({ "deflated": sol.deflated, "states": records }))?;
    write_real_states(set, "fields", cfg.bundle, &fields)?;
    write_real_states(set, "psi", cfg.bundle, &psis)?;
    Ok(Outcome { summary: vec![format!("{} transformed-equation states", sol.states.len())], ..Outcome::default() })
}

fn l_operator(cfg: &EffectiveConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let spec = solve_l(&build_l_operator(cfg.n, cfg.kappa, cfg.n0)?)?;
    if cfg.state_index == 0 || cfg.state_index > spec.len() {
        return Err(CliError::config(format!("state-index {} outside 1..={}", cfg.state_index, spec.len())));
    }
    let records: Vec<EigenRecord> = spec
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, e)| EigenRecord { index: i, re: e.re, im: e.im, residual: Some(spec.residuals[i]), multiplicity: None })
        .collect();
    set.write_json("eigenvalues.json", &records)?;
    let profile: Vec<f64> = spec.eigenvector(cfg.state_index - 1).iter().map(|z| z.re).collect();
    let table = table_csv(&["x", "profile"], profile.iter().enumerate().map(|(x, v)| vec![(x + 1) as f64, *v]));
    set.write("profile.csv", table.as_bytes())?;
    let vectors: Vec<(usize, Mat<f64>)> = (0..spec.len())
        .filter(|&i| cfg.vectors.selects(i, false))
        .map(|i| (i, real_column(&spec.eigenvector(i).iter().map(|z| z.re).collect::<Vec<_>>())))
        .collect();
    write_real_states(set, "states", cfg.bundle, &vectors)?;
    Ok(Outcome { summary: vec![format!("{} eigenvalues of the localization operator", spec.len())], ..Outcome::default() })
}

fn kernel(cfg: &EffectiveConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let k = short_range_g(cfg.n, cfg.n_min, cfg.reference)?;
    set.write("kernel.csv", real_matrix_csv(&k.matrix).as_bytes())?;
    let kappa = DiscreteLaplacian::new(cfg.n)?.wavevector(cfg.n_min + 1);
    let r = cfg.reference - 1;
    let rows: Vec<Vec<f64>> = (0..cfg.n)
        .map(|y| {
            let d = y.abs_diff(r) as f64;
            vec![(y + 1) as f64, d, k.matrix[(y, r)], ShortRangeKernel::continuum(kappa, d)]
        })
        .collect();
    set.write("kernel_row.csv", table_csv(&["y", "separation", "numeric", "continuum"], rows.into_iter()).as_bytes())?;
    let report = json!({
        "n_min": k.n_min,
        "reference": k.reference,
        "kappa_fit": k.kappa_fit,
        "amplitude": k.amplitude,
        "kappa_continuum": kappa,
    });
    set.write_json("kernel.json", &report)?;
    Ok(Outcome { summary: vec![format!("kappa fit {:.6} vs {:.6}", k.kappa_fit, kappa)], ..Outcome::default() })
}

fn profiles(cfg: &EffectiveConfig, set: &mut OutputSet) -> Result<Outcome, CliError> {
    let spec = solve_l(&build_l_operator(cfg.n, cfg.kappa, cfg.n0)?)?;
    let mut picked = Vec::new();
    for i in 0..spec.len() {
        if picked.len() == cfg.odd_states {
            break;
        }
        let v: Vec<f64> = spec.eigenvector(i).iter().map(|z| z.re).collect();
        if odd_parity(&v, cfg.center) < -0.5 {
            picked.push((i, v));
        }
    }
    let mut records = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![(1..=cfg.n).map(|x| x as f64).collect()];
    let mut header = vec!["x".to_string()];
    for (i, v) in &picked {
        let fit = fit_odd_profile(v, cfg.center)?;
        let model = analytic_odd_profile(fit.x0, cfg.center, cfg.n)?;
        // align the sign of the numeric state with the model
        let sign = if v.iter().zip(&model).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        columns.push(v.iter().map(|z| sign * z).collect());
        columns.push(model);
        header.push(format!("numeric_{i}"));
        header.push(format!("analytic_{i}"));
        records.push(json!({
            "index": i,
            "re": spec.eigenvalues[*i].re,
            "im": spec.eigenvalues[*i].im,
            "x0": fit.x0,
            "overlap": fit.overlap,
        }));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = (0..cfg.n).map(|x| columns.iter().map(|c| c[x]).collect::<Vec<f64>>());
    set.write("profiles.csv", table_csv(&header_refs, rows).as_bytes())?;
    set.write_json("profiles.json", &json!({ "center": cfg.center, "states": records }))?;
    Ok(Outcome { summary: vec![format!("{} odd states", picked.len())], ..Outcome::default() })
}

/// Default phase-diagram configuration with the worker count taken from `QLS_JOBS`.
pub fn phase_base(env_jobs: Option<&str>) -> Result<PhaseDiagramConfig, CliError> {
    let mut base = PhaseDiagramConfig::default();
    if let Some(v) = env_jobs {
        base.jobs = v.trim().parse().map_err(|_| CliError::config(format!("QLS_JOBS must be a positive integer, got {v:?}")))?;
    }
    Ok(base)
}

/// Loads the manifest of a finished run.
pub fn load_manifest(dir: &Path) -> Result<RunManifest, CliError> {
    RunManifest::load(dir).map_err(|e| CliError::config(format!("{e:#}")))
}
