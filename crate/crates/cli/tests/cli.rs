use std::fs;
use std::path::Path;

use qls_cli::output::{parse_complex_csv, parse_real_csv, RunManifest};
use serde_json::Value;

fn run(args: &[&str], out: &Path) -> i32 {
    let mut argv: Vec<String> = vec!["qls".into()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--out".into());
    argv.push(out.display().to_string());
    qls_cli::run(argv)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn single_site_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["spectrum", "--n", "1", "--sector", "1"], dir.path()), 0);
    let e = json(&dir.path().join("eigenvalues.json"));
    assert_eq!(e.as_array().unwrap().len(), 1);
    assert_eq!(e[0]["re"].as_f64(), Some(0.0));
    assert_eq!(e[0]["im"].as_f64(), Some(-1.0));
    let v = parse_complex_csv(&fs::read_to_string(dir.path().join("states/state_0000.csv")).unwrap()).unwrap();
    assert_eq!((v.nrows(), v.ncols()), (1, 1));
}

#[test]
fn pair_energy_count() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["spectrum", "--n", "51", "--phi", "0.4", "--sector", "pairs"], dir.path()), 0);
    assert_eq!(json(&dir.path().join("eigenvalues.json")).as_array().unwrap().len(), 1326);
}

#[test]
fn bundle_matches_separate_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run(&["spectrum", "--n", "4", "--phi", "0.3", "--vectors", "1,3"], a.path()), 0);
    assert_eq!(run(&["spectrum", "--n", "4", "--phi", "0.3", "--vectors", "1,3", "--bundle"], b.path()), 0);
    let bundle = parse_real_csv(&fs::read_to_string(b.path().join("states.csv")).unwrap()).unwrap();
    assert_eq!(bundle.len(), 8);
    let single = parse_real_csv(&fs::read_to_string(a.path().join("states/state_0003.csv")).unwrap()).unwrap();
    assert_eq!(bundle[4][0], 3.0);
    assert_eq!(bundle[4][2..], single[0][..]);
    assert!(!a.path().join("states/state_0000.csv").exists());
}

#[test]
fn manifest_lists_every_output_and_config_round_trips() {
    let a = tempfile::tempdir().unwrap();
    assert_eq!(run(&["green", "--preset", "figS3", "--n", "13", "--source-x", "10", "--source-y", "3"], a.path()), 0);
    let m = RunManifest::load(a.path()).unwrap();
    assert_eq!(m.command, "green");
    for f in &m.outputs {
        let bytes = fs::read(a.path().join(&f.path)).unwrap();
        assert_eq!(qls_cli::output::sha256_hex(&bytes), f.sha256);
    }
    let g = parse_real_csv(&fs::read_to_string(a.path().join("green.csv")).unwrap()).unwrap();
    assert_eq!((g.len(), g[0].len()), (13, 13));

    // feeding the resolved configuration back reproduces every output
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("config.json");
    assert_eq!(run(&["green", "--config", cfg.to_str().unwrap()], b.path()), 0);
    let again = RunManifest::load(b.path()).unwrap();
    assert_eq!(again.config, m.config);
    assert_eq!(again.outputs, m.outputs);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["spectrum", "--n", "0"], dir.path()), 2);
    assert_eq!(run(&["spectrum", "--chi", "-1"], dir.path()), 2);
    assert_eq!(run(&["green", "--preset", "fig1"], dir.path()), 2);
    assert_eq!(run(&["green", "--bogus", "1"], dir.path()), 2);
    let file = dir.path().join("c.json");
    fs::write(&file, r#"{ "kappa": 0.1 }"#).unwrap();
    assert_eq!(run(&["green", "--config", file.to_str().unwrap()], dir.path()), 2);
}

#[test]
fn failed_run_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // the configuration resolves, but the body rejects the state index after writing config.json
    assert_eq!(run(&["effective", "--op", "L", "--n", "9", "--state-index", "99"], dir.path()), 2);
    assert!(!dir.path().join("config.json").exists());
    assert!(!dir.path().join("eigenvalues.json").exists());
    assert!(!dir.path().join("manifest.json").exists());
}

#[test]
fn unsatisfiable_threshold_has_no_cross_states() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["classify", "--n", "9", "--phi", "0.2", "--sv-max", "0"], dir.path()), 0);
    assert_eq!(json(&dir.path().join("classification.json"))["cross"].as_u64(), Some(0));
}

#[test]
fn noninteracting_run_has_no_cross_states() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["classify", "--n", "25", "--phi", "0.05", "--chi", "0"], dir.path()), 0);
    let report = json(&dir.path().join("classification.json"));
    assert_eq!(report["total"].as_u64(), Some(325));
    assert_eq!(report["cross_fraction"].as_f64(), Some(0.0));
}

#[test]
fn phase_diagram_independent_of_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let grid = ["phase-diagram", "--n", "25", "--phi-grid", "0.05,0.5,2", "--chi-grid", "0,1,inf"];
    let with_jobs = |jobs: &str, out: &Path| {
        let mut args = grid.to_vec();
        args.extend(["--jobs", jobs]);
        run(&args, out)
    };
    assert_eq!(with_jobs("1", a.path()), 0);
    assert_eq!(with_jobs("3", b.path()), 0);
    let fa = fs::read(a.path().join("fractions.csv")).unwrap();
    assert_eq!(fa, fs::read(b.path().join("fractions.csv")).unwrap());
    let rows = parse_real_csv(&String::from_utf8(fa).unwrap()).unwrap();
    assert_eq!((rows.len(), rows[0].len()), (3, 3));
    assert!(rows.iter().all(|r| r[0] == 0.0));
}

#[test]
fn localization_operator_profile() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["effective", "--preset", "fig4", "--op", "L", "--kappa", "0.1"], dir.path()), 0);
    assert_eq!(json(&dir.path().join("eigenvalues.json")).as_array().unwrap().len(), 31);
    let text = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert!(text.starts_with("x,profile\n"));
    assert_eq!(text.lines().count(), 32);
}

#[test]
fn transformed_and_kernel_outputs() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["effective", "--op", "transformed", "--n", "7", "--vectors", "0", "--bundle"], dir.path()), 0);
    assert_eq!(json(&dir.path().join("transformed.json"))["states"].as_array().unwrap().len(), 21);
    assert!(dir.path().join("fields.csv").exists() && dir.path().join("psi.csv").exists());

    let k = tempfile::tempdir().unwrap();
    assert_eq!(run(&["effective", "--preset", "figS2"], k.path()), 0);
    let report = json(&k.path().join("kernel.json"));
    assert_eq!(report["n_min"].as_u64(), Some(4));
    assert!(report["kappa_fit"].as_f64().unwrap().is_finite());
}
