use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qdsource::output::read_table;
use qdsource::RunConfig;

fn qdsource(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdsource")).args(args).output().unwrap()
}

fn header(path: &Path) -> Vec<String> {
    read_table(path).unwrap().0
}

#[test]
fn validate_config_prints_the_baseline() {
    let out = qdsource(&["validate-config", "--seeded-defaults"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let json: String = text.lines().take_while(|l| !l.starts_with("warning:")).collect::<Vec<_>>().join("\n");
    let cfg: RunConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(cfg, RunConfig::default());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qdsource(&["validate-config"]).status.code(), Some(1));
    let missing = dir.path().join("missing.toml");
    assert_eq!(qdsource(&["validate-config", "-c", missing.to_str().unwrap()]).status.code(), Some(1));
    for (name, body) in [
        ("unit.toml", "[rates]\nkappa = \"25 furlongs\"\n"),
        ("key.toml", "[rates]\nkapa = 25\n"),
        ("range.toml", "[rates]\nkappa = -1\n"),
        ("shape.toml", "[pulse]\nshape = \"square\"\n"),
    ] {
        let path = dir.path().join(name);
        fs::write(&path, body).unwrap();
        let out = qdsource(&["validate-config", "-c", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(1), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn config_file_units_resolve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(
        &path,
        "[couplings]\ng_prime = \"32.9 ueV\"\n[phonons]\nalpha = \"0.03 ps^2\"\ntemperature = \"5 K\"\n[pulse]\nwidth = \"188.5 ps\"\n",
    )
    .unwrap();
    let cfg = qdsource::load_config(&path).unwrap();
    let base = RunConfig::default();
    assert!((cfg.params.g_prime - base.params.g_prime).abs() < 0.05);
    assert!((cfg.params.alpha - base.params.alpha).abs() < 1e-15);
    assert!((cfg.params.pulse_width - base.params.pulse_width).abs() < 1e-4);
}

#[test]
fn undecayed_run_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdsource(&[
        "run",
        "--seeded-defaults",
        "--no-phonons",
        "--t-end",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_writes_curves_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdsource(&["run", "--seeded-defaults", "--no-phonons", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("N_e = 1.00"));
    assert_eq!(header(&dir.path().join("trajectory.csv")), ["t", "rho_X", "rho_Y", "rho_XX", "n_cav", "P_e"]);
    let (h, rows) = read_table(&dir.path().join("emission.csv")).unwrap();
    assert_eq!(h, ["t", "P_e"]);
    assert!(rows.windows(2).all(|w| w[1][1] >= w[0][1]));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let ne = summary["figures"]["photon_number"].as_f64().unwrap();
    assert!((ne - rows.last().unwrap()[1]).abs() < 1e-12);
}

#[test]
fn bath_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdsource(&["bath", "--seeded-defaults", "--temperatures", "0,5,10", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_table(&dir.path().join("bath_temperature.csv")).unwrap();
    assert_eq!(h, ["T", "B", "delta_P"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.windows(2).all(|w| w[1][1] < w[0][1]));
    assert_eq!(header(&dir.path().join("green_function.csv")), ["tau", "Re G_g", "Im G_g"]);
    assert_eq!(header(&dir.path().join("half_fourier.csv")), ["omega", "Re Gamma_g", "Re Gamma_u"]);
}

#[test]
fn eigenenergies_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("eig.csv");
    let out = qdsource(&["eigenenergies", "--seeded-defaults", "--points", "11", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_table(&path).unwrap();
    assert_eq!(h.len(), 9);
    assert_eq!(h[0], "t");
    assert_eq!(rows.len(), 11);
    // Curves follow eigenvectors by continuity; only the first row is sorted.
    assert!(rows[0][1..].windows(2).all(|w| w[1] >= w[0]));
    assert!(rows.iter().flatten().all(|v| v.is_finite()));
}

#[test]
fn spectrum_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    let out = qdsource(&[
        "spectrum",
        "--seeded-defaults",
        "--no-phonons",
        "--omega-min",
        "-300",
        "--omega-max",
        "300",
        "--omega-points",
        "601",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, rows) = read_table(&path).unwrap();
    assert_eq!(h, ["omega", "S_c"]);
    assert_eq!(rows.len(), 601);
    // Symmetric without phonons at resonance.
    assert!((rows[45][1] - rows[555][1]).abs() < 1e-6 * rows[300][1]);
}
